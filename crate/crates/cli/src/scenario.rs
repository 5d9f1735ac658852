//! Scenario documents: JSON with a `model.kind` discriminator.
//!
//! Field names follow the model symbols (`a`, `b`, `c`, `beta`, `gamma`,
//! `m`, `r`, `a_ij`, `tau`, `N`). A file holds one scenario, or a batch as
//! `{"scenarios": [...]}`.

use serde::{Deserialize, Serialize};

use marketdyn_core::competition::{
    BassCompetition, ChurnMatrix, ChurnSpec, PeriodicChurnSpec, Sinusoid, StimulatedChurnSpec,
};
use marketdyn_core::feedback::{calibrate_rate, FeedbackKernel, FeedbackModel};
use marketdyn_core::games::{BpqCase, BpqKind, BpqState, ComplementarySpec};
use marketdyn_core::monopoly::{BirthDeathParams, HesitationParams, HesitationVariant, RateSchedule, Segment, SimpleAdoption};

use crate::error::CliError;

pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: Model,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Channels to emit, in order; all channels when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
    /// Label only, used when tables render months and days.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_unit: Option<String>,
}

fn zero() -> f64 {
    0.0
}

fn one() -> f64 {
    1.0
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    /// Constant adaptation rate; give `a` or `t50`.
    Simple {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t50: Option<f64>,
        #[serde(default = "zero", skip_serializing_if = "is_zero")]
        u0: f64,
        #[serde(rename = "N", default = "one")]
        n: f64,
    },
    Scheduled {
        a: Rate,
        #[serde(default = "zero", skip_serializing_if = "is_zero")]
        u0: f64,
        #[serde(rename = "N", default = "one")]
        n: f64,
    },
    Segmented {
        segments: Vec<SegmentDoc>,
        #[serde(rename = "N", default = "one")]
        n: f64,
    },
    Hesitation {
        a: f64,
        b: f64,
        c: f64,
        variant: Variant,
        #[serde(rename = "N", default = "one")]
        n: f64,
    },
    BirthDeath {
        a: f64,
        d: f64,
        f: f64,
        g: f64,
        #[serde(rename = "N", default = "one")]
        n: f64,
    },
    /// `u̇ = rate (1 - u) F(u)`; give `rate` or `t50`.
    Feedback {
        kernel: Kernel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t50: Option<f64>,
        #[serde(default = "zero", skip_serializing_if = "is_zero")]
        u0: f64,
        #[serde(rename = "N", default = "one")]
        n: f64,
    },
    /// Bass model with `γ = ratio · a`; give `a` or `t50`.
    Bass {
        ratio: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t50: Option<f64>,
        #[serde(default = "zero", skip_serializing_if = "is_zero")]
        u0: f64,
        #[serde(rename = "N", default = "one")]
        n: f64,
    },
    Competition {
        m: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        u0: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        churn: Option<Churn>,
    },
    /// Buyer/player/quitter lifecycle; `case` selects the intensity laws
    /// and which of `a`, `b`, `c`, `beta`, `gamma` are required.
    Game {
        case: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Rate>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Rate>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<Rate>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(rename = "N")]
        n: f64,
        #[serde(rename = "P0", default = "zero", skip_serializing_if = "is_zero")]
        p0: f64,
        #[serde(rename = "Q0", default = "zero", skip_serializing_if = "is_zero")]
        q0: f64,
    },
    Complementary {
        g: f64,
        b: f64,
        a_c: f64,
        b_c: f64,
        #[serde(default = "zero")]
        tau: f64,
        #[serde(rename = "N")]
        n: f64,
        #[serde(rename = "N_c", default, skip_serializing_if = "Option::is_none")]
        n_c: Option<f64>,
    },
}

/// A rate given as a number or as a schedule object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rate {
    Constant(f64),
    Schedule(Schedule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant { a: f64 },
    Linear { a0: f64, a1: f64 },
    ExpDecay { a0: f64, beta: f64 },
    Cutoff { a: f64, t_end: f64 },
    Tabulated { points: Vec<(f64, f64)> },
}

impl Rate {
    pub fn schedule(&self) -> RateSchedule {
        match self {
            Rate::Constant(a) => RateSchedule::Constant { a: *a },
            Rate::Schedule(s) => match s {
                Schedule::Constant { a } => RateSchedule::Constant { a: *a },
                Schedule::Linear { a0, a1 } => RateSchedule::Linear { a0: *a0, a1: *a1 },
                Schedule::ExpDecay { a0, beta } => RateSchedule::ExpDecay { a0: *a0, beta: *beta },
                Schedule::Cutoff { a, t_end } => RateSchedule::Cutoff { a: *a, t_end: *t_end },
                Schedule::Tabulated { points } => RateSchedule::Tabulated { points: points.clone() },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDoc {
    pub size: f64,
    pub a: Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Absorbing,
    Returning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kernel {
    None,
    Linear,
    Sqrt,
    Quadratic,
    Power { n: f64 },
    OneMinusU,
    InverseU,
    InverseUCutoff { u1: f64 },
    TrendLinearZero,
}

impl Kernel {
    pub fn core(&self) -> FeedbackKernel {
        match *self {
            Kernel::None => FeedbackKernel::None,
            Kernel::Linear => FeedbackKernel::Linear,
            Kernel::Sqrt => FeedbackKernel::Sqrt,
            Kernel::Quadratic => FeedbackKernel::Quadratic,
            Kernel::Power { n } => FeedbackKernel::Power { n },
            Kernel::OneMinusU => FeedbackKernel::OneMinusU,
            Kernel::InverseU => FeedbackKernel::InverseU,
            Kernel::InverseUCutoff { u1 } => FeedbackKernel::InverseUCutoff { u1 },
            Kernel::TrendLinearZero => FeedbackKernel::TrendLinearZero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Churn {
    Spontaneous {
        a_ij: Vec<Vec<f64>>,
    },
    Periodic {
        a_ij: Vec<Vec<f64>>,
        eps: Vec<Wave>,
    },
    Stimulated {
        a_ij: Vec<Vec<f64>>,
        b: Vec<f64>,
        eps: Vec<f64>,
    },
}

/// `amplitude · sin(2πt/period + phase)` on the rate from `from` to `to`
/// (suppliers numbered from 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wave {
    pub from: usize,
    pub to: usize,
    pub amplitude: f64,
    #[serde(default = "one")]
    pub period: f64,
    #[serde(default = "zero")]
    pub phase: f64,
}

/// Required and forbidden game parameters per case.
fn game_kind(
    case: u8,
    a: &Option<Rate>,
    b: &Option<Rate>,
    c: &Option<Rate>,
    beta: Option<f64>,
    gamma: Option<f64>,
) -> Result<BpqKind, CliError> {
    let uses: [bool; 5] = match case {
        1 => [true, true, true, false, false],
        2 => [false, true, false, true, false],
        3 => [true, true, false, true, false],
        4 => [false, false, false, true, true],
        5 => [true, false, false, false, true],
        6 => [true, true, false, false, true],
        _ => return Err(CliError::invalid(format!("model.case: expected 1 to 6, found {case}"))),
    };
    let given = [a.is_some(), b.is_some(), c.is_some(), beta.is_some(), gamma.is_some()];
    let names = ["a", "b", "c", "beta", "gamma"];
    for k in 0..5 {
        // c is optional in case 1 and defaults to zero.
        if uses[k] && !given[k] && !(case == 1 && k == 2) {
            return Err(CliError::invalid(format!("model.{}: required for case {case}", names[k])));
        }
        if !uses[k] && given[k] {
            return Err(CliError::invalid(format!("model.{}: not a parameter of case {case}", names[k])));
        }
    }
    let constant = |name: &str, r: &Option<Rate>| -> Result<f64, CliError> {
        match r {
            Some(Rate::Constant(v)) => Ok(*v),
            Some(Rate::Schedule(Schedule::Constant { a })) => Ok(*a),
            _ => Err(CliError::invalid(format!("model.{name}: case {case} needs a constant rate"))),
        }
    };
    Ok(match case {
        1 => BpqKind::Case1 {
            a: a.as_ref().map(Rate::schedule).unwrap_or(RateSchedule::Constant { a: 0.0 }),
            b: b.as_ref().map(Rate::schedule).unwrap_or(RateSchedule::Constant { a: 0.0 }),
            c: c.as_ref().map(Rate::schedule).unwrap_or(RateSchedule::Constant { a: 0.0 }),
        },
        2 => BpqKind::Case2 { beta: beta.unwrap_or(0.0), b: constant("b", b)? },
        3 => BpqKind::Case3 { a: constant("a", a)?, beta: beta.unwrap_or(0.0), b: constant("b", b)? },
        4 => BpqKind::Case4 { beta: beta.unwrap_or(0.0), gamma: gamma.unwrap_or(0.0) },
        5 => BpqKind::Case5 { a: constant("a", a)?, gamma: gamma.unwrap_or(0.0) },
        _ => BpqKind::Case6 { a: constant("a", a)?, b: constant("b", b)?, gamma: gamma.unwrap_or(0.0) },
    })
}

/// Core model built from a document.
#[derive(Debug, Clone, PartialEq)]
pub enum Built {
    Simple(SimpleAdoption),
    Scheduled { schedule: RateSchedule, u0: f64, n: f64 },
    Segmented { segments: Vec<Segment>, n: f64 },
    Hesitation { params: HesitationParams, n: f64 },
    BirthDeath { params: BirthDeathParams, n: f64 },
    Feedback(FeedbackModel),
    Competition { market: BassCompetition, churn: Option<ChurnSpec> },
    Game(BpqCase),
    Complementary(ComplementarySpec),
}

fn rate_or_t50(
    name: &'static str,
    rate: Option<f64>,
    t50: Option<f64>,
    resolve: impl FnOnce(f64) -> Result<f64, CliError>,
) -> Result<f64, CliError> {
    match (rate, t50) {
        (Some(r), None) => Ok(r),
        (None, Some(t)) => resolve(t),
        (Some(_), Some(_)) => Err(CliError::invalid(format!("model.{name}: give either {name} or t50, not both"))),
        (None, None) => Err(CliError::invalid(format!("model.{name}: missing {name} (or t50)"))),
    }
}

impl Model {
    pub fn build(&self) -> Result<Built, CliError> {
        let built = match self {
            Model::Simple { a, t50, u0, n } => {
                let a = rate_or_t50("a", *a, *t50, |t| Ok(calibrate_rate(FeedbackKernel::None, t, *u0)?))?;
                Built::Simple(SimpleAdoption::new(a, *u0, *n)?)
            }
            Model::Scheduled { a, u0, n } => {
                let schedule = a.schedule();
                schedule.validate()?;
                Built::Scheduled { schedule, u0: *u0, n: *n }
            }
            Model::Segmented { segments, n } => Built::Segmented {
                segments: segments.iter().map(|s| Segment { size: s.size, schedule: s.a.schedule() }).collect(),
                n: *n,
            },
            Model::Hesitation { a, b, c, variant, n } => {
                let variant = match variant {
                    Variant::Absorbing => HesitationVariant::Absorbing,
                    Variant::Returning => HesitationVariant::Returning,
                };
                let params = HesitationParams { a: *a, b: *b, c: *c, variant };
                params.validate()?;
                Built::Hesitation { params, n: *n }
            }
            Model::BirthDeath { a, d, f, g, n } => {
                let params = BirthDeathParams { a: *a, d: *d, f: *f, g: *g };
                params.validate()?;
                Built::BirthDeath { params, n: *n }
            }
            Model::Feedback { kernel, rate, t50, u0, n } => {
                let k = kernel.core();
                let rate = rate_or_t50("rate", *rate, *t50, |t| Ok(calibrate_rate(k, t, *u0)?))?;
                Built::Feedback(FeedbackModel::new(k, rate, *u0, *n)?)
            }
            Model::Bass { ratio, a, t50, u0, n } => {
                let k = FeedbackKernel::Bass { ratio: *ratio };
                let a = rate_or_t50("a", *a, *t50, |t| Ok(calibrate_rate(k, t, *u0)?))?;
                Built::Feedback(FeedbackModel::new(k, a, *u0, *n)?)
            }
            Model::Competition { m, r, u0, churn } => {
                let n = m.len();
                let market = BassCompetition::new(
                    m.clone(),
                    r.clone().unwrap_or_else(|| vec![0.0; n]),
                    u0.clone().unwrap_or_else(|| vec![0.0; n]),
                )?;
                let churn = churn.as_ref().map(|c| c.build()).transpose()?;
                if let Some(c) = &churn {
                    if c.n() != n {
                        return Err(CliError::invalid(format!(
                            "model.churn: {} suppliers in the churn matrix, {n} in m",
                            c.n()
                        )));
                    }
                }
                Built::Competition { market, churn }
            }
            Model::Game { case, a, b, c, beta, gamma, n, p0, q0 } => {
                let kind = game_kind(*case, a, b, c, *beta, *gamma)?;
                let initial = BpqState::new(n - p0 - q0, *p0, *q0)?;
                Built::Game(BpqCase::new(kind, initial)?)
            }
            Model::Complementary { g, b, a_c, b_c, tau, n, n_c } => {
                let spec = ComplementarySpec { g: *g, b: *b, a_c: *a_c, b_c: *b_c, tau: *tau, n: *n, n_c: *n_c };
                spec.validate()?;
                Built::Complementary(spec)
            }
        };
        Ok(built)
    }
}

impl Churn {
    pub fn build(&self) -> Result<ChurnSpec, CliError> {
        Ok(match self {
            Churn::Spontaneous { a_ij } => ChurnSpec::Spontaneous(ChurnMatrix::new(a_ij)?),
            Churn::Periodic { a_ij, eps } => {
                let mut waves = Vec::with_capacity(eps.len());
                for (k, w) in eps.iter().enumerate() {
                    if w.from == 0 || w.to == 0 {
                        return Err(CliError::invalid(format!("model.churn.eps[{k}]: suppliers are numbered from 1")));
                    }
                    waves.push(Sinusoid {
                        from: w.from - 1,
                        to: w.to - 1,
                        amplitude: w.amplitude,
                        period: w.period,
                        phase: w.phase,
                    });
                }
                let spec = PeriodicChurnSpec { a0: ChurnMatrix::new(a_ij)?, eps: waves };
                spec.validate()?;
                ChurnSpec::Periodic(spec)
            }
            Churn::Stimulated { a_ij, b, eps } => {
                ChurnSpec::Stimulated(StimulatedChurnSpec::new(ChurnMatrix::new(a_ij)?, b.clone(), eps.clone())?)
            }
        })
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<Built, CliError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CliError::invalid("horizon: must be positive".to_string()));
        }
        if let Some(s) = self.samples {
            if s < 2 {
                return Err(CliError::invalid(format!("samples: need at least 2, found {s}")));
            }
        }
        self.model.build()
    }

    pub fn resolved_samples(&self, flag: Option<usize>) -> usize {
        flag.or(self.samples).unwrap_or(DEFAULT_SAMPLES)
    }
}

/// Parses one scenario, reporting the JSON path of any offending field.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let s: Scenario = serde_path_to_error::deserialize(de).map_err(CliError::from_parse)?;
    s.validate()?;
    Ok(s)
}

/// Parses a file holding either one scenario or `{"scenarios": [...]}`.
pub fn parse_batch(text: &str) -> Result<Vec<Scenario>, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        code: "syntax",
        path: ".".to_string(),
        message: e.to_string(),
    })?;
    match value.get("scenarios") {
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(k, item)| {
                let s: Scenario = serde_path_to_error::deserialize(item)
                    .map_err(|e| CliError::from_parse(e).within(&format!("scenarios[{k}]")))?;
                s.validate().map_err(|e| e.within(&format!("scenarios[{k}]")))?;
                Ok(s)
            })
            .collect(),
        Some(_) => Err(CliError::Parse {
            code: "wrong_type",
            path: "scenarios".to_string(),
            message: "expected an array of scenarios".to_string(),
        }),
        None => parse_scenario(text).map(|s| vec![s]),
    }
}
