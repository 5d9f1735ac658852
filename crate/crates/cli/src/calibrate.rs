//! Rates from strategic targets, with a re-simulation check.

use serde::{Deserialize, Serialize};

use marketdyn_core::feedback::{calibrate_rate, FeedbackKernel, FeedbackModel};
use marketdyn_core::games::{case1_rate_from_peak, sir_calibrate, sir_relations, BpqCase, BpqKind, BpqState};
use marketdyn_core::Error;

use crate::error::CliError;
use crate::scenario::Kernel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Targets {
    /// Constant-rate adoption reaching half the market at `t50`.
    Simple { t50: f64, #[serde(default)] u0: f64 },
    Feedback { kernel: Kernel, t50: f64, #[serde(default)] u0: f64 },
    Bass { ratio: f64, t50: f64, #[serde(default)] u0: f64 },
    /// Constant-rate game: players peak at `t_m` with `(a + c)/b = ratio`.
    Case1 { t_m: f64, ratio: f64 },
    /// Infectious game: players peak at `P_Tm` at time `t_m`.
    Sir {
        #[serde(rename = "N")]
        n: f64,
        #[serde(rename = "P0")]
        p0: f64,
        t_m: f64,
        #[serde(rename = "P_Tm")]
        p_tm: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub parameters: Vec<(String, f64)>,
    /// Targets recomputed from the calibrated model.
    pub check: Vec<(String, f64)>,
}

pub fn parse_targets(text: &str) -> Result<Targets, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(CliError::from_parse)
}

/// Out-of-range targets become calibration errors rather than parameter
/// errors: the user asked for something no model instance delivers.
fn infeasible(e: Error) -> Error {
    match e {
        Error::InvalidParameter { reason, .. } => Error::CalibrationInfeasible(reason),
        Error::NeverReached { .. } => Error::CalibrationInfeasible("the target share is never reached"),
        e => e,
    }
}

fn half_time(kernel: FeedbackKernel, t50: f64, u0: f64) -> Result<Calibration, CliError> {
    let rate = calibrate_rate(kernel, t50, u0).map_err(infeasible)?;
    let m = FeedbackModel::new(kernel, rate, u0, 1.0)?;
    let name = if matches!(kernel, FeedbackKernel::None | FeedbackKernel::Bass { .. }) { "a" } else { "rate" };
    Ok(Calibration {
        parameters: vec![(name.into(), rate)],
        check: vec![("T50".into(), m.t_of_u(0.5)?)],
    })
}

pub fn calibrate(t: &Targets) -> Result<Calibration, CliError> {
    match t {
        Targets::Simple { t50, u0 } => half_time(FeedbackKernel::None, *t50, *u0),
        Targets::Feedback { kernel, t50, u0 } => half_time(kernel.core(), *t50, *u0),
        Targets::Bass { ratio, t50, u0 } => half_time(FeedbackKernel::Bass { ratio: *ratio }, *t50, *u0),
        Targets::Case1 { t_m, ratio } => {
            let ac = case1_rate_from_peak(*t_m, *ratio)?;
            let b = ac / ratio;
            let d = ac - b;
            let check = if d.abs() <= 1e-12 * ac { 1.0 / b } else { (d / b).ln_1p() / d };
            Ok(Calibration {
                parameters: vec![("a+c".into(), ac), ("b".into(), b)],
                check: vec![("T_m".into(), check)],
            })
        }
        Targets::Sir { n, p0, t_m, p_tm } => {
            let (beta, b) = sir_calibrate(*n, *p0, *t_m, *p_tm)?;
            let case = BpqCase::new(BpqKind::Case2 { beta, b }, BpqState::new(n - p0, *p0, 0.0)?)?;
            let peak = sir_relations(&case)?
                .peak
                .ok_or(Error::CalibrationInfeasible("calibrated instance has no interior peak"))?;
            Ok(Calibration {
                parameters: vec![("beta".into(), beta), ("b".into(), b), ("b/beta".into(), b / beta)],
                check: vec![("T_m".into(), peak.t_m), ("P_Tm".into(), peak.p_tm)],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(doc: &str) -> Result<Calibration, CliError> {
        calibrate(&parse_targets(doc)?)
    }

    #[test]
    fn simple_half_time() {
        let c = run(r#"{"kind": "simple", "t50": 5}"#).unwrap();
        assert!((c.parameters[0].1 - 0.1386).abs() < 1e-4);
        assert!((c.check[0].1 - 5.0).abs() < 5e-6);
    }

    #[test]
    fn case1_peak() {
        let c = run(r#"{"kind": "case1", "t_m": 1, "ratio": 2}"#).unwrap();
        assert!((c.parameters[0].1 - 4f64.ln()).abs() < 1e-12);
        assert!((c.check[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sir_round_trip() {
        let c = run(r#"{"kind": "sir", "N": 1000, "P0": 1, "t_m": 12, "P_Tm": 300}"#).unwrap();
        assert!((c.check[0].1 - 12.0).abs() < 1e-6 * 12.0);
        assert!((c.check[1].1 - 300.0).abs() < 1e-6 * 300.0);
    }

    #[test]
    fn infeasible_targets_exit_4() {
        for doc in [
            r#"{"kind": "simple", "t50": -1}"#,
            r#"{"kind": "case1", "t_m": 1, "ratio": 0}"#,
            r#"{"kind": "sir", "N": 1000, "P0": 1, "t_m": 12, "P_Tm": 1200}"#,
            r#"{"kind": "feedback", "kernel": {"type": "inverse_u_cutoff", "u1": 0.3}, "t50": 5}"#,
        ] {
            assert_eq!(run(doc).unwrap_err().exit_code(), 4, "{doc}");
        }
    }
}
