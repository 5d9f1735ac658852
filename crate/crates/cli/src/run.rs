//! Runs a validated scenario through the matching solver.

use marketdyn_core::competition::{
    fixed_point_no_churn, innovators_only_path, periodic_two_supplier_path, share_labels, spontaneous_equilibrium,
    spontaneous_path, stimulated_fixed_point, competitive_path_numeric, BassCompetition, ChurnSpec, MarketOutcome,
};
use marketdyn_core::feedback::{latency_metrics, quadratic_latency_ratio_printed, FeedbackKernel, FeedbackModel};
use marketdyn_core::games::{
    bpq_path, case1_closed_form, complementary_path, peak_metrics, sir_relations, BpqCase, BpqKind, Case1Method,
};
use marketdyn_core::monopoly::{
    birth_death_path, hesitation_path, scheduled_path, segmented_path, simple_latency, simple_path, time_to_share,
};
use marketdyn_core::{Error, TimeGrid, Trajectory};

use crate::error::CliError;
use crate::scenario::{Built, Scenario};

/// Path plus the numbers worth reporting next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trajectory: Trajectory,
    pub metrics: Vec<(String, f64)>,
    /// Places where a textbook formula and the computed value disagree, or
    /// where a metric could not be formed.
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

struct Report {
    metrics: Vec<(String, f64)>,
    notes: Vec<String>,
}

impl Report {
    fn put(&mut self, name: impl Into<String>, v: f64) {
        self.metrics.push((name.into(), v));
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

pub fn run_scenario(s: &Scenario, samples: Option<usize>) -> Result<RunReport, CliError> {
    let built = s.validate()?;
    let grid = TimeGrid::uniform(0.0, s.horizon, s.resolved_samples(samples))?.into_inner();
    let mut r = Report { metrics: Vec::new(), notes: Vec::new() };
    let trajectory = match &built {
        Built::Simple(m) => {
            let l = simple_latency(m)?;
            r.put("a", m.a);
            r.put("T50", l.t50);
            r.put("T10", l.t10);
            simple_path(m, &grid)?
        }
        Built::Scheduled { schedule, u0, n } => {
            let tr = scheduled_path(schedule, *u0, *n, &grid)?;
            let share = |t: f64| scheduled_path(schedule, *u0, *n, &[t]).map(|p| p.states()[0][0]).unwrap_or(f64::NAN);
            latencies(&mut r, share, s.horizon)?;
            tr
        }
        Built::Segmented { segments, n } => {
            let tr = segmented_path(segments, *n, &grid)?;
            let share = |t: f64| segmented_path(segments, *n, &[t]).map(|p| p.states()[0][0]).unwrap_or(f64::NAN);
            latencies(&mut r, share, s.horizon)?;
            tr
        }
        Built::Hesitation { params, n } => {
            latencies(&mut r, |t| params.state(t)[2], s.horizon)?;
            hesitation_path(params, *n, &grid)?
        }
        Built::BirthDeath { params, n } => {
            latencies(&mut r, |t| params.share(t), s.horizon)?;
            birth_death_path(params, *n, &grid)?
        }
        Built::Feedback(m) => feedback(&mut r, m, &grid)?,
        Built::Competition { market, churn } => competition(&mut r, market, churn.as_ref(), &grid)?,
        Built::Game(case) => game(&mut r, case, &grid, s.horizon)?,
        Built::Complementary(spec) => {
            let tr = complementary_path(spec, &grid)?;
            let p = tr.channel("P").unwrap_or_default();
            let k = argmax(&p);
            r.put("T_m", grid[k]);
            r.put("P_m", p[k]);
            r.put("C_end", tr.last_state().map_or(f64::NAN, |row| row[4]));
            tr
        }
    };
    let trajectory = match &s.outputs {
        Some(names) => trajectory.select(names).map_err(|_| {
            CliError::invalid(format!("outputs: unknown channel; available: {}", trajectory.labels().join(", ")))
        })?,
        None => trajectory,
    };
    Ok(RunReport { trajectory, metrics: r.metrics, notes: r.notes })
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

fn latencies<F: Fn(f64) -> f64>(r: &mut Report, share: F, horizon: f64) -> Result<(), CliError> {
    for (name, target) in [("T10", 0.1), ("T50", 0.5)] {
        match time_to_share(&share, target, horizon) {
            Ok(t) => r.put(name, t),
            Err(Error::NeverReached { .. }) => r.note(format!("{name} not reached within the horizon")),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn feedback(r: &mut Report, m: &FeedbackModel, grid: &[f64]) -> Result<Trajectory, CliError> {
    r.put("rate", m.rate);
    match latency_metrics(m) {
        Ok(l) => {
            r.put("T50", l.t50);
            r.put("T10", l.t10);
            if l.t10_flag {
                r.note("initial share is at or above 10%, T10 reported as 0");
            }
            if let Some(d) = l.t60_minus_t50 {
                r.put("T60-T50", d);
            }
            if let Some(i) = l.inflection {
                r.put("u_infl", i.u);
                r.put("t_infl", i.t);
                r.put("gradient_infl", i.gradient);
            }
            if m.kernel == FeedbackKernel::Quadratic && m.u0 > 0.0 && m.u0 < 0.1 {
                let printed = quadratic_latency_ratio_printed(m.u0);
                r.put("T10/T50", l.t10 / l.t50);
                r.put("T10/T50_printed", printed);
                r.note(format!(
                    "quadratic kernel: the printed t(u) gives T10/T50 = {printed:.4}, the exact integral {:.4}",
                    l.t10 / l.t50
                ));
            }
        }
        Err(Error::NeverReached { target }) => r.note(format!("share {target} is never reached")),
        Err(e) => return Err(e.into()),
    }
    if let Some(t1) = m.cutoff_time() {
        r.put("t_cutoff", t1);
    }
    Ok(marketdyn_core::feedback::feedback_path(m, grid)?)
}

fn put_shares(r: &mut Report, prefix: &str, u: &[f64]) {
    for (i, v) in u.iter().enumerate() {
        r.put(format!("{prefix}{}", i + 1), *v);
    }
}

fn competition(
    r: &mut Report,
    market: &BassCompetition,
    churn: Option<&ChurnSpec>,
    grid: &[f64],
) -> Result<Trajectory, CliError> {
    let n = market.n();
    let labels = share_labels(n);
    let innovators = market.r.iter().all(|&x| x == 0.0) && market.u0.iter().all(|&x| x == 0.0);
    // Once every customer is served, adoption stops and only churn acts.
    let developed = (market.u0.iter().sum::<f64>() - 1.0).abs() < 1e-12;
    match churn {
        None => {
            put_shares(r, "u_inf", &fixed_point_no_churn(market)?);
            if innovators {
                return Ok(innovators_only_path(&market.m, grid)?.select(&labels)?);
            }
        }
        Some(ChurnSpec::Spontaneous(c)) => {
            match spontaneous_equilibrium(c) {
                Ok(u) => put_shares(r, "u_inf", &u),
                Err(Error::DegenerateMarket) => r.note("churn balance is singular: the long-run split depends on the path"),
                Err(e) => return Err(e.into()),
            }
            if innovators {
                return Ok(spontaneous_path(&market.m, c, grid)?);
            }
        }
        Some(ChurnSpec::Periodic(p)) => {
            match spontaneous_equilibrium(&p.a0) {
                Ok(u) => put_shares(r, "u_mean", &u),
                Err(Error::DegenerateMarket) => r.note("baseline churn balance is singular"),
                Err(e) => return Err(e.into()),
            }
            if developed && n == 2 {
                return Ok(periodic_two_supplier_path(p, market.u0[0], grid)?);
            }
        }
        Some(ChurnSpec::Stimulated(spec)) => {
            // The split among current customers decides which vertex wins.
            let total: f64 = market.u0.iter().sum();
            let start: Option<Vec<f64>> = (total > 0.0).then(|| market.u0.iter().map(|v| v / total).collect());
            match stimulated_fixed_point(spec, start.as_deref()) {
                Ok(eq) => {
                    put_shares(r, "u_inf", &eq.shares);
                    match eq.outcome {
                        MarketOutcome::WinnerTakeAll { winner, .. } => {
                            r.note(format!("winner takes all: supplier {} from this start", winner + 1))
                        }
                        MarketOutcome::Shared => r.note("shared market"),
                    }
                }
                Err(Error::InconsistentSpec(why)) => r.note(format!("no stimulated equilibrium: {why}")),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(competitive_path_numeric(market, churn, grid)?.select(&labels)?)
}

fn game(r: &mut Report, case: &BpqCase, grid: &[f64], horizon: f64) -> Result<Trajectory, CliError> {
    let pk = peak_metrics(case, horizon)?;
    r.put("T_m", pk.t_m);
    r.put("P_m", pk.p_m);
    r.put("C_inf", pk.c_inf);
    match &case.kind {
        BpqKind::Case1 { .. } => {
            let path = case1_closed_form(case, grid)?;
            let how = match path.method {
                Case1Method::Constant => "closed form",
                Case1Method::Confluent => "closed form, confluent b = a + c",
                Case1Method::LinearAdoption => "error-function closed form",
                Case1Method::LinearQuitting => "integrating factor with quadrature",
                Case1Method::General => "general solution by quadrature",
            };
            r.note(format!("case 1 evaluated by {how}"));
            return Ok(path.trajectory);
        }
        BpqKind::Case2 { .. } => {
            let rel = sir_relations(case)?;
            r.put("B_inf", rel.b_inf);
            r.put("total_players", rel.total_players);
            match rel.peak {
                Some(p) => {
                    r.put("B_Tm", p.b_tm);
                    r.put("Q_Tm", p.q_tm);
                    r.put("P_Tm", p.p_tm);
                    r.put("T_m_exact", p.t_m);
                }
                None => r.note("beta*B0 <= b: players only decline"),
            }
        }
        _ => {}
    }
    Ok(bpq_path(case, grid)?)
}
