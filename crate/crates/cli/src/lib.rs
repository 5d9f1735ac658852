//! Command-line front end for `marketdyn-core`: scenario files, CSV time
//! series, latency tables and calibration.

pub mod calibrate;
pub mod csv;
pub mod error;
pub mod run;
pub mod scenario;
pub mod tables;

use std::fmt::Write;

use marketdyn_core::feedback::{classify_equilibria, Stability};

pub use csv::Format;
pub use error::CliError;
use run::{run_scenario, RunReport};
use scenario::{Built, Scenario};

/// What to do with each scenario of a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Simulate,
    Metrics,
    Equilibrium,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub samples: Option<usize>,
    pub jobs: usize,
    pub format: Format,
}

fn equilibrium(s: &Scenario, samples: Option<usize>, format: Format) -> Result<String, CliError> {
    let mut out = String::new();
    let sep = format.separator();
    match s.validate()? {
        Built::Feedback(m) => {
            let _ = writeln!(out, "u{sep}stability");
            for e in classify_equilibria(m.kernel)? {
                let class = match e.class {
                    Stability::Attractor => "attractor",
                    Stability::Repeller => "repeller",
                    Stability::NotEquilibrium => "not_equilibrium",
                };
                let _ = writeln!(out, "{}{sep}{class}", csv::number(e.u));
            }
        }
        Built::Competition { .. } => {
            let rep = run_scenario(s, samples)?;
            let eq: Vec<(String, f64)> =
                rep.metrics.into_iter().filter(|(k, _)| k.starts_with("u_")).collect();
            csv::write_metrics(&mut out, &eq, &rep.notes, format);
        }
        _ => {
            return Err(CliError::invalid(
                "model.kind: equilibrium analysis covers feedback, bass and competition models".into(),
            ))
        }
    }
    Ok(out)
}

fn one(action: Action, s: &Scenario, opts: &Options) -> Result<String, CliError> {
    match action {
        Action::Simulate => {
            let RunReport { trajectory, .. } = run_scenario(s, opts.samples)?;
            let mut out = String::new();
            csv::write_trajectory(&mut out, &trajectory, opts.format);
            Ok(out)
        }
        Action::Metrics => {
            let rep = run_scenario(s, opts.samples)?;
            let mut out = String::new();
            csv::write_metrics(&mut out, &rep.metrics, &rep.notes, opts.format);
            Ok(out)
        }
        Action::Equilibrium => equilibrium(s, opts.samples, opts.format),
    }
}

/// Runs every scenario of a file. With more than one job, scenarios are
/// spread over threads and the results put back in input order.
pub fn process(action: Action, text: &str, opts: &Options) -> Result<String, CliError> {
    let scenarios = scenario::parse_batch(text)?;
    let jobs = opts.jobs.max(1).min(scenarios.len().max(1));
    let results: Vec<Result<String, CliError>> = if jobs == 1 {
        scenarios.iter().map(|s| one(action, s, opts)).collect()
    } else {
        let mut slots: Vec<Option<Result<String, CliError>>> = (0..scenarios.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|j| {
                    let scenarios = &scenarios;
                    scope.spawn(move || {
                        (j..scenarios.len())
                            .step_by(jobs)
                            .map(|k| (k, one(action, &scenarios[k], opts)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (k, r) in h.join().expect("worker panicked") {
                    slots[k] = Some(r);
                }
            }
        });
        slots.into_iter().map(|r| r.expect("every slot filled")).collect()
    };
    if scenarios.len() == 1 {
        return results.into_iter().next().unwrap();
    }
    let mut out = String::new();
    for (k, (s, r)) in scenarios.iter().zip(results).enumerate() {
        let body = r.map_err(|e| e.within(&format!("scenarios[{k}]")))?;
        match &s.name {
            Some(name) => writeln!(out, "# scenario {} {name}", k + 1),
            None => writeln!(out, "# scenario {}", k + 1),
        }
        .unwrap();
        out.push_str(&body);
    }
    Ok(out)
}
