//! Latency reference tables, recomputed from the library on every call.

use std::fmt::Write;

use marketdyn_core::feedback::{latency_metrics, quadratic_latency_ratio_printed, FeedbackKernel, FeedbackModel};

use crate::error::CliError;

pub const U0_VALUES: [f64; 5] = [0.001, 0.005, 0.01, 0.02, 0.04];

/// Half-market time the kernel table is normalised to (years).
pub const KERNEL_T50: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    #[value(name = "latency_u0")]
    LatencyU0,
    #[value(name = "latency_kernels")]
    LatencyKernels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct U0Row {
    pub u0: f64,
    pub t10: f64,
    pub t50: f64,
    pub ratio: f64,
}

/// T10/T50 of the linear-feedback market for several seeds.
pub fn latency_u0() -> Result<Vec<U0Row>, CliError> {
    U0_VALUES
        .iter()
        .map(|&u0| {
            let m = FeedbackModel::calibrated(FeedbackKernel::Linear, KERNEL_T50, u0, 1.0)?;
            let l = latency_metrics(&m)?;
            Ok(U0Row { u0, t10: l.t10, t50: l.t50, ratio: l.t10 / l.t50 })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub label: &'static str,
    pub kernel: FeedbackKernel,
    pub u0: f64,
    pub t10: f64,
    pub ratio: f64,
    /// Ratio from the printed closed form, where it differs from the ODE.
    pub printed_ratio: Option<f64>,
}

fn kernel_rows() -> [(&'static str, FeedbackKernel, f64); 7] {
    [
        ("no feedback", FeedbackKernel::None, 0.0),
        ("1-u", FeedbackKernel::OneMinusU, 0.0),
        ("1/u", FeedbackKernel::InverseU, 0.0),
        ("(1-u)/u", FeedbackKernel::TrendLinearZero, 0.0),
        ("sqrt(u)", FeedbackKernel::Sqrt, 0.0),
        ("u, u0=0.01", FeedbackKernel::Linear, 0.01),
        ("u^2, u0=0.01", FeedbackKernel::Quadratic, 0.01),
    ]
}

/// T10 for each feedback kernel with every market calibrated to T50 = 5.
pub fn latency_kernels() -> Result<Vec<KernelRow>, CliError> {
    kernel_rows()
        .into_iter()
        .map(|(label, kernel, u0)| {
            let m = FeedbackModel::calibrated(kernel, KERNEL_T50, u0, 1.0)?;
            let l = latency_metrics(&m)?;
            let printed_ratio = (kernel == FeedbackKernel::Quadratic).then(|| quadratic_latency_ratio_printed(u0));
            Ok(KernelRow { label, kernel, u0, t10: l.t10, ratio: l.t10 / l.t50, printed_ratio })
        })
        .collect()
}

/// Years as whole years, months and days (1 month = 1/12, 1 day = 1/365).
pub fn months_days(years: f64) -> String {
    let mut months = (years * 12.0).floor();
    let mut days = ((years - months / 12.0) * 365.0).round();
    // 30.4 days round up into the next month.
    if days >= 365.0 / 12.0 {
        months += 1.0;
        days = 0.0;
    }
    let plural = |n: f64, unit: &str| if n == 1.0 { format!("1 {unit}") } else { format!("{n} {unit}s") };
    let years = (months / 12.0).floor();
    let months = months - 12.0 * years;
    let parts: Vec<String> = [(years, "year"), (months, "month"), (days, "day")]
        .iter()
        .filter(|(n, _)| *n > 0.0)
        .map(|(n, unit)| plural(*n, unit))
        .collect();
    if parts.is_empty() {
        "0 days".into()
    } else {
        parts.join(" ")
    }
}

pub fn render(which: Which) -> Result<String, CliError> {
    let mut s = String::new();
    match which {
        Which::LatencyU0 => {
            let _ = writeln!(s, "{:>8}  {:>8}  {:>8}  {:>7}", "u0", "T10", "T50", "T10/T50");
            for r in latency_u0()? {
                let _ = writeln!(s, "{:>8}  {:>8.4}  {:>8.4}  {:>7.2}", r.u0, r.t10, r.t50, r.ratio);
            }
            let _ = writeln!(s, "# F(u) = u, rate calibrated to T50 = {KERNEL_T50}");
        }
        Which::LatencyKernels => {
            let _ = writeln!(s, "{:<14}  {:>8}  {:<18}  {:>8}", "F(u)", "T10", "T10 (T50 = 5 y)", "T10/T50");
            let mut footnote = None;
            for r in latency_kernels()? {
                let mark = if r.printed_ratio.is_some() { "*" } else { "" };
                let _ = writeln!(
                    s,
                    "{:<14}  {:>8.4}  {:<18}  {:>8.4}{mark}",
                    r.label,
                    r.t10,
                    months_days(r.t10),
                    r.ratio
                );
                if let Some(p) = r.printed_ratio {
                    footnote = Some((p, r.ratio));
                }
            }
            if let Some((p, d)) = footnote {
                let _ = writeln!(
                    s,
                    "* the published closed form for F = u^2 gives T10/T50 = {p:.2}; integrating the equation gives {d:.2} ({:.4} y vs {:.4} y)",
                    p * KERNEL_T50,
                    d * KERNEL_T50
                );
            }
        }
    }
    Ok(s)
}
