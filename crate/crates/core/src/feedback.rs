//! Single markets with feedback: `u̇ = rate (1 - u) F(u)`.
//!
//! Each kernel has an exact time-to-share `t(u)`. Where `u(t)` is also
//! explicit it is used directly, otherwise `t(u)` is inverted by root
//! finding. Because `t(u)` always scales as `1/rate`, calibrating to a T50
//! target is a single division.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp, expm1, ln, ln_1m_plus_ratio, ln_1p, powf, sqrt, u_plus_ln_1m};
use crate::numerics::{quadrature, solve_root, Trajectory};

/// Feedback term `F(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeedbackKernel {
    /// `F = 1`
    None,
    /// `F = 1 + ratio·u` with `ratio = γ/a`
    Bass { ratio: f64 },
    /// `F = u`
    Linear,
    /// `F = √u`
    Sqrt,
    /// `F = u²`
    Quadratic,
    /// `F = uⁿ`
    Power { n: f64 },
    /// `F = 1 - u`
    OneMinusU,
    /// `F = 1/u`
    InverseU,
    /// `F = 1/u` below `u1`, zero from `u1` on.
    InverseUCutoff { u1: f64 },
    /// `F = (1 - u)/u`
    TrendLinearZero,
}

impl FeedbackKernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FeedbackKernel::Bass { ratio } if !(ratio > 0.0 && ratio.is_finite()) => {
                Err(Error::param("ratio", "imitation ratio must be positive"))
            }
            FeedbackKernel::Power { n } if !(n > 0.0 && n.is_finite()) => {
                Err(Error::param("n", "power must be positive"))
            }
            FeedbackKernel::InverseUCutoff { u1 } if !(u1 > 0.0 && u1 < 1.0) => {
                Err(Error::param("u1", "cutoff share must lie in (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    /// Powers with a closed form are mapped onto their named kernels.
    fn canonical(self) -> Self {
        match self {
            FeedbackKernel::Power { n: 0.5 } => FeedbackKernel::Sqrt,
            FeedbackKernel::Power { n: 1.0 } => FeedbackKernel::Linear,
            FeedbackKernel::Power { n: 2.0 } => FeedbackKernel::Quadratic,
            k => k,
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        match *self {
            FeedbackKernel::None => 1.0,
            FeedbackKernel::Bass { ratio } => 1.0 + ratio * u,
            FeedbackKernel::Linear => u,
            FeedbackKernel::Sqrt => sqrt(u),
            FeedbackKernel::Quadratic => u * u,
            FeedbackKernel::Power { n } => powf(u, n),
            FeedbackKernel::OneMinusU => 1.0 - u,
            FeedbackKernel::InverseU => 1.0 / u,
            FeedbackKernel::InverseUCutoff { u1 } => {
                if u < u1 {
                    1.0 / u
                } else {
                    0.0
                }
            }
            FeedbackKernel::TrendLinearZero => (1.0 - u) / u,
        }
    }

    /// True when growth needs a non-zero seed (`F(0) = 0` with `F` Lipschitz).
    pub fn needs_seed(&self) -> bool {
        match self.canonical() {
            FeedbackKernel::Linear | FeedbackKernel::Quadratic => true,
            FeedbackKernel::Power { n } => n >= 1.0,
            _ => false,
        }
    }
}

/// A feedback kernel with its growth coefficient and initial share.
///
/// `rate` is `a` for the no-feedback and Bass kernels (with `γ = ratio·a`)
/// and the kernel's own `γ` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackModel {
    pub kernel: FeedbackKernel,
    pub rate: f64,
    pub u0: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inflection {
    pub u: f64,
    pub t: f64,
    /// `u̇` at the inflection.
    pub gradient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketMetrics {
    pub t50: f64,
    /// Zero when the market starts at or above 10%, see `t10_flag`.
    pub t10: f64,
    pub t10_flag: bool,
    /// `None` when 60% is never reached (cutoff kernels).
    pub t60_minus_t50: Option<f64>,
    pub inflection: Option<Inflection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attractor,
    Repeller,
    /// `u̇` vanishes but the solution leaves anyway (non-Lipschitz point).
    NotEquilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub u: f64,
    pub class: Stability,
}

const ROOT_TOL: f64 = 1e-15;
const QUAD_TOL: f64 = 1e-13;

impl FeedbackModel {
    pub fn new(kernel: FeedbackKernel, rate: f64, u0: f64, n: f64) -> Result<Self> {
        let m = FeedbackModel { kernel, rate, u0, n };
        m.validate()?;
        Ok(m)
    }

    /// Model whose share reaches one half at `t50`.
    pub fn calibrated(kernel: FeedbackKernel, t50: f64, u0: f64, n: f64) -> Result<Self> {
        let rate = calibrate_rate(kernel, t50, u0)?;
        Self::new(kernel, rate, u0, n)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::param("rate", "growth rate must be positive"));
        }
        if !(self.u0 >= 0.0 && self.u0 < 1.0) {
            return Err(Error::param("u0", "initial share must lie in [0, 1)"));
        }
        if let FeedbackKernel::InverseUCutoff { u1 } = self.kernel {
            if self.u0 > u1 {
                return Err(Error::param("u0", "initial share exceeds the cutoff"));
            }
        }
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::param("N", "population must be positive"));
        }
        Ok(())
    }

    /// `u̇` at share `u`.
    pub fn rhs(&self, u: f64) -> f64 {
        self.rate * (1.0 - u) * self.kernel.f(u)
    }

    /// Time at which the share equals `u`, for `u0 ≤ u < 1`.
    pub fn t_of_u(&self, u: f64) -> Result<f64> {
        if !(u >= self.u0 && u < 1.0) {
            return Err(Error::Domain { what: "share", value: u });
        }
        if u == self.u0 {
            return Ok(0.0);
        }
        let (g, u0) = (self.rate, self.u0);
        let t = match self.kernel.canonical() {
            FeedbackKernel::None => (ln_1p(-u0) - ln_1p(-u)) / g,
            FeedbackKernel::Bass { ratio } => {
                (ln_1p(ratio * u) - ln_1p(ratio * u0) + ln_1p(-u0) - ln_1p(-u)) / (g * (1.0 + ratio))
            }
            FeedbackKernel::Linear => {
                if u0 == 0.0 {
                    return Err(Error::NeverReached { target: u });
                }
                (ln(u / u0) + ln_1p(-u0) - ln_1p(-u)) / g
            }
            FeedbackKernel::Sqrt => {
                let (s, s0) = (sqrt(u), sqrt(u0));
                (ln_1p(s) - ln_1p(-s) - ln_1p(s0) + ln_1p(-s0)) / g
            }
            FeedbackKernel::Quadratic => {
                if u0 == 0.0 {
                    return Err(Error::NeverReached { target: u });
                }
                (ln(u / u0) + ln_1p(-u0) - ln_1p(-u) + 1.0 / u0 - 1.0 / u) / g
            }
            FeedbackKernel::Power { n } => power_time(n, u0, u)? / g,
            FeedbackKernel::OneMinusU => (u - u0) / ((1.0 - u) * (1.0 - u0) * g),
            FeedbackKernel::InverseU => (u_plus_ln_1m(u0) - u_plus_ln_1m(u)) / g,
            FeedbackKernel::InverseUCutoff { u1 } => {
                if u > u1 {
                    return Err(Error::NeverReached { target: u });
                }
                (u_plus_ln_1m(u0) - u_plus_ln_1m(u)) / g
            }
            FeedbackKernel::TrendLinearZero => (ln_1m_plus_ratio(u) - ln_1m_plus_ratio(u0)) / g,
        };
        Ok(t)
    }

    /// Share at time `t ≥ 0`.
    pub fn u_of_t(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain { what: "time", value: t });
        }
        if t == 0.0 {
            return Ok(self.u0);
        }
        let (g, u0) = (self.rate, self.u0);
        let u = match self.kernel.canonical() {
            FeedbackKernel::None => 1.0 - (1.0 - u0) * exp(-g * t),
            FeedbackKernel::Bass { ratio } => {
                let e = exp(-g * (1.0 + ratio) * t);
                let base = 1.0 + ratio * u0;
                (base - (1.0 - u0) * e) / (base + ratio * (1.0 - u0) * e)
            }
            FeedbackKernel::Linear => {
                if u0 == 0.0 {
                    0.0
                } else {
                    u0 / (u0 + (1.0 - u0) * exp(-g * t))
                }
            }
            FeedbackKernel::Sqrt => {
                let s0 = sqrt(u0);
                let e = exp(-g * t);
                let v = (1.0 + s0 - (1.0 - s0) * e) / (1.0 + s0 + (1.0 - s0) * e);
                v * v
            }
            FeedbackKernel::OneMinusU => 1.0 - (1.0 - u0) / (1.0 + g * t * (1.0 - u0)),
            FeedbackKernel::InverseUCutoff { u1 } => {
                let t1 = self.t_of_u(u1)?;
                if t >= t1 {
                    u1
                } else {
                    self.invert(t, u1)?
                }
            }
            _ => {
                if u0 == 0.0 && self.kernel.needs_seed() {
                    0.0
                } else {
                    self.invert(t, 1.0)?
                }
            }
        };
        Ok(u)
    }

    /// Solves `t_of_u(u) = t` on `[u0, cap)`.
    fn invert(&self, t: f64, cap: f64) -> Result<f64> {
        self.invert_from(self.u0, 0.0, t, cap)
    }

    /// Time to go from share `ua` to `x`.
    fn time_between(&self, ua: f64, x: f64) -> Result<f64> {
        match self.kernel.canonical() {
            // Short intervals keep the integral cheap when marching a grid.
            FeedbackKernel::Power { n } => Ok(power_time(n, ua, x)? / self.rate),
            _ => Ok(self.t_of_u(x)? - self.t_of_u(ua)?),
        }
    }

    /// Solves `ta + time_between(ua, u) = t` for `u` in `[ua, cap)`,
    /// given that the share is `ua` at time `ta ≤ t`.
    fn invert_from(&self, ua: f64, ta: f64, t: f64, cap: f64) -> Result<f64> {
        let dt = t - ta;
        if dt <= 0.0 {
            return Ok(ua);
        }
        let mut hi = if cap < 1.0 { cap } else { 0.5 + 0.5 * ua };
        if cap >= 1.0 {
            let mut gap = 1.0 - hi;
            while self.time_between(ua, hi)? < dt {
                gap *= 0.5;
                if gap < f64::EPSILON {
                    // Indistinguishable from saturation in double precision.
                    return Ok(1.0 - f64::EPSILON / 2.0);
                }
                hi = 1.0 - gap;
            }
        }
        // Bracketed Newton using the exact slope dt/du = 1/u̇: one integral
        // per step for the quadrature-backed power kernel.
        let (mut lo, mut hi) = (ua, hi);
        let slope0 = self.rhs(ua);
        let mut x = if slope0 > 0.0 && slope0.is_finite() { ua + dt * slope0 } else { 0.5 * (lo + hi) };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let f = self.time_between(ua, x)? - dt;
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= ROOT_TOL {
                break;
            }
            let cand = x - f * self.rhs(x);
            let next = if cand > lo && cand < hi && cand.is_finite() { cand } else { 0.5 * (lo + hi) };
            if abs(next - x) <= 0.5 * ROOT_TOL {
                return Ok(next);
            }
            x = next;
        }
        solve_root(|u| self.time_between(ua, u).unwrap_or(f64::INFINITY) - dt, lo, hi, ROOT_TOL)
    }

    /// `u(t)` along an increasing grid. Power kernels march from point to
    /// point; everything else evaluates each time independently.
    pub fn u_on_grid(&self, grid: &[f64]) -> Result<Vec<f64>> {
        let march = matches!(self.kernel.canonical(), FeedbackKernel::Power { .. })
            && !(self.u0 == 0.0 && self.kernel.needs_seed());
        if !march {
            return grid.iter().map(|&t| self.u_of_t(t)).collect();
        }
        let (mut ua, mut ta) = (self.u0, 0.0);
        let mut saturated_at = f64::INFINITY;
        let mut out = Vec::with_capacity(grid.len());
        for &t in grid {
            if t >= saturated_at {
                out.push(1.0 - f64::EPSILON / 2.0);
                continue;
            }
            if !(t >= 0.0) {
                return Err(Error::Domain { what: "time", value: t });
            }
            if t < ta {
                // Grid not increasing from the anchor; restart from u0.
                ua = self.u0;
                ta = 0.0;
            }
            let u = self.invert_from(ua, ta, t, 1.0)?;
            if u < 1.0 - f64::EPSILON {
                ua = u;
                ta = t;
            } else {
                saturated_at = t;
            }
            out.push(u);
        }
        Ok(out)
    }

    /// Demand `D = N u̇`.
    pub fn demand(&self, t: f64) -> Result<f64> {
        let u = self.u_of_t(t)?;
        Ok(self.n * self.rhs(u))
    }

    /// Time at which a cutoff kernel freezes; `None` for other kernels.
    pub fn cutoff_time(&self) -> Option<f64> {
        match self.kernel {
            FeedbackKernel::InverseUCutoff { u1 } => self.t_of_u(u1).ok(),
            _ => None,
        }
    }
}

/// `∫_{u0}^{u} dx / (xⁿ (1 - x))` for a general power.
fn power_time(n: f64, u0: f64, u: f64) -> Result<f64> {
    if n >= 1.0 && u0 == 0.0 {
        return Err(Error::NeverReached { target: u });
    }
    // 1/(xⁿ(1-x)) = 1/(1-x) + (1 - xⁿ)/(xⁿ(1-x)); the first part is a log,
    // the second is bounded near x = 1.
    let log_part = ln_1p(-u0) - ln_1p(-u);
    let smooth = |x: f64| {
        let lx = ln(x);
        let one_minus_xn = -expm1(n * lx);
        let ratio = if 1.0 - x > 1e-8 { one_minus_xn / (1.0 - x) } else { n };
        (ratio, lx)
    };
    let rest = if n < 1.0 {
        // v = x^{1-n} removes the x^{-n} singularity at zero.
        let m = 1.0 - n;
        let g = |v: f64| {
            if v <= 0.0 {
                return 1.0 / m;
            }
            let x = powf(v, 1.0 / m);
            smooth(x).0 / m
        };
        quadrature(g, powf(u0, m), powf(u, m), QUAD_TOL)?
    } else {
        // w = ln x: dx/xⁿ = x^{1-n} dw.
        let g = |w: f64| {
            let x = exp(w);
            let (ratio, lx) = smooth(x);
            ratio * exp((1.0 - n) * lx)
        };
        quadrature(g, ln(u0), ln(u), QUAD_TOL)?
    };
    Ok(log_part + rest)
}

/// Growth rate that puts the half-market point at `t50`.
pub fn calibrate_rate(kernel: FeedbackKernel, t50: f64, u0: f64) -> Result<f64> {
    kernel.validate()?;
    if !(t50 > 0.0 && t50.is_finite()) {
        return Err(Error::param("t50", "must be positive"));
    }
    if !(0.0..0.5).contains(&u0) {
        return Err(Error::param("u0", "initial share must lie in [0, 0.5) to calibrate on T50"));
    }
    let unit = FeedbackModel { kernel, rate: 1.0, u0, n: 1.0 };
    match unit.t_of_u(0.5) {
        Ok(t) => Ok(t / t50),
        Err(Error::NeverReached { .. }) => Err(Error::param("kernel", "half the market is never reached")),
        Err(e) => Err(e),
    }
}

/// T10, T50, T60 - T50 and the inflection of a model.
pub fn latency_metrics(m: &FeedbackModel) -> Result<MarketMetrics> {
    m.validate()?;
    let t50 = m.t_of_u(0.5)?;
    let (t10, t10_flag) = if m.u0 >= 0.1 { (0.0, true) } else { (m.t_of_u(0.1)?, false) };
    let t60_minus_t50 = match m.t_of_u(0.6) {
        Ok(t60) => Some(t60 - t50),
        Err(Error::NeverReached { .. }) | Err(Error::Domain { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(MarketMetrics {
        t50,
        t10,
        t10_flag,
        t60_minus_t50,
        inflection: inflection(m)?,
    })
}

/// Inflection of `u(t)` ahead of the initial state, if any.
pub fn inflection(m: &FeedbackModel) -> Result<Option<Inflection>> {
    let u = match m.kernel.canonical() {
        FeedbackKernel::Bass { ratio } if ratio > 1.0 => (ratio - 1.0) / (2.0 * ratio),
        FeedbackKernel::Linear => 0.5,
        FeedbackKernel::Sqrt => 1.0 / 3.0,
        FeedbackKernel::Quadratic => 2.0 / 3.0,
        FeedbackKernel::Power { n } => n / (n + 1.0),
        _ => return Ok(None),
    };
    if u <= m.u0 {
        return Ok(None);
    }
    match m.t_of_u(u) {
        Ok(t) => Ok(Some(Inflection { u, t, gradient: m.rhs(u) })),
        Err(Error::NeverReached { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Equilibria of the autonomous kernel on `[0, 1]`.
pub fn classify_equilibria(kernel: FeedbackKernel) -> Result<Vec<Equilibrium>> {
    kernel.validate()?;
    let k = kernel.canonical();
    let mut out = Vec::new();
    match k {
        FeedbackKernel::Linear | FeedbackKernel::Quadratic => out.push(Equilibrium { u: 0.0, class: Stability::Repeller }),
        FeedbackKernel::Power { n } => {
            // Below n = 1, F(u)/u is unbounded at zero and solutions leave u = 0.
            let class = if n < 1.0 { Stability::NotEquilibrium } else { Stability::Repeller };
            out.push(Equilibrium { u: 0.0, class });
        }
        FeedbackKernel::Sqrt => out.push(Equilibrium { u: 0.0, class: Stability::NotEquilibrium }),
        FeedbackKernel::InverseUCutoff { u1 } => {
            // Growth stops at u1; every share above is frozen too.
            out.push(Equilibrium { u: u1, class: Stability::Attractor });
            return Ok(out);
        }
        _ => {}
    }
    // u̇ > 0 just below saturation for every kernel, so u = 1 attracts.
    let probe = FeedbackModel { kernel: k, rate: 1.0, u0: 0.0, n: 1.0 };
    debug_assert!(probe.rhs(1.0 - 1e-6) > 0.0);
    out.push(Equilibrium { u: 1.0, class: Stability::Attractor });
    Ok(out)
}

/// Share and demand on a grid.
pub fn feedback_path(m: &FeedbackModel, grid: &[f64]) -> Result<Trajectory> {
    m.validate()?;
    let u = m.u_on_grid(grid)?;
    let d: Vec<f64> = u.iter().map(|&x| m.n * m.rhs(x)).collect();
    Trajectory::from_columns(grid, &["u", "D"], &[u, d])
}

/// Demand channel alone.
pub fn demand_curve(m: &FeedbackModel, grid: &[f64]) -> Result<Trajectory> {
    m.validate()?;
    Trajectory::tabulate(grid, &["D"], |t| Ok(vec![m.demand(t)?]))
}

/// Share path of the cutoff kernel; identical to [`feedback_path`], kept as
/// a named entry point because the freeze time is part of the result.
pub fn cutoff_path(m: &FeedbackModel, grid: &[f64]) -> Result<(Trajectory, f64)> {
    let t1 = m
        .cutoff_time()
        .ok_or(Error::param("kernel", "cutoff path needs the inverse_u_cutoff kernel"))?;
    Ok((feedback_path(m, grid)?, t1))
}

/// The quadratic-kernel time-to-share exactly as printed in the source
/// text, with `u(u - u0)` in the logarithm. It misses `t(u0) = 0` and is
/// kept only so reports can show both numbers.
pub fn quadratic_t_of_u_printed(gamma: f64, u0: f64, u: f64) -> f64 {
    (ln(u * (u - u0) / ((1.0 - u) * u0)) + 1.0 / u0 - 1.0 / u) / gamma
}

/// T10/T50 of the quadratic kernel under the printed formula.
pub fn quadratic_latency_ratio_printed(u0: f64) -> f64 {
    quadratic_t_of_u_printed(1.0, u0, 0.1) / quadratic_t_of_u_printed(1.0, u0, 0.5)
}

/// Relative gap between two latencies, used by reports.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    abs(a - b) / abs(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_on_grid, FnField, TimeGrid};

    const KERNELS: [FeedbackKernel; 11] = [
        FeedbackKernel::None,
        FeedbackKernel::Bass { ratio: 3.0 },
        FeedbackKernel::Linear,
        FeedbackKernel::Sqrt,
        FeedbackKernel::Quadratic,
        FeedbackKernel::Power { n: 0.3 },
        FeedbackKernel::Power { n: 3.5 },
        FeedbackKernel::OneMinusU,
        FeedbackKernel::InverseU,
        FeedbackKernel::InverseUCutoff { u1: 0.7 },
        FeedbackKernel::TrendLinearZero,
    ];

    fn seed(k: FeedbackKernel) -> f64 {
        if k.needs_seed() {
            0.01
        } else {
            0.0
        }
    }

    #[test]
    fn logistic_closed_form_against_rk4() {
        let m = FeedbackModel::new(FeedbackKernel::Linear, 0.919, 0.01, 1.0).unwrap();
        let f = FnField::new(1, |_t, y: &[f64], dy: &mut [f64]| dy[0] = 0.919 * y[0] * (1.0 - y[0]));
        let g = TimeGrid::new(alloc::vec![0.0, 5.0]).unwrap();
        let tr = integrate_on_grid(&f, &[0.01], &g, 5e-4).unwrap();
        assert!((tr.states()[1][0] - m.u_of_t(5.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn half_market_constants() {
        let g = calibrate_rate(FeedbackKernel::Linear, 1.0, 0.01).unwrap();
        assert!((g - 4.595).abs() < 1e-3);
        let g = calibrate_rate(FeedbackKernel::InverseU, 1.0, 0.0).unwrap();
        assert!((g - 0.1931).abs() < 1e-4);
        let g = calibrate_rate(FeedbackKernel::Sqrt, 1.0, 0.0).unwrap();
        assert!((g - 1.7627).abs() < 1e-4);
        let g = calibrate_rate(FeedbackKernel::OneMinusU, 4.0, 0.0).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
        let g = calibrate_rate(FeedbackKernel::None, 5.0, 0.0).unwrap();
        assert!((g - core::f64::consts::LN_2 / 5.0).abs() < 1e-15);
        let g = calibrate_rate(FeedbackKernel::TrendLinearZero, 1.0, 0.0).unwrap();
        assert!((g - 0.3069).abs() < 1e-4);
        assert!(calibrate_rate(FeedbackKernel::Linear, 1.0, 0.5).is_err());
    }

    #[test]
    fn sqrt_from_zero_matches_printed_growth() {
        let m = FeedbackModel::new(FeedbackKernel::Sqrt, 0.8, 0.0, 1.0).unwrap();
        for t in [0.1, 1.0, 4.0] {
            let e = libm::exp(-0.8 * t);
            let want = ((1.0 - e) / (1.0 + e)).powi(2);
            assert!((m.u_of_t(t).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trip_all_kernels() {
        for k in KERNELS {
            let m = FeedbackModel::calibrated(k, 5.0, seed(k), 1.0).unwrap();
            assert_eq!(m.t_of_u(m.u0).unwrap(), 0.0);
            assert_eq!(m.u_of_t(0.0).unwrap(), m.u0);
            let top = match k {
                FeedbackKernel::InverseUCutoff { u1 } => u1 - 1e-6,
                _ => 0.999,
            };
            for i in 0..=40 {
                let u = m.u0 + 1e-6 + (top - m.u0 - 1e-6) * i as f64 / 40.0;
                let t = m.t_of_u(u).unwrap();
                let back = m.u_of_t(t).unwrap();
                assert!((back - u).abs() < 1e-9, "{k:?} u={u} back={back}");
            }
            let half = m.u_of_t(5.0).unwrap();
            if !matches!(k, FeedbackKernel::InverseUCutoff { .. }) || 0.7 > 0.5 {
                assert!((half - 0.5).abs() < 1e-10, "{k:?} {half}");
            }
        }
    }

    #[test]
    fn kernels_against_rk4() {
        for k in KERNELS {
            let m = FeedbackModel::calibrated(k, 1.0, seed(k), 1.0).unwrap();
            // Kernels singular at zero start from the closed form a little later.
            let t0 = if m.u0 == 0.0 { 1e-3 } else { 0.0 };
            let y0 = m.u_of_t(t0).unwrap();
            let f = FnField::new(1, move |_t, y: &[f64], dy: &mut [f64]| dy[0] = m.rhs(y[0]));
            // RK4 stages straddling the cutoff discontinuity lose accuracy,
            // so stop just short of it.
            let t1 = m.cutoff_time().map_or(5.0, |t1| t1 * 0.999);
            let g = TimeGrid::uniform(t0, t1, 101).unwrap();
            // Strong powers calibrate to large rates; keep rate·h small.
            let tr = integrate_on_grid(&f, &[y0], &g, (0.05 / m.rate).min(2e-4)).unwrap();
            let exact = m.u_on_grid(&g).unwrap();
            for ((t, s), &want) in tr.times().iter().zip(tr.states()).zip(&exact) {
                assert!((s[0] - want).abs() <= 1e-6 * want.max(1e-3), "{k:?} t={t} {} vs {want}", s[0]);
            }
        }
    }

    #[test]
    fn table_ratios() {
        let ratio = |u0: f64| {
            let m = FeedbackModel::new(FeedbackKernel::Linear, 1.0, u0, 1.0).unwrap();
            m.t_of_u(0.1).unwrap() / m.t_of_u(0.5).unwrap()
        };
        for (u0, want) in [(0.005, 0.58), (0.01, 0.52), (0.02, 0.44), (0.04, 0.31)] {
            assert!((ratio(u0) - want).abs() < 0.01, "{u0}: {}", ratio(u0));
        }
        let inv = FeedbackModel::new(FeedbackKernel::InverseU, 1.0, 0.0, 1.0).unwrap();
        let l = latency_metrics(&inv).unwrap();
        assert!((l.t10 / l.t50 - 0.0278).abs() < 5e-4);
        let om = FeedbackModel::new(FeedbackKernel::OneMinusU, 1.0, 0.0, 1.0).unwrap();
        let l = latency_metrics(&om).unwrap();
        assert!((l.t10 - l.t50 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_derived_and_printed() {
        let derived = {
            let m = FeedbackModel::new(FeedbackKernel::Quadratic, 1.0, 0.01, 1.0).unwrap();
            m.t_of_u(0.1).unwrap() / m.t_of_u(0.5).unwrap()
        };
        assert!((derived - 0.90).abs() < 0.005, "{derived}");
        let printed = quadratic_latency_ratio_printed(0.01);
        assert!((printed - 0.88).abs() < 0.005, "{printed}");
        // The printed form does not vanish at u0.
        assert!(quadratic_t_of_u_printed(1.0, 0.01, 0.01).is_infinite());
    }

    #[test]
    fn inflections() {
        let m = FeedbackModel::calibrated(FeedbackKernel::Sqrt, 1.0, 0.0, 1.0).unwrap();
        let i = inflection(&m).unwrap().unwrap();
        assert!((i.u - 1.0 / 3.0).abs() < 1e-15);
        assert!((i.gradient - 0.68).abs() < 0.005);
        assert!((i.gradient - 2.0 / (3.0 * libm::sqrt(3.0)) * m.rate).abs() < 1e-14);
        let m = FeedbackModel::new(FeedbackKernel::Power { n: 10.0 }, 1.0, 0.01, 1.0).unwrap();
        assert!((inflection(&m).unwrap().unwrap().u - 10.0 / 11.0).abs() < 1e-15);
        let m = FeedbackModel::new(FeedbackKernel::Bass { ratio: 1.0 }, 1.0, 0.0, 1.0).unwrap();
        assert!(inflection(&m).unwrap().is_none());
        let m = FeedbackModel::new(FeedbackKernel::Bass { ratio: 5.0 }, 0.1, 0.0, 1.0).unwrap();
        let i = inflection(&m).unwrap().unwrap();
        assert!((i.t - libm::log(5.0) / 0.6).abs() < 1e-12);
    }

    #[test]
    fn note_one_law_numerically() {
        // Locate the maximum of u̇ along the solution and compare with n/(n+1).
        for n in [0.5, 1.0, 2.0, 10.0] {
            let m = FeedbackModel::new(FeedbackKernel::Power { n }, 1.0, 0.001, 1.0).unwrap();
            let (u, _) = crate::numerics::golden_max(|u| m.rhs(u), 0.0, 1.0, 1e-12).unwrap();
            assert!((u - n / (n + 1.0)).abs() < 1e-6, "n={n}: {u}");
        }
    }

    #[test]
    fn equilibria() {
        use Stability::*;
        let c = |k| classify_equilibria(k).unwrap();
        assert_eq!(c(FeedbackKernel::Linear), [Equilibrium { u: 0.0, class: Repeller }, Equilibrium { u: 1.0, class: Attractor }]);
        assert_eq!(c(FeedbackKernel::Quadratic)[0].class, Repeller);
        assert_eq!(c(FeedbackKernel::None), [Equilibrium { u: 1.0, class: Attractor }]);
        assert_eq!(c(FeedbackKernel::Sqrt)[0].class, NotEquilibrium);
        assert_eq!(c(FeedbackKernel::InverseUCutoff { u1: 0.4 }), [Equilibrium { u: 0.4, class: Attractor }]);
    }

    #[test]
    fn cutoff_freezes() {
        let m = FeedbackModel::new(FeedbackKernel::InverseUCutoff { u1: 0.5 }, 1.0, 0.0, 1.0).unwrap();
        let t1 = m.cutoff_time().unwrap();
        assert!((t1 - 0.1931).abs() < 1e-4);
        assert_eq!(m.u_of_t(t1 * 3.0).unwrap(), 0.5);
        let free = FeedbackModel { kernel: FeedbackKernel::InverseU, ..m };
        assert!((m.u_of_t(0.5 * t1).unwrap() - free.u_of_t(0.5 * t1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn ordering_of_latencies() {
        let t10 = |k: FeedbackKernel, u0: f64| {
            latency_metrics(&FeedbackModel::calibrated(k, 5.0, u0, 1.0).unwrap()).unwrap().t10
        };
        let seq = [
            t10(FeedbackKernel::TrendLinearZero, 0.0),
            t10(FeedbackKernel::InverseU, 0.0),
            t10(FeedbackKernel::OneMinusU, 0.0),
            t10(FeedbackKernel::None, 0.0),
            t10(FeedbackKernel::Sqrt, 0.0),
            t10(FeedbackKernel::Linear, 0.01),
            t10(FeedbackKernel::Quadratic, 0.01),
        ];
        assert!(seq.windows(2).all(|w| w[0] < w[1]), "{seq:?}");
    }

    #[test]
    fn marching_path_matches_pointwise() {
        for n in [0.3, 3.5] {
            let k = FeedbackKernel::Power { n };
            let m = FeedbackModel::calibrated(k, 1.0, seed(k), 1.0).unwrap();
            let g = TimeGrid::uniform(0.0, 4.0, 41).unwrap();
            let path = feedback_path(&m, &g).unwrap();
            for (t, s) in path.times().iter().zip(path.states()) {
                assert!((s[0] - m.u_of_t(*t).unwrap()).abs() < 1e-10, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn linear_demand_at_start() {
        let m = FeedbackModel::new(FeedbackKernel::Linear, 0.7, 0.02, 500.0).unwrap();
        assert!((m.demand(0.0).unwrap() - 500.0 * 0.7 * 0.02 * 0.98).abs() < 1e-12);
    }

    #[test]
    fn quadratic_demand_against_finite_difference() {
        let m = FeedbackModel::calibrated(FeedbackKernel::Quadratic, 5.0, 0.01, 1000.0).unwrap();
        let h = 1e-4;
        for i in 1..50 {
            let t = 0.2 * i as f64;
            let fd = m.n * (m.u_of_t(t + h).unwrap() - m.u_of_t(t - h).unwrap()) / (2.0 * h);
            assert!((fd - m.demand(t).unwrap()).abs() < 1e-5 * m.n * m.rate);
        }
    }
}
