//! Single supplier, innovators only.
//!
//! Every model here is linear in the state, so each path is a closed form.
//! The share `u` is normalised by the population `N`; demand is `D = N u̇`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln, ln_1p, relax, sqrt};
use crate::numerics::Trajectory;

fn check_rate(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, "rate must be finite and non-negative"))
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, "must be finite and positive"))
    }
}

fn check_share(name: &'static str, u0: f64) -> Result<()> {
    if (0.0..1.0).contains(&u0) || u0 == 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, "share must lie in [0, 1]"))
    }
}

/// Constant adaptation rate `a` from an initial share `u0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleAdoption {
    pub a: f64,
    pub u0: f64,
    pub n: f64,
}

/// Times to reach half and a tenth of the market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Latency {
    pub t50: f64,
    pub t10: f64,
}

impl SimpleAdoption {
    pub fn new(a: f64, u0: f64, n: f64) -> Result<Self> {
        let m = SimpleAdoption { a, u0, n };
        m.validate()?;
        Ok(m)
    }

    /// Rate giving `u(t50) = 1/2` from an empty market.
    pub fn from_t50(t50: f64, n: f64) -> Result<Self> {
        check_positive("t50", t50)?;
        Self::new(core::f64::consts::LN_2 / t50, 0.0, n)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        check_share("u0", self.u0)?;
        check_positive("N", self.n)
    }

    /// Mean time between subscriptions, `1/a`.
    pub fn tau(&self) -> f64 {
        1.0 / self.a
    }

    pub fn share(&self, t: f64) -> f64 {
        1.0 - (1.0 - self.u0) * exp(-self.a * t)
    }

    pub fn demand(&self, t: f64) -> f64 {
        self.a * self.n * (1.0 - self.u0) * exp(-self.a * t)
    }

    /// Time at which the share first equals `u`; zero if it starts above.
    pub fn time_to(&self, u: f64) -> Result<f64> {
        if !(u < 1.0) || u.is_nan() {
            return Err(Error::NeverReached { target: u });
        }
        if u <= self.u0 {
            return Ok(0.0);
        }
        // ln((1 - u0)/(1 - u)) / a, written to keep precision near u0 = 0
        Ok((ln_1p(-self.u0) - ln_1p(-u)) / self.a)
    }
}

pub fn simple_path(m: &SimpleAdoption, grid: &[f64]) -> Result<Trajectory> {
    m.validate()?;
    Trajectory::tabulate(grid, &["u", "D"], |t| Ok(vec![m.share(t), m.demand(t)]))
}

/// T50 and T10 of the constant-rate model.
pub fn simple_latency(m: &SimpleAdoption) -> Result<Latency> {
    m.validate()?;
    Ok(Latency {
        t50: m.time_to(0.5)?,
        t10: m.time_to(0.1)?,
    })
}

/// Time-dependent adaptation rate `a(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateSchedule {
    Constant { a: f64 },
    /// `a0 + a1 t`
    Linear { a0: f64, a1: f64 },
    /// `a0 e^{-beta t}`
    ExpDecay { a0: f64, beta: f64 },
    /// `a` up to `t_end`, zero afterwards.
    Cutoff { a: f64, t_end: f64 },
    /// Piecewise linear through `(t, a)` points, held flat outside the table.
    Tabulated { points: Vec<(f64, f64)> },
}

impl RateSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            RateSchedule::Constant { a } => check_rate("a", *a),
            RateSchedule::Linear { a0, a1 } => {
                check_rate("a0", *a0)?;
                check_rate("a1", *a1)
            }
            RateSchedule::ExpDecay { a0, beta } => {
                check_rate("a0", *a0)?;
                check_positive("beta", *beta)
            }
            RateSchedule::Cutoff { a, t_end } => {
                check_rate("a", *a)?;
                if t_end.is_finite() && *t_end >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::param("T", "cutoff time must be finite and non-negative"))
                }
            }
            RateSchedule::Tabulated { points } => {
                if points.is_empty() {
                    return Err(Error::param("points", "table is empty"));
                }
                for &(t, a) in points {
                    if !t.is_finite() {
                        return Err(Error::param("points", "times must be finite"));
                    }
                    check_rate("points", a)?;
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::param("points", "times must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    /// `a(t)`
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            RateSchedule::Constant { a } => *a,
            RateSchedule::Linear { a0, a1 } => a0 + a1 * t,
            RateSchedule::ExpDecay { a0, beta } => a0 * exp(-beta * t),
            RateSchedule::Cutoff { a, t_end } => {
                if t <= *t_end {
                    *a
                } else {
                    0.0
                }
            }
            RateSchedule::Tabulated { points } => interp(points, t),
        }
    }

    /// `∫_0^t a(x) dx`
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            RateSchedule::Constant { a } => a * t,
            RateSchedule::Linear { a0, a1 } => a0 * t + 0.5 * a1 * t * t,
            RateSchedule::ExpDecay { a0, beta } => a0 * relax(*beta, t),
            RateSchedule::Cutoff { a, t_end } => a * t.min(*t_end),
            RateSchedule::Tabulated { points } => table_integral(points, t) - table_integral(points, 0.0),
        }
    }

    /// Share reached as `t → ∞` from an empty market.
    pub fn asymptote(&self) -> f64 {
        match self {
            RateSchedule::ExpDecay { a0, beta } => -crate::math::expm1(-a0 / beta),
            RateSchedule::Cutoff { a, t_end } => -crate::math::expm1(-a * t_end),
            RateSchedule::Constant { a } if *a == 0.0 => 0.0,
            RateSchedule::Linear { a0, a1 } if *a0 == 0.0 && *a1 == 0.0 => 0.0,
            RateSchedule::Tabulated { points } if points[points.len() - 1].1 == 0.0 => {
                let end = points[points.len() - 1].0.max(0.0);
                -crate::math::expm1(-self.integral(end))
            }
            _ => 1.0,
        }
    }
}

fn interp(points: &[(f64, f64)], t: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let k = points.partition_point(|p| p.0 <= t);
    let (t0, a0) = points[k - 1];
    let (t1, a1) = points[k];
    a0 + (a1 - a0) * (t - t0) / (t1 - t0)
}

/// Antiderivative of the interpolated table, anchored at the first point.
/// Piecewise linear rates integrate exactly with the trapezoid rule.
fn table_integral(points: &[(f64, f64)], t: f64) -> f64 {
    let first = points[0];
    if t <= first.0 {
        return first.1 * (t - first.0);
    }
    let mut acc = 0.0;
    for w in points.windows(2) {
        let (t0, a0) = w[0];
        let (t1, _) = w[1];
        if t <= t1 {
            return acc + 0.5 * (a0 + interp(points, t)) * (t - t0);
        }
        acc += 0.5 * (w[0].1 + w[1].1) * (t1 - t0);
    }
    let last = points[points.len() - 1];
    acc + last.1 * (t - last.0)
}

/// `u(t) = 1 - (1 - u0) exp(-∫a)` with `D = a(t) N (1 - u0) exp(-∫a)`.
pub fn scheduled_path(schedule: &RateSchedule, u0: f64, n: f64, grid: &[f64]) -> Result<Trajectory> {
    schedule.validate()?;
    check_share("u0", u0)?;
    check_positive("N", n)?;
    Trajectory::tabulate(grid, &["u", "D"], |t| {
        let rem = (1.0 - u0) * exp(-schedule.integral(t));
        Ok(vec![1.0 - rem, schedule.rate(t) * n * rem])
    })
}

/// Independent market segment of normalised size `n_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub size: f64,
    pub schedule: RateSchedule,
}

fn check_segments(segments: &[Segment]) -> Result<()> {
    if segments.is_empty() {
        return Err(Error::param("segments", "at least one segment is required"));
    }
    let mut total = 0.0;
    for s in segments {
        if !(s.size > 0.0 && s.size <= 1.0) {
            return Err(Error::param("n_i", "segment size must lie in (0, 1]"));
        }
        s.schedule.validate()?;
        total += s.size;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::param("n_i", "segment sizes must sum to 1"));
    }
    Ok(())
}

pub fn segmented_path(segments: &[Segment], n: f64, grid: &[f64]) -> Result<Trajectory> {
    check_segments(segments)?;
    check_positive("N", n)?;
    Trajectory::tabulate(grid, &["u", "D"], |t| {
        let mut rem = 0.0;
        let mut d = 0.0;
        for s in segments {
            let e = s.size * exp(-s.schedule.integral(t));
            rem += e;
            d += s.schedule.rate(t) * n * e;
        }
        Ok(vec![1.0 - rem, d])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HesitationVariant {
    /// Hesitant customers can only go on to subscribe.
    Absorbing,
    /// Hesitant customers drift back to the potential pool at rate `c`.
    Returning,
}

/// Potential customers subscribe at `a` or hesitate at `b`; `c` is the exit
/// rate of the hesitant state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HesitationParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub variant: HesitationVariant,
}

impl HesitationParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        check_positive("b", self.b)?;
        check_positive("c", self.c)
    }

    /// Eigenvalues `(λ1, λ2)` of the returning variant, `λ2 < λ1 < 0`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (a, b, c) = (self.a, self.b, self.c);
        let s = a + b + c;
        let r = self.r();
        // λ1 = -(s - r)/2 loses digits when r ≈ s; use λ1 λ2 = a c instead.
        let l2 = -0.5 * (s + r);
        (a * c / l2, l2)
    }

    /// `√((a+b+c)² - 4ac)`, which equals `λ1 - λ2`.
    pub fn r(&self) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        // (a+b+c)² - 4ac = (a - c)² + b² + 2b(a + c), a sum of non-negatives
        sqrt((a - c) * (a - c) + b * b + 2.0 * b * (a + c))
    }

    /// `(p, h, u)` at time `t` from `p(0) = 1`.
    pub fn state(&self, t: f64) -> [f64; 3] {
        let (a, b, c) = (self.a, self.b, self.c);
        match self.variant {
            HesitationVariant::Absorbing => {
                let k = a + b;
                let p = exp(-k * t);
                let ec = exp(-c * t);
                // u = 1 - e^{-ct} + (a - c) e^{-ct} (1 - e^{-(k-c)t})/(k - c), finite at k = c
                let u = -crate::math::expm1(-c * t) + (a - c) * ec * relax(k - c, t);
                [p, 1.0 - p - u, u]
            }
            HesitationVariant::Returning => {
                let (l1, l2) = self.eigenvalues();
                let r = self.r();
                let e1 = exp(l1 * t);
                let e2 = exp(l2 * t);
                let p = ((c + l1) * e1 - (c + l2) * e2) / r;
                let h = b * (e1 - e2) / r;
                let u = 1.0 - e1 * ((a + l1) * exp(-r * t) - a - l2) / r;
                [p, h, u]
            }
        }
    }

    /// `u̇ = a p + c h` (absorbing) or `a p` (returning).
    pub fn rate_of_share(&self, t: f64) -> f64 {
        let [p, h, _] = self.state(t);
        match self.variant {
            HesitationVariant::Absorbing => self.a * p + self.c * h,
            HesitationVariant::Returning => self.a * p,
        }
    }
}

pub fn hesitation_path(p: &HesitationParams, n: f64, grid: &[f64]) -> Result<Trajectory> {
    p.validate()?;
    check_positive("N", n)?;
    Trajectory::tabulate(grid, &["p", "h", "u", "D"], |t| {
        let [pp, h, u] = p.state(t);
        Ok(vec![pp, h, u, n * p.rate_of_share(t)])
    })
}

/// Births `d` into and deaths `f` out of the potential pool; subscribers
/// leave at `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthDeathParams {
    pub a: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
}

impl BirthDeathParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        check_rate("d", self.d)?;
        check_rate("f", self.f)?;
        check_rate("g", self.g)?;
        if !(self.a + self.f > self.d + self.g) {
            return Err(Error::param("d", "need a + f > d + g"));
        }
        Ok(())
    }

    pub fn potential(&self, t: f64) -> f64 {
        exp(-(self.a + self.f - self.d) * t)
    }

    pub fn share(&self, t: f64) -> f64 {
        let k = self.a + self.f - self.d - self.g;
        self.a * exp(-self.g * t) * relax(k, t)
    }
}

pub fn birth_death_path(p: &BirthDeathParams, n: f64, grid: &[f64]) -> Result<Trajectory> {
    p.validate()?;
    check_positive("N", n)?;
    Trajectory::tabulate(grid, &["p", "u", "D"], |t| {
        let pp = p.potential(t);
        Ok(vec![pp, p.share(t), p.a * n * pp])
    })
}

/// Latency of an arbitrary monotone share function, by bracketing on
/// `[0, horizon]`. Used for schedules and segments that lack an inverse.
pub fn time_to_share<F: Fn(f64) -> f64>(share: F, target: f64, horizon: f64) -> Result<f64> {
    if share(0.0) >= target {
        return Ok(0.0);
    }
    if share(horizon) < target {
        return Err(Error::NeverReached { target });
    }
    crate::numerics::solve_root(|t| share(t) - target, 0.0, horizon, 1e-12 * horizon.max(1.0))
}

/// `ln(10/9)/ln 2`, the T10/T50 ratio of the constant-rate model.
pub fn simple_latency_ratio() -> f64 {
    ln(10.0 / 9.0) / core::f64::consts::LN_2
}
