//! Buyer / player / quitter lifecycle of games and services with limited
//! popularity.
//!
//! `B` people may still buy, `P` are playing and `Q` have quit (or will never
//! buy):
//!
//! ```text
//! Ḃ = -(a + c) B,   Ṗ = a B - b P,   Q̇ = b P + c B
//! ```
//!
//! with intensities `a = a(t, P)`, `b = b(t, Q)` and `c = c(t)`. Demand is
//! `D = a B` and `C = ∫ D` counts everyone who has bought so far.
//!
//! Every path reconstructs `Q = N - B - P`, so conservation holds to
//! rounding by construction.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp, expm1, ln, ln_1p, relax, sqrt};
use crate::monopoly::RateSchedule;
use crate::numerics::{erf, erfcx, integrate_on_grid, quadrature, solve_root, FnField, TimeGrid, Trajectory};

const QUAD_TOL: f64 = 1e-11;
const ROOT_TOL: f64 = 1e-15;

/// Channel order of every lifecycle path.
pub const CHANNELS: [&str; 5] = ["B", "P", "Q", "D", "C"];

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

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidTrajectory("time grid is empty"));
    }
    if grid[0] < 0.0 || !grid[0].is_finite() {
        return Err(Error::param("grid", "times must be non-negative"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !grid[grid.len() - 1].is_finite() {
        return Err(Error::InvalidTrajectory("time grid is not strictly increasing"));
    }
    Ok(())
}

/// Head counts of the three groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpqState {
    pub buyers: f64,
    pub players: f64,
    pub quitters: f64,
}

impl BpqState {
    pub fn new(buyers: f64, players: f64, quitters: f64) -> Result<Self> {
        let s = BpqState { buyers, players, quitters };
        s.validate()?;
        Ok(s)
    }

    /// Everyone a potential buyer.
    pub fn fresh(n: f64) -> Self {
        BpqState { buyers: n, players: 0.0, quitters: 0.0 }
    }

    /// `N = B + P + Q`.
    pub fn total(&self) -> f64 {
        self.buyers + self.players + self.quitters
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("B0", self.buyers), ("P0", self.players), ("Q0", self.quitters)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, "head count must be finite and non-negative"));
            }
        }
        if !(self.total() > 0.0) {
            return Err(Error::param("N", "population must be positive"));
        }
        Ok(())
    }
}

/// The intensity laws of the lifecycle model.
#[derive(Debug, Clone, PartialEq)]
pub enum BpqKind {
    /// `a(t)`, `b(t)`, `c(t)`: every buyer is an innovator.
    Case1 { a: RateSchedule, b: RateSchedule, c: RateSchedule },
    /// `a = βP`, constant `b`: the SIR model.
    Case2 { beta: f64, b: f64 },
    /// `a = a + βP`, constant `b`.
    Case3 { a: f64, beta: f64, b: f64 },
    /// `a = βP`, `b = γQ`.
    Case4 { beta: f64, gamma: f64 },
    /// Constant `a`, `b = γQ`.
    Case5 { a: f64, gamma: f64 },
    /// Constant `a`, `b = b + γQ`.
    Case6 { a: f64, b: f64, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpqCase {
    pub kind: BpqKind,
    pub initial: BpqState,
}

impl BpqCase {
    pub fn new(kind: BpqKind, initial: BpqState) -> Result<Self> {
        let c = BpqCase { kind, initial };
        c.validate()?;
        Ok(c)
    }

    pub fn n(&self) -> f64 {
        self.initial.total()
    }

    pub fn validate(&self) -> Result<()> {
        self.initial.validate()?;
        let s = &self.initial;
        let need_players = || {
            if s.players > 0.0 {
                Ok(())
            } else {
                Err(Error::Initiation("P(0) must be positive: with no players at launch there are never any"))
            }
        };
        let need_quitters = || {
            if s.quitters > 0.0 {
                Ok(())
            } else {
                Err(Error::Initiation("Q(0) must be positive: quitting is driven by an initial population of quitters"))
            }
        };
        match &self.kind {
            BpqKind::Case1 { a, b, c } => {
                a.validate()?;
                b.validate()?;
                c.validate()
            }
            BpqKind::Case2 { beta, b } => {
                check_positive("beta", *beta)?;
                check_positive("b", *b)?;
                need_players()
            }
            BpqKind::Case3 { a, beta, b } => {
                check_rate("a", *a)?;
                check_rate("beta", *beta)?;
                check_rate("b", *b)
            }
            BpqKind::Case4 { beta, gamma } => {
                check_positive("beta", *beta)?;
                check_positive("gamma", *gamma)?;
                need_players()?;
                need_quitters()
            }
            BpqKind::Case5 { a, gamma } => {
                check_rate("a", *a)?;
                check_positive("gamma", *gamma)?;
                need_quitters()
            }
            BpqKind::Case6 { a, b, gamma } => {
                check_rate("a", *a)?;
                check_rate("b", *b)?;
                check_rate("gamma", *gamma)
            }
        }
    }

    /// `a(t, P)`.
    pub fn adoption(&self, t: f64, p: f64) -> f64 {
        match &self.kind {
            BpqKind::Case1 { a, .. } => a.rate(t),
            BpqKind::Case2 { beta, .. } | BpqKind::Case4 { beta, .. } => beta * p,
            BpqKind::Case3 { a, beta, .. } => a + beta * p,
            BpqKind::Case5 { a, .. } | BpqKind::Case6 { a, .. } => *a,
        }
    }

    /// `b(t, Q)`.
    pub fn quitting(&self, t: f64, q: f64) -> f64 {
        match &self.kind {
            BpqKind::Case1 { b, .. } => b.rate(t),
            BpqKind::Case2 { b, .. } | BpqKind::Case3 { b, .. } => *b,
            BpqKind::Case4 { gamma, .. } | BpqKind::Case5 { gamma, .. } => gamma * q,
            BpqKind::Case6 { b, gamma, .. } => b + gamma * q,
        }
    }

    /// `c(t)`; zero outside case 1.
    pub fn never_buy(&self, t: f64) -> f64 {
        match &self.kind {
            BpqKind::Case1 { c, .. } => c.rate(t),
            _ => 0.0,
        }
    }

    /// Right-hand side of the three-equation system for `y = [B, P, Q]`.
    pub fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let a = self.adoption(t, y[1]);
        let b = self.quitting(t, y[2]);
        let c = self.never_buy(t);
        dy[0] = -(a + c) * y[0];
        dy[1] = a * y[0] - b * y[1];
        dy[2] = b * y[1] + c * y[0];
    }

    /// `Ṗ` at a state.
    pub fn player_rate(&self, t: f64, s: &BpqState) -> f64 {
        self.adoption(t, s.players) * s.buyers - self.quitting(t, s.quitters) * s.players
    }

    /// Upper bound on the intensities up to `t_end`, used to size RK4 steps.
    fn rate_scale(&self, t_end: f64) -> f64 {
        let n = self.n();
        let s = match &self.kind {
            BpqKind::Case1 { a, b, c } => {
                let peak = |r: &RateSchedule| r.rate(0.0).max(r.rate(t_end)).max(match r {
                    RateSchedule::Tabulated { points } => points.iter().map(|p| p.1).fold(0.0, f64::max),
                    _ => 0.0,
                });
                peak(a) + peak(b) + peak(c)
            }
            BpqKind::Case2 { beta, b } => beta * n + b,
            BpqKind::Case3 { a, beta, b } => a + beta * n + b,
            BpqKind::Case4 { beta, gamma } => (beta + gamma) * n,
            BpqKind::Case5 { a, gamma } => a + gamma * n,
            BpqKind::Case6 { a, b, gamma } => a + b + gamma * n,
        };
        s.max(1e-300)
    }
}

/// Assembles `B, P, Q, D, C` from the first two groups and the cumulative count.
fn assemble(case: &BpqCase, times: &[f64], buyers: &[f64], players: &[f64], bought: &[f64]) -> Result<Trajectory> {
    let n = case.n();
    let mut tr = Trajectory::with_capacity(&CHANNELS, times.len());
    for k in 0..times.len() {
        let (b, p) = (buyers[k], players[k]);
        let q = n - b - p;
        let d = case.adoption(times[k], p) * b;
        tr.push(times[k], vec![b, p, q, d, bought[k]])?;
    }
    Ok(tr)
}

/// Lifecycle path for any case, with channels `B, P, Q, D, C`.
pub fn bpq_path(case: &BpqCase, grid: &[f64]) -> Result<Trajectory> {
    case.validate()?;
    check_grid(grid)?;
    match &case.kind {
        BpqKind::Case1 { .. } => Ok(case1_closed_form(case, grid)?.trajectory),
        BpqKind::Case2 { .. } => sir_path(case, grid),
        BpqKind::Case3 { .. } => case3_path(case, grid),
        BpqKind::Case4 { .. } => case4_path(case, grid),
        BpqKind::Case5 { .. } => case5_path(case, grid),
        BpqKind::Case6 { .. } => case6_path(case, grid),
    }
}

/// Plain RK4 on the three-equation system, sampled on `grid`; channels
/// `B, P, Q`. This is the reference every closed form is checked against.
pub fn bpq_path_numeric(case: &BpqCase, grid: &[f64], max_step: Option<f64>) -> Result<Trajectory> {
    case.validate()?;
    check_grid(grid)?;
    let t_end = grid[grid.len() - 1];
    let h = max_step.unwrap_or(1e-3 / case.rate_scale(t_end));
    let field = FnField::new(3, |t, y: &[f64], dy: &mut [f64]| case.rhs(t, y, dy));
    let s = &case.initial;
    rk4_from_origin(&field, &[s.buyers, s.players, s.quitters], grid, h)?.relabel(&["B", "P", "Q"])
}

/// RK4 from `t = 0`, reporting only the samples on `grid`.
fn rk4_from_origin<V: crate::numerics::VectorField>(field: &V, y0: &[f64], grid: &[f64], h: f64) -> Result<Trajectory> {
    let prepend = grid[0] > 0.0;
    let mut pts = Vec::with_capacity(grid.len() + 1);
    if prepend {
        pts.push(0.0);
    }
    pts.extend_from_slice(grid);
    let raw = integrate_on_grid(field, y0, &TimeGrid::new(pts)?, h)?;
    if !prepend {
        return Ok(raw);
    }
    let labels: Vec<&str> = raw.labels().iter().map(|s| s.as_str()).collect();
    let mut out = Trajectory::with_capacity(&labels, grid.len());
    for (t, row) in raw.times().iter().zip(raw.states()).skip(1) {
        out.push(*t, row.clone())?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Case 1

/// How a case-1 path was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case1Method {
    /// Constant intensities, `b ≠ a + c`.
    Constant,
    /// Constant intensities with `b = a + c`.
    Confluent,
    /// `a = a0 + a1 t`, closed form through the error function.
    LinearAdoption,
    /// `b = b0 + b1 t`; the remaining Gaussian-type integral by quadrature.
    LinearQuitting,
    /// Any other schedules: the integrating-factor solution by quadrature.
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Case1Path {
    pub trajectory: Trajectory,
    pub method: Case1Method,
}

/// `e^{K² - bt} (erf(x) - erf(K))` with `x = K + qt`, written so that no
/// intermediate overflows. `full` is `(a0 + c) t + a1 t²/2`, which equals
/// `x² - K² + bt`.
fn scaled_erf_gap(k: f64, x: f64, bt: f64, full: f64) -> f64 {
    if k >= 0.0 {
        exp(-bt) * erfcx(k) - exp(-full) * erfcx(x)
    } else if x <= 0.0 {
        exp(-full) * erfcx(-x) - exp(-bt) * erfcx(-k)
    } else {
        exp(k * k - bt) * (erf(x) - erf(k))
    }
}

/// Case 1: `a(t)`, `b(t)`, `c(t)` independent of the state.
///
/// Constant intensities use `P = P0 e^{-bt} + a B0 e^{-bt} (1 - e^{-(a+c-b)t})/(a+c-b)`
/// (which becomes `a B0 t e^{-bt}` at confluence). A linear adoption rate
/// uses the error-function form
/// `P = B0 [(b - c) √(π/(2a1)) e^{K²-bt}(erf(K+qt) - erf K) + e^{-bt} - e^{-(a0+c)t - a1t²/2}]`
/// with `K = (a0 + c - b)/√(2a1)`, `q = √(a1/2)`. Everything else evaluates
/// `P(t) = e^{-∫b} [P0 + ∫_0^t a(u) B(u) e^{∫_0^u b} du]` by quadrature.
pub fn case1_closed_form(case: &BpqCase, grid: &[f64]) -> Result<Case1Path> {
    case.validate()?;
    check_grid(grid)?;
    let BpqKind::Case1 { a, b, c } = &case.kind else {
        return Err(Error::param("case", "expected case 1"));
    };
    let s = case.initial;
    let (b0, p0) = (s.buyers, s.players);
    use RateSchedule::{Constant, Linear};

    match (a, b, c) {
        (Constant { a }, Constant { a: b }, Constant { a: c }) => {
            let k = a + c;
            let method = if abs(k - b) <= 1e-12 * k { Case1Method::Confluent } else { Case1Method::Constant };
            let mut bs = Vec::with_capacity(grid.len());
            let mut ps = Vec::with_capacity(grid.len());
            let mut cs = Vec::with_capacity(grid.len());
            for &t in grid {
                bs.push(b0 * exp(-k * t));
                ps.push(exp(-b * t) * (p0 + a * b0 * relax(k - b, t)));
                cs.push(a * b0 * relax(k, t));
            }
            let trajectory = assemble(case, grid, &bs, &ps, &cs)?;
            Ok(Case1Path { trajectory, method })
        }
        (Linear { a0, a1 }, Constant { a: b }, Constant { a: c }) if *a1 > 0.0 => {
            let q = sqrt(0.5 * a1);
            let k = (a0 + c - b) / sqrt(2.0 * a1);
            let pref = (b - c) * sqrt(core::f64::consts::PI / (2.0 * a1));
            // ∫_0^t B = B0 √π/(2q) e^{K'²}(erf(K'+qt) - erf K'), K' = (a0+c)/(2q) ≥ 0.
            let kp = (a0 + c) / (2.0 * q);
            let half_sqrt_pi = 0.5 * sqrt(core::f64::consts::PI);
            let mut bs = Vec::with_capacity(grid.len());
            let mut ps = Vec::with_capacity(grid.len());
            let mut cs = Vec::with_capacity(grid.len());
            for &t in grid {
                let full = (a0 + c) * t + 0.5 * a1 * t * t;
                let gap = scaled_erf_gap(k, k + q * t, b * t, full);
                let bt = b0 * exp(-full);
                let p = p0 * exp(-b * t) + b0 * (pref * gap + exp(-b * t) - exp(-full));
                let int_b = b0 * half_sqrt_pi / q * (erfcx(kp) - exp(-full) * erfcx(kp + q * t));
                bs.push(bt);
                ps.push(p);
                cs.push((b0 - bt) - c * int_b);
            }
            let trajectory = assemble(case, grid, &bs, &ps, &cs)?;
            Ok(Case1Path { trajectory, method: Case1Method::LinearAdoption })
        }
        _ => {
            let method = match (a, b, c) {
                (Constant { .. }, Linear { a1, .. }, Constant { .. }) if *a1 > 0.0 => Case1Method::LinearQuitting,
                _ => Case1Method::General,
            };
            let trajectory = case1_by_quadrature(case, a, b, c, grid)?;
            Ok(Case1Path { trajectory, method })
        }
    }
}

fn case1_by_quadrature(
    case: &BpqCase,
    a: &RateSchedule,
    b: &RateSchedule,
    c: &RateSchedule,
    grid: &[f64],
) -> Result<Trajectory> {
    let s = case.initial;
    let ib = |t: f64| b.integral(t);
    let buyers = |t: f64| s.buyers * exp(-(a.integral(t) + c.integral(t)));
    let mut bs = Vec::with_capacity(grid.len());
    let mut ps = Vec::with_capacity(grid.len());
    let mut cs = Vec::with_capacity(grid.len());
    let (mut t_prev, mut p, mut bought) = (0.0, s.players, 0.0);
    for &t in grid {
        if t > t_prev {
            let ib_t = ib(t);
            let gain = quadrature(|u| a.rate(u) * buyers(u) * exp(ib(u) - ib_t), t_prev, t, QUAD_TOL)?;
            p = p * exp(ib(t_prev) - ib_t) + gain;
            bought += quadrature(|u| a.rate(u) * buyers(u), t_prev, t, QUAD_TOL)?;
            t_prev = t;
        }
        bs.push(buyers(t));
        ps.push(p);
        cs.push(bought);
    }
    assemble(case, grid, &bs, &ps, &cs)
}

/// Peak of the player count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakMetrics {
    /// Time of the maximum; zero when `P` only declines, infinite when it
    /// only grows.
    pub t_m: f64,
    pub p_m: f64,
    /// Everyone who ever buys, `C(∞)`.
    pub c_inf: f64,
}

/// Closed-form peak for constant case-1 intensities from a fresh market of `n`.
///
/// `T_m = (ln(a+c) - ln b)/(a+c-b)`, or `1/b` at confluence.
pub fn case1_peak(a: f64, b: f64, c: f64, n: f64) -> Result<PeakMetrics> {
    check_rate("a", a)?;
    check_rate("b", b)?;
    check_rate("c", c)?;
    check_positive("N", n)?;
    let k = a + c;
    if !(k > 0.0) {
        return Ok(PeakMetrics { t_m: 0.0, p_m: 0.0, c_inf: 0.0 });
    }
    let c_inf = a * n / k;
    if b == 0.0 {
        return Ok(PeakMetrics { t_m: f64::INFINITY, p_m: c_inf, c_inf });
    }
    let d = k - b;
    let t_m = if abs(d) <= 1e-12 * k { 1.0 / b } else { ln_1p(d / b) / d };
    let p_m = a * n * exp(-b * t_m) * relax(d, t_m);
    Ok(PeakMetrics { t_m, p_m, c_inf })
}

/// `a + c` from a target peak time and ratio `(a + c)/b`:
/// `a + c = r ln r / ((r - 1) T_m)`, tending to `1/T_m` as `r → 1`.
pub fn case1_rate_from_peak(t_m: f64, ratio: f64) -> Result<f64> {
    check_positive("T_m", t_m).map_err(|_| Error::CalibrationInfeasible("peak time must be positive"))?;
    check_positive("ratio", ratio).map_err(|_| Error::CalibrationInfeasible("ratio (a+c)/b must be positive"))?;
    let x = ratio - 1.0;
    let f = if abs(x) < 1e-8 { 1.0 - 0.5 * x } else { ln_1p(x) / x };
    Ok(ratio * f / t_m)
}

// ---------------------------------------------------------------------------
// Autonomous inversion shared by cases 2 and 4

/// `Q̇ = g(q_inf - Q)` with `g(w) > 0` for `0 < w ≤ q_inf - q0` and
/// `g(0) = 0`, solved by inverting `t(Q) = ∫_{q0}^{Q} du / g(q_inf - u)`.
///
/// The rate is passed as a function of the distance `w` to the rest point
/// so callers can write it without cancellation. The integral is taken in
/// `y = ln((u - q0 + v_s)/(q_inf - u))`, which keeps the integrand smooth
/// both at the rest point and at a tiny seed, where `1/g` is sharply peaked.
/// `v_s = g(q_inf - q0)/rate` is the distance over which the initial rate
/// doubles.
struct Inverter<'a, G: Fn(f64) -> f64> {
    g: &'a G,
    q0: f64,
    q_inf: f64,
    /// `q_inf - q0 + v_s`
    span: f64,
}

fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + exp(-y))
    } else {
        let e = exp(y);
        e / (1.0 + e)
    }
}

impl<'a, G: Fn(f64) -> f64> Inverter<'a, G> {
    fn new(g: &'a G, q0: f64, q_inf: f64, rate: f64) -> Result<Self> {
        let range = q_inf - q0;
        if !(range > 0.0) {
            return Err(Error::Domain { what: "rest point", value: q_inf });
        }
        let v_s = (g(range) / rate).clamp(1e-12 * range, range);
        Ok(Inverter { g, q0, q_inf, span: range + v_s })
    }

    fn y_of(&self, q: f64) -> f64 {
        let w = self.q_inf - q;
        ln((self.span - w) / w)
    }

    fn w_of(&self, y: f64) -> f64 {
        self.span * logistic(-y)
    }

    fn q_of(&self, y: f64) -> f64 {
        self.q_inf - self.w_of(y)
    }

    /// `dt/dy`
    fn h(&self, y: f64) -> f64 {
        let w = self.w_of(y);
        w * logistic(y) / (self.g)(w)
    }

    /// Beyond this `y` the rest point is reached to rounding.
    fn ceiling(&self) -> f64 {
        ln(self.span / (1e-17 * abs(self.q_inf).max(self.span)))
    }

    fn elapsed(&self, y_from: f64, y_to: f64) -> Result<f64> {
        if y_to <= y_from {
            return Ok(0.0);
        }
        quadrature(|y| self.h(y), y_from, y_to, QUAD_TOL)
    }

    fn time_of(&self, q: f64) -> Result<f64> {
        if q == self.q0 {
            return Ok(0.0);
        }
        if !(q > self.q0 && q < self.q_inf) {
            return Err(Error::Domain { what: "Q target", value: q });
        }
        self.elapsed(self.y_of(self.q0), self.y_of(q))
    }

    /// `y` reached `dt` after `y_a`, by Newton with the exact slope `h`
    /// inside a bracket.
    fn advance(&self, y_a: f64, dt: f64) -> Result<f64> {
        let top = self.ceiling();
        if y_a >= top {
            return Ok(y_a);
        }
        if self.elapsed(y_a, top)? <= dt {
            return Ok(top);
        }
        let (mut lo, mut hi) = (y_a, top);
        let mut y = y_a + dt / self.h(y_a);
        if !(y > lo && y < hi) {
            y = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let g = self.elapsed(y_a, y)? - dt;
            if g > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            if abs(g) <= 1e-13 * dt || hi - lo <= 1e-15 * abs(y).max(1.0) {
                break;
            }
            let next = y - g / self.h(y);
            y = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        Ok(y)
    }

    fn path(&self, grid: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(grid.len());
        let (mut ya, mut ta) = (self.y_of(self.q0), 0.0);
        for &t in grid {
            if t > ta {
                ya = self.advance(ya, t - ta)?;
                ta = t;
            }
            out.push(if t == 0.0 { self.q0 } else { self.q_of(ya) });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Case 2: SIR

/// First-integral relations of the SIR case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirRelations {
    pub n: f64,
    pub beta: f64,
    pub b: f64,
    pub b0: f64,
    pub q0: f64,
    /// `B(∞)`, root of `B = B0 exp(-(β/b)(N - Q0 - B))`.
    pub b_inf: f64,
    /// Everyone who ever plays, `N - Q0 - B(∞)`.
    pub total_players: f64,
    /// Interior peak; `None` when `β B0 ≤ b` and players only decline.
    pub peak: Option<SirPeak>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirPeak {
    /// `b/β`
    pub b_tm: f64,
    /// `Q0 + (b/β) ln(β B0 / b)`
    pub q_tm: f64,
    /// `N - Q0 - b/β - (b/β) ln(β B0 / b)`
    pub p_tm: f64,
    pub t_m: f64,
}

impl SirRelations {
    /// `B = B0 exp(-(β/b)(Q - Q0))`.
    pub fn b_of_q(&self, q: f64) -> f64 {
        self.b0 * exp(-(self.beta / self.b) * (q - self.q0))
    }

    /// `P = N - Q0 - B + (b/β) ln(B/B0)`.
    pub fn p_of_b(&self, b: f64) -> f64 {
        self.n - self.q0 - b + (self.b / self.beta) * ln(b / self.b0)
    }

    /// `Q(∞) = N - B(∞)`.
    pub fn q_inf(&self) -> f64 {
        self.n - self.b_inf
    }

    /// `Q̇ = b (N - Q - B(Q))`.
    pub fn q_rate(&self, q: f64) -> f64 {
        self.b * (self.n - q - self.b_of_q(q))
    }

    /// `Q̇` at distance `w` below `Q(∞)`: `b (w - B(∞)(e^{βw/b} - 1))`.
    fn rate_below_rest(&self, w: f64) -> f64 {
        self.b * (w - self.b_inf * expm1(self.beta / self.b * w))
    }

    /// Time at which `Q` reaches `q`.
    pub fn time_of(&self, q: f64) -> Result<f64> {
        let g = |w: f64| self.rate_below_rest(w);
        Inverter::new(&g, self.q0, self.q_inf(), self.beta * self.n + self.b)?.time_of(q)
    }
}

fn sir_params(case: &BpqCase) -> Result<(f64, f64)> {
    match case.kind {
        BpqKind::Case2 { beta, b } => Ok((beta, b)),
        _ => Err(Error::param("case", "expected case 2")),
    }
}

/// Closed relations of the SIR case: `B(Q)`, `P(B)`, `B(∞)` and the peak.
pub fn sir_relations(case: &BpqCase) -> Result<SirRelations> {
    let mut rel = sir_core(case)?;
    if rel.beta * rel.b0 > rel.b {
        let l = ln(rel.beta * rel.b0 / rel.b);
        let kappa = rel.b / rel.beta;
        let q_tm = rel.q0 + kappa * l;
        let t_m = rel.time_of(q_tm)?;
        rel.peak = Some(SirPeak { b_tm: kappa, q_tm, p_tm: rel.n - rel.q0 - kappa - kappa * l, t_m });
    }
    Ok(rel)
}

fn sir_core(case: &BpqCase) -> Result<SirRelations> {
    case.validate()?;
    let (beta, b) = sir_params(case)?;
    let s = case.initial;
    let n = s.total();
    let kappa = beta / b;
    let (b0, q0) = (s.buyers, s.quitters);
    let b_inf = if b0 == 0.0 {
        0.0
    } else {
        let g = |x: f64| x - b0 * exp(-kappa * (n - q0 - x));
        let hi = b0.min(b / beta);
        solve_root(g, 0.0, hi, ROOT_TOL * hi.max(1.0))?
    };
    Ok(SirRelations { n, beta, b, b0, q0, b_inf, total_players: n - q0 - b_inf, peak: None })
}

/// `t = (1/b) ∫_{Q0}^{Q} du / (N - u - B0 e^{-β(u - Q0)/b})`.
pub fn sir_time_of(case: &BpqCase, q_target: f64) -> Result<f64> {
    sir_core(case)?.time_of(q_target)
}

fn sir_path(case: &BpqCase, grid: &[f64]) -> Result<Trajectory> {
    let rel = sir_relations(case)?;
    let g = |w: f64| rel.rate_below_rest(w);
    let qs = Inverter::new(&g, rel.q0, rel.q_inf(), rel.beta * rel.n + rel.b)?.path(grid)?;
    let bs: Vec<f64> = qs.iter().map(|&q| rel.b_of_q(q)).collect();
    let ps: Vec<f64> = qs.iter().zip(&bs).map(|(&q, &b)| rel.n - b - q).collect();
    let cs: Vec<f64> = bs.iter().map(|&b| rel.b0 - b).collect();
    assemble(case, grid, &bs, &ps, &cs)
}

/// `(β, b)` reproducing a peak of `p_m` players at `t_m` from `p0` seed
/// players in a population of `n` (no initial quitters).
///
/// `κ = b/β` solves `P_m = N - κ - κ ln(B0/κ)`; then
/// `b = (1/T_m) ∫_0^{Q(T_m)} du/(N - u - B0 e^{-u/κ})`.
pub fn sir_calibrate(n: f64, p0: f64, t_m: f64, p_m: f64) -> Result<(f64, f64)> {
    if !(n > 0.0 && p0 > 0.0 && p0 < n) {
        return Err(Error::CalibrationInfeasible("need 0 < P0 < N"));
    }
    if !(t_m > 0.0) {
        return Err(Error::CalibrationInfeasible("peak time must be positive"));
    }
    if !(p_m > p0 && p_m < n) {
        return Err(Error::CalibrationInfeasible("peak must lie between P0 and N"));
    }
    let b0 = n - p0;
    let h = |k: f64| n - k - k * ln(b0 / k) - p_m;
    let kappa = solve_root(h, b0 * 1e-300_f64.max(f64::MIN_POSITIVE), b0, ROOT_TOL * b0)
        .map_err(|_| Error::CalibrationInfeasible("no b/β reproduces the peak"))?;
    let q_tm = kappa * ln(b0 / kappa);
    let j = quadrature(|u| 1.0 / (n - u - b0 * exp(-u / kappa)), 0.0, q_tm, QUAD_TOL)?;
    let b = j / t_m;
    Ok((b / kappa, b))
}

// ---------------------------------------------------------------------------
// Case 3

/// Case 3 (`a + βP` adoption, constant quitting) by RK4 on `(B, P)`.
pub fn case3_path(case: &BpqCase, grid: &[f64]) -> Result<Trajectory> {
    case.validate()?;
    check_grid(grid)?;
    if !matches!(case.kind, BpqKind::Case3 { .. }) {
        return Err(Error::param("case", "expected case 3"));
    }
    two_group_rk4(case, grid)
}

/// RK4 on `B, P` with `Q = N - B - P`; `C = B0 - B` since `c = 0`.
fn two_group_rk4(case: &BpqCase, grid: &[f64]) -> Result<Trajectory> {
    let n = case.n();
    let field = FnField::new(2, |t, y: &[f64], dy: &mut [f64]| {
        let q = n - y[0] - y[1];
        let a = case.adoption(t, y[1]);
        dy[0] = -a * y[0];
        dy[1] = a * y[0] - case.quitting(t, q) * y[1];
    });
    let h = 1e-3 / case.rate_scale(grid[grid.len() - 1]);
    let s = case.initial;
    let raw = rk4_from_origin(&field, &[s.buyers, s.players], grid, h)?;
    let bs = raw.column(0);
    let ps = raw.column(1);
    let cs: Vec<f64> = bs.iter().map(|&b| s.buyers - b).collect();
    assemble(case, grid, &bs, &ps, &cs)
}

/// `P(T_m) = a B(T_m) / (b - β B(T_m))` at a case-3 peak.
pub fn case3_peak_players(a: f64, beta: f64, b: f64, b_tm: f64) -> f64 {
    a * b_tm / (b - beta * b_tm)
}

// ---------------------------------------------------------------------------
// Case 4

/// First integral of case 4: `B = B0 (Q0/Q)^{β/γ}` and
/// `Q̇ = γ Q [N - B(Q) - Q]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case4Relations {
    pub n: f64,
    pub beta: f64,
    pub gamma: f64,
    pub b0: f64,
    pub q0: f64,
    /// Rest point where `P = 0`.
    pub q_inf: f64,
}

impl Case4Relations {
    pub fn new(case: &BpqCase) -> Result<Self> {
        case.validate()?;
        let BpqKind::Case4 { beta, gamma } = case.kind else {
            return Err(Error::param("case", "expected case 4"));
        };
        let s = case.initial;
        let n = s.total();
        let mut rel = Case4Relations { n, beta, gamma, b0: s.buyers, q0: s.quitters, q_inf: n };
        if s.buyers > 0.0 {
            let h = |q: f64| rel.n - rel.b_of_q(q) - q;
            rel.q_inf = solve_root(h, s.quitters, n, ROOT_TOL * n)?;
        }
        Ok(rel)
    }

    pub fn b_of_q(&self, q: f64) -> f64 {
        self.b0 * crate::math::powf(self.q0 / q, self.beta / self.gamma)
    }

    pub fn q_rate(&self, q: f64) -> f64 {
        self.gamma * q * (self.n - self.b_of_q(q) - q)
    }

    /// `Q̇` at distance `w` below `Q(∞)`, with `B(Q) = B(∞)(Q(∞)/Q)^{β/γ}`.
    fn rate_below_rest(&self, w: f64) -> f64 {
        let b_inf = self.n - self.q_inf;
        let r = self.beta / self.gamma;
        let q = self.q_inf - w;
        self.gamma * q * (w - b_inf * expm1(-r * ln_1p(-w / self.q_inf)))
    }

    /// `t = ∫_{Q0}^{Q} du / (γ u [N - B0 (Q0/u)^{β/γ} - u])`.
    pub fn time_of(&self, q: f64) -> Result<f64> {
        let g = |w: f64| self.rate_below_rest(w);
        Inverter::new(&g, self.q0, self.q_inf, (self.beta + self.gamma) * self.n)?.time_of(q)
    }

    /// `Q(T_m) = [β B0 Q0^{β/γ}/γ]^{γ/(β+γ)}` and
    /// `P(T_m) = N - (1 + γ/β) Q(T_m)`; `None` if players only decline.
    pub fn peak(&self) -> Result<Option<(f64, f64, f64)>> {
        let r = self.beta / self.gamma;
        // Evaluated in logs: Q0^{β/γ} overflows for large exponents.
        let q_tm = exp((ln(self.beta * self.b0 / self.gamma) + r * ln(self.q0)) / (1.0 + r));
        if !(q_tm > self.q0) {
            return Ok(None);
        }
        let p_tm = self.n - (1.0 + self.gamma / self.beta) * q_tm;
        Ok(Some((self.time_of(q_tm)?, q_tm, p_tm)))
    }
}

/// Case 4 by inverting `t(Q)` along the grid.
pub fn case4_path(case: &BpqCase, grid: &[f64]) -> Result<Trajectory> {
    check_grid(grid)?;
    let rel = Case4Relations::new(case)?;
    let g = |w: f64| rel.rate_below_rest(w);
    let qs = Inverter::new(&g, rel.q0, rel.q_inf, (rel.beta + rel.gamma) * rel.n)?.path(grid)?;
    let bs: Vec<f64> = qs.iter().map(|&q| rel.b_of_q(q)).collect();
    let ps: Vec<f64> = qs.iter().zip(&bs).map(|(&q, &b)| rel.n - b - q).collect();
    let cs: Vec<f64> = bs.iter().map(|&b| rel.b0 - b).collect();
    assemble(case, grid, &bs, &ps, &cs)
}

// ---------------------------------------------------------------------------
// Case 5

/// Case 5 through the Riccati transform.
///
/// `P = N - B0 e^{-at} - 1/w` with `ẇ = -γ(N - B0 e^{-at}) w + γ` and
/// `w(0) = 1/Q0`; so `w = 1/Q` exactly. `w` is advanced interval by
/// interval with its integrating factor and the source integral by
/// quadrature.
pub fn case5_path(case: &BpqCase, grid: &[f64]) -> Result<Trajectory> {
    case.validate()?;
    check_grid(grid)?;
    let BpqKind::Case5 { a, gamma } = case.kind else {
        return Err(Error::param("case", "expected case 5"));
    };
    let s = case.initial;
    let n = s.total();
    let b0 = s.buyers;
    // ∫_x^y γ (N - B0 e^{-au}) du
    let phi = |x: f64, y: f64| gamma * (n * (y - x) - b0 * exp(-a * x) * relax(a, y - x));
    let mut w = 1.0 / s.quitters;
    let mut t_prev = 0.0;
    let mut bs = Vec::with_capacity(grid.len());
    let mut ps = Vec::with_capacity(grid.len());
    let mut cs = Vec::with_capacity(grid.len());
    for &t in grid {
        if t > t_prev {
            let source = quadrature(|x| exp(-phi(x, t)), t_prev, t, QUAD_TOL)?;
            w = w * exp(-phi(t_prev, t)) + gamma * source;
            t_prev = t;
        }
        let b = b0 * exp(-a * t);
        bs.push(b);
        ps.push(n - b - 1.0 / w);
        cs.push(b0 - b);
    }
    assemble(case, grid, &bs, &ps, &cs)
}

/// Both roots of `γ P² - γ (N - B) P + a B = 0`, the case-5 peak condition
/// at a given `B(T_m)`; `(larger, smaller)`.
pub fn case5_peak_roots(a: f64, gamma: f64, n: f64, b_tm: f64) -> Option<(f64, f64)> {
    let m = n - b_tm;
    let disc = m * m - 4.0 * a / gamma * b_tm;
    if disc < 0.0 {
        return None;
    }
    let big = 0.5 * (m + sqrt(disc));
    let small = if big > 0.0 { a * b_tm / (gamma * big) } else { 0.0 };
    Some((big, small))
}

// ---------------------------------------------------------------------------
// Case 6

/// Case 6 by RK4 on the single Riccati equation
/// `Ṗ = a B0 e^{-at} - (b + γ(N - B0 e^{-at} - P)) P`.
pub fn case6_path(case: &BpqCase, grid: &[f64]) -> Result<Trajectory> {
    case.validate()?;
    check_grid(grid)?;
    let BpqKind::Case6 { a, b, gamma } = case.kind else {
        return Err(Error::param("case", "expected case 6"));
    };
    let s = case.initial;
    let n = s.total();
    let b0 = s.buyers;
    let field = FnField::new(1, |t, y: &[f64], dy: &mut [f64]| {
        let bt = b0 * exp(-a * t);
        dy[0] = a * bt - (b + gamma * (n - bt - y[0])) * y[0];
    });
    let h = 1e-3 / case.rate_scale(grid[grid.len() - 1]);
    let raw = rk4_from_origin(&field, &[s.players], grid, h)?;
    let ps = raw.column(0);
    let bs: Vec<f64> = grid.iter().map(|&t| b0 * exp(-a * t)).collect();
    let cs: Vec<f64> = bs.iter().map(|&x| b0 - x).collect();
    assemble(case, grid, &bs, &ps, &cs)
}

// ---------------------------------------------------------------------------
// Peaks for any case

/// State of the lifecycle at a single time.
pub fn bpq_state(case: &BpqCase, t: f64) -> Result<BpqState> {
    let tr = bpq_path(case, &[t])?;
    let row = &tr.states()[0];
    Ok(BpqState { buyers: row[0], players: row[1], quitters: row[2] })
}

/// Peak of `P` over `[0, horizon]`: grid argmax on 2001 points, refined by
/// solving `Ṗ = 0` between the neighbouring samples.
pub fn peak_metrics(case: &BpqCase, horizon: f64) -> Result<PeakMetrics> {
    check_positive("horizon", horizon)?;
    let grid = TimeGrid::uniform(0.0, horizon, 2001)?.into_inner();
    let tr = bpq_path(case, &grid)?;
    let ps = tr.column(1);
    let k = (0..ps.len()).fold(0, |best, i| if ps[i] > ps[best] { i } else { best });
    let c_inf = total_buyers(case)?;
    if k == 0 {
        return Ok(PeakMetrics { t_m: 0.0, p_m: ps[0], c_inf });
    }
    if k == ps.len() - 1 {
        return Ok(PeakMetrics { t_m: grid[k], p_m: ps[k], c_inf });
    }
    let rate = |t: f64| bpq_state(case, t).map(|s| case.player_rate(t, &s)).unwrap_or(f64::NAN);
    let (lo, hi) = (grid[k - 1], grid[k + 1]);
    let t_m = match solve_root(rate, lo, hi, 1e-12 * horizon) {
        Ok(t) => t,
        Err(Error::BracketInvalid { .. }) => grid[k],
        Err(e) => return Err(e),
    };
    let p_m = bpq_state(case, t_m)?.players.max(ps[k]);
    Ok(PeakMetrics { t_m, p_m, c_inf })
}

/// `C(∞)`: everyone who ever buys.
pub fn total_buyers(case: &BpqCase) -> Result<f64> {
    case.validate()?;
    let s = case.initial;
    match &case.kind {
        BpqKind::Case1 { a, c, .. } => {
            if let (RateSchedule::Constant { a }, RateSchedule::Constant { a: c }) = (a, c) {
                let k = a + c;
                return Ok(if k > 0.0 { a * s.buyers / k } else { 0.0 });
            }
            // Integrate a·B until B has decayed or stopped changing.
            let buyers = |t: f64| s.buyers * exp(-(a.integral(t) + c.integral(t)));
            let (mut t0, mut t1, mut total) = (0.0, 1.0, 0.0);
            for _ in 0..64 {
                let piece = quadrature(|u| a.rate(u) * buyers(u), t0, t1, QUAD_TOL)?;
                total += piece;
                if buyers(t1) < 1e-16 * s.buyers || abs(piece) <= 1e-15 * abs(total).max(f64::MIN_POSITIVE) {
                    break;
                }
                t0 = t1;
                t1 *= 2.0;
            }
            Ok(total)
        }
        BpqKind::Case2 { .. } => Ok(s.buyers - sir_relations(case)?.b_inf),
        BpqKind::Case4 { .. } => {
            let rel = Case4Relations::new(case)?;
            Ok(s.buyers - rel.b_of_q(rel.q_inf))
        }
        BpqKind::Case3 { a, beta, .. } => {
            if *a > 0.0 {
                Ok(s.buyers)
            } else if *beta == 0.0 || s.players == 0.0 {
                Ok(0.0)
            } else {
                // a = 0 reduces to SIR.
                let BpqKind::Case3 { beta, b, .. } = case.kind else { unreachable!() };
                if b == 0.0 {
                    return Ok(s.buyers);
                }
                let sir = BpqCase { kind: BpqKind::Case2 { beta, b }, initial: s };
                Ok(s.buyers - sir_relations(&sir)?.b_inf)
            }
        }
        BpqKind::Case5 { a, .. } | BpqKind::Case6 { a, .. } => Ok(if *a > 0.0 { s.buyers } else { 0.0 }),
    }
}

// ---------------------------------------------------------------------------
// Complementary games

/// Game 1 adopts in proportion to the players of an earlier complementary
/// game 2: `Ḃ = -g B P_c`. Game 2 is a constant-intensity case-1 game
/// launched at `t = -τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementarySpec {
    pub g: f64,
    /// Quit rate of game 1.
    pub b: f64,
    pub a_c: f64,
    pub b_c: f64,
    /// Lead time of game 2; negative when it launches after game 1.
    pub tau: f64,
    pub n: f64,
    /// Population of game 2; `None` means `n`.
    pub n_c: Option<f64>,
}

impl ComplementarySpec {
    pub fn validate(&self) -> Result<()> {
        check_rate("g", self.g)?;
        check_rate("b", self.b)?;
        check_positive("a_c", self.a_c)?;
        check_positive("b_c", self.b_c)?;
        check_positive("N", self.n)?;
        if let Some(nc) = self.n_c {
            check_positive("N_c", nc)?;
        }
        if !self.tau.is_finite() {
            return Err(Error::param("tau", "lead time must be finite"));
        }
        Ok(())
    }

    pub fn game2_population(&self) -> f64 {
        self.n_c.unwrap_or(self.n)
    }

    /// Game 2 `(B_c, P_c, Q_c)` at `s` time units after its launch.
    pub fn game2(&self, s: f64) -> (f64, f64, f64) {
        let nc = self.game2_population();
        if s <= 0.0 {
            return (nc, 0.0, 0.0);
        }
        let bc = nc * exp(-self.a_c * s);
        let pc = nc * self.a_c * exp(-self.a_c * s) * relax(self.b_c - self.a_c, s);
        (bc, pc, -nc * expm1(-self.a_c * s) - pc)
    }

    /// `∫_0^s P_c = Q_c(s)/b_c`.
    fn game2_integral(&self, s: f64) -> f64 {
        self.game2(s).2 / self.b_c
    }

    /// `A(t) - A(0) = g ∫_0^t P_c(u + τ) du`.
    pub fn exposure(&self, t: f64) -> f64 {
        self.g * (self.game2_integral(t + self.tau) - self.game2_integral(self.tau))
    }
}

/// Both games on `grid`: channels `B, P, Q, D, C, Bc, Pc, Qc`.
///
/// `B = N e^{-(A(t) - A(0))}` and
/// `P = N (e^{-bt} - e^{-(A(t)-A(0))}) + N b ∫_0^t e^{-(A(u)-A(0)) - b(t-u)} du`.
pub fn complementary_path(spec: &ComplementarySpec, grid: &[f64]) -> Result<Trajectory> {
    spec.validate()?;
    check_grid(grid)?;
    let n = spec.n;
    let b = spec.b;
    let labels = ["B", "P", "Q", "D", "C", "Bc", "Pc", "Qc"];
    let mut tr = Trajectory::with_capacity(&labels, grid.len());
    let (mut t_prev, mut tail) = (0.0, 0.0);
    for &t in grid {
        if t > t_prev {
            let piece = quadrature(|u| exp(-spec.exposure(u) - b * (t - u)), t_prev, t, QUAD_TOL)?;
            tail = tail * exp(-b * (t - t_prev)) + piece;
            t_prev = t;
        }
        let e = exp(-spec.exposure(t));
        let buyers = n * e;
        let players = n * (exp(-b * t) - e) + n * b * tail;
        let (bc, pc, qc) = spec.game2(t + spec.tau);
        let d = spec.g * pc * buyers;
        tr.push(t, vec![buyers, players, n - buyers - players, d, n - buyers, bc, pc, qc])?;
    }
    Ok(tr)
}

/// RK4 on the six-equation system; channels `B, P, Q, Bc, Pc, Qc`.
///
/// A late launch of game 2 (`τ < 0`) restarts the integration at `t = -τ`
/// so no step straddles the switch.
pub fn complementary_path_numeric(spec: &ComplementarySpec, grid: &[f64], max_step: f64) -> Result<Trajectory> {
    spec.validate()?;
    check_grid(grid)?;
    let field = |ac: f64| {
        FnField::new(6, move |_t, y: &[f64], dy: &mut [f64]| {
            let adopt = spec.g * y[4] * y[0];
            dy[0] = -adopt;
            dy[1] = adopt - spec.b * y[1];
            dy[2] = spec.b * y[1];
            dy[3] = -ac * y[3];
            dy[4] = ac * y[3] - spec.b_c * y[4];
            dy[5] = spec.b_c * y[4];
        })
    };
    let labels = ["B", "P", "Q", "Bc", "Pc", "Qc"];
    let (bc, pc, qc) = spec.game2(spec.tau);
    let y0 = [spec.n, 0.0, 0.0, bc, pc, qc];
    let launch = -spec.tau;
    if !(launch > 0.0 && launch < grid[grid.len() - 1]) {
        let ac = if launch > 0.0 { 0.0 } else { spec.a_c };
        return rk4_from_origin(&field(ac), &y0, grid, max_step)?.relabel(&labels);
    }
    let split = grid.partition_point(|&t| t <= launch);
    let mut before: Vec<f64> = grid[..split].to_vec();
    if before.last() != Some(&launch) {
        before.push(launch);
    }
    let first = rk4_from_origin(&field(0.0), &y0, &before, max_step)?;
    let at_launch = first.last_state().ok_or(Error::InvalidTrajectory("empty segment"))?.to_vec();
    let mut after = vec![launch];
    after.extend_from_slice(&grid[split..]);
    let second = integrate_on_grid(&field(spec.a_c), &at_launch, &TimeGrid::new(after)?, max_step)?;
    let mut out = Trajectory::with_capacity(&labels, grid.len());
    for (t, row) in first.times().iter().zip(first.states()).take(split) {
        out.push(*t, row.clone())?;
    }
    for (t, row) in second.times().iter().zip(second.states()).skip(1) {
        out.push(*t, row.clone())?;
    }
    Ok(out)
}

/// Replaces `g P_c` by the constant `g P_c0`: a case-3 game with
/// `a = g P_c0`, imitation `β` and the first game's quit rate, from a fresh market.
pub fn complementary_constant_approx(spec: &ComplementarySpec, p_c0: f64, beta: f64) -> Result<BpqCase> {
    spec.validate()?;
    check_rate("P_c0", p_c0)?;
    BpqCase::new(BpqKind::Case3 { a: spec.g * p_c0, beta, b: spec.b }, BpqState::fresh(spec.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(t1: f64, n: usize) -> Vec<f64> {
        TimeGrid::uniform(0.0, t1, n).unwrap().into_inner()
    }

    fn constant(a: f64) -> RateSchedule {
        RateSchedule::Constant { a }
    }

    fn case1(a: RateSchedule, b: RateSchedule, c: RateSchedule, n: f64) -> BpqCase {
        BpqCase::new(BpqKind::Case1 { a, b, c }, BpqState::fresh(n)).unwrap()
    }

    fn max_gap(x: &Trajectory, y: &Trajectory, channels: &[usize]) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, s) in x.states().iter().zip(y.states()) {
            for &c in channels {
                worst = worst.max((r[c] - s[c]).abs());
            }
        }
        worst
    }

    #[test]
    fn case1_constants_against_rk4() {
        let c = case1(constant(0.8), constant(0.5), constant(0.1), 1000.0);
        let g = grid(25.0, 251);
        let path = case1_closed_form(&c, &g).unwrap();
        assert_eq!(path.method, Case1Method::Constant);
        assert_eq!(path.trajectory.states()[0][..3], [1000.0, 0.0, 0.0]);
        let rk = bpq_path_numeric(&c, &g, None).unwrap();
        assert!(max_gap(&path.trajectory, &rk, &[0, 1, 2]) < 1e-9 * 1000.0);
        let last = path.trajectory.last_state().unwrap();
        assert!((last[4] - 0.8 * 1000.0 / 0.9).abs() < 1e-6);
    }

    #[test]
    fn case1_printed_q_and_small_t() {
        let (a, b, c, n) = (0.7f64, 0.3f64, 0.2f64, 500.0f64);
        let cs = case1(constant(a), constant(b), constant(c), n);
        let g = grid(10.0, 101);
        let tr = bpq_path(&cs, &g).unwrap();
        let k = a + c - b;
        for (t, row) in tr.times().iter().zip(tr.states()) {
            let q = n / k * (k - a * (-b * t).exp() + (b - c) * (-(a + c) * t).exp());
            assert!((row[2] - q).abs() < 1e-10 * n);
        }
        let t = 1e-3;
        let p = bpq_state(&cs, t).unwrap().players;
        let approx = a * n * t * (1.0 - (a + b + c) * t / 2.0);
        assert!((p - approx).abs() < 1e-6 * p, "{p} {approx}");
    }

    #[test]
    fn case1_confluent() {
        let (a, b, n) = (0.4, 0.6, 100.0);
        let c = case1(constant(a), constant(b), constant(0.2), n);
        let path = case1_closed_form(&c, &grid(10.0, 11)).unwrap();
        assert_eq!(path.method, Case1Method::Confluent);
        for (t, row) in path.trajectory.times().iter().zip(path.trajectory.states()) {
            assert!((row[1] - n * a * t * (-b * t).exp()).abs() < 1e-12 * n);
        }
        let pk = case1_peak(a, b, 0.2, n).unwrap();
        assert!((pk.t_m - 1.0 / b).abs() < 1e-15);
        assert!((pk.p_m - n * a / b * (-1.0f64).exp()).abs() < 1e-12 * n);
        // Continuity through the confluent point.
        let near = case1_peak(a, b * (1.0 + 1e-9), 0.2, n).unwrap();
        assert!((near.t_m - 1.0 / b).abs() < 1e-8);
    }

    #[test]
    fn case1_peak_matches_grid() {
        let pk = case1_peak(1.0, 0.5, 0.0, 1000.0).unwrap();
        assert!((pk.t_m - 2.0f64.ln() / 0.5).abs() < 1e-14);
        let c = case1(constant(1.0), constant(0.5), constant(0.0), 1000.0);
        let g = grid(10.0, 10001);
        let tr = bpq_path(&c, &g).unwrap();
        let ps = tr.column(1);
        let k = (0..ps.len()).fold(0, |b, i| if ps[i] > ps[b] { i } else { b });
        assert!((g[k] - pk.t_m).abs() <= 1e-3);
        assert!((ps[k] - pk.p_m).abs() < 1e-4);
        let m = peak_metrics(&c, 10.0).unwrap();
        assert!((m.t_m - pk.t_m).abs() < 1e-9);
        assert!((m.p_m - pk.p_m).abs() < 1e-9);
    }

    #[test]
    fn case1_calibration() {
        let k = case1_rate_from_peak(1.0, 2.0).unwrap();
        assert!((k - 4.0f64.ln()).abs() < 1e-15);
        let near = case1_rate_from_peak(1.0, 1.0 + 1e-10).unwrap();
        assert!((near - 1.0).abs() < 1e-9);
        // Round trip through the peak formula.
        let pk = case1_peak(k, k / 2.0, 0.0, 1.0).unwrap();
        assert!((pk.t_m - 1.0).abs() < 1e-14);
    }

    #[test]
    fn case1_linear_adoption_against_rk4() {
        let c = case1(RateSchedule::Linear { a0: 0.5, a1: 0.2 }, constant(1.0), constant(0.0), 1000.0);
        let g = grid(20.0, 401);
        let path = case1_closed_form(&c, &g).unwrap();
        assert_eq!(path.method, Case1Method::LinearAdoption);
        let rk = bpq_path_numeric(&c, &g, None).unwrap();
        assert!(max_gap(&path.trajectory, &rk, &[0, 1, 2]) <= 1e-6 * 1000.0);
    }

    #[test]
    fn case1_linear_adoption_all_erf_branches() {
        // K < 0 and K + qt crossing zero, plus a never-buy rate.
        for (a0, a1, b, c) in [(0.1, 0.05, 2.0, 0.0), (0.2, 0.5, 0.3, 0.4), (1.0, 3.0, 8.0, 0.5)] {
            let cs = case1(RateSchedule::Linear { a0, a1 }, constant(b), constant(c), 1.0);
            let g = grid(15.0, 301);
            let path = case1_closed_form(&cs, &g).unwrap();
            let rk = bpq_path_numeric(&cs, &g, None).unwrap();
            assert!(max_gap(&path.trajectory, &rk, &[0, 1, 2]) <= 1e-9, "{a0} {a1} {b} {c}");
            // Bought count against direct quadrature of a·B.
            let t_end = 15.0;
            let direct = quadrature(|u| (a0 + a1 * u) * (-(a0 + c) * u - 0.5 * a1 * u * u).exp(), 0.0, t_end, 1e-13).unwrap();
            assert!((path.trajectory.last_state().unwrap()[4] - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn printed_linear_adoption_bracket_is_wrong() {
        // The printed bracket -2q[e^{-K²} - e^{-(K+qt)²}] misses P(0)' = a0.
        let (a0, a1, b, c) = (0.5f64, 0.2f64, 1.0f64, 0.0f64);
        let q = (a1 / 2.0).sqrt();
        let k = (a0 + c - b) / (2.0 * a1).sqrt();
        let printed = |t: f64| {
            (-b * t + k * k).exp()
                * ((core::f64::consts::PI / (2.0 * a1)).sqrt() * (a0 - 2.0 * q * k) * (erf(k + q * t) - erf(k))
                    - 2.0 * q * ((-k * k).exp() - (-(k + q * t).powi(2)).exp()))
        };
        let h = 1e-6;
        assert!((printed(h) / h - a0).abs() > 0.1);
        let cs = case1(RateSchedule::Linear { a0, a1 }, constant(b), constant(c), 1.0);
        let p = bpq_state(&cs, h).unwrap().players;
        assert!((p / h - a0).abs() < 1e-5);
    }

    #[test]
    fn case1_linear_quitting_against_rk4() {
        let c = case1(constant(0.6), RateSchedule::Linear { a0: 0.2, a1: 0.3 }, constant(0.1), 1000.0);
        let g = grid(20.0, 201);
        let path = case1_closed_form(&c, &g).unwrap();
        assert_eq!(path.method, Case1Method::LinearQuitting);
        let rk = bpq_path_numeric(&c, &g, None).unwrap();
        assert!(max_gap(&path.trajectory, &rk, &[0, 1, 2]) <= 1e-6 * 1000.0);
        // The Gaussian form with G = (a + c - b0)/√(2 b1) and prefactor 1/r.
        let (a, c_, b0, b1, n) = (0.6f64, 0.1f64, 0.2f64, 0.3f64, 1000.0f64);
        let r = (b1 / 2.0).sqrt();
        let gg = (a + c_ - b0) / (2.0 * b1).sqrt();
        for &t in &[0.5, 2.0, 7.0] {
            let inner = quadrature(|v| (v * v - gg * gg).exp(), -gg, r * t - gg, 1e-13).unwrap();
            let p = n * a / r * (-(b0 * t + 0.5 * b1 * t * t)).exp() * inner;
            let ours = bpq_state(&c, t).unwrap().players;
            assert!((p - ours).abs() < 1e-9 * n, "{p} {ours}");
        }
    }

    #[test]
    fn case1_general_schedules() {
        let c = case1(
            RateSchedule::ExpDecay { a0: 0.9, beta: 0.3 },
            RateSchedule::Tabulated { points: vec![(0.0, 0.2), (3.0, 0.6), (8.0, 0.4)] },
            RateSchedule::Cutoff { a: 0.05, t_end: 4.0 },
            1000.0,
        );
        let g = grid(15.0, 151);
        let path = case1_closed_form(&c, &g).unwrap();
        assert_eq!(path.method, Case1Method::General);
        let rk = bpq_path_numeric(&c, &g, Some(1e-4)).unwrap();
        assert!(max_gap(&path.trajectory, &rk, &[0, 1, 2]) <= 1e-6 * 1000.0);
        let c_inf = total_buyers(&c).unwrap();
        assert!(c_inf > path.trajectory.last_state().unwrap()[4]);
        assert!(c_inf < 1000.0);
    }

    fn sir_case() -> BpqCase {
        BpqCase::new(BpqKind::Case2 { beta: 0.002, b: 0.5 }, BpqState::new(990.0, 10.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn sir_needs_seed_players() {
        let r = BpqCase::new(BpqKind::Case2 { beta: 0.002, b: 0.5 }, BpqState::fresh(1000.0));
        assert!(matches!(r, Err(Error::Initiation(_))));
    }

    #[test]
    fn sir_relations_hold() {
        let c = sir_case();
        let rel = sir_relations(&c).unwrap();
        assert_eq!(rel.b_of_q(0.0), 990.0);
        let pk = rel.peak.unwrap();
        assert_eq!(pk.b_tm, 250.0);
        let rk = bpq_path_numeric(&c, &[100.0], None).unwrap();
        assert!((rk.states()[0][0] - rel.b_inf).abs() < 1e-4 * 1000.0);
        // Relations along an RK4 run.
        let g = grid(40.0, 81);
        let rk = bpq_path_numeric(&c, &g, None).unwrap();
        for row in rk.states() {
            assert!((rel.b_of_q(row[2]) - row[0]).abs() < 1e-8);
            assert!((rel.p_of_b(row[0]) - row[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn sir_path_against_rk4_and_peak() {
        let c = sir_case();
        let g = grid(40.0, 4001);
        let tr = bpq_path(&c, &g).unwrap();
        let rk = bpq_path_numeric(&c, &g, None).unwrap();
        assert!(max_gap(&tr, &rk, &[0, 1, 2]) <= 1e-6 * 1000.0);
        let rel = sir_relations(&c).unwrap();
        let pk = rel.peak.unwrap();
        let ps = rk.column(1);
        let k = (0..ps.len()).fold(0, |b, i| if ps[i] > ps[b] { i } else { b });
        assert!((g[k] - pk.t_m).abs() <= g[1]);
        assert!((ps[k] - pk.p_tm).abs() < 1e-5 * 1000.0 + 1e-2, "{} {}", ps[k], pk.p_tm);
        let t = sir_time_of(&c, 100.0).unwrap();
        let t2 = sir_time_of(&c, 200.0).unwrap();
        assert!(t2 > t && t > 0.0);
        assert_eq!(sir_time_of(&c, 0.0).unwrap(), 0.0);
        assert!(sir_time_of(&c, 999.0).is_err());
    }

    #[test]
    fn sir_without_outbreak_declines() {
        let c = BpqCase::new(BpqKind::Case2 { beta: 0.0004, b: 0.5 }, BpqState::new(990.0, 10.0, 0.0).unwrap()).unwrap();
        let rel = sir_relations(&c).unwrap();
        assert!(rel.peak.is_none());
        let tr = bpq_path(&c, &grid(20.0, 41)).unwrap();
        let ps = tr.column(1);
        assert!(ps.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn sir_calibration_round_trip() {
        let c = sir_case();
        let pk = sir_relations(&c).unwrap().peak.unwrap();
        let (beta, b) = sir_calibrate(1000.0, 10.0, pk.t_m, pk.p_tm).unwrap();
        assert!((beta / 0.002 - 1.0).abs() < 1e-6, "{beta}");
        assert!((b / 0.5 - 1.0).abs() < 1e-6, "{b}");
        assert!(sir_calibrate(1000.0, 10.0, 1.0, 5.0).is_err());
    }

    #[test]
    fn sir_seed_sensitivity() {
        let (beta, b, n) = (0.002, 0.5, 1000.0);
        let t = 1.0 / (beta * n - b);
        let p = |p0: f64| {
            let c = BpqCase::new(BpqKind::Case2 { beta, b }, BpqState::new(n - p0, p0, 0.0).unwrap()).unwrap();
            bpq_state(&c, t).unwrap().players
        };
        let ratio = p(0.02) / p(0.01);
        assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn case3_reduces_and_peaks() {
        let n = 1000.0;
        let c3 = BpqCase::new(BpqKind::Case3 { a: 0.4, beta: 0.0, b: 0.3 }, BpqState::fresh(n)).unwrap();
        let c1 = case1(constant(0.4), constant(0.3), constant(0.0), n);
        let g = grid(20.0, 201);
        assert!(max_gap(&bpq_path(&c3, &g).unwrap(), &bpq_path(&c1, &g).unwrap(), &[0, 1, 2]) < 1e-9 * n);

        let c = BpqCase::new(BpqKind::Case3 { a: 0.1, beta: 0.001, b: 0.8 }, BpqState::fresh(n)).unwrap();
        let pk = peak_metrics(&c, 20.0).unwrap();
        let s = bpq_state(&c, pk.t_m).unwrap();
        let rel = case3_peak_players(0.1, 0.001, 0.8, s.buyers);
        assert!((rel - pk.p_m).abs() <= 1e-6 * pk.p_m, "{rel} {}", pk.p_m);
        // Early growth aNt[1 + (Nβ - a - b)t/2]; the usual form drops the
        // -a from holding B at N.
        let t = 1e-4;
        let p = bpq_state(&c, t).unwrap().players;
        let exact = 0.1 * n * t * (1.0 + (n * 0.001 - 0.1 - 0.8) * t / 2.0);
        let held = 0.1 * n * t * (1.0 + (n * 0.001 - 0.8) * t / 2.0);
        assert!((p / exact - 1.0).abs() < 1e-8);
        assert!((p / held - 1.0).abs() < 0.1 * t * 2.0);
        assert!(p > 0.1 * n * t);
    }

    fn case4() -> BpqCase {
        BpqCase::new(BpqKind::Case4 { beta: 0.002, gamma: 0.003 }, BpqState::new(980.0, 10.0, 10.0).unwrap()).unwrap()
    }

    #[test]
    fn case4_needs_quitters() {
        let r = BpqCase::new(BpqKind::Case4 { beta: 0.002, gamma: 0.003 }, BpqState::new(990.0, 10.0, 0.0).unwrap());
        assert!(matches!(r, Err(Error::Initiation(_))));
    }

    #[test]
    fn case4_first_integral_and_peak() {
        let c = case4();
        let g = grid(20.0, 2001);
        let tr = bpq_path(&c, &g).unwrap();
        let rk = bpq_path_numeric(&c, &g, None).unwrap();
        assert!(max_gap(&tr, &rk, &[0, 1, 2]) <= 1e-5 * 1000.0);
        let rel = Case4Relations::new(&c).unwrap();
        assert!((rel.q_rate(10.0) - 0.003 * 10.0 * 10.0).abs() < 1e-12);
        let (t_m, _, p_tm) = rel.peak().unwrap().unwrap();
        let ps = rk.column(1);
        let k = (0..ps.len()).fold(0, |b, i| if ps[i] > ps[b] { i } else { b });
        assert!((ps[k] - p_tm).abs() <= 1e-4 * 1000.0);
        assert!((g[k] - t_m).abs() <= g[1]);
        // β = γ: B = B0 Q0/Q.
        let eq = BpqCase::new(BpqKind::Case4 { beta: 0.002, gamma: 0.002 }, c.initial).unwrap();
        let r2 = Case4Relations::new(&eq).unwrap();
        assert!((r2.b_of_q(40.0) - 980.0 * 10.0 / 40.0).abs() < 1e-12);
    }

    fn case5() -> BpqCase {
        BpqCase::new(BpqKind::Case5 { a: 0.2, gamma: 0.004 }, BpqState::new(990.0, 0.0, 10.0).unwrap()).unwrap()
    }

    #[test]
    fn case5_transform_against_rk4() {
        let c = case5();
        let g = grid(30.0, 3001);
        let tr = bpq_path(&c, &g).unwrap();
        assert_eq!(tr.states()[0][2], 10.0);
        let rk = bpq_path_numeric(&c, &g, None).unwrap();
        assert!(max_gap(&tr, &rk, &[0, 1, 2]) <= 1e-5 * 1000.0);
        // Peak: which root of the quadratic is realised.
        let pk = peak_metrics(&c, 30.0).unwrap();
        let s = bpq_state(&c, pk.t_m).unwrap();
        let (big, small) = case5_peak_roots(0.2, 0.004, 1000.0, s.buyers).unwrap();
        let hit = (pk.p_m - big).abs().min((pk.p_m - small).abs());
        assert!(hit < 1e-6 * 1000.0, "{} vs {big} / {small}", pk.p_m);
    }

    #[test]
    fn printed_case5_constant_breaks_initial_condition() {
        let (a, gamma, b0, q0) = (0.2f64, 0.004f64, 990.0f64, 10.0f64);
        let printed_w0 = (1.0 / q0) * (-gamma * b0 / a).exp() * (-(gamma * b0 / a)).exp();
        assert!((printed_w0 - 1.0 / q0).abs() > 1e-3);
    }

    #[test]
    fn case6_against_full_system() {
        let c = BpqCase::new(BpqKind::Case6 { a: 0.3, b: 0.2, gamma: 0.001 }, BpqState::fresh(1000.0)).unwrap();
        let g = grid(30.0, 301);
        let tr = bpq_path(&c, &g).unwrap();
        let rk = bpq_path_numeric(&c, &g, None).unwrap();
        assert!(max_gap(&tr, &rk, &[0, 1, 2]) <= 1e-8 * 1000.0);
        let s0 = BpqState::fresh(1000.0);
        assert_eq!(c.player_rate(0.0, &s0), 300.0);
        // γ = 0 is case 1 without the never-buy rate.
        let c0 = BpqCase::new(BpqKind::Case6 { a: 0.3, b: 0.2, gamma: 0.0 }, BpqState::fresh(1000.0)).unwrap();
        let c1 = case1(constant(0.3), constant(0.2), constant(0.0), 1000.0);
        assert!(max_gap(&bpq_path(&c0, &g).unwrap(), &bpq_path(&c1, &g).unwrap(), &[0, 1, 2]) < 1e-9 * 1000.0);
    }

    fn comp() -> ComplementarySpec {
        ComplementarySpec { g: 0.0005, b: 0.5, a_c: 0.4, b_c: 0.9, tau: 1.0, n: 1000.0, n_c: None }
    }

    #[test]
    fn complementary_against_rk4() {
        let s = comp();
        let g = grid(30.0, 301);
        let tr = complementary_path(&s, &g).unwrap();
        let rk = complementary_path_numeric(&s, &g, 1e-3).unwrap();
        for (r, q) in tr.states().iter().zip(rk.states()) {
            for (i, j) in [(0, 0), (1, 1), (2, 2), (5, 3), (6, 4), (7, 5)] {
                assert!((r[i] - q[j]).abs() <= 1e-5 * 1000.0, "{i}: {} {}", r[i], q[j]);
            }
        }
    }

    #[test]
    fn complementary_edge_cases() {
        let mut s = comp();
        s.tau = 0.0;
        let tr = complementary_path(&s, &grid(5.0, 6)).unwrap();
        assert_eq!(tr.states()[0][1], 0.0);
        assert_eq!(tr.states()[0][6], 0.0);
        s.g = 0.0;
        let tr = complementary_path(&s, &grid(5.0, 6)).unwrap();
        assert!(tr.states().iter().all(|r| r[0] == 1000.0));
        // Confluent game 2 and a late launch.
        let s = ComplementarySpec { a_c: 0.7, b_c: 0.7, tau: -2.0, ..comp() };
        let g = grid(20.0, 201);
        let tr = complementary_path(&s, &g).unwrap();
        let rk = complementary_path_numeric(&s, &g, 1e-3).unwrap();
        for (r, q) in tr.states().iter().zip(rk.states()) {
            assert!((r[1] - q[1]).abs() <= 1e-5 * 1000.0);
        }
    }

    #[test]
    fn constant_proxy_is_case3() {
        let s = comp();
        let c = complementary_constant_approx(&s, 200.0, 0.0).unwrap();
        assert_eq!(c.kind, BpqKind::Case3 { a: 0.1, beta: 0.0, b: 0.5 });
        let none = complementary_constant_approx(&s, 0.0, 0.0).unwrap();
        let tr = bpq_path(&none, &grid(5.0, 6)).unwrap();
        assert!(tr.states().iter().all(|r| r[1] == 0.0));
    }

    #[test]
    fn peak_proxy_overstates_early_adoption() {
        // Characterisation on one instance: holding P_c at its peak buys
        // faster than the real complementary game early on.
        let s = comp();
        let g = grid(20.0, 2001);
        let tr = complementary_path(&s, &g).unwrap();
        let p_c0 = tr.column(6).iter().fold(0.0f64, |m, &x| m.max(x));
        let proxy = complementary_constant_approx(&s, p_c0, 0.0).unwrap();
        let early = grid(2.0, 21);
        let exact = complementary_path(&s, &early).unwrap();
        let approx = bpq_path(&proxy, &early).unwrap();
        for (e, a) in exact.states().iter().zip(approx.states()).skip(1) {
            assert!(a[4] >= e[4], "{} < {}", a[4], e[4]);
        }
    }

    fn all_cases() -> Vec<BpqCase> {
        let n = 1000.0;
        vec![
            case1(constant(0.8), constant(0.5), constant(0.1), n),
            case1(RateSchedule::Linear { a0: 0.5, a1: 0.2 }, constant(1.0), constant(0.0), n),
            sir_case(),
            BpqCase::new(BpqKind::Case3 { a: 0.1, beta: 0.001, b: 0.8 }, BpqState::fresh(n)).unwrap(),
            case4(),
            case5(),
            BpqCase::new(BpqKind::Case6 { a: 0.3, b: 0.2, gamma: 0.001 }, BpqState::fresh(n)).unwrap(),
        ]
    }

    #[test]
    fn conservation_and_monotonicity() {
        for c in all_cases() {
            let tr = bpq_path(&c, &grid(40.0, 401)).unwrap();
            let n = c.n();
            for row in tr.states() {
                assert!((row[0] + row[1] + row[2] - n).abs() <= 1e-9 * n);
            }
            for w in tr.states().windows(2) {
                assert!(w[1][0] <= w[0][0] + 1e-12 * n, "{:?}", c.kind);
                assert!(w[1][2] >= w[0][2] - 1e-12 * n, "{:?}", c.kind);
            }
        }
    }

    #[test]
    fn peak_law_on_grid() {
        for c in all_cases() {
            let g = grid(40.0, 4001);
            let tr = bpq_path(&c, &g).unwrap();
            let ps = tr.column(1);
            let k = (0..ps.len()).fold(0, |b, i| if ps[i] > ps[b] { i } else { b });
            if k == 0 || k == ps.len() - 1 {
                continue;
            }
            let row = &tr.states()[k];
            let s = BpqState { buyers: row[0], players: row[1], quitters: row[2] };
            // |Ṗ| at the argmax is bounded by the change of Ṗ over one step.
            let rate = c.player_rate(g[k], &s).abs();
            let swing = (ps[k + 1] - 2.0 * ps[k] + ps[k - 1]).abs() / g[1];
            assert!(rate <= swing + 1e-9, "{:?}: {rate} > {swing}", c.kind);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sir_conserves(beta in 0.0005f64..0.005, b in 0.1f64..1.0, p0 in 1.0f64..50.0) {
            let c = BpqCase::new(BpqKind::Case2 { beta, b }, BpqState::new(1000.0 - p0, p0, 0.0).unwrap()).unwrap();
            let tr = bpq_path(&c, &grid(30.0, 61)).unwrap();
            for row in tr.states() {
                prop_assert!((row[0] + row[1] + row[2] - 1000.0).abs() <= 1e-9 * 1000.0);
                prop_assert!(row[1] >= -1e-9);
            }
        }

        #[test]
        fn case1_bought_count_bounded(a in 0.01f64..2.0, b in 0.01f64..2.0, c in 0.0f64..1.0) {
            let cs = case1(constant(a), constant(b), constant(c), 1.0);
            let tr = bpq_path(&cs, &grid(20.0, 41)).unwrap();
            let c_inf = total_buyers(&cs).unwrap();
            for row in tr.states() {
                prop_assert!(row[4] <= c_inf * (1.0 + 1e-12));
            }
            prop_assert!(c_inf <= 1.0);
        }
    }
}
