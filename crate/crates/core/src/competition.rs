//! Several suppliers sharing one market.
//!
//! Shares `u_i` are fractions of the whole population. New customers arrive
//! through the Bass term `M_i = (1 - Σu_j)(m_i + r_i u_i)` and move between
//! suppliers through a churn function `C_i` with `Σ C_i = 0`.
//!
//! Supplier indices are zero-based in this module; `a_ij` is the rate at
//! which customers of supplier `i` leave for supplier `j`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::math::{abs, cos, exp, expm1, ln, ln_1p, relax, sin, sqrt};
use crate::numerics::{
    integrate_on_grid, mat_exp_apply, quadrature, rk4_step, solve_root, FnField, SquareMatrix, TimeGrid, Trajectory,
};

const ROOT_TOL: f64 = 1e-15;

/// Channel names `u1 … un`.
pub fn share_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("u{i}")).collect()
}

fn check_rate(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, "rate must be finite and non-negative"))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Bass acquisition for `n` suppliers.
#[derive(Debug, Clone, PartialEq)]
pub struct BassCompetition {
    /// Innovation coefficients.
    pub m: Vec<f64>,
    /// Imitation coefficients.
    pub r: Vec<f64>,
    /// Initial shares.
    pub u0: Vec<f64>,
}

impl BassCompetition {
    pub fn new(m: Vec<f64>, r: Vec<f64>, u0: Vec<f64>) -> Result<Self> {
        let b = BassCompetition { m, r, u0 };
        b.validate()?;
        Ok(b)
    }

    /// Innovators only, starting from an empty market.
    pub fn innovators(m: Vec<f64>) -> Result<Self> {
        let n = m.len();
        Self::new(m, vec![0.0; n], vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::param("m", "at least one supplier is required"));
        }
        check_len(n, self.r.len())?;
        check_len(n, self.u0.len())?;
        for i in 0..n {
            check_rate("m", self.m[i])?;
            check_rate("r", self.r[i])?;
            if !(self.m[i] + self.r[i] > 0.0) {
                return Err(Error::param("m", "each supplier needs m_i + r_i > 0"));
            }
            if !(0.0..=1.0).contains(&self.u0[i]) {
                return Err(Error::param("u0", "shares must lie in [0, 1]"));
            }
        }
        if self.u0.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::param("u0", "initial shares sum to more than 1"));
        }
        if self.m.iter().all(|&m| m == 0.0) && self.u0.iter().all(|&u| u == 0.0) {
            return Err(Error::param("u0", "a market of imitators needs a nonzero initial share"));
        }
        Ok(())
    }

    /// Writes `M_i(u)` into `out`.
    pub fn market_term(&self, u: &[f64], out: &mut [f64]) {
        let free = 1.0 - u.iter().sum::<f64>();
        for i in 0..self.n() {
            out[i] = free * (self.m[i] + self.r[i] * u[i]);
        }
    }

    fn rate_scale(&self) -> f64 {
        self.m.iter().sum::<f64>() + self.r.iter().sum::<f64>()
    }
}

/// Spontaneous churn rates `a_ij ≥ 0` between `n` suppliers.
///
/// The diagonal is implied (`a_ii = Σ_{j≠i} a_ij`) and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ChurnMatrix {
    n: usize,
    a: Vec<f64>,
}

impl ChurnMatrix {
    /// Builds the matrix from rows; diagonal entries of `rows` are ignored.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::param("a", "at least one supplier is required"));
        }
        let mut a = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            check_len(n, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    check_rate("a", v)?;
                    a[i * n + j] = v;
                }
            }
        }
        Ok(ChurnMatrix { n, a })
    }

    /// Every off-diagonal rate equal to `a`.
    pub fn uniform(n: usize, a: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![a; n]).collect();
        Self::new(&rows)
    }

    pub fn two(a12: f64, a21: f64) -> Result<Self> {
        Self::new(&[vec![0.0, a12], vec![a21, 0.0]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `a_ij`, zero on the diagonal.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// `a_ii`: total rate at which supplier `i` loses customers.
    pub fn outflow(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.rate(i, j)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.a[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = self.rows().into_iter().map(|r| r.into_iter().map(|v| v * k).collect()).collect();
        Self::new(&rows)
    }

    /// `C_i = Σ_{j≠i} a_ji u_j - a_ii u_i`.
    pub fn flow(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.flow_into(u, &mut out);
        out
    }

    fn flow_into(&self, u: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut c = 0.0;
            for j in 0..self.n {
                if j != i {
                    c += self.rate(j, i) * u[j] - self.rate(i, j) * u[i];
                }
            }
            out[i] = c;
        }
    }

    /// Balance rows `C_i = 0` for `i < n-1` followed by a row of ones.
    pub fn balance_matrix(&self) -> SquareMatrix {
        let n = self.n;
        let mut a = SquareMatrix::zeros(n);
        for i in 0..n - 1 {
            for j in 0..n {
                let v = if i == j { -self.outflow(i) } else { self.rate(j, i) };
                a.set(i, j, v);
            }
        }
        for j in 0..n {
            a.set(n - 1, j, 1.0);
        }
        a
    }

    fn max_outflow(&self) -> f64 {
        (0..self.n).map(|i| self.outflow(i) + (0..self.n).map(|j| self.rate(j, i)).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// One zero-mean term `amplitude · sin(2πt/period + phase)` added to `a_{from,to}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub from: usize,
    pub to: usize,
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
}

impl Sinusoid {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * sin(TAU * t / self.period + self.phase)
    }

    /// `∫_0^t value`.
    pub fn integral(&self, t: f64) -> f64 {
        self.amplitude * self.period / TAU * (cos(self.phase) - cos(TAU * t / self.period + self.phase))
    }
}

/// Churn rates `a_ij(t) = a0_ij + ε_ij(t)` with periodic, zero-mean `ε_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicChurnSpec {
    pub a0: ChurnMatrix,
    pub eps: Vec<Sinusoid>,
}

impl PeriodicChurnSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.a0.n();
        for s in &self.eps {
            if s.from >= n || s.to >= n || s.from == s.to {
                return Err(Error::param("eps", "sinusoid must join two distinct suppliers"));
            }
            if !s.amplitude.is_finite() || !s.phase.is_finite() {
                return Err(Error::param("eps", "amplitude and phase must be finite"));
            }
            if !(s.period > 0.0) || !s.period.is_finite() {
                return Err(Error::param("eps", "period must be positive"));
            }
        }
        // Σ|amplitude| bounds the dip of a sum of sinusoids from below.
        for i in 0..n {
            for j in 0..n {
                let dip: f64 = self.terms(i, j).map(|s| abs(s.amplitude)).sum();
                if dip > self.a0.rate(i, j) {
                    return Err(Error::param("eps", "oscillation would drive a churn rate negative"));
                }
            }
        }
        Ok(())
    }

    fn terms(&self, i: usize, j: usize) -> impl Iterator<Item = &Sinusoid> {
        self.eps.iter().filter(move |s| s.from == i && s.to == j)
    }

    /// `ε_ij(t)`.
    pub fn epsilon(&self, i: usize, j: usize, t: f64) -> f64 {
        self.terms(i, j).map(|s| s.value(t)).sum()
    }

    /// `∫_0^t ε_ij`.
    pub fn epsilon_integral(&self, i: usize, j: usize, t: f64) -> f64 {
        self.terms(i, j).map(|s| s.integral(t)).sum()
    }

    pub fn rate(&self, i: usize, j: usize, t: f64) -> f64 {
        if i == j {
            0.0
        } else {
            self.a0.rate(i, j) + self.epsilon(i, j, t)
        }
    }

    fn flow_into(&self, t: f64, u: &[f64], out: &mut [f64]) {
        let n = self.a0.n();
        for i in 0..n {
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += self.rate(j, i, t) * u[j] - self.rate(i, j, t) * u[i];
                }
            }
            out[i] = c;
        }
    }

    fn shortest_period(&self) -> Option<f64> {
        self.eps.iter().map(|s| s.period).reduce(f64::min)
    }
}

/// Churn driven by market feedback `f_i(u_i) = b_i u_i + ε_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulatedChurnSpec {
    pub churn: ChurnMatrix,
    /// Stimulation strengths `b_i ≥ 0`.
    pub b: Vec<f64>,
    /// Spontaneous flags `ε_i ∈ {0, 1}`.
    pub eps: Vec<f64>,
}

impl StimulatedChurnSpec {
    pub fn new(churn: ChurnMatrix, b: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        let s = StimulatedChurnSpec { churn, b, eps };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.churn.n();
        check_len(n, self.b.len())?;
        check_len(n, self.eps.len())?;
        for &b in &self.b {
            check_rate("b", b)?;
        }
        if self.eps.iter().any(|&e| e != 0.0 && e != 1.0) {
            return Err(Error::param("eps", "spontaneous flags must be 0 or 1"));
        }
        if self.b.iter().chain(&self.eps).all(|&v| v == 0.0) {
            return Err(Error::param("b", "feedback vanishes for every supplier"));
        }
        Ok(())
    }

    /// True when no supplier has a spontaneous component.
    pub fn is_pure(&self) -> bool {
        self.eps.iter().all(|&e| e == 0.0)
    }

    pub fn feedback(&self, i: usize, ui: f64) -> f64 {
        self.b[i] * ui + self.eps[i]
    }

    /// `C_i = Σ_{j≠i} [a_ji u_j f_i(u_i) - a_ij u_i f_j(u_j)]`.
    pub fn flow(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.churn.n()];
        self.flow_into(u, &mut out);
        out
    }

    fn flow_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.churn.n();
        for i in 0..n {
            let fi = self.feedback(i, u[i]);
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += self.churn.rate(j, i) * u[j] * fi - self.churn.rate(i, j) * u[i] * self.feedback(j, u[j]);
                }
            }
            out[i] = c;
        }
    }

    fn rate_scale(&self) -> f64 {
        let n = self.churn.n();
        let mut s: f64 = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                if i != j {
                    let gain = self.churn.rate(j, i) * (self.b[i] + self.eps[i]);
                    let loss = self.churn.rate(i, j) * (self.b[j] + self.eps[j]);
                    row += gain + loss;
                }
            }
            s = s.max(row);
        }
        s
    }
}

/// Any of the churn mechanisms.
#[derive(Debug, Clone, PartialEq)]
pub enum ChurnSpec {
    Spontaneous(ChurnMatrix),
    Periodic(PeriodicChurnSpec),
    Stimulated(StimulatedChurnSpec),
}

impl ChurnSpec {
    pub fn n(&self) -> usize {
        match self {
            ChurnSpec::Spontaneous(c) => c.n(),
            ChurnSpec::Periodic(p) => p.a0.n(),
            ChurnSpec::Stimulated(s) => s.churn.n(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChurnSpec::Spontaneous(_) => Ok(()),
            ChurnSpec::Periodic(p) => p.validate(),
            ChurnSpec::Stimulated(s) => s.validate(),
        }
    }

    /// `C(t, u)`.
    pub fn flow(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.flow_into(t, u, &mut out);
        out
    }

    fn flow_into(&self, t: f64, u: &[f64], out: &mut [f64]) {
        match self {
            ChurnSpec::Spontaneous(c) => c.flow_into(u, out),
            ChurnSpec::Periodic(p) => p.flow_into(t, u, out),
            ChurnSpec::Stimulated(s) => s.flow_into(u, out),
        }
    }

    fn rate_scale(&self) -> f64 {
        match self {
            ChurnSpec::Spontaneous(c) => c.max_outflow(),
            ChurnSpec::Periodic(p) => 2.0 * p.a0.max_outflow(),
            ChurnSpec::Stimulated(s) => s.rate_scale(),
        }
    }
}

/// Shares after the market has absorbed `s = ∫(1 - U) dt` units of
/// effective time: `u_i = u0_i e^{r_i s} + m_i (e^{r_i s} - 1)/r_i`.
fn shares_at(m: &BassCompetition, s: f64) -> Vec<f64> {
    (0..m.n())
        .map(|i| m.u0[i] * exp(m.r[i] * s) + m.m[i] * relax(-m.r[i], s))
        .collect()
}

/// Where a market without churn comes to rest.
///
/// With every `r_i > 0` the final share of a reference supplier `k` solves
/// `Σ_i [(m_i/r_i + u0_i)((m_k + r_k u_k)/(m_k + r_k u0_k))^{r_i/r_k} - m_i/r_i] = 1`
/// on `[u0_k, 1]`; the other shares follow from it. All innovators give
/// `u0_i + (1 - U0) m_i / Σm`. Mixed markets are solved in the effective
/// time `s` directly.
pub fn fixed_point_no_churn(m: &BassCompetition) -> Result<Vec<f64>> {
    m.validate()?;
    let n = m.n();
    let u_sum: f64 = m.u0.iter().sum();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    if u_sum >= 1.0 {
        return Ok(m.u0.clone());
    }
    if m.r.iter().all(|&r| r == 0.0) {
        let m_sum: f64 = m.m.iter().sum();
        return Ok((0..n).map(|i| m.u0[i] + (1.0 - u_sum) * (m.m[i] / m_sum)).collect());
    }
    if m.r.iter().all(|&r| r > 0.0) {
        // Largest r as reference keeps every exponent r_i/r_k at most 1.
        let k = (0..n)
            .filter(|&i| m.m[i] + m.r[i] * m.u0[i] > 0.0)
            .max_by(|&i, &j| m.r[i].total_cmp(&m.r[j]))
            .ok_or(Error::InfeasibleMarket("no supplier can grow"))?;
        let base0 = m.m[k] + m.r[k] * m.u0[k];
        let s_of = |uk: f64| ln_1p(m.r[k] * (uk - m.u0[k]) / base0) / m.r[k];
        let g = |uk: f64| shares_at(m, s_of(uk)).iter().sum::<f64>() - 1.0;
        let uk = solve_root(g, m.u0[k], 1.0, ROOT_TOL).map_err(|_| Error::InfeasibleMarket("no fixed point on the simplex"))?;
        return Ok(shares_at(m, s_of(uk)));
    }
    let g = |s: f64| shares_at(m, s).iter().sum::<f64>() - 1.0;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::InfeasibleMarket("shares never fill the market"));
        }
    }
    let s = solve_root(g, 0.0, hi, ROOT_TOL * hi).map_err(|_| Error::InfeasibleMarket("no fixed point on the simplex"))?;
    Ok(shares_at(m, s))
}

/// `u_i = (m_i/Σm)(1 - e^{-Σm t})`: innovators only, no churn, empty start.
pub fn innovators_only_path(m: &[f64], grid: &[f64]) -> Result<Trajectory> {
    for &v in m {
        check_rate("m", v)?;
    }
    let total: f64 = m.iter().sum();
    if !(total > 0.0) {
        return Err(Error::param("m", "at least one innovation coefficient must be positive"));
    }
    let mut labels = share_labels(m.len());
    labels.push(String::from("U"));
    Trajectory::tabulate(grid, &labels, |t| {
        let big_u = -expm1(-total * t);
        let mut row: Vec<f64> = m.iter().map(|&mi| mi / total * big_u).collect();
        row.push(big_u);
        Ok(row)
    })
}

fn map_singular(e: Error) -> Error {
    match e {
        Error::SingularMatrix => Error::DegenerateMarket,
        other => other,
    }
}

/// Long-run shares of a fully developed market under spontaneous churn.
///
/// Solves `n - 1` balance equations `C_i = 0` together with `Σu = 1`.
pub fn spontaneous_equilibrium(c: &ChurnMatrix) -> Result<Vec<f64>> {
    let n = c.n();
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    c.balance_matrix().solve(&rhs).map_err(map_singular)
}

/// The same equilibrium written as cofactor ratios `u_i = A_ni / D`.
pub fn cofactor_equilibrium(c: &ChurnMatrix) -> Result<Vec<f64>> {
    let a = c.balance_matrix();
    let n = c.n();
    let d = a.det();
    let scale = (0..n).map(|i| c.outflow(i)).fold(1.0, f64::max);
    if !(abs(d) > 1e-12 * libm::pow(scale, (n - 1) as f64)) {
        return Err(Error::DegenerateMarket);
    }
    Ok((0..n).map(|i| a.cofactor(n - 1, i) / d).collect())
}

/// `Q` of `u̇ = m - Q u` for innovators with spontaneous churn:
/// `q_ii = m_i + a_ii`, `q_ij = m_i - a_ji`.
pub fn innovator_churn_matrix(m: &[f64], c: &ChurnMatrix) -> Result<SquareMatrix> {
    let n = c.n();
    check_len(n, m.len())?;
    let mut q = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j { m[i] + c.outflow(i) } else { m[i] - c.rate(j, i) };
            q.set(i, j, v);
        }
    }
    Ok(q)
}

/// Innovators with spontaneous churn from an empty market:
/// `u = (I - e^{-Qt}) Q^{-1} m`.
///
/// Falls back to RK4 when `Q` is singular.
pub fn spontaneous_path(m: &[f64], c: &ChurnMatrix, grid: &[f64]) -> Result<Trajectory> {
    for &v in m {
        check_rate("m", v)?;
    }
    let q = innovator_churn_matrix(m, c)?;
    let labels = share_labels(c.n());
    match q.solve(m) {
        Ok(x) => Trajectory::tabulate(grid, &labels, |t| {
            let decay = mat_exp_apply(&q, -t, &x)?;
            Ok(x.iter().zip(decay).map(|(xi, di)| xi - di).collect())
        }),
        Err(Error::SingularMatrix) => {
            let n = c.n();
            let spec = ChurnSpec::Spontaneous(c.clone());
            integrate_market(m, &vec![0.0; n], &vec![0.0; n], Some(&spec), grid)
        }
        Err(e) => Err(e),
    }
}

/// Two suppliers, innovators only, spontaneous churn, empty start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSupplierChurn {
    pub m1: f64,
    pub m2: f64,
    pub a12: f64,
    pub a21: f64,
}

impl TwoSupplierChurn {
    pub fn validate(&self) -> Result<()> {
        check_rate("m1", self.m1)?;
        check_rate("m2", self.m2)?;
        check_rate("a12", self.a12)?;
        check_rate("a21", self.a21)?;
        if !(self.m1 + self.m2 > 0.0) {
            return Err(Error::param("m", "at least one innovation coefficient must be positive"));
        }
        Ok(())
    }

    /// `(u1, u2)` at time `t`.
    ///
    /// Written as `u1 = a21 ρ(S, t) + (m1 - a21) e^{-St} ρ(M - S, t)` with
    /// `ρ(k, t) = (1 - e^{-kt})/k`, `S = a12 + a21`, `M = m1 + m2`, which
    /// stays finite when `M = S` or `S = 0`.
    pub fn shares(&self, t: f64) -> (f64, f64) {
        let s = self.a12 + self.a21;
        let big_m = self.m1 + self.m2;
        let u1 = self.a21 * relax(s, t) + (self.m1 - self.a21) * exp(-s * t) * relax(big_m - s, t);
        (u1, -expm1(-big_m * t) - u1)
    }

    /// `(a21, a12)/(a12 + a21)`; `None` without churn.
    pub fn equilibrium(&self) -> Option<(f64, f64)> {
        let s = self.a12 + self.a21;
        (s > 0.0).then(|| (self.a21 / s, self.a12 / s))
    }

    /// Time at which supplier 2 peaks when supplier 1 never loses customers:
    /// `T_m = ln((m1 + m2)/a21)/(m1 + m2 - a21)`.
    pub fn supplier2_peak_time(&self) -> Option<f64> {
        if self.a12 != 0.0 || !(self.a21 > 0.0) || !(self.m2 > 0.0) {
            return None;
        }
        let big_m = self.m1 + self.m2;
        let d = big_m - self.a21;
        if abs(d) < 1e-12 * big_m {
            return Some(1.0 / self.a21);
        }
        Some(ln(big_m / self.a21) / d)
    }
}

pub fn two_supplier_path(p: &TwoSupplierChurn, grid: &[f64]) -> Result<Trajectory> {
    p.validate()?;
    Trajectory::tabulate(grid, &["u1", "u2"], |t| {
        let (u1, u2) = p.shares(t);
        Ok(vec![u1, u2])
    })
}

/// Fully developed two-supplier market with periodic churn, starting at
/// `u1(0) = u1_0`.
///
/// Channels: `u1`, `u2` and the decomposition `u1 = mean + periodic + decaying`
/// with `mean = a21⁰/k0`, `periodic = (σ - α·mean)/(1 + α)` and
/// `decaying = (u1_0 - mean) e^{-k0 t}/(1 + α)`, where `k0 = a12⁰ + a21⁰`,
/// `α = exp(∫(ε12 + ε21)) - 1` and
/// `σ(t) = ∫_0^t [a21⁰ α + ε21 (1 + α)] e^{-k0 (t - x)} dx`.
pub fn periodic_two_supplier_path(spec: &PeriodicChurnSpec, u1_0: f64, grid: &[f64]) -> Result<Trajectory> {
    spec.validate()?;
    if spec.a0.n() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: spec.a0.n() });
    }
    if !(0.0..=1.0).contains(&u1_0) {
        return Err(Error::param("u1_0", "share must lie in [0, 1]"));
    }
    if grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::param("grid", "times must be non-negative"));
    }
    let a12 = spec.a0.rate(0, 1);
    let a21 = spec.a0.rate(1, 0);
    let k0 = a12 + a21;
    if !(k0 > 0.0) {
        return Err(Error::param("a0", "baseline churn must be positive"));
    }
    let mean = a21 / k0;
    let alpha = |t: f64| expm1(spec.epsilon_integral(0, 1, t) + spec.epsilon_integral(1, 0, t));
    let source = |x: f64| {
        let al = alpha(x);
        a21 * al + spec.epsilon(1, 0, x) * (1.0 + al)
    };
    // σ advanced interval by interval: σ(b) = e^{-k0(b-a)} σ(a) + ∫_a^b source(x) e^{-k0(b-x)} dx.
    let advance = |sigma: f64, a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(sigma);
        }
        let tail = quadrature(|x| source(x) * exp(-k0 * (b - x)), a, b, 1e-12)?;
        Ok(exp(-k0 * (b - a)) * sigma + tail)
    };
    let labels = ["u1", "u2", "mean", "periodic", "decaying"];
    let mut tr = Trajectory::with_capacity(&labels, grid.len());
    let mut sigma = 0.0;
    let mut prev = 0.0;
    for &t in grid {
        sigma = advance(sigma, prev, t)?;
        prev = t;
        let al = alpha(t);
        let periodic = (sigma - al * mean) / (1.0 + al);
        let decaying = (u1_0 - mean) * exp(-k0 * t) / (1.0 + al);
        let u1 = mean + periodic + decaying;
        tr.push(t, vec![u1, 1.0 - u1, mean, periodic, decaying])?;
    }
    Ok(tr)
}

/// How a stimulated-churn market ends up.
#[derive(Debug, Clone, PartialEq)]
pub enum MarketOutcome {
    /// Every vertex `e_k` of the simplex is a fixed point; `winner` is the
    /// one reached from the given start.
    WinnerTakeAll { vertices: Vec<Vec<f64>>, winner: usize },
    Shared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StimulatedEquilibrium {
    pub shares: Vec<f64>,
    pub outcome: MarketOutcome,
}

/// Attracting root of the two-supplier balance
/// `C1 = Δ u1 (1 - u1) + ε1 a21 (1 - u1) - ε2 a12 u1 = 0`, with
/// `Δ = b1 a21 - b2 a12`.
///
/// The positive root is `u1 = 2 A21 / (√(B² + 4 Δ A21) - B)` with
/// `A21 = ε1 a21`, `A12 = ε2 a12`, `B = Δ - A12 - A21`.
pub fn stimulated_two_supplier_root(spec: &StimulatedChurnSpec) -> Result<f64> {
    spec.validate()?;
    if spec.churn.n() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: spec.churn.n() });
    }
    let a12 = spec.churn.rate(0, 1);
    let a21 = spec.churn.rate(1, 0);
    let big_a21 = spec.eps[0] * a21;
    let big_a12 = spec.eps[1] * a12;
    let delta = spec.b[0] * a21 - spec.b[1] * a12;
    let g = |u: f64| delta * u * (1.0 - u) + big_a21 * (1.0 - u) - big_a12 * u;
    let slope = |u: f64| delta * (1.0 - 2.0 * u) - big_a21 - big_a12;

    if big_a21 == 0.0 && big_a12 == 0.0 {
        return Err(Error::InconsistentSpec("purely stimulated churn has only vertex equilibria"));
    }
    let mut roots: Vec<f64> = Vec::with_capacity(2);
    if delta == 0.0 {
        roots.push(big_a21 / (big_a21 + big_a12));
    } else {
        let b = delta - big_a12 - big_a21;
        let disc = (b * b + 4.0 * delta * big_a21).max(0.0);
        let q = 0.5 * (b + sqrt(disc).copysign(b));
        if q != 0.0 {
            roots.push(q / delta);
            roots.push(-big_a21 / q);
        } else {
            roots.push(0.0);
        }
    }
    let tol = 1e-12;
    roots
        .into_iter()
        .filter(|u| u.is_finite() && *u >= -tol && *u <= 1.0 + tol)
        .map(|u| u.clamp(0.0, 1.0))
        .filter(|&u| slope(u) <= 0.0 || abs(g(u)) <= tol && slope(u) <= tol)
        .find(|&u| u > 0.0)
        .ok_or(Error::InconsistentSpec("no attracting root with a positive share for supplier 1"))
}

/// Long-run shares of a fully developed market under stimulated churn.
///
/// Purely stimulated markets are winner-take-all: every vertex is a fixed
/// point and the one reached from `u0` (default: equal shares) is found by
/// simulating `u̇ = C(u)`. Two suppliers with a spontaneous component use the
/// closed-form root; larger markets settle by simulation and are then
/// polished with Newton steps on the balance system.
pub fn stimulated_fixed_point(spec: &StimulatedChurnSpec, u0: Option<&[f64]>) -> Result<StimulatedEquilibrium> {
    spec.validate()?;
    let n = spec.churn.n();
    let start: Vec<f64> = match u0 {
        Some(u) => {
            check_len(n, u.len())?;
            if u.iter().any(|&v| !(0.0..=1.0).contains(&v)) || abs(u.iter().sum::<f64>() - 1.0) > 1e-9 {
                return Err(Error::param("u0", "start must lie on the simplex Σu = 1"));
            }
            u.to_vec()
        }
        None => vec![1.0 / n as f64; n],
    };
    let vertices = |n: usize| -> Vec<Vec<f64>> {
        (0..n).map(|k| (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect()).collect()
    };

    if spec.is_pure() {
        let u = settle(spec, &start, true)?;
        let (winner, top) = argmax(&u);
        if 1.0 - top > 1e-4 {
            return Err(Error::InconsistentSpec("purely stimulated churn did not settle on a vertex"));
        }
        return Ok(StimulatedEquilibrium {
            shares: vertices(n)[winner].clone(),
            outcome: MarketOutcome::WinnerTakeAll { vertices: vertices(n), winner },
        });
    }

    let shares = if n == 2 {
        let u1 = stimulated_two_supplier_root(spec)?;
        vec![u1, 1.0 - u1]
    } else {
        let settled = settle(spec, &start, false)?;
        polish_balance(spec, settled)?
    };
    let alive = shares.iter().filter(|&&v| v > 1e-9).count();
    let outcome = if alive == 1 {
        MarketOutcome::WinnerTakeAll { vertices: vertices(n), winner: argmax(&shares).0 }
    } else {
        MarketOutcome::Shared
    };
    Ok(StimulatedEquilibrium { shares, outcome })
}

fn argmax(u: &[f64]) -> (usize, f64) {
    u.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

/// Integrates `u̇ = C(u)` until the flow (or, when `to_vertex`, the mass off
/// the leading supplier) is negligible.
fn settle(spec: &StimulatedChurnSpec, start: &[f64], to_vertex: bool) -> Result<Vec<f64>> {
    let scale = spec.rate_scale();
    if !(scale > 0.0) {
        return Ok(start.to_vec());
    }
    let h = 0.05 / scale;
    let field = FnField::new(start.len(), |_t, u: &[f64], du: &mut [f64]| spec.flow_into(u, du));
    let mut u = start.to_vec();
    const CHUNK: usize = 500;
    const MAX_CHUNKS: usize = 4000;
    for chunk in 0..MAX_CHUNKS {
        for k in 0..CHUNK {
            rk4_step(&field, ((chunk * CHUNK + k) as f64) * h, &mut u, h);
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged { last_valid_t: (chunk * CHUNK) as f64 * h });
        }
        let done = if to_vertex {
            1.0 - argmax(&u).1 < 1e-12
        } else {
            spec.flow(&u).iter().map(|c| abs(*c)).fold(0.0, f64::max) < 1e-13 * scale
        };
        if done {
            break;
        }
    }
    Ok(u)
}

/// Newton iteration on `C_1 … C_{n-1} = 0`, `Σu = 1`.
fn polish_balance(spec: &StimulatedChurnSpec, mut u: Vec<f64>) -> Result<Vec<f64>> {
    let n = u.len();
    let residual = |u: &[f64]| -> Vec<f64> {
        let mut r = spec.flow(u);
        r[n - 1] = u.iter().sum::<f64>() - 1.0;
        r
    };
    for _ in 0..8 {
        let r0 = residual(&u);
        let mut jac = SquareMatrix::zeros(n);
        for j in 0..n {
            let h = 1e-7 * u[j].max(1e-3);
            let mut up = u.clone();
            up[j] += h;
            let r1 = residual(&up);
            for i in 0..n {
                jac.set(i, j, (r1[i] - r0[i]) / h);
            }
        }
        let Ok(dx) = jac.solve(&r0) else { break };
        for j in 0..n {
            u[j] = (u[j] - dx[j]).max(0.0);
        }
    }
    let scale = spec.rate_scale().max(1.0);
    let worst = spec.flow(&u).iter().map(|c| abs(*c)).fold(0.0, f64::max);
    if worst > 1e-10 * scale {
        return Err(Error::InconsistentSpec("balance system has no admissible root"));
    }
    Ok(u)
}

/// Full nonlinear system `u̇_i = M_i(u) + C_i(t, u)` by RK4.
///
/// Checked at every sample: shares stay non-negative, the total share
/// never decreases or exceeds one, and churn conserves customers.
pub fn competitive_path_numeric(m: &BassCompetition, churn: Option<&ChurnSpec>, grid: &[f64]) -> Result<Trajectory> {
    m.validate()?;
    if let Some(c) = churn {
        c.validate()?;
        check_len(m.n(), c.n())?;
    }
    integrate_market(&m.m, &m.r, &m.u0, churn, grid)
}

fn integrate_market(m: &[f64], r: &[f64], u0: &[f64], churn: Option<&ChurnSpec>, grid: &[f64]) -> Result<Trajectory> {
    let n = m.len();
    let first = *grid.first().ok_or(Error::InvalidTrajectory("time grid is empty"))?;
    if first < 0.0 {
        return Err(Error::param("grid", "times must be non-negative"));
    }
    let bass = BassCompetition { m: m.to_vec(), r: r.to_vec(), u0: u0.to_vec() };
    let mut scale = bass.rate_scale();
    let mut step_cap = f64::INFINITY;
    if let Some(c) = churn {
        scale += c.rate_scale();
        if let ChurnSpec::Periodic(p) = c {
            step_cap = p.shortest_period().map_or(f64::INFINITY, |per| per / 200.0);
        }
    }
    let max_step = if scale > 0.0 { (0.01 / scale).min(step_cap) } else { step_cap.min(1.0) };

    let field = FnField::new(n, |t, u: &[f64], du: &mut [f64]| {
        bass.market_term(u, du);
        if let Some(c) = churn {
            let mut flow = vec![0.0; n];
            c.flow_into(t, u, &mut flow);
            for i in 0..n {
                du[i] += flow[i];
            }
        }
    });

    // The initial state belongs to t = 0; prepend it when the grid starts later.
    let prepend = first > 0.0;
    let mut pts = Vec::with_capacity(grid.len() + 1);
    if prepend {
        pts.push(0.0);
    }
    pts.extend_from_slice(grid);
    let tg = TimeGrid::new(pts)?;
    let raw = integrate_on_grid(&field, u0, &tg, max_step)?;

    let labels = share_labels(n);
    let mut out = Trajectory::with_capacity(&labels, grid.len());
    let tol = 1e-9;
    let mut prev_total = f64::NEG_INFINITY;
    for (k, (&t, u)) in raw.times().iter().zip(raw.states()).enumerate() {
        if prepend && k == 0 {
            prev_total = u.iter().sum();
            continue;
        }
        if u.iter().any(|&v| v < -tol) {
            return Err(Error::IntegrationInvariant { what: "negative share", t });
        }
        let total: f64 = u.iter().sum();
        if total > 1.0 + tol {
            return Err(Error::IntegrationInvariant { what: "total share exceeds one", t });
        }
        if total < prev_total - tol {
            return Err(Error::IntegrationInvariant { what: "total share decreased", t });
        }
        prev_total = total;
        if let Some(c) = churn {
            let net: f64 = c.flow(t, u).iter().sum();
            if abs(net) > 1e-12 * scale.max(1.0) {
                return Err(Error::IntegrationInvariant { what: "churn does not conserve customers", t });
            }
        }
        out.push(t, u.clone())?;
    }
    Ok(out)
}
