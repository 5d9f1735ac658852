use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::trajectory::{TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::math::ceil;

/// Right-hand side `dy/dt = f(t, y)` of a first-order system.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(t, y)` into `dy`; both slices have length `dim()`.
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

/// Adapts a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.f)(t, y, dy)
    }
}

struct Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// One classical RK4 step of size `h`, updating `y` in place.
pub fn rk4_step<V: VectorField + ?Sized>(field: &V, t: f64, y: &mut [f64], h: f64) {
    let mut s = Scratch::new(y.len());
    step_with(field, t, y, h, &mut s);
}

fn step_with<V: VectorField + ?Sized>(field: &V, t: f64, y: &mut [f64], h: f64, s: &mut Scratch) {
    let n = y.len();
    field.eval(t, y, &mut s.k1);
    for i in 0..n {
        s.tmp[i] = y[i] + 0.5 * h * s.k1[i];
    }
    field.eval(t + 0.5 * h, &s.tmp, &mut s.k2);
    for i in 0..n {
        s.tmp[i] = y[i] + 0.5 * h * s.k2[i];
    }
    field.eval(t + 0.5 * h, &s.tmp, &mut s.k3);
    for i in 0..n {
        s.tmp[i] = y[i] + h * s.k3[i];
    }
    field.eval(t + h, &s.tmp, &mut s.k4);
    for i in 0..n {
        y[i] += h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("y{i}")).collect()
}

fn check_input<V: VectorField + ?Sized>(field: &V, y0: &[f64]) -> Result<()> {
    if y0.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            found: y0.len(),
        });
    }
    Ok(())
}

/// Fixed-step RK4 from `t0` to `t1`, sampled at every step.
///
/// The last step is shortened so the trajectory ends exactly at `t1`.
pub fn integrate_ivp<V: VectorField + ?Sized>(
    field: &V,
    y0: &[f64],
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Trajectory> {
    check_input(field, y0)?;
    if !(t1 > t0) {
        return Err(Error::param("t1", "end time must exceed start time"));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::param("step", "step must be positive and finite"));
    }
    let steps = ceil((t1 - t0) / step * (1.0 - 1e-12)).max(1.0) as usize;
    let labels = default_labels(field.dim());
    let mut out = Trajectory::with_capacity(&labels, steps + 1);
    let mut y = y0.to_vec();
    out.push(t0, y.clone())?;
    let mut s = Scratch::new(y.len());
    let mut t = t0;
    for k in 1..=steps {
        let t_next = if k == steps { t1 } else { t0 + k as f64 * step };
        step_with(field, t, &mut y, t_next - t, &mut s);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged { last_valid_t: t });
        }
        t = t_next;
        out.push(t, y.clone())?;
    }
    Ok(out)
}

/// RK4 sampled on an arbitrary grid: each grid interval is split into equal
/// substeps no longer than `max_step`. The first grid point is the initial time.
pub fn integrate_on_grid<V: VectorField + ?Sized>(
    field: &V,
    y0: &[f64],
    grid: &TimeGrid,
    max_step: f64,
) -> Result<Trajectory> {
    check_input(field, y0)?;
    if !(max_step > 0.0) || !max_step.is_finite() {
        return Err(Error::param("max_step", "step must be positive and finite"));
    }
    let labels = default_labels(field.dim());
    let mut out = Trajectory::with_capacity(&labels, grid.len());
    let mut y = y0.to_vec();
    let mut s = Scratch::new(y.len());
    out.push(grid[0], y.clone())?;
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ceil((b - a) / max_step * (1.0 - 1e-12)).max(1.0) as usize;
        let h = (b - a) / n as f64;
        for k in 0..n {
            let t = a + k as f64 * h;
            step_with(field, t, &mut y, h, &mut s);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationDiverged { last_valid_t: t });
            }
        }
        out.push(b, y.clone())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> FnField<impl Fn(f64, &[f64], &mut [f64])> {
        FnField::new(1, |_t, y: &[f64], dy: &mut [f64]| dy[0] = -y[0])
    }

    #[test]
    fn exponential_decay() {
        let tr = integrate_ivp(&decay(), &[1.0], 0.0, 1.0, 1e-3).unwrap();
        let y1 = tr.last_state().unwrap()[0];
        assert!((y1 - 0.367_879_441_171_442_3).abs() < 1e-9);
        assert_eq!(*tr.times().last().unwrap(), 1.0);
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn zero_field_is_constant() {
        let f = FnField::new(2, |_t, _y: &[f64], dy: &mut [f64]| dy.fill(0.0));
        let tr = integrate_ivp(&f, &[3.5, -1.0], 0.0, 2.0, 0.3).unwrap();
        assert!(tr.states().iter().all(|s| s == &[3.5, -1.0]));
        assert_eq!(*tr.times().last().unwrap(), 2.0);
    }

    #[test]
    fn order_four() {
        let exact = libm::exp(-1.0);
        let err = |h: f64| {
            let tr = integrate_ivp(&decay(), &[1.0], 0.0, 1.0, h).unwrap();
            (tr.last_state().unwrap()[0] - exact).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn divergence_reports_last_time() {
        let f = FnField::new(1, |_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0]);
        match integrate_ivp(&f, &[1.0], 0.0, 2.0, 0.01) {
            Err(Error::IntegrationDiverged { last_valid_t }) => assert!(last_valid_t > 0.9 && last_valid_t < 1.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate_ivp(&decay(), &[1.0], 1.0, 0.0, 0.1).is_err());
        assert!(integrate_ivp(&decay(), &[1.0], 0.0, 1.0, 0.0).is_err());
        assert!(integrate_ivp(&decay(), &[1.0, 2.0], 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn grid_sampling_matches_exact() {
        let grid = TimeGrid::new(alloc::vec![0.0, 0.1, 0.7, 2.0]).unwrap();
        let tr = integrate_on_grid(&decay(), &[2.0], &grid, 1e-3).unwrap();
        for (t, s) in tr.times().iter().zip(tr.states()) {
            assert!((s[0] - 2.0 * libm::exp(-t)).abs() < 1e-12);
        }
    }
}
