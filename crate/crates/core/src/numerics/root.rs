use crate::error::{Error, Result};
use crate::math::{abs, sqrt};

const MAX_ITER: usize = 400;

/// Root of `g` inside `[lo, hi]`.
///
/// Newton steps with a centred finite-difference slope, falling back to
/// bisection whenever a step would leave the current bracket or fails to
/// shrink it fast enough. The returned point always lies in `[lo, hi]`.
pub fn solve_root<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param("bracket", "need finite lo <= hi"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "tolerance must be positive"));
    }
    let g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if !(g_lo * g_hi < 0.0) {
        return Err(Error::BracketInvalid { lo, hi, g_lo, g_hi });
    }

    // Orient so that g(a) < 0 < g(b).
    let (mut a, mut b) = if g_lo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = 0.5 * (lo + hi);
    let mut fx = g(x);
    let mut prev_width = abs(hi - lo);

    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let width = abs(b - a);
        if width <= tol {
            return Ok(0.5 * (a + b));
        }
        let (blo, bhi) = if a < b { (a, b) } else { (b, a) };

        let h = (1e-7 * abs(x)).max(1e-7).min(0.25 * width);
        let xp = (x + h).min(bhi);
        let xm = (x - h).max(blo);
        let slope = if xp > xm { (g(xp) - g(xm)) / (xp - xm) } else { 0.0 };

        let newton = if slope != 0.0 && slope.is_finite() {
            let cand = x - fx / slope;
            (cand > blo && cand < bhi).then_some(cand)
        } else {
            None
        };
        let next = match newton {
            // Insist the bracket halves at least every other iteration.
            Some(c) if width <= 0.5 * prev_width || abs(c - x) < 0.5 * width => c,
            _ => 0.5 * (blo + bhi),
        };
        prev_width = width;
        if abs(next - x) <= 0.25 * tol {
            // Converged step; confirm the sign change sits within tol.
            let probe = if next > x { (next + 0.5 * tol).min(bhi) } else { (next - 0.5 * tol).max(blo) };
            let fp = g(probe);
            if fp == 0.0 || (fp < 0.0) != (g(next) < 0.0) {
                return Ok(next);
            }
        }
        x = next;
        fx = g(x);
    }
    Ok(x)
}

/// Maximiser of a unimodal `g` on `[lo, hi]` by golden-section search.
/// Returns `(x, g(x))`.
pub fn golden_max<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param("bracket", "need finite lo <= hi"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "tolerance must be positive"));
    }
    let inv_phi = 0.5 * (sqrt(5.0) - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    let mut best = (x, g(x));
    for cand in [lo, hi] {
        let v = g(cand);
        if v > best.1 {
            best = (cand, v);
        }
    }
    Ok(best)
}
