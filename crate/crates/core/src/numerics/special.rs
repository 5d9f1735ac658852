use crate::math::{abs, exp};

/// Error function `(2/√π) ∫_0^x e^{-u²} du`.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function `1 - erf(x)`, accurate in the tail.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `e^{x²} erfc(x)`.
///
/// Finite for all finite `x ≥ -26`; used where `erfc` underflows but the
/// product with a growing exponential does not.
pub fn erfcx(x: f64) -> f64 {
    if x < 26.0 {
        return exp(x * x) * erfc(x);
    }
    // Continued fraction: erfcx(x) = (1/√π) / (x + 1/2 / (x + 1 / (x + 3/2 / (x + ...))))
    let mut frac = x;
    for k in (1..=40).rev() {
        frac = x + 0.5 * k as f64 / frac;
    }
    let v = core::f64::consts::FRAC_2_SQRT_PI * 0.5 / frac;
    if abs(v).is_finite() {
        v
    } else {
        0.0
    }
}
