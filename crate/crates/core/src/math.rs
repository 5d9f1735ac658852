//! Thin wrappers over `libm` so the rest of the crate reads like std code.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// `(1 - e^{-k t}) / k`, continuous through `k = 0` where it equals `t`.
///
/// Shows up in every two-exponential closed form whose generic expression
/// divides by a rate difference.
pub fn relax(k: f64, t: f64) -> f64 {
    let x = k * t;
    if abs(x) < 1e-8 {
        t * (1.0 - 0.5 * x + x * x / 6.0)
    } else {
        -expm1(-x) / k
    }
}

/// `u + ln(1 - u)` without cancellation for small `u`.
pub fn u_plus_ln_1m(u: f64) -> f64 {
    if abs(u) < 0.05 {
        // -(u^2/2 + u^3/3 + ...)
        let mut term = u * u;
        let mut sum = 0.0;
        let mut k = 2.0;
        while k < 60.0 {
            let c = term / k;
            sum += c;
            if abs(c) <= 1e-18 * abs(sum) {
                break;
            }
            term *= u;
            k += 1.0;
        }
        -sum
    } else {
        u + ln_1p(-u)
    }
}

/// `ln(1 - u) + u / (1 - u)` without cancellation for small `u`.
pub fn ln_1m_plus_ratio(u: f64) -> f64 {
    if abs(u) < 0.05 {
        // sum_{k>=2} (1 - 1/k) u^k
        let mut term = u * u;
        let mut sum = 0.0;
        let mut k = 2.0;
        while k < 60.0 {
            let c = term * (1.0 - 1.0 / k);
            sum += c;
            if abs(c) <= 1e-18 * abs(sum) {
                break;
            }
            term *= u;
            k += 1.0;
        }
        sum
    } else {
        ln_1p(-u) + u / (1.0 - u)
    }
}
