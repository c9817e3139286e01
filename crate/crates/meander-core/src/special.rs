//! Scalar special functions with stable tail behaviour.
//!
//! Everything downstream leans on three primitives:
//!
//! * `erfcx(x) = exp(x^2) * erfc(x)`, the scaled complementary error
//!   function, which stays O(1/x) in the right tail where `erfc` underflows;
//! * `exp_scaled_norm_cdf(z) = exp(z^2/2) * Phi(z)`, the Mills-ratio
//!   companion used by the half-Gaussian exponential integrals;
//! * `rayleigh_tilt(z) = 1 + z sqrt(2 pi) exp(z^2/2) Phi(z)`, the
//!   normalizing constant of an exponentially tilted Rayleigh law.
//!
//! Each has a log-space twin so callers can form ratios of terms that
//! individually overflow `f64`.

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF via `erfc`, accurate in both tails down to the
/// underflow threshold near -38.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Scaled complementary error function `exp(x^2) erfc(x)`.
///
/// Finite and well-scaled for all x >= -26.6; below that `exp(x^2)`
/// overflows and +inf is returned, matching the true limit.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 25.0 {
        // Asymptotic series 1/(x sqrt(pi)) * sum (-1)^k (2k-1)!! / (2x^2)^k.
        // At x = 25 the eighth term is below 3e-17, so truncation error is
        // negligible relative to f64 precision.
        let q = 0.5 / (x * x);
        let s = 1.0
            + q * (-1.0
                + q * (3.0
                    + q * (-15.0
                        + q * (105.0 + q * (-945.0 + q * (10395.0 + q * (-135135.0)))))));
        return s / (x * std::f64::consts::PI.sqrt());
    }
    if x >= 0.0 {
        // exp(x^2) stays below overflow for x < 26.6; relative error of the
        // product is ~x^2 * eps, under 7e-14 at the branch point.
        return (x * x).exp() * libm::erfc(x);
    }
    // Reflection erfcx(-x) = 2 exp(x^2) - erfcx(x). The first term dominates
    // for x <= -1, and for -1 < x < 0 both terms are O(1) with the same sign
    // structure, so no catastrophic cancellation occurs.
    2.0 * (x * x).exp() - erfcx(-x)
}

/// `exp(z^2/2) * Phi(z)`. Overflows to +inf for z above ~37.6.
#[inline]
pub fn exp_scaled_norm_cdf(z: f64) -> f64 {
    0.5 * erfcx(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Logarithm of `exp_scaled_norm_cdf`, finite for every finite z.
pub fn ln_exp_scaled_norm_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        // erfcx of a non-negative argument is in (0, 1]; no overflow.
        (0.5 * erfcx(-z * std::f64::consts::FRAC_1_SQRT_2)).ln()
    } else {
        0.5 * z * z + ln_norm_cdf(z)
    }
}

/// `ln Phi(x)`, stable in the left tail where `Phi` underflows.
pub fn ln_norm_cdf(x: f64) -> f64 {
    if x < -1.0 {
        // Phi(x) = 0.5 exp(-x^2/2) erfcx(-x/sqrt(2)).
        (0.5 * erfcx(-x * std::f64::consts::FRAC_1_SQRT_2)).ln() - 0.5 * x * x
    } else if x <= 1.0 {
        norm_cdf(x).ln()
    } else {
        // ln(1 - Phi(-x)) without forming the difference.
        (-norm_cdf(-x)).ln_1p()
    }
}

/// `Phi(hi) - Phi(lo)` for `lo <= hi`, reflected into whichever tail keeps
/// the subtraction between numbers of comparable (small) magnitude.
pub fn norm_cdf_diff(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    let d = if lo >= 0.0 {
        norm_cdf(-lo) - norm_cdf(-hi)
    } else if hi <= 0.0 {
        norm_cdf(hi) - norm_cdf(lo)
    } else {
        norm_cdf(hi) - norm_cdf(lo)
    };
    d.max(0.0)
}

/// `ln(Phi(hi) - Phi(lo))` for `lo <= hi`, usable when both arguments sit
/// deep in the same tail and the difference underflows.
pub fn ln_norm_cdf_diff(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if lo >= 0.0 {
        let a = ln_norm_cdf(-lo);
        let b = ln_norm_cdf(-hi);
        a + ln1mexp(b - a)
    } else if hi <= 0.0 {
        let a = ln_norm_cdf(hi);
        let b = ln_norm_cdf(lo);
        a + ln1mexp(b - a)
    } else {
        norm_cdf_diff(lo, hi).ln()
    }
}

/// `ln(1 - exp(a))` for `a <= 0`.
pub fn ln1mexp(a: f64) -> f64 {
    debug_assert!(a <= 0.0);
    if a > -std::f64::consts::LN_2 {
        (-libm::expm1(a)).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// Normalizer of the tilted Rayleigh density:
/// `R(z) = 1 + z sqrt(2 pi) exp(z^2/2) Phi(z)`,
/// so that `integral_0^inf w exp(-w^2/2 + z w) dw = R(z)`.
///
/// Strictly positive and decreasing-to-zero as z -> -inf (R ~ 1/z^2);
/// overflows to +inf for z >= 37 where `exp(z^2/2)` exceeds f64 range
/// (use [`ln_rayleigh_tilt`] there).
pub fn rayleigh_tilt(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z <= -12.0 {
        // R(z) = z^-2 (1 - 3 z^-2 + 15 z^-4 - 105 z^-6 + ...), the
        // asymptotic expansion of the Mills ratio derivative. Direct
        // evaluation loses all precision here because the two O(1) terms
        // cancel to O(z^-2).
        let v = 1.0 / (z * z);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut coef = 1.0;
        for k in 1..=20 {
            coef *= -(2.0 * k as f64 + 1.0);
            let prev = term.abs();
            term = coef * v.powi(k);
            if term.abs() > prev {
                break; // divergent tail of the asymptotic series
            }
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return v * sum;
    }
    if z >= 37.0 {
        return f64::INFINITY;
    }
    1.0 + z * SQRT_2PI * exp_scaled_norm_cdf(z)
}

/// `ln R(z)`, finite for every finite z.
pub fn ln_rayleigh_tilt(z: f64) -> f64 {
    if z < 37.0 {
        rayleigh_tilt(z).ln()
    } else {
        // R(z) = sqrt(2 pi) exp(z^2/2) (phi(z) + z Phi(z)); the parenthesis
        // is z to within 1e-300 at this magnitude.
        LN_SQRT_2PI + 0.5 * z * z + (z * norm_cdf(z) + norm_pdf(z)).ln()
    }
}
