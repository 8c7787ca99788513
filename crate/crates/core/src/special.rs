//! Standard normal special functions used by the Tobit likelihood.
//!
//! Everything that can underflow is evaluated in a scaled form: below
//! `s = -5` the inverse Mills ratio comes from the Laplace continued fraction
//! for the normal tail, so `g(s)`, `s + g(s)` and `log Phi(s)` stay accurate
//! out to `s = -1e8` and beyond without ever forming `Phi(s)` itself.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use errorfunctions::RealErrorFunctions;

/// `ln(sqrt(2 pi))`
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this point the continued-fraction branch is used.
const TAIL_SWITCH: f64 = -5.0;

const CF_MAX_TERMS: usize = 500;

/// Standard normal density.
#[inline]
pub fn norm_pdf(s: f64) -> f64 {
    (-0.5 * s * s - LN_SQRT_2PI).exp()
}

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(s: f64) -> f64 {
    0.5 * libm::erfc(-s * FRAC_1_SQRT_2)
}

/// Tail of the continued fraction `1 / (t + 2 / (t + 3 / (t + ...)))`.
///
/// With `t = -s > 0` this is exactly `s + g(s)`, and `g(s) = t + K(t)`.
/// Modified Lentz evaluation; `t >= 5` converges in well under 100 terms.
fn mills_tail(t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = t;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..CF_MAX_TERMS {
        let a = (k + 1) as f64;
        d = t + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = t + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Returns `(g(s), s + g(s))`, the second computed without cancellation.
#[inline]
pub(crate) fn mills_parts(s: f64) -> (f64, f64) {
    if s < TAIL_SWITCH {
        let k = mills_tail(-s);
        (-s + k, k)
    } else {
        // phi(s) / Phi(s) = sqrt(2/pi) / erfcx(-s / sqrt(2)): one call, no exp
        let g = (2.0 / PI).sqrt() / (-s * FRAC_1_SQRT_2).erfcx();
        (g, s + g)
    }
}

/// Inverse Mills ratio `g(s) = phi(s) / Phi(s)`.
///
/// Positive and nonincreasing. Underflows to zero only where the true value
/// is below the smallest subnormal (`s > 38.5`).
#[inline]
pub fn mills_g(s: f64) -> f64 {
    mills_parts(s).0
}

/// `ln g(s)`, finite for every finite `s`.
pub fn log_mills_g(s: f64) -> f64 {
    if s < TAIL_SWITCH {
        mills_g(s).ln()
    } else {
        -0.5 * s * s - LN_SQRT_2PI - log_norm_cdf(s)
    }
}

/// `ln Phi(s)` evaluated without forming an underflowed probability.
pub fn log_norm_cdf(s: f64) -> f64 {
    if s < TAIL_SWITCH {
        -0.5 * s * s - LN_SQRT_2PI - mills_g(s).ln()
    } else if s < 0.0 {
        norm_cdf(s).ln()
    } else {
        (-0.5 * libm::erfc(s * FRAC_1_SQRT_2)).ln_1p()
    }
}

/// `h(s) = g(s) (s + g(s)) = -g'(s)`, the curvature weight of a censored
/// observation. Lies in `(0, 1)`.
#[inline]
pub fn hazard_h(s: f64) -> f64 {
    let (g, sg) = mills_parts(s);
    g * sg
}

/// Analytic `g''(s) = -h'(s) = h(s) (s + g(s)) - g(s) (1 - h(s))`.
pub fn mills_g_second_derivative(s: f64) -> f64 {
    let (g, sg) = mills_parts(s);
    let h = g * sg;
    h * sg - g * (1.0 - h)
}

/// `sqrt(2 / pi)`, the value of `g(0)`.
pub fn sqrt_2_over_pi() -> f64 {
    (2.0 / PI).sqrt()
}
