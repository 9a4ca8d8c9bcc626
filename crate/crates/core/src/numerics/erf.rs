//! Overflow-safe products of exponentials and complementary error functions.

use std::f64::consts::PI;

/// Below this argument `erfcx` is evaluated as `exp(x²)·erfc(x)`; above it
/// the Laplace continued fraction converges in a few dozen terms.
const CONTINUED_FRACTION_FROM: f64 = 6.0;

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `erfcx(x) = exp(x²)·erfc(x)`.
///
/// Finite for every finite non-negative `x`; for `x < -26.6` the true value
/// exceeds the largest double and `+∞` is returned.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 * exp_square(-x) - erfcx(-x);
    }
    if x < CONTINUED_FRACTION_FROM {
        exp_square(x) * libm::erfc(x)
    } else if x.is_infinite() {
        0.0
    } else {
        continued_fraction(x)
    }
}

/// `exp(x²)` with the rounding error of `x²` folded back in.
fn exp_square(x: f64) -> f64 {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    libm::exp(hi) * (1.0 + lo)
}

/// erfcx(x) = (1/√π) · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz.
fn continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (PI.sqrt() * f)
}

/// Returns `e^b · erfc(c)` without forming either factor when it would
/// overflow or underflow on its own.
///
/// For `c ≥ 0` this is `erfcx(c)·e^{b−c²}` with the exponent formed by a fused
/// multiply-add; for `c < 0`, `erfc(c) ∈ (1, 2]` and the plain product is
/// already safe. The result may legitimately underflow to zero or overflow
/// when `b` itself is huge.
pub fn exp_times_erfc(b: f64, c: f64) -> f64 {
    if c >= 0.0 {
        if c.is_infinite() {
            return 0.0;
        }
        erfcx(c) * libm::exp((-c).mul_add(c, b))
    } else {
        libm::exp(b) * libm::erfc(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from 40-digit mpmath: exp(x^2)*erfc(x).
    const ERFCX_TABLE: &[(f64, f64)] = &[
        (0.0, 1.0),
        (0.5, 0.615_690_344_192_925_874_9),
        (1.0, 0.427_583_576_155_807_004_4),
        (3.0, 0.179_001_151_181_389_950_4),
        (5.99, 0.092_927_413_163_163_411_44),
        (6.01, 0.092_626_205_328_484_122_06),
        (10.0, 0.056_140_992_743_822_585_86),
        (26.0, 0.021_683_584_850_562_906_62),
        (100.0, 0.005_641_613_782_989_432_904),
        (-1.0, 5.008_980_080_762_283_466),
        (-3.0, 16_205.988_853_999_586_63),
    ];

    #[test]
    fn erfcx_matches_high_precision_table() {
        for &(x, want) in ERFCX_TABLE {
            let got = erfcx(x);
            assert!(((got - want) / want).abs() < 2e-15, "erfcx({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn erfcx_is_continuous_across_branch_switch() {
        let below = erfcx(CONTINUED_FRACTION_FROM - 1e-12);
        let above = erfcx(CONTINUED_FRACTION_FROM);
        assert!(((below - above) / above).abs() < 1e-12);
    }

    #[test]
    fn exp_times_erfc_trivial_points() {
        assert_eq!(exp_times_erfc(0.0, 0.0), 1.0);
        assert_eq!(exp_times_erfc(0.0, -40.0), 2.0);
        assert_eq!(exp_times_erfc(0.0, f64::NEG_INFINITY), 2.0);
        assert_eq!(exp_times_erfc(3.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn exp_times_erfc_cancels_huge_exponents() {
        let got = exp_times_erfc(1e4, 100.0);
        assert!(((got - 0.005_641_613_782_989_433) / got).abs() < 1e-14);
    }

    #[test]
    fn exp_times_erfc_agrees_with_naive_product() {
        let mut worst: f64 = 0.0;
        for i in 0..=60 {
            let b = -30.0 + i as f64;
            for j in 0..=100 {
                let c = -5.0 + 0.1 * j as f64;
                let naive = b.exp() * libm::erfc(c);
                let got = exp_times_erfc(b, c);
                worst = worst.max(((got - naive) / naive).abs());
            }
        }
        assert!(worst < 1e-12, "worst relative gap {worst:e}");
    }
}
