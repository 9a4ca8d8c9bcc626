//! Complete exponential Bell polynomials.
//!
//! The analytic error probabilities only need `Σ_n 𝔅_n(x)/n!`, so the main
//! entry points work with the normalized values `T_n = 𝔅_n/n!`, which obey
//!
//! ```text
//! T_0 = 1,   T_{n+1} = 1/(n+1) · Σ_{i=0}^{n} T_{n-i} · x_{i+1}/i!
//! ```
//!
//! The direct partition sum is kept as an independent reference for small `n`.

use crate::error::{Error, Result};

/// Largest order accepted by [`bell_partition_reference`].
pub const PARTITION_REFERENCE_CAP: usize = 10;

/// Arguments `[x_1, …, x_n]` of a complete Bell polynomial. Missing trailing
/// arguments are treated as zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BellInput {
    pub terms: Vec<f64>,
}

impl BellInput {
    pub fn new(terms: Vec<f64>) -> Self {
        BellInput { terms }
    }

    /// `x_v` with 1-based indexing.
    fn x(&self, v: usize) -> f64 {
        self.terms.get(v - 1).copied().unwrap_or(0.0)
    }
}

/// Returns `[T_0, …, T_{n_max}]` with `T_n = 𝔅_n(x_1..x_n)/n!`.
pub fn bell_normalized(input: &BellInput, n_max: usize) -> Result<Vec<f64>> {
    // coef[i] = x_{i+1} / i!
    let mut coef = Vec::with_capacity(n_max);
    let mut inv_fact = 1.0;
    for i in 0..n_max {
        if i > 0 {
            inv_fact /= i as f64;
        }
        coef.push(input.x(i + 1) * inv_fact);
    }

    let mut t = Vec::with_capacity(n_max + 1);
    t.push(1.0);
    for n in 0..n_max {
        let s: f64 = (0..=n).map(|i| t[n - i] * coef[i]).sum();
        let next = s / (n + 1) as f64;
        if !next.is_finite() {
            return Err(Error::Range { n: n + 1 });
        }
        t.push(next);
    }
    Ok(t)
}

/// `𝔅_n(x)` by explicit enumeration of the index vectors `(j_1, …, j_{n-w+1})`
/// with `Σ j_v = w` and `Σ v·j_v = n`, summed over `w = 1..n`.
pub fn bell_partition_reference(input: &BellInput, n: usize) -> Result<f64> {
    if n > PARTITION_REFERENCE_CAP {
        return Err(Error::UnsupportedSize { n, cap: PARTITION_REFERENCE_CAP });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let factorial = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let n_fact = factorial(n);

    let mut total = 0.0;
    for w in 1..=n {
        let len = n - w + 1;
        let mut j = vec![0usize; len];
        enumerate(&mut j, 0, w, n, &mut |j| {
            let mut term = n_fact;
            for (idx, &jv) in j.iter().enumerate() {
                let v = idx + 1;
                term /= factorial(jv);
                term *= (input.x(v) / factorial(v)).powi(jv as i32);
            }
            total += term;
        });
    }
    Ok(total)
}

/// Visits every assignment of `j[pos..]` that uses exactly `parts_left`
/// parts of total weight `weight_left`.
fn enumerate(j: &mut [usize], pos: usize, parts_left: usize, weight_left: usize, visit: &mut dyn FnMut(&[usize])) {
    if pos == j.len() {
        if parts_left == 0 && weight_left == 0 {
            visit(j);
        }
        return;
    }
    let v = pos + 1;
    for count in 0..=parts_left.min(weight_left / v) {
        j[pos] = count;
        enumerate(j, pos + 1, parts_left - count, weight_left - count * v, visit);
    }
    j[pos] = 0;
}

/// Rescaling step for [`scaled_bell_partial_sums`], roughly `e^{300}`.
const RESCALE_EXP2: i32 = 432;

/// Partial sums `S_m = e^{log_weight} · Σ_{n=0}^{m} T_n(x)` for `m = 0..=n_max`.
///
/// `scaled_terms[k-1]` must hold `x_k / k!` rather than `x_k`; arguments
/// like `∫ e^{-y} y^k` overflow long before their factorial-scaled
/// counterparts do. The recurrence runs on `e^{log_weight}·T_n` with a
/// carried power-of-two exponent, so neither a huge `Σ T_n` nor a tiny
/// `e^{log_weight}` overflows or underflows on its own.
pub fn scaled_bell_partial_sums(scaled_terms: &[f64], log_weight: f64, n_max: usize) -> Result<Vec<f64>> {
    // In the recurrence x_{i+1}/i! = (i+1) · (x_{i+1}/(i+1)!).
    let coef: Vec<f64> = (0..n_max).map(|i| (i + 1) as f64 * scaled_terms.get(i).copied().unwrap_or(0.0)).collect();

    let down = f64::powi(2.0, -RESCALE_EXP2);
    let threshold = f64::powi(2.0, RESCALE_EXP2);
    let step_ln = RESCALE_EXP2 as f64 * std::f64::consts::LN_2;

    let mut u = Vec::with_capacity(n_max + 1);
    u.push(1.0);
    let mut sum = 1.0;
    let mut carried = 0.0;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(finish(sum, carried, log_weight));

    for n in 0..n_max {
        let s: f64 = (0..=n).map(|i| u[n - i] * coef[i]).sum();
        let mut next = s / (n + 1) as f64;
        if !next.is_finite() {
            return Err(Error::Range { n: n + 1 });
        }
        if next > threshold {
            for v in u.iter_mut() {
                *v *= down;
            }
            next *= down;
            sum *= down;
            carried += step_ln;
        }
        u.push(next);
        sum += next;
        out.push(finish(sum, carried, log_weight));
    }
    Ok(out)
}

fn finish(sum: f64, carried: f64, log_weight: f64) -> f64 {
    (sum.ln() + carried + log_weight).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_orders() {
        let t = bell_normalized(&BellInput::new(vec![5.0]), 1).unwrap();
        assert_eq!(t, vec![1.0, 5.0]);
        let t = bell_normalized(&BellInput::new(vec![2.0, 3.0]), 2).unwrap();
        assert!((t[2] - 3.5).abs() < 1e-15);
        let t = bell_normalized(&BellInput::new(vec![1.0, 1.0, 1.0]), 3).unwrap();
        assert!((t[3] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn reference_small_orders() {
        assert_eq!(bell_partition_reference(&BellInput::new(vec![2.0, 3.0]), 2).unwrap(), 7.0);
        assert_eq!(bell_partition_reference(&BellInput::new(vec![1.0, 1.0, 1.0]), 3).unwrap(), 5.0);
        assert_eq!(bell_partition_reference(&BellInput::default(), 0).unwrap(), 1.0);
    }

    #[test]
    fn reference_rejects_large_order() {
        let err = bell_partition_reference(&BellInput::new(vec![1.0; 11]), 11).unwrap_err();
        assert_eq!(err, Error::UnsupportedSize { n: 11, cap: 10 });
    }

    #[test]
    fn all_ones_gives_bell_numbers() {
        // With x_v = 1 the complete Bell polynomial is the Bell number.
        let bell_numbers = [1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0, 4140.0, 21147.0, 115975.0];
        let x = BellInput::new(vec![1.0; 10]);
        for (n, &b) in bell_numbers.iter().enumerate() {
            assert_eq!(bell_partition_reference(&x, n).unwrap(), b);
        }
    }

    #[test]
    fn zero_arguments() {
        let t = bell_normalized(&BellInput::new(vec![0.0; 6]), 6).unwrap();
        assert_eq!(t[0], 1.0);
        assert!(t[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn overflow_names_first_offending_order() {
        let err = bell_normalized(&BellInput::new(vec![1e200, 0.0, 0.0]), 3).unwrap_err();
        assert_eq!(err, Error::Range { n: 2 });
    }

    #[test]
    fn poisson_cdf_from_single_argument() {
        // Only x_1 = m nonzero: e^{-m} Σ T_n = Poisson(m) CDF.
        let m = 50.0;
        let sums = scaled_bell_partial_sums(&[m], -m, 120).unwrap();
        let mut pmf = (-m).exp();
        let mut cdf = pmf;
        for (n, &s) in sums.iter().enumerate() {
            if n > 0 {
                pmf *= m / n as f64;
                cdf += pmf;
            }
            assert!((s - cdf).abs() < 1e-13, "n={n}: {s} vs {cdf}");
        }
    }

    #[test]
    fn scaled_sums_survive_huge_weights() {
        // Poisson(2000) mass up to its mean is about one half; e^{2000} alone overflows.
        let m = 2000.0;
        let sums = scaled_bell_partial_sums(&[m], -m, 2000).unwrap();
        let median_mass = sums[2000];
        assert!((median_mass - 0.505_946_700_451_783_7).abs() < 1e-11, "{median_mass}");
        assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    }

    proptest! {
        #[test]
        fn recurrence_matches_partition_sum(x in prop::collection::vec(0.0f64..3.0, 8)) {
            let input = BellInput::new(x);
            let t = bell_normalized(&input, 8).unwrap();
            let mut fact = 1.0;
            for (n, tn) in t.iter().enumerate() {
                if n > 0 { fact *= n as f64; }
                let reference = bell_partition_reference(&input, n).unwrap();
                let rel = (reference - fact * tn).abs() / reference.abs().max(1e-300);
                prop_assert!(rel <= 1e-10 || reference == 0.0, "n={} rel={}", n, rel);
            }
        }

        #[test]
        fn homogeneity(x in prop::collection::vec(-2.0f64..2.0, 6)) {
            let c: f64 = 2.0;
            let scaled: Vec<f64> = x.iter().enumerate().map(|(i, v)| c.powi(i as i32 + 1) * v).collect();
            let t = bell_normalized(&BellInput::new(x), 6).unwrap();
            let ts = bell_normalized(&BellInput::new(scaled), 6).unwrap();
            for n in 0..=6 {
                let want = c.powi(n as i32) * t[n];
                prop_assert!((ts[n] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }

        #[test]
        fn scaled_sums_match_plain_recurrence(x in prop::collection::vec(0.0f64..2.0, 10), w in -5.0f64..0.0) {
            let input = BellInput::new(x.clone());
            let t = bell_normalized(&input, 10).unwrap();
            let mut fact = 1.0;
            let scaled: Vec<f64> = x.iter().enumerate().map(|(i, v)| { fact *= (i + 1) as f64; v / fact }).collect();
            let sums = scaled_bell_partial_sums(&scaled, w, 10).unwrap();
            let mut acc = 0.0;
            for n in 0..=10 {
                acc += t[n];
                let want = w.exp() * acc;
                prop_assert!((sums[n] - want).abs() <= 1e-12 * want);
            }
        }
    }
}
