//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals and
//! a window-doubling driver for `[lo, ∞)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections per finite interval.
    pub max_subdivisions: usize,
    /// A semi-infinite integral stops once the newest window adds less than
    /// this fraction of the running total.
    pub tail_rel_tol: f64,
    /// Width of the first window of a semi-infinite integral.
    pub initial_window: f64,
    /// Maximum number of windows before a semi-infinite integral gives up.
    pub max_windows: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            tail_rel_tol: 1e-12,
            initial_window: 50.0,
            max_windows: 64,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.rel_tol)
            && positive(self.abs_tol)
            && positive(self.tail_rel_tol)
            && positive(self.initial_window))
        {
            return Err(Error::Domain("quadrature tolerances and window must be positive".into()));
        }
        if self.max_subdivisions < 1 || self.max_windows < 2 {
            return Err(Error::Domain("max_subdivisions must be >= 1 and max_windows >= 2".into()));
        }
        Ok(())
    }
}

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel {
    lo: f64,
    hi: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel for a vector-valued integrand. The panel error
/// is the max-norm of the Kronrod–Gauss difference.
fn gk15<F>(f: &mut F, lo: f64, hi: f64, buf: &mut [f64]) -> Panel
where
    F: FnMut(f64, &mut [f64]),
{
    let dim = buf.len();
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(center, buf);
    for k in 0..dim {
        kronrod[k] = buf[k] * WGK[7];
        gauss[k] = buf[k] * WG[3];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let mut acc = |x: f64, buf: &mut [f64], kron: &mut [f64], gau: &mut [f64]| {
            f(x, buf);
            for k in 0..dim {
                kron[k] += WGK[j] * buf[k];
                if j % 2 == 1 {
                    gau[k] += WG[j / 2] * buf[k];
                }
            }
        };
        acc(center - dx, buf, &mut kronrod, &mut gauss);
        acc(center + dx, buf, &mut kronrod, &mut gauss);
    }
    let mut error: f64 = 0.0;
    for k in 0..dim {
        kronrod[k] *= half;
        gauss[k] *= half;
        error = error.max((kronrod[k] - gauss[k]).abs());
    }
    if error.is_nan() || kronrod.iter().any(|v| !v.is_finite()) {
        error = f64::INFINITY;
    }
    Panel { lo, hi, value: kronrod, error }
}

/// Globally adaptive vector integration. Convergence is declared when the
/// summed panel errors fall below `max(abs_tol, rel_tol·max_k |I_k|)`.
fn adaptive_vec<F>(f: &mut F, lo: f64, hi: f64, dim: usize, spec: &QuadratureSpec) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim];
    let first = gk15(f, lo, hi, &mut buf);
    let mut total = first.value.clone();
    let mut total_error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    let mut subdivisions = 0;
    loop {
        let scale = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let target = spec.abs_tol.max(spec.rel_tol * scale);
        if total_error <= target {
            return Ok(total);
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Accuracy { estimate: total[0], error_bound: total_error });
        }
        let worst = heap.pop().expect("panel heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            // Panel cannot be split further in floating point.
            return Err(Error::Accuracy { estimate: total[0], error_bound: total_error });
        }
        let left = gk15(f, worst.lo, mid, &mut buf);
        let right = gk15(f, mid, worst.hi, &mut buf);
        for (k, t) in total.iter_mut().enumerate() {
            *t += left.value[k] + right.value[k] - worst.value[k];
        }
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        // Re-sum periodically so the running error does not drift.
        if subdivisions % 64 == 0 {
            total_error = heap.iter().map(|p| p.error).sum();
            for (k, t) in total.iter_mut().enumerate() {
                *t = heap.iter().map(|p| p.value[k]).sum();
            }
        }
    }
}

/// `∫_lo^hi f(x) dx` to within `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_finite<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("integration bounds must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    let mut g = |x: f64, out: &mut [f64]| out[0] = f(x);
    adaptive_vec(&mut g, lo, hi, 1, spec).map(|v| v[0])
}

/// `∫_lo^∞ f(x) dx` for an integrand that eventually decays.
///
/// Integrates over windows `[lo, lo+w]`, `[lo+w, lo+2w]`, `[lo+2w, lo+4w]`, …
/// and stops after the first window whose contribution is below
/// `tail_rel_tol` of the running total (at least two windows are always
/// evaluated).
pub fn integrate_semi_infinite<F>(mut f: F, lo: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut g = |x: f64, out: &mut [f64]| out[0] = f(x);
    integrate_semi_infinite_vec(&mut g, 1, lo, spec).map(|v| v[0])
}

/// Vector-valued form of [`integrate_semi_infinite`]: `f` writes `dim`
/// integrand components into its output slice. All components share the
/// same panels; the tail criterion uses the max-norm.
pub fn integrate_semi_infinite_vec<F>(mut f: F, dim: usize, lo: f64, spec: &QuadratureSpec) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    spec.validate()?;
    if !lo.is_finite() {
        return Err(Error::Domain(format!("lower bound must be finite, got {lo}")));
    }
    let norm = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut total = vec![0.0; dim];
    let mut start = lo;
    let mut width = spec.initial_window;
    for window in 0..spec.max_windows {
        let end = lo + width;
        let part = adaptive_vec(&mut f, start, end, dim, spec)?;
        for k in 0..dim {
            total[k] += part[k];
        }
        if window >= 1 && norm(&part) <= spec.tail_rel_tol * norm(&total) {
            return Ok(total);
        }
        start = end;
        width *= 2.0;
    }
    Err(Error::Accuracy { estimate: total[0], error_bound: f64::INFINITY })
}
