//! Shared numerical kernels: adaptive quadrature, the scaled complementary
//! error function, and complete exponential Bell polynomials.

mod bell;
mod erf;
mod quadrature;

pub use bell::{
    bell_normalized, bell_partition_reference, scaled_bell_partial_sums, BellInput, PARTITION_REFERENCE_CAP,
};
pub use erf::{erfc, erfcx, exp_times_erfc};
pub use quadrature::{integrate_finite, integrate_semi_infinite, integrate_semi_infinite_vec, QuadratureSpec};
