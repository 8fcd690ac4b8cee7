//! Numerical foundations: special functions, adaptive quadrature, log-log
//! slope fitting and dB-domain interpolation.
//!
//! All operations are pure functions of their inputs and safe to call
//! concurrently.

pub mod fit;
pub mod quad;
pub mod special;

pub use fit::{crossing_snr, loglog_slope, FitError, SlopeFit};
pub use quad::{integrate, Integral, QuadError, QuadratureSpec};
pub use special::{
    bessel_i0_scaled, bessel_i1_scaled, bessel_k, gamma_fn, ln_gamma,
    lower_incomplete_gamma_regularized, marcum_q1, normal_quantile, q_fn, student_t_quantile,
    upper_incomplete_gamma_regularized, EULER_GAMMA,
};

/// Convert average SNR in dB to linear.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert linear average SNR to dB.
#[inline]
pub fn linear_to_db(rho: f64) -> f64 {
    10.0 * rho.log10()
}
