//! Quadrature oracle layer: exact selection probabilities, derivative
//! integrals, inequality sweeps, and the non-monotonicity counterexample.

pub mod checks;
pub mod counterexample;
pub mod kernel;
pub mod quad;

pub use checks::{
    check_lambda_star_bound, check_sigma_ratio_bound, ratio_bound, stability_constant, RatioCheck,
};
pub use counterexample::{
    assess_scan, counterexample_ratio, counterexample_scan, ScanPoint, ScanVerdict,
};
pub use kernel::{
    j_i, j_i_theta, mc_selection_prob, phi_i, phi_i_theta, poisson_binomial_coefficients,
    KernelError, LambdaProfile, MAX_EXACT_SUBSET,
};
pub use quad::{integrate, integrate_segmented, Estimate, QuadratureError, QuadratureSettings};
