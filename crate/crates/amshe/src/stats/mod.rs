//! Distributional testing utilities tuned for heavy tails: no sample means
//! of Cauchy-like quantities anywhere; acceptance works through KS
//! distances, quantiles, and characteristic-function fits.

pub mod cauchy;
pub mod ecf;
pub mod halfplane;
pub mod ks;
pub mod norms;
pub mod summary;

pub use cauchy::{cauchy_cdf, CauchyLaw};
pub use ecf::{default_lambda_grid, ecf_fit, EcfFit};
pub use halfplane::{brownian_halfplane_oracle, HalfPlaneSample, DEFAULT_STEP_CAP};
pub use ks::{ks_distance, ks_null_quantile, ks_two_sample, ks_two_sample_null_quantile};
pub use norms::{weight_at, weighted_lp_norm};
pub use summary::{
    fractional_moment, lognormal_subcritical_check, pairwise_sum, quantile_type7, robust_summary,
    tail_log_slope, LognormalReport, RobustSummary,
};
