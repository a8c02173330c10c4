//! Independent numerical ground truth for the closed forms.
//!
//! Two routes, neither of which reuses the series machinery:
//! Monte-Carlo sampling of point pairs in the ball (pair-distance density,
//! its moments, and the kernel `I` reconstructed from it), and adaptive
//! quadrature of the averaged and convolved force integrals.

mod monte_carlo;
mod quadrature_routes;
mod report;

pub use monte_carlo::{
    default_bin_count, mc_pair_moment, mc_pair_pdf, oracle_i, oracle_i_against, McConfig, PairHistogram,
    BLOCK_SIZE, MOMENT_STRATA,
};
pub use quadrature_routes::{conv_force, quad_avg_force, quad_axx, time_average_of_series, OracleForce};
pub use report::{OracleReport, ReportPoint, STANDARD_ERROR_MULTIPLIER};
