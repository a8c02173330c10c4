//! Classical electromagnetic self-force on a uniformly charged rigid sphere
//! that is slowly displaced by a small amount and then returned to rest.
//!
//! Units have `c = 1`, so times and lengths share a unit. The displacement is
//! along `x` and the theory is first order in it; every force is linear in the
//! trajectory amplitude.
//!
//! * [`geometry`]: the ball, the kernel `I(s)`, the radial kernel `K`, and the
//!   pair-distance moments.
//! * [`trajectory`]: displacement profiles with analytic derivatives.
//! * [`analytic`]: the weight function `f`, the geometric factor `A_xx`, the
//!   response kernel `g`, and the Taylor-series force expressions.
//! * [`oracle`]: Monte-Carlo and quadrature ground truth.
//! * [`verify`]: the end-to-end check suite behind `selfforce verify`.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod quadrature;
pub mod sum;
pub mod trajectory;
pub mod verify;

pub use analytic::{
    avg_force_series, eval_axx, eval_f, force_at_time_series, force_current_derivatives, force_moment_form,
    kernel_g, steplike_avg_force, Component, ForceResult, ImpulseSmoothKernel, SeriesOptions,
};
pub use error::{Error, Result};
pub use geometry::{eval_i, eval_k, pair_moment, KernelValue, SphereBody};
pub use trajectory::{BrConditionReport, Trajectory, TrajectoryKind};

/// Locale-independent number formatting with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}
