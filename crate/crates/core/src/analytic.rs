//! Closed-form self-force quantities.
//!
//! Naming: `kappa_t` is the displacement duration in units of the radius
//! (`T / R`), `kappa_t2` the observation time in units of the radius
//! (`t2 / R`). Internally everything is evaluated with `R = 1` on the
//! unit-amplitude trajectory shape and rescaled at the end:
//! `F = rho_c^2 V^2 D_x * phi_unit / R^3`.
//!
//! Each result is split into the electrostatic attraction to a stationary
//! neutralizing body and the proper self-force; [`Component`] selects which
//! part (or their sum) is reported.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::geometry::{pair_moment, SphereBody};
use crate::sum::NeumaierSum;
use crate::trajectory::Trajectory;

/// Which part of the force to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    /// Self-force plus the attraction to the neutralizing body.
    Total,
    /// Proper self-force (radiation reaction) with the neutralizer absent.
    SelfForce,
    /// Electrostatic attraction to the neutralizing body alone.
    Electrostatic,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Total, Component::SelfForce, Component::Electrostatic];

    /// Weights applied to the (electrostatic, self) parts.
    fn weights(self) -> (f64, f64) {
        match self {
            Component::Total => (1.0, 1.0),
            Component::SelfForce => (0.0, 1.0),
            Component::Electrostatic => (1.0, 0.0),
        }
    }

    fn combine(self, electrostatic: f64, self_part: f64) -> f64 {
        match self {
            Component::Total => electrostatic + self_part,
            Component::SelfForce => self_part,
            Component::Electrostatic => electrostatic,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Total => "total",
            Component::SelfForce => "self",
            Component::Electrostatic => "electrostatic",
        })
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(Component::Total),
            "self" => Ok(Component::SelfForce),
            "electrostatic" => Ok(Component::Electrostatic),
            other => Err(Error::Config(format!(
                "unknown component '{other}' (expected total, self or electrostatic)"
            ))),
        }
    }
}

/// Truncation control for the Taylor-series routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Stop once `CONVERGENCE_WINDOW` consecutive terms are below `tol * |partial sum|`.
    pub tol: f64,
    /// Maximum number of terms.
    pub n_max: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { tol: 1e-10, n_max: 80 }
    }
}

/// A force value with its component attribution and truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceResult {
    /// Force in units where c = 1.
    pub value: f64,
    /// `F / (rho_c^2 V^2 D_x)`, units `1 / length^3`.
    pub normalized: f64,
    pub component: Component,
    pub series_terms_used: usize,
    pub truncation_estimate: f64,
}

impl ForceResult {
    fn from_unit(body: &SphereBody, amplitude: f64, component: Component, phi_unit: f64, terms: usize, estimate: f64) -> Self {
        let r3 = body.radius().powi(3);
        Self {
            value: body.force_scale() * amplitude * phi_unit / r3,
            normalized: phi_unit / r3,
            component,
            series_terms_used: terms,
            truncation_estimate: estimate,
        }
    }

    fn zero(component: Component) -> Self {
        Self {
            value: 0.0,
            normalized: 0.0,
            component,
            series_terms_used: 0,
            truncation_estimate: 0.0,
        }
    }
}

/// Series with every term split into (electrostatic, self) parts.
struct SplitSum {
    electrostatic: f64,
    self_part: f64,
    terms: usize,
    estimate: f64,
}

/// Consecutive negligible terms required before a series is declared
/// converged. Two would be enough against parity zeros alone, but a bracket
/// that vanishes at one order next to two parity zeros gives three in a row.
pub const CONVERGENCE_WINDOW: usize = 4;

/// Accumulate `term(n)` until [`CONVERGENCE_WINDOW`] consecutive weighted
/// terms fall below `tol * |weighted partial sum|`, or fail after `n_max`
/// terms.
fn sum_split_series<F>(component: Component, opts: &SeriesOptions, mut term: F) -> Result<SplitSum>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    let (we, ws) = component.weights();
    let mut electrostatic = NeumaierSum::new();
    let mut self_part = NeumaierSum::new();
    let mut weighted = NeumaierSum::new();
    let mut recent = [f64::INFINITY; CONVERGENCE_WINDOW];
    let n_max = opts.n_max.max(1);
    for n in 0..n_max {
        let (e, s) = term(n)?;
        electrostatic.add(e);
        self_part.add(s);
        let current = we * e + ws * s;
        weighted.add(current);
        recent[n % CONVERGENCE_WINDOW] = current.abs();
        let sum = weighted.value().abs();
        if recent.iter().all(|t| *t < opts.tol * sum) {
            return Ok(SplitSum {
                electrostatic: electrostatic.value(),
                self_part: self_part.value(),
                terms: n + 1,
                estimate: recent.iter().sum::<f64>() / sum,
            });
        }
    }
    // out of terms: the most recent terms are the truncation estimate
    let sum = weighted.value().abs();
    let tail: f64 = recent.iter().filter(|t| t.is_finite()).sum();
    let estimate = if tail == 0.0 { 0.0 } else { tail / sum };
    if estimate > opts.tol || estimate.is_nan() {
        return Err(Error::NonConvergence {
            terms: n_max,
            estimate,
            tol: opts.tol,
        });
    }
    Ok(SplitSum {
        electrostatic: electrostatic.value(),
        self_part: self_part.value(),
        terms: n_max,
        estimate,
    })
}

/// `R^n D^(n)(0+)` of the unit-amplitude shape.
fn scaled_shape_derivative_at_zero(traj: &Trajectory, n: usize, radius: f64) -> Result<f64> {
    let d = traj.shape_derivative_at_zero_plus(n)?;
    Ok(if d == 0.0 { 0.0 } else { d * radius.powi(n as i32) })
}

fn scaled_shape_derivative_at(traj: &Trajectory, t: f64, n: usize, radius: f64) -> Result<f64> {
    let d = traj.shape_derivative_at(t, n)?;
    Ok(if d == 0.0 { 0.0 } else { d * radius.powi(n as i32) })
}

/// Weight function of the time-averaged force at `0 < t1 < T`:
/// `-1/R^3 - (1/(2R^3)) (2 - chi)(2 - 2chi - chi^2) theta(2 - chi)`, `chi = (T - t1)/R`.
pub fn eval_f(t1: f64, duration: f64, body: &SphereBody, component: Component) -> Result<f64> {
    if !(t1 > 0.0 && t1 < duration) {
        return Err(domain(format!("eval_f needs 0 < t1 < T, got t1 = {t1}, T = {duration}")));
    }
    let r = body.radius();
    let (e, s) = f_unit((duration - t1) / r);
    Ok(component.combine(e, s) / (r * r * r))
}

/// `(electrostatic, self)` parts of `f` with `R = 1`, as a function of `chi`.
pub(crate) fn f_unit(chi: f64) -> (f64, f64) {
    let self_part = if chi <= 2.0 {
        -0.5 * (2.0 - chi) * (2.0 - 2.0 * chi - chi * chi)
    } else {
        0.0
    };
    (-1.0, self_part)
}

/// Geometric factor for two coinciding spherical space-time regions of
/// duration `T`:
/// `-1/(R^3 T) - (1/(8 R^4 kappa)) (4 + kappa)(2 - kappa)^2 theta(2 - kappa)`.
pub fn eval_axx(duration: f64, body: &SphereBody, component: Component) -> Result<f64> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(domain(format!("geometric factor needs T > 0, got {duration}")));
    }
    let r = body.radius();
    let kappa_t = duration / r;
    let electrostatic = -1.0 / (r.powi(3) * duration);
    let self_part = if kappa_t < 2.0 {
        -(4.0 + kappa_t) * (2.0 - kappa_t).powi(2) / (8.0 * r.powi(4) * kappa_t)
    } else {
        0.0
    };
    Ok(component.combine(electrostatic, self_part))
}

/// Self-force response kernel `g(t) = c delta(t) + smooth(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseSmoothKernel {
    radius: f64,
    impulse_coefficient: f64,
    smooth_weight: f64,
}

impl ImpulseSmoothKernel {
    /// Coefficient of `delta(t)`, units `1 / length^3`.
    pub fn impulse_coefficient(&self) -> f64 {
        self.impulse_coefficient
    }

    /// `(3/(2R^4)) (2 - xi^2)` on `0 <= xi = t/R <= 2`, zero elsewhere.
    pub fn smooth(&self, t: f64) -> f64 {
        let r = self.radius;
        let xi = t / r;
        if self.smooth_weight == 0.0 || !(0.0..=2.0).contains(&xi) {
            return 0.0;
        }
        self.smooth_weight * 1.5 * (2.0 - xi * xi) / r.powi(4)
    }

    /// Right end of the smooth part's support, `2R`.
    pub fn support_end(&self) -> f64 {
        2.0 * self.radius
    }
}

/// The kernel `g` for the requested component. The neutralizer contributes
/// one third of the impulse and nothing to the smooth part.
pub fn kernel_g(body: &SphereBody, component: Component) -> ImpulseSmoothKernel {
    let r3 = body.radius().powi(3);
    let (impulse, smooth_weight) = match component {
        Component::Total => (-3.0, 1.0),
        Component::SelfForce => (-2.0, 1.0),
        Component::Electrostatic => (-1.0, 0.0),
    };
    ImpulseSmoothKernel {
        radius: body.radius(),
        impulse_coefficient: impulse / r3,
        smooth_weight,
    }
}

/// Time-averaged force for a steplike displacement, `rho_c^2 V^2 T D_x A_xx(T)`.
pub fn steplike_avg_force(duration: f64, amplitude: f64, body: &SphereBody, component: Component) -> Result<ForceResult> {
    let axx = eval_axx(duration, body, component)?;
    let r3 = body.radius().powi(3);
    Ok(ForceResult::from_unit(body, amplitude, component, duration * axx * r3, 1, 0.0))
}

/// Time-averaged force over `[0, T]` as a Taylor series in the derivatives
/// `D^(n)(0+)`.
///
/// Term `n`, with `k = T/R`:
///
/// ```text
/// 3/k * R^n D^(n)(0+)/(n+4)! * { [k^2 + 2(n+2)k + n(n+3)](k-2)^(n+2) theta(k-2)
///     - k^(n+4) + (n+3)(n+4)k^(n+2) - (n+2)(n+3)(n+4)k^(n+1) }
/// ```
///
/// The neutralizer owns one third of the last term.
pub fn avg_force_series(traj: &Trajectory, body: &SphereBody, component: Component, opts: &SeriesOptions) -> Result<ForceResult> {
    let r = body.radius();
    let kappa_t = traj.duration() / r;
    let beyond = kappa_t > 2.0;
    let shift = kappa_t - 2.0;

    // k^(n+1)/(n+4)! and (k-2)^(n+2)/(n+4)!, advanced by one factor per term
    let mut power = kappa_t / 24.0;
    let mut shifted = if beyond { shift * shift / 24.0 } else { 0.0 };

    let split = sum_split_series(component, opts, |n| {
        let delta = scaled_shape_derivative_at_zero(traj, n, r)?;
        let nf = n as f64;
        let cubic = (nf + 2.0) * (nf + 3.0) * (nf + 4.0);
        let (e, s) = if delta == 0.0 {
            (0.0, 0.0)
        } else {
            let mut acc = NeumaierSum::new();
            if beyond {
                acc.add((kappa_t * kappa_t + 2.0 * (nf + 2.0) * kappa_t + nf * (nf + 3.0)) * shifted);
            }
            acc.add(-kappa_t.powi(3) * power);
            acc.add((nf + 3.0) * (nf + 4.0) * kappa_t * power);
            acc.add(-2.0 / 3.0 * cubic * power);
            (-cubic * power / 3.0 * delta, acc.value() * delta)
        };
        power *= kappa_t / (nf + 5.0);
        shifted *= shift / (nf + 5.0);
        Ok((e, s))
    })?;

    let scale = 3.0 / kappa_t;
    let phi_unit = component.combine(scale * split.electrostatic, scale * split.self_part);
    Ok(ForceResult::from_unit(body, traj.amplitude(), component, phi_unit, split.terms, split.estimate))
}

/// Instantaneous force at time `t2` from the Taylor series in `D^(n)(0+)`.
///
/// With `k = t2/R` and `x = k - T/R`:
/// `F = -3 D(t2) + 3 theta(t2) sum_n R^n D^(n)(0+)/(n+3)! [a_n theta(k-2)
///      + b_n k^(n+1) theta(-x) + c_n theta(x)]` (times `rho_c^2 V^2 / R^3`),
/// where
/// `a_n = [k^2 + 2(n+1)k + n^2 + n - 2](k-2)^(n+1)`, `b_n = n^2 + 5n + 6 - k^2`,
/// `c_n = (T/R)^(n+1) [b_n - (n+1) x k - (n^2 + 3n + 2) x^2 / 2]`.
/// The neutralizer owns one third of the `-3 D(t2)` term. The force is
/// exactly zero for `t2 < 0` and `t2 >= T + 2R`.
pub fn force_at_time_series(
    traj: &Trajectory,
    t2: f64,
    body: &SphereBody,
    component: Component,
    opts: &SeriesOptions,
) -> Result<ForceResult> {
    if !t2.is_finite() {
        return Err(domain(format!("observation time must be finite, got {t2}")));
    }
    let r = body.radius();
    if t2 < 0.0 || t2 >= traj.duration() + 2.0 * r {
        return Ok(ForceResult::zero(component));
    }
    let kappa_t2 = t2 / r;
    let kappa_t = traj.duration() / r;
    let xi = kappa_t2 - kappa_t;
    let past_support_start = kappa_t2 >= 2.0;
    let before_end = xi < 0.0;

    let shape_now = traj.shape_value(t2);
    let electrostatic = -shape_now;
    let impulse_self = -2.0 * shape_now;

    let series = if component == Component::Electrostatic {
        SplitSum {
            electrostatic: 0.0,
            self_part: 0.0,
            terms: 0,
            estimate: 0.0,
        }
    } else {
        // (k-2)^(n+1)/(n+3)!, k^(n+1)/(n+3)!, (T/R)^(n+1)/(n+3)!
        let mut lagged = if past_support_start { (kappa_t2 - 2.0) / 6.0 } else { 0.0 };
        let mut current = kappa_t2 / 6.0;
        let mut window = kappa_t / 6.0;
        sum_split_series(Component::SelfForce, opts, |n| {
            let delta = scaled_shape_derivative_at_zero(traj, n, r)?;
            let nf = n as f64;
            let s = if delta == 0.0 {
                0.0
            } else {
                let b = nf * nf + 5.0 * nf + 6.0 - kappa_t2 * kappa_t2;
                let mut acc = NeumaierSum::new();
                if past_support_start {
                    let a = kappa_t2 * kappa_t2 + 2.0 * (nf + 1.0) * kappa_t2 + nf * nf + nf - 2.0;
                    acc.add(a * lagged);
                }
                if before_end {
                    acc.add(b * current);
                } else {
                    let c = b - (nf + 1.0) * xi * kappa_t2 - 0.5 * (nf * nf + 3.0 * nf + 2.0) * xi * xi;
                    acc.add(c * window);
                }
                3.0 * delta * acc.value()
            };
            let step = nf + 4.0;
            lagged *= (kappa_t2 - 2.0) / step;
            current *= kappa_t2 / step;
            window *= kappa_t / step;
            Ok((0.0, s))
        })?
    };

    let self_part = impulse_self + series.self_part;
    let phi_unit = component.combine(electrostatic, self_part);
    Ok(ForceResult::from_unit(body, traj.amplitude(), component, phi_unit, series.terms, series.estimate))
}

/// Instantaneous force at `0 < t2 < T` from the derivatives at `t2` itself:
///
/// `F = -3 D(t2) - (3/2) sum_n (-1)^n R^n D^(n)(t2) / ((n+3)(n+1)!) * e_n`,
/// `e_n = [(n+1)k^2 - 2n - 6] k^(n+1)` for `k = t2/R < 2` and
/// `e_n = 2^(n+2) (n - 1)` for `k >= 2`.
pub fn force_current_derivatives(
    traj: &Trajectory,
    t2: f64,
    body: &SphereBody,
    component: Component,
    opts: &SeriesOptions,
) -> Result<ForceResult> {
    if !(t2 > 0.0 && t2 < traj.duration()) {
        return Err(domain(format!(
            "current-derivative expansion needs 0 < t2 < T, got t2 = {t2}, T = {}",
            traj.duration()
        )));
    }
    let r = body.radius();
    let kappa_t2 = t2 / r;
    let saturated = kappa_t2 >= 2.0;

    let shape_now = traj.shape_value(t2);
    let electrostatic = -shape_now;
    let impulse_self = -2.0 * shape_now;

    let series = if component == Component::Electrostatic {
        SplitSum {
            electrostatic: 0.0,
            self_part: 0.0,
            terms: 0,
            estimate: 0.0,
        }
    } else {
        // k^(n+1)/(n+1)! below 2R, 2^(n+2)/(n+1)! beyond
        let ratio = if saturated { 2.0 } else { kappa_t2 };
        let mut power = if saturated { 4.0 } else { kappa_t2 };
        sum_split_series(Component::SelfForce, opts, |n| {
            let delta = scaled_shape_derivative_at(traj, t2, n, r)?;
            let nf = n as f64;
            let s = if delta == 0.0 {
                0.0
            } else {
                let bracket = if saturated {
                    nf - 1.0
                } else {
                    (nf + 1.0) * kappa_t2 * kappa_t2 - 2.0 * nf - 6.0
                };
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                -1.5 * sign * delta * power * bracket / (nf + 3.0)
            };
            power *= ratio / (nf + 2.0);
            Ok((0.0, s))
        })?
    };

    let self_part = impulse_self + series.self_part;
    let phi_unit = component.combine(electrostatic, self_part);
    Ok(ForceResult::from_unit(body, traj.amplitude(), component, phi_unit, series.terms, series.estimate))
}

/// Reduced current-derivative form valid for `2R < t2 < T`, written through
/// the pair-distance moments `M(m) = integral of r^(m-1)`:
///
/// `F = -rho_c^2 V^2 D(t2)/R^3 - (2/3) rho_c^2 sum_m (-1)^m/m! M(m) D^(m+2)(t2)`.
///
/// The leading term is entirely the neutralizer's attraction.
pub fn force_moment_form(
    traj: &Trajectory,
    t2: f64,
    body: &SphereBody,
    component: Component,
    opts: &SeriesOptions,
) -> Result<ForceResult> {
    let r = body.radius();
    if !(t2 > 2.0 * r && t2 < traj.duration()) {
        return Err(domain(format!(
            "reduced form needs 2R < t2 < T, got t2 = {t2}, R = {r}, T = {}",
            traj.duration()
        )));
    }
    let electrostatic = -traj.shape_value(t2);
    let series = if component == Component::Electrostatic {
        SplitSum {
            electrostatic: 0.0,
            self_part: 0.0,
            terms: 0,
            estimate: 0.0,
        }
    } else {
        // converts M(m) * D^(m+2) into units of V^2 / R^3
        let unit = r.powi(3) / (body.volume() * body.volume());
        let mut inv_factorial = 1.0;
        sum_split_series(Component::SelfForce, opts, |m| {
            let d = traj.shape_derivative_at(t2, m + 2)?;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let moment = pair_moment(m as i32, body)?;
            let s = if d == 0.0 {
                0.0
            } else {
                -2.0 / 3.0 * sign * inv_factorial * moment * d * unit
            };
            inv_factorial /= (m + 1) as f64;
            Ok((0.0, s))
        })?
    };
    let phi_unit = component.combine(electrostatic, series.self_part);
    Ok(ForceResult::from_unit(body, traj.amplitude(), component, phi_unit, series.terms, series.estimate))
}

/// True when `t2` lies where the force can be nonzero, `0 <= t2 < T + 2R`.
pub fn in_causal_window(t2: f64, duration: f64, body: &SphereBody) -> bool {
    t2 >= 0.0 && t2 < duration + 2.0 * body.radius()
}
