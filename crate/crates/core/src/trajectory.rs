//! Displacement profiles `D_x(t)` windowed to `[0, T]`, with analytic
//! derivatives of their smooth extension.
//!
//! Every profile is `amplitude * shape(t)`. The force routines work on the
//! shape so that results are linear in the amplitude by construction.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::geometry::SphereBody;

/// `n`th derivative of a custom shape at `t`; index `n` in the vector.
pub type DerivativeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum TrajectoryKind {
    /// `theta(T - t) theta(t)`.
    Steplike,
    /// `1 - cos(2 pi t / T)`.
    RaisedCosine,
    /// `sum_k c_k t^k`, windowed to `[0, T]` without smoothing.
    Polynomial(Vec<f64>),
    /// Caller-supplied shape: element `n` is the `n`th derivative.
    Custom(Vec<DerivativeFn>),
}

impl fmt::Debug for TrajectoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Steplike => f.write_str("Steplike"),
            Self::RaisedCosine => f.write_str("RaisedCosine"),
            Self::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Self::Custom(d) => write!(f, "Custom({} derivative callables)", d.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    duration: f64,
    amplitude: f64,
    kind: TrajectoryKind,
}

impl Trajectory {
    pub fn new(duration: f64, amplitude: f64, kind: TrajectoryKind) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(domain(format!("duration T must be finite and positive, got {duration}")));
        }
        if !amplitude.is_finite() {
            return Err(domain(format!("amplitude must be finite, got {amplitude}")));
        }
        match &kind {
            TrajectoryKind::Polynomial(c) if c.iter().any(|x| !x.is_finite()) => {
                return Err(domain("polynomial coefficients must be finite"));
            }
            TrajectoryKind::Custom(d) if d.is_empty() => {
                return Err(domain("custom trajectory needs at least the profile itself"));
            }
            _ => {}
        }
        Ok(Self {
            duration,
            amplitude,
            kind,
        })
    }

    pub fn steplike(duration: f64, amplitude: f64) -> Result<Self> {
        Self::new(duration, amplitude, TrajectoryKind::Steplike)
    }

    pub fn raised_cosine(duration: f64, amplitude: f64) -> Result<Self> {
        Self::new(duration, amplitude, TrajectoryKind::RaisedCosine)
    }

    pub fn polynomial(duration: f64, amplitude: f64, coefficients: Vec<f64>) -> Result<Self> {
        Self::new(duration, amplitude, TrajectoryKind::Polynomial(coefficients))
    }

    pub fn custom(duration: f64, amplitude: f64, derivatives: Vec<DerivativeFn>) -> Result<Self> {
        Self::new(duration, amplitude, TrajectoryKind::Custom(derivatives))
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn kind(&self) -> &TrajectoryKind {
        &self.kind
    }

    pub fn is_steplike(&self) -> bool {
        matches!(self.kind, TrajectoryKind::Steplike)
    }

    /// Same shape with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.duration, self.amplitude * factor, self.kind.clone())
    }

    /// Highest derivative order available, `None` when unlimited.
    pub fn derivative_order_available(&self) -> Option<usize> {
        match &self.kind {
            TrajectoryKind::Custom(d) => Some(d.len() - 1),
            _ => None,
        }
    }

    /// `D_x(t)`, exactly zero outside `[0, T]`.
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.shape_value(t)
    }

    /// Windowed unit-amplitude shape.
    pub fn shape_value(&self, t: f64) -> f64 {
        if !(0.0..=self.duration).contains(&t) {
            return 0.0;
        }
        match &self.kind {
            TrajectoryKind::Steplike => 1.0,
            _ => self.shape_derivative_unchecked(t, 0).unwrap_or(0.0),
        }
    }

    /// `n`th one-sided derivative at `t = 0+`.
    pub fn derivative_at_zero_plus(&self, n: usize) -> Result<f64> {
        Ok(self.amplitude * self.shape_derivative_at_zero_plus(n)?)
    }

    /// `n`th derivative at an interior time `0 < t < T`.
    pub fn derivative_at(&self, t: f64, n: usize) -> Result<f64> {
        Ok(self.amplitude * self.shape_derivative_at(t, n)?)
    }

    pub fn shape_derivative_at_zero_plus(&self, n: usize) -> Result<f64> {
        match &self.kind {
            TrajectoryKind::Steplike => Ok(if n == 0 { 1.0 } else { 0.0 }),
            TrajectoryKind::RaisedCosine => {
                // exact zeros for the odd orders
                let omega = 2.0 * PI / self.duration;
                Ok(match (n, n % 4) {
                    (0, _) => 0.0,
                    (_, 1) | (_, 3) => 0.0,
                    (_, 2) => omega.powi(n as i32),
                    _ => -omega.powi(n as i32),
                })
            }
            _ => self.shape_derivative_unchecked(0.0, n),
        }
    }

    pub fn shape_derivative_at(&self, t: f64, n: usize) -> Result<f64> {
        if !(t > 0.0 && t < self.duration) {
            return Err(domain(format!(
                "derivative requested at t = {t}, outside the open interval (0, {})",
                self.duration
            )));
        }
        self.shape_derivative_unchecked(t, n)
    }

    /// Derivative of the smooth extension of the shape, no window applied.
    fn shape_derivative_unchecked(&self, t: f64, n: usize) -> Result<f64> {
        match &self.kind {
            TrajectoryKind::Steplike => Ok(if n == 0 { 1.0 } else { 0.0 }),
            TrajectoryKind::RaisedCosine => {
                let omega = 2.0 * PI / self.duration;
                let phase = omega * t;
                if n == 0 {
                    return Ok(1.0 - phase.cos());
                }
                let scale = omega.powi(n as i32);
                Ok(scale
                    * match n % 4 {
                        1 => phase.sin(),
                        2 => phase.cos(),
                        3 => -phase.sin(),
                        _ => -phase.cos(),
                    })
            }
            TrajectoryKind::Polynomial(c) => Ok(polynomial_derivative(c, t, n)),
            TrajectoryKind::Custom(d) => d
                .get(n)
                .map(|f| f(t))
                .ok_or(Error::UnsupportedOrder {
                    requested: n,
                    available: d.len() - 1,
                }),
        }
    }

    /// Check the small-displacement and slow-motion conditions
    /// `max |D| / R < threshold` and `max |dD/dt| / c < threshold`.
    pub fn validate_br(&self, body: &SphereBody, threshold: f64) -> BrConditionReport {
        let (max_d, max_v) = self.extrema();
        let d_ratio = max_d / body.radius();
        BrConditionReport {
            max_abs_displacement_over_r: d_ratio,
            max_abs_speed_over_c: max_v,
            satisfied: d_ratio < threshold && max_v < threshold,
            threshold,
        }
    }

    /// Maxima of `|D|` and `|dD/dt|` over the window.
    fn extrema(&self) -> (f64, f64) {
        const SAMPLES: usize = 10_001;
        if self.amplitude == 0.0 {
            return (0.0, 0.0);
        }
        let t_end = self.duration;
        // a nonzero value at either window edge is a jump
        let jumps = match self.kind {
            TrajectoryKind::Steplike => true,
            _ => self.value(0.0) != 0.0 || self.value(t_end) != 0.0,
        };

        let h = t_end / (SAMPLES - 1) as f64;
        let times: Vec<f64> = (0..SAMPLES).map(|i| i as f64 * h).collect();
        let max_d = self.refined_max(&times, 0);
        let max_v = if jumps {
            f64::INFINITY
        } else if self.derivative_order_available().is_some_and(|k| k < 1) {
            // no analytic speed: fall back to a sampled difference quotient
            times
                .windows(2)
                .map(|w| ((self.value(w[1]) - self.value(w[0])) / h).abs())
                .fold(0.0, f64::max)
        } else {
            self.refined_max(&times, 1)
        };
        (max_d, max_v)
    }

    /// Max over samples of `|amplitude * shape^(n)|`, with interior local maxima
    /// polished by Newton steps on the next derivative when it is available.
    fn refined_max(&self, times: &[f64], n: usize) -> f64 {
        let eval = |t: f64, k: usize| -> Option<f64> {
            let tc = t.clamp(0.0, self.duration);
            self.shape_derivative_unchecked(tc, k).ok().map(|v| self.amplitude * v)
        };
        let values: Vec<f64> = times.iter().map(|&t| eval(t, n).map_or(0.0, f64::abs)).collect();
        let mut best = values.iter().copied().fold(0.0, f64::max);
        for i in 1..values.len().saturating_sub(1) {
            if !(values[i] >= values[i - 1] && values[i] >= values[i + 1]) {
                continue;
            }
            let (lo, hi) = (times[i - 1], times[i + 1]);
            let mut t = times[i];
            for _ in 0..20 {
                let (Some(g), Some(dg)) = (eval(t, n + 1), eval(t, n + 2)) else {
                    break;
                };
                if dg == 0.0 {
                    break;
                }
                let next = (t - g / dg).clamp(lo, hi);
                if (next - t).abs() <= 1e-15 * self.duration {
                    t = next;
                    break;
                }
                t = next;
            }
            if let Some(v) = eval(t, n) {
                best = best.max(v.abs());
            }
        }
        best
    }
}

fn polynomial_derivative(coefficients: &[f64], t: f64, n: usize) -> f64 {
    if n >= coefficients.len() {
        return 0.0;
    }
    // Horner on the differentiated coefficients, c_k * k!/(k-n)!
    let mut acc = 0.0;
    for k in (n..coefficients.len()).rev() {
        let falling: f64 = ((k - n + 1)..=k).map(|j| j as f64).product();
        acc = acc * t + coefficients[k] * falling;
    }
    acc
}

/// Outcome of checking the small, slow displacement conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrConditionReport {
    pub max_abs_displacement_over_r: f64,
    pub max_abs_speed_over_c: f64,
    pub satisfied: bool,
    pub threshold: f64,
}

pub const DEFAULT_BR_THRESHOLD: f64 = 0.1;
