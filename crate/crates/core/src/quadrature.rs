//! Adaptive Gauss–Legendre quadrature with caller-supplied breakpoints.
//!
//! The kernels integrated in this crate are piecewise polynomials with kinks
//! and jumps at known locations (support edges, step discontinuities). Those
//! locations must be passed as breakpoints; inside each panel the integrand is
//! then smooth and a fixed Gauss rule with bisection converges geometrically.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

const RULE_POINTS: usize = 10;

struct GaussRule {
    nodes: [f64; RULE_POINTS],
    weights: [f64; RULE_POINTS],
}

/// Legendre nodes and weights on [-1, 1] by Newton iteration on `P_n`.
fn gauss_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = RULE_POINTS;
        let mut nodes = [0.0; RULE_POINTS];
        let mut weights = [0.0; RULE_POINTS];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussRule { nodes, weights }
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub panels: usize,
}

/// Bisection-adaptive Gauss–Legendre integrator.
///
/// A panel is accepted when the two-half estimate differs from the whole-panel
/// estimate by at most `max(abs_tol * width / total_width, rel_tol * |halves|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for AdaptiveQuadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-14,
            max_depth: 40,
        }
    }
}

struct Panel {
    lo: f64,
    hi: f64,
    whole: f64,
    depth: u32,
}

impl AdaptiveQuadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrate `f` over `[a, b]`, splitting first at every breakpoint that
    /// falls strictly inside the interval.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64, breakpoints: &[f64]) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> f64,
    {
        if !(a.is_finite() && b.is_finite()) || a > b {
            return Err(Error::Domain(format!(
                "quadrature interval [{a}, {b}] is not a finite ordered interval"
            )));
        }
        let mut result = QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            panels: 0,
        };
        if a == b {
            return Ok(result);
        }

        let mut edges = vec![a];
        let mut interior: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&x| x > a && x < b)
            .collect();
        interior.sort_by(f64::total_cmp);
        interior.dedup();
        edges.extend(interior);
        edges.push(b);

        let total_width = b - a;
        let mut value = NeumaierSum::new();
        let mut error = NeumaierSum::new();
        let mut stack = Vec::new();
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let whole = self.rule(&f, lo, hi, &mut result.evaluations);
            stack.push(Panel {
                lo,
                hi,
                whole,
                depth: 0,
            });
        }

        while let Some(panel) = stack.pop() {
            let mid = 0.5 * (panel.lo + panel.hi);
            let left = self.rule(&f, panel.lo, mid, &mut result.evaluations);
            let right = self.rule(&f, mid, panel.hi, &mut result.evaluations);
            let halves = left + right;
            let err = (halves - panel.whole).abs();
            let width = panel.hi - panel.lo;
            let local_tol = (self.abs_tol * width / total_width).max(self.rel_tol * halves.abs());
            if err <= local_tol || mid <= panel.lo || mid >= panel.hi {
                value.add(halves);
                error.add(err);
                result.panels += 1;
            } else if panel.depth >= self.max_depth {
                return Err(Error::Quadrature {
                    a: panel.lo,
                    b: panel.hi,
                    error: err,
                    evaluations: result.evaluations,
                });
            } else {
                stack.push(Panel {
                    lo: mid,
                    hi: panel.hi,
                    whole: right,
                    depth: panel.depth + 1,
                });
                stack.push(Panel {
                    lo: panel.lo,
                    hi: mid,
                    whole: left,
                    depth: panel.depth + 1,
                });
            }
        }

        result.value = value.value();
        result.error_estimate = error.value();
        Ok(result)
    }

    fn rule<F: Fn(f64) -> f64>(&self, f: &F, lo: f64, hi: f64, evaluations: &mut usize) -> f64 {
        let rule = gauss_rule();
        let half = 0.5 * (hi - lo);
        let centre = 0.5 * (hi + lo);
        let mut acc = NeumaierSum::new();
        for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
            acc.add(w * f(centre + half * x));
        }
        *evaluations += RULE_POINTS;
        half * acc.value()
    }
}

/// Integrate with the default tolerances.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64]) -> Result<f64> {
    AdaptiveQuadrature::default()
        .integrate(f, a, b, breakpoints)
        .map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_sum_to_two_and_integrate_high_degree_exactly() {
        let rule = gauss_rule();
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
        // degree 19 is the highest a 10-point rule integrates exactly
        let mut evals = 0;
        let q = AdaptiveQuadrature::default().rule(&|x: f64| x.powi(18), -1.0, 1.0, &mut evals);
        assert!((q - 2.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrand() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, &[]).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn step_with_breakpoint_is_exact() {
        let step = |x: f64| if x >= 0.3 { 1.0 } else { 0.0 };
        let v = integrate(step, 0.0, 1.0, &[0.3]).unwrap();
        assert!((v - 0.7).abs() < 1e-15);
    }

    #[test]
    fn kink_without_breakpoint_still_converges() {
        let v = integrate(|x: f64| (x - 0.37).abs(), 0.0, 1.0, &[]).unwrap();
        let exact = 0.5 * 0.37f64.powi(2) + 0.5 * 0.63f64.powi(2);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn empty_and_invalid_intervals() {
        assert_eq!(integrate(|x| x, 2.0, 2.0, &[]).unwrap(), 0.0);
        assert!(integrate(|x| x, 2.0, 1.0, &[]).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, &[]).is_err());
    }

    #[test]
    fn reports_failure_on_nonintegrable_singularity() {
        let q = AdaptiveQuadrature {
            max_depth: 8,
            ..AdaptiveQuadrature::default()
        };
        let err = q.integrate(|x: f64| 1.0 / x, 0.0, 1.0, &[]).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
