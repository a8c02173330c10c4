//! Quadrature routes: the averaged force as a weighted integral of the
//! trajectory, and the instantaneous force as a convolution with `g`.

use std::cell::RefCell;

use crate::analytic::{eval_axx, eval_f, force_at_time_series, kernel_g, Component, SeriesOptions};
use crate::error::{Error, Result};
use crate::geometry::SphereBody;
use crate::quadrature::AdaptiveQuadrature;
use crate::trajectory::Trajectory;

/// Absolute tolerance on integrands normalized to `R = 1`, unit amplitude.
const ORACLE_ABS_TOL: f64 = 1e-13;

fn integrator() -> AdaptiveQuadrature {
    AdaptiveQuadrature::new(ORACLE_ABS_TOL, 1e-15)
}

/// A force obtained by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleForce {
    pub value: f64,
    /// `F / (rho_c^2 V^2 D_x)`.
    pub normalized: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl OracleForce {
    fn from_unit(body: &SphereBody, amplitude: f64, phi_unit: f64, error: f64, evaluations: usize) -> Self {
        let r3 = body.radius().powi(3);
        Self {
            value: body.force_scale() * amplitude * phi_unit / r3,
            normalized: phi_unit / r3,
            error_estimate: error / r3,
            evaluations,
        }
    }
}

/// `(rho_c^2 V^2 / T) * integral_0^T D(t1) f(t1) dt1`, with the kink of `f` at
/// `t1 = T - 2R` passed as a panel boundary.
pub fn quad_avg_force(traj: &Trajectory, body: &SphereBody, component: Component) -> Result<OracleForce> {
    let r = body.radius();
    let r3 = r.powi(3);
    let duration = traj.duration();
    let kappa_t = duration / r;
    let f_error = RefCell::new(None);
    let integrand = |tau: f64| {
        let t1 = tau * r;
        match eval_f(t1, duration, body, component) {
            Ok(f) => traj.shape_value(t1) * f * r3,
            Err(e) => {
                f_error.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let q = integrator().integrate(integrand, 0.0, kappa_t, &[kappa_t - 2.0])?;
    if let Some(e) = f_error.into_inner() {
        return Err(e);
    }
    Ok(OracleForce::from_unit(
        body,
        traj.amplitude(),
        q.value / kappa_t,
        q.error_estimate / kappa_t,
        q.evaluations,
    ))
}

/// `(1/T^2) integral_0^T f(t1) dt1` by quadrature.
pub fn quad_axx(duration: f64, body: &SphereBody, component: Component) -> Result<f64> {
    eval_axx(duration, body, component)?;
    let r = body.radius();
    let kappa_t = duration / r;
    let q = integrator().integrate(
        |tau| eval_f(tau * r, duration, body, component).map_or(f64::NAN, |f| f * r.powi(3)),
        0.0,
        kappa_t,
        &[kappa_t - 2.0],
    )?;
    // integral over t1 = R * integral over tau; f carries 1/R^3
    Ok(q.value * r / r.powi(3) / (duration * duration))
}

/// `rho_c^2 V^2 [c D(t2) + integral D(t1) smooth(t2 - t1) dt1]` over the
/// overlap of `[0, T]` with `[t2 - 2R, t2]`; the impulse is applied exactly.
pub fn conv_force(traj: &Trajectory, body: &SphereBody, t2: f64, component: Component) -> Result<OracleForce> {
    if !t2.is_finite() {
        return Err(Error::Domain(format!("observation time must be finite, got {t2}")));
    }
    let r = body.radius();
    let r3 = r.powi(3);
    let g = kernel_g(body, component);
    let impulse = g.impulse_coefficient() * r3 * traj.shape_value(t2);

    let lo = (t2 - g.support_end()).max(0.0) / r;
    let hi = t2.min(traj.duration()) / r;
    let (smooth, error, evaluations) = if hi > lo {
        let q = integrator().integrate(
            |tau| traj.shape_value(tau * r) * g.smooth(t2 - tau * r) * r3 * r,
            lo,
            hi,
            &[],
        )?;
        (q.value, q.error_estimate, q.evaluations)
    } else {
        (0.0, 0.0, 0)
    };
    Ok(OracleForce::from_unit(body, traj.amplitude(), impulse + smooth, error, evaluations))
}

/// `(1/T) integral_0^T F(t2) dt2` with `F` from the instantaneous series,
/// split at `t2 = 2R` where the series changes branch.
pub fn time_average_of_series(
    traj: &Trajectory,
    body: &SphereBody,
    component: Component,
    opts: &SeriesOptions,
) -> Result<OracleForce> {
    let r = body.radius();
    let kappa_t = traj.duration() / r;
    let failure = RefCell::new(None);
    let q = integrator().integrate(
        |tau| match force_at_time_series(traj, tau * r, body, component, opts) {
            Ok(f) => f.normalized * r.powi(3),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        kappa_t,
        &[2.0],
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let q = q?;
    Ok(OracleForce::from_unit(
        body,
        traj.amplitude(),
        q.value / kappa_t,
        q.error_estimate / kappa_t,
        q.evaluations,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::steplike_avg_force;
    use std::sync::Arc;

    #[test]
    fn zero_trajectory_gives_zero() {
        let body = SphereBody::unit();
        let tr = Trajectory::raised_cosine(1.5, 0.0).unwrap();
        assert_eq!(quad_avg_force(&tr, &body, Component::Total).unwrap().value, 0.0);
        assert_eq!(conv_force(&tr, &body, 0.7, Component::Total).unwrap().value, 0.0);
    }

    #[test]
    fn steplike_average_matches_geometric_factor() {
        for (r, t_end) in [(1.0, 0.7), (1.0, 1.5), (1.0, 3.0), (0.5, 0.6), (2.0, 9.0)] {
            let body = SphereBody::new(r, 0.8).unwrap();
            let tr = Trajectory::steplike(t_end, 0.01).unwrap();
            for c in Component::ALL {
                let quad = quad_avg_force(&tr, &body, c).unwrap().value;
                let exact = body.force_scale() * t_end * 0.01 * eval_axx(t_end, &body, c).unwrap();
                // the self part is exactly zero for T >= 2R
                let floor = 1e-14 * body.force_scale() * 0.01 * t_end / r.powi(4);
                assert!(
                    (quad - exact).abs() <= 1e-10 * exact.abs() + floor,
                    "R={r} T={t_end} {c}: {quad} vs {exact}"
                );
            }
            let br = steplike_avg_force(t_end, 0.01, &body, Component::Total).unwrap().value;
            let quad = quad_avg_force(&tr, &body, Component::Total).unwrap().value;
            assert!((quad - br).abs() <= 1e-10 * br.abs());
        }
    }

    #[test]
    fn conv_vanishes_outside_causal_window() {
        let body = SphereBody::unit();
        let tr = Trajectory::raised_cosine(1.5, 1.0).unwrap();
        for t2 in [-3.0, -1e-12, 3.5, 3.5 + 1e-9, 10.0] {
            assert_eq!(conv_force(&tr, &body, t2, Component::Total).unwrap().value, 0.0);
        }
        let step = Trajectory::steplike(1.5, 1.0).unwrap();
        assert_eq!(conv_force(&step, &body, 3.5, Component::Total).unwrap().value, 0.0);
    }

    #[test]
    fn steplike_convolution_matches_hand_integration() {
        // for 0 < t2 < min(T, 2R), R = 1:
        // -3 + integral_0^t2 (3/2)(2 - u^2) du = -3 + 3 t2 - t2^3 / 2
        let body = SphereBody::unit();
        let t_end = 1.5;
        let tr = Trajectory::steplike(t_end, 1.0).unwrap();
        for i in 1..=20 {
            let t2 = t_end * i as f64 / 21.0;
            let got = conv_force(&tr, &body, t2, Component::Total).unwrap().normalized;
            let hand = -3.0 + 3.0 * t2 - t2.powi(3) / 2.0;
            assert!((got - hand).abs() < 1e-12, "t2={t2}: {got} vs {hand}");
        }
    }

    #[test]
    fn smoothed_steps_approach_steplike_average() {
        let body = SphereBody::unit();
        let t_end = 1.5;
        let step = quad_avg_force(&Trajectory::steplike(t_end, 1.0).unwrap(), &body, Component::Total)
            .unwrap()
            .normalized;
        let mut last_gap = f64::INFINITY;
        for dt in [0.2, 0.05, 0.01, 0.002] {
            let ramp = move |t: f64| {
                let u = (t / dt).clamp(0.0, 1.0);
                let v = ((t_end - t) / dt).clamp(0.0, 1.0);
                u * u * (3.0 - 2.0 * u) * v * v * (3.0 - 2.0 * v)
            };
            let tr = Trajectory::custom(t_end, 1.0, vec![Arc::new(ramp)]).unwrap();
            let q = AdaptiveQuadrature::new(1e-12, 1e-14);
            let kappa = t_end;
            let smooth = q
                .integrate(
                    |t| tr.shape_value(t) * eval_f(t, t_end, &body, Component::Total).unwrap(),
                    0.0,
                    kappa,
                    &[dt, t_end - dt, t_end - 2.0],
                )
                .unwrap()
                .value
                / t_end;
            let gap = (smooth - step).abs();
            assert!(gap < last_gap);
            last_gap = gap;
        }
        assert!(last_gap < 0.01);
    }

    #[test]
    fn axx_quadrature_agrees() {
        let body = SphereBody::unit();
        for kappa in [0.25, 0.5, 1.0, 1.5, 1.9, 2.0, 3.0, 5.0] {
            let exact = eval_axx(kappa, &body, Component::Total).unwrap();
            let quad = quad_axx(kappa, &body, Component::Total).unwrap();
            assert!((exact - quad).abs() <= 1e-10 * exact.abs(), "kappa {kappa}");
        }
        assert!((eval_axx(1.0, &body, Component::Total).unwrap() + 1.625).abs() < 1e-15);
    }
}
