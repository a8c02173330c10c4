//! End-to-end verification: every closed form against its oracle.

use std::io::{self, Write};

use crate::analytic::{
    avg_force_series, eval_axx, force_at_time_series, force_current_derivatives, force_moment_form, Component,
    SeriesOptions,
};
use crate::error::Result;
use crate::geometry::{eval_i, eval_k, pair_moment, SphereBody};
use crate::oracle::{
    conv_force, mc_pair_moment, oracle_i_against, quad_avg_force, quad_axx, time_average_of_series, McConfig,
    OracleReport,
};
use crate::quadrature::AdaptiveQuadrature;
use crate::trajectory::Trajectory;

pub const CLOSURE_RTOL: f64 = 1e-8;
pub const AXX_QUAD_RTOL: f64 = 1e-10;
pub const SERIES_VS_QUAD_RTOL: f64 = 1e-8;
pub const SERIES_VS_CONV_RTOL: f64 = 1e-8;
pub const AVERAGING_RTOL: f64 = 1e-7;
pub const CROSS_EXPANSION_RTOL: f64 = 1e-7;

/// Floor for comparisons of normalized forces that pass through zero, in
/// units of `rho_c^2 V^2 D_x / R^3`.
pub const NORMALIZED_FORCE_ATOL: f64 = 1e-12;

pub const AXX_KAPPAS: [f64; 8] = [0.25, 0.5, 1.0, 1.5, 1.9, 2.0, 3.0, 5.0];
pub const AVG_KAPPAS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 4.0];
pub const AVERAGING_KAPPAS: [f64; 5] = [0.5, 1.0, 1.5, 2.5, 4.0];
pub const CROSS_EXPANSION_TIMES: [f64; 5] = [0.5, 1.5, 2.5, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub samples: u64,
    pub seed: u64,
    pub parallel_chunks: usize,
    pub series: SeriesOptions,
    /// Relative error injected into the closed-form `I(s)` before comparison.
    /// Zero except in negative-control runs.
    pub kernel_perturbation: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: 10_000_000,
            seed: 1,
            parallel_chunks: std::thread::available_parallelism().map_or(1, |n| n.get()),
            series: SeriesOptions::default(),
            kernel_perturbation: 0.0,
        }
    }
}

impl VerifyConfig {
    pub fn mc_config(&self) -> McConfig {
        McConfig::new(self.samples, self.seed).with_parallel_chunks(self.parallel_chunks)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub reports: Vec<OracleReport>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        !self.reports.is_empty() && self.reports.iter().all(OracleReport::passed)
    }

    pub fn report(&self, quantity: &str) -> Option<&OracleReport> {
        self.reports.iter().find(|r| r.quantity == quantity)
    }

    pub fn write_text<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for r in &self.reports {
            writeln!(out, "{}", r.summary())?;
        }
        writeln!(
            out,
            "{}: {}/{} checks passed",
            if self.passed() { "OK" } else { "FAILED" },
            self.reports.iter().filter(|r| r.passed()).count(),
            self.reports.len()
        )
    }

    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", OracleReport::CSV_HEADER)?;
        for r in &self.reports {
            r.write_csv_rows(out)?;
        }
        Ok(())
    }
}

/// `(9 / (2 R^3)) integral_0^1 zeta^2 K(zeta, xi) dzeta`, split where the
/// step functions in `K` switch.
pub fn kernel_i_from_radial_quadrature(xi: f64, body: &SphereBody) -> Result<f64> {
    let q = AdaptiveQuadrature::new(1e-15, 1e-15).integrate(
        |z| z * z * eval_k(z, xi).unwrap_or(f64::NAN),
        0.0,
        1.0,
        &[1.0 - xi, xi - 1.0],
    )?;
    Ok(4.5 * q.value / body.radius().powi(3))
}

pub fn check_kernel_closure(body: &SphereBody, perturbation: f64) -> Result<OracleReport> {
    let mut report = OracleReport::new("kernel_I_radial_quadrature", 0.0, CLOSURE_RTOL);
    for i in 0..50 {
        let xi = 2.0 * i as f64 / 49.0;
        let closed = eval_i(xi * body.radius(), body).value * (1.0 + perturbation);
        report.push(xi, closed, kernel_i_from_radial_quadrature(xi, body)?, None);
    }
    Ok(report)
}

pub fn check_kernel_monte_carlo(body: &SphereBody, cfg: &VerifyConfig) -> Result<OracleReport> {
    let p = cfg.kernel_perturbation;
    oracle_i_against(body, &cfg.mc_config(), &|s| eval_i(s, body).value * (1.0 + p))
}

pub fn check_moments(body: &SphereBody, cfg: &VerifyConfig) -> Result<Vec<OracleReport>> {
    (0..=4).map(|n| mc_pair_moment(n, body, &cfg.mc_config())).collect()
}

/// `(1/2) rho_c^2 M(0)` against `3 Q^2 / (5R)`.
pub fn check_self_energy(body: &SphereBody) -> Result<OracleReport> {
    let mut report = OracleReport::new("self_energy", 0.0, 1e-14);
    let from_moment = 0.5 * body.charge_density().powi(2) * pair_moment(0, body)?;
    report.push(0.0, body.electrostatic_self_energy(), from_moment, None);
    Ok(report)
}

/// `A_xx = -1/(R^3 T)` bit for bit once `T >= 2R`.
pub fn check_axx_plateau(body: &SphereBody) -> Result<OracleReport> {
    let mut report = OracleReport::new("axx_plateau", 0.0, 0.0);
    let r = body.radius();
    for kappa in [2.0, 2.5, 3.0, 4.0, 5.0, 10.0, 100.0] {
        let t = kappa * r;
        report.push(kappa, -1.0 / (r.powi(3) * t), eval_axx(t, body, Component::Total)?, None);
    }
    Ok(report)
}

pub fn check_axx_quadrature(body: &SphereBody) -> Result<OracleReport> {
    let mut report = OracleReport::new("axx_quadrature", 0.0, AXX_QUAD_RTOL);
    for kappa in AXX_KAPPAS {
        let t = kappa * body.radius();
        report.push(kappa, eval_axx(t, body, Component::Total)?, quad_axx(t, body, Component::Total)?, None);
    }
    Ok(report)
}

pub fn check_avg_series(body: &SphereBody, opts: &SeriesOptions) -> Result<OracleReport> {
    let mut report = OracleReport::new("avg_force_series_vs_quadrature", 0.0, SERIES_VS_QUAD_RTOL);
    for kappa in AVG_KAPPAS {
        let tr = Trajectory::raised_cosine(kappa * body.radius(), 1.0)?;
        let series = avg_force_series(&tr, body, Component::Total, opts)?;
        let quad = quad_avg_force(&tr, body, Component::Total)?;
        report.push(kappa, series.normalized, quad.normalized, None);
    }
    Ok(report)
}

/// 100-point grid over `[0, T + 2R]`.
pub fn instantaneous_grid(duration: f64, body: &SphereBody) -> Vec<f64> {
    let end = duration + 2.0 * body.radius();
    (0..100).map(|i| end * i as f64 / 99.0).collect()
}

pub fn check_force_series(body: &SphereBody, kappa: f64, opts: &SeriesOptions) -> Result<OracleReport> {
    let r3 = body.radius().powi(3);
    let mut report = OracleReport::new(
        format!("force_series_vs_convolution_T{kappa}"),
        NORMALIZED_FORCE_ATOL / r3,
        SERIES_VS_CONV_RTOL,
    );
    let tr = Trajectory::raised_cosine(kappa * body.radius(), 1.0)?;
    for t2 in instantaneous_grid(tr.duration(), body) {
        let series = force_at_time_series(&tr, t2, body, Component::Total, opts)?;
        let conv = conv_force(&tr, body, t2, Component::Total)?;
        report.push(t2, series.normalized, conv.normalized, None);
    }
    Ok(report)
}

/// Exact zeros before the motion starts and once `t2 >= T + 2R`.
pub fn check_causality(body: &SphereBody, opts: &SeriesOptions) -> Result<OracleReport> {
    let mut report = OracleReport::new("causality", 0.0, 0.0);
    let r = body.radius();
    for kappa in [0.5, 1.5, 2.5, 4.0] {
        let t = kappa * r;
        let trajectories = [
            Trajectory::raised_cosine(t, 1.0)?,
            Trajectory::steplike(t, 1.0)?,
            Trajectory::polynomial(t, 1.0, vec![0.3, -0.2, 0.1])?,
        ];
        for tr in &trajectories {
            for t2 in [-10.0 * r, -r, -1e-9 * r, t + 2.0 * r, t + 2.0 * r + 1e-9, t + 5.0 * r] {
                let f = force_at_time_series(tr, t2, body, Component::Total, opts)?;
                let c = conv_force(tr, body, t2, Component::Total)?;
                report.push(t2, f.value, 0.0, None);
                report.push(t2, c.value, 0.0, None);
            }
        }
    }
    Ok(report)
}

pub fn check_averaging(body: &SphereBody, opts: &SeriesOptions) -> Result<OracleReport> {
    let mut report = OracleReport::new("averaging_consistency", 0.0, AVERAGING_RTOL);
    for kappa in AVERAGING_KAPPAS {
        let t = kappa * body.radius();
        for tr in [Trajectory::steplike(t, 1.0)?, Trajectory::raised_cosine(t, 1.0)?] {
            let avg = avg_force_series(&tr, body, Component::Total, opts)?;
            let averaged = time_average_of_series(&tr, body, Component::Total, opts)?;
            report.push(kappa, avg.normalized, averaged.normalized, None);
        }
    }
    Ok(report)
}

pub fn check_cross_expansion(body: &SphereBody, opts: &SeriesOptions) -> Result<OracleReport> {
    let mut report = OracleReport::new("cross_expansion", 0.0, CROSS_EXPANSION_RTOL);
    let r = body.radius();
    let tr = Trajectory::raised_cosine(10.0 * r, 1.0)?;
    for k in CROSS_EXPANSION_TIMES {
        let origin = force_at_time_series(&tr, k * r, body, Component::Total, opts)?;
        let current = force_current_derivatives(&tr, k * r, body, Component::Total, opts)?;
        report.push(k, origin.normalized, current.normalized, None);
    }
    Ok(report)
}

/// A constant displacement beyond `2R` feels only the neutralizer.
pub fn check_plateau(body: &SphereBody, opts: &SeriesOptions) -> Result<OracleReport> {
    let mut report = OracleReport::new("plateau_current_derivatives", 0.0, 0.0);
    let r = body.radius();
    let amplitude = 0.01 * r;
    let tr = Trajectory::polynomial(10.0 * r, amplitude, vec![1.0])?;
    for k in [2.5, 4.0, 8.0] {
        let total = force_current_derivatives(&tr, k * r, body, Component::Total, opts)?;
        report.push(k, -body.force_scale() * amplitude / r.powi(3), total.value, None);
        let self_only = force_current_derivatives(&tr, k * r, body, Component::SelfForce, opts)?;
        report.push(k, 0.0, self_only.value, None);
    }
    Ok(report)
}

/// Reduced form through the pair-distance moments against the full
/// current-derivative series.
pub fn check_moment_form(body: &SphereBody, opts: &SeriesOptions) -> Result<OracleReport> {
    let mut report = OracleReport::new("reduced_form_vs_current_derivatives", 0.0, 1e-10);
    let r = body.radius();
    for kappa_t in [6.0, 10.0] {
        let tr = Trajectory::raised_cosine(kappa_t * r, 1.0)?;
        for k in [2.5, 4.0, 5.5] {
            let reduced = force_moment_form(&tr, k * r, body, Component::Total, opts)?;
            let full = force_current_derivatives(&tr, k * r, body, Component::Total, opts)?;
            report.push(k, reduced.normalized, full.normalized, None);
        }
    }
    Ok(report)
}

/// Normalized averaged force of the steplike motion is `-1` once `T >= 2R`.
pub fn check_figure1_plateau(body: &SphereBody) -> Result<OracleReport> {
    let mut report = OracleReport::new("figure1_steplike_plateau", 0.0, 0.0);
    let r = body.radius();
    for kappa in [2.0, 3.0, 4.0, 6.0, 8.0] {
        let t = kappa * r;
        let phi = t * eval_axx(t, body, Component::Total)? * r.powi(3);
        report.push(kappa, -1.0, phi, None);
    }
    Ok(report)
}

/// Run every check on a unit-radius, unit-density body.
///
/// Only an invalid configuration is an error. A check that fails to evaluate
/// becomes an empty, failing report named after the error, so the summary is
/// always complete.
pub fn run(cfg: &VerifyConfig) -> Result<VerifySummary> {
    cfg.mc_config().validate()?;
    let body = SphereBody::unit();
    let opts = &cfg.series;
    let mut reports = Vec::new();
    let mut record = |name: &str, r: Result<OracleReport>| match r {
        Ok(report) => reports.push(report),
        Err(e) => reports.push(OracleReport::new(
            format!("{name} (error: {})", e.to_string().replace(',', ";")),
            0.0,
            0.0,
        )),
    };
    record("kernel_I_radial_quadrature", check_kernel_closure(&body, cfg.kernel_perturbation));
    record("kernel_I_monte_carlo", check_kernel_monte_carlo(&body, cfg));
    for n in 0..=4 {
        record(&format!("pair_moment_{n}"), mc_pair_moment(n, &body, &cfg.mc_config()));
    }
    record("self_energy", check_self_energy(&body));
    record("axx_plateau", check_axx_plateau(&body));
    record("axx_quadrature", check_axx_quadrature(&body));
    record("avg_force_series_vs_quadrature", check_avg_series(&body, opts));
    record("force_series_vs_convolution_T1.5", check_force_series(&body, 1.5, opts));
    record("force_series_vs_convolution_T2.5", check_force_series(&body, 2.5, opts));
    record("causality", check_causality(&body, opts));
    record("averaging_consistency", check_averaging(&body, opts));
    record("cross_expansion", check_cross_expansion(&body, opts));
    record("plateau_current_derivatives", check_plateau(&body, opts));
    record("reduced_form_vs_current_derivatives", check_moment_form(&body, opts));
    record("figure1_steplike_plateau", check_figure1_plateau(&body));
    Ok(VerifySummary { reports })
}
