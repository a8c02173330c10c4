//! Acceptance suite: one check per criterion, one PASS/FAIL line each.
//!
//! Runs as a plain binary (no libtest harness) so the lines are printed on
//! every `cargo test`, and the process exits nonzero if any check fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use sphere_selfforce::analytic::{
    avg_force_series, steplike_avg_force, eval_axx, force_at_time_series, force_current_derivatives, Component,
    SeriesOptions,
};
use sphere_selfforce::cli::{self, Grid, RunConfig};
use sphere_selfforce::geometry::{pair_moment, SphereBody};
use sphere_selfforce::oracle::{conv_force, mc_pair_moment, oracle_i, quad_avg_force, McConfig};
use sphere_selfforce::trajectory::Trajectory;
use sphere_selfforce::verify;

const MC_SAMPLES: u64 = 10_000_000;
const MC_SEED: u64 = 1;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(x: f64, reference: f64) -> f64 {
    if x == reference {
        0.0
    } else {
        (x - reference).abs() / reference.abs()
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn body() -> SphereBody {
    SphereBody::unit()
}

fn opts() -> SeriesOptions {
    SeriesOptions::default()
}

fn kernel_closure() -> Outcome {
    let (report, elapsed) = timed(|| verify::check_kernel_closure(&body(), 0.0));
    let report = report.map_err(|e| e.to_string())?;
    ensure(report.points.len() == 50, || format!("{} points", report.points.len()))?;
    ensure(report.passed(), || report.summary())?;
    ensure(report.max_rel_err() <= 1e-8, || report.summary())?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("50 points, max rel err {:.1e}, {elapsed:.2?}", report.max_rel_err()))
}

fn monte_carlo_kernel() -> Outcome {
    let (report, elapsed) = timed(|| oracle_i(&body(), &McConfig::new(MC_SAMPLES, MC_SEED)));
    let report = report.map_err(|e| e.to_string())?;
    ensure(report.passed(), || report.summary())?;
    ensure(report.points.iter().all(|p| p.standard_error.is_some()), || "missing standard errors".into())?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    let worst = report
        .points
        .iter()
        .map(|p| p.abs_err / p.standard_error.unwrap())
        .fold(0.0, f64::max);
    Ok(format!(
        "{} bins within 5 se (worst {worst:.2} se), {MC_SAMPLES} samples, {elapsed:.2?}",
        report.points.len()
    ))
}

fn geometric_factor_plateau() -> Outcome {
    let b = body();
    for kappa in [2.0, 2.25, 3.0, 5.0, 10.0, 1e3] {
        let a = eval_axx(kappa, &b, Component::Total).map_err(|e| e.to_string())?;
        ensure(a == -1.0 / kappa, || format!("kappa={kappa}: {a} != {}", -1.0 / kappa))?;
    }
    // the same with R != 1
    let b2 = SphereBody::new(0.5, 3.0).map_err(|e| e.to_string())?;
    for t in [1.0, 1.7, 4.0] {
        let a = eval_axx(t, &b2, Component::Total).map_err(|e| e.to_string())?;
        ensure(a == -1.0 / (0.125 * t), || format!("R=0.5 T={t}: {a}"))?;
    }
    let report = verify::check_axx_quadrature(&b).map_err(|e| e.to_string())?;
    ensure(report.points.len() == 8, || format!("{} kappas", report.points.len()))?;
    ensure(report.passed() && report.max_rel_err() <= 1e-10, || report.summary())?;
    Ok(format!("exact plateau; quadrature max rel err {:.1e}", report.max_rel_err()))
}

fn moment_identity() -> Outcome {
    let b = body();
    let mut worst = 0.0f64;
    for n in 0..=4 {
        let report = mc_pair_moment(n, &b, &McConfig::new(MC_SAMPLES, MC_SEED)).map_err(|e| e.to_string())?;
        ensure(report.passed(), || report.summary())?;
        let p = &report.points[0];
        if let Some(se) = p.standard_error {
            if se > 0.0 {
                worst = worst.max(p.abs_err / se);
            }
        }
    }
    let v2 = b.volume() * b.volume();
    let m1 = pair_moment(1, &b).map_err(|e| e.to_string())?;
    ensure(m1 == v2, || format!("M(1) = {m1}, V^2 = {v2}"))?;
    for (r, rho) in [(1.0, 1.0), (2.5, 0.4)] {
        let body = SphereBody::new(r, rho).map_err(|e| e.to_string())?;
        let from_moment = 0.5 * rho * rho * pair_moment(0, &body).map_err(|e| e.to_string())?;
        let e = body.electrostatic_self_energy();
        ensure(rel_err(from_moment, e) <= 1e-14, || format!("self energy {from_moment} vs {e}"))?;
    }
    Ok(format!("n=0..4 within 5 se (worst {worst:.2} se); M(1)=V^2 exactly; self energy reproduced"))
}

fn average_series_vs_quadrature() -> Outcome {
    let b = body();
    let mut worst = 0.0f64;
    let mut max_terms = 0;
    for kappa in [0.5, 1.0, 1.5, 2.0, 2.5, 4.0] {
        let tr = Trajectory::raised_cosine(kappa, 1.0).map_err(|e| e.to_string())?;
        let s = avg_force_series(&tr, &b, Component::Total, &opts()).map_err(|e| e.to_string())?;
        let q = quad_avg_force(&tr, &b, Component::Total).map_err(|e| e.to_string())?;
        let err = rel_err(s.normalized, q.normalized);
        ensure(err <= 1e-8, || format!("T/R={kappa}: {} vs {} ({err:.1e})", s.normalized, q.normalized))?;
        ensure(s.series_terms_used <= 80, || format!("T/R={kappa}: {} terms", s.series_terms_used))?;
        worst = worst.max(err);
        max_terms = max_terms.max(s.series_terms_used);
    }
    Ok(format!("max rel err {worst:.1e}, at most {max_terms} terms"))
}

fn instantaneous_series_vs_convolution() -> Outcome {
    let b = body();
    let mut worst = 0.0f64;
    for (t, default_duration) in [(1.5, cli::FIG2_DURATION), (2.5, cli::FIG3_DURATION)] {
        // the figure command itself, on the 100-point grid over [0, T + 2R]
        let mut cfg = RunConfig::new(if t == 1.5 { cli::Command::Fig2 } else { cli::Command::Fig3 });
        cfg.grid = Some(Grid::new(0.0, t + 2.0, 100).map_err(|e| e.to_string())?);
        let table = cli::cmd_fig2_fig3(&cfg, default_duration).map_err(|e| e.to_string())?;
        let t2s = table.column("t2").ok_or("no t2 column")?;
        let phi = table.column("phi_cosine").ok_or("no phi_cosine column")?;
        ensure(t2s.len() == 100, || format!("{} rows", t2s.len()))?;
        let tr = Trajectory::raised_cosine(t, 1.0).map_err(|e| e.to_string())?;
        for (t2, cf) in t2s.iter().zip(&phi) {
            let direct = force_at_time_series(&tr, *t2, &b, Component::Total, &opts()).map_err(|e| e.to_string())?;
            ensure(direct.normalized == *cf, || format!("CSV row at t2={t2} differs from the series"))?;
            let conv = conv_force(&tr, &b, *t2, Component::Total).map_err(|e| e.to_string())?;
            let err = rel_err(*cf, conv.normalized);
            ensure(err <= 1e-8, || format!("T={t} t2={t2}: {cf} vs {} ({err:.1e})", conv.normalized))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("200 points, max rel err {worst:.1e}; figure CSV rows identical"))
}

fn causality() -> Outcome {
    let b = body();
    let report = verify::check_causality(&b, &opts()).map_err(|e| e.to_string())?;
    ensure(report.passed() && report.max_abs_err() == 0.0, || report.summary())?;
    // every component, and a displaced polynomial with a jump at T
    let mut count = report.points.len();
    for t in [0.3, 1.5, 2.5, 7.0] {
        let trajectories = [
            Trajectory::raised_cosine(t, 0.2),
            Trajectory::steplike(t, -1.0),
            Trajectory::polynomial(t, 1.0, vec![1.0, 2.0, -0.5]),
        ];
        for tr in trajectories {
            let tr = tr.map_err(|e| e.to_string())?;
            for t2 in [-5.0, -1e-300, t + 2.0, t + 2.0 + f64::EPSILON, 50.0] {
                for comp in Component::ALL {
                    let f = force_at_time_series(&tr, t2, &b, comp, &opts()).map_err(|e| e.to_string())?;
                    ensure(f.value == 0.0, || format!("T={t} t2={t2} {comp}: {}", f.value))?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} evaluations exactly zero"))
}

fn averaging_consistency() -> Outcome {
    let report = verify::check_averaging(&body(), &opts()).map_err(|e| e.to_string())?;
    ensure(report.points.len() == 10, || format!("{} points", report.points.len()))?;
    ensure(report.passed() && report.max_rel_err() <= 1e-7, || report.summary())?;
    Ok(format!(
        "steplike and cosine at 5 kappa, max rel err {:.1e}",
        report.max_rel_err()
    ))
}

fn cross_expansion() -> Outcome {
    let b = body();
    let tr = Trajectory::raised_cosine(10.0, 1.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for k in [0.5, 1.5, 2.5, 4.0, 8.0] {
        let origin = force_at_time_series(&tr, k, &b, Component::Total, &opts()).map_err(|e| e.to_string())?;
        let current = force_current_derivatives(&tr, k, &b, Component::Total, &opts()).map_err(|e| e.to_string())?;
        let err = rel_err(current.normalized, origin.normalized);
        ensure(err <= 1e-7, || format!("t2/R={k}: {} vs {} ({err:.1e})", current.normalized, origin.normalized))?;
        worst = worst.max(err);
    }
    // a held displacement: only the neutralizer pulls
    let amplitude = 0.02;
    let plateau = Trajectory::polynomial(10.0, amplitude, vec![1.0]).map_err(|e| e.to_string())?;
    let expected = -b.force_scale() * amplitude;
    for k in [2.0, 2.5, 5.0, 9.9] {
        let total = force_current_derivatives(&plateau, k, &b, Component::Total, &opts()).map_err(|e| e.to_string())?;
        let bare = force_current_derivatives(&plateau, k, &b, Component::SelfForce, &opts()).map_err(|e| e.to_string())?;
        ensure(total.value == expected, || format!("plateau t2={k}: {} != {expected}", total.value))?;
        ensure(bare.value == 0.0, || format!("plateau t2={k} without neutralizer: {}", bare.value))?;
    }
    Ok(format!("max rel err {worst:.1e}; plateau exact with and without neutralizer"))
}

fn figure1() -> Outcome {
    let b = body();
    let mut cfg = RunConfig::new(cli::Command::Fig1);
    cfg.grid = Some(Grid::new(2.0, 8.0, 25).map_err(|e| e.to_string())?);
    let table = cli::cmd_fig1(&cfg).map_err(|e| e.to_string())?;
    for (t, phi) in table.column("T").unwrap().iter().zip(table.column("phi_avg_steplike").unwrap()) {
        ensure(phi == -1.0, || format!("steplike plateau at T={t}: {phi}"))?;
    }
    let diff = |t: f64| -> Result<(f64, f64, f64), String> {
        let tr = Trajectory::raised_cosine(t, 1.0).map_err(|e| e.to_string())?;
        let cosine = avg_force_series(&tr, &b, Component::Total, &opts()).map_err(|e| e.to_string())?;
        let step = steplike_avg_force(t, 1.0, &b, Component::Total).map_err(|e| e.to_string())?;
        Ok((cosine.normalized, step.normalized, (cosine.normalized - step.normalized).abs()))
    };
    // Both curves start from the same limit: for T << R the kernel acts as
    // -3 delta plus a bounded part and both profiles average to D_x, so the
    // normalized averages tend to -3 together. They separate once T is
    // comparable to the light-crossing time 2R.
    for t in [0.01, 0.05] {
        let (c, s, d) = diff(t)?;
        ensure((c + 3.0).abs() < 2.0 * t && (s + 3.0).abs() < 2.0 * t, || format!("T={t}: {c}, {s}"))?;
        ensure(d < 1e-3 * s.abs(), || format!("T={t}: cosine {c}, steplike {s}"))?;
    }
    let mut separation = Vec::new();
    for t in [1.5, 2.0, 2.5, 3.0] {
        let (c, s, d) = diff(t)?;
        ensure(d > 0.1 * s.abs(), || format!("T={t}: cosine {c}, steplike {s}"))?;
        separation.push(d / s.abs());
    }
    let d: Vec<f64> = [4.0, 6.0, 8.0].iter().map(|&t| diff(t).map(|x| x.2)).collect::<Result<_, _>>()?;
    ensure(d[0] > d[1] && d[1] > d[2], || format!("differences at T=4,6,8: {d:?}"))?;
    let min_sep = separation.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "plateau -1 for T>=2R; relative separation >= {min_sep:.2} for T in [1.5R, 3R]; |difference| at T=4,6,8: {:.3}, {:.3}, {:.3}",
        d[0], d[1], d[2]
    ))
}

fn negative_control() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("verify.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_selfforce"))
        .args(["verify", "--samples", "100000", "--perturb-kernel", "1e-6", "--out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(!status.status.success(), || "perturbed kernel still exits 0".into())?;
    ensure(status.status.code() == Some(1), || format!("exit status {:?}", status.status.code()))?;
    let csv = std::fs::read_to_string(&out).map_err(|e| format!("report not written: {e}"))?;
    ensure(csv.lines().any(|l| l.ends_with(",FAIL")), || "report has no failing row".into())?;
    Ok(format!("perturbation 1e-6 -> exit {}", status.status.code().unwrap()))
}

fn main() -> ExitCode {
    let checks: [Check; 11] = [
        ("kernel closure against the radial quadrature", kernel_closure),
        ("Monte-Carlo kernel oracle", monte_carlo_kernel),
        ("geometric-factor plateau and quadrature", geometric_factor_plateau),
        ("pair-distance moment identity", moment_identity),
        ("averaged force: series vs quadrature", average_series_vs_quadrature),
        ("instantaneous force: series vs convolution", instantaneous_series_vs_convolution),
        ("causality and support", causality),
        ("averaging consistency", averaging_consistency),
        ("cross-expansion consistency", cross_expansion),
        ("averaged-force curves against T", figure1),
        ("negative control", negative_control),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
