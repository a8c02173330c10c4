use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn selfforce(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_selfforce"));
    cmd.args(args).env_remove("SELFFORCE_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("SELFFORCE_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn figures_land_in_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, cols) in [
        ("fig1", "T,phi_avg_cosine,phi_avg_steplike,status"),
        ("fig2", "t2,phi_cosine,phi_steplike,status"),
        ("fig3", "t2,phi_cosine,phi_steplike,status"),
    ] {
        let out = selfforce(&[cmd], Some(dir.path()));
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
        let csv = fs::read_to_string(dir.path().join(format!("{cmd}.csv"))).unwrap();
        assert_eq!(header(&csv), cols);
        let rows = data_rows(&csv);
        assert_eq!(rows.len(), 400);
        assert!(rows.iter().all(|r| r.last().unwrap() == "ok"), "{cmd} has failing rows");
        assert!(csv.lines().any(|l| l.starts_with("# units: c=1")));
        assert!(!csv.contains('\r'));
    }
}

#[test]
fn figure_output_is_reproducible() {
    let a = selfforce(&["fig2", "--grid", "-0.5:4:50"], None);
    let b = selfforce(&["fig2", "--grid", "-0.5:4:50"], None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn figure_three_support_ends_at_t_plus_two_r() {
    let out = selfforce(&["fig3"], None);
    let csv = String::from_utf8(out.stdout).unwrap();
    for row in data_rows(&csv) {
        let t2: f64 = row[0].parse().unwrap();
        let cos: f64 = row[1].parse().unwrap();
        if !(0.0..4.5).contains(&t2) {
            assert_eq!(cos, 0.0, "t2={t2}");
        }
    }
}

#[test]
fn explicit_out_path_overrides_directory() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("axx_sweep.csv");
    let out = selfforce(
        &["axx", "--grid", "0.5:4:8", "--out", target.to_str().unwrap()],
        Some(dir.path()),
    );
    assert!(out.status.success());
    assert!(!dir.path().join("axx.csv").exists());
    let rows = data_rows(&fs::read_to_string(target).unwrap());
    assert_eq!(rows.len(), 8);
    // T = 4 is on the plateau: -1/T
    assert_eq!(rows[7][1], "-2.5000000000000000e-1");
}

#[test]
fn neutralizer_off_is_the_bare_self_force() {
    let off = selfforce(&["favg", "-T", "1.7", "--neutralizer", "off"], None);
    let bare = selfforce(&["favg", "-T", "1.7", "--component", "self"], None);
    let total = selfforce(&["favg", "-T", "1.7"], None);
    let value = |o: &Output| data_rows(&String::from_utf8_lossy(&o.stdout))[0][2].clone();
    assert_eq!(value(&off), value(&bare));
    assert_ne!(value(&off), value(&total));
}

#[test]
fn force_expansions_agree() {
    let origin = selfforce(&["force", "-T", "10", "--t2", "3.3"], None);
    let current = selfforce(&["force", "-T", "10", "--t2", "3.3", "--expansion", "current"], None);
    let phi = |o: &Output| -> f64 { data_rows(&String::from_utf8_lossy(&o.stdout))[0][2].parse().unwrap() };
    assert!((phi(&origin) - phi(&current)).abs() < 1e-9);
    // outside its domain the current expansion reports the error in the row
    let outside = selfforce(&["force", "-T", "2", "--t2", "3", "--expansion", "current"], None);
    assert!(outside.status.success());
    let rows = data_rows(&String::from_utf8_lossy(&outside.stdout));
    assert!(rows[0].last().unwrap().starts_with("error:"));
    assert_eq!(rows[0][1], "NaN");
}

#[test]
fn polynomial_trajectory_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ramp.txt");
    fs::write(&path, "# smooth ramp up and back\nT=3 amplitude=0.5\npoly: 0, 0, 1, -0.3333333333333333\n").unwrap();
    let spec = format!("file:{}", path.display());
    let from_file = selfforce(&["favg", "--trajectory", &spec], None);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    let inline = selfforce(
        &["favg", "-T", "3", "--amplitude", "0.5", "--trajectory", "poly:0,0,1,-0.3333333333333333"],
        None,
    );
    let row = |o: &Output| data_rows(&String::from_utf8_lossy(&o.stdout))[0].clone();
    assert_eq!(row(&from_file), row(&inline));
}

#[test]
fn sampled_trajectory_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.txt");
    fs::write(&path, "T=1 amplitude=1\n0.0 0.0\n0.5 0.3\n1.0 0.0\n").unwrap();
    let out = selfforce(&["favg", "--trajectory", &format!("file:{}", path.display())], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampled"));
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["fig1", "--grid", "3:1:10"][..],
        &["fig1", "--grid", "0:1:1"],
        &["favg", "--trajectory", "spline"],
        &["favg", "-R", "-1"],
        &["force", "-T", "2"],
    ] {
        let out = selfforce(args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn verify_passes_and_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = selfforce(&["verify", "--samples", "200000"], Some(dir.path()));
    let text = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("checks passed"));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert_eq!(header(&csv), "quantity,x,closed_form,oracle,abs_err,rel_err,standard_error,pass");
    assert!(data_rows(&csv).iter().all(|r| r[7] == "pass"));
}

#[test]
fn verify_catches_a_perturbed_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let out = selfforce(&["verify", "--samples", "20000", "--perturb-kernel", "0.05"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("kernel_I_radial_quadrature") && l.ends_with(",FAIL")));
}
