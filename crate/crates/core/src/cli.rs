//! Command implementations behind the `selfforce` binary.
//!
//! Every command produces a [`Table`]: `#`-prefixed comment lines recording
//! the configuration, a header, and rows of numbers formatted with
//! [`fmt_num`]. Output is a pure function of the configuration.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analytic::{
    avg_force_series, steplike_avg_force, eval_axx, force_at_time_series, force_current_derivatives, Component,
    ForceResult, SeriesOptions,
};
use crate::error::{Error, Result};
use crate::fmt_num;
use crate::geometry::SphereBody;
use crate::trajectory::Trajectory;
use crate::verify::{self, VerifyConfig, VerifySummary};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SELFFORCE_OUT_DIR";

pub const FIGURE_GRID_POINTS: usize = 400;
pub const FIG2_DURATION: f64 = 1.5;
pub const FIG3_DURATION: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Axx,
    Favg,
    Force,
    Fig1,
    Fig2,
    Fig3,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Axx => "axx",
            Command::Favg => "favg",
            Command::Force => "force",
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Verify => "verify",
        }
    }
}

/// How the displacement profile is specified on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectorySpec {
    Step,
    Cosine,
    Poly(Vec<f64>),
    File(PathBuf),
}

impl fmt::Display for TrajectorySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectorySpec::Step => f.write_str("step"),
            TrajectorySpec::Cosine => f.write_str("cosine"),
            TrajectorySpec::Poly(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            TrajectorySpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn parse_number_list(text: &str) -> Result<Vec<f64>> {
    let values: Result<Vec<f64>> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("'{s}' is not a number")))
        })
        .collect();
    let values = values?;
    if values.is_empty() {
        return Err(Error::Config("empty coefficient list".into()));
    }
    Ok(values)
}

impl FromStr for TrajectorySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(TrajectorySpec::Step),
            "cosine" => Ok(TrajectorySpec::Cosine),
            _ => {
                if let Some(rest) = s.strip_prefix("poly:") {
                    Ok(TrajectorySpec::Poly(parse_number_list(rest)?))
                } else if let Some(rest) = s.strip_prefix("file:") {
                    Ok(TrajectorySpec::File(PathBuf::from(rest)))
                } else {
                    Err(Error::Config(format!(
                        "unknown trajectory '{s}' (expected step, cosine, poly:c0,c1,... or file:path)"
                    )))
                }
            }
        }
    }
}

/// Contents of a trajectory file: duration, amplitude and polynomial
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub duration: f64,
    pub amplitude: f64,
    pub coefficients: Vec<f64>,
}

/// Parse
///
/// ```text
/// T=<value> amplitude=<value>
/// poly: c0, c1, c2, ...
/// ```
///
/// `#` starts a comment line. Sampled profiles are rejected: the series need
/// exact derivatives.
pub fn parse_trajectory_file(text: &str) -> Result<TrajectoryFile> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("trajectory file is empty".into()))?;
    let mut duration = None;
    let mut amplitude = None;
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("malformed header field '{field}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("header value '{value}' is not a number")))?;
        match key {
            "T" => duration = Some(value),
            "amplitude" => amplitude = Some(value),
            other => return Err(Error::Config(format!("unknown header key '{other}'"))),
        }
    }
    let duration = duration.ok_or_else(|| Error::Config("trajectory header lacks T=".into()))?;
    let amplitude = amplitude.ok_or_else(|| Error::Config("trajectory header lacks amplitude=".into()))?;

    let body: Vec<&str> = lines.collect();
    let sampled = || {
        Error::Config(
            "sampled trajectories are not supported: the force series need analytic derivatives, \
             give polynomial coefficients instead"
                .into(),
        )
    };
    match body.as_slice() {
        [] => Err(Error::Config("trajectory file has no coefficient line".into())),
        [line] => {
            if line.starts_with("samples") {
                return Err(sampled());
            }
            let list = line.strip_prefix("poly:").unwrap_or(line);
            Ok(TrajectoryFile {
                duration,
                amplitude,
                coefficients: parse_number_list(list)?,
            })
        }
        _ => Err(sampled()),
    }
}

/// Sweep grid `start:stop:count`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {count}")));
        }
        if !(start.is_finite() && stop.is_finite()) || stop <= start {
            return Err(Error::Config(format!("grid range [{start}, {stop}] is empty or not finite")));
        }
        Ok(Self { start, stop, count })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / n)
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(Error::Config(format!("grid '{s}' is not start:stop:count")));
        };
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::Config(format!("grid bound '{x}' is not a number")))
        };
        let count = count
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("grid count '{count}' is not an integer")))?;
        Grid::new(num(start)?, num(stop)?, count)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

/// Which Taylor expansion `force` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    /// Derivatives at the start of the motion.
    Origin,
    /// Derivatives at the observation time (requires `0 < t2 < T`).
    Current,
}

impl FromStr for Expansion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "origin" => Ok(Expansion::Origin),
            "current" => Ok(Expansion::Current),
            other => Err(Error::Config(format!("unknown expansion '{other}' (origin or current)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Displacement duration; commands fall back to their own default.
    pub duration: Option<f64>,
    pub radius: f64,
    pub charge_density: f64,
    pub trajectory: TrajectorySpec,
    pub amplitude: f64,
    pub component: Component,
    pub neutralizer: bool,
    pub tol: f64,
    pub n_max: usize,
    pub grid: Option<Grid>,
    pub t2: Option<f64>,
    pub expansion: Expansion,
    pub seed: u64,
    pub samples: u64,
    pub kernel_perturbation: f64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            duration: None,
            radius: 1.0,
            charge_density: 1.0,
            trajectory: TrajectorySpec::Cosine,
            amplitude: 1.0,
            component: Component::Total,
            neutralizer: true,
            tol: SeriesOptions::default().tol,
            n_max: SeriesOptions::default().n_max,
            grid: None,
            t2: None,
            expansion: Expansion::Origin,
            seed: 1,
            samples: 10_000_000,
            kernel_perturbation: 0.0,
            out: None,
        }
    }

    /// Component after applying `--neutralizer off`, which removes the
    /// electrostatic terms from the total.
    pub fn effective_component(&self) -> Component {
        match (self.neutralizer, self.component) {
            (false, Component::Total) => Component::SelfForce,
            (_, c) => c,
        }
    }

    pub fn series(&self) -> SeriesOptions {
        SeriesOptions {
            tol: self.tol,
            n_max: self.n_max,
        }
    }

    pub fn body(&self) -> Result<SphereBody> {
        SphereBody::new(self.radius, self.charge_density)
    }

    fn duration_or(&self, default: f64) -> Result<f64> {
        let t = self.duration.unwrap_or(default);
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("T must be positive, got {t}")));
        }
        Ok(t)
    }

    /// Build the trajectory; a file spec supplies its own `T` and amplitude.
    pub fn build_trajectory(&self, duration: f64) -> Result<Trajectory> {
        match &self.trajectory {
            TrajectorySpec::Step => Trajectory::steplike(duration, self.amplitude),
            TrajectorySpec::Cosine => Trajectory::raised_cosine(duration, self.amplitude),
            TrajectorySpec::Poly(c) => Trajectory::polynomial(duration, self.amplitude, c.clone()),
            TrajectorySpec::File(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let f = parse_trajectory_file(&text)?;
                Trajectory::polynomial(f.duration, f.amplitude, f.coefficients)
            }
        }
    }

    fn describe(&self) -> String {
        format!(
            "T={} R={} rho_c={} trajectory={} amplitude={} component={} neutralizer={} tol={} n_max={} grid={} t2={} expansion={} seed={} samples={}",
            self.duration.map_or_else(|| "default".into(), |t| t.to_string()),
            self.radius,
            self.charge_density,
            self.trajectory,
            self.amplitude,
            self.component,
            if self.neutralizer { "on" } else { "off" },
            self.tol,
            self.n_max,
            self.grid.map_or_else(|| "default".into(), |g| g.to_string()),
            self.t2.map_or_else(|| "none".into(), |t| t.to_string()),
            match self.expansion {
                Expansion::Origin => "origin",
                Expansion::Current => "current",
            },
            self.seed,
            self.samples,
        )
    }
}

/// A CSV document: comment lines, a header, and formatted rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn for_config(cfg: &RunConfig, header: &[&str]) -> Self {
        Self {
            comments: vec![
                format!("selfforce {VERSION}"),
                format!("command: {}", cfg.command.name()),
                format!("config: {}", cfg.describe()),
                format!(
                    "units: c=1, times and lengths in the same unit, R as configured (R={})",
                    cfg.radius
                ),
                "phi columns are F / (rho_c^2 V^2 D_x)".into(),
            ],
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("table is UTF-8")
    }

    /// Parse a numeric column back (tests and downstream tooling).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[idx].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

fn status_of(results: &[&Result<ForceResult>]) -> String {
    let errors: Vec<String> = results
        .iter()
        .filter_map(|r| r.as_ref().err())
        .map(|e| e.to_string().replace(',', ";"))
        .collect();
    if errors.is_empty() {
        "ok".into()
    } else {
        format!("error: {}", errors.join(" | "))
    }
}

fn cell(r: &Result<ForceResult>, pick: fn(&ForceResult) -> f64) -> String {
    r.as_ref().map_or_else(|_| "NaN".into(), |f| fmt_num(pick(f)))
}

/// `A_xx(T)` at one `T` or over a grid of `T`.
pub fn cmd_axx(cfg: &RunConfig) -> Result<Table> {
    let body = cfg.body()?;
    let mut table = Table::for_config(cfg, &["T", "axx", "phi_avg_steplike"]);
    let times = match cfg.grid {
        Some(g) => g.points(),
        None => vec![cfg.duration_or(1.5)?],
    };
    for t in times {
        let a = eval_axx(t, &body, cfg.effective_component())?;
        // the steplike averaged force over rho_c^2 V^2 D_x is T * A_xx
        table.rows.push(vec![fmt_num(t), fmt_num(a), fmt_num(t * a)]);
    }
    Ok(table)
}

/// Time-averaged force from the series, at one `T` or over a grid of `T`.
pub fn cmd_favg(cfg: &RunConfig) -> Result<Table> {
    let body = cfg.body()?;
    let mut table = Table::for_config(
        cfg,
        &["T", "force_avg", "phi_avg", "terms", "truncation", "status"],
    );
    let times = match (cfg.grid, &cfg.trajectory) {
        (Some(_), TrajectorySpec::File(_)) => {
            return Err(Error::Config("a trajectory file fixes T; drop --grid".into()))
        }
        (Some(g), _) => g.points(),
        (None, _) => vec![cfg.duration_or(1.5)?],
    };
    for t in times {
        let traj = cfg.build_trajectory(t)?;
        let r = avg_force_series(&traj, &body, cfg.effective_component(), &cfg.series());
        table.rows.push(vec![
            fmt_num(traj.duration()),
            cell(&r, |f| f.value),
            cell(&r, |f| f.normalized),
            r.as_ref().map_or_else(|_| "NaN".into(), |f| f.series_terms_used.to_string()),
            cell(&r, |f| f.truncation_estimate),
            status_of(&[&r]),
        ]);
    }
    Ok(table)
}

/// Instantaneous force at `--t2` or over a grid of `t2`.
pub fn cmd_force(cfg: &RunConfig) -> Result<Table> {
    let body = cfg.body()?;
    let traj = cfg.build_trajectory(cfg.duration_or(1.5)?)?;
    let mut table = Table::for_config(cfg, &["t2", "force", "phi", "terms", "truncation", "status"]);
    let times = match (cfg.grid, cfg.t2) {
        (Some(g), _) => g.points(),
        (None, Some(t2)) => vec![t2],
        (None, None) => return Err(Error::Config("force needs --t2 or --grid".into())),
    };
    for t2 in times {
        let r = match cfg.expansion {
            Expansion::Origin => force_at_time_series(&traj, t2, &body, cfg.effective_component(), &cfg.series()),
            Expansion::Current => {
                force_current_derivatives(&traj, t2, &body, cfg.effective_component(), &cfg.series())
            }
        };
        table.rows.push(vec![
            fmt_num(t2),
            cell(&r, |f| f.value),
            cell(&r, |f| f.normalized),
            r.as_ref().map_or_else(|_| "NaN".into(), |f| f.series_terms_used.to_string()),
            cell(&r, |f| f.truncation_estimate),
            status_of(&[&r]),
        ]);
    }
    Ok(table)
}

/// Normalized time-averaged force against `T`: raised cosine via the series,
/// steplike via the geometric factor.
pub fn cmd_fig1(cfg: &RunConfig) -> Result<Table> {
    let body = cfg.body()?;
    let grid = match cfg.grid {
        Some(g) => g,
        None => Grid::new(0.05 * body.radius(), 6.0 * body.radius(), FIGURE_GRID_POINTS)?,
    };
    let component = cfg.effective_component();
    let mut table = Table::for_config(cfg, &["T", "phi_avg_cosine", "phi_avg_steplike", "status"]);
    for t in grid.points() {
        let cosine = Trajectory::raised_cosine(t, 1.0)
            .and_then(|tr| avg_force_series(&tr, &body, component, &cfg.series()));
        let step = steplike_avg_force(t, 1.0, &body, component);
        table.rows.push(vec![
            fmt_num(t),
            cell(&cosine, |f| f.normalized),
            cell(&step, |f| f.normalized),
            status_of(&[&cosine, &step]),
        ]);
    }
    Ok(table)
}

/// Normalized instantaneous force against `t2` for the raised cosine and the
/// steplike motion (whose series keeps only its `n = 0` term).
pub fn cmd_fig2_fig3(cfg: &RunConfig, default_duration: f64) -> Result<Table> {
    let body = cfg.body()?;
    let t = cfg.duration_or(default_duration)?;
    let r = body.radius();
    let grid = match cfg.grid {
        Some(g) => g,
        None => Grid::new(-0.5 * r, t + 2.5 * r, FIGURE_GRID_POINTS)?,
    };
    let component = cfg.effective_component();
    let cosine = Trajectory::raised_cosine(t, 1.0)?;
    let step = Trajectory::steplike(t, 1.0)?;
    let mut table = Table::for_config(cfg, &["t2", "phi_cosine", "phi_steplike", "status"]);
    for t2 in grid.points() {
        let c = force_at_time_series(&cosine, t2, &body, component, &cfg.series());
        let s = force_at_time_series(&step, t2, &body, component, &cfg.series());
        table.rows.push(vec![
            fmt_num(t2),
            cell(&c, |f| f.normalized),
            cell(&s, |f| f.normalized),
            status_of(&[&c, &s]),
        ]);
    }
    Ok(table)
}

pub fn verify_config(cfg: &RunConfig) -> VerifyConfig {
    VerifyConfig {
        samples: cfg.samples,
        seed: cfg.seed,
        series: cfg.series(),
        kernel_perturbation: cfg.kernel_perturbation,
        ..VerifyConfig::default()
    }
}

/// Run the verification suite; the table holds every compared point.
pub fn cmd_verify(cfg: &RunConfig) -> Result<(VerifySummary, Table)> {
    let summary = verify::run(&verify_config(cfg))?;
    let mut table = Table::for_config(cfg, &[]);
    let mut buf = Vec::new();
    summary
        .write_csv_rows(&mut buf)
        .map_err(|e| Error::Config(e.to_string()))?;
    let text = String::from_utf8(buf).expect("report is UTF-8");
    let mut lines = text.lines();
    table.header = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .map(str::to_string)
        .collect();
    table.rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok((summary, table))
}

/// Where a command's CSV goes: `--out`, else `$SELFFORCE_OUT_DIR/<cmd>.csv`,
/// else standard output (`None`).
pub fn resolve_output(cfg: &RunConfig, env_dir: Option<&Path>) -> Option<PathBuf> {
    cfg.out
        .clone()
        .or_else(|| env_dir.map(|d| d.join(format!("{}.csv", cfg.command.name()))))
}
