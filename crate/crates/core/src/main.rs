use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sphere_selfforce::cli::{self, Command, Expansion, Grid, RunConfig, Table, TrajectorySpec};
use sphere_selfforce::Component;

#[derive(Parser, Debug)]
#[command(name = "selfforce", version, about = "Self-force on a slowly displaced charged sphere (c = 1)")]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// Displacement duration T (command default when omitted).
    #[arg(short = 'T', long = "duration", global = true)]
    duration: Option<f64>,

    /// Sphere radius R.
    #[arg(short = 'R', long = "radius", global = true, default_value_t = 1.0)]
    radius: f64,

    /// Uniform charge density.
    #[arg(long, global = true, default_value_t = 1.0)]
    charge_density: f64,

    /// step | cosine | poly:c0,c1,... | file:path
    #[arg(long, global = true, default_value = "cosine")]
    trajectory: String,

    /// Displacement amplitude D_x.
    #[arg(long, global = true, default_value_t = 1.0, allow_hyphen_values = true)]
    amplitude: f64,

    #[arg(long, global = true, value_enum, default_value_t = ComponentArg::Total)]
    component: ComponentArg,

    /// Whether the neutralizing body is present.
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    neutralizer: Switch,

    /// Series stopping tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    /// Maximum number of series terms.
    #[arg(long, global = true, default_value_t = 80)]
    n_max: usize,

    /// Sweep grid start:stop:count.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,

    /// Observation time for `force`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    t2: Option<f64>,

    /// Expansion point for `force`.
    #[arg(long, global = true, value_enum, default_value_t = ExpansionArg::Origin)]
    expansion: ExpansionArg,

    /// Monte-Carlo seed for `verify`.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Monte-Carlo sample count for `verify`.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    samples: u64,

    /// Relative error injected into the closed-form kernel (negative control).
    #[arg(long, global = true, default_value_t = 0.0, hide = true, allow_hyphen_values = true)]
    perturb_kernel: f64,

    /// Output file (default: $SELFFORCE_OUT_DIR/<command>.csv, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Geometric factor A_xx(T).
    Axx,
    /// Time-averaged force from the Taylor series.
    Favg,
    /// Instantaneous force F(t2).
    Force,
    /// Normalized averaged force against T (cosine and steplike).
    Fig1,
    /// Normalized force against t2, T = 1.5.
    Fig2,
    /// Normalized force against t2, T = 2.5.
    Fig3,
    /// Run every closed form against its oracle; exit status 0 iff all pass.
    Verify,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ComponentArg {
    Total,
    #[value(name = "self")]
    SelfForce,
    Electrostatic,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Switch {
    On,
    Off,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ExpansionArg {
    Origin,
    Current,
}

impl Args {
    fn into_config(self) -> sphere_selfforce::Result<RunConfig> {
        let command = match self.command {
            Cmd::Axx => Command::Axx,
            Cmd::Favg => Command::Favg,
            Cmd::Force => Command::Force,
            Cmd::Fig1 => Command::Fig1,
            Cmd::Fig2 => Command::Fig2,
            Cmd::Fig3 => Command::Fig3,
            Cmd::Verify => Command::Verify,
        };
        let mut cfg = RunConfig::new(command);
        cfg.duration = self.duration;
        cfg.radius = self.radius;
        cfg.charge_density = self.charge_density;
        cfg.trajectory = self.trajectory.parse::<TrajectorySpec>()?;
        cfg.amplitude = self.amplitude;
        cfg.component = match self.component {
            ComponentArg::Total => Component::Total,
            ComponentArg::SelfForce => Component::SelfForce,
            ComponentArg::Electrostatic => Component::Electrostatic,
        };
        cfg.neutralizer = self.neutralizer == Switch::On;
        cfg.tol = self.tol;
        cfg.n_max = self.n_max;
        cfg.grid = self.grid.as_deref().map(str::parse::<Grid>).transpose()?;
        cfg.t2 = self.t2;
        cfg.expansion = match self.expansion {
            ExpansionArg::Origin => Expansion::Origin,
            ExpansionArg::Current => Expansion::Current,
        };
        cfg.seed = self.seed;
        cfg.samples = self.samples;
        cfg.kernel_perturbation = self.perturb_kernel;
        cfg.out = self.out;
        cfg.body()?;
        Ok(cfg)
    }
}

fn write_table(table: &Table, path: Option<&PathBuf>) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            table.write_csv(&mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write_csv(&mut w)
        }
    }
}

fn run(cfg: &RunConfig) -> Result<bool, String> {
    let env_dir = std::env::var_os(cli::OUT_DIR_ENV).map(PathBuf::from);
    let out = cli::resolve_output(cfg, env_dir.as_deref());
    let (table, passed) = match cfg.command {
        Command::Axx => (cli::cmd_axx(cfg), true),
        Command::Favg => (cli::cmd_favg(cfg), true),
        Command::Force => (cli::cmd_force(cfg), true),
        Command::Fig1 => (cli::cmd_fig1(cfg), true),
        Command::Fig2 => (cli::cmd_fig2_fig3(cfg, cli::FIG2_DURATION), true),
        Command::Fig3 => (cli::cmd_fig2_fig3(cfg, cli::FIG3_DURATION), true),
        Command::Verify => {
            let (summary, table) = cli::cmd_verify(cfg).map_err(|e| e.to_string())?;
            let stderr = io::stderr();
            summary
                .write_text(&mut stderr.lock())
                .map_err(|e| e.to_string())?;
            (Ok(table), summary.passed())
        }
    };
    let table = table.map_err(|e| e.to_string())?;
    write_table(&table, out.as_ref()).map_err(|e| format!("cannot write output: {e}"))?;
    Ok(passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match args.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("selfforce: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("selfforce: {e}");
            ExitCode::from(2)
        }
    }
}
