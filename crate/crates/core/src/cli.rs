//! `lvflux` command line.
//!
//! Each subcommand writes its artifacts (CSV, PPM) and a JSON run manifest
//! holding the resolved parameters. `lvflux replay <manifest>` reruns a command
//! from its manifest alone and rewrites identical bytes.
//!
//! Exit codes: 0 success, 2 usage, 3 non-physical trajectory, 4 no stationary
//! point, 5 regime not stable, 1 I/O failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::basin::{map_basin, BasinConfig};
use crate::ensemble::{fit_alpha, run_msd};
use crate::error::Error;
use crate::integrator::{simulate, SimConfig};
use crate::model::{FluxParams, NoiseDistribution, NoiseSpec, NoiseTarget, State};
use crate::moments::{closed_form_zero_flux, solve_moments};
use crate::output::{write_ppm, CsvWriter, Field};
use crate::stability::{analyze, regime_diagram, Axis};

/// Master seed used when neither `--seed` nor `LVFLUX_SEED` is given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "lvflux",
    version,
    about = "Open Lotka-Volterra system with fluxes and kinetic noise"
)]
pub struct Cli {
    /// Worker threads for grid and ensemble commands. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command", content = "params")]
pub enum Command {
    /// Stationary point, eigenvalues and regime as JSON.
    SteadyState(SteadyStateArgs),
    /// Regime map of the (bx, by) plane.
    RegimeDiagram(RegimeDiagramArgs),
    /// One trajectory as CSV `t,x,y`.
    Simulate(SimulateArgs),
    /// Ensemble mean squared displacement and fitted alpha.
    Ensemble(EnsembleArgs),
    /// Second-moment equations for prey-birthrate noise.
    Moments(MomentsArgs),
    /// Convergence region around a stable stationary point.
    Basin(BasinArgs),
    /// Rerun a command from a manifest file.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SteadyStateArgs {
    #[arg(long)]
    pub bx: f64,
    #[arg(long)]
    pub by: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct RegimeDiagramArgs {
    #[arg(long, default_value_t = -2.0)]
    pub bx_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub bx_max: f64,
    #[arg(long, default_value_t = -2.0)]
    pub by_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub by_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// CSV output `bx,by,regime_code`; standard output when neither file is given.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub ppm: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct NoiseArgs {
    /// One of k1, k2, k3, k4, flux-x, flux-y.
    #[arg(long)]
    pub noise_target: Option<NoiseTarget>,
    #[arg(long, default_value_t = 0.07)]
    pub amplitude: f64,
    #[arg(long, default_value_t = NoiseDistribution::Uniform)]
    pub dist: NoiseDistribution,
    #[arg(long, env = "LVFLUX_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Integrate deviations from the stationary point with the linearized system.
    #[arg(long)]
    pub linearized: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[arg(long)]
    pub bx: f64,
    #[arg(long)]
    pub by: f64,
    #[arg(long)]
    pub x0: f64,
    #[arg(long)]
    pub y0: f64,
    #[arg(long)]
    pub dt: f64,
    #[arg(long)]
    pub t_end: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct EnsembleArgs {
    #[arg(long, default_value_t = 0.0)]
    pub bx: f64,
    #[arg(long, default_value_t = 0.0)]
    pub by: f64,
    /// Start; defaults to the stationary point.
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub y0: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    /// Noise target.
    #[arg(long, default_value_t = NoiseTarget::K1)]
    pub noise_target: NoiseTarget,
    #[arg(long, default_value_t = 0.07)]
    pub amplitude: f64,
    #[arg(long, default_value_t = NoiseDistribution::Uniform)]
    pub dist: NoiseDistribution,
    #[arg(long, env = "LVFLUX_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub linearized: bool,
    /// Fit window start; defaults to t_end / 10.
    #[arg(long)]
    pub fit_from: Option<f64>,
    /// Fit window end; defaults to t_end.
    #[arg(long)]
    pub fit_to: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct MomentsArgs {
    #[arg(long)]
    pub bx: f64,
    #[arg(long)]
    pub by: f64,
    #[arg(long)]
    pub amplitude: f64,
    #[arg(long)]
    pub dt: f64,
    #[arg(long)]
    pub t_end: f64,
    /// Add the zero-flux closed-form columns (requires bx = by = 0).
    #[arg(long)]
    pub closed_form: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct BasinArgs {
    #[arg(long)]
    pub bx: f64,
    #[arg(long)]
    pub by: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub y_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub y_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, default_value_t = BasinConfig::default().t_max)]
    pub t_max: f64,
    #[arg(long, default_value_t = BasinConfig::default().eps_in)]
    pub eps_in: f64,
    #[arg(long, default_value_t = BasinConfig::default().r_out)]
    pub r_out: f64,
    #[arg(long, default_value_t = BasinConfig::default().dt)]
    pub dt: f64,
    /// CSV output `x,y,outcome`; standard output when neither file is given.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub ppm: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Everything needed to regenerate a command's artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub command: Command,
    pub seed: Option<u64>,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidTimeStep(_) | Error::InvalidConfig(_) => 2,
            Error::NonPhysicalState { .. } => 3,
            Error::NoStationaryPoint(_) => 4,
            Error::NotStableRegime(_) => 5,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult = std::result::Result<(), CliError>;

/// Destination for a textual artifact: a file, or the command's standard output.
fn sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> io::Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn write_manifest(
    command: &Command,
    seed: Option<u64>,
    explicit: Option<&Path>,
    artifacts: Vec<PathBuf>,
) -> CliResult {
    let path = match (explicit, artifacts.first()) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(first)) => {
            let mut s = first.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        (None, None) => return Ok(()),
    };
    let manifest = RunManifest {
        tool: "lvflux".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.clone(),
        seed,
        artifacts,
    };
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, &manifest).map_err(io::Error::from)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn paths(list: &[&Option<PathBuf>]) -> Vec<PathBuf> {
    list.iter().filter_map(|p| (*p).clone()).collect()
}

/// Runs one command, writing textual output to `stdout`.
pub fn execute(command: &Command, stdout: &mut dyn Write) -> CliResult {
    match command {
        Command::SteadyState(a) => steady_state(a, stdout),
        Command::RegimeDiagram(a) => {
            regime(a, stdout)?;
            write_manifest(
                command,
                None,
                a.manifest.as_deref(),
                paths(&[&a.csv, &a.ppm]),
            )
        }
        Command::Simulate(a) => {
            let result = simulate_cmd(a, stdout);
            write_manifest(
                command,
                Some(a.noise.seed),
                a.manifest.as_deref(),
                paths(&[&a.out]),
            )?;
            result
        }
        Command::Ensemble(a) => {
            let result = ensemble(a, stdout);
            write_manifest(
                command,
                Some(a.seed),
                a.manifest.as_deref(),
                paths(&[&a.out]),
            )?;
            result
        }
        Command::Moments(a) => {
            moments(a, stdout)?;
            write_manifest(command, None, a.manifest.as_deref(), paths(&[&a.out]))
        }
        Command::Basin(a) => {
            basin(a, stdout)?;
            write_manifest(
                command,
                None,
                a.manifest.as_deref(),
                paths(&[&a.csv, &a.ppm]),
            )
        }
        Command::Replay(r) => {
            let text = std::fs::read_to_string(&r.manifest)?;
            let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| {
                CliError::usage(format!("bad manifest {}: {e}", r.manifest.display()))
            })?;
            execute(&manifest.command, stdout)
        }
    }
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SteadyStateJson {
    bx: f64,
    by: f64,
    exists: bool,
    discriminant: f64,
    x_st: Option<f64>,
    y_st: Option<f64>,
    lambda1: Option<ComplexJson>,
    lambda2: Option<ComplexJson>,
    regime: &'static str,
}

fn steady_state(a: &SteadyStateArgs, stdout: &mut dyn Write) -> CliResult {
    let s = analyze(FluxParams::new(a.bx, a.by));
    let c = |z: num_complex::Complex64| s.exists.then_some(ComplexJson { re: z.re, im: z.im });
    let doc = SteadyStateJson {
        bx: a.bx,
        by: a.by,
        exists: s.exists,
        discriminant: s.discriminant,
        x_st: s.exists.then_some(s.x_st),
        y_st: s.exists.then_some(s.y_st),
        lambda1: c(s.lambda1),
        lambda2: c(s.lambda2),
        regime: s.regime.name(),
    };
    serde_json::to_writer_pretty(&mut *stdout, &doc).map_err(io::Error::from)?;
    writeln!(stdout)?;
    Ok(())
}

fn regime(a: &RegimeDiagramArgs, stdout: &mut dyn Write) -> CliResult {
    let grid = regime_diagram((a.bx_min, a.bx_max), (a.by_min, a.by_max), a.step)?;
    if a.csv.is_some() || a.ppm.is_none() {
        let mut w = CsvWriter::new(
            sink(a.csv.as_deref(), stdout)?,
            &["bx", "by", "regime_code"],
        )?;
        for (bx, by, r) in grid.iter() {
            w.row(&[Field::F(bx), Field::F(by), Field::U(r.code() as u64)])?;
        }
        w.finish()?;
    }
    if let Some(p) = &a.ppm {
        write_ppm(BufWriter::new(File::create(p)?), &grid, |r| r.color())?;
    }
    Ok(())
}

fn noise_spec(
    target: Option<NoiseTarget>,
    amplitude: f64,
    dist: NoiseDistribution,
) -> Option<NoiseSpec> {
    target.map(|t| NoiseSpec::new(t, amplitude, dist))
}

fn simulate_cmd(a: &SimulateArgs, stdout: &mut dyn Write) -> CliResult {
    let n = &a.noise;
    let mut cfg = SimConfig::new(
        FluxParams::new(a.bx, a.by),
        State::new(a.x0, a.y0),
        a.dt,
        a.t_end,
    )
    .with_seed(n.seed)
    .linearized(n.linearized);
    cfg.noise = noise_spec(n.noise_target, n.amplitude, n.dist);
    let run = simulate(&cfg)?;
    let header: &[&str] = if n.linearized {
        &["t", "dx", "dy"]
    } else {
        &["t", "x", "y"]
    };
    let mut w = CsvWriter::new(sink(a.out.as_deref(), stdout)?, header)?;
    for (t, s) in run.trajectory.times.iter().zip(&run.trajectory.states) {
        w.row(&[Field::F(*t), Field::F(s.x), Field::F(s.y)])?;
    }
    if let Some(t) = run.nonphysical_at {
        w.comment(&format!("nonphysical at t={t}"))?;
    }
    w.finish()?;
    match run.nonphysical_at {
        Some(t) => Err(Error::NonPhysicalState { t }.into()),
        None => Ok(()),
    }
}

fn ensemble(a: &EnsembleArgs, stdout: &mut dyn Write) -> CliResult {
    let flux = FluxParams::new(a.bx, a.by);
    let st = analyze(flux).physical_point()?;
    let start = State::new(a.x0.unwrap_or(st.x), a.y0.unwrap_or(st.y));
    let cfg = SimConfig::new(flux, start, a.dt, a.t_end)
        .with_noise(NoiseSpec::new(a.noise_target, a.amplitude, a.dist))
        .with_seed(a.seed)
        .linearized(a.linearized);
    let series = run_msd(&cfg, a.m)?;
    {
        let mut w = CsvWriter::new(
            sink(a.out.as_deref(), stdout)?,
            &["t", "msd", "valid_count"],
        )?;
        for ((t, msd), c) in series.times.iter().zip(&series.msd).zip(&series.valid) {
            w.row(&[Field::F(*t), Field::F(*msd), Field::U(*c as u64)])?;
        }
        w.finish()?;
    }
    let (from, to) = series.default_window();
    let (from, to) = (a.fit_from.unwrap_or(from), a.fit_to.unwrap_or(to));
    if a.amplitude > 0.0 {
        let alpha = fit_alpha(&series, a.amplitude, from, to)?;
        writeln!(stdout, "alpha={alpha}")?;
    } else {
        writeln!(stdout, "alpha=undefined")?;
    }
    if series.valid.last().copied().unwrap_or(0) == 0 {
        let t = series
            .valid
            .iter()
            .position(|&c| c == 0)
            .map(|k| series.times[k])
            .unwrap_or(0.0);
        return Err(Error::NonPhysicalState { t }.into());
    }
    Ok(())
}

fn moments(a: &MomentsArgs, stdout: &mut dyn Write) -> CliResult {
    let flux = FluxParams::new(a.bx, a.by);
    if a.closed_form && (a.bx != 0.0 || a.by != 0.0) {
        return Err(CliError::usage("--closed-form requires --bx 0 --by 0"));
    }
    let series = solve_moments(flux, a.amplitude, a.dt, a.t_end)?;
    let mut header = vec!["t", "var_x", "var_y", "cov_xy"];
    if a.closed_form {
        header.extend(["cf_var_x", "cf_var_y", "cf_cov_xy"]);
    }
    let mut max_dev: f64 = 0.0;
    {
        let mut w = CsvWriter::new(sink(a.out.as_deref(), stdout)?, &header)?;
        for (t, m) in series.times.iter().zip(&series.states) {
            if a.closed_form {
                let c = closed_form_zero_flux(a.amplitude, *t);
                max_dev = max_dev
                    .max((m.var_x - c.var_x).abs())
                    .max((m.var_y - c.var_y).abs())
                    .max((m.cov_xy - c.cov_xy).abs());
                w.row(&[
                    Field::F(*t),
                    Field::F(m.var_x),
                    Field::F(m.var_y),
                    Field::F(m.cov_xy),
                    Field::F(c.var_x),
                    Field::F(c.var_y),
                    Field::F(c.cov_xy),
                ])?;
            } else {
                w.row(&[
                    Field::F(*t),
                    Field::F(m.var_x),
                    Field::F(m.var_y),
                    Field::F(m.cov_xy),
                ])?;
            }
        }
        w.finish()?;
    }
    if a.closed_form {
        writeln!(stdout, "max_deviation={max_dev}")?;
    }
    Ok(())
}

fn basin(a: &BasinArgs, stdout: &mut dyn Write) -> CliResult {
    let cfg = BasinConfig {
        t_max: a.t_max,
        eps_in: a.eps_in,
        r_out: a.r_out,
        dt: a.dt,
    };
    let grid = map_basin(
        FluxParams::new(a.bx, a.by),
        Axis::new(a.x_min, a.x_max, a.step)?,
        Axis::new(a.y_min, a.y_max, a.step)?,
        &cfg,
    )?;
    if a.csv.is_some() || a.ppm.is_none() {
        let mut w = CsvWriter::new(sink(a.csv.as_deref(), stdout)?, &["x", "y", "outcome"])?;
        for (x, y, o) in grid.iter() {
            w.row(&[Field::F(x), Field::F(y), Field::S(o.name())])?;
        }
        w.finish()?;
    }
    if let Some(p) = &a.ppm {
        write_ppm(BufWriter::new(File::create(p)?), &grid, |o| o.color())?;
    }
    writeln!(stdout, "converged_fraction={}", grid.converged_fraction())?;
    Ok(())
}

/// Parses `args`, runs the command on a pool of `--threads` workers and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "lvflux: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli.command, &mut *stdout)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "lvflux: {e}");
            e.code
        }
    }
}
