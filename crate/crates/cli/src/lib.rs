//! Command-line front end for `blie`.
//!
//! Exit codes: `0` success, `1` verification or computation failure, `2`
//! configuration or usage error.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use blie::dynamics::{casimir_candidates, hamiltonian_vf, integrate, leaf_report, FlowOptions};
use blie::reduction::{ambient_bracket_table, ReducedPoisson};
use blie::sampling::SampleBox;
use blie::verify::{self, VerifyOptions};
use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{ConfigError, ConnectionChoice, RunConfig};

/// Environment variable naming the output directory; it overrides
/// `[output] dir`.
pub const OUT_DIR_ENV: &str = "BLIE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "blie", version, about = "b-symplectic geometry on b-Lie groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every randomized check (overrides `seed`).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Replace every numerical tolerance of `verify`.
    #[arg(long, global = true, value_name = "X")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimensions, basis, brackets, subgroup and trivialization.
    Describe,
    /// Run the full verification suite.
    Verify,
    /// Coefficients of the reduced Poisson structure as CSV.
    Reduce {
        /// Also list brackets of the ambient G-momenta.
        #[arg(long)]
        ambient: bool,
    },
    /// Integrate a Hamiltonian flow on the reduced space; CSV trajectory.
    Flow,
    /// Structure constants of the Lie algebra as CSV.
    BracketTable,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            _ => 2,
        }
    }
}

/// Where primary output goes.
struct Sink<'a> {
    out: Option<PathBuf>,
    dir: Option<PathBuf>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Sink<'_> {
    /// Writes `content` and returns the file written, if any.
    fn emit(&mut self, default_name: &str, content: &str) -> Result<Option<PathBuf>, CliError> {
        let path = match (&self.out, &self.dir) {
            (Some(p), _) => p.clone(),
            (None, Some(d)) => d.join(default_name),
            (None, None) => {
                self.stdout
                    .write_all(content.as_bytes())
                    .map_err(|source| CliError::Output { path: "<stdout>".into(), source })?;
                return Ok(None);
            }
        };
        write_file(&path, content)?;
        Ok(Some(path))
    }

    fn say(&mut self, text: &str) {
        let _ = self.stdout.write_all(text.as_bytes());
    }

    fn warn(&mut self, text: &str) {
        let _ = self.stderr.write_all(text.as_bytes());
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    let err = |source| CliError::Output { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(err)?;
    }
    std::fs::write(path, content).map_err(err)
}

fn quotient_symbol(q: &str) -> &str {
    match q {
        "S^1" => "S¹",
        "R" => "ℝ",
        other => other,
    }
}

fn describe(cfg: &RunConfig) -> Result<String, CliError> {
    let pair = cfg.pair()?;
    let declared = cfg.declared(&pair)?;
    let mut s = String::new();
    let _ = writeln!(s, "group: {} ({})", pair.name(), pair.g().name());
    let _ = writeln!(s, "dim G={}, dim H={}, G/H ≅ {}", pair.dim_g(), pair.dim_h(), quotient_symbol(pair.quotient()));
    let _ = writeln!(s, "basis: {}", declared.labels().join(", "));
    let _ = writeln!(s, "subgroup H: {} spanned by {}", pair.h().name(), pair.h_algebra().labels().join(", "));
    let _ = writeln!(s, "transverse: {}, defining coordinate {}", pair.g_algebra().label(pair.transverse()), pair.phi_name());
    let _ = writeln!(s, "trivialization: {}", pair.trivialization_summary());
    let _ = writeln!(s, "connection: {} ({} mode)", cfg.connection.kind, cfg.mode()?.name());
    let _ = writeln!(s, "brackets:");
    for l in declared.bracket_lines() {
        let _ = writeln!(s, "  {l}");
    }
    let red = ReducedPoisson::new(&pair, cfg.mode()?);
    let _ = writeln!(s, "reduced coordinates: {}", red.names().join(", "));
    Ok(s)
}

fn verify_cmd(cfg: &RunConfig, cli: &Cli, sink: &mut Sink) -> Result<(), CliError> {
    let pair = cfg.pair()?;
    let deformation = match cfg.connection(&pair)? {
        ConnectionChoice::Custom(d) => Some(d),
        ConnectionChoice::Standard(_) => None,
    };
    let tolerance = cli.tolerance.or(cfg.verify.tolerance);
    if tolerance.is_some_and(|t| !(t > 0.0)) {
        return Err(CliError::Usage("--tolerance must be positive".into()));
    }
    let opts = VerifyOptions {
        seed: cli.seed.unwrap_or(cfg.seed()),
        samples: cfg.verify.samples.unwrap_or(200),
        tolerance,
        declared: Some(cfg.declared(&pair)?),
        deformation,
        dynamics: cfg.verify.dynamics.unwrap_or(true),
    };
    let report = verify::run(&pair, &opts).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = report.render();
    if let Some(p) = sink.emit("verify.txt", &text)? {
        sink.say(&format!("wrote {}\n", p.display()));
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("verification failed: {}", report.failures().join("; "))))
    }
}

fn reduce_csv(cfg: &RunConfig, ambient: bool) -> Result<String, CliError> {
    let pair = cfg.pair()?;
    let mode = cfg.mode()?;
    let red = ReducedPoisson::new(&pair, mode);
    let mut s = String::new();
    if ambient {
        s.push_str("kind,left,right,value\n");
    } else {
        s.push_str("left,right,value\n");
    }
    let prefix = if ambient { "reduced," } else { "" };
    for e in red.table() {
        let _ = writeln!(s, "{prefix}{},{},{}", e.left, e.right, e.value);
    }
    if ambient {
        let table = ambient_bracket_table(&pair, mode).map_err(|e| CliError::Failure(e.to_string()))?;
        for e in table {
            let _ = writeln!(s, "ambient,{},{},{}", e.left, e.right, e.value);
        }
    }
    Ok(s)
}

fn flow_cmd(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let pair = cfg.pair()?;
    let mode = cfg.mode()?;
    let red = ReducedPoisson::new(&pair, mode);
    let names = red.names().to_vec();
    let settings = cfg.flow(&names)?;
    let x0: Vec<f64> = names.iter().map(|n| settings.x0.get(n).copied().unwrap_or(0.0)).collect();
    let k = pair.dim_h();
    let mut casimirs = casimir_candidates(red.bivector());
    for (text, e) in cfg.flow.casimirs.iter().zip(&settings.casimirs) {
        casimirs.push((text.clone(), e.clone()));
    }
    // S¹ quotients are charted by (−π, π); other coordinates only guard
    // against blow-up.
    let big = 1e12;
    let mut lo = vec![-big; names.len()];
    let mut hi = vec![big; names.len()];
    if pair.quotient() == "S^1" {
        lo[k] = -std::f64::consts::PI;
        hi[k] = std::f64::consts::PI;
    }
    let opts = FlowOptions {
        hamiltonian: Some(settings.hamiltonian.clone()),
        casimirs,
        phi_index: Some(k),
        bounds: Some(SampleBox { lo, hi }),
    };
    let fail = |e: blie::dynamics::DynamicsError| CliError::Failure(format!("flow failed: {e}"));
    let vf = hamiltonian_vf(red.bivector(), &settings.hamiltonian).map_err(fail)?;
    let traj = integrate(&vf, &x0, settings.dt, settings.t_end, settings.method, &opts).map_err(fail)?;
    let written = sink.emit("flow.csv", &traj.to_csv())?;
    let mut diag = String::new();
    let _ = writeln!(diag, "method: {}", settings.method.name());
    let _ = writeln!(diag, "dt: {:?}", settings.dt);
    for (key, v) in leaf_report(&traj).lines() {
        let _ = writeln!(diag, "{key}: {v}");
    }
    let last = traj.last();
    for (n, v) in names.iter().zip(last) {
        let _ = writeln!(diag, "final[{n}]: {v:?}");
    }
    if let Some(p) = written {
        sink.say(&format!("wrote {}\n", p.display()));
        sink.say(&diag);
    } else {
        sink.warn(&diag);
    }
    Ok(())
}

fn dispatch(cli: &Cli, sink: &mut Sink) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let cfg = RunConfig::load(path)?;
    sink.dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).or_else(|| cfg.output.dir.clone());
    match &cli.command {
        Command::Describe => {
            let text = describe(&cfg)?;
            sink.emit("describe.txt", &text)?;
        }
        Command::Verify => verify_cmd(&cfg, cli, sink)?,
        Command::Reduce { ambient } => {
            let csv = reduce_csv(&cfg, *ambient)?;
            if let Some(p) = sink.emit("reduce.csv", &csv)? {
                sink.say(&format!("wrote {}\n", p.display()));
            }
        }
        Command::Flow => flow_cmd(&cfg, sink)?,
        Command::BracketTable => {
            let pair = cfg.pair()?;
            let csv = cfg.declared(&pair)?.bracket_table_csv();
            if let Some(p) = sink.emit("brackets.csv", &csv)? {
                sink.say(&format!("wrote {}\n", p.display()));
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut sink = Sink { out: cli.out.clone(), dir: None, stdout, stderr };
    match dispatch(&cli, &mut sink) {
        Ok(()) => 0,
        Err(e) => {
            sink.warn(&format!("error: {e}\n"));
            e.exit_code()
        }
    }
}
