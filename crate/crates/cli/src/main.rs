//! `cavsim`: batch front end for the cavity-qubit simulator.

mod canned;
mod config;
mod error;
mod experiments;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavsim::analysis::{
    fit_cat_cut, fit_cosine, fit_decay, fit_exp_cos, fit_exponential, fit_gaussian, fit_proportional,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use canned::Target;
use config::RunConfig;
use error::{CliError, CliResult};
use experiments::{budget_outputs, execute, RunOptions};
use output::{sha256_hex, Manifest, OutputSet};

/// Environment variable holding the default output directory.
const OUT_ENV: &str = "CAVSIM_OUT";
const DEFAULT_OUT: &str = "cavsim-out";

#[derive(Debug, Parser)]
#[command(name = "cavsim", version, about = "Cavity-qubit simulations, fits and loss budgets")]
struct Cli {
    /// Output directory (default: the config's `output.directory`, then
    /// $CAVSIM_OUT/<name>, then ./cavsim-out/<name>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for synthetic shot noise; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiplies the integrator tolerances.
    #[arg(long, global = true, default_value_t = 1.0, value_parser = positive_f64)]
    tolerance_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every experiment of a JSON config.
    Run { config: PathBuf },
    /// Run a built-in configuration.
    Reproduce { target: Target },
    /// Evaluate the cavity loss budget of a JSON config.
    Budget { config: PathBuf },
    /// Fit a two-column CSV (header row required).
    Fit { model: Model, csv: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Exponential,
    Decay,
    ExpCos,
    Cosine,
    Gaussian,
    CatCut,
    Proportional,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Self::Exponential => "exponential",
            Self::Decay => "decay",
            Self::ExpCos => "exp_cos",
            Self::Cosine => "cosine",
            Self::Gaussian => "gaussian",
            Self::CatCut => "cat_cut",
            Self::Proportional => "proportional",
        }
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number > 0, got `{s}`")),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn out_dir(cli: &Cli, configured: Option<&str>, name: &str) -> PathBuf {
    if let Some(d) = &cli.out {
        return d.clone();
    }
    if let Some(d) = configured {
        return PathBuf::from(d);
    }
    match std::env::var_os(OUT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(name),
        _ => PathBuf::from(DEFAULT_OUT).join(name),
    }
}

fn manifest(cli: &Cli, command: String, name: &str, config_text: &str, seed: u64) -> Manifest {
    Manifest {
        tool: "cavsim".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        core_version: cavsim::VERSION.into(),
        command,
        config_name: name.into(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        seed,
        tolerance_scale: cli.tolerance_scale,
        files: Vec::new(),
    }
}

fn finish(dir: &Path, out: OutputSet, m: Manifest) -> CliResult<()> {
    let m = out.flush(dir, m)?;
    println!("wrote {} files to {}", m.files.len() + 1, dir.display());
    for f in &m.files {
        println!("  {}", f.path);
    }
    Ok(())
}

fn run_config(cli: &Cli, text: &str, source: &str, command: String) -> CliResult<()> {
    let cfg = RunConfig::from_json(text, source)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let opts = RunOptions { seed, tolerance_scale: cli.tolerance_scale };
    let mut out = OutputSet::new();
    execute(&cfg, &opts, &mut out)?;
    let dir = out_dir(cli, cfg.output.directory.as_deref(), &cfg.name);
    finish(&dir, out, manifest(cli, command, &cfg.name, text, seed))
}

fn read_series(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let parse_err = |message: String| CliError::Parse { source_name: path.display().to_string(), message };
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = r.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    if headers.len() < 2 {
        return Err(parse_err("need a header row with at least two columns".into()));
    }
    if headers.iter().all(|h| h.trim().parse::<f64>().is_ok()) {
        return Err(parse_err("first row looks numeric; a header row is required".into()));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let num = |c: usize| -> CliResult<f64> {
            let field = rec.get(c).unwrap_or("").trim();
            field.parse::<f64>().map_err(|_| parse_err(format!("row {}: column {} is not a number: `{field}`", k + 2, c + 1)))
        };
        x.push(num(0)?);
        y.push(num(1)?);
    }
    Ok((x, y))
}

fn fit_csv(cli: &Cli, model: Model, path: &Path) -> CliResult<()> {
    let (x, y) = read_series(path)?;
    let report = match model {
        Model::Exponential => json!(fit_exponential(&x, &y)?),
        Model::Decay => json!(fit_decay(&x, &y)?),
        Model::ExpCos => json!(fit_exp_cos(&x, &y)?),
        Model::Cosine => json!(fit_cosine(&x, &y)?),
        Model::Gaussian => json!(fit_gaussian(&x, &y)?),
        Model::CatCut => json!(fit_cat_cut(&x, &y)?),
        Model::Proportional => json!(fit_proportional(&x, &y)?),
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    let mut out = OutputSet::new();
    out.add_json(&format!("fit_{}.json", model.name()), &report)?;
    let text = read(path)?;
    let dir = out_dir(cli, None, "fit");
    finish(&dir, out, manifest(cli, format!("fit {}", model.name()), "fit", &text, cli.seed.unwrap_or(0)))
}

fn budget(cli: &Cli, path: &Path) -> CliResult<()> {
    let text = read(path)?;
    let cfg = RunConfig::from_json(&text, &path.display().to_string())?;
    let mut out = OutputSet::new();
    out.add_json("config.json", &cfg)?;
    budget_outputs(&cfg, "budget", &mut out)?;
    let dir = out_dir(cli, cfg.output.directory.as_deref(), &cfg.name);
    finish(&dir, out, manifest(cli, "budget".into(), &cfg.name, &text, cli.seed.unwrap_or(cfg.seed)))
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::validation("--threads", "must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation("--threads", e.to_string()))?;
    }
    match &cli.command {
        Command::Run { config } => {
            let text = read(config)?;
            run_config(cli, &text, &config.display().to_string(), "run".into())
        }
        Command::Reproduce { target } => {
            run_config(cli, target.config(), target.name(), format!("reproduce {}", target.name()))
        }
        Command::Budget { config } => budget(cli, config),
        Command::Fit { model, csv } => fit_csv(cli, *model, csv),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
