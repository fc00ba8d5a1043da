use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use isoflow::stepping::Mode;
use isoflow_cli::config::{RunConfig, Scenario};
use isoflow_cli::run::metrics_text;
use isoflow_cli::sweep::{sweep, write_sweep, SweepSpec};
use isoflow_cli::{run, CliError, CliResult};

/// Isothermal two-phase flow solver.
#[derive(Debug, Parser)]
#[command(name = "isoflow", version)]
struct Args {
    /// lax, cavitation, nucleation or custom.
    #[arg(long)]
    scenario: Option<String>,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// explicit, mixed_ei or explicit_lts.
    #[arg(long)]
    mode: Option<String>,
    /// Number of cells.
    #[arg(long = "N")]
    cells: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the Lax iteration sweep instead, e.g. `theta=0.9;N=100;alpha=1e-2,1e-4`.
    #[arg(long)]
    sweep: Option<String>,
    /// Extra `key=value` overrides with config file key names.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn config(args: &Args) -> CliResult<RunConfig> {
    let scenario = args
        .scenario
        .as_deref()
        .map(str::parse::<Scenario>)
        .transpose()?;
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path, scenario)?,
        None => RunConfig::defaults(scenario.unwrap_or(Scenario::Cavitation)),
    };
    if let Some(m) = &args.mode {
        cfg.mode = m.parse::<Mode>()?;
    }
    if let Some(n) = args.cells {
        cfg.cells = n;
    }
    if let Some(c) = args.cfl {
        cfg.cfl = c;
    }
    if let Some(t) = args.t_end {
        cfg.t_end = t;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main_inner(args: &Args) -> CliResult<()> {
    let cfg = config(args)?;
    if let Some(spec) = &args.sweep {
        let spec: SweepSpec = spec.parse()?;
        let rows = sweep(&cfg, &spec)?;
        std::fs::create_dir_all(&cfg.out)
            .map_err(|e| CliError::Io(cfg.out.display().to_string(), e))?;
        let path = cfg.out.join("sweep.csv");
        write_sweep(&spec, &rows, &path)?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let summary = run(&cfg, Some(&cfg.out))?;
    print!("{}", metrics_text(&cfg, &summary));
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
