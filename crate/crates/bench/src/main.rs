//! Command-line harness for the accuracy sweeps.
//!
//! Exit codes: 0 pass, 1 tolerance failure, 2 configuration error,
//! 3 engine error aborting a whole suite.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nsi_ibp_bench::{
    compare_against_reference, emit_report, run_suite, BenchError, GridSpec, ReportFormat, Suite,
    SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "nsi-ibp-bench",
    about = "Accuracy sweeps for singular-integral transforms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep suite and write the accuracy report.
    Run(RunArgs),
    /// Run suites and compare their worst-case accuracy against tolerances.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Suite name: power_law | hybrid | electrostatic | electromagnetic | custom
    #[arg(long)]
    suite: Option<String>,
    /// JSON configuration file (flags override its scalar fields).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output report path.
    #[arg(long)]
    out: PathBuf,
    /// Report format.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Override: composite panel count.
    #[arg(long)]
    panels: Option<usize>,
    /// Override: Gauss points per panel.
    #[arg(long = "points-per-panel")]
    points_per_panel: Option<usize>,
    /// Override: gamma grid ("start:step:stop" or comma list).
    #[arg(long = "grid-gamma")]
    grid_gamma: Option<String>,
    /// Override: surrogate-mismatch grid.
    #[arg(long = "grid-dgamma")]
    grid_dgamma: Option<String>,
    /// Override: offset grid.
    #[arg(long = "grid-offset")]
    grid_offset: Option<String>,
    /// Override: separation grid (electrostatic suite).
    #[arg(long = "grid-d")]
    grid_d: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// JSON configuration file for the suite under test.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Suite name when no config file is given.
    #[arg(long)]
    suite: Option<String>,
    /// JSON file mapping suite names to maximum-ε tolerances.
    #[arg(long)]
    tolerances: PathBuf,
}

fn load_config(
    config: &Option<PathBuf>,
    suite: &Option<String>,
) -> Result<SweepConfig, BenchError> {
    match (config, suite) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            let mut cfg = SweepConfig::from_json(&text)?;
            if let Some(name) = suite {
                // flag wins over the file
                cfg.suite = Suite::from_name(name)?;
            }
            Ok(cfg)
        }
        (None, Some(name)) => Ok(SweepConfig::default_for(Suite::from_name(name)?)),
        (None, None) => Err(BenchError::Config(
            "either --config or --suite is required".into(),
        )),
    }
}

fn run(args: &RunArgs) -> Result<(), BenchError> {
    let mut cfg = load_config(&args.config, &args.suite)?;
    if let Some(p) = args.panels {
        cfg.panels = p;
    }
    if let Some(p) = args.points_per_panel {
        cfg.points_per_panel = p;
    }
    if let Some(g) = &args.grid_gamma {
        cfg.gamma = Some(GridSpec::parse_cli(g)?);
    }
    if let Some(g) = &args.grid_dgamma {
        cfg.dgamma = Some(GridSpec::parse_cli(g)?);
    }
    if let Some(g) = &args.grid_offset {
        cfg.offset = Some(GridSpec::parse_cli(g)?);
    }
    if let Some(g) = &args.grid_d {
        cfg.d = Some(GridSpec::parse_cli(g)?);
    }
    let format = ReportFormat::from_name(&args.format)?;
    let records = run_suite(&cfg)?;
    emit_report(&records, format, &args.out)?;
    let errored = records.iter().filter(|r| !r.is_ok()).count();
    eprintln!(
        "{}: {} cells ({} errored) -> {}",
        cfg.suite.name(),
        records.len(),
        errored,
        args.out.display()
    );
    Ok(())
}

fn check(args: &CheckArgs) -> Result<bool, BenchError> {
    let cfg = load_config(&args.config, &args.suite)?;
    let text = std::fs::read_to_string(&args.tolerances)?;
    let map: BTreeMap<String, f64> = serde_json::from_str(&text)
        .map_err(|e| BenchError::Config(format!("bad tolerance JSON: {e}")))?;
    let records = run_suite(&cfg)?;
    let tolerances: Vec<(String, f64)> = map.into_iter().collect();
    let summaries = compare_against_reference(&records, &tolerances)?;
    let mut all_pass = true;
    for s in &summaries {
        println!(
            "{}: cells={} errored={} max_eps={:.3e} under_tol={:.1}% tol={:.1e} -> {}",
            s.suite,
            s.cells,
            s.errored,
            s.max_epsilon,
            100.0 * s.fraction_under,
            s.tolerance,
            if s.pass { "PASS" } else { "FAIL" }
        );
        if !s.pass {
            all_pass = false;
            for r in records.iter().filter(|r| r.suite == s.suite) {
                if !r.is_ok() || r.epsilon >= s.tolerance {
                    let params: Vec<String> = r
                        .params
                        .iter()
                        .map(|(k, v)| format!("{k}={v:.6e}"))
                        .collect();
                    println!("  offending cell: {} [{}]", params.join(", "), r.status);
                }
            }
        }
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args).map(|()| true),
        Command::Check(args) => check(args),
    };
    match outcome {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                BenchError::Config(_) | BenchError::Io(_) => ExitCode::from(2),
                BenchError::Engine(_) => ExitCode::from(3),
            }
        }
    }
}
