//! `nashlab`: run experiments from JSON configs or built-in demos.
//!
//! Exit status: 0 pass, 2 convergence verdict fail, 3 config error,
//! 4 numerical-stage error, 1 I/O or usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nashlab::experiment::{
    demo, emit_report, load_config, run_experiment, run_fibers, run_implicitize, write_reports,
    ExperimentConfig, Format, Report, DEMO_NAMES, EXIT_CONFIG,
};

#[derive(Parser)]
#[command(
    name = "nashlab",
    version,
    about = "Approximation of analytic sets by algebraic families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Write report.json / report.csv / report.txt into this directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format; repeat for several. Stdout gets the first one.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Vec<Format>,
    /// Seed for the sample points of the slice-degree test.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated, strictly increasing.
    #[arg(long, global = true, value_delimiter = ',')]
    nu_list: Option<Vec<u32>>,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate vanishing ideal of the coefficient map only.
    Implicitize { config: PathBuf },
    /// Fibers of X_nu over the grid, with persistence flags.
    Fibers {
        config: PathBuf,
        #[arg(long)]
        nu: u32,
    },
    /// Full pipeline.
    Converge { config: PathBuf },
    /// Run a built-in configuration.
    Demo {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(DEMO_NAMES))]
        name: String,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn read_config(path: &Path) -> Result<Result<ExperimentConfig, String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(load_config(&text).map_err(|e| e.to_string()))
}

fn apply_overrides(mut cfg: ExperimentConfig, common: &Common) -> Result<ExperimentConfig, String> {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(list) = &common.nu_list {
        cfg.nu_list = list.clone();
    }
    cfg.compile().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn emit(report: &impl Report, cfg: &ExperimentConfig, common: &Common) -> Result<()> {
    let formats = if common.format.is_empty() {
        vec![Format::Text]
    } else {
        common.format.clone()
    };
    print!("{}", emit_report(report, formats[0]));
    if let Some(dir) = &common.out {
        let all = if common.format.is_empty() {
            Format::ALL.to_vec()
        } else {
            formats
        };
        for p in write_reports(report, dir, &all)
            .with_context(|| format!("writing reports to {}", dir.display()))?
        {
            eprintln!("wrote {}", p.display());
        }
    } else {
        let paths = [
            (Format::Json, &cfg.report.json),
            (Format::Csv, &cfg.report.csv),
            (Format::Text, &cfg.report.text),
        ];
        for (f, path) in paths {
            if let Some(path) = path {
                std::fs::write(path, emit_report(report, f))
                    .with_context(|| format!("writing {path}"))?;
                eprintln!("wrote {path}");
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let cfg = match &cli.command {
        Command::Demo { name } => Ok(demo(name).expect("name checked by clap")),
        Command::Implicitize { config }
        | Command::Fibers { config, .. }
        | Command::Converge { config } => read_config(config)?,
    };
    let cfg = match cfg.and_then(|c| apply_overrides(c, &cli.common)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return Ok(EXIT_CONFIG);
        }
    };
    let code = match &cli.command {
        Command::Fibers { nu, .. } => {
            let report = run_fibers(&cfg, *nu).map_err(anyhow::Error::from)?;
            emit(&report, &cfg, &cli.common)?;
            report.exit_code()
        }
        Command::Implicitize { .. } => {
            let report = run_implicitize(&cfg)?;
            emit(&report, &cfg, &cli.common)?;
            report.exit_code()
        }
        Command::Converge { .. } | Command::Demo { .. } => {
            let report = run_experiment(&cfg)?;
            emit(&report, &cfg, &cli.common)?;
            report.exit_code()
        }
    };
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Clap uses 2 for usage errors, which here means a failed verdict.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
