use clap::{Parser, Subcommand};
use hyperslice::algebra::basis_table;
use hyperslice::AlgebraTag;
use hyperslice_cli::{run_suite, ExperimentConfig, Format, Suite};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hyperslice", version, about = "Slice-function verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write its report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `suite` from the config.
        #[arg(long)]
        suite: Option<Suite>,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: Format,
        /// Record wall-clock times (reports are then no longer reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Print the basis multiplication table.
    Table {
        #[arg(long, default_value = "octonion", value_parser = parse_algebra)]
        algebra: AlgebraTag,
    },
}

fn parse_algebra(s: &str) -> Result<AlgebraTag, String> {
    AlgebraTag::parse(s).ok_or_else(|| format!("unknown algebra `{s}` (expected octonion or quaternion)"))
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Table { algebra } => {
            print!("{}", basis_table().render(algebra));
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            suite,
            seed,
            out,
            format,
            timings,
        } => {
            let mut cfg = match ExperimentConfig::from_file(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = suite {
                cfg.suite = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.record_timing |= timings;
            let report = run_suite(&cfg);
            let text = report.render(format);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            for c in report.failures() {
                eprintln!("FAIL {}: metric {} {} {}", c.name, c.metric, c.relation.symbol(), c.tolerance);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
