use std::path::PathBuf;
use std::process::ExitCode;

use bldlab_cli::report::Format;
use bldlab_cli::run_experiment;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bldlab", version, about = "Run bldlab experiments from a TOML config")]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,
    #[arg(long, global = true, default_value = "config.toml")]
    config: PathBuf,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Overrides `[experiment] seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Experiment {
    /// Fiber counts in balls against A_f(R).
    Equidist,
    /// Co-area identity on a grid.
    Coarea,
    /// Flat norm of a chain.
    Flatnorm,
    /// Pull a chain back through the map.
    Pullback,
    /// Duality between pulled-back currents and pushed forms.
    Duality,
    /// Flat-norm separation of two pulled-back cycles.
    Separation,
    /// Betti numbers over the rationals.
    Homology,
    /// Bilipschitz bounds of the Q-valued fiber map.
    Qvalued,
    /// Filling-constant estimate from random boundaries.
    Filling,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Equidist => "equidist",
            Experiment::Coarea => "coarea",
            Experiment::Flatnorm => "flatnorm",
            Experiment::Pullback => "pullback",
            Experiment::Duality => "duality",
            Experiment::Separation => "separation",
            Experiment::Homology => "homology",
            Experiment::Qvalued => "qvalued",
            Experiment::Filling => "filling",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_experiment(cli.experiment.name(), &cli.config, &cli.out, cli.format, cli.seed) {
        Ok(outcome) => {
            println!(
                "{} rows -> {} (manifest {})",
                outcome.rows,
                outcome.report_path.display(),
                outcome.manifest_path.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bldlab: {e}");
            ExitCode::FAILURE
        }
    }
}
