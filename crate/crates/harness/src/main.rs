use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use augclust::acceptance;
use augclust::config::ExperimentConfig;
use augclust::core::datagen::{gen_clusters, write_dataset_csv, GenSpec};
use augclust::experiments::run_experiment;
use augclust::report::{write_results, TOOL_NAME};

/// Environment variable overriding the configured output directory.
const OUTPUT_DIR_ENV: &str = "AUGCLUST_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = TOOL_NAME, version, about = "Clustering-augmentation experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic cluster dataset as CSV.
    GenData {
        /// Points per cluster.
        #[arg(long, default_value_t = 100)]
        n_per_cluster: usize,
        /// Standard deviation around each centroid.
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file path.
        #[arg(long, default_value = "data.csv")]
        out: PathBuf,
    },
    /// Run the experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory (and the environment).
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the full acceptance suite and print one line per criterion.
    Verify,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::GenData {
            n_per_cluster,
            spread,
            seed,
            out,
        } => {
            let spec = GenSpec {
                n_per_cluster,
                spread,
                seed,
                ..GenSpec::default()
            };
            let data = gen_clusters(&spec).context("generating clusters")?;
            write_dataset_csv(&data, &out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} points to {}", data.n(), out.display());
            Ok(true)
        }
        Command::Run { config, output_dir } => {
            let cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let dir = resolve_output_dir(&cfg, output_dir, std::env::var_os(OUTPUT_DIR_ENV));
            let rows = run_experiment(&cfg).context("running experiment")?;
            let manifest = write_results(&rows, &cfg, &dir)
                .with_context(|| format!("writing results to {}", dir.display()))?;
            println!(
                "{}: {} rows, {} passed, {} failed -> {}",
                manifest.experiment,
                manifest.rows,
                manifest.passes,
                manifest.failures,
                dir.display()
            );
            Ok(manifest.failures == 0)
        }
        Command::Verify => {
            let reports = acceptance::run_all();
            for report in &reports {
                println!("{}", report.line());
            }
            let passed = reports.iter().filter(|r| r.pass).count();
            println!("{passed}/{} criteria passed", reports.len());
            Ok(passed == reports.len())
        }
    }
}

/// Precedence: command-line flag, then environment variable, then config.
fn resolve_output_dir(
    cfg: &ExperimentConfig,
    flag: Option<PathBuf>,
    env: Option<std::ffi::OsString>,
) -> PathBuf {
    flag.or_else(|| env.map(PathBuf::from))
        .unwrap_or_else(|| cfg.output_dir.clone())
}
