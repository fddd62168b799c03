use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphon_gcn::analysis::CutMode;
use graphon_lab_cli::{BoundsGrid, ExperimentResult, Result};

#[derive(Parser)]
#[command(
    name = "graphon-lab",
    version,
    about = "Graphon sampling, GCN embeddings and hypothesis-testing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = graphon_lab_cli::OUT_DIR_ENV, default_value = graphon_lab_cli::DEFAULT_OUT_DIR)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it as an edge list.
    Sample {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Print the separation between two graphons given as JSON files.
    Delta { graphon0: PathBuf, graphon1: PathBuf },
    /// Cut norm of a graph, or cut distance between two graphs.
    Cutnorm {
        graph: PathBuf,
        other: Option<PathBuf>,
        #[arg(long, default_value = "exact")]
        mode: CutMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a trials or convergence experiment.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Evaluate both error lower bounds over a grid.
    Bounds {
        #[arg(long, value_delimiter = ',', default_values_t = BoundsGrid::default().n)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = BoundsGrid::default().delta)]
        delta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = BoundsGrid::default().c)]
        c: Vec<f64>,
        /// Noise levels as multiples of 1/n.
        #[arg(long, value_delimiter = ',', default_values_t = BoundsGrid::default().eps_scaled)]
        eps_scaled: Vec<f64>,
        #[command(flatten)]
        out: OutDir,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { config, seed, out } => {
            let r = graphon_lab_cli::cmd_sample(&config, seed, &out.out)?;
            println!("wrote {} (n = {}, m = {})", r.edge_list.display(), r.n, r.edges);
        }
        Command::Delta { graphon0, graphon1 } => {
            println!("{}", graphon_lab_cli::cmd_delta(&graphon0, &graphon1)?);
        }
        Command::Cutnorm {
            graph,
            other,
            mode,
            seed,
        } => {
            let row = graphon_lab_cli::cmd_cutnorm(&graph, other.as_deref(), mode, seed)?;
            print!("{}", graphon_lab_cli::cut_row_csv(&row)?);
        }
        Command::Experiment {
            config,
            seed,
            threads,
            out,
        } => {
            let r = graphon_lab_cli::cmd_experiment(&config, seed, &out.out, threads)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            match &r.result {
                ExperimentResult::Trials(t) => {
                    let s = &t.summary;
                    println!(
                        "{} trials, error rate {:.4} (95% CI {:.4}..{:.4})",
                        s.trials, s.error_rate, s.ci_lo, s.ci_hi
                    );
                }
                ExperimentResult::Convergence(c) => {
                    for row in &c.rows {
                        println!(
                            "n = {:5}  K = {:3}  median linf = {:.3e}  median |diff| = {:.3e}",
                            row.n, row.layers, row.linf_median, row.median_abs_median
                        );
                    }
                    if let Some(s) = c.median_abs_slope {
                        println!("log-log slope of median |diff|: {s:.3}");
                    }
                }
            }
            for p in &r.manifest.outputs {
                println!("wrote {}", p.display());
            }
        }
        Command::Bounds {
            n,
            delta,
            c,
            eps_scaled,
            out,
        } => {
            let grid = BoundsGrid {
                n,
                delta,
                c,
                eps_scaled,
            };
            let rows = graphon_lab_cli::cmd_bounds(&grid, &out.out)?;
            println!(
                "wrote {} rows to {}",
                rows.len(),
                out.out.join(graphon_lab_cli::BOUNDS_FILE).display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
