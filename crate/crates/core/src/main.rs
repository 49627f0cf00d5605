use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use hyperpeel::density::{contraction_check, density_report, DEFAULT_BUDGET};
use hyperpeel::experiments::{
    fit_growth_points, growth_points, read_csv_file, sweep, GrowthModel, SweepConfig,
};
use hyperpeel::io::{read_hg_file, write_hg_file};
use hyperpeel::peeling::{parallel_peel, PeelingTrace};
use hyperpeel::random::{sample_binomial_hypergraph, ModelParams};
use hyperpeel::thresholds::{compute_threshold, EmpiricalConfig, Method};

#[derive(Parser)]
#[command(name = "hyperpeel", version, about = "Parallel peeling of random r-uniform hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample H_r(n, c/n^(r-1)) and write it as .hg
    Gen {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Peel a .hg file to its k-core
    Peel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        /// Per-round CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compute the k-core threshold and round-count coefficients
    Threshold {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Method::Analytic)]
        method: Method,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 9)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative bracket width for the empirical bisection
        #[arg(long, default_value_t = 0.01)]
        empirical_tol: f64,
    },
    /// Dense-subgraph and contraction checks on a .hg file
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long, default_value_t = 3)]
        t: usize,
        /// Density constant for the first-moment bound
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Run a seeded sweep over a geometric n grid and write CSV
    Sweep {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = hyperpeel::experiments::DEFAULT_I_PROBE)]
        i_probe: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit mean round counts of a sweep CSV against ln ln n or ln n
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        model: GrowthModel,
        /// Ignore this many of the smallest n values
        #[arg(long, default_value_t = 0)]
        drop_smallest: usize,
    },
}

fn write_trace(path: &PathBuf, trace: &PeelingTrace) -> hyperpeel::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "round,removed_vertices,removed_edges,surviving_vertices,surviving_edges,deg_ge_k"
    )?;
    for r in &trace.rounds {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.index,
            r.removed_vertices.len(),
            r.removed_edges.len(),
            r.surviving_vertex_count,
            r.surviving_edge_count,
            r.surviving_deg_ge_k_count
        )?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> hyperpeel::Result<()> {
    match cli.command {
        Command::Gen { r, n, c, seed, out } => {
            let h = sample_binomial_hypergraph(&ModelParams { r, k: 0, c, n, seed })?;
            write_hg_file(out, &h)?;
        }
        Command::Peel { input, k, trace } => {
            let h = read_hg_file(input)?;
            let t = parallel_peel(&h, k);
            println!(
                "s={} core_vertices={} core_edges={}",
                t.s(),
                t.core_vertices.len(),
                t.core_edges.len()
            );
            if let Some(path) = trace {
                write_trace(&path, &t)?;
            }
        }
        Command::Threshold {
            r,
            k,
            method,
            tol,
            n,
            trials,
            seed,
            empirical_tol,
        } => {
            let cfg = EmpiricalConfig {
                n,
                trials,
                tol: empirical_tol,
                seed,
                bracket: None,
            };
            let result = compute_threshold(r, k, method, tol, &cfg)?;
            println!("{}", serde_json::to_string(&result).expect("serializable"));
        }
        Command::Verify {
            input,
            k,
            max_size,
            s,
            t,
            c,
            budget,
        } => {
            let h = read_hg_file(input)?;
            let max_size = max_size.unwrap_or(h.n().min(s));
            let density = density_report(&h, s, t, max_size, c, budget)?;
            let contraction = contraction_check(&parallel_peel(&h, k));
            println!(
                "{}",
                json!({ "density": density, "contraction": contraction })
            );
        }
        Command::Sweep {
            r,
            k,
            c,
            n_min,
            n_max,
            points,
            trials,
            seed,
            i_probe,
            out,
        } => {
            let cfg = SweepConfig {
                r,
                k,
                c,
                n_min,
                n_max,
                points,
                trials,
                master_seed: seed,
                i_probe,
            };
            sweep(&cfg, out)?;
        }
        Command::Fit {
            input,
            model,
            drop_smallest,
        } => {
            let records = read_csv_file(input)?;
            let points: Vec<_> = growth_points(&records).into_iter().skip(drop_smallest).collect();
            let fit = fit_growth_points(points, model)?;
            println!("{}", serde_json::to_string(&fit).expect("serializable"));
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
