//! Command-line entry point: run a benchmark problem or produce a
//! convergence table. Exits nonzero on any solver failure (limiter
//! infeasibility, sweep budget exhaustion, NaN detection).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sweno::problems::PROBLEM_NAMES;
use sweno::runner::{self, RunOptions, RunSummary};

#[derive(Parser)]
#[command(
    name = "sweno",
    about = "Finite difference WENO5 Euler solver with a positivity-preserving sweeping limiter",
    after_help = "Problems: double_rarefaction, sedov_1d, vortex, sedov_2d, mach2000, \
                  shock_diffraction, detonation.\n\
                  Set SWENO_THREADS to bound the worker pool; results do not depend on it."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem and write field/summary/sweep-log artifacts.
    Run {
        /// Problem name.
        problem: String,
        /// Override the number of cells in x.
        #[arg(long)]
        nx: Option<usize>,
        /// Override the number of cells in y (2D problems).
        #[arg(long)]
        ny: Option<usize>,
        /// Override the Courant number.
        #[arg(long)]
        cfl: Option<f64>,
        /// Override the final time.
        #[arg(long)]
        tfinal: Option<f64>,
        /// Disable the positivity-preserving limiter.
        #[arg(long)]
        no_limiter: bool,
        /// Positivity threshold.
        #[arg(long)]
        eps: Option<f64>,
        /// Full-sweep budget per limiter call.
        #[arg(long, default_value_t = 100)]
        max_sweeps: usize,
        /// Output directory for field.csv, summary.json and sweeps.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a problem with an exact solution at several resolutions and
    /// print the error/order table.
    Convergence {
        /// Problem name (must have an exact solution; `vortex` does).
        problem: String,
        /// Comma-separated resolutions, e.g. 45,90,180.
        #[arg(long, value_delimiter = ',', required = true)]
        resolutions: Vec<usize>,
        /// Optional directory for convergence.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    runner::init_threads_from_env();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            problem,
            nx,
            ny,
            cfl,
            tfinal,
            no_limiter,
            eps,
            max_sweeps,
            out,
        } => {
            if !PROBLEM_NAMES.contains(&problem.as_str()) {
                eprintln!(
                    "error: unknown problem `{problem}` (expected one of {})",
                    PROBLEM_NAMES.join(", ")
                );
                return ExitCode::FAILURE;
            }
            let opts = RunOptions {
                nx,
                ny,
                cfl,
                t_final: tfinal,
                eps,
                limiter: !no_limiter,
                max_full_sweeps: max_sweeps,
                out_dir: out,
            };
            match runner::run(&problem, &opts) {
                Ok(summary) => {
                    print_summary(&summary);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Convergence {
            problem,
            resolutions,
            out,
        } => match runner::convergence(&problem, &resolutions, &RunOptions::default()) {
            Ok(rows) => {
                println!("{:>10}  {:>12}  {:>8}  {:>12}  {:>8}", "points", "L1 error", "L1 ord", "Linf error", "Linf ord");
                for r in &rows {
                    println!(
                        "{:>4} x {:<4}  {:>12.4e}  {:>8}  {:>12.4e}  {:>8}",
                        r.resolution,
                        r.resolution,
                        r.l1_error,
                        order_cell(r.l1_order),
                        r.linf_error,
                        order_cell(r.linf_order),
                    );
                }
                if let Some(dir) = out {
                    if let Err(e) = write_convergence_csv(&dir, &rows) {
                        eprintln!("error: {e}");
                        return ExitCode::FAILURE;
                    }
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}

fn order_cell(order: f64) -> String {
    if order.is_nan() {
        "-".to_string()
    } else {
        format!("{order:.4}")
    }
}

fn print_summary(s: &RunSummary) {
    println!("problem            {}", s.problem);
    println!("grid               {} x {}", s.nx, s.ny);
    println!("cfl                {}", s.cfl);
    println!("limiter            {}", if s.limiter { "on" } else { "off" });
    println!("time reached       {} (of {})", s.time_reached, s.t_final);
    println!("steps              {}", s.steps);
    println!("wall seconds       {:.3}", s.wall_seconds);
    println!("min density        {:.6e}", s.min_density);
    println!("min pressure       {:.6e}", s.min_pressure);
    println!(
        "pressure sweeps    total {} / max {} per stage / average {:.4}",
        s.pressure_sweep_total, s.pressure_sweep_max, s.pressure_sweep_average
    );
    println!("density sweeps     total {}", s.density_sweep_total);
    let drift = s
        .conservation_drift
        .iter()
        .map(|d| format!("{d:+.3e}"))
        .collect::<Vec<_>>()
        .join(" ");
    println!("conservation drift {drift}");
}

fn write_convergence_csv(
    dir: &PathBuf,
    rows: &[runner::ConvergenceRow],
) -> Result<(), std::io::Error> {
    use std::io::Write as _;
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join("convergence.csv"))?;
    writeln!(f, "resolution,l1_error,l1_order,linf_error,linf_order")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{}",
            r.resolution, r.l1_error, r.l1_order, r.linf_error, r.linf_order
        )?;
    }
    Ok(())
}
