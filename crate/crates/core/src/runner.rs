//! End-to-end run driver: build a problem, march it to its final time,
//! track positivity and sweep statistics, and emit machine-readable
//! artifacts.
//!
//! Artifacts written per run (under `--out <dir>`):
//! - `field.csv`: one row per interior node with coordinates and primitives
//! - `summary.json`: the full [`RunSummary`]
//! - `sweeps.csv`: per-RK-stage sweep counts and splitting alphas
//!
//! Reruns with identical configuration are bit-identical: all reductions
//! and summation orders are fixed, and parallelism never crosses line
//! boundaries.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use crate::error::SolverError;
use crate::field::Field;
use crate::integrate::{compute_dt, rk3_step, RhsEval, RunConfig};
use crate::problems::{make_problem, Problem, ProblemSpec};
use crate::state::GasLaw;
use crate::sweep::SweepStats;
use crate::weno::{compute_residual, global_alpha, reaction_source, EulerSystem};

/// Overrides applied on top of a problem's defaults.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cfl: Option<f64>,
    pub t_final: Option<f64>,
    /// Positivity threshold; defaults to the problem's law (1e-13).
    pub eps: Option<f64>,
    pub limiter: bool,
    pub max_full_sweeps: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            nx: None,
            ny: None,
            cfl: None,
            t_final: None,
            eps: None,
            limiter: true,
            max_full_sweeps: 100,
            out_dir: None,
        }
    }
}

/// Everything a finished run reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub nx: usize,
    pub ny: usize,
    pub cfl: f64,
    pub eps: f64,
    pub limiter: bool,
    pub t_final: f64,
    pub time_reached: f64,
    pub steps: usize,
    pub wall_seconds: f64,
    /// Smallest fluid density / pressure at any stage exit of the run.
    pub min_density: f64,
    pub min_pressure: f64,
    pub pressure_sweep_max: u64,
    pub pressure_sweep_average: f64,
    pub pressure_sweep_total: u64,
    pub density_sweep_total: u64,
    pub adjust_positive: u64,
    pub adjust_negative_scaled: u64,
    pub adjust_negative_capped: u64,
    /// Largest per-stage splitting alphas seen over the run.
    pub alpha_max_x: f64,
    pub alpha_max_y: f64,
    /// Componentwise conserved totals over the fluid interior.
    pub initial_totals: Vec<f64>,
    pub final_totals: Vec<f64>,
    /// `(final - initial) / max(|initial|, 1)` per component; the floor
    /// keeps components whose initial total is zero (symmetric momentum)
    /// reporting an absolute drift instead of a meaningless ratio.
    pub conservation_drift: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct SweepLogRow {
    step: usize,
    stage: usize,
    time: f64,
    pressure_sweeps: u64,
    density_sweeps: u64,
    alpha_x: f64,
    alpha_y: f64,
}

/// Run a named problem with overrides. Nonzero-exit conditions (limiter
/// infeasibility, sweep budget exhaustion, NaN detection) surface as errors
/// with step and stage context.
pub fn run(name: &str, opts: &RunOptions) -> Result<RunSummary, SolverError> {
    match make_problem(name)? {
        Problem::Euler1d(spec) => Ok(run_to_field(&spec, opts)?.0),
        Problem::Euler2d(spec) => Ok(run_to_field(&spec, opts)?.0),
        Problem::ReactiveEuler(spec) => Ok(run_to_field(&spec, opts)?.0),
    }
}

/// As [`run`], returning the final field for in-process consumers.
pub fn run_to_field<const N: usize>(
    spec: &ProblemSpec<N>,
    opts: &RunOptions,
) -> Result<(RunSummary, Field<N>), SolverError>
where
    GasLaw<N>: EulerSystem<N> + Sync,
{
    let nx = opts.nx.unwrap_or(spec.nx);
    let ny = if spec.is_one_dimensional() {
        1
    } else {
        opts.ny.unwrap_or(spec.ny)
    };
    let mut law = spec.law;
    if let Some(eps) = opts.eps {
        law.eps = eps;
    }
    let cfl = opts.cfl.unwrap_or(spec.cfl);
    let t_final = opts.t_final.unwrap_or(spec.t_final);
    let mut config = RunConfig::new(cfl, t_final);
    config.limiter = opts.limiter;
    config.max_full_sweeps = opts.max_full_sweeps;
    config.source = spec.reaction.is_some();

    let mut field = spec.build_field(nx, ny);
    let initial_totals = field.totals();
    let mut stats = SweepStats::default();

    let reaction = if config.source { spec.reaction } else { None };
    let rhs_law = law;
    let mut rhs = move |f: &mut Field<N>| -> Result<RhsEval<N>, SolverError> {
        f.apply_boundary();
        let out = compute_residual(f, &rhs_law)?;
        let mut rhs = out.rhs;
        if let Some(r) = reaction {
            let width = f.nx();
            for (i, j) in f.fluid_cells() {
                let s = reaction_source(&f.get(i, j), &rhs_law, r.rate, r.activation);
                rhs[j * width + i] += s;
            }
        }
        Ok(RhsEval {
            rhs,
            alpha_x: out.alpha_x,
            alpha_y: out.alpha_y,
        })
    };

    let started = Instant::now();
    let mut time = 0.0_f64;
    let mut steps = 0usize;
    let mut min_density = f64::INFINITY;
    let mut min_pressure = f64::INFINITY;
    let mut alpha_max = (0.0_f64, 0.0_f64);
    let mut sweep_log = Vec::new();

    while time < t_final {
        let (ax, ay) = global_alpha(&field, &law)?;
        let remaining = t_final - time;
        let dt = compute_dt(
            (ax, ay),
            (field.dx(), field.dy()),
            field.is_one_dimensional(),
            cfl,
            remaining,
        );
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SolverError::NonFinite { time, step: steps });
        }
        let report =
            rk3_step(&mut field, dt, &law, &config, &mut stats, &mut rhs).map_err(|e| {
                SolverError::AtStep {
                    step: steps + 1,
                    time,
                    source: Box::new(e),
                }
            })?;

        steps += 1;
        min_density = min_density.min(report.min_density);
        min_pressure = min_pressure.min(report.min_pressure);
        for (stage, &(sax, say)) in report.stage_alphas.iter().enumerate() {
            alpha_max.0 = alpha_max.0.max(sax);
            alpha_max.1 = alpha_max.1.max(say);
            sweep_log.push(SweepLogRow {
                step: steps,
                stage: stage + 1,
                time,
                pressure_sweeps: report.stage_pressure_sweeps[stage],
                density_sweeps: report.stage_density_sweeps[stage],
                alpha_x: sax,
                alpha_y: say,
            });
        }
        if dt == remaining {
            time = t_final;
        } else {
            time += dt;
        }
    }

    let final_totals = field.totals();
    let drift: Vec<f64> = (0..N)
        .map(|c| (final_totals[c] - initial_totals[c]) / initial_totals[c].abs().max(1.0))
        .collect();

    let summary = RunSummary {
        problem: spec.name.to_string(),
        nx,
        ny,
        cfl,
        eps: law.eps,
        limiter: config.limiter,
        t_final,
        time_reached: time,
        steps,
        wall_seconds: started.elapsed().as_secs_f64(),
        min_density,
        min_pressure,
        pressure_sweep_max: stats.pressure_sweeps_max_per_stage,
        pressure_sweep_average: stats.average_pressure_sweeps(),
        pressure_sweep_total: stats.pressure_sweeps_total,
        density_sweep_total: stats.density_sweeps_total,
        adjust_positive: stats.adjust_positive,
        adjust_negative_scaled: stats.adjust_negative_scaled,
        adjust_negative_capped: stats.adjust_negative_capped,
        alpha_max_x: alpha_max.0,
        alpha_max_y: alpha_max.1,
        initial_totals: (0..N).map(|c| initial_totals[c]).collect(),
        final_totals: (0..N).map(|c| final_totals[c]).collect(),
        conservation_drift: drift,
    };

    if let Some(dir) = &opts.out_dir {
        write_artifacts(dir, &summary, &field, &law, &sweep_log)?;
    }
    Ok((summary, field))
}

/// One row of a convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub l1_error: f64,
    pub l1_order: f64,
    pub linf_error: f64,
    pub linf_order: f64,
}

/// Run a problem with an exact solution at each resolution and tabulate
/// density errors and observed orders. Orders on the first row (and on any
/// zero-error pair) are NaN.
pub fn convergence(
    name: &str,
    resolutions: &[usize],
    opts: &RunOptions,
) -> Result<Vec<ConvergenceRow>, SolverError> {
    let Problem::Euler2d(spec) = make_problem(name)? else {
        return Err(SolverError::NoExactSolution(name.to_string()));
    };
    let Some(exact) = spec.exact.clone() else {
        return Err(SolverError::NoExactSolution(name.to_string()));
    };

    let mut l1 = Vec::new();
    let mut linf = Vec::new();
    for &n in resolutions {
        let mut o = opts.clone();
        o.nx = Some(n);
        o.ny = Some(n);
        o.out_dir = None;
        let (summary, field) = run_to_field(&spec, &o)?;
        let t = summary.time_reached;
        let (e1, einf) =
            crate::problems::error_norms_vs_exact(&field, |x, y| exact(x, y, t));
        l1.push(e1);
        linf.push(einf);
    }
    let o1 = crate::problems::convergence_order(&l1, resolutions);
    let oinf = crate::problems::convergence_order(&linf, resolutions);
    Ok(resolutions
        .iter()
        .enumerate()
        .map(|(k, &n)| ConvergenceRow {
            resolution: n,
            l1_error: l1[k],
            l1_order: if k == 0 { f64::NAN } else { o1[k - 1] },
            linf_error: linf[k],
            linf_order: if k == 0 { f64::NAN } else { oinf[k - 1] },
        })
        .collect())
}

fn write_artifacts<const N: usize>(
    dir: &PathBuf,
    summary: &RunSummary,
    field: &Field<N>,
    law: &GasLaw<N>,
    sweep_log: &[SweepLogRow],
) -> Result<(), SolverError> {
    fs::create_dir_all(dir)?;

    let mut f = fs::File::create(dir.join("field.csv"))?;
    if N == 3 {
        writeln!(f, "x,rho,u,p,E")?;
        for i in 0..field.nx() {
            let u = field.get(i, 0);
            writeln!(
                f,
                "{},{},{},{},{}",
                field.x_center(i),
                u[0],
                u[1] / u[0],
                law.pressure(&u),
                u[2]
            )?;
        }
    } else {
        if N == 4 {
            writeln!(f, "x,y,rho,u,v,p,E")?;
        } else {
            writeln!(f, "x,y,rho,u,v,p,E,Y")?;
        }
        for j in 0..field.ny() {
            for i in 0..field.nx() {
                let w = field.get(i, j);
                write!(
                    f,
                    "{},{},{},{},{},{},{}",
                    field.x_center(i),
                    field.y_center(j),
                    w[0],
                    w[1] / w[0],
                    w[2] / w[0],
                    law.pressure(&w),
                    w[3]
                )?;
                if N == 5 {
                    write!(f, ",{}", w[4] / w[0])?;
                }
                writeln!(f)?;
            }
        }
    }

    let json = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(dir.join("summary.json"), json)?;

    let mut s = fs::File::create(dir.join("sweeps.csv"))?;
    writeln!(s, "step,stage,time,pressure_sweeps,density_sweeps,alpha_x,alpha_y")?;
    for row in sweep_log {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            row.step, row.stage, row.time, row.pressure_sweeps, row.density_sweeps, row.alpha_x, row.alpha_y
        )?;
    }
    Ok(())
}

/// Honor a thread-count request from the environment (`SWENO_THREADS`).
/// Outputs do not depend on the thread count; this only bounds parallelism.
pub fn init_threads_from_env() {
    if let Ok(v) = std::env::var("SWENO_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
