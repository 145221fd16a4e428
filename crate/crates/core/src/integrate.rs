//! Third-order SSP Runge-Kutta stepping with the sweeping limiter applied
//! after every stage.
//!
//! Each stage is a convex combination of forward-Euler updates:
//!
//! ```text
//! u1     = u0 + dt L(u0)
//! u2     = 3/4 u0 + 1/4 (u1 + dt L(u1))
//! u_next = 1/3 u0 + 2/3 (u2 + dt L(u2))
//! ```
//!
//! The limiter runs on each stage result, so every stage the scheme sees is
//! admissible. The time step is chosen from the alphas of the step's initial
//! data and held fixed through the stages; the residual evaluations still
//! compute their own global alpha per stage, which the step report exposes
//! for sensitivity checks.

use crate::error::SolverError;
use crate::field::Field;
use crate::state::{GasLaw, State};
use crate::sweep::{apply_limiter, SweepStats};

/// Per-run solver settings.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    /// Courant number, > 0.
    pub cfl: f64,
    /// Final time, > 0.
    pub t_final: f64,
    /// Apply the positivity-preserving limiter after each stage.
    pub limiter: bool,
    /// Full-sweep budget per limiter call before giving up.
    pub max_full_sweeps: usize,
    /// Evaluate the reactive source term inside each stage.
    pub source: bool,
}

impl RunConfig {
    pub fn new(cfl: f64, t_final: f64) -> Self {
        assert!(cfl > 0.0 && t_final > 0.0);
        RunConfig {
            cfl,
            t_final,
            limiter: true,
            max_full_sweeps: 100,
            source: false,
        }
    }
}

/// CFL time step from per-direction signal speeds, clipped so the run lands
/// exactly on the final time.
pub fn compute_dt(
    alphas: (f64, f64),
    spacing: (f64, f64),
    one_dimensional: bool,
    cfl: f64,
    remaining: f64,
) -> f64 {
    let dt = if one_dimensional {
        cfl * spacing.0 / alphas.0
    } else {
        cfl / (alphas.0 / spacing.0 + alphas.1 / spacing.1)
    };
    dt.min(remaining)
}

/// One right-hand-side evaluation: `du/dt` per interior node (row-major,
/// zero on solid cells) plus the splitting alphas it used.
#[derive(Debug, Clone)]
pub struct RhsEval<const N: usize> {
    pub rhs: Vec<State<N>>,
    pub alpha_x: f64,
    pub alpha_y: f64,
}

/// What happened inside one full RK step.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    /// Smallest fluid density seen at any stage exit.
    pub min_density: f64,
    /// Smallest fluid pressure seen at any stage exit.
    pub min_pressure: f64,
    pub stage_pressure_sweeps: [u64; 3],
    pub stage_density_sweeps: [u64; 3],
    /// Global alphas of each stage's residual evaluation.
    pub stage_alphas: [(f64, f64); 3],
}

/// Advance one SSP-RK3 step. `rhs` must fill ghost layers itself and return
/// the full interior residual. Limiter failures carry the 1-based stage.
pub fn rk3_step<const N: usize, R>(
    field: &mut Field<N>,
    dt: f64,
    law: &GasLaw<N>,
    config: &RunConfig,
    stats: &mut SweepStats,
    rhs: &mut R,
) -> Result<StepReport, SolverError>
where
    R: FnMut(&mut Field<N>) -> Result<RhsEval<N>, SolverError>,
{
    let nx = field.nx();
    let ny = field.ny();
    let u0: Vec<State<N>> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| field.get(i, j))
        .collect();

    let mut report = StepReport {
        min_density: f64::INFINITY,
        min_pressure: f64::INFINITY,
        stage_pressure_sweeps: [0; 3],
        stage_density_sweeps: [0; 3],
        stage_alphas: [(0.0, 0.0); 3],
    };

    for stage in 0..3 {
        let eval = rhs(field).map_err(|e| e.at_stage(stage + 1))?;
        report.stage_alphas[stage] = (eval.alpha_x, eval.alpha_y);
        debug_assert_eq!(eval.rhs.len(), nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let euler = field.get(i, j) + eval.rhs[k] * dt;
                let next = match stage {
                    0 => euler,
                    1 => u0[k] * 0.75 + euler * 0.25,
                    _ => u0[k] * (1.0 / 3.0) + euler * (2.0 / 3.0),
                };
                field.set(i, j, next);
            }
        }

        if config.limiter {
            let pressure_before = stats.pressure_sweeps_total;
            let density_before = stats.density_sweeps_total;
            apply_limiter(field, law, config.max_full_sweeps, stats)
                .map_err(|e| e.at_stage(stage + 1))?;
            report.stage_pressure_sweeps[stage] = stats.pressure_sweeps_total - pressure_before;
            report.stage_density_sweeps[stage] = stats.density_sweeps_total - density_before;
        }

        let extrema = stage_extrema(field, law).map_err(|e| e.at_stage(stage + 1))?;
        if !config.limiter && !(extrema.min_rho > 0.0 && extrema.min_p > 0.0) {
            let (what, value, index) = if extrema.min_rho <= 0.0 {
                ("density", extrema.min_rho, extrema.argmin_rho)
            } else {
                ("pressure", extrema.min_p, extrema.argmin_p)
            };
            return Err(SolverError::NonAdmissible { index, what, value }.at_stage(stage + 1));
        }
        report.min_density = report.min_density.min(extrema.min_rho);
        report.min_pressure = report.min_pressure.min(extrema.min_p);
    }
    Ok(report)
}

struct StageExtrema {
    min_rho: f64,
    min_p: f64,
    argmin_rho: usize,
    argmin_p: usize,
}

/// Fluid-interior minima of density and pressure; errors on non-finite data.
fn stage_extrema<const N: usize>(
    field: &Field<N>,
    law: &GasLaw<N>,
) -> Result<StageExtrema, SolverError> {
    let mut out = StageExtrema {
        min_rho: f64::INFINITY,
        min_p: f64::INFINITY,
        argmin_rho: 0,
        argmin_p: 0,
    };
    for (i, j) in field.fluid_cells() {
        let u = field.get(i, j);
        let index = j * field.nx() + i;
        if !u.is_finite() {
            return Err(SolverError::NonAdmissible {
                index,
                what: "state",
                value: f64::NAN,
            });
        }
        if u.rho() < out.min_rho {
            out.min_rho = u.rho();
            out.argmin_rho = index;
        }
        if u.rho() > 0.0 {
            let p = law.pressure(&u);
            if p < out.min_p {
                out.min_p = p;
                out.argmin_p = index;
            }
        } else {
            out.min_p = f64::NEG_INFINITY;
            out.argmin_p = index;
        }
    }
    Ok(out)
}
