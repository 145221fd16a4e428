//! Benchmark problem definitions and the measurement helpers that go with
//! them: initial conditions, boundary setups, the analytic vortex solution,
//! error norms and convergence orders.
//!
//! Seven canonical problems are built in:
//!
//! | name                | system      | what it exercises                       |
//! |---------------------|-------------|-----------------------------------------|
//! | `double_rarefaction`| 1D Euler    | near-vacuum from symmetric rarefactions |
//! | `sedov_1d`          | 1D Euler    | point blast, delta-like energy spike    |
//! | `vortex`            | 2D Euler    | smooth accuracy test with exact solution|
//! | `sedov_2d`          | 2D Euler    | corner blast with reflective walls      |
//! | `mach2000`          | 2D Euler    | high-Mach jet inflow                    |
//! | `shock_diffraction` | 2D Euler    | shock around a corner, masked wall      |
//! | `detonation`        | reactive    | detonation diffraction, Arrhenius source|

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::SolverError;
use crate::field::{BoundaryCondition, Field};
use crate::state::{GasLaw, State, State1d, State2d};

/// Arrhenius rate parameters of the reactive source term.
#[derive(Debug, Clone, Copy)]
pub struct Reaction {
    pub rate: f64,
    pub activation: f64,
}

/// Boundary descriptor; inflow profiles are functions of the transverse
/// coordinate so they survive resolution overrides.
#[derive(Clone)]
pub enum BcKind<const N: usize> {
    Periodic,
    Outflow,
    Reflective,
    InflowUniform(State<N>),
    InflowProfile(Arc<dyn Fn(f64) -> State<N> + Send + Sync>),
}

/// A fully specified benchmark problem.
#[derive(Clone)]
pub struct ProblemSpec<const N: usize> {
    pub name: &'static str,
    pub domain_x: (f64, f64),
    pub domain_y: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub law: GasLaw<N>,
    pub cfl: f64,
    pub t_final: f64,
    /// Initial condition at a cell center; receives `(x, y, dx, dy)` so
    /// delta-like spikes can scale with the actual resolution.
    pub init: Arc<dyn Fn(f64, f64, f64, f64) -> State<N> + Send + Sync>,
    /// West, east, south, north.
    pub bc: [BcKind<N>; 4],
    /// Solid-wall predicate at cell centers.
    pub solid: Option<Arc<dyn Fn(f64, f64) -> bool + Send + Sync>>,
    pub reaction: Option<Reaction>,
    /// Exact solution `(x, y, t) -> state`, when the problem has one.
    pub exact: Option<Arc<dyn Fn(f64, f64, f64) -> State<N> + Send + Sync>>,
}

impl<const N: usize> ProblemSpec<N> {
    pub fn is_one_dimensional(&self) -> bool {
        self.ny == 1
    }

    /// Materialize a field at the given resolution: boundary conditions
    /// sampled onto the transverse nodes, interior filled from the initial
    /// condition, solid mask installed.
    pub fn build_field(&self, nx: usize, ny: usize) -> Field<N> {
        let dx = (self.domain_x.1 - self.domain_x.0) / nx as f64;
        let dy = if ny == 1 {
            1.0
        } else {
            (self.domain_y.1 - self.domain_y.0) / ny as f64
        };
        let x_center = |i: usize| self.domain_x.0 + (i as f64 + 0.5) * dx;
        let y_center = |j: usize| self.domain_y.0 + (j as f64 + 0.5) * dy;
        let bc = std::array::from_fn(|side| match &self.bc[side] {
            BcKind::Periodic => BoundaryCondition::Periodic,
            BcKind::Outflow => BoundaryCondition::Outflow,
            BcKind::Reflective => BoundaryCondition::Reflective,
            BcKind::InflowUniform(u) => BoundaryCondition::Inflow(vec![*u]),
            BcKind::InflowProfile(f) => BoundaryCondition::Inflow(if side < 2 {
                (0..ny).map(|j| f(y_center(j))).collect()
            } else {
                (0..nx).map(|i| f(x_center(i))).collect()
            }),
        });
        let mut field = Field::new(nx, ny, self.domain_x, self.domain_y, bc);
        for j in 0..ny {
            for i in 0..nx {
                field.set(i, j, (self.init)(x_center(i), y_center(j), dx, dy));
            }
        }
        if let Some(solid) = &self.solid {
            let mask = (0..ny)
                .flat_map(|j| (0..nx).map(move |i| (i, j)))
                .map(|(i, j)| solid(x_center(i), y_center(j)))
                .collect();
            field.set_mask(mask);
        }
        field
    }
}

/// A problem together with the Euler variant it runs on.
#[derive(Clone)]
pub enum Problem {
    Euler1d(ProblemSpec<3>),
    Euler2d(ProblemSpec<4>),
    ReactiveEuler(ProblemSpec<5>),
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Euler1d(s) => s.name,
            Problem::Euler2d(s) => s.name,
            Problem::ReactiveEuler(s) => s.name,
        }
    }
}

/// Names accepted by [`make_problem`].
pub const PROBLEM_NAMES: [&str; 7] = [
    "double_rarefaction",
    "sedov_1d",
    "vortex",
    "sedov_2d",
    "mach2000",
    "shock_diffraction",
    "detonation",
];

/// Vortex strength of the accuracy test; strong enough that the core sits
/// within rounding of vacuum.
pub const VORTEX_STRENGTH: f64 = 10.0828;
const VORTEX_CENTER: f64 = 5.0;
const VORTEX_PERIOD: f64 = 10.0;

/// Build one of the canonical problems.
pub fn make_problem(name: &str) -> Result<Problem, SolverError> {
    match name {
        "double_rarefaction" => Ok(Problem::Euler1d(double_rarefaction())),
        "sedov_1d" => Ok(Problem::Euler1d(sedov_1d())),
        "vortex" => Ok(Problem::Euler2d(vortex())),
        "sedov_2d" => Ok(Problem::Euler2d(sedov_2d())),
        "mach2000" => Ok(Problem::Euler2d(mach2000())),
        "shock_diffraction" => Ok(Problem::Euler2d(shock_diffraction())),
        "detonation" => Ok(Problem::ReactiveEuler(detonation())),
        other => Err(SolverError::UnknownProblem(other.to_string())),
    }
}

fn double_rarefaction() -> ProblemSpec<3> {
    let gamma = 1.4;
    ProblemSpec {
        name: "double_rarefaction",
        domain_x: (-0.5, 0.5),
        domain_y: (0.0, 1.0),
        nx: 200,
        ny: 1,
        law: GasLaw::ideal(gamma),
        cfl: 0.9,
        t_final: 0.3,
        init: Arc::new(move |x, _, _, _| {
            let v = if x <= 0.0 { -1.0 } else { 1.0 };
            State1d::from_primitive(7.0, v, 0.2, gamma)
        }),
        bc: [BcKind::Outflow, BcKind::Outflow, BcKind::Outflow, BcKind::Outflow],
        solid: None,
        reaction: None,
        exact: None,
    }
}

fn sedov_1d() -> ProblemSpec<3> {
    ProblemSpec {
        name: "sedov_1d",
        domain_x: (-2.0, 2.0),
        domain_y: (0.0, 1.0),
        nx: 800,
        ny: 1,
        law: GasLaw::ideal(1.4),
        cfl: 1.2,
        t_final: 0.001,
        // Delta-like blast: the single cell whose center lies in [0, dx)
        // carries energy 3.2e6 / dx, the rest sit just above vacuum.
        init: Arc::new(|x, _, dx, _| {
            let energy = if (0.0..dx).contains(&x) { 3.2e6 / dx } else { 1e-12 };
            State([1.0, 0.0, energy])
        }),
        bc: [BcKind::Outflow, BcKind::Outflow, BcKind::Outflow, BcKind::Outflow],
        solid: None,
        reaction: None,
        exact: None,
    }
}

fn vortex() -> ProblemSpec<4> {
    let gamma = 1.4;
    ProblemSpec {
        name: "vortex",
        domain_x: (0.0, VORTEX_PERIOD),
        domain_y: (0.0, VORTEX_PERIOD),
        nx: 90,
        ny: 90,
        law: GasLaw::ideal(gamma),
        cfl: 0.5,
        t_final: 0.01,
        init: Arc::new(move |x, y, _, _| vortex_state(x, y, 0.0, VORTEX_STRENGTH, gamma)),
        bc: [BcKind::Periodic, BcKind::Periodic, BcKind::Periodic, BcKind::Periodic],
        solid: None,
        reaction: None,
        exact: Some(Arc::new(move |x, y, t| {
            vortex_state(x, y, t, VORTEX_STRENGTH, gamma)
        })),
    }
}

fn sedov_2d() -> ProblemSpec<4> {
    ProblemSpec {
        name: "sedov_2d",
        domain_x: (0.0, 1.3),
        domain_y: (0.0, 1.3),
        nx: 640,
        ny: 640,
        law: GasLaw::ideal(1.4),
        cfl: 0.5,
        t_final: 1.0,
        // Quarter-plane blast: the corner cell carries 0.244816 / (dx dy).
        init: Arc::new(|x, y, dx, dy| {
            let energy = if (0.0..dx).contains(&x) && (0.0..dy).contains(&y) {
                0.244816 / (dx * dy)
            } else {
                1e-12
            };
            State([1.0, 0.0, 0.0, energy])
        }),
        bc: [BcKind::Reflective, BcKind::Outflow, BcKind::Reflective, BcKind::Outflow],
        solid: None,
        reaction: None,
        exact: None,
    }
}

fn mach2000() -> ProblemSpec<4> {
    let gamma = 5.0 / 3.0;
    let ambient = State2d::from_primitive(0.5, 0.0, 0.0, 0.4127, gamma);
    let jet = State2d::from_primitive(5.0, 800.0, 0.0, 0.4127, gamma);
    let wall_state = State2d::from_primitive(5.0, 0.0, 0.0, 0.4127, gamma);
    ProblemSpec {
        name: "mach2000",
        domain_x: (0.0, 1.0),
        domain_y: (0.0, 0.25),
        nx: 800,
        ny: 400,
        law: GasLaw::ideal(gamma),
        cfl: 0.25,
        t_final: 0.001,
        init: Arc::new(move |_, _, _, _| ambient),
        // The jet window is symmetric about y = 0; the bottom boundary is
        // the symmetry plane, so the computed half sees inflow on [0, 0.05].
        bc: [
            BcKind::InflowProfile(Arc::new(move |y| if y <= 0.05 { jet } else { wall_state })),
            BcKind::Outflow,
            BcKind::Reflective,
            BcKind::Outflow,
        ],
        solid: None,
        reaction: None,
        exact: None,
    }
}

fn shock_diffraction() -> ProblemSpec<4> {
    let gamma = 1.4;
    let ambient = State2d::from_primitive(1.4, 0.0, 0.0, 1.0, gamma);
    let (rho1, u1, p1) = normal_shock_post_state(5.09, 1.4, 1.0, gamma);
    let post = State2d::from_primitive(rho1, u1, 0.0, p1, gamma);
    ProblemSpec {
        name: "shock_diffraction",
        domain_x: (0.0, 13.0),
        domain_y: (0.0, 11.0),
        nx: 1040,
        ny: 880,
        law: GasLaw::ideal(gamma),
        cfl: 0.9,
        t_final: 2.3,
        // Right-moving Mach 5.09 shock at x = 0.5 in the channel above the
        // corner; everything else is ambient gas.
        init: Arc::new(move |x, y, _, _| if x < 0.5 && y > 6.0 { post } else { ambient }),
        bc: [
            BcKind::InflowProfile(Arc::new(move |y| if y > 6.0 { post } else { ambient })),
            BcKind::Outflow,
            BcKind::Outflow,
            BcKind::Outflow,
        ],
        solid: Some(Arc::new(|x, y| x < 1.0 && y < 6.0)),
        reaction: None,
        exact: None,
    }
}

fn detonation() -> ProblemSpec<5> {
    let gamma = 1.2;
    let heat_release = 50.0;
    // States given directly in conserved form (rho, u, v, E, Y).
    let driver = State([11.0, 11.0 * 6.18, 0.0, 970.0, 11.0]);
    let quiescent = State([1.0, 0.0, 0.0, 55.0, 1.0]);
    ProblemSpec {
        name: "detonation",
        domain_x: (0.0, 5.0),
        domain_y: (0.0, 5.0),
        nx: 400,
        ny: 400,
        law: GasLaw::reactive(gamma, heat_release),
        cfl: 0.89,
        t_final: 0.6,
        init: Arc::new(move |x, _, _, _| if x < 0.5 { driver } else { quiescent }),
        bc: [
            BcKind::InflowUniform(driver),
            BcKind::Reflective,
            BcKind::Reflective,
            BcKind::Reflective,
        ],
        solid: Some(Arc::new(|x, y| x < 1.0 && y < 2.0)),
        reaction: Some(Reaction {
            rate: 2566.4,
            activation: 50.0,
        }),
        exact: None,
    }
}

/// Primitive variables `(rho, u, v, p)` of the advected isentropic vortex.
///
/// The mean flow `(1, 1, 1, 1)` carries the vortex center from `(5, 5)`
/// with unit speed in both directions; the perturbation is evaluated at the
/// periodically wrapped offset. The entropy `p / rho^gamma` stays at 1, so
/// density and pressure follow from the temperature perturbation
/// `dT = -((gamma-1) G^2 / (8 pi^2 gamma)) exp(1 - r^2)`.
pub fn vortex_primitive(x: f64, y: f64, t: f64, strength: f64, gamma: f64) -> (f64, f64, f64, f64) {
    let xb = wrap_offset(x - (VORTEX_CENTER + t), VORTEX_PERIOD);
    let yb = wrap_offset(y - (VORTEX_CENTER + t), VORTEX_PERIOD);
    let r2 = xb * xb + yb * yb;
    let s = ((1.0 - r2) / 2.0).exp();
    let du = strength / (2.0 * PI) * s * yb;
    let dv = -strength / (2.0 * PI) * s * xb;
    let dt = -(gamma - 1.0) * strength * strength / (8.0 * PI * PI * gamma) * (1.0 - r2).exp();
    let temperature = 1.0 + dt;
    let rho = temperature.powf(1.0 / (gamma - 1.0));
    let p = temperature.powf(gamma / (gamma - 1.0));
    (rho, 1.0 + du, 1.0 + dv, p)
}

/// Conserved-variable form of [`vortex_primitive`].
pub fn vortex_state(x: f64, y: f64, t: f64, strength: f64, gamma: f64) -> State<4> {
    let (rho, u, v, p) = vortex_primitive(x, y, t, strength, gamma);
    State2d::from_primitive(rho, u, v, p, gamma)
}

fn wrap_offset(d: f64, period: f64) -> f64 {
    let mut r = d % period;
    if r < -0.5 * period {
        r += period;
    } else if r >= 0.5 * period {
        r -= period;
    }
    r
}

/// Post-shock state `(rho, u, p)` behind a normal shock of Mach number
/// `mach` moving into still gas `(rho0, 0, p0)`, from the Rankine-Hugoniot
/// jump conditions.
pub fn normal_shock_post_state(mach: f64, rho0: f64, p0: f64, gamma: f64) -> (f64, f64, f64) {
    let c0 = (gamma * p0 / rho0).sqrt();
    let m2 = mach * mach;
    let rho1 = rho0 * (gamma + 1.0) * m2 / ((gamma - 1.0) * m2 + 2.0);
    let p1 = p0 * (1.0 + 2.0 * gamma / (gamma + 1.0) * (m2 - 1.0));
    let u1 = mach * c0 * (1.0 - rho0 / rho1);
    (rho1, u1, p1)
}

/// Density L1 (mean absolute) and Linf (max absolute) errors between two
/// fields on matching grids.
pub fn density_error_norms<const N: usize>(
    numeric: &Field<N>,
    reference: &Field<N>,
) -> Result<(f64, f64), SolverError> {
    if numeric.nx() != reference.nx() || numeric.ny() != reference.ny() {
        return Err(SolverError::ShapeMismatch(
            numeric.nx() * numeric.ny(),
            reference.nx() * reference.ny(),
        ));
    }
    let mut l1 = 0.0;
    let mut linf = 0.0_f64;
    let mut count = 0usize;
    for (i, j) in numeric.fluid_cells() {
        let e = (numeric.get(i, j)[0] - reference.get(i, j)[0]).abs();
        l1 += e;
        linf = linf.max(e);
        count += 1;
    }
    Ok((l1 / count as f64, linf))
}

/// Density error norms against a pointwise exact solution at time `t`.
pub fn error_norms_vs_exact<const N: usize>(
    numeric: &Field<N>,
    exact: impl Fn(f64, f64) -> State<N>,
) -> (f64, f64) {
    let mut l1 = 0.0;
    let mut linf = 0.0_f64;
    let mut count = 0usize;
    for (i, j) in numeric.fluid_cells() {
        let e = (numeric.get(i, j)[0] - exact(numeric.x_center(i), numeric.y_center(j))[0]).abs();
        l1 += e;
        linf = linf.max(e);
        count += 1;
    }
    (l1 / count as f64, linf)
}

/// Observed orders between successive refinements:
/// `log(e_prev / e_k) / log(n_k / n_prev)`. A zero error makes the order of
/// that pair undefined (NaN). One resolution yields no orders.
pub fn convergence_order(errors: &[f64], resolutions: &[usize]) -> Vec<f64> {
    assert_eq!(errors.len(), resolutions.len());
    errors
        .windows(2)
        .zip(resolutions.windows(2))
        .map(|(e, n)| {
            if e[0] == 0.0 || e[1] == 0.0 {
                f64::NAN
            } else {
                (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln()
            }
        })
        .collect()
}
