//! Finite difference WENO5 solver for the 1D/2D compressible (and reactive)
//! Euler equations with a conservative, positivity-preserving sweeping
//! post-processor for density and pressure.
//!
//! The sweeping limiter runs after every Runge-Kutta stage: a serial
//! forward/backward pass first restores density positivity by moving mass
//! between neighbors, then restores pressure positivity by pairwise convex
//! blending of neighboring states. Both passes conserve the grid totals to
//! rounding and never touch a node that is already admissible.
//!
//! Modules:
//! - [`state`]: conserved-state vectors, the pressure law, the admissible set
//! - [`field`]: structured grids with ghost layers and boundary tags
//! - [`sweep`]: the density/pressure sweeping limiter and snake orderings
//! - [`weno`]: characteristic-wise WENO5 spatial operator
//! - [`integrate`]: SSP-RK3 stepping with the limiter as stage post-processing
//! - [`problems`]: benchmark problem definitions, boundary fills, error norms
//! - [`runner`]: end-to-end run driver, summaries and file artifacts

pub mod error;
pub mod field;
pub mod integrate;
pub mod problems;
pub mod runner;
pub mod state;
pub mod sweep;
pub mod weno;

pub use error::SolverError;
pub use field::{BoundaryCondition, Field};
pub use state::{GasLaw, State};
pub use sweep::SweepStats;
