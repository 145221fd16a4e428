//! Error type shared by all solver stages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    /// Pressure was requested for a state with non-positive density.
    #[error("density {value:.6e} is not positive; pressure is undefined")]
    NonPositiveDensity { value: f64 },

    /// A node left the set of states the scheme can propagate.
    #[error("non-admissible state at node {index}: {what} = {value:.6e}")]
    NonAdmissible {
        index: usize,
        what: &'static str,
        value: f64,
    },

    /// The mean of the sequence is itself at or below the positivity
    /// threshold, so no conservative redistribution can fix it.
    #[error("mean {quantity} {value:.6e} <= eps = {eps:.1e}; positivity cannot be restored conservatively")]
    Infeasible {
        quantity: &'static str,
        value: f64,
        eps: f64,
    },

    /// The pressure sweep hit its full-sweep budget.
    #[error("pressure sweep did not finish within {max_sweeps} full sweeps (worst pressure {worst:.6e} at position {index})")]
    SweepBudgetExceeded {
        max_sweeps: usize,
        worst: f64,
        index: usize,
    },

    /// The Roe-averaged sound speed came out imaginary.
    #[error("Roe average has negative sound speed squared ({value:.6e})")]
    RoeSoundSpeed { value: f64 },

    #[error("empty state sequence")]
    EmptySequence,

    /// NaN or infinity showed up in the solution.
    #[error("non-finite solution value at t = {time:.6e}, step {step}")]
    NonFinite { time: f64, step: usize },

    /// Context wrapper attaching the Runge-Kutta stage (1-based).
    #[error("RK stage {stage}: {source}")]
    AtStage {
        stage: usize,
        #[source]
        source: Box<SolverError>,
    },

    /// Context wrapper attaching the time-step the failure occurred in.
    #[error("step {step} (t = {time:.6e}): {source}")]
    AtStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<SolverError>,
    },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("problem `{0}` has no exact solution; convergence tables need one")]
    NoExactSolution(String),

    #[error("grid shape mismatch: {0} vs {1} nodes")]
    ShapeMismatch(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SolverError {
    /// Wrap an error with the RK stage (1-based) it occurred in.
    pub fn at_stage(self, stage: usize) -> Self {
        SolverError::AtStage {
            stage,
            source: Box::new(self),
        }
    }
}
