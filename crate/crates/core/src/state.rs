//! Conserved-state vectors, the ideal-gas pressure law and the admissible set.
//!
//! Component layout is `[rho, m, E]` in 1D, `[rho, m, n, E]` in 2D and
//! `[rho, m, n, E, rho*Y]` for the reactive system, where `m`/`n` are the
//! momentum components and `rho*Y` is the partial density of the reactant.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use crate::error::SolverError;

/// Default positivity threshold.
pub const DEFAULT_EPS: f64 = 1e-13;

/// Conserved variables at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State<const N: usize>(pub [f64; N]);

/// 1D Euler state `(rho, m, E)`.
pub type State1d = State<3>;
/// 2D Euler state `(rho, m, n, E)`.
pub type State2d = State<4>;
/// 2D reactive Euler state `(rho, m, n, E, rho*Y)`.
pub type StateReactive = State<5>;

impl<const N: usize> State<N> {
    pub const ZERO: Self = State([0.0; N]);

    #[inline]
    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    /// Total energy component (index depends on the layout).
    #[inline]
    pub fn energy(&self) -> f64 {
        if N == 3 {
            self.0[2]
        } else {
            self.0[3]
        }
    }

    /// Euclidean norm over all conserved components.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Convex combination `(1 - t) * self + t * other`.
    #[inline]
    pub fn blend(&self, other: &Self, t: f64) -> Self {
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = (1.0 - t) * self.0[k] + t * other.0[k];
        }
        State(out)
    }
}

impl<const N: usize> Default for State<N> {
    fn default() -> Self {
        Self::ZERO
    }
}

impl<const N: usize> Index<usize> for State<N> {
    type Output = f64;
    #[inline]
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl<const N: usize> IndexMut<usize> for State<N> {
    #[inline]
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.0[k]
    }
}

impl<const N: usize> Add for State<N> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut out = self.0;
        for k in 0..N {
            out[k] += rhs.0[k];
        }
        State(out)
    }
}

impl<const N: usize> AddAssign for State<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..N {
            self.0[k] += rhs.0[k];
        }
    }
}

impl<const N: usize> Sub for State<N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut out = self.0;
        for k in 0..N {
            out[k] -= rhs.0[k];
        }
        State(out)
    }
}

impl<const N: usize> Mul<f64> for State<N> {
    type Output = Self;
    #[inline]
    fn mul(self, a: f64) -> Self {
        let mut out = self.0;
        for c in out.iter_mut() {
            *c *= a;
        }
        State(out)
    }
}

impl State1d {
    /// Build a conserved state from primitive variables `(rho, v, p)`.
    pub fn from_primitive(rho: f64, v: f64, p: f64, gamma: f64) -> Self {
        State([rho, rho * v, 0.5 * rho * v * v + p / (gamma - 1.0)])
    }

    /// Recover `(rho, v, p)`.
    pub fn primitive(&self, law: &GasLaw<3>) -> (f64, f64, f64) {
        (self.rho(), self.0[1] / self.rho(), law.pressure(self))
    }
}

impl State2d {
    /// Build a conserved state from primitive variables `(rho, u, v, p)`.
    pub fn from_primitive(rho: f64, u: f64, v: f64, p: f64, gamma: f64) -> Self {
        State([
            rho,
            rho * u,
            rho * v,
            0.5 * rho * (u * u + v * v) + p / (gamma - 1.0),
        ])
    }

    /// Recover `(rho, u, v, p)`.
    pub fn primitive(&self, law: &GasLaw<4>) -> (f64, f64, f64, f64) {
        let rho = self.rho();
        (rho, self.0[1] / rho, self.0[2] / rho, law.pressure(self))
    }
}

impl StateReactive {
    /// Build a conserved state from `(rho, u, v, p, Y)`.
    pub fn from_primitive(rho: f64, u: f64, v: f64, p: f64, y: f64, gamma: f64, q: f64) -> Self {
        State([
            rho,
            rho * u,
            rho * v,
            0.5 * rho * (u * u + v * v) + p / (gamma - 1.0) + rho * q * y,
            rho * y,
        ])
    }

    #[inline]
    pub fn rho_y(&self) -> f64 {
        self.0[4]
    }

    /// Recover `(rho, u, v, p, Y)`.
    pub fn primitive(&self, law: &GasLaw<5>) -> (f64, f64, f64, f64, f64) {
        let rho = self.rho();
        (
            rho,
            self.0[1] / rho,
            self.0[2] / rho,
            law.pressure(self),
            self.0[4] / rho,
        )
    }
}

/// Ideal-gas pressure law. Concave in the conserved variables on
/// `{rho > 0}`, which is what the pressure sweep relies on.
///
/// For the reactive system the chemical energy `Q * rho * Y` is subtracted
/// from the total energy before the ideal-gas relation is applied.
#[derive(Debug, Clone, Copy)]
pub struct GasLaw<const N: usize> {
    /// Specific-heat ratio, > 1.
    pub gamma: f64,
    /// Heat release `Q` of the reaction; only meaningful for the reactive layout.
    pub heat_release: Option<f64>,
    /// Positivity threshold for density and pressure.
    pub eps: f64,
}

impl<const N: usize> GasLaw<N> {
    pub fn ideal(gamma: f64) -> Self {
        assert!(gamma > 1.0, "gamma must exceed 1");
        GasLaw {
            gamma,
            heat_release: None,
            eps: DEFAULT_EPS,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Pressure of a conserved state. Requires `rho > 0`; use
    /// [`GasLaw::try_pressure`] when that is not guaranteed.
    #[inline]
    pub fn pressure(&self, u: &State<N>) -> f64 {
        let rho = u.0[0];
        let momentum_sq = if N == 3 {
            u.0[1] * u.0[1]
        } else {
            u.0[1] * u.0[1] + u.0[2] * u.0[2]
        };
        let chemical = if N == 5 {
            self.heat_release.unwrap_or(0.0) * u.0[4]
        } else {
            0.0
        };
        (self.gamma - 1.0) * (u.energy() - 0.5 * momentum_sq / rho - chemical)
    }

    /// Pressure with the domain check on density.
    pub fn try_pressure(&self, u: &State<N>) -> Result<f64, SolverError> {
        if u.0[0] <= 0.0 {
            return Err(SolverError::NonPositiveDensity { value: u.0[0] });
        }
        Ok(self.pressure(u))
    }

    /// Membership in the admissible set: `rho > eps` and `p > eps`.
    /// Non-positive density short-circuits without evaluating pressure.
    #[inline]
    pub fn is_admissible(&self, u: &State<N>) -> bool {
        u.0[0] > self.eps && self.pressure(u) > self.eps
    }

    /// Absolute resolution at which this state's pressure can be evaluated:
    /// the rounding scale of the `E - kinetic - chemical` cancellation.
    /// Pressures within this distance of a target value are numerically
    /// indistinguishable from it.
    #[inline]
    pub fn pressure_resolution(&self, u: &State<N>) -> f64 {
        let rho = u.0[0];
        let momentum_sq = if N == 3 {
            u.0[1] * u.0[1]
        } else {
            u.0[1] * u.0[1] + u.0[2] * u.0[2]
        };
        let chemical = if N == 5 {
            self.heat_release.unwrap_or(0.0) * u.0[4]
        } else {
            0.0
        };
        let scale = u.energy().abs() + 0.5 * momentum_sq / rho.abs() + chemical.abs();
        32.0 * f64::EPSILON * (self.gamma - 1.0) * scale
    }

    /// Sound speed `sqrt(gamma p / rho)`; requires an admissible state.
    #[inline]
    pub fn sound_speed(&self, u: &State<N>) -> f64 {
        (self.gamma * self.pressure(u) / u.0[0]).sqrt()
    }
}

impl GasLaw<5> {
    pub fn reactive(gamma: f64, heat_release: f64) -> Self {
        assert!(gamma > 1.0, "gamma must exceed 1");
        GasLaw {
            gamma,
            heat_release: Some(heat_release),
            eps: DEFAULT_EPS,
        }
    }
}

/// Componentwise arithmetic mean, accumulated left to right so that repeated
/// runs produce bit-identical results.
pub fn mean_state<const N: usize>(states: &[State<N>]) -> Result<State<N>, SolverError> {
    if states.is_empty() {
        return Err(SolverError::EmptySequence);
    }
    let mut sum = State::ZERO;
    for u in states {
        sum += *u;
    }
    Ok(sum * (1.0 / states.len() as f64))
}

/// Componentwise sum, accumulated left to right.
pub fn total_state<const N: usize>(states: impl IntoIterator<Item = State<N>>) -> State<N> {
    let mut sum = State::ZERO;
    for u in states {
        sum += u;
    }
    sum
}
