//! Conservative positivity-preserving sweeping limiter.
//!
//! Works on any concave pressure function of the conserved variables. The
//! procedure is a post-processing step: first a forward/backward density
//! sweep moves mass between neighbors until every density sits at or above
//! the threshold, then repeated forward/backward pressure sweeps blend each
//! negative-pressure node with its neighbor in the sweep direction until
//! every node is admissible. Every operation replaces a pair `(u, v)` by
//! `((1-t) u + t v, t u + (1-t) v)`, so pair sums — and the grid mean — are
//! untouched, pairwise distances contract, and, by concavity, the pair's
//! combined pressure never decreases.
//!
//! The sweeps are inherently serial along their ordering; 2D grids are
//! linearized by serpentine orderings that alternate between column-major
//! and row-major so both x- and y-neighbors get paired.

use crate::error::SolverError;
use crate::field::Field;
use crate::state::{mean_state, GasLaw, State};

/// Which rule produced the blend parameter `t` of a node adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustBranch {
    /// Neighbor pressure is above the threshold: `t` comes from the chord
    /// equation, so concavity guarantees an admissible result.
    PositiveNeighbor,
    /// Negative neighbor: `t` comes from the distance-to-mean estimate.
    NegativeScaled,
    /// Negative neighbor: the estimate exceeded the 1/4 cap.
    NegativeCapped,
    /// Coincident states, nothing can move: `t = 0`.
    NoOp,
}

/// One pairwise adjustment, as seen by sweep observers.
#[derive(Debug, Clone, Copy)]
pub struct PairAdjustment<const N: usize> {
    /// Negative node before and after.
    pub node: (State<N>, State<N>),
    /// Sweep-direction neighbor before and after.
    pub neighbor: (State<N>, State<N>),
    pub t: f64,
    pub branch: AdjustBranch,
}

/// Sweep counters. "Stage" means one limiter invocation (one RK stage).
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct SweepStats {
    /// Stages in which the density sweep ran and moved mass.
    pub density_sweeps_total: u64,
    /// Full pressure sweeps used by the most recent limiter call.
    pub pressure_sweeps_last_call: u64,
    /// Full pressure sweeps over the whole run.
    pub pressure_sweeps_total: u64,
    /// Largest number of full pressure sweeps any single stage needed.
    pub pressure_sweeps_max_per_stage: u64,
    /// Stages that needed at least one pressure sweep.
    pub stages_with_sweeps: u64,
    /// Adjustments through the positive-neighbor formula.
    pub adjust_positive: u64,
    /// Adjustments through the scaled distance-to-mean estimate.
    pub adjust_negative_scaled: u64,
    /// Adjustments where the 1/4 cap was active.
    pub adjust_negative_capped: u64,
}

impl SweepStats {
    /// Mean full sweeps per stage, over stages that swept at all.
    pub fn average_pressure_sweeps(&self) -> f64 {
        if self.stages_with_sweeps == 0 {
            0.0
        } else {
            self.pressure_sweeps_total as f64 / self.stages_with_sweeps as f64
        }
    }

    /// Fold the outcome of one limiter call into the running totals.
    pub fn absorb_call(&mut self, call: &SweepStats) {
        self.density_sweeps_total += call.density_sweeps_total;
        self.pressure_sweeps_last_call = call.pressure_sweeps_last_call;
        self.pressure_sweeps_total += call.pressure_sweeps_total;
        self.pressure_sweeps_max_per_stage = self
            .pressure_sweeps_max_per_stage
            .max(call.pressure_sweeps_max_per_stage);
        self.stages_with_sweeps += call.stages_with_sweeps;
        self.adjust_positive += call.adjust_positive;
        self.adjust_negative_scaled += call.adjust_negative_scaled;
        self.adjust_negative_capped += call.adjust_negative_capped;
    }

    fn record_sweeps(&mut self, sweeps: u64) {
        self.pressure_sweeps_last_call = sweeps;
        if sweeps > 0 {
            self.pressure_sweeps_total += sweeps;
            self.pressure_sweeps_max_per_stage = self.pressure_sweeps_max_per_stage.max(sweeps);
            self.stages_with_sweeps += 1;
        }
    }
}

/// One forward and one backward deficit-transfer pass over the densities.
///
/// Any entry below `eps` is raised to exactly `eps` and the deficit is
/// pushed onto the next entry in the pass direction. When the sequence mean
/// exceeds `eps`, a single forward+backward pass is always enough, and the
/// sum is preserved to rounding. Returns the number of deficit transfers.
pub fn density_sweep(rho: &mut [f64], eps: f64) -> Result<usize, SolverError> {
    let n = rho.len();
    if n == 0 {
        return Err(SolverError::EmptySequence);
    }
    let mean = rho.iter().sum::<f64>() / n as f64;
    if !(mean > eps) {
        return Err(SolverError::Infeasible {
            quantity: "density",
            value: mean,
            eps,
        });
    }
    let mut transfers = 0;
    for j in 0..n - 1 {
        if rho[j] < eps {
            let d = rho[j] - eps;
            rho[j + 1] += d;
            rho[j] = eps;
            transfers += 1;
        }
    }
    for j in (1..n).rev() {
        if rho[j] < eps {
            let d = rho[j] - eps;
            rho[j - 1] += d;
            rho[j] = eps;
            transfers += 1;
        }
    }
    Ok(transfers)
}

/// Blend a negative-pressure node `u1` toward its neighbor `u2`.
///
/// With a positive neighbor, `t` solves the chord equation
/// `(1-t) p(u1) + t p(u2) = tau` where the target `tau` sits a rounding
/// headroom above `eps`; concavity then puts `p(u1*)` at or above `tau`.
/// The headroom matters: targeting `eps` itself leaves the repaired node's
/// pressure to round to either side of `eps`, and a deficit parked behind a
/// node that rounded low (deficits travel node by node in the pass
/// direction) could never be chord-walked back to a strong absorber. The
/// headroom is a small multiple of the pair's pressure-evaluation
/// resolution, so it is invisible at the scale of the data, and dominates
/// the error with which the blend can target a pressure at all.
///
/// With a negative neighbor, the step is the distance-to-mean estimate
/// `t1 ||u1 - ubar|| / ||u1 - u2||` capped at 1/4, which at least halves
/// the gap between the two negative nodes. Coincident neighbors
/// (`||u1 - u2|| = 0`) leave `u1` unchanged. In all branches `t` stays
/// strictly inside `(0, 1)`; a donor whose headroom is below the pair
/// resolution yields a near-swap `t` just under 1.
pub fn node_adjust<const N: usize>(
    u1: &State<N>,
    u2: &State<N>,
    ubar: &State<N>,
    law: &GasLaw<N>,
) -> (State<N>, f64, AdjustBranch) {
    let eps = law.eps;
    let p1 = law.pressure(u1);
    let p2 = law.pressure(u2);
    let (t, branch) = if p2 > eps {
        let headroom = 8.0 * (law.pressure_resolution(u1) + law.pressure_resolution(u2));
        let tau = eps + headroom;
        let t = ((p1 - tau) / (p1 - p2)).min(1.0 - f64::EPSILON);
        (t, AdjustBranch::PositiveNeighbor)
    } else {
        let gap = (*u1 - *u2).norm();
        if gap == 0.0 {
            return (*u1, 0.0, AdjustBranch::NoOp);
        }
        let t1 = (p1 - eps) / (p1 - law.pressure(ubar));
        let scaled = t1 * ((*u1 - *ubar).norm() / gap);
        if scaled < 0.25 {
            (scaled, AdjustBranch::NegativeScaled)
        } else {
            (0.25, AdjustBranch::NegativeCapped)
        }
    };
    (u1.blend(u2, t), t, branch)
}

/// Adjust `states[a]` against `states[b]` if its pressure is below `eps`,
/// moving the complementary increment onto the neighbor. Returns whether
/// the pair actually changed: a node whose pressure sits within rounding of
/// the threshold can produce a blend parameter too small to move the state
/// at floating-point resolution, and such stalled pairs must not count as
/// progress or the sweep loop would never terminate.
fn adjust_pair<const N: usize>(
    states: &mut [State<N>],
    a: usize,
    b: usize,
    ubar: &State<N>,
    law: &GasLaw<N>,
    stats: &mut SweepStats,
    observer: &mut impl FnMut(&PairAdjustment<N>),
) -> bool {
    if !(law.pressure(&states[a]) < law.eps) {
        return false;
    }
    let u1 = states[a];
    let u2 = states[b];
    let (u1_star, t, branch) = node_adjust(&u1, &u2, ubar, law);
    if branch == AdjustBranch::NoOp {
        return false;
    }
    let u2_star = u2 + (u1 - u1_star);
    if u1_star == u1 && u2_star == u2 {
        return false;
    }
    states[a] = u1_star;
    states[b] = u2_star;
    match branch {
        AdjustBranch::PositiveNeighbor => stats.adjust_positive += 1,
        AdjustBranch::NegativeScaled => stats.adjust_negative_scaled += 1,
        AdjustBranch::NegativeCapped => stats.adjust_negative_capped += 1,
        AdjustBranch::NoOp => unreachable!(),
    }
    observer(&PairAdjustment {
        node: (u1, u1_star),
        neighbor: (u2, u2_star),
        t,
        branch,
    });
    true
}

/// One full sweep: forward then backward along `order`. Returns the number
/// of pair adjustments that changed the data.
fn full_sweep<const N: usize>(
    states: &mut [State<N>],
    order: &[usize],
    ubar: &State<N>,
    law: &GasLaw<N>,
    stats: &mut SweepStats,
    observer: &mut impl FnMut(&PairAdjustment<N>),
) -> usize {
    let n = order.len();
    let mut changed = 0;
    for w in 0..n.saturating_sub(1) {
        changed +=
            adjust_pair(states, order[w], order[w + 1], ubar, law, stats, observer) as usize;
    }
    for w in (1..n).rev() {
        changed +=
            adjust_pair(states, order[w], order[w - 1], ubar, law, stats, observer) as usize;
    }
    changed
}

/// Worst node whose pressure sits below `eps` by more than its own
/// evaluation resolution, as `(pressure, position along the order)`.
/// `None` means the sequence is at the threshold as far as floating point
/// can tell, which is the sweep loop's termination condition.
fn worst_violation<const N: usize>(
    states: &[State<N>],
    order: &[usize],
    law: &GasLaw<N>,
) -> Option<(f64, usize)> {
    let mut worst: Option<(f64, usize)> = None;
    for (w, &k) in order.iter().enumerate() {
        let p = law.pressure(&states[k]);
        if p < law.eps - law.pressure_resolution(&states[k])
            && worst.map_or(true, |(wp, _)| p < wp)
        {
            worst = Some((p, w));
        }
    }
    worst
}

/// Repeat full pressure sweeps over `states` (in sequence order) until every
/// pressure is at or above `law.eps`, up to the resolution at which each
/// state's pressure can be evaluated at all. Preconditions: every density is
/// at or above `eps` (run [`density_sweep`] first) and the mean state has
/// positive pressure. Returns the sweep counters for this call.
pub fn pressure_sweep<const N: usize>(
    states: &mut [State<N>],
    law: &GasLaw<N>,
    max_full_sweeps: usize,
) -> Result<SweepStats, SolverError> {
    pressure_sweep_observed(states, law, max_full_sweeps, |_| {})
}

/// [`pressure_sweep`] with a callback invoked after every pairwise
/// adjustment; used by diagnostics and the property test suites.
pub fn pressure_sweep_observed<const N: usize>(
    states: &mut [State<N>],
    law: &GasLaw<N>,
    max_full_sweeps: usize,
    mut observer: impl FnMut(&PairAdjustment<N>),
) -> Result<SweepStats, SolverError> {
    let eps = law.eps;
    if let Some(bad) = states.iter().position(|u| u.rho() < eps) {
        return Err(SolverError::NonAdmissible {
            index: bad,
            what: "density (run the density sweep first)",
            value: states[bad].rho(),
        });
    }
    let ubar = mean_state(states)?;
    if !(law.pressure(&ubar) > eps) {
        return Err(SolverError::Infeasible {
            quantity: "pressure",
            value: law.pressure(&ubar),
            eps,
        });
    }
    let order: Vec<usize> = (0..states.len()).collect();
    let mut stats = SweepStats::default();
    let mut sweeps = 0u64;
    while let Some((worst, arg)) = worst_violation(states, &order, law) {
        if sweeps as usize >= max_full_sweeps {
            return Err(SolverError::SweepBudgetExceeded {
                max_sweeps: max_full_sweeps,
                worst,
                index: arg,
            });
        }
        let changed = full_sweep(states, &order, &ubar, law, &mut stats, &mut observer);
        sweeps += 1;
        if changed == 0 {
            // Fixed point at floating-point resolution.
            break;
        }
    }
    stats.record_sweeps(sweeps);
    Ok(stats)
}

/// Serpentine linearization of an `nx * ny` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnakeVariant {
    /// Walk each row in turn, x ascending on even rows and descending on
    /// odd rows (0-based).
    SweepI,
    /// The transpose rule: walk each column in turn, alternating y.
    SweepII,
}

/// Materialize the serpentine ordering as `(i, j)` cell coordinates.
/// Consecutive entries are grid-adjacent and every cell appears once.
pub fn snake_order(nx: usize, ny: usize, variant: SnakeVariant) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(nx * ny);
    match variant {
        SnakeVariant::SweepI => {
            for j in 0..ny {
                if j % 2 == 0 {
                    order.extend((0..nx).map(|i| (i, j)));
                } else {
                    order.extend((0..nx).rev().map(|i| (i, j)));
                }
            }
        }
        SnakeVariant::SweepII => {
            for i in 0..nx {
                if i % 2 == 0 {
                    order.extend((0..ny).map(|j| (i, j)));
                } else {
                    order.extend((0..ny).rev().map(|j| (i, j)));
                }
            }
        }
    }
    order
}

/// Snake ordering mapped to field storage indices, solid cells skipped.
fn storage_order<const N: usize>(field: &Field<N>, variant: SnakeVariant) -> Vec<usize> {
    snake_order(field.nx(), field.ny(), variant)
        .into_iter()
        .filter(|&(i, j)| !field.is_solid(i, j))
        .map(|(i, j)| field.idx(i as isize, j as isize))
        .collect()
}

/// Run the full limiter on a field: density sweep, then pressure sweeps,
/// as a no-op when every fluid cell is already at or above the threshold.
///
/// 1D fields sweep in the natural left-to-right order. 2D fields use the
/// serpentine orderings, alternating per full pressure sweep (first sweep
/// row-serpentine, second column-serpentine, and so on); the density sweep
/// uses the first ordering. The mean state is computed once per call from
/// the fluid interior and is unchanged by any adjustment.
pub fn apply_limiter<const N: usize>(
    field: &mut Field<N>,
    law: &GasLaw<N>,
    max_full_sweeps: usize,
    stats: &mut SweepStats,
) -> Result<(), SolverError> {
    let eps = law.eps;

    let mut min_rho = f64::INFINITY;
    for u in field.fluid_states() {
        if u.rho() < min_rho {
            min_rho = u.rho();
        }
    }
    let need_density = min_rho < eps;
    if !need_density {
        let mut min_p = f64::INFINITY;
        for u in field.fluid_states() {
            let p = law.pressure(&u);
            if p < min_p {
                min_p = p;
            }
        }
        if !(min_p < eps) {
            stats.pressure_sweeps_last_call = 0;
            return Ok(());
        }
    }

    let order_a = storage_order(field, SnakeVariant::SweepI);
    let order_b = if field.is_one_dimensional() {
        order_a.clone()
    } else {
        storage_order(field, SnakeVariant::SweepII)
    };
    let mut call = SweepStats::default();

    if need_density {
        let data = field.raw_mut();
        let mut rho: Vec<f64> = order_a.iter().map(|&k| data[k].rho()).collect();
        let transfers = density_sweep(&mut rho, eps)?;
        for (w, &k) in order_a.iter().enumerate() {
            data[k][0] = rho[w];
        }
        if transfers > 0 {
            call.density_sweeps_total = 1;
        }
    }

    // Mean over the fluid interior in row-major order; conserved by every
    // sweep operation, so computing it once per call is exact.
    let ubar = mean_state(&field.fluid_states().collect::<Vec<_>>())?;
    if !(law.pressure(&ubar) > eps) {
        return Err(SolverError::Infeasible {
            quantity: "pressure",
            value: law.pressure(&ubar),
            eps,
        });
    }

    let data = field.raw_mut();
    let mut sweeps = 0u64;
    let mut stalled = 0u64;
    while let Some((worst, arg)) = worst_violation(data, &order_a, law) {
        if sweeps as usize >= max_full_sweeps {
            return Err(SolverError::SweepBudgetExceeded {
                max_sweeps: max_full_sweeps,
                worst,
                index: arg,
            });
        }
        let order = if sweeps % 2 == 0 { &order_a } else { &order_b };
        let changed = full_sweep(data, order, &ubar, law, &mut call, &mut |_| {});
        sweeps += 1;
        if changed == 0 {
            // In 2D give the other ordering one chance before declaring a
            // floating-point fixed point: it pairs different neighbors.
            stalled += 1;
            if stalled >= 2 || order_a == order_b {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    call.record_sweeps(sweeps);
    stats.absorb_call(&call);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BoundaryCondition;
    use crate::state::State1d;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LAW: GasLaw<3> = GasLaw {
        gamma: 1.4,
        heat_release: None,
        eps: 0.0,
    };

    #[test]
    fn density_sweep_forward_transfer() {
        let mut rho = [-1.0, 2.0, 3.0];
        let n = density_sweep(&mut rho, 0.0).unwrap();
        assert_eq!(rho, [0.0, 1.0, 3.0]);
        assert_eq!(n, 1);
        assert_eq!(rho.iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn density_sweep_noop_on_positive_input() {
        let mut rho = [1.0, 1.0, 1.0];
        assert_eq!(density_sweep(&mut rho, 0.0).unwrap(), 0);
        assert_eq!(rho, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn density_sweep_backward_only_for_trailing_deficit() {
        // Forward pass stops before the last entry, so the backward pass
        // must resolve it.
        let mut rho = [3.0, -1.0];
        density_sweep(&mut rho, 0.0).unwrap();
        assert_eq!(rho, [2.0, 0.0]);
    }

    #[test]
    fn density_sweep_rejects_infeasible_mean() {
        let mut rho = [1e-14, 1e-14];
        assert!(matches!(
            density_sweep(&mut rho, 1e-13),
            Err(SolverError::Infeasible { .. })
        ));
    }

    #[test]
    fn density_sweep_restores_positivity_with_exact_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10_000 {
            let n = rng.gen_range(1..=100);
            let mut rho: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..4.0)).collect();
            let sum_before: f64 = rho.iter().sum();
            let abs_scale: f64 = rho.iter().map(|r| r.abs()).sum();
            // A mean within rounding noise of eps leaves no conservative
            // slack for the theorem; keep a macroscopic margin.
            if sum_before / n as f64 <= 0.01 {
                continue;
            }
            let transfers = density_sweep(&mut rho, 1e-13).unwrap();
            assert!(rho.iter().all(|&r| r >= 1e-13));
            let sum_after: f64 = rho.iter().sum();
            // Each transfer contributes two roundings at the running
            // deficit magnitude, which is bounded by twice the absolute sum.
            let bound = 4.0 * (transfers.max(1) as f64) * f64::EPSILON * abs_scale.max(1.0);
            assert!((sum_after - sum_before).abs() <= bound);
        }
    }

    #[test]
    fn node_adjust_linear_segment_hits_threshold_exactly() {
        // Pressure is linear along this segment (equal densities, equal
        // momenta), so the chord formula is exact: t = 1/3 up to the tiny
        // headroom kept above the threshold.
        let u1 = State([1.0, 0.0, -1.0]);
        let u2 = State([1.0, 0.0, 2.0]);
        let ubar = State([1.0, 0.0, 1.0]);
        let (star, t, branch) = node_adjust(&u1, &u2, &ubar, &LAW);
        assert!((t - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(branch, AdjustBranch::PositiveNeighbor);
        assert!((star[2] - 0.0).abs() < 1e-11);
        // Lands on the threshold side of the segment, never below it.
        let p = LAW.pressure(&star);
        assert!(p >= 0.0 && p < 1e-11);
    }

    #[test]
    fn node_adjust_curved_segment_lands_above_threshold() {
        let u1 = State([1.0, 2.0, 1.0]); // p = -0.4
        let u2 = State([1.0, 0.0, 1.0]); // p = 0.4
        assert!((LAW.pressure(&u1) + 0.4).abs() < 1e-15);
        assert!((LAW.pressure(&u2) - 0.4).abs() < 1e-15);
        let ubar = State([1.0, 1.0, 1.0]);
        let (star, t, _) = node_adjust(&u1, &u2, &ubar, &LAW);
        assert!((t - 0.5).abs() < 1e-12);
        assert!((star - State([1.0, 1.0, 1.0])).norm() < 1e-11);
        assert!((LAW.pressure(&star) - 0.2).abs() < 1e-11);

        // Fine scan of the segment: concavity puts p(blend) on or above the
        // chord everywhere, strictly inside because of the m^2/rho term.
        for k in 0..=1000 {
            let s = k as f64 / 1000.0;
            let chord = (1.0 - s) * LAW.pressure(&u1) + s * LAW.pressure(&u2);
            assert!(LAW.pressure(&u1.blend(&u2, s)) >= chord - 1e-12);
        }
    }

    #[test]
    fn node_adjust_negative_neighbor_caps_at_quarter() {
        let u1 = State([1.0, 0.0, -1.0]); // p = -0.4
        let u2 = State([1.0, 0.0, -2.0]); // p = -0.8, negative branch
        let ubar = State([1.0, 0.0, 5.0]); // p(ubar) = 2
        let (star, t, branch) = node_adjust(&u1, &u2, &ubar, &LAW);

        // Independent recomputation of both branch formulas.
        let t1 = (LAW.pressure(&u1) - 0.0) / (LAW.pressure(&u1) - LAW.pressure(&ubar));
        assert!((t1 - 1.0 / 6.0).abs() < 1e-15);
        let ratio = (u1 - ubar).norm() / (u1 - u2).norm();
        assert!((ratio - 6.0).abs() < 1e-12);
        assert!((t1 * ratio - 1.0).abs() < 1e-12);

        assert_eq!(t, 0.25);
        assert_eq!(branch, AdjustBranch::NegativeCapped);
        assert_eq!(star, State([1.0, 0.0, -1.25]));
    }

    #[test]
    fn node_adjust_coincident_negatives_is_noop() {
        let u = State([1.0, 0.0, -1.0]);
        let ubar = State([1.0, 0.0, 5.0]);
        let (star, t, branch) = node_adjust(&u, &u, &ubar, &LAW);
        assert_eq!(branch, AdjustBranch::NoOp);
        assert_eq!(t, 0.0);
        assert_eq!(star, u);
    }

    #[test]
    fn blend_parameter_stays_in_unit_interval() {
        let law = GasLaw::<3>::ideal(1.4);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20_000 {
            let u1 = State([
                rng.gen_range(0.1..4.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..1.0),
            ]);
            if law.pressure(&u1) >= law.eps {
                continue;
            }
            let u2 = State([
                rng.gen_range(0.1..4.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..6.0),
            ]);
            let ubar = State1d::from_primitive(1.0, 0.0, rng.gen_range(0.5..4.0), 1.4);
            let (_, t, branch) = node_adjust(&u1, &u2, &ubar, &law);
            match branch {
                AdjustBranch::PositiveNeighbor => assert!(t > 0.0 && t < 1.0),
                AdjustBranch::NegativeScaled | AdjustBranch::NegativeCapped => {
                    assert!(t > 0.0 && t <= 0.25)
                }
                AdjustBranch::NoOp => assert_eq!(t, 0.0),
            }
        }
    }

    #[test]
    fn pressure_sweep_noop_on_admissible_input() {
        let law = GasLaw::<3>::ideal(1.4);
        let mut states: Vec<State1d> = (0..10)
            .map(|i| State1d::from_primitive(1.0 + i as f64, 0.5, 2.0, 1.4))
            .collect();
        let before = states.clone();
        let stats = pressure_sweep(&mut states, &law, 100).unwrap();
        assert_eq!(stats.pressure_sweeps_last_call, 0);
        assert_eq!(stats.stages_with_sweeps, 0);
        assert_eq!(states, before);
    }

    #[test]
    fn pressure_sweep_rejects_infeasible_mean() {
        let law = GasLaw::<3>::ideal(1.4);
        // Kinetic energy eats the entire energy budget on average.
        let mut states = vec![State([1.0, 2.0, 1.0]); 4];
        assert!(matches!(
            pressure_sweep(&mut states, &law, 100),
            Err(SolverError::Infeasible { .. })
        ));
    }

    #[test]
    fn pressure_sweep_single_negative_point_fixed_in_one_sweep() {
        let law = GasLaw::<3>::ideal(1.4);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..2_000 {
            let n = rng.gen_range(3..=20);
            let mut states: Vec<State1d> = (0..n)
                .map(|_| {
                    State1d::from_primitive(
                        rng.gen_range(0.5..3.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.5..3.0),
                        1.4,
                    )
                })
                .collect();
            let k = rng.gen_range(0..n);
            states[k][2] = 0.5 * states[k][1] * states[k][1] / states[k][0] - rng.gen_range(0.0..0.5);
            let before = crate::state::total_state(states.iter().copied());

            let stats = pressure_sweep(&mut states, &law, 100).unwrap();
            assert_eq!(stats.pressure_sweeps_last_call, 1);
            assert!(states.iter().all(|u| u.rho() >= law.eps));
            assert!(states
                .iter()
                .all(|u| law.pressure(u) >= law.eps - law.pressure_resolution(u)));

            let after = crate::state::total_state(states.iter().copied());
            for c in 0..3 {
                let scale: f64 = states.iter().map(|u| u[c].abs()).sum::<f64>().max(1.0);
                assert!((after[c] - before[c]).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn sweep_adjustments_contract_and_raise_pressure() {
        // Per-adjustment invariants: pair pressure sum never drops, pair
        // distance never grows, pair variance about the mean never grows.
        let law = GasLaw::<3>::ideal(1.4);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let n = rng.gen_range(4..=30);
            let mut states: Vec<State1d> = (0..n)
                .map(|_| {
                    State1d::from_primitive(
                        rng.gen_range(0.5..3.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.5..3.0),
                        1.4,
                    )
                })
                .collect();
            for _ in 0..rng.gen_range(1..=n / 2) {
                let k = rng.gen_range(0..n);
                states[k][2] =
                    0.5 * states[k][1] * states[k][1] / states[k][0] - rng.gen_range(0.0..1.0);
            }
            let ubar = mean_state(&states).unwrap();
            if !(law.pressure(&ubar) > law.eps) {
                continue;
            }
            pressure_sweep_observed(&mut states, &law, 100, |adj| {
                let (n0, n1) = adj.node;
                let (p0, p1) = adj.neighbor;
                let psum_before = law.pressure(&n0) + law.pressure(&p0);
                let psum_after = law.pressure(&n1) + law.pressure(&p1);
                assert!(psum_after >= psum_before - 1e-12);

                assert!((p1 - n1).norm() <= (p0 - n0).norm() * (1.0 + 1e-12));

                let var_before = (n0 - ubar).norm().powi(2) + (p0 - ubar).norm().powi(2);
                let var_after = (n1 - ubar).norm().powi(2) + (p1 - ubar).norm().powi(2);
                assert!(var_after <= var_before + 1e-12 * var_before.max(1.0));
            })
            .unwrap();
        }
    }

    #[test]
    fn variance_drop_is_strict_for_distinct_pairs() {
        // t = 1/2 on a symmetric pair: local variance must fall by
        // 2 t (1-t) ||up - un||^2 = ||up - un||^2 / 2.
        let u1 = State([1.0, 2.0, 1.0]);
        let u2 = State([1.0, 0.0, 1.0]);
        let ubar = State([1.0, 1.0, 2.0]);
        let (star, t, _) = node_adjust(&u1, &u2, &ubar, &LAW);
        assert!((t - 0.5).abs() < 1e-12);
        let mate = u2 + (u1 - star);
        let before = (u1 - ubar).norm().powi(2) + (u2 - ubar).norm().powi(2);
        let after = (star - ubar).norm().powi(2) + (mate - ubar).norm().powi(2);
        let expected_drop = 2.0 * t * (1.0 - t) * (u2 - u1).norm().powi(2);
        assert!((before - after - expected_drop).abs() < 1e-12);
        assert!(after < before);
    }

    #[test]
    fn snake_order_sweep_i_2x2() {
        assert_eq!(
            snake_order(2, 2, SnakeVariant::SweepI),
            vec![(0, 0), (1, 0), (1, 1), (0, 1)]
        );
    }

    #[test]
    fn snake_order_sweep_ii_2x2() {
        assert_eq!(
            snake_order(2, 2, SnakeVariant::SweepII),
            vec![(0, 0), (0, 1), (1, 1), (1, 0)]
        );
    }

    #[test]
    fn snake_order_degenerate_single_column() {
        let a = snake_order(1, 4, SnakeVariant::SweepI);
        let b = snake_order(1, 4, SnakeVariant::SweepII);
        let expect: Vec<(usize, usize)> = (0..4).map(|j| (0, j)).collect();
        assert_eq!(a, expect);
        assert_eq!(b, expect);
    }

    #[test]
    fn snake_orders_are_adjacent_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..50 {
            let nx = rng.gen_range(1..=12);
            let ny = rng.gen_range(1..=12);
            for variant in [SnakeVariant::SweepI, SnakeVariant::SweepII] {
                let order = snake_order(nx, ny, variant);
                assert_eq!(order.len(), nx * ny);
                let mut seen = vec![false; nx * ny];
                for &(i, j) in &order {
                    assert!(!seen[j * nx + i]);
                    seen[j * nx + i] = true;
                }
                for w in 1..order.len() {
                    let (i0, j0) = order[w - 1];
                    let (i1, j1) = order[w];
                    let manhattan = i0.abs_diff(i1) + j0.abs_diff(j1);
                    assert_eq!(manhattan, 1, "non-adjacent at {w} ({variant:?})");
                }
            }
        }
    }

    fn admissible_field(nx: usize, ny: usize) -> Field<3> {
        let mut f = Field::new(
            nx,
            ny,
            (0.0, 1.0),
            (0.0, 1.0),
            [
                BoundaryCondition::Outflow,
                BoundaryCondition::Outflow,
                BoundaryCondition::Outflow,
                BoundaryCondition::Outflow,
            ],
        );
        for j in 0..ny {
            for i in 0..nx {
                f.set(i, j, State1d::from_primitive(1.0 + (i + j) as f64 * 0.1, 0.3, 1.5, 1.4));
            }
        }
        f
    }

    #[test]
    fn limiter_is_noop_on_admissible_field() {
        let law = GasLaw::<3>::ideal(1.4);
        let mut field = admissible_field(6, 4);
        let before = field.raw().to_vec();
        let mut stats = SweepStats::default();
        apply_limiter(&mut field, &law, 100, &mut stats).unwrap();
        assert_eq!(field.raw(), &before[..]);
        assert_eq!(stats, SweepStats::default());
    }

    #[test]
    fn limiter_restores_field_admissibility_conservatively() {
        let law = GasLaw::<3>::ideal(1.4);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..200 {
            let nx = rng.gen_range(3..=10);
            let ny = rng.gen_range(1..=10);
            let mut field = admissible_field(nx, ny);
            // Poison a few cells with negative pressure and/or density.
            for _ in 0..rng.gen_range(1..=3) {
                let i = rng.gen_range(0..nx);
                let j = rng.gen_range(0..ny);
                let mut u = field.get(i, j);
                u[2] = -rng.gen_range(0.0..0.5);
                if rng.gen_bool(0.3) {
                    u[0] = -rng.gen_range(0.0..0.1);
                }
                field.set(i, j, u);
            }
            let before = field.totals();
            let mut stats = SweepStats::default();
            apply_limiter(&mut field, &law, 100, &mut stats).unwrap();
            assert!(field.fluid_states().all(|u| u.rho() >= law.eps));
            assert!(field
                .fluid_states()
                .all(|u| law.pressure(&u) >= law.eps - law.pressure_resolution(&u)));
            let after = field.totals();
            for c in 0..3 {
                let scale = before[c].abs().max(1.0);
                assert!((after[c] - before[c]).abs() <= 1e-12 * scale);
            }
            assert!(stats.pressure_sweeps_total > 0 || stats.density_sweeps_total > 0);
        }
    }

    #[test]
    fn limiter_handles_mixed_scale_fields() {
        // Blast-scale energies beside near-vacuum feet: deficits must be
        // walked back to strong absorbers through repaired threshold-level
        // nodes without exhausting the sweep budget.
        let law = GasLaw::<3>::ideal(1.4);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..500 {
            let n = rng.gen_range(16..=64);
            let mut field = Field::new_1d(
                n,
                (0.0, 1.0),
                BoundaryCondition::Outflow,
                BoundaryCondition::Outflow,
            );
            for i in 0..n {
                field.set(i, 0, State([1.0, 0.0, 1e-12]));
            }
            let blast = rng.gen_range(2..n - 2);
            field.set(blast, 0, State([1.0, 0.0, rng.gen_range(1e6..1e9)]));
            // Deficits next to the blast, orders of magnitude deeper than
            // the foot can absorb.
            for offset in [-1_isize, 1] {
                let k = (blast as isize + offset) as usize;
                let depth = -rng.gen_range(1e-9..1e-3);
                field.set(k, 0, State([rng.gen_range(0.2..1.0), 0.0, depth]));
            }
            let before = field.totals();
            let mut stats = SweepStats::default();
            apply_limiter(&mut field, &law, 100, &mut stats).unwrap();
            assert!(field.fluid_states().all(|u| u.rho() >= law.eps));
            assert!(field
                .fluid_states()
                .all(|u| law.pressure(&u) >= law.eps - law.pressure_resolution(&u)));
            assert!(stats.pressure_sweeps_max_per_stage <= 3);
            let after = field.totals();
            for c in 0..3 {
                let scale = before[c].abs().max(1.0);
                assert!((after[c] - before[c]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn limiter_skips_solid_cells() {
        let law = GasLaw::<3>::ideal(1.4);
        let mut field = admissible_field(6, 2);
        field.set_mask((0..12).map(|k| k == 3).collect());
        // The solid cell may hold anything; the limiter must not read it.
        field.set(3, 0, State([f64::NAN, 0.0, f64::NAN]));
        let mut u = field.get(1, 0);
        u[2] = -0.2;
        field.set(1, 0, u);
        let mut stats = SweepStats::default();
        apply_limiter(&mut field, &law, 100, &mut stats).unwrap();
        assert!(field
            .fluid_states()
            .all(|u| law.pressure(&u) >= law.eps - law.pressure_resolution(&u)));
        assert!(field.get(3, 0)[0].is_nan());
    }

    #[test]
    fn sweep_budget_error_reports_worst_pressure() {
        let law = GasLaw::<3>::ideal(1.4);
        // Two negative nodes and one strong positive node keep the mean
        // pressure positive; a budget of zero must fail immediately.
        let mut states = vec![
            State([1.0, 0.0, -1.0]),
            State([1.0, 0.0, -1.0]),
            State([1.0, 0.0, 40.0]),
        ];
        match pressure_sweep(&mut states, &law, 0) {
            Err(SolverError::SweepBudgetExceeded { worst, .. }) => assert!(worst < 0.0),
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
