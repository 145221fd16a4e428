//! Characteristic-wise fifth-order WENO finite difference operator.
//!
//! The semi-discrete residual `L(u)_i = -(f_{i+1/2} - f_{i-1/2}) / dx` is
//! assembled per interface:
//!
//! 1. global Lax-Friedrichs (Rusanov) splitting `f± = (u ± f(u)/alpha) / 2`,
//! 2. Roe-average eigensystem of the two interface neighbors,
//! 3. projection of the six stencil nodes into characteristic variables,
//! 4. fifth-order WENO reconstruction per characteristic component, with
//!    the mirrored stencil for the downwind `f-` part,
//! 5. projection back and recombination `f_hat = alpha (f+_hat - f-_hat)`.
//!
//! 2D grids are handled dimension by dimension with per-direction alphas.
//! Lines are independent, so rows and columns run in parallel; all
//! reductions stay serial, which keeps outputs bit-identical across thread
//! counts.

use rayon::prelude::*;

use crate::error::SolverError;
use crate::field::Field;
use crate::state::{GasLaw, State};

/// Sweep direction of a 1D pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Left/right eigenvector matrices and wave speeds at one interface.
#[derive(Debug, Clone)]
pub struct EigenSystem<const N: usize> {
    pub left: [[f64; N]; N],
    pub right: [[f64; N]; N],
    /// Roe-average wave speeds, ascending.
    pub speeds: [f64; N],
}

impl<const N: usize> EigenSystem<N> {
    /// Project a physical vector into characteristic variables (`L v`).
    #[inline]
    pub fn to_characteristic(&self, v: &State<N>) -> State<N> {
        let mut out = State::ZERO;
        for r in 0..N {
            let row = &self.left[r];
            let mut acc = 0.0;
            for c in 0..N {
                acc += row[c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Map characteristic variables back to physical space (`R w`).
    #[inline]
    pub fn to_physical(&self, w: &State<N>) -> State<N> {
        let mut out = State::ZERO;
        for r in 0..N {
            let mut acc = 0.0;
            for c in 0..N {
                acc += self.right[r][c] * w[c];
            }
            out[r] = acc;
        }
        out
    }
}

/// Physical flux and Roe linearization of one Euler variant.
pub trait EulerSystem<const N: usize> {
    fn flux(&self, u: &State<N>, axis: Axis) -> State<N>;

    /// Roe-average eigensystem between two admissible states.
    fn roe_eigensystem(
        &self,
        ul: &State<N>,
        ur: &State<N>,
        axis: Axis,
    ) -> Result<EigenSystem<N>, SolverError>;

    /// `|velocity along axis| + sound speed`.
    fn signal_speed(&self, u: &State<N>, axis: Axis) -> f64;
}

/// Rusanov splitting `f± = (u ± f/alpha) / 2`, so that
/// `f+ + f- = u` and `alpha (f+ - f-) = f`.
#[inline]
pub fn flux_split<const N: usize>(
    u: &State<N>,
    f: &State<N>,
    alpha: f64,
) -> (State<N>, State<N>) {
    let mut plus = State::ZERO;
    let mut minus = State::ZERO;
    for k in 0..N {
        plus[k] = 0.5 * (u[k] + f[k] / alpha);
        minus[k] = 0.5 * (u[k] - f[k] / alpha);
    }
    (plus, minus)
}

/// Third-order candidate values at the right interface of the center node,
/// one per stencil `{v0,v1,v2}`, `{v1,v2,v3}`, `{v2,v3,v4}`.
#[inline]
pub fn weno5_candidates(v: &[f64; 5]) -> [f64; 3] {
    [
        (2.0 * v[0] - 7.0 * v[1] + 11.0 * v[2]) / 6.0,
        (-v[1] + 5.0 * v[2] + 2.0 * v[3]) / 6.0,
        (2.0 * v[2] + 5.0 * v[3] - v[4]) / 6.0,
    ]
}

/// Normalized nonlinear weights from the Jiang-Shu smoothness indicators
/// (linear weights 1/10, 6/10, 3/10; regularization 1e-6; power 2).
#[inline]
pub fn weno5_weights(v: &[f64; 5]) -> [f64; 3] {
    const REG: f64 = 1e-6;
    let d0 = v[0] - 2.0 * v[1] + v[2];
    let d1 = v[1] - 2.0 * v[2] + v[3];
    let d2 = v[2] - 2.0 * v[3] + v[4];
    let beta0 = 13.0 / 12.0 * d0 * d0 + 0.25 * (v[0] - 4.0 * v[1] + 3.0 * v[2]).powi(2);
    let beta1 = 13.0 / 12.0 * d1 * d1 + 0.25 * (v[1] - v[3]).powi(2);
    let beta2 = 13.0 / 12.0 * d2 * d2 + 0.25 * (3.0 * v[2] - 4.0 * v[3] + v[4]).powi(2);
    let a0 = 0.1 / ((REG + beta0) * (REG + beta0));
    let a1 = 0.6 / ((REG + beta1) * (REG + beta1));
    let a2 = 0.3 / ((REG + beta2) * (REG + beta2));
    let inv = 1.0 / (a0 + a1 + a2);
    [a0 * inv, a1 * inv, a2 * inv]
}

/// Fifth-order WENO value at the right interface of the center node, biased
/// upwind-left. The downwind reconstruction is this function applied to the
/// reversed stencil. Anchoring on the central candidate makes constant data
/// reproduce exactly.
#[inline]
pub fn weno5_reconstruct(v: &[f64; 5]) -> f64 {
    let q = weno5_candidates(v);
    let w = weno5_weights(v);
    q[1] + w[0] * (q[0] - q[1]) + w[2] * (q[2] - q[1])
}

/// Sqrt-density-weighted Roe mean of a per-node quantity.
#[inline]
fn roe_mean(sl: f64, sr: f64, ql: f64, qr: f64) -> f64 {
    (sl * ql + sr * qr) / (sl + sr)
}

impl EulerSystem<3> for GasLaw<3> {
    fn flux(&self, u: &State<3>, _axis: Axis) -> State<3> {
        let v = u[1] / u[0];
        let p = self.pressure(u);
        State([u[1], u[1] * v + p, (u[2] + p) * v])
    }

    fn roe_eigensystem(
        &self,
        ul: &State<3>,
        ur: &State<3>,
        _axis: Axis,
    ) -> Result<EigenSystem<3>, SolverError> {
        let gm1 = self.gamma - 1.0;
        let (sl, sr) = (ul[0].sqrt(), ur[0].sqrt());
        let v = roe_mean(sl, sr, ul[1] / ul[0], ur[1] / ur[0]);
        let hl = (ul[2] + self.pressure(ul)) / ul[0];
        let hr = (ur[2] + self.pressure(ur)) / ur[0];
        let h = roe_mean(sl, sr, hl, hr);
        let c2 = gm1 * (h - 0.5 * v * v);
        if !(c2 > 0.0) {
            return Err(SolverError::RoeSoundSpeed { value: c2 });
        }
        let c = c2.sqrt();
        let b1 = gm1 / c2;
        let b2 = 0.5 * b1 * v * v;
        Ok(EigenSystem {
            speeds: [v - c, v, v + c],
            right: [
                [1.0, 1.0, 1.0],
                [v - c, v, v + c],
                [h - v * c, 0.5 * v * v, h + v * c],
            ],
            left: [
                [0.5 * (b2 + v / c), -0.5 * (b1 * v + 1.0 / c), 0.5 * b1],
                [1.0 - b2, b1 * v, -b1],
                [0.5 * (b2 - v / c), -0.5 * (b1 * v - 1.0 / c), 0.5 * b1],
            ],
        })
    }

    fn signal_speed(&self, u: &State<3>, _axis: Axis) -> f64 {
        (u[1] / u[0]).abs() + self.sound_speed(u)
    }
}

impl EulerSystem<4> for GasLaw<4> {
    fn flux(&self, w: &State<4>, axis: Axis) -> State<4> {
        let p = self.pressure(w);
        let (u, v) = (w[1] / w[0], w[2] / w[0]);
        match axis {
            Axis::X => State([w[1], w[1] * u + p, w[2] * u, (w[3] + p) * u]),
            Axis::Y => State([w[2], w[1] * v, w[2] * v + p, (w[3] + p) * v]),
        }
    }

    fn roe_eigensystem(
        &self,
        wl: &State<4>,
        wr: &State<4>,
        axis: Axis,
    ) -> Result<EigenSystem<4>, SolverError> {
        let (nx, ny) = axis_normal(axis);
        let gm1 = self.gamma - 1.0;
        let (sl, sr) = (wl[0].sqrt(), wr[0].sqrt());
        let u = roe_mean(sl, sr, wl[1] / wl[0], wr[1] / wr[0]);
        let v = roe_mean(sl, sr, wl[2] / wl[0], wr[2] / wr[0]);
        let hl = (wl[3] + self.pressure(wl)) / wl[0];
        let hr = (wr[3] + self.pressure(wr)) / wr[0];
        let h = roe_mean(sl, sr, hl, hr);
        let q2 = u * u + v * v;
        let c2 = gm1 * (h - 0.5 * q2);
        if !(c2 > 0.0) {
            return Err(SolverError::RoeSoundSpeed { value: c2 });
        }
        let c = c2.sqrt();
        let vn = u * nx + v * ny;
        let b1 = gm1 / c2;
        let b2 = 0.5 * b1 * q2;
        Ok(EigenSystem {
            speeds: [vn - c, vn, vn, vn + c],
            right: [
                [1.0, 0.0, 1.0, 1.0],
                [u - c * nx, -ny, u, u + c * nx],
                [v - c * ny, nx, v, v + c * ny],
                [h - c * vn, v * nx - u * ny, 0.5 * q2, h + c * vn],
            ],
            left: [
                [
                    0.5 * (b2 + vn / c),
                    -0.5 * (b1 * u + nx / c),
                    -0.5 * (b1 * v + ny / c),
                    0.5 * b1,
                ],
                [ny * u - nx * v, -ny, nx, 0.0],
                [1.0 - b2, b1 * u, b1 * v, -b1],
                [
                    0.5 * (b2 - vn / c),
                    -0.5 * (b1 * u - nx / c),
                    -0.5 * (b1 * v - ny / c),
                    0.5 * b1,
                ],
            ],
        })
    }

    fn signal_speed(&self, w: &State<4>, axis: Axis) -> f64 {
        let vel = match axis {
            Axis::X => w[1] / w[0],
            Axis::Y => w[2] / w[0],
        };
        vel.abs() + self.sound_speed(w)
    }
}

impl EulerSystem<5> for GasLaw<5> {
    fn flux(&self, w: &State<5>, axis: Axis) -> State<5> {
        let p = self.pressure(w);
        let (u, v) = (w[1] / w[0], w[2] / w[0]);
        match axis {
            Axis::X => State([w[1], w[1] * u + p, w[2] * u, (w[3] + p) * u, w[4] * u]),
            Axis::Y => State([w[2], w[1] * v, w[2] * v + p, (w[3] + p) * v, w[4] * v]),
        }
    }

    /// The reactant mass fraction rides along as an extra contact wave; the
    /// heat release enters both the sound speed and the eigenvectors.
    fn roe_eigensystem(
        &self,
        wl: &State<5>,
        wr: &State<5>,
        axis: Axis,
    ) -> Result<EigenSystem<5>, SolverError> {
        let (nx, ny) = axis_normal(axis);
        let gm1 = self.gamma - 1.0;
        let qh = self.heat_release.unwrap_or(0.0);
        let (sl, sr) = (wl[0].sqrt(), wr[0].sqrt());
        let u = roe_mean(sl, sr, wl[1] / wl[0], wr[1] / wr[0]);
        let v = roe_mean(sl, sr, wl[2] / wl[0], wr[2] / wr[0]);
        let y = roe_mean(sl, sr, wl[4] / wl[0], wr[4] / wr[0]);
        let hl = (wl[3] + self.pressure(wl)) / wl[0];
        let hr = (wr[3] + self.pressure(wr)) / wr[0];
        let h = roe_mean(sl, sr, hl, hr);
        let q2 = u * u + v * v;
        let c2 = gm1 * (h - 0.5 * q2 - qh * y);
        if !(c2 > 0.0) {
            return Err(SolverError::RoeSoundSpeed { value: c2 });
        }
        let c = c2.sqrt();
        let vn = u * nx + v * ny;
        let b1 = gm1 / c2;
        let b2 = 0.5 * b1 * q2;
        Ok(EigenSystem {
            speeds: [vn - c, vn, vn, vn, vn + c],
            right: [
                [1.0, 0.0, 1.0, 0.0, 1.0],
                [u - c * nx, -ny, u, 0.0, u + c * nx],
                [v - c * ny, nx, v, 0.0, v + c * ny],
                [h - c * vn, v * nx - u * ny, 0.5 * q2, qh, h + c * vn],
                [y, 0.0, 0.0, 1.0, y],
            ],
            left: [
                [
                    0.5 * (b2 + vn / c),
                    -0.5 * (b1 * u + nx / c),
                    -0.5 * (b1 * v + ny / c),
                    0.5 * b1,
                    -0.5 * b1 * qh,
                ],
                [ny * u - nx * v, -ny, nx, 0.0, 0.0],
                [1.0 - b2, b1 * u, b1 * v, -b1, b1 * qh],
                [-y * b2, y * b1 * u, y * b1 * v, -y * b1, 1.0 + y * b1 * qh],
                [
                    0.5 * (b2 - vn / c),
                    -0.5 * (b1 * u - nx / c),
                    -0.5 * (b1 * v - ny / c),
                    0.5 * b1,
                    -0.5 * b1 * qh,
                ],
            ],
        })
    }

    fn signal_speed(&self, w: &State<5>, axis: Axis) -> f64 {
        let vel = match axis {
            Axis::X => w[1] / w[0],
            Axis::Y => w[2] / w[0],
        };
        vel.abs() + self.sound_speed(w)
    }
}

#[inline]
fn axis_normal(axis: Axis) -> (f64, f64) {
    match axis {
        Axis::X => (1.0, 0.0),
        Axis::Y => (0.0, 1.0),
    }
}

/// Arrhenius depletion rate of the reactant: the returned increment is zero
/// except in the reactant-density slot, which receives
/// `omega = -rate * rho Y * exp(-activation / (p / rho))`.
pub fn reaction_source<const N: usize>(
    u: &State<N>,
    law: &GasLaw<N>,
    rate: f64,
    activation: f64,
) -> State<N> {
    let mut s = State::ZERO;
    if N == 5 {
        let t_tilde = law.pressure(u) / u.rho();
        s[4] = -rate * u[4] * (-activation / t_tilde).exp();
    }
    s
}

/// Per-direction maxima of `|velocity| + sound speed` over the fluid
/// interior and any inflow boundary data, scanned in a fixed order. Inflow
/// states must participate: a supersonic jet enters through the ghost
/// layer, and a splitting alpha below its signal speed loses the upwind
/// bias. The other boundary kinds only replicate interior values and can
/// never raise the maximum. Errors on any node the scheme cannot propagate
/// (non-positive density or pressure, or non-finite data).
pub fn global_alpha<const N: usize>(
    field: &Field<N>,
    law: &GasLaw<N>,
) -> Result<(f64, f64), SolverError>
where
    GasLaw<N>: EulerSystem<N>,
{
    let mut ax = 0.0_f64;
    let mut ay = 0.0_f64;
    let two_d = !field.is_one_dimensional();
    let mut absorb = |u: &State<N>, index: usize| -> Result<(), SolverError> {
        if !u.is_finite() {
            return Err(SolverError::NonAdmissible {
                index,
                what: "state",
                value: f64::NAN,
            });
        }
        if !(u.rho() > 0.0) {
            return Err(SolverError::NonAdmissible {
                index,
                what: "density",
                value: u.rho(),
            });
        }
        let p = law.pressure(u);
        if !(p > 0.0) {
            return Err(SolverError::NonAdmissible {
                index,
                what: "pressure",
                value: p,
            });
        }
        let sx = law.signal_speed(u, Axis::X);
        if sx > ax {
            ax = sx;
        }
        if two_d {
            let sy = law.signal_speed(u, Axis::Y);
            if sy > ay {
                ay = sy;
            }
        }
        Ok(())
    };
    for (i, j) in field.fluid_cells() {
        absorb(&field.get(i, j), j * field.nx() + i)?;
    }
    for side in field.boundary_conditions() {
        if let crate::field::BoundaryCondition::Inflow(states) = side {
            for (k, u) in states.iter().enumerate() {
                absorb(u, k)?;
            }
        }
    }
    Ok((ax, ay))
}

/// Residual `L(u)` per interior node plus the splitting alphas used.
#[derive(Debug, Clone)]
pub struct ResidualOutput<const N: usize> {
    /// Row-major over the interior; zero on solid cells.
    pub rhs: Vec<State<N>>,
    pub alpha_x: f64,
    /// Zero for 1D fields.
    pub alpha_y: f64,
}

/// One-dimensional WENO pass over a line of `m` nodes padded with 3 halo
/// nodes on each side (`line.len() == m + 6`).
fn line_residual<const N: usize>(
    law: &GasLaw<N>,
    line: &[State<N>],
    axis: Axis,
    alpha: f64,
    inv_h: f64,
    out: &mut [State<N>],
) -> Result<(), SolverError>
where
    GasLaw<N>: EulerSystem<N>,
{
    let m = out.len();
    debug_assert_eq!(line.len(), m + 6);

    let mut plus = Vec::with_capacity(m + 6);
    let mut minus = Vec::with_capacity(m + 6);
    for u in line {
        let f = law.flux(u, axis);
        let (fp, fm) = flux_split(u, &f, alpha);
        plus.push(fp);
        minus.push(fm);
    }

    // Interface k sits between line nodes k+2 and k+3 (the left face of
    // interior node k). The upwind stencil for f+ covers line[k..k+5], the
    // mirrored downwind stencil for f- covers line[k+1..k+6] reversed.
    let mut fhat = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let eig = law.roe_eigensystem(&line[k + 2], &line[k + 3], axis)?;
        let mut cp = [State::ZERO; 6];
        let mut cm = [State::ZERO; 6];
        for s in 0..6 {
            cp[s] = eig.to_characteristic(&plus[k + s]);
            cm[s] = eig.to_characteristic(&minus[k + s]);
        }
        let mut combined = State::ZERO;
        for comp in 0..N {
            let up = weno5_reconstruct(&[
                cp[0][comp],
                cp[1][comp],
                cp[2][comp],
                cp[3][comp],
                cp[4][comp],
            ]);
            let down = weno5_reconstruct(&[
                cm[5][comp],
                cm[4][comp],
                cm[3][comp],
                cm[2][comp],
                cm[1][comp],
            ]);
            combined[comp] = alpha * (up - down);
        }
        fhat.push(eig.to_physical(&combined));
    }

    for t in 0..m {
        out[t] = (fhat[t] - fhat[t + 1]) * inv_h;
    }
    Ok(())
}

/// Assemble the full spatial residual, dimension by dimension. Ghost layers
/// must already be filled; wall images for masked cells are refreshed here
/// per direction. Rows (then columns) are processed in parallel with
/// outputs written to disjoint slots, so results do not depend on the
/// thread count.
pub fn compute_residual<const N: usize>(
    field: &mut Field<N>,
    law: &GasLaw<N>,
) -> Result<ResidualOutput<N>, SolverError>
where
    GasLaw<N>: EulerSystem<N> + Sync,
{
    let (alpha_x, alpha_y) = global_alpha(field, law)?;
    let nx = field.nx();
    let ny = field.ny();
    let mut rhs = vec![State::<N>::ZERO; nx * ny];

    field.fill_wall_images_x();
    {
        let inv_dx = 1.0 / field.dx();
        let shared = &*field;
        let data = shared.raw();
        rhs.par_chunks_mut(nx)
            .enumerate()
            .try_for_each(|(j, out_row)| -> Result<(), SolverError> {
                for (s, e) in shared.fluid_runs_x(j) {
                    let base = shared.idx(s as isize - 3, j as isize);
                    let line = &data[base..base + (e - s) + 6];
                    line_residual(law, line, Axis::X, alpha_x, inv_dx, &mut out_row[s..e])?;
                }
                Ok(())
            })?;
    }

    if ny > 1 {
        field.fill_wall_images_y();
        let inv_dy = 1.0 / field.dy();
        let shared = &*field;
        let data = shared.raw();
        let columns: Vec<Vec<(usize, usize, Vec<State<N>>)>> = (0..nx)
            .into_par_iter()
            .map(|i| -> Result<Vec<(usize, usize, Vec<State<N>>)>, SolverError> {
                let mut parts = Vec::new();
                for (s, e) in shared.fluid_runs_y(i) {
                    let mut line = Vec::with_capacity(e - s + 6);
                    for j in (s as isize - 3)..(e as isize + 3) {
                        line.push(data[shared.idx(i as isize, j)]);
                    }
                    let mut out = vec![State::<N>::ZERO; e - s];
                    line_residual(law, &line, Axis::Y, alpha_y, inv_dy, &mut out)?;
                    parts.push((i, s, out));
                }
                Ok(parts)
            })
            .collect::<Result<_, _>>()?;
        for parts in columns {
            for (i, s, contrib) in parts {
                for (t, du) in contrib.into_iter().enumerate() {
                    rhs[(s + t) * nx + i] += du;
                }
            }
        }
    }

    Ok(ResidualOutput {
        rhs,
        alpha_x,
        alpha_y,
    })
}
