//! Structured 1D/2D grids with ghost layers, boundary conditions and an
//! optional solid-wall mask.
//!
//! Grids are cell-centered: node `i` sits at `x0 + (i + 1/2) dx`. The ghost
//! width is 3, the stencil radius of the fifth-order reconstruction. A 1D
//! grid is a 2D grid with `ny = 1`; the y ghost rows exist but are never
//! filled or read.

use crate::state::{total_state, State};

/// Ghost width required by the WENO5 stencil.
pub const GHOST: usize = 3;

/// Boundary treatment for one side of the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition<const N: usize> {
    /// Wrap around to the opposite side.
    Periodic,
    /// Zeroth-order extrapolation of the nearest interior value.
    Outflow,
    /// Mirror the interior with the normal momentum sign flipped.
    Reflective,
    /// Fixed upstream states: one entry used for every ghost node, or one
    /// entry per transverse interior node.
    Inflow(Vec<State<N>>),
}

/// Domain sides in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    West = 0,
    East = 1,
    South = 2,
    North = 3,
}

#[derive(Debug, Clone)]
pub struct Field<const N: usize> {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    x0: f64,
    y0: f64,
    stride: usize,
    data: Vec<State<N>>,
    bc: [BoundaryCondition<N>; 4],
    /// Interior-sized row-major mask; `true` marks a solid (non-fluid) cell.
    mask: Option<Vec<bool>>,
}

impl<const N: usize> Field<N> {
    /// 2D grid of `nx * ny` cells covering `[x0, x1] x [y0, y1]`.
    pub fn new(
        nx: usize,
        ny: usize,
        (x0, x1): (f64, f64),
        (y0, y1): (f64, f64),
        bc: [BoundaryCondition<N>; 4],
    ) -> Self {
        assert!(nx >= 1 && ny >= 1);
        let stride = nx + 2 * GHOST;
        let rows = ny + 2 * GHOST;
        Field {
            nx,
            ny,
            dx: (x1 - x0) / nx as f64,
            dy: if ny == 1 { 1.0 } else { (y1 - y0) / ny as f64 },
            x0,
            y0,
            stride,
            data: vec![State::ZERO; stride * rows],
            bc,
            mask: None,
        }
    }

    /// 1D grid of `nx` cells covering `[x0, x1]`.
    pub fn new_1d(nx: usize, span: (f64, f64), west: BoundaryCondition<N>, east: BoundaryCondition<N>) -> Self {
        Self::new(
            nx,
            1,
            span,
            (0.0, 1.0),
            [west, east, BoundaryCondition::Outflow, BoundaryCondition::Outflow],
        )
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn is_one_dimensional(&self) -> bool {
        self.ny == 1
    }

    /// Cell-center coordinate of interior column `i`.
    pub fn x_center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    /// Cell-center coordinate of interior row `j`.
    pub fn y_center(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.dy
    }

    /// Storage index of interior cell `(i, j)`; ghosts live at offsets
    /// outside `0..nx` / `0..ny` and are reached through the same formula.
    #[inline]
    pub(crate) fn idx(&self, i: isize, j: isize) -> usize {
        debug_assert!(i >= -(GHOST as isize) && i < (self.nx + GHOST) as isize);
        debug_assert!(j >= -(GHOST as isize) && j < (self.ny + GHOST) as isize);
        (j + GHOST as isize) as usize * self.stride + (i + GHOST as isize) as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> State<N> {
        self.data[self.idx(i as isize, j as isize)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, u: State<N>) {
        let k = self.idx(i as isize, j as isize);
        self.data[k] = u;
    }

    #[inline]
    pub(crate) fn raw(&self) -> &[State<N>] {
        &self.data
    }

    #[inline]
    pub(crate) fn raw_mut(&mut self) -> &mut [State<N>] {
        &mut self.data
    }

    pub fn boundary_conditions(&self) -> &[BoundaryCondition<N>; 4] {
        &self.bc
    }

    /// Install a solid mask (interior-sized, row-major, `true` = solid).
    pub fn set_mask(&mut self, mask: Vec<bool>) {
        assert_eq!(mask.len(), self.nx * self.ny);
        if mask.iter().any(|&s| s) {
            self.mask = Some(mask);
        }
    }

    pub fn has_mask(&self) -> bool {
        self.mask.is_some()
    }

    #[inline]
    pub fn is_solid(&self, i: usize, j: usize) -> bool {
        match &self.mask {
            Some(m) => m[j * self.nx + i],
            None => false,
        }
    }

    /// Interior fluid cells in row-major order.
    pub fn fluid_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny)
            .flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
            .filter(move |&(i, j)| !self.is_solid(i, j))
    }

    pub fn fluid_states(&self) -> impl Iterator<Item = State<N>> + '_ {
        self.fluid_cells().map(move |(i, j)| self.get(i, j))
    }

    pub fn fluid_cell_count(&self) -> usize {
        match &self.mask {
            Some(m) => m.iter().filter(|&&s| !s).count(),
            None => self.nx * self.ny,
        }
    }

    /// Componentwise totals over the fluid interior, summed in row-major
    /// order for bit-reproducibility.
    pub fn totals(&self) -> State<N> {
        total_state(self.fluid_states())
    }

    /// Maximal runs of fluid cells along row `j`, as `(start, end)` with
    /// `end` exclusive. A mask-free grid yields the single run `(0, nx)`.
    pub(crate) fn fluid_runs_x(&self, j: usize) -> Vec<(usize, usize)> {
        runs(self.nx, |i| !self.is_solid(i, j))
    }

    /// Maximal runs of fluid cells along column `i`.
    pub(crate) fn fluid_runs_y(&self, i: usize) -> Vec<(usize, usize)> {
        runs(self.ny, |j| !self.is_solid(i, j))
    }

    /// Fill all ghost layers from the per-side boundary conditions. Corner
    /// ghost blocks are never read by the dimension-split sweeps and are
    /// left untouched.
    pub fn apply_boundary(&mut self) {
        let nx = self.nx as isize;
        let ny = self.ny as isize;
        for j in 0..self.ny as isize {
            for k in 1..=GHOST as isize {
                let west = match &self.bc[Side::West as usize] {
                    BoundaryCondition::Periodic => self.data[self.idx(nx - k, j)],
                    BoundaryCondition::Outflow => self.data[self.idx(0, j)],
                    BoundaryCondition::Reflective => flip(self.data[self.idx(k - 1, j)], 1),
                    BoundaryCondition::Inflow(states) => profile(states, j as usize),
                };
                let dst = self.idx(-k, j);
                self.data[dst] = west;
                let east = match &self.bc[Side::East as usize] {
                    BoundaryCondition::Periodic => self.data[self.idx(k - 1, j)],
                    BoundaryCondition::Outflow => self.data[self.idx(nx - 1, j)],
                    BoundaryCondition::Reflective => flip(self.data[self.idx(nx - k, j)], 1),
                    BoundaryCondition::Inflow(states) => profile(states, j as usize),
                };
                let dst = self.idx(nx - 1 + k, j);
                self.data[dst] = east;
            }
        }
        if self.ny == 1 {
            return;
        }
        for i in 0..self.nx as isize {
            for k in 1..=GHOST as isize {
                let south = match &self.bc[Side::South as usize] {
                    BoundaryCondition::Periodic => self.data[self.idx(i, ny - k)],
                    BoundaryCondition::Outflow => self.data[self.idx(i, 0)],
                    BoundaryCondition::Reflective => flip(self.data[self.idx(i, k - 1)], 2),
                    BoundaryCondition::Inflow(states) => profile(states, i as usize),
                };
                let dst = self.idx(i, -k);
                self.data[dst] = south;
                let north = match &self.bc[Side::North as usize] {
                    BoundaryCondition::Periodic => self.data[self.idx(i, k - 1)],
                    BoundaryCondition::Outflow => self.data[self.idx(i, ny - 1)],
                    BoundaryCondition::Reflective => flip(self.data[self.idx(i, ny - k)], 2),
                    BoundaryCondition::Inflow(states) => profile(states, i as usize),
                };
                let dst = self.idx(i, ny - 1 + k);
                self.data[dst] = north;
            }
        }
    }

    /// Write reflective images into solid cells next to every wall face met
    /// by an x-line sweep. Must run before x-direction differencing; the
    /// y-direction pass writes its own images, so both sweeps see the wall
    /// as a reflective boundary even where the two halos overlap.
    pub(crate) fn fill_wall_images_x(&mut self) {
        if self.mask.is_none() {
            return;
        }
        for j in 0..self.ny {
            for (start, end) in self.fluid_runs_x(j) {
                for k in 0..GHOST {
                    // left face of the run
                    if start >= k + 1 && self.is_solid(start - 1 - k, j) {
                        let src = self.data[self.idx((start + k) as isize, j as isize)];
                        let dst = self.idx((start - 1 - k) as isize, j as isize);
                        self.data[dst] = flip(src, 1);
                    }
                    // right face of the run
                    if end + k < self.nx && self.is_solid(end + k, j) {
                        let src = self.data[self.idx((end - 1 - k) as isize, j as isize)];
                        let dst = self.idx((end + k) as isize, j as isize);
                        self.data[dst] = flip(src, 1);
                    }
                }
            }
        }
    }

    /// Same as [`Field::fill_wall_images_x`] for y-line sweeps.
    pub(crate) fn fill_wall_images_y(&mut self) {
        if self.mask.is_none() {
            return;
        }
        for i in 0..self.nx {
            for (start, end) in self.fluid_runs_y(i) {
                for k in 0..GHOST {
                    if start >= k + 1 && self.is_solid(i, start - 1 - k) {
                        let src = self.data[self.idx(i as isize, (start + k) as isize)];
                        let dst = self.idx(i as isize, (start - 1 - k) as isize);
                        self.data[dst] = flip(src, 2);
                    }
                    if end + k < self.ny && self.is_solid(i, end + k) {
                        let src = self.data[self.idx(i as isize, (end - 1 - k) as isize)];
                        let dst = self.idx(i as isize, (end + k) as isize);
                        self.data[dst] = flip(src, 2);
                    }
                }
            }
        }
    }
}

/// Mirror a state across a wall: negate the momentum component `comp`.
#[inline]
fn flip<const N: usize>(mut u: State<N>, comp: usize) -> State<N> {
    u[comp] = -u[comp];
    u
}

#[inline]
fn profile<const N: usize>(states: &[State<N>], transverse: usize) -> State<N> {
    if states.len() == 1 {
        states[0]
    } else {
        states[transverse]
    }
}

fn runs(len: usize, fluid: impl Fn(usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for k in 0..len {
        match (fluid(k), start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((s, k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, len));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_field(nx: usize, west: BoundaryCondition<3>, east: BoundaryCondition<3>) -> Field<3> {
        let mut f = Field::new_1d(nx, (0.0, 1.0), west, east);
        for i in 0..nx {
            f.set(i, 0, State([i as f64 + 1.0, 10.0 * (i as f64 + 1.0), 100.0]));
        }
        f
    }

    #[test]
    fn periodic_ghosts_wrap() {
        let mut f = ramp_field(8, BoundaryCondition::Periodic, BoundaryCondition::Periodic);
        f.apply_boundary();
        // ghost(-1) = interior(n-1), ghost(-3) = interior(n-3)
        assert_eq!(f.raw()[f.idx(-1, 0)], f.get(7, 0));
        assert_eq!(f.raw()[f.idx(-3, 0)], f.get(5, 0));
        assert_eq!(f.raw()[f.idx(8, 0)], f.get(0, 0));
        assert_eq!(f.raw()[f.idx(10, 0)], f.get(2, 0));
    }

    #[test]
    fn outflow_ghosts_copy_edge_value() {
        let mut f = ramp_field(8, BoundaryCondition::Outflow, BoundaryCondition::Outflow);
        f.apply_boundary();
        for k in 1..=3 {
            assert_eq!(f.raw()[f.idx(-k, 0)], f.get(0, 0));
            assert_eq!(f.raw()[f.idx(7 + k, 0)], f.get(7, 0));
        }
    }

    #[test]
    fn reflective_ghosts_mirror_with_momentum_flip() {
        let mut f = ramp_field(8, BoundaryCondition::Reflective, BoundaryCondition::Outflow);
        f.apply_boundary();
        for k in 1..=3_isize {
            let ghost = f.raw()[f.idx(-k, 0)];
            let mirror = f.get(k as usize - 1, 0);
            assert_eq!(ghost[0], mirror[0]);
            assert_eq!(ghost[1], -mirror[1]);
            assert_eq!(ghost[2], mirror[2]);
        }
    }

    #[test]
    fn reflective_bottom_mirrors_y_momentum() {
        let mut f = Field::<4>::new(
            4,
            4,
            (0.0, 1.0),
            (0.0, 1.0),
            [
                BoundaryCondition::Outflow,
                BoundaryCondition::Outflow,
                BoundaryCondition::Reflective,
                BoundaryCondition::Outflow,
            ],
        );
        for j in 0..4 {
            for i in 0..4 {
                f.set(i, j, State([1.0, 2.0, 3.0 + j as f64, 4.0]));
            }
        }
        f.apply_boundary();
        for k in 1..=3_isize {
            let ghost = f.raw()[f.idx(1, -k)];
            let mirror = f.get(1, k as usize - 1);
            assert_eq!(ghost[2], -mirror[2]);
            assert_eq!(ghost[0], mirror[0]);
        }
    }

    #[test]
    fn boundary_fill_is_idempotent() {
        for bc in [
            BoundaryCondition::Periodic,
            BoundaryCondition::Outflow,
            BoundaryCondition::Reflective,
            BoundaryCondition::Inflow(vec![State([9.0, 1.0, 9.0])]),
        ] {
            let mut f = ramp_field(8, bc.clone(), bc);
            f.apply_boundary();
            let once = f.raw().to_vec();
            f.apply_boundary();
            assert_eq!(f.raw(), &once[..]);
        }
    }

    #[test]
    fn wall_images_reflect_into_solid_cells() {
        let mut f = Field::<4>::new(
            8,
            1,
            (0.0, 1.0),
            (0.0, 1.0),
            [
                BoundaryCondition::Outflow,
                BoundaryCondition::Outflow,
                BoundaryCondition::Outflow,
                BoundaryCondition::Outflow,
            ],
        );
        // cells 0..4 solid, 4..8 fluid
        let mask: Vec<bool> = (0..8).map(|i| i < 4).collect();
        for i in 0..8 {
            f.set(i, 0, State([i as f64 + 1.0, 1.0, 0.0, 10.0]));
        }
        f.set_mask(mask);
        f.fill_wall_images_x();
        // solid cell 3 mirrors fluid cell 4, cell 2 mirrors 5, cell 1 mirrors 6
        for k in 0..3 {
            let img = f.get(3 - k, 0);
            let src = f.get(4 + k, 0);
            assert_eq!(img[0], src[0]);
            assert_eq!(img[1], -src[1]);
            assert_eq!(img[3], src[3]);
        }
        // cell 0 is beyond the 3-cell halo and keeps its value
        assert_eq!(f.get(0, 0)[0], 1.0);
    }

    #[test]
    fn fluid_runs_split_on_mask() {
        let mut f = Field::<3>::new_1d(
            6,
            (0.0, 1.0),
            BoundaryCondition::Outflow,
            BoundaryCondition::Outflow,
        );
        assert_eq!(f.fluid_runs_x(0), vec![(0, 6)]);
        f.set_mask(vec![false, false, true, true, false, false]);
        assert_eq!(f.fluid_runs_x(0), vec![(0, 2), (4, 6)]);
        assert_eq!(f.fluid_cell_count(), 4);
    }

    #[test]
    fn totals_sum_fluid_cells_only() {
        let mut f = Field::<3>::new_1d(
            4,
            (0.0, 1.0),
            BoundaryCondition::Outflow,
            BoundaryCondition::Outflow,
        );
        for i in 0..4 {
            f.set(i, 0, State([1.0, 2.0, 3.0]));
        }
        f.set_mask(vec![false, true, false, false]);
        assert_eq!(f.totals(), State([3.0, 6.0, 9.0]));
    }
}
