use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Node kind on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Interior,
    HardWall,
}

/// Uniform rectangular lattice with a hard-wall mask.
///
/// Node `(i, j)` sits at `origin + (i dx, j dy)` and is stored at `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    nx: usize,
    ny: usize,
    dx: T,
    dy: T,
    origin: [T; 2],
    wall: Vec<bool>,
}

pub const MIN_NODES: usize = 16;

impl<T: Real> Grid<T> {
    pub fn new(nx: usize, ny: usize, dx: T, dy: T, origin: [T; 2]) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_NODES} nodes per axis, got {nx}x{ny}"
            )));
        }
        if !(dx > T::zero() && dy > T::zero()) || !dx.is_finite() || !dy.is_finite() {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        Ok(Self { nx, ny, dx, dy, origin, wall: vec![false; nx * ny] })
    }

    /// Unit-spaced grid with its origin at `(0, 0)`.
    pub fn unit(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, T::one(), T::one(), [T::zero(); 2])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn dy(&self) -> T {
        self.dy
    }

    pub fn origin(&self) -> [T; 2] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.wall.is_empty()
    }

    pub fn cell_area(&self) -> T {
        self.dx * self.dy
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.origin[0] + self.dx * T::from_usize_lossy(i)
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.origin[1] + self.dy * T::from_usize_lossy(j)
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Vec3<T> {
        Vec3::planar(self.x(i), self.y(j))
    }

    /// Nearest node to a point, if the point lies within half a spacing of the grid.
    pub fn nearest(&self, p: Vec3<T>) -> Option<(usize, usize)> {
        let fi = ((p.x - self.origin[0]) / self.dx).round();
        let fj = ((p.y - self.origin[1]) / self.dy).round();
        let (i, j) = (fi.to_i64()?, fj.to_i64()?);
        (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny).then_some((i as usize, j as usize))
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        if self.wall[self.index(i, j)] {
            Cell::HardWall
        } else {
            Cell::Interior
        }
    }

    #[inline]
    pub fn is_wall(&self, k: usize) -> bool {
        self.wall[k]
    }

    pub fn walls(&self) -> &[bool] {
        &self.wall
    }

    pub fn set_wall(&mut self, i: usize, j: usize, wall: bool) {
        let k = self.index(i, j);
        self.wall[k] = wall;
    }

    /// Marks every node with `i0 ≤ i < i1`, `j0 ≤ j < j1` as hard wall (clamped to the grid).
    pub fn wall_rect(&mut self, i0: usize, i1: usize, j0: usize, j1: usize) {
        for j in j0..j1.min(self.ny) {
            for i in i0..i1.min(self.nx) {
                self.set_wall(i, j, true);
            }
        }
    }

    /// Marks every node within `radius` of `center` as hard wall.
    pub fn wall_disc(&mut self, center: [T; 2], radius: T) {
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (ddx, ddy) = (self.x(i) - center[0], self.y(j) - center[1]);
                if ddx * ddx + ddy * ddy <= radius * radius {
                    self.set_wall(i, j, true);
                }
            }
        }
    }

    pub fn interior_count(&self) -> usize {
        self.wall.iter().filter(|w| !**w).count()
    }

    /// Same lattice and mask.
    pub fn same_as(&self, other: &Grid<T>) -> bool {
        self == other
    }

    pub(crate) fn check_same(&self, other: &Grid<T>) -> Result<()> {
        if self.nx != other.nx || self.ny != other.ny || self.dx != other.dx || self.dy != other.dy {
            return Err(Error::GridMismatch(format!(
                "{}x{} (dx {}, dy {}) vs {}x{} (dx {}, dy {})",
                self.nx, self.ny, self.dx, self.dy, other.nx, other.ny, other.dx, other.dy
            )));
        }
        if self.origin != other.origin || self.wall != other.wall {
            return Err(Error::GridMismatch("origin or hard-wall mask differs".into()));
        }
        Ok(())
    }
}
