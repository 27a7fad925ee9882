//! Finite point sets on the integer lattice, stored densely in a tight box.
//!
//! These are the unbounded-domain counterparts of [`VoxelSolid`]: everything
//! outside the box is empty, so Minkowski compositions never lose material at
//! a grid boundary. Results are cropped back to a grid only at the end.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::solid::{GridSpec, VoxelSolid};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSet {
    min: [i64; 3],
    dims: [usize; 3],
    data: Vec<bool>,
}

#[inline]
fn box_index(dims: [usize; 3], rel: [usize; 3]) -> usize {
    rel[0] + dims[0] * (rel[1] + dims[1] * rel[2])
}

impl LatticeSet {
    pub fn empty() -> Self {
        LatticeSet { min: [0; 3], dims: [0; 3], data: Vec::new() }
    }

    pub fn from_points(points: impl IntoIterator<Item = [i64; 3]>) -> Self {
        let points: Vec<[i64; 3]> = points.into_iter().collect();
        if points.is_empty() {
            return Self::empty();
        }
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for p in &points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let dims = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1) as usize);
        let mut data = vec![false; dims[0] * dims[1] * dims[2]];
        for p in &points {
            let rel = [0, 1, 2].map(|a| (p[a] - lo[a]) as usize);
            data[box_index(dims, rel)] = true;
        }
        LatticeSet { min: lo, dims, data }
    }

    /// Box-shaped set of lattice points `[min, min + dims)` with given membership.
    pub fn from_box(min: [i64; 3], dims: [usize; 3], mut f: impl FnMut([i64; 3]) -> bool) -> Self {
        let n = dims[0] * dims[1] * dims[2];
        let mut data = vec![false; n];
        for (k, cell) in data.iter_mut().enumerate() {
            let rel = [k % dims[0], (k / dims[0]) % dims[1], k / (dims[0] * dims[1])];
            *cell = f([0, 1, 2].map(|a| min[a] + rel[a] as i64));
        }
        LatticeSet { min, dims, data }.trimmed()
    }

    /// Occupied voxels of `s` in lattice coordinates.
    pub fn from_solid(s: &VoxelSolid) -> Self {
        let g = s.grid();
        let Some((lo, hi)) = s.bounding_box() else {
            return Self::empty();
        };
        let dims = [0, 1, 2].map(|a| hi[a] - lo[a] + 1);
        let mut data = vec![false; dims[0] * dims[1] * dims[2]];
        for k in s.iter_indices() {
            let c = g.coords(k);
            data[box_index(dims, [0, 1, 2].map(|a| c[a] - lo[a]))] = true;
        }
        LatticeSet { min: g.lattice_of(lo), dims, data }
    }

    /// Crops to the grid, mapping lattice coordinates back to voxel indices.
    pub fn to_solid(&self, grid: &GridSpec) -> VoxelSolid {
        let mut out = VoxelSolid::empty(*grid);
        for p in self.points() {
            if let Some(i) = grid.index_of_lattice(p) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn min(&self) -> [i64; 3] {
        self.min
    }

    /// Inclusive max corner of the box.
    pub fn max(&self) -> [i64; 3] {
        [0, 1, 2].map(|a| self.min[a] + self.dims[a] as i64 - 1)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub(crate) fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, p: [i64; 3]) -> bool {
        let mut rel = [0usize; 3];
        for a in 0..3 {
            let r = p[a] - self.min[a];
            if r < 0 || r >= self.dims[a] as i64 {
                return false;
            }
            rel[a] = r as usize;
        }
        self.data[box_index(self.dims, rel)]
    }

    /// Members in z-major, x-fastest order.
    pub fn points(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        let d = self.dims;
        self.data.iter().enumerate().filter(|(_, &b)| b).map(move |(k, _)| {
            let rel = [k % d[0], (k / d[0]) % d[1], k / (d[0] * d[1])];
            [0, 1, 2].map(|a| self.min[a] + rel[a] as i64)
        })
    }

    /// Point reflection through the lattice origin.
    pub fn reflect(&self) -> LatticeSet {
        if self.dims.contains(&0) {
            return Self::empty();
        }
        let max = self.max();
        let d = self.dims;
        let mut data = vec![false; self.data.len()];
        for (k, &b) in self.data.iter().enumerate() {
            if b {
                let rel = [k % d[0], (k / d[0]) % d[1], k / (d[0] * d[1])];
                data[box_index(d, [0, 1, 2].map(|a| d[a] - 1 - rel[a]))] = true;
            }
        }
        LatticeSet { min: max.map(|m| -m), dims: d, data }
    }

    pub fn translate(&self, t: [i64; 3]) -> LatticeSet {
        let mut out = self.clone();
        out.min = [0, 1, 2].map(|a| self.min[a] + t[a]);
        out
    }

    pub fn union(&self, other: &LatticeSet) -> LatticeSet {
        LatticeSet::from_points(self.points().chain(other.points()))
    }

    /// Shrinks the box to the occupied points.
    pub fn trimmed(self) -> LatticeSet {
        if self.is_empty() {
            return Self::empty();
        }
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let d = self.dims;
        for (k, &b) in self.data.iter().enumerate() {
            if b {
                let rel = [k % d[0], (k / d[0]) % d[1], k / (d[0] * d[1])];
                for a in 0..3 {
                    lo[a] = lo[a].min(rel[a]);
                    hi[a] = hi[a].max(rel[a]);
                }
            }
        }
        if lo == [0; 3] && [0, 1, 2].map(|a| hi[a] + 1) == d {
            return self;
        }
        let nd = [0, 1, 2].map(|a| hi[a] - lo[a] + 1);
        let mut data = vec![false; nd[0] * nd[1] * nd[2]];
        for z in 0..nd[2] {
            for y in 0..nd[1] {
                for x in 0..nd[0] {
                    data[box_index(nd, [x, y, z])] = self.data[box_index(d, [x + lo[0], y + lo[1], z + lo[2]])];
                }
            }
        }
        let min = [0, 1, 2].map(|a| self.min[a] + lo[a] as i64);
        LatticeSet { min, dims: nd, data }
    }
}

/// Integer field over a lattice box; zero outside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountBox {
    pub(crate) min: [i64; 3],
    pub(crate) dims: [usize; 3],
    pub(crate) counts: Vec<u32>,
}

impl CountBox {
    pub fn empty() -> Self {
        CountBox { min: [0; 3], dims: [0; 3], counts: Vec::new() }
    }

    pub fn get(&self, p: [i64; 3]) -> u32 {
        let mut rel = [0usize; 3];
        for a in 0..3 {
            let r = p[a] - self.min[a];
            if r < 0 || r >= self.dims[a] as i64 {
                return 0;
            }
            rel[a] = r as usize;
        }
        self.counts[box_index(self.dims, rel)]
    }

    pub fn min(&self) -> [i64; 3] {
        self.min
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Lattice points inside the box whose count satisfies `keep`.
    pub fn threshold(&self, keep: impl Fn(u32) -> bool) -> LatticeSet {
        if self.counts.is_empty() {
            return LatticeSet::empty();
        }
        let data = self.counts.iter().map(|&c| keep(c)).collect();
        LatticeSet { min: self.min, dims: self.dims, data }.trimmed()
    }
}

/// Anything usable as a structuring element.
///
/// Solids are read in lattice coordinates of their own grid, so a tool shape
/// may live on a different grid than the part as long as the voxel spacing is
/// identical.
pub trait AsKernel {
    fn kernel(&self, spacing: f64) -> Result<Cow<'_, LatticeSet>>;
}

impl AsKernel for LatticeSet {
    fn kernel(&self, _spacing: f64) -> Result<Cow<'_, LatticeSet>> {
        Ok(Cow::Borrowed(self))
    }
}

impl AsKernel for VoxelSolid {
    fn kernel(&self, spacing: f64) -> Result<Cow<'_, LatticeSet>> {
        if self.grid().spacing != spacing {
            return Err(Error::GridMismatch);
        }
        Ok(Cow::Owned(LatticeSet::from_solid(self)))
    }
}
