//! Voxel solid kernel.
//!
//! A [`VoxelSolid`] is an occupancy bitset over an axis-aligned grid, stored
//! row-major with x varying fastest. Every voxel also has an integer *lattice
//! coordinate*: its index minus the index of the voxel that contains the world
//! origin (the grid's reference voxel). Translations, tool shapes and
//! Minkowski operations are all expressed in lattice coordinates, so a tool
//! modeled around the world origin acts with its reference point at the
//! translation offset.

mod io;
mod scene;

pub use io::{read_counts, read_solid, write_counts, write_solid, GRID_MAGIC};
pub use scene::{voxelize, Scene};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphology::{self, Method, MinkowskiOp};

/// Discretization of the workspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: [usize; 3],
    /// Voxel edge length in mm.
    pub spacing: f64,
    /// World position (mm) of the min corner of voxel (0, 0, 0).
    pub origin: [f64; 3],
}

impl GridSpec {
    pub fn new(dims: [usize; 3], spacing: f64, origin: [f64; 3]) -> Result<Self> {
        let grid = GridSpec { dims, spacing, origin };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid whose bounding box is centered on the world origin.
    pub fn centered(dims: [usize; 3], spacing: f64) -> Result<Self> {
        let origin = [0, 1, 2].map(|a| -(dims[a] as f64) * spacing / 2.0);
        Self::new(dims, spacing, origin)
    }

    /// Odd-sized lattice of translation offsets in `[-half, half]` per axis,
    /// whose middle voxel is offset zero.
    pub fn offset_lattice(half: [usize; 3], spacing: f64) -> Result<Self> {
        let dims = half.map(|h| 2 * h + 1);
        let origin = half.map(|h| -(h as f64 + 0.5) * spacing);
        Self::new(dims, spacing, origin)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidGrid(format!("dims {:?} must be positive", self.dims)));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {} must be positive", self.spacing)));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        self.dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidGrid("voxel count overflows".into()))?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, [x, y, z]: [usize; 3]) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, k: usize) -> [usize; 3] {
        let x = k % self.dims[0];
        let r = k / self.dims[0];
        [x, r % self.dims[1], r / self.dims[1]]
    }

    /// World position of a voxel center.
    pub fn center(&self, idx: [usize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] + (idx[a] as f64 + 0.5) * self.spacing)
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing * self.spacing * self.spacing
    }

    /// Index of the voxel containing the world origin. May lie outside the grid.
    pub fn reference_voxel(&self) -> [i64; 3] {
        // Small bias so that origins that are exact multiples of the spacing
        // do not land one voxel low through rounding.
        self.origin.map(|o| (-o / self.spacing + 1e-9).floor() as i64)
    }

    pub fn lattice_of(&self, idx: [usize; 3]) -> [i64; 3] {
        let r = self.reference_voxel();
        [0, 1, 2].map(|a| idx[a] as i64 - r[a])
    }

    pub fn index_of_lattice(&self, p: [i64; 3]) -> Option<[usize; 3]> {
        let r = self.reference_voxel();
        let mut out = [0usize; 3];
        for a in 0..3 {
            let i = p[a] + r[a];
            if i < 0 || i >= self.dims[a] as i64 {
                return None;
            }
            out[a] = i as usize;
        }
        Some(out)
    }

    /// Voxel containing a world point, if any.
    pub fn voxel_at(&self, p: [f64; 3]) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.spacing).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }
}

/// Boolean operator selector for [`boolean`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    Union,
    Intersect,
    Subtract,
    Complement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSolid {
    grid: GridSpec,
    words: Vec<u64>,
}

impl VoxelSolid {
    pub fn empty(grid: GridSpec) -> Self {
        VoxelSolid { grid, words: vec![0; grid.len().div_ceil(64)] }
    }

    /// Every voxel of the grid (the workspace universe).
    pub fn full(grid: GridSpec) -> Self {
        let mut s = VoxelSolid { grid, words: vec![!0; grid.len().div_ceil(64)] };
        s.clear_tail();
        s
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut([usize; 3]) -> bool) -> Self {
        let mut s = Self::empty(grid);
        for k in 0..grid.len() {
            if f(grid.coords(k)) {
                s.set_index(k, true);
            }
        }
        s
    }

    pub fn from_indices(grid: GridSpec, idx: impl IntoIterator<Item = [usize; 3]>) -> Self {
        let mut s = Self::empty(grid);
        for i in idx {
            s.set(i, true);
        }
        s
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(grid: GridSpec, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), grid.len().div_ceil(64));
        let mut s = VoxelSolid { grid, words };
        s.clear_tail();
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.grid.len() % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn get_index(&self, k: usize) -> bool {
        self.words[k >> 6] >> (k & 63) & 1 == 1
    }

    #[inline]
    pub fn set_index(&mut self, k: usize, v: bool) {
        if v {
            self.words[k >> 6] |= 1 << (k & 63);
        } else {
            self.words[k >> 6] &= !(1 << (k & 63));
        }
    }

    #[inline]
    pub fn get(&self, idx: [usize; 3]) -> bool {
        self.get_index(self.grid.index(idx))
    }

    #[inline]
    pub fn set(&mut self, idx: [usize; 3], v: bool) {
        let k = self.grid.index(idx);
        self.set_index(k, v);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Linear indices of occupied voxels, ascending.
    pub fn iter_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn is_subset_of(&self, other: &VoxelSolid) -> bool {
        self.grid == other.grid && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &VoxelSolid) -> bool {
        self.grid == other.grid && self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    fn zip_with(&self, other: &VoxelSolid, f: impl Fn(u64, u64) -> u64) -> Result<VoxelSolid> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let words = self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect();
        Ok(VoxelSolid { grid: self.grid, words })
    }

    pub fn union(&self, other: &VoxelSolid) -> Result<VoxelSolid> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &VoxelSolid) -> Result<VoxelSolid> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn subtract(&self, other: &VoxelSolid) -> Result<VoxelSolid> {
        self.zip_with(other, |a, b| a & !b)
    }

    /// Complement relative to the grid universe.
    pub fn complement(&self) -> VoxelSolid {
        let mut s = VoxelSolid { grid: self.grid, words: self.words.iter().map(|w| !w).collect() };
        s.clear_tail();
        s
    }

    /// Volume in mm³.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.voxel_volume()
    }

    /// Point reflection through the world origin, clipped to the grid.
    pub fn reflect(&self) -> VoxelSolid {
        let r = self.grid.reference_voxel();
        let mut out = VoxelSolid::empty(self.grid);
        for k in self.iter_indices() {
            let c = self.grid.coords(k);
            let m = [0, 1, 2].map(|a| 2 * r[a] - c[a] as i64);
            if (0..3).all(|a| m[a] >= 0 && m[a] < self.grid.dims[a] as i64) {
                out.set(m.map(|v| v as usize), true);
            }
        }
        out
    }

    /// Inclusive index bounding box of the occupied voxels.
    pub fn bounding_box(&self) -> Option<([usize; 3], [usize; 3])> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for k in self.iter_indices() {
            any = true;
            let c = self.grid.coords(k);
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        any.then_some((lo, hi))
    }
}

/// Dispatches to the regularized Boolean operators. `b` is ignored for
/// `Complement` and required otherwise.
pub fn boolean(a: &VoxelSolid, op: BoolOp, b: Option<&VoxelSolid>) -> Result<VoxelSolid> {
    let need_b = || b.ok_or_else(|| Error::InvalidArgument(format!("{op:?} needs two operands")));
    match op {
        BoolOp::Union => a.union(need_b()?),
        BoolOp::Intersect => a.intersect(need_b()?),
        BoolOp::Subtract => a.subtract(need_b()?),
        BoolOp::Complement => Ok(a.complement()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetDirection {
    Grow,
    Shrink,
}

/// Lattice offsets of the discrete ball of radius `r` voxels.
pub fn ball_offsets(r: usize) -> Vec<[i64; 3]> {
    let r = r as i64;
    let mut out = Vec::new();
    for z in -r..=r {
        for y in -r..=r {
            for x in -r..=r {
                if x * x + y * y + z * z <= r * r {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

/// Converts a length in mm to whole voxels (floor).
pub fn length_to_voxels(len: f64, spacing: f64) -> usize {
    (len / spacing + 1e-9).floor().max(0.0) as usize
}

/// Minkowski sum (grow) or difference (shrink) with a discrete ball of
/// radius `r` mm.
pub fn offset_ball(s: &VoxelSolid, r: f64, direction: OffsetDirection) -> Result<VoxelSolid> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidArgument(format!("offset radius {r} must be non-negative")));
    }
    let rv = length_to_voxels(r, s.grid.spacing);
    if rv == 0 {
        return Ok(s.clone());
    }
    let ball = morphology::LatticeSet::from_points(ball_offsets(rv));
    let op = match direction {
        OffsetDirection::Grow => MinkowskiOp::Sum,
        OffsetDirection::Shrink => MinkowskiOp::Difference,
    };
    morphology::minkowski_kernel(s, op, &ball, Method::Auto)
}
