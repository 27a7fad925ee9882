//! Translational configuration-space machinery.
//!
//! Conventions: a translation `τ` moves a shape `D` to `D + τ` (lattice
//! coordinates, see [`crate::solid`]). The obstacle of `S` for `D` is
//! `{τ : S ∩ (D + τ) ≠ ∅}`, and sweeping `B` along a set `T` gives
//! `⋃_{τ∈T} (B + τ)`. Minkowski difference follows the counting form
//! `a ⊖ b = {x : x − b ⊆ a}`, so opening is `(S ⊖ −D) ⊕ B`.
//!
//! Composite operations run on unbounded lattice sets (empty outside the
//! grid) and crop to the grid only at the end, which keeps the opening and
//! closing laws exact near the grid boundary.

mod correlate;
mod lattice;
mod orientation;
mod revolve;

pub use correlate::{correlate_direct, correlate_fft, correlate_sets, Method, MAX_FFT_ELEMENTS};
pub use lattice::{AsKernel, CountBox, LatticeSet};
pub use orientation::Orientation;
pub use revolve::{revolve, Axis, RevolveAxis};

use crate::error::{Error, Result};
use crate::solid::{GridSpec, VoxelSolid};

/// Set of lattice translations, stored as a solid over a centered offset
/// lattice (offset zero is the middle voxel).
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationSet {
    members: VoxelSolid,
}

impl TranslationSet {
    /// Builds the set from a predicate over an inclusive offset box.
    pub fn from_window(
        spacing: f64,
        lo: [i64; 3],
        hi: [i64; 3],
        mut keep: impl FnMut([i64; 3]) -> bool,
    ) -> Result<Self> {
        let half = [0, 1, 2].map(|a| lo[a].unsigned_abs().max(hi[a].unsigned_abs()) as usize);
        let grid = GridSpec::offset_lattice(half, spacing)?;
        let mut members = VoxelSolid::empty(grid);
        if (0..3).all(|a| lo[a] <= hi[a]) {
            for z in lo[2]..=hi[2] {
                for y in lo[1]..=hi[1] {
                    for x in lo[0]..=hi[0] {
                        let t = [x, y, z];
                        if keep(t) {
                            let i = grid.index_of_lattice(t).expect("window inside lattice");
                            members.set(i, true);
                        }
                    }
                }
            }
        }
        Ok(TranslationSet { members })
    }

    pub fn from_offsets(spacing: f64, offsets: impl IntoIterator<Item = [i64; 3]>) -> Result<Self> {
        let set = LatticeSet::from_points(offsets);
        if set.is_empty() {
            return Self::from_window(spacing, [0; 3], [0; 3], |_| false);
        }
        Self::from_window(spacing, set.min(), set.max(), |t| set.contains(t))
    }

    pub fn contains(&self, t: [i64; 3]) -> bool {
        self.members.grid().index_of_lattice(t).is_some_and(|i| self.members.get(i))
    }

    pub fn offsets(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        let g = *self.members.grid();
        self.members.iter_indices().map(move |k| g.lattice_of(g.coords(k)))
    }

    pub fn count(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.members.grid().spacing
    }

    /// The set viewed as a solid over offset space.
    pub fn as_solid(&self) -> &VoxelSolid {
        &self.members
    }

    pub fn to_lattice(&self) -> LatticeSet {
        LatticeSet::from_solid(&self.members)
    }

    pub fn is_subset_of(&self, other: &TranslationSet) -> bool {
        self.offsets().all(|t| other.contains(t))
    }
}

/// Overlap counts `|A ∩ (B + τ)|` over a centered offset lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapField {
    pub grid: GridSpec,
    pub counts: Vec<u32>,
}

impl OverlapField {
    pub fn get(&self, t: [i64; 3]) -> u32 {
        self.grid.index_of_lattice(t).map_or(0, |i| self.counts[self.grid.index(i)])
    }
}

/// Which translations a free-space or motion set may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// Every translation at which the moving shape touches the grid box.
    #[default]
    Full,
    /// Only translations that keep the whole moving shape inside the grid.
    Contained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinkowskiOp {
    Sum,
    Difference,
}

/// Inclusive lattice box of the grid.
fn grid_box(g: &GridSpec) -> ([i64; 3], [i64; 3]) {
    let lo = g.lattice_of([0, 0, 0]);
    let hi = g.lattice_of(g.dims.map(|d| d - 1));
    (lo, hi)
}

fn window_box(g: &GridSpec, d: &LatticeSet, window: Window) -> ([i64; 3], [i64; 3]) {
    let (glo, ghi) = grid_box(g);
    let (dlo, dhi) = (d.min(), d.max());
    match window {
        Window::Full => ([0, 1, 2].map(|a| glo[a] - dhi[a]), [0, 1, 2].map(|a| ghi[a] - dlo[a])),
        Window::Contained => ([0, 1, 2].map(|a| glo[a] - dlo[a]), [0, 1, 2].map(|a| ghi[a] - dhi[a])),
    }
}

/// `counts[τ] = |{x : x ∈ a, x − τ ∈ b}|` for every `τ` in `[-(n-1), n-1]`.
pub fn correlate(a: &VoxelSolid, b: &VoxelSolid, method: Method) -> Result<OverlapField> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let g = *a.grid();
    let field_grid = GridSpec::offset_lattice(g.dims.map(|d| d - 1), g.spacing)?;
    let c = correlate_sets(&LatticeSet::from_solid(a), &LatticeSet::from_solid(b), method)?;
    let mut counts = vec![0u32; field_grid.len()];
    for (k, slot) in counts.iter_mut().enumerate() {
        *slot = c.get(field_grid.lattice_of(field_grid.coords(k)));
    }
    Ok(OverlapField { grid: field_grid, counts })
}

/// Translations at which `d` collides with `s`.
pub fn obstacle(s: &VoxelSolid, d: &impl AsKernel, method: Method) -> Result<TranslationSet> {
    let g = s.grid();
    let d = d.kernel(g.spacing)?;
    let c = correlate_sets(&LatticeSet::from_solid(s), &d, method)?;
    if c.counts.is_empty() {
        return TranslationSet::from_offsets(g.spacing, []);
    }
    let hi = [0, 1, 2].map(|a| c.min[a] + c.dims[a] as i64 - 1);
    TranslationSet::from_window(g.spacing, c.min, hi, |t| c.get(t) >= 1)
}

/// Collision-free translations of `d` within the window.
pub fn free_space(s: &VoxelSolid, d: &impl AsKernel, window: Window, method: Method) -> Result<TranslationSet> {
    lambda_motion_counts(s, d, 0, window, method)
}

fn lambda_motion_counts(
    s: &VoxelSolid,
    d: &impl AsKernel,
    max_overlap: u64,
    window: Window,
    method: Method,
) -> Result<TranslationSet> {
    let g = s.grid();
    let d = d.kernel(g.spacing)?;
    if d.is_empty() {
        return Err(Error::InvalidArgument("moving shape is empty".into()));
    }
    let c = correlate_sets(&LatticeSet::from_solid(s), &d, method)?;
    let (lo, hi) = window_box(g, &d, window);
    TranslationSet::from_window(g.spacing, lo, hi, |t| u64::from(c.get(t)) <= max_overlap)
}

/// Translations whose overlap with `target_complement` is at most
/// `λ·mmn_volume` voxels. `λ = 0` gives the free space.
pub fn lambda_motion(
    target_complement: &VoxelSolid,
    d: &impl AsKernel,
    mmn_volume: usize,
    lambda: f64,
    window: Window,
    method: Method,
) -> Result<TranslationSet> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    if mmn_volume == 0 {
        return Err(Error::InvalidArgument("MMN volume must be positive".into()));
    }
    // Counts are integers, so `count <= λ·|B|` is `count <= floor(λ·|B|)`.
    let bound = (lambda * mmn_volume as f64 + 1e-9).floor() as u64;
    lambda_motion_counts(target_complement, d, bound, window, method)
}

fn check_spacing(t: &TranslationSet, g: &GridSpec) -> Result<()> {
    if t.spacing() != g.spacing {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Sweep: `⋃_{τ∈t} (b + τ)`, cropped to `b`'s grid.
pub fn dilate(t: &TranslationSet, b: &VoxelSolid, method: Method) -> Result<VoxelSolid> {
    let g = b.grid();
    check_spacing(t, g)?;
    Ok(lattice_sum(&t.to_lattice(), &LatticeSet::from_solid(b), method)?.to_solid(g))
}

/// `⋂_{τ∈t} (b + τ)` within `b`'s grid, reading voxels of `b + τ` that come
/// from outside the grid as occupied. This makes `erode` the exact dual of
/// [`dilate`]: `complement(dilate(t, b)) == erode(t, complement(b))`.
pub fn erode(t: &TranslationSet, b: &VoxelSolid, method: Method) -> Result<VoxelSolid> {
    let g = b.grid();
    check_spacing(t, g)?;
    let tl = t.to_lattice();
    if tl.is_empty() {
        return Ok(VoxelSolid::full(*g));
    }
    // x survives iff x − τ ∈ b_ext for every τ; b_ext covers all such x − τ.
    let (glo, ghi) = grid_box(g);
    let lo = [0, 1, 2].map(|a| glo[a] - tl.max()[a]);
    let dims = [0, 1, 2].map(|a| (ghi[a] - tl.min()[a] - lo[a] + 1) as usize);
    let ext = LatticeSet::from_box(lo, dims, |p| g.index_of_lattice(p).is_none_or(|i| b.get(i)));
    Ok(lattice_difference(&ext, &tl, method)?.to_solid(g))
}

/// `a ⊕ k = {x + y}`.
pub fn lattice_sum(a: &LatticeSet, k: &LatticeSet, method: Method) -> Result<LatticeSet> {
    Ok(correlate_sets(a, &k.reflect(), method)?.threshold(|c| c >= 1))
}

/// `a ⊖ k = {x : x − k ⊆ a}`. Empty `k` is rejected because the result
/// would be unbounded.
pub fn lattice_difference(a: &LatticeSet, k: &LatticeSet, method: Method) -> Result<LatticeSet> {
    let n = k.count();
    if n == 0 {
        return Err(Error::InvalidArgument("Minkowski difference by an empty set".into()));
    }
    let n = u32::try_from(n).map_err(|_| Error::InvalidArgument("kernel too large".into()))?;
    Ok(correlate_sets(a, &k.reflect(), method)?.threshold(|c| c == n))
}

/// Minkowski sum or difference of a solid with a kernel, cropped to the
/// solid's grid. Differencing by an empty kernel yields the whole grid.
pub fn minkowski(a: &VoxelSolid, op: MinkowskiOp, b: &impl AsKernel, method: Method) -> Result<VoxelSolid> {
    let g = a.grid();
    let k = b.kernel(g.spacing)?;
    let al = LatticeSet::from_solid(a);
    let out = match op {
        MinkowskiOp::Sum => lattice_sum(&al, &k, method)?,
        MinkowskiOp::Difference if k.is_empty() => return Ok(VoxelSolid::full(*g)),
        MinkowskiOp::Difference => lattice_difference(&al, &k, method)?,
    };
    Ok(out.to_solid(g))
}

pub(crate) fn minkowski_kernel(a: &VoxelSolid, op: MinkowskiOp, k: &LatticeSet, method: Method) -> Result<VoxelSolid> {
    minkowski(a, op, k, method)
}

fn tool_union(b: &LatticeSet, c: &LatticeSet) -> Result<LatticeSet> {
    if b.is_empty() {
        return Err(Error::InvalidArgument("structuring element B is empty".into()));
    }
    Ok(if c.is_empty() { b.clone() } else { b.union(c) })
}

/// `(s ⊖ −D) ⊕ b` with `D = b ∪ c`: everything `b` can reach while the whole
/// of `D` stays inside `s`.
pub fn opening(s: &VoxelSolid, b: &impl AsKernel, c: &impl AsKernel, method: Method) -> Result<VoxelSolid> {
    let g = s.grid();
    let (b, c) = (b.kernel(g.spacing)?, c.kernel(g.spacing)?);
    let d = tool_union(&b, &c)?;
    let centers = lattice_difference(&LatticeSet::from_solid(s), &d.reflect(), method)?;
    Ok(lattice_sum(&centers, &b, method)?.to_solid(g))
}

/// `(s ⊕ −D) ⊖ b` with `D = b ∪ c`.
pub fn closing(s: &VoxelSolid, b: &impl AsKernel, c: &impl AsKernel, method: Method) -> Result<VoxelSolid> {
    let g = s.grid();
    let (b, c) = (b.kernel(g.spacing)?, c.kernel(g.spacing)?);
    let d = tool_union(&b, &c)?;
    let grown = lattice_sum(&LatticeSet::from_solid(s), &d.reflect(), method)?;
    Ok(lattice_difference(&grown, &b, method)?.to_solid(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> GridSpec {
        GridSpec::centered([n, n, n], 1.0).unwrap()
    }

    fn origin_voxel(g: GridSpec) -> VoxelSolid {
        VoxelSolid::from_indices(g, [g.index_of_lattice([0, 0, 0]).unwrap()])
    }

    fn cube(g: GridSpec, lo: i64, hi: i64) -> VoxelSolid {
        VoxelSolid::from_fn(g, |i| g.lattice_of(i).iter().all(|&c| c >= lo && c < hi))
    }

    fn random_solid(rng: &mut ChaCha8Rng, g: GridSpec, p: f64) -> VoxelSolid {
        VoxelSolid::from_fn(g, |_| rng.gen_bool(p))
    }

    /// Exhaustive collision check over every offset in range.
    fn obstacle_oracle(s: &VoxelSolid, d: &VoxelSolid, t: [i64; 3]) -> bool {
        let g = s.grid();
        d.iter_indices().any(|k| {
            let p = g.lattice_of(g.coords(k));
            g.index_of_lattice([0, 1, 2].map(|a| p[a] + t[a])).is_some_and(|i| s.get(i))
        })
    }

    #[test]
    fn correlate_delta_and_empty() {
        let g = grid(5);
        let o = origin_voxel(g);
        let f = correlate(&o, &o, Method::Fft).unwrap();
        assert_eq!(f.get([0, 0, 0]), 1);
        assert_eq!(f.counts.iter().sum::<u32>(), 1);
        let z = correlate(&VoxelSolid::empty(g), &o, Method::Direct).unwrap();
        assert!(z.counts.iter().all(|&c| c == 0));
        assert_eq!(z.grid.dims, [9, 9, 9]);
    }

    #[test]
    fn correlate_methods_agree_with_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GridSpec::new([6, 5, 4], 1.0, [-2.0, -3.0, -1.0]).unwrap();
        for _ in 0..5 {
            let a = random_solid(&mut rng, g, 0.4);
            let b = random_solid(&mut rng, g, 0.3);
            let d = correlate(&a, &b, Method::Direct).unwrap();
            assert_eq!(d, correlate(&a, &b, Method::Fft).unwrap());
            for (k, &c) in d.counts.iter().enumerate() {
                let t = d.grid.lattice_of(d.grid.coords(k));
                let mut n = 0;
                for x in 0..g.len() {
                    let xi = g.coords(x);
                    let xl = g.lattice_of(xi);
                    if a.get(xi) {
                        if let Some(y) = g.index_of_lattice([0, 1, 2].map(|i| xl[i] - t[i])) {
                            n += b.get(y) as u32;
                        }
                    }
                }
                assert_eq!(c, n);
                assert!(c as usize <= a.count().min(b.count()));
            }
        }
    }

    #[test]
    fn obstacle_matches_exhaustive_sweep() {
        let g = grid(10);
        let s = cube(g, -1, 3);
        let d = VoxelSolid::from_fn(g, |i| {
            let l = g.lattice_of(i);
            (0..2).contains(&l[0]) && (0..3).contains(&l[1]) && l[2] == 0
        });
        let obs = obstacle(&s, &d, Method::Auto).unwrap();
        for z in -12..12 {
            for y in -12..12 {
                for x in -12..12 {
                    assert_eq!(obs.contains([x, y, z]), obstacle_oracle(&s, &d, [x, y, z]));
                }
            }
        }
        assert!(obstacle(&VoxelSolid::empty(g), &d, Method::Auto).unwrap().is_empty());
    }

    #[test]
    fn point_tool_obstacle_is_the_solid() {
        let g = grid(8);
        let s = VoxelSolid::from_fn(g, |[x, y, z]| (x * y + z) % 5 == 0);
        let obs = obstacle(&s, &origin_voxel(g), Method::Direct).unwrap();
        let back: Vec<_> = obs.offsets().collect();
        assert_eq!(back.len(), s.count());
        for t in back {
            assert!(s.get(g.index_of_lattice(t).unwrap()));
        }
    }

    #[test]
    fn lambda_zero_is_free_space_and_monotone() {
        let g = grid(14);
        let target = cube(g, -5, 5);
        let ball = VoxelSolid::from_fn(g, |i| {
            let l = g.lattice_of(i);
            l.iter().map(|c| c * c).sum::<i64>() <= 4
        });
        let comp = target.complement();
        let t0 = lambda_motion(&comp, &ball, ball.count(), 0.0, Window::Full, Method::Auto).unwrap();
        let obs = obstacle(&comp, &ball, Method::Auto).unwrap();
        let free = free_space(&comp, &ball, Window::Full, Method::Auto).unwrap();
        assert_eq!(t0, free);
        for t in t0.offsets() {
            assert!(!obs.contains(t));
        }
        let mut prev = t0;
        for lambda in [0.1, 0.3, 0.6, 0.999] {
            let next = lambda_motion(&comp, &ball, ball.count(), lambda, Window::Full, Method::Auto).unwrap();
            assert!(prev.is_subset_of(&next));
            prev = next;
        }
        assert!(lambda_motion(&comp, &ball, ball.count(), 1.0, Window::Full, Method::Auto).is_err());
    }

    #[test]
    fn dilate_enumeration_and_identity() {
        let g = grid(6);
        let unit = origin_voxel(g);
        let t = TranslationSet::from_offsets(1.0, [[0, 0, 0], [1, 0, 0]]).unwrap();
        let d = dilate(&t, &unit, Method::Direct).unwrap();
        assert_eq!(d.count(), 2);
        assert!(d.get(g.index_of_lattice([1, 0, 0]).unwrap()));
        let id = TranslationSet::from_offsets(1.0, [[0, 0, 0]]).unwrap();
        let b = cube(g, -1, 2);
        assert_eq!(dilate(&id, &b, Method::Fft).unwrap(), b);
        assert_eq!(erode(&id, &b, Method::Fft).unwrap(), b);
    }

    #[test]
    fn dilate_erode_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [5, 8, 11] {
            let g = grid(n);
            let b = random_solid(&mut rng, g, 0.3);
            let offs: Vec<[i64; 3]> = (0..6).map(|_| [0; 3].map(|_: i64| rng.gen_range(-3..=3))).collect();
            let t = TranslationSet::from_offsets(1.0, offs).unwrap();
            for m in [Method::Direct, Method::Fft] {
                let lhs = dilate(&t, &b, m).unwrap().complement();
                let rhs = erode(&t, &b.complement(), m).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn minkowski_boxes_and_identity() {
        let g = grid(16);
        let a = cube(g, 0, 4);
        let k = cube(g, 0, 2);
        let sum = minkowski(&a, MinkowskiOp::Sum, &k, Method::Auto).unwrap();
        assert_eq!(sum, cube(g, 0, 5));
        assert_eq!(minkowski(&a, MinkowskiOp::Sum, &origin_voxel(g), Method::Auto).unwrap(), a);
        // {x : x − k ⊆ a}
        let diff = minkowski(&a, MinkowskiOp::Difference, &k, Method::Auto).unwrap();
        assert_eq!(diff, cube(g, 1, 4));
        assert_eq!(
            minkowski(&a, MinkowskiOp::Difference, &VoxelSolid::empty(g), Method::Auto).unwrap(),
            VoxelSolid::full(g)
        );
    }

    #[test]
    fn opening_with_point_tool_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = grid(8);
        let s = random_solid(&mut rng, g, 0.5);
        let p = origin_voxel(g);
        let e = VoxelSolid::empty(g);
        assert_eq!(opening(&s, &p, &e, Method::Auto).unwrap(), s);
        assert_eq!(closing(&s, &p, &e, Method::Auto).unwrap(), s);
    }

    #[test]
    fn opening_removes_slot_walls_thinner_than_tool() {
        // Two thick blocks joined by a 1-voxel wall; a 3-voxel cube tool
        // cannot fit inside the wall, so the wall disappears.
        let g = GridSpec::centered([20, 12, 12], 1.0).unwrap();
        let s = VoxelSolid::from_fn(g, |[x, y, z]| {
            let inside_yz = (2..10).contains(&y) && (2..10).contains(&z);
            inside_yz && ((2..8).contains(&x) || x == 9 || (11..18).contains(&x))
        });
        let tool = VoxelSolid::from_fn(g, |i| g.lattice_of(i).iter().all(|&c| (-1..=1).contains(&c)));
        let e = VoxelSolid::empty(g);
        let o = opening(&s, &tool, &e, Method::Auto).unwrap();
        // brute force: union of tool placements that fit entirely in s
        let mut oracle = VoxelSolid::empty(g);
        for k in 0..g.len() {
            let c = g.coords(k);
            let fits = tool.iter_indices().all(|j| {
                let q = g.lattice_of(g.coords(j));
                let p = g.lattice_of(c);
                g.index_of_lattice([0, 1, 2].map(|a| p[a] + q[a])).is_some_and(|i| s.get(i))
            });
            if fits {
                for j in tool.iter_indices() {
                    let q = g.lattice_of(g.coords(j));
                    let p = g.lattice_of(c);
                    oracle.set(g.index_of_lattice([0, 1, 2].map(|a| p[a] + q[a])).unwrap(), true);
                }
            }
        }
        assert_eq!(o, oracle);
        assert!((0..g.len()).filter(|&k| g.coords(k)[0] == 9).all(|k| !o.get_index(k)));
    }
}
