//! Axisymmetric sweep by sampled rotations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solid::VoxelSolid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// A rotation axis parallel to a grid axis through a world point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevolveAxis {
    pub axis: Axis,
    /// Any world point on the axis (mm).
    pub through: [f64; 3],
}

/// Union of `b` rotated about `axis` by `2πk/samples`, `k = 0..samples`.
///
/// Each rotated copy is resampled by nearest voxel: an output voxel is set
/// when its center, rotated back, falls inside a voxel of `b`. The angle set
/// for `2n` samples contains the angles for `n` bit-for-bit, so doubling the
/// sample count never removes voxels.
pub fn revolve(b: &VoxelSolid, axis: &RevolveAxis, samples: usize) -> Result<VoxelSolid> {
    if samples < 4 {
        return Err(Error::InvalidArgument(format!("revolve needs at least 4 angular samples, got {samples}")));
    }
    let g = *b.grid();
    let ax = axis.axis.index();
    let (u, v) = ((ax + 1) % 3, (ax + 2) % 3);
    // The axis line must cross the grid's footprint in the (u, v) plane.
    for a in [u, v] {
        let lo = g.origin[a];
        let hi = lo + g.dims[a] as f64 * g.spacing;
        if !(axis.through[a] >= lo && axis.through[a] <= hi) {
            return Err(Error::AxisOutsideGrid);
        }
    }
    let (cu, cv) = (axis.through[u], axis.through[v]);

    // Radial range and axial slices actually occupied by b.
    let mut rmax: f64 = 0.0;
    let mut rmin = f64::INFINITY;
    let mut slices = vec![false; g.dims[ax]];
    for k in b.iter_indices() {
        let c = g.coords(k);
        slices[c[ax]] = true;
        let p = g.center(c);
        let r = ((p[u] - cu).powi(2) + (p[v] - cv).powi(2)).sqrt();
        rmax = rmax.max(r);
        rmin = rmin.min(r);
    }
    let mut out = VoxelSolid::empty(g);
    if b.is_empty() {
        return Ok(out);
    }
    let slack = g.spacing * std::f64::consts::SQRT_2;
    let trig: Vec<(f64, f64)> = (0..samples)
        .map(|k| {
            let theta = std::f64::consts::TAU * (k as f64 / samples as f64);
            (theta.cos(), theta.sin())
        })
        .collect();
    for k in 0..g.len() {
        let c = g.coords(k);
        if !slices[c[ax]] {
            continue;
        }
        let p = g.center(c);
        let (du, dv) = (p[u] - cu, p[v] - cv);
        let r = (du * du + dv * dv).sqrt();
        if r > rmax + slack || r + slack < rmin {
            continue;
        }
        for &(cs, sn) in &trig {
            // rotate back by -theta
            let mut q = p;
            q[u] = cu + cs * du + sn * dv;
            q[v] = cv - sn * du + cs * dv;
            if let Some(i) = g.voxel_at(q) {
                if b.get(i) {
                    out.set_index(k, true);
                    break;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solid::GridSpec;

    fn z_axis() -> RevolveAxis {
        RevolveAxis { axis: Axis::Z, through: [0.0; 3] }
    }

    #[test]
    fn too_few_samples_or_bad_axis() {
        let g = GridSpec::centered([8, 8, 1], 1.0).unwrap();
        let b = VoxelSolid::full(g);
        assert!(revolve(&b, &z_axis(), 3).is_err());
        let off = RevolveAxis { axis: Axis::Z, through: [100.0, 0.0, 0.0] };
        assert!(matches!(revolve(&b, &off, 8), Err(Error::AxisOutsideGrid)));
    }

    #[test]
    fn axisymmetric_input_is_preserved() {
        let g = GridSpec::centered([16, 16, 3], 1.0).unwrap();
        let disk = VoxelSolid::from_fn(g, |i| {
            let p = g.center(i);
            p[0] * p[0] + p[1] * p[1] <= 25.0
        });
        let r = revolve(&disk, &z_axis(), 64).unwrap();
        assert!(disk.is_subset_of(&r));
        // resampling may add at most a thin rim
        let rim = r.subtract(&disk).unwrap();
        for k in rim.iter_indices() {
            let p = g.center(g.coords(k));
            assert!((p[0] * p[0] + p[1] * p[1]).sqrt() <= 5.0 + 1.5);
        }
    }

    #[test]
    fn off_axis_voxel_traces_a_circle() {
        let g = GridSpec::centered([32, 32, 1], 1.0).unwrap();
        let src = g.voxel_at([10.5, 0.5, 0.0]).unwrap();
        let b = VoxelSolid::from_indices(g, [src]);
        let r = revolve(&b, &z_axis(), 360).unwrap();
        let radius = (10.5f64 * 10.5 + 0.25).sqrt();
        for k in 0..g.len() {
            let p = g.center(g.coords(k));
            let d = ((p[0] * p[0] + p[1] * p[1]).sqrt() - radius).abs();
            if d <= 0.25 {
                assert!(r.get_index(k), "missing ring voxel at {p:?}");
            }
            if r.get_index(k) {
                assert!(d <= std::f64::consts::FRAC_1_SQRT_2 + 1e-9, "stray voxel at {p:?}");
            }
        }
    }

    #[test]
    fn doubling_samples_is_monotone() {
        let g = GridSpec::centered([20, 20, 4], 1.0).unwrap();
        let b = VoxelSolid::from_fn(g, |[x, y, z]| (12..15).contains(&x) && (9..11).contains(&y) && z < 3);
        let mut prev = revolve(&b, &z_axis(), 4).unwrap();
        for n in [8, 16, 32, 64] {
            let next = revolve(&b, &z_axis(), n).unwrap();
            assert!(prev.is_subset_of(&next), "{n} samples lost voxels");
            prev = next;
        }
    }
}
