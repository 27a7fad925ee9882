//! Manufacturing primitives from capability descriptions.
//!
//! A capability pairs a minimum manufacturable neighborhood `B` (droplet,
//! cutter) with the rest of the moving assembly `C` (nozzle, holder, shank)
//! and an orientation. Each variant turns that instrument into one region of
//! influence for a given target, with `D = B ∪ C`:
//!
//! | variant                | mode | region                                  |
//! |------------------------|------|-----------------------------------------|
//! | `MaximalUnderFill`     | AM   | `(S ⊖ −D) ⊕ B`                          |
//! | `OverFillLambda`       | AM   | sweep of `B` over `T_λ`                 |
//! | `ConservativeOverFill` | AM   | `(S ⊖ −C') ⊕ B`                         |
//! | `MaximalOverCut`       | SM   | `W − ((S ⊕ −D) ⊖ B)`                    |
//! | `ConservativeUnderCut` | SM   | `W − ((S ⊕ −C') ⊖ B)`                   |
//!
//! `C' = C ∪ {0}`, so an empty assembly turns the conservative variants into
//! a plain thickening or thinning of the target by `B`. `T_λ` contains the
//! translations that keep `D` inside the grid while overlapping the target's
//! complement by at most `λ·|B|` voxels; at `λ = 0` the sweep equals the
//! maximal under-fill.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphology::{
    self, lattice_difference, lattice_sum, AsKernel, LatticeSet, Method, Orientation, RevolveAxis, Window,
};
use crate::solid::{voxelize, GridSpec, Scene, VoxelSolid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "AM")]
    Am,
    #[serde(rename = "SM")]
    Sm,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Am => "AM",
            Mode::Sm => "SM",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    MaximalUnderFill,
    OverFillLambda,
    ConservativeOverFill,
    MaximalOverCut,
    ConservativeUnderCut,
}

impl Variant {
    pub fn mode(self) -> Mode {
        match self {
            Variant::MaximalUnderFill | Variant::OverFillLambda | Variant::ConservativeOverFill => Mode::Am,
            Variant::MaximalOverCut | Variant::ConservativeUnderCut => Mode::Sm,
        }
    }
}

/// Turning setup: the target is revolved about the spindle axis before the
/// variant is applied, since the tool sees the part's swept envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Turning {
    pub axis: RevolveAxis,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct Capability {
    pub name: String,
    pub variant: Variant,
    /// Minimum manufacturable neighborhood `B`, in lattice coordinates of its grid.
    pub mmn: VoxelSolid,
    /// Rest of the moving assembly `C`; may be empty.
    pub assembly: VoxelSolid,
    pub orientation: Orientation,
    pub lambda: Option<f64>,
    pub workspace: GridSpec,
    /// Cost per unit volume deposited or removed.
    pub rate: f64,
    pub turning: Option<Turning>,
}

impl Capability {
    pub fn mode(&self) -> Mode {
        self.variant.mode()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCapability(format!("{}: {m}", self.name)));
        if self.mmn.is_empty() {
            return bad("MMN is empty".into());
        }
        if self.assembly.grid().spacing != self.mmn.grid().spacing || self.mmn.grid().spacing != self.workspace.spacing
        {
            return bad("MMN, assembly and workspace must share the voxel spacing".into());
        }
        match (self.variant, self.lambda) {
            (Variant::OverFillLambda, None) => return bad("over_fill_lambda needs lambda".into()),
            (Variant::OverFillLambda, Some(l)) if !(0.0..1.0).contains(&l) => return Err(Error::LambdaOutOfRange(l)),
            (v, Some(_)) if v != Variant::OverFillLambda => return bad(format!("lambda given for {v:?}")),
            _ => {}
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return bad(format!("rate {} must be positive", self.rate));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Capability { name: String, variant: Variant, orientation: Orientation, lambda: Option<f64> },
    RawStock { min: [f64; 3], max: [f64; 3] },
    Imported { source: String },
}

/// Region of influence of one action together with its cost rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    /// 1-based index; the primitive prints as `P{id}`.
    pub id: usize,
    pub name: String,
    pub mode: Mode,
    pub solid: VoxelSolid,
    pub rate: f64,
    pub is_raw_stock: bool,
    pub provenance: Provenance,
}

impl Primitive {
    /// Wraps a hand-made region, e.g. one read from a grid file.
    pub fn imported(id: usize, name: &str, mode: Mode, solid: VoxelSolid, rate: f64, source: &str) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidCapability(format!("{name}: rate {rate} must be positive")));
        }
        Ok(Primitive {
            id,
            name: name.to_string(),
            mode,
            solid,
            rate,
            is_raw_stock: false,
            provenance: Provenance::Imported { source: source.to_string() },
        })
    }

    pub fn symbol(&self) -> String {
        format!("P{}", self.id)
    }
}

/// Builds the region of influence of `cap` for `target`.
pub fn build_primitive(cap: &Capability, target: &VoxelSolid, id: usize, method: Method) -> Result<Primitive> {
    cap.validate()?;
    if *target.grid() != cap.workspace {
        return Err(Error::GridMismatch);
    }
    let g = cap.workspace;
    let b = cap.orientation.rotate(&*cap.mmn.kernel(g.spacing)?);
    let c = cap.orientation.rotate(&*cap.assembly.kernel(g.spacing)?);
    let d = if c.is_empty() { b.clone() } else { b.union(&c) };
    let c0 = c.union(&LatticeSet::from_points([[0, 0, 0]]));

    let revolved;
    let s = match &cap.turning {
        Some(t) => {
            revolved = morphology::revolve(target, &t.axis, t.samples)?;
            &revolved
        }
        None => target,
    };
    let sl = LatticeSet::from_solid(s);

    let solid = match cap.variant {
        Variant::MaximalUnderFill => morphology::opening(s, &b, &c, method)?,
        Variant::OverFillLambda => {
            let lambda = cap.lambda.unwrap_or(0.0);
            let t = morphology::lambda_motion(&s.complement(), &d, b.count(), lambda, Window::Contained, method)?;
            lattice_sum(&t.to_lattice(), &b, method)?.to_solid(&g)
        }
        Variant::ConservativeOverFill => {
            let core = lattice_difference(&sl, &c0.reflect(), method)?;
            lattice_sum(&core, &b, method)?.to_solid(&g)
        }
        Variant::MaximalOverCut => morphology::closing(s, &b, &c, method)?.complement(),
        Variant::ConservativeUnderCut => {
            let grown = lattice_sum(&sl, &c0.reflect(), method)?;
            lattice_difference(&grown, &b, method)?.to_solid(&g).complement()
        }
    };
    Ok(Primitive {
        id,
        name: cap.name.clone(),
        mode: cap.mode(),
        solid,
        rate: cap.rate,
        is_raw_stock: false,
        provenance: Provenance::Capability {
            name: cap.name.clone(),
            variant: cap.variant,
            orientation: cap.orientation,
            lambda: cap.lambda,
        },
    })
}

/// Raw or bar stock: an AM primitive usable only as the first action.
pub fn make_raw_stock(
    id: usize,
    name: &str,
    min: [f64; 3],
    max: [f64; 3],
    grid: &GridSpec,
    rate: f64,
) -> Result<Primitive> {
    let scene = Scene::cuboid(min, max);
    scene.validate().map_err(|e| Error::InvalidCapability(format!("{name}: {e}")))?;
    let eps = 1e-9 * grid.spacing;
    for a in 0..3 {
        let lo = grid.origin[a];
        let hi = lo + grid.dims[a] as f64 * grid.spacing;
        if min[a] < lo - eps || max[a] > hi + eps {
            return Err(Error::InvalidCapability(format!("{name}: stock box leaves the workspace")));
        }
    }
    let solid = voxelize(&scene, grid)?;
    if solid.is_empty() {
        return Err(Error::InvalidCapability(format!("{name}: stock box contains no voxel center")));
    }
    let mut p = Primitive::imported(id, name, Mode::Am, solid, rate, "")?;
    p.is_raw_stock = true;
    p.provenance = Provenance::RawStock { min, max };
    Ok(p)
}
