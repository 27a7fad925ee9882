//! Declarative CSG scenes and their voxelization.
//!
//! Scenes are JSON trees tagged by `"type"`. Leaves are analytic shapes in
//! world millimetres; interior nodes combine children:
//!
//! ```json
//! { "type": "subtract",
//!   "base": { "type": "box", "min": [0, 0, 0], "max": [10, 10, 4] },
//!   "minus": [ { "type": "cylinder", "start": [5, 5, -1], "end": [5, 5, 5], "radius": 2 } ] }
//! ```

use serde::{Deserialize, Serialize};

use super::{GridSpec, VoxelSolid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scene {
    /// Axis-aligned box `[min, max)`.
    Box {
        min: [f64; 3],
        max: [f64; 3],
    },
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    /// Finite solid cylinder between two end-cap centers.
    Cylinder {
        start: [f64; 3],
        end: [f64; 3],
        radius: f64,
    },
    /// Points with `normal · p <= offset`.
    HalfSpace {
        normal: [f64; 3],
        offset: f64,
    },
    Union {
        children: Vec<Scene>,
    },
    Intersect {
        children: Vec<Scene>,
    },
    Subtract {
        base: Box<Scene>,
        minus: Vec<Scene>,
    },
    Complement {
        child: Box<Scene>,
    },
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl Scene {
    pub fn empty() -> Scene {
        Scene::Union { children: Vec::new() }
    }

    pub fn cuboid(min: [f64; 3], max: [f64; 3]) -> Scene {
        Scene::Box { min, max }
    }

    pub fn from_json(text: &str) -> Result<Scene> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| Error::InvalidScene(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScene(msg));
        match self {
            Scene::Box { min, max } => {
                if !finite(min) || !finite(max) {
                    return bad("box corners must be finite".into());
                }
                if (0..3).any(|a| max[a] <= min[a]) {
                    return bad(format!("box {min:?}..{max:?} has non-positive extent"));
                }
            }
            Scene::Sphere { center, radius } => {
                if !finite(center) || !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("sphere radius {radius} must be positive and finite"));
                }
            }
            Scene::Cylinder { start, end, radius } => {
                if !finite(start) || !finite(end) || !(radius.is_finite() && *radius > 0.0) {
                    return bad("cylinder parameters must be finite with positive radius".into());
                }
                if dot(sub(*end, *start), sub(*end, *start)) == 0.0 {
                    return bad("cylinder has zero length".into());
                }
            }
            Scene::HalfSpace { normal, offset } => {
                if !finite(normal) || !offset.is_finite() || dot(*normal, *normal) == 0.0 {
                    return bad("half-space needs a finite non-zero normal".into());
                }
            }
            Scene::Union { children } | Scene::Intersect { children } => {
                children.iter().try_for_each(Scene::validate)?;
            }
            Scene::Subtract { base, minus } => {
                base.validate()?;
                minus.iter().try_for_each(Scene::validate)?;
            }
            Scene::Complement { child } => child.validate()?,
        }
        Ok(())
    }

    /// Point membership. An intersection of zero children is everything.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Scene::Box { min, max } => (0..3).all(|a| p[a] >= min[a] && p[a] < max[a]),
            Scene::Sphere { center, radius } => {
                let d = sub(p, *center);
                dot(d, d) <= radius * radius
            }
            Scene::Cylinder { start, end, radius } => {
                let axis = sub(*end, *start);
                let len2 = dot(axis, axis);
                let d = sub(p, *start);
                let t = dot(d, axis);
                if t < 0.0 || t > len2 {
                    return false;
                }
                dot(d, d) - t * t / len2 <= radius * radius
            }
            Scene::HalfSpace { normal, offset } => dot(*normal, p) <= *offset,
            Scene::Union { children } => children.iter().any(|c| c.contains(p)),
            Scene::Intersect { children } => children.iter().all(|c| c.contains(p)),
            Scene::Subtract { base, minus } => base.contains(p) && !minus.iter().any(|c| c.contains(p)),
            Scene::Complement { child } => !child.contains(p),
        }
    }
}

/// Sets each voxel whose center lies inside the scene.
pub fn voxelize(scene: &Scene, grid: &GridSpec) -> Result<VoxelSolid> {
    grid.validate()?;
    scene.validate()?;
    Ok(VoxelSolid::from_fn(*grid, |i| scene.contains(grid.center(i))))
}
