//! Hybrid additive/subtractive process planning on voxel solids.
//!
//! The pipeline builds manufacturing primitives from capability descriptions
//! ([`capability`]), decomposes the workspace into Boolean atoms
//! ([`atoms`]), tests manufacturability, and searches symbolically for
//! low-cost plans ([`planner`]). Geometry lives in [`solid`] and
//! [`morphology`].

pub mod atoms;
pub mod capability;
pub mod error;
pub mod morphology;
pub mod planner;
pub mod solid;

pub use atoms::{decompose, Atom, AtomCode, Classification, Decomposition, Verdict};
pub use capability::{Capability, Mode, Primitive};
pub use error::{Error, Result};
pub use morphology::{Method, Orientation, TranslationSet, Window};
pub use planner::{search, Expr, Plan, SearchOptions};
pub use solid::{GridSpec, Scene, VoxelSolid};
