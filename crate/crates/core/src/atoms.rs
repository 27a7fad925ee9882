//! Canonical atomic decomposition of the workspace.
//!
//! Every voxel gets an n-bit code recording which primitives contain it;
//! voxels sharing a code form an atom. Any plan built from the primitives
//! produces a union of whole atoms, so a target can only be made if it is
//! (up to tolerance) such a union.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capability::{Mode, Primitive};
use crate::error::{Error, Result};
use crate::solid::{length_to_voxels, offset_ball, GridSpec, OffsetDirection, VoxelSolid};

/// Codes are stored in one machine word.
pub const MAX_PRIMITIVES: usize = 62;

/// Widest primitive set for which the 2ⁿ code space is enumerated.
pub const MAX_ENUMERATED_WIDTH: usize = 24;

/// Membership code of an atom. Bit `i` (from the least significant end) is
/// set when the atom lies in primitive `P{i+1}`; the printed form lists `P1`
/// first, e.g. `0110` is inside `P2` and `P3` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AtomCode {
    bits: u64,
    width: u8,
}

impl AtomCode {
    pub fn new(bits: u64, width: usize) -> Self {
        debug_assert!(width <= MAX_PRIMITIVES && (width == 64 || bits >> width == 0));
        AtomCode { bits, width: width as u8 }
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    /// Membership in primitive `P{i+1}`.
    pub fn has(self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    /// Index `j = Σ b_i 2^(n−i)`, reading the printed string as binary.
    pub fn index(self) -> u64 {
        let n = self.width as u32;
        if n == 0 {
            0
        } else {
            self.bits.reverse_bits() >> (64 - n)
        }
    }
}

impl PartialOrd for AtomCode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AtomCode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.width, self.index()).cmp(&(other.width, other.index()))
    }
}

impl fmt::Display for AtomCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width() {
            f.write_str(if self.has(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for AtomCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > MAX_PRIMITIVES {
            return Err(Error::Parse(format!("atom code {s:?} must have 1..={MAX_PRIMITIVES} digits")));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::Parse(format!("atom code {s:?} must be binary"))),
            }
        }
        Ok(AtomCode::new(bits, s.len()))
    }
}

impl Serialize for AtomCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AtomCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Inside,
    Outside,
    Partial,
    PartialTolerable,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Inside => "inside",
            Classification::Outside => "outside",
            Classification::Partial => "partial",
            Classification::PartialTolerable => "partial_tolerable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub code: AtomCode,
    pub voxel_count: usize,
    /// mm³
    pub volume: f64,
    /// False when no AM primitive contains the atom, so no plan can deposit it.
    pub depositable: bool,
    pub classification: Option<Classification>,
    pub inside_overlap: f64,
    pub outside_overlap: f64,
    /// Whether the atom belongs to the target mask.
    pub included: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationReason {
    /// Straddles the target boundary beyond the tolerance zone.
    Partial,
    /// Needed by the target but outside every AM primitive.
    Undepositable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: AtomCode,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "violations", rename_all = "snake_case")]
pub enum Verdict {
    /// Passes the necessary condition; planning must still find a plan.
    Candidate,
    NotManufacturable(Vec<Violation>),
}

impl Verdict {
    pub fn is_candidate(&self) -> bool {
        matches!(self, Verdict::Candidate)
    }
}

/// The two pieces a new primitive must separate to cure a violating atom.
#[derive(Debug, Clone)]
pub struct SplitEntry {
    pub code: AtomCode,
    pub inside: VoxelSolid,
    pub outside: VoxelSolid,
}

#[derive(Debug, Clone, PartialEq)]
struct TargetInfo {
    target: VoxelSolid,
    zone: VoxelSolid,
    tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    grid: GridSpec,
    primitives: Vec<Primitive>,
    codes: Vec<u64>,
    /// Sorted by code index.
    atoms: Vec<Atom>,
    lookup: HashMap<u64, usize>,
    target: Option<TargetInfo>,
}

fn check_primitives(primitives: &[Primitive], grid: &GridSpec) -> Result<()> {
    if primitives.len() > MAX_PRIMITIVES {
        return Err(Error::TooManyPrimitives(primitives.len(), MAX_PRIMITIVES));
    }
    for (i, p) in primitives.iter().enumerate() {
        if p.solid.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if p.id != i + 1 {
            return Err(Error::InvalidArgument(format!("primitive at position {} has id {}", i + 1, p.id)));
        }
        if p.is_raw_stock && p.mode != Mode::Am {
            return Err(Error::InvalidCapability(format!("{}: raw stock must be AM", p.name)));
        }
    }
    Ok(())
}

/// Assigns every voxel the code of its primitive memberships.
pub fn decompose(primitives: &[Primitive], grid: &GridSpec) -> Result<Decomposition> {
    check_primitives(primitives, grid)?;
    let mut codes = vec![0u64; grid.len()];
    for (i, p) in primitives.iter().enumerate() {
        for k in p.solid.iter_indices() {
            codes[k] |= 1 << i;
        }
    }
    Ok(Decomposition::build(*grid, primitives.to_vec(), codes))
}

impl Decomposition {
    /// Rebuilds a decomposition from stored per-voxel codes, e.g. a cached
    /// one. The codes are trusted to match the primitives; only their shape
    /// is checked.
    pub fn from_codes(primitives: &[Primitive], grid: &GridSpec, codes: Vec<u64>) -> Result<Self> {
        check_primitives(primitives, grid)?;
        if codes.len() != grid.len() {
            return Err(Error::Format(format!("{} codes for a grid of {} voxels", codes.len(), grid.len())));
        }
        let n = primitives.len();
        if codes.iter().any(|&c| n < 64 && c >> n != 0) {
            return Err(Error::Format(format!("code wider than {n} bits")));
        }
        Ok(Decomposition::build(*grid, primitives.to_vec(), codes))
    }

    /// Per-voxel codes in grid order.
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    fn build(grid: GridSpec, primitives: Vec<Primitive>, codes: Vec<u64>) -> Self {
        let n = primitives.len();
        let am_bits: u64 =
            primitives.iter().enumerate().filter(|(_, p)| p.mode == Mode::Am).fold(0, |acc, (i, _)| acc | 1 << i);
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for &c in &codes {
            *counts.entry(c).or_default() += 1;
        }
        let mut atoms: Vec<Atom> = counts
            .into_iter()
            .map(|(bits, voxel_count)| Atom {
                code: AtomCode::new(bits, n),
                voxel_count,
                volume: voxel_count as f64 * grid.voxel_volume(),
                depositable: bits & am_bits != 0,
                classification: None,
                inside_overlap: 0.0,
                outside_overlap: 0.0,
                included: false,
            })
            .collect();
        atoms.sort_by_key(|a| a.code);
        let lookup = atoms.iter().enumerate().map(|(i, a)| (a.code.bits, i)).collect();
        Decomposition { grid, primitives, codes, atoms, lookup, target: None }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn n(&self) -> usize {
        self.primitives.len()
    }

    /// Nonempty atoms, ordered by code index.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, code: AtomCode) -> Option<&Atom> {
        self.lookup.get(&code.bits).map(|&i| &self.atoms[i])
    }

    pub fn code_at(&self, k: usize) -> AtomCode {
        AtomCode::new(self.codes[k], self.n())
    }

    pub fn is_classified(&self) -> bool {
        self.target.is_some()
    }

    pub fn target(&self) -> Option<&VoxelSolid> {
        self.target.as_ref().map(|t| &t.target)
    }

    pub fn tolerance(&self) -> Option<f64> {
        self.target.as_ref().map(|t| t.tolerance)
    }

    pub fn tolerance_zone(&self) -> Option<&VoxelSolid> {
        self.target.as_ref().map(|t| &t.zone)
    }

    /// Codes of the atoms the plan must end with.
    pub fn target_mask(&self) -> Vec<AtomCode> {
        self.atoms.iter().filter(|a| a.included).map(|a| a.code).collect()
    }

    /// Codes in `0..2ⁿ` with no voxel.
    pub fn empty_codes(&self) -> Result<Vec<AtomCode>> {
        let n = self.n();
        if n > MAX_ENUMERATED_WIDTH {
            return Err(Error::TooManyPrimitives(n, MAX_ENUMERATED_WIDTH));
        }
        let mut out: Vec<AtomCode> =
            (0..1u64 << n).filter(|b| !self.lookup.contains_key(b)).map(|b| AtomCode::new(b, n)).collect();
        out.sort();
        Ok(out)
    }

    pub fn atom_solid(&self, code: AtomCode) -> VoxelSolid {
        self.union_of(&[code])
    }

    pub fn union_of(&self, codes: &[AtomCode]) -> VoxelSolid {
        let wanted: std::collections::HashSet<u64> = codes.iter().map(|c| c.bits).collect();
        let mut s = VoxelSolid::empty(self.grid);
        for (k, c) in self.codes.iter().enumerate() {
            if wanted.contains(c) {
                s.set_index(k, true);
            }
        }
        s
    }

    /// Classifies every atom against `target` with a tolerance zone of
    /// half-width `tolerance` mm (rounded down to whole voxels).
    pub fn classify_target(&mut self, target: &VoxelSolid, tolerance: f64) -> Result<()> {
        if target.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {tolerance} must be non-negative")));
        }
        let zone = if length_to_voxels(tolerance, self.grid.spacing) == 0 {
            VoxelSolid::empty(self.grid)
        } else {
            offset_ball(target, tolerance, OffsetDirection::Grow)?.subtract(&offset_ball(
                target,
                tolerance,
                OffsetDirection::Shrink,
            )?)?
        };
        let m = self.atoms.len();
        let mut inside = vec![0usize; m];
        let mut excess_outside_zone = vec![false; m];
        let mut deficit_outside_zone = vec![false; m];
        for (k, c) in self.codes.iter().enumerate() {
            let a = self.lookup[c];
            let in_zone = zone.get_index(k);
            if target.get_index(k) {
                inside[a] += 1;
                deficit_outside_zone[a] |= !in_zone;
            } else {
                excess_outside_zone[a] |= !in_zone;
            }
        }
        let vv = self.grid.voxel_volume();
        for (i, atom) in self.atoms.iter_mut().enumerate() {
            let outside = atom.voxel_count - inside[i];
            atom.inside_overlap = inside[i] as f64 * vv;
            atom.outside_overlap = outside as f64 * vv;
            let (class, included) = if outside == 0 {
                (Classification::Inside, true)
            } else if inside[i] == 0 {
                (Classification::Outside, false)
            } else {
                let excess_ok = !excess_outside_zone[i];
                let deficit_ok = !deficit_outside_zone[i];
                match (excess_ok, deficit_ok) {
                    (true, true) => (Classification::PartialTolerable, inside[i] >= outside),
                    (true, false) => (Classification::PartialTolerable, true),
                    (false, true) => (Classification::PartialTolerable, false),
                    (false, false) => (Classification::Partial, false),
                }
            };
            atom.classification = Some(class);
            atom.included = included;
        }
        self.target = Some(TargetInfo { target: target.clone(), zone, tolerance });
        Ok(())
    }

    /// Necessary condition for manufacturability: no atom straddles the
    /// target beyond tolerance, and every atom of the target mask can be
    /// deposited by some AM primitive.
    pub fn manufacturability_test(&self) -> Result<Verdict> {
        if !self.is_classified() {
            return Err(Error::Unclassified);
        }
        let mut violations = Vec::new();
        for a in &self.atoms {
            if a.classification == Some(Classification::Partial) {
                violations.push(Violation { code: a.code, reason: ViolationReason::Partial });
            } else if a.included && !a.depositable {
                violations.push(Violation { code: a.code, reason: ViolationReason::Undepositable });
            }
        }
        Ok(if violations.is_empty() { Verdict::Candidate } else { Verdict::NotManufacturable(violations) })
    }

    /// Inside and outside pieces of every straddling atom.
    pub fn split_report(&self) -> Result<Vec<SplitEntry>> {
        let info = self.target.as_ref().ok_or(Error::Unclassified)?;
        let mut out = Vec::new();
        for a in self.atoms.iter().filter(|a| a.classification == Some(Classification::Partial)) {
            let solid = self.atom_solid(a.code);
            out.push(SplitEntry {
                code: a.code,
                inside: solid.intersect(&info.target)?,
                outside: solid.subtract(&info.target)?,
            });
        }
        Ok(out)
    }

    /// Adds one primitive as `P{n+1}`, splitting each atom in two at most.
    /// The result equals a fresh decomposition of all n+1 primitives, and is
    /// reclassified if a target was set.
    pub fn refine(&self, new_primitive: &Primitive) -> Result<Decomposition> {
        let n = self.n();
        if new_primitive.solid.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut prims = self.primitives.clone();
        prims.push(new_primitive.clone());
        check_primitives(&prims, &self.grid)?;
        let mut codes = self.codes.clone();
        for k in new_primitive.solid.iter_indices() {
            codes[k] |= 1 << n;
        }
        let mut d = Decomposition::build(self.grid, prims, codes);
        if let Some(info) = &self.target {
            d.classify_target(&info.target, info.tolerance)?;
        }
        Ok(d)
    }

    /// Atom table as CSV.
    pub fn to_csv(&self) -> Result<String> {
        if !self.is_classified() {
            return Err(Error::Unclassified);
        }
        let mut out =
            String::from("code,voxel_count,volume_mm3,classification,inside_overlap_mm3,outside_overlap_mm3\n");
        for a in &self.atoms {
            let class = a.classification.map_or("", Classification::as_str);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                a.code, a.voxel_count, a.volume, class, a.inside_overlap, a.outside_overlap
            ));
        }
        Ok(out)
    }
}
