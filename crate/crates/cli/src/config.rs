//! Job configuration.

use std::fs;
use std::path::{Path, PathBuf};

use hybridplan::capability::{Turning, Variant};
use hybridplan::planner::SearchOptions;
use hybridplan::solid::{read_solid, voxelize};
use hybridplan::{GridSpec, Method, Mode, Orientation, Scene, VoxelSolid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Where a solid comes from: an inline scene or a grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    Scene(Scene),
    /// `HPVX` occupancy file, relative to the config file.
    File(PathBuf),
}

impl Source {
    /// Voxelizes a scene on `grid`, or reads a file that must be on `grid`.
    pub fn load(&self, grid: &GridSpec, base: &Path) -> Result<VoxelSolid> {
        match self {
            Source::Scene(s) => Ok(voxelize(s, grid)?),
            Source::File(_) => {
                let s = self.load_any(base)?;
                if s.grid() != grid {
                    return Err(CliError::Config(format!("{} is not on the expected grid", self.describe())));
                }
                Ok(s)
            }
        }
    }

    /// Reads a file on its own grid, or voxelizes a scene on `fallback`.
    pub fn load_tool(&self, fallback: &GridSpec, base: &Path) -> Result<VoxelSolid> {
        match self {
            Source::Scene(s) => Ok(voxelize(s, fallback)?),
            Source::File(_) => self.load_any(base),
        }
    }

    fn load_any(&self, base: &Path) -> Result<VoxelSolid> {
        let Source::File(p) = self else { unreachable!() };
        let path = base.join(p);
        let mut f = fs::File::open(&path).map_err(|e| CliError::Io(path.clone(), e))?;
        read_solid(&mut f).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn describe(&self) -> String {
        match self {
            Source::Scene(_) => "inline scene".into(),
            Source::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StockBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

/// One capability. Exactly one of `raw_stock`, `variant` or `primitive`
/// selects how its region is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityConfig {
    pub name: String,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_stock: Option<StockBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    /// Tool tip `B`, modeled around the world origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mmn: Option<Source>,
    /// Rest of the moving assembly `C`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assembly: Option<Source>,
    #[serde(default)]
    pub orientation: Orientation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turning: Option<Turning>,
    /// Shape this capability is computed for, instead of the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<Source>,
    /// Ready-made region; needs `mode`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primitive: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Half-size in voxels of the lattice scene tools are voxelized on;
    /// defaults to the workspace dims.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_extent: Option<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub k_best: usize,
    pub max_depth: usize,
    pub max_expansions: usize,
    /// Enriched DNFs examined by `report`.
    pub enrichment_budget: usize,
    pub allow_not_manufacturable: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        let s = SearchOptions::default();
        PlannerConfig {
            k_best: s.k_best,
            max_depth: s.max_depth,
            max_expansions: s.max_expansions,
            enrichment_budget: 1024,
            allow_not_manufacturable: s.allow_not_manufacturable,
        }
    }
}

impl PlannerConfig {
    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            k_best: self.k_best,
            max_depth: self.max_depth,
            max_expansions: self.max_expansions,
            allow_not_manufacturable: self.allow_not_manufacturable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Auto,
    Direct,
    Fft,
}

impl From<MethodChoice> for Method {
    fn from(m: MethodChoice) -> Method {
        match m {
            MethodChoice::Auto => Method::Auto,
            MethodChoice::Direct => Method::Direct,
            MethodChoice::Fft => Method::Fft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub workspace: GridSpec,
    pub target: Source,
    pub capabilities: Vec<CapabilityConfig>,
    #[serde(default)]
    pub tolerance_mm: f64,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default)]
    pub planner: PlannerConfig,
}

impl JobConfig {
    /// Parses JSON, reporting the offending field path and line.
    pub fn from_json(text: &str) -> Result<JobConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::Config(format!("at `{}` (line {}, column {}): {inner}", e.path(), inner.line(), inner.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<JobConfig> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        JobConfig::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.workspace.validate()?;
        if self.capabilities.is_empty() {
            return Err(CliError::Config("no capabilities".into()));
        }
        if !(self.tolerance_mm.is_finite() && self.tolerance_mm >= 0.0) {
            return Err(CliError::Config(format!("tolerance_mm {} must be non-negative", self.tolerance_mm)));
        }
        for c in &self.capabilities {
            let kinds = [c.raw_stock.is_some(), c.variant.is_some(), c.primitive.is_some()];
            if kinds.iter().filter(|&&k| k).count() != 1 {
                return Err(CliError::Config(format!(
                    "capability {}: give exactly one of raw_stock, variant, primitive",
                    c.name
                )));
            }
            if c.variant.is_some() && c.mmn.is_none() {
                return Err(CliError::Config(format!("capability {}: variant needs an mmn", c.name)));
            }
            if c.primitive.is_some() && c.mode.is_none() {
                return Err(CliError::Config(format!("capability {}: primitive needs a mode", c.name)));
            }
        }
        if !self.capabilities.iter().any(|c| self.mode_of(c) == Mode::Am) {
            return Err(CliError::Config("no AM capability can start a plan".into()));
        }
        Ok(())
    }

    pub fn mode_of(&self, c: &CapabilityConfig) -> Mode {
        match (&c.raw_stock, c.variant, c.mode) {
            (Some(_), _, _) => Mode::Am,
            (_, Some(v), _) => v.mode(),
            (_, _, Some(m)) => m,
            _ => Mode::Am,
        }
    }
}
