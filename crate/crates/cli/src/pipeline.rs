//! Stage orchestration with a content-addressed artifact cache.
//!
//! Every solid the pipeline computes is stored under `cache/` in the job
//! directory, named by a SHA-256 digest of everything it depends on. A
//! decomposition whose primitive list extends a cached one by a single
//! primitive is refined from it instead of recomputed.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use hybridplan::atoms::{decompose, Decomposition, Verdict};
use hybridplan::capability::{build_primitive, make_raw_stock, Capability, Provenance};
use hybridplan::solid::{read_solid, write_solid};
use hybridplan::{GridSpec, Method, Primitive, VoxelSolid};
use log::{debug, info};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{CapabilityConfig, JobConfig, Source};
use crate::error::{CliError, Result};

const CODES_MAGIC: &[u8; 4] = b"HPAC";
const CODES_VERSION: u32 = 1;

/// A configured job bound to its job directory.
pub struct Job {
    pub config: JobConfig,
    /// Directory relative paths in the config resolve against.
    pub base: PathBuf,
    pub dir: PathBuf,
}

/// Everything up to and including the atom test.
pub struct Analysis {
    pub target: VoxelSolid,
    pub primitives: Vec<Primitive>,
    pub decomposition: Decomposition,
    pub verdict: Verdict,
}

fn digest(v: &Value) -> String {
    // serde_json maps are sorted, so this is canonical
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::Io(path.to_path_buf(), e))
}

impl Job {
    pub fn new(config: JobConfig, base: PathBuf, dir: PathBuf) -> Result<Job> {
        io(&dir, fs::create_dir_all(dir.join("cache")))?;
        Ok(Job { config, base, dir })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.config.workspace
    }

    pub fn method(&self) -> Method {
        self.config.method.into()
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Identity of a source: the scene itself, or the file's bytes.
    fn source_key(&self, s: &Source) -> Result<Value> {
        Ok(match s {
            Source::Scene(scene) => serde_json::to_value(scene)?,
            Source::File(p) => {
                let path = self.base.join(p);
                let bytes = io(&path, fs::read(&path))?;
                json!({ "file_sha256": hex::encode(Sha256::digest(&bytes)) })
            }
        })
    }

    fn target_key(&self) -> Result<String> {
        Ok(digest(&json!({
            "artifact": "target",
            "workspace": serde_json::to_value(self.grid())?,
            "source": self.source_key(&self.config.target)?,
        })))
    }

    fn primitive_key(&self, id: usize, c: &CapabilityConfig, target_key: &str) -> Result<String> {
        let mut cap = serde_json::to_value(c)?;
        for field in ["mmn", "assembly", "design", "primitive"] {
            let src: Option<&Source> = match field {
                "mmn" => c.mmn.as_ref(),
                "assembly" => c.assembly.as_ref(),
                "design" => c.design.as_ref(),
                _ => c.primitive.as_ref(),
            };
            if let Some(s) = src {
                cap[field] = self.source_key(s)?;
            }
        }
        // name and rate do not change the region
        let obj = cap.as_object_mut().expect("capability is an object");
        obj.remove("name");
        obj.remove("rate");
        Ok(digest(&json!({
            "artifact": "primitive",
            "id": id,
            "workspace": serde_json::to_value(self.grid())?,
            "capability": cap,
            "target": if c.design.is_none() { Value::from(target_key) } else { Value::Null },
        })))
    }

    fn cache_file(&self, key: &str, ext: &str) -> PathBuf {
        self.dir.join("cache").join(format!("{key}.{ext}"))
    }

    fn cached_solid(&self, key: &str, make: impl FnOnce() -> Result<VoxelSolid>) -> Result<VoxelSolid> {
        let path = self.cache_file(key, "hpvx");
        if path.exists() {
            let f = io(&path, fs::File::open(&path))?;
            let s = read_solid(&mut BufReader::new(f)).map_err(|e| CliError::Cache(path.clone(), e.to_string()))?;
            if s.grid() == self.grid() {
                debug!("reusing {}", path.display());
                return Ok(s);
            }
        }
        let s = make()?;
        write_solid_file(&path, &s)?;
        Ok(s)
    }

    pub fn target(&self) -> Result<VoxelSolid> {
        let key = self.target_key()?;
        self.cached_solid(&key, || self.config.target.load(self.grid(), &self.base))
    }

    /// Primitives in config order, `P1` first.
    pub fn primitives(&self, target: &VoxelSolid) -> Result<Vec<Primitive>> {
        let target_key = self.target_key()?;
        let mut out = Vec::new();
        for (i, c) in self.config.capabilities.iter().enumerate() {
            let id = i + 1;
            let key = self.primitive_key(id, c, &target_key)?;
            let mut built = None;
            let solid = self.cached_solid(&key, || {
                let p = self.build_primitive(id, c, target)?;
                let s = p.solid.clone();
                built = Some(p);
                Ok(s)
            })?;
            let p = match built {
                Some(p) => p,
                None => self.describe_primitive(id, c, solid)?,
            };
            info!("P{id} {} ({}): {} voxels", p.name, p.mode, p.solid.count());
            out.push(p);
        }
        Ok(out)
    }

    fn build_primitive(&self, id: usize, c: &CapabilityConfig, target: &VoxelSolid) -> Result<Primitive> {
        let g = self.grid();
        if let Some(b) = &c.raw_stock {
            return Ok(make_raw_stock(id, &c.name, b.min, b.max, g, c.rate)?);
        }
        if let Some(src) = &c.primitive {
            let solid = src.load(g, &self.base)?;
            let mode = c.mode.expect("validated");
            return Ok(Primitive::imported(id, &c.name, mode, solid, c.rate, &source_label(src))?);
        }
        let variant = c.variant.expect("validated");
        let tool_grid = GridSpec::offset_lattice(c.tool_extent.unwrap_or(g.dims), g.spacing)?;
        let mmn = c.mmn.as_ref().expect("validated").load_tool(&tool_grid, &self.base)?;
        let assembly = match &c.assembly {
            Some(s) => s.load_tool(&tool_grid, &self.base)?,
            None => VoxelSolid::empty(tool_grid),
        };
        let design = match &c.design {
            Some(s) => s.load(g, &self.base)?,
            None => target.clone(),
        };
        let cap = Capability {
            name: c.name.clone(),
            variant,
            mmn,
            assembly,
            orientation: c.orientation,
            lambda: c.lambda,
            workspace: *g,
            rate: c.rate,
            turning: c.turning,
        };
        Ok(build_primitive(&cap, &design, id, self.method())?)
    }

    /// Rebuilds primitive metadata around a cached region.
    fn describe_primitive(&self, id: usize, c: &CapabilityConfig, solid: VoxelSolid) -> Result<Primitive> {
        let mode = self.config.mode_of(c);
        let mut p = Primitive::imported(id, &c.name, mode, solid, c.rate, "")?;
        if let Some(b) = &c.raw_stock {
            p.is_raw_stock = true;
            p.provenance = Provenance::RawStock { min: b.min, max: b.max };
        } else if let Some(src) = &c.primitive {
            p.provenance = Provenance::Imported { source: source_label(src) };
        } else {
            p.provenance = Provenance::Capability {
                name: c.name.clone(),
                variant: c.variant.expect("validated"),
                orientation: c.orientation,
                lambda: c.lambda,
            };
        }
        Ok(p)
    }

    fn decomposition_key(&self, keys: &[String]) -> String {
        digest(&json!({ "artifact": "decomposition", "primitives": keys }))
    }

    /// Decomposition of `primitives`, classified against `target`.
    pub fn decomposition(&self, target: &VoxelSolid, primitives: &[Primitive]) -> Result<Decomposition> {
        let target_key = self.target_key()?;
        let keys = self
            .config
            .capabilities
            .iter()
            .enumerate()
            .map(|(i, c)| self.primitive_key(i + 1, c, &target_key))
            .collect::<Result<Vec<_>>>()?;
        let path = self.cache_file(&self.decomposition_key(&keys), "hpac");
        let mut d = match read_codes(&path, primitives, self.grid())? {
            Some(d) => {
                debug!("reusing {}", path.display());
                d
            }
            None => {
                let n = primitives.len();
                let prefix = self.cache_file(&self.decomposition_key(&keys[..n - 1]), "hpac");
                let d = match read_codes(&prefix, &primitives[..n - 1], self.grid())? {
                    Some(base) if n > 1 => {
                        info!("refining cached decomposition with P{n}");
                        base.refine(&primitives[n - 1])?
                    }
                    _ => decompose(primitives, self.grid())?,
                };
                write_codes(&path, &d)?;
                d
            }
        };
        d.classify_target(target, self.config.tolerance_mm)?;
        Ok(d)
    }

    pub fn analyze(&self) -> Result<Analysis> {
        let target = self.target()?;
        let primitives = self.primitives(&target)?;
        let decomposition = self.decomposition(&target, &primitives)?;
        let verdict = decomposition.manufacturability_test()?;
        Ok(Analysis { target, primitives, decomposition, verdict })
    }
}

fn source_label(s: &Source) -> String {
    match s {
        Source::Scene(_) => "scene".into(),
        Source::File(p) => p.display().to_string(),
    }
}

pub fn write_solid_file(path: &Path, s: &VoxelSolid) -> Result<()> {
    if let Some(parent) = path.parent() {
        io(parent, fs::create_dir_all(parent))?;
    }
    let mut w = BufWriter::new(io(path, fs::File::create(path))?);
    write_solid(&mut w, s)?;
    io(path, w.flush())
}

fn write_codes(path: &Path, d: &Decomposition) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 8 * d.codes().len());
    buf.extend_from_slice(CODES_MAGIC);
    buf.extend_from_slice(&CODES_VERSION.to_le_bytes());
    buf.extend_from_slice(&(d.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(d.codes().len() as u64).to_le_bytes());
    for c in d.codes() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    io(path, fs::write(path, buf))
}

fn read_codes(path: &Path, primitives: &[Primitive], grid: &GridSpec) -> Result<Option<Decomposition>> {
    if primitives.is_empty() || !path.exists() {
        return Ok(None);
    }
    let bad = |m: &str| CliError::Cache(path.to_path_buf(), m.to_string());
    let mut bytes = Vec::new();
    io(path, fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)))?;
    if bytes.len() < 20 || &bytes[..4] != CODES_MAGIC {
        return Err(bad("not a code file"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    if word(4) != CODES_VERSION || word(8) as usize != primitives.len() {
        return Ok(None);
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    if bytes.len() != 20 + 8 * len {
        return Err(bad("truncated"));
    }
    let codes = bytes[20..].chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    match Decomposition::from_codes(primitives, grid, codes) {
        Ok(d) => Ok(Some(d)),
        Err(e) => Err(bad(&e.to_string())),
    }
}
