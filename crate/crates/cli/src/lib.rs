//! Batch front end: voxelize, build primitives, decompose, check, plan,
//! verify and report, with artifacts kept in a job directory.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hybridplan::atoms::Verdict;
use hybridplan::atoms::MAX_ENUMERATED_WIDTH;
use hybridplan::planner::{enrich_and_match, search, Plan};
use log::info;

use crate::config::{JobConfig, MethodChoice};
use crate::error::{CliError, Result};
use crate::pipeline::{write_solid_file, Job};
use crate::report::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Stage {
    /// Voxelize the target.
    Voxelize,
    /// Build one primitive per capability.
    Primitive,
    /// Atomic decomposition and atom table.
    Decompose,
    /// Manufacturability test; exits 2 when an atom violates the tolerance.
    Check,
    /// k-best plan search.
    Plan,
    /// Replay plans on voxels; exits 3 on any mismatch.
    Verify,
    /// Every stage plus enrichment matching, in one report.
    Report,
}

/// Command-line overrides applied on top of the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub job_dir: Option<PathBuf>,
    pub k_best: Option<usize>,
    pub tolerance_mm: Option<f64>,
    pub method: Option<MethodChoice>,
    pub no_timestamp: bool,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_MANUFACTURABLE: u8 = 2;
pub const EXIT_VERIFY_FAILED: u8 = 3;

/// Default job directory: `<config stem>.job` next to the config.
pub fn default_job_dir(config: &Path) -> PathBuf {
    let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "job".into());
    config.with_file_name(format!("{stem}.job"))
}

pub fn open_job(config_path: &Path, o: &Overrides) -> Result<Job> {
    let mut cfg = JobConfig::load(config_path)?;
    if let Some(k) = o.k_best {
        cfg.planner.k_best = k;
    }
    if let Some(t) = o.tolerance_mm {
        cfg.tolerance_mm = t;
    }
    if let Some(m) = o.method {
        cfg.method = m;
    }
    cfg.validate()?;
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let dir = o.job_dir.clone().unwrap_or_else(|| default_job_dir(config_path));
    Job::new(cfg, base, dir)
}

struct Out<'a> {
    job: &'a Job,
    timestamp: Option<u64>,
}

impl Out<'_> {
    fn write(&self, name: &str, text: &str) -> Result<()> {
        let p = self.job.path(name);
        fs::write(&p, text).map_err(|e| CliError::Io(p, e))
    }

    fn json(&self, name: &str, r: &impl serde::Serialize) -> Result<()> {
        self.write(name, &to_json(r, self.timestamp)?)
    }
}

fn plans_for(job: &Job, a: &pipeline::Analysis) -> Result<Vec<Plan>> {
    Ok(search(&a.decomposition, &job.config.planner.search_options())?)
}

/// Runs one stage (and whatever it depends on). Returns the exit status.
pub fn run(stage: Stage, config_path: &Path, o: &Overrides) -> Result<u8> {
    let job = open_job(config_path, o)?;
    let timestamp = (!o.no_timestamp).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let out = Out { job: &job, timestamp };

    if stage == Stage::Voxelize {
        let t = job.target()?;
        write_solid_file(&job.path("target.hpvx"), &t)?;
        println!("target: {} voxels, {:.3} mm3", t.count(), t.measure());
        return Ok(EXIT_OK);
    }
    if stage == Stage::Primitive {
        let t = job.target()?;
        let prims = job.primitives(&t)?;
        for p in &prims {
            write_solid_file(&job.path(&format!("primitives/{}.hpvx", p.symbol())), &p.solid)?;
        }
        let rows = primitive_rows(&prims);
        out.json("primitives.json", &rows)?;
        print!("{}", primitives_text(&rows));
        return Ok(EXIT_OK);
    }

    let a = job.analyze()?;
    let d = &a.decomposition;
    match stage {
        Stage::Decompose => {
            out.write("atoms.csv", &d.to_csv()?)?;
            let r = decomposition_report(d);
            out.json("decomposition.json", &r)?;
            println!("{} nonempty atoms over {} primitives", r.nonempty_atoms, r.primitives);
            Ok(EXIT_OK)
        }
        Stage::Check => {
            let r = check_report(d, &a.verdict);
            out.json("check.json", &r)?;
            let text = check_text(&r);
            out.write("check.txt", &text)?;
            for e in d.split_report()? {
                write_solid_file(&job.path(&format!("splits/{}_in.hpvx", e.code)), &e.inside)?;
                write_solid_file(&job.path(&format!("splits/{}_out.hpvx", e.code)), &e.outside)?;
            }
            print!("{text}");
            Ok(if a.verdict.is_candidate() { EXIT_OK } else { EXIT_NOT_MANUFACTURABLE })
        }
        Stage::Plan => {
            let plans = match plans_for(&job, &a) {
                Err(CliError::Core(hybridplan::Error::NotManufacturable)) => {
                    eprint!("{}", check_text(&check_report(d, &a.verdict)));
                    return Ok(EXIT_NOT_MANUFACTURABLE);
                }
                r => r?,
            };
            let rows = plan_rows(&plans, &a.primitives);
            out.json("plans.json", &rows)?;
            let text = plans_text(&rows);
            out.write("plans.txt", &text)?;
            print!("{text}");
            Ok(EXIT_OK)
        }
        Stage::Verify => {
            let plans = plans_for(&job, &a)?;
            let r = verify_report(&plans, d)?;
            out.json("verify.json", &r)?;
            let text = verify_text(&r);
            out.write("verify.txt", &text)?;
            print!("{text}");
            Ok(if r.all_passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Stage::Report => {
            let (plans, planning_error) = match plans_for(&job, &a) {
                Ok(p) => (p, None),
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            let verify = if plans.is_empty() { None } else { Some(verify_report(&plans, d)?) };
            let enrichment = if planning_error.is_none() && d.n() <= MAX_ENUMERATED_WIDTH {
                let r =
                    enrich_and_match(d, job.config.planner.enrichment_budget, &job.config.planner.search_options())?;
                Some(enrichment_summary(&r))
            } else {
                None
            };
            let r = FullReport {
                primitives: primitive_rows(&a.primitives),
                decomposition: decomposition_report(d),
                check: check_report(d, &a.verdict),
                plans: plan_rows(&plans, &a.primitives),
                planning_error,
                verify,
                enrichment,
            };
            out.write("atoms.csv", &d.to_csv()?)?;
            out.json("report.json", &r)?;
            let text = full_text(&r);
            out.write("report.txt", &text)?;
            print!("{text}");
            info!("report written to {}", job.dir.display());
            let verified = r.verify.as_ref().is_none_or(|v| v.all_passed);
            Ok(if !verified {
                EXIT_VERIFY_FAILED
            } else if matches!(a.verdict, Verdict::NotManufacturable(_)) {
                EXIT_NOT_MANUFACTURABLE
            } else {
                EXIT_OK
            })
        }
        Stage::Voxelize | Stage::Primitive => unreachable!(),
    }
}
