//! Experiment runners behind the command line. Each mode writes its tables
//! into the output directory and returns named checks; the run passes only
//! if every check does.

pub mod bounds;
pub mod export;
pub mod kernel;
pub mod rate;
pub mod taylor;
pub mod train;

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{Error, Result};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub mode: Mode,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["check", "result", "detail"]);
        for c in &self.checks {
            let detail = if c.detail.is_empty() { "-".to_string() } else { c.detail.replace(' ', "_") };
            t.push([c.name.replace(' ', "_"), (if c.passed { "PASS" } else { "FAIL" }).to_string(), detail]);
        }
        t
    }
}

/// Collects the files written by one run.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    /// Path for a new artifact, recorded in the report.
    pub fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        let p = self.path(name);
        table.write(&p)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    }
}

/// Runs `cfg.mode`, writing artifacts plus `config.toml` and `report.txt`
/// into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Report> {
    cfg.validate()?;
    let mut outputs = Outputs::create(out)?;
    outputs.text("config.toml", &cfg.to_toml())?;
    let checks = match cfg.mode {
        Mode::KernelVerify => kernel::run(&cfg.kernel, cfg.seed, &mut outputs)?,
        Mode::TaylorVerify => taylor::run(&cfg.taylor, &mut outputs)?,
        Mode::RateStudy => rate::run(&cfg.rate, cfg.seed, &mut outputs)?,
        Mode::TrainCompare => train::run(&cfg.train, cfg.seed, &mut outputs)?,
        Mode::ExportActivation => export::run(&cfg.export, &mut outputs)?,
        Mode::Bounds => bounds::run(&cfg.bounds, &mut outputs)?,
    };
    let mut report = Report { mode: cfg.mode, checks, files: Vec::new() };
    outputs.table("report.txt", &report.table())?;
    report.files = outputs.files;
    Ok(report)
}

/// `f64` formatted so that it parses back to the same value.
pub(crate) fn num(x: f64) -> String {
    format!("{x:e}")
}
