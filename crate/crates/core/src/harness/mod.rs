//! Scenario-driven pipelines behind the `sqw` command line.

mod run;
mod scenario;
mod selftest;

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fock::Frame;

pub use run::{
    analytic_states, compare, gaussian_moments, grid_moments, run_compare, run_kernel, run_oracle, run_propagate, run_quasidist,
    AnalyticState, ComparisonRecord, ComparisonReport, MomentError, MOMENT_ORDERS, ORDER_CHECK_STEPS,
};
pub use scenario::{benchmark, GridConfig, InitialState, OracleConfig, Scenario, Tolerances, Units};
pub use selftest::{run_selftest, SelftestReport, SelftestRow, CHECK_NAMES};

/// Seed used for random draws unless `SQW_SEED` overrides it.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// `SQW_SEED` (decimal or `0x` hex) or [`DEFAULT_SEED`].
pub fn seed_from_env() -> Result<u64> {
    match std::env::var("SQW_SEED") {
        Ok(v) => parse_seed(&v),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn parse_seed(v: &str) -> Result<u64> {
    let v = v.trim();
    let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => v.parse(),
    };
    parsed.map_err(|_| Error::Parse(format!("SQW_SEED {v:?} is not an integer")))
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const TOLERANCE: i32 = 3;
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        exit::NUMERICAL
    } else {
        exit::CONFIG
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Frame of emitted grids. Comparisons always use the rotating frame.
    pub frame: Frame,
    pub verify: bool,
    /// Rerun the oracle at halved steps and report the convergence ratio.
    pub order_check: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("out"), frame: Frame::Rotating, verify: false, order_check: false }
    }
}

impl RunOptions {
    fn scenario_dir(&self, name: &str) -> Result<PathBuf> {
        let dir = self.out_dir.join(name);
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::InvalidParameter(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// File-name fragment for a time value.
fn time_tag(t: f64) -> String {
    format!("t{t:.6}")
}
