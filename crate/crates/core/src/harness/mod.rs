//! Experiment orchestration: configuration, threshold bisection, and the six commands, each
//! writing into `<out>/runs/<id>/` together with a `manifest.json`.

mod commands;
mod config;
mod threshold;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use commands::pre_periodization_window;
pub use config::{parse_grid, Command, ExperimentConfig, Horizon};
pub use threshold::{
    amplification, at_least, bisect_threshold, classify_run, fit_alpha, threshold_sweep, AlphaFit, Label,
    NonlinearProbe, Probe, RunOutcome, SweepReport, Threshold, ThresholdResult, INVISCID_WEIGHT_NU, PROXY_NOTE,
};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ConfigError,
    Diverged,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub command: String,
    pub version: String,
    pub status: Status,
    pub exit_code: i32,
    pub error: Option<String>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub config: ExperimentConfig,
}

/// `id` if set, else `<command>-<first 12 hex digits of SHA-256 of the config>` (output location
/// excluded, so moving `out` keeps the id).
pub fn run_id(cfg: &ExperimentConfig) -> String {
    if let Some(id) = &cfg.id {
        return id.clone();
    }
    let mut c = cfg.clone();
    c.out = PathBuf::new();
    let text = serde_json::to_string(&c).unwrap_or_default();
    let h = Sha256::digest(text.as_bytes());
    let hex: String = h.iter().take(6).map(|b| format!("{b:02x}")).collect();
    format!("{}-{hex}", cfg.command.name())
}

pub fn run_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.join("runs").join(run_id(cfg))
}

fn status_of(e: &LabError) -> Status {
    match e.exit_code() {
        2 => Status::ConfigError,
        3 if matches!(e, LabError::Divergence { .. } | LabError::Cfl { .. }) => Status::Diverged,
        _ => Status::Failed,
    }
}

/// Run the configured command. The manifest is written whether or not the command succeeds;
/// its `exit_code` is 0 on success, 2 for configuration errors and 3 for numerical failure.
pub fn execute(cfg: &ExperimentConfig) -> Result<Manifest> {
    let dir = run_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    let mut produced = commands::Produced::default();
    let result = cfg.validate().and_then(|_| dispatch(cfg, &dir, &mut produced));
    let (status, exit_code, error) = match &result {
        Ok(()) => (Status::Ok, 0, None),
        Err(e) => (status_of(e), e.exit_code(), Some(e.to_string())),
    };
    produced.files.push("manifest.json".into());
    let manifest = Manifest {
        id: run_id(cfg),
        command: cfg.command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        status,
        exit_code,
        error,
        outputs: produced.files,
        notes: produced.notes,
        config: cfg.clone(),
    };
    write_manifest(&dir, &manifest)?;
    Ok(manifest)
}

pub fn write_manifest(dir: &Path, m: &Manifest) -> Result<()> {
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(m)? + "\n")?;
    Ok(())
}

fn dispatch(cfg: &ExperimentConfig, dir: &Path, out: &mut commands::Produced) -> Result<()> {
    match cfg.command {
        Command::LinearDisp => commands::linear_disp(cfg, dir, out),
        Command::LinearEd => commands::linear_ed(cfg, dir, out),
        Command::Kernels => commands::kernels(cfg, dir, out),
        Command::MultiplierAudit => commands::multiplier_audit(cfg, dir, out),
        Command::NonlinearRun => commands::nonlinear_run(cfg, dir, out),
        Command::ThresholdSweep => commands::threshold(cfg, dir, out),
    }
}
