use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolverState;
use crate::error::{LabError, Result};
use crate::linear::PhysicalParams;
use crate::spectral::{GridSpec, SpectralField};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"RCOUETTE";

/// Everything except the coefficients. Layout on disk: 8-byte magic, u32 version, u64 header
/// length, UTF-8 JSON header, then the coefficients as little-endian (re, im) f64 pairs in
/// component-major flat order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub schema_version: u32,
    pub grid: GridSpec,
    pub params: PhysicalParams,
    pub ncomp: usize,
    pub t: f64,
    pub last_remap: f64,
    pub discarded_energy: f64,
    pub production: f64,
    pub dissipation: f64,
    pub steps: u64,
    pub remaps: u64,
}

pub fn write_checkpoint(path: &Path, s: &SolverState) -> Result<()> {
    let h = CheckpointHeader {
        schema_version: CHECKPOINT_VERSION,
        grid: s.u.grid,
        params: s.params,
        ncomp: s.u.ncomp,
        t: s.t,
        last_remap: s.last_remap,
        discarded_energy: s.discarded_energy,
        production: s.production,
        dissipation: s.dissipation,
        steps: s.steps,
        remaps: s.remaps,
    };
    let json = serde_json::to_vec(&h)?;
    let mut buf = Vec::with_capacity(20 + json.len() + 16 * s.u.data.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    for c in &s.u.data {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<SolverState> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |m: &str| LabError::config(format!("{}: {m}", path.display()));
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported checkpoint version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(20..20 + hlen).ok_or_else(|| bad("truncated header"))?;
    let h: CheckpointHeader = serde_json::from_slice(body)?;
    h.grid.validate()?;
    let count = h.ncomp * h.grid.len();
    let raw = &bytes[20 + hlen..];
    if raw.len() != 16 * count {
        return Err(bad("coefficient block has the wrong length"));
    }
    let data = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Ok(SolverState {
        t: h.t,
        u: SpectralField {
            grid: h.grid,
            ncomp: h.ncomp,
            data,
        },
        last_remap: h.last_remap,
        params: h.params,
        discarded_energy: h.discarded_energy,
        production: h.production,
        dissipation: h.dissipation,
        steps: h.steps,
        remaps: h.remaps,
    })
}
