//! Oscillatory-integral kernels behind the dispersive decay of the streamwise average.

mod bump;
mod polar;
mod torus;

use std::io::Write;
use std::path::Path;

pub use bump::{chi, eval_b, smooth_step, BTable, BumpProfile, RadialPower};
pub use polar::{
    eval_k_sup, eval_m_sup, theta_integral, FftKernel, KernelKind, KernelSample, PolarGrid, PolarKernel,
};
pub use torus::{torus_mode_decay, TorusBump, TorusKernel};

use crate::error::Result;

pub const KERNEL_CSV_HEADER: &str = "t,sup,error_estimate";

/// One row per sample: `t,sup,error_estimate`.
pub fn write_kernel_csv(path: &Path, samples: &[KernelSample]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{KERNEL_CSV_HEADER}")?;
    for s in samples {
        writeln!(f, "{:.17e},{:.17e},{:.17e}", s.t, s.sup, s.error_estimate)?;
    }
    f.flush()?;
    Ok(())
}
