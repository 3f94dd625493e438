//! Grids, transforms and sheared-frame operators.

mod fft;
mod field;
mod grid;
mod ops;

pub use fft::Fft3;
pub use field::{RealField, SpectralField};
pub use grid::{DomainKind, GridSpec};
pub use ops::{
    dealiased_product, divergence_residual, leray_project_in, leray_project_inplace,
    leray_project_tilde, project_mode, riesz, riesz_symbol, tilde_derivative, tilde_derivative_in,
    Axis, Riesz, ShearSymbols,
};

const CHUNK: usize = 4096;

/// Sum of `f(x)` with a fixed chunking, so results do not depend on the thread count.
pub fn deterministic_sum<T: Sync>(xs: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    use rayon::prelude::*;
    let partial: Vec<f64> = xs
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partial.iter().sum()
}
