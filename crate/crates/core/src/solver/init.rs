use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::read_checkpoint;
use crate::diagnostics::{aniso_norm_sq, Derivative};
use crate::error::{LabError, Result};
use crate::spectral::{project_mode, Fft3, GridSpec, RealField, ShearSymbols, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// Random coefficients on |k| ≤ k_max, |ξ| ≤ xi_max, |η| ≤ eta_max.
    RandomBand { k_max: u32, xi_max: f64, eta_max: f64 },
    /// curl(ψ, ψ, ψ) of a Gaussian ψ of the given width centred in the box, modulated by
    /// 1 + cos x when the grid resolves x.
    LocalizedBubble { width: f64 },
    /// Velocity of a checkpoint on the same grid.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub profile: Profile,
    /// Target ‖(1+∂_z)u_in‖_{H⁵}.
    pub amplitude: f64,
    pub seed: u64,
}

impl InitialData {
    /// Divergence-free real velocity with ‖(1+∂_z)·‖_{H⁵} = amplitude.
    pub fn build(&self, grid: GridSpec) -> Result<SpectralField> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(LabError::config(format!("amplitude {} must be finite and ≥ 0", self.amplitude)));
        }
        let mut u = match &self.profile {
            Profile::RandomBand { k_max, xi_max, eta_max } => random_band(grid, *k_max, *xi_max, *eta_max, self.seed),
            Profile::LocalizedBubble { width } => bubble(grid, *width)?,
            Profile::File { path } => {
                let st = read_checkpoint(path)?;
                if st.u.grid != grid {
                    return Err(LabError::config("checkpoint grid differs from the configured grid"));
                }
                st.u
            }
        };
        if self.amplitude == 0.0 {
            return Ok(SpectralField::zeros(grid, 3));
        }
        let norm = aniso_norm_sq(&u, 5, Derivative::Good, &ShearSymbols::at(0.0)).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(LabError::config("initial profile has zero norm and cannot be normalised"));
        }
        u.scale(self.amplitude / norm);
        Ok(u)
    }
}

fn finish(mut u: SpectralField) -> SpectralField {
    let g = u.grid;
    let n = g.len();
    for i in 0..n {
        let r = project_mode(g.wavevector(i), [u.data[i], u.data[n + i], u.data[2 * n + i]]);
        for c in 0..3 {
            u.data[c * n + i] = r[c];
        }
    }
    u.dealias();
    u.symmetrize();
    // the mean flow is not a perturbation of Couette flow we want to seed
    for c in 0..3 {
        u.data[c * n] = Complex64::new(0.0, 0.0);
    }
    u
}

fn random_band(grid: GridSpec, k_max: u32, xi_max: f64, eta_max: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = SpectralField::zeros(grid, 3);
    let n = grid.len();
    for i in 0..n {
        let [k, xi, eta] = grid.wavevector(i);
        let inside = k.abs() <= k_max as f64 && xi.abs() <= xi_max && eta.abs() <= eta_max;
        // draw for every mode so the stream does not depend on the band
        let z: [Complex64; 3] = std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        if inside {
            for c in 0..3 {
                u.data[c * n + i] = z[c];
            }
        }
    }
    finish(u)
}

fn bubble(grid: GridSpec, width: f64) -> Result<SpectralField> {
    if !(width > 0.0) {
        return Err(LabError::config("bubble width must be positive"));
    }
    let (yc, zc) = (0.5 * grid.ly, 0.5 * grid.lz);
    let modulate = grid.nx > 1;
    let psi = RealField::from_fn(grid, 1, |_, x, y, z| {
        let r2 = (y - yc).powi(2) + if grid.nz > 1 { (z - zc).powi(2) } else { 0.0 };
        let g = (-0.5 * r2 / (width * width)).exp();
        if modulate {
            g * (1.0 + x.cos())
        } else {
            g
        }
    });
    let fft = Fft3::new(grid);
    let ph = fft.forward(&psi)?;
    let n = grid.len();
    let mut u = SpectralField::zeros(grid, 3);
    let i1 = Complex64::new(0.0, 1.0);
    for j in 0..n {
        let [k, xi, eta] = grid.wavevector(j);
        let p = ph.data[j];
        // curl of (ψ, ψ, ψ)
        u.data[j] = i1 * (xi - eta) * p;
        u.data[n + j] = i1 * (eta - k) * p;
        u.data[2 * n + j] = i1 * (k - xi) * p;
    }
    Ok(finish(u))
}
