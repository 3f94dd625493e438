use serde::{Deserialize, Serialize};

use crate::spectral::{deterministic_sum, RealField, ShearSymbols, SpectralField};

/// Which gradient a Sobolev norm is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    /// (∂_{x₁}, ∂_y + t∂_{x₁}, ∂_z): the plain gradient of the moving frame, (k, ξ + k·offset, η).
    Good,
    /// (∂_x, ∂_y − t∂_x, ∂_z): the laboratory gradient, (k, ξ − k(t − offset), η).
    Tilde,
    /// The stored wavenumbers as they are; equals `Good` until the first remap.
    Plain,
}

#[inline]
pub fn symbol_sq(w: [f64; 3], d: Derivative, sym: &ShearSymbols) -> f64 {
    let xi = match d {
        Derivative::Good => sym.good_xi(w[0], w[1]),
        Derivative::Tilde => sym.tilde_xi(w[0], w[1]),
        Derivative::Plain => w[1],
    };
    w[0] * w[0] + xi * xi + w[2] * w[2]
}

/// Σ_{l ≤ s} r^{2l}.
#[inline]
pub fn sobolev_weight(r2: f64, s: u32) -> f64 {
    let mut acc = 1.0;
    let mut pow = 1.0;
    for _ in 0..s {
        pow *= r2;
        acc += pow;
    }
    acc
}

/// Σ_modes weight(w)·|f̂|² over all components, times the box volume.
pub fn weighted_sq(f: &SpectralField, weight: impl Fn([f64; 3]) -> f64 + Sync) -> f64 {
    let g = f.grid;
    let n = g.len();
    let idx: Vec<usize> = (0..n).collect();
    let s = deterministic_sum(&idx, |&i| {
        let w = weight(g.wavevector(i));
        if w == 0.0 {
            return 0.0;
        }
        (0..f.ncomp).map(|c| f.data[c * n + i].norm_sqr()).sum::<f64>() * w
    });
    g.volume() * s
}

/// ‖f‖²_{H^s} = Σ_{l ≤ s} ‖∇^l f‖², spectrally.
pub fn sobolev_norm_sq(f: &SpectralField, s: u32, d: Derivative, sym: &ShearSymbols) -> f64 {
    weighted_sq(f, |w| sobolev_weight(symbol_sq(w, d, sym), s))
}

pub fn sobolev_norm(f: &SpectralField, s: u32, d: Derivative, sym: &ShearSymbols) -> f64 {
    sobolev_norm_sq(f, s, d, sym).sqrt()
}

/// ‖(1+∂_z) f‖²_{H^s} read as ‖f‖²_{H^s} + ‖∂_z f‖²_{H^s}.
pub fn aniso_norm_sq(f: &SpectralField, s: u32, d: Derivative, sym: &ShearSymbols) -> f64 {
    weighted_sq(f, |w| (1.0 + w[2] * w[2]) * sobolev_weight(symbol_sq(w, d, sym), s))
}

/// ‖f‖²_{L²} of physical samples by the (spectrally exact) rectangle rule.
pub fn physical_l2_sq(f: &RealField) -> f64 {
    f.l2_sq()
}
