use num_complex::Complex64;
use rayon::prelude::*;

use super::field::SpectralField;
use super::fft::Fft3;
use crate::error::{LabError, Result};

/// Sheared-frame symbols at time `t`.
///
/// `offset` is the time at which the stored ξ-grid was last aligned with the laboratory-frame
/// wavenumbers (non-zero only after a remap); the sheared wavenumber is `ξ − k(t − offset)`
/// and the good-derivative wavenumber is `ξ + k·offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearSymbols {
    pub t: f64,
    pub offset: f64,
}

impl ShearSymbols {
    pub fn at(t: f64) -> Self {
        ShearSymbols { t, offset: 0.0 }
    }

    pub fn with_offset(t: f64, offset: f64) -> Self {
        ShearSymbols { t, offset }
    }

    #[inline]
    pub fn tilde_xi(&self, k: f64, xi: f64) -> f64 {
        xi - k * (self.t - self.offset)
    }

    #[inline]
    pub fn good_xi(&self, k: f64, xi: f64) -> f64 {
        xi + k * self.offset
    }

    #[inline]
    pub fn tilde(&self, w: [f64; 3]) -> [f64; 3] {
        [w[0], self.tilde_xi(w[0], w[1]), w[2]]
    }

    /// p = k² + (ξ − kt)² + η².
    #[inline]
    pub fn p(&self, w: [f64; 3]) -> f64 {
        let xt = self.tilde_xi(w[0], w[1]);
        w[0] * w[0] + xt * xt + w[2] * w[2]
    }

    /// ∂ₜp = −2k(ξ − kt).
    #[inline]
    pub fn dp_dt(&self, w: [f64; 3]) -> f64 {
        -2.0 * w[0] * self.tilde_xi(w[0], w[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    /// ∂̃_y = ∂_y − t∂_x
    YTilde,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Riesz {
    /// iξ/ρ
    R2,
    /// iη/ρ
    R3,
    /// |η|/ρ
    R3Abs,
}

pub fn tilde_derivative(f: &SpectralField, axis: Axis, t: f64) -> SpectralField {
    tilde_derivative_in(f, axis, &ShearSymbols::at(t))
}

pub fn tilde_derivative_in(f: &SpectralField, axis: Axis, sym: &ShearSymbols) -> SpectralField {
    let g = f.grid;
    let n = g.len();
    let mut out = f.clone();
    for c in 0..f.ncomp {
        out.data[c * n..(c + 1) * n]
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| {
                let kt = sym.tilde(g.wavevector(i));
                let s = match axis {
                    Axis::X => kt[0],
                    Axis::YTilde => kt[1],
                    Axis::Z => kt[2],
                };
                *v *= Complex64::new(0.0, s);
            });
    }
    out
}

/// Riesz symbol of a streamwise-averaged mode; the (0,0) mode maps to zero.
#[inline]
pub fn riesz_symbol(which: Riesz, xi: f64, eta: f64) -> Complex64 {
    let rho = xi.hypot(eta);
    if rho == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    match which {
        Riesz::R2 => Complex64::new(0.0, xi / rho),
        Riesz::R3 => Complex64::new(0.0, eta / rho),
        Riesz::R3Abs => Complex64::new(eta.abs() / rho, 0.0),
    }
}

pub fn riesz(f: &SpectralField, which: Riesz) -> Result<SpectralField> {
    if f.has_streamwise_content(0.0) {
        return Err(LabError::contract(
            "Riesz transforms act on streamwise-averaged (k = 0) fields only",
        ));
    }
    let g = f.grid;
    let n = g.len();
    let mut out = f.clone();
    for c in 0..f.ncomp {
        for (i, v) in out.data[c * n..(c + 1) * n].iter_mut().enumerate() {
            let w = g.wavevector(i);
            *v *= riesz_symbol(which, w[1], w[2]);
        }
    }
    Ok(out)
}

/// Per-mode projection `u − k̃(k̃·u)/|k̃|²`; the (0,0,0) mode passes through.
#[inline]
pub fn project_mode(kt: [f64; 3], u: [Complex64; 3]) -> [Complex64; 3] {
    let p = kt[0] * kt[0] + kt[1] * kt[1] + kt[2] * kt[2];
    if p == 0.0 {
        return u;
    }
    let d = (u[0] * kt[0] + u[1] * kt[1] + u[2] * kt[2]) / p;
    [u[0] - d * kt[0], u[1] - d * kt[1], u[2] - d * kt[2]]
}

pub fn leray_project_tilde(u: &SpectralField, t: f64) -> Result<SpectralField> {
    leray_project_in(u, &ShearSymbols::at(t))
}

pub fn leray_project_in(u: &SpectralField, sym: &ShearSymbols) -> Result<SpectralField> {
    let mut out = u.clone();
    leray_project_inplace(&mut out, sym)?;
    Ok(out)
}

pub fn leray_project_inplace(u: &mut SpectralField, sym: &ShearSymbols) -> Result<()> {
    if u.ncomp != 3 {
        return Err(LabError::contract("projection needs a three-component field"));
    }
    let g = u.grid;
    let n = g.len();
    let (a, rest) = u.data.split_at_mut(n);
    let (b, c) = rest.split_at_mut(n);
    a.par_iter_mut()
        .zip(b.par_iter_mut().zip(c.par_iter_mut()))
        .enumerate()
        .for_each(|(i, (a, (b, c)))| {
            let r = project_mode(sym.tilde(g.wavevector(i)), [*a, *b, *c]);
            *a = r[0];
            *b = r[1];
            *c = r[2];
        });
    Ok(())
}

/// max over modes of |k̃·Û| (coefficient units).
pub fn divergence_residual(u: &SpectralField, sym: &ShearSymbols) -> f64 {
    let g = u.grid;
    let n = g.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let kt = sym.tilde(g.wavevector(i));
            (u.data[i] * kt[0] + u.data[n + i] * kt[1] + u.data[2 * n + i] * kt[2]).norm()
        })
        .reduce(|| 0.0, f64::max)
}

/// Dealiased pseudo-spectral product of two scalar fields.
pub fn dealiased_product(fft: &Fft3, a: &SpectralField, b: &SpectralField) -> SpectralField {
    let g = a.grid;
    let mut aa = a.clone();
    let mut bb = b.clone();
    aa.dealias();
    bb.dealias();
    let mut pa = aa.data;
    let mut pb = bb.data;
    fft.backward_inplace(&mut pa, true);
    fft.backward_inplace(&mut pb, true);
    for (x, y) in pa.iter_mut().zip(&pb) {
        *x *= y;
    }
    fft.forward_inplace(&mut pa, true);
    SpectralField {
        grid: g,
        ncomp: 1,
        data: pa,
    }
}
