use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PhysicalParams;
use crate::error::{LabError, Result};
use crate::spectral::{divergence_residual, riesz_symbol, Riesz, ShearSymbols, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// How [`zero_mode_linear_solve`] propagates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroModeRoute {
    /// Closed-form exponential of the per-mode symbol; valid for every β.
    Exponential,
    /// Through W± = u¹ ± υ₀ and the dispersive semigroups; needs B_β > 0.
    Symmetrized,
}

fn require_streamwise_average(f: &SpectralField) -> Result<()> {
    if f.has_streamwise_content(0.0) {
        return Err(LabError::contract("zero-mode propagators act on k = 0 fields only"));
    }
    Ok(())
}

/// Largest |ξû² + ηû³| relative to the largest |ρ û|; errors above `tol`.
pub fn check_solenoidal(u: &SpectralField, tol: f64) -> Result<f64> {
    if u.ncomp != 3 {
        return Err(LabError::contract("velocity needs three components"));
    }
    let g = u.grid;
    let n = g.len();
    let scale = (0..n)
        .map(|i| {
            let w = g.wavevector(i);
            let r = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            (0..3).map(|c| u.data[c * n + i].norm() * r).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let res = divergence_residual(u, &ShearSymbols::at(0.0));
    let rel = if scale > 0.0 { res / scale } else { 0.0 };
    if rel > tol {
        return Err(LabError::contract(format!(
            "velocity is not divergence free (relative residual {rel:.3e})"
        )));
    }
    Ok(rel)
}

/// e^{∓i√B_β t ℛ₃ + νtΔ} applied to a streamwise-averaged field.
pub fn zero_mode_semigroup(w: &SpectralField, t: f64, sign: Sign, params: &PhysicalParams) -> Result<SpectralField> {
    let b = params.b_beta();
    if b <= 0.0 {
        return Err(LabError::Regime(format!("dispersive semigroup needs B_β > 0, got {b}")));
    }
    require_streamwise_average(w)?;
    let sb = b.sqrt();
    let g = w.grid;
    let n = g.len();
    let mut out = w.clone();
    for c in 0..w.ncomp {
        out.data[c * n..(c + 1) * n]
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| {
                let [_, xi, eta] = g.wavevector(i);
                let rho2 = xi * xi + eta * eta;
                // ℛ₃ has symbol iη/ρ, so ∓√B ℛ₃ contributes the phase ∓√B η/ρ
                let phase = -sign.value() * sb * t * riesz_symbol(Riesz::R3, xi, eta).im;
                *v *= Complex64::from_polar((-params.nu * t * rho2).exp(), phase);
            });
    }
    Ok(out)
}

/// (c, S) with exp(tN) = c·I + S·N for a 2×2 N with N² = q·I.
fn cayley_hamilton(q: f64, t: f64) -> (f64, f64) {
    if q > 0.0 {
        let r = q.sqrt();
        ((r * t).cosh(), (r * t).sinh() / r)
    } else if q < 0.0 {
        let w = (-q).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    } else {
        (1.0, t)
    }
}

/// Real 3×3 propagator of the linearised streamwise-averaged system at mode (ξ, η):
///
/// u¹' = −(1−β)u² − νρ²u¹,  u²' = −β(η²/ρ²)u¹ − νρ²u²,  u³' = β(ξη/ρ²)u¹ − νρ²u³.
///
/// On solenoidal data it reduces to the pair (u¹, s), s = (ηu² − ξu³)/ρ, driven by
/// N = (η/ρ)[[0, −(1−β)], [−β, 0]] with N² = −B_β(η/ρ)², whose exponential is closed-form.
/// The component d = (ξu² + ηu³)/ρ only diffuses. The mean mode feels no pressure and
/// follows the same pair with s replaced by u² and η/ρ by 1.
pub fn mode_propagator(params: &PhysicalParams, xi: f64, eta: f64, t: f64) -> [[f64; 3]; 3] {
    let beta = params.beta;
    let rho2 = xi * xi + eta * eta;
    let mut m = [[0.0; 3]; 3];
    if rho2 == 0.0 {
        let (c, s) = cayley_hamilton(-params.b_beta(), t);
        m[0][0] = c;
        m[0][1] = -s * (1.0 - beta);
        m[1][0] = -s * beta;
        m[1][1] = c;
        m[2][2] = 1.0;
        return m;
    }
    let rho = rho2.sqrt();
    let a = eta / rho;
    let (c, s) = cayley_hamilton(-params.b_beta() * a * a, t);
    let heat = (-params.nu * rho2 * t).exp();
    // columns of the basis change: u² = (ηs + ξd)/ρ, u³ = (−ξs + ηd)/ρ
    let es = [eta / rho, -xi / rho];
    let ed = [xi / rho, eta / rho];
    // (u¹, s, d)(t) from (u¹, s, d)(0)
    let pair = [[c, -s * (1.0 - beta) * a, 0.0], [-s * beta * a, c, 0.0], [0.0, 0.0, 1.0]];
    // (u¹, u², u³) → (u¹, s, d)
    let into = [[1.0, 0.0, 0.0], [0.0, es[0], es[1]], [0.0, ed[0], ed[1]]];
    // (u¹, s, d) → (u¹, u², u³)
    let back = [[1.0, 0.0, 0.0], [0.0, es[0], ed[0]], [0.0, es[1], ed[1]]];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    v += back[i][p] * pair[p][q] * into[q][j];
                }
            }
            m[i][j] = v * heat;
        }
    }
    m
}

fn exponential_route(u: &SpectralField, t: f64, params: &PhysicalParams) -> SpectralField {
    let g = u.grid;
    let n = g.len();
    let mut out = u.clone();
    let (a, rest) = out.data.split_at_mut(n);
    let (b, c) = rest.split_at_mut(n);
    a.par_iter_mut()
        .zip(b.par_iter_mut().zip(c.par_iter_mut()))
        .enumerate()
        .for_each(|(i, (a, (b, c)))| {
            let [_, xi, eta] = g.wavevector(i);
            let m = mode_propagator(params, xi, eta, t);
            let v = [*a, *b, *c];
            let r: Vec<Complex64> = (0..3)
                .map(|r| v[0] * m[r][0] + v[1] * m[r][1] + v[2] * m[r][2])
                .collect();
            *a = r[0];
            *b = r[1];
            *c = r[2];
        });
    out
}

fn symmetrized_route(u: &SpectralField, t: f64, params: &PhysicalParams) -> Result<SpectralField> {
    let g = u.grid;
    let n = g.len();
    let beta = params.beta;
    let sb = params.b_beta().sqrt();
    let i = Complex64::new(0.0, 1.0);
    // υ₀ = ((β−1)/√B_β) ρ⁻¹ (iη û² − iξ û³)
    let mut ups = SpectralField::zeros(g, 1);
    for (j, v) in ups.data.iter_mut().enumerate() {
        let [_, xi, eta] = g.wavevector(j);
        let rho = xi.hypot(eta);
        if rho > 0.0 {
            *v = (beta - 1.0) / sb / rho * (i * eta * u.data[n + j] - i * xi * u.data[2 * n + j]);
        }
    }
    let u1 = u.component(0);
    let mut wp = u1.clone();
    wp.axpy(1.0, &ups);
    let mut wm = u1;
    wm.axpy(-1.0, &ups);
    let wp = zero_mode_semigroup(&wp, t, Sign::Plus, params)?;
    let wm = zero_mode_semigroup(&wm, t, Sign::Minus, params)?;
    let mut out = SpectralField::zeros(g, 3);
    for j in 0..n {
        let [_, xi, eta] = g.wavevector(j);
        let up = 0.5 * (wp.data[j] - wm.data[j]);
        out.data[j] = 0.5 * (wp.data[j] + wm.data[j]);
        out.data[n + j] = -(beta / sb) * riesz_symbol(Riesz::R3, xi, eta) * up;
        out.data[2 * n + j] = (beta / sb) * riesz_symbol(Riesz::R2, xi, eta) * up;
    }
    // the mean mode carries no Riesz information; it follows its own pressure-free pair
    let m = mode_propagator(params, 0.0, 0.0, t);
    let v = [u.data[0], u.data[n], u.data[2 * n]];
    for r in 0..3 {
        out.data[r * n] = v[0] * m[r][0] + v[1] * m[r][1] + v[2] * m[r][2];
    }
    Ok(out)
}

/// Linearised streamwise-averaged velocity at each requested time.
pub fn zero_mode_linear_solve(
    u0: &SpectralField,
    times: &[f64],
    params: &PhysicalParams,
    route: ZeroModeRoute,
) -> Result<Vec<SpectralField>> {
    require_streamwise_average(u0)?;
    check_solenoidal(u0, 1e-10)?;
    if route == ZeroModeRoute::Symmetrized && params.b_beta() <= 0.0 {
        return Err(LabError::Regime(format!(
            "symmetrized route needs B_β > 0, got {}",
            params.b_beta()
        )));
    }
    times
        .iter()
        .map(|&t| match route {
            ZeroModeRoute::Exponential => Ok(exponential_route(u0, t, params)),
            ZeroModeRoute::Symmetrized => symmetrized_route(u0, t, params),
        })
        .collect()
}
