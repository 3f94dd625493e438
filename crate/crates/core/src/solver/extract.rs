use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolverState;
use crate::error::{LabError, Result};
use crate::linear::{qw_from_velocity, velocity_from_qw, QwState};
use crate::spectral::{ShearSymbols, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum What {
    /// Streamwise average u₀ (three components, k = 0 only).
    U0,
    /// U_≠ (three components, k ≠ 0 only).
    UNeq,
    /// Q = Δ̃U² on k ≠ 0.
    Q,
    /// W = √(β/(β−1))|∇̃|(∂_zU¹ − ∂_xU³) on k ≠ 0.
    W,
    /// (W⁺, W⁻) = u₀¹ ± υ₀ as two components.
    Wpm,
    /// υ₀ = ((β−1)/√B_β) ρ⁻¹(iη û₀² − iξ û₀³).
    Upsilon0,
}

pub type Extracted = SpectralField;

pub fn extract(state: &SolverState, what: What) -> Result<Extracted> {
    let u = &state.u;
    let g = u.grid;
    let n = g.len();
    let sym = state.sym();
    let beta = state.params.beta;
    match what {
        What::U0 => Ok(u.zero_mode()),
        What::UNeq => Ok(u.nonzero_modes()),
        What::Q | What::W => {
            if what == What::W && state.params.b_beta() <= 0.0 {
                return Err(LabError::Regime(format!("W needs B_β > 0 (β = {beta})")));
            }
            let mut out = SpectralField::zeros(g, 1);
            for i in 0..n {
                let [k, xi, eta] = g.wavevector(i);
                if k == 0.0 {
                    continue;
                }
                let xt = sym.tilde_xi(k, xi);
                let v = [u.data[i], u.data[n + i], u.data[2 * n + i]];
                out.data[i] = match what {
                    What::Q => -(k * k + xt * xt + eta * eta) * v[1],
                    _ => qw_from_velocity(beta, k, xt, eta, v)?.w,
                };
            }
            Ok(out)
        }
        What::Upsilon0 | What::Wpm => {
            let b = state.params.b_beta();
            if b <= 0.0 {
                return Err(LabError::Regime(format!("υ₀ and W± need B_β > 0, got {b}")));
            }
            let c = (beta - 1.0) / b.sqrt();
            let i1 = Complex64::new(0.0, 1.0);
            let mut ups = SpectralField::zeros(g, 1);
            for j in 0..n {
                let [k, xi, eta] = g.wavevector(j);
                let rho = xi.hypot(eta);
                if k != 0.0 || rho == 0.0 {
                    continue;
                }
                ups.data[j] = c / rho * (i1 * eta * u.data[n + j] - i1 * xi * u.data[2 * n + j]);
            }
            if what == What::Upsilon0 {
                return Ok(ups);
            }
            let u1 = u.zero_mode().component(0);
            let mut out = SpectralField::zeros(g, 2);
            for j in 0..n {
                out.data[j] = u1.data[j] + ups.data[j];
                out.data[n + j] = u1.data[j] - ups.data[j];
            }
            Ok(out)
        }
    }
}

/// U_≠ recovered from (Q, W) mode by mode.
pub fn velocity_from_qw_field(q: &SpectralField, w: &SpectralField, sym: &ShearSymbols, beta: f64) -> Result<SpectralField> {
    q.check_same(w)?;
    let g = q.grid;
    let n = g.len();
    let mut out = SpectralField::zeros(g, 3);
    for i in 0..n {
        let [k, xi, eta] = g.wavevector(i);
        if k == 0.0 {
            continue;
        }
        let v = velocity_from_qw(beta, k, sym.tilde_xi(k, xi), eta, QwState { q: q.data[i], w: w.data[i] })?;
        for c in 0..3 {
            out.data[c * n + i] = v[c];
        }
    }
    Ok(out)
}
