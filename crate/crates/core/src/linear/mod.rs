//! Linear propagators: the streamwise-averaged system, the (Q, W) system of the non-zero modes,
//! and the wave-packet experiments built on them.

mod packets;
mod qw;
mod zero_mode;

pub use packets::{
    damping_trajectory, e_folding_time, enhanced_dissipation_scan, packet_norms, DampingReport,
    EdPoint, EdScan, Packet,
};
pub use qw::{qw_from_velocity, velocity_from_qw, QwState, QwSystem, QwTrajectory};
pub use zero_mode::{
    check_solenoidal, mode_propagator, zero_mode_linear_solve, zero_mode_semigroup, Sign, ZeroModeRoute,
};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Viscosity and rotation rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub nu: f64,
    pub beta: f64,
}

impl PhysicalParams {
    /// ν = 0 is accepted: the conservation and instability experiments are inviscid.
    pub fn new(nu: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(LabError::config(format!("viscosity ν = {nu} outside [0, 1]")));
        }
        if !beta.is_finite() {
            return Err(LabError::config(format!("rotation rate β = {beta} is not finite")));
        }
        Ok(PhysicalParams { nu, beta })
    }

    /// B_β = β(β − 1).
    pub fn b_beta(&self) -> f64 {
        self.beta * (self.beta - 1.0)
    }

    /// C_β = sgn(β)√B_β, defined for B_β > 0.
    pub fn c_beta(&self) -> Result<f64> {
        let b = self.b_beta();
        if b > 0.0 {
            Ok(self.beta.signum() * b.sqrt())
        } else {
            Err(LabError::Regime(format!(
                "C_β needs B_β > 0, got B_β = {b} (β = {})",
                self.beta
            )))
        }
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self.beta).classification
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Dispersive,
    Liftup,
    ExponentiallyUnstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub beta: f64,
    pub b_beta: f64,
    pub classification: Regime,
}

impl RegimeReport {
    /// Oscillation frequency √B_β|η|/ρ (dispersive) or growth rate √(−B_β)|η|/ρ (unstable) of
    /// the streamwise-averaged mode (ξ, η); zero in the lift-up case and at ρ = 0.
    pub fn mode_rate(&self, xi: f64, eta: f64) -> f64 {
        let rho = xi.hypot(eta);
        if rho == 0.0 {
            return 0.0;
        }
        self.b_beta.abs().sqrt() * eta.abs() / rho
    }
}

pub fn classify_regime(beta: f64) -> RegimeReport {
    let b = beta * (beta - 1.0);
    let classification = if b > 0.0 {
        Regime::Dispersive
    } else if b == 0.0 {
        Regime::Liftup
    } else {
        Regime::ExponentiallyUnstable
    };
    RegimeReport {
        beta,
        b_beta: b,
        classification,
    }
}

/// ∫₀ᵗ p(s) ds for p(s) = k² + (ξ − ks)² + η².
#[inline]
pub fn int_p(t: f64, k: f64, xi: f64, eta: f64) -> f64 {
    if k == 0.0 {
        return (xi * xi + eta * eta) * t;
    }
    // (ξ³ − (ξ − kt)³)/(3k) expanded to avoid cancellation when kt ≪ ξ
    let xt = xi - k * t;
    (k * k + eta * eta) * t + t * (xi * xi + xi * xt + xt * xt) / 3.0
}

/// exp(−ν∫_{t₀}^{t₁} p).
#[inline]
pub fn heat_factor(nu: f64, t0: f64, t1: f64, k: f64, xi: f64, eta: f64) -> f64 {
    if nu == 0.0 {
        return 1.0;
    }
    (-nu * (int_p(t1, k, xi, eta) - int_p(t0, k, xi, eta))).exp()
}
