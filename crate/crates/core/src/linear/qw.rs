use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{heat_factor, PhysicalParams};
use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QwState {
    pub q: Complex64,
    pub w: Complex64,
}

impl QwState {
    pub fn norm(&self) -> f64 {
        self.q.norm().hypot(self.w.norm())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QwTrajectory {
    /// (k, ξ, η) with ξ the wavenumber at t = 0.
    pub mode: [f64; 3],
    pub times: Vec<f64>,
    pub states: Vec<QwState>,
    pub steps: usize,
}

/// The linear (Q, W) system of one non-zero mode:
///
/// Q' = −C iη p^{−1/2} W − νpQ,  W' = −C iη p^{−1/2} Q + ½(p'/p) W − νpW.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QwSystem {
    pub c: f64,
    pub nu: f64,
    /// Local relative error target of the step-doubling control.
    pub tol: f64,
}

const MAX_STEPS: usize = 50_000_000;

impl QwSystem {
    pub fn new(c: f64, nu: f64) -> Self {
        QwSystem { c, nu, tol: 1e-10 }
    }

    /// C = C_β when B_β > 0; β = 0 decouples the pair (C = 0).
    pub fn from_params(params: &PhysicalParams) -> Result<Self> {
        let c = if params.beta == 0.0 { 0.0 } else { params.c_beta()? };
        Ok(QwSystem::new(c, params.nu))
    }

    /// Right-hand side after the heat factor has been divided out.
    fn rhs(&self, t: f64, [k, xi, eta]: [f64; 3], y: [Complex64; 2]) -> [Complex64; 2] {
        let xt = xi - k * t;
        let p = k * k + xt * xt + eta * eta;
        let g = Complex64::new(0.0, -self.c * eta / p.sqrt());
        let stretch = -k * xt / p;
        [g * y[1], g * y[0] + stretch * y[1]]
    }

    fn rk4(&self, t: f64, h: f64, mode: [f64; 3], y: [Complex64; 2]) -> [Complex64; 2] {
        let add = |y: [Complex64; 2], s: f64, k: [Complex64; 2]| [y[0] + k[0] * s, y[1] + k[1] * s];
        let k1 = self.rhs(t, mode, y);
        let k2 = self.rhs(t + 0.5 * h, mode, add(y, 0.5 * h, k1));
        let k3 = self.rhs(t + 0.5 * h, mode, add(y, 0.5 * h, k2));
        let k4 = self.rhs(t + h, mode, add(y, h, k3));
        [
            y[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
            y[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
        ]
    }

    /// Step cap from the fastest rate in the system: the coupling |Cη|p^{−1/2} and the
    /// stretching |k(ξ−kt)|/p ≤ ½.
    fn cap(&self, t: f64, [k, xi, eta]: [f64; 3], dt: f64) -> f64 {
        let xt = xi - k * t;
        let p = k * k + xt * xt + eta * eta;
        let rate = (self.c * eta).abs() / p.sqrt() + (k * xt).abs() / p;
        dt.min(0.1 / rate.max(1.0))
    }

    /// Propagate from `init` at `t0` through the increasing output `times` (all ≥ t0).
    pub fn propagate(&self, mode: [f64; 3], init: QwState, t0: f64, times: &[f64], dt: f64) -> Result<QwTrajectory> {
        let [k, xi, eta] = mode;
        if k == 0.0 {
            return Err(LabError::contract("the (Q, W) system is posed on k ≠ 0 modes"));
        }
        if !(dt > 0.0) {
            return Err(LabError::config(format!("time step {dt} must be positive")));
        }
        let mut y = [init.q, init.w];
        let mut t = t0;
        let mut h = self.cap(t, mode, dt);
        let mut steps = 0usize;
        let mut states = Vec::with_capacity(times.len());
        for &target in times {
            if target < t - 1e-14 * t.abs().max(1.0) {
                return Err(LabError::config("output times must be increasing and not before t0"));
            }
            while t < target {
                let cap = self.cap(t, mode, dt);
                h = h.min(cap);
                let last = target - t <= h * (1.0 + 1e-12);
                if last {
                    h = target - t;
                }
                let one = self.rk4(t, h, mode, y);
                let half = self.rk4(t, 0.5 * h, mode, y);
                let two = self.rk4(t + 0.5 * h, 0.5 * h, mode, half);
                let diff = (two[0] - one[0]).norm().max((two[1] - one[1]).norm()) / 15.0;
                let size = two[0].norm().max(two[1].norm()).max(y[0].norm()).max(y[1].norm());
                let allowed = self.tol * size;
                steps += 1;
                if steps > MAX_STEPS {
                    return Err(LabError::Numerical {
                        message: format!("(Q, W) integration of mode {mode:?} exceeded the step budget"),
                        estimate: diff,
                        tolerance: allowed,
                    });
                }
                if diff <= allowed || size == 0.0 {
                    y = [two[0] + (two[0] - one[0]) / 15.0, two[1] + (two[1] - one[1]) / 15.0];
                    t = if last { target } else { t + h };
                    let grow = if diff > 0.0 { 0.9 * (allowed / diff).powf(0.2) } else { 5.0 };
                    h *= grow.clamp(0.2, 5.0);
                } else {
                    h *= (0.9 * (allowed / diff).powf(0.2)).clamp(0.1, 0.9);
                }
                if !y[0].is_finite() || !y[1].is_finite() {
                    return Err(LabError::Divergence { t });
                }
            }
            let e = heat_factor(self.nu, t0, target, k, xi, eta);
            states.push(QwState {
                q: y[0] * e,
                w: y[1] * e,
            });
        }
        Ok(QwTrajectory {
            mode,
            times: times.to_vec(),
            states,
            steps,
        })
    }
}

fn stretch_factor(beta: f64) -> Result<f64> {
    let r = beta / (beta - 1.0);
    if r > 0.0 && r.is_finite() {
        Ok(r.sqrt())
    } else {
        Err(LabError::Regime(format!("W is defined for B_β > 0 only (β = {beta})")))
    }
}

/// (Q̂, Ŵ) of one non-zero mode of the moving-frame velocity; `xt` is the sheared wavenumber.
///
/// Q = Δ̃U², W = √(β/(β−1)) |∇̃| (∂_zU¹ − ∂_xU³).
pub fn qw_from_velocity(beta: f64, k: f64, xt: f64, eta: f64, u: [Complex64; 3]) -> Result<QwState> {
    let r = stretch_factor(beta)?;
    let p = k * k + xt * xt + eta * eta;
    let i = Complex64::new(0.0, 1.0);
    Ok(QwState {
        q: -p * u[1],
        w: r * p.sqrt() * (i * eta * u[0] - i * k * u[2]),
    })
}

/// Inverse of [`qw_from_velocity`] for divergence-free data with k ≠ 0.
pub fn velocity_from_qw(beta: f64, k: f64, xt: f64, eta: f64, s: QwState) -> Result<[Complex64; 3]> {
    if k == 0.0 {
        return Err(LabError::contract("velocity recovery from (Q, W) needs k ≠ 0"));
    }
    let r = 1.0 / stretch_factor(beta)?;
    let p = k * k + xt * xt + eta * eta;
    let h = k * k + eta * eta;
    let i = Complex64::new(0.0, 1.0);
    let ws = s.w * (r / p.sqrt());
    Ok([
        -(i * eta * ws - k * xt / p * s.q) / h,
        -s.q / p,
        (i * k * ws + xt * eta / p * s.q) / h,
    ])
}
