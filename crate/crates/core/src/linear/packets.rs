use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::qw::{QwState, QwSystem};
use crate::error::{LabError, Result};
use crate::fit::linreg;

/// Gaussian wave packet at a single streamwise wavenumber, sampled on a uniform (ξ, η) grid
/// spanning ±`span` standard deviations. Q and W start equal to the Gaussian envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub k: f64,
    pub xi_center: f64,
    pub eta_center: f64,
    pub sigma_xi: f64,
    pub sigma_eta: f64,
    pub n_xi: usize,
    pub n_eta: usize,
    pub span: f64,
}

impl Default for Packet {
    /// k = 1, centred on the critical time t₀ = ξ/k = 0.
    fn default() -> Self {
        Packet {
            k: 1.0,
            xi_center: 0.0,
            eta_center: 1.0,
            sigma_xi: 1.0,
            sigma_eta: 0.5,
            n_xi: 17,
            n_eta: 17,
            span: 3.0,
        }
    }
}

impl Packet {
    pub fn modes(&self) -> Vec<([f64; 3], f64)> {
        let axis = |c: f64, s: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                return vec![c];
            }
            (0..n)
                .map(|i| c + s * self.span * (2.0 * i as f64 / (n - 1) as f64 - 1.0))
                .collect()
        };
        let mut out = Vec::with_capacity(self.n_xi * self.n_eta);
        for &xi in &axis(self.xi_center, self.sigma_xi, self.n_xi) {
            for &eta in &axis(self.eta_center, self.sigma_eta, self.n_eta) {
                let g = (-0.5 * ((xi - self.xi_center) / self.sigma_xi).powi(2)
                    - 0.5 * ((eta - self.eta_center) / self.sigma_eta).powi(2))
                .exp();
                out.push(([self.k, xi, eta], g));
            }
        }
        out
    }

    fn propagate_all(&self, sys: &QwSystem, times: &[f64], dt: f64) -> Result<Vec<(([f64; 3], f64), Vec<QwState>)>> {
        if self.k == 0.0 {
            return Err(LabError::config("packets live at k ≠ 0"));
        }
        self.modes()
            .into_par_iter()
            .map(|(mode, g)| {
                let init = QwState {
                    q: Complex64::new(g, 0.0),
                    w: Complex64::new(g, 0.0),
                };
                let tr = sys.propagate(mode, init, 0.0, times, dt)?;
                Ok(((mode, g), tr.states))
            })
            .collect()
    }
}

/// ‖(Q, W)‖ of the packet (ℓ² over its modes) at each time.
pub fn packet_norms(sys: &QwSystem, packet: &Packet, times: &[f64], dt: f64) -> Result<Vec<f64>> {
    let runs = packet.propagate_all(sys, times, dt)?;
    Ok((0..times.len())
        .map(|j| {
            runs.iter()
                .map(|(_, s)| s[j].q.norm_sqr() + s[j].w.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

/// First time the norm falls to 1/e of its initial value, by log-linear interpolation.
pub fn e_folding_time(times: &[f64], norms: &[f64]) -> Result<f64> {
    let target = norms.first().copied().unwrap_or(0.0) / std::f64::consts::E;
    if !(target > 0.0) {
        return Err(LabError::Fit("degenerate trajectory: zero initial norm".into()));
    }
    for i in 1..norms.len() {
        if norms[i] <= target {
            let (a, b) = (norms[i - 1].ln(), norms[i].ln());
            let s = if a == b { 0.0 } else { (a - target.ln()) / (a - b) };
            return Ok(times[i - 1] + s * (times[i] - times[i - 1]));
        }
    }
    Err(LabError::Fit("norm never fell by a factor e within the horizon".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdPoint {
    pub nu: f64,
    pub horizon: f64,
    pub t_e: f64,
    /// T_e·ν^{1/3}
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdScan {
    pub c: f64,
    pub points: Vec<EdPoint>,
    /// Slope of log T_e against log ν.
    pub exponent: f64,
    pub r2: f64,
}

/// e-folding times of a packet over a ν grid with horizon 10ν^{−1/3}, and their scaling exponent.
pub fn enhanced_dissipation_scan(c: f64, nus: &[f64], packet: &Packet, samples: usize) -> Result<EdScan> {
    if nus.len() < 2 {
        return Err(LabError::config("enhanced-dissipation scan needs at least two viscosities"));
    }
    let mut points = Vec::with_capacity(nus.len());
    for &nu in nus {
        let horizon = 10.0 * nu.powf(-1.0 / 3.0);
        let times: Vec<f64> = (0..=samples).map(|i| horizon * i as f64 / samples as f64).collect();
        let sys = QwSystem::new(c, nu);
        let norms = packet_norms(&sys, packet, &times, horizon)?;
        let t_e = e_folding_time(&times, &norms)?;
        points.push(EdPoint {
            nu,
            horizon,
            t_e,
            scaled: t_e * nu.cbrt(),
        });
    }
    let x: Vec<f64> = points.iter().map(|p| p.nu.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.t_e.ln()).collect();
    let (exponent, _, r2) = linreg(&x, &y)?;
    Ok(EdScan { c, points, exponent, r2 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingReport {
    pub times: Vec<f64>,
    /// (1+t)‖U²(t)‖ / ‖U²(0)‖
    pub ratio: Vec<f64>,
    pub max_ratio: f64,
    pub t_max: f64,
}

/// Inviscid-damping quantity of a packet, with U² = −Q/p.
pub fn damping_trajectory(sys: &QwSystem, packet: &Packet, times: &[f64], dt: f64) -> Result<DampingReport> {
    let runs = packet.propagate_all(sys, times, dt)?;
    let u2 = |j: usize, t: f64| -> f64 {
        runs.iter()
            .map(|(([k, xi, eta], _), s)| {
                let p = k * k + (xi - k * t).powi(2) + eta * eta;
                s[j].q.norm_sqr() / (p * p)
            })
            .sum::<f64>()
            .sqrt()
    };
    let norms: Vec<f64> = times.iter().enumerate().map(|(j, &t)| u2(j, t)).collect();
    // normalise by the norm at t = 0, which need not be among the output times
    let init: f64 = packet
        .modes()
        .iter()
        .map(|([k, xi, eta], g)| g * g / (k * k + xi * xi + eta * eta).powi(2))
        .sum::<f64>()
        .sqrt();
    if !(init > 0.0) {
        return Err(LabError::Fit("degenerate packet with zero U²".into()));
    }
    let ratio: Vec<f64> = times.iter().zip(&norms).map(|(t, n)| (1.0 + t) * n / init).collect();
    let (imax, max_ratio) = ratio
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    Ok(DampingReport {
        times: times.to_vec(),
        t_max: times.get(imax).copied().unwrap_or(0.0),
        ratio,
        max_ratio,
    })
}
