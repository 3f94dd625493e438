//! Time-dependent Fourier multipliers φ, m₁, m₂, m₃ and the weights built from them.
//!
//! Every function takes laboratory wavenumbers (k, ξ, η) of the moving frame at time t; the
//! sheared wavenumber is ξ − kt.

mod audit;
mod m3;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use audit::{audit_bounds, audit_phi, audit_m3, AuditRecord};
pub use m3::{density as m3_density, japanese, japanese_tail, PhiProfile};

use crate::error::{LabError, Result};
use crate::spectral::{ShearSymbols, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierParams {
    pub beta0: f64,
    pub a_big: f64,
    pub a0: f64,
    pub delta2: f64,
    /// δ_{β₀} of the growth/dissipation balance.
    pub delta_beta0: f64,
    pub n_trunc: usize,
    pub quad_tol: f64,
}

impl Default for MultiplierParams {
    fn default() -> Self {
        MultiplierParams {
            beta0: 2.5,
            a_big: 16.0,
            a0: 0.3,
            delta2: 0.05,
            delta_beta0: 1.0,
            n_trunc: 64,
            quad_tol: 1e-9,
        }
    }
}

impl MultiplierParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::config(m.to_string()));
        if !(self.beta0 > 2.0) {
            return bad("beta0 must exceed 2");
        }
        if !(self.a_big > 0.0) {
            return bad("A must be positive");
        }
        if !(self.a0 > 0.0 && self.a0 < 2f64.sqrt() - 1.0) {
            return bad("a0 must lie in (0, √2 − 1)");
        }
        if !(self.delta2 > 0.0) {
            return bad("delta2 must be positive");
        }
        if !(self.delta_beta0 > 0.0 && self.delta_beta0 <= 1.0) {
            return bad("delta_beta0 must lie in (0, 1]");
        }
        if self.n_trunc < 8 {
            return bad("n_trunc must be at least 8");
        }
        if !(self.quad_tol > 0.0) {
            return bad("quad_tol must be positive");
        }
        Ok(())
    }
}

/// Multiplier evaluator for fixed parameters and viscosity.
#[derive(Clone, Debug)]
pub struct Multipliers {
    pub params: MultiplierParams,
    pub nu: f64,
    profile: PhiProfile,
    /// 2Σ_{j>N}⟨j⟩^{−1−a₀}: weight of the n-sum beyond the explicit range.
    tail_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    A,
    UpsilonA,
    A0,
    Upsilon0A0,
}

impl Multipliers {
    pub fn new(params: MultiplierParams, nu: f64) -> Result<Self> {
        params.validate()?;
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(LabError::config(format!("ν = {nu} must lie in (0, 1]")));
        }
        Ok(Multipliers {
            params,
            nu,
            profile: PhiProfile::new(params.a0),
            tail_mass: 2.0 * japanese_tail(params.n_trunc, params.a0),
        })
    }

    /// Same parameters at another viscosity, reusing the tabulated profile.
    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(LabError::config(format!("ν = {nu} must lie in (0, 1]")));
        }
        Ok(Multipliers { nu, ..self.clone() })
    }

    fn window(&self) -> f64 {
        self.params.beta0 * self.nu.powf(-1.0 / 3.0)
    }

    pub fn phi(&self, t: f64, k: f64, xi: f64, eta: f64) -> f64 {
        eval_phi(t, k, xi, eta, self.params.beta0, self.nu)
    }

    /// ∂ₜφ/φ.
    pub fn dlog_phi(&self, t: f64, k: f64, xi: f64, eta: f64) -> f64 {
        if k == 0.0 {
            return 0.0;
        }
        let c = xi / k;
        if t >= c && t <= c + self.window() {
            let xt = xi - k * t;
            -2.0 * k * xt / (k * k + xt * xt + eta * eta)
        } else {
            0.0
        }
    }

    pub fn m1(&self, t: f64, k: f64, xi: f64) -> f64 {
        eval_m1(t, k, xi, self.nu)
    }

    pub fn dlog_m1(&self, t: f64, k: f64, xi: f64) -> f64 {
        if k == 0.0 {
            return 0.0;
        }
        let nt = self.nu.cbrt();
        let d = xi / k - t;
        2.0 * nt / (1.0 + nt * nt * d * d)
    }

    pub fn m2(&self, t: f64, k: f64, xi: f64, eta: f64) -> f64 {
        eval_m2(t, k, xi, eta, self.params.a_big)
    }

    pub fn dlog_m2(&self, t: f64, k: f64, xi: f64, eta: f64) -> f64 {
        let xt = xi - k * t;
        let p = k * k + xt * xt + eta * eta;
        if p == 0.0 {
            0.0
        } else {
            self.params.a_big * k * k / p
        }
    }

    fn n_range(&self, k: f64) -> impl Iterator<Item = f64> {
        let k = k.round() as i64;
        let n = self.params.n_trunc as i64;
        (k - n..=k + n).filter(|&m| m != 0).map(|m| m as f64)
    }

    /// Weight the explicit sum leaves out: the tail mass minus the excluded n = 0 term when it
    /// falls outside the explicit window.
    fn tail_weight(&self, k: f64) -> f64 {
        if k.abs() > self.params.n_trunc as f64 {
            self.tail_mass - japanese(k).powf(-1.0 - self.params.a0)
        } else {
            self.tail_mass
        }
    }

    /// log m₃(t, k, ξ). Terms with |n − k| > N are modelled as Φ(t), i.e. with ξ/n → 0.
    pub fn log_m3(&self, t: f64, k: f64, xi: f64) -> f64 {
        let a = self.params.a0;
        let mut s = 0.0;
        for n in self.n_range(k) {
            s += japanese(k - n).powf(-1.0 - a) * self.profile.big_phi(t - xi / n);
        }
        s + self.tail_weight(k) * self.profile.big_phi(t)
    }

    pub fn m3(&self, t: f64, k: f64, xi: f64) -> f64 {
        self.log_m3(t, k, xi).exp()
    }

    /// ∂ₜm₃/m₃ = Σ_{n≠0} fⁿ(t, k, ξ), with the same tail model as [`Multipliers::log_m3`].
    pub fn dlog_m3(&self, t: f64, k: f64, xi: f64) -> f64 {
        let a = self.params.a0;
        let mut s = 0.0;
        for n in self.n_range(k) {
            s += japanese(k - n).powf(-1.0 - a) * self.profile.density(t - xi / n);
        }
        s + self.tail_weight(k) * self.profile.density(t)
    }

    /// Bound on |log m₃ − log m₃^{model}| from the ξ/n → 0 replacement in the tail.
    pub fn m3_tail_error(&self, k: f64, xi: f64) -> f64 {
        let a = self.params.a0;
        let n0 = self.params.n_trunc as i64;
        let ki = k.round() as i64;
        let cap = self.profile.total();
        let mut s = 0.0;
        let far = 20_000i64;
        for j in (n0 + 1)..=(n0 + far) {
            for n in [ki + j, ki - j] {
                if n == 0 {
                    continue;
                }
                s += japanese(j as f64).powf(-1.0 - a) * (xi.abs() / (n as f64).abs()).min(cap);
            }
        }
        let m = (n0 + far) as f64;
        s + 2.0 * xi.abs() / (m - k.abs()).max(1.0) * m.powf(-a) / a
    }

    pub fn profile(&self) -> &PhiProfile {
        &self.profile
    }

    /// m = m₁m₂m₃ in log form.
    pub fn log_m(&self, t: f64, k: f64, xi: f64, eta: f64) -> f64 {
        self.m1(t, k, xi).ln() + self.m2(t, k, xi, eta).ln() + self.log_m3(t, k, xi)
    }

    /// Symbol of a weight operator at one mode. For A₀ and Υ₀A₀ the mode must have k = 0.
    pub fn weight_symbol(&self, kind: WeightKind, t: f64, k: f64, xi: f64, eta: f64) -> f64 {
        match kind {
            WeightKind::A | WeightKind::UpsilonA => {
                let log_a = -0.5 * self.phi(t, k, xi, eta).ln() - self.log_m(t, k, xi, eta)
                    + self.params.delta2 * self.nu.cbrt() * t;
                let a = log_a.exp();
                if kind == WeightKind::A {
                    a
                } else {
                    a * self.dlog_m3(t, k, xi).sqrt()
                }
            }
            WeightKind::A0 | WeightKind::Upsilon0A0 => {
                let a0 = (-self.log_m3(t, 0.0, xi)).exp();
                if kind == WeightKind::A0 {
                    a0
                } else {
                    a0 * self.dlog_m3(t, 0.0, xi).sqrt()
                }
            }
        }
    }

    /// Apply a weight operator to a field whose stored wavenumbers refer to `sym`'s frame.
    pub fn weight(&self, f: &SpectralField, sym: &ShearSymbols, kind: WeightKind) -> Result<SpectralField> {
        if matches!(kind, WeightKind::A0 | WeightKind::Upsilon0A0) && f.has_streamwise_content(0.0) {
            return Err(LabError::contract("A₀ weights act on streamwise-averaged fields only"));
        }
        let state = MultiplierState::compute(self, f, sym, kind);
        let mut out = f.clone();
        let n = f.grid.len();
        for c in 0..f.ncomp {
            for (v, w) in out.data[c * n..(c + 1) * n].iter_mut().zip(&state.weight) {
                *v *= *w;
            }
        }
        Ok(out)
    }
}

/// Cached multiplier values on a grid at one time; m₃ depends on (k, ξ) only and is evaluated
/// once per column.
#[derive(Clone, Debug)]
pub struct MultiplierState {
    pub t: f64,
    pub weight: Vec<f64>,
    pub dlog_m3: Vec<f64>,
}

impl MultiplierState {
    pub fn compute(m: &Multipliers, f: &SpectralField, sym: &ShearSymbols, kind: WeightKind) -> Self {
        use rayon::prelude::*;
        let g = f.grid;
        let t = sym.t;
        let cols: Vec<(f64, f64)> = (0..g.nx * g.ny)
            .into_par_iter()
            .map(|col| {
                let (ix, iy) = (col / g.ny, col % g.ny);
                let k = g.x_index(ix) as f64;
                let xi = sym.good_xi(k, g.y_index(iy) as f64 * g.dxi());
                let kk = if matches!(kind, WeightKind::A0 | WeightKind::Upsilon0A0) { 0.0 } else { k };
                (m.log_m3(t, kk, xi), m.dlog_m3(t, kk, xi))
            })
            .collect();
        let kz = g.kz();
        let mut weight = vec![0.0; g.len()];
        let mut dl = vec![0.0; g.len()];
        weight
            .par_chunks_mut(g.nz)
            .zip(dl.par_chunks_mut(g.nz))
            .enumerate()
            .for_each(|(col, (w, d))| {
                let (ix, iy) = (col / g.ny, col % g.ny);
                let k = g.x_index(ix) as f64;
                let xi = sym.good_xi(k, g.y_index(iy) as f64 * g.dxi());
                let (lm3, dm3) = cols[col];
                for iz in 0..g.nz {
                    let eta = kz[iz];
                    let base = match kind {
                        WeightKind::A | WeightKind::UpsilonA => (-0.5 * m.phi(t, k, xi, eta).ln()
                            - m.m1(t, k, xi).ln()
                            - m.m2(t, k, xi, eta).ln()
                            - lm3
                            + m.params.delta2 * m.nu.cbrt() * t)
                            .exp(),
                        WeightKind::A0 | WeightKind::Upsilon0A0 => (-lm3).exp(),
                    };
                    w[iz] = match kind {
                        WeightKind::UpsilonA | WeightKind::Upsilon0A0 => base * dm3.sqrt(),
                        _ => base,
                    };
                    d[iz] = dm3;
                }
            });
        MultiplierState {
            t,
            weight,
            dlog_m3: dl,
        }
    }
}

/// φ by its closed form.
pub fn eval_phi(t: f64, k: f64, xi: f64, eta: f64, beta0: f64, nu: f64) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    let w = beta0 * nu.powf(-1.0 / 3.0);
    let c = xi / k;
    if c <= -w {
        return 1.0;
    }
    let (k2, e2) = (k * k, eta * eta);
    let frozen = k2 + (beta0 * k / nu.cbrt()).powi(2) + e2;
    if c <= 0.0 {
        let den = k2 + xi * xi + e2;
        if t <= c + w {
            let xt = xi - k * t;
            (k2 + xt * xt + e2) / den
        } else {
            frozen / den
        }
    } else if t <= c {
        1.0
    } else if t <= c + w {
        let xt = xi - k * t;
        (k2 + xt * xt + e2) / (k2 + e2)
    } else {
        frozen / (k2 + e2)
    }
}

/// m₁ by its explicit arctan solution.
pub fn eval_m1(t: f64, k: f64, xi: f64, nu: f64) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    let nt = nu.cbrt();
    let c = xi / k;
    (2.0 * (nt * (t - c)).atan() + 2.0 * (nt * c).atan()).exp()
}

/// m₂ = exp(A ∫₀ᵗ k²/p ds) with the arctan antiderivative in (ξ − ks)/√(k² + η²).
pub fn eval_m2(t: f64, k: f64, xi: f64, eta: f64, a_big: f64) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    let c = (k * k + eta * eta).sqrt();
    let arg = a_big * (k / c) * (((k * t - xi) / c).atan() - (-xi / c).atan());
    arg.exp()
}

/// Upper bounds of m₁, m₂ and φ.
pub fn m1_max() -> f64 {
    (2.0 * PI).exp()
}

pub fn m2_max(a_big: f64) -> f64 {
    (a_big * PI).exp()
}

pub fn phi_max(beta0: f64, nu: f64) -> f64 {
    1.0 + beta0 * beta0 * nu.powf(-2.0 / 3.0)
}
