//! Nonlinear solver for the perturbation velocity in the moving frame x = x₁ − ty.
//!
//! The evolved unknown is Û(t, k, ξ, η). With k̃ = (k, ξ − k(t − t_r), η), t_r the last remap
//! time, the equation per mode is
//!
//! ∂ₜÛ = P̃[−(∇̃·(U⊗U))^ − ((1−β)Û², βÛ¹, 0)] + k̃ kÛ²/|k̃|² − ν|k̃|²Û,
//!
//! where P̃ is the projection orthogonal to k̃ and the middle term is the part of the linear
//! pressure that keeps k̃(t)·Û = 0 while k̃ itself moves. Viscosity is removed exactly by the
//! integrating factor exp(−ν∫|k̃|²), and the rest is advanced by Lawson's RK4.

mod checkpoint;
mod extract;
mod init;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader, CHECKPOINT_VERSION};
pub use extract::{extract, velocity_from_qw_field, Extracted, What};
pub use init::{InitialData, Profile};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linear::{int_p, PhysicalParams};
use crate::spectral::{deterministic_sum, divergence_residual, project_mode, Fft3, GridSpec, ShearSymbols, SpectralField};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u: SpectralField,
    /// Time of the last remap; the stored ξ-grid is aligned with the sheared wavenumber there.
    pub last_remap: f64,
    pub params: PhysicalParams,
    /// ½‖U‖² removed by remaps (modes shifted off the grid).
    pub discarded_energy: f64,
    /// ∫⟨U¹, U²⟩ dt, the work of the lift-up term.
    pub production: f64,
    /// ∫ν‖∇̃U‖² dt.
    pub dissipation: f64,
    pub steps: u64,
    pub remaps: u64,
}

impl SolverState {
    pub fn new(u: SpectralField, params: PhysicalParams) -> Result<Self> {
        if u.ncomp != 3 {
            return Err(LabError::config("solver state needs a three-component velocity"));
        }
        Ok(SolverState {
            t: 0.0,
            u,
            last_remap: 0.0,
            params,
            discarded_energy: 0.0,
            production: 0.0,
            dissipation: 0.0,
            steps: 0,
            remaps: 0,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.u.grid
    }

    pub fn sym(&self) -> ShearSymbols {
        ShearSymbols::with_offset(self.t, self.last_remap)
    }

    /// ½‖U‖²_{L²}.
    pub fn energy(&self) -> f64 {
        0.5 * self.u.l2_sq()
    }

    /// ½‖U(t)‖² + ∫⟨U¹,U²⟩ + ∫ν‖∇̃U‖² + discarded; constant in exact arithmetic.
    pub fn budget(&self) -> f64 {
        self.energy() + self.production + self.dissipation + self.discarded_energy
    }

    pub fn divergence(&self) -> f64 {
        divergence_residual(&self.u, &self.sym())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub nonlinear: bool,
    /// Bound on dt·Σ_j max|effective advection_j|·k_j,max.
    pub cfl: f64,
    /// Remap every `n` ξ-grid steps of accumulated shear, i.e. every n·2π/L_y time units.
    pub remap_every: Option<u32>,
    /// Shrink dt on CFL rejection instead of failing.
    pub adaptive: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            nonlinear: true,
            cfl: 2.0,
            remap_every: None,
            adaptive: false,
        }
    }
}

impl SolverOptions {
    /// Remap roughly once per unit time.
    pub fn auto_remap(mut self, grid: &GridSpec) -> Self {
        self.remap_every = Some((1.0 / grid.dxi()).round().max(1.0) as u32);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub dt: f64,
    pub cfl_number: f64,
}

pub struct Solver {
    fft: Fft3,
    pub opts: SolverOptions,
    pub state: SolverState,
    kmax: [f64; 3],
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver").field("opts", &self.opts).field("t", &self.state.t).finish()
    }
}

impl Solver {
    pub fn new(state: SolverState, opts: SolverOptions) -> Result<Self> {
        let g = state.grid();
        g.validate()?;
        if !(opts.cfl > 0.0) {
            return Err(LabError::config("CFL bound must be positive"));
        }
        let c = g.cutoffs();
        let kmax = [c[0] as f64, c[1] as f64 * g.dxi(), c[2] as f64 * g.deta()];
        Ok(Solver {
            fft: Fft3::new(g),
            opts,
            state,
            kmax,
        })
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    /// Right-hand side at time `t` (integrating factor excluded). Returns the advective rate.
    fn rhs(&self, t: f64, u: &[Complex64], out: &mut [Complex64]) -> f64 {
        let g = self.state.grid();
        let n = g.len();
        let sym = ShearSymbols::with_offset(t, self.state.last_remap);
        let beta = self.state.params.beta;
        let (u1, rest) = u.split_at(n);
        let (u2, u3) = rest.split_at(n);
        let mut rate = 0.0;
        let mut s = Vec::new();
        if self.opts.nonlinear {
            let mut a = vec![ZERO; n];
            self.fft.backward_pair(u1, u2, &mut a);
            let mut b = u3.to_vec();
            self.fft.backward_inplace(&mut b, true);
            let tau = t - self.state.last_remap;
            let km = self.kmax;
            rate = a
                .par_iter()
                .zip(b.par_iter())
                .map(|(a, b)| (a.re - tau * a.im).abs() * km[0] + a.im.abs() * km[1] + b.re.abs() * km[2])
                .reduce(|| 0.0, f64::max);
            let mut p1 = vec![ZERO; n];
            let mut p2 = vec![ZERO; n];
            let mut p3 = vec![ZERO; n];
            p1.par_iter_mut()
                .zip(p2.par_iter_mut().zip(p3.par_iter_mut()))
                .zip(a.par_iter().zip(b.par_iter()))
                .for_each(|((p1, (p2, p3)), (a, b))| {
                    let (x, y, z) = (a.re, a.im, b.re);
                    *p1 = Complex64::new(x * x, x * y);
                    *p2 = Complex64::new(x * z, y * y);
                    *p3 = Complex64::new(y * z, z * z);
                });
            drop(a);
            drop(b);
            s = vec![vec![ZERO; n]; 6];
            let (s11, r) = s.split_at_mut(1);
            let (s12, r) = r.split_at_mut(1);
            let (s13, r) = r.split_at_mut(1);
            let (s22, r) = r.split_at_mut(1);
            let (s23, s33) = r.split_at_mut(1);
            self.fft.forward_pair(&mut p1, &mut s11[0], &mut s12[0]);
            self.fft.forward_pair(&mut p2, &mut s13[0], &mut s22[0]);
            self.fft.forward_pair(&mut p3, &mut s23[0], &mut s33[0]);
        }
        let (o1, rest) = out.split_at_mut(n);
        let (o2, o3) = rest.split_at_mut(n);
        let nonlinear = self.opts.nonlinear;
        o1.par_iter_mut()
            .zip(o2.par_iter_mut().zip(o3.par_iter_mut()))
            .enumerate()
            .for_each(|(i, (o1, (o2, o3)))| {
                let w = g.wavevector(i);
                let kt = sym.tilde(w);
                let p = kt[0] * kt[0] + kt[1] * kt[1] + kt[2] * kt[2];
                let mut f = [-(1.0 - beta) * u2[i], -beta * u1[i], ZERO];
                if nonlinear {
                    let ik = kt.map(|x| Complex64::new(0.0, x));
                    f[0] -= ik[0] * s[0][i] + ik[1] * s[1][i] + ik[2] * s[2][i];
                    f[1] -= ik[0] * s[1][i] + ik[1] * s[3][i] + ik[2] * s[4][i];
                    f[2] -= ik[0] * s[2][i] + ik[1] * s[4][i] + ik[2] * s[5][i];
                }
                let mut r = project_mode(kt, f);
                if p > 0.0 {
                    let c = u2[i] * (kt[0] / p);
                    r[0] += c * kt[0];
                    r[1] += c * kt[1];
                    r[2] += c * kt[2];
                }
                *o1 = r[0];
                *o2 = r[1];
                *o3 = r[2];
            });
        rate
    }

    /// ⟨U¹, U²⟩ and ν‖∇̃U‖² at time `t`.
    fn work_rates(&self, t: f64, u: &[Complex64]) -> (f64, f64) {
        let g = self.state.grid();
        let n = g.len();
        let vol = g.volume();
        let nu = self.state.params.nu;
        let sym = ShearSymbols::with_offset(t, self.state.last_remap);
        let idx: Vec<usize> = (0..n).collect();
        let prod = deterministic_sum(&idx, |&i| (u[i].conj() * u[n + i]).re);
        let diss = if nu == 0.0 {
            0.0
        } else {
            deterministic_sum(&idx, |&i| {
                sym.p(g.wavevector(i)) * (u[i].norm_sqr() + u[n + i].norm_sqr() + u[2 * n + i].norm_sqr())
            })
        };
        (vol * prod, vol * nu * diss)
    }

    /// One Lawson RK4 step. On error the state is left untouched.
    pub fn step(&mut self, dt: f64) -> Result<StepInfo> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(LabError::config(format!("time step {dt} must be positive")));
        }
        let g = self.state.grid();
        let n = g.len();
        let t = self.state.t;
        let t0 = self.state.last_remap;
        let nu = self.state.params.nu;
        let h = dt;
        let (e1, e2): (Vec<f64>, Vec<f64>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let [k, xi, eta] = g.wavevector(i);
                if nu == 0.0 {
                    return (1.0, 1.0);
                }
                let i0 = int_p(t - t0, k, xi, eta);
                let im = int_p(t + 0.5 * h - t0, k, xi, eta);
                let i1 = int_p(t + h - t0, k, xi, eta);
                ((-nu * (im - i0)).exp(), (-nu * (i1 - im)).exp())
            })
            .unzip();
        let un = &self.state.u.data;
        let len = 3 * n;
        let mut kn = vec![ZERO; len];
        let rate = self.rhs(t, un, &mut kn);
        let cfl_number = h * rate;
        if cfl_number > self.opts.cfl {
            return Err(LabError::Cfl {
                dt: h,
                suggested: 0.9 * self.opts.cfl / rate,
            });
        }
        let mut ua = vec![ZERO; len];
        ua.par_iter_mut().enumerate().for_each(|(j, v)| {
            *v = (un[j] + kn[j] * (0.5 * h)) * e1[j % n];
        });
        let mut ka = vec![ZERO; len];
        self.rhs(t + 0.5 * h, &ua, &mut ka);
        let mut ub = vec![ZERO; len];
        ub.par_iter_mut().enumerate().for_each(|(j, v)| {
            *v = un[j] * e1[j % n] + ka[j] * (0.5 * h);
        });
        let mut kb = vec![ZERO; len];
        self.rhs(t + 0.5 * h, &ub, &mut kb);
        let mut uc = vec![ZERO; len];
        uc.par_iter_mut().enumerate().for_each(|(j, v)| {
            let i = j % n;
            *v = un[j] * (e1[i] * e2[i]) + kb[j] * (h * e2[i]);
        });
        let mut kc = vec![ZERO; len];
        self.rhs(t + h, &uc, &mut kc);
        let mut next = vec![ZERO; len];
        next.par_iter_mut().enumerate().for_each(|(j, v)| {
            let i = j % n;
            *v = (un[j] + kn[j] * (h / 6.0)) * (e1[i] * e2[i]) + (ka[j] + kb[j]) * (h / 3.0 * e2[i]) + kc[j] * (h / 6.0);
        });
        let w0 = self.work_rates(t, un);
        let wa = self.work_rates(t + 0.5 * h, &ua);
        let wb = self.work_rates(t + 0.5 * h, &ub);
        let wc = self.work_rates(t + h, &uc);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Divergence { t });
        }
        let mut u = SpectralField {
            grid: g,
            ncomp: 3,
            data: next,
        };
        let sym = ShearSymbols::with_offset(t + h, t0);
        crate::spectral::leray_project_inplace(&mut u, &sym)?;
        u.symmetrize();
        let s = &mut self.state;
        s.u = u;
        s.t = t + h;
        s.production += h / 6.0 * (w0.0 + 2.0 * wa.0 + 2.0 * wb.0 + wc.0);
        s.dissipation += h / 6.0 * (w0.1 + 2.0 * wa.1 + 2.0 * wb.1 + wc.1);
        s.steps += 1;
        Ok(StepInfo { dt: h, cfl_number })
    }

    /// Re-align the ξ-grid with the sheared wavenumbers. The accumulated shear t − t_r must be an
    /// integer number of ξ-grid steps; modes shifted outside the retained band are discarded and
    /// their energy is recorded. Returns the energy discarded by this call.
    pub fn remap(&mut self) -> Result<f64> {
        let g = self.state.grid();
        let dxi = g.dxi();
        let s = (self.state.t - self.state.last_remap) / dxi;
        let shift = s.round();
        if (s - shift).abs() > 1e-9 * s.abs().max(1.0) {
            return Err(LabError::Scheduling(format!(
                "remap at accumulated shear {:.6} ξ-steps is not an integer shift",
                s
            )));
        }
        let shift = shift as i64;
        if shift == 0 {
            return Ok(0.0);
        }
        let n = g.len();
        let cut = g.cutoff(g.ny);
        let mut out = SpectralField::zeros(g, 3);
        let mut lost = 0.0;
        for i in 0..n {
            let (ix, iy, iz) = g.unflat(i);
            let k = g.x_index(ix);
            let m = g.y_index(iy);
            let m2 = m - k * shift;
            let vals = [self.state.u.data[i], self.state.u.data[n + i], self.state.u.data[2 * n + i]];
            if k == 0 {
                for c in 0..3 {
                    out.data[c * n + i] = vals[c];
                }
                continue;
            }
            if m2.abs() <= cut {
                let j = g.flat(ix, GridSpec::slot(g.ny, m2), iz);
                for c in 0..3 {
                    out.data[c * n + j] = vals[c];
                }
            } else {
                lost += vals.iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
        }
        let lost = 0.5 * g.volume() * lost;
        let s = &mut self.state;
        s.u = out;
        s.last_remap += shift as f64 * dxi;
        s.discarded_energy += lost;
        s.remaps += 1;
        Ok(lost)
    }

    pub fn next_remap(&self) -> Option<f64> {
        self.opts
            .remap_every
            .map(|m| self.state.last_remap + m as f64 * self.state.grid().dxi())
    }

    /// Step to exactly `t_end` with steps of at most `dt`, landing on every scheduled remap.
    pub fn advance_to(&mut self, t_end: f64, dt: f64) -> Result<()> {
        let mut h = dt;
        while self.state.t < t_end - 1e-12 * t_end.abs().max(1.0) {
            let mut target = t_end;
            let remap_due = self.next_remap().filter(|&r| r <= t_end + 1e-12);
            if let Some(r) = remap_due {
                target = r;
            }
            let left = target - self.state.t;
            let this = if left <= h * (1.0 + 1e-9) { left } else { h };
            match self.step(this) {
                Ok(_) => {
                    if self.opts.adaptive && h < dt {
                        h = (h * 1.2).min(dt);
                    }
                }
                Err(LabError::Cfl { suggested, .. }) if self.opts.adaptive => {
                    if suggested < 1e-10 * dt {
                        return Err(LabError::Divergence { t: self.state.t });
                    }
                    h = suggested;
                    continue;
                }
                Err(e) => return Err(e),
            }
            if let Some(r) = remap_due {
                if (self.state.t - r).abs() <= 1e-9 * r.abs().max(1.0) {
                    // snap to the grid-aligned time so the shift is exact
                    self.state.t = r;
                    self.remap()?;
                }
            }
        }
        Ok(())
    }
}
