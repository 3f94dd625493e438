use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::bump::{BTable, BumpProfile, RadialPower};
use crate::error::{LabError, Result};
use crate::fit::{measure_rate, RateFit, RateModel};
use crate::quad::adaptive_over;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// ∫ e^{it sinθ} B(ρ cos(θ−φ)) dθ over the full circle.
    K,
    /// ∫ e^{it sinθ} cosθ B̃(ρ cos(θ−φ)) dθ with B̃ built from r^{2−a}.
    M { a: u8 },
}

impl KernelKind {
    fn power(self) -> Result<RadialPower> {
        match self {
            KernelKind::K | KernelKind::M { a: 1 } => Ok(RadialPower::One),
            KernelKind::M { a: 0 } => Ok(RadialPower::Two),
            KernelKind::M { a } => Err(LabError::config(format!("M kernel order a = {a} must be 0 or 1"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub t: f64,
    pub sup: f64,
    pub error_estimate: f64,
    pub rho: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub rhos: Vec<f64>,
    pub phis: Vec<f64>,
}

impl Default for PolarGrid {
    /// ρ ∈ [0, 50] in unit steps; 32 uniform angles plus clusters at ±2^{−j}, j = 3..14,
    /// around φ = 0 and π, where the large-t maximum of M sits.
    fn default() -> Self {
        let mut phis: Vec<f64> = (0..32).map(|j| 2.0 * PI * j as f64 / 32.0).collect();
        for j in 3..15 {
            let d = 2f64.powi(-j);
            for base in [0.0, PI] {
                phis.push(base + d);
                phis.push((base - d).rem_euclid(2.0 * PI));
            }
        }
        PolarGrid {
            rhos: (0..=50).map(f64::from).collect(),
            phis,
        }
    }
}

/// Evaluator for one kernel kind with its tabulated B.
#[derive(Clone, Debug)]
pub struct PolarKernel {
    pub kind: KernelKind,
    table: BTable,
    pub tol: f64,
}

impl PolarKernel {
    /// Table covers |z| ≤ rho_max.
    pub fn new(kind: KernelKind, rho_max: f64) -> Result<Self> {
        Ok(PolarKernel {
            kind,
            table: BTable::new(kind.power()?, rho_max.max(1.0), 0.005)?,
            tol: 1e-10,
        })
    }

    pub fn table(&self) -> &BTable {
        &self.table
    }

    /// Kernel value at (t, ρ, φ) and the quadrature error estimate.
    pub fn eval(&self, t: f64, rho: f64, phi: f64) -> Result<(Complex64, f64)> {
        if rho > self.table.z_max {
            return Err(LabError::config(format!("ρ = {rho} exceeds the tabulated range {}", self.table.z_max)));
        }
        let with_cos = matches!(self.kind, KernelKind::M { .. });
        let g = |th: f64| {
            let v = self.table.eval(rho * (th - phi).cos());
            if with_cos {
                v * th.cos()
            } else {
                v
            }
        };
        theta_integral(t, rho, (-PI, PI), g, self.tol)
    }

    /// sup over the grid of |kernel(t, ·, ·)|.
    pub fn sup(&self, t: f64, grid: &PolarGrid) -> Result<KernelSample> {
        if !(t >= 1.0) {
            return Err(LabError::config(format!("kernel sup needs t ≥ 1, got {t}")));
        }
        let pts: Vec<(f64, f64)> = grid.rhos.iter().flat_map(|&r| grid.phis.iter().map(move |&p| (r, p))).collect();
        let vals: Vec<(f64, f64, f64, f64)> = pts
            .par_iter()
            .map(|&(r, p)| self.eval(t, r, p).map(|(v, e)| (v.norm(), e, r, p)))
            .collect::<Result<_>>()?;
        let best = vals
            .iter()
            .copied()
            .fold((0.0, 0.0, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        let err = vals.iter().map(|v| v.1).fold(0.0, f64::max);
        Ok(KernelSample {
            t,
            sup: best.0,
            error_estimate: err,
            rho: best.2,
            phi: best.3,
        })
    }

    /// sup over the grid at each t and the power-law fit of log sup against log t.
    pub fn decay(&self, times: &[f64], grid: &PolarGrid) -> Result<(RateFit, Vec<KernelSample>)> {
        let samples: Vec<KernelSample> = times.iter().map(|&t| self.sup(t, grid)).collect::<Result<_>>()?;
        let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.sup)).collect();
        let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = times.iter().copied().fold(0.0, f64::max);
        Ok((measure_rate(&pts, (lo, hi), RateModel::PowerLaw)?, samples))
    }
}

/// ∫_lo^hi e^{it sinθ} g(θ) dθ for lo, hi ∈ [−π, π]. Panels are split at θ = ±π/2 ± t^{−1/2}
/// and sized to a bounded phase increment; `rho` is the frequency scale of g.
pub fn theta_integral(
    t: f64,
    rho: f64,
    (lo, hi): (f64, f64),
    g: impl Fn(f64) -> Complex64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    if !(lo < hi && lo >= -PI && hi <= PI) {
        return Err(LabError::config(format!("θ range [{lo}, {hi}] must lie inside [−π, π]")));
    }
    let delta = t.max(1.0).powf(-0.5).min(0.5);
    let h = PI / 2.0;
    let mut marks = vec![lo];
    marks.extend([-h - delta, -h + delta, h - delta, h + delta].into_iter().filter(|&m| m > lo && m < hi));
    marks.push(hi);
    let max_panel = 12.0 / (t.abs() + 4.0 * rho + 1.0);
    let mut breaks = vec![marks[0]];
    for w in marks.windows(2) {
        let n = ((w[1] - w[0]) / max_panel).ceil().max(1.0) as usize;
        for i in 1..=n {
            breaks.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
    }
    let f = |th: f64| Complex64::from_polar(1.0, t * th.sin()) * g(th);
    let r = adaptive_over(&f, &breaks, tol, 0.0, 20 * breaks.len() + 10_000)?;
    if !r.value.re.is_finite() || !r.value.im.is_finite() {
        return Err(LabError::Numerical {
            message: format!("θ-integral not finite at t={t}, ρ={rho}"),
            estimate: f64::INFINITY,
            tolerance: tol,
        });
    }
    Ok((r.value, r.error))
}

pub fn eval_k_sup(t: f64, grid: &PolarGrid) -> Result<KernelSample> {
    PolarKernel::new(KernelKind::K, grid_rho_max(grid))?.sup(t, grid)
}

pub fn eval_m_sup(t: f64, a: u8, grid: &PolarGrid) -> Result<KernelSample> {
    PolarKernel::new(KernelKind::M { a }, grid_rho_max(grid))?.sup(t, grid)
}

fn grid_rho_max(grid: &PolarGrid) -> f64 {
    grid.rhos.iter().copied().fold(0.0, f64::max)
}

/// The same kernel by a 2D inverse FFT of its Fourier multiplier sampled on an n×n lattice
/// of spacing 2π/l. Returns the physical grid values at x_j = j·l/n (j < n/2 is positive).
pub struct FftKernel {
    pub n: usize,
    pub l: f64,
    pub values: Vec<Complex64>,
}

impl FftKernel {
    pub fn new(kind: KernelKind, t: f64, n: usize, l: f64) -> Result<Self> {
        let a = match kind {
            KernelKind::K => None,
            KernelKind::M { a } => {
                kind.power()?;
                Some(a)
            }
        };
        if n % 2 != 0 || n < 8 {
            return Err(LabError::config("FFT kernel grid must be even and at least 8"));
        }
        let dk = 2.0 * PI / l;
        let bump = BumpProfile;
        let wn = |j: usize| if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * dk;
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for iy in 0..n {
            let xi = wn(iy);
            for iz in 0..n {
                let eta = wn(iz);
                let r = xi.hypot(eta);
                if r == 0.0 {
                    continue;
                }
                let amp = bump.a(r);
                if amp == 0.0 {
                    continue;
                }
                let extra = match a {
                    None => 1.0,
                    Some(a) => (xi / r) * r.powi(1 - a as i32),
                };
                buf[iy * n + iz] = Complex64::from_polar(amp * extra * dk * dk, t * eta / r);
            }
        }
        let mut planner = FftPlanner::new();
        let f = planner.plan_fft_inverse(n);
        // rows (z) then columns (y)
        for row in buf.chunks_mut(n) {
            f.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for iz in 0..n {
            for iy in 0..n {
                col[iy] = buf[iy * n + iz];
            }
            f.process(&mut col);
            for iy in 0..n {
                buf[iy * n + iz] = col[iy];
            }
        }
        Ok(FftKernel { n, l, values: buf })
    }

    /// Value at lattice point (jy, jz) with signed indices and its polar coordinates.
    pub fn at(&self, jy: i64, jz: i64) -> (Complex64, f64, f64) {
        let n = self.n as i64;
        let v = self.values[(jy.rem_euclid(n) * n + jz.rem_euclid(n)) as usize];
        let h = self.l / self.n as f64;
        let (y, z) = (jy as f64 * h, jz as f64 * h);
        (v, y.hypot(z), z.atan2(y))
    }
}
