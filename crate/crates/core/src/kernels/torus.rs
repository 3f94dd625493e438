use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::bump::smooth_step;
use super::polar::KernelSample;
use crate::error::{LabError, Result};
use crate::fit::{measure_rate, RateFit, RateModel};

/// Smooth bump ψ on [center − half_width, center + half_width].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusBump {
    pub center: f64,
    pub half_width: f64,
}

impl TorusBump {
    pub fn eval(&self, xi: f64) -> f64 {
        let s = (xi - self.center).abs() / self.half_width;
        if s >= 1.0 {
            0.0
        } else {
            // flat-topped C^∞ profile
            1.0 - smooth_step(2.0 * s - 1.0)
        }
    }
}

/// |∂_ξ(l/√(ξ²+l²))| = |l ξ|/(ξ²+l²)^{3/2}: the speed at which frequency ξ moves in y.
fn speed(l: f64, xi: f64) -> f64 {
    (l * xi).abs() / (xi * xi + l * l).powf(1.5)
}

/// I(y) = ∫ e^{iyξ − iγtl/√(ξ²+l²)} ψ(ξ) dξ for one t, by the trapezoid rule on the bump's
/// support (spectrally accurate for smooth compactly supported integrands).
pub struct TorusKernel {
    pub l: i64,
    pub gamma_t: f64,
    pub bump: TorusBump,
    xi0: f64,
    dxi: f64,
    samples: Vec<Complex64>,
}

impl TorusKernel {
    pub fn new(l: i64, gamma_t: f64, bump: TorusBump, refine: f64) -> Result<Self> {
        if l == 0 {
            return Err(LabError::config("torus kernel needs l ≠ 0"));
        }
        if !(bump.half_width > 0.0) {
            return Err(LabError::config("bump half width must be positive"));
        }
        let lf = l as f64;
        let (a, b) = (bump.center - bump.half_width, bump.center + bump.half_width);
        let vmax = (0..=200)
            .map(|i| speed(lf, a + (b - a) * i as f64 / 200.0))
            .fold(speed(lf, lf / 2f64.sqrt()), f64::max);
        // bandwidth of the integrand in y plus the bump's own
        let band = gamma_t * vmax + 200.0 / bump.half_width;
        let dxi = PI / (2.0 * band) / refine;
        let m = ((b - a) / dxi).ceil() as usize;
        let dxi = (b - a) / m as f64;
        let samples = (0..=m)
            .map(|i| {
                let xi = a + i as f64 * dxi;
                Complex64::from_polar(bump.eval(xi) * dxi, -gamma_t * lf / (xi * xi + lf * lf).sqrt())
            })
            .collect();
        Ok(TorusKernel {
            l,
            gamma_t,
            bump,
            xi0: a,
            dxi,
            samples,
        })
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let rot = Complex64::from_polar(1.0, y * self.dxi);
        let mut ph = Complex64::from_polar(1.0, y * self.xi0);
        for s in &self.samples {
            acc += s * ph;
            ph *= rot;
        }
        acc
    }

    /// |I| on a uniform y-lattice of spacing ≤ `dy` by one inverse FFT; returns (y, |I|) of
    /// the largest sample.
    pub fn lattice_max(&self, dy: f64) -> (f64, f64) {
        let n = ((2.0 * PI / (dy * self.dxi)).ceil() as usize).max(self.samples.len()).next_power_of_two();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[..self.samples.len()].copy_from_slice(&self.samples);
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let (mut best, mut at) = (0.0, 0usize);
        for (m, v) in buf.iter().enumerate() {
            if v.norm() > best {
                best = v.norm();
                at = m;
            }
        }
        let period = 2.0 * PI / self.dxi;
        let mut y = at as f64 * period / n as f64;
        if y > 0.5 * period {
            y -= period;
        }
        (y, best)
    }

    /// sup_y |I(y)|: lattice maximum refined by golden-section search on the direct sum.
    pub fn sup(&self) -> (f64, f64) {
        let dy = 0.1;
        let (y0, _) = self.lattice_max(dy);
        let f = |y: f64| self.eval(y).norm();
        let (mut a, mut b) = (y0 - dy, y0 + dy);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..40 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        let y = 0.5 * (a + b);
        (y, f(y).max(f(y0)))
    }
}

/// sup_y |I| at each γt and the fitted power-law exponent.
pub fn torus_mode_decay(l: i64, gamma: f64, times: &[f64], bump: TorusBump) -> Result<(RateFit, Vec<KernelSample>)> {
    let samples: Vec<KernelSample> = times
        .iter()
        .map(|&t| {
            let k = TorusKernel::new(l, gamma * t, bump, 1.0)?;
            let (y, s) = k.sup();
            let fine = TorusKernel::new(l, gamma * t, bump, 2.0)?;
            let err = (fine.eval(y).norm() - s).abs();
            Ok(KernelSample {
                t,
                sup: s,
                error_estimate: err,
                rho: y,
                phi: 0.0,
            })
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.sup)).collect();
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = times.iter().copied().fold(0.0, f64::max);
    Ok((measure_rate(&pts, (lo, hi), RateModel::PowerLaw)?, samples))
}
