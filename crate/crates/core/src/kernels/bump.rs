use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quad::adaptive_over;

/// C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// 1 on [0, 1], 0 on [2, ∞).
fn low(r: f64) -> f64 {
    1.0 - smooth_step(r - 1.0)
}

/// Dyadic piece χ_j(r) = χ₀(2^{−j} r) with χ₀(r) = low(r) − low(2r), supported on
/// [2^{j−1}, 2^{j+1}]. The χ_j telescope to 1 on r > 0.
pub fn chi(j: i32, r: f64) -> f64 {
    let s = 2f64.powi(-j) * r;
    low(s) - low(2.0 * s)
}

/// A(r) = χ₋₁ + χ₀ + χ₁: equal to 1 on [1/2, 2], zero outside [1/4, 4].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile;

impl BumpProfile {
    pub const SUPPORT: (f64, f64) = (0.25, 4.0);

    pub fn a(&self, r: f64) -> f64 {
        low(0.5 * r) - low(4.0 * r)
    }
}

/// Radial power of the B-type transforms: `One` gives B, `Two` gives B̃ for a = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialPower {
    One,
    Two,
}

impl RadialPower {
    fn exp(self) -> i32 {
        match self {
            RadialPower::One => 1,
            RadialPower::Two => 2,
        }
    }
}

fn b_integral(z: f64, p: i32, tol: f64) -> Result<Complex64> {
    let (a, b) = BumpProfile::SUPPORT;
    let bump = BumpProfile;
    let n = ((z.abs() * (b - a) / 4.0).ceil() as usize).max(4);
    let breaks: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let f = |r: f64| Complex64::from_polar(bump.a(r) * r.powi(p), r * z);
    Ok(adaptive_over(&f, &breaks, tol, 0.0, 200_000)?.value)
}

/// ∫₀^∞ e^{irz} A(r) r^p dr by adaptive quadrature to 1e-10.
pub fn eval_b(z: f64, power: RadialPower) -> Result<Complex64> {
    b_integral(z, power.exp(), 1e-10)
}

/// Cubic Hermite table of B on [0, z_max]; negative arguments use B(−z) = conj B(z).
#[derive(Clone, Debug)]
pub struct BTable {
    pub power: RadialPower,
    pub z_max: f64,
    h: f64,
    val: Vec<Complex64>,
    der: Vec<Complex64>,
}

impl BTable {
    pub fn new(power: RadialPower, z_max: f64, h: f64) -> Result<Self> {
        use rayon::prelude::*;
        if !(z_max > 0.0 && h > 0.0 && h < z_max) {
            return Err(LabError::config("B table needs 0 < h < z_max"));
        }
        let n = (z_max / h).ceil() as usize;
        let h = z_max / n as f64;
        let p = power.exp();
        let rows: Vec<(Complex64, Complex64)> = (0..=n)
            .into_par_iter()
            .map(|i| {
                let z = i as f64 * h;
                // B'(z) = i ∫ e^{irz} A r^{p+1} dr
                Ok((b_integral(z, p, 1e-12)?, Complex64::i() * b_integral(z, p + 1, 1e-12)?))
            })
            .collect::<Result<_>>()?;
        let (val, der) = rows.into_iter().unzip();
        Ok(BTable {
            power,
            z_max,
            h,
            val,
            der,
        })
    }

    pub fn eval(&self, z: f64) -> Complex64 {
        let (v, _) = self.eval_with_derivative(z);
        v
    }

    pub fn eval_with_derivative(&self, z: f64) -> (Complex64, Complex64) {
        let neg = z < 0.0;
        let x = z.abs();
        if x > self.z_max {
            // outside the table is a caller bug; poison the result so it cannot pass silently
            let n = Complex64::new(f64::NAN, f64::NAN);
            return (n, n);
        }
        let s = x / self.h;
        let i = (s.floor() as usize).min(self.val.len() - 2);
        let u = s - i as f64;
        let (y0, y1) = (self.val[i], self.val[i + 1]);
        let (d0, d1) = (self.der[i] * self.h, self.der[i + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        let v = y0 * (2.0 * u3 - 3.0 * u2 + 1.0) + d0 * (u3 - 2.0 * u2 + u) + y1 * (-2.0 * u3 + 3.0 * u2) + d1 * (u3 - u2);
        let dv = (y0 * (6.0 * u2 - 6.0 * u) + d0 * (3.0 * u2 - 4.0 * u + 1.0) + y1 * (-6.0 * u2 + 6.0 * u) + d1 * (3.0 * u2 - 2.0 * u))
            / self.h;
        if neg {
            (v.conj(), -dv.conj())
        } else {
            (v, dv)
        }
    }
}
