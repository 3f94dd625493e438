//! The cumulative profile Φ behind m₃.
//!
//! m₃ = exp Σ_{n≠0} ⟨k−n⟩^{−1−a₀} Φ(t − ξ/n) with
//! Φ(x) = ∫_{−∞}^{x} ⟨s⟩^{−1} [ln(e + ⟨s⟩)]^{−1−a₀} ds.
//! Substituting s = sinh v turns the integrand into h(v) = [ln(e + cosh v)]^{−1−a₀}, which is
//! smooth and decays like (v − ln 2)^{−1−a₀}; Φ is then tabulated in v.

use std::f64::consts::E;

const STEP: f64 = 0.5;
const V_MAX: f64 = 40.0;

// 8-point Gauss–Legendre on [−1, 1].
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Clone, Debug)]
pub struct PhiProfile {
    pub a0: f64,
    cumulative: Vec<f64>,
    half_total: f64,
}

impl PhiProfile {
    pub fn new(a0: f64) -> Self {
        let n = (V_MAX / STEP).round() as usize;
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 0..n {
            acc += gl8(a0, j as f64 * STEP, (j + 1) as f64 * STEP);
            cumulative.push(acc);
        }
        let half_total = acc + (V_MAX - std::f64::consts::LN_2).powf(-a0) / a0;
        PhiProfile {
            a0,
            cumulative,
            half_total,
        }
    }

    /// h(v) = [ln(e + cosh v)]^{−1−a₀}.
    #[inline]
    pub fn h(&self, v: f64) -> f64 {
        h(self.a0, v)
    }

    /// ∫₀^v h for v ≥ 0.
    fn partial(&self, v: f64) -> f64 {
        if v >= V_MAX {
            let l2 = std::f64::consts::LN_2;
            let n = self.cumulative.len() - 1;
            return self.cumulative[n] + ((V_MAX - l2).powf(-self.a0) - (v - l2).powf(-self.a0)) / self.a0;
        }
        let j = (v / STEP).floor() as usize;
        let v0 = j as f64 * STEP;
        self.cumulative[j] + if v > v0 { gl8(self.a0, v0, v) } else { 0.0 }
    }

    /// Φ(x).
    pub fn big_phi(&self, x: f64) -> f64 {
        let v = x.abs().asinh();
        let p = self.partial(v);
        if x >= 0.0 {
            self.half_total + p
        } else {
            self.half_total - p
        }
    }

    /// Φ(+∞) = 2∫₀^∞ h.
    pub fn total(&self) -> f64 {
        2.0 * self.half_total
    }

    /// Φ′(x) = ⟨x⟩^{−1}[ln(e + ⟨x⟩)]^{−1−a₀}.
    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        density(self.a0, x)
    }
}

#[inline]
fn h(a0: f64, v: f64) -> f64 {
    (E + v.cosh()).ln().powf(-1.0 - a0)
}

#[inline]
pub fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

#[inline]
pub fn density(a0: f64, x: f64) -> f64 {
    let b = japanese(x);
    (E + b).ln().powf(-1.0 - a0) / b
}

fn gl8(a0: f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL_X.iter().zip(GL_W) {
        s += w * (h(a0, c - r * x) + h(a0, c + r * x));
    }
    s * r
}

/// Σ_{j>N} ⟨j⟩^{−1−a}, by explicit summation to N + 10⁵ and an Euler–Maclaurin remainder.
pub fn japanese_tail(n: usize, a: f64) -> f64 {
    let g = |j: f64| (1.0 + j * j).powf(-(1.0 + a) / 2.0);
    let m = n + 100_000;
    let mut s = 0.0;
    for j in (n + 1..=m).rev() {
        s += g(j as f64);
    }
    let mf = m as f64;
    // ∫_M^∞ g with g ≈ x^{−1−a}(1 − (1+a)/(2x²)), then −g(M)/2 − g′(M)/12.
    let integral = mf.powf(-a) / a - (1.0 + a) / 2.0 * mf.powf(-2.0 - a) / (2.0 + a);
    let dg = -(1.0 + a) * mf.powf(-2.0 - a);
    s + integral - g(mf) / 2.0 - dg / 12.0
}
