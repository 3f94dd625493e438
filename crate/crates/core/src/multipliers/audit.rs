//! Randomised audits of the multiplier inequalities.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{japanese, m1_max, m2_max, m3_density, phi_max, MultiplierParams, Multipliers};
use crate::error::Result;

/// One inequality checked over a random sample. Inequalities with unspecified constants report
/// the smallest constant consistent with the sample instead of counting violations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub inequality: String,
    pub samples: usize,
    pub violations: usize,
    pub max_violation: f64,
    pub fitted_constant: Option<f64>,
}

const TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
struct Sample {
    nu: f64,
    t: f64,
    k: f64,
    xi: f64,
    eta: f64,
    k2: f64,
    xi2: f64,
    eta2: f64,
}

fn draw(rng: &mut ChaCha8Rng, beta0: f64) -> Sample {
    let nu = 10f64.powf(rng.gen_range(-6.0..0.0));
    let w = beta0 * nu.powf(-1.0 / 3.0);
    let k = if rng.gen_bool(0.1) {
        0.0
    } else {
        let m = rng.gen_range(1..=16) as f64;
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let xi = if k != 0.0 && rng.gen_bool(0.5) {
        k * rng.gen_range(-2.0 * w..2.0 * w)
    } else {
        rng.gen_range(-100.0..100.0)
    };
    let eta = if rng.gen_bool(0.8) { rng.gen_range(-20.0..20.0) } else { 0.0 };
    let t = match rng.gen_range(0..4) {
        0 if k != 0.0 => (xi / k + rng.gen_range(-0.5 * w..1.5 * w)).max(0.0),
        1 => 0.0,
        _ => 10f64.powf(rng.gen_range(-2.0..4.0)),
    };
    let k2 = k + rng.gen_range(-3..=3) as f64;
    let xi2 = xi + rng.gen_range(-10.0..10.0) * if rng.gen_bool(0.5) { 1.0 } else { 0.01 };
    let eta2 = eta + rng.gen_range(-5.0..5.0);
    Sample {
        nu,
        t,
        k,
        xi,
        eta,
        k2,
        xi2,
        eta2,
    }
}

fn samples(n: usize, seed: u64, beta0: f64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| draw(&mut rng, beta0)).collect()
}

/// Excess of `lhs ≤ rhs`, relative to max(1, |rhs|); positive means violated.
fn excess(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / rhs.abs().max(1.0)
}

struct Tally {
    name: &'static str,
    samples: usize,
    violations: usize,
    worst: f64,
    fitted: Option<f64>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            samples: 0,
            violations: 0,
            worst: 0.0,
            fitted: None,
        }
    }

    fn check(&mut self, e: f64) {
        self.samples += 1;
        if !(e <= TOL) {
            self.violations += 1;
        }
        if e.is_nan() {
            self.worst = f64::INFINITY;
        } else {
            self.worst = self.worst.max(e);
        }
    }

    fn fit(&mut self, ratio: f64) {
        self.samples += 1;
        if ratio.is_finite() {
            self.fitted = Some(self.fitted.map_or(ratio, |c| c.max(ratio)));
        } else {
            self.violations += 1;
        }
    }

    fn record(self) -> AuditRecord {
        AuditRecord {
            inequality: self.name.to_string(),
            samples: self.samples,
            violations: self.violations,
            max_violation: self.worst.max(0.0),
            fitted_constant: self.fitted,
        }
    }
}

/// Per-sample outcomes in a fixed order, so the parallel map reduces deterministically.
type Outcome = Vec<(usize, Option<f64>, Option<f64>)>;

fn run(
    names: &[&'static str],
    n: usize,
    seed: u64,
    params: MultiplierParams,
    eval: impl Fn(&Multipliers, &Sample) -> Outcome + Sync,
) -> Result<Vec<AuditRecord>> {
    let base = Multipliers::new(params, 1.0)?;
    let pts = samples(n, seed, params.beta0);
    let outcomes: Vec<Outcome> = pts
        .par_iter()
        .map(|s| {
            let m = base.with_nu(s.nu).expect("sampled ν lies in (0, 1]");
            eval(&m, s)
        })
        .collect();
    let mut tallies: Vec<Tally> = names.iter().map(|n| Tally::new(n)).collect();
    for o in outcomes {
        for (i, check, fit) in o {
            if let Some(e) = check {
                tallies[i].check(e);
            }
            if let Some(r) = fit {
                tallies[i].fit(r);
            }
        }
    }
    Ok(tallies.into_iter().map(Tally::record).collect())
}

/// φ bounds, φ/p, ⟨t⟩^{−2}φ ≤ 3, the product estimate (fitted), and the growth/dissipation balance.
pub fn audit_phi(n: usize, seed: u64, params: MultiplierParams) -> Result<Vec<AuditRecord>> {
    let names = [
        "1 <= phi <= 1 + beta0^2 nu^(-2/3)",
        "phi / p <= 1 / (k^2 + eta^2)",
        "<t>^(-2) phi <= 3",
        "phi(xi,eta) <= C phi(xi',eta') <xi-xi',eta-eta'>^2",
        "delta (dt m1/m1 + nu p) + (dt phi/phi - dt p/p)/2 >= delta nu^(1/3)",
    ];
    run(&names, n, seed, params, |m, s| {
        let (t, k, xi, eta) = (s.t, s.k, s.xi, s.eta);
        let phi = m.phi(t, k, xi, eta);
        let mut out: Outcome = Vec::with_capacity(5);
        out.push((0, Some(excess(1.0, phi).max(excess(phi, phi_max(m.params.beta0, m.nu)))), None));
        if k != 0.0 {
            let xt = xi - k * t;
            let p = k * k + xt * xt + eta * eta;
            out.push((1, Some(excess(phi / p, 1.0 / (k * k + eta * eta))), None));
            let phi2 = m.phi(t, k, s.xi2, s.eta2);
            let d = 1.0 + (xi - s.xi2).powi(2) + (eta - s.eta2).powi(2);
            out.push((3, None, Some(phi / (phi2 * d))));
            let delta = m.params.delta_beta0;
            let dp = -2.0 * k * xt / p;
            let lhs = delta * (m.dlog_m1(t, k, xi) + m.nu * p) + 0.5 * (m.dlog_phi(t, k, xi, eta) - dp);
            out.push((4, Some(excess(delta * m.nu.cbrt(), lhs)), None));
        }
        out.push((2, Some(excess(phi / (1.0 + t * t), 3.0)), None));
        out
    })
}

/// Pointwise bounds of m₁, m₂, m₃.
pub fn audit_bounds(n: usize, seed: u64, params: MultiplierParams) -> Result<Vec<AuditRecord>> {
    let names = ["1 <= m1 <= e^(2 pi)", "1 <= m2 <= e^(A pi)", "m3 >= 1"];
    run(&names, n, seed.wrapping_add(1), params, |m, s| {
        let (t, k, xi, eta) = (s.t, s.k, s.xi, s.eta);
        let m1 = m.m1(t, k, xi);
        let m2 = m.m2(t, k, xi, eta);
        let log_m3 = m.log_m3(t, k, xi);
        vec![
            (0, Some(excess(1.0, m1).max(excess(m1, m1_max()))), None),
            (1, Some(excess(1.0, m2).max(excess(m2, m2_max(m.params.a_big)))), None),
            // m₃ ≥ 1 ⇔ log m₃ ≥ 0
            (2, Some(excess(0.0, log_m3)), None),
        ]
    })
}

/// Upper bound of m₃ (fitted), the lower bound of ∂ₜm₃/m₃, and the two shift estimates (fitted).
pub fn audit_m3(n: usize, seed: u64, params: MultiplierParams) -> Result<Vec<AuditRecord>> {
    let names = [
        "m3 <= exp(C a0^-2)",
        "<t-xi/k>^-1 [ln(e+<t-xi/k>)]^(-1-a0) <= dt m3/m3",
        "<t-xi/k>^-1 [ln(e+<t-xi/k>)]^(-1-a0) <= C a0^(-1-a0) dt m3/m3(k',xi') <k-k',xi-xi'>^(2+a0(2+a0))",
        "dt m3/m3(k,xi) <= C a0^(-1-a0) dt m3/m3(k',xi') <k-k',xi-xi'>^(2+a0(2+a0))",
    ];
    run(&names, n, seed.wrapping_add(2), params, |m, s| {
        let a0 = m.params.a0;
        let (t, k, xi) = (s.t, s.k, s.xi);
        let mut out: Outcome = Vec::with_capacity(4);
        out.push((0, None, Some(m.log_m3(t, k, xi) * a0 * a0)));
        let here = m.dlog_m3(t, k, xi);
        let there = m.dlog_m3(t, s.k2, s.xi2);
        let bracket = japanese((k - s.k2).hypot(xi - s.xi2)).powf(2.0 + a0 * (2.0 + a0));
        let scale = a0.powf(-1.0 - a0) * there * bracket;
        if k != 0.0 {
            let lower = m3_density(a0, t - xi / k);
            out.push((1, Some(excess(lower, here)), None));
            out.push((2, None, Some(lower / scale)));
        }
        out.push((3, None, Some(here / scale)));
        out
    })
}
