//! Stability classification of runs, bisection for the amplitude threshold, and the fit of its
//! ν-scaling.
//!
//! Instability here is a proxy: the weighted energy E₀ + E_≠ exceeding G² times its initial
//! value within the horizon. It says nothing about the true transition threshold.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{energy_functionals_with, EnergyRecord, WPolicy};
use crate::error::{LabError, Result};
use crate::fit::linreg;
use crate::linear::PhysicalParams;
use crate::multipliers::{MultiplierParams, Multipliers};
use crate::solver::{InitialData, Profile, Solver, SolverOptions, SolverState};
use crate::spectral::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Stable,
    Unstable,
    /// Aborted before the horizon for a reason other than divergence.
    Inconclusive,
}

/// What a probe produced: the recorded functionals and how the run ended.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub records: Vec<EnergyRecord>,
    /// Time actually reached.
    pub t_end: f64,
    pub diverged: bool,
    /// Wall-clock abort.
    pub aborted: bool,
}

fn total(r: &EnergyRecord) -> f64 {
    r.e0 + r.e_not
}

/// Largest (E₀+E_≠)(t) / (E₀+E_≠)(0) over the records; 0 for the zero solution, ∞ on NaN.
pub fn amplification(records: &[EnergyRecord]) -> f64 {
    let Some(first) = records.first() else { return 0.0 };
    let e0 = total(first);
    let mut worst: f64 = 0.0;
    for r in records {
        let e = total(r);
        if !e.is_finite() {
            return f64::INFINITY;
        }
        if e > 0.0 {
            worst = worst.max(if e0 > 0.0 { e / e0 } else { f64::INFINITY });
        }
    }
    worst
}

/// stable ⇔ sup_{t≤T}(E₀+E_≠) ≤ G²(E₀+E_≠)(0) with no NaN and the horizon reached.
pub fn classify_run(run: &RunOutcome, growth: f64, horizon: f64) -> Label {
    if run.diverged || run.records.iter().any(|r| !total(r).is_finite()) {
        return Label::Unstable;
    }
    if amplification(&run.records) > growth * growth {
        return Label::Unstable;
    }
    if run.aborted || run.t_end < horizon * (1.0 - 1e-9) {
        return Label::Inconclusive;
    }
    Label::Stable
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub eps: f64,
    pub label: Label,
    pub amplification: f64,
    pub t_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub nu: f64,
    /// Geometric midpoint of the final bracket.
    pub eps_star: f64,
    pub bracket: (f64, f64),
    /// Every probe in order, the two initial endpoints first.
    pub trace: Vec<Probe>,
    /// log(ε_hi/ε_lo) after each completed iteration.
    pub log_widths: Vec<f64>,
    /// An inconclusive probe stopped the bisection early.
    pub truncated: bool,
}

/// Bisection on log ε. `probe` maps an amplitude to a labelled probe.
pub fn bisect_threshold(
    nu: f64,
    bracket: (f64, f64),
    n_iter: usize,
    mut probe: impl FnMut(f64) -> Result<Probe>,
) -> Result<ThresholdResult> {
    let (mut lo, mut hi) = bracket;
    if n_iter < 8 {
        return Err(LabError::config(format!("bisection needs n_iter ≥ 8, got {n_iter}")));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(LabError::config(format!("bracket ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    let a = probe(lo)?;
    let b = probe(hi)?;
    let mut trace = vec![a.clone(), b.clone()];
    match (a.label, b.label) {
        (Label::Stable, Label::Unstable) => {}
        (Label::Unstable, Label::Unstable) => {
            return Err(LabError::Bracket(format!(
                "ν = {nu}: both ε = {lo:e} and ε = {hi:e} are unstable; lower eps_range"
            )))
        }
        (Label::Stable, Label::Stable) => {
            return Err(LabError::Bracket(format!(
                "ν = {nu}: both ε = {lo:e} and ε = {hi:e} are stable; raise eps_range"
            )))
        }
        (Label::Unstable, Label::Stable) => {
            return Err(LabError::Bracket(format!(
                "ν = {nu}: ε = {lo:e} is unstable but ε = {hi:e} is stable; the classifier is not monotone here"
            )))
        }
        _ => {
            return Err(LabError::Bracket(format!(
                "ν = {nu}: an endpoint probe was inconclusive; raise probe_budget"
            )))
        }
    }
    let mut log_widths = Vec::with_capacity(n_iter);
    let mut truncated = false;
    for _ in 0..n_iter {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        let p = probe(mid)?;
        let label = p.label;
        trace.push(p);
        match label {
            Label::Stable => lo = mid,
            Label::Unstable => hi = mid,
            Label::Inconclusive => {
                truncated = true;
                break;
            }
        }
        log_widths.push(hi.ln() - lo.ln());
    }
    Ok(ThresholdResult {
        nu,
        eps_star: (0.5 * (lo.ln() + hi.ln())).exp(),
        bracket: (lo, hi),
        trace,
        log_widths,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    /// Slope of log ε_* against log ν.
    pub alpha: f64,
    /// log ε₀.
    pub intercept: f64,
    pub r2: f64,
    /// 95% bootstrap percentile interval.
    pub ci: (f64, f64),
    pub n: usize,
    pub resamples: usize,
}

/// Least-squares α in ε_* ≈ ε₀ν^α with a pairs-bootstrap interval.
pub fn fit_alpha(points: &[(f64, f64)], seed: u64, resamples: usize) -> Result<AlphaFit> {
    if points.len() < 4 {
        return Err(LabError::Fit(format!("α fit needs at least 4 viscosities, got {}", points.len())));
    }
    if points.iter().any(|&(n, e)| !(n > 0.0 && e > 0.0)) {
        return Err(LabError::Fit("α fit needs positive ν and ε_*".into()));
    }
    let first = points[0].1;
    if points.iter().all(|&(_, e)| e == first) {
        return Err(LabError::Fit("ε_* is constant across ν; α is undetermined".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (alpha, intercept, r2) = linreg(&x, &y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = points.len();
    let mut slopes = Vec::with_capacity(resamples);
    let mut bx = vec![0.0; n];
    let mut by = vec![0.0; n];
    for _ in 0..resamples {
        for j in 0..n {
            let i = rng.gen_range(0..n);
            bx[j] = x[i];
            by[j] = y[i];
        }
        if let Ok((s, _, _)) = linreg(&bx, &by) {
            slopes.push(s);
        }
    }
    if slopes.is_empty() {
        return Err(LabError::Fit("every bootstrap resample was degenerate".into()));
    }
    slopes.sort_by(f64::total_cmp);
    let q = |p: f64| slopes[((p * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)];
    Ok(AlphaFit {
        alpha,
        intercept,
        r2,
        ci: (q(0.025), q(0.975)),
        n,
        resamples: slopes.len(),
    })
}

/// One nonlinear run per amplitude on a fixed grid, data profile and seed.
#[derive(Clone, Debug)]
pub struct NonlinearProbe {
    pub grid: GridSpec,
    pub params: PhysicalParams,
    pub profile: Profile,
    pub seed: u64,
    pub dt: f64,
    pub horizon: f64,
    pub record_every: f64,
    pub growth: f64,
    pub nonlinear: bool,
    pub budget_seconds: Option<f64>,
    pub multipliers: MultiplierParams,
}

/// Weights need ν > 0; inviscid runs evaluate them at this viscosity.
pub const INVISCID_WEIGHT_NU: f64 = 1e-6;

impl NonlinearProbe {
    pub fn weights(&self) -> Result<Multipliers> {
        Multipliers::new(self.multipliers, self.params.nu.max(INVISCID_WEIGHT_NU))
    }

    /// Run to the horizon (or until the amplification bound is crossed when `early_exit`).
    pub fn run(&self, eps: f64, early_exit: bool) -> Result<(RunOutcome, Option<SolverState>)> {
        self.run_with(eps, early_exit, &mut |_| Ok(()))
    }

    /// As [`NonlinearProbe::run`], calling `hook` on the state after every record.
    pub fn run_with(
        &self,
        eps: f64,
        early_exit: bool,
        hook: &mut dyn FnMut(&SolverState) -> Result<()>,
    ) -> Result<(RunOutcome, Option<SolverState>)> {
        let u = InitialData {
            profile: self.profile.clone(),
            amplitude: eps,
            seed: self.seed,
        }
        .build(self.grid)?;
        let state = SolverState::new(u, self.params)?;
        let opts = SolverOptions {
            nonlinear: self.nonlinear,
            adaptive: true,
            ..SolverOptions::default()
        }
        .auto_remap(&self.grid);
        let mut solver = Solver::new(state, opts)?;
        let mult = self.weights()?;
        let record = |s: &SolverState| energy_functionals_with(s, &mult, WPolicy::UnitWhenUndefined);
        let mut out = RunOutcome {
            records: vec![record(&solver.state)?],
            ..RunOutcome::default()
        };
        let start = Instant::now();
        let bound = self.growth * self.growth;
        let mut next = 0.0;
        while solver.state.t < self.horizon * (1.0 - 1e-12) {
            next = (next + self.record_every).min(self.horizon);
            match solver.advance_to(next, self.dt) {
                Ok(()) => {}
                Err(LabError::Divergence { .. }) => {
                    out.diverged = true;
                    break;
                }
                Err(e) => return Err(e),
            }
            let r = record(&solver.state)?;
            let finite = r.is_finite();
            out.records.push(r);
            if !finite {
                out.diverged = true;
                break;
            }
            hook(&solver.state)?;
            if early_exit && amplification(&out.records) > bound {
                break;
            }
            if let Some(b) = self.budget_seconds {
                if start.elapsed().as_secs_f64() > b && solver.state.t < self.horizon {
                    out.aborted = true;
                    break;
                }
            }
        }
        out.t_end = solver.state.t;
        let last = if out.diverged { None } else { Some(solver.state) };
        Ok((out, last))
    }

    pub fn probe(&self, eps: f64) -> Result<Probe> {
        let (run, _) = self.run(eps, true)?;
        Ok(Probe {
            eps,
            label: classify_run(&run, self.growth, self.horizon),
            amplification: amplification(&run.records),
            t_end: run.t_end,
        })
    }
}

/// Threshold estimate at one ν: bracketed, or bounded by the whole probed range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Threshold {
    Bracketed(ThresholdResult),
    /// Unstable down to `eps`: ε_* < eps.
    Below { nu: f64, eps: f64, trace: Vec<Probe> },
    /// Stable up to `eps`: ε_* > eps.
    Above { nu: f64, eps: f64, trace: Vec<Probe> },
    Failed { nu: f64, message: String },
}

impl Threshold {
    pub fn nu(&self) -> f64 {
        match self {
            Threshold::Bracketed(r) => r.nu,
            Threshold::Below { nu, .. } | Threshold::Above { nu, .. } | Threshold::Failed { nu, .. } => *nu,
        }
    }

    /// [lower, upper] bounds on ε_*.
    pub fn interval(&self) -> (f64, f64) {
        match self {
            Threshold::Bracketed(r) => r.bracket,
            Threshold::Below { eps, .. } => (0.0, *eps),
            Threshold::Above { eps, .. } => (*eps, f64::INFINITY),
            Threshold::Failed { .. } => (0.0, f64::INFINITY),
        }
    }

    pub fn point(&self) -> Option<f64> {
        match self {
            Threshold::Bracketed(r) => Some(r.eps_star),
            _ => None,
        }
    }

    pub fn trace(&self) -> &[Probe] {
        match self {
            Threshold::Bracketed(r) => &r.trace,
            Threshold::Below { trace, .. } | Threshold::Above { trace, .. } => trace,
            Threshold::Failed { .. } => &[],
        }
    }
}

/// `a ≥ b` as far as the estimates can tell: midpoints when both are bracketed, otherwise
/// "not contradicted by the bounds".
pub fn at_least(a: &Threshold, b: &Threshold) -> bool {
    match (a.point(), b.point()) {
        (Some(x), Some(y)) => x >= y,
        _ => a.interval().1 >= b.interval().0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub beta: f64,
    pub growth: f64,
    pub thresholds: Vec<Threshold>,
    pub alpha: Option<AlphaFit>,
    pub alpha_error: Option<String>,
    /// Always the same reminder: instability is an amplification proxy.
    pub note: String,
}

pub const PROXY_NOTE: &str = "unstable means (E0+Enot) exceeded G^2 times its initial value before the horizon; \
this is an amplification proxy, not a proven transition";

/// Bisect every ν independently in the worker pool; `make` builds the probe for one ν.
pub fn threshold_sweep(
    nus: &[f64],
    bracket: (f64, f64),
    n_iter: usize,
    beta: f64,
    growth: f64,
    seed: u64,
    make: impl Fn(f64) -> Result<NonlinearProbe> + Sync,
) -> Result<SweepReport> {
    let thresholds: Vec<Threshold> = nus
        .par_iter()
        .map(|&nu| -> Result<Threshold> {
            let p = make(nu)?;
            let mut trace = Vec::new();
            let res = bisect_threshold(nu, bracket, n_iter, |e| {
                let pr = p.probe(e)?;
                trace.push(pr.clone());
                Ok(pr)
            });
            Ok(match res {
                Ok(r) => Threshold::Bracketed(r),
                Err(LabError::Bracket(msg)) => match trace.as_slice() {
                    [a, b] if a.label == Label::Unstable && b.label == Label::Unstable => Threshold::Below {
                        nu,
                        eps: bracket.0,
                        trace,
                    },
                    [a, b] if a.label == Label::Stable && b.label == Label::Stable => Threshold::Above {
                        nu,
                        eps: bracket.1,
                        trace,
                    },
                    _ => Threshold::Failed { nu, message: msg },
                },
                Err(e @ LabError::Config(_)) => return Err(e),
                Err(e) => Threshold::Failed {
                    nu,
                    message: e.to_string(),
                },
            })
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = thresholds
        .iter()
        .filter_map(|t| t.point().map(|e| (t.nu(), e)))
        .collect();
    let (alpha, alpha_error) = match fit_alpha(&pts, seed, 2000) {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SweepReport {
        beta,
        growth,
        thresholds,
        alpha,
        alpha_error,
        note: PROXY_NOTE.into(),
    })
}
