//! Least-squares rate fits of sampled trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateModel {
    /// log y = a + r log t
    PowerLaw,
    /// log y = a + r t
    Exponential,
    /// log y = a + r ν^{1/3} t
    ExpNuThird { nu: f64 },
    /// y = a + r t
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    /// Exponent (power law) or rate (exponential / linear).
    pub rate: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Ordinary least squares y ≈ a + b x; returns (b, a, r²).
pub fn linreg(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return Err(LabError::Fit(format!("need matching samples, got {n} and {}", y.len())));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(LabError::Fit("abscissae are all equal".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok((b, a, r2))
}

/// Fit `samples` (t, y) restricted to `window` with the given model.
pub fn measure_rate(samples: &[(f64, f64)], window: (f64, f64), model: RateModel) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    if pts.len() < 20 {
        return Err(LabError::Fit(format!(
            "only {} samples in window [{}, {}]; at least 20 required",
            pts.len(),
            window.0,
            window.1
        )));
    }
    if pts.iter().all(|(_, y)| *y == 0.0) {
        return Err(LabError::Fit("trajectory is identically zero".into()));
    }
    let logged = !matches!(model, RateModel::Linear);
    if logged && pts.iter().any(|(_, y)| !(*y > 0.0)) {
        return Err(LabError::Fit("logarithmic model needs positive samples".into()));
    }
    if matches!(model, RateModel::PowerLaw) && pts.iter().any(|(t, _)| *t <= 0.0) {
        return Err(LabError::Fit("power-law model needs t > 0".into()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts
        .iter()
        .map(|&(t, y)| match model {
            RateModel::PowerLaw => (t.ln(), y.ln()),
            RateModel::Exponential => (t, y.ln()),
            RateModel::ExpNuThird { nu } => (nu.cbrt() * t, y.ln()),
            RateModel::Linear => (t, y),
        })
        .unzip();
    let (rate, intercept, r2) = linreg(&x, &y)?;
    Ok(RateFit {
        model,
        rate,
        intercept,
        r2,
        window,
        samples: pts.len(),
    })
}

/// Log-spaced sample points on [a, b].
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_exponential() {
        let s: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 * 0.1, (-(i as f64) * 0.1).exp())).collect();
        let f = measure_rate(&s, (0.0, 10.0), RateModel::Exponential).unwrap();
        assert!((f.rate + 1.0).abs() < 1e-6);
    }

    #[test]
    fn synthetic_power_law() {
        let s: Vec<(f64, f64)> = logspace(10.0, 1e4, 50).into_iter().map(|t| (t, t.powf(-0.5))).collect();
        let f = measure_rate(&s, (10.0, 1e4), RateModel::PowerLaw).unwrap();
        assert!((f.rate + 0.5).abs() < 1e-6);
        assert!(f.r2 > 0.999_999);
    }

    #[test]
    fn degenerate_inputs() {
        let zeros: Vec<(f64, f64)> = (1..40).map(|i| (i as f64, 0.0)).collect();
        assert!(matches!(
            measure_rate(&zeros, (0.0, 100.0), RateModel::PowerLaw),
            Err(LabError::Fit(_))
        ));
        let few: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 1.0)).collect();
        assert!(measure_rate(&few, (0.0, 100.0), RateModel::Linear).is_err());
    }
}
