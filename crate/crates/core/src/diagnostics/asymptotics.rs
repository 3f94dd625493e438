use serde::{Deserialize, Serialize};

use super::energy::EnergyRecord;
use crate::error::{LabError, Result};
use crate::fit::{measure_rate, RateFit, RateModel};
use crate::spectral::DomainKind;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsOptions {
    pub domain: DomainKind,
    pub nu: f64,
    /// Size of the initial data the damping ratio is normalised by.
    pub eps: f64,
    /// Fit window; `None` uses [1, T].
    pub window: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub horizon: f64,
    pub sup_u0: RateFit,
    /// −1/2 on 𝕋×ℝ², −1/3 on 𝕋×ℝ×𝕋.
    pub sup_u0_target: f64,
    pub sup_good: RateFit,
    pub sup_good_target: f64,
    /// sup_t (1+t)‖u²_≠‖_{L²}/ε.
    pub damping_sup: f64,
    /// Rate of ‖(u¹_≠, u³_≠)‖ in units of ν^{1/3}; `None` without viscosity or signal.
    pub ed_rate: Option<RateFit>,
}

pub fn asymptotics_check(records: &[EnergyRecord], opts: &AsymptoticsOptions) -> Result<AsymptoticsReport> {
    let horizon = records.last().map(|r| r.t).unwrap_or(0.0);
    if horizon < 50.0 {
        return Err(LabError::Fit(format!("trajectory ends at t = {horizon}; asymptotics need T ≥ 50")));
    }
    if !(opts.eps > 0.0) {
        return Err(LabError::config("eps must be positive to normalise the damping ratio"));
    }
    let window = opts.window.unwrap_or((1.0, horizon));
    let series = |f: fn(&EnergyRecord) -> f64| -> Vec<(f64, f64)> { records.iter().map(|r| (r.t, f(r))).collect() };
    let sup_u0 = measure_rate(&series(|r| r.sup_u0), window, RateModel::PowerLaw)?;
    let sup_good = measure_rate(&series(|r| r.sup_good), window, RateModel::PowerLaw)?;
    let damping_sup = records.iter().map(|r| r.damping).fold(0.0, f64::max) / opts.eps;
    let ed_rate = if opts.nu > 0.0 {
        measure_rate(&series(|r| r.ed_tracker), window, RateModel::ExpNuThird { nu: opts.nu }).ok()
    } else {
        None
    };
    let sup_u0_target = match opts.domain {
        DomainKind::TR2 => -0.5,
        DomainKind::TRT => -1.0 / 3.0,
    };
    Ok(AsymptoticsReport {
        horizon,
        sup_u0,
        sup_u0_target,
        sup_good,
        sup_good_target: -1.0,
        damping_sup,
        ed_rate,
    })
}

/// Space-time norms of the streamwise average accumulated from snapshot sup-norms, raw and
/// multiplied by the viscosity powers that make them O(1) uniformly in ν.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport {
    pub horizon: f64,
    /// ‖(1+∂_z)u₀‖_{L²_t L^∞}
    pub u0_l2_linf: f64,
    /// ‖(1+∂_z)∇u₀‖_{L¹_t L^∞}
    pub grad_u0_l1_linf: f64,
    /// ‖(1+∂_z)u₀³‖_{L²_t W^{1,∞}}
    pub u03_l2_w1: f64,
    /// ‖(1+∂_z)∇u₀³‖_{L¹_t W^{1,∞}}
    pub grad_u03_l1_w1: f64,
    /// ‖(1+∂_z)∂_y u₀‖_{L¹_t W^{1,∞}}
    pub dy_u0_l1_w1: f64,
    /// ν^{1/4}, ν^{3/4}, 1, ν^{1/2}, ν^{1/2} times the above.
    pub weighted: [f64; 5],
}

/// Trapezoid accumulation over the recorded times, which should be uniformly spaced.
pub fn strichartz_accumulators(records: &[EnergyRecord], nu: f64) -> StrichartzReport {
    let mut acc = [0.0f64; 5];
    for w in records.windows(2) {
        let h = w[1].t - w[0].t;
        let vals = |r: &EnergyRecord| {
            [
                r.sup.u0 * r.sup.u0,
                r.sup.grad_u0,
                r.sup.u03_w1 * r.sup.u03_w1,
                r.sup.grad_u03_w1,
                r.sup.dy_u0_w1,
            ]
        };
        let (a, b) = (vals(&w[0]), vals(&w[1]));
        for j in 0..5 {
            acc[j] += 0.5 * h * (a[j] + b[j]);
        }
    }
    let raw = [acc[0].sqrt(), acc[1], acc[2].sqrt(), acc[3], acc[4]];
    let pw = [nu.powf(0.25), nu.powf(0.75), 1.0, nu.sqrt(), nu.sqrt()];
    StrichartzReport {
        horizon: records.last().map(|r| r.t).unwrap_or(0.0),
        u0_l2_linf: raw[0],
        grad_u0_l1_linf: raw[1],
        u03_l2_w1: raw[2],
        grad_u03_l1_w1: raw[3],
        dy_u0_l1_w1: raw[4],
        weighted: std::array::from_fn(|j| raw[j] * pw[j]),
    }
}
