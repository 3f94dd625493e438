use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use super::config::ExperimentConfig;
use super::threshold::{amplification, classify_run, threshold_sweep, NonlinearProbe, PROXY_NOTE};
use crate::diagnostics::{
    asymptotics_check, strichartz_accumulators, write_energy_csv, AsymptoticsOptions, ZeroPlane,
};
use crate::error::{LabError, Result};
use crate::fit::{logspace, measure_rate, RateModel};
use crate::kernels::{
    torus_mode_decay, write_kernel_csv, KernelKind, KernelSample, PolarGrid, PolarKernel, TorusBump,
};
use crate::linear::{
    damping_trajectory, enhanced_dissipation_scan, zero_mode_linear_solve, Packet, PhysicalParams, QwSystem,
};
use crate::multipliers::{audit_bounds, audit_phi, audit_m3};
use crate::solver::{write_checkpoint, InitialData, Profile};
use crate::spectral::{DomainKind, GridSpec};

/// Files written (relative to the run directory) and remarks for the manifest.
#[derive(Default)]
pub(crate) struct Produced {
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

impl Produced {
    fn file(&mut self, name: &str) {
        self.files.push(name.to_string());
    }
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value, out: &mut Produced) -> Result<()> {
    std::fs::write(dir.join(name), serde_json::to_string_pretty(v)? + "\n")?;
    out.file(name);
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str, out: &mut Produced) -> Result<()> {
    std::fs::write(dir.join(name), text)?;
    out.file(name);
    Ok(())
}

fn first_nu(cfg: &ExperimentConfig) -> f64 {
    cfg.nu[0]
}

/// [T_p/10, T_p] with T_p = L/(2√B_β w): the time a packet of width w travelling at the
/// dispersive group speed needs to cross half the box.
pub fn pre_periodization_window(grid: &GridSpec, b_beta: f64, width: f64) -> Option<(f64, f64)> {
    if b_beta <= 0.0 {
        return None;
    }
    let l = grid.ly.min(if grid.domain == DomainKind::TR2 { grid.lz } else { grid.ly });
    let tp = l / (2.0 * b_beta.sqrt() * width);
    Some((tp / 10.0, tp))
}

pub(crate) fn linear_disp(cfg: &ExperimentConfig, dir: &Path, out: &mut Produced) -> Result<()> {
    let nu = first_nu(cfg);
    let params = PhysicalParams::new(nu, cfg.beta)?;
    let grid = GridSpec::plane(cfg.domain, cfg.grid[1], cfg.grid[2], cfg.ly, cfg.lz)?;
    let u = InitialData {
        profile: cfg.profile.clone(),
        amplitude: cfg.eps,
        seed: cfg.seed,
    }
    .build(grid)?;
    let horizon = cfg.horizon_at(nu);
    let times = logspace(0.5, horizon, cfg.points);
    let mut csv = String::from("t,sup_u0,sup_good,l2\n");
    let mut sup_u0 = Vec::with_capacity(times.len());
    let mut sup_good = Vec::with_capacity(times.len());
    for &t in &times {
        let f = zero_mode_linear_solve(&u, &[t], &params, cfg.route)?.remove(0);
        let (a, b, _) = ZeroPlane::new(&f).sups();
        let l2 = f.l2_sq().sqrt();
        writeln!(csv, "{t:.17e},{a:.17e},{b:.17e},{l2:.17e}").expect("string write");
        sup_u0.push((t, a));
        sup_good.push((t, b));
    }
    write_text(dir, "trajectory.csv", &csv, out)?;
    let width = match cfg.profile {
        Profile::LocalizedBubble { width } => width,
        _ => 1.0,
    };
    let window = cfg
        .fit_window
        .or_else(|| pre_periodization_window(&grid, params.b_beta(), width))
        .unwrap_or((1.0, horizon));
    let f0 = measure_rate(&sup_u0, window, RateModel::PowerLaw)?;
    let fg = measure_rate(&sup_good, window, RateModel::PowerLaw)?;
    let target = match cfg.domain {
        DomainKind::TR2 => -0.5,
        DomainKind::TRT => -1.0 / 3.0,
    };
    write_json(
        dir,
        "fits.json",
        &json!({
            "regime": crate::linear::classify_regime(cfg.beta),
            "window": window,
            "sup_u0": f0,
            "sup_u0_target": target,
            "sup_good": fg,
            "sup_good_target": -1.0,
        }),
        out,
    )?;
    Ok(())
}

pub(crate) fn linear_ed(cfg: &ExperimentConfig, dir: &Path, out: &mut Produced) -> Result<()> {
    let params = PhysicalParams::new(first_nu(cfg), cfg.beta)?;
    let c = match params.b_beta() {
        b if b > 0.0 => params.c_beta()?,
        b if b == 0.0 => 0.0,
        b => return Err(LabError::Regime(format!("(Q, W) is undefined for B_β = {b} < 0"))),
    };
    let packet = Packet::default();
    let scan = enhanced_dissipation_scan(c, &cfg.nu, &packet, cfg.points.max(200))?;
    let mut csv = String::from("nu,horizon,t_e,scaled\n");
    for p in &scan.points {
        writeln!(csv, "{:.17e},{:.17e},{:.17e},{:.17e}", p.nu, p.horizon, p.t_e, p.scaled).expect("string write");
    }
    write_text(dir, "ed.csv", &csv, out)?;
    let t_damp = cfg.horizon.map(|h| h.at(first_nu(cfg))).unwrap_or(100.0);
    let times: Vec<f64> = (0..=cfg.points).map(|i| t_damp * i as f64 / cfg.points as f64).collect();
    let damp = damping_trajectory(&QwSystem::new(c, first_nu(cfg)), &packet, &times, 1.0)?;
    let mut csv = String::from("t,ratio\n");
    for (t, r) in damp.times.iter().zip(&damp.ratio) {
        writeln!(csv, "{t:.17e},{r:.17e}").expect("string write");
    }
    write_text(dir, "damping.csv", &csv, out)?;
    write_json(
        dir,
        "fits.json",
        &json!({
            "c_beta": c,
            "exponent": scan.exponent,
            "r2": scan.r2,
            "target_range": [-0.40, -0.26],
            "damping_nu": first_nu(cfg),
            "damping_max_ratio": damp.max_ratio,
            "damping_t_max": damp.t_max,
        }),
        out,
    )?;
    Ok(())
}

fn scaled_ratio(samples: &[KernelSample], power: f64) -> f64 {
    let v: Vec<f64> = samples.iter().map(|s| s.sup * s.t.powf(power)).collect();
    v.iter().copied().fold(0.0, f64::max) / v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn kernels(cfg: &ExperimentConfig, dir: &Path, out: &mut Produced) -> Result<()> {
    let times = logspace(cfg.kernel_t.0, cfg.kernel_t.1, cfg.kernel_points);
    let grid = PolarGrid::default();
    let (kf, ks) = PolarKernel::new(KernelKind::K, 50.0)?.decay(&times, &grid)?;
    write_kernel_csv(&dir.join("kernel_K.csv"), &ks)?;
    out.file("kernel_K.csv");
    let (mf, ms) = PolarKernel::new(KernelKind::M { a: 1 }, 50.0)?.decay(&times, &grid)?;
    write_kernel_csv(&dir.join("kernel_M.csv"), &ms)?;
    out.file("kernel_M.csv");
    let bump = TorusBump {
        center: 1.0,
        half_width: 1.0,
    };
    let (tf, ts) = torus_mode_decay(1, 1.0, &times, bump)?;
    write_kernel_csv(&dir.join("kernel_torus.csv"), &ts)?;
    out.file("kernel_torus.csv");
    write_json(
        dir,
        "fits.json",
        &json!({
            "grid": { "rho_max": 50.0, "rhos": grid.rhos.len(), "phis": grid.phis.len() },
            "K": { "fit": kf, "target": -0.5, "tolerance": 0.05, "scaled_max_over_min": scaled_ratio(&ks, 0.5) },
            "M": { "fit": mf, "target": -1.0, "tolerance": 0.1, "scaled_max_over_min": scaled_ratio(&ms, 1.0) },
            "torus": { "l": 1, "bump": bump, "fit": tf, "target": -1.0 / 3.0, "tolerance": 0.05 },
        }),
        out,
    )?;
    Ok(())
}

pub(crate) fn multiplier_audit(cfg: &ExperimentConfig, dir: &Path, out: &mut Produced) -> Result<()> {
    let p = cfg.multipliers;
    let mut records = audit_phi(cfg.samples, cfg.seed, p)?;
    records.extend(audit_bounds(cfg.samples, cfg.seed, p)?);
    records.extend(audit_m3(cfg.samples, cfg.seed, p)?);
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    write_text(dir, "audit.jsonl", &text, out)?;
    let violations: usize = records.iter().map(|r| r.violations).sum();
    out.notes.push(format!("{} inequalities audited, {violations} violations", records.len()));
    Ok(())
}

fn probe_for(cfg: &ExperimentConfig, nu: f64) -> Result<NonlinearProbe> {
    Ok(NonlinearProbe {
        grid: GridSpec::new(cfg.domain, cfg.grid, cfg.ly, cfg.lz)?,
        params: PhysicalParams::new(nu, cfg.beta)?,
        profile: cfg.profile.clone(),
        seed: cfg.seed,
        dt: cfg.dt,
        horizon: cfg.horizon_at(nu),
        record_every: cfg.record_every,
        growth: cfg.growth,
        nonlinear: cfg.nonlinear,
        budget_seconds: cfg.probe_budget,
        multipliers: cfg.multipliers,
    })
}

pub(crate) fn nonlinear_run(cfg: &ExperimentConfig, dir: &Path, out: &mut Produced) -> Result<()> {
    let nu = first_nu(cfg);
    let probe = probe_for(cfg, nu)?;
    let ck = dir.join("checkpoints");
    std::fs::create_dir_all(&ck)?;
    let mut next_ck = cfg.checkpoint_every;
    let mut ck_files = Vec::new();
    let mut hook = |s: &crate::solver::SolverState| -> Result<()> {
        if let (Some(every), Some(at)) = (cfg.checkpoint_every, next_ck) {
            if s.t >= at - 1e-9 {
                let name = format!("t{:010.3}.bin", s.t);
                write_checkpoint(&ck.join(&name), s)?;
                ck_files.push(format!("checkpoints/{name}"));
                next_ck = Some(at + every);
            }
        }
        Ok(())
    };
    let (run, last) = probe.run_with(cfg.eps, false, &mut hook)?;
    out.files.extend(ck_files);
    write_energy_csv(&dir.join("energy.csv"), &run.records)?;
    out.file("energy.csv");
    if let Some(s) = &last {
        write_checkpoint(&ck.join("final.bin"), s)?;
        out.file("checkpoints/final.bin");
    }
    let label = classify_run(&run, cfg.growth, probe.horizon);
    let asym = asymptotics_check(
        &run.records,
        &AsymptoticsOptions {
            domain: cfg.domain,
            nu,
            eps: cfg.eps.max(f64::MIN_POSITIVE),
            window: cfg.fit_window,
        },
    );
    let (asym, asym_err) = match asym {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    write_json(
        dir,
        "fits.json",
        &json!({
            "label": label,
            "amplification": amplification(&run.records),
            "growth_bound": cfg.growth,
            "horizon": probe.horizon,
            "t_end": run.t_end,
            "diverged": run.diverged,
            "asymptotics": asym,
            "asymptotics_error": asym_err,
            "strichartz": strichartz_accumulators(&run.records, nu),
            "note": PROXY_NOTE,
        }),
        out,
    )?;
    if nu == 0.0 {
        out.notes.push(format!(
            "weights evaluated at ν = {} because the run is inviscid",
            super::threshold::INVISCID_WEIGHT_NU
        ));
    }
    if run.diverged {
        return Err(LabError::Divergence { t: run.t_end });
    }
    Ok(())
}

pub(crate) fn threshold(cfg: &ExperimentConfig, dir: &Path, out: &mut Produced) -> Result<()> {
    let bracket = cfg
        .eps_range
        .ok_or_else(|| LabError::config("threshold-sweep needs eps_range"))?;
    let report = threshold_sweep(&cfg.nu, bracket, cfg.n_iter, cfg.beta, cfg.growth, cfg.seed, |nu| {
        probe_for(cfg, nu)
    })?;
    let mut csv = String::from("nu,eps,label,amplification,t_end\n");
    for t in &report.thresholds {
        for p in t.trace() {
            let label = serde_json::to_value(p.label)?;
            writeln!(
                csv,
                "{:.17e},{:.17e},{},{:.17e},{:.17e}",
                t.nu(),
                p.eps,
                label.as_str().unwrap_or(""),
                p.amplification,
                p.t_end
            )
            .expect("string write");
        }
    }
    write_text(dir, "probes.csv", &csv, out)?;
    write_json(dir, "thresholds.json", &serde_json::to_value(&report)?, out)?;
    let bound = match cfg.domain {
        DomainKind::TR2 => json!({ "alpha_bound": "alpha > 2/3", "value": 2.0 / 3.0 }),
        DomainKind::TRT => json!({ "alpha_bound": "alpha >= 5/6", "value": 5.0 / 6.0 }),
    };
    write_json(
        dir,
        "fits.json",
        &json!({
            "beta": cfg.beta,
            "alpha": report.alpha,
            "alpha_error": report.alpha_error,
            "reference": bound,
            "note": PROXY_NOTE,
        }),
        out,
    )?;
    out.notes.push(PROXY_NOTE.to_string());
    Ok(())
}
