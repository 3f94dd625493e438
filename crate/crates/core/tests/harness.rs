use std::path::{Path, PathBuf};

use rotcouette::diagnostics::EnergyRecord;
use rotcouette::harness::*;
use rotcouette::linear::PhysicalParams;
use rotcouette::multipliers::MultiplierParams;
use rotcouette::solver::Profile;
use rotcouette::spectral::{DomainKind, GridSpec};
use rotcouette::LabError;

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("rc_harness_{tag}_{}", std::process::id()));
    std::fs::remove_dir_all(&d).ok();
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn rec(t: f64, e: f64) -> EnergyRecord {
    EnergyRecord {
        t,
        e0: e,
        d0: 0.0,
        e_not: 0.0,
        d_not: 0.0,
        sup_u0: 0.0,
        sup_good: 0.0,
        damping: 0.0,
        ed_tracker: 0.0,
        sup: Default::default(),
        energy: e,
        discarded_energy: 0.0,
    }
}

#[test]
fn config_parses_keys_comments_and_includes() {
    let dir = scratch("cfg");
    std::fs::write(dir.join("base.cfg"), "beta = 0.5   # dispersive\nseed = 7\n").unwrap();
    let text = "include = base.cfg\ncommand = threshold-sweep\nnu = 1e-2, 5e-3\neps_range = 1e-4, 1e-1\n\
                grid = 16x16x8\nhorizon = auto\nG = 5\nA = 12\n";
    let cfg = ExperimentConfig::parse_str(text, &dir).unwrap();
    assert_eq!(cfg.command, Command::ThresholdSweep);
    assert_eq!(cfg.beta, 0.5);
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.nu, vec![1e-2, 5e-3]);
    assert_eq!(cfg.eps_range, Some((1e-4, 1e-1)));
    assert_eq!(cfg.grid, [16, 16, 8]);
    assert_eq!(cfg.growth, 5.0);
    assert_eq!(cfg.multipliers.a_big, 12.0);
    assert!((cfg.horizon_at(1e-3) - 100.0).abs() < 1e-9);
    cfg.validate().unwrap();
    assert_eq!(parse_grid("128x64").unwrap(), [1, 128, 64]);
    for c in Command::ALL {
        assert_eq!(c.name().parse::<Command>().unwrap(), c);
    }
}

#[test]
fn config_errors_carry_line_numbers_and_detect_cycles() {
    let dir = scratch("cfgerr");
    match ExperimentConfig::parse_str("beta = 2\nbogus = 3\n", &dir) {
        Err(LabError::Config(m)) => assert!(m.contains("line 2") && m.contains("bogus"), "{m}"),
        other => panic!("{other:?}"),
    }
    std::fs::write(dir.join("a.cfg"), "include = b.cfg\n").unwrap();
    std::fs::write(dir.join("b.cfg"), "include = a.cfg\n").unwrap();
    match ExperimentConfig::from_file(&dir.join("a.cfg")) {
        Err(LabError::Config(m)) => assert!(m.contains("cycle"), "{m}"),
        other => panic!("{other:?}"),
    }
    let mut cfg = ExperimentConfig::default();
    cfg.nu = vec![-1.0];
    assert!(matches!(cfg.validate(), Err(LabError::Config(_))));
    cfg = ExperimentConfig::default();
    cfg.command = Command::ThresholdSweep;
    assert!(matches!(cfg.validate(), Err(LabError::Config(_))), "missing eps_range");
}

#[test]
fn classification_of_synthetic_runs() {
    let flat = RunOutcome {
        records: (0..=10).map(|i| rec(i as f64, 1.0 + 0.1 * i as f64)).collect(),
        t_end: 10.0,
        ..Default::default()
    };
    assert_eq!(classify_run(&flat, 10.0, 10.0), Label::Stable);
    assert_eq!(classify_run(&flat, 1.1, 10.0), Label::Unstable);
    assert_eq!(classify_run(&RunOutcome { t_end: 5.0, ..flat.clone() }, 10.0, 10.0), Label::Inconclusive);
    let mut nan = flat.clone();
    nan.records[4].e0 = f64::NAN;
    assert_eq!(classify_run(&nan, 10.0, 10.0), Label::Unstable);
    assert_eq!(amplification(&nan.records), f64::INFINITY);
    let zero = RunOutcome {
        records: (0..=3).map(|i| rec(i as f64, 0.0)).collect(),
        t_end: 3.0,
        ..Default::default()
    };
    assert_eq!(amplification(&zero.records), 0.0);
    assert_eq!(classify_run(&zero, 10.0, 3.0), Label::Stable);
}

fn synthetic(threshold: f64) -> impl FnMut(f64) -> rotcouette::Result<Probe> {
    move |eps| {
        Ok(Probe {
            eps,
            label: if eps < threshold { Label::Stable } else { Label::Unstable },
            amplification: if eps < threshold { 1.0 } else { 1e9 },
            t_end: 1.0,
        })
    }
}

#[test]
fn bisection_brackets_a_known_threshold() {
    let r = bisect_threshold(1e-2, (1e-4, 1.0), 10, synthetic(0.01)).unwrap();
    assert!(!r.truncated);
    assert!(r.bracket.0 < 0.01 && 0.01 <= r.bracket.1, "{:?}", r.bracket);
    let w0 = (1.0f64 / 1e-4).ln();
    assert_eq!(r.log_widths.len(), 10);
    for (i, w) in r.log_widths.iter().enumerate() {
        let expect = w0 / 2f64.powi(i as i32 + 1);
        assert!((w - expect).abs() < 1e-12 * w0, "iteration {i}: {w} vs {expect}");
    }
    assert!((r.eps_star - (r.bracket.0 * r.bracket.1).sqrt()).abs() < 1e-15);
    assert_eq!(r.trace.len(), 12);
    assert!(matches!(
        bisect_threshold(1e-2, (0.5, 1.0), 10, synthetic(0.01)),
        Err(LabError::Bracket(_))
    ));
    assert!(matches!(
        bisect_threshold(1e-2, (1e-4, 1e-3), 10, synthetic(0.01)),
        Err(LabError::Bracket(_))
    ));
    assert!(matches!(
        bisect_threshold(1e-2, (1e-4, 1.0), 5, synthetic(0.01)),
        Err(LabError::Config(_))
    ));
}

#[test]
fn inconclusive_probe_truncates_bisection() {
    let mut n = 0;
    let r = bisect_threshold(1e-2, (1e-4, 1.0), 10, |eps| {
        n += 1;
        let mut p = synthetic(0.01)(eps)?;
        if n == 5 {
            p.label = Label::Inconclusive;
        }
        Ok(p)
    })
    .unwrap();
    assert!(r.truncated);
    assert!(r.log_widths.len() < 10);
    assert!(r.bracket.0 < 0.01 && 0.01 <= r.bracket.1);
}

#[test]
fn alpha_fit_recovers_power_law() {
    let pts: Vec<(f64, f64)> = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6e-4].iter().map(|&nu: &f64| (nu, 3.0 * nu.powf(0.8))).collect();
    let f = fit_alpha(&pts, 1, 500).unwrap();
    assert!((f.alpha - 0.8).abs() < 1e-6, "{}", f.alpha);
    assert!((f.r2 - 1.0).abs() < 1e-9);
    assert!(f.ci.0 <= f.alpha + 1e-9 && f.alpha - 1e-9 <= f.ci.1);
    let flat: Vec<(f64, f64)> = pts.iter().map(|&(nu, _)| (nu, 0.1)).collect();
    assert!(matches!(fit_alpha(&flat, 1, 100), Err(LabError::Fit(_))));
    assert!(matches!(fit_alpha(&pts[..3], 1, 100), Err(LabError::Fit(_))));
}

fn small_probe(beta: f64, nonlinear: bool) -> NonlinearProbe {
    NonlinearProbe {
        grid: GridSpec::new(DomainKind::TR2, [8, 8, 8], 4.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI)
            .unwrap(),
        params: PhysicalParams::new(1e-2, beta).unwrap(),
        profile: Profile::RandomBand { k_max: 1, xi_max: 1.0, eta_max: 1.0 },
        seed: 3,
        dt: 0.05,
        horizon: 2.0,
        record_every: 0.5,
        growth: 10.0,
        nonlinear,
        budget_seconds: None,
        multipliers: MultiplierParams::default(),
    }
}

#[test]
fn probes_of_small_and_zero_data_are_stable() {
    let p = small_probe(2.0, false);
    let probe = p.probe(1e-3).unwrap();
    assert_eq!(probe.label, Label::Stable, "{probe:?}");
    assert!((probe.t_end - 2.0).abs() < 1e-9);
    let zero = p.probe(0.0).unwrap();
    assert_eq!(zero.label, Label::Stable);
    assert_eq!(zero.amplification, 0.0);
}

#[test]
fn threshold_sweep_classifies_out_of_bracket() {
    // the whole bracket is stable for a tiny linear problem → Above
    let report = threshold_sweep(&[1e-2, 5e-3], (1e-4, 1e-3), 8, 2.0, 10.0, 0, |nu| {
        let mut p = small_probe(2.0, false);
        p.params = PhysicalParams::new(nu, 2.0)?;
        p.horizon = 1.0;
        Ok(p)
    })
    .unwrap();
    assert_eq!(report.thresholds.len(), 2);
    for t in &report.thresholds {
        assert!(matches!(t, Threshold::Above { .. }), "{t:?}");
    }
    assert!(report.alpha.is_none() && report.alpha_error.is_some());
}

fn nonlinear_cfg(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.command = Command::NonlinearRun;
    cfg.grid = [8, 8, 8];
    cfg.horizon = Some(Horizon::Fixed { t: 1.0 });
    cfg.record_every = 0.25;
    cfg.checkpoint_every = Some(0.5);
    cfg.eps = 1e-2;
    cfg.seed = 11;
    cfg.out = out.to_path_buf();
    cfg
}

#[test]
fn nonlinear_run_is_deterministic_and_writes_manifest() {
    let dir = scratch("nl");
    let a = nonlinear_cfg(&dir.join("a"));
    let b = nonlinear_cfg(&dir.join("b"));
    assert_eq!(run_id(&a), run_id(&b), "id ignores the output location");
    let ma = execute(&a).unwrap();
    let mb = execute(&b).unwrap();
    assert_eq!(ma.exit_code, 0, "{:?}", ma.error);
    assert_eq!(ma.status, Status::Ok);
    for f in ["energy.csv", "fits.json", "checkpoints/final.bin", "manifest.json"] {
        assert!(ma.outputs.iter().any(|o| o == f), "{f} missing from {:?}", ma.outputs);
    }
    assert!(ma.outputs.iter().filter(|o| o.starts_with("checkpoints/t")).count() >= 2);
    let ea = std::fs::read(run_dir(&a).join("energy.csv")).unwrap();
    let eb = std::fs::read(run_dir(&b).join("energy.csv")).unwrap();
    assert_eq!(ea, eb);
    assert_eq!(mb.outputs, ma.outputs);
    let text = std::fs::read_to_string(run_dir(&a).join("manifest.json")).unwrap();
    let back: Manifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back, ma);
}

#[test]
fn failing_config_still_writes_manifest_with_exit_code() {
    let dir = scratch("bad");
    let mut cfg = nonlinear_cfg(&dir);
    cfg.dt = -1.0;
    cfg.id = Some("bad-dt".into());
    let m = execute(&cfg).unwrap();
    assert_eq!(m.exit_code, 2);
    assert_eq!(m.status, Status::ConfigError);
    assert!(dir.join("runs/bad-dt/manifest.json").exists());
}

#[test]
fn multiplier_audit_command_writes_jsonl() {
    let dir = scratch("audit");
    let mut cfg = ExperimentConfig::default();
    cfg.command = Command::MultiplierAudit;
    cfg.samples = 10_000;
    cfg.out = dir.clone();
    let m = execute(&cfg).unwrap();
    assert_eq!(m.exit_code, 0, "{:?}", m.error);
    let text = std::fs::read_to_string(run_dir(&cfg).join("audit.jsonl")).unwrap();
    let n = text.lines().count();
    assert!(n >= 3);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["violations"], 0, "{line}");
    }
}
