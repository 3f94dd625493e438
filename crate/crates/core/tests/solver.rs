use std::f64::consts::PI;

use num_complex::Complex64;
use rotcouette::linear::{PhysicalParams, QwState, QwSystem};
use rotcouette::solver::*;
use rotcouette::spectral::{DomainKind, GridSpec, SpectralField};
use rotcouette::LabError;

fn grid(n: [usize; 3]) -> GridSpec {
    GridSpec::new(DomainKind::TR2, n, 4.0 * PI, 4.0 * PI).unwrap()
}

fn band(g: GridSpec, eps: f64, seed: u64) -> SpectralField {
    InitialData {
        profile: Profile::RandomBand {
            k_max: 2,
            xi_max: 2.0,
            eta_max: 2.0,
        },
        amplitude: eps,
        seed,
    }
    .build(g)
    .unwrap()
}

fn solver(u: SpectralField, nu: f64, beta: f64, opts: SolverOptions) -> Solver {
    Solver::new(SolverState::new(u, PhysicalParams::new(nu, beta).unwrap()).unwrap(), opts).unwrap()
}

#[test]
fn zero_field_is_a_fixed_point() {
    let g = grid([8, 8, 8]);
    let mut s = solver(SpectralField::zeros(g, 3), 1e-2, 2.0, SolverOptions::default());
    for _ in 0..5 {
        s.step(0.1).unwrap();
    }
    assert!(s.state.u.data.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
}

#[test]
fn shear_free_zero_mode_follows_lift_up() {
    let g = grid([8, 16, 16]);
    let (m, l) = (2i64, 1i64);
    let (xi, eta) = (m as f64 * g.dxi(), l as f64 * g.deta());
    let mut u = SpectralField::zeros(g, 3);
    let a = Complex64::new(0.3, -0.1);
    let c = Complex64::new(0.2, 0.05);
    for (sgn, v) in [(1i64, [a, eta * c, -xi * c]), (-1, [a.conj(), eta * c.conj(), -xi * c.conj()])] {
        for k in 0..3 {
            u.set_at(k, 0, sgn * m, sgn * l, v[k]);
        }
    }
    let u0 = u.clone();
    let mut s = solver(u, 0.0, 0.0, SolverOptions::default());
    s.advance_to(2.0, 0.01).unwrap();
    let want = u0.at(0, 0, m, l) - 2.0 * u0.at(1, 0, m, l);
    assert!((s.state.u.at(0, 0, m, l) - want).norm() < 1e-8 * want.norm());
    for k in 1..3 {
        assert!((s.state.u.at(k, 0, m, l) - u0.at(k, 0, m, l)).norm() < 1e-8);
    }
}

#[test]
fn inviscid_budget_divergence_and_reality() {
    let g = grid([16, 16, 16]);
    let mut s = solver(band(g, 0.5, 3), 0.0, 2.0, SolverOptions::default());
    let b0 = s.state.budget();
    let e0 = s.state.energy();
    for _ in 0..200 {
        s.step(2e-3).unwrap();
        assert!(s.state.divergence() <= 1e-11);
    }
    assert!(s.fft().imaginary_residue(&s.state.u) <= 1e-12);
    assert!(s.state.u.hermitian_defect() == 0.0);
    let drift = (s.state.budget() - b0).abs() / e0;
    assert!(drift <= 1e-8 * s.state.t, "budget drift {drift:e}");
    // the lift-up term does work, so the plain energy is not what is conserved
    assert!((s.state.energy() - e0).abs() > 1e3 * drift * e0);
}

#[test]
fn fourth_order_in_time() {
    let g = grid([16, 16, 8]);
    let u = band(g, 2.0, 4);
    let run = |dt: f64| {
        let mut s = solver(u.clone(), 0.05, 2.0, SolverOptions::default());
        s.advance_to(1.0, dt).unwrap();
        s.state.energy()
    };
    let (a, b, c) = (run(0.1), run(0.05), run(0.025));
    let ratio = (a - b) / (b - c);
    assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
}

#[test]
fn linearised_run_matches_mode_propagator() {
    let g = grid([8, 16, 8]);
    let (nu, beta) = (1e-3, 2.0);
    let u = band(g, 1.0, 5);
    let mut s = solver(
        u,
        nu,
        beta,
        SolverOptions {
            nonlinear: false,
            ..SolverOptions::default()
        },
    );
    let q0 = extract(&s.state, What::Q).unwrap();
    let w0 = extract(&s.state, What::W).unwrap();
    let sys = QwSystem::from_params(&s.state.params).unwrap();
    let times: Vec<f64> = (1..=10).map(|i| i as f64).collect();
    let mut trajs = Vec::new();
    for i in 0..g.len() {
        let w = g.wavevector(i);
        if w[0] == 0.0 || (q0.data[i].norm() + w0.data[i].norm()) == 0.0 {
            continue;
        }
        let tr = sys
            .propagate(w, QwState { q: q0.data[i], w: w0.data[i] }, 0.0, &times, 0.05)
            .unwrap();
        trajs.push((i, tr));
    }
    assert!(trajs.len() > 20);
    for (j, &t) in times.iter().enumerate() {
        s.advance_to(t, 0.01).unwrap();
        let q = extract(&s.state, What::Q).unwrap();
        let w = extract(&s.state, What::W).unwrap();
        for (i, tr) in &trajs {
            let want = tr.states[j];
            let scale = want.norm();
            assert!((q.data[*i] - want.q).norm() <= 1e-6 * scale, "Q mode {i} t={t}");
            assert!((w.data[*i] - want.w).norm() <= 1e-6 * scale, "W mode {i} t={t}");
        }
    }
}

#[test]
fn remap_bookkeeping() {
    let g = grid([8, 32, 8]);
    let mut u = SpectralField::zeros(g, 3);
    // (k, ξ, η) = (1, 0, 1): (1, 0, −1)·c is orthogonal to (1, 0, 1)
    let l = (1.0 / g.deta()).round() as i64;
    let c = Complex64::new(0.1, 0.0);
    u.set_at(0, 1, 0, l, c);
    u.set_at(2, 1, 0, l, -c);
    u.set_at(0, -1, 0, -l, c.conj());
    u.set_at(2, -1, 0, -l, -c.conj());
    let mut s = solver(u, 0.0, 2.0, SolverOptions { nonlinear: false, ..SolverOptions::default() });
    assert_eq!(s.remap().unwrap(), 0.0);
    let shift = 3.0 * g.dxi();
    s.advance_to(shift, 0.01).unwrap();
    s.state.t = shift;
    let before = s.state.u.clone();
    let lost = s.remap().unwrap();
    assert_eq!(lost, 0.0);
    assert_eq!(s.state.last_remap, shift);
    assert_eq!(s.state.u.at(0, 1, -3, l), before.at(0, 1, 0, l));
    assert_eq!(s.state.u.at(0, -1, 3, -l), before.at(0, -1, 0, -l));
    assert_eq!(s.state.u.at(0, 1, 0, l), Complex64::new(0.0, 0.0));
    // immediately again: identity
    let again = s.state.u.clone();
    assert_eq!(s.remap().unwrap(), 0.0);
    assert_eq!(s.state.u, again);
    // half a grid step of shear cannot be remapped
    s.state.t += 0.5 * g.dxi();
    assert!(matches!(s.remap(), Err(LabError::Scheduling(_))));
}

#[test]
fn remap_discards_and_logs_energy_off_the_grid() {
    let g = grid([8, 16, 8]);
    let mut s = solver(band(g, 1.0, 6), 0.0, 2.0, SolverOptions { nonlinear: false, ..SolverOptions::default() });
    let e0 = s.state.energy();
    let t = 4.0 * g.dxi();
    s.advance_to(t, 0.01).unwrap();
    let e_before = s.state.energy();
    let lost = s.remap().unwrap();
    assert!(lost > 0.0);
    assert!((s.state.energy() + lost - e_before).abs() < 1e-12 * e0);
    assert_eq!(s.state.discarded_energy, lost);
}

#[test]
fn scheduled_remaps_keep_the_budget() {
    let g = grid([16, 32, 8]);
    let opts = SolverOptions::default().auto_remap(&g);
    let mut s = solver(band(g, 0.5, 7), 0.0, 2.0, opts);
    let b0 = s.state.budget();
    s.advance_to(2.5, 5e-3).unwrap();
    assert!(s.state.remaps >= 2);
    assert!(s.state.divergence() <= 1e-11);
    assert!((s.state.budget() - b0).abs() <= 1e-8 * b0);
}

#[test]
fn cfl_violation_is_rejected_without_side_effects() {
    let g = grid([16, 16, 16]);
    let mut s = solver(band(g, 5e4, 8), 0.0, 2.0, SolverOptions::default());
    let before = s.state.clone();
    match s.step(1.0) {
        Err(LabError::Cfl { dt, suggested }) => {
            assert_eq!(dt, 1.0);
            assert!(suggested < 1.0);
            s.step(suggested).unwrap();
        }
        other => panic!("expected CFL rejection, got {other:?}"),
    }
    assert!(before.t == 0.0 && s.state.t > 0.0);
}

#[test]
fn checkpoint_round_trip_is_byte_exact() {
    let g = grid([8, 8, 8]);
    let dir = std::env::temp_dir().join(format!("rc-ckpt-{}", std::process::id()));
    let run = |name: &str| {
        let mut s = solver(band(g, 0.3, 9), 1e-2, 2.0, SolverOptions::default());
        s.advance_to(0.5, 0.05).unwrap();
        let p = dir.join(name);
        write_checkpoint(&p, &s.state).unwrap();
        (p, s.state)
    };
    let (p1, s1) = run("a.bin");
    let (p2, _) = run("b.bin");
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    let back = read_checkpoint(&p1).unwrap();
    assert_eq!(back, s1);
    std::fs::write(dir.join("bad.bin"), b"nonsense").unwrap();
    assert!(matches!(read_checkpoint(&dir.join("bad.bin")), Err(LabError::Config(_))));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn initial_data_contract() {
    let g = grid([16, 16, 16]);
    let bubble = InitialData {
        profile: Profile::LocalizedBubble { width: 1.0 },
        amplitude: 1e-3,
        seed: 0,
    }
    .build(g)
    .unwrap();
    let norm = rotcouette::diagnostics::aniso_norm_sq(
        &bubble,
        5,
        rotcouette::diagnostics::Derivative::Good,
        &rotcouette::spectral::ShearSymbols::at(0.0),
    )
    .sqrt();
    assert!((norm - 1e-3).abs() <= 1e-9 * 1e-3);
    assert!(rotcouette::spectral::divergence_residual(&bubble, &rotcouette::spectral::ShearSymbols::at(0.0)) < 1e-18);
    assert_eq!(band(g, 1.0, 11).data, band(g, 1.0, 11).data);
    assert_ne!(band(g, 1.0, 11).data, band(g, 1.0, 12).data);
    assert!(band(g, 0.0, 11).data.iter().all(|c| c.norm() == 0.0));
    let empty = InitialData {
        profile: Profile::RandomBand { k_max: 0, xi_max: 0.0, eta_max: 0.0 },
        amplitude: 1.0,
        seed: 0,
    };
    assert!(matches!(empty.build(g), Err(LabError::Config(_))));
}

#[test]
fn extraction_identities() {
    let g = grid([8, 16, 16]);
    let mut s = solver(band(g, 1.0, 13), 1e-2, 2.5, SolverOptions::default());
    s.advance_to(1.3, 0.05).unwrap();
    let st = &s.state;
    let q = extract(st, What::Q).unwrap();
    let w = extract(st, What::W).unwrap();
    let back = velocity_from_qw_field(&q, &w, &st.sym(), st.params.beta).unwrap();
    let uneq = extract(st, What::UNeq).unwrap();
    let scale = uneq.max_abs();
    for (a, b) in back.data.iter().zip(&uneq.data) {
        assert!((a - b).norm() <= 1e-10 * scale);
    }
    let wpm = extract(st, What::Wpm).unwrap();
    let u0 = extract(st, What::U0).unwrap();
    let n = g.len();
    for i in 0..n {
        assert!((wpm.data[i] + wpm.data[n + i] - 2.0 * u0.data[i]).norm() < 1e-15);
    }
    let mut only_u1 = st.clone();
    for i in n..3 * n {
        only_u1.u.data[i] = Complex64::new(0.0, 0.0);
    }
    assert!(extract(&only_u1, What::Upsilon0).unwrap().data.iter().all(|c| c.norm() == 0.0));
    let mut lift = st.clone();
    lift.params = PhysicalParams::new(1e-2, 0.0).unwrap();
    assert!(matches!(extract(&lift, What::W), Err(LabError::Regime(_))));
}
