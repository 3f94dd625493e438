use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use rotcouette::kernels::*;
use rotcouette::LabError;

fn table_one() -> &'static BTable {
    static T: OnceLock<BTable> = OnceLock::new();
    T.get_or_init(|| BTable::new(RadialPower::One, 30.0, 0.005).unwrap())
}

#[test]
fn dyadic_pieces_partition_unity() {
    for i in 0..=3200 {
        let r = 0.3 + 3.2 * i as f64 / 3200.0;
        let s: f64 = (-12..=12).map(|j| chi(j, r)).sum();
        assert!((s - 1.0).abs() < 1e-10, "Σχ_j({r}) = {s}");
    }
}

#[test]
fn bump_profile_shape() {
    let a = BumpProfile;
    for i in 0..=10_000 {
        let r = 6.0 * i as f64 / 10_000.0;
        let v = a.a(r);
        assert!(v >= 0.0);
        if !(0.25..=4.0).contains(&r) {
            assert_eq!(v, 0.0, "A({r}) = {v}");
        }
        if (0.5..=2.0).contains(&r) {
            assert_eq!(v, 1.0);
        }
        let three = chi(-1, r) + chi(0, r) + chi(1, r);
        assert!((v - three).abs() < 1e-14);
    }
}

#[test]
fn b_at_origin_is_the_weighted_mass() {
    // composite Simpson on the support with a very fine step
    let n = 200_000;
    let (lo, hi) = BumpProfile::SUPPORT;
    let h = (hi - lo) / n as f64;
    let f = |r: f64| BumpProfile.a(r) * r;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let mass = s * h / 3.0;
    let b0 = eval_b(0.0, RadialPower::One).unwrap();
    assert!(b0.im.abs() < 1e-14 && b0.re > 0.0);
    assert!((b0.re - mass).abs() < 1e-9 * mass, "{} vs {mass}", b0.re);
}

#[test]
fn b_decays_and_is_hermitian() {
    for power in [RadialPower::One, RadialPower::Two] {
        let b0 = eval_b(0.0, power).unwrap().norm();
        // integration by parts n times: |B(z)| ≤ ‖∂ⁿ(A rᵖ)‖_{L¹} / |z|ⁿ
        let bounds = ibp_norms(power);
        for z in [5.0, 10.0, 20.0, 40.0] {
            let bz = eval_b(z, power).unwrap().norm();
            let ibp = (1..=3).map(|n| bounds[n - 1] / z.powi(n as i32)).fold(f64::INFINITY, f64::min);
            assert!(bz <= ibp, "{power:?} z={z}: |B| {bz} above IBP bound {ibp}");
        }
        println!("{power:?}: |B(20)|/B(0) = {:.3e}", eval_b(20.0, power).unwrap().norm() / b0);
        for z in [0.3, 1.7, 6.0, 13.5] {
            let (p, m) = (eval_b(z, power).unwrap(), eval_b(-z, power).unwrap());
            assert!((p.conj() - m).norm() < 1e-10);
        }
        let weighted = |z: f64| eval_b(z, power).unwrap().norm() * (1.0 + z * z).powf(1.5);
        // bounded on [0, 400] and already decaying beyond it
        let body = (0..=160).map(|i| weighted(2.5 * i as f64)).fold(0.0, f64::max);
        let tail = (0..=80).map(|i| weighted(400.0 + 2.5 * i as f64)).fold(0.0, f64::max);
        assert!(body.is_finite() && tail <= 0.1 * body, "⟨z⟩³|B|: body {body}, tail {tail}");
    }
}

/// ‖∂ⁿ(A(r) rᵖ)‖_{L¹} for n = 1, 2, 3 by centred differences on a fine grid.
fn ibp_norms(power: RadialPower) -> [f64; 3] {
    let p = match power {
        RadialPower::One => 1,
        RadialPower::Two => 2,
    };
    let h = 1e-3;
    let n = (4.2 / h) as usize;
    let f: Vec<f64> = (0..=n).map(|i| {
        let r = i as f64 * h;
        BumpProfile.a(r) * r.powi(p)
    }).collect();
    let mut d = f;
    let mut out = [0.0; 3];
    for o in out.iter_mut() {
        d = d.windows(3).map(|w| (w[2] - w[0]) / (2.0 * h)).collect();
        *o = d.iter().map(|v| v.abs()).sum::<f64>() * h;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn table_matches_direct_quadrature(z in -30.0f64..30.0) {
        let t = table_one().eval(z);
        let d = eval_b(z, RadialPower::One).unwrap();
        prop_assert!((t - d).norm() < 1e-9, "z = {}: {} vs {}", z, t, d);
    }
}

#[test]
fn table_rejects_out_of_range() {
    assert!(table_one().eval(31.0).re.is_nan());
    assert!(matches!(BTable::new(RadialPower::One, 1.0, 2.0), Err(LabError::Config(_))));
}

fn cross_check(kind: KernelKind, t: f64) {
    let fft = FftKernel::new(kind, t, 512, 256.0).unwrap();
    let pk = PolarKernel::new(kind, 30.0).unwrap();
    let scale = (-40..=40)
        .flat_map(|j| (-40..=40).map(move |m| (j, m)))
        .map(|(j, m)| fft.at(j, m).0.norm())
        .fold(0.0, f64::max);
    for (jy, jz) in [(0, 0), (3, -5), (-7, 2), (10, 10), (0, 21), (-30, 11), (17, -33)] {
        let (v, rho, phi) = fft.at(jy, jz);
        let (w, _) = pk.eval(t, rho, phi).unwrap();
        assert!(
            (v - w).norm() <= 1e-4 * scale,
            "{kind:?} t={t} at ({jy},{jz}): fft {v} polar {w}"
        );
    }
}

#[test]
fn polar_route_agrees_with_fft_route() {
    cross_check(KernelKind::K, 10.0);
    cross_check(KernelKind::M { a: 1 }, 10.0);
    cross_check(KernelKind::M { a: 0 }, 4.0);
}

#[test]
fn half_circle_integral_matches_dense_sum_and_bessel() {
    for t in [5.0, 37.0, 120.0] {
        let (v, _) = theta_integral(t, 0.0, (0.0, PI), |_| Complex64::new(1.0, 0.0), 1e-12).unwrap();
        let n = 400_000;
        let h = PI / n as f64;
        let dense: Complex64 = (0..n)
            .map(|i| Complex64::from_polar(1.0, t * ((i as f64 + 0.5) * h).sin()))
            .sum::<Complex64>()
            * h;
        assert!((v - dense).norm() < 1e-7, "t={t}: {v} vs {dense}");
        assert!((v.norm() - dense.norm()).abs() < 1e-7);
    }
    // Re ∫₀^π e^{it sinθ} dθ = π J₀(t)
    let t: f64 = 5.0;
    let mut j0 = 0.0;
    let mut term = 1.0;
    for m in 0..60 {
        if m > 0 {
            term *= -(t / 2.0).powi(2) / (m as f64 * m as f64);
        }
        j0 += term;
    }
    let (v, _) = theta_integral(t, 0.0, (0.0, PI), |_| Complex64::new(1.0, 0.0), 1e-13).unwrap();
    assert!((v.re - PI * j0).abs() < 1e-10, "{} vs {}", v.re, PI * j0);
}

#[test]
fn kernel_samples_are_well_formed() {
    let grid = PolarGrid {
        rhos: vec![0.0, 2.0, 7.0],
        phis: (0..8).map(|j| j as f64 * PI / 4.0).collect(),
    };
    for s in [eval_k_sup(20.0, &grid).unwrap(), eval_m_sup(20.0, 1, &grid).unwrap()] {
        assert!(s.sup > 0.0 && s.sup.is_finite());
        assert!(s.error_estimate >= 0.0 && s.error_estimate < 1e-8);
    }
    assert!(matches!(eval_k_sup(0.5, &grid), Err(LabError::Config(_))));
    assert!(matches!(eval_m_sup(10.0, 2, &grid), Err(LabError::Config(_))));
    assert!(theta_integral(1.0, 0.0, (0.0, 4.0), |_| Complex64::new(1.0, 0.0), 1e-10).is_err());
}

#[test]
fn torus_kernel_conjugation_symmetry() {
    let bump = TorusBump { center: 1.0, half_width: 1.0 };
    for gt in [10.0, 300.0] {
        let p = TorusKernel::new(1, gt, bump, 1.0).unwrap();
        let m = TorusKernel::new(-1, gt, bump, 1.0).unwrap();
        for y in [-3.0, 0.0, 0.7, 25.0] {
            assert!((m.eval(y) - p.eval(-y).conj()).norm() < 1e-12 * p.eval(-y).norm().max(1.0));
        }
        let (sp, sm) = (p.sup().1, m.sup().1);
        assert!((sp - sm).abs() <= 1e-9 * sp, "{sp} vs {sm}");
    }
    assert!(matches!(TorusKernel::new(0, 1.0, bump, 1.0), Err(LabError::Config(_))));
}

#[test]
fn torus_samples_resolved() {
    let bump = TorusBump { center: 1.0, half_width: 1.0 };
    let times: Vec<f64> = rotcouette::fit::logspace(10.0, 1e3, 20);
    let (fit, samples) = torus_mode_decay(1, 1.0, &times, bump).unwrap();
    for s in &samples {
        assert!(s.error_estimate <= 1e-8 * s.sup, "t={} err {}", s.t, s.error_estimate);
    }
    assert!(fit.rate < 0.0);
}

#[test]
fn kernel_csv_layout() {
    let dir = std::env::temp_dir().join(format!("rc_kcsv_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k.csv");
    let s = KernelSample { t: 10.0, sup: 0.5, error_estimate: 1e-12, rho: 1.0, phi: 0.0 };
    write_kernel_csv(&path, &[s, s]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], KERNEL_CSV_HEADER);
    assert_eq!(lines.len(), 3);
    let cols: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cols, vec![10.0, 0.5, 1e-12]);
    std::fs::remove_dir_all(&dir).ok();
}
