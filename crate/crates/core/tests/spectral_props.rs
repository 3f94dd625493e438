use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotcouette::spectral::*;

fn grid8() -> GridSpec {
    GridSpec::new(DomainKind::TR2, [8, 8, 8], 4.0 * PI, 4.0 * PI).unwrap()
}

fn random_real(g: GridSpec, ncomp: usize, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = RealField::zeros(g, ncomp);
    f.data.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    f
}

fn random_spectral(g: GridSpec, ncomp: usize, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(g, ncomp);
    f.data
        .iter_mut()
        .for_each(|c| *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_and_parseval(seed in any::<u64>()) {
        let g = GridSpec::new(DomainKind::TR2, [8, 12, 6], 4.0 * PI, 5.0 * PI).unwrap();
        let fft = Fft3::new(g);
        let f = random_real(g, 3, seed);
        let s = fft.forward(&f).unwrap();
        let back = fft.backward(&s).unwrap();
        let scale = f.max_abs();
        for (a, b) in f.data.iter().zip(&back.data) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        let lhs = f.l2_sq();
        prop_assert!((lhs - s.l2_sq()).abs() <= 1e-12 * lhs);
        prop_assert!(s.hermitian_defect() < 1e-14);
    }

    #[test]
    fn projection_idempotent_and_solenoidal(seed in any::<u64>(), t in 0.0f64..20.0) {
        let g = grid8();
        let sym = ShearSymbols::at(t);
        let u = random_spectral(g, 3, seed);
        let p1 = leray_project_tilde(&u, t).unwrap();
        let p2 = leray_project_tilde(&p1, t).unwrap();
        prop_assert!(divergence_residual(&p1, &sym) < 1e-12);
        for (a, b) in p1.data.iter().zip(&p2.data) {
            prop_assert!((a - b).norm() < 1e-14);
        }
        // self-adjoint per mode: ⟨Pu, v⟩ = ⟨u, Pv⟩
        let v = random_spectral(g, 3, seed ^ 0x9e37);
        let pv = leray_project_tilde(&v, t).unwrap();
        let n = g.len();
        for i in 0..n {
            let l: Complex64 = (0..3).map(|c| p1.data[c * n + i] * v.data[c * n + i].conj()).sum();
            let r: Complex64 = (0..3).map(|c| u.data[c * n + i] * pv.data[c * n + i].conj()).sum();
            prop_assert!((l - r).norm() < 1e-13);
        }
        // (0,0,0) passes through
        for c in 0..3 {
            prop_assert_eq!(p1.data[c * n], u.data[c * n]);
        }
    }

    #[test]
    fn tilde_derivative_commutes_with_riesz_on_zero_modes(seed in any::<u64>(), t in 0.0f64..50.0) {
        let g = grid8();
        let f = random_spectral(g, 1, seed).zero_mode();
        for axis in [Axis::X, Axis::YTilde, Axis::Z] {
            for r in [Riesz::R2, Riesz::R3, Riesz::R3Abs] {
                let a = riesz(&tilde_derivative(&f, axis, t), r).unwrap();
                let b = tilde_derivative(&riesz(&f, r).unwrap(), axis, t);
                for (x, y) in a.data.iter().zip(&b.data) {
                    prop_assert!((x - y).norm() < 1e-13);
                }
            }
        }
        // k = 0 modes see no shear
        let d0 = tilde_derivative(&f, Axis::YTilde, 0.0);
        let dt = tilde_derivative(&f, Axis::YTilde, t);
        prop_assert_eq!(d0, dt);
    }
}

#[test]
fn random_round_trip_oracle() {
    let g = GridSpec::new(DomainKind::TRT, [16, 16, 16], 8.0 * PI, 0.0).unwrap();
    let fft = Fft3::new(g);
    let f = random_real(g, 1, 7);
    let back = fft.backward(&fft.forward(&f).unwrap()).unwrap();
    let err = f
        .data
        .iter()
        .zip(&back.data)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-12, "round trip error {err}");
}

#[test]
fn riesz_squares_sum_to_minus_identity() {
    let g = grid8();
    let mut f = random_spectral(g, 1, 3).zero_mode();
    f.data[0] = Complex64::new(0.0, 0.0);
    let r2 = riesz(&riesz(&f, Riesz::R2).unwrap(), Riesz::R2).unwrap();
    let r3 = riesz(&riesz(&f, Riesz::R3).unwrap(), Riesz::R3).unwrap();
    for i in 0..g.len() {
        assert!((r2.data[i] + r3.data[i] + f.data[i]).norm() < 1e-14);
    }
}

/// Band-limited products against brute-force convolution over the retained shell.
#[test]
fn dealiased_product_equals_truncated_convolution() {
    let g = grid8();
    let fft = Fft3::new(g);
    let mut a = random_spectral(g, 1, 11);
    let mut b = random_spectral(g, 1, 12);
    a.dealias();
    b.dealias();
    let c = dealiased_product(&fft, &a, &b);
    let [kx, ky, kz] = g.cutoffs();
    let mut worst: f64 = 0.0;
    for m0 in -kx..=kx {
        for m1 in -ky..=ky {
            for m2 in -kz..=kz {
                let mut s = Complex64::new(0.0, 0.0);
                for p0 in -kx..=kx {
                    for p1 in -ky..=ky {
                        for p2 in -kz..=kz {
                            let (q0, q1, q2) = (m0 - p0, m1 - p1, m2 - p2);
                            if q0.abs() > kx || q1.abs() > ky || q2.abs() > kz {
                                continue;
                            }
                            s += a.at(0, p0, p1, p2) * b.at(0, q0, q1, q2);
                        }
                    }
                }
                worst = worst.max((s - c.at(0, m0, m1, m2)).norm());
            }
        }
    }
    assert!(worst < 1e-13, "convolution mismatch {worst}");
    // discarded shell is exactly zero
    for (i, v) in c.data.iter().enumerate() {
        let (ix, iy, iz) = g.unflat(i);
        if !g.retained(ix, iy, iz) {
            assert_eq!(*v, Complex64::new(0.0, 0.0));
        }
    }
}
