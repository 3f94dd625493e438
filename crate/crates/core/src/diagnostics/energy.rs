use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::norms::sobolev_weight;
use crate::error::{LabError, Result};
use crate::multipliers::{MultiplierState, Multipliers, WeightKind};
use crate::solver::SolverState;
use crate::spectral::{deterministic_sum, DomainKind, Fft3, GridSpec, SpectralField};

/// One row of `energy.csv`. Column order is [`EnergyRecord::CSV_HEADER`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub e0: f64,
    pub d0: f64,
    pub e_not: f64,
    pub d_not: f64,
    /// ‖u₀‖_∞
    pub sup_u0: f64,
    /// ‖(u₀³, ∇u₀³, ∂_y u₀)‖_∞
    pub sup_good: f64,
    /// (1+t)‖u²_≠‖_{L²}
    pub damping: f64,
    /// ‖(u¹_≠, u³_≠)‖_{L²}
    pub ed_tracker: f64,
    /// Integrands of the Strichartz accumulators, see [`SupNorms`].
    pub sup: SupNorms,
    /// ½‖U‖²_{L²}
    pub energy: f64,
    pub discarded_energy: f64,
}

/// Sup-norms of the streamwise average on the dealiased physical grid. (1+∂_z)f is read as the
/// two-term sum ‖f‖ + ‖∂_z f‖, W^{1,∞} as ‖f‖_∞ + ‖∇f‖_∞; vector and tensor sup-norms take
/// the largest entry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SupNorms {
    /// ‖(1+∂_z)u₀‖_∞
    pub u0: f64,
    /// ‖(1+∂_z)∇u₀‖_∞
    pub grad_u0: f64,
    /// ‖(1+∂_z)u₀³‖_{W^{1,∞}}
    pub u03_w1: f64,
    /// ‖(1+∂_z)∇u₀³‖_{W^{1,∞}}
    pub grad_u03_w1: f64,
    /// ‖(1+∂_z)∂_y u₀‖_{W^{1,∞}}
    pub dy_u0_w1: f64,
}

/// What to do with W when β/(β−1) ≤ 0 and the good unknown does not exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WPolicy {
    /// Regime error.
    Strict,
    /// Use |∇̃|(∂_zU¹ − ∂_xU³) without the √(β/(β−1)) factor.
    UnitWhenUndefined,
}

impl EnergyRecord {
    pub const CSV_HEADER: &'static str = "t,e0,d0,e_not,d_not,sup_u0,sup_good,damping,ed_tracker,\
sup_u0_aniso,sup_grad_u0,sup_u03_w1,sup_grad_u03_w1,sup_dy_u0_w1,energy,discarded_energy";

    pub fn csv_row(&self) -> String {
        let v = [
            self.t,
            self.e0,
            self.d0,
            self.e_not,
            self.d_not,
            self.sup_u0,
            self.sup_good,
            self.damping,
            self.ed_tracker,
            self.sup.u0,
            self.sup.grad_u0,
            self.sup.u03_w1,
            self.sup.grad_u03_w1,
            self.sup.dy_u0_w1,
            self.energy,
            self.discarded_energy,
        ];
        v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(",")
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| LabError::config(format!("bad energy row: {e}")))?;
        if v.len() != 16 {
            return Err(LabError::config(format!("energy row has {} columns, expected 16", v.len())));
        }
        Ok(EnergyRecord {
            t: v[0],
            e0: v[1],
            d0: v[2],
            e_not: v[3],
            d_not: v[4],
            sup_u0: v[5],
            sup_good: v[6],
            damping: v[7],
            ed_tracker: v[8],
            sup: SupNorms {
                u0: v[9],
                grad_u0: v[10],
                u03_w1: v[11],
                grad_u03_w1: v[12],
                dy_u0_w1: v[13],
            },
            energy: v[14],
            discarded_energy: v[15],
        })
    }

    pub fn is_finite(&self) -> bool {
        self.csv_row().split(',').all(|s| s.parse::<f64>().map(f64::is_finite).unwrap_or(false))
    }
}

pub fn write_energy_csv(path: &std::path::Path, records: &[EnergyRecord]) -> Result<()> {
    let mut s = String::from(EnergyRecord::CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_energy_csv(path: &std::path::Path) -> Result<Vec<EnergyRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(EnergyRecord::CSV_HEADER) {
        return Err(LabError::config(format!("{}: unexpected energy.csv header", path.display())));
    }
    lines.filter(|l| !l.trim().is_empty()).map(EnergyRecord::parse_csv_row).collect()
}

/// The energy functionals, sup-norms and trackers of one snapshot. Multiplier weights use
/// `mult` (its own ν); the explicit ν factors use the state's ν.
pub fn energy_functionals(state: &SolverState, mult: &Multipliers) -> Result<EnergyRecord> {
    energy_functionals_with(state, mult, WPolicy::Strict)
}

pub fn energy_functionals_with(state: &SolverState, mult: &Multipliers, policy: WPolicy) -> Result<EnergyRecord> {
    let u = &state.u;
    let g = u.grid;
    let n = g.len();
    let nu = state.params.nu;
    let sym = state.sym();
    let vol = g.volume();
    let beta = state.params.beta;
    let ratio = beta / (beta - 1.0);
    let w_factor = if ratio > 0.0 {
        ratio.sqrt()
    } else if policy == WPolicy::UnitWhenUndefined {
        1.0
    } else {
        return Err(LabError::Regime(format!("W is undefined for β = {beta}: β/(β−1) ≤ 0")));
    };

    // zero modes
    let zero_idx: Vec<usize> = (0..n).filter(|&i| g.unflat(i).0 == 0).collect();
    let u0sq = |i: usize| (0..3).map(|c| u.data[c * n + i].norm_sqr()).sum::<f64>();
    let (e0, d0) = match g.domain {
        DomainKind::TR2 => {
            let mut m3cache: HashMap<usize, (f64, f64)> = HashMap::new();
            for &i in &zero_idx {
                let iy = g.unflat(i).1;
                m3cache.entry(iy).or_insert_with(|| {
                    let xi = g.wavevector(i)[1];
                    (mult.log_m3(sym.t, 0.0, xi), mult.dlog_m3(sym.t, 0.0, xi))
                });
            }
            let e = deterministic_sum(&zero_idx, |&i| {
                let [_, xi, eta] = g.wavevector(i);
                let r2 = xi * xi + eta * eta;
                let (lm3, _) = m3cache[&g.unflat(i).1];
                let a0 = (-2.0 * lm3).exp();
                u0sq(i) * (sobolev_weight(r2, 4) + (1.0 + eta * eta) * r2.powi(5) * a0)
            });
            let d = deterministic_sum(&zero_idx, |&i| {
                let [_, xi, eta] = g.wavevector(i);
                let r2 = xi * xi + eta * eta;
                let (lm3, dm3) = m3cache[&g.unflat(i).1];
                let a0 = (-2.0 * lm3).exp();
                let aniso = (1.0 + eta * eta) * r2.powi(5) * a0;
                u0sq(i) * (nu * r2 * sobolev_weight(r2, 4) + nu * r2 * aniso + dm3 * aniso)
            });
            (vol * e, vol * d)
        }
        DomainKind::TRT => {
            let e = deterministic_sum(&zero_idx, |&i| {
                let [_, xi, eta] = g.wavevector(i);
                let r2 = xi * xi + eta * eta;
                u0sq(i) * (1.0 + eta * eta) * sobolev_weight(r2, 5)
            });
            let d = deterministic_sum(&zero_idx, |&i| {
                let [_, xi, eta] = g.wavevector(i);
                let r2 = xi * xi + eta * eta;
                u0sq(i) * nu * r2 * (1.0 + eta * eta) * sobolev_weight(r2, 5)
            });
            (vol * e, vol * d)
        }
    };

    // non-zero modes through (Q, W)
    let ms = MultiplierState::compute(mult, u, &sym, WeightKind::A);
    let nz_idx: Vec<usize> = (0..n).filter(|&i| g.unflat(i).0 != 0).collect();
    let i1 = Complex64::new(0.0, 1.0);
    let qw_sq = |i: usize| {
        let [k, xi, eta] = g.wavevector(i);
        let xt = sym.tilde_xi(k, xi);
        let p = k * k + xt * xt + eta * eta;
        let q = -p * u.data[n + i];
        let w = w_factor * p.sqrt() * (i1 * eta * u.data[i] - i1 * k * u.data[2 * n + i]);
        let a = ms.weight[i];
        (q.norm_sqr() + w.norm_sqr()) * a * a
    };
    let e_not = vol
        * deterministic_sum(&nz_idx, |&i| {
            let [k, xi, eta] = g.wavevector(i);
            let gx = sym.good_xi(k, xi);
            qw_sq(i) * sobolev_weight(k * k + gx * gx + eta * eta, 4)
        });
    let nu3 = mult.nu.cbrt();
    let d_not = vol
        * deterministic_sum(&nz_idx, |&i| {
            let [k, xi, eta] = g.wavevector(i);
            let gx = sym.good_xi(k, xi);
            let xt = sym.tilde_xi(k, xi);
            let p = k * k + xt * xt + eta * eta;
            qw_sq(i) * (nu * p * sobolev_weight(k * k + gx * gx + eta * eta, 4) + nu3 + k * k / p + ms.dlog_m3[i])
        });

    let u2n = vol * deterministic_sum(&nz_idx, |&i| u.data[n + i].norm_sqr());
    let u13n = vol * deterministic_sum(&nz_idx, |&i| u.data[i].norm_sqr() + u.data[2 * n + i].norm_sqr());
    let sups = ZeroPlane::new(u).sups();

    Ok(EnergyRecord {
        t: state.t,
        e0,
        d0,
        e_not,
        d_not,
        sup_u0: sups.0,
        sup_good: sups.1,
        damping: (1.0 + state.t) * u2n.sqrt(),
        ed_tracker: u13n.sqrt(),
        sup: sups.2,
        energy: state.energy(),
        discarded_energy: state.discarded_energy,
    })
}

/// The k = 0 plane of a velocity field with a 2D transform for sup-norms of its derivatives.
pub struct ZeroPlane {
    field: SpectralField,
    fft: Fft3,
    cache: HashMap<(usize, u32, u32), f64>,
}

impl ZeroPlane {
    pub fn new(u: &SpectralField) -> Self {
        let g = u.grid;
        let pg = GridSpec { nx: 1, ..g };
        let mut field = SpectralField::zeros(pg, u.ncomp);
        let (n, pn) = (g.len(), pg.len());
        for c in 0..u.ncomp {
            field.data[c * pn..(c + 1) * pn].copy_from_slice(&u.data[c * n..c * n + pn]);
        }
        ZeroPlane {
            field,
            fft: Fft3::new(pg),
            cache: HashMap::new(),
        }
    }

    /// sup |∂_y^a ∂_z^b u_c| on the physical grid.
    pub fn sup(&mut self, c: usize, a: u32, b: u32) -> f64 {
        if let Some(v) = self.cache.get(&(c, a, b)) {
            return *v;
        }
        let g = self.field.grid;
        let n = g.len();
        let i1 = Complex64::new(0.0, 1.0);
        let mut f = SpectralField::zeros(g, 1);
        for i in 0..n {
            let [_, xi, eta] = g.wavevector(i);
            f.data[i] = self.field.data[c * n + i] * (i1 * xi).powu(a) * (i1 * eta).powu(b);
        }
        let v = self.fft.backward(&f).map(|r| r.max_abs()).unwrap_or(f64::NAN);
        self.cache.insert((c, a, b), v);
        v
    }

    fn max_over(&mut self, terms: &[(usize, u32, u32)]) -> f64 {
        terms.iter().map(|&(c, a, b)| self.sup(c, a, b)).fold(0.0, f64::max)
    }

    /// sup over the listed derivatives plus the same with one more ∂_z.
    fn aniso(&mut self, terms: &[(usize, u32, u32)]) -> f64 {
        let dz: Vec<_> = terms.iter().map(|&(c, a, b)| (c, a, b + 1)).collect();
        self.max_over(terms) + self.max_over(&dz)
    }

    /// (‖u₀‖_∞, ‖(u₀³, ∇u₀³, ∂_y u₀)‖_∞, accumulator integrands).
    pub fn sups(&mut self) -> (f64, f64, SupNorms) {
        let all = |a, b| [(0, a, b), (1, a, b), (2, a, b)];
        let grad = |c| [(c, 1, 0), (c, 0, 1)];
        let hess = |c| [(c, 2, 0), (c, 1, 1), (c, 0, 2)];
        let sup_u0 = self.max_over(&all(0, 0));
        let mut good = vec![(2, 0, 0)];
        good.extend(grad(2));
        good.extend(all(1, 0));
        let sup_good = self.max_over(&good);

        let u0 = self.aniso(&all(0, 0));
        let g_all: Vec<_> = (0..3).flat_map(grad).collect();
        let grad_u0 = self.aniso(&g_all);
        let u03_w1 = self.aniso(&[(2, 0, 0)]) + self.aniso(&grad(2));
        let grad_u03_w1 = self.aniso(&grad(2)) + self.aniso(&hess(2));
        let dy: Vec<_> = all(1, 0).to_vec();
        let dy_grad: Vec<_> = (0..3).flat_map(|c| [(c, 2, 0), (c, 1, 1)]).collect();
        let dy_u0_w1 = self.aniso(&dy) + self.aniso(&dy_grad);
        (
            sup_u0,
            sup_good,
            SupNorms {
                u0,
                grad_u0,
                u03_w1,
                grad_u03_w1,
                dy_u0_w1,
            },
        )
    }
}
