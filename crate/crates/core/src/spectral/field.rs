use num_complex::Complex64;

use super::grid::GridSpec;
use crate::error::{LabError, Result};

/// Fourier coefficients of a scalar or vector field, normalised so that
/// `f(x) = Σ f̂(k) e^{ik·x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub ncomp: usize,
    pub data: Vec<Complex64>,
}

/// Real samples on the collocation grid, same component-major layout.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    pub grid: GridSpec,
    pub ncomp: usize,
    pub data: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec, ncomp: usize) -> Self {
        SpectralField {
            grid,
            ncomp,
            data: vec![Complex64::new(0.0, 0.0); ncomp * grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, ncomp: usize, f: impl Fn(usize, [f64; 3]) -> Complex64) -> Self {
        let mut out = Self::zeros(grid, ncomp);
        let n = grid.len();
        for c in 0..ncomp {
            for i in 0..n {
                out.data[c * n + i] = f(c, grid.wavevector(i));
            }
        }
        out
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            ncomp: 1,
            data: self.comp(c).to_vec(),
        }
    }

    pub fn stack(parts: &[&SpectralField]) -> Result<SpectralField> {
        let grid = parts
            .first()
            .ok_or_else(|| LabError::config("cannot stack zero fields"))?
            .grid;
        let mut data = Vec::new();
        let mut ncomp = 0;
        for p in parts {
            if p.grid != grid {
                return Err(LabError::config("stacked fields live on different grids"));
            }
            data.extend_from_slice(&p.data);
            ncomp += p.ncomp;
        }
        Ok(SpectralField { grid, ncomp, data })
    }

    pub fn get(&self, c: usize, ix: usize, iy: usize, iz: usize) -> Complex64 {
        self.data[c * self.grid.len() + self.grid.flat(ix, iy, iz)]
    }

    /// Coefficient at signed indices (k, m, n).
    pub fn at(&self, c: usize, k: i64, m: i64, n: i64) -> Complex64 {
        let g = &self.grid;
        self.get(
            c,
            GridSpec::slot(g.nx, k),
            GridSpec::slot(g.ny, m),
            GridSpec::slot(g.nz, n),
        )
    }

    pub fn set_at(&mut self, c: usize, k: i64, m: i64, n: i64, v: Complex64) {
        let g = self.grid;
        let i = g.flat(
            GridSpec::slot(g.nx, k),
            GridSpec::slot(g.ny, m),
            GridSpec::slot(g.nz, n),
        );
        self.data[c * g.len() + i] = v;
    }

    pub fn check_same(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid || self.ncomp != other.ncomp {
            return Err(LabError::config("field shapes differ"));
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|c| *c *= s);
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut o = self.clone();
        o.scale(s);
        o
    }

    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        for (y, x) in self.data.iter_mut().zip(&x.data) {
            *y += a * x;
        }
    }

    /// Index of the mode −k in flat storage.
    pub fn conj_index(grid: &GridSpec, i: usize) -> usize {
        let (ix, iy, iz) = grid.unflat(i);
        let neg = |j: usize, n: usize| (n - j) % n;
        grid.flat(neg(ix, grid.nx), neg(iy, grid.ny), neg(iz, grid.nz))
    }

    /// Project onto Hermitian-symmetric coefficients (real data).
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        let n = g.len();
        for c in 0..self.ncomp {
            let d = &mut self.data[c * n..(c + 1) * n];
            for i in 0..n {
                let j = Self::conj_index(&g, i);
                if j < i {
                    continue;
                }
                if j == i {
                    d[i].im = 0.0;
                } else {
                    let a = 0.5 * (d[i] + d[j].conj());
                    d[i] = a;
                    d[j] = a.conj();
                }
            }
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut m: f64 = 0.0;
        for c in 0..self.ncomp {
            let d = self.comp(c);
            for (i, v) in d.iter().enumerate() {
                m = m.max((v - d[Self::conj_index(&g, i)].conj()).norm());
            }
        }
        m
    }

    /// Zero every coefficient outside the retained shell.
    pub fn dealias(&mut self) {
        let g = self.grid;
        let [mx, my, mz] = g.masks();
        let n = g.len();
        for c in 0..self.ncomp {
            let d = &mut self.data[c * n..(c + 1) * n];
            for (i, v) in d.iter_mut().enumerate() {
                let (ix, iy, iz) = g.unflat(i);
                if !(mx[ix] && my[iy] && mz[iz]) {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Σ|f̂|² over all components (no volume factor).
    pub fn coeff_sq_sum(&self) -> f64 {
        crate::spectral::deterministic_sum(&self.data, |c| c.norm_sqr())
    }

    /// Physical ‖f‖²_{L²} = |box| Σ|f̂|².
    pub fn l2_sq(&self) -> f64 {
        self.grid.volume() * self.coeff_sq_sum()
    }

    pub fn l2(&self) -> f64 {
        self.l2_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Keep only the streamwise-averaged (k = 0) modes.
    pub fn zero_mode(&self) -> SpectralField {
        let mut o = self.clone();
        let g = self.grid;
        let n = g.len();
        for c in 0..self.ncomp {
            for i in 0..n {
                if g.unflat(i).0 != 0 {
                    o.data[c * n + i] = Complex64::new(0.0, 0.0);
                }
            }
        }
        o
    }

    pub fn nonzero_modes(&self) -> SpectralField {
        let mut o = self.clone();
        o.axpy(-1.0, &self.zero_mode());
        o
    }

    pub fn has_streamwise_content(&self, tol: f64) -> bool {
        let g = self.grid;
        (0..self.ncomp).any(|c| {
            self.comp(c)
                .iter()
                .enumerate()
                .any(|(i, v)| g.unflat(i).0 != 0 && v.norm() > tol)
        })
    }
}

impl RealField {
    pub fn zeros(grid: GridSpec, ncomp: usize) -> Self {
        RealField {
            grid,
            ncomp,
            data: vec![0.0; ncomp * grid.len()],
        }
    }

    /// Sample `f(c, x, y, z)` on the collocation grid.
    pub fn from_fn(grid: GridSpec, ncomp: usize, f: impl Fn(usize, f64, f64, f64) -> f64) -> Self {
        let [xs, ys, zs] = grid.coords();
        let mut out = Self::zeros(grid, ncomp);
        let n = grid.len();
        for c in 0..ncomp {
            for i in 0..n {
                let (ix, iy, iz) = grid.unflat(i);
                out.data[c * n + i] = f(c, xs[ix], ys[iy], zs[iz]);
            }
        }
        out
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    /// Trapezoidal (spectrally exact) ‖f‖²_{L²}.
    pub fn l2_sq(&self) -> f64 {
        let w = self.grid.volume() / self.grid.len() as f64;
        w * crate::spectral::deterministic_sum(&self.data, |x| x * x)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}
