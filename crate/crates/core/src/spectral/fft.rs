use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::field::{RealField, SpectralField};
use super::grid::GridSpec;
use crate::error::{LabError, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Planned 3D transforms for one grid.
///
/// Forward carries the 1/N normalisation. The `pruned` variants skip one-dimensional lines that
/// are identically zero (backward) or discarded (forward) under the dealiasing rule; they are
/// what the nonlinear term uses.
pub struct Fft3 {
    grid: GridSpec,
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    masks: [Vec<bool>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("grid", &self.grid).finish()
    }
}

impl Fft3 {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let dims = grid.dims();
        let fwd = dims.map(|n| planner.plan_fft_forward(n));
        let inv = dims.map(|n| planner.plan_fft_inverse(n));
        Fft3 {
            grid,
            fwd,
            inv,
            masks: grid.masks(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn forward(&self, f: &RealField) -> Result<SpectralField> {
        if f.grid.dims() != self.grid.dims() {
            return Err(LabError::config(format!(
                "sample array {:?} does not match transform grid {:?}",
                f.grid.dims(),
                self.grid.dims()
            )));
        }
        let n = self.grid.len();
        let mut out = SpectralField::zeros(self.grid, f.ncomp);
        for c in 0..f.ncomp {
            let buf = out.comp_mut(c);
            for (b, x) in buf.iter_mut().zip(&f.data[c * n..(c + 1) * n]) {
                *b = Complex64::new(*x, 0.0);
            }
            self.forward_inplace(buf, false);
        }
        Ok(out)
    }

    pub fn backward(&self, f: &SpectralField) -> Result<RealField> {
        if f.grid.dims() != self.grid.dims() {
            return Err(LabError::config("spectral field does not match transform grid"));
        }
        let n = self.grid.len();
        let mut out = RealField::zeros(self.grid, f.ncomp);
        let mut buf = vec![ZERO; n];
        for c in 0..f.ncomp {
            buf.copy_from_slice(f.comp(c));
            self.backward_inplace(&mut buf, false);
            for (o, b) in out.data[c * n..(c + 1) * n].iter_mut().zip(&buf) {
                *o = b.re;
            }
        }
        Ok(out)
    }

    /// Largest imaginary part produced by the inverse transform, relative to the largest sample.
    pub fn imaginary_residue(&self, f: &SpectralField) -> f64 {
        let mut worst: f64 = 0.0;
        let mut buf = vec![ZERO; self.grid.len()];
        for c in 0..f.ncomp {
            buf.copy_from_slice(f.comp(c));
            self.backward_inplace(&mut buf, false);
            let scale = buf.iter().fold(0.0f64, |m, b| m.max(b.re.abs()));
            let im = buf.iter().fold(0.0f64, |m, b| m.max(b.im.abs()));
            if scale > 0.0 {
                worst = worst.max(im / scale);
            }
        }
        worst
    }

    /// Unnormalised inverse transform of one component, in place.
    pub fn backward_inplace(&self, buf: &mut [Complex64], pruned: bool) {
        self.pass_z(buf, FftDirection::Inverse, pruned);
        self.pass_y(buf, FftDirection::Inverse, pruned);
        self.pass_x(buf, FftDirection::Inverse);
    }

    /// Normalised forward transform of one component, in place. When `pruned`, coefficients
    /// outside the retained shell are set to zero.
    pub fn forward_inplace(&self, buf: &mut [Complex64], pruned: bool) {
        self.pass_x(buf, FftDirection::Forward);
        self.pass_y(buf, FftDirection::Forward, pruned);
        self.pass_z(buf, FftDirection::Forward, pruned);
        let s = 1.0 / self.grid.len() as f64;
        if pruned {
            let g = &self.grid;
            let [mx, my, mz] = &self.masks;
            buf.par_chunks_mut(g.ny * g.nz)
                .enumerate()
                .for_each(|(ix, slab)| {
                    for iy in 0..g.ny {
                        let line = &mut slab[iy * g.nz..(iy + 1) * g.nz];
                        if mx[ix] && my[iy] {
                            for (iz, v) in line.iter_mut().enumerate() {
                                *v = if mz[iz] { *v * s } else { ZERO };
                            }
                        } else {
                            line.fill(ZERO);
                        }
                    }
                });
        } else {
            buf.par_iter_mut().for_each(|v| *v *= s);
        }
    }

    /// Two real fields from two Hermitian spectra with one complex transform.
    pub fn backward_pair(&self, a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
        out.par_iter_mut()
            .zip(a.par_iter().zip(b.par_iter()))
            .for_each(|(o, (a, b))| *o = a + Complex64::i() * b);
        self.backward_inplace(out, true);
    }

    /// Inverse of [`Fft3::backward_pair`]: `buf` holds f + i g in physical space; the spectra of
    /// f and g are written to `fa` and `fb` (dealiased).
    pub fn forward_pair(&self, buf: &mut [Complex64], fa: &mut [Complex64], fb: &mut [Complex64]) {
        self.forward_inplace(buf, true);
        let g = self.grid;
        let buf = &*buf;
        fa.par_iter_mut()
            .zip(fb.par_iter_mut())
            .enumerate()
            .for_each(|(i, (a, b))| {
                let z = buf[i];
                let zc = buf[SpectralField::conj_index(&g, i)].conj();
                *a = 0.5 * (z + zc);
                *b = Complex64::new(0.0, -0.5) * (z - zc);
            });
    }

    fn plan(&self, axis: usize, dir: FftDirection) -> &Arc<dyn Fft<f64>> {
        match dir {
            FftDirection::Forward => &self.fwd[axis],
            FftDirection::Inverse => &self.inv[axis],
        }
    }

    fn pass_z(&self, buf: &mut [Complex64], dir: FftDirection, pruned: bool) {
        let g = &self.grid;
        if g.nz == 1 {
            return;
        }
        let fft = self.plan(2, dir);
        let [mx, my, _] = &self.masks;
        let scratch_len = fft.get_inplace_scratch_len();
        buf.par_chunks_mut(g.ny * g.nz).enumerate().for_each_init(
            || vec![ZERO; scratch_len],
            |scratch, (ix, slab)| {
                if pruned && !mx[ix] {
                    return;
                }
                for iy in 0..g.ny {
                    if pruned && !my[iy] {
                        continue;
                    }
                    fft.process_with_scratch(&mut slab[iy * g.nz..(iy + 1) * g.nz], scratch);
                }
            },
        );
    }

    fn pass_y(&self, buf: &mut [Complex64], dir: FftDirection, pruned: bool) {
        let g = &self.grid;
        let fft = self.plan(1, dir);
        let [mx, _, _] = &self.masks;
        let (ny, nz) = (g.ny, g.nz);
        let scratch_len = fft.get_inplace_scratch_len();
        buf.par_chunks_mut(ny * nz).enumerate().for_each_init(
            || (vec![ZERO; ny * nz], vec![ZERO; scratch_len]),
            |(tmp, scratch), (ix, slab)| {
                if pruned && !mx[ix] {
                    return;
                }
                for iy in 0..ny {
                    for iz in 0..nz {
                        tmp[iz * ny + iy] = slab[iy * nz + iz];
                    }
                }
                fft.process_with_scratch(tmp, scratch);
                for iy in 0..ny {
                    for iz in 0..nz {
                        slab[iy * nz + iz] = tmp[iz * ny + iy];
                    }
                }
            },
        );
    }

    fn pass_x(&self, buf: &mut [Complex64], dir: FftDirection) {
        let g = &self.grid;
        if g.nx == 1 {
            return;
        }
        let fft = self.plan(0, dir);
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let mut tmp = vec![ZERO; buf.len()];
        {
            let src = &*buf;
            tmp.par_chunks_mut(nz * nx).enumerate().for_each(|(iy, plane)| {
                for ix in 0..nx {
                    let row = &src[(ix * ny + iy) * nz..(ix * ny + iy + 1) * nz];
                    for (iz, v) in row.iter().enumerate() {
                        plane[iz * nx + ix] = *v;
                    }
                }
            });
        }
        let scratch_len = fft.get_inplace_scratch_len();
        tmp.par_chunks_mut(nz * nx)
            .for_each_init(|| vec![ZERO; scratch_len], |scratch, plane| {
                fft.process_with_scratch(plane, scratch)
            });
        let tmp = &tmp;
        buf.par_chunks_mut(ny * nz).enumerate().for_each(|(ix, slab)| {
            for iy in 0..ny {
                for iz in 0..nz {
                    slab[iy * nz + iz] = tmp[(iy * nz + iz) * nx + ix];
                }
            }
        });
    }
}
