use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Which physical domain the periodic box stands in for.
///
/// `TR2` is 𝕋×ℝ² with both cross-stream directions approximated by a large box; `TRT` keeps
/// the spanwise direction a genuine 2π-torus so that z-wavenumbers are integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    #[serde(rename = "T_R2_surrogate")]
    TR2,
    #[serde(rename = "T_R_T")]
    TRT,
}

impl DomainKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "T_R2_surrogate" | "TR2" | "tr2" => Ok(DomainKind::TR2),
            "T_R_T" | "TRT" | "trt" => Ok(DomainKind::TRT),
            other => Err(LabError::config(format!("unknown domain kind `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::TR2 => "T_R2_surrogate",
            DomainKind::TRT => "T_R_T",
        }
    }
}

/// Box geometry, resolution and dealiasing rule.
///
/// The streamwise length is always 2π so that streamwise wavenumbers are integers. A
/// streamwise resolution of one point is allowed and describes x-independent (zero-mode) fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub domain: DomainKind,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Retained fraction of each axis, as a reduced rational `num/den`.
    pub dealias: (u32, u32),
}

impl GridSpec {
    pub fn new(domain: DomainKind, n: [usize; 3], ly: f64, lz: f64) -> Result<Self> {
        let lz = match domain {
            DomainKind::TRT => 2.0 * PI,
            DomainKind::TR2 => lz,
        };
        let g = GridSpec {
            domain,
            lx: 2.0 * PI,
            ly,
            lz,
            nx: n[0],
            ny: n[1],
            nz: n[2],
            dealias: (2, 3),
        };
        g.validate()?;
        Ok(g)
    }

    /// Cross-stream plane only (`nx = 1`), used for zero-mode experiments.
    pub fn plane(domain: DomainKind, ny: usize, nz: usize, ly: f64, lz: f64) -> Result<Self> {
        Self::new(domain, [1, ny, nz], ly, lz)
    }

    pub fn with_dealias(mut self, num: u32, den: u32) -> Result<Self> {
        self.dealias = (num, den);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let axis_ok = |n: usize, allow_one: bool| (allow_one && n == 1) || (n >= 2 && n % 2 == 0);
        if !axis_ok(self.nx, true) || !axis_ok(self.ny, false) || !axis_ok(self.nz, true) {
            return Err(LabError::config(format!(
                "mode counts must be even (x and z may be 1): got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        let (num, den) = self.dealias;
        if num == 0 || den == 0 || num > den {
            return Err(LabError::config(format!(
                "dealias fraction {num}/{den} must lie in (0, 1]"
            )));
        }
        if !(self.ly.is_finite() && self.lz.is_finite()) {
            return Err(LabError::config("box lengths must be finite"));
        }
        let min_len = 4.0 * PI * (1.0 - 1e-12);
        if self.ly < min_len {
            return Err(LabError::config(format!(
                "L_y = {} is below 4π; Riesz symbols would be under-resolved",
                self.ly
            )));
        }
        if self.domain == DomainKind::TR2 && self.lz < min_len {
            return Err(LabError::config(format!(
                "L_z = {} is below 4π on the surrogate domain",
                self.lz
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn dz(&self) -> f64 {
        self.lz / self.nz as f64
    }

    #[inline]
    pub fn flat(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.ny + iy) * self.nz + iz
    }

    #[inline]
    pub fn unflat(&self, i: usize) -> (usize, usize, usize) {
        let iz = i % self.nz;
        let r = i / self.nz;
        (r / self.ny, r % self.ny, iz)
    }

    /// Largest retained |index| along an axis of `n` points: ⌈f·n/2⌉ − 1.
    pub fn cutoff(&self, n: usize) -> i64 {
        let (num, den) = (self.dealias.0 as usize, self.dealias.1 as usize);
        (num * n).div_ceil(2 * den) as i64 - 1
    }

    pub fn cutoffs(&self) -> [i64; 3] {
        [self.cutoff(self.nx), self.cutoff(self.ny), self.cutoff(self.nz)]
    }

    pub fn x_index(&self, ix: usize) -> i64 {
        signed_index(ix, self.nx)
    }

    pub fn y_index(&self, iy: usize) -> i64 {
        signed_index(iy, self.ny)
    }

    pub fn z_index(&self, iz: usize) -> i64 {
        signed_index(iz, self.nz)
    }

    /// Storage slot for a signed index (wrapping).
    pub fn slot(n: usize, m: i64) -> usize {
        m.rem_euclid(n as i64) as usize
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.ly
    }

    pub fn deta(&self) -> f64 {
        2.0 * PI / self.lz
    }

    pub fn kx(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_index(i) as f64).collect()
    }

    pub fn ky(&self) -> Vec<f64> {
        (0..self.ny).map(|i| self.y_index(i) as f64 * self.dxi()).collect()
    }

    pub fn kz(&self) -> Vec<f64> {
        (0..self.nz).map(|i| self.z_index(i) as f64 * self.deta()).collect()
    }

    /// Wavevector (k, ξ, η) of a flat storage index.
    pub fn wavevector(&self, i: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.unflat(i);
        [
            self.x_index(ix) as f64,
            self.y_index(iy) as f64 * self.dxi(),
            self.z_index(iz) as f64 * self.deta(),
        ]
    }

    pub fn retained(&self, ix: usize, iy: usize, iz: usize) -> bool {
        let [cx, cy, cz] = self.cutoffs();
        self.x_index(ix).abs() <= cx && self.y_index(iy).abs() <= cy && self.z_index(iz).abs() <= cz
    }

    /// Per-axis retention masks.
    pub fn masks(&self) -> [Vec<bool>; 3] {
        let [cx, cy, cz] = self.cutoffs();
        [
            (0..self.nx).map(|i| self.x_index(i).abs() <= cx).collect(),
            (0..self.ny).map(|i| self.y_index(i).abs() <= cy).collect(),
            (0..self.nz).map(|i| self.z_index(i).abs() <= cz).collect(),
        ]
    }

    /// Physical sample coordinates x_j = j·L/N on each axis.
    pub fn coords(&self) -> [Vec<f64>; 3] {
        let ax = |n: usize, l: f64| -> Vec<f64> { (0..n).map(|i| i as f64 * l / n as f64).collect() };
        [ax(self.nx, self.lx), ax(self.ny, self.ly), ax(self.nz, self.lz)]
    }
}

fn signed_index(i: usize, n: usize) -> i64 {
    if n == 1 {
        0
    } else if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
