//! Flat `key = value` experiment configuration with `include = other.cfg` support.
//!
//! Later assignments override earlier ones; an include is expanded in place, relative to the
//! including file. `#` starts a comment. Lists are comma separated, grids are `NxNyxNz`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linear::ZeroModeRoute;
use crate::multipliers::MultiplierParams;
use crate::solver::Profile;
use crate::spectral::DomainKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    LinearDisp,
    LinearEd,
    Kernels,
    MultiplierAudit,
    NonlinearRun,
    ThresholdSweep,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::LinearDisp,
        Command::LinearEd,
        Command::Kernels,
        Command::MultiplierAudit,
        Command::NonlinearRun,
        Command::ThresholdSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::LinearDisp => "linear-disp",
            Command::LinearEd => "linear-ed",
            Command::Kernels => "kernels",
            Command::MultiplierAudit => "multiplier-audit",
            Command::NonlinearRun => "nonlinear-run",
            Command::ThresholdSweep => "threshold-sweep",
        }
    }
}

impl FromStr for Command {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| LabError::config(format!("unknown command `{}`", s.trim())))
    }
}

/// Run length: a fixed time, or T(ν) = 10·ν^{−1/3}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Horizon {
    Fixed { t: f64 },
    EnhancedDissipation,
}

impl Horizon {
    pub fn at(self, nu: f64) -> f64 {
        match self {
            Horizon::Fixed { t } => t,
            Horizon::EnhancedDissipation => 10.0 * nu.powf(-1.0 / 3.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub domain: DomainKind,
    pub nu: Vec<f64>,
    pub beta: f64,
    pub eps: f64,
    pub eps_range: Option<(f64, f64)>,
    /// (N_x, N_y, N_z); N_x = 1 selects the cross-stream plane.
    pub grid: [usize; 3],
    pub ly: f64,
    pub lz: f64,
    pub dt: f64,
    /// `None` picks the command default.
    pub horizon: Option<Horizon>,
    pub seed: u64,
    pub out: PathBuf,
    pub id: Option<String>,
    pub profile: Profile,
    pub nonlinear: bool,
    pub record_every: f64,
    pub checkpoint_every: Option<f64>,
    /// Energy amplification bound G of the stability proxy.
    pub growth: f64,
    pub n_iter: usize,
    /// Wall-clock budget per threshold probe, seconds.
    pub probe_budget: Option<f64>,
    pub samples: usize,
    /// Time samples of the linear runs.
    pub points: usize,
    pub fit_window: Option<(f64, f64)>,
    pub route: ZeroModeRoute,
    pub kernel_t: (f64, f64),
    pub kernel_points: usize,
    pub multipliers: MultiplierParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: Command::NonlinearRun,
            domain: DomainKind::TR2,
            nu: vec![1e-2],
            beta: 2.0,
            eps: 1.0,
            eps_range: None,
            grid: [64, 64, 32],
            ly: 4.0 * std::f64::consts::PI,
            lz: 4.0 * std::f64::consts::PI,
            dt: 0.05,
            horizon: None,
            seed: 0,
            out: PathBuf::from("."),
            id: None,
            profile: Profile::RandomBand {
                k_max: 1,
                xi_max: 1.0,
                eta_max: 1.0,
            },
            nonlinear: true,
            record_every: 1.0,
            checkpoint_every: None,
            growth: 10.0,
            n_iter: 8,
            probe_budget: None,
            samples: 100_000,
            points: 120,
            fit_window: None,
            route: ZeroModeRoute::Exponential,
            kernel_t: (10.0, 1e4),
            kernel_points: 20,
            multipliers: MultiplierParams::default(),
        }
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| LabError::config(format!("`{key}` expects a number, got `{v}`")))
}

fn int<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| LabError::config(format!("`{key}` expects an integer, got `{v}`")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| num(key, x)).collect()
}

fn pair(key: &str, v: &str) -> Result<(f64, f64)> {
    match list(key, v)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(LabError::config(format!("`{key}` expects two comma-separated numbers"))),
    }
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(LabError::config(format!("`{key}` expects true or false, got `{v}`"))),
    }
}

/// `64x64x32`, or `512x512` for a cross-stream plane.
pub fn parse_grid(v: &str) -> Result<[usize; 3]> {
    let parts: Vec<usize> = v
        .trim()
        .split(['x', 'X', ','])
        .map(|p| int("grid", p))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [ny, nz] => Ok([1, *ny, *nz]),
        [nx, ny, nz] => Ok([*nx, *ny, *nz]),
        _ => Err(LabError::config(format!("grid `{v}` must be NxxNyxNz or NyxNz"))),
    }
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "command" => self.command = v.parse()?,
            "domain" => self.domain = DomainKind::parse(v)?,
            "nu" => self.nu = list(key, v)?,
            "beta" => self.beta = num(key, v)?,
            "eps" => self.eps = num(key, v)?,
            "eps_range" => self.eps_range = Some(pair(key, v)?),
            "grid" => self.grid = parse_grid(v)?,
            "ly" => self.ly = num(key, v)?,
            "lz" => self.lz = num(key, v)?,
            "dt" => self.dt = num(key, v)?,
            "horizon" => {
                self.horizon = Some(match v {
                    "auto" | "ed" => Horizon::EnhancedDissipation,
                    _ => Horizon::Fixed { t: num(key, v)? },
                })
            }
            "seed" => self.seed = int(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "id" => self.id = Some(v.to_string()),
            "profile" => {
                self.profile = match v {
                    "random_band" => Profile::RandomBand {
                        k_max: 1,
                        xi_max: 1.0,
                        eta_max: 1.0,
                    },
                    "localized_bubble" => Profile::LocalizedBubble { width: 1.0 },
                    _ if v.starts_with("file:") => Profile::File {
                        path: PathBuf::from(&v[5..]),
                    },
                    _ => return Err(LabError::config(format!("unknown profile `{v}`"))),
                }
            }
            "band" => {
                let b = list(key, v)?;
                if b.len() != 3 || b[0] < 0.0 || b[0].fract() != 0.0 {
                    return Err(LabError::config("`band` expects k_max,xi_max,eta_max with integer k_max"));
                }
                self.profile = Profile::RandomBand {
                    k_max: b[0] as u32,
                    xi_max: b[1],
                    eta_max: b[2],
                };
            }
            "width" => {
                self.profile = Profile::LocalizedBubble { width: num(key, v)? };
            }
            "nonlinear" => self.nonlinear = boolean(key, v)?,
            "record_every" => self.record_every = num(key, v)?,
            "checkpoint_every" => self.checkpoint_every = Some(num(key, v)?),
            "growth" | "G" => self.growth = num(key, v)?,
            "n_iter" => self.n_iter = int(key, v)?,
            "probe_budget" => self.probe_budget = Some(num(key, v)?),
            "samples" => self.samples = int(key, v)?,
            "points" => self.points = int(key, v)?,
            "fit_window" => self.fit_window = Some(pair(key, v)?),
            "route" => {
                self.route = match v {
                    "exponential" => ZeroModeRoute::Exponential,
                    "symmetrized" => ZeroModeRoute::Symmetrized,
                    _ => return Err(LabError::config(format!("unknown route `{v}`"))),
                }
            }
            "kernel_t" => self.kernel_t = pair(key, v)?,
            "kernel_points" => self.kernel_points = int(key, v)?,
            "beta0" => self.multipliers.beta0 = num(key, v)?,
            "a_big" | "A" => self.multipliers.a_big = num(key, v)?,
            "a0" => self.multipliers.a0 = num(key, v)?,
            "delta2" => self.multipliers.delta2 = num(key, v)?,
            "delta_beta0" => self.multipliers.delta_beta0 = num(key, v)?,
            "n_trunc" => self.multipliers.n_trunc = int(key, v)?,
            "quad_tol" => self.multipliers.quad_tol = num(key, v)?,
            other => return Err(LabError::config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Parse configuration text; `base` resolves relative includes.
    pub fn parse_str(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = BTreeSet::new();
        cfg.apply_text(text, base, &mut seen, 0)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = BTreeSet::new();
        cfg.apply_file(path, &mut seen, 0)?;
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path, seen: &mut BTreeSet<PathBuf>, depth: usize) -> Result<()> {
        let canon = path
            .canonicalize()
            .map_err(|e| LabError::config(format!("cannot read config {}: {e}", path.display())))?;
        if !seen.insert(canon.clone()) {
            return Err(LabError::config(format!("include cycle through {}", path.display())));
        }
        let text = std::fs::read_to_string(&canon)?;
        let base = canon.parent().map(Path::to_path_buf).unwrap_or_default();
        self.apply_text(&text, &base, seen, depth)?;
        seen.remove(&canon);
        Ok(())
    }

    fn apply_text(&mut self, text: &str, base: &Path, seen: &mut BTreeSet<PathBuf>, depth: usize) -> Result<()> {
        if depth > 16 {
            return Err(LabError::config("includes nested deeper than 16 levels"));
        }
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::config(format!("line {}: expected `key = value`, got `{line}`", no + 1)))?;
            if k.trim() == "include" {
                self.apply_file(&base.join(v.trim()), seen, depth + 1)?;
            } else {
                self.set(k, v).map_err(|e| match e {
                    LabError::Config(m) => LabError::Config(format!("line {}: {m}", no + 1)),
                    e => e,
                })?;
            }
        }
        Ok(())
    }

    pub fn horizon_at(&self, nu: f64) -> f64 {
        let default = match self.command {
            Command::LinearEd | Command::ThresholdSweep | Command::NonlinearRun => Horizon::EnhancedDissipation,
            Command::LinearDisp => Horizon::Fixed { t: 200.0 },
            Command::Kernels | Command::MultiplierAudit => Horizon::Fixed { t: 0.0 },
        };
        self.horizon.unwrap_or(default).at(nu)
    }

    /// Range checks shared by every command, then the command-specific ones.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.nu.is_empty() {
            return bad("at least one ν is required".into());
        }
        for &nu in &self.nu {
            if !(0.0..=1.0).contains(&nu) {
                return bad(format!("ν = {nu} must lie in [0, 1]"));
            }
        }
        if !self.beta.is_finite() {
            return bad("β must be finite".into());
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("ε = {} must be finite and ≥ 0", self.eps));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.record_every > 0.0) {
            return bad("record_every must be positive".into());
        }
        if !(self.growth > 1.0) {
            return bad("the amplification bound G must exceed 1".into());
        }
        if let Some(Horizon::Fixed { t }) = self.horizon {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("horizon {t} must be finite and ≥ 0"));
            }
        }
        if self.points < 20 {
            return bad(format!("points = {} must be at least 20 for a rate fit", self.points));
        }
        self.multipliers.validate()?;
        let needs_visc = matches!(self.command, Command::LinearEd | Command::ThresholdSweep | Command::MultiplierAudit);
        if needs_visc && self.nu.iter().any(|&n| n <= 0.0) {
            return bad(format!("{} needs ν > 0", self.command.name()));
        }
        match self.command {
            Command::ThresholdSweep => {
                let (lo, hi) = self
                    .eps_range
                    .ok_or_else(|| LabError::config("threshold-sweep needs eps_range = lo,hi"))?;
                if !(lo > 0.0 && hi > lo) {
                    return bad(format!("eps_range ({lo}, {hi}) must satisfy 0 < lo < hi"));
                }
                if self.n_iter < 8 {
                    return bad(format!("n_iter = {} must be at least 8", self.n_iter));
                }
            }
            Command::LinearEd if self.nu.len() < 2 => {
                return bad("linear-ed needs at least two viscosities".into());
            }
            Command::MultiplierAudit if self.samples < 10_000 => {
                return bad(format!("multiplier-audit needs at least 10⁴ samples, got {}", self.samples));
            }
            Command::Kernels => {
                let (a, b) = self.kernel_t;
                if !(a >= 1.0 && b > a) || self.kernel_points < 20 {
                    return bad("kernels need 1 ≤ t_min < t_max and at least 20 points".into());
                }
            }
            Command::LinearDisp if self.grid[0] != 1 => {
                return bad("linear-disp runs on the cross-stream plane; use grid = NyxNz".into());
            }
            _ => {}
        }
        Ok(())
    }
}
