//! Weighted norms, energy functionals, asymptotic rate checks.

mod asymptotics;
mod energy;
mod norms;

pub use asymptotics::{asymptotics_check, strichartz_accumulators, AsymptoticsOptions, AsymptoticsReport, StrichartzReport};
pub use energy::{
    energy_functionals, energy_functionals_with, read_energy_csv, write_energy_csv, EnergyRecord, SupNorms, WPolicy,
    ZeroPlane,
};
pub use norms::{
    aniso_norm_sq, physical_l2_sq, sobolev_norm, sobolev_norm_sq, sobolev_weight, symbol_sq, weighted_sq,
    Derivative,
};
