//! Pseudo-spectral laboratory for rotating perturbations of plane Couette flow.
//!
//! The crate is organised around the moving frame `x = x₁ − ty`, in which the Couette transport
//! disappears and every linear operator becomes a time-dependent Fourier multiplier.
//!
//! - [`spectral`]: grids, transforms, sheared-frame derivatives, Riesz transforms, projection.
//! - [`multipliers`]: the time-dependent weights φ, m₁, m₂, m₃ and their audits.
//! - [`linear`]: exact and semi-exact linear propagators and regime classification.
//! - [`solver`]: the nonlinear integrating-factor RK4 solver with shear remapping.
//! - [`diagnostics`]: weighted norms, energy functionals, rate fits.
//! - [`kernels`]: oscillatory-integral evaluation of the dispersive kernels.
//! - [`harness`]: configuration, threshold bisection, and the experiment commands.

pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod harness;
pub mod kernels;
pub mod linear;
pub mod multipliers;
pub mod quad;
pub mod solver;
pub mod spectral;

pub use error::{LabError, Result};

#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/overview.md")]
    pub mod overview {}
    #[doc = include_str!("../../../book/src/sheared_frame.md")]
    pub mod sheared_frame {}
    #[doc = include_str!("../../../book/src/time_stepping.md")]
    pub mod time_stepping {}
    #[doc = include_str!("../../../book/src/zero_modes.md")]
    pub mod zero_modes {}
    #[doc = include_str!("../../../book/src/good_unknowns.md")]
    pub mod good_unknowns {}
    #[doc = include_str!("../../../book/src/multipliers.md")]
    pub mod multipliers {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    pub mod kernels {}
    #[doc = include_str!("../../../book/src/energy.md")]
    pub mod energy {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
