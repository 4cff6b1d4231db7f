//! Scalar (acoustic) perturbations of the radiation-dominated
//! Friedman–Robertson–Walker universe for curvature K ∈ {−1, 0, +1}.
//!
//! The density contrast δ of a synchronous-gauge perturbation is mapped by
//! a second-order differential transform to a variable Ψ that obeys the
//! d'Alembert equation of the static Robertson–Walker space-time. The crate
//! integrates the perturbation equations per Laplacian eigenmode, applies
//! the transform, and checks numerically that Ψ is a sinusoid at
//! ω = √((k² − K)/3).

// Guards of the form `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod background;
pub mod cli;
pub mod error;
pub mod fit;
pub mod mode_dynamics;
pub mod ode;
pub mod quadrature;
pub mod transform;
pub mod verifier;
pub mod wavefield;

pub use background::{BackgroundModel, Curvature, EtaRange};
pub use error::{Error, Result};
pub use mode_dynamics::{ModeParams, PerturbationState, Trajectory};
pub use transform::{GaugePair, PsiSeries};
pub use verifier::{VerificationReport, TheoremCheck, InitialData};
pub use wavefield::{DispersionPoint, RadialMode};
