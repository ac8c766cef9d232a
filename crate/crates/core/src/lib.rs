//! Amyloid-beta oligomers, PrP-C and beta-amyloid plaques.
//!
//! The crate covers the closed ODE system for constant rates, its positive
//! equilibrium with Routh–Hurwitz and Lyapunov stability certificates, and
//! the size-structured transport problem for general polymerization rates
//! (method of characteristics, a conservative upwind grid scheme and a
//! Picard fixed-point solver). The [`diagnostics`] module turns the balance
//! laws and a priori bounds into runnable checks.
//!
//! ```
//! use abeta_prion::{ModelConfig, stability::find_steady_state};
//!
//! let cfg = ModelConfig::unit();
//! let ss = find_steady_state(&cfg.params, &cfg.rates, 1e-12).unwrap();
//! assert!((ss.u_inf - 0.359_304_085_971_776).abs() < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod ode;
pub mod pde;
pub mod rk;
pub mod stability;

pub use config::ModelConfig;
pub use error::{Error, Result};
pub use model::{nucleation, validate, Parameters, RateKind, RateModel, ValidationReport};
pub use ode::{OdeOptions, OdeState, Trajectory};

/// Formats a float with 17 significant digits, the precision used in every
/// CSV artifact.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
