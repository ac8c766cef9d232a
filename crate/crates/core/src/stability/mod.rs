//! Positive equilibrium of the closed system and its stability.
//!
//! - [`steady_state`]: the scalar function `Q` whose positive root is
//!   `u_inf`, and the equilibrium assembled from it.
//! - [`linear`]: Jacobian, quartic characteristic coefficients,
//!   Routh–Hurwitz margin and a numerical eigenvalue cross-check.
//! - [`lyapunov`]: the explicit Lyapunov function for `alpha = 0`.

pub mod linear;
pub mod lyapunov;
pub mod steady_state;

pub use linear::{
    analyze, characteristic_coefficients, eigenvalues, jacobian_at, polynomial_from_roots,
    routh_hurwitz, ChainCondition, Jacobian, RouthHurwitz, StabilityReport,
};
pub use lyapunov::{lyapunov_value, LyapunovCertificate, LyapunovValue};
pub use steady_state::{
    find_steady_state, find_steady_state_with, q_evaluate, q_evaluate_with, QuadraticTerm,
    SteadyStateReport,
};
