//! Size-structured plaque density coupled to the soluble species, for
//! general `rho(x)` and `mu(x)`.
//!
//! Two discretizations of the same system:
//! - [`coupled`]: conservative upwind finite volumes on a truncated grid,
//!   explicit in time;
//! - [`picard`]: fixed-point iteration on the soluble trajectories, with the
//!   density rebuilt from characteristics ([`mild`]) at every iterate.

pub mod characteristics;
pub mod coupled;
pub mod grid;
pub mod mild;
pub mod picard;
pub mod quadrature;

pub use characteristics::{boundary_front, trace_characteristic, CharacteristicField, CharacteristicPoint};
pub use coupled::{
    cfl_limit, default_x_max, run_coupled, run_transport, step_coupled, CoupledRun, CoupledSample, CoupledSettings,
    CoupledState, InitialData, TimeScheme,
};
pub use grid::{DensitySpec, PlaqueGrid};
pub use mild::{mild_evaluate, MildSolution};
pub use picard::{picard_solve, PicardResult, PicardSettings};
