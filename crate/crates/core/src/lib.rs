//! Inverse scattering for the mKdV equation with asymmetric nonzero boundary
//! conditions q(x) → q± as x → ±∞, q− > q+ > 0, in both the focusing and the
//! defocusing regime.

/// Toolkit version embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod branch;
pub mod contour;
pub mod error;
pub mod evolution;
pub mod jost;
pub mod ode;
pub mod pde_ref;
pub mod profile;
pub mod quadrature;
pub mod reconstruct;
pub mod rhp;
pub mod scattering;

pub use branch::{BoundaryData, Mat2, Regime, Side, SpectralPoint, Vec2, Which, C64};
pub use error::{Error, Result};
pub use pde_ref::{PdeOptions, PdeState};
pub use profile::{Bump, PotentialProfile, ProfileSpec};
pub use reconstruct::{FieldGrid, FieldPoint, ReconstructOptions};
pub use rhp::{RhDiagnostics, RhpOptions};
pub use scattering::{DiscreteEigen, ScatteringData, ScatteringOptions};
