//! Steady states and gradient-flow dynamics of the deep quench obstacle
//! problem (DQOP) and of surface diffusion (SD) for curves on a planar disk.

pub mod annular;
pub mod bridge;
pub mod curve;
mod dd;
pub mod dimple;
pub mod dqop_flow;
pub mod domain;
pub mod error;
mod linalg;
pub mod minmove;
pub mod profile;
pub mod quad;
pub mod sd_flow;
pub mod specfun;
pub mod trace;

pub use domain::DiskDomain;
pub use error::{Error, Result};
pub use profile::RadialProfile;
