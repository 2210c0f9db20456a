//! Photon exchange between two two-level atoms at the foci of an ideally
//! conducting prolate-ellipsoidal cavity.

pub mod error;
pub mod geometry;
pub mod modes;
pub mod quantization;
pub mod numerics;
pub mod oracle;
pub mod cli;
pub mod pathsum;

pub use error::{Error, Result};
pub use geometry::CavityConfig;
