//! Generalized multiscale finite elements with a symmetric interior penalty
//! discontinuous Galerkin coupling, for `−∇·(κ∇u) = f` on the unit square
//! with high-contrast `κ`.
//!
//! The fine space is broken P1 on a uniform triangulation of each coarse
//! block. Each block carries a small set of local eigenfunctions; the coarse
//! space is their span and the coarse solve is a Galerkin projection of the
//! fine SIPG system.

pub mod coarse;
pub mod coefficient;
pub mod error;
pub mod experiments;
pub mod fe;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod spectral;

pub use coefficient::{ChannelPattern, CoefficientField, Raster};
pub use error::{Error, Result};
pub use fe::{BrokenVector, DGSystem, PenaltyScaling, Source};
pub use mesh::PartitionedMesh;
