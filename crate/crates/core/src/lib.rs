//! Extrinsic curvature of parameterized closed hypersurfaces in the three
//! space forms, with numerical verification of the classical integral
//! identities relating normal-moment curvature integrals to topology.
//!
//! The crate computes fundamental forms, principal curvatures, r-th mean
//! curvatures, Newton transformations and the Gauss-Kronecker curvature on
//! chart atlases, integrates them by tensor-product quadrature, and checks
//! every identity to quantified tolerances, including numerical calibration
//! of the space-form Gauss-Bonnet constants.

pub mod ambient;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod jets;
pub mod quadrature;
pub mod report;
pub mod scan;
pub mod shapes;

pub use ambient::{inner_product, validate_point, AmbientVector, Direction, Signature, SpaceForm};
pub use error::{Error, Result};
