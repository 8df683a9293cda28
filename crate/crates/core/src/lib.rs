//! Computational geometry of frontal surface germs in 3-space.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the precision used by the command line tool.

pub mod curve;
pub mod devfold;
pub mod exprlang;
pub mod geom;
pub mod germ;
pub mod matching;
pub mod isomer;
pub mod normalform;
pub mod numkit;
pub mod scalar;
pub mod symmetry;

pub use scalar::{Real, Scalar, V3};

pub type Jet64 = numkit::Jet<f64>;
pub type MapDef64 = exprlang::MapDef<f64>;
pub type SpaceCurve64 = curve::SpaceCurve<f64>;
pub type SurfaceGerm64 = germ::SurfaceGerm<f64>;
pub type EdgeNormalForm64 = normalform::EdgeNormalForm<f64>;
pub type IsomerSet64 = isomer::IsomerSet<f64>;
pub type DevStrip64 = devfold::DevStrip<f64>;
pub type CurvedFolding64 = devfold::CurvedFolding<f64>;
pub type Isometry64 = geom::Isometry<f64>;
pub type SymmetryReport64 = symmetry::SymmetryReport<f64>;
