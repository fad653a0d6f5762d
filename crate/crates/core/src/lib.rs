//! Fast connection transforms between families of harmonic polynomials on the sphere,
//! the disk and the triangle.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix it to `f64`.

pub mod banded;
pub mod dc;
pub mod error;
pub mod gevp;
pub mod givens;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod skeleton;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type SymTridiagonal64 = dc::SymTridiagonal<f64>;
pub type Arrowhead64 = dc::Arrowhead<f64>;
pub type DcTree64 = dc::DcTree<f64>;
pub type DcOptions64 = dc::DcOptions<f64>;
pub type SymDefPencil64 = gevp::SymDefPencil<f64>;
pub type Connection64 = gevp::Connection<f64>;
pub type LayerDecomposition64 = gevp::LayerDecomposition<f64>;
pub type GeometryKind64 = special::GeometryKind<f64>;
pub type TransformPlan64 = skeleton::TransformPlan<f64>;
pub type CoefficientBlock64 = skeleton::CoefficientBlock<f64>;
pub type GivensSequence64 = givens::GivensSequence<f64>;
pub type JacobiParams64 = special::JacobiParams<f64>;
pub type BandedSymmetric64 = banded::BandedSymmetric<f64>;
pub type BandedUpper64 = banded::BandedUpper<f64>;
