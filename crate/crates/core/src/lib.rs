//! Simulation and verification toolkit for random walks on the emerging
//! giant component of a barely supercritical random graph.

pub mod giant;
pub mod gff;
pub mod graph;
pub mod linalg;
pub mod resistance;
pub mod gw;
pub mod scalar;
pub mod seed;
pub mod skeleton;
pub mod walk;

pub use graph::{Graph, GraphError, Role, VertexId};
pub use scalar::{Field, Real};

pub type Laplacian64 = linalg::Laplacian<f64>;
pub type SparseCholesky64 = linalg::SparseCholesky<f64>;
pub type DenseCholesky64 = linalg::DenseCholesky<f64>;
pub type ResistanceOracle64 = resistance::ResistanceOracle<f64>;
pub type ResistanceOracle32 = resistance::ResistanceOracle<f32>;
pub type GffSampler64 = gff::GffSampler<f64>;
pub type GffSampler32 = gff::GffSampler<f32>;
pub type SurvivalCurve64 = gw::SurvivalCurve<f64>;
/// Exact rational arithmetic for hitting times and cover-time recursions.
pub type Rational = num::BigRational;
