//! Genus-g Brandt matrices for definite quaternion algebras over the rationals.

// Index loops mirror the matrix formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod arith;
pub mod brandt;
pub mod classes;
pub mod error;
pub mod graph;
pub mod hermitian;
pub mod ideal;
pub mod isometry;
pub mod lattice;
pub mod matrix;
pub mod order;
pub mod quaternion;
pub mod serial;
pub mod spectral;

pub use arith::Rational;
pub use brandt::{brandt, brandt_zero, neighbor_count, BrandtContext, BrandtMatrix, IdentityReport};
pub use classes::{class_set, mass, ClassOptions, ClassReps, ClassSet};
pub use error::{Error, Result};
pub use graph::{big_graph, enhanced_graph, little_graph, GraphKind, WeightedGraph};
pub use hermitian::HermitianForm;
pub use ideal::IdealLattice;
pub use lattice::QuadraticLattice;
pub use matrix::{OMatrix, QMatrix};
pub use order::{maximal_order, MaximalOrder, OrdElt};
pub use quaternion::{algebra_for_prime, Place, Quaternion, QuaternionAlgebra};
pub use spectral::{char_poly, ramanujan_survey, ramanujan_verdict, SpectralReport, SurveyRow};
