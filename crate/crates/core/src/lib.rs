//! Toeplitz operators on weighted Bergman spaces of the unit ball: exact
//! matrix elements, trace engines for commutator-type expressions, the
//! quantization expansion and the integral formulas they converge to.
//!
//! Most of the crate is generic over the scalar. `f64` is the working type;
//! `BigRational` gives exact symbols and exact diagonals for rational weights.

pub mod diag;
pub mod error;
pub mod extrapolate;
pub mod forms;
pub mod geometry;
pub mod operators;
pub mod quad;
pub mod quantization;
pub mod scalar;
pub mod special_fn;
pub mod symbols;
pub mod traces;

pub use error::{Error, Result};
pub use forms::QuadratureSpec;
pub use geometry::Point;
pub use operators::{Assembly, BasisTruncation, OperatorMatrix};
pub use scalar::{Float, Real};
pub use special_fn::WeightParam;
pub use symbols::{MultiIndex, PolySymbol};
pub use traces::{Parity, ShellSeries, TraceSeries};

pub type Rational = num_rational::BigRational;

/// Double precision symbol.
pub type Symbol = PolySymbol<f64>;
/// Symbol with exact rational coefficients.
pub type RationalSymbol = PolySymbol<Rational>;
pub type Weight = WeightParam<f64>;
pub type Matrix = OperatorMatrix<f64>;
