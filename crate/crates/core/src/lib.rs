//! Scalar polynomials with (2N+1)-term recurrences and their equivalent
//! N×N matrix orthonormal polynomials with a block three-term recurrence.

pub mod hbasis;
pub mod jacobi;
pub mod krein;
pub mod linalg;
pub mod matpoly;
pub mod measures;
pub mod poly;
pub mod sobolev;

pub use hbasis::{ComponentVector, HBasis};
pub use jacobi::{BandedHermitian, BlockJacobi, RecurrenceSystem, Tridiagonal};
pub use measures::{MatrixMeasure, Measure};
pub use poly::Polynomial;
pub use sobolev::{SobolevFamily, SobolevSpec};
