//! Barcodes of constructible sheaves on the real line with coefficients in a prime field.
//!
//! Bars are half-open intervals `[a, b)` and morphisms between direct sums of interval
//! sheaves are matrices masked to the pairs where a nonzero map exists.

pub mod barcode;
pub mod canonical;
pub mod cone;
pub mod endpoint;
pub mod field;
pub mod geometry;
pub mod interleaving;
pub mod interval;
pub mod limits;
pub mod matching;
pub mod morphism;
pub mod spectral;

pub use barcode::{Bar, Barcode};
pub use endpoint::{Endpoint, Rational};
pub use field::{Matrix, PrimeField};
pub use interval::{HomType, Interval};
pub use morphism::Morphism;
