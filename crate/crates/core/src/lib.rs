//! Exact linear algebra for matrix algebras with involution.

pub mod bilinear;
pub mod census;
pub mod dimensions;
pub mod error;
pub mod field;
pub mod generation;
pub mod io;
pub mod matrix;
pub mod poly;
pub mod subspace;
pub mod witness;

pub use bilinear::{BilinearSpace, FormKind};
pub use error::{Error, Result};
pub use field::{Field, FieldSpec, PrimeField, Rationals};
pub use matrix::Matrix;
pub use subspace::Subspace;
