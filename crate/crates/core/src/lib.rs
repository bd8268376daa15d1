//! Orthogonal-group based MRD codes and sum-rank metric codes over small
//! finite fields of odd characteristic, together with brute-force checks of
//! their parameters, list-size bounds and subspace-design properties.

pub mod error;
pub mod field;
pub mod enumerate;
pub mod matrix;
pub mod ortho;
pub mod rank_code;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec, Polynomial};
pub use matrix::Matrix;
pub mod sumrank;
pub mod bounds;
pub mod design;
pub mod report;
