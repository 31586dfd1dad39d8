//! Isometries of the open unit ball of `m x n` complex matrices under the
//! Carathéodory metric.
//!
//! The automorphisms of the ball are realized linearly by the group of
//! operators on `H ⊕ K` that preserve the form `⟨h₁,h₂⟩ − ⟨k₁,k₂⟩`. This
//! crate builds those operators, classifies them (unitary, self-adjoint,
//! normal, non-unitary normal), and enumerates the `2^k` boundary fixed
//! points that characterize the non-unitary normal ones, together with an
//! independent detector that works from raw eigenvectors.

pub mod ball;
pub mod classify;
pub mod error;
pub mod fixed_points;
pub mod generate;
pub mod linalg;
pub mod pseudo_unitary;
pub mod spectral;

pub use ball::{
    caratheodory_distance, classify_vector, hermitian_form, mobius_apply, mobius_inverse, CausalType, Contraction,
    MobiusMap, SpaceVector,
};
pub use classify::{classify, Classification};
pub use error::{Error, Result};
pub use fixed_points::{detect_generic, enumerate_generic, Conclusion, DetectionReport, GenericFixedPoint};
pub use linalg::{ComplexMatrix, ToleranceConfig};
pub use num_complex::Complex64;
pub use pseudo_unitary::{
    act, compose, factorize, from_factors, inverse, verify_relations, FactoredIsometry, GIsometry, GIsometryJson,
};
pub use spectral::{decompose, SpectralDecomposition};
