//! Numerical toolkit for zero-product structure in finite direct sums of
//! complex matrix algebras.
//!
//! The crate builds explicit factorizations of an element `c` through
//! zero-product pairs, decides numerically whether such an algebra is
//! determined by products at `c`, hosts the two classical counterexample
//! bilinear maps, and performs homomorphism/derivation decompositions of
//! linear maps with product property at a point.

pub mod algebra;
pub mod bilinear;
pub mod error;
pub mod factorization;
pub mod maps;
pub mod minpi;

pub use algebra::{AlgebraElement, AlgebraShape, RandomKind, RankProfile, DEFAULT_EPS};
pub use bilinear::{BilinearMap, Certificate, DeterminednessReport, FiberSample, Verdict};
pub use error::{Result, ZpdError};
pub use factorization::{FactorizationWitness, GeneralizedWitness};
pub use maps::{DerivationReport, HomExtractionReport, LinearMapMatrix, WeightedHomReport};
