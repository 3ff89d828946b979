//! Exact and empirical verification that discrete random symmetric matrices
//! have simple spectrum.
//!
//! The crate is organized bottom-up:
//!
//! * [`dist`]: finite entry laws with exact rational masses;
//! * [`matrix`]: exact symmetric matrices, ensembles, graph indexing and the
//!   split `M_n = [[M_{n-1}, X], [Xᵀ, ξ_nn]]`;
//! * [`spectrum`]: characteristic polynomials, squarefreeness and a Jacobi
//!   eigensolver;
//! * [`smallball`]: concentration probabilities and richness;
//! * [`gaps`]: symmetric generalized arithmetic progressions;
//! * [`structure`]: covering GAPs for rich vectors and the iterative
//!   refinement producing certified `(W', W, p, P)` reports;
//! * [`harness`]: censuses, Monte Carlo experiments and the orthogonality
//!   check behind the reduction from repeated eigenvalues to eigenvectors.

pub mod dist;
pub mod gaps;
pub mod harness;
pub mod matrix;
pub mod poly;
pub mod rational;
pub mod smallball;
pub mod spectrum;
pub mod structure;

pub use dist::AtomicDistribution;
pub use gaps::Gap;
pub use harness::{CensusResult, ExperimentSummary};
pub use matrix::{EnsembleSpec, MinorSplit, SymmetricMatrix};
pub use rational::Rational;
pub use smallball::{SmallBallResult, WeightVector};
pub use spectrum::{CharPoly, NumericSpectrum, SimplicityVerdict};
pub use structure::{StructureParams, StructureReport};
