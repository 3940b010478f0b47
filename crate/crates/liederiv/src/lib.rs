//! Exact symbolic engine for Lie algebras of derivations of the rational
//! function field K(x1,...,xn), K the rationals.
//!
//! The crate provides:
//! - exact sparse multivariate polynomial and rational function arithmetic,
//! - derivations (vector fields with rational-function coefficients) with
//!   Lie bracket, scaling, and push-forward under triangular automorphisms,
//! - structural analysis of finitely generated Lie algebras of derivations
//!   (closure, structure constants, lower central series, center, rank over
//!   the fraction field, Jordan chains),
//! - classification of nilpotent algebras of rank at most 3 into normal
//!   forms, with a verified embedding into the triangular Lie algebra u_k.

pub mod classify;
pub mod derivation;
pub mod gcd;
pub mod lie;
pub mod linalg;
pub mod poly;
pub mod ratfunc;

pub use classify::{
    classify, classify_rank1, classify_rank2, classify_rank3, embed_into_triangular,
    express_via_chain, express_via_grid, is_in_triangular, ChainCoefficients, Embedding,
    NormalFormReport, NormalFormTag,
};
pub use derivation::{Automorphism, Derivation};
pub use gcd::{poly_gcd, poly_lcm};
pub use lie::{
    ideal_ri_cap_l, jordan_chains, k_linear_reduce, lower_central_series, rank_over_r,
    structure_constants, verify_rational_constants, CentralSeries, LieBasis, StructureTensor,
    Subspace,
};
pub use poly::{potential, Monomial, MultiPoly};
pub use ratfunc::RatFunc;

use thiserror::Error;

/// Errors from the exact arithmetic layer.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("gcd of two zero polynomials is undefined")]
    GcdOfZeros,
    #[error("closedness condition violated: df/dv != dg/du")]
    NotClosedPair,
}

/// Errors from Lie-structure analysis and classification.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("empty (zero) Lie algebra")]
    EmptyAlgebra,
    #[error("not closed under bracket: [g{i}, g{j}] escapes the span")]
    NotClosed { i: usize, j: usize },
    #[error("algebra is not nilpotent")]
    NotNilpotent,
    #[error("rank over R is {rank}, classification covers rank <= 3")]
    RankTooHigh { rank: usize },
    #[error("field of constants is larger than the rationals: {context}")]
    NonRationalConstants { context: String },
    #[error("operator is not nilpotent on the given subspace")]
    NotNilpotentOperator,
    #[error("ad does not map the subspace into itself")]
    AdNotInvariant,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
