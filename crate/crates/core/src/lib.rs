//! Perron-Frobenius theory for nonnegative multilinear forms and nonnegative
//! polynomial maps.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: tensors, polynomial maps and their raw evaluation;
//! - [`structure`]: support graphs, irreducibility and primitivity tests;
//! - [`dynamics`]: the degree-one homogeneous map `F`, its normalized
//!   version `G` and the Hilbert projective metric;
//! - [`solver`]: the normalized power algorithm with Collatz-Wielandt
//!   brackets, multi-start search and residual verification;
//! - [`rate`]: linearization at the eigenvector and the spectral-gap rate.

pub mod dynamics;
pub mod error;
pub mod model;
pub mod rate;
pub mod solver;
pub mod structure;

pub use dynamics::{hilbert_distance, normalize, Functional, MapKind, MonotoneMap};
pub use error::{Error, Result};
pub use model::{
    evaluate_form, evaluate_poly, evaluate_slot, tensor_system, BlockVector, Monomial,
    NonnegTensor, NormWeights, PolynomialMap,
};
pub use rate::{convergence_rate, jacobian, second_modulus, spectral_radius, RateReport};
pub use solver::{
    block_normalize, collatz_wielandt_bounds, multi_start_solve, power_solve, power_solve_from,
    verify_complex_eigenpair, verify_solution, ComplexPairReport, EigenSolution, Route,
    SearchOutcome, SolveError, SolveResult, SolverConfig, System, VerifyReport,
};
pub use structure::{DiGraph, Imprimitivity, PartiteGraph, StructureReport, Verdict};
