//! Sparse signal recovery by minimizing the ratio of the `l1` norm to the `lq` norm.
//!
//! Given noisy linear measurements `y = A x + e` of a sparse vector `x`, this crate
//! searches the feasible set `{ z : ||A z - y||_2 <= eta }` for the vector with the
//! smallest `||z||_1 / ||z||_q` (with `1 < q <= inf`). The ratio is scale invariant
//! and, raised to the power `q/(q-1)`, interpolates between counting the support of
//! `z` and rewarding a few dominant entries, which makes it a practical surrogate
//! for sparsity that needs no tuning parameter.
//!
//! The crate provides:
//!
//! * [`solvers`] — a parametric root-finding method ([`solvers::pm_solve`]) that
//!   reduces the ratio problem to a sequence of difference-of-convex subproblems,
//!   a convex–concave procedure ([`solvers::ccp_solve`]) on a normalized
//!   reformulation, a per-coordinate linear-program method for `q = inf`
//!   ([`solvers::lp_solve_linf`]), and baseline solvers (basis pursuit denoising,
//!   `l1 - l2` minimization).
//! * [`conic`] — the shared first-order engine (ADMM over exact projections) that
//!   solves every convex subproblem above; no external solver is required.
//! * [`sparsity`] — the q-ratio sparsity measure itself, plus level-set tests and
//!   best-k-term approximation errors.
//! * [`analysis`] — recovery certificates: kernel norm-ratio infima, a matching
//!   sufficient condition for exact recovery, q-ratio constrained minimal singular
//!   value estimates, and evaluated error bounds.
//! * [`ensembles`] — seeded Gaussian and oversampled-cosine measurement ensembles
//!   and synthetic signals.
//! * [`bench`] — a reproducible experiment harness (objective scans, phase
//!   transitions, method-agreement runs) emitting CSV and JSON.
//!
//! Numerical code is generic over the scalar type through the [`Float`] trait;
//! the type aliases at the crate root fix `f64`, which every shipped tool uses.

pub mod analysis;
pub mod bench;
pub mod conic;
pub mod ensembles;
mod error;
mod float;
pub mod model;
pub mod solvers;
pub mod sparsity;

pub use error::Error;
pub use float::Float;
pub use model::{DenseMatrix, RatioQ, RecoveryProblem, SignalVector, SolveReport};

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;

/// Double-precision signal vector.
pub type Signal = model::SignalVector<f64>;
/// Double-precision dense matrix.
pub type Matrix = model::DenseMatrix<f64>;
/// Double-precision recovery problem.
pub type Problem = model::RecoveryProblem<f64>;
/// Double-precision solve report.
pub type Report = model::SolveReport<f64>;
