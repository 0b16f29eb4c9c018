//! Matrix-free edge-preserving reconstruction for dynamic (space-time) inverse
//! problems.
//!
//! The unknown is an image sequence `u = vec(U)` with `U = [u(1), ..., u(n_t)]`
//! and each frame vectorized column-major (vertical index fastest). Six
//! space-time regularizers are supported; each one is minimized by
//! majorization-minimization (iteratively reweighted least squares) where every
//! reweighted problem is projected onto a generalized Krylov subspace that grows
//! by one residual direction per outer iteration. The regularization parameter
//! is chosen by generalized cross validation on the projected problem.
//!
//! Module map:
//! - [`operators`]: matrix-free operator algebra and 3-way tensors
//! - [`regularization`]: sparsifying operators, functionals and MM weights
//! - [`paramselect`]: GCV on the projected pair through its GSVD
//! - [`solver`]: the MM-GKS outer loop
//! - [`forward`]: Gaussian blur and parallel-beam Radon operators
//! - [`phantom`]: synthetic moving scenes and noise
//! - [`metrics`]: RRE and SSIM

pub mod error;
pub mod forward;
pub mod metrics;
pub mod operators;
pub mod paramselect;
pub mod phantom;
pub mod regularization;
pub mod solver;

pub(crate) mod linalg;

pub use error::{Error, Result};
pub use operators::{LinearOperator, Shape, Tensor3};
pub use regularization::{Method, RegularizerSpec, WeightOperator};
pub use solver::{ReconstructionProblem, SolverConfig};
