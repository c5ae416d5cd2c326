//! Tensor-ring completion with low-rank regularized factors.
//!
//! The crate is layered bottom-up:
//!
//! - [`tensor`]: dense storage and the `Γ`/`Δ` unfolding families
//! - [`mask`]: observation sets and the projections onto them
//! - [`ring`]: tensor-ring cores, subchains and reconstruction
//! - [`prox`]: singular value thresholding and the core least-squares updates
//! - [`solvers`]: the overlapped (OLRF) and latent (LLRF) ADMM loops

pub mod error;
pub mod mask;
pub mod prox;
pub mod ring;
pub mod solvers;
pub mod tensor;

pub use error::{Error, Result};
pub use mask::ObservationMask;
pub use ring::{TrCores, TrRank};
pub use solvers::{
    rse, solve_llrf, solve_olrf, AdmmState, LlrfState, MuRule, OlrfState, RseScope, SolveReport,
    Solver, SolverConfig,
};
pub use tensor::{DenseTensor, MatricizationKind, Matrix};
