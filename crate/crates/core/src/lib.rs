//! Gaussian resource states for continuous-variable teleportation networks.
//!
//! States are zero-mean Gaussian states described by their covariance matrix
//! in vacuum-normalized units (the vacuum has unit quadrature variance) with
//! interleaved quadrature ordering `(x1, p1, x2, p2, ...)`.
//!
//! The crate builds the symmetric N-mode resource obtained by sending one
//! momentum-squeezed and N-1 position-squeezed thermal modes through an
//! N-splitter, and then answers three families of questions about it:
//!
//! * [`teleport`]: teleported-mode variances and coherent-state fidelity,
//!   from the covariance matrix and from closed forms;
//! * [`optimize`]: optimal squeezing bias and feed-forward gain, worst-case
//!   and unbiased preparations, plus a bracketing numerical optimizer;
//! * [`measures`] and [`localize`]: PPT symplectic eigenvalues, entanglement
//!   of formation, entanglement of teleportation, localizable entanglement
//!   and the residual contangle.
//!
//! [`montecarlo`] samples the Heisenberg-picture quadratures directly and
//! serves as an independent check on the analytic pipeline.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian;
pub mod localize;
pub mod measures;
pub mod montecarlo;
pub mod optimize;
pub mod sweep;
pub mod teleport;
pub mod verify;

pub use error::{Error, Result};
pub use gaussian::{
    apply, beam_splitter, build_resource, n_splitter, partial_transpose, purity, squeezed_thermal_cm,
    symplectic_eigenvalues, vacuum_cm, CovarianceMatrix, ResourceClass, ResourceSpec, SqueezeAxis, SymplecticTransform,
};
pub use measures::{EntanglementReport, LogBase};
pub use optimize::{BiasRange, OptimizationResult};
pub use teleport::{Gain, ProtocolParams, TeleportOutcome};
