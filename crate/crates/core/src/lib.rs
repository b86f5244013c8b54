//! Adaptive mode and state estimation for Markov jump linear systems with
//! unknown transition probabilities, data-driven l1 ambiguity sets over the
//! transition rows, and distributionally robust static output-feedback
//! synthesis through coupled LMIs.
//!
//! Module map:
//! - [`model`]: system matrices, mode paths, measurement algebra, chain sampling.
//! - [`observability`]: discernibility tests and mode-observability certificates.
//! - [`estimator`]: receding-horizon consistent-set estimator with adaptive window.
//! - [`ambiguity`]: transition counts, concentration radii, polytope vertices.
//! - [`sdp`]: dense log-det barrier LMI solver and an independent verifier.
//! - [`control`]: design matrix, state/output-feedback synthesis, mean-square checks.
//! - [`harness`]: closed-loop experiments, batch trials and CSV export.

pub mod ambiguity;
pub mod control;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod observability;
pub mod presets;
pub mod sdp;

pub use error::{Error, Result};
pub use model::{MjlsModel, Path, TransitionMatrix};
