//! Entropic quantities for quantum hypothesis testing at desk scale:
//! divergences, hypothesis-testing relative entropy, smooth max-relative
//! entropy, order-1 quantum Wasserstein distance, almost-iid state
//! constructions, relative entropy of resource over PPT, and a CSV
//! experiment harness, all backed by a dense complex Hermitian
//! interior-point SDP solver.

pub mod almostiid;
pub mod divergence;
pub mod error;
pub mod harness;
pub mod hypothesis;
pub mod par;
pub mod resource;
pub mod sdp;
pub mod stateio;
pub mod tensor;
pub mod tol;
pub mod wasserstein;

pub use error::{Error, Result};
