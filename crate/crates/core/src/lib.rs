//! Sparsest cut on Cayley graphs of finite Abelian groups.
//!
//! The crate computes normalized-Laplacian spectra from group characters,
//! bounds eigenvalue multiplicities through random-walk collision
//! probabilities, and finds sparse cuts by enumerating a net of the low
//! eigenspace and rounding an advice-constrained degree-2 SDP.

pub mod corpus;
pub mod cuts;
pub mod error;
pub mod group;
pub mod pipeline;
pub mod sdp;
pub mod special;
pub mod spectral;
pub mod verify;
pub mod walks;

pub use error::{Error, Result};
