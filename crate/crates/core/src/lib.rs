//! Exact small-dimension laboratory for entanglement-assisted classical communication
//! over quantum point-to-point and multiple access channels.
//!
//! Modules, bottom up:
//! - [`qmat`]: labelled dense operators, partial traces, Kraus channels, POVMs.
//! - [`info`]: entropies and the capacity-region calculators.
//! - [`typicality`]: types, type-class projectors and weakly typical projectors.
//! - [`eacode`]: type decomposition of `|φ⟩^⊗n` and Heisenberg–Weyl random codes.
//! - [`seqdecode`]: sequential (packing) and successive decoders with their bounds.
//! - [`simuldecode`]: simultaneous square-root decoder for the two-sender MAC.
//! - [`gaussian`]: bosonic Gaussian states and the closed-form region.

pub mod eacode;
pub mod error;
pub mod format;
pub mod gaussian;
pub mod info;
pub mod qmat;
pub mod seqdecode;
pub mod simuldecode;
pub mod typicality;

pub use error::{QmacError, Result};
