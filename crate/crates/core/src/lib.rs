//! Entangled two-particle Gaussian states, slit conditioning, ghost imaging
//! and ghost diffraction widths, a spin-1 counterpart, and a brute-force grid
//! simulator that checks the closed forms.
//!
//! Lengths are in millimetres and `ħ = 1`; see [`gaussian`] for the width
//! conventions.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod oracle;
pub mod report;
pub mod spin;

pub use error::{PopperError, Result};
