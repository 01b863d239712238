//! Low-rank matrix recovery from sparse gross corruption.
//!
//! The core programs are robust PCA, `min ‖L‖_* + λ‖S‖_1 s.t. X = L + S`, and
//! low-rank representation over a dictionary `A`,
//! `min ‖Z‖_* + λ‖S‖_1 s.t. X = A Z + S`, both solved by an augmented
//! Lagrangian method in [`solver`]. [`pursuit`] learns a dictionary from a
//! robust PCA estimate and re-solves with it, which tolerates data whose
//! columns come from many subspaces.

pub mod certify;
pub mod coherence;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod prox;
pub mod pursuit;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use linalg::{Matrix, SupportSet};
