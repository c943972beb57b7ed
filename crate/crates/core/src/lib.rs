//! Dense state-vector simulation of small qudit circuits, together with a
//! rewrite engine whose every step is certified numerically.
//!
//! The crate models circuits of `n` wires that all carry the same dimension
//! `d >= 2`. States are dense vectors of length `d^n`, gates are dense
//! unitaries, and measurements are projective in the computational basis.
//! On top of the simulator sits a small catalog of rewrite rules
//! ([`rewrite`]) able to transform a classical state-swapping circuit,
//! step by certified step, into the standard teleportation circuit; the
//! fixed derivation pipelines live in [`rewrite::derive`] and the circuit
//! builders they are compared against in [`protocols`].
//!
//! Basis convention: wire 0 is the top wire and the most significant digit,
//! so a basis state with digits `x_0 .. x_{n-1}` has index
//! `sum_i x_i * d^(n-1-i)`.

pub mod basis;
pub mod error;
pub mod gates;
pub mod matrix;
pub mod protocols;
pub mod rewrite;
pub mod sim;
pub mod state;
pub mod textfmt;
pub mod types;

pub use error::{Error, Result};
pub use gates::GateId;
pub use matrix::{tensor_embed, DenseUnitary};
pub use state::{state_overlap, StateVector};
pub use types::{Circuit, Dimension, Instruction, StateLabel};

/// Numeric tolerance used for every entrywise comparison, unitarity and
/// normalization check in the crate unless a caller passes its own.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Hard cap on the full state-space dimension `d^n` of any circuit, state
/// or embedded operator. Keeps dense matrices comfortably in memory.
pub const MAX_TOTAL_DIM: usize = 2048;
