//! Simulation and information-cost measurement for two-party classical and
//! quantum communication protocols.
//!
//! Registers are ordered by declaration, the first register occupying the most
//! significant bits of a basis index; within a register, bit 0 is the most
//! significant. Information quantities are in bits.

pub mod classical;
pub mod embeddings;
pub mod error;
pub mod functions;
pub mod inputs;
pub mod qkernel;
pub mod quantum;
pub mod random;

pub use error::{Error, Result};
pub use inputs::InputDistribution;
