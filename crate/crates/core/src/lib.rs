//! Simulation of long-distance entanglement capture between trapped-atom
//! cavity nodes and of unconditional atomic teleportation through a complete
//! Bell-state measurement by sequential elimination.
//!
//! * [`qcore`]: dense state vectors over labelled qudit spaces, two-level
//!   rotations, projective measurement and fidelity.
//! * [`atomics`]: the six-level rubidium ground-state model, named Raman
//!   pulses and the Bell-basis mapping.
//! * [`teleport`]: the end-to-end teleportation pipeline with detector error.
//! * [`linkmath`]: closed-form link budget arithmetic.
//! * [`capture_sim`]: Monte-Carlo simulation of the two-node capture protocol.
//! * [`cli`]: scenario files and the `budget`, `capture` and `teleport`
//!   subcommands.

pub mod atomics;
pub mod capture_sim;
pub mod cli;
pub mod csvfmt;
pub mod error;
pub mod linkmath;
pub mod qcore;
pub mod rng;
pub mod teleport;

pub use error::{Error, Result};
pub use num_complex::Complex64;
