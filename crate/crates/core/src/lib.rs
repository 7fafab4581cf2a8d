//! Simulator and design-space explorer for a compile-time configurable
//! vector soft-processor.
//!
//! The crate is organised bottom-up:
//!
//! * [`fixedpoint`]: saturating fixed-point words (`Fixed<FRAC>`).
//! * [`isa`]: instruction set, two-pass assembler, validation.
//! * [`vectorcore`]: core configuration and the cycle-accurate simulator.
//! * [`archmodels`]: analytic models for fully tiled and fully sequential
//!   datapaths.
//! * [`resource`]: linear slice-count model and its calibration.
//! * [`kernelbench`]: the benchmark kernel, its programs, and a
//!   floating-point reference.
//! * [`dse`]: sweeps, Pareto frontiers, throughput and Amdahl projections.

pub mod archmodels;
pub mod dse;
pub mod fixedpoint;
pub mod isa;
pub mod kernelbench;
pub mod resource;
pub mod vectorcore;

/// The simulator's data word: signed Q32.32.
pub type Fixed64 = fixedpoint::Fixed<32>;

/// Reals used by the analytic models and projections.
pub type Real = f64;

pub use fixedpoint::{ArithFlags, Fixed};
pub use isa::{Instruction, OpClass, Opcode, Program};
pub use vectorcore::{CoreConfig, ExecReport};
