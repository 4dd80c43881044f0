//! Exact amplitude simulation of passive error rejection for a single
//! polarization qubit sent over a collective-noise fiber.
//!
//! The qubit is split into 2N time-bin wavepackets by an encoder of
//! unbalanced interferometers, sent through one unknown polarization
//! transformation, and recombined by a decoder whose adjacent-bin
//! interference reproduces the original state in N - 1 of every N + 1 slots
//! per branch, whatever the noise.

pub mod circuit;
pub mod elements;
pub mod error;
pub mod noise;
pub mod postselect;
pub mod qkd;
pub mod rng;
pub mod scheme;
pub mod state;

pub use circuit::{parse_circuit, Circuit};
pub use elements::{BsConvention, Element, ElementKind};
pub use error::{Error, Result};
pub use noise::{apply_collective_noise, sample_noise, NoiseEnsemble, NoiseParams};
pub use postselect::{
    analyze, correction_table, success_probability_sweep, BranchId, BranchReport, Correction, CorrectionTable,
};
pub use qkd::{effective_efficiency, simulate_bb84, Bb84Config, Bb84Stats};
pub use scheme::{build_decoder, build_encoder, DecoderSpec, EncoderSpec, Pipeline};
pub use state::{fidelity_with_qubit, Channel, Mode, PhotonState, Polarization, QubitSpec, TimeTick};
