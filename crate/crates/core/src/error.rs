use thiserror::Error;

use crate::state::{Channel, TimeTick};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit is not normalized: |alpha|^2 + |beta|^2 = {0}")]
    NotNormalized(f64),
    #[error("conditional state has zero norm")]
    ZeroNorm,
    #[error("state spans more than one (channel, tick) slot")]
    NotSingleSlot,
    #[error("surface-phase beam splitter inputs `{in1}` and `{in2}` overlap at {pol:?}, tick {t}")]
    ConventionViolation {
        in1: Channel,
        in2: Channel,
        pol: crate::state::Polarization,
        t: TimeTick,
    },
    #[error("noise parameters are not row-normalized: {0}")]
    BadNoise(String),
    #[error("invalid encoder/decoder configuration: {0}")]
    InvalidSpec(String),
    #[error("circuit wiring: {0}")]
    Wiring(String),
    #[error("no single Pauli correction recovers the qubit for branch {branch} at tick {tick}")]
    NoCorrection { branch: String, tick: i64 },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Parse(String),
}
