//! Encoder and decoder chains, and the full transmit pipeline.
//!
//! Encoder: the input qubit is split by polarization; the V arm is rotated to
//! H, phase shifted by 3π/2 and delayed one tick, then both arms meet at a
//! beam splitter whose outputs are channels "1" and "2". Each output runs
//! through a cascade of time-bin splitters (2, 4, ..., 2^n ticks), giving
//! N = 2^(n+1) evenly spaced bins per group: α on even ticks, β on odd ones.
//! Port "2" is rotated to V, delayed by ΔT, and merged with port "1" onto
//! the single transmission channel.
//!
//! Decoder: a polarization interferometer delays V by ΔT', then a beam
//! splitter feeds a short arm (half-wave plate) and a long arm (π/2 phase,
//! one-tick delay) that recombine at a polarizing beam splitter into output
//! ports "5" and "6". Adjacent bins of each group interfere there.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::elements::{BsConvention, Element, ElementKind};
use crate::error::{Error, Result};
use crate::noise::{apply_collective_noise, NoiseParams};
use crate::state::{Channel, PhotonState, QubitSpec};

pub const INPUT_CHANNEL: &str = "in";
/// Single fiber between encoder and decoder.
pub const LINE_CHANNEL: &str = "c";
pub const PORT_5: &str = "5";
pub const PORT_6: &str = "6";

/// Default group separation, in ticks.
pub const DEFAULT_GROUP_DELAY: i64 = 64;
pub const MAX_STAGES: u32 = 16;

pub const ENCODER_PHASE: f64 = 3.0 * PI / 2.0;
pub const DECODER_PHASE: f64 = PI / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    /// Splitter cascade depth n.
    pub stages: u32,
    /// Delay of the second group, ΔT, in ticks.
    pub group_delay: i64,
    pub convention: BsConvention,
}

impl EncoderSpec {
    /// Uses ΔT = 64 ticks, or 2N when that is larger.
    pub fn new(stages: u32, convention: BsConvention) -> Self {
        let mut spec = EncoderSpec { stages, group_delay: DEFAULT_GROUP_DELAY, convention };
        if stages <= MAX_STAGES {
            spec.group_delay = spec.group_delay.max(2 * spec.bins_per_group() as i64);
        }
        spec
    }

    pub fn with_group_delay(mut self, ticks: i64) -> Self {
        self.group_delay = ticks;
        self
    }

    /// N = 2^(n+1), the number of time bins in each group.
    pub fn bins_per_group(&self) -> u64 {
        1u64 << (self.stages + 1)
    }

    /// 2N.
    pub fn wavepackets(&self) -> u64 {
        2 * self.bins_per_group()
    }

    pub fn success_probability(&self) -> f64 {
        let n = self.bins_per_group() as f64;
        (n - 1.0) / n
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 || self.stages > MAX_STAGES {
            return Err(Error::InvalidSpec(format!(
                "stages must be in 1..={MAX_STAGES}, got {}",
                self.stages
            )));
        }
        let min = 2 * self.bins_per_group() as i64;
        if self.group_delay < min {
            return Err(Error::InvalidSpec(format!(
                "group delay {} ticks would overlap the groups; need at least {min} for {} stage(s)",
                self.group_delay, self.stages
            )));
        }
        Ok(())
    }
}

impl Default for EncoderSpec {
    fn default() -> Self {
        EncoderSpec::new(1, BsConvention::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecoderSpec {
    /// Extra delay on the V component, ΔT', in ticks.
    pub v_delay: i64,
    pub convention: BsConvention,
}

impl DecoderSpec {
    pub fn new(convention: BsConvention) -> Self {
        DecoderSpec { v_delay: 0, convention }
    }

    pub fn with_v_delay(mut self, ticks: i64) -> Self {
        self.v_delay = ticks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_delay < 0 {
            return Err(Error::InvalidSpec(format!("V delay must be >= 0, got {}", self.v_delay)));
        }
        Ok(())
    }

    /// Checks ΔT' against the span of one decoded group.
    pub fn validate_for(&self, encoder: &EncoderSpec) -> Result<()> {
        self.validate()?;
        let span = encoder.bins_per_group() as i64 + 1;
        if self.v_delay != 0 && self.v_delay < span {
            return Err(Error::InvalidSpec(format!(
                "V delay {} ticks must be 0 or at least the group span {span}",
                self.v_delay
            )));
        }
        Ok(())
    }
}

fn el(kind: ElementKind, inputs: &[&str], outputs: &[&str]) -> Element {
    Element::new(kind, inputs, outputs)
}

pub fn build_encoder(spec: &EncoderSpec) -> Result<Circuit> {
    spec.validate()?;
    let mut elements = vec![
        el(ElementKind::PolarizingBeamSplitter, &[INPUT_CHANNEL], &["s", "l"]),
        el(ElementKind::HalfWavePlate, &["l"], &["l"]),
        el(ElementKind::PhaseShifter(ENCODER_PHASE), &["l"], &["l"]),
        el(ElementKind::Delay(1), &["l"], &["l"]),
        el(ElementKind::BeamSplitter(spec.convention), &["s", "l"], &["1", "2"]),
    ];
    for port in ["1", "2"] {
        for k in 1..=spec.stages {
            elements.push(el(ElementKind::TimeBinSplitter(1i64 << k), &[port], &[port]));
        }
    }
    elements.push(el(ElementKind::HalfWavePlate, &["2"], &["2"]));
    elements.push(el(ElementKind::Delay(spec.group_delay), &["2"], &["2"]));
    elements.push(el(ElementKind::PolarizingBeamSplitter, &["1", "2"], &[LINE_CHANNEL, "x"]));
    Circuit::new(INPUT_CHANNEL, elements, vec![LINE_CHANNEL.into()])
}

/// Unbalanced Mach-Zehnder interferometer built from two beam splitters,
/// the physical counterpart of [`ElementKind::TimeBinSplitter`]. Light on
/// `input` leaves on `output` and `leak`; internal arms are named
/// `<input>.s` and `<input>.l`.
pub fn physical_timebin_mzi(
    input: &str,
    output: &str,
    leak: &str,
    ticks: i64,
    convention: BsConvention,
) -> Vec<Element> {
    let short = format!("{input}.s");
    let long = format!("{input}.l");
    vec![
        el(ElementKind::BeamSplitter(convention), &[input], &[&short, &long]),
        el(ElementKind::Delay(ticks), &[&long], &[&long]),
        el(ElementKind::BeamSplitter(convention), &[&short, &long], &[output, leak]),
    ]
}

/// Number of decoder elements ahead of the recombining polarizing beam
/// splitter. Running that many elements leaves the state in the two arms.
pub const DECODER_RECOMBINE_INDEX: usize = 7;

pub fn build_decoder(spec: &DecoderSpec) -> Result<Circuit> {
    spec.validate()?;
    let elements = vec![
        el(ElementKind::PolarizingBeamSplitter, &[LINE_CHANNEL], &["dh", "dv"]),
        el(ElementKind::Delay(spec.v_delay), &["dv"], &["dv"]),
        el(ElementKind::PolarizingBeamSplitter, &["dh", "dv"], &["m", "mx"]),
        el(ElementKind::BeamSplitter(spec.convention), &["m"], &["short", "long"]),
        el(ElementKind::HalfWavePlate, &["short"], &["short"]),
        el(ElementKind::PhaseShifter(DECODER_PHASE), &["long"], &["long"]),
        el(ElementKind::Delay(1), &["long"], &["long"]),
        el(ElementKind::PolarizingBeamSplitter, &["long", "short"], &[PORT_5, PORT_6]),
    ];
    Circuit::new(LINE_CHANNEL, elements, vec![PORT_5.into(), PORT_6.into()])
}

/// Encoder, channel and decoder for one configuration.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub encoder_spec: EncoderSpec,
    pub decoder_spec: DecoderSpec,
    pub encoder: Circuit,
    pub decoder: Circuit,
}

impl Pipeline {
    pub fn new(encoder_spec: EncoderSpec, decoder_spec: DecoderSpec) -> Result<Self> {
        decoder_spec.validate_for(&encoder_spec)?;
        Ok(Pipeline {
            encoder: build_encoder(&encoder_spec)?,
            decoder: build_decoder(&decoder_spec)?,
            encoder_spec,
            decoder_spec,
        })
    }

    /// Uses caller-supplied circuits, e.g. parsed from files.
    pub fn with_circuits(
        encoder_spec: EncoderSpec,
        decoder_spec: DecoderSpec,
        encoder: Circuit,
        decoder: Circuit,
    ) -> Result<Self> {
        decoder_spec.validate_for(&encoder_spec)?;
        encoder_spec.validate()?;
        Ok(Pipeline { encoder_spec, decoder_spec, encoder, decoder })
    }

    pub fn encode(&self, q: &QubitSpec) -> Result<PhotonState> {
        self.encoder.run(&PhotonState::new(q, self.encoder.input().clone())?)
    }

    pub fn transmit(&self, q: &QubitSpec, noise: &NoiseParams) -> Result<PhotonState> {
        let encoded = self.encode(q)?;
        let noisy = apply_collective_noise(&encoded, noise, &[Channel::from(LINE_CHANNEL)]);
        self.decoder.run(&noisy)
    }
}
