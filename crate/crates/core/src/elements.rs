//! Linear, mode-local optical elements.
//!
//! Every element acts independently at each (polarization, tick) and only on
//! the channels it is wired to; all other amplitudes pass through untouched.
//!
//! Beam-splitter phase conventions, written as `out = M * (in1, in2)`:
//!
//! ```text
//! Symmetric          (1/√2) [[ 1, i ],
//!                            [ i, 1 ]]
//! PaperSurfacePhases (1/√2) [[ 1,  i ],
//!                            [ -i, 1 ]]
//! ```
//!
//! The surface-phase matrix is singular. It is exact only while the two
//! inputs never share a (polarization, tick) slot, which is the only regime
//! the encoder and decoder produce; overlapping inputs are rejected.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{apply_collective_noise, NoiseParams};
use crate::state::{Channel, Mode, PhotonState, Polarization, TimeTick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BsConvention {
    #[default]
    Symmetric,
    PaperSurfacePhases,
}

impl BsConvention {
    /// Transfer matrix, rows indexed by output port.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let t = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let r = Complex64::new(0.0, FRAC_1_SQRT_2);
        match self {
            BsConvention::Symmetric => [[t, r], [r, t]],
            BsConvention::PaperSurfacePhases => [[t, r], [-r, t]],
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            BsConvention::Symmetric => "symmetric",
            BsConvention::PaperSurfacePhases => "paper",
        }
    }
}

impl fmt::Display for BsConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for BsConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(BsConvention::Symmetric),
            "paper" => Ok(BsConvention::PaperSurfacePhases),
            other => Err(Error::Parse(format!(
                "unknown beam splitter convention `{other}` (expected symmetric|paper)"
            ))),
        }
    }
}

/// Polarizing beam splitter: H is transmitted (in1→out1, in2→out2), V is
/// reflected (in1→out2, in2→out1). No reflection phase.
pub fn apply_pbs(
    s: &PhotonState,
    in1: &Channel,
    in2: Option<&Channel>,
    out1: &Channel,
    out2: &Channel,
) -> PhotonState {
    s.remap(|m, a, emit| {
        let target = if &m.channel == in1 {
            match m.pol {
                Polarization::H => out1,
                Polarization::V => out2,
            }
        } else if Some(&m.channel) == in2 {
            match m.pol {
                Polarization::H => out2,
                Polarization::V => out1,
            }
        } else {
            emit(m.clone(), a);
            return;
        };
        emit(Mode { channel: target.clone(), ..m.clone() }, a);
    })
}

/// 50/50 beam splitter under the given phase convention.
pub fn apply_bs(
    s: &PhotonState,
    in1: &Channel,
    in2: Option<&Channel>,
    out1: &Channel,
    out2: &Channel,
    convention: BsConvention,
) -> Result<PhotonState> {
    let mut slots: BTreeMap<(Polarization, TimeTick), [Complex64; 2]> = BTreeMap::new();
    let mut out = PhotonState::empty();
    for (m, a) in s.iter() {
        let port = if &m.channel == in1 {
            0
        } else if Some(&m.channel) == in2 {
            1
        } else {
            out.add(m.clone(), *a);
            continue;
        };
        slots.entry((m.pol, m.t)).or_default()[port] += *a;
    }

    let matrix = convention.matrix();
    for ((pol, t), amps) in slots {
        if convention == BsConvention::PaperSurfacePhases
            && amps[0] != Complex64::default()
            && amps[1] != Complex64::default()
        {
            return Err(Error::ConventionViolation {
                in1: in1.clone(),
                in2: in2.cloned().unwrap_or_else(|| Channel::new("")),
                pol,
                t,
            });
        }
        for (row, channel) in matrix.iter().zip([out1, out2]) {
            let amp = row[0] * amps[0] + row[1] * amps[1];
            out.add(Mode { channel: channel.clone(), t, pol }, amp);
        }
    }
    Ok(out)
}

/// 90° half-wave plate: swaps H and V on the channel.
pub fn apply_hwp(s: &PhotonState, channel: &Channel) -> PhotonState {
    s.remap(|m, a, emit| {
        if &m.channel == channel {
            emit(Mode { pol: m.pol.flipped(), ..m.clone() }, a);
        } else {
            emit(m.clone(), a);
        }
    })
}

pub fn apply_phase(s: &PhotonState, channel: &Channel, phi: f64) -> PhotonState {
    let factor = Complex64::from_polar(1.0, phi);
    s.remap(|m, a, emit| {
        if &m.channel == channel {
            emit(m.clone(), a * factor);
        } else {
            emit(m.clone(), a);
        }
    })
}

pub fn apply_delay(s: &PhotonState, channel: &Channel, ticks: i64) -> PhotonState {
    s.remap(|m, a, emit| {
        if &m.channel == channel {
            emit(Mode { t: m.t.shifted(ticks), ..m.clone() }, a);
        } else {
            emit(m.clone(), a);
        }
    })
}

/// Ideal time-bin splitter: `a@t -> a/√2 @t + a/√2 @(t+ticks)`.
///
/// Norm is preserved exactly when no two input amplitudes on the channel
/// (same polarization) are `ticks` apart, which holds for every stage of the
/// encoder cascade. Inputs that do collide interfere and the norm changes.
pub fn apply_timebin_splitter(s: &PhotonState, channel: &Channel, ticks: i64) -> PhotonState {
    s.remap(|m, a, emit| {
        if &m.channel == channel {
            let half = a * FRAC_1_SQRT_2;
            emit(m.clone(), half);
            emit(Mode { t: m.t.shifted(ticks), ..m.clone() }, half);
        } else {
            emit(m.clone(), a);
        }
    })
}

/// Moves every amplitude from one channel onto another.
pub fn relabel(s: &PhotonState, from: &Channel, to: &Channel) -> PhotonState {
    if from == to {
        return s.clone();
    }
    s.remap(|m, a, emit| {
        if &m.channel == from {
            emit(Mode { channel: to.clone(), ..m.clone() }, a);
        } else {
            emit(m.clone(), a);
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ElementKind {
    BeamSplitter(BsConvention),
    PolarizingBeamSplitter,
    HalfWavePlate,
    PhaseShifter(f64),
    Delay(i64),
    TimeBinSplitter(i64),
    CollectiveNoise(NoiseParams),
}

impl ElementKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            ElementKind::BeamSplitter(_) => "bs",
            ElementKind::PolarizingBeamSplitter => "pbs",
            ElementKind::HalfWavePlate => "hwp",
            ElementKind::PhaseShifter(_) => "phase",
            ElementKind::Delay(_) => "delay",
            ElementKind::TimeBinSplitter(_) => "split",
            ElementKind::CollectiveNoise(_) => "noise",
        }
    }

    pub fn is_two_port(&self) -> bool {
        matches!(self, ElementKind::BeamSplitter(_) | ElementKind::PolarizingBeamSplitter)
    }

    /// True when the element is norm-preserving for arbitrary inputs.
    pub fn is_isometry(&self) -> bool {
        match self {
            ElementKind::BeamSplitter(c) => *c == BsConvention::Symmetric,
            ElementKind::CollectiveNoise(p) => p.is_unitary(),
            ElementKind::TimeBinSplitter(_) => false,
            _ => true,
        }
    }
}

/// An element placed on named channels. Two-port elements take one or two
/// inputs (a missing second input is vacuum) and exactly two outputs; all
/// other elements take one input and one output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub kind: ElementKind,
    pub inputs: Vec<Channel>,
    pub outputs: Vec<Channel>,
}

impl Element {
    pub fn new(kind: ElementKind, inputs: &[&str], outputs: &[&str]) -> Self {
        Element {
            kind,
            inputs: inputs.iter().map(|c| Channel::from(*c)).collect(),
            outputs: outputs.iter().map(|c| Channel::from(*c)).collect(),
        }
    }

    pub fn check_arity(&self) -> Result<()> {
        let (ins, outs) = (self.inputs.len(), self.outputs.len());
        let ok = if self.kind.is_two_port() {
            (1..=2).contains(&ins) && outs == 2
        } else {
            ins == 1 && outs == 1
        };
        if ok {
            Ok(())
        } else {
            let expected = if self.kind.is_two_port() { "1-2 inputs and 2 outputs" } else { "1 input and 1 output" };
            Err(Error::Wiring(format!(
                "`{}` takes {expected}, got {ins} input(s) and {outs} output(s)",
                self.kind.keyword()
            )))
        }
    }

    pub fn apply(&self, s: &PhotonState) -> Result<PhotonState> {
        self.check_arity()?;
        let in1 = &self.inputs[0];
        let in2 = self.inputs.get(1);
        let out1 = &self.outputs[0];
        let out = match &self.kind {
            ElementKind::BeamSplitter(conv) => apply_bs(s, in1, in2, out1, &self.outputs[1], *conv)?,
            ElementKind::PolarizingBeamSplitter => apply_pbs(s, in1, in2, out1, &self.outputs[1]),
            ElementKind::HalfWavePlate => apply_hwp(&relabel(s, in1, out1), out1),
            ElementKind::PhaseShifter(phi) => apply_phase(&relabel(s, in1, out1), out1, *phi),
            ElementKind::Delay(ticks) => apply_delay(&relabel(s, in1, out1), out1, *ticks),
            ElementKind::TimeBinSplitter(ticks) => {
                apply_timebin_splitter(&relabel(s, in1, out1), out1, *ticks)
            }
            ElementKind::CollectiveNoise(p) => {
                apply_collective_noise(&relabel(s, in1, out1), p, std::slice::from_ref(out1))
            }
        };
        Ok(out)
    }
}
