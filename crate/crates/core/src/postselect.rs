//! Time-bin gating at the decoder outputs.
//!
//! Each of the four noise components lands in its own (port, delay) group of
//! N + 1 ticks. The first and last tick of a group carry a single unpaired
//! wavepacket and are discarded; every tick in between holds two interfering
//! wavepackets whose (H, V) amplitudes are the original qubit up to a Pauli.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{sample_noise, NoiseEnsemble, NoiseParams};
use crate::rng::{derive_seed, random_qubit, Stream};
use crate::scheme::{DecoderSpec, EncoderSpec, Pipeline, PORT_5, PORT_6};
use crate::state::{qubit_fidelity, Channel, PhotonState, QubitSpec};

/// Amplitudes below this relative size are treated as zero when solving
/// for a correction.
const SOLVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BranchId {
    /// H-group, H after the channel (d1).
    P1H,
    /// H-group, V after the channel (g1).
    P1V,
    /// V-group, H after the channel (d2).
    P2H,
    /// V-group, V after the channel (g2).
    P2V,
}

impl BranchId {
    pub const ALL: [BranchId; 4] = [BranchId::P1H, BranchId::P1V, BranchId::P2H, BranchId::P2V];

    /// |coefficient|^2 / 2, the share of the photon this branch carries.
    pub fn weight(self, p: &NoiseParams) -> f64 {
        let c = match self {
            BranchId::P1H => p.d1,
            BranchId::P1V => p.g1,
            BranchId::P2H => p.d2,
            BranchId::P2V => p.g2,
        };
        c.norm_sqr() / 2.0
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Correction {
    Identity,
    /// σx
    BitFlip,
    /// σz
    PhaseFlip,
    /// σy
    BitPhaseFlip,
}

impl Correction {
    pub const ALL: [Correction; 4] =
        [Correction::Identity, Correction::BitFlip, Correction::PhaseFlip, Correction::BitPhaseFlip];

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Correction::Identity => [[l, o], [o, l]],
            Correction::BitFlip => [[o, l], [l, o]],
            Correction::PhaseFlip => [[l, o], [o, -l]],
            Correction::BitPhaseFlip => [[o, -i], [i, o]],
        }
    }

    pub fn apply(self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.matrix();
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn name(self) -> &'static str {
        match self {
            Correction::Identity => "I",
            Correction::BitFlip => "X",
            Correction::PhaseFlip => "Z",
            Correction::BitPhaseFlip => "Y",
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a branch shows up at the decoder output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSlot {
    pub branch: BranchId,
    pub port: Channel,
    /// Tick of the first bin of the group.
    pub offset: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    /// N, bins per encoded group; each decoded group spans N + 1 ticks.
    pub bins: i64,
    pub slots: Vec<BranchSlot>,
    /// Keyed by branch and tick relative to the branch offset.
    pub entries: BTreeMap<(BranchId, i64), Correction>,
}

impl CorrectionTable {
    pub fn slot(&self, branch: BranchId) -> &BranchSlot {
        self.slots.iter().find(|s| s.branch == branch).expect("every branch has a slot")
    }

    pub fn get(&self, branch: BranchId, relative_tick: i64) -> Option<Correction> {
        self.entries.get(&(branch, relative_tick)).copied()
    }
}

fn branch_slots(encoder: &EncoderSpec, decoder: &DecoderSpec) -> Vec<BranchSlot> {
    let dt = encoder.group_delay;
    let dtp = decoder.v_delay;
    let slot = |branch, port: &str, offset| BranchSlot { branch, port: port.into(), offset };
    vec![
        slot(BranchId::P1H, PORT_5, 0),
        slot(BranchId::P1V, PORT_6, dtp),
        slot(BranchId::P2H, PORT_5, dt),
        slot(BranchId::P2V, PORT_6, dt + dtp),
    ]
}

/// Finds the Pauli P with `P * [u_h u_v] = c * I`, `c != 0`, where `u_h` and
/// `u_v` are the conditional (H, V) outputs for the two basis inputs.
fn solve_pauli(u_h: [Complex64; 2], u_v: [Complex64; 2]) -> Option<Correction> {
    let scale = (u_h[0].norm_sqr() + u_h[1].norm_sqr() + u_v[0].norm_sqr() + u_v[1].norm_sqr()).sqrt();
    if scale == 0.0 {
        return None;
    }
    Correction::ALL.into_iter().find(|p| {
        let col_h = p.apply(u_h);
        let col_v = p.apply(u_v);
        let diag = col_h[0];
        diag.norm() > SOLVE_TOLERANCE * scale
            && col_h[1].norm() < SOLVE_TOLERANCE * scale
            && col_v[0].norm() < SOLVE_TOLERANCE * scale
            && (col_v[1] - diag).norm() < SOLVE_TOLERANCE * scale
    })
}

/// Derives the correction for every accepted bin by pushing |H> and |V>
/// through the full chain. Identity noise populates the diagonal branches
/// and a full bit-flip channel populates the off-diagonal ones.
pub fn correction_table(encoder: &EncoderSpec, decoder: &DecoderSpec) -> Result<CorrectionTable> {
    let pipeline = Pipeline::new(*encoder, *decoder)?;
    correction_table_for(&pipeline)
}

pub fn correction_table_for(pipeline: &Pipeline) -> Result<CorrectionTable> {
    let bins = pipeline.encoder_spec.bins_per_group() as i64;
    let slots = branch_slots(&pipeline.encoder_spec, &pipeline.decoder_spec);
    let mut entries = BTreeMap::new();
    for noise in [NoiseParams::identity(), NoiseParams::swap()] {
        let out_h = pipeline.transmit(&QubitSpec::h(), &noise)?;
        let out_v = pipeline.transmit(&QubitSpec::v(), &noise)?;
        for slot in &slots {
            if slot.branch.weight(&noise) == 0.0 {
                continue;
            }
            for k in 1..bins {
                let t = slot.offset + k;
                let corr = solve_pauli(out_h.qubit_at(&slot.port, t), out_v.qubit_at(&slot.port, t))
                    .ok_or_else(|| Error::NoCorrection { branch: slot.branch.to_string(), tick: k })?;
                entries.insert((slot.branch, k), corr);
            }
        }
    }
    Ok(CorrectionTable { bins, slots, entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedBin {
    pub port: Channel,
    pub tick: i64,
    pub correction: Correction,
    pub probability: f64,
    /// Corrected, renormalized (H, V) amplitudes; absent when the bin is empty.
    pub state: Option<[Complex64; 2]>,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscardedBin {
    pub port: Channel,
    pub tick: i64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub branch: BranchId,
    /// Total probability found in the branch window.
    pub weight: f64,
    pub accepted: Vec<AcceptedBin>,
    pub discarded: Vec<DiscardedBin>,
    pub success_probability: f64,
}

impl BranchReport {
    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty() && self.discarded.is_empty()
    }

    pub fn min_fidelity(&self) -> Option<f64> {
        self.accepted.iter().filter_map(|b| b.fidelity).reduce(f64::min)
    }
}

/// Accounts for every decoder output slot of `state`, the decoded photon.
/// `reference` is the qubit that was sent, used only for fidelities.
pub fn analyze(state: &PhotonState, table: &CorrectionTable, reference: &QubitSpec) -> Result<Vec<BranchReport>> {
    let mut reports = Vec::with_capacity(4);
    for slot in &table.slots {
        let window = state.restrict(&slot.port, slot.offset..=slot.offset + table.bins);
        let mut report = BranchReport {
            branch: slot.branch,
            weight: window.norm_sq(),
            accepted: Vec::new(),
            discarded: Vec::new(),
            success_probability: 0.0,
        };
        if window.is_empty() {
            reports.push(report);
            continue;
        }
        for k in 0..=table.bins {
            let t = slot.offset + k;
            let amps = window.qubit_at(&slot.port, t);
            let probability = amps[0].norm_sqr() + amps[1].norm_sqr();
            match table.get(slot.branch, k) {
                Some(correction) => {
                    let (corrected, fidelity) = if probability > 0.0 {
                        let fixed = correction.apply(amps);
                        let norm = probability.sqrt();
                        (Some([fixed[0] / norm, fixed[1] / norm]), Some(qubit_fidelity(fixed, reference)?))
                    } else {
                        (None, None)
                    };
                    report.success_probability += probability;
                    report.accepted.push(AcceptedBin {
                        port: slot.port.clone(),
                        tick: t,
                        correction,
                        probability,
                        state: corrected,
                        fidelity,
                    });
                }
                None => report.discarded.push(DiscardedBin { port: slot.port.clone(), tick: t, probability }),
            }
        }
        reports.push(report);
    }
    Ok(reports)
}

pub fn total_success(reports: &[BranchReport]) -> f64 {
    reports.iter().map(|r| r.success_probability).sum()
}

pub fn min_fidelity(reports: &[BranchReport]) -> Option<f64> {
    reports.iter().filter_map(|r| r.min_fidelity()).reduce(f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub index: u64,
    pub noise: NoiseParams,
    pub qubit: QubitSpec,
    pub success: f64,
    pub min_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub expected: f64,
    pub mean: f64,
    pub max_deviation: f64,
    pub samples: Vec<SweepSample>,
}

/// Success probability over `samples` noise draws, each with a random qubit.
/// Sample `i` depends only on `(seed, i)`.
pub fn success_probability_sweep(
    encoder: &EncoderSpec,
    decoder: &DecoderSpec,
    ensemble: NoiseEnsemble,
    samples: u64,
    seed: u64,
) -> Result<SweepStats> {
    if samples == 0 {
        return Err(Error::InvalidSpec("sweep needs at least one sample".into()));
    }
    let pipeline = Pipeline::new(*encoder, *decoder)?;
    let table = correction_table_for(&pipeline)?;
    let expected = encoder.success_probability();

    let rows: Vec<SweepSample> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let noise = sample_noise(ensemble, derive_seed(seed, Stream::Noise, i));
            let qubit = random_qubit(derive_seed(seed, Stream::Qubit, i));
            let out = pipeline.transmit(&qubit, &noise)?;
            let reports = analyze(&out, &table, &qubit)?;
            Ok(SweepSample {
                index: i,
                noise,
                qubit,
                success: total_success(&reports),
                min_fidelity: min_fidelity(&reports).unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<_>>()?;

    let mean = rows.iter().map(|r| r.success).sum::<f64>() / rows.len() as f64;
    let max_deviation = rows.iter().map(|r| (r.success - expected).abs()).fold(0.0, f64::max);
    Ok(SweepStats { expected, mean, max_deviation, samples: rows })
}
