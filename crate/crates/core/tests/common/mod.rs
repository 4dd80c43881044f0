//! Random generators shared by the integration suites.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use selfreject_core::noise::{sample_noise, NoiseEnsemble};
use selfreject_core::{BsConvention, Circuit, Element, ElementKind, Mode, PhotonState, Polarization};

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Normalized random state on the given channels, ticks in 0..8.
pub fn random_state(rng: &mut ChaCha8Rng, channels: &[&str]) -> PhotonState {
    loop {
        let mut s = PhotonState::empty();
        for _ in 0..rng.random_range(1..16) {
            let ch = *channels.choose(rng).unwrap();
            let pol = if rng.random_bool(0.5) { Polarization::H } else { Polarization::V };
            s.add(Mode::new(ch, pol, rng.random_range(0..8)), random_complex(rng));
        }
        let n = s.norm_sq();
        if n > 1e-6 {
            return s.scaled(Complex64::new(1.0 / n.sqrt(), 0.0));
        }
    }
}

/// A valid random circuit on input "in". With `lossless_only`, every
/// element is an isometry for arbitrary inputs.
pub fn random_circuit(rng: &mut ChaCha8Rng, len: usize, lossless_only: bool) -> Circuit {
    let mut live: Vec<String> = vec!["in".into()];
    let mut fresh = 0usize;
    let next = |fresh: &mut usize| {
        *fresh += 1;
        format!("w{fresh}")
    };
    let mut elements = Vec::with_capacity(len);
    let mut splits = 0u32;
    for _ in 0..len {
        let choice = rng.random_range(0..8);
        let two_port = choice < 2;
        if two_port {
            let mut inputs = vec![live.remove(rng.random_range(0..live.len()))];
            if !live.is_empty() && rng.random_bool(0.5) {
                inputs.push(live.remove(rng.random_range(0..live.len())));
            }
            let outputs: Vec<String> = if inputs.len() == 2 && rng.random_bool(0.5) {
                vec![inputs[1].clone(), inputs[0].clone()]
            } else {
                vec![next(&mut fresh), next(&mut fresh)]
            };
            let kind = if choice == 0 {
                ElementKind::PolarizingBeamSplitter
            } else if lossless_only || rng.random_bool(0.5) {
                ElementKind::BeamSplitter(BsConvention::Symmetric)
            } else {
                ElementKind::BeamSplitter(BsConvention::PaperSurfacePhases)
            };
            live.extend(outputs.iter().cloned());
            elements.push(Element { kind, inputs: inputs.into_iter().map(Into::into).collect(), outputs: outputs.into_iter().map(Into::into).collect() });
        } else {
            let idx = rng.random_range(0..live.len());
            let input = live[idx].clone();
            let output = if rng.random_bool(0.6) { input.clone() } else { next(&mut fresh) };
            live[idx] = output.clone();
            let kind = match choice {
                2 => ElementKind::HalfWavePlate,
                3 => ElementKind::PhaseShifter(rng.random_range(-7.0..7.0)),
                4 => ElementKind::Delay(rng.random_range(0..5)),
                // Disjoint shifted supports keep the ideal splitter norm-preserving.
                5 if lossless_only => {
                    splits += 1;
                    ElementKind::TimeBinSplitter(1000 << (splits - 1))
                }
                5 => ElementKind::TimeBinSplitter(rng.random_range(1..5)),
                6 if lossless_only => ElementKind::CollectiveNoise(sample_noise(NoiseEnsemble::HaarUnitary, rng.random())),
                6 => ElementKind::CollectiveNoise(sample_noise(NoiseEnsemble::RowNormalizedGeneral, rng.random())),
                _ => ElementKind::Delay(rng.random_range(0..3)),
            };
            elements.push(Element { kind, inputs: vec![input.into()], outputs: vec![output.into()] });
        }
    }
    let outputs = live.into_iter().map(Into::into).collect();
    Circuit::new("in", elements, outputs).expect("generator produces valid wiring")
}
