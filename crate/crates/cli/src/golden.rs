//! Closed-form checks of the encoder output, the noisy channel state and the
//! decoder's interferometer arms at one stage.

use num_complex::Complex64;
use serde::Serialize;

use selfreject_core::noise::{apply_collective_noise, sample_noise, NoiseEnsemble, NoiseParams};
use selfreject_core::rng::{derive_seed, random_qubit, Stream};
use selfreject_core::scheme::{DECODER_RECOMBINE_INDEX, LINE_CHANNEL};
use selfreject_core::{BsConvention, Circuit, Mode, PhotonState, Polarization, QubitSpec};

pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub max_deviation: f64,
    pub pass: bool,
    /// Mode with the largest deviation, as `channel:pol:tick`.
    pub worst_mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    fn new(check: &'static str, outcome: selfreject_core::Result<(PhotonState, PhotonState)>) -> Self {
        match outcome {
            Ok((actual, expected)) => {
                let (d, worst) = worst_deviation(&actual, &expected);
                CheckResult { check, max_deviation: d, pass: d < TOLERANCE, worst_mode: worst, error: None }
            }
            Err(e) => CheckResult {
                check,
                max_deviation: f64::INFINITY,
                pass: false,
                worst_mode: None,
                error: Some(e.to_string()),
            },
        }
    }
}

fn worst_deviation(actual: &PhotonState, expected: &PhotonState) -> (f64, Option<String>) {
    let mut worst = (0.0, None);
    for mode in actual.iter().chain(expected.iter()).map(|(m, _)| m) {
        let d = (actual.amplitude(mode) - expected.amplitude(mode)).norm();
        if d > worst.0 {
            worst = (d, Some(format!("{}:{}:{}", mode.channel.as_str(), mode.pol, mode.t.0)));
        }
    }
    worst
}

/// α, β, α, β on four consecutive ticks from `offset`, times `k`.
fn pattern(channel: &str, pol: Polarization, offset: i64, k: Complex64, q: &QubitSpec) -> Vec<(Mode, Complex64)> {
    (0..4)
        .map(|t| (Mode::new(channel, pol, offset + t), k * if t % 2 == 0 { q.alpha } else { q.beta }))
        .collect()
}

/// Prefactor and qubit pattern of the second (V) group. The symmetric beam
/// splitter leaves a Z on that group relative to the surface-phase one.
fn second_group(q: &QubitSpec, convention: BsConvention) -> (Complex64, QubitSpec) {
    match convention {
        BsConvention::PaperSurfacePhases => (Complex64::new(0.0, -0.5), *q),
        BsConvention::Symmetric => (Complex64::new(0.0, 0.5), QubitSpec { alpha: q.alpha, beta: -q.beta }),
    }
}

fn encoded(q: &QubitSpec, dt: i64, convention: BsConvention) -> PhotonState {
    let (k, q2) = second_group(q, convention);
    let mut modes = pattern(LINE_CHANNEL, Polarization::H, 0, Complex64::new(0.5, 0.0), q);
    modes.extend(pattern(LINE_CHANNEL, Polarization::V, dt, k, &q2));
    PhotonState::from_modes(modes)
}

fn noisy(q: &QubitSpec, dt: i64, convention: BsConvention, p: &NoiseParams) -> PhotonState {
    let (k, q2) = second_group(q, convention);
    let half = Complex64::new(0.5, 0.0);
    let mut modes = pattern(LINE_CHANNEL, Polarization::H, 0, half * p.d1, q);
    modes.extend(pattern(LINE_CHANNEL, Polarization::V, 0, half * p.g1, q));
    modes.extend(pattern(LINE_CHANNEL, Polarization::H, dt, k * p.d2, &q2));
    modes.extend(pattern(LINE_CHANNEL, Polarization::V, dt, k * p.g2, &q2));
    PhotonState::from_modes(modes)
}

/// The two arms just before recombination, for the H group normalized to one.
fn arms(q: &QubitSpec, convention: BsConvention) -> PhotonState {
    let long = match convention {
        BsConvention::PaperSurfacePhases => 0.5,
        BsConvention::Symmetric => -0.5,
    };
    let mut modes = pattern("short", Polarization::V, 0, Complex64::new(0.5, 0.0), q);
    modes.extend(pattern("long", Polarization::H, 1, Complex64::new(long, 0.0), q));
    PhotonState::from_modes(modes)
}

pub struct GoldenSetup {
    pub encoder: Circuit,
    pub decoder: Circuit,
    pub convention: BsConvention,
    pub group_delay: i64,
    pub seed: u64,
}

pub fn run(setup: &GoldenSetup) -> Vec<CheckResult> {
    let q = random_qubit(derive_seed(setup.seed, Stream::Qubit, 0));
    let p = sample_noise(NoiseEnsemble::HaarUnitary, derive_seed(setup.seed, Stream::Noise, 0));
    let dt = setup.group_delay;
    let conv = setup.convention;

    let encode = || setup.encoder.run(&PhotonState::new(&q, setup.encoder.input().clone())?);
    let encoder_output = encode().map(|out| (out, encoded(&q, dt, conv)));
    let noisy_state =
        encode().map(|out| (apply_collective_noise(&out, &p, &[LINE_CHANNEL.into()]), noisy(&q, dt, conv, &p)));
    let input = PhotonState::from_modes(pattern(
        LINE_CHANNEL,
        Polarization::H,
        0,
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        &q,
    ));
    let decoder = setup
        .decoder
        .run_prefix(&input, DECODER_RECOMBINE_INDEX)
        .map(|out| (out, arms(&q, conv)));

    vec![
        CheckResult::new("encoder-output", encoder_output),
        CheckResult::new("noisy-state", noisy_state),
        CheckResult::new("decoder-interference", decoder),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use selfreject_core::{build_decoder, build_encoder, DecoderSpec, EncoderSpec};

    fn setup(convention: BsConvention, seed: u64) -> GoldenSetup {
        let spec = EncoderSpec::new(1, convention);
        GoldenSetup {
            encoder: build_encoder(&spec).unwrap(),
            decoder: build_decoder(&DecoderSpec::new(convention)).unwrap(),
            convention,
            group_delay: spec.group_delay,
            seed,
        }
    }

    #[test]
    fn builders_pass_in_both_conventions() {
        for conv in [BsConvention::PaperSurfacePhases, BsConvention::Symmetric] {
            for seed in 0..10 {
                for r in run(&setup(conv, seed)) {
                    assert!(r.pass, "{conv:?} seed {seed}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn convention_mismatch_fails_encoder_check() {
        let mut s = setup(BsConvention::Symmetric, 3);
        s.convention = BsConvention::PaperSurfacePhases;
        let results = run(&s);
        assert!(!results[0].pass);
        assert!(!results[2].pass);
    }
}
