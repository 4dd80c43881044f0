//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::FRAC_1_SQRT_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use selfreject_core::noise::{apply_collective_noise, sample_noise, NoiseEnsemble};
use selfreject_core::postselect::{analyze, correction_table_for, Correction};
use selfreject_core::rng::random_qubit;
use selfreject_core::scheme::{DECODER_RECOMBINE_INDEX, LINE_CHANNEL};
use selfreject_core::state::Polarization::{H, V};
use selfreject_core::{
    build_decoder, build_encoder, parse_circuit, simulate_bb84, success_probability_sweep, Bb84Config, BranchId,
    BsConvention, DecoderSpec, EncoderSpec, Error, Mode, PhotonState, Pipeline, Polarization, QubitSpec,
};

const PAPER: BsConvention = BsConvention::PaperSurfacePhases;
const AMP_TOL: f64 = 1e-12;
const PROB_TOL: f64 = 1e-9;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// a, b, a, b over four consecutive ticks starting at `offset`, times `k`.
fn pattern(channel: &str, pol: Polarization, offset: i64, k: Complex64, q: &QubitSpec) -> Vec<(Mode, Complex64)> {
    (0..4)
        .map(|t| (Mode::new(channel, pol, offset + t), k * if t % 2 == 0 { q.alpha } else { q.beta }))
        .collect()
}

fn within_time(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn ac1_encoder_output() -> Outcome {
    let start = Instant::now();
    let spec = EncoderSpec::new(1, PAPER);
    let enc = build_encoder(&spec).unwrap();
    let mut worst: f64 = 0.0;
    let mut counts_ok = true;
    for seed in 0..200 {
        let q = random_qubit(seed);
        let out = enc.run(&PhotonState::new(&q, "in").unwrap()).unwrap();
        counts_ok &= out.len() == 8;
        let mut expected = pattern(LINE_CHANNEL, H, 0, c(0.5, 0.0), &q);
        expected.extend(pattern(LINE_CHANNEL, V, spec.group_delay, c(0.0, -0.5), &q));
        worst = worst.max(out.max_deviation(&PhotonState::from_modes(expected)));
    }
    let elapsed = start.elapsed();
    outcome(
        counts_ok && worst < AMP_TOL && within_time(elapsed, Duration::from_secs(1)),
        format!("200 qubits, 8 modes each: {counts_ok}, max dev {worst:.2e} (< {AMP_TOL:e}), {elapsed:.2?} (< 1s)"),
    )
}

fn ac2_noisy_state() -> Outcome {
    let spec = EncoderSpec::new(1, PAPER);
    let enc = build_encoder(&spec).unwrap();
    let q = random_qubit(2024);
    let encoded = enc.run(&PhotonState::new(&q, "in").unwrap()).unwrap();
    let dt = spec.group_delay;
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let p = sample_noise(NoiseEnsemble::HaarUnitary, seed);
        let noisy = apply_collective_noise(&encoded, &p, &[LINE_CHANNEL.into()]);
        let mut expected = pattern(LINE_CHANNEL, H, 0, p.d1 * 0.5, &q);
        expected.extend(pattern(LINE_CHANNEL, V, 0, p.g1 * 0.5, &q));
        expected.extend(pattern(LINE_CHANNEL, H, dt, p.d2 * c(0.0, -0.5), &q));
        expected.extend(pattern(LINE_CHANNEL, V, dt, p.g2 * c(0.0, -0.5), &q));
        worst = worst.max(noisy.max_deviation(&PhotonState::from_modes(expected)));
    }
    outcome(worst < AMP_TOL, format!("10 unitary samples, max dev {worst:.2e} (< {AMP_TOL:e})"))
}

fn ac3_decoder_arms() -> Outcome {
    let dec = build_decoder(&DecoderSpec::new(PAPER)).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let q = random_qubit(500 + seed);
        let input = PhotonState::from_modes(pattern(LINE_CHANNEL, H, 0, c(FRAC_1_SQRT_2, 0.0), &q));
        let arms = dec.run_prefix(&input, DECODER_RECOMBINE_INDEX).unwrap();
        let mut expected = pattern("short", V, 0, c(0.5, 0.0), &q);
        expected.extend(pattern("long", H, 1, c(0.5, 0.0), &q));
        worst = worst.max(arms.max_deviation(&PhotonState::from_modes(expected)));
    }
    outcome(worst < AMP_TOL, format!("20 qubits, max dev {worst:.2e} (< {AMP_TOL:e})"))
}

fn ac4_three_quarters() -> Outcome {
    let start = Instant::now();
    let enc = EncoderSpec::new(1, PAPER);
    let dec = DecoderSpec::new(PAPER);
    let haar = success_probability_sweep(&enc, &dec, NoiseEnsemble::HaarUnitary, 1000, 41).unwrap();
    let general = success_probability_sweep(&enc, &dec, NoiseEnsemble::RowNormalizedGeneral, 1000, 42).unwrap();
    let elapsed = start.elapsed();
    let pass = haar.samples.len() == 1000
        && general.samples.len() == 1000
        && haar.max_deviation < PROB_TOL
        && general.max_deviation < PROB_TOL
        && within_time(elapsed, Duration::from_secs(30));
    outcome(
        pass,
        format!(
            "unitary mean {:.12} max dev {:.2e}; general mean {:.12} max dev {:.2e} (< {PROB_TOL:e}); {elapsed:.2?} (< 30s)",
            haar.mean, haar.max_deviation, general.mean, general.max_deviation
        ),
    )
}

fn ac5_scaling() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for stages in 1..=5u32 {
        let spec = EncoderSpec::new(stages, PAPER);
        let n = spec.bins_per_group() as f64;
        let expected = (n - 1.0) / n;
        let stats =
            success_probability_sweep(&spec, &DecoderSpec::new(PAPER), NoiseEnsemble::RowNormalizedGeneral, 5, 7)
                .unwrap();
        let worst = stats.samples.iter().map(|s| (s.success - expected).abs()).fold(0.0, f64::max);
        pass &= worst < PROB_TOL && spec.wavepackets() == 1 << (stages + 2);
        details.push(format!("n={stages} N={n} P={:.10}", stats.mean));
    }
    outcome(pass, details.join(", "))
}

fn ac6_reconstruction() -> Outcome {
    let pipeline = Pipeline::new(EncoderSpec::new(1, PAPER), DecoderSpec::new(PAPER)).unwrap();
    let table = correction_table_for(&pipeline).unwrap();
    let mut worst: f64 = 0.0;
    let mut bins_checked = 0usize;
    for qi in 0..100u64 {
        let q = random_qubit(10_000 + qi);
        for ni in 0..100u64 {
            let ensemble = if ni % 2 == 0 { NoiseEnsemble::HaarUnitary } else { NoiseEnsemble::RowNormalizedGeneral };
            let p = sample_noise(ensemble, qi * 1000 + ni);
            let reports = analyze(&pipeline.transmit(&q, &p).unwrap(), &table, &q).unwrap();
            for b in reports.iter().flat_map(|r| &r.accepted) {
                if let Some(f) = b.fidelity {
                    worst = worst.max((f - 1.0).abs());
                    bins_checked += 1;
                }
            }
        }
    }
    use Correction::{BitFlip, Identity};
    let stated = [
        (BranchId::P1H, [Identity, BitFlip, Identity]),
        (BranchId::P1V, [BitFlip, Identity, BitFlip]),
        (BranchId::P2H, [Identity, BitFlip, Identity]),
        (BranchId::P2V, [BitFlip, Identity, BitFlip]),
    ];
    let table_ok = stated
        .iter()
        .all(|(b, corr)| (1..=3).all(|k| table.get(*b, k) == Some(corr[k as usize - 1])))
        && table.slot(BranchId::P1H).port.as_str() == "5"
        && table.slot(BranchId::P1V).port.as_str() == "6";
    outcome(
        worst < PROB_TOL && table_ok && bins_checked > 0,
        format!("{bins_checked} bins, max |F-1| {worst:.2e} (< {PROB_TOL:e}); correction table matches stated rule: {table_ok}"),
    )
}

fn ac7_branch_weights() -> Outcome {
    let pipeline = Pipeline::new(EncoderSpec::new(1, PAPER), DecoderSpec::new(PAPER)).unwrap();
    let table = correction_table_for(&pipeline).unwrap();
    let mut worst: f64 = 0.0;
    let mut discard_ok = true;
    for seed in 0..500u64 {
        let q = random_qubit(seed + 77);
        let ensemble = if seed % 2 == 0 { NoiseEnsemble::HaarUnitary } else { NoiseEnsemble::RowNormalizedGeneral };
        let p = sample_noise(ensemble, seed);
        let reports = analyze(&pipeline.transmit(&q, &p).unwrap(), &table, &q).unwrap();
        for r in &reports {
            let total: f64 = r.accepted.iter().map(|b| b.probability).sum::<f64>()
                + r.discarded.iter().map(|b| b.probability).sum::<f64>();
            worst = worst.max((total - r.branch.weight(&p)).abs());
            let slot = table.slot(r.branch);
            discard_ok &= r.discarded.len() == 2
                && r.discarded[0].tick == slot.offset
                && r.discarded[1].tick == slot.offset + table.bins;
        }
    }
    outcome(
        worst < PROB_TOL && discard_ok,
        format!("500 samples, max weight dev {worst:.2e} (< {PROB_TOL:e}); 2 discarded bins (first, last) per branch: {discard_ok}"),
    )
}

fn ac8_norm_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_chain: f64 = 0.0;
    for i in 0..1000 {
        let circuit = common::random_circuit(&mut rng, 1 + i % 12, true);
        let s = common::random_state(&mut rng, &["in"]);
        let out = circuit.run(&s).unwrap();
        worst_chain = worst_chain.max((out.norm_sq() - 1.0).abs());
    }
    let enc = build_encoder(&EncoderSpec::new(1, PAPER)).unwrap();
    let mut worst_noise: f64 = 0.0;
    for seed in 0..1000 {
        let encoded = enc.run(&PhotonState::new(&random_qubit(seed), "in").unwrap()).unwrap();
        let p = sample_noise(NoiseEnsemble::RowNormalizedGeneral, seed);
        let out = apply_collective_noise(&encoded, &p, &[LINE_CHANNEL.into()]);
        worst_noise = worst_noise.max((out.norm_sq() - 1.0).abs());
    }
    outcome(
        worst_chain < AMP_TOL && worst_noise < AMP_TOL,
        format!("1000 random lossless chains max dev {worst_chain:.2e}; 1000 general-noise encodings max dev {worst_noise:.2e} (< {AMP_TOL:e})"),
    )
}

fn ac9_qkd() -> Outcome {
    let start = Instant::now();
    let pulses = 100_000u64;
    let mut cfg = Bb84Config::new(pulses, 1, NoiseEnsemble::HaarUnitary, 1.0, 9);
    cfg.noise_refresh = 1;
    let a = simulate_bb84(&cfg).unwrap();
    let sigma = |p: f64| (p * (1.0 - p) / pulses as f64).sqrt();
    let ok_a = a.errors == 0 && a.qber == 0.0 && (a.detection_rate - 0.75).abs() < 4.0 * sigma(0.75);

    let mut cfg = Bb84Config::new(pulses, 2, NoiseEnsemble::HaarUnitary, 0.6, 10);
    cfg.noise_refresh = 1;
    let b = simulate_bb84(&cfg).unwrap();
    let ok_b = b.errors == 0 && (b.detection_rate - 0.525).abs() < 4.0 * sigma(0.525);
    let elapsed = start.elapsed();
    outcome(
        ok_a && ok_b && within_time(elapsed, Duration::from_secs(60)),
        format!(
            "n=1 eta=1: QBER {} rate {:.5} (0.75 ± {:.5}); n=2 eta=0.6: QBER {} rate {:.5} (0.525 ± {:.5}); {elapsed:.2?} (< 60s)",
            a.qber,
            a.detection_rate,
            4.0 * sigma(0.75),
            b.qber,
            b.detection_rate,
            4.0 * sigma(0.525)
        ),
    )
}

fn ac10_parser() -> Outcome {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/circuits");
    let enc_text = std::fs::read_to_string(format!("{dir}/encoder_n1.circ")).unwrap();
    let dec_text = std::fs::read_to_string(format!("{dir}/decoder.circ")).unwrap();
    let files_ok = parse_circuit(&enc_text).ok() == build_encoder(&EncoderSpec::new(1, PAPER)).ok()
        && parse_circuit(&dec_text).ok() == build_decoder(&DecoderSpec::new(PAPER)).ok();

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut fixed_points = 0;
    for i in 0..50 {
        let text = common::random_circuit(&mut rng, 1 + i % 14, false).to_string();
        let once = parse_circuit(&text).unwrap();
        let printed = once.to_string();
        if parse_circuit(&printed).unwrap() == once && printed == text {
            fixed_points += 1;
        }
    }

    let malformed = [
        "input a\nlaser a -> b\noutput b",
        "input a\npbs a -> b\noutput b",
        "input a\nhwp a b -> c\noutput c",
        "input a\nhwp q -> b\noutput b",
        "input a\nhwp a -> b\nhwp b -> a\noutput a",
        "input a\npbs a -> b c\nhwp b -> c\noutput c",
        "input a\ndelay a -> b ticks=x\noutput b",
        "input a\nsplit a -> b ticks=0\noutput b",
        "input a\nphase a -> b\noutput b",
        "input a\nbs a -> b c conv=odd\noutput b c",
        "input a\nhwp a -> b spin=1\noutput b",
        "input a\noutput a\nhwp a -> b",
        "input a\ninput b\noutput a",
        "input a\nhwp a -> b",
        "",
        "output a",
        "input a\nnoise a -> b params=1,2\noutput b",
        "input a\n-> -> ->\noutput a",
    ];
    let mut diagnosed = 0;
    for text in malformed {
        let res = catch_unwind(AssertUnwindSafe(|| parse_circuit(text)));
        if let Ok(Err(Error::Syntax { line, .. })) = res {
            if line >= 1 {
                diagnosed += 1;
            }
        }
    }
    outcome(
        files_ok && fixed_points == 50 && diagnosed == malformed.len(),
        format!(
            "shipped files match builders: {files_ok}; fixed points {fixed_points}/50; line-numbered diagnostics {diagnosed}/{}",
            malformed.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1 encoder output, 8 wavepackets", ac1_encoder_output),
        ("AC2 collective-noise four-branch state", ac2_noisy_state),
        ("AC3 decoder interferometer arms", ac3_decoder_arms),
        ("AC4 success probability 3/4, noise independent", ac4_three_quarters),
        ("AC5 scaling (N-1)/N for n=1..5", ac5_scaling),
        ("AC6 perfect reconstruction + correction rule", ac6_reconstruction),
        ("AC7 branch weights and discarded bins", ac7_branch_weights),
        ("AC8 norm conservation", ac8_norm_conservation),
        ("AC9 BB84 harness", ac9_qkd),
        ("AC10 circuit parser", ac10_parser),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let result = catch_unwind(check).unwrap_or_else(|_| outcome(false, "panicked"));
        let tag = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failures += 1;
        }
        println!("[{tag}] {name}: {}", result.detail);
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
