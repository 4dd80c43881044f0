//! `selfreject`: command-line front end for the self-error-rejecting
//! transmission simulator.

mod error;
mod golden;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use selfreject_core::noise::{sample_noise, NoiseEnsemble};
use selfreject_core::postselect::{analyze, correction_table_for, total_success};
use selfreject_core::rng::{derive_seed, random_qubit, Stream};
use selfreject_core::{
    build_decoder, build_encoder, parse_circuit, simulate_bb84, success_probability_sweep, Bb84Config,
    BsConvention, Circuit, DecoderSpec, EncoderSpec, Pipeline,
};

use error::CliError;
use output::{num, OutputArgs};

/// Largest cascade depth `scaling` will build.
const MAX_SCALING_STAGES: u32 = 6;

#[derive(Debug, Parser)]
#[command(name = "selfreject", version, about = "Self-error-rejecting qubit transmission simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare encoder, channel and decoder against their closed forms.
    Golden(GoldenArgs),
    /// Success probability and fidelity over random noise samples.
    Sweep(SweepArgs),
    /// Success probability for cascade depths 1..=max.
    Scaling(ScalingArgs),
    /// BB84 Monte Carlo over the collective-noise channel.
    Qkd(QkdArgs),
    /// Print a built circuit or normalize a circuit file.
    Circuit(CircuitArgs),
}

/// Scheme parameters shared by the commands.
#[derive(Debug, Clone, Args)]
struct ExperimentConfig {
    /// Cascade depth n; each group has N = 2^(n+1) bins.
    #[arg(long, default_value_t = 1)]
    stages: u32,
    /// Beam splitter convention: symmetric or paper.
    #[arg(long, default_value = "symmetric")]
    convention: BsConvention,
    /// Group delay in ticks (defaults to the larger of 64 and 2N).
    #[arg(long = "dT")]
    group_delay: Option<i64>,
    /// Decoder V-arm delay in ticks.
    #[arg(long = "dTprime", default_value_t = 0)]
    v_delay: i64,
}

impl ExperimentConfig {
    fn specs(&self) -> Result<(EncoderSpec, DecoderSpec), CliError> {
        let mut enc = EncoderSpec::new(self.stages, self.convention);
        if let Some(dt) = self.group_delay {
            enc = enc.with_group_delay(dt);
        }
        let dec = DecoderSpec::new(self.convention).with_v_delay(self.v_delay);
        enc.validate()?;
        dec.validate_for(&enc)?;
        Ok((enc, dec))
    }
}

#[derive(Debug, Args)]
struct GoldenArgs {
    /// Encoder circuit file to check instead of the built one.
    #[arg(long)]
    encoder: Option<PathBuf>,
    /// Decoder circuit file to check instead of the built one.
    #[arg(long)]
    decoder: Option<PathBuf>,
    #[arg(long, default_value = "paper")]
    convention: BsConvention,
    #[arg(long = "dT")]
    group_delay: Option<i64>,
    /// Selects the test qubit and noise sample.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ExperimentConfig,
    /// identity, haar, general or dephasing=<phi>.
    #[arg(long, default_value = "haar")]
    ensemble: NoiseEnsemble,
    #[arg(long, default_value_t = 100)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[arg(long, alias = "stages", default_value_t = 5)]
    max_stages: u32,
    #[arg(long, default_value = "symmetric")]
    convention: BsConvention,
    #[arg(long, default_value = "haar")]
    ensemble: NoiseEnsemble,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct QkdArgs {
    #[command(flatten)]
    config: ExperimentConfig,
    #[arg(long, default_value = "haar")]
    ensemble: NoiseEnsemble,
    #[arg(long, default_value_t = 10_000)]
    pulses: u64,
    /// Baseline detector efficiency in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Pulses sharing one noise sample.
    #[arg(long, default_value_t = 1)]
    refresh: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CircuitArgs {
    #[command(subcommand)]
    which: CircuitCommand,
    /// Write the circuit text here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CircuitCommand {
    Encoder(ExperimentConfig),
    Decoder(ExperimentConfig),
    /// Parse a circuit file and print it in normal form.
    Check { file: PathBuf },
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    parse_circuit(&text).map_err(|source| CliError::CircuitFile { path: path.into(), source })
}

fn cmd_golden(args: &GoldenArgs) -> Result<(), CliError> {
    let mut spec = EncoderSpec::new(1, args.convention);
    if let Some(dt) = args.group_delay {
        spec = spec.with_group_delay(dt);
    }
    spec.validate()?;
    let encoder = match &args.encoder {
        Some(path) => load_circuit(path)?,
        None => build_encoder(&spec)?,
    };
    let decoder = match &args.decoder {
        Some(path) => load_circuit(path)?,
        None => build_decoder(&DecoderSpec::new(args.convention))?,
    };
    let setup = golden::GoldenSetup {
        encoder,
        decoder,
        convention: args.convention,
        group_delay: spec.group_delay,
        seed: args.seed,
    };
    let results = golden::run(&setup);
    let csv = || {
        let mut s = String::from("check,max_deviation,pass,worst_mode\n");
        for r in &results {
            let worst = r.worst_mode.as_deref().unwrap_or_default();
            s += &format!("{},{},{},{worst}\n", r.check, num(r.max_deviation), r.pass);
        }
        s
    };
    if let Some(path) = &args.output.out {
        output::write_file(path, &args.output.render(csv, &results)?)?;
    }
    for r in &results {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {:<22} max deviation {:.3e}", r.check, r.max_deviation);
    }
    for r in results.iter().filter(|r| !r.pass) {
        match (&r.error, &r.worst_mode) {
            (Some(e), _) => eprintln!("{}: {e}", r.check),
            (None, Some(mode)) => eprintln!("{}: worst mode {mode}", r.check),
            (None, None) => {}
        }
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.pass).map(|r| r.check.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failed))
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let (enc, dec) = args.config.specs()?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let stats = success_probability_sweep(&enc, &dec, args.ensemble, args.samples, args.seed)?;
    let csv = || {
        let mut s = String::from("d1_re,d1_im,g1_re,g1_im,d2_re,d2_im,g2_re,g2_im,success,min_fidelity\n");
        for sample in &stats.samples {
            s += &format!("{},{},{}\n", sample.noise.to_csv(), num(sample.success), num(sample.min_fidelity));
        }
        s += &format!("summary,{},{}\n", num(stats.mean), num(stats.max_deviation));
        s
    };
    if args.output.emit(&args.output.render(csv, &stats)?)? {
        println!(
            "{} samples: mean success {:.12} (expected {:.12}), max deviation {:.3e}",
            stats.samples.len(),
            stats.mean,
            stats.expected,
            stats.max_deviation
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScalingRow {
    n: u32,
    bins: u64,
    wavepackets: u64,
    success: f64,
}

fn cmd_scaling(args: &ScalingArgs) -> Result<(), CliError> {
    if args.max_stages == 0 || args.max_stages > MAX_SCALING_STAGES {
        return Err(CliError::Usage(format!(
            "--max-stages must be in 1..={MAX_SCALING_STAGES}, got {}",
            args.max_stages
        )));
    }
    let mut rows = Vec::new();
    for n in 1..=args.max_stages {
        let enc = EncoderSpec::new(n, args.convention);
        let pipeline = Pipeline::new(enc, DecoderSpec::new(args.convention))?;
        let table = correction_table_for(&pipeline)?;
        let q = random_qubit(derive_seed(args.seed, Stream::Qubit, n as u64));
        let p = sample_noise(args.ensemble, derive_seed(args.seed, Stream::Noise, n as u64));
        let reports = analyze(&pipeline.transmit(&q, &p)?, &table, &q)?;
        rows.push(ScalingRow {
            n,
            bins: enc.bins_per_group(),
            wavepackets: enc.wavepackets(),
            success: total_success(&reports),
        });
    }
    let csv = || {
        let mut s = String::from("n,N,wavepackets,success\n");
        for r in &rows {
            s += &format!("{},{},{},{}\n", r.n, r.bins, r.wavepackets, num(r.success));
        }
        s
    };
    if args.output.emit(&args.output.render(csv, &rows)?)? {
        for r in &rows {
            println!("n={} N={} wavepackets={} success={:.12}", r.n, r.bins, r.wavepackets, r.success);
        }
    }
    Ok(())
}

fn cmd_qkd(args: &QkdArgs) -> Result<(), CliError> {
    let (encoder, decoder) = args.config.specs()?;
    if args.pulses == 0 {
        return Err(CliError::Usage("--pulses must be positive".into()));
    }
    if !(args.eta > 0.0 && args.eta <= 1.0) {
        return Err(CliError::Usage(format!("--eta must lie in (0, 1], got {}", args.eta)));
    }
    if args.refresh == 0 {
        return Err(CliError::Usage("--refresh must be positive".into()));
    }
    let cfg = Bb84Config {
        pulses: args.pulses,
        encoder,
        decoder,
        ensemble: args.ensemble,
        noise_refresh: args.refresh,
        eta: args.eta,
        seed: args.seed,
    };
    let stats = simulate_bb84(&cfg)?;
    let csv = || format!("{}\n{}\n", selfreject_core::Bb84Stats::csv_header(), stats.csv_row());
    if args.output.emit(&args.output.render(csv, &stats)?)? {
        println!("{stats}");
    } else {
        eprintln!("{stats}");
    }
    Ok(())
}

fn cmd_circuit(args: &CircuitArgs) -> Result<(), CliError> {
    let circuit = match &args.which {
        CircuitCommand::Encoder(config) => build_encoder(&config.specs()?.0)?,
        CircuitCommand::Decoder(config) => build_decoder(&config.specs()?.1)?,
        CircuitCommand::Check { file } => load_circuit(file)?,
    };
    let text = circuit.to_string();
    match &args.out {
        Some(path) => output::write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Golden(a) => cmd_golden(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::Qkd(a) => cmd_qkd(a),
        Command::Circuit(a) => cmd_circuit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
