//! Seed derivation for reproducible, order-independent sweeps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::state::QubitSpec;

/// Independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Noise,
    Qubit,
    Pulse,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Noise => 0x6e6f697365,
            Stream::Qubit => 0x7175626974,
            Stream::Pulse => 0x70756c7365,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes (master, stream, index) into a 64-bit seed.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream.tag()) ^ index)
}

/// Uniform (Haar) random unit vector in C^2.
pub fn random_unit_c2<R: Rng>(rng: &mut R) -> (Complex64, Complex64) {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return (Complex64::new(v[0] / n, v[1] / n), Complex64::new(v[2] / n, v[3] / n));
        }
    }
}

pub fn random_qubit(seed: u64) -> QubitSpec {
    let (alpha, beta) = random_unit_c2(&mut ChaCha8Rng::seed_from_u64(seed));
    QubitSpec { alpha, beta }
}
