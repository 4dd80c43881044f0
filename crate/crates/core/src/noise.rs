//! Collective polarization noise.
//!
//! One transformation `H -> d1 H + g1 V`, `V -> d2 H + g2 V` is applied to
//! every wavepacket of a transmission. Only the two row norms are
//! constrained; unitarity is an extra property of some samples.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::random_unit_c2;
use crate::state::{Channel, Mode, PhotonState, Polarization, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub d1: Complex64,
    pub g1: Complex64,
    pub d2: Complex64,
    pub g2: Complex64,
}

impl NoiseParams {
    pub fn new(d1: Complex64, g1: Complex64, d2: Complex64, g2: Complex64) -> Result<Self> {
        let p = NoiseParams { d1, g1, d2, g2 };
        let (r1, r2) = p.row_norms();
        if (r1 - 1.0).abs() > TOLERANCE || (r2 - 1.0).abs() > TOLERANCE {
            return Err(Error::BadNoise(format!("row norms {r1} and {r2}")));
        }
        Ok(p)
    }

    pub fn identity() -> Self {
        NoiseParams {
            d1: Complex64::new(1.0, 0.0),
            g1: Complex64::default(),
            d2: Complex64::default(),
            g2: Complex64::new(1.0, 0.0),
        }
    }

    /// Full bit flip, H <-> V.
    pub fn swap() -> Self {
        NoiseParams {
            d1: Complex64::default(),
            g1: Complex64::new(1.0, 0.0),
            d2: Complex64::new(1.0, 0.0),
            g2: Complex64::default(),
        }
    }

    pub fn row_norms(&self) -> (f64, f64) {
        (
            self.d1.norm_sqr() + self.g1.norm_sqr(),
            self.d2.norm_sqr() + self.g2.norm_sqr(),
        )
    }

    /// Overlap of the images of H and V; zero for a unitary.
    pub fn cross_overlap(&self) -> Complex64 {
        self.d1.conj() * self.d2 + self.g1.conj() * self.g2
    }

    pub fn is_unitary(&self) -> bool {
        let (r1, r2) = self.row_norms();
        (r1 - 1.0).abs() < TOLERANCE && (r2 - 1.0).abs() < TOLERANCE && self.cross_overlap().norm() < TOLERANCE
    }

    pub fn determinant(&self) -> Complex64 {
        self.d1 * self.g2 - self.d2 * self.g1
    }

    /// The eight real components in `d1, g1, d2, g2` order.
    pub fn components(&self) -> [f64; 8] {
        [
            self.d1.re, self.d1.im, self.g1.re, self.g1.im, self.d2.re, self.d2.im, self.g2.re, self.g2.im,
        ]
    }

    pub fn from_components(v: [f64; 8]) -> Result<Self> {
        NoiseParams::new(
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
            Complex64::new(v[6], v[7]),
        )
    }

    pub fn to_csv(&self) -> String {
        self.components().iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let fields: Vec<f64> = text
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("noise parameters: {e}")))?;
        let arr: [f64; 8] = fields
            .try_into()
            .map_err(|v: Vec<f64>| Error::Parse(format!("noise parameters: expected 8 values, got {}", v.len())))?;
        NoiseParams::from_components(arr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseEnsemble {
    Identity,
    HaarUnitary,
    RowNormalizedGeneral,
    /// `H -> H`, `V -> e^{i phi} V`.
    Dephasing(f64),
}

impl fmt::Display for NoiseEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseEnsemble::Identity => f.write_str("identity"),
            NoiseEnsemble::HaarUnitary => f.write_str("haar"),
            NoiseEnsemble::RowNormalizedGeneral => f.write_str("general"),
            NoiseEnsemble::Dephasing(phi) => write!(f, "dephasing={phi}"),
        }
    }
}

impl FromStr for NoiseEnsemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(NoiseEnsemble::Identity),
            "haar" | "unitary" => Ok(NoiseEnsemble::HaarUnitary),
            "general" | "row-normalized" => Ok(NoiseEnsemble::RowNormalizedGeneral),
            _ => {
                if let Some(phi) = s.strip_prefix("dephasing=") {
                    let phi: f64 = phi
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad dephasing angle `{phi}`")))?;
                    Ok(NoiseEnsemble::Dephasing(phi))
                } else {
                    Err(Error::Parse(format!(
                        "unknown ensemble `{s}` (expected identity|haar|general|dephasing=<phi>)"
                    )))
                }
            }
        }
    }
}

/// Deterministic draw from `ensemble`. The seed feeds a ChaCha8 generator.
pub fn sample_noise(ensemble: NoiseEnsemble, seed: u64) -> NoiseParams {
    match ensemble {
        NoiseEnsemble::Identity => NoiseParams::identity(),
        NoiseEnsemble::Dephasing(phi) => NoiseParams {
            g2: Complex64::from_polar(1.0, phi),
            ..NoiseParams::identity()
        },
        NoiseEnsemble::HaarUnitary => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = random_unit_c2(&mut rng);
            let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            // columns (a, b) and (-b*, a*) of an SU(2) element, times a global phase
            NoiseParams {
                d1: phase * a,
                g1: phase * b,
                d2: -phase * b.conj(),
                g2: phase * a.conj(),
            }
        }
        NoiseEnsemble::RowNormalizedGeneral => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (d1, g1) = random_unit_c2(&mut rng);
            let (d2, g2) = random_unit_c2(&mut rng);
            NoiseParams { d1, g1, d2, g2 }
        }
    }
}

/// Applies the same polarization map at every mode on the listed channels.
pub fn apply_collective_noise(s: &PhotonState, p: &NoiseParams, channels: &[Channel]) -> PhotonState {
    s.remap(|m, a, emit| {
        if !channels.contains(&m.channel) {
            emit(m.clone(), a);
            return;
        }
        let (to_h, to_v) = match m.pol {
            Polarization::H => (p.d1, p.g1),
            Polarization::V => (p.d2, p.g2),
        };
        emit(Mode { pol: Polarization::H, ..m.clone() }, a * to_h);
        emit(Mode { pol: Polarization::V, ..m.clone() }, a * to_v);
    })
}
