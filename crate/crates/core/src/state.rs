//! Sparse single-photon wavefunction over (channel, polarization, time tick).
//!
//! One tick is half of the base bin spacing, so a delay of one tick is the
//! short unbalanced interferometer interval and two ticks make one full bin.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes with magnitude below this are dropped from the map.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Comparison tolerance used throughout the crate.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn flipped(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            other => Err(Error::Parse(format!("unknown polarization `{other}`"))),
        }
    }
}

/// Integer time coordinate; one tick is half a bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeTick(pub i64);

impl TimeTick {
    pub const ZERO: TimeTick = TimeTick(0);

    pub fn shifted(self, ticks: i64) -> Self {
        TimeTick(self.0 + ticks)
    }
}

impl fmt::Display for TimeTick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque channel label. The labels "1", "2", "5" and "6" name the
/// encoder beam-splitter outputs and the decoder output ports.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel(String);

impl Channel {
    pub fn new(label: impl Into<String>) -> Self {
        Channel(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Channel {
    fn from(s: &str) -> Self {
        Channel(s.to_owned())
    }
}

impl From<String> for Channel {
    fn from(s: String) -> Self {
        Channel(s)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Basis mode. Ordering is channel, then tick, then polarization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub channel: Channel,
    pub t: TimeTick,
    pub pol: Polarization,
}

impl Mode {
    pub fn new(channel: impl Into<Channel>, pol: Polarization, t: i64) -> Self {
        Mode {
            channel: channel.into(),
            t: TimeTick(t),
            pol,
        }
    }
}

/// Normalized polarization qubit `alpha |H> + beta |V>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl QubitSpec {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > TOLERANCE || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(QubitSpec { alpha, beta })
    }

    /// Builds a qubit from any non-zero pair by rescaling it.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(QubitSpec {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn h() -> Self {
        QubitSpec {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn v() -> Self {
        QubitSpec {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    /// (|H> + |V>)/sqrt(2)
    pub fn diagonal() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitSpec { alpha: a, beta: a }
    }

    /// (|H> - |V>)/sqrt(2)
    pub fn anti_diagonal() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitSpec { alpha: a, beta: -a }
    }
}

/// Sparse map from modes to complex amplitudes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhotonState {
    amplitudes: BTreeMap<Mode, Complex64>,
}

impl PhotonState {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Places the qubit on `channel` at tick zero.
    pub fn new(q: &QubitSpec, channel: impl Into<Channel>) -> Result<Self> {
        let q = QubitSpec::new(q.alpha, q.beta)?;
        let channel = channel.into();
        let mut s = Self::empty();
        s.add(Mode { channel: channel.clone(), t: TimeTick::ZERO, pol: Polarization::H }, q.alpha);
        s.add(Mode { channel, t: TimeTick::ZERO, pol: Polarization::V }, q.beta);
        Ok(s)
    }

    pub fn from_modes<I>(modes: I) -> Self
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        let mut s = Self::empty();
        for (m, a) in modes {
            s.add(m, a);
        }
        s
    }

    /// Accumulates `amp` onto `mode`, pruning the entry if it cancels out.
    pub fn add(&mut self, mode: Mode, amp: Complex64) {
        use std::collections::btree_map::Entry;
        match self.amplitudes.entry(mode) {
            Entry::Occupied(mut e) => {
                let v = *e.get() + amp;
                if v.norm() < PRUNE_THRESHOLD {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                if amp.norm() >= PRUNE_THRESHOLD {
                    e.insert(amp);
                }
            }
        }
    }

    pub fn amplitude(&self, mode: &Mode) -> Complex64 {
        self.amplitudes.get(mode).copied().unwrap_or_default()
    }

    pub fn get(&self, channel: &str, pol: Polarization, t: i64) -> Complex64 {
        self.amplitude(&Mode::new(channel, pol, t))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Sub-state on one channel within an inclusive tick window.
    pub fn restrict(&self, channel: &Channel, window: RangeInclusive<i64>) -> PhotonState {
        let amplitudes = self
            .amplitudes
            .iter()
            .filter(|(m, _)| &m.channel == channel && window.contains(&m.t.0))
            .map(|(m, a)| (m.clone(), *a))
            .collect();
        PhotonState { amplitudes }
    }

    pub fn channels(&self) -> Vec<Channel> {
        let mut out: Vec<Channel> = self.amplitudes.keys().map(|m| m.channel.clone()).collect();
        out.dedup();
        out
    }

    /// Smallest and largest tick on `channel`, if any amplitude lives there.
    pub fn tick_span(&self, channel: &Channel) -> Option<(i64, i64)> {
        let mut ticks = self
            .amplitudes
            .keys()
            .filter(|m| &m.channel == channel)
            .map(|m| m.t.0);
        let first = ticks.next()?;
        Some(ticks.fold((first, first), |(lo, hi), t| (lo.min(t), hi.max(t))))
    }

    pub fn scaled(&self, c: Complex64) -> PhotonState {
        PhotonState::from_modes(self.amplitudes.iter().map(|(m, a)| (m.clone(), a * c)))
    }

    pub fn added(&self, other: &PhotonState) -> PhotonState {
        let mut out = self.clone();
        for (m, a) in other.iter() {
            out.add(m.clone(), *a);
        }
        out
    }

    /// Largest |a - b| over the union of both supports.
    pub fn max_deviation(&self, other: &PhotonState) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, a) in self.iter() {
            worst = worst.max((a - other.amplitude(m)).norm());
        }
        for (m, b) in other.iter() {
            if !self.amplitudes.contains_key(m) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }

    /// The (H, V) amplitudes at one channel and tick.
    pub fn qubit_at(&self, channel: &Channel, t: i64) -> [Complex64; 2] {
        [
            self.amplitude(&Mode { channel: channel.clone(), t: TimeTick(t), pol: Polarization::H }),
            self.amplitude(&Mode { channel: channel.clone(), t: TimeTick(t), pol: Polarization::V }),
        ]
    }

    /// Rebuilds the state by mapping every entry through `f`, which may emit
    /// several output entries per input.
    pub(crate) fn remap<F>(&self, mut f: F) -> PhotonState
    where
        F: FnMut(&Mode, Complex64, &mut dyn FnMut(Mode, Complex64)),
    {
        let mut out = PhotonState::empty();
        for (m, a) in self.iter() {
            f(m, *a, &mut |mode, amp| out.add(mode, amp));
        }
        out
    }

    /// One line per mode: `channel,pol,tick,re,im`, in mode order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (m, a) in self.iter() {
            out.push_str(&format!("{},{},{},{:.16e},{:.16e}\n", m.channel, m.pol, m.t, a.re, a.im));
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<PhotonState> {
        let mut s = PhotonState::empty();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", idx + 1));
            if fields.len() != 5 {
                return Err(bad("expected 5 fields"));
            }
            let pol: Polarization = fields[1].parse().map_err(|_| bad("bad polarization"))?;
            let t: i64 = fields[2].parse().map_err(|_| bad("bad tick"))?;
            let re: f64 = fields[3].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = fields[4].parse().map_err(|_| bad("bad imaginary part"))?;
            s.add(Mode::new(fields[0], pol, t), Complex64::new(re, im));
        }
        Ok(s)
    }
}

/// |<q|s>|^2 with `s` renormalized. `s` must live on a single (channel, tick).
pub fn fidelity_with_qubit(s: &PhotonState, q: &QubitSpec) -> Result<f64> {
    let mut location: Option<(&Channel, TimeTick)> = None;
    let mut h = Complex64::default();
    let mut v = Complex64::default();
    for (m, a) in s.iter() {
        match location {
            None => location = Some((&m.channel, m.t)),
            Some((c, t)) if c == &m.channel && t == m.t => {}
            Some(_) => return Err(Error::NotSingleSlot),
        }
        match m.pol {
            Polarization::H => h = *a,
            Polarization::V => v = *a,
        }
    }
    qubit_fidelity([h, v], q)
}

/// Fidelity between an unnormalized (H, V) pair and a qubit.
pub fn qubit_fidelity(amps: [Complex64; 2], q: &QubitSpec) -> Result<f64> {
    let norm = amps[0].norm_sqr() + amps[1].norm_sqr();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let overlap = q.alpha.conj() * amps[0] + q.beta.conj() * amps[1];
    let qn = q.alpha.norm_sqr() + q.beta.norm_sqr();
    Ok((overlap.norm_sqr() / (norm * qn)).clamp(0.0, 1.0))
}
