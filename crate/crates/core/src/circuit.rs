//! Ordered element chains on named channels, and their text format.
//!
//! ```text
//! # comment
//! input in
//! pbs in -> s l
//! phase l -> l phi=4.71238898038469
//! bs s l -> 1 2 conv=paper
//! output 1 2
//! ```
//!
//! Elements: `pbs`, `bs` (1 or 2 inputs, 2 outputs; a missing second input is
//! vacuum), and the single-port `hwp`, `phase`, `delay`, `split`, `noise`.
//! Keys: `phi=<radians>`, `ticks=<int>`, `conv=symmetric|paper`, and
//! `params=<8 comma-separated floats>` for noise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::elements::{BsConvention, Element, ElementKind};
use crate::error::{Error, Result};
use crate::noise::NoiseParams;
use crate::state::{Channel, PhotonState};

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    input: Channel,
    elements: Vec<Element>,
    outputs: Vec<Channel>,
}

/// Tracks which channels exist while a chain is assembled.
#[derive(Debug, Clone)]
struct Wiring {
    live: BTreeSet<Channel>,
    consumed: BTreeMap<Channel, usize>,
}

impl Wiring {
    fn new(input: &Channel) -> Self {
        Wiring {
            live: BTreeSet::from([input.clone()]),
            consumed: BTreeMap::new(),
        }
    }

    fn push(&mut self, index: usize, e: &Element) -> Result<()> {
        e.check_arity()?;
        let kw = e.kind.keyword();
        for (i, c) in e.inputs.iter().enumerate() {
            if e.inputs[..i].contains(c) {
                return Err(Error::Wiring(format!("`{kw}` lists input channel `{c}` twice")));
            }
            if !self.live.contains(c) {
                return Err(match self.consumed.get(c) {
                    Some(at) => Error::Wiring(format!(
                        "cyclic wiring: channel `{c}` is read again after element {} consumed it",
                        at + 1
                    )),
                    None => Error::Wiring(format!("undeclared channel `{c}`")),
                });
            }
        }
        for (i, c) in e.outputs.iter().enumerate() {
            if e.outputs[..i].contains(c) {
                return Err(Error::Wiring(format!("`{kw}` lists output channel `{c}` twice")));
            }
            if e.inputs.contains(c) {
                continue;
            }
            if self.live.contains(c) {
                return Err(Error::Wiring(format!("channel `{c}` is written by two elements")));
            }
            if let Some(at) = self.consumed.get(c) {
                return Err(Error::Wiring(format!(
                    "cyclic wiring: channel `{c}` feeds back into element {}",
                    at + 1
                )));
            }
        }
        for c in &e.inputs {
            if !e.outputs.contains(c) {
                self.live.remove(c);
                self.consumed.insert(c.clone(), index);
            }
        }
        self.live.extend(e.outputs.iter().cloned());
        Ok(())
    }

    fn check_outputs(&self, outputs: &[Channel]) -> Result<()> {
        if outputs.is_empty() {
            return Err(Error::Wiring("circuit declares no output channel".into()));
        }
        for (i, c) in outputs.iter().enumerate() {
            if outputs[..i].contains(c) {
                return Err(Error::Wiring(format!("output channel `{c}` listed twice")));
            }
            if !self.live.contains(c) {
                return Err(Error::Wiring(format!("undeclared channel `{c}` in output list")));
            }
        }
        Ok(())
    }
}

impl Circuit {
    /// Validates the wiring and builds the circuit.
    pub fn new(input: impl Into<Channel>, elements: Vec<Element>, outputs: Vec<Channel>) -> Result<Self> {
        let input = input.into();
        let mut wiring = Wiring::new(&input);
        for (i, e) in elements.iter().enumerate() {
            wiring
                .push(i, e)
                .map_err(|err| Error::Wiring(format!("element {} (`{}`): {}", i + 1, e.kind.keyword(), strip(err))))?;
        }
        wiring.check_outputs(&outputs)?;
        Ok(Circuit { input, elements, outputs })
    }

    pub fn input(&self) -> &Channel {
        &self.input
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn outputs(&self) -> &[Channel] {
        &self.outputs
    }

    pub fn run(&self, s: &PhotonState) -> Result<PhotonState> {
        self.run_prefix(s, self.elements.len())
    }

    /// Applies only the first `count` elements.
    pub fn run_prefix(&self, s: &PhotonState, count: usize) -> Result<PhotonState> {
        if let Some((m, _)) = s.iter().find(|(m, _)| m.channel != self.input) {
            return Err(Error::Wiring(format!(
                "input state has amplitude on channel `{}` but the circuit input is `{}`",
                m.channel, self.input
            )));
        }
        self.elements
            .iter()
            .take(count)
            .try_fold(s.clone(), |acc, e| e.apply(&acc))
    }

    /// Parses the line-oriented text format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Circuit> {
        parse_circuit(text)
    }
}

fn strip(err: Error) -> String {
    match err {
        Error::Wiring(m) => m,
        other => other.to_string(),
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "input {}", self.input)?;
        for e in &self.elements {
            write!(f, "{}", e.kind.keyword())?;
            for c in &e.inputs {
                write!(f, " {c}")?;
            }
            write!(f, " ->")?;
            for c in &e.outputs {
                write!(f, " {c}")?;
            }
            match &e.kind {
                ElementKind::BeamSplitter(conv) => write!(f, " conv={conv}")?,
                ElementKind::PhaseShifter(phi) => write!(f, " phi={phi}")?,
                ElementKind::Delay(t) | ElementKind::TimeBinSplitter(t) => write!(f, " ticks={t}")?,
                ElementKind::CollectiveNoise(p) => {
                    let parts: Vec<String> = p.components().iter().map(|x| x.to_string()).collect();
                    write!(f, " params={}", parts.join(","))?;
                }
                ElementKind::PolarizingBeamSplitter | ElementKind::HalfWavePlate => {}
            }
            writeln!(f)?;
        }
        write!(f, "output")?;
        for c in &self.outputs {
            write!(f, " {c}")?;
        }
        writeln!(f)
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, message: message.into() }
}

fn parse_element(line_no: usize, keyword: &str, rest: &[&str]) -> Result<Element> {
    let arrow = rest
        .iter()
        .position(|t| *t == "->")
        .ok_or_else(|| syntax(line_no, format!("`{keyword}` is missing `->`")))?;
    let inputs: Vec<Channel> = rest[..arrow].iter().map(|t| Channel::from(*t)).collect();
    let mut outputs = Vec::new();
    let mut keys: BTreeMap<&str, &str> = BTreeMap::new();
    for tok in &rest[arrow + 1..] {
        if *tok == "->" {
            return Err(syntax(line_no, "more than one `->`"));
        }
        match tok.split_once('=') {
            Some((k, v)) => {
                if keys.insert(k, v).is_some() {
                    return Err(syntax(line_no, format!("key `{k}` given twice")));
                }
            }
            None if keys.is_empty() => outputs.push(Channel::from(*tok)),
            None => return Err(syntax(line_no, format!("channel `{tok}` after key=value options"))),
        }
    }
    for c in inputs.iter().chain(&outputs) {
        if c.as_str().contains('=') || c.as_str().is_empty() {
            return Err(syntax(line_no, format!("invalid channel label `{c}`")));
        }
    }

    let mut take = |k: &str| keys.remove(k);
    let ticks = |v: Option<&str>, min: i64| -> Result<i64> {
        let v = v.ok_or_else(|| syntax(line_no, format!("`{keyword}` requires ticks=<int>")))?;
        let t: i64 = v
            .parse()
            .map_err(|_| syntax(line_no, format!("ticks must be an integer, got `{v}`")))?;
        if t < min {
            return Err(syntax(line_no, format!("ticks must be >= {min}, got {t}")));
        }
        Ok(t)
    };
    let kind = match keyword {
        "pbs" => ElementKind::PolarizingBeamSplitter,
        "hwp" => ElementKind::HalfWavePlate,
        "bs" => {
            let conv = match take("conv") {
                Some(v) => v.parse::<BsConvention>().map_err(|e| syntax(line_no, strip(e)))?,
                None => BsConvention::Symmetric,
            };
            ElementKind::BeamSplitter(conv)
        }
        "phase" => {
            let v = take("phi").ok_or_else(|| syntax(line_no, "`phase` requires phi=<radians>"))?;
            let phi: f64 = v
                .parse()
                .map_err(|_| syntax(line_no, format!("phi must be a number, got `{v}`")))?;
            if !phi.is_finite() {
                return Err(syntax(line_no, "phi must be finite"));
            }
            ElementKind::PhaseShifter(phi)
        }
        "delay" => ElementKind::Delay(ticks(take("ticks"), 0)?),
        "split" => ElementKind::TimeBinSplitter(ticks(take("ticks"), 1)?),
        "noise" => {
            let p = match take("params") {
                Some(v) => NoiseParams::from_csv(v).map_err(|e| syntax(line_no, strip(e)))?,
                None => NoiseParams::identity(),
            };
            ElementKind::CollectiveNoise(p)
        }
        other => {
            return Err(syntax(
                line_no,
                format!("unknown element kind `{other}` (expected pbs|bs|hwp|phase|delay|split|noise)"),
            ))
        }
    };
    if let Some(k) = keys.keys().next() {
        return Err(syntax(line_no, format!("unknown key `{k}` for `{keyword}`")));
    }
    let e = Element { kind, inputs, outputs };
    e.check_arity().map_err(|err| syntax(line_no, strip(err)))?;
    Ok(e)
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut input: Option<(usize, Channel)> = None;
    let mut output: Option<(usize, Vec<Channel>)> = None;
    let mut wiring: Option<Wiring> = None;
    let mut elements = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, rest)) = tokens.split_first() else {
            continue;
        };
        if let Some((out_line, _)) = &output {
            return Err(syntax(
                line_no,
                format!("content after the `output` line (line {out_line}); `output` must be last"),
            ));
        }
        match keyword {
            "input" => {
                if let Some((first, _)) = &input {
                    return Err(syntax(line_no, format!("second `input` line (first on line {first})")));
                }
                if rest.len() != 1 {
                    return Err(syntax(line_no, format!("`input` takes exactly one channel, got {}", rest.len())));
                }
                let c = Channel::from(rest[0]);
                wiring = Some(Wiring::new(&c));
                input = Some((line_no, c));
            }
            "output" => {
                let w = wiring
                    .as_ref()
                    .ok_or_else(|| syntax(line_no, "`output` before `input`"))?;
                let outs: Vec<Channel> = rest.iter().map(|t| Channel::from(*t)).collect();
                w.check_outputs(&outs).map_err(|e| syntax(line_no, strip(e)))?;
                output = Some((line_no, outs));
            }
            _ => {
                let e = parse_element(line_no, keyword, rest)?;
                let w = wiring
                    .as_mut()
                    .ok_or_else(|| syntax(line_no, "element before the `input` line"))?;
                w.push(elements.len(), &e).map_err(|err| syntax(line_no, strip(err)))?;
                elements.push(e);
            }
        }
    }

    let (_, input) = input.ok_or_else(|| syntax(last_line.max(1), "missing `input` line"))?;
    let (_, outputs) = output.ok_or_else(|| syntax(last_line.max(1), "missing `output` line"))?;
    Ok(Circuit { input, elements, outputs })
}
