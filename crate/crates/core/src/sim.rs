//! Dense complex statevector simulator for the gate set the search
//! circuits need (`H`, `X`, `Z`, `CZ`, and multi-controlled `X`/`Z` with
//! per-control polarity), plus shot sampling with an optional
//! readout-noise model.
//!
//! Qubit 0 is the most significant bit of an amplitude index and the
//! leftmost character of a measured bitstring, matching the assignment
//! convention used by the CNF layer.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard ceiling on register width (2^28 amplitudes ≈ 4 GiB).
pub const MAX_QUBITS: usize = 28;

/// States smaller than this are processed serially; rayon overhead
/// dominates below it.
const PARALLEL_THRESHOLD: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("{n} qubits outside the supported range 1..={max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: usize, num_qubits: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("qubit subset is empty")]
    EmptySubset,
    #[error("duplicate qubit {0} in subset")]
    DuplicateQubit(usize),
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("readout flip probability {0} outside [0, 0.5)")]
    InvalidFlipProbability(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    OnOne,
    OnZero,
}

/// A control qubit together with the value that activates it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn on_one(qubit: usize) -> Self {
        Control { qubit, polarity: Polarity::OnOne }
    }

    pub fn on_zero(qubit: usize) -> Self {
        Control { qubit, polarity: Polarity::OnZero }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Z,
    Cz,
    Mcx,
    Mcz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub controls: Vec<Control>,
    pub target: usize,
}

impl Gate {
    pub fn h(target: usize) -> Self {
        Gate { kind: GateKind::H, controls: vec![], target }
    }

    pub fn x(target: usize) -> Self {
        Gate { kind: GateKind::X, controls: vec![], target }
    }

    pub fn z(target: usize) -> Self {
        Gate { kind: GateKind::Z, controls: vec![], target }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cz,
            controls: vec![Control::on_one(control)],
            target,
        }
    }

    pub fn mcx(controls: Vec<Control>, target: usize) -> Self {
        Gate { kind: GateKind::Mcx, controls, target }
    }

    pub fn mcz(controls: Vec<Control>, target: usize) -> Self {
        Gate { kind: GateKind::Mcz, controls, target }
    }

    /// Qubits the gate touches (controls plus target).
    pub fn touched(&self) -> Vec<usize> {
        let mut qs: Vec<usize> = self.controls.iter().map(|c| c.qubit).collect();
        qs.push(self.target);
        qs
    }

    pub fn validate(&self, num_qubits: usize) -> Result<(), SimError> {
        if self.target >= num_qubits {
            return Err(SimError::IndexOutOfRange { index: self.target, num_qubits });
        }
        for c in &self.controls {
            if c.qubit >= num_qubits {
                return Err(SimError::IndexOutOfRange { index: c.qubit, num_qubits });
            }
            if c.qubit == self.target {
                return Err(SimError::InvalidGate(format!(
                    "target {} also appears as a control",
                    self.target
                )));
            }
        }
        let mut qubits: Vec<usize> = self.controls.iter().map(|c| c.qubit).collect();
        qubits.sort_unstable();
        if qubits.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::InvalidGate("duplicate control qubit".into()));
        }
        match self.kind {
            GateKind::H | GateKind::X | GateKind::Z => {
                if !self.controls.is_empty() {
                    return Err(SimError::InvalidGate(format!(
                        "{:?} takes no controls",
                        self.kind
                    )));
                }
            }
            GateKind::Cz => {
                if self.controls.len() != 1 {
                    return Err(SimError::InvalidGate("CZ takes exactly one control".into()));
                }
            }
            GateKind::Mcx | GateKind::Mcz => {
                if self.controls.is_empty() {
                    return Err(SimError::InvalidGate(format!(
                        "{:?} needs at least one control",
                        self.kind
                    )));
                }
            }
        }
        Ok(())
    }
}

/// An ordered gate list over a fixed-width register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self, SimError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n: num_qubits, max: MAX_QUBITS });
        }
        Ok(Circuit { num_qubits, gates: Vec::new() })
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), SimError> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<(), SimError> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Traces a computational basis state through the circuit, returning
    /// the output basis index and accumulated phase (±1). Only valid for
    /// circuits made of signed-permutation gates; returns `None` if the
    /// circuit contains an `H`.
    pub fn apply_to_basis(&self, index: usize) -> Option<(usize, f64)> {
        let mut idx = index;
        let mut phase = 1.0f64;
        for gate in &self.gates {
            let matches = gate.controls.iter().all(|c| {
                let bit = (idx >> (self.num_qubits - 1 - c.qubit)) & 1;
                match c.polarity {
                    Polarity::OnOne => bit == 1,
                    Polarity::OnZero => bit == 0,
                }
            });
            let target_bit = 1usize << (self.num_qubits - 1 - gate.target);
            match gate.kind {
                GateKind::H => return None,
                GateKind::X | GateKind::Mcx => {
                    if matches {
                        idx ^= target_bit;
                    }
                }
                GateKind::Z | GateKind::Cz | GateKind::Mcz => {
                    if matches && idx & target_bit != 0 {
                        phase = -phase;
                    }
                }
            }
        }
        Some((idx, phase))
    }

    /// Greedy-layered depth: gates are packed left to right into layers
    /// in which no two gates share a qubit; a multi-controlled gate
    /// counts as one gate regardless of its control count.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for gate in &self.gates {
            let touched = gate.touched();
            let layer = touched.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &touched {
                level[q] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }
}

/// Readout-only noise: each reported bit flips independently after
/// sampling. Gate noise is out of scope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    readout_flip_prob: f64,
}

impl NoiseModel {
    pub fn new(readout_flip_prob: f64) -> Result<Self, SimError> {
        if !(0.0..0.5).contains(&readout_flip_prob) {
            return Err(SimError::InvalidFlipProbability(readout_flip_prob));
        }
        Ok(NoiseModel { readout_flip_prob })
    }

    pub fn readout_flip_prob(&self) -> f64 {
        self.readout_flip_prob
    }
}

/// `2^q` complex amplitudes for a `q`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// All-|0⟩ register.
    pub fn zero(num_qubits: usize) -> Result<Self, SimError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n: num_qubits, max: MAX_QUBITS });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        let mut sv = StateVector::zero(num_qubits)?;
        if index >= sv.amps.len() {
            return Err(SimError::IndexOutOfRange { index, num_qubits });
        }
        sv.amps[0] = Complex64::new(0.0, 0.0);
        sv.amps[index] = Complex64::new(1.0, 0.0);
        Ok(sv)
    }

    /// Uniform superposition `H^{⊗n}|0^n⟩`: every amplitude `1/√(2^n)`.
    pub fn uniform(num_qubits: usize) -> Result<Self, SimError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n: num_qubits, max: MAX_QUBITS });
        }
        let len = 1usize << num_qubits;
        let amp = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok(StateVector { num_qubits, amps: vec![amp; len] })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Index-space bit position of a qubit (qubit 0 is the MSB).
    #[inline]
    fn bit_pos(&self, qubit: usize) -> usize {
        self.num_qubits - 1 - qubit
    }

    fn control_masks(&self, controls: &[Control]) -> (usize, usize) {
        let mut ones = 0usize;
        let mut zeros = 0usize;
        for c in controls {
            let bit = 1usize << self.bit_pos(c.qubit);
            match c.polarity {
                Polarity::OnOne => ones |= bit,
                Polarity::OnZero => zeros |= bit,
            }
        }
        (ones, zeros)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(self.num_qubits)?;
        let (ones, zeros) = self.control_masks(&gate.controls);
        let pos = self.bit_pos(gate.target);
        match gate.kind {
            GateKind::H => self.pairwise(pos, 0, 0, |a0, a1| {
                let s = (*a0 + *a1) * FRAC_1_SQRT_2;
                let d = (*a0 - *a1) * FRAC_1_SQRT_2;
                *a0 = s;
                *a1 = d;
            }),
            GateKind::X | GateKind::Mcx => self.pairwise(pos, ones, zeros, |a0, a1| {
                std::mem::swap(a0, a1);
            }),
            GateKind::Z | GateKind::Cz | GateKind::Mcz => {
                let target_bit = 1usize << pos;
                self.phase_flip_where(move |idx| {
                    idx & target_bit != 0 && idx & ones == ones && idx & zeros == 0
                });
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<(), SimError> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(SimError::TooManyQubits {
                n: circuit.num_qubits(),
                max: self.num_qubits,
            });
        }
        for gate in circuit.gates() {
            self.apply(gate)?;
        }
        Ok(())
    }

    /// Runs `op` on every amplitude pair split by the target bit at
    /// index-space position `pos`, restricted to pairs whose control bits
    /// match. Pairs are disjoint, so the loop is data-parallel.
    fn pairwise<F>(&mut self, pos: usize, ones: usize, zeros: usize, op: F)
    where
        F: Fn(&mut Complex64, &mut Complex64) + Sync,
    {
        let stride = 1usize << pos;
        let block = stride << 1;
        let body = |(b, chunk): (usize, &mut [Complex64])| {
            let base = b * block;
            let (lo, hi) = chunk.split_at_mut(stride);
            for (j, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let idx = base + j;
                if idx & ones == ones && idx & zeros == 0 {
                    op(a0, a1);
                }
            }
        };
        if self.amps.len() >= PARALLEL_THRESHOLD {
            self.amps.par_chunks_mut(block).enumerate().for_each(body);
        } else {
            self.amps.chunks_mut(block).enumerate().for_each(body);
        }
    }

    /// Negates every amplitude whose index satisfies the predicate.
    pub(crate) fn phase_flip_where<F>(&mut self, pred: F)
    where
        F: Fn(usize) -> bool + Sync,
    {
        let body = |(idx, amp): (usize, &mut Complex64)| {
            if pred(idx) {
                *amp = -*amp;
            }
        };
        if self.amps.len() >= PARALLEL_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(body);
        } else {
            self.amps.iter_mut().enumerate().for_each(body);
        }
    }

    fn check_subset(&self, subset: &[usize]) -> Result<(), SimError> {
        if subset.is_empty() {
            return Err(SimError::EmptySubset);
        }
        for &q in subset {
            if q >= self.num_qubits {
                return Err(SimError::IndexOutOfRange { index: q, num_qubits: self.num_qubits });
            }
        }
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(SimError::DuplicateQubit(w[0]));
        }
        Ok(())
    }

    #[inline]
    fn project(&self, index: usize, subset: &[usize]) -> usize {
        subset.iter().fold(0usize, |acc, &q| {
            (acc << 1) | ((index >> self.bit_pos(q)) & 1)
        })
    }

    /// Marginal distribution over the given qubits; `subset[0]` is the
    /// most significant bit of the returned outcome index.
    pub fn probabilities(&self, subset: &[usize]) -> Result<Vec<f64>, SimError> {
        self.check_subset(subset)?;
        let mut probs = vec![0.0f64; 1 << subset.len()];
        for (index, amp) in self.amps.iter().enumerate() {
            probs[self.project(index, subset)] += amp.norm_sqr();
        }
        Ok(probs)
    }

    /// Draws `shots` measurement outcomes over the subset. Reproducible
    /// for a given seed; readout noise (if any) flips each reported bit
    /// independently after the outcome is drawn.
    pub fn sample(
        &self,
        subset: &[usize],
        shots: u64,
        seed: u64,
        noise: Option<&NoiseModel>,
    ) -> Result<Histogram, SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let probs = self.probabilities(subset)?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let samples = sample_outcomes(&probs, subset.len(), shots, &mut rng, noise);
        let mut hist = Histogram::new(subset.len());
        for outcome in samples {
            hist.record(&outcome);
        }
        Ok(hist)
    }

    /// Like [`StateVector::sample`] but also returns the outcomes in draw
    /// order, for callers that need the sequence and the histogram.
    pub fn sample_sequence(
        &self,
        subset: &[usize],
        shots: u64,
        rng: &mut ChaCha12Rng,
        noise: Option<&NoiseModel>,
    ) -> Result<(Vec<String>, Histogram), SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let probs = self.probabilities(subset)?;
        let samples = sample_outcomes(&probs, subset.len(), shots, rng, noise);
        let mut hist = Histogram::new(subset.len());
        for outcome in &samples {
            hist.record(outcome);
        }
        Ok((samples, hist))
    }
}

fn sample_outcomes(
    probs: &[f64],
    width: usize,
    shots: u64,
    rng: &mut ChaCha12Rng,
    noise: Option<&NoiseModel>,
) -> Vec<String> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let mut out = Vec::with_capacity(shots as usize);
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let mut idx = cumulative.partition_point(|&c| c <= u);
        if idx >= probs.len() {
            idx = probs.len() - 1;
        }
        let mut bits: Vec<u8> = (0..width)
            .map(|i| ((idx >> (width - 1 - i)) & 1) as u8)
            .collect();
        if let Some(model) = noise {
            let p = model.readout_flip_prob();
            for b in bits.iter_mut() {
                if rng.gen::<f64>() < p {
                    *b ^= 1;
                }
            }
        }
        out.push(bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect());
    }
    out
}

/// Measurement counts keyed by bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub width: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bitstring: String,
    pub count: u64,
    pub probability: f64,
}

impl Histogram {
    pub fn new(width: usize) -> Self {
        Histogram { width, shots: 0, counts: BTreeMap::new() }
    }

    pub fn record(&mut self, bitstring: &str) {
        *self.counts.entry(bitstring.to_string()).or_insert(0) += 1;
        self.shots += 1;
    }

    /// Sums another histogram into this one.
    pub fn merge(&mut self, other: &Histogram) {
        for (bits, &count) in &other.counts {
            *self.counts.entry(bits.clone()).or_insert(0) += count;
        }
        self.shots += other.shots;
    }

    pub fn max_count(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    /// Most frequent bitstring; ties break toward the lexicographically
    /// smallest.
    pub fn mode(&self) -> Option<&str> {
        let max = self.max_count();
        self.counts
            .iter()
            .find(|(_, &c)| c == max)
            .map(|(bits, _)| bits.as_str())
    }

    pub fn rows(&self) -> Vec<HistogramRow> {
        let total = self.shots as f64;
        self.counts
            .iter()
            .map(|(bits, &count)| HistogramRow {
                bitstring: bits.clone(),
                count,
                probability: count as f64 / total,
            })
            .collect()
    }

    /// CSV form: `bitstring,count,probability` rows sorted by bitstring.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count,probability\n");
        for row in self.rows() {
            writeln!(out, "{},{},{}", row.bitstring, row.count, row.probability).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut counts = BTreeMap::new();
        let mut width = 0;
        let mut shots = 0u64;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || (i == 0 && line.starts_with("bitstring")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 2 {
                return Err(format!("line {}: expected `bitstring,count[,probability]`", i + 1));
            }
            let bits = fields[0];
            if bits.chars().any(|c| c != '0' && c != '1') {
                return Err(format!("line {}: `{bits}` is not a bitstring", i + 1));
            }
            let count: u64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad count `{}`", i + 1, fields[1]))?;
            width = width.max(bits.len());
            shots += count;
            *counts.entry(bits.to_string()).or_insert(0) += count;
        }
        Ok(Histogram { width, shots, counts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn assert_close(a: Complex64, b: Complex64) {
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn uniform_amplitudes() {
        let sv = StateVector::uniform(1).unwrap();
        assert_close(sv.amps()[0], Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_close(sv.amps()[1], Complex64::new(FRAC_1_SQRT_2, 0.0));

        let sv = StateVector::uniform(5).unwrap();
        assert_eq!(sv.amps().len(), 32);
        let expected = 1.0 / 32f64.sqrt();
        for &a in sv.amps() {
            assert!((a.re - expected).abs() < EPS && a.im == 0.0);
        }
        assert!((sv.norm_sqr() - 1.0).abs() < EPS);
    }

    #[test]
    fn uniform_rejects_zero_and_oversized() {
        assert!(StateVector::uniform(0).is_err());
        assert!(StateVector::uniform(MAX_QUBITS + 1).is_err());
    }

    #[test]
    fn hadamard_on_zero_gives_plus() {
        let mut sv = StateVector::zero(1).unwrap();
        sv.apply(&Gate::h(0)).unwrap();
        assert_close(sv.amps()[0], Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_close(sv.amps()[1], Complex64::new(FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn z_flips_the_one_component() {
        let mut sv = StateVector::zero(1).unwrap();
        sv.apply(&Gate::h(0)).unwrap();
        sv.apply(&Gate::z(0)).unwrap();
        assert_close(sv.amps()[0], Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_close(sv.amps()[1], Complex64::new(-FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn mcx_flips_exactly_the_matching_pair() {
        // |110⟩ with controls qubits 0,1 on-one, target 2 → |111⟩
        let mut sv = StateVector::basis(3, 0b110).unwrap();
        sv.apply(&Gate::mcx(vec![Control::on_one(0), Control::on_one(1)], 2))
            .unwrap();
        assert_close(sv.amps()[0b111], Complex64::new(1.0, 0.0));
        assert_close(sv.amps()[0b110], Complex64::new(0.0, 0.0));

        // a non-matching basis state is untouched
        let mut sv = StateVector::basis(3, 0b100).unwrap();
        sv.apply(&Gate::mcx(vec![Control::on_one(0), Control::on_one(1)], 2))
            .unwrap();
        assert_close(sv.amps()[0b100], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn on_zero_controls_activate_on_zero() {
        let mut sv = StateVector::basis(2, 0b00).unwrap();
        sv.apply(&Gate::mcx(vec![Control::on_zero(0)], 1)).unwrap();
        assert_close(sv.amps()[0b01], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn gate_shape_validation() {
        let mut sv = StateVector::zero(2).unwrap();
        let mut bad_h = Gate::h(0);
        bad_h.controls.push(Control::on_one(1));
        assert!(matches!(sv.apply(&bad_h), Err(SimError::InvalidGate(_))));
        assert!(matches!(
            sv.apply(&Gate::x(5)),
            Err(SimError::IndexOutOfRange { index: 5, .. })
        ));
        assert!(matches!(
            sv.apply(&Gate::mcx(vec![Control::on_one(0)], 0)),
            Err(SimError::InvalidGate(_))
        ));
        assert!(matches!(
            sv.apply(&Gate::mcx(vec![], 0)),
            Err(SimError::InvalidGate(_))
        ));
    }

    #[test]
    fn self_inverse_gates_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..=5usize);
            let mut sv = StateVector::uniform(n).unwrap();
            // randomize phases a bit first
            for q in 0..n {
                if rng.gen::<bool>() {
                    sv.apply(&Gate::z(q)).unwrap();
                }
            }
            let before = sv.clone();
            let target = rng.gen_range(0..n);
            let mut others: Vec<usize> = (0..n).filter(|&q| q != target).collect();
            let num_controls = rng.gen_range(1..=others.len());
            others.truncate(num_controls);
            let controls: Vec<Control> = others
                .iter()
                .map(|&q| {
                    if rng.gen::<bool>() {
                        Control::on_one(q)
                    } else {
                        Control::on_zero(q)
                    }
                })
                .collect();
            let gates = [
                Gate::h(target),
                Gate::x(target),
                Gate::z(target),
                Gate::mcx(controls.clone(), target),
                Gate::mcz(controls, target),
            ];
            for gate in &gates {
                sv.apply(gate).unwrap();
                sv.apply(gate).unwrap();
                for (a, b) in sv.amps().iter().zip(before.amps()) {
                    assert!((a - b).norm() < 1e-10, "{gate:?}");
                }
                assert!((sv.norm_sqr() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn probabilities_full_and_marginal() {
        let sv = StateVector::uniform(5).unwrap();
        let probs = sv.probabilities(&[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(probs.len(), 32);
        for p in &probs {
            assert!((p - 1.0 / 32.0).abs() < EPS);
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        // |10⟩: qubit 0 reads 1
        let sv = StateVector::basis(2, 0b10).unwrap();
        let marginal = sv.probabilities(&[0]).unwrap();
        assert!((marginal[1] - 1.0).abs() < EPS);
        assert!(marginal[0].abs() < EPS);
    }

    #[test]
    fn marginal_consistency_with_grouped_full_distribution() {
        let mut sv = StateVector::uniform(4).unwrap();
        sv.apply(&Gate::mcx(vec![Control::on_one(0)], 2)).unwrap();
        sv.apply(&Gate::h(1)).unwrap();
        let subset = [2usize, 0];
        let marginal = sv.probabilities(&subset).unwrap();
        let full = sv.probabilities(&[0, 1, 2, 3]).unwrap();
        let mut grouped = vec![0.0; 4];
        for (idx, p) in full.iter().enumerate() {
            let b2 = (idx >> 1) & 1; // qubit 2
            let b0 = (idx >> 3) & 1; // qubit 0
            grouped[(b2 << 1) | b0] += p;
        }
        for (a, b) in marginal.iter().zip(&grouped) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn subset_errors() {
        let sv = StateVector::uniform(2).unwrap();
        assert_eq!(sv.probabilities(&[]), Err(SimError::EmptySubset));
        assert_eq!(sv.probabilities(&[0, 0]), Err(SimError::DuplicateQubit(0)));
        assert!(matches!(
            sv.probabilities(&[4]),
            Err(SimError::IndexOutOfRange { index: 4, .. })
        ));
    }

    #[test]
    fn deterministic_state_samples_deterministically() {
        let sv = StateVector::basis(2, 0b11).unwrap();
        let hist = sv.sample(&[0, 1], 100, 1, None).unwrap();
        assert_eq!(hist.shots, 100);
        assert_eq!(hist.counts.get("11"), Some(&100));
        assert_eq!(hist.counts.len(), 1);
    }

    #[test]
    fn sampling_is_reproducible_per_seed() {
        let sv = StateVector::uniform(3).unwrap();
        let a = sv.sample(&[0, 1, 2], 500, 42, None).unwrap();
        let b = sv.sample(&[0, 1, 2], 500, 42, None).unwrap();
        let c = sv.sample(&[0, 1, 2], 500, 43, None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_sampling_respects_frequency_deviation_bound() {
        let sv = StateVector::uniform(5).unwrap();
        let hist = sv.sample(&[0, 1, 2, 3, 4], 20_000, 7, None).unwrap();
        let p_max = hist.max_count() as f64 / 20_000.0;
        assert!(p_max <= 1.0 / 32.0 + 0.0108, "p_max = {p_max}");
    }

    #[test]
    fn readout_noise_flips_at_the_configured_rate() {
        let sv = StateVector::basis(1, 1).unwrap();
        let noise = NoiseModel::new(0.45).unwrap();
        let hist = sv.sample(&[0], 10_000, 3, Some(&noise)).unwrap();
        let zeros = *hist.counts.get("0").unwrap_or(&0) as f64;
        // binomial mean 4500, sd ≈ 49.7
        assert!((zeros - 4500.0).abs() < 200.0, "zeros = {zeros}");
    }

    #[test]
    fn noise_model_rejects_bad_probability() {
        assert!(NoiseModel::new(0.5).is_err());
        assert!(NoiseModel::new(-0.1).is_err());
        assert!(NoiseModel::new(0.0).is_ok());
    }

    #[test]
    fn depth_uses_greedy_layering() {
        let mut c = Circuit::new(4).unwrap();
        assert_eq!(c.depth(), 0);
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::h(1)).unwrap();
        assert_eq!(c.depth(), 1);
        c.push(Gate::x(0)).unwrap();
        assert_eq!(c.depth(), 2);
        // MCX on {1,2}→3 blocks on qubit 1's layer
        c.push(Gate::mcx(vec![Control::on_one(1), Control::on_one(2)], 3))
            .unwrap();
        assert_eq!(c.depth(), 2);
        c.push(Gate::h(3)).unwrap();
        assert_eq!(c.depth(), 3);
    }

    #[test]
    fn histogram_csv_round_trip() {
        let sv = StateVector::uniform(2).unwrap();
        let hist = sv.sample(&[0, 1], 1000, 9, None).unwrap();
        let csv = hist.to_csv();
        assert!(csv.starts_with("bitstring,count,probability\n"));
        let parsed = Histogram::from_csv(&csv).unwrap();
        assert_eq!(parsed.counts, hist.counts);
        assert_eq!(parsed.shots, hist.shots);
    }

    #[test]
    fn histogram_mode_breaks_ties_lexicographically() {
        let mut h = Histogram::new(2);
        h.record("10");
        h.record("01");
        assert_eq!(h.mode(), Some("01"));
        h.record("10");
        assert_eq!(h.mode(), Some("10"));
    }
}
