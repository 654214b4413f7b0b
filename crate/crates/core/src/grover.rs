//! Phase oracles from CNF, the diffuser, fixed-iteration amplitude
//! amplification, and the randomized-iteration search loop for an
//! unknown solution count.
//!
//! Two oracle realizations are provided. The direct oracle precomputes
//! the satisfying set and flips amplitude signs on an `n`-qubit register
//! with no ancillas. The gate-level oracle builds the reversible
//! compute–phase–uncompute circuit over `n + m + 1` qubits: one ancilla
//! per clause, one flag qubit, multi-controlled `X` gates for the clause
//! bits, a `Z` on the flag, and mirrored uncomputation. Both act as
//! `|x⟩ ↦ (−1)^{F(x)}|x⟩` on the search register.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cnf::{self, Assignment, Cnf, CnfError};
use crate::sim::{
    Circuit, Control, Gate, Histogram, NoiseModel, SimError, StateVector, MAX_QUBITS,
};

/// Iteration-count growth factor for the unknown-count loop, kept as an
/// exact rational.
pub const GROWTH_NUMERATOR: f64 = 8.0;
pub const GROWTH_DENOMINATOR: f64 = 7.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroverError {
    #[error("circuit width {width} exceeds the {max}-qubit ceiling")]
    TooManyQubits { width: usize, max: usize },
    #[error("solution count {k} invalid for {n} variables (need 1 ≤ K ≤ 2^n)")]
    InvalidSolutionCount { k: u64, n: u32 },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Direct phase oracle: a precomputed satisfying-set bitset applied to an
/// `n`-qubit register without ancillas.
#[derive(Debug, Clone)]
pub struct PhaseOracle {
    num_vars: u32,
    marked: Vec<u64>,
    marked_count: u64,
}

impl PhaseOracle {
    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn marked_count(&self) -> u64 {
        self.marked_count
    }

    #[inline]
    pub fn is_marked(&self, index: usize) -> bool {
        self.marked[index >> 6] & (1u64 << (index & 63)) != 0
    }

    /// Multiplies the amplitude of each marked basis state by −1.
    pub fn apply(&self, sv: &mut StateVector) -> Result<(), GroverError> {
        if sv.num_qubits() != self.num_vars as usize {
            return Err(GroverError::TooManyQubits {
                width: sv.num_qubits(),
                max: self.num_vars as usize,
            });
        }
        sv.phase_flip_where(|idx| self.is_marked(idx));
        Ok(())
    }
}

/// Evaluates the formula on every assignment and packs the satisfying set
/// into a bitset. Assignment indices coincide with amplitude indices.
pub fn build_direct_oracle(cnf: &Cnf) -> PhaseOracle {
    let n = cnf.num_vars();
    let masks = cnf::solve::clause_masks(cnf);
    let total = 1u64 << n;
    let mut marked = vec![0u64; total.div_ceil(64) as usize];
    let mut count = 0u64;
    for index in 0..total {
        if cnf::solve::satisfies(&masks, index) {
            marked[(index >> 6) as usize] |= 1u64 << (index & 63);
            count += 1;
        }
    }
    PhaseOracle {
        num_vars: n,
        marked,
        marked_count: count,
    }
}

/// Ancilla encoding for the gate-level oracle. `ViolationBits` stores
/// `c_j = 1` iff clause `j` is violated and computes the flag as the NOR
/// of the clause bits; `SatisfactionBits` inverts each clause bit after
/// detection so `c_j = 1` iff the clause holds, and computes the flag as
/// the AND. The two are unitary-equivalent on the search register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaEncoding {
    ViolationBits,
    SatisfactionBits,
}

/// Reversible oracle circuit with its qubit-role map: search qubits
/// `[0, n)`, clause ancillas `[n, n+m)`, flag qubit `n+m`.
#[derive(Debug, Clone)]
pub struct OracleCircuit {
    pub circuit: Circuit,
    pub num_search: usize,
    pub num_clauses: usize,
    pub encoding: AncillaEncoding,
}

impl OracleCircuit {
    pub fn width(&self) -> usize {
        self.num_search + self.num_clauses + 1
    }

    pub fn search_qubits(&self) -> Vec<usize> {
        (0..self.num_search).collect()
    }

    pub fn clause_ancillas(&self) -> Vec<usize> {
        (self.num_search..self.num_search + self.num_clauses).collect()
    }

    pub fn flag_qubit(&self) -> usize {
        self.num_search + self.num_clauses
    }
}

/// A multi-controlled `X` that detects the all-literals-false pattern of
/// a clause: positive literals are controlled on 0, negated literals on 1.
fn clause_violation_gate(clause: &cnf::Clause, ancilla: usize) -> Gate {
    let controls = clause
        .literals()
        .iter()
        .map(|lit| {
            let qubit = (lit.var() - 1) as usize;
            if lit.is_positive() {
                Control::on_zero(qubit)
            } else {
                Control::on_one(qubit)
            }
        })
        .collect();
    Gate::mcx(controls, ancilla)
}

/// Builds the compute–phase–uncompute circuit for `F`. Width is exactly
/// `n + m + 1`; applying it to `|x⟩|0^{m+1}⟩` yields
/// `(−1)^{F(x)}|x⟩|0^{m+1}⟩`.
pub fn build_gate_oracle(cnf: &Cnf, encoding: AncillaEncoding) -> Result<OracleCircuit, GroverError> {
    let n = cnf.num_vars() as usize;
    let m = cnf.num_clauses();
    let width = n + m + 1;
    if width > MAX_QUBITS {
        return Err(GroverError::TooManyQubits { width, max: MAX_QUBITS });
    }
    let flag = n + m;
    let mut circuit = Circuit::new(width)?;

    let compute_clauses = |circuit: &mut Circuit, reverse: bool| -> Result<(), SimError> {
        let order: Vec<usize> = if reverse { (0..m).rev().collect() } else { (0..m).collect() };
        for j in order {
            let ancilla = n + j;
            let detect = clause_violation_gate(&cnf.clauses()[j], ancilla);
            match encoding {
                AncillaEncoding::ViolationBits => circuit.push(detect)?,
                AncillaEncoding::SatisfactionBits => {
                    if reverse {
                        circuit.push(Gate::x(ancilla))?;
                        circuit.push(detect)?;
                    } else {
                        circuit.push(detect)?;
                        circuit.push(Gate::x(ancilla))?;
                    }
                }
            }
        }
        Ok(())
    };

    let compute_flag = |circuit: &mut Circuit| -> Result<(), SimError> {
        if m == 0 {
            // an empty conjunction is always satisfied
            circuit.push(Gate::x(flag))
        } else {
            let controls = (n..n + m)
                .map(|q| match encoding {
                    AncillaEncoding::ViolationBits => Control::on_zero(q),
                    AncillaEncoding::SatisfactionBits => Control::on_one(q),
                })
                .collect();
            circuit.push(Gate::mcx(controls, flag))
        }
    };

    compute_clauses(&mut circuit, false)?;
    compute_flag(&mut circuit)?;
    circuit.push(Gate::z(flag))?;
    compute_flag(&mut circuit)?;
    compute_clauses(&mut circuit, true)?;

    Ok(OracleCircuit {
        circuit,
        num_search: n,
        num_clauses: m,
        encoding,
    })
}

/// Reflection about the uniform superposition, applied to the given
/// search qubits only; any other qubits are untouched.
pub fn apply_diffuser(sv: &mut StateVector, search_qubits: &[usize]) -> Result<(), GroverError> {
    for &q in search_qubits {
        sv.apply(&Gate::h(q))?;
    }
    // 2|0^n⟩⟨0^n| − I on the search register
    let nq = sv.num_qubits();
    let mask: usize = search_qubits.iter().map(|&q| 1usize << (nq - 1 - q)).sum();
    sv.phase_flip_where(move |idx| idx & mask != 0);
    for &q in search_qubits {
        sv.apply(&Gate::h(q))?;
    }
    Ok(())
}

/// Gate-level form of the diffuser, for width/depth accounting.
pub fn diffuser_circuit(num_qubits: usize, search_qubits: &[usize]) -> Result<Circuit, GroverError> {
    let mut c = Circuit::new(num_qubits)?;
    for &q in search_qubits {
        c.push(Gate::h(q))?;
    }
    for &q in search_qubits {
        c.push(Gate::x(q))?;
    }
    match search_qubits {
        [] => {}
        [q] => c.push(Gate::z(*q))?,
        [init @ .., last] => {
            let controls = init.iter().map(|&q| Control::on_one(q)).collect();
            c.push(Gate::mcz(controls, *last))?;
        }
    }
    for &q in search_qubits {
        c.push(Gate::x(q))?;
    }
    for &q in search_qubits {
        c.push(Gate::h(q))?;
    }
    Ok(c)
}

/// Near-optimal iteration count `⌊π/(4θ)⌋` with `sin²θ = K/2^n`.
pub fn optimal_iterations(n: u32, k: u64) -> Result<u64, GroverError> {
    let big_n = 2f64.powi(n as i32);
    if k == 0 || k as f64 > big_n {
        return Err(GroverError::InvalidSolutionCount { k, n });
    }
    let theta = (k as f64 / big_n).sqrt().asin();
    Ok((std::f64::consts::PI / (4.0 * theta)).floor() as u64)
}

/// Closed-form success probability `sin²((2r+1)θ)` after `r` iterations;
/// 0 when there are no marked states.
pub fn success_probability(n: u32, k: u64, r: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let big_n = 2f64.powi(n as i32);
    let theta = (k as f64 / big_n).sqrt().asin();
    ((2 * r + 1) as f64 * theta).sin().powi(2)
}

#[derive(Debug, Clone)]
pub struct GroverConfig {
    /// Number of oracle–diffuser iterations.
    pub iterations: u64,
    pub shots: u64,
    pub seed: u64,
    /// Run the reversible-circuit oracle instead of the direct one.
    pub use_gate_level: bool,
    pub noise: Option<NoiseModel>,
}

impl GroverConfig {
    pub fn new(iterations: u64, shots: u64, seed: u64) -> Self {
        GroverConfig {
            iterations,
            shots,
            seed,
            use_gate_level: false,
            noise: None,
        }
    }
}

/// Result of a fixed-iteration run: exact probabilities over the search
/// register plus a sampled histogram.
#[derive(Debug, Clone)]
pub struct GroverRun {
    pub num_vars: u32,
    pub iterations: u64,
    pub probabilities: Vec<f64>,
    pub histogram: Histogram,
    /// Total probability mass on the satisfying assignments.
    pub marked_mass: f64,
    /// Width and greedy-layered depth of one oracle+diffuser step
    /// (gate-level runs only).
    pub circuit_stats: Option<(usize, usize)>,
}

enum OracleExec {
    Direct(PhaseOracle),
    Gates(OracleCircuit),
}

impl OracleExec {
    fn build(cnf: &Cnf, gate_level: bool) -> Result<Self, GroverError> {
        if gate_level {
            Ok(OracleExec::Gates(build_gate_oracle(cnf, AncillaEncoding::ViolationBits)?))
        } else {
            let n = cnf.num_vars() as usize;
            if n > MAX_QUBITS {
                return Err(GroverError::TooManyQubits { width: n, max: MAX_QUBITS });
            }
            Ok(OracleExec::Direct(build_direct_oracle(cnf)))
        }
    }

    /// Prepares `|s⟩` on the search register (ancillas, if any, at |0⟩).
    fn initial_state(&self, n: usize) -> Result<StateVector, GroverError> {
        match self {
            OracleExec::Direct(_) => Ok(StateVector::uniform(n)?),
            OracleExec::Gates(oc) => {
                let mut sv = StateVector::zero(oc.width())?;
                for q in 0..n {
                    sv.apply(&Gate::h(q))?;
                }
                Ok(sv)
            }
        }
    }

    fn grover_steps(
        &self,
        sv: &mut StateVector,
        search: &[usize],
        iterations: u64,
    ) -> Result<(), GroverError> {
        for _ in 0..iterations {
            match self {
                OracleExec::Direct(oracle) => oracle.apply(sv)?,
                OracleExec::Gates(oc) => sv.apply_circuit(&oc.circuit)?,
            }
            apply_diffuser(sv, search)?;
        }
        Ok(())
    }
}

/// Prepares `|s⟩`, applies `(D·U_F)^r`, and samples the search register.
pub fn grover_run(cnf: &Cnf, config: &GroverConfig) -> Result<GroverRun, GroverError> {
    let n = cnf.num_vars() as usize;
    let exec = OracleExec::build(cnf, config.use_gate_level)?;
    let search: Vec<usize> = (0..n).collect();

    let mut sv = exec.initial_state(n)?;
    exec.grover_steps(&mut sv, &search, config.iterations)?;

    let probabilities = sv.probabilities(&search)?;
    let histogram = sv.sample(&search, config.shots, config.seed, config.noise.as_ref())?;

    let masks = cnf::solve::clause_masks(cnf);
    let marked_mass = probabilities
        .iter()
        .enumerate()
        .filter(|(idx, _)| cnf::solve::satisfies(&masks, *idx as u64))
        .map(|(_, p)| p)
        .sum();

    let circuit_stats = match &exec {
        OracleExec::Gates(oc) => {
            let mut step = oc.circuit.clone();
            step.extend(&diffuser_circuit(oc.width(), &search)?)?;
            Some((oc.width(), step.depth()))
        }
        OracleExec::Direct(_) => None,
    };

    Ok(GroverRun {
        num_vars: cnf.num_vars(),
        iterations: config.iterations,
        probabilities,
        histogram,
        marked_mass,
        circuit_stats,
    })
}

#[derive(Debug, Clone)]
pub struct BbhtConfig {
    pub shots_per_trial: u64,
    pub seed: u64,
    /// Trial ceiling; `None` uses [`default_budget`].
    pub budget_trials: Option<usize>,
    pub use_gate_level: bool,
    pub noise: Option<NoiseModel>,
}

impl BbhtConfig {
    pub fn new(shots_per_trial: u64, seed: u64) -> Self {
        BbhtConfig {
            shots_per_trial,
            seed,
            budget_trials: None,
            use_gate_level: false,
            noise: None,
        }
    }
}

/// `3·⌈log_λ √N⌉ + 10` trials: enough for several full sweeps of the
/// iteration-count schedule.
pub fn default_budget(num_vars: u32) -> usize {
    let log_sqrt_n = (num_vars as f64 / 2.0) * std::f64::consts::LN_2;
    let lambda_ln = (GROWTH_NUMERATOR / GROWTH_DENOMINATOR).ln();
    3 * (log_sqrt_n / lambda_ln).ceil() as usize + 10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BbhtVerdict {
    #[serde(rename = "SAT")]
    Sat,
    BudgetExhausted,
}

#[derive(Debug, Clone, Serialize)]
pub struct BbhtTrial {
    /// Iteration-count bound when the trial ran.
    pub k: f64,
    pub r_sampled: u64,
    /// The trial's candidate: the most frequent sampled bitstring.
    pub measured: Assignment,
    pub classical_check: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BbhtReport {
    pub verdict: BbhtVerdict,
    pub witness: Option<Assignment>,
    pub tries: usize,
    pub trials: Vec<BbhtTrial>,
    /// All measurement outcomes across trials, aggregated.
    pub histogram: Histogram,
}

/// Randomized-iteration search for a satisfying assignment when the
/// solution count is unknown.
///
/// Each trial samples `r` uniformly from the integers below `k`, runs `r`
/// oracle–diffuser steps from `|s⟩`, and measures `shots_per_trial`
/// outcomes; the most frequent bitstring is the trial's candidate and is
/// accepted only if it passes classical evaluation, so a SAT verdict can
/// never carry an invalid witness, noise or not. On failure `k` grows by
/// `8/7` up to `⌈√N⌉`; the loop stops when `k` exceeds the real-valued
/// `√N` or the trial budget runs out.
pub fn bbht_solve(cnf: &Cnf, config: &BbhtConfig) -> Result<BbhtReport, GroverError> {
    let n = cnf.num_vars();
    let exec = OracleExec::build(cnf, config.use_gate_level)?;
    let search: Vec<usize> = (0..n as usize).collect();

    let sqrt_n = 2f64.powi(n as i32).sqrt();
    let cap = sqrt_n.ceil();
    let budget = config.budget_trials.unwrap_or_else(|| default_budget(n));

    let mut k = 1.0f64;
    let mut trials = Vec::new();
    let mut aggregate = Histogram::new(n as usize);
    let mut verdict = BbhtVerdict::BudgetExhausted;
    let mut witness = None;

    for trial_index in 0..budget {
        // independent per-trial stream, so trial outcomes do not depend
        // on how earlier trials consumed randomness
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        rng.set_stream(trial_index as u64);

        let r_bound = (k.ceil() as u64).max(1);
        let r = rng.gen_range(0..r_bound);

        let mut sv = exec.initial_state(n as usize)?;
        exec.grover_steps(&mut sv, &search, r)?;
        let (_, hist) =
            sv.sample_sequence(&search, config.shots_per_trial, &mut rng, config.noise.as_ref())?;

        let measured = Assignment::from_bitstring(hist.mode().expect("shots ≥ 1"))
            .expect("sampled bitstrings are well-formed");
        aggregate.merge(&hist);
        let good = cnf.evaluate(&measured)?;
        trials.push(BbhtTrial {
            k,
            r_sampled: r,
            measured: measured.clone(),
            classical_check: good,
        });

        if good {
            verdict = BbhtVerdict::Sat;
            witness = Some(measured);
            break;
        }

        k = (k * GROWTH_NUMERATOR / GROWTH_DENOMINATOR).min(cap);
        if k > sqrt_n {
            break;
        }
    }

    Ok(BbhtReport {
        verdict,
        witness,
        tries: trials.len(),
        trials,
        histogram: aggregate,
    })
}
