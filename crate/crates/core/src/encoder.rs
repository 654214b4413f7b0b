//! Generator for two-trace bit-leakage verification CNFs.
//!
//! Two executions A and B of a toy XOR cipher run under independent keys
//! and a shared plaintext bit. Per unrolled step, each state bit absorbs
//! the matching key bit, and the plaintext is absorbed on the first step:
//! `state[i] ← state[i] ⊕ key[i] ⊕ (step == 1 ? p : 0)`, starting from the
//! all-zero state. The observed leakage is state bit 0 after the last
//! step. The property mode asks for two keys whose leakage differs
//! (`notequal`) or matches (`equal`); `keys_must_differ` additionally
//! requires the two keys to differ somewhere.
//!
//! Each (mode, key-constraint) combination uses a fixed clause template:
//!
//! | mode     | keys differ | plaintext   | leakage relation      | key relation        |
//! |----------|-------------|-------------|-----------------------|---------------------|
//! | notequal | no          | variable    | direct (2 clauses)    | —                   |
//! | equal    | no          | variable    | flag var + unit       | —                   |
//! | notequal | yes         | variable    | flag var + unit       | per-bit flags + OR  |
//! | equal    | yes         | folded      | direct (2 clauses)    | direct (1-bit keys) |
//!
//! "Variable" plaintext materializes the shared plaintext as a variable
//! pinned by a unit clause; "folded" substitutes the constant into the
//! first-step definitions. Flagged relations introduce a difference
//! variable via the 4-clause XOR biconditional and pin it with a unit
//! clause. Padding variables are fixed to 0 by unit clauses and exist
//! only to reach a target variable count; they never change the solution
//! set.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::cnf::{
    brute_force, emit_dimacs, enumerate_solutions, Assignment, Clause, Cnf, Literal,
    BRUTE_FORCE_MAX_VARS,
};

/// Recorded witnesses are capped at this many entries; `expected_k` stays
/// exact regardless.
pub const MAX_RECORDED_WITNESSES: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("infeasible spec: {0}")]
    InfeasibleSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyMode {
    Equal,
    NotEqual,
}

impl PropertyMode {
    pub fn flipped(self) -> Self {
        match self {
            PropertyMode::Equal => PropertyMode::NotEqual,
            PropertyMode::NotEqual => PropertyMode::Equal,
        }
    }
}

/// Semantic parameters of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageSpec {
    /// State (and key) width in bits; the observed bit is bit 0.
    pub state_bits: u32,
    /// Number of unrolled cipher steps.
    pub unroll_steps: u32,
    pub mode: PropertyMode,
    pub keys_must_differ: bool,
    /// Shared plaintext bit, tied between the traces.
    pub plaintext: bool,
    /// Extra variables pinned to 0, used to reach a target variable count.
    pub padding_vars: u32,
}

impl LeakageSpec {
    pub fn validate(&self) -> Result<(), EncodeError> {
        if self.state_bits == 0 {
            return Err(EncodeError::InfeasibleSpec("state_bits must be ≥ 1".into()));
        }
        if self.unroll_steps == 0 {
            return Err(EncodeError::InfeasibleSpec("unroll_steps must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarRole {
    KeyA,
    KeyB,
    StateA,
    StateB,
    Aux,
}

/// A generated CNF plus its ground-truth metadata.
#[derive(Debug, Clone)]
pub struct LeakageInstance {
    pub cnf: Cnf,
    pub spec: LeakageSpec,
    /// Role of each variable; entry `i` describes variable `i + 1`.
    pub var_roles: Vec<VarRole>,
    pub expected_k: u64,
    /// Satisfying assignments in lexicographic order, capped at
    /// [`MAX_RECORDED_WITNESSES`].
    pub expected_witnesses: Vec<Assignment>,
}

impl LeakageInstance {
    pub fn to_dimacs(&self) -> String {
        emit_dimacs(&self.cnf)
    }

    /// Sidecar metadata document for the emitted DIMACS file.
    pub fn metadata_json(&self) -> String {
        let roles: BTreeMap<String, VarRole> = self
            .var_roles
            .iter()
            .enumerate()
            .map(|(i, &r)| (format!("{}", i + 1), r))
            .collect();
        let doc = InstanceMetadata {
            spec: self.spec,
            num_vars: self.cnf.num_vars(),
            num_clauses: self.cnf.num_clauses(),
            var_roles: roles,
            expected_k: self.expected_k,
            expected_witnesses: self.expected_witnesses.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("metadata serialization cannot fail")
    }

    /// Variables (1-based) holding the two keys, trace A first.
    pub fn key_vars(&self) -> (Vec<u32>, Vec<u32>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, role) in self.var_roles.iter().enumerate() {
            match role {
                VarRole::KeyA => a.push(i as u32 + 1),
                VarRole::KeyB => b.push(i as u32 + 1),
                _ => {}
            }
        }
        (a, b)
    }
}

#[derive(Serialize)]
struct InstanceMetadata {
    spec: LeakageSpec,
    num_vars: u32,
    num_clauses: usize,
    var_roles: BTreeMap<String, VarRole>,
    expected_k: u64,
    expected_witnesses: Vec<Assignment>,
}

/// Leakage bit produced by a key under the round function.
pub fn leak_bit(key: &[bool], plaintext: bool, steps: u32) -> bool {
    let mut state = vec![false; key.len()];
    for step in 1..=steps {
        for (i, s) in state.iter_mut().enumerate() {
            *s ^= key[i];
            if step == 1 {
                *s ^= plaintext;
            }
        }
    }
    state[0]
}

/// The semantic predicate over a key pair, before encoding.
pub fn key_pair_leaks(spec: &LeakageSpec, key_a: &[bool], key_b: &[bool]) -> bool {
    let la = leak_bit(key_a, spec.plaintext, spec.unroll_steps);
    let lb = leak_bit(key_b, spec.plaintext, spec.unroll_steps);
    let relation = match spec.mode {
        PropertyMode::Equal => la == lb,
        PropertyMode::NotEqual => la != lb,
    };
    relation && (!spec.keys_must_differ || key_a != key_b)
}

struct VarLayout {
    plaintext: Option<u32>,
    key_a: Vec<u32>,
    key_b: Vec<u32>,
    state_a: Vec<Vec<u32>>, // [step][bit]
    state_b: Vec<Vec<u32>>,
    leak_flag: Option<u32>,
    key_diff: Vec<u32>,
    padding: Vec<u32>,
    roles: Vec<VarRole>,
}

impl VarLayout {
    fn new(spec: &LeakageSpec, materialize_plaintext: bool, leak_flag: bool, key_diff_flags: bool) -> Self {
        let s = spec.state_bits as usize;
        let t = spec.unroll_steps as usize;
        let mut roles = Vec::new();
        let mut next = || {
            roles.push(VarRole::Aux); // placeholder, fixed below
            roles.len() as u32
        };

        let plaintext = materialize_plaintext.then(&mut next);
        let key_a: Vec<u32> = (0..s).map(|_| next()).collect();
        let key_b: Vec<u32> = (0..s).map(|_| next()).collect();
        let state_a: Vec<Vec<u32>> = (0..t).map(|_| (0..s).map(|_| next()).collect()).collect();
        let state_b: Vec<Vec<u32>> = (0..t).map(|_| (0..s).map(|_| next()).collect()).collect();
        let leak_flag = leak_flag.then(&mut next);
        let key_diff: Vec<u32> = if key_diff_flags {
            (0..s).map(|_| next()).collect()
        } else {
            Vec::new()
        };
        let padding: Vec<u32> = (0..spec.padding_vars).map(|_| next()).collect();

        for &v in &key_a {
            roles[(v - 1) as usize] = VarRole::KeyA;
        }
        for &v in &key_b {
            roles[(v - 1) as usize] = VarRole::KeyB;
        }
        for step in &state_a {
            for &v in step {
                roles[(v - 1) as usize] = VarRole::StateA;
            }
        }
        for step in &state_b {
            for &v in step {
                roles[(v - 1) as usize] = VarRole::StateB;
            }
        }

        VarLayout {
            plaintext,
            key_a,
            key_b,
            state_a,
            state_b,
            leak_flag,
            key_diff,
            padding,
            roles,
        }
    }

    fn num_vars(&self) -> u32 {
        self.roles.len() as u32
    }
}

fn pos(v: u32) -> Literal {
    Literal::positive(v).expect("nonzero variable")
}

fn neg(v: u32) -> Literal {
    Literal::negative(v).expect("nonzero variable")
}

/// `z ↔ a ⊕ b` as the standard 4-clause biconditional.
fn xor_definition(clauses: &mut Vec<Clause>, z: u32, a: u32, b: u32) {
    clauses.push(Clause::new(vec![neg(z), pos(a), pos(b)]).unwrap());
    clauses.push(Clause::new(vec![neg(z), neg(a), neg(b)]).unwrap());
    clauses.push(Clause::new(vec![pos(z), neg(a), pos(b)]).unwrap());
    clauses.push(Clause::new(vec![pos(z), pos(a), neg(b)]).unwrap());
}

/// `z ↔ a` (constant false folded in) or `z ↔ ¬a` (constant true).
fn xor_const_definition(clauses: &mut Vec<Clause>, z: u32, a: u32, constant: bool) {
    if constant {
        clauses.push(Clause::new(vec![pos(z), pos(a)]).unwrap());
        clauses.push(Clause::new(vec![neg(z), neg(a)]).unwrap());
    } else {
        clauses.push(Clause::new(vec![neg(z), pos(a)]).unwrap());
        clauses.push(Clause::new(vec![pos(z), neg(a)]).unwrap());
    }
}

fn direct_not_equal(clauses: &mut Vec<Clause>, a: u32, b: u32) {
    clauses.push(Clause::new(vec![pos(a), pos(b)]).unwrap());
    clauses.push(Clause::new(vec![neg(a), neg(b)]).unwrap());
}

fn direct_equal(clauses: &mut Vec<Clause>, a: u32, b: u32) {
    clauses.push(Clause::new(vec![neg(a), pos(b)]).unwrap());
    clauses.push(Clause::new(vec![pos(a), neg(b)]).unwrap());
}

/// Builds the instance for a spec. Pure: identical specs yield identical
/// DIMACS bytes.
pub fn encode(spec: &LeakageSpec) -> Result<LeakageInstance, EncodeError> {
    spec.validate()?;

    // template row per the table in the module docs
    let (materialize_plaintext, flagged_leak, mut key_diff_flags) =
        match (spec.mode, spec.keys_must_differ) {
            (PropertyMode::NotEqual, false) => (true, false, false),
            (PropertyMode::Equal, false) => (true, true, false),
            (PropertyMode::NotEqual, true) => (true, true, true),
            (PropertyMode::Equal, true) => (false, false, false),
        };
    // "some key bit differs" has no 2-clause form for multi-bit keys
    if spec.keys_must_differ && spec.state_bits > 1 {
        key_diff_flags = true;
    }

    let layout = VarLayout::new(spec, materialize_plaintext, flagged_leak, key_diff_flags);
    let n = layout.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(EncodeError::InfeasibleSpec(format!(
            "{n} variables exceed the {BRUTE_FORCE_MAX_VARS}-variable ground-truth guard"
        )));
    }

    let mut clauses = Vec::new();

    if let Some(p) = layout.plaintext {
        clauses.push(Clause::new(vec![if spec.plaintext { pos(p) } else { neg(p) }]).unwrap());
    }

    // functional state definitions, trace A then trace B
    for (keys, states) in [(&layout.key_a, &layout.state_a), (&layout.key_b, &layout.state_b)] {
        for step in 0..spec.unroll_steps as usize {
            for bit in 0..spec.state_bits as usize {
                let z = states[step][bit];
                if step == 0 {
                    match layout.plaintext {
                        Some(p) => xor_definition(&mut clauses, z, keys[bit], p),
                        None => xor_const_definition(&mut clauses, z, keys[bit], spec.plaintext),
                    }
                } else {
                    xor_definition(&mut clauses, z, states[step - 1][bit], keys[bit]);
                }
            }
        }
    }

    // leakage relation over the observed bit of each trace
    let last = spec.unroll_steps as usize - 1;
    let leak_a = layout.state_a[last][0];
    let leak_b = layout.state_b[last][0];
    match layout.leak_flag {
        Some(d) => {
            xor_definition(&mut clauses, d, leak_a, leak_b);
            clauses.push(
                Clause::new(vec![match spec.mode {
                    PropertyMode::NotEqual => pos(d),
                    PropertyMode::Equal => neg(d),
                }])
                .unwrap(),
            );
        }
        None => match spec.mode {
            PropertyMode::NotEqual => direct_not_equal(&mut clauses, leak_a, leak_b),
            PropertyMode::Equal => direct_equal(&mut clauses, leak_a, leak_b),
        },
    }

    // key-difference constraint
    if spec.keys_must_differ {
        if layout.key_diff.is_empty() {
            direct_not_equal(&mut clauses, layout.key_a[0], layout.key_b[0]);
        } else {
            for (bit, &dk) in layout.key_diff.iter().enumerate() {
                xor_definition(&mut clauses, dk, layout.key_a[bit], layout.key_b[bit]);
            }
            clauses.push(Clause::new(layout.key_diff.iter().map(|&v| pos(v)).collect()).unwrap());
        }
    }

    for &v in &layout.padding {
        clauses.push(Clause::new(vec![neg(v)]).unwrap());
    }

    let cnf = Cnf::new(n, clauses).expect("encoder produced a malformed CNF");
    let count = brute_force(&cnf)
        .expect("variable guard checked above")
        .solution_count
        .expect("brute force always counts");
    let witnesses = enumerate_solutions(&cnf, MAX_RECORDED_WITNESSES).expect("guard checked");

    Ok(LeakageInstance {
        cnf,
        spec: *spec,
        var_roles: layout.roles,
        expected_k: count,
        expected_witnesses: witnesses,
    })
}

/// The four stock benchmark instances, in order:
/// notequal / keys unconstrained (n=5, m=11, K=2),
/// equal / keys unconstrained (n=6, m=14, K=2),
/// notequal / keys differ (n=7, m=19, K=2),
/// and the K=0 control (n=5, m=9).
pub fn benchmark_cases() -> Vec<LeakageInstance> {
    let specs = [
        LeakageSpec {
            state_bits: 1,
            unroll_steps: 1,
            mode: PropertyMode::NotEqual,
            keys_must_differ: false,
            plaintext: true,
            padding_vars: 0,
        },
        LeakageSpec {
            state_bits: 1,
            unroll_steps: 1,
            mode: PropertyMode::Equal,
            keys_must_differ: false,
            plaintext: true,
            padding_vars: 0,
        },
        LeakageSpec {
            state_bits: 1,
            unroll_steps: 1,
            mode: PropertyMode::NotEqual,
            keys_must_differ: true,
            plaintext: true,
            padding_vars: 0,
        },
        LeakageSpec {
            state_bits: 1,
            unroll_steps: 1,
            mode: PropertyMode::Equal,
            keys_must_differ: true,
            plaintext: true,
            padding_vars: 1,
        },
    ];
    specs
        .iter()
        .map(|s| encode(s).expect("stock specs are always feasible"))
        .collect()
}
