//! CNF formulas, DIMACS I/O, assignment evaluation, and the classical
//! ground-truth solvers (exhaustive enumeration and DPLL).
//!
//! Variables are 1-based as in DIMACS. An [`Assignment`] stores bits
//! 0-based, bit `i` being the value of variable `i + 1`; when an
//! assignment is read as an integer or printed as a bitstring, bit 0 is
//! the most significant bit and the leftmost character.

mod dimacs;
pub(crate) mod solve;

pub use dimacs::{emit_dimacs, parse_dimacs};
pub use solve::{brute_force, dpll_solve, BRUTE_FORCE_MAX_VARS};

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("variable index 0 is reserved")]
    ZeroVariable,
    #[error("clause has no literals")]
    EmptyClause,
    #[error("clause is tautological (contains a variable in both polarities)")]
    Tautology,
    #[error("variable {var} out of range 1..={max}")]
    VariableOutOfRange { var: u32, max: u32 },
    #[error("formula needs at least one variable")]
    NoVariables,
    #[error("assignment has {actual} bits but the formula has {expected} variables")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("{n} variables exceed the exhaustive enumeration limit of {max}")]
    TooManyVariables { n: u32, max: u32 },
    #[error("line {line}: malformed header ({msg})")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: bad token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("line {line}: variable {var} out of range 1..={max}")]
    ParseVariableOutOfRange { line: usize, var: i64, max: u32 },
    #[error("line {line}: tautological clause")]
    TautologyClause { line: usize },
    #[error("line {line}: empty clause")]
    ParseEmptyClause { line: usize },
    #[error("line {line}: clause count mismatch (header says {expected}, found {found})")]
    ClauseCountMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// A signed reference to a 1-based variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    positive: bool,
}

impl Literal {
    pub fn new(var: u32, positive: bool) -> Result<Self, CnfError> {
        if var == 0 {
            return Err(CnfError::ZeroVariable);
        }
        Ok(Literal { var, positive })
    }

    pub fn positive(var: u32) -> Result<Self, CnfError> {
        Literal::new(var, true)
    }

    pub fn negative(var: u32) -> Result<Self, CnfError> {
        Literal::new(var, false)
    }

    /// Builds a literal from a signed DIMACS code (`-3` means `¬x3`).
    pub fn from_dimacs(code: i64) -> Result<Self, CnfError> {
        if code == 0 {
            return Err(CnfError::ZeroVariable);
        }
        Ok(Literal {
            var: code.unsigned_abs() as u32,
            positive: code > 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var);
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negated(self) -> Self {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals. Duplicate literals are dropped at
/// construction; a clause containing `x ∨ ¬x` is rejected so that the
/// stored clause count always equals the count seen by the oracle width
/// formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Result<Self, CnfError> {
        if literals.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        let mut seen: Vec<Literal> = Vec::with_capacity(literals.len());
        for lit in literals {
            if seen.iter().any(|l| l.var == lit.var && l.positive != lit.positive) {
                return Err(CnfError::Tautology);
            }
            if !seen.contains(&lit) {
                seen.push(lit);
            }
        }
        Ok(Clause { literals: seen })
    }

    /// Convenience constructor from signed DIMACS codes.
    pub fn from_dimacs(codes: &[i64]) -> Result<Self, CnfError> {
        let lits = codes
            .iter()
            .map(|&c| Literal::from_dimacs(c))
            .collect::<Result<Vec<_>, _>>()?;
        Clause::new(lits)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_var(&self) -> u32 {
        self.literals.iter().map(|l| l.var).max().unwrap_or(0)
    }
}

/// An immutable CNF formula over `num_vars` Boolean variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if num_vars == 0 {
            return Err(CnfError::NoVariables);
        }
        for clause in &clauses {
            let max = clause.max_var();
            if max > num_vars {
                return Err(CnfError::VariableOutOfRange {
                    var: max,
                    max: num_vars,
                });
            }
        }
        Ok(Cnf { num_vars, clauses })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Returns true iff every clause contains at least one literal made
    /// true by `x`.
    pub fn evaluate(&self, x: &Assignment) -> Result<bool, CnfError> {
        if x.len() != self.num_vars as usize {
            return Err(CnfError::LengthMismatch {
                expected: self.num_vars as usize,
                actual: x.len(),
            });
        }
        Ok(self.clauses.iter().all(|clause| {
            clause
                .literals
                .iter()
                .any(|lit| x.get(lit.var) == lit.positive)
        }))
    }
}

/// A total assignment to the variables of a formula. Bit `i` is the value
/// of variable `i + 1`; bit 0 is the most significant bit of the integer
/// form and the leftmost character of the bitstring form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// Decodes the big-endian integer form: bit 0 is the most significant.
    pub fn from_index(index: u64, n: usize) -> Self {
        let bits = (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect();
        Assignment { bits }
    }

    pub fn to_index(&self) -> u64 {
        let n = self.bits.len();
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << (n - 1 - i)))
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(Assignment { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Value of the 1-based variable `var`.
    pub fn get(&self, var: u32) -> bool {
        self.bits[(var - 1) as usize]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Assignment::from_bitstring(&s)
            .ok_or_else(|| D::Error::custom(format!("invalid bitstring `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SatStatus {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
}

/// Outcome of a classical solve. `solution_count` is populated only by
/// exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub status: SatStatus,
    pub witness: Option<Assignment>,
    pub solution_count: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(code: i64) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    #[test]
    fn literal_rejects_variable_zero() {
        assert_eq!(Literal::new(0, true), Err(CnfError::ZeroVariable));
        assert_eq!(Literal::from_dimacs(0), Err(CnfError::ZeroVariable));
    }

    #[test]
    fn clause_normalizes_duplicates_and_rejects_tautologies() {
        let c = Clause::from_dimacs(&[1, -2, 1]).unwrap();
        assert_eq!(c.literals(), &[lit(1), lit(-2)]);
        assert_eq!(Clause::from_dimacs(&[1, -1]), Err(CnfError::Tautology));
        assert_eq!(Clause::from_dimacs(&[]), Err(CnfError::EmptyClause));
    }

    #[test]
    fn cnf_rejects_out_of_range_variables() {
        let c = Clause::from_dimacs(&[3]).unwrap();
        assert_eq!(
            Cnf::new(2, vec![c]),
            Err(CnfError::VariableOutOfRange { var: 3, max: 2 })
        );
    }

    #[test]
    fn evaluate_basic() {
        let cnf = Cnf::new(
            2,
            vec![
                Clause::from_dimacs(&[1, -2]).unwrap(),
                Clause::from_dimacs(&[-1, 2]).unwrap(),
            ],
        )
        .unwrap();
        assert!(cnf.evaluate(&Assignment::new(vec![true, true])).unwrap());
        assert!(!cnf.evaluate(&Assignment::new(vec![true, false])).unwrap());

        let contradiction = Cnf::new(
            1,
            vec![
                Clause::from_dimacs(&[1]).unwrap(),
                Clause::from_dimacs(&[-1]).unwrap(),
            ],
        )
        .unwrap();
        assert!(!contradiction.evaluate(&Assignment::new(vec![false])).unwrap());
    }

    #[test]
    fn evaluate_rejects_length_mismatch() {
        let cnf = Cnf::new(2, vec![Clause::from_dimacs(&[1]).unwrap()]).unwrap();
        assert_eq!(
            cnf.evaluate(&Assignment::new(vec![true])),
            Err(CnfError::LengthMismatch {
                expected: 2,
                actual: 1
            })
        );
    }

    #[test]
    fn assignment_index_round_trip_is_big_endian() {
        let a = Assignment::from_index(0b10110, 5);
        assert_eq!(a.to_string(), "10110");
        assert_eq!(a.to_index(), 0b10110);
        assert!(a.get(1));
        assert!(!a.get(2));
        // lexicographic order on bits matches integer order
        let b = Assignment::from_index(0b10111, 5);
        assert!(a < b);
    }
}
