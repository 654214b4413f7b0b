//! Classical ground-truth solvers: exhaustive enumeration (exact model
//! count) and a DPLL decision procedure used as the correctness baseline
//! for the quantum search path.

use rayon::prelude::*;

use super::{Assignment, Cnf, CnfError, SatStatus, SolveResult};

/// Enumeration guard; beyond this the search space is too large to sweep.
pub const BRUTE_FORCE_MAX_VARS: u32 = 24;

/// Bitmask form of a clause over the big-endian assignment index space:
/// variable `v` maps to index bit `n - v`.
#[derive(Clone, Copy)]
pub(crate) struct ClauseMask {
    pos: u64,
    neg: u64,
}

pub(crate) fn clause_masks(cnf: &Cnf) -> Vec<ClauseMask> {
    let n = cnf.num_vars();
    cnf.clauses()
        .iter()
        .map(|clause| {
            let mut pos = 0u64;
            let mut neg = 0u64;
            for lit in clause.literals() {
                let bit = 1u64 << (n - lit.var());
                if lit.is_positive() {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            ClauseMask { pos, neg }
        })
        .collect()
}

#[inline]
pub(crate) fn satisfies(masks: &[ClauseMask], index: u64) -> bool {
    masks
        .iter()
        .all(|m| (index & m.pos) != 0 || (!index & m.neg) != 0)
}

/// Sweeps all `2^n` assignments, returning the exact solution count and
/// the lexicographically smallest witness (bit 0 most significant).
pub fn brute_force(cnf: &Cnf) -> Result<SolveResult, CnfError> {
    let n = cnf.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(CnfError::TooManyVariables {
            n,
            max: BRUTE_FORCE_MAX_VARS,
        });
    }
    let masks = clause_masks(cnf);
    let total = 1u64 << n;

    // Partitioned sweep; count and min-index reduce deterministically
    // regardless of worker count.
    const CHUNK: u64 = 1 << 16;
    let num_chunks = total.div_ceil(CHUNK);
    let (count, min_index) = (0..num_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut count = 0u64;
            let mut min_index = u64::MAX;
            for index in lo..hi {
                if satisfies(&masks, index) {
                    count += 1;
                    if index < min_index {
                        min_index = index;
                    }
                }
            }
            (count, min_index)
        })
        .reduce(
            || (0, u64::MAX),
            |a, b| (a.0 + b.0, a.1.min(b.1)),
        );

    Ok(if count > 0 {
        SolveResult {
            status: SatStatus::Sat,
            witness: Some(Assignment::from_index(min_index, n as usize)),
            solution_count: Some(count),
        }
    } else {
        SolveResult {
            status: SatStatus::Unsat,
            witness: None,
            solution_count: Some(0),
        }
    })
}

/// Enumerates the full satisfying set in lexicographic order, up to `cap`
/// entries. Same guard as [`brute_force`].
pub fn enumerate_solutions(cnf: &Cnf, cap: usize) -> Result<Vec<Assignment>, CnfError> {
    let n = cnf.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(CnfError::TooManyVariables {
            n,
            max: BRUTE_FORCE_MAX_VARS,
        });
    }
    let masks = clause_masks(cnf);
    let mut out = Vec::new();
    for index in 0..(1u64 << n) {
        if satisfies(&masks, index) {
            out.push(Assignment::from_index(index, n as usize));
            if out.len() == cap {
                break;
            }
        }
    }
    Ok(out)
}

/// DPLL with unit propagation, pure-literal elimination, and
/// first-unassigned-variable branching. Decision procedure only: no
/// clause learning, no model counting.
pub fn dpll_solve(cnf: &Cnf) -> SolveResult {
    let n = cnf.num_vars() as usize;
    let mut assignment: Vec<Option<bool>> = vec![None; n];
    if dpll(cnf, &mut assignment) {
        // unassigned variables are free; fix them to 0 for determinism
        let bits: Vec<bool> = assignment.iter().map(|v| v.unwrap_or(false)).collect();
        let witness = Assignment::new(bits);
        debug_assert!(cnf.evaluate(&witness).unwrap());
        SolveResult {
            status: SatStatus::Sat,
            witness: Some(witness),
            solution_count: None,
        }
    } else {
        SolveResult {
            status: SatStatus::Unsat,
            witness: None,
            solution_count: None,
        }
    }
}

/// Clause state under a partial assignment.
enum ClauseState {
    Satisfied,
    Conflict,
    Unit(u32, bool),
    Open,
}

fn clause_state(clause: &super::Clause, assignment: &[Option<bool>]) -> ClauseState {
    let mut unassigned: Option<(u32, bool)> = None;
    let mut open = 0;
    for lit in clause.literals() {
        match assignment[(lit.var() - 1) as usize] {
            Some(value) => {
                if value == lit.is_positive() {
                    return ClauseState::Satisfied;
                }
            }
            None => {
                open += 1;
                if unassigned.is_none() {
                    unassigned = Some((lit.var(), lit.is_positive()));
                }
            }
        }
    }
    match (open, unassigned) {
        (0, _) => ClauseState::Conflict,
        (1, Some((var, value))) => ClauseState::Unit(var, value),
        _ => ClauseState::Open,
    }
}

fn dpll(cnf: &Cnf, assignment: &mut Vec<Option<bool>>) -> bool {
    // unit propagation to fixpoint
    loop {
        let mut changed = false;
        let mut all_satisfied = true;
        for clause in cnf.clauses() {
            match clause_state(clause, assignment) {
                ClauseState::Conflict => return false,
                ClauseState::Unit(var, value) => {
                    assignment[(var - 1) as usize] = Some(value);
                    changed = true;
                    all_satisfied = false;
                }
                ClauseState::Open => all_satisfied = false,
                ClauseState::Satisfied => {}
            }
        }
        if all_satisfied {
            return true;
        }
        if !changed {
            break;
        }
    }

    // pure-literal elimination over clauses not yet satisfied
    let n = assignment.len();
    let mut seen_pos = vec![false; n];
    let mut seen_neg = vec![false; n];
    for clause in cnf.clauses() {
        if matches!(clause_state(clause, assignment), ClauseState::Satisfied) {
            continue;
        }
        for lit in clause.literals() {
            let i = (lit.var() - 1) as usize;
            if assignment[i].is_none() {
                if lit.is_positive() {
                    seen_pos[i] = true;
                } else {
                    seen_neg[i] = true;
                }
            }
        }
    }
    let mut assigned_pure = false;
    for i in 0..n {
        if assignment[i].is_none() && (seen_pos[i] ^ seen_neg[i]) {
            assignment[i] = Some(seen_pos[i]);
            assigned_pure = true;
        }
    }
    if assigned_pure {
        let saved = assignment.clone();
        if dpll(cnf, assignment) {
            return true;
        }
        *assignment = saved;
        return false;
    }

    // branch on the first unassigned variable
    let Some(branch) = assignment.iter().position(|v| v.is_none()) else {
        // every variable assigned and some clause still open: impossible,
        // but be safe and evaluate
        let bits: Vec<bool> = assignment.iter().map(|v| v.unwrap()).collect();
        return cnf.evaluate(&Assignment::new(bits)).unwrap();
    };
    for value in [false, true] {
        let saved = assignment.clone();
        assignment[branch] = Some(value);
        if dpll(cnf, assignment) {
            return true;
        }
        *assignment = saved;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Clause;

    fn cnf(n: u32, clauses: &[&[i64]]) -> Cnf {
        Cnf::new(
            n,
            clauses
                .iter()
                .map(|c| Clause::from_dimacs(c).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn brute_force_counts_single_clause() {
        // x1 ∨ x2: 01, 10, 11 satisfy; lexicographically smallest is 01
        let result = brute_force(&cnf(2, &[&[1, 2]])).unwrap();
        assert_eq!(result.status, SatStatus::Sat);
        assert_eq!(result.solution_count, Some(3));
        assert_eq!(result.witness.unwrap().to_string(), "01");
    }

    #[test]
    fn brute_force_detects_contradiction() {
        let result = brute_force(&cnf(1, &[&[1], &[-1]])).unwrap();
        assert_eq!(result.status, SatStatus::Unsat);
        assert_eq!(result.solution_count, Some(0));
        assert!(result.witness.is_none());
    }

    #[test]
    fn brute_force_guards_variable_count() {
        let big = Cnf::new(25, vec![]).unwrap();
        assert_eq!(
            brute_force(&big).unwrap_err(),
            CnfError::TooManyVariables { n: 25, max: 24 }
        );
    }

    #[test]
    fn brute_force_no_clauses_counts_everything() {
        let result = brute_force(&cnf(3, &[])).unwrap();
        assert_eq!(result.solution_count, Some(8));
        assert_eq!(result.witness.unwrap().to_string(), "000");
    }

    #[test]
    fn dpll_agrees_on_contradiction() {
        assert_eq!(dpll_solve(&cnf(1, &[&[1], &[-1]])).status, SatStatus::Unsat);
    }

    #[test]
    fn dpll_witness_satisfies() {
        let f = cnf(3, &[&[1, 2], &[-1, 3], &[-2, -3]]);
        let result = dpll_solve(&f);
        assert_eq!(result.status, SatStatus::Sat);
        assert!(f.evaluate(&result.witness.unwrap()).unwrap());
    }

    #[test]
    fn enumerate_matches_count() {
        let f = cnf(3, &[&[1, 2], &[-1, 3]]);
        let all = enumerate_solutions(&f, usize::MAX).unwrap();
        let count = brute_force(&f).unwrap().solution_count.unwrap();
        assert_eq!(all.len() as u64, count);
        for w in &all {
            assert!(f.evaluate(w).unwrap());
        }
        // lexicographic order
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }
}
