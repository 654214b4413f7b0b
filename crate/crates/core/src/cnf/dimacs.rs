//! DIMACS CNF reader and writer. Emits ASCII with LF line endings; the
//! parser also accepts CRLF. Clauses may span lines or share a line, as
//! the format allows.

use super::{Clause, Cnf, CnfError, Literal};

/// Parses DIMACS CNF text: optional `c` comment lines, one
/// `p cnf <vars> <clauses>` header, then zero-terminated clauses.
pub fn parse_dimacs(text: &str) -> Result<Cnf, CnfError> {
    let mut header: Option<(u32, usize)> = None;
    let mut header_line = 0;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    let mut clause_start_line = 0;
    let mut last_line = 0;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw_line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(CnfError::MalformedHeader {
                    line: line_no,
                    msg: "duplicate header".into(),
                });
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(CnfError::MalformedHeader {
                    line: line_no,
                    msg: format!("expected `p cnf <vars> <clauses>`, got `{line}`"),
                });
            }
            let n: u32 = fields[2].parse().map_err(|_| CnfError::MalformedHeader {
                line: line_no,
                msg: format!("bad variable count `{}`", fields[2]),
            })?;
            let m: usize = fields[3].parse().map_err(|_| CnfError::MalformedHeader {
                line: line_no,
                msg: format!("bad clause count `{}`", fields[3]),
            })?;
            if n == 0 {
                return Err(CnfError::MalformedHeader {
                    line: line_no,
                    msg: "variable count must be at least 1".into(),
                });
            }
            header = Some((n, m));
            header_line = line_no;
            continue;
        }

        let (num_vars, _) = header.ok_or(CnfError::MalformedHeader {
            line: line_no,
            msg: "clause before `p cnf` header".into(),
        })?;

        for token in line.split_whitespace() {
            let code: i64 = token.parse().map_err(|_| CnfError::BadToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if code == 0 {
                let start = if clause_start_line == 0 {
                    line_no
                } else {
                    clause_start_line
                };
                let clause = finish_clause(&pending, num_vars, start, line_no)?;
                clauses.push(clause);
                pending.clear();
                clause_start_line = 0;
            } else {
                if pending.is_empty() {
                    clause_start_line = line_no;
                }
                pending.push(code);
            }
        }
    }

    if !pending.is_empty() {
        return Err(CnfError::BadToken {
            line: clause_start_line,
            token: "unterminated clause (missing 0)".into(),
        });
    }
    let (num_vars, expected) = header.ok_or(CnfError::MalformedHeader {
        line: last_line.max(1),
        msg: "missing `p cnf` header".into(),
    })?;
    if clauses.len() != expected {
        return Err(CnfError::ClauseCountMismatch {
            line: header_line,
            expected,
            found: clauses.len(),
        });
    }
    Cnf::new(num_vars, clauses)
}

fn finish_clause(
    codes: &[i64],
    num_vars: u32,
    start_line: usize,
    end_line: usize,
) -> Result<Clause, CnfError> {
    if codes.is_empty() {
        return Err(CnfError::ParseEmptyClause { line: end_line });
    }
    for &code in codes {
        let var = code.unsigned_abs();
        if var > u64::from(num_vars) {
            return Err(CnfError::ParseVariableOutOfRange {
                line: start_line,
                var: code,
                max: num_vars,
            });
        }
    }
    let lits: Vec<Literal> = codes
        .iter()
        .map(|&c| Literal::from_dimacs(c))
        .collect::<Result<_, _>>()?;
    Clause::new(lits).map_err(|e| match e {
        CnfError::Tautology => CnfError::TautologyClause { line: start_line },
        other => other,
    })
}

/// Serializes a formula back to DIMACS. `parse_dimacs(emit_dimacs(c))`
/// is structurally identical to `c`.
pub fn emit_dimacs(cnf: &Cnf) -> String {
    let mut out = String::with_capacity(16 + cnf.num_clauses() * 8);
    out.push_str(&format!("p cnf {} {}\n", cnf.num_vars(), cnf.num_clauses()));
    for clause in cnf.clauses() {
        for lit in clause.literals() {
            out.push_str(&lit.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_clause_formula() {
        let cnf = parse_dimacs("p cnf 2 2\n1 -2 0\n-1 2 0\n").unwrap();
        assert_eq!(cnf.num_vars(), 2);
        assert_eq!(cnf.num_clauses(), 2);
        assert_eq!(cnf.clauses()[0].literals()[0].to_dimacs(), 1);
        assert_eq!(cnf.clauses()[0].literals()[1].to_dimacs(), -2);
    }

    #[test]
    fn parses_single_unit_clause() {
        let cnf = parse_dimacs("p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(cnf.num_vars(), 1);
        assert_eq!(cnf.clauses()[0].literals(), &[Literal::positive(1).unwrap()]);
    }

    #[test]
    fn rejects_variable_out_of_range() {
        let err = parse_dimacs("p cnf 2 1\n3 0\n").unwrap_err();
        assert_eq!(
            err,
            CnfError::ParseVariableOutOfRange {
                line: 2,
                var: 3,
                max: 2
            }
        );
    }

    #[test]
    fn rejects_clause_count_mismatch() {
        let err = parse_dimacs("p cnf 2 3\n1 0\n2 0\n").unwrap_err();
        assert!(matches!(err, CnfError::ClauseCountMismatch { expected: 3, found: 2, .. }));
    }

    #[test]
    fn rejects_tautology_with_line_number() {
        let err = parse_dimacs("p cnf 2 1\nc comment\n1 -1 0\n").unwrap_err();
        assert_eq!(err, CnfError::TautologyClause { line: 3 });
    }

    #[test]
    fn rejects_missing_header() {
        assert!(matches!(
            parse_dimacs("1 0\n"),
            Err(CnfError::MalformedHeader { line: 1, .. })
        ));
    }

    #[test]
    fn accepts_crlf_comments_and_multiline_clauses() {
        let cnf = parse_dimacs("c top\r\np cnf 3 2\r\n1 2\r\n3 0 -1 0\r\n").unwrap();
        assert_eq!(cnf.num_clauses(), 2);
        assert_eq!(cnf.clauses()[0].len(), 3);
    }

    #[test]
    fn emit_empty_formula() {
        let cnf = Cnf::new(2, vec![]).unwrap();
        assert_eq!(emit_dimacs(&cnf), "p cnf 2 0\n");
    }

    #[test]
    fn emit_matches_expected_bytes() {
        let cnf = Cnf::new(1, vec![Clause::from_dimacs(&[1]).unwrap()]).unwrap();
        assert_eq!(emit_dimacs(&cnf), "p cnf 1 1\n1 0\n");
    }

    #[test]
    fn round_trip() {
        let text = "p cnf 4 3\n1 -2 3 0\n-4 0\n2 3 -1 0\n";
        let cnf = parse_dimacs(text).unwrap();
        assert_eq!(parse_dimacs(&emit_dimacs(&cnf)).unwrap(), cnf);
    }
}
