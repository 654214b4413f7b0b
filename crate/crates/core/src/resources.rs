//! Closed-form projection of logical quantum resources for hard residual
//! CNF instances, and the classical/quantum crossover thresholds.
//!
//! For a residual with `n_eff` variables, `m` clauses, and `K ≥ 1`
//! witnesses, the search needs `R_Q ≈ (π/4)·√(2^n_eff / K)` oracle
//! queries on a register of `q_log = n_eff + m + 1` logical qubits, at a
//! serial Toffoli-class cost of `C_Q = 6m + 2·n_eff − 5` per step
//! (clause compute/uncompute, global AND compute/uncompute, diffuser
//! multi-control). `T_Q = R_Q·C_Q` is the projected logical operation
//! count, and `α_min = log₂(T_Q)/n_eff` is the classical scaling exponent
//! at which `T_C ≈ 2^{α·n_eff}` breaks even with it. Everything is
//! pre-layout: no routing, error correction, or magic-state costs.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResourceError {
    #[error("residual instance fields must be positive (n_eff={n_eff}, m={m}, k={k})")]
    InvalidInstance { n_eff: u32, m: u64, k: u64 },
    #[error("density must be positive, got {0}")]
    InvalidDensity(f64),
    #[error("no crossover root inside the bracket [{lo}, {hi}] for density {rho}")]
    NoRoot { rho: f64, lo: f64, hi: f64 },
}

/// A hypothetical hard residual instance left after classical
/// preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualInstance {
    pub n_eff: u32,
    pub m: u64,
    pub k: u64,
    /// Clause density `m / n_eff`.
    pub rho: f64,
}

impl ResidualInstance {
    pub fn new(n_eff: u32, m: u64, k: u64) -> Result<Self, ResourceError> {
        if n_eff == 0 || m == 0 || k == 0 {
            return Err(ResourceError::InvalidInstance { n_eff, m, k });
        }
        Ok(ResidualInstance {
            n_eff,
            m,
            k,
            rho: m as f64 / n_eff as f64,
        })
    }

    /// Conservative single-witness instance at a fixed clause density.
    pub fn with_density(n_eff: u32, clauses_per_var: u64) -> Result<Self, ResourceError> {
        ResidualInstance::new(n_eff, u64::from(n_eff) * clauses_per_var, 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceEstimate {
    /// Logical width `n_eff + m + 1`.
    pub q_log: u64,
    /// Near-optimal query count `(π/4)·√(2^n_eff / K)`.
    pub r_q: f64,
    /// Toffoli-class operations per step, `6m + 2·n_eff − 5`.
    pub c_q: u64,
    /// Projected logical operation count `R_Q · C_Q`.
    pub t_q: f64,
    /// Break-even classical exponent `log₂(T_Q) / n_eff`.
    pub alpha_min: f64,
}

/// Exponent beyond which the power terms move to log₂ space to dodge
/// intermediate overflow.
const LOG_SPACE_THRESHOLD: u32 = 60;

/// `log₂ R_Q` without forming `2^n_eff`.
fn log2_r_q(n_eff: u32, k: u64) -> f64 {
    (std::f64::consts::FRAC_PI_4).log2() + (n_eff as f64 - (k as f64).log2()) / 2.0
}

pub fn estimate(inst: &ResidualInstance) -> ResourceEstimate {
    let q_log = u64::from(inst.n_eff) + inst.m + 1;
    let c_q = 6 * inst.m + 2 * u64::from(inst.n_eff) - 5;
    let (r_q, t_q, log2_t_q) = if inst.n_eff > LOG_SPACE_THRESHOLD {
        let lg_r = log2_r_q(inst.n_eff, inst.k);
        let lg_t = lg_r + (c_q as f64).log2();
        (lg_r.exp2(), lg_t.exp2(), lg_t)
    } else {
        let r_q = std::f64::consts::FRAC_PI_4 * (2f64.powi(inst.n_eff as i32) / inst.k as f64).sqrt();
        let t_q = r_q * c_q as f64;
        (r_q, t_q, t_q.log2())
    };
    ResourceEstimate {
        q_log,
        r_q,
        c_q,
        t_q,
        alpha_min: log2_t_q / inst.n_eff as f64,
    }
}

/// Direct-space `T_Q`, exposed so the two computation routes can be
/// compared where both are representable.
pub fn t_q_direct(inst: &ResidualInstance) -> f64 {
    let c_q = (6 * inst.m + 2 * u64::from(inst.n_eff) - 5) as f64;
    std::f64::consts::FRAC_PI_4 * (2f64.powi(inst.n_eff as i32) / inst.k as f64).sqrt() * c_q
}

/// Log-space `T_Q` for the same comparison.
pub fn t_q_log_space(inst: &ResidualInstance) -> f64 {
    let c_q = (6 * inst.m + 2 * u64::from(inst.n_eff) - 5) as f64;
    (log2_r_q(inst.n_eff, inst.k) + c_q.log2()).exp2()
}

/// Solves `2^(n/2) = ρ·n` for the crossover size under the
/// density-scaling cost model, returning the larger root (the point
/// beyond which the square-root search term dominates). Bisection on
/// [1, 200] to 1e-6.
pub fn crossover_density(rho: f64) -> Result<f64, ResourceError> {
    if rho <= 0.0 {
        return Err(ResourceError::InvalidDensity(rho));
    }
    let f = |n: f64| 2f64.powf(n / 2.0) - rho * n;
    let hi = 200.0;
    // f is convex in n with a single minimum; the larger root needs a
    // bracket [argmin, hi] where f(argmin) < 0 < f(hi)
    let argmin = 2.0 * (2.0 * rho / std::f64::consts::LN_2).log2();
    let lo = argmin.clamp(1.0, hi);
    if f(lo) >= 0.0 || f(hi) <= 0.0 {
        return Err(ResourceError::NoRoot { rho, lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Crossover under the fixed-clause-count cost model:
/// `2^n = m·2^(n/2)` gives `n* = 2·log₂ m` exactly.
pub fn crossover_fixed_m(m: u64) -> f64 {
    2.0 * (m as f64).log2()
}

/// Formats a value in 3-significant-digit scientific notation
/// (`2.01e2`), the table convention for the wide-range columns.
pub fn sci3(x: f64) -> String {
    format!("{x:.2e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub n_eff: u32,
    pub m: u64,
    pub q_log: u64,
    pub r_q: String,
    pub c_q: u64,
    pub t_q: String,
    pub alpha_min: String,
}

fn table_rows(rows: &[ResidualInstance]) -> Vec<TableRow> {
    rows.iter()
        .map(|inst| {
            let est = estimate(inst);
            TableRow {
                n_eff: inst.n_eff,
                m: inst.m,
                q_log: est.q_log,
                r_q: sci3(est.r_q),
                c_q: est.c_q,
                t_q: sci3(est.t_q),
                alpha_min: format!("{:.2}", est.alpha_min),
            }
        })
        .collect()
}

const TABLE_HEADER: [&str; 7] = ["n_eff", "m", "q_log", "R_Q", "C_Q", "R_Q*C_Q", "alpha_min"];

/// Aligned-text table; an empty row list yields the header only.
pub fn emit_table(rows: &[ResidualInstance]) -> String {
    let body: Vec<[String; 7]> = table_rows(rows)
        .into_iter()
        .map(|r| {
            [
                r.n_eff.to_string(),
                r.m.to_string(),
                r.q_log.to_string(),
                r.r_q,
                r.c_q.to_string(),
                r.t_q,
                r.alpha_min,
            ]
        })
        .collect();
    let mut widths: Vec<usize> = TABLE_HEADER.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let write_row = |out: &mut String, cells: &[String]| {
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            write!(out, "{cell:>w$}", w = w).unwrap();
        }
        out.push('\n');
    };
    write_row(&mut out, &TABLE_HEADER.map(String::from));
    for row in &body {
        write_row(&mut out, row);
    }
    out
}

/// CSV form of the same table.
pub fn emit_table_csv(rows: &[ResidualInstance]) -> String {
    let mut out = String::from("n_eff,m,q_log,r_q,c_q,t_q,alpha_min\n");
    for r in table_rows(rows) {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n_eff, r.m, r.q_log, r.r_q, r.c_q, r.t_q, r.alpha_min
        )
        .unwrap();
    }
    out
}

/// The five stock rows: `n_eff ∈ {16, 32, 64, 80, 128}` at density
/// `m = 8·n_eff`, conservative `K = 1`.
pub fn stock_rows() -> Vec<ResidualInstance> {
    [16u32, 32, 64, 80, 128]
        .iter()
        .map(|&n| ResidualInstance::with_density(n, 8).expect("stock rows are valid"))
        .collect()
}
