//! Statistical UNSAT evidence from aggregated measurement histograms:
//! a Pearson χ² goodness-of-fit test against the uniform distribution,
//! plus a finite-shot frequency bound. With confidence `1 − δ` each true
//! outcome probability lies within `ε = √(ln(1/δ)/(2S))` of its observed
//! frequency, so a histogram whose largest frequency stays below
//! `1/N + ε` bounds the total mass on satisfying assignments by `K/N ≤ ε`.
//! The verdict is evidence, never proof.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::sim::Histogram;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("histogram has zero shots")]
    ZeroShots,
    #[error("delta {0} outside (0, 1]")]
    InvalidDelta(f64),
    #[error("counts sum to {sum} but {shots} shots were declared")]
    ShotMismatch { sum: u64, shots: u64 },
    #[error("outcome `{0}` does not fit in {1} cells")]
    OutcomeOutOfRange(String, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ConsistentWithUnsat,
    SpikeDetected,
}

/// χ² statistic against the uniform distribution over `num_cells`
/// outcomes, with `num_cells − 1` degrees of freedom. Outcomes missing
/// from the map count as zero.
pub fn chi_square_uniform(
    counts: &BTreeMap<String, u64>,
    shots: u64,
    num_cells: u64,
) -> Result<(f64, u64), CertifyError> {
    if shots == 0 {
        return Err(CertifyError::ZeroShots);
    }
    let sum: u64 = counts.values().sum();
    if sum != shots {
        return Err(CertifyError::ShotMismatch { sum, shots });
    }
    if shots < 10 * num_cells {
        log::warn!(
            "chi-square on {shots} shots over {num_cells} cells; expected counts below 10 weaken the test"
        );
    }
    let expected = shots as f64 / num_cells as f64;
    let mut statistic = 0.0;
    let mut observed_cells = 0u64;
    for (outcome, &count) in counts {
        if u64::from_str_radix(outcome, 2).map_or(true, |v| v >= num_cells) {
            return Err(CertifyError::OutcomeOutOfRange(outcome.clone(), num_cells));
        }
        let diff = count as f64 - expected;
        statistic += diff * diff / expected;
        observed_cells += 1;
    }
    // cells with zero observations each contribute E²/E = E
    statistic += (num_cells - observed_cells) as f64 * expected;
    Ok((statistic, num_cells - 1))
}

/// Frequency deviation radius `√(ln(1/δ)/(2S))`. `δ = 1` yields 0.
pub fn hoeffding_radius(shots: u64, delta: f64) -> Result<f64, CertifyError> {
    if shots == 0 {
        return Err(CertifyError::ZeroShots);
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(CertifyError::InvalidDelta(delta));
    }
    Ok(((1.0 / delta).ln() / (2.0 * shots as f64)).sqrt())
}

/// Standard normal quantile (Acklam's rational approximation).
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    debug_assert!(p > 0.0 && p < 1.0);
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// χ² quantile via the Wilson–Hilferty cube-root transform, accurate to
/// well under a unit for the degrees of freedom used here.
pub fn chi_square_quantile(dof: u64, p: f64) -> f64 {
    let k = dof as f64;
    let z = normal_quantile(p);
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t.powi(3)
}

/// Full certification report for one aggregated histogram.
#[derive(Debug, Clone, Serialize)]
pub struct HistogramReport {
    /// Search-register width in bits.
    pub n: u32,
    pub total_shots: u64,
    pub counts: BTreeMap<String, u64>,
    pub chi2_stat: f64,
    pub chi2_dof: u64,
    /// Rejection threshold the statistic was compared against.
    pub chi2_threshold: f64,
    pub p_max: f64,
    /// Acceptance bound `1/N + ε` for the largest frequency.
    pub p_max_threshold: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub verdict: Verdict,
}

impl fmt::Display for HistogramReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verdict {
            Verdict::ConsistentWithUnsat => write!(
                f,
                "consistent with UNSAT at confidence {:.2}: p_max {:.4} <= {:.4} and chi2 {:.2} <= {:.2} ({} dof) — statistical evidence, not proof",
                1.0 - self.delta,
                self.p_max,
                self.p_max_threshold,
                self.chi2_stat,
                self.chi2_threshold,
                self.chi2_dof
            ),
            Verdict::SpikeDetected => write!(
                f,
                "spike detected: p_max {:.4} vs bound {:.4}, chi2 {:.2} vs {:.2} ({} dof) — distribution is not consistent with zero marked states",
                self.p_max,
                self.p_max_threshold,
                self.chi2_stat,
                self.chi2_threshold,
                self.chi2_dof
            ),
        }
    }
}

/// Runs both tests on an aggregated histogram over `2^n` outcomes.
/// `ConsistentWithUnsat` requires the largest observed frequency to stay
/// within `1/N + ε` *and* the χ² statistic not to exceed the `1 − δ`
/// quantile of its null distribution.
pub fn certify(
    counts: &BTreeMap<String, u64>,
    shots: u64,
    n: u32,
    delta: f64,
) -> Result<HistogramReport, CertifyError> {
    let num_cells = 1u64 << n;
    let (chi2_stat, chi2_dof) = chi_square_uniform(counts, shots, num_cells)?;
    let epsilon = hoeffding_radius(shots, delta)?;
    let p_max = counts.values().copied().max().unwrap_or(0) as f64 / shots as f64;
    let p_max_threshold = 1.0 / num_cells as f64 + epsilon;
    let chi2_threshold = chi_square_quantile(chi2_dof, 1.0 - delta);
    let verdict = if p_max <= p_max_threshold && chi2_stat <= chi2_threshold {
        Verdict::ConsistentWithUnsat
    } else {
        Verdict::SpikeDetected
    };
    Ok(HistogramReport {
        n,
        total_shots: shots,
        counts: counts.clone(),
        chi2_stat,
        chi2_dof,
        chi2_threshold,
        p_max,
        p_max_threshold,
        epsilon,
        delta,
        verdict,
    })
}

/// Convenience wrapper for histograms produced by the search engine.
pub fn certify_histogram(hist: &Histogram, delta: f64) -> Result<HistogramReport, CertifyError> {
    certify(&hist.counts, hist.shots, hist.width as u32, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_counts(n_cells: u64, per_cell: u64, width: usize) -> BTreeMap<String, u64> {
        (0..n_cells)
            .map(|i| (format!("{i:0width$b}"), per_cell))
            .collect()
    }

    #[test]
    fn perfectly_uniform_counts_score_zero() {
        let counts = uniform_counts(32, 100, 5);
        let (stat, dof) = chi_square_uniform(&counts, 3200, 32).unwrap();
        assert_eq!(stat, 0.0);
        assert_eq!(dof, 31);
    }

    #[test]
    fn all_mass_on_one_cell() {
        let mut counts = BTreeMap::new();
        counts.insert("00000".to_string(), 32u64);
        let (stat, dof) = chi_square_uniform(&counts, 32, 32).unwrap();
        // 31·(0−1)²/1 + (32−1)²/1 = 992
        assert_eq!(stat, 992.0);
        assert_eq!(dof, 31);
    }

    #[test]
    fn chi_square_rejects_zero_shots_and_bad_maps() {
        let counts = BTreeMap::new();
        assert_eq!(chi_square_uniform(&counts, 0, 32), Err(CertifyError::ZeroShots));
        let mut bad = BTreeMap::new();
        bad.insert("100000".to_string(), 5u64);
        assert!(matches!(
            chi_square_uniform(&bad, 5, 32),
            Err(CertifyError::OutcomeOutOfRange(_, 32))
        ));
    }

    #[test]
    fn hoeffding_radius_values() {
        let eps = hoeffding_radius(20_000, 0.01).unwrap();
        assert!((eps - 0.010729830131446736).abs() < 1e-12);
        assert_eq!(hoeffding_radius(20_000, 1.0).unwrap(), 0.0);
        let eps4 = hoeffding_radius(80_000, 0.01).unwrap();
        assert!((eps4 - eps / 2.0).abs() < 1e-12);
        assert!(hoeffding_radius(100, 0.0).is_err());
        assert!(hoeffding_radius(100, 1.5).is_err());
        assert!(hoeffding_radius(0, 0.5).is_err());
    }

    #[test]
    fn epsilon_is_monotone() {
        let base = hoeffding_radius(1000, 0.01).unwrap();
        assert!(hoeffding_radius(2000, 0.01).unwrap() < base);
        assert!(hoeffding_radius(1000, 0.001).unwrap() > base);
    }

    #[test]
    fn normal_quantile_spot_values() {
        assert!((normal_quantile(0.99) - 2.3263478740).abs() < 1e-6);
        assert!((normal_quantile(0.5)).abs() < 1e-9);
        assert!((normal_quantile(0.975) - 1.9599639845).abs() < 1e-6);
        assert!((normal_quantile(0.01) + 2.3263478740).abs() < 1e-6);
    }

    #[test]
    fn chi_square_quantile_near_reference() {
        // reference value for 31 dof at 0.99 is 52.191
        let q = chi_square_quantile(31, 0.99);
        assert!((q - 52.19).abs() < 0.5, "q = {q}");
    }

    #[test]
    fn flat_histogram_certifies() {
        // the published-shape run: N=32, S=20000, p_max 0.033
        let mut counts = uniform_counts(32, 625, 5);
        *counts.get_mut("00111").unwrap() = 660; // 0.033
        *counts.get_mut("11000").unwrap() = 590;
        let report = certify(&counts, 20_000, 5, 0.01).unwrap();
        assert!((report.epsilon - 0.01073).abs() < 1e-5);
        assert!((report.p_max_threshold - 0.04198).abs() < 1e-4);
        assert_eq!(report.p_max, 0.033);
        assert_eq!(report.verdict, Verdict::ConsistentWithUnsat);
        assert!(report.to_string().contains("consistent with UNSAT"));
    }

    #[test]
    fn spike_is_detected() {
        let mut counts = uniform_counts(32, 516, 5);
        *counts.get_mut("10110").unwrap() = 4004; // ≈ 0.2 of 20 000
        let shots: u64 = counts.values().sum();
        let report = certify(&counts, shots, 5, 0.01).unwrap();
        assert_eq!(report.verdict, Verdict::SpikeDetected);
    }

    #[test]
    fn any_count_past_the_bound_forces_spike_detected() {
        let mut counts = uniform_counts(32, 625, 5);
        let report = certify(&counts, 20_000, 5, 0.01).unwrap();
        assert_eq!(report.verdict, Verdict::ConsistentWithUnsat);

        // grow a single count past (1/N + ε)·S, all else fixed
        *counts.get_mut("00000").unwrap() = 900;
        let shots: u64 = counts.values().sum();
        let report2 = certify(&counts, shots, 5, 0.01).unwrap();
        assert!(report2.p_max > report2.p_max_threshold);
        assert_eq!(report2.verdict, Verdict::SpikeDetected);
    }

    #[test]
    fn report_serializes_with_all_fields() {
        let counts = uniform_counts(4, 100, 2);
        let report = certify(&counts, 400, 2, 0.01).unwrap();
        let json: serde_json::Value = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        for key in [
            "n", "total_shots", "counts", "chi2_stat", "chi2_dof", "p_max", "epsilon", "delta",
            "verdict",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
