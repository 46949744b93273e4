//! Checkers for the classical and the ideal Silverman–Toeplitz conditions.
//!
//! S1 = T1 (bounded row norms), S2 = T2 with J = Fin (row sums tend to 1),
//! S3 = T3 with E a singleton and I = J = Fin (columns tend to 0). T3 and T4
//! quantify over all members of an ideal; here they are checked one declared
//! set at a time.

use std::collections::BTreeMap;

use serde::Serialize;

use super::RowMatrix;
use crate::density::CheckpointPlan;
use crate::error::{Error, Result};
use crate::ideal::{in_ideal, IdealSpec};
use crate::sequence::{check_eps_grid, verify_ideal_limit, verify_ideal_limit_values, IdealLimitReport, LazySequence};
use crate::set::SetGen;
use crate::verdict::{Verdict, Witness};

/// Row norms above this value count as evidence of unboundedness.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    S1,
    S2,
    S3,
    T1,
    T2,
    T3,
    T4,
    /// `lim_n Σ_{k<=m} |a_{n,k}| = 0` for a fixed `m`.
    Sliding,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Evidence {
    #[serde(rename_all = "camelCase")]
    RowNorms {
        sup: f64,
        sup_row: u64,
        /// Running maximum before the final quarter of rows.
        window_sup: f64,
        trace: Vec<(u64, f64)>,
    },
    Limit { report: IdealLimitReport },
    Columns { reports: Vec<ConditionReport> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub matrix: String,
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub params: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl ConditionReport {
    fn limit(
        condition: Condition,
        matrix: &RowMatrix,
        report: IdealLimitReport,
        params: BTreeMap<String, String>,
        warnings: Vec<String>,
    ) -> Self {
        ConditionReport {
            condition,
            matrix: matrix.to_string(),
            verdict: report.verdict.clone(),
            evidence: Evidence::Limit { report },
            params,
            warnings,
        }
    }

    /// The ideal-limit evidence, for conditions checked through one.
    pub fn limit_report(&self) -> Option<&IdealLimitReport> {
        match &self.evidence {
            Evidence::Limit { report } => Some(report),
            _ => None,
        }
    }
}

fn params<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// `sup_n Σ_k |a_{n,k}| < ∞`, read off rows `1..=max_n`.
///
/// Satisfied when the running maximum does not grow over the final quarter
/// of rows; violated at the first row whose norm exceeds
/// [`DIVERGENCE_THRESHOLD`].
pub fn check_t1(a: &RowMatrix, max_n: u64) -> Result<ConditionReport> {
    if max_n == 0 {
        return Err(Error::argument("maxN must be at least 1"));
    }
    let norms = a.abs_row_sums(max_n)?;
    let quarter_start = max_n - max_n / 4;
    let mut running = 0.0f64;
    let mut sup_row = 1;
    let mut window_sup = 0.0;
    let mut running_at = Vec::with_capacity(norms.len());
    for (i, &v) in norms.iter().enumerate() {
        let n = i as u64 + 1;
        if v > running {
            running = v;
            sup_row = n;
        }
        if n == quarter_start {
            window_sup = running;
        }
        running_at.push(running);
    }
    let pts = CheckpointPlan::default().points(max_n, &[quarter_start])?;
    let trace = pts.iter().map(|&n| (n, running_at[n as usize - 1])).collect();
    let verdict = if let Some(i) = norms.iter().position(|&v| v > DIVERGENCE_THRESHOLD) {
        Verdict::Violated {
            witness: Witness::Row(i as u64 + 1),
        }
    } else if running <= window_sup {
        Verdict::Satisfied
    } else {
        Verdict::inconclusive(format!(
            "running max of row norms grew from {window_sup} to {running} in the final quarter"
        ))
    };
    Ok(ConditionReport {
        condition: Condition::T1,
        matrix: a.to_string(),
        verdict,
        evidence: Evidence::RowNorms {
            sup: running,
            sup_row,
            window_sup,
            trace,
        },
        params: params([("maxN", max_n.to_string())]),
        warnings: Vec::new(),
    })
}

pub fn check_s1(a: &RowMatrix, max_n: u64) -> Result<ConditionReport> {
    let mut r = check_t1(a, max_n)?;
    r.condition = Condition::S1;
    Ok(r)
}

/// `J-lim_n Σ_k a_{n,k} = 1`.
pub fn check_t2(
    a: &RowMatrix,
    j: &IdealSpec,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<ConditionReport> {
    check_eps_grid(eps_grid)?;
    let sums = a.row_sums(max_n)?;
    let report = verify_ideal_limit_values(&sums, 1.0, j, eps_grid, zero_tol)?;
    Ok(ConditionReport::limit(
        Condition::T2,
        a,
        report,
        params([("J", j.to_string()), ("maxN", max_n.to_string())]),
        Vec::new(),
    ))
}

pub fn check_s2(a: &RowMatrix, max_n: u64, eps_grid: &[f64], zero_tol: f64) -> Result<ConditionReport> {
    let mut r = check_t2(a, &IdealSpec::Fin, max_n, eps_grid, zero_tol)?;
    r.condition = Condition::S2;
    Ok(r)
}

/// `J-lim_n Σ_{k ∈ E} |a_{n,k}| = 0` for one declared member `E` of `I`.
pub fn check_t3(
    a: &RowMatrix,
    e: &SetGen,
    i: &IdealSpec,
    j: &IdealSpec,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<ConditionReport> {
    check_eps_grid(eps_grid)?;
    let mut warnings = Vec::new();
    let membership = in_ideal(e, i, max_n, zero_tol)?;
    if membership.is_violated() {
        warnings.push(format!(
            "{e} does not belong to {i} at this scale; the check is not meaningful"
        ));
    }
    let sums = a.abs_row_sums_over(e, max_n)?;
    let report = verify_ideal_limit_values(&sums, 0.0, j, eps_grid, zero_tol)?;
    Ok(ConditionReport::limit(
        Condition::T3,
        a,
        report,
        params([
            ("E", e.to_string()),
            ("I", i.to_string()),
            ("J", j.to_string()),
            ("maxN", max_n.to_string()),
        ]),
        warnings,
    ))
}

/// Columns `1..=columns` tend to zero (S3 on each singleton).
pub fn check_s3(
    a: &RowMatrix,
    columns: u64,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<ConditionReport> {
    let reports = (1..=columns)
        .map(|k| {
            let mut r = check_t3(
                a,
                &SetGen::finite(vec![k])?,
                &IdealSpec::Fin,
                &IdealSpec::Fin,
                max_n,
                eps_grid,
                zero_tol,
            )?;
            r.condition = Condition::S3;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = Verdict::all(reports.iter().map(|r| r.verdict.clone()));
    Ok(ConditionReport {
        condition: Condition::S3,
        matrix: a.to_string(),
        verdict,
        evidence: Evidence::Columns { reports },
        params: params([("columns", columns.to_string()), ("maxN", max_n.to_string())]),
        warnings: Vec::new(),
    })
}

/// `lim_n Σ_{k <= m} |a_{n,k}| = 0` for a fixed `m`.
pub fn check_sliding(
    a: &RowMatrix,
    m: u64,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<ConditionReport> {
    let mut r = check_t3(
        a,
        &SetGen::range(1, m)?,
        &IdealSpec::Fin,
        &IdealSpec::Fin,
        max_n,
        eps_grid,
        zero_tol,
    )?;
    r.condition = Condition::Sliding;
    Ok(r)
}

/// Nonnegative form: `J-lim_n Σ_{k ∈ I*} a_{n,k} = 1` for a declared set of
/// the dual filter.
pub fn check_t4(
    a: &RowMatrix,
    istar: &SetGen,
    i: &IdealSpec,
    j: &IdealSpec,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<ConditionReport> {
    check_eps_grid(eps_grid)?;
    if let Some((row, col, value)) = a.first_negative_entry(max_n)? {
        return Err(Error::NegativeEntry { row, col, value });
    }
    let mut warnings = Vec::new();
    let complement = istar.clone().complement();
    if !in_ideal(&complement, i, max_n, zero_tol)?.is_satisfied() {
        warnings.push(format!(
            "complement of {istar} is not shown to belong to {i}; it may not be in the dual filter"
        ));
    }
    let sums = a.row_sums_over(istar, max_n)?;
    let report = verify_ideal_limit_values(&sums, 1.0, j, eps_grid, zero_tol)?;
    Ok(ConditionReport::limit(
        Condition::T4,
        a,
        report,
        params([
            ("Istar", istar.to_string()),
            ("I", i.to_string()),
            ("J", j.to_string()),
            ("maxN", max_n.to_string()),
        ]),
        warnings,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuitePair {
    pub sequence: LazySequence,
    pub eta: f64,
}

impl SuitePair {
    pub fn new(sequence: LazySequence, eta: f64) -> Self {
        SuitePair { sequence, eta }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairReport {
    pub sequence: String,
    pub eta: f64,
    pub output: IdealLimitReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RegularityReport {
    pub matrix: String,
    pub ideal_i: IdealSpec,
    pub ideal_j: IdealSpec,
    pub pairs: Vec<PairReport>,
    pub t1: ConditionReport,
    pub t2: ConditionReport,
    /// T3 on each declared member of I. Regularity does not require these
    /// to pass unless J = Fin or the matrix is nonnegative.
    pub t3: Vec<ConditionReport>,
    /// Conjunction of the direct `J-lim Ax = η` checks.
    pub mapping_verdict: Verdict,
    /// Direct checks together with T1 and T2.
    pub verdict: Verdict,
    pub note: String,
}

/// Direct test of `(I, J)`-regularity on a suite of bounded `I`-convergent
/// sequences, reported alongside T1, T2 and per-set T3.
#[allow(clippy::too_many_arguments)]
pub fn check_regularity(
    a: &RowMatrix,
    i: &IdealSpec,
    j: &IdealSpec,
    suite: &[SuitePair],
    family: &[SetGen],
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<RegularityReport> {
    let mut pairs = Vec::with_capacity(suite.len());
    for pair in suite {
        let x = &pair.sequence;
        if x.declared_bound.is_none() {
            return Err(Error::Suite(format!("{x} has no declared bound")));
        }
        let input = verify_ideal_limit(x, pair.eta, i, max_n, eps_grid, zero_tol)?;
        if !input.verdict.is_satisfied() {
            return Err(Error::Suite(format!(
                "{x} -> {} in {i} is {}",
                pair.eta, input.verdict
            )));
        }
        let ax = a.apply_all(x, max_n)?;
        let output = verify_ideal_limit_values(&ax, pair.eta, j, eps_grid, zero_tol)?;
        pairs.push(PairReport {
            sequence: x.to_string(),
            eta: pair.eta,
            output,
        });
    }
    let t1 = check_t1(a, max_n)?;
    let t2 = check_t2(a, j, max_n, eps_grid, zero_tol)?;
    let t3 = family
        .iter()
        .map(|e| check_t3(a, e, i, j, max_n, eps_grid, zero_tol))
        .collect::<Result<Vec<_>>>()?;
    let mapping_verdict = Verdict::all(pairs.iter().map(|p| p.output.verdict.clone()));
    let verdict = Verdict::all([
        mapping_verdict.clone(),
        t1.verdict.clone(),
        t2.verdict.clone(),
    ]);
    Ok(RegularityReport {
        matrix: a.to_string(),
        ideal_i: i.clone(),
        ideal_j: j.clone(),
        pairs,
        t1,
        t2,
        t3,
        mapping_verdict,
        verdict,
        note: "finite-prefix evidence on the listed sequences and sets, not a proof".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::DEFAULT_ZERO_TOL;
    use crate::sequence::{SeqGen, DEFAULT_EPS_GRID};

    const EPS: [f64; 3] = DEFAULT_EPS_GRID;
    const TOL: f64 = DEFAULT_ZERO_TOL;

    #[test]
    fn cesaro_satisfies_classical_conditions() {
        let c = RowMatrix::Cesaro;
        let s1 = check_s1(&c, 100_000).unwrap();
        assert!(s1.verdict.is_satisfied());
        match s1.evidence {
            Evidence::RowNorms { sup, .. } => assert_eq!(sup, 1.0),
            _ => unreachable!(),
        }
        assert!(check_s2(&c, 100_000, &EPS, TOL).unwrap().verdict.is_satisfied());
        assert!(check_s3(&c, 10, 100_000, &EPS, TOL).unwrap().verdict.is_satisfied());
    }

    #[test]
    fn reductions_agree() {
        let c = RowMatrix::Cesaro;
        let t1 = check_t1(&c, 5000).unwrap();
        let s1 = check_s1(&c, 5000).unwrap();
        assert_eq!(t1.verdict, s1.verdict);
        assert_eq!(t1.evidence, s1.evidence);
        let t2 = check_t2(&c, &IdealSpec::Fin, 5000, &EPS, TOL).unwrap();
        let s2 = check_s2(&c, 5000, &EPS, TOL).unwrap();
        assert_eq!(t2.evidence, s2.evidence);
        let t3 = check_t3(
            &c,
            &SetGen::finite(vec![5]).unwrap(),
            &IdealSpec::Fin,
            &IdealSpec::Fin,
            5000,
            &EPS,
            TOL,
        )
        .unwrap();
        let s3 = check_s3(&c, 5, 5000, &EPS, TOL).unwrap();
        match s3.evidence {
            Evidence::Columns { reports } => assert_eq!(reports[4].evidence, t3.evidence),
            _ => unreachable!(),
        }
    }

    #[test]
    fn square_spike_diagonal_violates_t1() {
        let d = RowMatrix::Diagonal(LazySequence::square_spikes());
        let r = check_t1(&d, 1_100_000).unwrap();
        // 1001^2 is the first square above 10^6
        assert_eq!(
            r.verdict,
            Verdict::Violated {
                witness: Witness::Row(1001 * 1001)
            }
        );
    }

    #[test]
    fn t3_on_identity_and_squares() {
        let z = IdealSpec::AsymptoticZero;
        let r = check_t3(&RowMatrix::Identity, &SetGen::Squares, &z, &z, 100_000, &EPS, TOL).unwrap();
        assert!(r.verdict.is_satisfied());
        assert!(r.warnings.is_empty());
        let r = check_t3(&RowMatrix::Identity, &SetGen::evens(), &z, &z, 100_000, &EPS, TOL).unwrap();
        assert!(r.verdict.is_violated());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn t4_cases() {
        let z = IdealSpec::AsymptoticZero;
        let nonsquares = SetGen::Squares.complement();
        let r = check_t4(&RowMatrix::Cesaro, &nonsquares, &z, &z, 100_000, &EPS, TOL).unwrap();
        assert!(r.verdict.is_satisfied());
        let r = check_t4(&RowMatrix::Identity, &SetGen::All, &z, &z, 10_000, &EPS, TOL).unwrap();
        assert!(r.verdict.is_satisfied());
        let r = check_t4(&RowMatrix::Cesaro, &SetGen::evens(), &z, &z, 100_000, &EPS, TOL).unwrap();
        assert!(r.verdict.is_violated());
        assert_eq!(r.warnings.len(), 1);
        let neg = RowMatrix::Diagonal(LazySequence::bounded(SeqGen::Alternating, 1.0));
        let err = check_t4(&neg, &SetGen::All, &z, &z, 100, &EPS, TOL).unwrap_err();
        assert!(matches!(err, Error::NegativeEntry { row: 1, col: 1, .. }));
    }

    #[test]
    fn regularity_of_identity_and_cesaro() {
        let z = IdealSpec::AsymptoticZero;
        let suite = [
            SuitePair::new(LazySequence::indicator(SetGen::Squares), 0.0),
            SuitePair::new(LazySequence::constant(1.0), 1.0),
        ];
        let r = check_regularity(&RowMatrix::Identity, &z, &z, &suite, &[SetGen::Squares], 100_000, &EPS, TOL)
            .unwrap();
        assert!(r.verdict.is_satisfied());
        assert!(r.t3.iter().all(|t| t.verdict.is_satisfied()));

        let fin = IdealSpec::Fin;
        let suite = [SuitePair::new(LazySequence::bounded(SeqGen::AlternatingHarmonic, 1.0), 0.0)];
        let r = check_regularity(&RowMatrix::Cesaro, &fin, &fin, &suite, &[], 100_000, &EPS, TOL).unwrap();
        assert!(r.verdict.is_satisfied());
    }

    #[test]
    fn regularity_rejects_non_convergent_inputs() {
        let z = IdealSpec::AsymptoticZero;
        let suite = [SuitePair::new(LazySequence::indicator(SetGen::evens()), 0.0)];
        let err = check_regularity(&RowMatrix::Identity, &z, &z, &suite, &[], 10_000, &EPS, TOL).unwrap_err();
        assert!(matches!(err, Error::Suite(_)));
        let unbounded = [SuitePair::new(LazySequence::new(SeqGen::Const(1.0)), 1.0)];
        assert!(check_regularity(&RowMatrix::Identity, &z, &z, &unbounded, &[], 100, &EPS, TOL).is_err());
    }

    #[test]
    fn sliding_masses_vanish_for_cesaro() {
        for m in [1, 5, 20] {
            let r = check_sliding(&RowMatrix::Cesaro, m, 100_000, &EPS, TOL).unwrap();
            assert!(r.verdict.is_satisfied(), "m = {m}");
        }
    }
}
