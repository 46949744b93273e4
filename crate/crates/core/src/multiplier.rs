//! Multipliers between bounded ideal-null sequence spaces, checked directly
//! and through the diagonal matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::{in_ideal, IdealSpec};
use crate::matrix::{check_t1, check_t3, ConditionReport, RowMatrix};
use crate::report::{display, display_vec};
use crate::sequence::{check_eps_grid, verify_ideal_limit, IdealLimitReport, LazySequence};
use crate::set::SetGen;
use crate::verdict::{Verdict, Witness};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MultiplierCase {
    #[serde(serialize_with = "display")]
    pub sequence: LazySequence,
    /// Declared members of `I`.
    #[serde(serialize_with = "display_vec")]
    pub family: Vec<SetGen>,
    pub ideal_j: IdealSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SupportEntry {
    #[serde(serialize_with = "display")]
    pub set: SetGen,
    pub limit: IdealLimitReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MultiplierReport {
    pub case: MultiplierCase,
    /// `s ∈ ℓ∞`: the declared bound holds on the prefix, or T1 of `diag(s)`
    /// when no bound is declared.
    pub bounded: Verdict,
    /// `J-lim s 1_E = 0` for each family member; empty when `s` is unbounded.
    pub per_set: Vec<SupportEntry>,
    pub t1: ConditionReport,
    pub t3: Vec<ConditionReport>,
    /// T1 and every T3 of the diagonal matrix.
    pub diagonal_verdict: Verdict,
    pub verdict: Verdict,
}

/// `s ∈ m(c_0(I) ∩ ℓ∞, c_0(J) ∩ ℓ∞)` on `[1, max_n]`.
///
/// A declared bound that fails on the prefix makes the case violated. The
/// direct verdict is cross-checked against T1 and T3 of `diag(s)`; a decisive
/// disagreement is a consistency error.
pub fn multiplier_check(
    case: &MultiplierCase,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<MultiplierReport> {
    check_eps_grid(eps_grid)?;
    let s = &case.sequence;
    let j = &case.ideal_j;
    let d = RowMatrix::Diagonal(s.clone().without_bound());
    let t1 = check_t1(&d, max_n)?;
    let bounded = match (s.declared_bound, s.prefix(max_n)) {
        (Some(_), Ok(_)) => Verdict::Satisfied,
        (Some(_), Err(Error::BoundViolated { index, .. })) => Verdict::Violated {
            witness: Witness::Index(index),
        },
        (_, Err(e)) => return Err(e),
        (None, Ok(_)) => t1.verdict.clone(),
    };
    let t3 = case
        .family
        .iter()
        .map(|e| check_t3(&d, e, j, j, max_n, eps_grid, zero_tol))
        .collect::<Result<Vec<_>>>()?;
    let diagonal_verdict =
        Verdict::all(std::iter::once(t1.verdict.clone()).chain(t3.iter().map(|r| r.verdict.clone())));
    let per_set = if bounded.is_violated() {
        Vec::new()
    } else {
        case.family
            .iter()
            .map(|e| {
                let x = s.clone().without_bound().restricted_to(e.clone());
                Ok(SupportEntry {
                    set: e.clone(),
                    limit: verify_ideal_limit(&x, 0.0, j, max_n, eps_grid, zero_tol)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let verdict = Verdict::all(
        std::iter::once(bounded.clone()).chain(per_set.iter().map(|e| e.limit.verdict.clone())),
    );
    let contradicts = (verdict.is_satisfied() && diagonal_verdict.is_violated())
        || (verdict.is_violated() && diagonal_verdict.is_satisfied());
    if contradicts {
        return Err(Error::Consistency(format!(
            "multiplier {s}: direct check {} but diagonal matrix {}",
            verdict.label(),
            diagonal_verdict.label()
        )));
    }
    Ok(MultiplierReport {
        case: case.clone(),
        bounded,
        per_set,
        t1,
        t3,
        diagonal_verdict,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InclusionReport {
    #[serde(serialize_with = "display_vec")]
    pub family: Vec<SetGen>,
    pub ideal_j: IdealSpec,
    pub cases: Vec<MultiplierReport>,
    pub verdict: Verdict,
}

/// Every bounded sequence multiplies `c_0(I) ∩ ℓ∞` into `c_0(J) ∩ ℓ∞` when
/// `I ⊆ J`; here `I` is presented by a family shown to lie in `J`.
pub fn corollary_inclusion_suite(
    family: &[SetGen],
    j: &IdealSpec,
    samples: &[LazySequence],
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<InclusionReport> {
    for e in family {
        let v = in_ideal(e, j, max_n, zero_tol)?;
        if !v.is_satisfied() {
            return Err(Error::Precondition(format!(
                "{e} is not shown to belong to {j}: {v}"
            )));
        }
    }
    let mut cases = Vec::with_capacity(samples.len());
    for s in samples {
        if s.declared_bound.is_none() {
            return Err(Error::Precondition(format!("{s} has no declared bound")));
        }
        let case = MultiplierCase {
            sequence: s.clone(),
            family: family.to_vec(),
            ideal_j: j.clone(),
        };
        let report = multiplier_check(&case, max_n, eps_grid, zero_tol)?;
        if !report.verdict.is_satisfied() {
            return Err(Error::Consistency(format!(
                "bounded sample {s} failed the multiplier check: {}",
                report.verdict
            )));
        }
        cases.push(report);
    }
    Ok(InclusionReport {
        family: family.to_vec(),
        ideal_j: j.clone(),
        cases,
        verdict: Verdict::Satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::DEFAULT_ZERO_TOL;
    use crate::sequence::{SeqGen, DEFAULT_EPS_GRID};

    const EPS: [f64; 3] = DEFAULT_EPS_GRID;
    const TOL: f64 = DEFAULT_ZERO_TOL;

    fn case(s: LazySequence, family: Vec<SetGen>) -> MultiplierCase {
        MultiplierCase {
            sequence: s,
            family,
            ideal_j: IdealSpec::AsymptoticZero,
        }
    }

    #[test]
    fn constant_one_on_finite_sets() {
        let c = case(
            LazySequence::constant(1.0).with_bound(1.0),
            vec![SetGen::range(1, 40).unwrap(), SetGen::finite(vec![7, 99]).unwrap()],
        );
        let r = multiplier_check(&c, 50_000, &EPS, TOL).unwrap();
        assert!(r.verdict.is_satisfied());
        assert!(r.diagonal_verdict.is_satisfied());
    }

    #[test]
    fn constant_one_on_evens() {
        let c = case(LazySequence::constant(1.0).with_bound(1.0), vec![SetGen::evens()]);
        let r = multiplier_check(&c, 50_000, &EPS, TOL).unwrap();
        assert!(r.verdict.is_violated());
        assert!(r.diagonal_verdict.is_violated());
    }

    #[test]
    fn square_spikes_break_the_bound() {
        let c = case(LazySequence::square_spikes().with_bound(1.0), vec![SetGen::Squares]);
        let r = multiplier_check(&c, 50_000, &EPS, TOL).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::Violated {
                witness: Witness::Index(4)
            }
        );
        assert!(r.per_set.is_empty());
        let undeclared = case(LazySequence::square_spikes(), vec![SetGen::Squares]);
        let r = multiplier_check(&undeclared, 1_100_000, &EPS, TOL).unwrap();
        assert!(r.bounded.is_violated());
        assert!(r.verdict.is_violated());
    }

    #[test]
    fn inclusion_suite() {
        let samples = [
            LazySequence::constant(1.0).with_bound(1.0),
            LazySequence::bounded(SeqGen::Alternating, 1.0),
            LazySequence::indicator(SetGen::evens()).with_bound(1.0),
        ];
        let r = corollary_inclusion_suite(
            &[SetGen::Squares],
            &IdealSpec::AsymptoticZero,
            &samples,
            100_000,
            &EPS,
            TOL,
        )
        .unwrap();
        assert_eq!(r.cases.len(), 3);
        assert!(r.cases.iter().all(|c| c.verdict.is_satisfied()));
        assert!(matches!(
            corollary_inclusion_suite(&[SetGen::evens()], &IdealSpec::AsymptoticZero, &samples, 10_000, &EPS, TOL),
            Err(Error::Precondition(_))
        ));
    }
}
