//! Lazy real sequences and finite-prefix ideal limits.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::DensityEstimate;
use crate::error::{Error, Result};
use crate::ideal::{membership, IdealSpec};
use crate::set::SetGen;
use crate::sum::CompensatedSum;
use crate::verdict::Verdict;

pub const DEFAULT_EPS_GRID: [f64; 3] = [0.5, 0.1, 0.02];

/// Number of histogram bins used by [`propose_ideal_limit`].
pub const HISTOGRAM_BINS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum SeqGen {
    Const(f64),
    Indicator(SetGen),
    /// `a * inner + b`
    Affine { a: f64, b: f64, inner: Box<SeqGen> },
    /// `(-1)^n`
    Alternating,
    /// `(-1)^n / n`
    AlternatingHarmonic,
    /// `x_n = n`
    Index,
    OnSet {
        set: SetGen,
        inside: Box<SeqGen>,
        outside: Box<SeqGen>,
    },
    Sum(Box<SeqGen>, Box<SeqGen>),
    Product(Box<SeqGen>, Box<SeqGen>),
    Abs(Box<SeqGen>),
    /// `x_1, ..., x_len`; undefined beyond.
    Table(Arc<[f64]>),
}

impl SeqGen {
    fn eval(&self, n: u64) -> Result<f64> {
        Ok(match self {
            SeqGen::Const(c) => *c,
            SeqGen::Indicator(s) => {
                if s.contains(n) {
                    1.0
                } else {
                    0.0
                }
            }
            SeqGen::Affine { a, b, inner } => a * inner.eval(n)? + b,
            SeqGen::Alternating => {
                if n.is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
            SeqGen::AlternatingHarmonic => {
                let s = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                s / n as f64
            }
            SeqGen::Index => n as f64,
            SeqGen::OnSet {
                set,
                inside,
                outside,
            } => {
                if set.contains(n) {
                    inside.eval(n)?
                } else {
                    outside.eval(n)?
                }
            }
            SeqGen::Sum(a, b) => a.eval(n)? + b.eval(n)?,
            SeqGen::Product(a, b) => a.eval(n)? * b.eval(n)?,
            SeqGen::Abs(a) => a.eval(n)?.abs(),
            SeqGen::Table(t) => {
                if n == 0 || n as usize > t.len() {
                    return Err(Error::OutOfRange {
                        what: "sequence table".into(),
                        n,
                        limit: t.len() as u64,
                    });
                }
                t[n as usize - 1]
            }
        })
    }
}

impl fmt::Display for SeqGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqGen::Const(c) => write!(f, "const:{c}"),
            SeqGen::Indicator(s) => write!(f, "indicator:{s}"),
            SeqGen::Affine { a, b, inner } => write!(f, "affine:{a},{b},{inner}"),
            SeqGen::Alternating => write!(f, "alt"),
            SeqGen::AlternatingHarmonic => write!(f, "alt-harmonic"),
            SeqGen::Index => write!(f, "index"),
            SeqGen::OnSet {
                set,
                inside,
                outside,
            } => write!(f, "onset({set}:{inside}|{outside})"),
            SeqGen::Sum(a, b) => write!(f, "sum({a},{b})"),
            SeqGen::Product(a, b) => write!(f, "product({a},{b})"),
            SeqGen::Abs(a) => write!(f, "abs({a})"),
            SeqGen::Table(t) => write!(f, "table({} values)", t.len()),
        }
    }
}

/// A real sequence evaluable on any prefix, with an optional declared bound
/// `|x_n| <= B` that is enforced on every evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct LazySequence {
    pub generator: SeqGen,
    pub declared_bound: Option<f64>,
}

impl LazySequence {
    pub fn new(generator: SeqGen) -> Self {
        LazySequence {
            generator,
            declared_bound: None,
        }
    }

    pub fn bounded(generator: SeqGen, bound: f64) -> Self {
        LazySequence {
            generator,
            declared_bound: Some(bound),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::bounded(SeqGen::Const(c), c.abs())
    }

    pub fn indicator(set: SetGen) -> Self {
        Self::bounded(SeqGen::Indicator(set), 1.0)
    }

    pub fn table(values: Vec<f64>) -> Self {
        Self::new(SeqGen::Table(values.into()))
    }

    /// `s_n = n` on the squares and `1` elsewhere: the unbounded diagonal.
    pub fn square_spikes() -> Self {
        Self::new(SeqGen::OnSet {
            set: SetGen::Squares,
            inside: Box::new(SeqGen::Index),
            outside: Box::new(SeqGen::Const(1.0)),
        })
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.declared_bound = Some(bound);
        self
    }

    pub fn without_bound(mut self) -> Self {
        self.declared_bound = None;
        self
    }

    /// `a x + b`; a declared bound carries over as `|a| B + |b|`.
    pub fn affine(self, a: f64, b: f64) -> Self {
        LazySequence {
            declared_bound: self.declared_bound.map(|bd| a.abs() * bd + b.abs()),
            generator: SeqGen::Affine {
                a,
                b,
                inner: Box::new(self.generator),
            },
        }
    }

    /// Coordinatewise sum; bounds add.
    pub fn plus(self, other: LazySequence) -> Self {
        let declared_bound = match (self.declared_bound, other.declared_bound) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        LazySequence {
            declared_bound,
            generator: SeqGen::Sum(Box::new(self.generator), Box::new(other.generator)),
        }
    }

    /// Coordinatewise product `x * 1_E`.
    pub fn restricted_to(self, set: SetGen) -> Self {
        LazySequence {
            declared_bound: self.declared_bound,
            generator: SeqGen::Product(Box::new(self.generator), Box::new(SeqGen::Indicator(set))),
        }
    }

    pub fn abs(self) -> Self {
        LazySequence {
            declared_bound: self.declared_bound,
            generator: SeqGen::Abs(Box::new(self.generator)),
        }
    }

    pub fn term(&self, n: u64) -> Result<f64> {
        let v = self.generator.eval(n)?;
        self.check_bound(n, v)?;
        Ok(v)
    }

    fn check_bound(&self, n: u64, v: f64) -> Result<()> {
        if let Some(b) = self.declared_bound {
            if !(v.abs() <= b) {
                return Err(Error::BoundViolated {
                    index: n,
                    value: v,
                    bound: b,
                });
            }
        }
        Ok(())
    }

    /// `x_1, ..., x_max_n`. A bound violation reports the smallest offending index.
    pub fn prefix(&self, max_n: u64) -> Result<Vec<f64>> {
        let raw: Vec<Result<f64>> = (1..=max_n)
            .into_par_iter()
            .map(|n| self.generator.eval(n))
            .collect();
        let mut out = Vec::with_capacity(raw.len());
        for (i, v) in raw.into_iter().enumerate() {
            let v = v?;
            self.check_bound(i as u64 + 1, v)?;
            out.push(v);
        }
        Ok(out)
    }

    /// Reads a sequence file: lines `n value` for n = 1, 2, ... with no gaps.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(n), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::format(path, i + 1, "expected `n value`"));
            };
            let n: u64 = n
                .parse()
                .map_err(|_| Error::format(path, i + 1, format!("bad index {n:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::format(path, i + 1, format!("bad value {v:?}")))?;
            let expected = values.len() as u64 + 1;
            if n != expected {
                return Err(Error::format(
                    path,
                    i + 1,
                    format!("index {expected} is missing (found {n})"),
                ));
            }
            values.push(v);
        }
        Ok(Self::table(values))
    }
}

impl fmt::Display for LazySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.generator)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsEntry {
    pub eps: f64,
    pub estimate: DensityEstimate,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdealLimitReport {
    pub candidate: f64,
    pub ideal: IdealSpec,
    pub eps_grid: Vec<f64>,
    pub per_eps: Vec<EpsEntry>,
    pub verdict: Verdict,
}

pub fn check_eps_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(Error::argument("epsilon grid is empty"));
    }
    if eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::argument("epsilon grid must be positive and finite"));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::argument(format!(
            "epsilon grid must be strictly decreasing: {eps_grid:?}"
        )));
    }
    Ok(())
}

/// `{n <= values.len() : |x_n - eta| > eps}` as a set sampled on the prefix.
pub fn exceptional_set(values: &[f64], eta: f64, eps: f64) -> SetGen {
    let elements: Vec<u64> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - eta).abs() > eps)
        .map(|(i, _)| i as u64 + 1)
        .collect();
    SetGen::Sampled {
        elements: elements.into(),
        horizon: values.len() as u64,
    }
}

/// Ideal-limit verification on precomputed terms `x_1..x_N`.
pub fn verify_ideal_limit_values(
    values: &[f64],
    eta: f64,
    ideal: &IdealSpec,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<IdealLimitReport> {
    check_eps_grid(eps_grid)?;
    if values.is_empty() {
        return Err(Error::argument("maxN must be at least 1"));
    }
    let max_n = values.len() as u64;
    let per_eps = eps_grid
        .par_iter()
        .map(|&eps| {
            let set = exceptional_set(values, eta, eps);
            let (verdict, estimate) = membership(&set, ideal, max_n, zero_tol)?;
            Ok(EpsEntry {
                eps,
                estimate,
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = Verdict::all(per_eps.iter().map(|e| e.verdict.clone()));
    Ok(IdealLimitReport {
        candidate: eta,
        ideal: ideal.clone(),
        eps_grid: eps_grid.to_vec(),
        per_eps,
        verdict,
    })
}

/// Checks `I-lim x = eta` on `[1, max_n]` at every scale of `eps_grid`.
pub fn verify_ideal_limit(
    x: &LazySequence,
    eta: f64,
    ideal: &IdealSpec,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<IdealLimitReport> {
    check_eps_grid(eps_grid)?;
    let values = x.prefix(max_n)?;
    verify_ideal_limit_values(&values, eta, ideal, eps_grid, zero_tol)
}

fn region_qualifies(
    values: &[f64],
    inside: impl Fn(f64) -> bool + Sync,
    ideal: &IdealSpec,
    zero_tol: f64,
) -> Result<bool> {
    let outside: Vec<u64> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| !inside(v))
        .map(|(i, _)| i as u64 + 1)
        .collect();
    let set = SetGen::Sampled {
        elements: outside.into(),
        horizon: values.len() as u64,
    };
    Ok(membership(&set, ideal, values.len() as u64, zero_tol)?
        .0
        .is_satisfied())
}

fn mean_inside(values: &[f64], inside: impl Fn(f64) -> bool) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut count = 0usize;
    for &v in values.iter().filter(|&&v| inside(v)) {
        acc.add(v);
        count += 1;
    }
    acc.value() / count as f64
}

/// Candidate ideal limit from a 64-bin histogram over `[-B, B]`.
///
/// A bin qualifies when the indices falling outside it form a set in the
/// ideal. With exactly one qualifying bin, one bisection pass keeps the half
/// that still qualifies (if any) and the candidate is the mean of the terms
/// in the kept region. No candidate is returned on ties or when nothing
/// qualifies.
pub fn propose_ideal_limit(
    x: &LazySequence,
    ideal: &IdealSpec,
    max_n: u64,
    zero_tol: f64,
) -> Result<Option<f64>> {
    let values = x.prefix(max_n)?;
    let bound = match x.declared_bound {
        Some(b) => b,
        None => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    };
    let bound = if bound > 0.0 { bound } else { 1.0 };
    let width = 2.0 * bound / HISTOGRAM_BINS as f64;
    let bin_of = |v: f64| -> usize {
        let b = ((v + bound) / width).floor();
        (b.max(0.0) as usize).min(HISTOGRAM_BINS - 1)
    };
    let mut occupied = [false; HISTOGRAM_BINS];
    for &v in &values {
        occupied[bin_of(v)] = true;
    }
    let candidates: Vec<usize> = (0..HISTOGRAM_BINS).filter(|&b| occupied[b]).collect();
    let qualifying = candidates
        .par_iter()
        .map(|&b| region_qualifies(&values, |v| bin_of(v) == b, ideal, zero_tol).map(|q| (b, q)))
        .collect::<Result<Vec<_>>>()?;
    let winners: Vec<usize> = qualifying.iter().filter(|e| e.1).map(|e| e.0).collect();
    let bin = match winners[..] {
        [bin] => bin,
        [] => {
            // A limit on a bin edge splits its mass between two neighbours.
            let pairs = candidates
                .windows(2)
                .filter(|w| w[1] == w[0] + 1)
                .map(|w| w[0])
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&b| region_qualifies(&values, |v| (b..=b + 1).contains(&bin_of(v)), ideal, zero_tol).map(|q| (b, q)))
                .collect::<Result<Vec<_>>>()?;
            let paired: Vec<usize> = pairs.iter().filter(|e| e.1).map(|e| e.0).collect();
            let [b] = paired[..] else {
                return Ok(None);
            };
            return Ok(Some(mean_inside(&values, |v| (b..=b + 1).contains(&bin_of(v)))));
        }
        _ => return Ok(None),
    };
    let lo = -bound + bin as f64 * width;
    let mid = lo + width / 2.0;
    let in_bin = |v: f64| bin_of(v) == bin;
    let lower = |v: f64| in_bin(v) && v < mid;
    let upper = |v: f64| in_bin(v) && v >= mid;
    let estimate = if region_qualifies(&values, lower, ideal, zero_tol)? {
        mean_inside(&values, lower)
    } else if region_qualifies(&values, upper, ideal, zero_tol)? {
        mean_inside(&values, upper)
    } else {
        mean_inside(&values, in_bin)
    };
    Ok(Some(estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::DEFAULT_ZERO_TOL;

    const TOL: f64 = DEFAULT_ZERO_TOL;

    #[test]
    fn constant_sequence_converges_in_every_ideal() {
        let x = LazySequence::constant(1.0);
        for ideal in [IdealSpec::Fin, IdealSpec::AsymptoticZero, IdealSpec::UniformZero] {
            let r = verify_ideal_limit(&x, 1.0, &ideal, 10_000, &DEFAULT_EPS_GRID, TOL).unwrap();
            assert!(r.verdict.is_satisfied(), "{ideal}");
            assert!(r.per_eps.iter().all(|e| e.estimate.value == 0.0));
        }
    }

    #[test]
    fn indicator_of_squares_is_statistically_null() {
        let x = LazySequence::indicator(SetGen::Squares);
        let r = verify_ideal_limit(&x, 0.0, &IdealSpec::AsymptoticZero, 1_000_000, &[0.5, 0.1], TOL)
            .unwrap();
        assert!(r.verdict.is_satisfied());
        // the exceptional set is the squares at both scales
        for e in &r.per_eps {
            assert_eq!(e.estimate.ratio_at(1_000_000), Some(1e-3));
        }
    }

    #[test]
    fn indicator_of_evens_has_no_statistical_limit_zero() {
        let x = LazySequence::indicator(SetGen::evens());
        let r = verify_ideal_limit(&x, 0.0, &IdealSpec::AsymptoticZero, 100_000, &DEFAULT_EPS_GRID, TOL)
            .unwrap();
        assert!(r.verdict.is_violated());
    }

    #[test]
    fn alternating_harmonic_converges_classically() {
        let x = LazySequence::bounded(SeqGen::AlternatingHarmonic, 1.0);
        let r = verify_ideal_limit(&x, 0.0, &IdealSpec::Fin, 10_000, &DEFAULT_EPS_GRID, TOL).unwrap();
        assert!(r.verdict.is_satisfied());
    }

    #[test]
    fn bound_violation_reports_first_index() {
        let x = LazySequence::square_spikes().with_bound(50.0);
        match x.prefix(10_000) {
            Err(Error::BoundViolated { index: 64, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eps_grid_must_decrease() {
        let x = LazySequence::constant(0.0);
        for grid in [&[0.1, 0.5][..], &[], &[0.5, -0.1]] {
            assert!(verify_ideal_limit(&x, 0.0, &IdealSpec::Fin, 10, grid, TOL).is_err());
        }
    }

    #[test]
    fn exceptional_densities_shrink_with_eps() {
        let x = LazySequence::bounded(SeqGen::AlternatingHarmonic, 1.0)
            .affine(1.0, 0.0);
        let r = verify_ideal_limit(&x, 0.0, &IdealSpec::AsymptoticZero, 5_000, &[0.5, 0.1, 0.01, 0.001], TOL)
            .unwrap();
        for pair in r.per_eps.windows(2) {
            for (a, b) in pair[0].estimate.checkpoints.iter().zip(&pair[1].estimate.checkpoints) {
                assert!(a.1 <= b.1);
            }
        }
    }

    #[test]
    fn proposals() {
        let z = IdealSpec::AsymptoticZero;
        let c = LazySequence::constant(3.0);
        assert_eq!(propose_ideal_limit(&c, &z, 10_000, TOL).unwrap(), Some(3.0));
        let x = LazySequence::indicator(SetGen::Squares).affine(1.0, 1.0);
        assert_eq!(propose_ideal_limit(&x, &z, 100_000, TOL).unwrap(), Some(1.0));
        let e = LazySequence::indicator(SetGen::evens());
        assert_eq!(propose_ideal_limit(&e, &z, 100_000, TOL).unwrap(), None);
        // 0 sits on the edge between the two middle bins.
        let h = LazySequence::new(SeqGen::AlternatingHarmonic);
        let eta = propose_ideal_limit(&h, &z, 100_000, TOL).unwrap().unwrap();
        assert!(eta.abs() < 1e-3, "{eta}");
    }

    #[test]
    fn table_files_reject_gaps() {
        let dir = std::env::temp_dir().join(format!("summa-seq-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let ok = dir.join("ok.txt");
        std::fs::write(&ok, "1 0.5\n2 -0.25\n3 1\n").unwrap();
        let x = LazySequence::from_file(&ok).unwrap();
        assert_eq!(x.prefix(3).unwrap(), vec![0.5, -0.25, 1.0]);
        assert!(x.term(4).is_err());
        let gap = dir.join("gap.txt");
        std::fs::write(&gap, "1 0.5\n3 1\n").unwrap();
        assert!(matches!(LazySequence::from_file(&gap), Err(Error::Format { line: 2, .. })));
    }
}
