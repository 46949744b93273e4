//! Row-finite infinite matrices and their action on sequences.

mod conditions;
mod io;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::constructions::Counterexample;
use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::sequence::LazySequence;
use crate::set::SetGen;
use crate::sum::{compensated_sum, CompensatedSum};

pub use conditions::{
    check_regularity, check_s1, check_s2, check_s3, check_sliding, check_t1, check_t2, check_t3,
    check_t4, Condition, ConditionReport, Evidence, RegularityReport, SuitePair,
    DIVERGENCE_THRESHOLD,
};
pub use io::{read_jsonl, to_jsonl, ExplicitRows};

#[derive(Clone, Debug, PartialEq)]
pub enum RowMatrix {
    Identity,
    /// `a_{n,k} = 1/n` for `k <= n`.
    Cesaro,
    Diagonal(LazySequence),
    /// `a_{n,k} = 1` iff `σ^{-1}(n) = k`.
    Permutation(Permutation),
    /// The block counterexample `A`.
    Counterexample(Arc<Counterexample>),
    /// Row `n` is a single `1` at column `i_n`, the `n`-th element of a set.
    PickNth { set: SetGen, columns: Arc<[u64]> },
    /// Row `n` is `+1/2` at `i_{2n-1}` and `-1/2` at `i_{2n}`.
    PickPair { set: SetGen, columns: Arc<[u64]> },
    Explicit(Arc<ExplicitRows>),
    Sum(Box<RowMatrix>, Box<RowMatrix>),
}

impl RowMatrix {
    pub fn pick_nth(set: SetGen, rows: u64) -> Result<Self> {
        let columns = set.first(rows)?;
        Ok(RowMatrix::PickNth {
            set,
            columns: columns.into(),
        })
    }

    pub fn pick_pair(set: SetGen, rows: u64) -> Result<Self> {
        let columns = set.first(2 * rows)?;
        Ok(RowMatrix::PickPair {
            set,
            columns: columns.into(),
        })
    }

    pub fn sum(self, other: RowMatrix) -> Self {
        RowMatrix::Sum(Box::new(self), Box::new(other))
    }

    fn structural(&self, n: u64, limit: u64) -> Error {
        Error::OutOfRange {
            what: format!("row generator of {self}"),
            n,
            limit,
        }
    }

    /// Nonzero entries of row `n`, sorted by column.
    pub fn row(&self, n: u64) -> Result<Vec<(u64, f64)>> {
        if n == 0 {
            return Err(Error::argument("rows are indexed from 1"));
        }
        Ok(match self {
            RowMatrix::Identity => vec![(n, 1.0)],
            RowMatrix::Cesaro => {
                let w = 1.0 / n as f64;
                (1..=n).map(|k| (k, w)).collect()
            }
            RowMatrix::Diagonal(s) => {
                let v = s.term(n)?;
                if v == 0.0 {
                    Vec::new()
                } else {
                    vec![(n, v)]
                }
            }
            RowMatrix::Permutation(p) => vec![(p.inverse(n)?, 1.0)],
            RowMatrix::Counterexample(ce) => ce.row(n),
            RowMatrix::PickNth { columns, .. } => {
                let k = *columns
                    .get(n as usize - 1)
                    .ok_or_else(|| self.structural(n, columns.len() as u64))?;
                vec![(k, 1.0)]
            }
            RowMatrix::PickPair { columns, .. } => {
                let i = 2 * (n as usize - 1);
                if i + 1 >= columns.len() {
                    return Err(self.structural(n, columns.len() as u64 / 2));
                }
                vec![(columns[i], 0.5), (columns[i + 1], -0.5)]
            }
            RowMatrix::Explicit(rows) => rows.row(n).to_vec(),
            RowMatrix::Sum(a, b) => merge_rows(&a.row(n)?, &b.row(n)?),
        })
    }

    /// Largest row index the matrix can produce, if bounded.
    pub fn row_limit(&self) -> Option<u64> {
        match self {
            RowMatrix::PickNth { columns, .. } => Some(columns.len() as u64),
            RowMatrix::PickPair { columns, .. } => Some(columns.len() as u64 / 2),
            RowMatrix::Permutation(p) => Some(p.domain_limit()).filter(|&l| l < u64::MAX),
            RowMatrix::Sum(a, b) => match (a.row_limit(), b.row_limit()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
            _ => None,
        }
    }

    /// `(Ax)_n`, summed in increasing column order with compensation.
    pub fn apply(&self, x: &LazySequence, n: u64) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for (k, a) in self.row(n)? {
            acc.add(a * x.term(k)?);
        }
        Ok(acc.value())
    }

    /// `(Ax)_1, ..., (Ax)_{max_n}`.
    pub fn apply_all(&self, x: &LazySequence, max_n: u64) -> Result<Vec<f64>> {
        match self {
            RowMatrix::Cesaro => {
                let xs = x.prefix(max_n)?;
                let mut acc = CompensatedSum::new();
                Ok(xs
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        acc.add(v);
                        acc.value() / (i + 1) as f64
                    })
                    .collect())
            }
            _ => self.per_row(max_n, |n| self.apply(x, n)),
        }
    }

    fn per_row<F>(&self, max_n: u64, f: F) -> Result<Vec<f64>>
    where
        F: Fn(u64) -> Result<f64> + Sync + Send,
    {
        (1..=max_n).into_par_iter().map(f).collect()
    }

    /// `Σ_k |a_{n,k}|`.
    pub fn abs_row_sum(&self, n: u64) -> Result<f64> {
        match self {
            RowMatrix::Cesaro | RowMatrix::Identity | RowMatrix::Permutation(_) => Ok(1.0),
            RowMatrix::Diagonal(s) => Ok(s.term(n)?.abs()),
            _ => Ok(compensated_sum(self.row(n)?.iter().map(|e| e.1.abs()))),
        }
    }

    /// `Σ_k a_{n,k}`.
    pub fn row_sum(&self, n: u64) -> Result<f64> {
        match self {
            RowMatrix::Cesaro | RowMatrix::Identity | RowMatrix::Permutation(_) => Ok(1.0),
            RowMatrix::Diagonal(s) => s.term(n),
            _ => Ok(compensated_sum(self.row(n)?.iter().map(|e| e.1))),
        }
    }

    /// `Σ_{k ∈ E} |a_{n,k}|`.
    pub fn abs_row_sum_over(&self, n: u64, set: &SetGen) -> Result<f64> {
        match self {
            RowMatrix::Cesaro => Ok(set.count_upto(n) as f64 / n as f64),
            _ => self.row_sum_over_with(n, set, f64::abs),
        }
    }

    /// `Σ_{k ∈ E} a_{n,k}`.
    pub fn row_sum_over(&self, n: u64, set: &SetGen) -> Result<f64> {
        match self {
            RowMatrix::Cesaro => Ok(set.count_upto(n) as f64 / n as f64),
            _ => self.row_sum_over_with(n, set, |v| v),
        }
    }

    fn row_sum_over_with(&self, n: u64, set: &SetGen, f: impl Fn(f64) -> f64) -> Result<f64> {
        Ok(compensated_sum(
            self.row(n)?
                .iter()
                .filter(|e| set.contains(e.0))
                .map(|e| f(e.1)),
        ))
    }

    pub fn abs_row_sums(&self, max_n: u64) -> Result<Vec<f64>> {
        self.per_row(max_n, |n| self.abs_row_sum(n))
    }

    pub fn row_sums(&self, max_n: u64) -> Result<Vec<f64>> {
        self.per_row(max_n, |n| self.row_sum(n))
    }

    pub fn abs_row_sums_over(&self, set: &SetGen, max_n: u64) -> Result<Vec<f64>> {
        self.per_row(max_n, |n| self.abs_row_sum_over(n, set))
    }

    pub fn row_sums_over(&self, set: &SetGen, max_n: u64) -> Result<Vec<f64>> {
        self.per_row(max_n, |n| self.row_sum_over(n, set))
    }

    /// First negative entry among rows `1..=max_n`, in row-major order.
    pub fn first_negative_entry(&self, max_n: u64) -> Result<Option<(u64, u64, f64)>> {
        match self {
            RowMatrix::Cesaro
            | RowMatrix::Identity
            | RowMatrix::Permutation(_)
            | RowMatrix::PickNth { .. } => Ok(None),
            _ => {
                let found = (1..=max_n)
                    .into_par_iter()
                    .map(|n| -> Result<Option<(u64, u64, f64)>> {
                        Ok(self
                            .row(n)?
                            .into_iter()
                            .find(|e| e.1 < 0.0)
                            .map(|(k, v)| (n, k, v)))
                    })
                    .find_first(|r| !matches!(r, Ok(None)));
                found.unwrap_or(Ok(None))
            }
        }
    }
}

/// Merges two sorted rows, adding coefficients on shared columns and dropping
/// entries that cancel to zero.
pub fn merge_rows(a: &[(u64, f64)], b: &[(u64, f64)]) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x.0 == y.0 => {
                i += 1;
                j += 1;
                (x.0, x.1 + y.1)
            }
            (Some(&x), Some(&y)) if x.0 < y.0 => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if next.1 != 0.0 {
            out.push(next);
        }
    }
    out
}

impl fmt::Display for RowMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowMatrix::Identity => write!(f, "identity"),
            RowMatrix::Cesaro => write!(f, "cesaro"),
            RowMatrix::Diagonal(s) => write!(f, "diag:{s}"),
            RowMatrix::Permutation(p) => write!(f, "perm:{p}"),
            RowMatrix::Counterexample(ce) => write!(
                f,
                "counterexample-a(iset={}, maxBlock={})",
                ce.params.i_set, ce.params.max_block
            ),
            RowMatrix::PickNth { set, .. } => write!(f, "pick-nth({set})"),
            RowMatrix::PickPair { set, .. } => write!(f, "pick-pair({set})"),
            RowMatrix::Explicit(rows) => write!(f, "explicit({} rows)", rows.len()),
            RowMatrix::Sum(a, b) => match (&**a, &**b) {
                (RowMatrix::Counterexample(ce), RowMatrix::Identity) => write!(
                    f,
                    "counterexample-b(iset={}, maxBlock={})",
                    ce.params.i_set, ce.params.max_block
                ),
                _ => write!(f, "sum({a},{b})"),
            },
        }
    }
}
