//! Explicit objects from the counterexample and witness arguments.
//!
//! Block `m` of the counterexample occupies rows `R_m = [m!, m! + 2^λ_m)` and
//! columns `C_m`, the next `λ_m` elements of the column set, where `λ_m` is
//! the least `t` with `2^t >= m!`. Every entry in the block has magnitude
//! `1/m`; the sign pattern of row `m! + r` is the binary code of `r`.

use std::collections::HashSet;

use serde::Serialize;

use crate::density::{upper_density, CheckpointPlan, DensityEstimate};
use crate::error::{Error, Result};
use crate::matrix::RowMatrix;
use crate::sequence::LazySequence;
use crate::set::SetGen;
use crate::sum::CompensatedSum;
use crate::weight::Weight;

/// Largest block whose rows fit in `u64` (`20!` does, `21!` does not).
pub const MAX_SUPPORTED_BLOCK: u32 = 20;
pub const DEFAULT_MAX_BLOCK: u32 = 10;

/// Blocks with more rows than this are skipped by the exhaustive invariant scan.
const INVARIANT_SCAN_LIMIT: u64 = 1 << 24;

pub fn factorial(m: u32) -> u128 {
    (1..=m as u128).product()
}

/// Least `t >= 0` with `2^t >= m!`.
pub fn lambda(m: u32) -> u32 {
    let f = factorial(m);
    let mut t = 0;
    while (1u128 << t) < f {
        t += 1;
    }
    t
}

/// `α_m = λ_1 + ... + λ_m`, with `α_0 = 0`.
pub fn alpha(m: u32) -> u64 {
    (1..=m).map(|i| u64::from(lambda(i))).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CounterexampleParams {
    #[serde(serialize_with = "crate::report::display")]
    pub i_set: SetGen,
    pub max_block: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Block {
    pub m: u32,
    pub lambda: u32,
    /// `min R_m = m!`
    pub start: u64,
    /// `|R_m| = 2^λ_m`
    pub len: u64,
    /// `C_m`, increasing.
    pub columns: Vec<u64>,
}

impl Block {
    pub fn last_row(&self) -> u64 {
        self.start + self.len - 1
    }

    pub fn contains_row(&self, n: u64) -> bool {
        n >= self.start && n < self.start + self.len
    }

    pub fn magnitude(&self) -> f64 {
        1.0 / f64::from(self.m)
    }

    /// Row `start + offset`, entries sorted by column.
    pub fn row(&self, offset: u64) -> Vec<(u64, f64)> {
        let mag = self.magnitude();
        self.columns
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let v = if (offset >> j) & 1 == 1 { mag } else { -mag };
                (k, v)
            })
            .collect()
    }
}

/// The counterexample matrix `A` (rows outside the blocks are zero).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub params: CounterexampleParams,
    pub blocks: Vec<Block>,
}

impl Counterexample {
    pub fn new(params: CounterexampleParams) -> Result<Self> {
        let m_max = params.max_block;
        if !(2..=MAX_SUPPORTED_BLOCK).contains(&m_max) {
            return Err(Error::argument(format!(
                "maxBlock must lie in [2, {MAX_SUPPORTED_BLOCK}], got {m_max}"
            )));
        }
        let needed = alpha(m_max);
        let columns = params.i_set.first(needed)?;
        let mut blocks = Vec::with_capacity(m_max as usize);
        let mut used = 0usize;
        for m in 1..=m_max {
            let lam = lambda(m);
            let take = lam as usize;
            blocks.push(Block {
                m,
                lambda: lam,
                start: factorial(m) as u64,
                len: 1u64 << lam,
                columns: columns[used..used + take].to_vec(),
            });
            used += take;
        }
        Ok(Counterexample { params, blocks })
    }

    pub fn block_of_row(&self, n: u64) -> Option<&Block> {
        let i = self.blocks.partition_point(|b| b.start <= n);
        if i == 0 {
            return None;
        }
        let b = &self.blocks[i - 1];
        b.contains_row(n).then_some(b)
    }

    pub fn block(&self, m: u32) -> Option<&Block> {
        self.blocks.get(m as usize - 1)
    }

    pub fn row(&self, n: u64) -> Vec<(u64, f64)> {
        match self.block_of_row(n) {
            Some(b) => b.row(n - b.start),
            None => Vec::new(),
        }
    }

    /// Last row of the last block.
    pub fn row_extent(&self) -> u64 {
        self.blocks.last().map_or(0, Block::last_row)
    }

    /// `R = ∪ R_m` over the constructed blocks.
    pub fn row_set(&self) -> SetGen {
        row_set_upto(self.params.max_block)
    }

    pub fn matrix_a(&self) -> RowMatrix {
        RowMatrix::Counterexample(std::sync::Arc::new(self.clone()))
    }

    /// `B = A + Id`.
    pub fn matrix_b(&self) -> RowMatrix {
        RowMatrix::Sum(Box::new(self.matrix_a()), Box::new(RowMatrix::Identity))
    }

    /// Exhaustive check of the block invariants, with exact integer arithmetic.
    pub fn verify_block_invariants(&self) -> BlockInvariants {
        let mut report = BlockInvariants::default();
        for b in &self.blocks {
            let f = factorial(b.m);
            let pow = 1u128 << b.lambda;
            if !(f <= pow && pow <= 2 * f) {
                report.failures.push(format!("block {}: λ bounds fail", b.m));
            }
            if u128::from(b.len) != pow || b.columns.len() != b.lambda as usize {
                report.failures.push(format!("block {}: size mismatch", b.m));
            }
            if b.len > INVARIANT_SCAN_LIMIT {
                report.skipped_blocks.push(b.m);
                continue;
            }
            let mut seen = HashSet::with_capacity(b.len as usize);
            let mut positives = vec![0u64; b.columns.len()];
            for offset in 0..b.len {
                let row = b.row(offset);
                let mut code = 0u64;
                for (j, &(k, v)) in row.iter().enumerate() {
                    debug_assert_eq!(k, b.columns[j]);
                    if v > 0.0 {
                        code |= 1 << j;
                        positives[j] += 1;
                    }
                }
                seen.insert(code);
            }
            if seen.len() as u64 != b.len {
                report
                    .failures
                    .push(format!("block {}: sign vectors not distinct", b.m));
            }
            if b.lambda > 0 && positives.iter().any(|&p| 2 * p != b.len) {
                report.failures.push(format!("block {}: columns unbalanced", b.m));
            }
            report.scanned_blocks.push(b.m);
        }
        for w in self.blocks.windows(2) {
            if w[0].last_row() >= w[1].start {
                report
                    .failures
                    .push(format!("blocks {} and {} overlap", w[0].m, w[1].m));
            }
        }
        report
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockInvariants {
    pub scanned_blocks: Vec<u32>,
    pub skipped_blocks: Vec<u32>,
    pub failures: Vec<String>,
}

impl BlockInvariants {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `R_1 ∪ ... ∪ R_{max_m}` as a block set.
pub fn row_set_upto(max_m: u32) -> SetGen {
    let blocks = (1..=max_m)
        .map(|m| {
            let s = factorial(m) as u64;
            (s, s + (1u64 << lambda(m)))
        })
        .collect();
    SetGen::blocks("counterexample-rows", blocks, true).expect("blocks are separated")
}

/// Upper asymptotic density of `R = ∪ R_m` on `[1, max R_{max_m}]`, with a
/// checkpoint at every `max R_m`.
pub fn density_of_r(max_m: u32) -> Result<DensityEstimate> {
    if !(3..=MAX_SUPPORTED_BLOCK).contains(&max_m) {
        return Err(Error::argument(format!(
            "maxM must lie in [3, {MAX_SUPPORTED_BLOCK}], got {max_m}"
        )));
    }
    let set = row_set_upto(max_m);
    let max_n = factorial(max_m) as u64 + (1u64 << lambda(max_m)) - 1;
    upper_density(&set, &Weight::Linear, max_n, &CheckpointPlan::default())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockFraction {
    pub m: u32,
    pub exceeding: u64,
    pub rows: u64,
    pub fraction: f64,
}

/// Per block `m`, the fraction of rows `n ∈ R_m` with `|(Ax)_n| > eps`.
pub fn verify_wlln_decay(a: &Counterexample, x: &LazySequence, eps: f64) -> Result<Vec<BlockFraction>> {
    use rayon::prelude::*;
    a.blocks
        .iter()
        .filter(|b| b.lambda > 0)
        .map(|b| {
            let xs: Vec<f64> = b.columns.iter().map(|&k| x.term(k)).collect::<Result<_>>()?;
            let exceeding = (0..b.len)
                .into_par_iter()
                .filter(|&offset| {
                    let ax: CompensatedSum = b
                        .row(offset)
                        .iter()
                        .zip(&xs)
                        .map(|(&(_, v), &xk)| v * xk)
                        .collect();
                    ax.value().abs() > eps
                })
                .count() as u64;
            Ok(BlockFraction {
                m: b.m,
                exceeding,
                rows: b.len,
                fraction: exceeding as f64 / b.len as f64,
            })
        })
        .collect()
}

pub use crate::witness::{construct_t3_witness, WitnessStatus, WitnessStep, WitnessTrace};

#[cfg(test)]
mod tests {
    use super::*;

    fn squares_ce(max_block: u32) -> Counterexample {
        Counterexample::new(CounterexampleParams {
            i_set: SetGen::Squares,
            max_block,
        })
        .unwrap()
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda(1), 0);
        assert_eq!(lambda(2), 1);
        assert_eq!(lambda(3), 3);
        assert_eq!(lambda(4), 5);
        assert_eq!(lambda(8), 16);
        assert_eq!(alpha(0), 0);
        assert_eq!(alpha(4), 9);
    }

    #[test]
    fn small_blocks() {
        let ce = squares_ce(4);
        let b2 = ce.block(2).unwrap();
        assert_eq!((b2.start, b2.last_row()), (2, 3));
        assert_eq!(b2.columns, vec![1]);
        assert_eq!(ce.row(2), vec![(1, -0.5)]);
        assert_eq!(ce.row(3), vec![(1, 0.5)]);
        let b3 = ce.block(3).unwrap();
        assert_eq!((b3.start, b3.last_row()), (6, 13));
        assert_eq!(b3.columns, vec![4, 9, 16]);
        let b4 = ce.block(4).unwrap();
        assert_eq!((b4.start, b4.last_row(), b4.lambda), (24, 55, 5));
        // R_1 = {1} has no columns
        assert!(ce.row(1).is_empty());
        assert!(ce.row(4).is_empty());
        assert!(ce.row(56).is_empty());
    }

    #[test]
    fn block_invariants_hold() {
        let inv = squares_ce(8).verify_block_invariants();
        assert!(inv.holds(), "{:?}", inv.failures);
        assert_eq!(inv.scanned_blocks, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn short_column_set_is_rejected() {
        let err = Counterexample::new(CounterexampleParams {
            i_set: SetGen::range(1, 8).unwrap(),
            max_block: 4,
        })
        .unwrap_err();
        assert!(matches!(err, Error::ShortEnumeration { needed: 9, available: 8 }));
    }

    #[test]
    fn density_of_r_small_case() {
        let est = density_of_r(3).unwrap();
        // R ∩ [1, 13] = {1} ∪ {2, 3} ∪ {6..13}
        assert_eq!(est.max_n, 13);
        assert_eq!(est.ratio_at(13), Some(11.0 / 13.0));
        assert!(density_of_r(2).is_err());
    }
}
