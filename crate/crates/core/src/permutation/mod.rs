//! Permutations of the positive integers and their density criteria.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

mod analysis;

pub use analysis::{
    check_growth_condition, check_p3, check_p4_zero_limit_point, escaper_counts, image_set,
    levy_group_test, permutation_regularity, AlphaEntry, FamilyEntry, GrowthReport, ImageReport,
    ImageRoute, LevyReport, PermutationRegularityReport, RatioTrace, ZeroLimitEntry,
    ZeroLimitReport, DEFAULT_P4_EPS_GRID,
};

/// `j`-th positive integer that is not a perfect square.
fn nth_nonsquare(j: u64) -> u64 {
    let r = j.isqrt();
    j + r + u64::from(j > r * r + r)
}

fn is_square(n: u64) -> bool {
    let r = n.isqrt();
    r * r == n
}

fn overflow(n: u64) -> Error {
    Error::OutOfRange {
        what: "permutation value".into(),
        n,
        limit: u64::MAX,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Permutation {
    Identity,
    /// `2k - 1 <-> 2k`
    PairSwap,
    /// Reverses every dyadic block `[2^j, 2^{j+1})`.
    BlockSwap,
    /// The `j`-th square goes to `2j`, the `j`-th non-square to `2j - 1`.
    SquaresToEvens,
    /// Inverse of [`Permutation::SquaresToEvens`].
    EvensToSquares,
    /// A bijection of `[1, len]`, undefined beyond.
    Explicit {
        forward: Arc<[u64]>,
        inverse: Arc<[u64]>,
    },
}

impl Permutation {
    pub fn builtins() -> Vec<Permutation> {
        vec![
            Permutation::Identity,
            Permutation::PairSwap,
            Permutation::BlockSwap,
            Permutation::SquaresToEvens,
            Permutation::EvensToSquares,
        ]
    }

    /// Builds an explicit permutation, checking that it is a bijection of `[1, len]`.
    pub fn explicit(forward: Vec<u64>) -> Result<Self> {
        let len = forward.len() as u64;
        let mut inverse = vec![0u64; forward.len()];
        for (i, &v) in forward.iter().enumerate() {
            if v == 0 || v > len {
                return Err(Error::argument(format!(
                    "σ({}) = {v} lies outside [1, {len}]",
                    i + 1
                )));
            }
            let slot = &mut inverse[v as usize - 1];
            if *slot != 0 {
                return Err(Error::argument(format!("value {v} appears twice")));
            }
            *slot = i as u64 + 1;
        }
        Ok(Permutation::Explicit {
            forward: forward.into(),
            inverse: inverse.into(),
        })
    }

    /// Reads lines `n σ(n)` for n = 1..N.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut forward = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<u64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::format(path, i + 1, "expected `n σ(n)`"))?;
            let [n, v] = nums[..] else {
                return Err(Error::format(path, i + 1, "expected `n σ(n)`"));
            };
            if n != forward.len() as u64 + 1 {
                return Err(Error::format(
                    path,
                    i + 1,
                    format!("expected n = {}, found {n}", forward.len() + 1),
                ));
            }
            forward.push(v);
        }
        Self::explicit(forward).map_err(|e| Error::format(path, 0, e.to_string()))
    }

    fn range_check(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::argument("permutations act on n >= 1"));
        }
        if let Permutation::Explicit { forward, .. } = self {
            if n as usize > forward.len() {
                return Err(Error::OutOfRange {
                    what: "explicit permutation".into(),
                    n,
                    limit: forward.len() as u64,
                });
            }
        }
        Ok(())
    }

    fn forward_raw(&self, n: u64) -> Result<u64> {
        self.range_check(n)?;
        Ok(match self {
            Permutation::Identity => n,
            Permutation::PairSwap => {
                if n % 2 == 1 {
                    n.checked_add(1).ok_or_else(|| overflow(n))?
                } else {
                    n - 1
                }
            }
            Permutation::BlockSwap => {
                let base = 1u64 << n.ilog2();
                (base - 1) + (2 * base - 1) - (n - 1)
            }
            Permutation::SquaresToEvens => {
                if is_square(n) {
                    2 * n.isqrt()
                } else {
                    2 * (n - n.isqrt()) - 1
                }
            }
            Permutation::EvensToSquares => {
                if n.is_multiple_of(2) {
                    (n / 2).checked_mul(n / 2).ok_or_else(|| overflow(n))?
                } else {
                    nth_nonsquare(n.div_ceil(2))
                }
            }
            Permutation::Explicit { forward, .. } => forward[n as usize - 1],
        })
    }

    fn inverse_raw(&self, n: u64) -> Result<u64> {
        self.range_check(n)?;
        match self {
            Permutation::SquaresToEvens => Permutation::EvensToSquares.forward_raw(n),
            Permutation::EvensToSquares => Permutation::SquaresToEvens.forward_raw(n),
            Permutation::Explicit { inverse, .. } => Ok(inverse[n as usize - 1]),
            // the remaining built-ins are involutions
            _ => self.forward_raw(n),
        }
    }

    /// `σ(n)`; checks `σ^{-1}(σ(n)) = n`.
    pub fn forward(&self, n: u64) -> Result<u64> {
        let v = self.forward_raw(n)?;
        let back = self.inverse_raw(v)?;
        if back != n {
            return Err(Error::Consistency(format!(
                "{self}: σ^-1(σ({n})) = {back}"
            )));
        }
        Ok(v)
    }

    /// `σ^{-1}(n)`; checks `σ(σ^{-1}(n)) = n`.
    pub fn inverse(&self, n: u64) -> Result<u64> {
        let k = self.inverse_raw(n)?;
        let back = self.forward_raw(k)?;
        if back != n {
            return Err(Error::Consistency(format!(
                "{self}: σ(σ^-1({n})) = {back}"
            )));
        }
        Ok(k)
    }

    /// The inverse permutation.
    pub fn inverted(&self) -> Permutation {
        match self {
            Permutation::SquaresToEvens => Permutation::EvensToSquares,
            Permutation::EvensToSquares => Permutation::SquaresToEvens,
            Permutation::Explicit { forward, inverse } => Permutation::Explicit {
                forward: inverse.clone(),
                inverse: forward.clone(),
            },
            other => other.clone(),
        }
    }

    /// Largest `n` on which the permutation is defined.
    pub fn domain_limit(&self) -> u64 {
        match self {
            Permutation::Explicit { forward, .. } => forward.len() as u64,
            _ => u64::MAX,
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Permutation::Identity => write!(f, "identity"),
            Permutation::PairSwap => write!(f, "pair-swap"),
            Permutation::BlockSwap => write!(f, "block-swap"),
            Permutation::SquaresToEvens => write!(f, "squares-evens"),
            Permutation::EvensToSquares => write!(f, "evens-squares"),
            Permutation::Explicit { forward, .. } => write!(f, "explicit({} points)", forward.len()),
        }
    }
}

/// `σ̂_n = n / σ^{-1}(n)`.
pub fn sigma_hat(sigma: &Permutation, n: u64) -> Result<f64> {
    Ok(n as f64 / sigma.inverse(n)? as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_bijections_on_prefixes() {
        for p in Permutation::builtins() {
            for n in 1..5000u64 {
                let v = p.forward(n).unwrap();
                assert_eq!(p.inverse(v).unwrap(), n, "{p} at {n}");
            }
        }
    }

    #[test]
    fn squares_go_to_evens() {
        let p = Permutation::SquaresToEvens;
        for j in 1..200u64 {
            assert_eq!(p.forward(j * j).unwrap(), 2 * j);
        }
        let nonsquares: Vec<u64> = (1..100).filter(|&n| !is_square(n)).collect();
        for (j, &n) in nonsquares.iter().enumerate() {
            assert_eq!(p.forward(n).unwrap(), 2 * j as u64 + 1);
            assert_eq!(nth_nonsquare(j as u64 + 1), n);
        }
    }

    #[test]
    fn block_swap_reverses_dyadic_blocks() {
        let p = Permutation::BlockSwap;
        assert_eq!(p.forward(1).unwrap(), 1);
        assert_eq!(p.forward(2).unwrap(), 3);
        assert_eq!(p.forward(4).unwrap(), 7);
        assert_eq!(p.forward(6).unwrap(), 5);
    }

    #[test]
    fn sigma_hat_values() {
        assert_eq!(sigma_hat(&Permutation::Identity, 17).unwrap(), 1.0);
        assert_eq!(sigma_hat(&Permutation::PairSwap, 3).unwrap(), 0.75);
        assert_eq!(sigma_hat(&Permutation::PairSwap, 4).unwrap(), 4.0 / 3.0);
        for n in 1..10_000 {
            let s = sigma_hat(&Permutation::BlockSwap, n).unwrap();
            assert!((0.5..=2.0).contains(&s), "{n}: {s}");
        }
    }

    #[test]
    fn explicit_permutations() {
        let p = Permutation::explicit(vec![3, 1, 2]).unwrap();
        assert_eq!(p.forward(1).unwrap(), 3);
        assert_eq!(p.inverse(3).unwrap(), 1);
        assert!(matches!(sigma_hat(&p, 4), Err(Error::OutOfRange { n: 4, .. })));
        assert!(Permutation::explicit(vec![1, 1, 2]).is_err());
        assert!(Permutation::explicit(vec![1, 4, 2]).is_err());
    }
}
