//! Subsets of the positive integers given by monotone generators.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Whether a generator is known to enumerate finitely many elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Finiteness {
    Finite,
    Infinite,
    /// Exact only on a finite prefix (sampled or derived sets).
    Unknown,
}

/// A subset of `{1, 2, 3, ...}` with an increasing enumeration.
///
/// Membership and prefix counts are exact integer computations; closed forms
/// are used where the set has one.
#[derive(Clone, Debug, PartialEq)]
pub enum SetGen {
    Empty,
    All,
    Squares,
    PowersOfTwo,
    /// `start, start + step, start + 2 step, ...`
    Progression { start: u64, step: u64 },
    /// An explicit finite list, strictly increasing.
    Finite(Arc<[u64]>),
    /// A set known exactly on `[1, horizon]` only.
    Sampled { elements: Arc<[u64]>, horizon: u64 },
    /// Disjoint half-open intervals `[start, end)` in increasing order.
    Blocks {
        name: String,
        blocks: Arc<[(u64, u64)]>,
        infinite: bool,
    },
    Complement(Box<SetGen>),
    Union(Box<SetGen>, Box<SetGen>),
}

fn factorial(m: u32) -> Option<u64> {
    (1..=m as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

impl SetGen {
    pub fn evens() -> Self {
        SetGen::Progression { start: 2, step: 2 }
    }

    pub fn odds() -> Self {
        SetGen::Progression { start: 1, step: 2 }
    }

    pub fn progression(start: u64, step: u64) -> Result<Self> {
        if start == 0 || step == 0 {
            return Err(Error::argument(format!(
                "progression needs start >= 1 and step >= 1, got start={start}, step={step}"
            )));
        }
        Ok(SetGen::Progression { start, step })
    }

    pub fn range(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::argument(format!("invalid range {lo}-{hi}")));
        }
        Self::finite((lo..=hi).collect())
    }

    /// Finite set from a strictly increasing list of positive integers.
    pub fn finite(elements: Vec<u64>) -> Result<Self> {
        check_increasing(&elements)?;
        Ok(SetGen::Finite(elements.into()))
    }

    /// Set known exactly on `[1, horizon]`.
    pub fn sampled(elements: Vec<u64>, horizon: u64) -> Result<Self> {
        check_increasing(&elements)?;
        if let Some(&last) = elements.last() {
            if last > horizon {
                return Err(Error::argument(format!(
                    "sampled element {last} beyond horizon {horizon}"
                )));
            }
        }
        Ok(SetGen::Sampled {
            elements: elements.into(),
            horizon,
        })
    }

    /// `S = union over k >= 1 of [(4k)!, (4k+1)!)`, i.e. every other block of
    /// the factorial partition `[(2k)!, (2k+1)!)`. Truncated where the
    /// factorials leave the `u64` range.
    pub fn factorial_blocks() -> Self {
        let mut blocks = Vec::new();
        for k in 1.. {
            let Some(start) = factorial(4 * k) else { break };
            let end = factorial(4 * k + 1).unwrap_or(u64::MAX);
            blocks.push((start, end));
        }
        SetGen::Blocks {
            name: "factorial-blocks".into(),
            blocks: blocks.into(),
            infinite: true,
        }
    }

    pub fn blocks(name: impl Into<String>, blocks: Vec<(u64, u64)>, infinite: bool) -> Result<Self> {
        let mut prev_end = 1;
        for &(s, e) in &blocks {
            if s < prev_end || e <= s {
                return Err(Error::argument(format!(
                    "blocks must be nonempty, disjoint and increasing; got [{s}, {e})"
                )));
            }
            prev_end = e;
        }
        Ok(SetGen::Blocks {
            name: name.into(),
            blocks: blocks.into(),
            infinite,
        })
    }

    pub fn complement(self) -> Self {
        SetGen::Complement(Box::new(self))
    }

    pub fn union(self, other: SetGen) -> Self {
        SetGen::Union(Box::new(self), Box::new(other))
    }

    /// Reads a set file: one positive integer per line, strictly increasing.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut elements = Vec::new();
        let mut prev = 0u64;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: u64 = line
                .parse()
                .map_err(|_| Error::format(path, i + 1, format!("not a positive integer: {line:?}")))?;
            if v == 0 || v <= prev {
                return Err(Error::format(
                    path,
                    i + 1,
                    format!("values must be positive and strictly increasing ({v} after {prev})"),
                ));
            }
            prev = v;
            elements.push(v);
        }
        Ok(SetGen::Finite(elements.into()))
    }

    pub fn finiteness(&self) -> Finiteness {
        match self {
            SetGen::Empty | SetGen::Finite(_) => Finiteness::Finite,
            SetGen::All | SetGen::Squares | SetGen::PowersOfTwo | SetGen::Progression { .. } => {
                Finiteness::Infinite
            }
            SetGen::Sampled { .. } => Finiteness::Unknown,
            SetGen::Blocks { infinite, .. } => {
                if *infinite {
                    Finiteness::Infinite
                } else {
                    Finiteness::Finite
                }
            }
            SetGen::Complement(inner) => match inner.finiteness() {
                Finiteness::Finite => Finiteness::Infinite,
                _ if **inner == SetGen::All => Finiteness::Finite,
                _ => Finiteness::Unknown,
            },
            SetGen::Union(a, b) => match (a.finiteness(), b.finiteness()) {
                (Finiteness::Infinite, _) | (_, Finiteness::Infinite) => Finiteness::Infinite,
                (Finiteness::Finite, Finiteness::Finite) => Finiteness::Finite,
                _ => Finiteness::Unknown,
            },
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match self {
            SetGen::Empty => false,
            SetGen::All => true,
            SetGen::Squares => {
                let r = n.isqrt();
                r * r == n
            }
            SetGen::PowersOfTwo => n.is_power_of_two(),
            SetGen::Progression { start, step } => n >= *start && (n - start).is_multiple_of(*step),
            SetGen::Finite(e) | SetGen::Sampled { elements: e, .. } => e.binary_search(&n).is_ok(),
            SetGen::Blocks { blocks, .. } => {
                let i = blocks.partition_point(|&(s, _)| s <= n);
                i > 0 && n < blocks[i - 1].1
            }
            SetGen::Complement(inner) => !inner.contains(n),
            SetGen::Union(a, b) => a.contains(n) || b.contains(n),
        }
    }

    /// `|S ∩ [1, n]|`, exact.
    pub fn count_upto(&self, n: u64) -> u64 {
        match self {
            SetGen::Empty => 0,
            SetGen::All => n,
            SetGen::Squares => n.isqrt(),
            SetGen::PowersOfTwo => {
                if n == 0 {
                    0
                } else {
                    u64::from(n.ilog2()) + 1
                }
            }
            SetGen::Progression { start, step } => {
                if n < *start {
                    0
                } else {
                    (n - start) / step + 1
                }
            }
            SetGen::Finite(e) | SetGen::Sampled { elements: e, .. } => {
                e.partition_point(|&v| v <= n) as u64
            }
            SetGen::Blocks { blocks, .. } => blocks
                .iter()
                .take_while(|&&(s, _)| s <= n)
                .map(|&(s, e)| e.min(n + 1) - s)
                .sum(),
            SetGen::Complement(inner) => n - inner.count_upto(n),
            SetGen::Union(..) => self.iter_upto(n).count() as u64,
        }
    }

    /// Increasing enumeration of all elements representable in `u64`.
    pub fn iter(&self) -> Box<dyn Iterator<Item = u64> + Send + '_> {
        match self {
            SetGen::Empty => Box::new(std::iter::empty()),
            SetGen::All => Box::new(1..=u64::MAX),
            SetGen::Squares => Box::new(
                (1u64..)
                    .map_while(|j| j.checked_mul(j)),
            ),
            SetGen::PowersOfTwo => Box::new((0..64).map(|j| 1u64 << j)),
            SetGen::Progression { start, step } => {
                let (start, step) = (*start, *step);
                Box::new((0u64..).map_while(move |j| j.checked_mul(step)?.checked_add(start)))
            }
            SetGen::Finite(e) | SetGen::Sampled { elements: e, .. } => Box::new(e.iter().copied()),
            SetGen::Blocks { blocks, .. } => Box::new(blocks.iter().flat_map(|&(s, e)| s..e)),
            SetGen::Complement(inner) => Box::new((1..=u64::MAX).filter(move |&n| !inner.contains(n))),
            SetGen::Union(a, b) => Box::new(MergeUnion {
                a: a.iter().peekable(),
                b: b.iter().peekable(),
            }),
        }
    }

    pub fn iter_upto(&self, n: u64) -> impl Iterator<Item = u64> + '_ {
        self.iter().take_while(move |&v| v <= n)
    }

    /// Elements of `S ∩ [1, n]` collected into a vector.
    pub fn elements_upto(&self, n: u64) -> Vec<u64> {
        self.iter_upto(n).collect()
    }

    /// The `j`-th smallest element (1-based), if it exists.
    pub fn nth(&self, j: u64) -> Option<u64> {
        if j == 0 {
            return None;
        }
        match self {
            SetGen::All => Some(j),
            SetGen::Squares => j.checked_mul(j),
            SetGen::PowersOfTwo => (j <= 64).then(|| 1u64 << (j - 1)),
            SetGen::Progression { start, step } => (j - 1).checked_mul(*step)?.checked_add(*start),
            SetGen::Finite(e) | SetGen::Sampled { elements: e, .. } => e.get(j as usize - 1).copied(),
            _ => self.iter().nth(j as usize - 1),
        }
    }

    /// The first `count` elements; errors when the set runs out.
    pub fn first(&self, count: u64) -> Result<Vec<u64>> {
        let v: Vec<u64> = self.iter().take(count as usize).collect();
        if (v.len() as u64) < count {
            return Err(Error::ShortEnumeration {
                needed: count,
                available: v.len() as u64,
            });
        }
        Ok(v)
    }

    /// Positions inside `[1, max_n]` where the set's structure changes
    /// (block starts and ends). Used to force density checkpoints.
    pub fn boundaries(&self, max_n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        match self {
            SetGen::Blocks { blocks, .. } => {
                for &(s, e) in blocks.iter() {
                    for b in [s.saturating_sub(1), s, e - 1] {
                        if b >= 1 && b <= max_n {
                            out.push(b);
                        }
                    }
                }
            }
            SetGen::Complement(inner) => out = inner.boundaries(max_n),
            SetGen::Union(a, b) => {
                out = a.boundaries(max_n);
                out.extend(b.boundaries(max_n));
            }
            _ => {}
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Exact horizon beyond which the set is unknown, for sampled data.
    pub fn horizon(&self) -> Option<u64> {
        match self {
            SetGen::Sampled { horizon, .. } => Some(*horizon),
            SetGen::Complement(inner) => inner.horizon(),
            SetGen::Union(a, b) => match (a.horizon(), b.horizon()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
            _ => None,
        }
    }
}

fn check_increasing(elements: &[u64]) -> Result<()> {
    let mut prev = 0;
    for &v in elements {
        if v == 0 || v <= prev {
            return Err(Error::argument(format!(
                "set elements must be positive and strictly increasing ({v} after {prev})"
            )));
        }
        prev = v;
    }
    Ok(())
}

struct MergeUnion<A: Iterator<Item = u64>, B: Iterator<Item = u64>> {
    a: std::iter::Peekable<A>,
    b: std::iter::Peekable<B>,
}

impl<A: Iterator<Item = u64>, B: Iterator<Item = u64>> Iterator for MergeUnion<A, B> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        match (self.a.peek().copied(), self.b.peek().copied()) {
            (Some(x), Some(y)) => {
                if x < y {
                    self.a.next()
                } else if y < x {
                    self.b.next()
                } else {
                    self.b.next();
                    self.a.next()
                }
            }
            (Some(_), None) => self.a.next(),
            (None, Some(_)) => self.b.next(),
            (None, None) => None,
        }
    }
}

impl fmt::Display for SetGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetGen::Empty => write!(f, "empty"),
            SetGen::All => write!(f, "all"),
            SetGen::Squares => write!(f, "squares"),
            SetGen::PowersOfTwo => write!(f, "powers2"),
            SetGen::Progression { start: 2, step: 2 } => write!(f, "evens"),
            SetGen::Progression { start: 1, step: 2 } => write!(f, "odds"),
            SetGen::Progression { start, step } => write!(f, "ap:{start},{step}"),
            SetGen::Finite(e) => {
                if e.len() <= 12 {
                    let items: Vec<String> = e.iter().map(u64::to_string).collect();
                    write!(f, "finite:{}", items.join(","))
                } else {
                    write!(f, "finite({} elements, max {})", e.len(), e[e.len() - 1])
                }
            }
            SetGen::Sampled { elements, horizon } => {
                write!(f, "sampled({} elements on [1,{horizon}])", elements.len())
            }
            SetGen::Blocks { name, .. } => write!(f, "{name}"),
            SetGen::Complement(inner) => write!(f, "complement:{inner}"),
            SetGen::Union(a, b) => write!(f, "union({a},{b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_count(s: &SetGen, n: u64) -> u64 {
        (1..=n).filter(|&k| s.contains(k)).count() as u64
    }

    #[test]
    fn closed_form_counts_match_membership() {
        let sets = [
            SetGen::Squares,
            SetGen::PowersOfTwo,
            SetGen::evens(),
            SetGen::progression(5, 7).unwrap(),
            SetGen::factorial_blocks(),
            SetGen::Squares.complement(),
            SetGen::Squares.union(SetGen::evens()),
            SetGen::range(3, 40).unwrap(),
        ];
        for s in &sets {
            for n in [0, 1, 2, 23, 24, 25, 119, 120, 121, 1000, 5000] {
                assert_eq!(s.count_upto(n), brute_count(s, n), "{s} at {n}");
            }
        }
    }

    #[test]
    fn enumeration_is_increasing_and_agrees_with_nth() {
        for s in [SetGen::Squares, SetGen::factorial_blocks(), SetGen::evens().complement()] {
            let first: Vec<u64> = s.iter().take(200).collect();
            assert!(first.windows(2).all(|w| w[0] < w[1]));
            for (j, &v) in first.iter().enumerate() {
                assert_eq!(s.nth(j as u64 + 1), Some(v));
                assert!(s.contains(v));
            }
        }
    }

    #[test]
    fn factorial_blocks_layout() {
        let s = SetGen::factorial_blocks();
        assert!(!s.contains(23));
        assert!(s.contains(24));
        assert!(s.contains(119));
        assert!(!s.contains(120));
        assert!(!s.contains(40_319));
        assert!(s.contains(40_320));
        assert_eq!(s.count_upto(100_000), 96 + (100_000 - 40_320 + 1));
        let b = s.boundaries(100_000);
        assert!(b.contains(&24) && b.contains(&119) && b.contains(&40_320));
    }

    #[test]
    fn finiteness_flags() {
        assert_eq!(SetGen::range(1, 50).unwrap().finiteness(), Finiteness::Finite);
        assert_eq!(SetGen::Squares.finiteness(), Finiteness::Infinite);
        assert_eq!(
            SetGen::range(1, 5).unwrap().complement().finiteness(),
            Finiteness::Infinite
        );
        assert_eq!(SetGen::All.complement().finiteness(), Finiteness::Finite);
        assert_eq!(
            SetGen::sampled(vec![1, 3], 10).unwrap().finiteness(),
            Finiteness::Unknown
        );
    }

    #[test]
    fn rejects_non_increasing_lists() {
        assert!(SetGen::finite(vec![1, 3, 3]).is_err());
        assert!(SetGen::finite(vec![0, 3]).is_err());
        assert!(SetGen::sampled(vec![1, 30], 10).is_err());
        assert!(SetGen::first(&SetGen::range(1, 3).unwrap(), 5).is_err());
    }
}
