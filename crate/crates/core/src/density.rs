//! Finite-prefix estimators for upper densities.
//!
//! `limsup_n |S ∩ [1,n]| / g(n)` is approximated by the maximum ratio over
//! checkpoints in the tail window `n >= maxN/4`; counts are exact integers
//! and only the final division is floating point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::SetGen;
use crate::weight::Weight;

/// Growth factor of the default geometric checkpoint grid.
pub const DEFAULT_GRID_RATIO: f64 = 1.25;

#[derive(Clone, Debug, PartialEq)]
pub enum CheckpointPlan {
    /// `n = ceil(ratio^j)` for j = 0, 1, ...
    Geometric { ratio: f64 },
    /// Every `n` in `[1, maxN]`.
    Every,
    Explicit(Vec<u64>),
}

impl Default for CheckpointPlan {
    fn default() -> Self {
        CheckpointPlan::Geometric {
            ratio: DEFAULT_GRID_RATIO,
        }
    }
}

/// Smallest `n` inside the tail window `n >= max_n / 4`.
pub fn window_start(max_n: u64) -> u64 {
    max_n.div_ceil(4).max(1)
}

/// Split point between the early and late halves of the tail window.
pub fn window_mid(max_n: u64) -> u64 {
    max_n.div_ceil(2).max(1)
}

impl CheckpointPlan {
    /// Sorted, deduplicated checkpoints in `[1, max_n]`. Always contains
    /// `max_n`, the window start and the window midpoint, plus `forced`.
    pub fn points(&self, max_n: u64, forced: &[u64]) -> Result<Vec<u64>> {
        if max_n == 0 {
            return Err(Error::argument("maxN must be at least 1"));
        }
        let mut pts: Vec<u64> = match self {
            CheckpointPlan::Geometric { ratio } => {
                if !(*ratio > 1.0) {
                    return Err(Error::argument(format!(
                        "geometric checkpoint ratio must exceed 1, got {ratio}"
                    )));
                }
                let mut v = Vec::new();
                let mut j = 0i32;
                loop {
                    let p = ratio.powi(j).ceil();
                    if p > max_n as f64 {
                        break;
                    }
                    v.push(p as u64);
                    j += 1;
                }
                v
            }
            CheckpointPlan::Every => (1..=max_n).collect(),
            CheckpointPlan::Explicit(v) => v.clone(),
        };
        pts.extend(forced.iter().copied());
        pts.extend([max_n, window_start(max_n), window_mid(max_n)]);
        pts.retain(|&n| n >= 1 && n <= max_n);
        pts.sort_unstable();
        pts.dedup();
        Ok(pts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EstimateMode {
    /// Maximum over every checkpoint.
    RunningMax,
    /// Maximum over checkpoints `n >= maxN/4`.
    TailMax,
    /// Sliding-window maxima, one entry per window length.
    WindowMax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub mode: EstimateMode,
    #[serde(rename = "maxN")]
    pub max_n: u64,
    pub checkpoints: Vec<(u64, f64)>,
}

impl DensityEstimate {
    fn in_window(&self) -> impl Iterator<Item = &(u64, f64)> + '_ {
        let start = match self.mode {
            EstimateMode::TailMax => window_start(self.max_n),
            _ => 0,
        };
        self.checkpoints.iter().filter(move |(n, _)| *n >= start)
    }

    /// Maximum ratio over the early and the late half of the window.
    ///
    /// For `TailMax` the halves are `[maxN/4, maxN/2)` and `[maxN/2, maxN]`;
    /// otherwise the window entries are split by position. A one-sided
    /// window reports the same value twice.
    pub fn envelope(&self) -> (f64, f64) {
        let entries: Vec<&(u64, f64)> = self.in_window().collect();
        let max_of = |it: &[&(u64, f64)]| it.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        let split = match self.mode {
            EstimateMode::TailMax => {
                let mid = window_mid(self.max_n);
                entries.partition_point(|e| e.0 < mid)
            }
            _ => entries.len() / 2,
        };
        let (early, late) = entries.split_at(split);
        match (early.is_empty(), late.is_empty()) {
            (true, true) => (0.0, 0.0),
            (true, false) => (max_of(late), max_of(late)),
            (false, true) => (max_of(early), max_of(early)),
            (false, false) => (max_of(early), max_of(late)),
        }
    }

    /// The checkpoint attaining the estimate.
    pub fn argmax(&self) -> Option<(u64, f64)> {
        self.in_window()
            .copied()
            .fold(None, |best: Option<(u64, f64)>, e| match best {
                Some(b) if b.1 >= e.1 => Some(b),
                _ => Some(e),
            })
    }

    /// Ratio recorded at checkpoint `n`, if any.
    pub fn ratio_at(&self, n: u64) -> Option<f64> {
        self.checkpoints
            .binary_search_by_key(&n, |e| e.0)
            .ok()
            .map(|i| self.checkpoints[i].1)
    }
}

/// Checks `g(n) > 0` for every `n <= max_n`, reporting the smallest offender.
pub fn validate_weight(g: &Weight, max_n: u64) -> Result<()> {
    if g.domain_limit() < max_n {
        return Err(Error::OutOfRange {
            what: format!("weight {g}"),
            n: max_n,
            limit: g.domain_limit(),
        });
    }
    match g {
        Weight::Linear | Weight::Square | Weight::NLog => Ok(()),
        _ => {
            let bad = (1..=max_n).into_par_iter().find_first(|&n| g.eval(n).is_err());
            match bad {
                Some(n) => g.eval(n).map(|_| ()),
                None => Ok(()),
            }
        }
    }
}

/// Exact counts `|S ∩ [1, n]|` at each (sorted) checkpoint.
pub fn counts_at(set: &SetGen, points: &[u64]) -> Vec<u64> {
    match set {
        SetGen::Union(..) => {
            let last = points.last().copied().unwrap_or(0);
            let mut out = Vec::with_capacity(points.len());
            let mut it = set.iter_upto(last).peekable();
            let mut count = 0u64;
            for &p in points {
                while it.next_if(|&v| v <= p).is_some() {
                    count += 1;
                }
                out.push(count);
            }
            out
        }
        _ => points.par_iter().map(|&p| set.count_upto(p)).collect(),
    }
}

/// Tail-window estimate of the upper `g`-density of `set` on `[1, max_n]`.
pub fn upper_density(
    set: &SetGen,
    g: &Weight,
    max_n: u64,
    plan: &CheckpointPlan,
) -> Result<DensityEstimate> {
    validate_weight(g, max_n)?;
    let points = plan.points(max_n, &set.boundaries(max_n))?;
    let counts = counts_at(set, &points);
    let checkpoints = points
        .iter()
        .zip(&counts)
        .map(|(&n, &c)| Ok((n, c as f64 / g.eval(n)?)))
        .collect::<Result<Vec<_>>>()?;
    let start = window_start(max_n);
    let value = checkpoints
        .iter()
        .filter(|(n, _)| *n >= start)
        .map(|e| e.1)
        .fold(0.0, f64::max);
    Ok(DensityEstimate {
        value,
        mode: EstimateMode::TailMax,
        max_n,
        checkpoints,
    })
}

/// Running maximum over all checkpoints instead of the tail window.
pub fn running_max_density(
    set: &SetGen,
    g: &Weight,
    max_n: u64,
    plan: &CheckpointPlan,
) -> Result<DensityEstimate> {
    let mut est = upper_density(set, g, max_n, plan)?;
    est.value = est.checkpoints.iter().map(|e| e.1).fold(0.0, f64::max);
    est.mode = EstimateMode::RunningMax;
    Ok(est)
}

/// Prefix counts `c[n] = |S ∩ [1, n]|` for `n = 0..=max_n`.
pub(crate) fn prefix_counts(set: &SetGen, max_n: u64) -> Vec<u32> {
    let mut c = vec![0u32; max_n as usize + 1];
    for v in set.iter_upto(max_n) {
        c[v as usize] = 1;
    }
    for i in 1..c.len() {
        c[i] += c[i - 1];
    }
    c
}

/// For each window length `L`, the maximum of `|S ∩ [k+1, k+L]| / L` over
/// windows inside `[1, max_n]`. The estimate's value is the entry for the
/// largest length.
pub fn uniform_density_zero_test(
    set: &SetGen,
    max_n: u64,
    window_lens: &[u64],
) -> Result<DensityEstimate> {
    if window_lens.is_empty() {
        return Err(Error::argument("window length list is empty"));
    }
    if let Some(&bad) = window_lens.iter().find(|&&l| l == 0 || l > max_n) {
        return Err(Error::argument(format!(
            "window length {bad} outside [1, maxN = {max_n}]"
        )));
    }
    let mut lens = window_lens.to_vec();
    lens.sort_unstable();
    lens.dedup();
    let prefix = prefix_counts(set, max_n);
    let checkpoints: Vec<(u64, f64)> = lens
        .par_iter()
        .map(|&len| {
            let l = len as usize;
            let best = (0..=prefix.len() - 1 - l)
                .map(|k| prefix[k + l] - prefix[k])
                .max()
                .unwrap_or(0);
            (len, best as f64 / len as f64)
        })
        .collect();
    let value = checkpoints.last().map(|e| e.1).unwrap_or(0.0);
    Ok(DensityEstimate {
        value,
        mode: EstimateMode::WindowMax,
        max_n,
        checkpoints,
    })
}
