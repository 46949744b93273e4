//! Greedy construction of a ±1 sequence supported on an ideal member that
//! keeps `|(Ax)_{s_n}|` above `3κ/8` along a row subsequence.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{check_t1, RowMatrix};
use crate::sequence::HISTOGRAM_BINS;
use crate::set::SetGen;
use crate::sum::CompensatedSum;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum WitnessStatus {
    /// Every requested step was built and checked.
    Complete,
    /// Row sums over the set show no nonzero accumulation point on the
    /// evaluated rows: T3 holds at this scale.
    NoAccumulationPoint,
    /// The greedy search ran out of rows before finishing.
    Stalled { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessStep {
    pub s: u64,
    pub m: u64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `(Ax)_s` for the final sequence `x`.
    pub ax: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessTrace {
    pub kappa: f64,
    pub max_n: u64,
    /// Rows `n <= maxN` with `7κ/8 < Σ_{k∈I} |a_{n,k}| < 9κ/8`.
    pub band_rows: u64,
    pub m0: u64,
    pub steps: Vec<WitnessStep>,
    /// Signs `x_{i_j}` for `j = 1..=m_last`; `x` is `-1` on later elements of
    /// the set and `0` off it.
    pub signs: Vec<i8>,
    #[serde(flatten)]
    pub status: WitnessStatus,
}

impl WitnessTrace {
    /// All recorded steps satisfy the three inequalities and the lower bound.
    pub fn all_steps_hold(&self) -> bool {
        self.steps.iter().all(|s| s.holds)
    }
}

/// Accumulation point of `values` away from zero, read from the second half
/// of the rows: 64 bins over `[0, max]`, the fullest nonzero bin that is hit
/// in both the third and the fourth quarter (ties go to the larger value),
/// refined to the mean of its members.
fn detect_kappa(values: &[f64]) -> Option<f64> {
    let top = values.iter().copied().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return None;
    }
    let n = values.len();
    let bin_of = |v: f64| ((v / top * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
    let mut counts = vec![[0usize; 2]; HISTOGRAM_BINS];
    let half = n / 2;
    let three_quarters = n - n / 4;
    for (i, &v) in values.iter().enumerate().skip(half) {
        let q = usize::from(i >= three_quarters);
        counts[bin_of(v)][q] += 1;
    }
    let best = (1..HISTOGRAM_BINS)
        .filter(|&b| counts[b][0] > 0 && counts[b][1] > 0)
        .max_by_key(|&b| (counts[b][0] + counts[b][1], b))?;
    let mut acc = CompensatedSum::new();
    let mut members = 0usize;
    for &v in values.iter().skip(half).filter(|&&v| bin_of(v) == best) {
        acc.add(v);
        members += 1;
    }
    Some(acc.value() / members as f64)
}

/// Entries of row `n` on the set, as `(rank j, a_{n,i_j})` with `j` increasing.
fn entries_on_set(a: &RowMatrix, n: u64, set: &SetGen) -> Result<Vec<(u64, f64)>> {
    Ok(a.row(n)?
        .into_iter()
        .filter(|&(k, _)| set.contains(k))
        .map(|(k, v)| (set.count_upto(k), v))
        .collect())
}

fn mass_upto(entries: &[(u64, f64)], m: u64) -> f64 {
    entries
        .iter()
        .filter(|e| e.0 <= m)
        .map(|e| e.1.abs())
        .collect::<CompensatedSum>()
        .value()
}

/// Builds the witness sequence for a matrix whose absolute row sums over
/// `i_set` do not vanish.
///
/// Step `n` picks the smallest row `s_n > s_{n-1}` in the band with
/// `Σ_{j <= m_{n-1}} |a_{s_n,i_j}| <= κ/8` (with `m_0 = 1`, the first step
/// included), then the least `m_n > m_{n-1}` with
/// `Σ_{j <= m_n} |a_{s_n,i_j}| >= 7κ/8`.
pub fn construct_t3_witness(
    a: &RowMatrix,
    i_set: &SetGen,
    max_n: u64,
    steps: usize,
) -> Result<WitnessTrace> {
    let t1 = check_t1(a, max_n)?;
    if !t1.verdict.is_satisfied() {
        return Err(Error::Precondition(format!(
            "row norms of {a} are not shown bounded: {}",
            t1.verdict
        )));
    }
    let sums = a.abs_row_sums_over(i_set, max_n)?;
    let m0 = 1u64;
    let Some(kappa) = detect_kappa(&sums) else {
        return Ok(WitnessTrace {
            kappa: 0.0,
            max_n,
            band_rows: 0,
            m0,
            steps: Vec::new(),
            signs: Vec::new(),
            status: WitnessStatus::NoAccumulationPoint,
        });
    };
    let lo = 7.0 * kappa / 8.0;
    let hi = 9.0 * kappa / 8.0;
    let band: Vec<u64> = sums
        .iter()
        .enumerate()
        .filter(|(_, &v)| lo < v && v < hi)
        .map(|(i, _)| i as u64 + 1)
        .collect();

    struct Chosen {
        s: u64,
        m_prev: u64,
        m: u64,
        entries: Vec<(u64, f64)>,
    }
    let mut chosen: Vec<Chosen> = Vec::new();
    let mut m_prev = m0;
    let mut cursor = 0usize;
    let mut status = WitnessStatus::Complete;
    while chosen.len() < steps {
        let mut found = None;
        while cursor < band.len() {
            let s = band[cursor];
            cursor += 1;
            let entries = entries_on_set(a, s, i_set)?;
            if mass_upto(&entries, m_prev) <= kappa / 8.0 {
                found = Some((s, entries));
                break;
            }
        }
        let Some((s, entries)) = found else {
            status = WitnessStatus::Stalled {
                reason: format!(
                    "no admissible row in the band below {max_n} after {} steps",
                    chosen.len()
                ),
            };
            break;
        };
        let mut running = CompensatedSum::new();
        let mut reach = None;
        for &(j, v) in &entries {
            running.add(v.abs());
            if running.value() >= lo {
                reach = Some(j);
                break;
            }
        }
        let reach = reach.ok_or_else(|| {
            Error::Consistency(format!("row {s} is in the band but its mass stays below 7κ/8"))
        })?;
        let m = reach.max(m_prev + 1);
        chosen.push(Chosen {
            s,
            m_prev,
            m,
            entries,
        });
        m_prev = m;
    }

    let m_last = chosen.last().map_or(m0, |c| c.m);
    let mut signs = vec![-1i8; m_last as usize];
    for c in &chosen {
        for &(j, v) in &c.entries {
            if j > c.m_prev && j <= c.m && v > 0.0 {
                signs[j as usize - 1] = 1;
            }
        }
    }
    let x_at_rank = |j: u64| -> f64 {
        match signs.get(j as usize - 1) {
            Some(&s) => f64::from(s),
            None => -1.0,
        }
    };
    let steps_out = chosen
        .iter()
        .map(|c| {
            let mut alpha = CompensatedSum::new();
            let mut beta = CompensatedSum::new();
            let mut gamma = CompensatedSum::new();
            for &(j, v) in &c.entries {
                if j <= c.m_prev {
                    alpha.add(v.abs());
                } else if j <= c.m {
                    beta.add(v.abs());
                } else {
                    gamma.add(v.abs());
                }
            }
            let ax: CompensatedSum = c.entries.iter().map(|&(j, v)| v * x_at_rank(j)).collect();
            let (alpha, beta, gamma, ax) = (alpha.value(), beta.value(), gamma.value(), ax.value());
            let total = alpha + beta + gamma;
            let holds = alpha <= kappa / 8.0
                && alpha + beta >= lo
                && lo < total
                && total < hi
                && ax.abs() > 3.0 * kappa / 8.0;
            WitnessStep {
                s: c.s,
                m: c.m,
                alpha,
                beta,
                gamma,
                ax,
                holds,
            }
        })
        .collect();
    Ok(WitnessTrace {
        kappa,
        max_n,
        band_rows: band.len() as u64,
        m0,
        steps: steps_out,
        signs,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_detection() {
        assert_eq!(detect_kappa(&[0.0; 100]), None);
        assert_eq!(detect_kappa(&[1.0; 100]), Some(1.0));
        // a spike early on and nothing late is not an accumulation point
        let mut v = vec![0.0; 100];
        v[3] = 2.0;
        assert_eq!(detect_kappa(&v), None);
        // mass in both late quarters wins over a larger but one-sided bin
        let mut v = vec![0.0; 100];
        for x in v.iter_mut().skip(50) {
            *x = 0.5;
        }
        for x in v.iter_mut().skip(80) {
            *x = 1.0;
        }
        assert_eq!(detect_kappa(&v), Some(0.5));
    }
}
