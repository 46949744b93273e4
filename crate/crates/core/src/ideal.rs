//! Admissible ideals on the positive integers and finite-scale membership tests.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::density::{upper_density, uniform_density_zero_test, window_start, CheckpointPlan, DensityEstimate};
use crate::error::{Error, Result};
use crate::set::{Finiteness, SetGen};
use crate::verdict::{Verdict, Witness};
use crate::weight::Weight;

pub const DEFAULT_ZERO_TOL: f64 = 1e-2;

/// Estimates at or above `VIOLATION_FACTOR * zeroTol` count as nonzero.
pub const VIOLATION_FACTOR: f64 = 10.0;

/// A tail is "persistent" when the late half of the window keeps at least
/// this fraction of the early half's maximum.
pub const PERSISTENCE: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub enum IdealSpec {
    /// Finite sets.
    Fin,
    /// Sets of asymptotic density zero.
    AsymptoticZero,
    /// `Z_g`: sets with `limsup |S ∩ [1,n]| / g(n) = 0`.
    SimpleDensity(Weight),
    /// Sets of uniform density zero.
    UniformZero,
}

impl IdealSpec {
    /// Weight of the density functional defining the ideal, if any.
    pub fn weight(&self) -> Option<Weight> {
        match self {
            IdealSpec::Fin | IdealSpec::UniformZero => None,
            IdealSpec::AsymptoticZero => Some(Weight::Linear),
            IdealSpec::SimpleDensity(g) => Some(g.clone()),
        }
    }

    /// Weight used for reporting densities; `n` when the ideal has none.
    pub fn reporting_weight(&self) -> Weight {
        self.weight().unwrap_or(Weight::Linear)
    }
}

impl fmt::Display for IdealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealSpec::Fin => write!(f, "fin"),
            IdealSpec::AsymptoticZero => write!(f, "z"),
            IdealSpec::SimpleDensity(g) => write!(f, "zg:{g}"),
            IdealSpec::UniformZero => write!(f, "uniform"),
        }
    }
}

impl Serialize for IdealSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Checks on the checkpoint grid that `g` grows without bound over
/// `[1, max_n]`: its minimum over the last quarter exceeds its maximum over
/// the first quarter.
pub fn weight_diverges(g: &Weight, max_n: u64) -> Result<bool> {
    let pts = CheckpointPlan::default().points(max_n, &[])?;
    let head_end = window_start(max_n);
    let tail_start = max_n - max_n / 4;
    let mut head_max = f64::NEG_INFINITY;
    let mut tail_min = f64::INFINITY;
    for &n in &pts {
        let v = g.eval(n)?;
        if n <= head_end {
            head_max = head_max.max(v);
        }
        if n >= tail_start {
            tail_min = tail_min.min(v);
        }
    }
    Ok(tail_min > head_max)
}

/// Three-valued reading of a density estimate against `zero_tol`.
pub fn classify_density(est: &DensityEstimate, zero_tol: f64) -> Verdict {
    let (early, late) = est.envelope();
    if est.value <= zero_tol && late <= early {
        return Verdict::Satisfied;
    }
    if est.value >= VIOLATION_FACTOR * zero_tol && late >= PERSISTENCE * early {
        let (n, ratio) = est.argmax().unwrap_or((est.max_n, est.value));
        return Verdict::Violated {
            witness: Witness::Checkpoint { n, ratio },
        };
    }
    Verdict::inconclusive(format!(
        "estimate {:.6} (tolerance {zero_tol}), tail envelope {early:.6} -> {late:.6}",
        est.value
    ))
}

fn fin_verdict(set: &SetGen, max_n: u64) -> Verdict {
    match set.finiteness() {
        Finiteness::Finite => Verdict::Satisfied,
        Finiteness::Infinite => match set.iter().find(|&v| v > max_n) {
            Some(v) => Verdict::Violated {
                witness: Witness::Index(v),
            },
            None => Verdict::inconclusive("no element beyond maxN is representable"),
        },
        Finiteness::Unknown => {
            let horizon = set.horizon().map_or(max_n, |h| h.min(max_n));
            let last = set.iter_upto(horizon).last();
            match last {
                None => Verdict::Satisfied,
                Some(v) if v <= horizon / 2 => Verdict::Satisfied,
                Some(v) if v * 10 > horizon * 9 => Verdict::Violated {
                    witness: Witness::Index(v),
                },
                Some(v) => Verdict::inconclusive(format!(
                    "last element {v} lies in the second half of [1, {horizon}]"
                )),
            }
        }
    }
}

fn default_window_lens(max_n: u64) -> Vec<u64> {
    let mut lens: Vec<u64> = [64, 16, 4].iter().map(|d| (max_n / d).max(1)).collect();
    lens.dedup();
    lens
}

/// Membership test with the density estimate that backs it.
///
/// Fin uses the generator's finiteness (sampled sets: emptiness of the
/// second half of the known range). Every ideal here is admissible, so a set
/// accepted by the Fin test is accepted outright. Otherwise density ideals
/// use the tail estimate and its envelope: satisfied when the estimate is
/// within `zero_tol` and not rising, violated when it is at least ten times
/// that and persistent.
pub fn membership(
    set: &SetGen,
    ideal: &IdealSpec,
    max_n: u64,
    zero_tol: f64,
) -> Result<(Verdict, DensityEstimate)> {
    if !(zero_tol > 0.0) {
        return Err(Error::argument(format!("zeroTol must be positive, got {zero_tol}")));
    }
    if let Some(h) = set.horizon() {
        if max_n > h {
            return Err(Error::argument(format!(
                "set {set} is only known up to {h}, cannot test up to {max_n}"
            )));
        }
    }
    let plan = CheckpointPlan::default();
    match ideal {
        IdealSpec::Fin => {
            let est = upper_density(set, &Weight::Linear, max_n, &plan)?;
            Ok((fin_verdict(set, max_n), est))
        }
        _ if fin_verdict(set, max_n).is_satisfied() => {
            let est = upper_density(set, &ideal.reporting_weight(), max_n, &plan)?;
            Ok((Verdict::Satisfied, est))
        }
        IdealSpec::AsymptoticZero | IdealSpec::SimpleDensity(_) => {
            let g = ideal.reporting_weight();
            if let IdealSpec::SimpleDensity(g) = ideal {
                if !weight_diverges(g, max_n)? {
                    return Err(Error::Precondition(format!(
                        "weight {g} does not grow without bound on [1, {max_n}]"
                    )));
                }
            }
            let est = upper_density(set, &g, max_n, &plan)?;
            Ok((classify_density(&est, zero_tol), est))
        }
        IdealSpec::UniformZero => {
            let est = uniform_density_zero_test(set, max_n, &default_window_lens(max_n))?;
            Ok((classify_density(&est, zero_tol), est))
        }
    }
}

pub fn in_ideal(set: &SetGen, ideal: &IdealSpec, max_n: u64, zero_tol: f64) -> Result<Verdict> {
    membership(set, ideal, max_n, zero_tol).map(|(v, _)| v)
}
