//! Density criteria for permutations: Lévy-group membership, images of
//! ideal members, the zero limit point of `σ̂` and the weight growth
//! condition.

use rayon::prelude::*;
use serde::Serialize;

use super::{sigma_hat, Permutation};
use crate::density::{window_start, CheckpointPlan, DensityEstimate, EstimateMode};
use crate::error::{Error, Result};
use crate::ideal::{classify_density, membership, IdealSpec, VIOLATION_FACTOR};
use crate::matrix::{check_t1, check_t2, check_t3, ConditionReport, RowMatrix};
use crate::report::display;
use crate::sequence::{check_eps_grid, verify_ideal_limit_values, IdealLimitReport};
use crate::set::SetGen;
use crate::verdict::Verdict;
use crate::weight::Weight;

pub const DEFAULT_P4_EPS_GRID: [f64; 4] = [0.5, 0.2, 0.1, 0.05];

/// The forward image route enumerates `E ∩ [1, L]`; beyond this multiple of
/// `maxN` the inverse route is used instead.
const FORWARD_SPAN_FACTOR: u64 = 64;

fn check_domain(sigma: &Permutation, max_n: u64) -> Result<()> {
    if max_n == 0 {
        return Err(Error::argument("maxN must be at least 1"));
    }
    if sigma.domain_limit() < max_n {
        return Err(Error::OutOfRange {
            what: format!("permutation {sigma}"),
            n: max_n,
            limit: sigma.domain_limit(),
        });
    }
    Ok(())
}

/// Evaluates `f(1..=max_n)` in parallel, reporting the first error.
fn eval_prefix<T: Send>(max_n: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    let raw: Vec<Result<T>> = (1..=max_n).into_par_iter().map(f).collect();
    raw.into_iter().collect()
}

/// `E(n) = |{k <= n : σ(k) > n}|` for `n = 1..=max_n`, by the sweep
/// `E(n) = E(n-1) + [σ(n) > n] - [σ^{-1}(n) < n]`.
pub fn escaper_counts(sigma: &Permutation, max_n: u64) -> Result<Vec<u64>> {
    check_domain(sigma, max_n)?;
    let steps = eval_prefix(max_n, |n| {
        Ok((sigma.forward(n)? > n, sigma.inverse(n)? < n))
    })?;
    let mut out = Vec::with_capacity(steps.len());
    let mut e = 0u64;
    for (gain, loss) in steps {
        e = e + u64::from(gain) - u64::from(loss);
        out.push(e);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevyReport {
    #[serde(serialize_with = "display")]
    pub permutation: Permutation,
    pub estimate: DensityEstimate,
    pub verdict: Verdict,
}

/// `lim_n |{k <= n : σ(k) > n}| / n = 0`, read like a density.
pub fn levy_group_test(
    sigma: &Permutation,
    max_n: u64,
    plan: &CheckpointPlan,
    zero_tol: f64,
) -> Result<LevyReport> {
    let counts = escaper_counts(sigma, max_n)?;
    let points = plan.points(max_n, &[])?;
    let checkpoints: Vec<(u64, f64)> = points
        .iter()
        .map(|&n| (n, counts[n as usize - 1] as f64 / n as f64))
        .collect();
    let start = window_start(max_n);
    let value = checkpoints
        .iter()
        .filter(|(n, _)| *n >= start)
        .map(|e| e.1)
        .fold(0.0, f64::max);
    let estimate = DensityEstimate {
        value,
        mode: EstimateMode::TailMax,
        max_n,
        checkpoints,
    };
    let verdict = classify_density(&estimate, zero_tol);
    Ok(LevyReport {
        permutation: sigma.clone(),
        estimate,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "route", rename_all = "camelCase")]
pub enum ImageRoute {
    /// `σ` applied to `E ∩ [1, L]`, `L = max_{n <= maxN} σ^{-1}(n)`.
    #[serde(rename_all = "camelCase")]
    Forward { preimage_bound: u64 },
    /// `n ∈ σ(E)` iff `σ^{-1}(n) ∈ E`, for each `n <= maxN`.
    Inverse,
}

pub(crate) fn image_forward(sigma: &Permutation, e: &SetGen, max_n: u64, bound: u64) -> Result<Vec<u64>> {
    let pre = e.elements_upto(bound);
    let mapped: Vec<Result<u64>> = pre.par_iter().map(|&k| sigma.forward(k)).collect();
    let mut out = Vec::new();
    for v in mapped {
        let v = v?;
        if v <= max_n {
            out.push(v);
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub(crate) fn image_inverse(sigma: &Permutation, e: &SetGen, max_n: u64) -> Result<Vec<u64>> {
    let hits = eval_prefix(max_n, |n| Ok(e.contains(sigma.inverse(n)?)))?;
    Ok(hits
        .iter()
        .enumerate()
        .filter(|(_, &h)| h)
        .map(|(i, _)| i as u64 + 1)
        .collect())
}

/// `σ(E) ∩ [1, max_n]` as a set sampled on `[1, max_n]`.
pub fn image_set(sigma: &Permutation, e: &SetGen, max_n: u64) -> Result<(SetGen, ImageRoute)> {
    check_domain(sigma, max_n)?;
    let preimages = eval_prefix(max_n, |n| sigma.inverse(n))?;
    let bound = preimages.into_iter().max().unwrap_or(0);
    let (elements, route) = if bound <= FORWARD_SPAN_FACTOR.saturating_mul(max_n) {
        (
            image_forward(sigma, e, max_n, bound)?,
            ImageRoute::Forward {
                preimage_bound: bound,
            },
        )
    } else {
        (image_inverse(sigma, e, max_n)?, ImageRoute::Inverse)
    };
    Ok((SetGen::sampled(elements, max_n)?, route))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ImageReport {
    #[serde(serialize_with = "display")]
    pub permutation: Permutation,
    #[serde(serialize_with = "display")]
    pub set: SetGen,
    pub ideal: IdealSpec,
    pub route: ImageRoute,
    pub image_size: u64,
    pub estimate: DensityEstimate,
    pub verdict: Verdict,
}

/// `σ(E) ∈ J` for one declared member `E` of `I`.
pub fn check_p3(
    sigma: &Permutation,
    e: &SetGen,
    j: &IdealSpec,
    max_n: u64,
    zero_tol: f64,
) -> Result<ImageReport> {
    let (image, route) = image_set(sigma, e, max_n)?;
    let (verdict, estimate) = membership(&image, j, max_n, zero_tol)?;
    Ok(ImageReport {
        permutation: sigma.clone(),
        set: e.clone(),
        ideal: j.clone(),
        route,
        image_size: image.count_upto(max_n),
        estimate,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroLimitEntry {
    pub eps: f64,
    pub size: u64,
    pub estimate: DensityEstimate,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ZeroLimitReport {
    #[serde(serialize_with = "display")]
    pub permutation: Permutation,
    pub ideal: IdealSpec,
    pub eps_grid: Vec<f64>,
    pub per_eps: Vec<ZeroLimitEntry>,
    /// Satisfied when 0 is not a limit point of `σ̂` along sets outside the ideal.
    pub verdict: Verdict,
}

fn ideal_of_weight(h: &Weight) -> IdealSpec {
    match h {
        Weight::Linear => IdealSpec::AsymptoticZero,
        other => IdealSpec::SimpleDensity(other.clone()),
    }
}

/// `lim_{ε -> 0+} d*_h(E_ε) = 0` with `E_ε = {n : σ̂_n < ε}`.
///
/// The sets shrink as `ε` decreases, so the estimates are non-increasing
/// along the grid. Satisfied when the smallest `ε` yields a set in the ideal,
/// violated when every estimate stays at least ten times `zero_tol`.
pub fn check_p4_zero_limit_point(
    sigma: &Permutation,
    h: &Weight,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<ZeroLimitReport> {
    check_eps_grid(eps_grid)?;
    check_domain(sigma, max_n)?;
    let hats = eval_prefix(max_n, |n| sigma_hat(sigma, n))?;
    let ideal = ideal_of_weight(h);
    let per_eps = eps_grid
        .par_iter()
        .map(|&eps| {
            let elements: Vec<u64> = hats
                .iter()
                .enumerate()
                .filter(|(_, &s)| s < eps)
                .map(|(i, _)| i as u64 + 1)
                .collect();
            let size = elements.len() as u64;
            let set = SetGen::sampled(elements, max_n)?;
            let (verdict, estimate) = membership(&set, &ideal, max_n, zero_tol)?;
            Ok(ZeroLimitEntry {
                eps,
                size,
                estimate,
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let last = per_eps.last().expect("grid is nonempty");
    let verdict = if last.verdict.is_satisfied() {
        Verdict::Satisfied
    } else if last.verdict.is_violated()
        && per_eps
            .iter()
            .all(|e| e.estimate.value >= VIOLATION_FACTOR * zero_tol)
    {
        last.verdict.clone()
    } else {
        Verdict::inconclusive(format!(
            "estimate at eps = {} is {:.6}",
            last.eps, last.estimate.value
        ))
    };
    Ok(ZeroLimitReport {
        permutation: sigma.clone(),
        ideal,
        eps_grid: eps_grid.to_vec(),
        per_eps,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioTrace {
    pub ratio: String,
    pub sup: f64,
    /// Running maximum before the final quarter.
    pub window_sup: f64,
    pub trace: Vec<(u64, f64)>,
    pub verdict: Verdict,
}

fn ratio_trace(label: String, values: &[f64], max_n: u64) -> Result<RatioTrace> {
    let quarter_start = max_n - max_n / 4;
    let mut running = f64::NEG_INFINITY;
    let mut window_sup = f64::NEG_INFINITY;
    let mut running_at = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        running = running.max(v);
        if i as u64 + 1 == quarter_start {
            window_sup = running;
        }
        running_at.push(running);
    }
    let pts = CheckpointPlan::default().points(max_n, &[quarter_start])?;
    let trace = pts.iter().map(|&n| (n, running_at[n as usize - 1])).collect();
    let verdict = if running <= window_sup {
        Verdict::Satisfied
    } else {
        Verdict::inconclusive(format!(
            "running max of {label} grew from {window_sup} to {running} over the final quarter"
        ))
    };
    Ok(RatioTrace {
        ratio: label,
        sup: running,
        window_sup,
        trace,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaEntry {
    pub alpha: f64,
    pub ratio: RatioTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthReport {
    #[serde(serialize_with = "display")]
    pub g: Weight,
    #[serde(serialize_with = "display")]
    pub h: Weight,
    #[serde(rename = "maxN")]
    pub max_n: u64,
    /// `n / g(n)`
    pub linear: RatioTrace,
    pub per_alpha: Vec<AlphaEntry>,
    pub verdict: Verdict,
}

/// `limsup n/g(n) < ∞` and `limsup g(⌊αn⌋)/h(n) < ∞` for each `α`.
///
/// Every `n <= max_n` is evaluated; a ratio whose running maximum still grows
/// over the final quarter makes the verdict inconclusive.
pub fn check_growth_condition(g: &Weight, h: &Weight, alphas: &[f64], max_n: u64) -> Result<GrowthReport> {
    if max_n == 0 {
        return Err(Error::argument("maxN must be at least 1"));
    }
    if alphas.is_empty() {
        return Err(Error::argument("alpha list is empty"));
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a > 1.0 && a.is_finite())) {
        return Err(Error::argument(format!("alpha must exceed 1, got {a}")));
    }
    for (w, reach) in [(h, max_n)]
        .into_iter()
        .chain(alphas.iter().map(|&a| (g, (a * max_n as f64).floor() as u64)))
    {
        if w.domain_limit() < reach {
            return Err(Error::OutOfRange {
                what: format!("weight {w}"),
                n: reach,
                limit: w.domain_limit(),
            });
        }
    }
    let linear_values = eval_prefix(max_n, |n| Ok(n as f64 / g.eval(n)?))?;
    let linear = ratio_trace(format!("n/g(n), g = {g}"), &linear_values, max_n)?;
    let per_alpha = alphas
        .iter()
        .map(|&alpha| {
            let values = eval_prefix(max_n, |n| {
                let m = (alpha * n as f64).floor() as u64;
                Ok(g.eval(m)? / h.eval(n)?)
            })?;
            let ratio = ratio_trace(format!("g(floor({alpha} n))/h(n)"), &values, max_n)?;
            Ok(AlphaEntry { alpha, ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = Verdict::all(
        std::iter::once(linear.verdict.clone()).chain(per_alpha.iter().map(|e| e.ratio.verdict.clone())),
    );
    Ok(GrowthReport {
        g: g.clone(),
        h: h.clone(),
        max_n,
        linear,
        per_alpha,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyEntry {
    pub p3: ImageReport,
    pub t3: ConditionReport,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PermutationRegularityReport {
    #[serde(serialize_with = "display")]
    pub permutation: Permutation,
    pub ideal_i: IdealSpec,
    pub ideal_j: IdealSpec,
    pub family: Vec<FamilyEntry>,
    pub t1: ConditionReport,
    pub t2: ConditionReport,
    pub levy: LevyReport,
    pub zero_limit_point: ZeroLimitReport,
    /// `n / σ(n) -> 1` in Z, reported next to the Lévy test without
    /// asserting any relation between them.
    pub inverse_sigma_hat: IdealLimitReport,
    pub disagreements: Vec<String>,
    /// Conjunction of the image checks over the family.
    pub verdict: Verdict,
}

impl PermutationRegularityReport {
    pub fn consistent(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Image criterion over a declared family of `I`, cross-checked against T3
/// of the permutation matrix (`A_σ 1_E = 1_{σ(E)}`).
#[allow(clippy::too_many_arguments)]
pub fn permutation_regularity(
    sigma: &Permutation,
    i: &IdealSpec,
    family: &[SetGen],
    j: &IdealSpec,
    max_n: u64,
    eps_grid: &[f64],
    zero_tol: f64,
) -> Result<PermutationRegularityReport> {
    check_eps_grid(eps_grid)?;
    let a = RowMatrix::Permutation(sigma.clone());
    let mut disagreements = Vec::new();
    let mut entries = Vec::with_capacity(family.len());
    for e in family {
        let p3 = check_p3(sigma, e, j, max_n, zero_tol)?;
        let t3 = check_t3(&a, e, i, j, max_n, eps_grid, zero_tol)?;
        let agree = p3.verdict.label() == t3.verdict.label();
        if !agree {
            disagreements.push(format!(
                "{e}: image check {} but T3 {}",
                p3.verdict.label(),
                t3.verdict.label()
            ));
        }
        entries.push(FamilyEntry { p3, t3, agree });
    }
    let t1 = check_t1(&a, max_n)?;
    let t2 = check_t2(&a, j, max_n, eps_grid, zero_tol)?;
    for r in [&t1, &t2] {
        if !r.verdict.is_satisfied() {
            disagreements.push(format!("{:?} on a permutation matrix is {}", r.condition, r.verdict));
        }
    }
    let levy = levy_group_test(sigma, max_n, &CheckpointPlan::default(), zero_tol)?;
    let zero_limit_point = check_p4_zero_limit_point(
        sigma,
        &j.reporting_weight(),
        max_n,
        &DEFAULT_P4_EPS_GRID,
        zero_tol,
    )?;
    let inverse_hats = eval_prefix(max_n, |n| Ok(n as f64 / sigma.forward(n)? as f64))?;
    let inverse_sigma_hat =
        verify_ideal_limit_values(&inverse_hats, 1.0, &IdealSpec::AsymptoticZero, eps_grid, zero_tol)?;
    let verdict = Verdict::all(entries.iter().map(|e| e.p3.verdict.clone()));
    Ok(PermutationRegularityReport {
        permutation: sigma.clone(),
        ideal_i: i.clone(),
        ideal_j: j.clone(),
        family: entries,
        t1,
        t2,
        levy,
        zero_limit_point,
        inverse_sigma_hat,
        disagreements,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::DEFAULT_ZERO_TOL;
    use crate::sequence::DEFAULT_EPS_GRID;

    const TOL: f64 = DEFAULT_ZERO_TOL;

    fn brute_escapers(sigma: &Permutation, n: u64) -> u64 {
        (1..=n).filter(|&k| sigma.forward(k).unwrap() > n).count() as u64
    }

    /// Odds `2j-1 -> j` and evens `2j -> half + j` on `[1, 2 half]`.
    fn odds_down_evens_out(half: u64) -> Permutation {
        let forward = (1..=2 * half)
            .map(|k| if k % 2 == 1 { k.div_ceil(2) } else { half + k / 2 })
            .collect();
        Permutation::explicit(forward).unwrap()
    }

    #[test]
    fn escaper_sweep_matches_direct_count() {
        let mut perms = Permutation::builtins();
        perms.push(odds_down_evens_out(300));
        for p in perms {
            let c = escaper_counts(&p, 600).unwrap();
            for n in [1u64, 2, 3, 17, 64, 255, 256, 599, 600] {
                assert_eq!(c[n as usize - 1], brute_escapers(&p, n), "{p} at {n}");
            }
        }
    }

    #[test]
    fn levy_group_membership() {
        let plan = CheckpointPlan::default();
        for p in [Permutation::Identity, Permutation::PairSwap] {
            let r = levy_group_test(&p, 100_000, &plan, TOL).unwrap();
            assert!(r.verdict.is_satisfied(), "{p}: {:?}", r.verdict);
        }
        let c = escaper_counts(&Permutation::PairSwap, 1000).unwrap();
        assert!(c.iter().all(|&e| e <= 1));
        let r = levy_group_test(&odds_down_evens_out(20_000), 20_000, &plan, TOL).unwrap();
        assert!(r.verdict.is_violated());
        assert_eq!(r.estimate.ratio_at(20_000), Some(0.5));
    }

    #[test]
    fn image_routes_agree() {
        let sets = [SetGen::Squares, SetGen::evens(), SetGen::range(5, 90).unwrap()];
        for p in Permutation::builtins() {
            let bound = (1..=5000).map(|n| p.inverse(n).unwrap()).max().unwrap();
            for e in &sets {
                let fwd = image_forward(&p, e, 5000, bound).unwrap();
                let inv = image_inverse(&p, e, 5000).unwrap();
                assert_eq!(fwd, inv, "{p} on {e}");
            }
        }
    }

    #[test]
    fn p3_examples() {
        let z = IdealSpec::AsymptoticZero;
        let id = check_p3(&Permutation::Identity, &SetGen::Squares, &z, 100_000, TOL).unwrap();
        assert!(id.verdict.is_satisfied());
        let se = check_p3(&Permutation::SquaresToEvens, &SetGen::Squares, &z, 100_000, TOL).unwrap();
        assert!(se.verdict.is_violated());
        assert_eq!(se.route, ImageRoute::Inverse);
        assert_eq!(se.image_size, 50_000);
        let ps = check_p3(&Permutation::PairSwap, &SetGen::Squares, &z, 100_000, TOL).unwrap();
        assert!(ps.verdict.is_satisfied());
        assert_eq!(ps.image_size, 316);
    }

    #[test]
    fn p4_examples() {
        let h = Weight::Linear;
        for p in [Permutation::Identity, Permutation::PairSwap, Permutation::BlockSwap] {
            let r = check_p4_zero_limit_point(&p, &h, 50_000, &DEFAULT_P4_EPS_GRID, TOL).unwrap();
            assert!(r.verdict.is_satisfied(), "{p}");
            assert!(r.per_eps.iter().all(|e| e.size == 0));
        }
        let r = check_p4_zero_limit_point(&Permutation::SquaresToEvens, &h, 50_000, &DEFAULT_P4_EPS_GRID, TOL)
            .unwrap();
        assert!(r.verdict.is_violated());
        let sizes: Vec<u64> = r.per_eps.iter().map(|e| e.size).collect();
        assert!(sizes.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn growth_examples() {
        let r = check_growth_condition(&Weight::Linear, &Weight::Linear, &[2.0], 100_000).unwrap();
        assert!(r.verdict.is_satisfied());
        assert_eq!(r.per_alpha[0].ratio.sup, 2.0);
        let r = check_growth_condition(&Weight::Linear, &Weight::NLog, &[2.0, 3.5], 100_000).unwrap();
        assert!(r.verdict.is_satisfied());
        let r = check_growth_condition(&Weight::Square, &Weight::Linear, &[2.0], 100_000).unwrap();
        assert!(r.verdict.is_inconclusive());
        assert_eq!(r.per_alpha[0].ratio.sup, 400_000.0);
        let table = Weight::Table(vec![1.0; 150].into());
        assert!(matches!(
            check_growth_condition(&table, &Weight::Linear, &[2.0], 100),
            Err(Error::OutOfRange { n: 200, limit: 150, .. })
        ));
        assert!(check_growth_condition(&Weight::Linear, &Weight::Linear, &[1.0], 100).is_err());
    }

    #[test]
    fn image_check_agrees_with_t3() {
        let z = IdealSpec::AsymptoticZero;
        let family = [SetGen::Squares, SetGen::PowersOfTwo];
        for p in Permutation::builtins() {
            let r = permutation_regularity(&p, &z, &family, &z, 20_000, &DEFAULT_EPS_GRID, TOL).unwrap();
            assert!(r.consistent(), "{p}: {:?}", r.disagreements);
        }
        let r = permutation_regularity(
            &Permutation::SquaresToEvens,
            &z,
            &family,
            &z,
            20_000,
            &DEFAULT_EPS_GRID,
            TOL,
        )
        .unwrap();
        assert!(r.verdict.is_violated());
        assert!(r.family[0].t3.verdict.is_violated());
    }
}
