//! Text specs for sets, sequences, weights, ideals, permutations and matrices.
//!
//! Sets: `squares`, `evens`, `odds`, `powers2`, `all`, `empty`, `ap:a,d`,
//! `range:a-b`, `finite:1,4,9`, `factorial-blocks`, `complement:<set>`,
//! `file:<path>`.
//!
//! Sequences: `const:c`, `indicator:<set>`, `affine:a,b,<seq>`, `alt`,
//! `alt-harmonic`, `index`, `square-spikes`, `abs:<seq>`, `file:<path>`; a
//! trailing `@B` declares the bound `B`.
//!
//! Weights: `n`, `n2`, `nlog`, `zg-example`, `file:<path>`. Ideals: `fin`,
//! `z`, `uniform`, `zg:<weight>`. Permutations: `identity`, `pair-swap`,
//! `block-swap`, `squares-evens`, `evens-squares`, `file:<path>`.
//!
//! Matrices: `cesaro`, `identity`, `diag:<seq>`, `perm:<perm>`,
//! `counterexample-a`, `counterexample-b`, `pick-nth`, `pick-pair`,
//! `file:<path>.jsonl`; the parameterised ones take [`MatrixOptions`].

use std::path::Path;
use std::sync::Arc;

use crate::constructions::{Counterexample, CounterexampleParams, DEFAULT_MAX_BLOCK};
use crate::error::{Error, Result};
use crate::ideal::IdealSpec;
use crate::matrix::{read_jsonl, RowMatrix};
use crate::permutation::Permutation;
use crate::sequence::{LazySequence, SeqGen};
use crate::set::SetGen;
use crate::weight::Weight;

fn bad(kind: &str, spec: &str, why: impl std::fmt::Display) -> Error {
    Error::argument(format!("invalid {kind} spec {spec:?}: {why}"))
}

fn num<T: std::str::FromStr>(kind: &str, spec: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| bad(kind, spec, format!("{s:?} is not a number")))
}

pub fn parse_set(spec: &str) -> Result<SetGen> {
    let spec = spec.trim();
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "squares" => Ok(SetGen::Squares),
        "evens" => Ok(SetGen::evens()),
        "odds" => Ok(SetGen::odds()),
        "powers2" => Ok(SetGen::PowersOfTwo),
        "all" => Ok(SetGen::All),
        "empty" => Ok(SetGen::Empty),
        "factorial-blocks" => Ok(SetGen::factorial_blocks()),
        "ap" => {
            let (a, d) = arg.split_once(',').ok_or_else(|| bad("set", spec, "expected ap:a,d"))?;
            SetGen::progression(num("set", spec, a)?, num("set", spec, d)?)
        }
        "range" => {
            let (a, b) = arg.split_once('-').ok_or_else(|| bad("set", spec, "expected range:a-b"))?;
            SetGen::range(num("set", spec, a)?, num("set", spec, b)?)
        }
        "finite" => {
            let elements = if arg.trim().is_empty() {
                Vec::new()
            } else {
                arg.split(',').map(|v| num("set", spec, v)).collect::<Result<Vec<u64>>>()?
            };
            SetGen::finite(elements)
        }
        "complement" => Ok(parse_set(arg)?.complement()),
        "file" => SetGen::from_file(Path::new(arg)),
        _ => Err(bad("set", spec, "unknown set")),
    }
}

/// Bound implied by the generator, where one is obvious.
fn natural_bound(g: &SeqGen) -> Option<f64> {
    match g {
        SeqGen::Const(c) => Some(c.abs()),
        SeqGen::Indicator(_) | SeqGen::Alternating | SeqGen::AlternatingHarmonic => Some(1.0),
        SeqGen::Affine { a, b, inner } => natural_bound(inner).map(|v| a.abs() * v + b.abs()),
        SeqGen::Abs(inner) => natural_bound(inner),
        SeqGen::Table(t) => Some(t.iter().fold(0.0, |m, v| m.max(v.abs()))),
        _ => None,
    }
}

fn parse_generator(spec: &str) -> Result<SeqGen> {
    let spec = spec.trim();
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match head {
        "const" => SeqGen::Const(num("sequence", spec, arg)?),
        "indicator" => SeqGen::Indicator(parse_set(arg)?),
        "affine" => {
            let mut parts = arg.splitn(3, ',');
            let (Some(a), Some(b), Some(inner)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad("sequence", spec, "expected affine:a,b,<sequence>"));
            };
            SeqGen::Affine {
                a: num("sequence", spec, a)?,
                b: num("sequence", spec, b)?,
                inner: Box::new(parse_generator(inner)?),
            }
        }
        "alt" => SeqGen::Alternating,
        "alt-harmonic" => SeqGen::AlternatingHarmonic,
        "index" => SeqGen::Index,
        "square-spikes" => LazySequence::square_spikes().generator,
        "abs" => SeqGen::Abs(Box::new(parse_generator(arg)?)),
        "file" => LazySequence::from_file(Path::new(arg))?.generator,
        _ => return Err(bad("sequence", spec, "unknown sequence")),
    })
}

pub fn parse_sequence(spec: &str) -> Result<LazySequence> {
    let spec = spec.trim();
    if let Some((body, b)) = spec.rsplit_once('@') {
        if let Ok(bound) = b.trim().parse::<f64>() {
            if !(bound >= 0.0 && bound.is_finite()) {
                return Err(bad("sequence", spec, "bound must be finite and nonnegative"));
            }
            return Ok(LazySequence::bounded(parse_generator(body)?, bound));
        }
    }
    let generator = parse_generator(spec)?;
    Ok(LazySequence {
        declared_bound: natural_bound(&generator),
        generator,
    })
}

pub fn parse_weight(spec: &str) -> Result<Weight> {
    let spec = spec.trim();
    match spec {
        "n" => Ok(Weight::Linear),
        "n2" => Ok(Weight::Square),
        "nlog" => Ok(Weight::NLog),
        "zg-example" => Ok(Weight::factorial_piecewise()),
        _ => match spec.strip_prefix("file:") {
            Some(path) => Weight::from_file(Path::new(path)),
            None => Err(bad("weight", spec, "unknown weight")),
        },
    }
}

pub fn parse_ideal(spec: &str) -> Result<IdealSpec> {
    let spec = spec.trim();
    match spec {
        "fin" => Ok(IdealSpec::Fin),
        "z" => Ok(IdealSpec::AsymptoticZero),
        "uniform" => Ok(IdealSpec::UniformZero),
        _ => match spec.strip_prefix("zg:") {
            Some(w) => Ok(IdealSpec::SimpleDensity(parse_weight(w)?)),
            None => Err(bad("ideal", spec, "unknown ideal")),
        },
    }
}

pub fn parse_permutation(spec: &str) -> Result<Permutation> {
    let spec = spec.trim();
    match spec {
        "identity" => Ok(Permutation::Identity),
        "pair-swap" => Ok(Permutation::PairSwap),
        "block-swap" => Ok(Permutation::BlockSwap),
        "squares-evens" => Ok(Permutation::SquaresToEvens),
        "evens-squares" => Ok(Permutation::EvensToSquares),
        _ => match spec.strip_prefix("file:") {
            Some(path) => Permutation::from_file(Path::new(path)),
            None => Err(bad("permutation", spec, "unknown permutation")),
        },
    }
}

/// Comma-separated strictly decreasing positive values.
pub fn parse_eps_grid(spec: &str) -> Result<Vec<f64>> {
    let grid = spec
        .split(',')
        .map(|v| num("epsilon grid", spec, v))
        .collect::<Result<Vec<f64>>>()?;
    crate::sequence::check_eps_grid(&grid)?;
    Ok(grid)
}

/// Parameters of the matrices built from an enumerated set.
#[derive(Clone, Debug)]
pub struct MatrixOptions {
    pub i_set: SetGen,
    pub max_block: u32,
    /// Rows of `pick-nth` / `pick-pair`.
    pub rows: u64,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions {
            i_set: SetGen::Squares,
            max_block: DEFAULT_MAX_BLOCK,
            rows: 100_000,
        }
    }
}

pub fn parse_matrix(spec: &str, opts: &MatrixOptions) -> Result<RowMatrix> {
    let spec = spec.trim();
    let counterexample = || -> Result<RowMatrix> {
        let ce = Counterexample::new(CounterexampleParams {
            i_set: opts.i_set.clone(),
            max_block: opts.max_block,
        })?;
        Ok(RowMatrix::Counterexample(Arc::new(ce)))
    };
    match spec {
        "cesaro" => Ok(RowMatrix::Cesaro),
        "identity" => Ok(RowMatrix::Identity),
        "counterexample-a" => counterexample(),
        "counterexample-b" => Ok(counterexample()?.sum(RowMatrix::Identity)),
        "pick-nth" => RowMatrix::pick_nth(opts.i_set.clone(), opts.rows),
        "pick-pair" => RowMatrix::pick_pair(opts.i_set.clone(), opts.rows),
        _ => {
            let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
            match head {
                "diag" => Ok(RowMatrix::Diagonal(parse_sequence(arg)?.without_bound())),
                "perm" => Ok(RowMatrix::Permutation(parse_permutation(arg)?)),
                "file" => read_jsonl(Path::new(arg)),
                _ => Err(bad("matrix", spec, "unknown matrix")),
            }
        }
    }
}
