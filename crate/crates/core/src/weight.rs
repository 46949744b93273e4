//! Weight functions `g` for the density functionals `limsup |S ∩ [1,n]| / g(n)`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::set::SetGen;

#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// `g(n) = n`
    Linear,
    /// `g(n) = n^2`
    Square,
    /// `g(n) = n ln(n + 1)`
    NLog,
    /// `inside(n)` on the set, `outside(n)` elsewhere.
    Piecewise {
        set: SetGen,
        inside: Box<Weight>,
        outside: Box<Weight>,
    },
    /// Tabulated values `g(1), g(2), ...`.
    Table(Arc<[f64]>),
}

impl Weight {
    /// `n^2` on the factorial blocks, `n` elsewhere.
    pub fn factorial_piecewise() -> Self {
        Weight::Piecewise {
            set: SetGen::factorial_blocks(),
            inside: Box::new(Weight::Square),
            outside: Box::new(Weight::Linear),
        }
    }

    pub fn eval(&self, n: u64) -> Result<f64> {
        let v = self.raw(n)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonpositiveWeight { n, value: v });
        }
        Ok(v)
    }

    fn raw(&self, n: u64) -> Result<f64> {
        let x = n as f64;
        Ok(match self {
            Weight::Linear => x,
            Weight::Square => x * x,
            Weight::NLog => x * (x + 1.0).ln(),
            Weight::Piecewise {
                set,
                inside,
                outside,
            } => {
                if set.contains(n) {
                    inside.raw(n)?
                } else {
                    outside.raw(n)?
                }
            }
            Weight::Table(t) => {
                if n == 0 || n as usize > t.len() {
                    return Err(Error::OutOfRange {
                        what: "weight table".into(),
                        n,
                        limit: t.len() as u64,
                    });
                }
                t[n as usize - 1]
            }
        })
    }

    /// Largest `n` at which the weight can be evaluated.
    pub fn domain_limit(&self) -> u64 {
        match self {
            Weight::Table(t) => t.len() as u64,
            Weight::Piecewise { inside, outside, .. } => {
                inside.domain_limit().min(outside.domain_limit())
            }
            _ => u64::MAX,
        }
    }

    /// Reads a weight table: lines `n value` for n = 1, 2, ... in order.
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
            if n != values.len() as u64 + 1 {
                return Err(Error::format(
                    path,
                    i + 1,
                    format!("expected index {}, found {n}", values.len() + 1),
                ));
            }
            values.push(v);
        }
        Ok(Weight::Table(values.into()))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Linear => write!(f, "n"),
            Weight::Square => write!(f, "n2"),
            Weight::NLog => write!(f, "nlog"),
            Weight::Piecewise {
                set,
                inside,
                outside,
            } => {
                if *self == Weight::factorial_piecewise() {
                    write!(f, "zg-example")
                } else {
                    write!(f, "piecewise({set}:{inside}|{outside})")
                }
            }
            Weight::Table(t) => write!(f, "table({} values)", t.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        assert_eq!(Weight::Linear.eval(7).unwrap(), 7.0);
        assert_eq!(Weight::Square.eval(7).unwrap(), 49.0);
        assert!((Weight::NLog.eval(1).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn piecewise_switches_on_blocks() {
        let g = Weight::factorial_piecewise();
        assert_eq!(g.eval(23).unwrap(), 23.0);
        assert_eq!(g.eval(24).unwrap(), 576.0);
        assert_eq!(g.eval(120).unwrap(), 120.0);
        assert_eq!(g.to_string(), "zg-example");
    }

    #[test]
    fn nonpositive_table_entry_is_a_domain_error() {
        let g = Weight::Table(vec![1.0, 2.0, 0.0].into());
        match g.eval(3) {
            Err(Error::NonpositiveWeight { n: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(g.eval(4), Err(Error::OutOfRange { n: 4, .. })));
    }
}
