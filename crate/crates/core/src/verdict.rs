use std::fmt;

use serde::{Deserialize, Serialize};

/// What a violated check points at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "camelCase")]
pub enum Witness {
    /// A row index of a matrix.
    Row(u64),
    /// An index of a sequence or an element of a set.
    Index(u64),
    /// A checkpoint at which a density ratio was observed.
    Checkpoint { n: u64, ratio: f64 },
    /// A named set (family member, exceptional set, image set).
    Set(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum Verdict {
    Satisfied,
    Violated { witness: Witness },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn inconclusive(reason: impl Into<String>) -> Self {
        Verdict::Inconclusive {
            reason: reason.into(),
        }
    }

    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::Satisfied)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }

    /// Process exit code: 0 satisfied, 1 violated, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Satisfied => 0,
            Verdict::Violated { .. } => 1,
            Verdict::Inconclusive { .. } => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated { .. } => "violated",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    /// Conjunction: any violation wins, then any inconclusive, else satisfied.
    /// The first violation (in iteration order) is kept as the witness.
    pub fn all<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
        let mut undecided = None;
        for v in verdicts {
            match v {
                Verdict::Violated { .. } => return v,
                Verdict::Inconclusive { .. } => {
                    if undecided.is_none() {
                        undecided = Some(v);
                    }
                }
                Verdict::Satisfied => {}
            }
        }
        undecided.unwrap_or(Verdict::Satisfied)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Satisfied => write!(f, "satisfied"),
            Verdict::Violated { witness } => write!(f, "violated ({witness:?})"),
            Verdict::Inconclusive { reason } => write!(f, "inconclusive ({reason})"),
        }
    }
}
