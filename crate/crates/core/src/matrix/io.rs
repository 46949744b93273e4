//! JSON Lines matrix files: `{"row": n, "entries": [[k, value], ...]}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RowMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExplicitRows {
    rows: BTreeMap<u64, Vec<(u64, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct RowLine {
    row: u64,
    entries: Vec<(u64, f64)>,
}

impl ExplicitRows {
    /// Validates and stores rows. Columns must be strictly increasing within a
    /// row and every stored entry nonzero; absent rows are zero rows.
    pub fn new(rows: BTreeMap<u64, Vec<(u64, f64)>>) -> Result<Self> {
        for (&n, entries) in &rows {
            validate_row(n, entries).map_err(Error::argument)?;
        }
        Ok(ExplicitRows { rows })
    }

    pub fn row(&self, n: u64) -> &[(u64, f64)] {
        self.rows.get(&n).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn validate_row(n: u64, entries: &[(u64, f64)]) -> std::result::Result<(), String> {
    if n == 0 {
        return Err("row indices start at 1".into());
    }
    let mut prev = 0;
    for &(k, v) in entries {
        if k == 0 || k <= prev {
            return Err(format!("row {n}: columns must be positive and strictly increasing ({k} after {prev})"));
        }
        if v == 0.0 || !v.is_finite() {
            return Err(format!("row {n}: entry at column {k} must be finite and nonzero"));
        }
        prev = k;
    }
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<RowMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = BTreeMap::new();
    let mut prev = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RowLine = serde_json::from_str(line)
            .map_err(|e| Error::format(path, i + 1, e.to_string()))?;
        if parsed.row <= prev {
            return Err(Error::format(
                path,
                i + 1,
                format!("rows must be strictly increasing ({} after {prev})", parsed.row),
            ));
        }
        validate_row(parsed.row, &parsed.entries).map_err(|m| Error::format(path, i + 1, m))?;
        prev = parsed.row;
        rows.insert(parsed.row, parsed.entries);
    }
    Ok(RowMatrix::Explicit(std::sync::Arc::new(ExplicitRows { rows })))
}

/// Rows `1..=max_row` of any matrix in the JSON Lines format; zero rows are omitted.
pub fn to_jsonl(matrix: &RowMatrix, max_row: u64) -> Result<String> {
    let mut out = String::new();
    for n in 1..=max_row {
        let entries = matrix.row(n)?;
        if entries.is_empty() {
            continue;
        }
        let line = serde_json::to_string(&RowLine { row: n, entries })?;
        writeln!(out, "{line}").expect("writing to a String");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{Counterexample, CounterexampleParams};
    use crate::set::SetGen;

    fn tmp(name: &str, body: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("summa-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn exported_counterexample_reads_back() {
        let ce = Counterexample::new(CounterexampleParams {
            i_set: SetGen::Squares,
            max_block: 4,
        })
        .unwrap();
        let b = ce.matrix_b();
        let text = to_jsonl(&b, 60).unwrap();
        let back = read_jsonl(&tmp("b.jsonl", &text)).unwrap();
        for n in 1..=70 {
            let expected = if n <= 60 { b.row(n).unwrap() } else { vec![] };
            assert_eq!(back.row(n).unwrap(), expected, "row {n}");
        }
    }

    #[test]
    fn malformed_files_name_the_line() {
        let cases = [
            ("{\"row\": 2, \"entries\": [[1, 1.0]]}\n{\"row\": 1, \"entries\": []}\n", 2),
            ("{\"row\": 1, \"entries\": [[3, 1.0], [2, 1.0]]}\n", 1),
            ("{\"row\": 1, \"entries\": [[3, 0.0]]}\n", 1),
            ("\n{\"row\": 1, \"entries\": [[3, 1.0]]\n", 2),
        ];
        for (i, (body, line)) in cases.iter().enumerate() {
            let err = read_jsonl(&tmp(&format!("bad{i}.jsonl"), body)).unwrap_err();
            match err {
                Error::Format { line: l, .. } => assert_eq!(l, *line, "case {i}"),
                other => panic!("case {i}: {other}"),
            }
        }
    }
}
