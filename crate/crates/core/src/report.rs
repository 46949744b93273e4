//! JSON report helpers: sorted keys, pretty printing, display-based fields.

use std::fmt::Display;

use serde::{Serialize, Serializer};

use crate::error::Result;

pub fn display<T: Display, S: Serializer>(value: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_string())
}

pub fn display_vec<T: Display, S: Serializer>(
    values: &[T],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(ToString::to_string))
}

/// Pretty JSON with object keys in sorted order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Map is a BTreeMap without the preserve_order feature.
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Unsorted {
        zeta: u32,
        alpha: u32,
    }

    #[test]
    fn keys_come_out_sorted() {
        let s = to_sorted_json(&Unsorted { zeta: 1, alpha: 2 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }
}
