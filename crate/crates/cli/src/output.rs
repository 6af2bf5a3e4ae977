//! Plain CSV and JSON emission. Numbers use Rust's shortest round-trip
//! formatting, so output is locale-independent and byte-stable.

use serde::Serialize;
use std::fmt::Write;

/// CSV text with the given header and rows, LF line endings.
pub fn csv(header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut out = String::with_capacity(rows * 24 * columns.len().max(1));
    out.push_str(&header.join(","));
    out.push('\n');
    for k in 0..rows {
        for (i, col) in columns.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:?}", col[k]);
        }
        out.push('\n');
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let text = csv(&["phi", "v"], &[&[0.0, 0.1], &[f64::NEG_INFINITY, 1e-300]]);
        assert_eq!(text, "phi,v\n0.0,-inf\n0.1,1e-300\n");
    }

    #[test]
    fn shortest_round_trip() {
        let x = std::f64::consts::PI / 3.0;
        let text = csv(&["x"], &[&[x]]);
        let back: f64 = text.lines().nth(1).unwrap().parse().unwrap();
        assert_eq!(back.to_bits(), x.to_bits());
    }
}
