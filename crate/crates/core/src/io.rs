//! Deterministic text output: fixed 17-significant-digit floats, LF line
//! endings, no locale or wall-clock content. Identical inputs must produce
//! byte-identical files.

use std::fmt::Write as _;

/// Format a float with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Normalize -0.0 so reruns cannot differ.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// Render a CSV table: header row plus one row per record.
pub fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}", fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_digits_and_stable() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(-0.0), "0.0000000000000000e0");
        let s = fmt_f64(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        // Round-trips exactly.
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn csv_uses_lf_only() {
        let s = csv_table(&["a", "b"], vec![vec![1.0, 2.0]].into_iter());
        assert_eq!(s, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
        assert!(!s.contains('\r'));
    }
}
