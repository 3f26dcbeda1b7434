//! Plain CSV output: '.' decimal separator, 17 significant digits, no locale.

use std::fmt::Write as _;

pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // keep the sign of negative zero out of the files
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

/// Builds a CSV document from a header and numeric rows.
pub fn csv_document(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
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

/// Builds a CSV document from preformatted cells (for mixed integer/float rows).
pub fn csv_cells(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
