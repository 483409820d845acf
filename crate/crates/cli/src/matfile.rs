//! Plain-text matrix files.
//!
//! Format: first line the order `n`, then `n` lines of `n`
//! whitespace-separated decimals. The loader checks symmetry to `1e-12`
//! and symmetrizes the parsed values as `(X + Xᵀ)/2`.

use std::fs;
use std::path::Path;

use isoflow_core::{Matrix, SymMatrix};

use crate::error::{CliError, Result};

/// 17 significant digits, enough to round-trip any f64 exactly.
pub fn format_full(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn load_matrix(path: &Path) -> Result<SymMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|msg| CliError::BadInput(format!("{}: {msg}", path.display())))
}

pub fn parse_matrix(text: &str) -> std::result::Result<SymMatrix, String> {
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or("empty file")?
        .parse()
        .map_err(|e| format!("bad order line: {e}"))?;
    if n == 0 {
        return Err("matrix order must be positive".into());
    }
    let mut values = Vec::with_capacity(n * n);
    for tok in tokens {
        let v: f64 = tok.parse().map_err(|e| format!("bad entry `{tok}`: {e}"))?;
        values.push(v);
    }
    if values.len() != n * n {
        return Err(format!(
            "expected {} entries for order {n}, found {}",
            n * n,
            values.len()
        ));
    }
    let full = Matrix::from_rows(n, n, &values);
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            defect = defect.max((full[(i, j)] - full[(j, i)]).abs());
        }
    }
    if defect > 1e-12 {
        return Err(format!("matrix is not symmetric (max defect {defect:e})"));
    }
    Ok(SymMatrix::symmetrize(&full))
}

/// Canonical text form of a matrix, as written by [`save_matrix`].
pub fn matrix_text(x: &SymMatrix) -> String {
    let n = x.order();
    let mut out = String::new();
    out.push_str(&format!("{n}\n"));
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format_full(x.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_matrix(path: &Path, x: &SymMatrix) -> Result<()> {
    fs::write(path, matrix_text(x)).map_err(CliError::Io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let x = SymMatrix::from_fn(3, |i, j| (i as f64) / 3.0 - (j as f64) / 7.0 + 0.1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mat");
        save_matrix(&path, &x).unwrap();
        let y = load_matrix(&path).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn rejects_asymmetric() {
        let err = parse_matrix("2\n0 1\n2 0\n").unwrap_err();
        assert!(err.contains("not symmetric"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2\n1 2 3\n").is_err());
        assert!(parse_matrix("2\n1 x\nx 1\n").is_err());
    }

    #[test]
    fn symmetrizes_within_tolerance() {
        let x = parse_matrix("2\n1 0.5\n0.5000000000001 1\n");
        // defect 1e-13 is inside the tolerance and gets averaged away
        let x = x.unwrap();
        assert_eq!(x.get(0, 1), x.get(1, 0));
    }
}
