//! Built-in test matrices for the experiment commands.
//!
//! The two scattered-pattern matrices are embedded verbatim rather than
//! regenerated from a random seed, so runs are reproducible digit for
//! digit. `t<n>` fixtures are the second-difference matrices
//! `T_n = tridiag(1,−2,1)`; `ts<n>` their grid-scaled versions
//! `(n+1)²·T_n`.

use isoflow_core::flows::{circulant_kernel_witness, shader_counterexample};
use isoflow_core::SymMatrix;

use crate::error::{CliError, Result};
use crate::matfile;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub x0: SymMatrix,
    pub description: String,
}

/// Tridiagonal 6×6 matrix used by the first convergence experiment.
#[rustfmt::skip]
const EXAMPLE1: [f64; 36] = [
    0.87, 1.23, 0.0,  0.0,  0.0,  0.0,
    1.23, 1.67, 0.62, 0.0,  0.0,  0.0,
    0.0,  0.62, 0.25, 1.17, 0.0,  0.0,
    0.0,  0.0,  1.17, 0.79, 1.87, 0.0,
    0.0,  0.0,  0.0,  1.87, 1.92, 1.63,
    0.0,  0.0,  0.0,  0.0,  1.63, 1.8,
];

/// 10×10 matrix with a scattered symmetric sparsity pattern.
#[rustfmt::skip]
const EXAMPLE2: [f64; 100] = [
    1.7,  0.0,  0.0,  0.0,  0.0,  0.0,  1.92, 0.0,  0.48, 1.25,
    0.0,  1.16, 1.16, 0.91, 1.56, 0.0,  0.0,  1.69, 0.0,  0.0,
    0.0,  1.16, 0.48, 0.0,  0.90, 0.0,  0.0,  0.0,  0.0,  0.0,
    0.0,  0.91, 0.0,  0.66, 0.88, 0.0,  0.93, 1.25, 0.0,  1.39,
    0.0,  1.56, 0.9,  0.88, 0.3,  0.0,  0.0,  0.0,  0.0,  0.0,
    0.0,  0.0,  0.0,  0.0,  0.0,  0.94, 1.49, 0.37, 0.88, 0.0,
    1.92, 0.0,  0.0,  0.93, 0.0,  1.49, 1.12, 0.67, 0.4,  0.0,
    0.0,  1.69, 0.0,  1.25, 0.0,  0.37, 0.67, 1.1,  0.0,  1.54,
    0.48, 0.0,  0.0,  0.0,  0.0,  0.88, 0.4,  0.0,  0.44, 1.05,
    1.25, 0.0,  0.0,  1.39, 0.0,  0.0,  0.0,  1.54, 1.05, 1.2,
];

/// `T_n = tridiag(1, −2, 1)`.
pub fn second_difference(n: usize) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| {
        if i == j {
            -2.0
        } else if i - j == 1 {
            1.0
        } else {
            0.0
        }
    })
}

pub const BUILTIN_NAMES: [&str; 8] = [
    "example1",
    "example2",
    "t5",
    "t10",
    "ts5",
    "ts10",
    "shader",
    "circulant",
];

/// Resolves a fixture by name; `file:<path>` loads a matrix file.
pub fn fixture(name: &str) -> Result<Fixture> {
    if let Some(path) = name.strip_prefix("file:") {
        let x0 = matfile::load_matrix(path.as_ref())?;
        return Ok(Fixture {
            name: name.to_string(),
            x0,
            description: format!("matrix loaded from {path}"),
        });
    }
    let (x0, description) = match name {
        "example1" => (
            SymMatrix::from_rows_lower(6, &EXAMPLE1),
            "tridiagonal 6x6 convergence example".to_string(),
        ),
        "example2" => (
            SymMatrix::from_rows_lower(10, &EXAMPLE2),
            "10x10 example with a scattered sparsity pattern".to_string(),
        ),
        "t5" => (
            second_difference(5),
            "second-difference matrix tridiag(1,-2,1) of order 5".to_string(),
        ),
        "t10" => (
            second_difference(10),
            "second-difference matrix tridiag(1,-2,1) of order 10".to_string(),
        ),
        "ts5" => (
            second_difference(5).scaled(36.0),
            "grid-scaled second-difference matrix 36*T5".to_string(),
        ),
        "ts10" => (
            second_difference(10).scaled(121.0),
            "grid-scaled second-difference matrix 121*T10".to_string(),
        ),
        "shader" => (
            shader_counterexample(1.0, 2.0, 2.0)
                .expect("default parameters are valid")
                .0,
            "non-diagonal zero-flow equilibrium (a=1, b=2, z=2)".to_string(),
        ),
        "circulant" => (
            circulant_kernel_witness().0,
            "4x4 circulant state with singular quasi-projection operator".to_string(),
        ),
        other => {
            return Err(CliError::BadInput(format!(
                "unknown fixture `{other}`; expected one of {BUILTIN_NAMES:?} or file:<path>"
            )))
        }
    };
    Ok(Fixture {
        name: name.to_string(),
        x0,
        description,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_digits() {
        let f = fixture("example1").unwrap();
        assert_eq!(f.x0.order(), 6);
        assert_eq!(f.x0.get(0, 0), 0.87);
        assert_eq!(f.x0.get(0, 1), 1.23);
        assert_eq!(f.x0.get(4, 5), 1.63);
        assert_eq!(f.x0.get(5, 5), 1.8);
        assert_eq!(f.x0.get(0, 2), 0.0);
    }

    #[test]
    fn example2_digits_and_symmetry() {
        let f = fixture("example2").unwrap();
        assert_eq!(f.x0.order(), 10);
        assert_eq!(f.x0.get(0, 6), 1.92);
        assert_eq!(f.x0.get(0, 8), 0.48);
        assert_eq!(f.x0.get(9, 9), 1.2);
        assert_eq!(f.x0.get(2, 4), 0.9);
        // the flat array really is symmetric
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(EXAMPLE2[i * 10 + j], EXAMPLE2[j * 10 + i], "({i},{j})");
            }
        }
    }

    #[test]
    fn scaled_fixtures() {
        let t5 = fixture("t5").unwrap().x0;
        let ts5 = fixture("ts5").unwrap().x0;
        assert_eq!(ts5, t5.scaled(36.0));
        let t10 = fixture("t10").unwrap().x0;
        let ts10 = fixture("ts10").unwrap().x0;
        assert_eq!(ts10, t10.scaled(121.0));
    }

    #[test]
    fn t10_spectrum_distinct_and_negative() {
        let ev = fixture("t10").unwrap().x0.eigenvalues().unwrap();
        for w in ev.windows(2) {
            assert!(w[1] - w[0] > 1e-3, "eigenvalues must be distinct");
        }
        assert!(ev.iter().all(|&l| l < 0.0));
    }

    #[test]
    fn unknown_fixture_is_bad_input() {
        let err = fixture("nope").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
