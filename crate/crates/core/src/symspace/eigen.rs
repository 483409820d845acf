use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues are sorted ascending; the columns of `vectors` are the
/// corresponding orthonormal eigenvectors. This is the single
/// factorization backend of the crate: pseudo-inverses, spectral
/// functions, rank counts, and kernel bases are all derived from it.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: Matrix,
}

impl EigenDecomposition {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `V diag(values) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.apply_spectral(|l| l)
    }

    /// `V f(Λ) Vᵀ` as a dense matrix.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fl;
                if vik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)];
                }
            }
        }
        out
    }

    /// `V f(Λ) Vᵀ b` without forming the full matrix.
    pub fn apply_spectral_to(&self, f: impl Fn(f64) -> f64, b: &[f64]) -> Vec<f64> {
        let n = self.values.len();
        assert_eq!(b.len(), n);
        let mut coeffs = vec![0.0; n];
        for (k, coeff) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &bi) in b.iter().enumerate() {
                acc += self.vectors[(i, k)] * bi;
            }
            *coeff = acc * f(self.values[k]);
        }
        let mut out = vec![0.0; n];
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.vectors[(i, k)] * c;
            }
        }
        out
    }

    /// Number of eigenvalues strictly above `cutoff`.
    pub fn rank_above(&self, cutoff: f64) -> usize {
        self.values.iter().filter(|&&l| l > cutoff).count()
    }
}

/// Symmetric eigendecomposition via Householder reduction to tridiagonal
/// form followed by the implicitly shifted QL iteration.
///
/// Only the lower triangle of `a` is referenced.
pub fn sym_eigen(a: &Matrix) -> Result<EigenDecomposition> {
    assert_eq!(a.rows(), a.cols(), "eigendecomposition needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let mut v = Matrix::from_fn(n, n, |i, j| if i >= j { a[(i, j)] } else { a[(j, i)] });
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;
    sort_ascending(n, &mut v, &mut d);
    Ok(EigenDecomposition {
        values: d,
        vectors: v,
    })
}

/// Householder reduction of `v` to symmetric tridiagonal form, with the
/// orthogonal transformation accumulated back into `v`.
fn tred2(n: usize, v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            // apply similarity transformation to the remaining block
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let delta = f * e[k] + g * d[k];
                    v[(k, j)] -= delta;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let delta = g * d[k];
                    v[(k, j)] -= delta;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicitly shifted QL iteration on a symmetric tridiagonal matrix,
/// accumulating eigenvectors into `v`.
fn tql2(n: usize, v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0_f64;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(Error::EigenNoConvergence);
                }
                // implicit shift from the 2x2 leading block
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0_f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0_f64;
                let mut s2 = 0.0_f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_ascending(n: usize, v: &mut Matrix, d: &mut [f64]) {
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().take(n).skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                let tmp = v[(row, i)];
                v[(row, i)] = v[(row, k)];
                v[(row, k)] = tmp;
            }
        }
    }
}

/// Moore–Penrose pseudo-inverse of a symmetric PSD matrix.
///
/// Eigenvalues above `rank_tol·max(1, λ_max)` are inverted, the rest are
/// zeroed. Eigenvalues below `−1e-8·λ_max` are rejected as not PSD.
pub fn psd_pseudo_inverse_matrix(a: &Matrix, rank_tol: f64) -> Result<Matrix> {
    let eig = sym_eigen(a)?;
    if eig.values().is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    let lam_max = eig.max_value().max(0.0);
    let neg_tol = 1e-8 * lam_max + (a.rows() as f64) * f64::EPSILON * a.max_abs();
    if eig.min_value() < -neg_tol {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: eig.min_value(),
        });
    }
    let cutoff = rank_tol * lam_max.max(1.0);
    Ok(eig.apply_spectral(|l| if l > cutoff { 1.0 / l } else { 0.0 }))
}

/// Default relative rank cutoff for a matrix of order `dim`.
pub fn default_rank_tol(dim: usize) -> f64 {
    dim as f64 * f64::EPSILON
}

/// Orthonormal basis of the kernel of an arbitrary (possibly rectangular)
/// matrix, computed from the eigendecomposition of `AᵀA`. The basis
/// vectors are returned as the columns of the result.
///
/// The rank cutoff is relative to the largest Gram eigenvalue; when the
/// caller knows the natural norm scale of `a` (e.g. 1 for projectors), use
/// [`kernel_basis_scaled`] so that an input that is zero up to rounding
/// noise is recognized as zero.
pub fn kernel_basis(a: &Matrix) -> Result<Matrix> {
    kernel_basis_scaled(a, 0.0)
}

/// [`kernel_basis`] with an explicit norm scale for the cutoff floor.
pub fn kernel_basis_scaled(a: &Matrix, scale: f64) -> Result<Matrix> {
    let ata = a.transpose().mul(a);
    let eig = sym_eigen(&ata)?;
    let lam_ref = eig.max_value().max(scale * scale).max(0.0);
    let cutoff = (ata.rows() as f64) * f64::EPSILON * lam_ref * 64.0;
    let cols: Vec<usize> = (0..eig.values().len())
        .filter(|&k| eig.values()[k] <= cutoff)
        .collect();
    let mut out = Matrix::zeros(a.cols(), cols.len());
    for (c, &k) in cols.iter().enumerate() {
        for i in 0..a.cols() {
            out[(i, c)] = eig.vectors()[(i, k)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(a: &Matrix) {
        let eig = sym_eigen(a).unwrap();
        let n = a.rows();
        // ascending order
        for w in eig.values().windows(2) {
            assert!(w[0] <= w[1]);
        }
        // orthonormal columns
        let v = eig.vectors();
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| v[(k, i)] * v[(k, j)]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-12, "gram defect {}", dot - target);
            }
        }
        // reconstruction
        let rec = eig.reconstruct();
        let scale = a.frob_norm().max(1e-300);
        assert!(rec.sub(a).frob_norm() <= 1e-10 * scale);
    }

    #[test]
    fn diagonal_sorted() {
        let a = Matrix::diagonal(&[3.0, 1.0, 2.0]);
        let eig = sym_eigen(&a).unwrap();
        assert_eq!(eig.values(), &[1.0, 2.0, 3.0]);
        check_decomposition(&a);
    }

    #[test]
    fn swap_matrix_spectrum() {
        let a = Matrix::from_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eig = sym_eigen(&a).unwrap();
        assert!((eig.values()[0] + 1.0).abs() < 1e-14);
        assert!((eig.values()[1] - 1.0).abs() < 1e-14);
        check_decomposition(&a);
    }

    #[test]
    fn random_reconstruction() {
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [1, 2, 3, 5, 8, 13, 21, 55] {
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let v = next();
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            check_decomposition(&a);
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let a = Matrix::identity(4);
        let eig = sym_eigen(&a).unwrap();
        for &v in eig.values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
        check_decomposition(&a);
    }

    #[test]
    fn pinv_examples() {
        let i = Matrix::identity(3);
        let pinv = psd_pseudo_inverse_matrix(&i, 1e-12).unwrap();
        assert!(pinv.sub(&i).frob_norm() < 1e-14);

        let a = Matrix::diagonal(&[2.0, 0.0]);
        let pinv = psd_pseudo_inverse_matrix(&a, 1e-12).unwrap();
        assert!(pinv.sub(&Matrix::diagonal(&[0.5, 0.0])).frob_norm() < 1e-14);
    }

    #[test]
    fn pinv_rejects_indefinite() {
        let a = Matrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            psd_pseudo_inverse_matrix(&a, 1e-12),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn kernel_of_rank_one() {
        // column (1,0)ᵀ: kernel of the 1x2 map [1 0] is span{(0,1)}
        let a = Matrix::from_rows(1, 2, &[1.0, 0.0]);
        let k = kernel_basis(&a).unwrap();
        assert_eq!(k.cols(), 1);
        assert!(k[(0, 0)].abs() < 1e-12);
        assert!((k[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }
}
