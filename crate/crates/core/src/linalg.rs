//! Dense complex matrix helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Complex `n x n` matrix. Real matrices are stored with zero imaginary parts.
pub type DenseMatrix = DMatrix<Complex64>;
pub type DenseVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> DenseMatrix {
    DenseMatrix::identity(n, n)
}

/// Matrix unit `e_{ij}` (zero-based indices).
pub fn unit(n: usize, i: usize, j: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn diag_real(values: &[f64]) -> DenseMatrix {
    let n = values.len();
    DenseMatrix::from_fn(n, n, |i, j| if i == j { cplx(values[i], 0.0) } else { ZERO })
}

pub fn diag_complex(values: &[Complex64]) -> DenseMatrix {
    let n = values.len();
    DenseMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
}

pub fn from_real_rows(rows: &[&[f64]]) -> DenseMatrix {
    let n = rows.len();
    DenseMatrix::from_fn(n, rows[0].len(), |i, j| cplx(rows[i][j], 0.0))
}

/// `<x, y> = sum x_i conj(y_i)`, linear in the first slot.
pub fn inner(x: &DenseVector, y: &DenseVector) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm(x: &DenseVector) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(m: &DenseMatrix) -> f64 {
    m.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &DenseMatrix) -> bool {
    m.iter().all(|a| a.re.is_finite() && a.im.is_finite())
}

pub fn ensure_same_shape(a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

/// Singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator norm `‖M‖_{ℓ2→ℓ2}`; zero for the empty matrix.
pub fn op_norm(m: &DenseMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Full SVD with singular values sorted descending: `(sigma, U, V)` where
/// `M = U diag(sigma) V^*` and the columns of `V` are right singular vectors.
pub fn svd_sorted(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix, DenseMatrix) {
    let n = m.nrows();
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^*");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma = order.iter().map(|&k| svd.singular_values[k]).collect();
    let u_sorted = DenseMatrix::from_fn(n, order.len(), |i, k| u[(i, order[k])]);
    let v_sorted = DenseMatrix::from_fn(m.ncols(), order.len(), |i, k| v_t[(order[k], i)].conj());
    (sigma, u_sorted, v_sorted)
}

/// Largest singular value together with a unit right singular vector.
pub fn top_singular_pair(m: &DenseMatrix) -> (f64, DenseVector) {
    let (sigma, _, v) = svd_sorted(m);
    (sigma[0], v.column(0).into_owned())
}

pub fn hermitian_defect(m: &DenseMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &DenseMatrix, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues (unsorted, as
/// returned by the solver) and unitary eigenvector matrix.
pub fn hermitian_eigen(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian matrix.
pub fn hermitian_top(m: &DenseMatrix) -> (f64, DenseVector) {
    let (vals, vecs) = hermitian_eigen(m);
    let k = (0..vals.len())
        .max_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .expect("non-empty matrix");
    (vals[k], vecs.column(k).into_owned())
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| {
        cplx(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseVector {
    let v = DenseVector::from_fn(n, |_, _| cplx(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = vec_norm(&v);
    v.unscale(norm)
}

/// Haar-distributed unitary from the QR factorisation of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
    let g = random_complex(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Completes the orthonormal columns of `seed` to an orthonormal basis of
/// the span of `seed` together with the columns of `space` (Gram-Schmidt, with
/// a second reorthogonalisation pass).
pub fn extend_orthonormal(seed: &[DenseVector], space: &[DenseVector], tol: f64) -> Vec<DenseVector> {
    let mut basis: Vec<DenseVector> = seed.to_vec();
    for candidate in space {
        let mut v = candidate.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = inner(&v, b);
                v -= b * c;
            }
        }
        let norm = vec_norm(&v);
        if norm > tol {
            basis.push(v.unscale(norm));
        }
    }
    basis
}

pub fn columns_to_matrix(cols: &[DenseVector], n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Drops the first row and first column.
pub fn strip_leading(m: &DenseMatrix) -> DenseMatrix {
    let n = m.nrows();
    DenseMatrix::from_fn(n - 1, n - 1, |i, j| m[(i + 1, j + 1)])
}

/// Zeroes every entry whose modulus is at most `tol`.
pub fn hard_zero(m: &mut DenseMatrix, tol: f64) {
    for a in m.iter_mut() {
        if a.re.abs() <= tol {
            a.re = 0.0;
        }
        if a.im.abs() <= tol {
            a.im = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singular_values_sorted() {
        let m = diag_real(&[0.5, 3.0, 1.0]);
        assert_eq!(singular_values(&m), vec![3.0, 1.0, 0.5]);
        assert_eq!(op_norm(&DenseMatrix::zeros(0, 0)), 0.0);
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_complex(&mut rng, 4, 4);
        let (s, u, v) = svd_sorted(&m);
        let rebuilt = &u * diag_real(&s) * v.adjoint();
        assert!(frobenius(&(rebuilt - &m)) < 1e-12);
        let (top, x) = top_singular_pair(&m);
        assert!((vec_norm(&(&m * &x)) - top).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(&mut rng, 5);
        assert!(frobenius(&(u.adjoint() * &u - identity(5))) < 1e-12);
    }

    #[test]
    fn gram_schmidt_extension() {
        let n = 3;
        let z = DenseVector::from_vec(vec![cplx(0.6, 0.0), cplx(0.0, 0.8), ZERO]);
        let space: Vec<DenseVector> = (0..2).map(|k| identity(n).column(k).into_owned()).collect();
        let basis = extend_orthonormal(std::slice::from_ref(&z), &space, 1e-10);
        assert_eq!(basis.len(), 2);
        assert!(inner(&basis[1], &z).norm() < 1e-14);
        assert!(basis[1][2].norm() < 1e-14);
    }
}
