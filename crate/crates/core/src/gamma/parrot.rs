//! Block upper-triangular representation
//! `f ↦ [[f(w) I, ∂₁f(w) T₁ + ∂₂f(w) T₂], [0, f(w) I]]` of bivariate polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ensure_same_shape, identity, DenseMatrix};
use crate::norms::Vec2;

/// Polynomial `Σ c[i][j] z₁^i z₂^j` stored as a rectangular coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    coeffs: Vec<Vec<Complex64>>,
}

impl Poly2 {
    pub fn new(coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        let width = coeffs.first().map(Vec::len).unwrap_or(0);
        if width == 0 {
            return Err(Error::invalid("coefficients", "table must be non-empty"));
        }
        if let Some(i) = coeffs.iter().position(|row| row.len() != width) {
            return Err(Error::invalid(
                format!("coefficients[{i}]"),
                format!("expected {width} entries"),
            ));
        }
        if coeffs.iter().flatten().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::invalid("coefficients", "entries must be finite"));
        }
        Ok(Poly2 { coeffs })
    }

    pub fn constant(c: Complex64) -> Self {
        Poly2 { coeffs: vec![vec![c]] }
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, c)| (i, j, *c)))
    }

    pub fn eval(&self, w: &Vec2) -> Complex64 {
        self.terms()
            .map(|(i, j, c)| c * w.z1.powu(i as u32) * w.z2.powu(j as u32))
            .sum()
    }

    pub fn d1(&self, w: &Vec2) -> Complex64 {
        self.terms()
            .filter(|(i, _, _)| *i > 0)
            .map(|(i, j, c)| c * i as f64 * w.z1.powu(i as u32 - 1) * w.z2.powu(j as u32))
            .sum()
    }

    pub fn d2(&self, w: &Vec2) -> Complex64 {
        self.terms()
            .filter(|(_, j, _)| *j > 0)
            .map(|(i, j, c)| c * j as f64 * w.z1.powu(i as u32) * w.z2.powu(j as u32 - 1))
            .sum()
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let rows = self.coeffs.len() + other.coeffs.len() - 1;
        let cols = self.coeffs[0].len() + other.coeffs[0].len() - 1;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); cols]; rows];
        for (i, j, a) in self.terms() {
            for (k, l, b) in other.terms() {
                out[i + k][j + l] += a * b;
            }
        }
        Poly2 { coeffs: out }
    }
}

pub fn parrot_block(f: &Poly2, w: &Vec2, t1: &DenseMatrix, t2: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_same_shape(t1, t2)?;
    let n = t1.nrows();
    if n == 0 || !t1.is_square() {
        return Err(Error::invalid("T", "operators must be square with n >= 1"));
    }
    let fw = f.eval(w);
    let corner = t1 * f.d1(w) + t2 * f.d2(w);
    let diag = identity(n) * fw;
    let mut out = DenseMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&diag);
    out.view_mut((n, n), (n, n)).copy_from(&diag);
    out.view_mut((0, n), (n, n)).copy_from(&corner);
    Ok(out)
}
