//! JSON encoding of complex matrices as row-major lists of `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub fn to_flat(m: &DenseMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

/// Decodes an `n x n` matrix, naming `field` in every error.
pub fn from_flat(entries: &[[f64; 2]], n: usize, field: &str) -> Result<DenseMatrix> {
    if entries.len() != n * n {
        return Err(Error::invalid(
            field,
            format!("expected {} entries for n = {n}, found {}", n * n, entries.len()),
        ));
    }
    if let Some(k) = entries.iter().position(|e| !(e[0].is_finite() && e[1].is_finite())) {
        return Err(Error::invalid(format!("{field}[{k}]"), "entry is not finite"));
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let e = entries[i * n + j];
        Complex64::new(e[0], e[1])
    }))
}

/// `#[serde(with = "flat_matrix")]` for square matrices; the dimension is
/// inferred from the entry count.
pub mod flat_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DenseMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_flat(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DenseMatrix, D::Error> {
        let entries = Vec::<[f64; 2]>::deserialize(d)?;
        let n = (entries.len() as f64).sqrt().round() as usize;
        from_flat(&entries, n, "matrix").map_err(serde::de::Error::custom)
    }
}

pub mod complex_pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

pub mod option_complex_pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        z.map(|z| [z.re, z.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Complex64>, D::Error> {
        Ok(Option::<[f64; 2]>::deserialize(d)?.map(|[re, im]| Complex64::new(re, im)))
    }
}

pub mod vector {
    use super::*;
    use crate::linalg::DenseVector;

    pub fn serialize<S: Serializer>(v: &DenseVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DenseVector, D::Error> {
        let e = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(DenseVector::from_iterator(
            e.len(),
            e.iter().map(|p| Complex64::new(p[0], p[1])),
        ))
    }
}

pub mod option_vector {
    use super::*;
    use crate::linalg::DenseVector;

    pub fn serialize<S: Serializer>(v: &Option<DenseVector>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<DenseVector>, D::Error> {
        Ok(Option::<Vec<[f64; 2]>>::deserialize(d)?
            .map(|e| DenseVector::from_iterator(e.len(), e.iter().map(|p| Complex64::new(p[0], p[1])))))
    }
}
