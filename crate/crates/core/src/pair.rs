//! Candidate maps `(z1, z2) -> z1 T + z2 S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_finite, DenseMatrix};
use crate::norms::{SpaceDescriptor, Vec2};
use crate::serde_util::{from_flat, to_flat};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairJson", into = "PairJson")]
pub struct OperatorPair {
    pub t: DenseMatrix,
    pub s: DenseMatrix,
    pub space: SpaceDescriptor,
}

/// On-disk layout: `{n, T, S, space}` with row-major `[re, im]` entries.
#[derive(Serialize, Deserialize)]
struct PairJson {
    n: usize,
    #[serde(rename = "T")]
    t: Vec<[f64; 2]>,
    #[serde(rename = "S")]
    s: Vec<[f64; 2]>,
    space: SpaceDescriptor,
}

impl TryFrom<PairJson> for OperatorPair {
    type Error = Error;
    fn try_from(raw: PairJson) -> Result<Self> {
        if raw.n == 0 {
            return Err(Error::invalid("n", "dimension must be positive"));
        }
        let t = from_flat(&raw.t, raw.n, "T")?;
        let s = from_flat(&raw.s, raw.n, "S")?;
        OperatorPair::new(t, s, raw.space)
    }
}

impl From<OperatorPair> for PairJson {
    fn from(p: OperatorPair) -> Self {
        PairJson {
            n: p.n(),
            t: to_flat(&p.t),
            s: to_flat(&p.s),
            space: p.space,
        }
    }
}

impl OperatorPair {
    pub fn new(t: DenseMatrix, s: DenseMatrix, space: SpaceDescriptor) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::invalid("T", "matrix must be square"));
        }
        if s.shape() != t.shape() {
            return Err(Error::DimensionMismatch {
                expected: t.nrows(),
                found: s.nrows(),
            });
        }
        if !is_finite(&t) {
            return Err(Error::invalid("T", "entries must be finite"));
        }
        if !is_finite(&s) {
            return Err(Error::invalid("S", "entries must be finite"));
        }
        Ok(Self { t, s, space })
    }

    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    /// `z1 T + z2 S`.
    pub fn image(&self, z: &Vec2) -> DenseMatrix {
        self.t.map(|a| a * z.z1) + self.s.map(|a| a * z.z2)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("pair", e.to_string()))
    }
}
