//! The Property P constant
//! `γ(X) = sup { ⟨A, B⟩ : A, B ≥ 0, ‖A‖_{X→X*} ≤ 1, ‖B‖_{X*→X} ≤ 1 }`
//! estimated from below over 2x2 PSD pairs.

mod extreme;
mod parrot;

pub use extreme::{count_extreme_points, extreme_point_test, EXTREME_EPS, EXTREME_TOL};
pub use parrot::{parrot_block, Poly2};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{from_real_rows, DenseMatrix};
use crate::norms::{
    dual_arc, dual_opnorm_from_entries, hs_inner, opnorm_psd_x_to_xdual, opnorm_psd_xdual_to_x, BoundaryArc,
    SpaceDescriptor,
};
use crate::optimize::{stream_rng, DEFAULT_SEED};
use crate::serde_util::flat_matrix;

pub const DEFAULT_STARTS: usize = 64;
pub const DEFAULT_ITERS: usize = 500;
pub const DEFAULT_MARGIN: f64 = 1e-3;
/// Coordinate steps below this end an ascent early.
const MIN_STEP: f64 = 1e-12;
const INITIAL_STEP: f64 = 0.25;

/// A feasible PSD pair with both constraints active; `value` is a certified
/// lower bound for `γ(X)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaWitness {
    #[serde(rename = "A", with = "flat_matrix")]
    pub a: DenseMatrix,
    #[serde(rename = "B", with = "flat_matrix")]
    pub b: DenseMatrix,
    pub value: f64,
    #[serde(rename = "normA")]
    pub norm_a: f64,
    #[serde(rename = "normB")]
    pub norm_b: f64,
}

/// Search effort: independent starts times ascent sweeps per start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub starts: usize,
    pub iters: usize,
}

impl Budget {
    pub fn new(starts: usize, iters: usize) -> Result<Self> {
        if starts == 0 || iters == 0 {
            return Err(Error::invalid("budget", "starts and iterations must both be positive"));
        }
        Ok(Budget { starts, iters })
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            starts: DEFAULT_STARTS,
            iters: DEFAULT_ITERS,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.starts, self.iters)
    }
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::invalid("budget", format!("expected STARTSxITERS, got `{s}`")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid("budget", format!("`{t}` is not a positive integer")))
        };
        Budget::new(parse(a)?, parse(b)?)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PropertyPVerdict {
    Fails { witness: GammaWitness },
    NotRefuted { value: f64 },
}

/// Rescales `A` and `B` so both norm constraints are active.
pub fn gamma_lower_bound(space: &SpaceDescriptor, a: &DenseMatrix, b: &DenseMatrix) -> Result<GammaWitness> {
    let na = opnorm_psd_x_to_xdual(a, space)?;
    let nb = opnorm_psd_xdual_to_x(b, space)?;
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Precondition("both matrices must be non-zero".into()));
    }
    let a = a.unscale(na);
    let b = b.unscale(nb);
    Ok(GammaWitness {
        value: hs_inner(&a, &b),
        norm_a: opnorm_psd_x_to_xdual(&a, space)?,
        norm_b: opnorm_psd_xdual_to_x(&b, space)?,
        a,
        b,
    })
}

/// Six box coordinates in `[0, 1]`: `(a11, a22, ρa, b11, b22, ρb)` with
/// `a12 = ρa sqrt(a11 a22)`, which keeps every point PSD with non-negative
/// off-diagonal entries.
type Chart = [f64; 6];

fn entries(x: &Chart) -> [f64; 6] {
    [
        x[0],
        x[1],
        x[2] * (x[0] * x[1]).sqrt(),
        x[3],
        x[4],
        x[5] * (x[3] * x[4]).sqrt(),
    ]
}

fn chart_matrix(d: f64, e: f64, off: f64) -> DenseMatrix {
    from_real_rows(&[&[d, off], &[off, e]])
}

struct Evaluator {
    space: SpaceDescriptor,
    primal: BoundaryArc,
    dual: BoundaryArc,
}

impl Evaluator {
    fn new(space: &SpaceDescriptor) -> Self {
        let primal = BoundaryArc::new(space);
        let dual = dual_arc(&primal, crate::norms::ARC_NODES, false);
        Evaluator {
            space: space.clone(),
            primal,
            dual,
        }
    }

    /// Objective from node maxima only; used to steer the search.
    fn coarse(&self, x: &Chart) -> f64 {
        let [a11, a22, a12, b11, b22, b12] = entries(x);
        let na = self.primal.quadratic_max_coarse(a11, a12, a22);
        let nb = self.dual.quadratic_max_coarse(b11, b12, b22);
        if na <= 0.0 || nb <= 0.0 {
            return 0.0;
        }
        (a11 * b11 + 2.0 * a12 * b12 + a22 * b22) / (na * nb)
    }

    /// Witness with refined norms.
    fn witness(&self, x: &Chart) -> Option<GammaWitness> {
        let [a11, a22, a12, b11, b22, b12] = entries(x);
        let na = self.primal.quadratic_max(a11, a12, a22);
        let nb = dual_opnorm_from_entries(b11, b12, b22, &self.space);
        if na <= 0.0 || nb <= 0.0 {
            return None;
        }
        let a = chart_matrix(a11 / na, a22 / na, a12 / na);
        let b = chart_matrix(b11 / nb, b22 / nb, b12 / nb);
        Some(GammaWitness {
            value: hs_inner(&a, &b),
            norm_a: self.primal.quadratic_max(a11 / na, a12 / na, a22 / na),
            norm_b: dual_opnorm_from_entries(b11 / nb, b12 / nb, b22 / nb, &self.space),
            a,
            b,
        })
    }

    fn ascend(&self, mut x: Chart, iters: usize) -> Chart {
        let mut step = [INITIAL_STEP; 6];
        let mut f = self.coarse(&x);
        for _ in 0..iters {
            for i in 0..6 {
                let mut moved = false;
                for dir in [1.0, -1.0] {
                    let mut y = x;
                    y[i] = (x[i] + dir * step[i]).clamp(0.0, 1.0);
                    if y[i] == x[i] {
                        continue;
                    }
                    let fy = self.coarse(&y);
                    if fy > f {
                        x = y;
                        f = fy;
                        moved = true;
                        break;
                    }
                }
                step[i] = if moved { (step[i] * 1.5).min(0.5) } else { step[i] * 0.5 };
            }
            if step.iter().all(|s| *s < MIN_STEP) {
                break;
            }
        }
        x
    }
}

/// Deterministic start `index`: a few structured pairs first, then uniform
/// random points of the chart, each drawn from its own stream.
fn start_point(index: usize, seed: u64) -> Chart {
    const STRUCTURED: [Chart; 5] = [
        [1.0, 1.0, 0.0, 1.0, 1.0, 0.0],
        [1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, 0.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, 1.0, 1.0, 1.0, 0.0],
    ];
    if let Some(x) = STRUCTURED.get(index) {
        return *x;
    }
    let mut rng = stream_rng(seed, index as u64);
    let mut x = [0.0; 6];
    for v in &mut x {
        *v = rng.random::<f64>();
    }
    x
}

/// Best witness over `budget.starts` coordinate ascents in the six-parameter
/// chart of real PSD pairs with non-negative off-diagonals. Start `k` is the
/// same for every budget, so enlarging the start count never lowers the result.
pub fn gamma_estimate(space: &SpaceDescriptor, budget: Budget) -> Result<GammaWitness> {
    gamma_estimate_seeded(space, budget, DEFAULT_SEED)
}

pub fn gamma_estimate_seeded(space: &SpaceDescriptor, budget: Budget, seed: u64) -> Result<GammaWitness> {
    let budget = Budget::new(budget.starts, budget.iters)?;
    let eval = Arc::new(Evaluator::new(space));
    let results: Vec<Option<GammaWitness>> = (0..budget.starts)
        .into_par_iter()
        .map(|k| {
            let x = eval.ascend(start_point(k, seed), budget.iters);
            eval.witness(&x)
        })
        .collect();
    results
        .into_iter()
        .flatten()
        .fold(None, |best: Option<GammaWitness>, w| match best {
            Some(b) if b.value >= w.value => Some(b),
            _ => Some(w),
        })
        .ok_or_else(|| Error::Internal("no start produced a feasible pair".into()))
}

/// `Fails` when the estimate exceeds `1 + margin`; never asserts that
/// Property P holds.
pub fn property_p_verdict(space: &SpaceDescriptor, budget: Budget, margin: f64) -> Result<PropertyPVerdict> {
    if !(margin > 0.0) {
        return Err(Error::invalid("margin", format!("must be positive, got {margin}")));
    }
    let w = gamma_estimate(space, budget)?;
    Ok(if w.value > 1.0 + margin {
        PropertyPVerdict::Fails { witness: w }
    } else {
        PropertyPVerdict::NotRefuted { value: w.value }
    })
}

/// `sqrt(γ estimate)`, a lower bound for the MIN/MAX comparison constant.
pub fn alpha_lower_bound(space: &SpaceDescriptor, budget: Budget) -> Result<f64> {
    Ok(gamma_estimate(space, budget)?.value.sqrt())
}

/// Reads a witness for the real shadow of `space` as a witness for the
/// complex space itself; norms and value are recomputed.
pub fn transfer_lift(space: &SpaceDescriptor, w: &GammaWitness) -> Result<GammaWitness> {
    if space.is_real() {
        return Err(Error::Precondition("transfer target must be a complex space".into()));
    }
    for m in [&w.a, &w.b] {
        if m.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.nrows(),
            });
        }
        if m.iter().any(|z| z.im != 0.0) || m[(0, 1)].re < 0.0 || m[(1, 0)].re < 0.0 {
            return Err(Error::Precondition(
                "witness must be real with non-negative off-diagonal entries; apply a_plus first".into(),
            ));
        }
    }
    Ok(GammaWitness {
        a: w.a.clone(),
        b: w.b.clone(),
        value: hs_inner(&w.a, &w.b),
        norm_a: opnorm_psd_x_to_xdual(&w.a, space)?,
        norm_b: opnorm_psd_xdual_to_x(&w.b, space)?,
    })
}
