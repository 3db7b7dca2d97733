//! Birkhoff-James orthogonality and norm parallelism of matrices.
//!
//! Each relation is decided two ways: from the definition (a search over
//! scalars) and from a vector witness `ζ` in the norm-attaining set of `T`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    columns_to_matrix, cplx, ensure_same_shape, hermitian_top, inner, op_norm, random_unit_vector, svd_sorted,
    top_singular_pair, vec_norm, DenseMatrix, DenseVector,
};
use crate::norms::schatten_norm;
use crate::optimize::{golden_max, nelder_mead, scan_then_golden_max, stream_rng, DEFAULT_SEED};
use crate::serde_util::{option_complex_pair, option_vector};

/// Relative singular-value tolerance defining the norm-attaining subspace.
pub const MSET_REL_TOL: f64 = 1e-9;
/// Nodes per axis of the polar grid in the definitional check.
pub const POLAR_NODES: usize = 64;
/// Phase nodes for parallelism scans.
pub const PHASE_NODES: usize = 4096;
/// Largest attaining-subspace dimension searched by local minimisation.
pub const MAX_LOCAL_DIM: usize = 4;
/// Random samples used when the attaining subspace is larger.
pub const FALLBACK_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthOutcome {
    Holds,
    Fails,
    WitnessNotFound,
}

/// Result of an orthogonality check.
///
/// For the definitional check `residual = min_z ‖T + zS‖ − ‖T‖` (negative when
/// the relation fails); for the witness search it is the smallest
/// `|⟨Tζ, Sζ⟩|` found.
#[derive(Debug, Clone, Serialize)]
pub struct OrthVerdict {
    pub holds: bool,
    pub outcome: OrthOutcome,
    pub residual: f64,
    #[serde(with = "option_vector")]
    pub witness: Option<DenseVector>,
    #[serde(with = "option_complex_pair")]
    pub minimizing_scalar: Option<Complex64>,
}

impl OrthVerdict {
    fn new(outcome: OrthOutcome, residual: f64) -> Self {
        OrthVerdict {
            holds: outcome == OrthOutcome::Holds,
            outcome,
            residual,
            witness: None,
            minimizing_scalar: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParallelVerdict {
    pub holds: bool,
    /// `max_{|z|=1} ‖T + zS‖`.
    pub attained: f64,
    /// `‖T‖ + ‖S‖`.
    pub target: f64,
    #[serde(with = "option_vector")]
    pub witness: Option<DenseVector>,
    #[serde(with = "option_complex_pair")]
    pub phase: Option<Complex64>,
    /// `‖T‖‖S‖ − |⟨Tζ, Sζ⟩|` for the witness, when one is returned.
    pub witness_gap: Option<f64>,
}

/// Parallelism decided by the numerical radius of `S^*T`:
/// `max_ζ |⟨Tζ, Sζ⟩|` against `‖T‖‖S‖`.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusVerdict {
    pub holds: bool,
    pub radius: f64,
    pub target: f64,
    #[serde(with = "option_vector")]
    pub witness: Option<DenseVector>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixNorm {
    Operator,
    Schatten(f64),
}

impl MatrixNorm {
    pub fn eval(&self, m: &DenseMatrix) -> f64 {
        match *self {
            MatrixNorm::Operator => op_norm(m),
            MatrixNorm::Schatten(p) => schatten_norm(m, p).unwrap_or(f64::NAN),
        }
    }
}

/// Phase scan of `‖T + zS‖` in the chosen norm.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseScan {
    pub attained: f64,
    #[serde(with = "crate::serde_util::complex_pair")]
    pub phase: Complex64,
    pub norm_t: f64,
    pub norm_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceReport {
    pub p: f64,
    /// `‖T‖_p + ‖S‖_p − max_{|z|=1} ‖T + zS‖_p`.
    pub gap: f64,
    /// Second singular value of the two stacked, unit-normalised vectorisations.
    pub score: f64,
    pub gap_vanishes: bool,
    pub dependent: bool,
    /// Both flags agree.
    pub consistent: bool,
}

/// Orthonormal basis of the right singular subspace for singular values
/// `σ ≥ σ_max (1 − tol)`.
pub fn m_set_basis(t: &DenseMatrix, tol: f64) -> Result<Vec<DenseVector>> {
    let (sigma, _, v) = svd_sorted(t);
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Err(Error::Precondition(
            "the norm-attaining set of the zero matrix is undefined".into(),
        ));
    }
    Ok(sigma
        .iter()
        .enumerate()
        .take_while(|(_, s)| **s >= top * (1.0 - tol))
        .map(|(k, _)| v.column(k).into_owned())
        .collect())
}

/// Decides `T ⊥ S` from `min_{z∈ℂ} ‖T + zS‖ ≥ ‖T‖ − tol`.
///
/// The map `z ↦ ‖T + zS‖` is convex and exceeds `‖T‖` outside the disc of
/// radius `2‖T‖/‖S‖`, so a polar grid on that disc followed by a simplex
/// polish from the best node finds the minimum.
pub fn bj_orthogonal_definitional(t: &DenseMatrix, s: &DenseMatrix, tol: f64) -> Result<OrthVerdict> {
    ensure_same_shape(t, s)?;
    let norm_t = op_norm(t);
    let norm_s = op_norm(s);
    if norm_s == 0.0 {
        let mut v = OrthVerdict::new(OrthOutcome::Holds, 0.0);
        v.minimizing_scalar = Some(Complex64::new(0.0, 0.0));
        return Ok(v);
    }
    let radius = 2.0 * norm_t / norm_s.max(f64::EPSILON);
    let f = |z: Complex64| op_norm(&(t + s * z));

    let mut best = (Complex64::new(0.0, 0.0), norm_t);
    for i in 1..POLAR_NODES {
        let r = radius * i as f64 / (POLAR_NODES - 1) as f64;
        for j in 0..POLAR_NODES {
            let z = Complex64::from_polar(r, TAU * j as f64 / POLAR_NODES as f64);
            let v = f(z);
            if v < best.1 {
                best = (z, v);
            }
        }
    }
    let cell = radius / (POLAR_NODES - 1) as f64;
    let (x, v) = nelder_mead(
        |x| f(cplx(x[0], x[1])),
        &[best.0.re, best.0.im],
        cell.max(1e-12),
        2000,
        1e-16,
    );
    if v < best.1 {
        best = (cplx(x[0], x[1]), v);
    }
    let residual = best.1 - norm_t;
    let outcome = if residual >= -tol {
        OrthOutcome::Holds
    } else {
        OrthOutcome::Fails
    };
    let mut verdict = OrthVerdict::new(outcome, residual);
    verdict.minimizing_scalar = Some(best.0);
    Ok(verdict)
}

/// Searches the unit sphere of the norm-attaining subspace of `T` for `ζ`
/// with `|⟨Tζ, Sζ⟩| ≤ tol`.
pub fn bj_witness_search(t: &DenseMatrix, s: &DenseMatrix, tol: f64) -> Result<OrthVerdict> {
    ensure_same_shape(t, s)?;
    let basis = m_set_basis(t, MSET_REL_TOL)?;
    bj_witness_in_subspace(t, s, &basis, tol)
}

/// Witness search on the unit sphere of the span of the orthonormal `basis`.
pub fn bj_witness_in_subspace(
    t: &DenseMatrix,
    s: &DenseMatrix,
    basis: &[DenseVector],
    tol: f64,
) -> Result<OrthVerdict> {
    ensure_same_shape(t, s)?;
    if basis.is_empty() {
        return Err(Error::Precondition("witness search needs a non-empty subspace".into()));
    }
    let n = t.nrows();
    let k = basis.len();
    let q = columns_to_matrix(basis, n);
    // ⟨TQx, SQx⟩ = x^* C x
    let c = q.adjoint() * s.adjoint() * t * &q;
    let form = |x: &DenseVector| -> f64 {
        let nx = vec_norm(x);
        if nx == 0.0 {
            return f64::INFINITY;
        }
        ((x.adjoint() * &c * x)[(0, 0)]).norm() / (nx * nx)
    };
    let to_vec = |y: &[f64]| DenseVector::from_fn(k, |i, _| cplx(y[2 * i], y[2 * i + 1]));
    let objective = |y: &[f64]| form(&to_vec(y));
    let polish = |x0: &DenseVector| -> (DenseVector, f64) {
        let y0: Vec<f64> = x0.iter().flat_map(|z| [z.re, z.im]).collect();
        let (y, v) = nelder_mead(objective, &y0, 0.25, 4000, 1e-18);
        (to_vec(&y), v)
    };

    let mut rng = stream_rng(DEFAULT_SEED, 0);
    let mut starts: Vec<DenseVector> = Vec::new();
    if k <= MAX_LOCAL_DIM {
        for i in 0..k {
            starts.push(DenseVector::from_fn(k, |r, _| {
                if r == i {
                    cplx(1.0, 0.0)
                } else {
                    cplx(0.0, 0.0)
                }
            }));
            for j in (i + 1)..k {
                for w in [cplx(1.0, 0.0), cplx(-1.0, 0.0), cplx(0.0, 1.0), cplx(0.0, -1.0)] {
                    starts.push(DenseVector::from_fn(k, |r, _| {
                        if r == i {
                            cplx(1.0, 0.0)
                        } else if r == j {
                            w
                        } else {
                            cplx(0.0, 0.0)
                        }
                    }));
                }
            }
        }
        for _ in 0..8 {
            starts.push(random_unit_vector(&mut rng, k));
        }
    } else {
        let mut samples: Vec<(f64, DenseVector)> = (0..FALLBACK_SAMPLES)
            .map(|_| {
                let x = random_unit_vector(&mut rng, k);
                (form(&x), x)
            })
            .collect();
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        starts.extend(samples.into_iter().take(8).map(|(_, x)| x));
    }

    let mut best: Option<(DenseVector, f64)> = None;
    for x0 in &starts {
        let (x, v) = if k == 1 { (x0.clone(), form(x0)) } else { polish(x0) };
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((x, v));
        }
        if best.as_ref().is_some_and(|b| b.1 <= tol * 1e-3) {
            break;
        }
    }
    let (x, residual) = best.expect("at least one start");
    let zeta = &q * &x;
    let zeta = zeta.unscale(vec_norm(&zeta));

    if residual <= tol {
        let mut verdict = OrthVerdict::new(OrthOutcome::Holds, residual);
        verdict.witness = Some(zeta);
        return Ok(verdict);
    }
    if k > MAX_LOCAL_DIM && bj_orthogonal_definitional(t, s, tol)?.holds {
        return Ok(OrthVerdict::new(OrthOutcome::WitnessNotFound, residual));
    }
    Ok(OrthVerdict::new(OrthOutcome::Fails, residual))
}

/// `max_{|z|=1} N(T + zS)` by a phase scan with golden-section polish.
pub fn phase_scan(t: &DenseMatrix, s: &DenseMatrix, norm: MatrixNorm) -> Result<PhaseScan> {
    ensure_same_shape(t, s)?;
    let f = |theta: f64| norm.eval(&(t + s * Complex64::from_polar(1.0, theta)));
    let h = TAU / PHASE_NODES as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for j in 0..PHASE_NODES {
        let theta = h * j as f64;
        let v = f(theta);
        if v > best.1 {
            best = (theta, v);
        }
    }
    let refined = golden_max(f, best.0 - h, best.0 + h, 1e-13);
    if refined.1 > best.1 {
        best = refined;
    }
    Ok(PhaseScan {
        attained: best.1,
        phase: Complex64::from_polar(1.0, best.0.rem_euclid(TAU)),
        norm_t: norm.eval(t),
        norm_s: norm.eval(s),
    })
}

/// Decides `T ∥ S` in the operator norm: `max_{|z|=1} ‖T + zS‖ ≥ ‖T‖ + ‖S‖ − tol`.
/// When it holds, the top right singular vector of `T + zS` is returned as a
/// witness with `|⟨Tζ, Sζ⟩| ≈ ‖T‖‖S‖`.
pub fn norm_parallel(t: &DenseMatrix, s: &DenseMatrix, tol: f64) -> Result<ParallelVerdict> {
    ensure_same_shape(t, s)?;
    let scan = phase_scan(t, s, MatrixNorm::Operator)?;
    if scan.norm_t == 0.0 || scan.norm_s == 0.0 {
        return Err(Error::Precondition("parallelism needs two non-zero matrices".into()));
    }
    let target = scan.norm_t + scan.norm_s;
    let holds = scan.attained >= target - tol;
    let (witness, witness_gap) = if holds {
        let (_, zeta) = top_singular_pair(&(t + s * scan.phase));
        let gap = scan.norm_t * scan.norm_s - inner(&(t * &zeta), &(s * &zeta)).norm();
        (Some(zeta), Some(gap))
    } else {
        (None, None)
    };
    Ok(ParallelVerdict {
        holds,
        attained: scan.attained,
        target,
        witness,
        phase: Some(scan.phase),
        witness_gap,
    })
}

/// Decides `T ∥ S` from the numerical radius `w(S^*T) = max_θ λ_max(Re(e^{iθ} S^*T))`.
pub fn parallel_by_radius(t: &DenseMatrix, s: &DenseMatrix, tol: f64) -> Result<RadiusVerdict> {
    ensure_same_shape(t, s)?;
    let target = op_norm(t) * op_norm(s);
    let m = s.adjoint() * t;
    let real_part = |theta: f64| {
        let r = &m * Complex64::from_polar(1.0, theta);
        (&r + r.adjoint()).scale(0.5)
    };
    let (theta, radius) = scan_then_golden_max(|th| hermitian_top(&real_part(th)).0, 0.0, TAU, 720, 1e-13);
    let holds = radius >= target - tol;
    let witness = holds.then(|| hermitian_top(&real_part(theta)).1);
    Ok(RadiusVerdict {
        holds,
        radius,
        target,
        witness,
    })
}

/// Compares the Schatten-`p` parallelism gap of `(T, S)` with a linear
/// dependence score. In `S_p` with `1 < p < ∞` the two vanish together; the
/// gap vanishes to second order in the distance from dependence, so the score
/// is compared with `sqrt(tol)`.
pub fn sp_parallel_iff_dependent(t: &DenseMatrix, s: &DenseMatrix, p: f64, tol: f64) -> Result<DependenceReport> {
    if !(p > 1.0 && p < f64::INFINITY) {
        return Err(Error::invalid(
            "p",
            format!("exponent must lie strictly between 1 and infinity, got {p}"),
        ));
    }
    let scan = phase_scan(t, s, MatrixNorm::Schatten(p))?;
    let gap = scan.norm_t + scan.norm_s - scan.attained;
    let score = dependence_score(t, s);
    let gap_vanishes = gap <= tol;
    let dependent = score <= tol.sqrt();
    Ok(DependenceReport {
        p,
        gap,
        score,
        gap_vanishes,
        dependent,
        consistent: gap_vanishes == dependent,
    })
}

/// Second singular value of the `2 × n²` matrix whose rows are the
/// unit-normalised entries of `T` and `S`; zero iff they are dependent.
pub fn dependence_score(t: &DenseMatrix, s: &DenseMatrix) -> f64 {
    let nt = t.norm();
    let ns = s.norm();
    if nt == 0.0 || ns == 0.0 {
        return 0.0;
    }
    let that = t.unscale(nt);
    let shat = s.unscale(ns);
    // the Gram matrix of the rows has eigenvalues 1 ± |g|; the projection
    // residual gives 1 − |g|² without cancellation
    let g = that
        .iter()
        .zip(shat.iter())
        .map(|(a, b)| b * a.conj())
        .sum::<Complex64>();
    let residual = (&shat - &that * g).norm();
    residual / (1.0 + g.norm().min(1.0)).sqrt()
}
