//! Certification and refutation of candidate isometries
//! `(z1, z2) ↦ z1 T + z2 S` from a two-dimensional space into matrices.
//!
//! A candidate first has to match the norm on a verification grid. For
//! `ℓ_1` and `ℓ_p` with `p > 2` the engine then repeatedly brings `T` to a
//! positive diagonal with leading ones, finds a unit vector shared by the
//! norm-attaining sets, and strips it off, checking at each stage that the
//! smaller pair still matches the norm. A genuine isometry would survive every
//! round, but each round removes a unit diagonal entry, so a finite pair is
//! refuted with a concrete failing inequality.

mod candidates;
mod inequalities;
mod trace;

pub use candidates::{generic_candidate, grid_aligned_candidate};
pub use inequalities::{
    growth_constant, growth_inequality_check, growth_witness, GrowthInequalityReport, GrowthWitness, GROWTH_GRID_MAX,
    GROWTH_GRID_NODES,
};
pub use trace::{replay, RefutationTrace, ReplayReport, Step, StepData, StepKind, TerminalFact, Verdict, REPLAY_TOL};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    columns_to_matrix, cplx, diag_real, extend_orthonormal, hard_zero, hermitian_defect, hermitian_eigen, inner,
    op_norm, strip_leading, vec_norm, DenseMatrix, DenseVector, ONE, ZERO,
};
use crate::norms::{BoundaryArc, SpaceDescriptor, SpaceKind, Vec2};
use crate::orthogonality::{bj_orthogonal_definitional, bj_witness_in_subspace, norm_parallel};
use crate::pair::OperatorPair;

/// A diagonal entry of the canonical `T` counts as one from `1 − UNIT_THRESHOLD` on.
pub const UNIT_THRESHOLD: f64 = 1e-7;
/// `‖Sζ‖` above this selects the growth branch of the orthogonality route.
pub const CASE_SPLIT: f64 = 1e-8;
pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_STEPS: usize = 32;
pub const MIN_GRID_POINTS: usize = 256;
/// Hermitian defect accepted for `T` in the canonical form.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Verification grid: boundary-arc nodes times relative phases of `z2`.
/// Real spaces always use the two phases `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub arc_nodes: usize,
    pub phases: usize,
}

impl GridSpec {
    pub fn for_space(space: &SpaceDescriptor) -> Self {
        if space.is_real() {
            GridSpec {
                arc_nodes: 129,
                phases: 2,
            }
        } else {
            GridSpec {
                arc_nodes: 65,
                phases: 16,
            }
        }
    }

    /// `phases` relative phases with the smallest odd arc-node count giving at
    /// least `MIN_GRID_POINTS` points.
    pub fn with_phases(phases: usize) -> Self {
        let phases = phases.max(1);
        let mut arc_nodes = MIN_GRID_POINTS.div_ceil(phases).max(3);
        if arc_nodes.is_multiple_of(2) {
            arc_nodes += 1;
        }
        GridSpec { arc_nodes, phases }
    }

    pub fn points(&self, space: &SpaceDescriptor) -> Vec<Vec2> {
        let arc = BoundaryArc::with_nodes(space, self.arc_nodes);
        let phases: Vec<Complex64> = if space.is_real() {
            vec![ONE, -ONE]
        } else {
            (0..self.phases)
                .map(|l| Complex64::from_polar(1.0, std::f64::consts::TAU * l as f64 / self.phases as f64))
                .collect()
        };
        let mut out = Vec::with_capacity(arc.len() * phases.len());
        for (x, y) in arc.points() {
            for w in &phases {
                out.push(Vec2::new(cplx(x, 0.0), w * y));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DescentOptions {
    pub max_steps: usize,
    pub tol: f64,
    pub grid: GridSpec,
}

impl DescentOptions {
    pub fn for_space(space: &SpaceDescriptor) -> Self {
        DescentOptions {
            max_steps: DEFAULT_MAX_STEPS,
            tol: DEFAULT_TOL,
            grid: GridSpec::for_space(space),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport {
    pub max_deviation: f64,
    pub worst_point: Vec2,
    pub norm_at_worst: f64,
    pub gauge_at_worst: f64,
    pub points: usize,
}

/// `max |‖z1 T + z2 S‖ − gauge(z)|` over the grid of unit vectors.
pub fn isometry_deviation(pair: &OperatorPair, grid: &GridSpec) -> Result<DeviationReport> {
    let points = grid.points(&pair.space);
    let values: Vec<(f64, f64)> = points
        .par_iter()
        .map(|z| Ok((op_norm(&pair.image(z)), pair.space.gauge(z)?)))
        .collect::<Result<_>>()?;
    let (k, _) = values
        .iter()
        .enumerate()
        .map(|(k, (n, g))| (k, (n - g).abs()))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(DeviationReport {
        max_deviation: (values[k].0 - values[k].1).abs(),
        worst_point: points[k],
        norm_at_worst: values[k].0,
        gauge_at_worst: values[k].1,
        points: points.len(),
    })
}

/// `([[0, T], [T*, 0]], [[0, S], [S*, 0]])`: both blocks self-adjoint, and the
/// norm at `z` becomes `max(‖z1 T + z2 S‖, ‖z̄1 T + z̄2 S‖)`.
pub fn selfadjoint_double(pair: &OperatorPair) -> Result<OperatorPair> {
    if !pair.space.conjugation_invariant() {
        return Err(Error::Precondition(
            "doubling needs a gauge invariant under conjugation".into(),
        ));
    }
    let n = pair.n();
    let block = |m: &DenseMatrix| {
        let mut out = DenseMatrix::zeros(2 * n, 2 * n);
        out.view_mut((0, n), (n, n)).copy_from(m);
        out.view_mut((n, 0), (n, n)).copy_from(&m.adjoint());
        out
    };
    OperatorPair::new(block(&pair.t), block(&pair.s), pair.space.clone())
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessaryConditionsReport {
    pub norm_t: f64,
    pub norm_s: f64,
    pub norms_pass: bool,
    pub t_perp_s: bool,
    pub s_perp_t: bool,
    /// Only reported for `ℓ_1`.
    pub parallel: Option<bool>,
    pub pass: bool,
}

/// Necessary conditions on an isometry: unit norms, mutual orthogonality,
/// and for `ℓ_1` parallelism.
pub fn necessary_conditions(pair: &OperatorPair, tol: f64) -> Result<NecessaryConditionsReport> {
    let norm_t = op_norm(&pair.t);
    let norm_s = op_norm(&pair.s);
    let norms_pass = (norm_t - 1.0).abs() <= tol && (norm_s - 1.0).abs() <= tol;
    let t_perp_s = bj_orthogonal_definitional(&pair.t, &pair.s, tol)?.holds;
    let s_perp_t = bj_orthogonal_definitional(&pair.s, &pair.t, tol)?.holds;
    let parallel = match pair.space.kind {
        SpaceKind::Lp { p: 1.0 } if norm_t > 0.0 && norm_s > 0.0 => Some(norm_parallel(&pair.t, &pair.s, tol)?.holds),
        SpaceKind::Lp { p: 1.0 } => Some(false),
        _ => None,
    };
    Ok(NecessaryConditionsReport {
        norm_t,
        norm_s,
        norms_pass,
        t_perp_s,
        s_perp_t,
        parallel,
        pass: norms_pass && t_perp_s && s_perp_t && parallel.unwrap_or(true),
    })
}

#[derive(Debug, Clone)]
pub struct Canonical {
    pub pair: OperatorPair,
    pub u: DenseMatrix,
    pub signs: Vec<f64>,
    pub diagonal: Vec<f64>,
    pub unit_count: usize,
    pub discarded: f64,
}

/// Conjugates by the spectral unitary of the self-adjoint `T` (eigenvalues by
/// decreasing modulus) and multiplies on the right by the sign unitary, so
/// `T` becomes a non-negative diagonal with its unit entries first.
pub fn canonical_form(pair: &OperatorPair) -> Result<Canonical> {
    let scale = op_norm(&pair.t).max(1.0);
    if hermitian_defect(&pair.t) > HERMITIAN_TOL * scale {
        return Err(Error::Precondition(
            "canonical form needs a self-adjoint T; double the pair first".into(),
        ));
    }
    let (vals, vecs) = hermitian_eigen(&pair.t);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].abs().total_cmp(&vals[a].abs()).then(a.cmp(&b)));
    let n = pair.n();
    let u = DenseMatrix::from_fn(n, n, |i, k| vecs[(i, order[k])]);
    let signs: Vec<f64> = order.iter().map(|&k| if vals[k] < 0.0 { -1.0 } else { 1.0 }).collect();
    let (out, discarded) = apply_canonical(pair, &u, &signs)?;
    let diagonal: Vec<f64> = (0..n).map(|i| out.t[(i, i)].re).collect();
    let unit_count = diagonal.iter().filter(|d| **d >= 1.0 - UNIT_THRESHOLD).count();
    Ok(Canonical {
        pair: out,
        u,
        signs,
        diagonal,
        unit_count,
        discarded,
    })
}

/// `T ↦ U*TUV`, `S ↦ U*SUV` with `V = diag(signs)`; `T` is then replaced by
/// its real diagonal. Returns the largest modulus dropped.
pub(crate) fn apply_canonical(pair: &OperatorPair, u: &DenseMatrix, signs: &[f64]) -> Result<(OperatorPair, f64)> {
    let v = diag_real(signs);
    let t = u.adjoint() * &pair.t * u * &v;
    let s = u.adjoint() * &pair.s * u * &v;
    let n = t.nrows();
    let mut discarded: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                discarded = discarded.max(t[(i, j)].norm());
            } else {
                discarded = discarded.max(t[(i, i)].im.abs());
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| t[(i, i)].re).collect();
    Ok((OperatorPair::new(diag_real(&diag), s, pair.space.clone())?, discarded))
}

fn structural_threshold(tol: f64) -> f64 {
    (2.0 * tol).sqrt()
}

fn leading_basis(n: usize, k: usize) -> Vec<DenseVector> {
    (0..k)
        .map(|i| DenseVector::from_fn(n, |r, _| if r == i { ONE } else { ZERO }))
        .collect()
}

/// Restriction of `v` to its first `k` coordinates, renormalised.
fn project_leading(v: &DenseVector, k: usize) -> Option<DenseVector> {
    let mut w = v.clone();
    for i in k..w.len() {
        w[i] = ZERO;
    }
    let norm = vec_norm(&w);
    (norm > 1e-6).then(|| w.unscale(norm))
}

#[derive(Debug, Clone)]
pub struct CommonEigvec {
    pub zeta: DenseVector,
    pub alpha: Complex64,
    pub residual: f64,
    /// The pair with `S` replaced by `ᾱ S`.
    pub pair: OperatorPair,
}

/// For a canonical pair over `ℓ_1` with `k` leading ones: a parallelism
/// witness `ζ` in the span of the first `k` basis vectors with `Sζ = αζ`,
/// `|α| = 1`, and the pair with `S` rotated so that `Sζ = ζ`.
pub fn common_eigvec_p1(pair: &OperatorPair, k: usize, tol: f64) -> Result<CommonEigvec> {
    if !matches!(pair.space.kind, SpaceKind::Lp { p: 1.0 }) {
        return Err(Error::Precondition("common eigenvector step applies to l1 only".into()));
    }
    match parallel_eigvec(pair, k, tol)? {
        EigvecOutcome::Found(found) => Ok(found),
        EigvecOutcome::NotParallel { attained, .. } => Err(Error::Precondition(format!(
            "T and S are not parallel: max over phases of ‖T + zS‖ is {attained}"
        ))),
        EigvecOutcome::NotEigen { residual, .. } => Err(Error::Precondition(format!(
            "parallelism witness is not a common eigenvector (residual {residual:e})"
        ))),
    }
}

enum EigvecOutcome {
    Found(CommonEigvec),
    NotParallel {
        phase: Complex64,
        attained: f64,
    },
    NotEigen {
        zeta: DenseVector,
        alpha: Complex64,
        residual: f64,
    },
}

fn parallel_eigvec(pair: &OperatorPair, k: usize, tol: f64) -> Result<EigvecOutcome> {
    if op_norm(&pair.s) == 0.0 {
        return Ok(EigvecOutcome::NotParallel {
            phase: ONE,
            attained: op_norm(&pair.t),
        });
    }
    let verdict = norm_parallel(&pair.t, &pair.s, tol)?;
    let phase = verdict.phase.unwrap_or(ONE);
    let Some(zeta) = verdict.witness.as_ref().and_then(|w| project_leading(w, k)) else {
        return Ok(EigvecOutcome::NotParallel {
            phase,
            attained: verdict.attained,
        });
    };
    let sz = &pair.s * &zeta;
    let alpha = inner(&sz, &zeta);
    let residual = vec_norm(&(&sz - &zeta * alpha));
    let threshold = structural_threshold(tol);
    if residual > threshold || (alpha.norm() - 1.0).abs() > threshold {
        return Ok(EigvecOutcome::NotEigen { zeta, alpha, residual });
    }
    let unit = alpha / alpha.norm();
    let mut rotated = pair.clone();
    rotated.s *= unit.conj();
    Ok(EigvecOutcome::Found(CommonEigvec {
        zeta,
        alpha: unit,
        residual,
        pair: rotated,
    }))
}

/// What the conjugated `S` must look like in its first column: `e1` after the
/// parallelism step, zero after the orthogonality step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeflateMode {
    Parallel,
    Orthogonal,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeflationChecks {
    pub first_column_residual: f64,
    pub t_first_column_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Deflation {
    pub pair: OperatorPair,
    pub w: DenseMatrix,
    pub first_column_residual: f64,
    pub identity_residual: f64,
    pub unit_count_after: usize,
}

/// Unitary whose first column is `ζ`, completed inside the span of the first
/// `k` basis vectors and then by the remaining basis vectors.
pub fn deflation_unitary(zeta: &DenseVector, k: usize) -> Result<DenseMatrix> {
    let n = zeta.len();
    let mut cols = extend_orthonormal(std::slice::from_ref(zeta), &leading_basis(n, k), 1e-8);
    if cols.len() != k {
        return Err(Error::Precondition(
            "ζ does not lie in the span of the leading basis vectors".into(),
        ));
    }
    cols.extend(leading_basis(n, n).into_iter().skip(k));
    Ok(columns_to_matrix(&cols, n))
}

/// `T1 = W*TW`, `S1 = (W*SW)*`, sub-`tol` entries zeroed, first row and
/// column removed.
pub(crate) fn apply_deflation(
    pair: &OperatorPair,
    w: &DenseMatrix,
    mode: DeflateMode,
    tol: f64,
) -> Result<(OperatorPair, DeflationChecks)> {
    let n = pair.n();
    let mut t1 = w.adjoint() * &pair.t * w;
    let mut s1 = (w.adjoint() * &pair.s * w).adjoint();
    let lead = match mode {
        DeflateMode::Parallel => ONE,
        DeflateMode::Orthogonal => ZERO,
    };
    let edge_residual = |m: &DenseMatrix, corner: Complex64| {
        let mut r: f64 = (m[(0, 0)] - corner).norm_sqr();
        for i in 1..n {
            r += m[(i, 0)].norm_sqr() + m[(0, i)].norm_sqr();
        }
        r.sqrt()
    };
    let checks = DeflationChecks {
        first_column_residual: edge_residual(&s1, lead),
        t_first_column_residual: edge_residual(&t1, ONE),
    };
    hard_zero(&mut t1, tol);
    hard_zero(&mut s1, tol);
    let reduced = OperatorPair::new(strip_leading(&t1), strip_leading(&s1), pair.space.clone())?;
    Ok((reduced, checks))
}

/// `max_z |‖z1 T1 + z2 S1‖ − max(lead(z), ‖z1 T2 + z2 S2‖)|` over the grid,
/// where `lead(z)` is `|z1 + z2|` or `|z1|` according to `mode`.
fn identity_residual(
    pair: &OperatorPair,
    w: &DenseMatrix,
    reduced: &OperatorPair,
    mode: DeflateMode,
    grid: &GridSpec,
) -> f64 {
    let t1 = w.adjoint() * &pair.t * w;
    let s1 = (w.adjoint() * &pair.s * w).adjoint();
    grid.points(&pair.space)
        .par_iter()
        .map(|z| {
            let full = op_norm(&(&t1 * z.z1 + &s1 * z.z2));
            let lead = match mode {
                DeflateMode::Parallel => (z.z1 + z.z2).norm(),
                DeflateMode::Orthogonal => z.z1.norm(),
            };
            let rest = if reduced.n() == 0 {
                0.0
            } else {
                op_norm(&reduced.image(z))
            };
            (full - lead.max(rest)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

fn unit_count(t: &DenseMatrix) -> usize {
    if t.is_empty() {
        return 0;
    }
    hermitian_eigen(t)
        .0
        .iter()
        .filter(|v| v.abs() >= 1.0 - UNIT_THRESHOLD)
        .count()
}

/// Strips the common vector `ζ` (in the span of the first `k` basis vectors)
/// from a canonical pair. Fails when the first column of the conjugated `S`
/// is not the one an isometry forces.
pub fn deflate(pair: &OperatorPair, zeta: &DenseVector, k: usize, mode: DeflateMode, tol: f64) -> Result<Deflation> {
    let w = deflation_unitary(zeta, k)?;
    let (reduced, checks) = apply_deflation(pair, &w, mode, tol)?;
    if checks.first_column_residual > structural_threshold(tol) {
        return Err(Error::Precondition(format!(
            "first column of the conjugated S is off by {:e}",
            checks.first_column_residual
        )));
    }
    let identity = identity_residual(pair, &w, &reduced, mode, &GridSpec::for_space(&pair.space));
    let after = unit_count(&reduced.t);
    Ok(Deflation {
        pair: reduced,
        w,
        first_column_residual: checks.first_column_residual,
        identity_residual: identity,
        unit_count_after: after,
    })
}

enum Route {
    Parallel,
    Orthogonal(f64),
}

struct Runner {
    options: DescentOptions,
    steps: Vec<Step>,
}

impl Runner {
    fn push(&mut self, dimension: usize, data: StepData) {
        self.steps.push(Step { dimension, data });
    }

    fn verify(&mut self, pair: &OperatorPair) -> Result<DeviationReport> {
        let report = isometry_deviation(pair, &self.options.grid)?;
        self.push(
            pair.n(),
            StepData::Verify {
                max_deviation: report.max_deviation,
                worst_point: report.worst_point,
                norm_at_worst: report.norm_at_worst,
                grid_points: report.points,
            },
        );
        Ok(report)
    }

    fn refute(&mut self, dimension: usize, reason: &str, fact: TerminalFact) -> Verdict {
        self.push(dimension, StepData::Terminal { fact: fact.clone() });
        Verdict::Refuted {
            reason: reason.into(),
            fact,
        }
    }

    fn deviation_fact(report: &DeviationReport) -> TerminalFact {
        TerminalFact::Deviation {
            point: report.worst_point,
            norm: report.norm_at_worst,
            gauge: report.gauge_at_worst,
        }
    }

    fn run(&mut self, input: &OperatorPair) -> Result<Verdict> {
        let tol = self.options.tol;
        let mut pair = input.clone();
        let report = self.verify(&pair)?;
        if report.max_deviation > tol {
            return Ok(self.refute(
                pair.n(),
                "not an isometry on the verification grid",
                Self::deviation_fact(&report),
            ));
        }
        let route = match pair.space.kind {
            SpaceKind::Lp { p: 1.0 } => Route::Parallel,
            SpaceKind::Lp { p } if p > 2.0 => Route::Orthogonal(p),
            _ => {
                return Ok(Verdict::IsometryCertified {
                    max_deviation: report.max_deviation,
                })
            }
        };
        if hermitian_defect(&pair.t) > HERMITIAN_TOL * op_norm(&pair.t).max(1.0) {
            pair = selfadjoint_double(&pair)?;
            self.push(pair.n(), StepData::Double);
        }

        for _ in 0..self.options.max_steps {
            let canon = canonical_form(&pair)?;
            let n = pair.n();
            self.push(
                n,
                StepData::Canonicalize {
                    u: canon.u.clone(),
                    signs: canon.signs.clone(),
                    diagonal: canon.diagonal.clone(),
                    unit_count: canon.unit_count,
                    discarded: canon.discarded,
                },
            );
            pair = canon.pair;
            let k = canon.unit_count;
            if k == 0 {
                let norm_t = op_norm(&pair.t);
                return Ok(self.refute(
                    n,
                    "no unit diagonal entries left",
                    TerminalFact::NormBelowOne { norm_t },
                ));
            }

            let (zeta, mode) = match route {
                Route::Parallel => match parallel_eigvec(&pair, k, tol)? {
                    EigvecOutcome::Found(found) => {
                        self.push(
                            n,
                            StepData::CommonEigvec {
                                zeta: found.zeta.clone(),
                                alpha: found.alpha,
                                residual: found.residual,
                            },
                        );
                        self.push(n, StepData::PhaseNormalize { alpha: found.alpha });
                        pair = found.pair;
                        (found.zeta, DeflateMode::Parallel)
                    }
                    EigvecOutcome::NotParallel { phase, attained } => {
                        let point = Vec2::new(cplx(0.5, 0.0), phase * 0.5);
                        let norm = attained / 2.0;
                        if 1.0 - norm > tol {
                            let fact = TerminalFact::Deviation {
                                point,
                                norm,
                                gauge: pair.space.gauge(&point)?,
                            };
                            return Ok(self.refute(n, "T and S are not parallel", fact));
                        }
                        return Ok(Verdict::Inconclusive {
                            reason: "no parallelism witness at the working tolerance".into(),
                        });
                    }
                    EigvecOutcome::NotEigen { zeta, alpha, residual } => {
                        self.push(n, StepData::CommonEigvec { zeta, alpha, residual });
                        return Ok(Verdict::Inconclusive {
                            reason: "parallelism witness is not a common eigenvector".into(),
                        });
                    }
                },
                Route::Orthogonal(p) => {
                    let basis = leading_basis(n, k);
                    let found = bj_witness_in_subspace(&pair.t, &pair.s, &basis, tol)?;
                    let Some(zeta) = found.witness else {
                        let def = bj_orthogonal_definitional(&pair.t, &pair.s, tol)?;
                        let z = def.minimizing_scalar.unwrap_or(ZERO);
                        let raw = Vec2::new(ONE, z);
                        let g = pair.space.gauge(&raw)?;
                        let point = Vec2::new(raw.z1 / g, raw.z2 / g);
                        let norm = op_norm(&pair.image(&point));
                        if 1.0 - norm > tol {
                            let fact = TerminalFact::Deviation {
                                point,
                                norm,
                                gauge: pair.space.gauge(&point)?,
                            };
                            return Ok(self.refute(n, "T is not Birkhoff-James orthogonal to S", fact));
                        }
                        return Ok(Verdict::Inconclusive {
                            reason: "no orthogonality witness at the working tolerance".into(),
                        });
                    };
                    let sz = &pair.s * &zeta;
                    let c = vec_norm(&sz);
                    if c > CASE_SPLIT {
                        let witness = growth_witness(c, p)?;
                        let point = Vec2::real(witness.t_star, 1.0);
                        let lhs = vec_norm(&(pair.image(&point) * &zeta));
                        let rhs = pair.space.gauge(&point)?;
                        self.push(
                            n,
                            StepData::Growth {
                                zeta: zeta.clone(),
                                c,
                                p,
                                alpha: witness.alpha,
                                t_star: witness.t_star,
                                lhs,
                                rhs,
                            },
                        );
                        if lhs > rhs {
                            let fact = TerminalFact::Growth { point, zeta, lhs, rhs };
                            return Ok(self.refute(n, "norm grows faster than the gauge along the witness", fact));
                        }
                        return Ok(Verdict::Inconclusive {
                            reason: "growth inequality not realised in floating point".into(),
                        });
                    }
                    let alpha = inner(&sz, &zeta);
                    let residual = vec_norm(&(&sz - &zeta * alpha));
                    self.push(
                        n,
                        StepData::CommonEigvec {
                            zeta: zeta.clone(),
                            alpha,
                            residual,
                        },
                    );
                    (zeta, DeflateMode::Orthogonal)
                }
            };

            let w = deflation_unitary(&zeta, k)?;
            let (reduced, checks) = apply_deflation(&pair, &w, mode, tol)?;
            let threshold = structural_threshold(tol);
            if checks.first_column_residual > threshold {
                self.push(
                    n,
                    StepData::Deflate {
                        w,
                        mode,
                        applied: false,
                        first_column_residual: checks.first_column_residual,
                        identity_residual: f64::NAN,
                        unit_count_after: k,
                    },
                );
                let fact = TerminalFact::FirstColumn {
                    residual: checks.first_column_residual,
                };
                return Ok(self.refute(n, "first column of the conjugated S is not forced shape", fact));
            }
            let identity = identity_residual(&pair, &w, &reduced, mode, &self.options.grid);
            let after = unit_count(&reduced.t);
            self.push(
                reduced.n(),
                StepData::Deflate {
                    w,
                    mode,
                    applied: true,
                    first_column_residual: checks.first_column_residual,
                    identity_residual: identity,
                    unit_count_after: after,
                },
            );
            if identity > threshold {
                return Ok(Verdict::Inconclusive {
                    reason: "block decomposition identity fails on the grid".into(),
                });
            }
            if pair.space.is_real() && matches!(mode, DeflateMode::Parallel) {
                return Ok(Verdict::Inconclusive {
                    reason: "density-step-inapplicable".into(),
                });
            }
            pair = reduced;
            let report = self.verify(&pair)?;
            if report.max_deviation > tol {
                return Ok(self.refute(
                    pair.n(),
                    "deflated pair is not an isometry",
                    Self::deviation_fact(&report),
                ));
            }
        }
        Ok(Verdict::Inconclusive {
            reason: "max-steps".into(),
        })
    }
}

/// Runs the descent on `pair`. Spaces other than `ℓ_1` and `ℓ_p` (`p > 2`)
/// are only verified on the grid.
pub fn descent_run(pair: &OperatorPair, options: &DescentOptions) -> Result<RefutationTrace> {
    if options.max_steps == 0 {
        return Err(Error::invalid("max_steps", "must be positive"));
    }
    if !(options.tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let mut runner = Runner {
        options: options.clone(),
        steps: Vec::new(),
    };
    let verdict = runner.run(pair)?;
    Ok(RefutationTrace {
        input: pair.clone(),
        options: options.clone(),
        steps: runner.steps,
        verdict,
    })
}
