//! Step-by-step record of a descent run and its independent replay.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{op_norm, vec_norm, DenseMatrix, DenseVector};
use crate::norms::Vec2;
use crate::pair::OperatorPair;
use crate::serde_util::{complex_pair, flat_matrix, vector};

use super::{apply_canonical, apply_deflation, selfadjoint_double, DeflateMode, DescentOptions};

/// Recomputed terminal values must match the recorded ones this closely.
pub const REPLAY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Verify,
    Double,
    Canonicalize,
    CommonEigvec,
    PhaseNormalize,
    Deflate,
    Growth,
    Terminal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepData {
    Verify {
        max_deviation: f64,
        worst_point: Vec2,
        norm_at_worst: f64,
        grid_points: usize,
    },
    Double,
    Canonicalize {
        #[serde(with = "flat_matrix")]
        u: DenseMatrix,
        signs: Vec<f64>,
        diagonal: Vec<f64>,
        unit_count: usize,
        /// Largest off-diagonal modulus dropped when `T` was set to its diagonal.
        discarded: f64,
    },
    CommonEigvec {
        #[serde(with = "vector")]
        zeta: DenseVector,
        #[serde(with = "complex_pair")]
        alpha: Complex64,
        residual: f64,
    },
    PhaseNormalize {
        #[serde(with = "complex_pair")]
        alpha: Complex64,
    },
    Deflate {
        #[serde(with = "flat_matrix")]
        w: DenseMatrix,
        mode: DeflateMode,
        applied: bool,
        first_column_residual: f64,
        identity_residual: f64,
        unit_count_after: usize,
    },
    Growth {
        #[serde(with = "vector")]
        zeta: DenseVector,
        c: f64,
        p: f64,
        alpha: f64,
        t_star: f64,
        lhs: f64,
        rhs: f64,
    },
    Terminal {
        fact: TerminalFact,
    },
}

impl StepData {
    pub fn kind(&self) -> StepKind {
        match self {
            StepData::Verify { .. } => StepKind::Verify,
            StepData::Double => StepKind::Double,
            StepData::Canonicalize { .. } => StepKind::Canonicalize,
            StepData::CommonEigvec { .. } => StepKind::CommonEigvec,
            StepData::PhaseNormalize { .. } => StepKind::PhaseNormalize,
            StepData::Deflate { .. } => StepKind::Deflate,
            StepData::Growth { .. } => StepKind::Growth,
            StepData::Terminal { .. } => StepKind::Terminal,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Step {
    pub dimension: usize,
    #[serde(flatten)]
    pub data: StepData,
}

impl Step {
    pub fn kind(&self) -> StepKind {
        self.data.kind()
    }
}

/// A checkable statement about the pair reached at the end of the trace.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "fact", rename_all = "snake_case")]
pub enum TerminalFact {
    /// `‖z1 T + z2 S‖ = norm` while `gauge(z) = gauge`.
    Deviation { point: Vec2, norm: f64, gauge: f64 },
    /// No unit diagonal entry is left: `‖T‖ = norm_t < 1`.
    NormBelowOne { norm_t: f64 },
    /// The first column of the conjugated `S` is not the one forced by the norm.
    FirstColumn { residual: f64 },
    /// `‖(t* T + S) ζ‖ = lhs > rhs = gauge((t*, 1))`.
    Growth {
        point: Vec2,
        #[serde(with = "vector")]
        zeta: DenseVector,
        lhs: f64,
        rhs: f64,
    },
}

impl TerminalFact {
    pub fn label(&self) -> &'static str {
        match self {
            TerminalFact::Deviation { .. } => "deviation",
            TerminalFact::NormBelowOne { .. } => "norm_below_one",
            TerminalFact::FirstColumn { .. } => "first_column",
            TerminalFact::Growth { .. } => "growth",
        }
    }

    /// Size of the contradiction carried by the fact.
    pub fn violation(&self) -> f64 {
        match self {
            TerminalFact::Deviation { norm, gauge, .. } => (norm - gauge).abs(),
            TerminalFact::NormBelowOne { norm_t } => 1.0 - norm_t,
            TerminalFact::FirstColumn { residual } => *residual,
            TerminalFact::Growth { lhs, rhs, .. } => lhs - rhs,
        }
    }

    fn distance(&self, other: &TerminalFact) -> f64 {
        match (self, other) {
            (TerminalFact::Deviation { norm: a, gauge: g, .. }, TerminalFact::Deviation { norm: b, gauge: h, .. }) => {
                (a - b).abs().max((g - h).abs())
            }
            (TerminalFact::NormBelowOne { norm_t: a }, TerminalFact::NormBelowOne { norm_t: b }) => (a - b).abs(),
            (TerminalFact::FirstColumn { residual: a }, TerminalFact::FirstColumn { residual: b }) => (a - b).abs(),
            (TerminalFact::Growth { lhs: a, rhs: r, .. }, TerminalFact::Growth { lhs: b, rhs: s, .. }) => {
                (a - b).abs().max((r - s).abs())
            }
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Refuted { reason: String, fact: TerminalFact },
    IsometryCertified { max_deviation: f64 },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Refuted { .. } => "refuted",
            Verdict::IsometryCertified { .. } => "isometry_certified",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Refuted { reason, .. } | Verdict::Inconclusive { reason } => Some(reason),
            Verdict::IsometryCertified { .. } => None,
        }
    }

    pub fn fact(&self) -> Option<&TerminalFact> {
        match self {
            Verdict::Refuted { fact, .. } => Some(fact),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefutationTrace {
    pub input: OperatorPair,
    pub options: DescentOptions,
    pub steps: Vec<Step>,
    pub verdict: Verdict,
}

impl RefutationTrace {
    /// Number of deflations actually applied.
    pub fn deflations(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.data, StepData::Deflate { applied: true, .. }))
            .count()
    }

    /// Rounds of the descent loop entered (one per canonicalisation).
    pub fn rounds(&self) -> usize {
        self.steps.iter().filter(|s| s.kind() == StepKind::Canonicalize).count()
    }

    /// Largest deviation recorded by the first verification.
    pub fn initial_deviation(&self) -> Option<f64> {
        self.steps.iter().find_map(|s| match s.data {
            StepData::Verify { max_deviation, .. } => Some(max_deviation),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub recorded: TerminalFact,
    pub recomputed: TerminalFact,
    pub difference: f64,
    pub reproduced: bool,
}

/// Re-applies the recorded transforms to the recorded input and recomputes the
/// terminal fact of a refuted trace.
pub fn replay(trace: &RefutationTrace) -> Result<ReplayReport> {
    let Verdict::Refuted { fact, .. } = &trace.verdict else {
        return Err(Error::Precondition("only refuted traces carry a terminal fact".into()));
    };
    let tol = trace.options.tol;
    let mut pair = trace.input.clone();
    let mut first_column = None;
    for step in &trace.steps {
        match &step.data {
            StepData::Double => pair = selfadjoint_double(&pair)?,
            StepData::Canonicalize { u, signs, .. } => pair = apply_canonical(&pair, u, signs)?.0,
            StepData::PhaseNormalize { alpha } => pair.s *= alpha.conj(),
            StepData::Deflate { w, mode, applied, .. } => {
                let (reduced, checks) = apply_deflation(&pair, w, *mode, tol)?;
                if *applied {
                    pair = reduced;
                } else {
                    first_column = Some(checks.first_column_residual);
                }
            }
            _ => {}
        }
    }
    let recomputed = match fact {
        TerminalFact::Deviation { point, .. } => TerminalFact::Deviation {
            point: *point,
            norm: op_norm(&pair.image(point)),
            gauge: pair.space.gauge(point)?,
        },
        TerminalFact::NormBelowOne { .. } => TerminalFact::NormBelowOne {
            norm_t: op_norm(&pair.t),
        },
        TerminalFact::FirstColumn { .. } => TerminalFact::FirstColumn {
            residual: first_column
                .ok_or_else(|| Error::Precondition("trace has no rejected deflation to replay".into()))?,
        },
        TerminalFact::Growth { point, zeta, .. } => {
            let image = pair.image(point);
            TerminalFact::Growth {
                point: *point,
                zeta: zeta.clone(),
                lhs: vec_norm(&(image * zeta)),
                rhs: pair.space.gauge(point)?,
            }
        }
    };
    let difference = fact.distance(&recomputed);
    Ok(ReplayReport {
        recorded: fact.clone(),
        reproduced: difference <= REPLAY_TOL && recomputed.violation() > 0.0,
        recomputed,
        difference,
    })
}
