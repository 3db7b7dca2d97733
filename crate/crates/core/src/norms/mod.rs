//! Gauge and norm oracles for two-dimensional spaces and for matrices.

mod arc;
mod space;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{cplx, hermitian_defect, hermitian_eigen, singular_values, DenseMatrix};
use crate::optimize::scan_then_golden_max;
use crate::pair::OperatorPair;

pub use arc::{BoundaryArc, ARC_NODES, REFINE_TOL};
pub use space::{Facet, Field, SpaceDescriptor, SpaceKind, TabulatedGauge, Vec2};

/// Eigenvalues down to this value count as nonnegative.
pub const PSD_TOL: f64 = 1e-10;
/// Hermitian defect accepted for 2x2 inputs.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Samples used when tabulating a dual unit ball.
pub const DUAL_TABLE_SAMPLES: usize = 1024;

pub fn gauge(v: &Vec2, space: &SpaceDescriptor) -> Result<f64> {
    space.gauge(v)
}

/// `sup { |<v, w>| : gauge(w) <= 1 }`.
pub fn dual_gauge(v: &Vec2, space: &SpaceDescriptor) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("non-finite vector {v:?}")));
    }
    let (a, b) = v.moduli();
    Ok(dual_gauge_on_arc(a, b, &BoundaryArc::new(space)))
}

/// Dual gauge of `(a, b) >= 0` against a prebuilt arc of the primal ball.
/// Phases align for a Reinhardt ball, so only the nonnegative arc matters.
pub fn dual_gauge_on_arc(a: f64, b: f64, arc: &BoundaryArc) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    arc.linear_max(a, b)
}

/// Schatten-`p` norm from singular values; `p = f64::INFINITY` gives the
/// operator norm.
pub fn schatten_norm(m: &DenseMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(
            "p",
            format!("Schatten exponent must lie in [1, inf], got {p}"),
        ));
    }
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(top);
    }
    let sum: f64 = s.iter().map(|x| (x / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// Operator norm of the image `z1 T + z2 S`.
pub fn xnorm_of_pair_map(z: &Vec2, pair: &OperatorPair) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("non-finite vector {z:?}")));
    }
    Ok(crate::linalg::op_norm(&pair.image(z)))
}

/// Checks a 2x2 Hermitian PSD input and returns `(a11, |a12|, a22)` after
/// clamping eigenvalues in `[-PSD_TOL, 0)` to zero.
pub fn psd_entries(a: &DenseMatrix) -> Result<(f64, f64, f64)> {
    if a.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.nrows(),
        });
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if hermitian_defect(a) > HERMITIAN_TOL * scale {
        return Err(Error::Precondition("matrix is not Hermitian".into()));
    }
    let (vals, vecs) = hermitian_eigen(a);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * scale {
        return Err(Error::Precondition(format!("matrix is not PSD (eigenvalue {min:e})")));
    }
    let mut m = (a + a.adjoint()).scale(0.5);
    if min < 0.0 {
        let k = if vals[0] <= vals[1] { 0 } else { 1 };
        let v = vecs.column(k);
        m -= (v * v.adjoint()).scale(min);
    }
    Ok((m[(0, 0)].re.max(0.0), m[(0, 1)].norm(), m[(1, 1)].re.max(0.0)))
}

/// `‖A‖_{X→X*}` for PSD 2x2 `A`: the supremum of the quadratic form over the
/// unit ball, reduced to `a11 x^2 + 2|a12| x y + a22 y^2` on the nonnegative
/// boundary arc.
pub fn opnorm_psd_x_to_xdual(a: &DenseMatrix, space: &SpaceDescriptor) -> Result<f64> {
    let arc = BoundaryArc::new(space);
    opnorm_psd_on_arc(a, &arc)
}

pub fn opnorm_psd_on_arc(a: &DenseMatrix, arc: &BoundaryArc) -> Result<f64> {
    let (a11, a12, a22) = psd_entries(a)?;
    Ok(arc.quadratic_max(a11, a12, a22))
}

/// `‖B‖_{X*→X}` for PSD 2x2 `B`, computed as `sup_{|u|_2 = 1} gauge(B^{1/2} u)^2`
/// (the adjoint of `B^{1/2} : ℓ2 → X`). Only the primal gauge is needed.
pub fn opnorm_psd_xdual_to_x(b: &DenseMatrix, space: &SpaceDescriptor) -> Result<f64> {
    let (b11, b12, b22) = psd_entries(b)?;
    Ok(dual_opnorm_from_entries(b11, b12, b22, space))
}

pub(crate) fn dual_opnorm_from_entries(b11: f64, b12: f64, b22: f64, space: &SpaceDescriptor) -> f64 {
    let [r11, r12, r22] = sqrt_psd2(b11, b12, b22);
    if let Some(facets) = space.polygon_facets() {
        return facets
            .iter()
            .map(|f| {
                let u = r11 * f.normal[0] + r12 * f.normal[1];
                let v = r12 * f.normal[0] + r22 * f.normal[1];
                (u * u + v * v) / (f.offset * f.offset)
            })
            .fold(0.0, f64::max);
    }
    let objective = |phi: f64| {
        let (c, s) = (phi.cos(), phi.sin());
        let g = space.gauge_abs((r11 * c + r12 * s).abs(), (r12 * c + r22 * s).abs());
        g * g
    };
    scan_then_golden_max(objective, 0.0, FRAC_PI_2, ARC_NODES, REFINE_TOL).1
}

/// `‖B‖_{X*→X}` evaluated on the boundary of the dual ball, each dual boundary
/// point located with `dual_gauge`. Slow; kept as an independent route.
pub fn opnorm_psd_xdual_to_x_via_dual_gauge(b: &DenseMatrix, space: &SpaceDescriptor) -> Result<f64> {
    let (b11, b12, b22) = psd_entries(b)?;
    let primal = BoundaryArc::new(space);
    let dual = dual_arc(&primal, ARC_NODES, true);
    Ok(dual.quadratic_max(b11, b12, b22))
}

/// Boundary arc of the dual ball. With `refined` the dual gauge at every
/// point is refined by golden section; otherwise node maxima are used.
pub fn dual_arc(primal: &BoundaryArc, nodes: usize, refined: bool) -> BoundaryArc {
    let primal = Arc::new(primal.clone());
    let g = Arc::new(move |a: f64, b: f64| {
        if a == 0.0 && b == 0.0 {
            0.0
        } else if refined {
            primal.linear_max(a, b)
        } else {
            primal.linear_max_coarse(a, b)
        }
    });
    BoundaryArc::from_gauge(g, nodes, Vec::new(), false)
}

/// `A⁺`: same diagonal, off-diagonal entries replaced by `|a12|`.
pub fn a_plus(a: &DenseMatrix) -> Result<DenseMatrix> {
    if a.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.nrows(),
        });
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if hermitian_defect(a) > HERMITIAN_TOL * scale {
        return Err(Error::Precondition("a_plus needs a Hermitian matrix".into()));
    }
    let off = a[(0, 1)].norm();
    Ok(DenseMatrix::from_row_slice(
        2,
        2,
        &[
            cplx(a[(0, 0)].re, 0.0),
            cplx(off, 0.0),
            cplx(off, 0.0),
            cplx(a[(1, 1)].re, 0.0),
        ],
    ))
}

/// The same ball read over the reals.
pub fn real_shadow(space: &SpaceDescriptor) -> Result<SpaceDescriptor> {
    if space.is_real() {
        return Err(Error::Precondition("space is already real".into()));
    }
    Ok(space.clone().with_field(Field::Real))
}

/// The dual space `X*`. Exact for `ℓ_p`, `ℓ_∞` and polygons; other balls are
/// tabulated from `dual_gauge` at `DUAL_TABLE_SAMPLES` angles.
pub fn dual_space(space: &SpaceDescriptor) -> Result<SpaceDescriptor> {
    let kind = match &space.kind {
        SpaceKind::Lp { p } if *p == 1.0 => SpaceKind::Linf,
        SpaceKind::Lp { p } => SpaceKind::Lp { p: *p / (*p - 1.0) },
        SpaceKind::Linf => SpaceKind::Lp { p: 1.0 },
        SpaceKind::Table(t) => {
            let boundary = t
                .facets()
                .iter()
                .map(|f| [f.normal[0] / f.offset, f.normal[1] / f.offset])
                .filter(|v| v[0] >= -1e-15 && v[1] >= -1e-15)
                .map(|v| [v[1].max(0.0).atan2(v[0].max(0.0)), v[0].hypot(v[1])])
                .collect();
            SpaceKind::Table(TabulatedGauge::new(boundary)?)
        }
        SpaceKind::Bpq { .. } => {
            let arc = BoundaryArc::new(space);
            let boundary = (0..DUAL_TABLE_SAMPLES)
                .map(|k| {
                    let psi = FRAC_PI_2 * k as f64 / (DUAL_TABLE_SAMPLES - 1) as f64;
                    let (c, s) = (psi.cos().max(0.0), psi.sin().max(0.0));
                    [psi, 1.0 / dual_gauge_on_arc(c, s, &arc)]
                })
                .collect();
            SpaceKind::Table(TabulatedGauge::new(boundary)?)
        }
    };
    SpaceDescriptor::new(kind, space.field)
}

/// Principal square root of the PSD matrix `[[b11, b12], [b12, b22]]`.
pub(crate) fn sqrt_psd2(b11: f64, b12: f64, b22: f64) -> [f64; 3] {
    let det = (b11 * b22 - b12 * b12).max(0.0);
    let sd = det.sqrt();
    let t = (b11 + b22 + 2.0 * sd).sqrt();
    if t == 0.0 {
        return [0.0; 3];
    }
    [(b11 + sd) / t, b12 / t, (b22 + sd) / t]
}

/// Real part of the Hilbert-Schmidt inner product `tr(A B^*)`.
pub fn hs_inner(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}
