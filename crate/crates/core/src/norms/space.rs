//! Two-dimensional normed spaces with Reinhardt unit balls.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar field of a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    #[default]
    Complex,
}

/// A point `(z1, z2)` of the two-dimensional space. Real vectors carry zero
/// imaginary parts. JSON form: `[[re, im], [re, im]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Vec2 {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl Vec2 {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), Complex64::new(y, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.z1.re.is_finite() && self.z1.im.is_finite() && self.z2.re.is_finite() && self.z2.im.is_finite()
    }

    pub fn moduli(&self) -> (f64, f64) {
        (self.z1.norm(), self.z2.norm())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.z1 * s, self.z2 * s)
    }
}

impl From<[[f64; 2]; 2]> for Vec2 {
    fn from(v: [[f64; 2]; 2]) -> Self {
        Vec2::new(Complex64::new(v[0][0], v[0][1]), Complex64::new(v[1][0], v[1][1]))
    }
}

impl From<Vec2> for [[f64; 2]; 2] {
    fn from(v: Vec2) -> Self {
        [[v.z1.re, v.z1.im], [v.z2.re, v.z2.im]]
    }
}

/// Supporting line `normal . x = offset` of a polygonal unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Facet {
    pub normal: [f64; 2],
    pub offset: f64,
}

/// Unit ball given by boundary samples `(angle, radius)` in the closed first
/// quadrant. The ball is the convex hull of the samples and their mirror
/// images, so the induced gauge is always a norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableSpec", into = "TableSpec")]
pub struct TabulatedGauge {
    boundary: Vec<[f64; 2]>,
    #[serde(skip)]
    facets: Vec<Facet>,
    #[serde(skip)]
    vertex_angles: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TableSpec {
    boundary: Vec<[f64; 2]>,
}

impl TryFrom<TableSpec> for TabulatedGauge {
    type Error = Error;
    fn try_from(spec: TableSpec) -> Result<Self> {
        TabulatedGauge::new(spec.boundary)
    }
}

impl From<TabulatedGauge> for TableSpec {
    fn from(t: TabulatedGauge) -> Self {
        TableSpec { boundary: t.boundary }
    }
}

impl TabulatedGauge {
    pub fn new(boundary: Vec<[f64; 2]>) -> Result<Self> {
        if boundary.len() < 2 {
            return Err(Error::invalid("boundary", "needs at least two samples"));
        }
        let mut points = Vec::with_capacity(boundary.len() * 4);
        for (k, &[theta, r]) in boundary.iter().enumerate() {
            if !(theta.is_finite() && r.is_finite()) || !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) || r <= 0.0 {
                return Err(Error::invalid(
                    format!("boundary[{k}]"),
                    "angle must lie in [0, pi/2] and radius must be positive",
                ));
            }
            let (x, y) = (r * theta.cos(), r * theta.sin());
            for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                points.push([sx * x.max(0.0), sy * y.max(0.0)]);
            }
        }
        if !points.iter().any(|p| p[0] > 1e-12) || !points.iter().any(|p| p[1] > 1e-12) {
            return Err(Error::invalid(
                "boundary",
                "samples must span both coordinate directions",
            ));
        }
        let hull = convex_hull(points);
        let mut facets = Vec::with_capacity(hull.len());
        for i in 0..hull.len() {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            let normal = [b[1] - a[1], a[0] - b[0]];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            if offset > 0.0 {
                facets.push(Facet { normal, offset });
            }
        }
        let mut vertex_angles: Vec<f64> = hull
            .iter()
            .filter(|p| p[0] > 1e-15 && p[1] > 1e-15)
            .map(|p| p[1].atan2(p[0]))
            .collect();
        vertex_angles.sort_by(f64::total_cmp);
        Ok(Self {
            boundary,
            facets,
            vertex_angles,
        })
    }

    pub fn boundary(&self) -> &[[f64; 2]] {
        &self.boundary
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    fn gauge_abs(&self, a: f64, b: f64) -> f64 {
        self.facets
            .iter()
            .map(|f| (f.normal[0] * a + f.normal[1] * b) / f.offset)
            .fold(0.0, f64::max)
    }
}

/// Andrew's monotone chain; returns the hull counter-clockwise without
/// collinear points.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-15 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-15 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceKind {
    Lp { p: f64 },
    Bpq { p: f64, q: f64 },
    Linf,
    Table(TabulatedGauge),
}

/// A two-dimensional normed space over `field` whose unit ball is Reinhardt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct SpaceDescriptor {
    #[serde(flatten)]
    pub kind: SpaceKind,
    pub field: Field,
}

#[derive(Deserialize)]
struct RawSpace {
    #[serde(flatten)]
    kind: SpaceKind,
    #[serde(default)]
    field: Field,
}

impl TryFrom<RawSpace> for SpaceDescriptor {
    type Error = Error;
    fn try_from(raw: RawSpace) -> Result<Self> {
        SpaceDescriptor::new(raw.kind, raw.field)
    }
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 1.0 {
        return Err(Error::invalid(name, format!("must be finite and >= 1, got {v}")));
    }
    Ok(())
}

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITERS: usize = 200;

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind, field: Field) -> Result<Self> {
        match &kind {
            SpaceKind::Lp { p } => check_exponent("p", *p)?,
            SpaceKind::Bpq { p, q } => {
                check_exponent("p", *p)?;
                check_exponent("q", *q)?;
            }
            SpaceKind::Linf | SpaceKind::Table(_) => {}
        }
        Ok(Self { kind, field })
    }

    pub fn lp(p: f64) -> Result<Self> {
        Self::new(SpaceKind::Lp { p }, Field::Complex)
    }

    pub fn bpq(p: f64, q: f64) -> Result<Self> {
        Self::new(SpaceKind::Bpq { p, q }, Field::Complex)
    }

    pub fn linf() -> Self {
        Self {
            kind: SpaceKind::Linf,
            field: Field::Complex,
        }
    }

    pub fn table(boundary: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(SpaceKind::Table(TabulatedGauge::new(boundary)?), Field::Complex)
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = field;
        self
    }

    pub fn is_real(&self) -> bool {
        self.field == Field::Real
    }

    /// Gauge of `(a, b)` for nonnegative reals; no input validation.
    pub fn gauge_abs(&self, a: f64, b: f64) -> f64 {
        match &self.kind {
            SpaceKind::Lp { p } => {
                let m = a.max(b);
                if m == 0.0 {
                    return 0.0;
                }
                if *p == 1.0 {
                    return a + b;
                }
                let (x, y) = (a / m, b / m);
                m * (x.powf(*p) + y.powf(*p)).powf(1.0 / p)
            }
            SpaceKind::Linf => a.max(b),
            SpaceKind::Bpq { p, q } => bpq_gauge(a, b, *p, *q),
            SpaceKind::Table(t) => t.gauge_abs(a, b),
        }
    }

    /// Minkowski functional of the unit ball at `v`.
    pub fn gauge(&self, v: &Vec2) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite vector {v:?}")));
        }
        let (a, b) = v.moduli();
        Ok(self.gauge_abs(a, b))
    }

    /// Angles in `(0, pi/2)` of corners of a polygonal unit ball, `None` for
    /// balls that are not polygons.
    pub fn polygon_vertex_angles(&self) -> Option<Vec<f64>> {
        match &self.kind {
            SpaceKind::Linf => Some(vec![std::f64::consts::FRAC_PI_4]),
            SpaceKind::Lp { p } if *p == 1.0 => Some(Vec::new()),
            SpaceKind::Bpq { p, q } if *p == 1.0 && *q == 1.0 => Some(Vec::new()),
            SpaceKind::Table(t) => Some(
                t.vertex_angles
                    .iter()
                    .copied()
                    .filter(|&a| a > 0.0 && a < FRAC_PI_2)
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Supporting lines of a polygonal unit ball.
    pub fn polygon_facets(&self) -> Option<Vec<Facet>> {
        let f = |n: [f64; 2]| Facet { normal: n, offset: 1.0 };
        match &self.kind {
            SpaceKind::Linf => Some(vec![f([1.0, 0.0]), f([0.0, 1.0])]),
            SpaceKind::Lp { p } if *p == 1.0 => Some(vec![f([1.0, 1.0]), f([1.0, -1.0])]),
            SpaceKind::Bpq { p, q } if *p == 1.0 && *q == 1.0 => Some(vec![f([1.0, 1.0]), f([1.0, -1.0])]),
            SpaceKind::Table(t) => Some(t.facets.clone()),
            _ => None,
        }
    }

    /// Whether the gauge is invariant under coordinatewise conjugation; true
    /// for every Reinhardt ball.
    pub fn conjugation_invariant(&self) -> bool {
        true
    }
}

/// Unique `t >= 0` with `(a/t)^p + (b/t)^q = 1`, by bisection on the
/// bracket `[max(a,b), a+b]` after normalising by `max(a,b)`.
fn bpq_gauge(a: f64, b: f64, p: f64, q: f64) -> f64 {
    let m = a.max(b);
    if m == 0.0 {
        return 0.0;
    }
    let (x, y) = (a / m, b / m);
    let excess = |t: f64| (x / t).powf(p) + (y / t).powf(q) - 1.0;
    let (mut lo, mut hi) = (1.0_f64, x + y);
    if excess(hi) >= 0.0 {
        return m * hi;
    }
    for _ in 0..BISECTION_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_TOL * 1e-3 {
            break;
        }
    }
    m * 0.5 * (lo + hi)
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpaceKind::Lp { p } => write!(f, "lp:{p}")?,
            SpaceKind::Bpq { p, q } => write!(f, "bpq:{p},{q}")?,
            SpaceKind::Linf => write!(f, "linf")?,
            SpaceKind::Table(t) => write!(f, "table[{}]", t.boundary.len())?,
        }
        if self.is_real() {
            write!(f, ":real")?;
        }
        Ok(())
    }
}

/// Parses `lp:p`, `bpq:p,q` or `linf`, optionally suffixed with `:real`
/// (or `:complex`).
impl FromStr for SpaceDescriptor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut parts: Vec<&str> = s.trim().split(':').collect();
        let mut field = Field::Complex;
        if let Some(last) = parts.last() {
            match last.to_ascii_lowercase().as_str() {
                "real" if parts.len() > 1 => {
                    field = Field::Real;
                    parts.pop();
                }
                "complex" if parts.len() > 1 => {
                    parts.pop();
                }
                _ => {}
            }
        }
        let num = |txt: &str, name: &str| -> Result<f64> {
            txt.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(name, format!("cannot parse `{txt}` as a number")))
        };
        let kind = match (parts[0].to_ascii_lowercase().as_str(), parts.get(1)) {
            ("linf", None) => SpaceKind::Linf,
            ("lp", Some(arg)) => SpaceKind::Lp { p: num(arg, "p")? },
            ("bpq", Some(arg)) => {
                let (p, q) = arg
                    .split_once(',')
                    .ok_or_else(|| Error::invalid("space", "bpq expects `bpq:p,q`"))?;
                SpaceKind::Bpq {
                    p: num(p, "p")?,
                    q: num(q, "q")?,
                }
            }
            _ => return Err(Error::invalid("space", format!("unrecognised space `{s}`"))),
        };
        SpaceDescriptor::new(kind, field)
    }
}
