//! Sampled parametrisation of the nonnegative boundary arc
//! `{(x, y) >= 0 : gauge(x, y) = 1}` of a Reinhardt unit ball.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::optimize::golden_max;

use super::space::SpaceDescriptor;

/// Number of arc-length-uniform nodes used for one-dimensional suprema.
pub const ARC_NODES: usize = 2048;
/// Angular tolerance of the golden-section refinement.
pub const REFINE_TOL: f64 = 1e-10;

const OVERSAMPLE: usize = 8;

type GaugeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct BoundaryArc {
    gauge: GaugeFn,
    angles: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    // precomputed monomials for quadratic forms
    xx: Vec<f64>,
    xy: Vec<f64>,
    yy: Vec<f64>,
    polygonal: bool,
}

impl std::fmt::Debug for BoundaryArc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryArc")
            .field("nodes", &self.angles.len())
            .field("polygonal", &self.polygonal)
            .finish()
    }
}

impl BoundaryArc {
    pub fn new(space: &SpaceDescriptor) -> Self {
        Self::with_nodes(space, ARC_NODES)
    }

    pub fn with_nodes(space: &SpaceDescriptor, nodes: usize) -> Self {
        let owned = space.clone();
        let gauge: GaugeFn = Arc::new(move |a, b| owned.gauge_abs(a, b));
        let corners = space.polygon_vertex_angles();
        let polygonal = corners.is_some();
        Self::from_gauge(gauge, nodes, corners.unwrap_or_default(), polygonal)
    }

    /// Builds the arc of an arbitrary absolute gauge. `corners` are forced
    /// into the node set; when `polygonal` is set the node maximum of any
    /// convex objective is exact and no refinement is attempted.
    pub fn from_gauge(gauge: GaugeFn, nodes: usize, corners: Vec<f64>, polygonal: bool) -> Self {
        let nodes = nodes.max(3);
        let fine = nodes * OVERSAMPLE;
        let point = |phi: f64| {
            let (c, s) = (phi.cos().max(0.0), phi.sin().max(0.0));
            let g = gauge(c, s);
            (c / g, s / g)
        };
        let fine_angles: Vec<f64> = (0..=fine).map(|k| FRAC_PI_2 * k as f64 / fine as f64).collect();
        let fine_pts: Vec<(f64, f64)> = fine_angles.iter().map(|&a| point(a)).collect();
        let mut cumulative = vec![0.0; fine + 1];
        for k in 1..=fine {
            let (dx, dy) = (fine_pts[k].0 - fine_pts[k - 1].0, fine_pts[k].1 - fine_pts[k - 1].1);
            cumulative[k] = cumulative[k - 1] + dx.hypot(dy);
        }
        let total = cumulative[fine];

        let mut angles = Vec::with_capacity(nodes + corners.len());
        let mut seg = 0;
        for k in 0..nodes {
            let target = total * k as f64 / (nodes - 1) as f64;
            while seg + 1 < fine && cumulative[seg + 1] < target {
                seg += 1;
            }
            let span = cumulative[seg + 1] - cumulative[seg];
            let frac = if span > 0.0 {
                ((target - cumulative[seg]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
            angles.push(fine_angles[seg] + frac * (fine_angles[seg + 1] - fine_angles[seg]));
        }
        angles[0] = 0.0;
        angles[nodes - 1] = FRAC_PI_2;
        angles.extend(corners.into_iter().filter(|a| *a > 0.0 && *a < FRAC_PI_2));
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

        let (xs, ys): (Vec<f64>, Vec<f64>) = angles.iter().map(|&a| point(a)).unzip();
        let xx = xs.iter().map(|x| x * x).collect();
        let xy = xs.iter().zip(&ys).map(|(x, y)| 2.0 * x * y).collect();
        let yy = ys.iter().map(|y| y * y).collect();
        Self {
            gauge,
            angles,
            xs,
            ys,
            xx,
            xy,
            yy,
            polygonal,
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn is_polygonal(&self) -> bool {
        self.polygonal
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn gauge(&self, a: f64, b: f64) -> f64 {
        (self.gauge)(a, b)
    }

    /// Boundary point on the ray at angle `phi`.
    pub fn point_at(&self, phi: f64) -> (f64, f64) {
        let (c, s) = (phi.cos().max(0.0), phi.sin().max(0.0));
        let g = (self.gauge)(c, s);
        (c / g, s / g)
    }

    /// Maximum of `f` over the nodes, then golden-section refinement on the
    /// two neighbouring cells of the best node. Returns `(angle, value)`.
    pub fn maximize<F: Fn(f64, f64) -> f64>(&self, f: F) -> (f64, f64) {
        let (k, best) = self
            .points()
            .map(|(x, y)| f(x, y))
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, v)| if v > acc.1 { (k, v) } else { acc },
            );
        self.refine(k, best, |phi| {
            let (x, y) = self.point_at(phi);
            f(x, y)
        })
    }

    fn refine<F: FnMut(f64) -> f64>(&self, k: usize, best: f64, f: F) -> (f64, f64) {
        if self.polygonal {
            return (self.angles[k], best);
        }
        let lo = self.angles[k.saturating_sub(1)];
        let hi = self.angles[(k + 1).min(self.angles.len() - 1)];
        let refined = golden_max(f, lo, hi, REFINE_TOL);
        if refined.1 > best {
            refined
        } else {
            (self.angles[k], best)
        }
    }

    /// Node maximum of `a11 x^2 + 2 a12 x y + a22 y^2` without refinement.
    pub fn quadratic_max_coarse(&self, a11: f64, a12: f64, a22: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for k in 0..self.xx.len() {
            let v = a11 * self.xx[k] + a12 * self.xy[k] + a22 * self.yy[k];
            if v > best {
                best = v;
            }
        }
        best
    }

    /// Refined supremum of `a11 x^2 + 2 a12 x y + a22 y^2` over the arc.
    pub fn quadratic_max(&self, a11: f64, a12: f64, a22: f64) -> f64 {
        self.maximize(|x, y| a11 * x * x + 2.0 * a12 * x * y + a22 * y * y).1
    }

    /// Refined supremum of `a x + b y` over the arc.
    pub fn linear_max(&self, a: f64, b: f64) -> f64 {
        self.maximize(|x, y| a * x + b * y).1
    }

    /// Node maximum of `a x + b y` without refinement.
    pub fn linear_max_coarse(&self, a: f64, b: f64) -> f64 {
        self.points()
            .map(|(x, y)| a * x + b * y)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_lie_on_the_boundary() {
        for space in [
            SpaceDescriptor::bpq(1.0, 2.0).unwrap(),
            SpaceDescriptor::lp(3.0).unwrap(),
            SpaceDescriptor::linf(),
        ] {
            let arc = BoundaryArc::new(&space);
            for (x, y) in arc.points() {
                assert!(x >= 0.0 && y >= 0.0);
                assert!((space.gauge_abs(x, y) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn arc_length_spacing_is_uniform() {
        let arc = BoundaryArc::with_nodes(&SpaceDescriptor::lp(2.0).unwrap(), 257);
        let pts: Vec<_> = arc.points().collect();
        let gaps: Vec<f64> = pts
            .windows(2)
            .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
            .collect();
        let (lo, hi) = gaps.iter().fold((f64::MAX, 0.0f64), |(l, h), g| (l.min(*g), h.max(*g)));
        assert!(hi / lo < 1.001, "spacing ratio {}", hi / lo);
    }

    #[test]
    fn square_corner_is_a_node() {
        let arc = BoundaryArc::with_nodes(&SpaceDescriptor::linf(), 100);
        assert!(arc
            .points()
            .any(|(x, y)| (x - 1.0).abs() < 1e-15 && (y - 1.0).abs() < 1e-15));
        assert!((arc.quadratic_max(1.0, 0.5, 1.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn refined_linear_max_is_euclidean_norm() {
        let arc = BoundaryArc::new(&SpaceDescriptor::lp(2.0).unwrap());
        assert!((arc.linear_max(3.0, 4.0) - 5.0).abs() < 1e-12);
    }
}
