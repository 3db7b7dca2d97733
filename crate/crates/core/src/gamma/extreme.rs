//! Extreme points of a real two-dimensional unit ball.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::norms::{SpaceDescriptor, Vec2};
use crate::optimize::golden_min;

/// Probe length for the midpoint test.
pub const EXTREME_EPS: f64 = 1e-3;
/// A boundary point is extreme when every chord of half-length `EXTREME_EPS`
/// through it leaves the ball by more than this.
pub const EXTREME_TOL: f64 = 1e-13;
const DIRECTION_NODES: usize = 3600;

fn real_gauge(space: &SpaceDescriptor, x: f64, y: f64) -> f64 {
    space.gauge_abs(x.abs(), y.abs())
}

/// Whether the boundary point `v` of the real ball is extreme: it is not the
/// midpoint of `v ± ε d` with both ends in the ball for any direction `d`.
pub fn extreme_point_test(space: &SpaceDescriptor, v: (f64, f64), tol: f64) -> Result<bool> {
    if !space.is_real() {
        return Err(Error::Precondition(
            "the extreme point test works on the real plane".into(),
        ));
    }
    if !(v.0.is_finite() && v.1.is_finite()) {
        return Err(Error::Domain(format!("non-finite point {v:?}")));
    }
    let g = space.gauge(&Vec2::real(v.0, v.1))?;
    if (g - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "point is not on the unit sphere (gauge {g})"
        )));
    }
    let excess = |phi: f64| {
        let (dx, dy) = (EXTREME_EPS * phi.cos(), EXTREME_EPS * phi.sin());
        real_gauge(space, v.0 + dx, v.1 + dy).max(real_gauge(space, v.0 - dx, v.1 - dy)) - 1.0
    };
    let h = PI / DIRECTION_NODES as f64;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..DIRECTION_NODES {
        let phi = h * k as f64;
        let e = excess(phi);
        if e < best.1 {
            best = (phi, e);
        }
    }
    let refined = golden_min(excess, best.0 - h, best.0 + h, 1e-15);
    Ok(best.1.min(refined.1) > tol)
}

/// Extreme points among `samples` boundary points at equally spaced angles
/// around the full circle.
pub fn count_extreme_points(space: &SpaceDescriptor, samples: usize, tol: f64) -> Result<usize> {
    let mut count = 0;
    for k in 0..samples {
        let theta = TAU * k as f64 / samples as f64;
        let (c, s) = (theta.cos(), theta.sin());
        let g = real_gauge(space, c, s);
        if extreme_point_test(space, (c / g, s / g), tol)? {
            count += 1;
        }
    }
    Ok(count)
}
