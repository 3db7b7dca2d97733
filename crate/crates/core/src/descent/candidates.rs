//! Reproducible candidate pairs over `ℓ_1` for exercising the descent.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{diag_complex, random_unitary, DenseMatrix};
use crate::norms::SpaceDescriptor;
use crate::optimize::stream_rng;
use crate::pair::OperatorPair;

use super::{DescentOptions, GridSpec};

/// Candidate whose norm matches `ℓ_1` at every point of the `phases`-phase
/// grid: `T = U* diag(1,…,1, t…) U`, `S = U* diag(ω^j…, s…) U` with the
/// `phases`-th roots of unity repeated as often as they fit, and remaining
/// entries of modulus below one. It still is not an isometry, so the descent
/// must strip unit entries before the contradiction shows.
pub fn grid_aligned_candidate(n: usize, phases: usize, seed: u64) -> Result<(OperatorPair, DescentOptions)> {
    if phases == 0 || phases > n {
        return Err(Error::invalid("phases", format!("must lie in 1..={n}, got {phases}")));
    }
    let mut rng = stream_rng(seed, n as u64 * 1000 + phases as u64);
    let units = phases * (n / phases);
    let mut t = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for j in 0..n {
        if j < units {
            t.push(Complex64::new(1.0, 0.0));
            s.push(Complex64::from_polar(1.0, TAU * (j % phases) as f64 / phases as f64));
        } else {
            t.push(Complex64::new(rng.random_range(0.2..0.8), 0.0));
            s.push(Complex64::from_polar(
                rng.random_range(0.1..0.9),
                rng.random_range(0.0..TAU),
            ));
        }
    }
    let u = random_unitary(&mut rng, n);
    let pair = conjugated(&u, &t, &s)?;
    let mut options = DescentOptions::for_space(&pair.space);
    options.grid = GridSpec::with_phases(phases);
    Ok((pair, options))
}

/// Unitarily conjugated diagonal pair with `‖T‖ = ‖S‖ = 1` and random
/// unimodular and sub-unit entries; generically far from an isometry.
pub fn generic_candidate(n: usize, seed: u64) -> Result<OperatorPair> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be positive"));
    }
    let mut rng = stream_rng(seed, 7_000_000 + n as u64);
    let t: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(if j == 0 { 1.0 } else { rng.random_range(0.0..1.0) }, 0.0))
        .collect();
    let s: Vec<Complex64> = (0..n)
        .map(|j| {
            Complex64::from_polar(
                if j == 0 { 1.0 } else { rng.random_range(0.0..1.0) },
                rng.random_range(0.0..TAU),
            )
        })
        .collect();
    let u = random_unitary(&mut rng, n);
    conjugated(&u, &t, &s)
}

fn conjugated(u: &DenseMatrix, t: &[Complex64], s: &[Complex64]) -> Result<OperatorPair> {
    let conj = |d: &[Complex64]| u.adjoint() * diag_complex(d) * u;
    OperatorPair::new(conj(t), conj(s), SpaceDescriptor::lp(1.0)?)
}
