//! Random pair generators shared by the integration targets.
#![allow(dead_code)]

use std::path::PathBuf;

use gauge_lab::descent::GridSpec;
use gauge_lab::linalg::{cplx, diag_complex, inner, random_complex, random_unitary, top_singular_pair, DenseMatrix};
use gauge_lab::OperatorPair;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Pairs of the shipped corpus with the verification grid recorded in its manifest.
pub fn corpus_pairs() -> Vec<(String, OperatorPair, GridSpec)> {
    let dir = corpus_dir();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    manifest["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let text = std::fs::read_to_string(dir.join(e["file"].as_str().unwrap())).unwrap();
            let pair = OperatorPair::from_json(&text).unwrap();
            let grid = match e["phases"].as_u64() {
                Some(m) => GridSpec::with_phases(m as usize),
                None => GridSpec::for_space(&pair.space),
            };
            (e["name"].as_str().unwrap().to_owned(), pair, grid)
        })
        .collect()
}

pub fn gaussian_pair(rng: &mut ChaCha8Rng, n: usize) -> (DenseMatrix, DenseMatrix) {
    (random_complex(rng, n, n), random_complex(rng, n, n))
}

/// `S` shifted along `T` so that `⟨Tv, Sv⟩ = 0` at the top right singular vector `v` of `T`.
pub fn bj_projected_pair(rng: &mut ChaCha8Rng, n: usize) -> (DenseMatrix, DenseMatrix) {
    let (t, s) = gaussian_pair(rng, n);
    let (_, v) = top_singular_pair(&t);
    let (tv, sv) = (&t * &v, &s * &v);
    let c = inner(&sv, &tv) / inner(&tv, &tv);
    let s = &s - &t * c;
    (t, s)
}

/// `T` with a two-dimensional top singular space on which the compression of
/// `T*S` is prescribed: its numerical range contains 0 when `straddles`, and
/// otherwise stays at distance at least 0.7 from 0.
pub fn bj_degenerate_pair(rng: &mut ChaCha8Rng, n: usize, straddles: bool) -> (DenseMatrix, DenseMatrix) {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let mut d = vec![cplx(1.0, 0.0), cplx(1.0, 0.0)];
    d.extend((2..n).map(|_| cplx(rng.random_range(0.0..0.8), 0.0)));
    let t = &u * diag_complex(&d) * v.adjoint();
    let u2 = u.columns(0, 2).into_owned();
    let v2 = v.columns(0, 2).into_owned();
    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    let k = random_complex(rng, 2, 2);
    let k = k.unscale(gauge_lab::linalg::op_norm(&k));
    let target = if straddles {
        let a = rng.random_range(0.3..1.0);
        let b = rng.random_range(0.3..1.0);
        let h = diag_complex(&[cplx(a, 0.0), cplx(-b, 0.0)]);
        let w = random_unitary(rng, 2);
        (w.adjoint() * h * w) * phase
    } else {
        (DenseMatrix::identity(2, 2) + k * cplx(0.2, 0.0)) * phase
    };
    // ⟨Tζ, Sζ⟩ = x* (U2* S V2)* x for ζ = V2 x, since T V2 = U2
    let s0 = random_complex(rng, n, n);
    let s = &s0 + &u2 * (target.adjoint() - u2.adjoint() * &s0 * &v2) * v2.adjoint();
    (t, s)
}

/// Pair with a common norm-attaining direction mapped to the same vector up
/// to phase, hence parallel.
pub fn parallel_pair(rng: &mut ChaCha8Rng, n: usize) -> (DenseMatrix, DenseMatrix) {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let block = |rng: &mut ChaCha8Rng, lead: Complex64| {
        let mut m = DenseMatrix::zeros(n, n);
        m[(0, 0)] = lead;
        let r = random_complex(rng, n - 1, n - 1);
        let r = r.unscale(gauge_lab::linalg::op_norm(&r)) * cplx(0.9 * lead.norm(), 0.0);
        m.view_mut((1, 1), (n - 1, n - 1)).copy_from(&r);
        m
    };
    let t_lead = cplx(rng.random_range(0.5..2.0), 0.0);
    let s_lead = Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..std::f64::consts::TAU));
    let t = &u * block(rng, t_lead) * v.adjoint();
    let s = &u * block(rng, s_lead) * v.adjoint();
    (t, s)
}

pub fn dependent_pair(rng: &mut ChaCha8Rng, n: usize) -> (DenseMatrix, DenseMatrix) {
    let t = random_complex(rng, n, n);
    let lambda = Complex64::from_polar(rng.random_range(0.2..3.0), rng.random_range(0.0..std::f64::consts::TAU));
    let s = &t * lambda;
    (t, s)
}
