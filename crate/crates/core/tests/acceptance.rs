//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use gauge_lab::descent::{
    descent_run, generic_candidate, grid_aligned_candidate, growth_inequality_check, growth_witness,
    isometry_deviation, necessary_conditions, replay, selfadjoint_double, DescentOptions, GridSpec, RefutationTrace,
    StepData, Verdict,
};
use gauge_lab::gamma::{gamma_estimate, gamma_lower_bound, transfer_lift, Budget};
use gauge_lab::linalg::{from_real_rows, inner, op_norm, random_unitary, vec_norm};
use gauge_lab::norms::{real_shadow, Field, SpaceDescriptor};
use gauge_lab::optimize::stream_rng;
use gauge_lab::orthogonality::{
    bj_orthogonal_definitional, bj_witness_search, norm_parallel, parallel_by_radius, sp_parallel_iff_dependent,
    OrthOutcome,
};
use gauge_lab::OperatorPair;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gamma_on_euclidean_plane() -> Outcome {
    let start = Instant::now();
    let w = gamma_estimate(&SpaceDescriptor::lp(2.0).unwrap(), Budget::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        (w.value - 2.0).abs() <= 1e-3 && elapsed < Duration::from_secs(5),
        format!("value {:.12}, {elapsed:.2?}", w.value),
    )
}

fn gamma_on_real_max_plane() -> Outcome {
    let space = SpaceDescriptor::linf().with_field(Field::Real);
    let w = gamma_estimate(&space, Budget::new(64, 500).unwrap()).map_err(|e| e.to_string())?;
    check(
        w.value <= 1.0 + 1e-6 && w.value >= 1.0 - 1e-3,
        format!("best of 64 starts {:.15}", w.value),
    )
}

fn gamma_exceeds_one() -> Outcome {
    let spaces = [
        SpaceDescriptor::lp(1.5).unwrap(),
        SpaceDescriptor::lp(3.0).unwrap(),
        SpaceDescriptor::bpq(1.0, 2.0).unwrap(),
        SpaceDescriptor::bpq(2.0, 1.0).unwrap(),
        SpaceDescriptor::bpq(3.0, 3.0).unwrap(),
        SpaceDescriptor::bpq(1.5, 4.0).unwrap(),
    ];
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for space in &spaces {
        let v = gamma_estimate(space, Budget::default())
            .map_err(|e| e.to_string())?
            .value;
        ok &= v > 1.0 + 1e-3;
        parts.push(format!("{space} {v:.4}"));
    }
    let elapsed = start.elapsed();
    check(
        ok && elapsed < Duration::from_secs(60),
        format!("{}; {elapsed:.2?}", parts.join(", ")),
    )
}

fn transfer_is_exact() -> Outcome {
    let spaces = [
        SpaceDescriptor::lp(1.5).unwrap(),
        SpaceDescriptor::lp(3.0).unwrap(),
        SpaceDescriptor::bpq(1.0, 2.0).unwrap(),
        SpaceDescriptor::bpq(2.5, 1.5).unwrap(),
        SpaceDescriptor::linf(),
    ];
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let mut rng = stream_rng(404, k);
        let mut real_psd = || {
            let (x, y) = (rng.random_range(0.1..2.0f64), rng.random_range(0.1..2.0f64));
            let r = rng.random_range(0.0..1.0) * (x * y).sqrt();
            from_real_rows(&[&[x, r], &[r, y]])
        };
        let (a, b) = (real_psd(), real_psd());
        let space = &spaces[k as usize % spaces.len()];
        let w = gamma_lower_bound(&real_shadow(space).unwrap(), &a, &b).map_err(|e| e.to_string())?;
        let lifted = transfer_lift(space, &w).map_err(|e| e.to_string())?;
        worst = worst
            .max((lifted.value - w.value).abs())
            .max((lifted.norm_a - w.norm_a).abs())
            .max((lifted.norm_b - w.norm_b).abs());
    }
    check(worst <= 1e-12, format!("50 witnesses, largest change {worst:e}"))
}

fn bj_criteria_agree() -> Outcome {
    const TOL: f64 = 1e-6;
    let mut disagreements = 0;
    let mut holds = 0;
    let mut bad_witness = 0;
    for k in 0..200u64 {
        let mut rng = stream_rng(505, k);
        let (t, s) = match k % 4 {
            0 => gaussian_pair(&mut rng, 4),
            1 => bj_projected_pair(&mut rng, 4),
            2 => bj_degenerate_pair(&mut rng, 4, true),
            _ => bj_degenerate_pair(&mut rng, 4, false),
        };
        let def = bj_orthogonal_definitional(&t, &s, TOL).map_err(|e| e.to_string())?;
        let wit = bj_witness_search(&t, &s, TOL).map_err(|e| e.to_string())?;
        if wit.outcome == OrthOutcome::WitnessNotFound || wit.holds != def.holds {
            disagreements += 1;
        }
        if let Some(z) = &wit.witness {
            holds += 1;
            let value = inner(&(&t * z), &(&s * z)).norm();
            let attains = vec_norm(&(&t * z)) >= op_norm(&t) * (1.0 - 1e-9);
            if (vec_norm(z) - 1.0).abs() > 1e-12 || !attains || value > TOL || (value - wit.residual).abs() > 1e-9 {
                bad_witness += 1;
            }
        }
    }
    check(
        disagreements == 0 && bad_witness == 0,
        format!(
            "200 pairs ({holds} orthogonal): {disagreements} disagreements, {bad_witness} witnesses off their bounds"
        ),
    )
}

fn parallel_criteria_agree() -> Outcome {
    const TOL: f64 = 1e-6;
    let mut pairs = Vec::new();
    for k in 0..200u64 {
        let mut rng = stream_rng(606, k);
        pairs.push(if k % 2 == 0 {
            parallel_pair(&mut rng, 4)
        } else {
            gaussian_pair(&mut rng, 4)
        });
    }
    pairs.extend(corpus_pairs().into_iter().map(|(_, p, _)| (p.t, p.s)));
    let mut disagreements = 0;
    let mut holds = 0;
    let mut worst_gap: f64 = 0.0;
    for (t, s) in &pairs {
        let scan = norm_parallel(t, s, TOL).map_err(|e| e.to_string())?;
        let radius = parallel_by_radius(t, s, TOL).map_err(|e| e.to_string())?;
        if scan.holds != radius.holds {
            disagreements += 1;
        }
        if scan.holds {
            holds += 1;
            let z = scan.witness.as_ref().ok_or("parallel verdict without witness")?;
            worst_gap = worst_gap.max((op_norm(t) * op_norm(s) - inner(&(t * z), &(s * z)).norm()).abs());
        }
    }
    check(
        disagreements == 0 && worst_gap <= 1e-6,
        format!(
            "{} pairs ({holds} parallel): {disagreements} disagreements, largest witness gap {worst_gap:e}",
            pairs.len()
        ),
    )
}

fn schatten_parallel_means_dependent() -> Outcome {
    let mut min_independent = f64::INFINITY;
    let mut max_dependent: f64 = 0.0;
    for p in [1.5, 3.0] {
        for k in 0..100u64 {
            let mut rng = stream_rng(707, k);
            let (t, s) = gaussian_pair(&mut rng, 3);
            let r = sp_parallel_iff_dependent(&t, &s, p, 1e-9).map_err(|e| e.to_string())?;
            min_independent = min_independent.min(r.gap);
            let (t, s) = dependent_pair(&mut rng, 3);
            let r = sp_parallel_iff_dependent(&t, &s, p, 1e-9).map_err(|e| e.to_string())?;
            max_dependent = max_dependent.max(r.gap);
        }
    }
    check(
        min_independent > 0.0 && max_dependent <= 1e-9,
        format!("smallest independent gap {min_independent:e}, largest dependent gap {max_dependent:e}"),
    )
}

fn corpus_pair(name: &str) -> Result<(OperatorPair, GridSpec), String> {
    corpus_pairs()
        .into_iter()
        .find(|(n, _, _)| n == name)
        .map(|(_, p, g)| (p, g))
        .ok_or(format!("corpus entry {name} missing"))
}

fn positive_controls() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["b12_pair", "b21_pair"] {
        let (pair, _) = corpus_pair(name)?;
        let trace = descent_run(&pair, &DescentOptions::for_space(&pair.space)).map_err(|e| e.to_string())?;
        match trace.verdict {
            Verdict::IsometryCertified { max_deviation } => {
                ok &= max_deviation <= 1e-9;
                parts.push(format!("{name} certified ({max_deviation:.1e})"));
            }
            v => {
                ok = false;
                parts.push(format!("{name} {}", v.label()));
            }
        }
    }
    let (pair, grid) = corpus_pair("real_l1_pair")?;
    let dev = isometry_deviation(&pair, &grid)
        .map_err(|e| e.to_string())?
        .max_deviation;
    let trace = descent_run(&pair, &DescentOptions::for_space(&pair.space)).map_err(|e| e.to_string())?;
    let reason = trace.verdict.reason().unwrap_or("").to_owned();
    ok &= dev <= 1e-12 && reason == "density-step-inapplicable";
    parts.push(format!(
        "real l1 deviation {dev:.1e}, {} ({reason})",
        trace.verdict.label()
    ));
    check(ok, parts.join("; "))
}

fn refutation_candidates() -> Vec<(usize, OperatorPair, DescentOptions)> {
    let mut out = Vec::new();
    let plan: [(usize, &[usize]); 3] = [
        (4, &[1, 2, 2, 4, 4, 3]),
        (6, &[1, 2, 3, 3, 6, 4]),
        (8, &[2, 2, 4, 4, 8]),
    ];
    let mut seed = 0;
    for (n, phases) in plan {
        for &m in phases {
            seed += 1;
            let (pair, options) = grid_aligned_candidate(n, m, 900 + seed).unwrap();
            out.push((n, pair, options));
        }
    }
    for n in [4, 6, 8] {
        let pair = generic_candidate(n, 950 + n as u64).unwrap();
        let options = DescentOptions::for_space(&pair.space);
        out.push((n, pair, options));
    }
    out
}

fn descent_refutes_candidates() -> Outcome {
    let candidates = refutation_candidates();
    let mut failures = Vec::new();
    let mut max_rounds = 0;
    let mut deflations = 0;
    let mut slowest = Duration::ZERO;
    for (k, (n, pair, options)) in candidates.iter().enumerate() {
        let norms = necessary_conditions(pair, 1e-9).map_err(|e| e.to_string())?.norms_pass;
        let start = Instant::now();
        let trace = descent_run(pair, options).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        let replayed = replay(&trace).map(|r| r.reproduced).unwrap_or(false);
        let refuted = matches!(trace.verdict, Verdict::Refuted { .. });
        max_rounds = max_rounds.max(trace.rounds());
        deflations += trace.deflations();
        if !(norms && refuted && replayed && trace.rounds() <= n + 1 && elapsed < Duration::from_secs(10)) {
            failures.push(format!(
                "#{k} (n={n}, {}, {} rounds)",
                trace.verdict.label(),
                trace.rounds()
            ));
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} candidates, {deflations} deflations, at most {max_rounds} rounds, slowest {slowest:.2?}{}",
            candidates.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failures.join(", "))
            }
        ),
    )
}

fn growth_checks() -> Outcome {
    let mut rng = stream_rng(1010, 0);
    for _ in 0..100 {
        let c = rng.random_range(1e-9..2.0);
        let p = rng.random_range(2.0 + 1e-9..8.0);
        growth_inequality_check(c, p).map_err(|e| e.to_string())?;
    }
    let a = growth_witness(0.5, 3.0).map_err(|e| e.to_string())?.t_star;
    let b = growth_witness(1.0, 4.0).map_err(|e| e.to_string())?.t_star;
    check(a == 16.0 && b == 2.0, format!("100 grid checks pass; t* = {a} and {b}"))
}

fn deflation_counts_hold(trace: &RefutationTrace) -> bool {
    let mut last = None;
    trace.steps.iter().all(|step| match &step.data {
        StepData::Canonicalize { unit_count, .. } => {
            last = Some((step.dimension, *unit_count));
            true
        }
        StepData::Deflate {
            applied: true,
            unit_count_after,
            ..
        } => last.is_some_and(|(d, u)| step.dimension + 1 == d && unit_count_after + 1 == u),
        _ => true,
    })
}

fn invariance_suite() -> Outcome {
    let mut failures = Vec::new();
    let entries = corpus_pairs();
    for (k, (name, pair, grid)) in entries.iter().enumerate() {
        let dev = isometry_deviation(pair, grid).map_err(|e| e.to_string())?.max_deviation;
        let u = random_unitary(&mut stream_rng(1111, k as u64), pair.n());
        let conj = OperatorPair::new(
            u.adjoint() * &pair.t * &u,
            u.adjoint() * &pair.s * &u,
            pair.space.clone(),
        )
        .unwrap();
        if (isometry_deviation(&conj, grid).unwrap().max_deviation - dev).abs() > 1e-10 {
            failures.push(format!("{name}: conjugation"));
        }
        let doubled = isometry_deviation(&selfadjoint_double(pair).unwrap(), grid)
            .unwrap()
            .max_deviation;
        let real = pair.t.iter().chain(pair.s.iter()).all(|z| z.im == 0.0);
        if doubled > dev + 1e-10 || ((dev <= 1e-9 || real) && (doubled - dev).abs() > 1e-10) {
            failures.push(format!("{name}: doubling"));
        }
        let mut options = DescentOptions::for_space(&pair.space);
        options.grid = *grid;
        let trace = descent_run(pair, &options).map_err(|e| e.to_string())?;
        if !deflation_counts_hold(&trace) {
            failures.push(format!("{name}: deflation"));
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} corpus pairs{}",
            entries.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failures.join(", "))
            }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("gamma of the Euclidean plane is 2", gamma_on_euclidean_plane),
        ("gamma of the real max-norm plane stays at 1", gamma_on_real_max_plane),
        ("gamma exceeds 1 on six sample spaces", gamma_exceeds_one),
        ("real-to-complex transfer is exact", transfer_is_exact),
        ("orthogonality criteria agree", bj_criteria_agree),
        ("parallelism criteria agree", parallel_criteria_agree),
        (
            "Schatten parallelism forces dependence",
            schatten_parallel_means_dependent,
        ),
        ("descent positive controls", positive_controls),
        ("descent refutes synthetic candidates", descent_refutes_candidates),
        ("scalar inequality and growth witness", growth_checks),
        ("invariants on the corpus", invariance_suite),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("{tag} [{:>2}] {name}: {detail} ({elapsed:.2?})", k + 1);
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
