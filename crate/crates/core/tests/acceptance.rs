//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, even when all succeed.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use bellmd_core::random::{random_chsh_ns_behavior, random_ns_behavior, random_response_model};
use bellmd_core::{
    catalog_chsh, catalog_tilted_chsh, chsh_analytic_max, cross_set, local_mimic, m_prime_bound_check,
    max_bell, quantum_pm_threshold, simulate, solve_prior, source_polytope_vertices, strategy_general,
    strategy_theorem1, strategy_tilted_chsh, sweep_max_bell, theorem1_threshold, tightness_check, Behavior,
    DeterministicStrategy, LpStatus, PriorError, Rational, Scalar, ScenarioShape, SettingDistribution,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dist(probs: &[Rational]) -> SettingDistribution<Rational> {
    SettingDistribution::new(ScenarioShape::chsh(), probs.to_vec()).expect("valid distribution")
}

fn thresholds() -> Check {
    let start = Instant::now();
    let mut cases: Vec<(ScenarioShape, f64)> = vec![(ScenarioShape::chsh(), 3f64.log2())];
    for m in 2..=8 {
        cases.push((ScenarioShape::uniform(2, m, 2).unwrap(), ((2 * m - 1) as f64).log2()));
    }
    for settings in [vec![2, 2, 2], vec![3, 2, 4], vec![2, 2, 2, 2], vec![5, 3, 2, 2, 4]] {
        let k = settings.len();
        let count = settings.iter().sum::<usize>() - k + 1;
        let outcomes = vec![2; k];
        cases.push((ScenarioShape::new(settings, outcomes).unwrap(), (count as f64).log2()));
    }
    for (shape, expected) in &cases {
        let got = theorem1_threshold(shape).per_run_min_entropy_threshold;
        ensure(got == *expected, || format!("{:?}: got {got}, expected {expected}", shape.settings()))?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 1.0, || format!("took {elapsed:.3} s"))?;
    Ok(format!("{} scenarios exact in {elapsed:.4} s", cases.len()))
}

fn quantum_threshold() -> Check {
    let expected = 0.25 * (1.0 + (2f64.sqrt() - 1.0) / 3.0);
    let got = quantum_pm_threshold(&catalog_chsh::<f64>()).map_err(|e| e.to_string())?;
    ensure((got - expected).abs() < 1e-9, || format!("got {got}, expected {expected}"))?;

    // independent root finding on the analytic curve, which rises from 2 to 4
    let uniform = SettingDistribution::<f64>::uniform(ScenarioShape::chsh());
    let target = 2.0 * 2f64.sqrt();
    let (mut lo, mut hi) = (0.25, 1.0 / 3.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = chsh_analytic_max(&uniform, &mid).map_err(|e| e.to_string())?;
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    ensure((root - got).abs() < 1e-9, || format!("root {root} vs threshold {got}"))?;
    Ok(format!("P_M = {got:.12}, analytic root {root:.12}"))
}

fn grid(start: &Rational, points: i64) -> Vec<Rational> {
    let step = (r(1, 3) - start.clone()) / Rational::from_int(points);
    (0..points).map(|k| start.clone() + step.clone() * Rational::from_int(k)).collect()
}

fn lp_sweep() -> Check {
    let f = catalog_chsh::<Rational>();
    let curves = [
        vec![r(1, 4); 4],
        vec![r(29, 100), r(13, 100), r(29, 100), r(29, 100)],
        vec![r(3, 10), r(3, 10), r(2, 10), r(2, 10)],
        vec![r(26, 100), r(26, 100), r(26, 100), r(22, 100)],
    ];
    let start = Instant::now();
    let mut solved = 0;
    for (c, probs) in curves.iter().enumerate() {
        let p_obs = dist(probs);
        let points = grid(&p_obs.max(), 20);
        let rows = sweep_max_bell(&f, &p_obs, &points).map_err(|e| e.to_string())?;
        for row in rows {
            ensure(row.status == LpStatus::Optimal, || format!("curve {c} at {}: {:?}", row.p_max, row.status))?;
            let value = row.value.expect("optimal").to_f64();
            let pm = row.p_max.to_f64();
            if c == 0 {
                let line = 24.0 * pm - 4.0;
                ensure((value - line).abs() < 1e-6, || format!("uniform at {pm}: {value} vs {line}"))?;
            }
            let analytic = chsh_analytic_max(&p_obs, &row.p_max).map_err(|e| e.to_string())?.to_f64();
            ensure((value - analytic).abs() < 1e-6, || format!("curve {c} at {pm}: LP {value} vs formula {analytic}"))?;
            solved += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 60.0, || format!("sweep took {elapsed:.1} s"))?;

    let skewed = dist(&curves[1]);
    let at = max_bell(&f, &skewed, &r(29, 100)).map_err(|e| e.to_string())?;
    let v = at.value.ok_or("no value at 0.29")?.to_f64();
    ensure((v - 2.0).abs() < 1e-6, || format!("B^max at 0.29 = {v}"))?;
    Ok(format!("{solved} LP solves in {elapsed:.2} s, skewed curve gives {v:.6} at 0.29"))
}

fn chsh_anchors() -> Vec<Vec<usize>> {
    vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
}

/// Independent convex-mixture check: weights nonnegative, summing to one,
/// and reproducing `claimed` entry by entry.
fn check_mixture(entries: &[(Rational, DeterministicStrategy)], claimed: &Behavior<Rational>) -> std::result::Result<(), String> {
    let zero = Rational::from_int(0);
    ensure(entries.iter().all(|(w, _)| *w >= zero), || "negative weight".into())?;
    let total: Rational = entries.iter().map(|(w, _)| w.clone()).sum();
    ensure(total == Rational::from_int(1), || format!("weights sum to {total}"))?;
    let shape = claimed.shape();
    for z in 0..shape.num_settings() {
        let tuple = shape.setting_tuple(z);
        for o in 0..shape.num_outcomes() {
            let outcome = shape.outcome_tuple(o);
            let mass: Rational = entries
                .iter()
                .filter(|(_, d)| d.outcome_tuple(&tuple) == outcome)
                .map(|(w, _)| w.clone())
                .sum();
            ensure(&mass == claimed.prob(z, o), || format!("mixture differs at setting {tuple:?} outcome {outcome:?}"))?;
        }
    }
    Ok(())
}

fn matches_on(p: &Behavior<Rational>, q: &Behavior<Rational>, settings: &[usize]) -> bool {
    settings.iter().all(|&z| p.row(z) == q.row(z))
}

fn lemma_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e33a);
    let mut runs = 0;
    for sample in 0..200 {
        let p = random_chsh_ns_behavior(&mut rng);
        for anchor in chsh_anchors() {
            let cross = cross_set(p.shape(), &anchor).map_err(|e| e.to_string())?;
            let (mimic, model) = local_mimic(&p, &anchor).map_err(|e| e.to_string())?;
            ensure(matches_on(&p, &mimic, cross.members()), || format!("sample {sample}, anchor {anchor:?}: mismatch"))?;
            check_mixture(model.entries(), &mimic).map_err(|e| format!("sample {sample}, anchor {anchor:?}: {e}"))?;
            runs += 1;
        }
    }
    let pr = Behavior::<Rational>::pr_box();
    for anchor in chsh_anchors() {
        let opposite = [1 - anchor[0], 1 - anchor[1]];
        let tight = tightness_check(&pr, &anchor, &opposite).map_err(|e| e.to_string())?;
        ensure(!tight, || format!("PR box extends past anchor {anchor:?}"))?;
    }
    Ok(format!("{runs} exact mimics, PR box not extendable at any anchor"))
}

fn tripartite() -> Check {
    let shape = ScenarioShape::uniform(3, 2, 2).unwrap();
    let anchor = [0, 1, 0];
    let cross = cross_set(&shape, &anchor).map_err(|e| e.to_string())?;
    ensure(cross.len() == 4, || format!("cross set size {}", cross.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
    for sample in 0..50 {
        let p = random_ns_behavior(&mut rng, &shape, 3);
        let (mimic, model) = local_mimic(&p, &anchor).map_err(|e| e.to_string())?;
        ensure(matches_on(&p, &mimic, cross.members()), || format!("sample {sample}: mismatch"))?;
        check_mixture(model.entries(), &mimic).map_err(|e| format!("sample {sample}: {e}"))?;
    }
    Ok("cross set of 4, 50 tripartite mixtures matched".into())
}

fn faking() -> Check {
    let f = catalog_chsh::<Rational>();
    let s = strategy_theorem1(f.shape(), Some(&f)).map_err(|e| e.to_string())?;
    let rounds = 100_000u64;
    let summary = simulate(&s, &f, rounds, 2024).map_err(|e| e.to_string())?;
    let value = summary.bell_value.clone().ok_or("no CHSH value")?;
    ensure(value == Rational::from_int(4), || format!("CHSH = {value}"))?;
    let sigma = (0.25f64 * 0.75 / rounds as f64).sqrt();
    for (z, p) in summary.empirical_p_obs.probs().iter().enumerate() {
        ensure((p - 0.25).abs() <= 5.0 * sigma, || format!("p_obs[{z}] = {p}"))?;
    }

    let tilted = catalog_tilted_chsh(Rational::from_int(1)).map_err(|e| e.to_string())?;
    let t = strategy_tilted_chsh();
    let summary = simulate(&t, &tilted, rounds, 7).map_err(|e| e.to_string())?;
    let tv = summary.bell_value.clone().ok_or("no tilted value")?;
    ensure(tv == Rational::from_int(5), || format!("tilted value {tv}"))?;
    let reconstructed = bellmd_core::reconstruct_behavior(&summary).map_err(|e| e.to_string())?;
    let report = reconstructed.no_signaling_report(&1e-9);
    let witness = report.witness.ok_or("reconstructed behavior looks no-signaling")?;
    ensure(witness.difference > 0.0, || "zero witness".into())?;
    Ok(format!("CHSH 4, tilted 5, signaling witness {:.3} for party {}", witness.difference, witness.party))
}

/// Vertices of {0 ≤ p ≤ P, Σp = 1} as basic solutions: n−1 coordinates
/// pinned to a bound, the remaining one fixed by the sum.
fn polytope_oracle(n: usize, bound: &Rational) -> BTreeSet<Vec<Rational>> {
    let zero = Rational::from_int(0);
    let mut out = BTreeSet::new();
    for free in 0..n {
        for pattern in 0..(1u32 << (n - 1)) {
            let mut point = vec![zero.clone(); n];
            let mut bit = 0;
            for (i, slot) in point.iter_mut().enumerate() {
                if i == free {
                    continue;
                }
                if pattern >> bit & 1 == 1 {
                    *slot = bound.clone();
                }
                bit += 1;
            }
            let rest: Rational = point.iter().cloned().sum();
            let last = Rational::from_int(1) - rest;
            if last >= zero && &last <= bound {
                point[free] = last;
                out.insert(point);
            }
        }
    }
    out
}

fn polytope() -> Check {
    let bounds = [r(1, 5), r(27, 100), r(1, 3), r(1, 2), r(7, 10)];
    let mut compared = 0;
    for n in 1..=6 {
        for bound in &bounds {
            let expected = polytope_oracle(n, bound);
            let got: BTreeSet<Vec<Rational>> = match source_polytope_vertices(n, bound) {
                Ok(v) => v.into_iter().collect(),
                Err(_) => BTreeSet::new(),
            };
            ensure(got == expected, || {
                format!("n = {n}, P = {bound}: {} vertices vs oracle {}", got.len(), expected.len())
            })?;
            compared += 1;
        }
    }
    Ok(format!("{compared} (n, P) pairs identical"))
}

fn m_prime_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3e7);
    let shapes = [ScenarioShape::chsh(), ScenarioShape::new(vec![3, 2], vec![2, 3]).unwrap()];
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for i in 0..100 {
        let shape = &shapes[i % shapes.len()];
        let (model, p_obs) = random_response_model(&mut rng, shape, 5);
        let check = m_prime_bound_check(&model, &p_obs).map_err(|e| e.to_string())?;

        // recompute the deviation directly from the model data
        let post = model.posterior();
        let marginal: Vec<Rational> = (0..post[0].len())
            .map(|k| (0..shape.num_settings()).map(|z| p_obs.probs()[z].clone() * post[z][k].clone()).sum())
            .collect();
        let mut deviation = Rational::from_int(0);
        for z in 0..shape.num_settings() {
            let zs = shape.setting_tuple(z);
            for o in 0..shape.num_outcomes() {
                let os = shape.outcome_tuple(o);
                let mut diff = Rational::from_int(0);
                for (k, resp) in model.responses().iter().enumerate() {
                    let product: Rational = (0..shape.parties()).map(|p| resp[p][zs[p]][os[p]].clone()).product();
                    diff += (post[z][k].clone() - marginal[k].clone()) * product;
                }
                deviation = deviation.max(diff.abs());
            }
        }
        let bound: Rational = (0..shape.num_settings())
            .map(|z| {
                (0..marginal.len())
                    .map(|k| (post[z][k].clone() - marginal[k].clone()).abs())
                    .sum::<Rational>()
            })
            .max()
            .unwrap();
        ensure(deviation == check.max_deviation, || format!("model {i}: deviation mismatch"))?;
        ensure(bound == check.m_prime, || format!("model {i}: M' mismatch"))?;
        if deviation > bound || !check.holds {
            violations += 1;
        }
        tightest = tightest.min((bound - deviation).to_f64());
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("100 models, 0 violations, smallest slack {tightest:.4}"))
}

fn prior_feasibility() -> Check {
    let f = catalog_chsh::<Rational>();
    let s = strategy_theorem1(f.shape(), Some(&f)).map_err(|e| e.to_string())?;
    let uniform = SettingDistribution::uniform(ScenarioShape::chsh());
    let sol = solve_prior(s.conditionals(), &uniform).map_err(|e| format!("{e:?}"))?;
    ensure(sol.prior == vec![r(1, 4); 4], || format!("prior {:?}", sol.prior))?;
    ensure(sol.unique, || "uniform prior not reported unique".into())?;

    let hiding = strategy_general(&f, r(26, 100)).map_err(|e| e.to_string())?;
    let target = [r(29, 100), r(13, 100), r(29, 100), r(29, 100)];
    let certificate = match solve_prior(hiding.conditionals(), &dist(&target)) {
        Err(PriorError::Infeasible { certificate }) => certificate,
        other => return Err(format!("expected infeasible, got {other:?}")),
    };
    // rows: p(z|λ) for each z, then Σ_λ p(λ) = 1
    let columns = hiding.conditionals();
    let n = target.len();
    ensure(certificate.len() == n + 1, || format!("certificate length {}", certificate.len()))?;
    for (k, col) in columns.iter().enumerate() {
        let dot: Rational = (0..n).map(|z| certificate[z].clone() * col[z].clone()).sum::<Rational>()
            + certificate[n].clone();
        ensure(dot <= Rational::from_int(0), || format!("column {k}: yᵀA = {dot} > 0"))?;
    }
    let yb: Rational = (0..n).map(|z| certificate[z].clone() * target[z].clone()).sum::<Rational>()
        + certificate[n].clone();
    ensure(yb > Rational::from_int(0), || format!("yᵀb = {yb}"))?;
    Ok(format!("uniform prior unique; certificate yᵀb = {yb}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("cross-set min-entropy thresholds", thresholds),
        ("CHSH quantum P_M threshold", quantum_threshold),
        ("LP sweep against the analytic curve", lp_sweep),
        ("bipartite local mimic suite", lemma_suite),
        ("tripartite cross set", tripartite),
        ("faking simulations", faking),
        ("source polytope oracle", polytope),
        ("M' deviation bound", m_prime_bound),
        ("prior feasibility and certificate", prior_feasibility),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}) [{secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
