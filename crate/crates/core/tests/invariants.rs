use bellmd_core::random::{random_chsh_ns_behavior, random_ns_behavior};
use bellmd_core::{
    catalog_chained, catalog_chsh, catalog_tilted_chsh, chsh_analytic_max, cross_set, enumerate_local_vertices,
    local_membership_on_subset, local_mimic, max_bell, ns_threshold, ns_threshold_of, simulate, strategy_general,
    strategy_tilted_chsh, theorem1_threshold, Behavior, BellFunctional, LpStatus, MerminInfo, Rational, Scalar,
    ScenarioShape, SettingDistribution,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn chsh_dist(units: &[u32]) -> SettingDistribution<Rational> {
    let total: u32 = units.iter().sum();
    SettingDistribution::new(
        ScenarioShape::chsh(),
        units.iter().map(|&u| r(i64::from(u), i64::from(total))).collect(),
    )
    .unwrap()
}

fn lp_value(f: &BellFunctional<Rational>, p_obs: &SettingDistribution<Rational>, p_max: &Rational) -> Option<Rational> {
    let sol = max_bell(f, p_obs, p_max).unwrap();
    sol.value
}

#[test]
fn local_bound_is_the_best_vertex() {
    let mut cases = vec![(catalog_chsh::<Rational>(), 2)];
    for m in 2..=4 {
        cases.push((catalog_chained(m).unwrap(), 2 * m as i64 - 1));
    }
    for (f, expected) in cases {
        let best = enumerate_local_vertices(f.shape())
            .unwrap()
            .iter()
            .map(|d| f.value(&d.to_behavior()).unwrap())
            .max()
            .unwrap();
        assert_eq!(best, Rational::from_int(expected), "{}", f.name());
        assert_eq!(f.limits().local, Some(expected as f64));
    }
}

fn brute_force_cross_size(settings: &[usize], anchor: &[usize]) -> usize {
    let shape = ScenarioShape::new(settings.to_vec(), vec![2; settings.len()]).unwrap();
    shape
        .setting_tuples()
        .filter(|z| z.iter().zip(anchor).filter(|(a, b)| a != b).count() <= 1)
        .count()
}

#[test]
fn cross_set_cardinality_matches_count() {
    for k in 2..=4usize {
        let mut settings = vec![2; k];
        loop {
            let shape = ScenarioShape::new(settings.clone(), vec![2; k]).unwrap();
            let anchor: Vec<usize> = settings.iter().map(|m| m - 1).collect();
            let c = cross_set(&shape, &anchor).unwrap();
            let formula = settings.iter().sum::<usize>() - k + 1;
            assert_eq!(c.len(), formula, "{settings:?}");
            assert_eq!(c.len(), brute_force_cross_size(&settings, &anchor), "{settings:?}");
            // odometer over m_i ∈ 2..=4
            let Some(i) = settings.iter().position(|&m| m < 4) else { break };
            settings[i] += 1;
            settings[..i].iter_mut().for_each(|m| *m = 2);
        }
    }
}

#[test]
fn theorem1_never_exceeds_ns_threshold() {
    let mut functionals = vec![catalog_chsh::<Rational>(), catalog_tilted_chsh(Rational::from_int(1)).unwrap()];
    for m in 2..=5 {
        functionals.push(catalog_chained(m).unwrap());
    }
    for f in &functionals {
        let t1 = theorem1_threshold(f.shape()).per_run_min_entropy_threshold;
        let ns = ns_threshold_of(f).unwrap().per_run_min_entropy_threshold;
        assert!(t1 <= ns + 1e-12, "{}: {t1} > {ns}", f.name());
    }
    for parties in [5, 7] {
        let info = MerminInfo::new(parties).unwrap();
        let t1 = theorem1_threshold(&info.shape()).per_run_min_entropy_threshold;
        let ns = ns_threshold(&info.hiding_metadata()).unwrap().per_run_min_entropy_threshold;
        assert!(t1 <= ns, "Mermin K = {parties}");
    }
}

#[test]
fn analytic_curve_reaches_four_at_one_third() {
    let uniform = SettingDistribution::<Rational>::uniform(ScenarioShape::chsh());
    let mut last = Rational::from_int(0);
    for k in [20, 100, 10_000, 1_000_000] {
        let v = chsh_analytic_max(&uniform, &(r(1, 3) - r(1, k))).unwrap();
        assert!(v > last);
        last = v;
    }
    assert!((Rational::from_int(4) - last).to_f64() < 1e-4);
    assert!(chsh_analytic_max(&uniform, &r(1, 3)).is_err());
}

#[test]
fn large_bound_reaches_algebraic_limit() {
    let f = catalog_chsh::<Rational>();
    let uniform = SettingDistribution::uniform(ScenarioShape::chsh());
    for p in [r(1, 3), r(1, 2), r(1, 1)] {
        assert_eq!(lp_value(&f, &uniform, &p), Some(Rational::from_int(4)));
    }
}

#[test]
fn simulated_inputs_follow_the_induced_distribution() {
    let f = catalog_chsh::<f64>();
    let s = strategy_general(&f, 0.3).unwrap();
    let rounds = 1_000_000u64;
    let summary = simulate(&s, &f, rounds, 99).unwrap();
    let induced = s.induced_p_obs();
    for (z, (p, q)) in summary.empirical_p_obs.probs().iter().zip(induced.probs()).enumerate() {
        let se = (q * (1.0 - q) / rounds as f64).sqrt();
        assert!((p - q).abs() <= 5.0 * se, "setting {z}: {p} vs {q}");
    }
}

#[test]
fn tilted_fake_exceeds_no_signaling_limit() {
    let s = strategy_tilted_chsh::<Rational>();
    for alpha in [r(1, 10), r(1, 2), r(1, 1), r(3, 2), r(2, 1)] {
        let f = catalog_tilted_chsh(alpha.clone()).unwrap();
        let summary = simulate(&s, &f, 20_000, 5).unwrap();
        assert_eq!(summary.bell_value, Some(Rational::from_int(4) + alpha));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_value_is_monotone_and_sandwiched(
        units in proptest::collection::vec(10u32..40, 4),
        steps in proptest::collection::vec(1i64..30, 3),
    ) {
        let f = catalog_chsh::<Rational>();
        let p_obs = chsh_dist(&units);
        let mut p = p_obs.max();
        let mut last = Rational::from_int(2);
        for s in steps {
            p += r(s, 200);
            let v = lp_value(&f, &p_obs, &p).unwrap();
            prop_assert!(v >= last);
            prop_assert!(v <= Rational::from_int(4));
            last = v;
        }
    }

    #[test]
    fn optimizer_marginal_equals_inputs(
        units in proptest::collection::vec(10u32..40, 4),
        extra in 0i64..100,
    ) {
        let f = catalog_chsh::<Rational>();
        let p_obs = chsh_dist(&units);
        let p = p_obs.max() + r(extra, 300);
        let sol = max_bell(&f, &p_obs, &p).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let joint = sol.joint_statistics().unwrap();
        let shape = ScenarioShape::chsh();
        for z in 0..4 {
            let marginal: Rational = (0..4).map(|o| joint[shape.entry(z, o)].clone()).sum();
            prop_assert_eq!(&marginal, &p_obs.probs()[z]);
        }
    }

    #[test]
    fn membership_matches_direct_search(
        outcomes in proptest::collection::vec(0usize..4, 4),
        mask in 1u8..16,
    ) {
        // a 0/1 table: each setting produces one fixed joint outcome
        let shape = ScenarioShape::chsh();
        let p = Behavior::from_fn(shape.clone(), |z, o| Rational::from_int(i64::from(outcomes[z] == o))).unwrap();
        let subset: Vec<usize> = (0..4).filter(|z| mask >> z & 1 == 1).collect();
        let direct = enumerate_local_vertices(&shape).unwrap().iter().any(|d| {
            subset.iter().all(|&z| d.outcome_at(z) == outcomes[z])
        });
        prop_assert_eq!(local_membership_on_subset(&p, &subset).unwrap().is_feasible(), direct);
    }

    #[test]
    fn mimic_is_exact_on_the_cross_set(seed in any::<u64>(), anchor in (0usize..2, 0usize..2)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_chsh_ns_behavior(&mut rng);
        let anchor = [anchor.0, anchor.1];
        let (mimic, model) = local_mimic(&p, &anchor).unwrap();
        prop_assert!(mimic.is_no_signaling(&Rational::from_int(0)));
        prop_assert_eq!(model.behavior(), mimic.clone());
        for &z in cross_set(p.shape(), &anchor).unwrap().members() {
            prop_assert_eq!(p.row(z), mimic.row(z));
        }
    }

    #[test]
    fn mimic_handles_uneven_shapes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = ScenarioShape::new(vec![3, 2, 2], vec![2, 3, 2]).unwrap();
        let p = random_ns_behavior(&mut rng, &shape, 2);
        let anchor = [2, 1, 0];
        let (mimic, _) = local_mimic(&p, &anchor).unwrap();
        for &z in cross_set(&shape, &anchor).unwrap().members() {
            prop_assert_eq!(p.row(z), mimic.row(z));
        }
    }
}
