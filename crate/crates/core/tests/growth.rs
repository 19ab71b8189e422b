use herald_tpc::growth::*;
use herald_tpc::pauli::{NoiseSource, Pauli, PauliOperator};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn strategy() -> impl Strategy<Value = GrowthStrategy> {
    prop_oneof![
        (1usize..8).prop_map(GrowthStrategy::star),
        (1usize..8).prop_map(GrowthStrategy::cross),
        (2usize..4, 1usize..10).prop_map(|(b, n)| GrowthStrategy::snowflake(b, n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn grown_resources_match_their_geometry(s in strategy(), p_h in 0.0f64..0.6, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, stats) = grow_resource(&s, &EOModel::noiseless(p_h), &mut rng).unwrap();
        let (t, root) = target_graph(&s).unwrap();
        let core = g.core().unwrap();
        prop_assert!(g.canonical_tree(core).is_some());
        prop_assert_eq!(g.canonical_tree(core), t.canonical_tree(root));
        prop_assert_eq!(g.num_alive(), t.num_alive());
        prop_assert!(stats.completed_resource_size <= stats.total_raw_qubits_consumed);
        if stats.abandonments == 0 {
            prop_assert_eq!(stats.completed_resource_size, stats.total_raw_qubits_consumed);
        }
    }
}

#[test]
fn doubling_rounds_are_logarithmic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..6 {
        let s = GrowthStrategy::star(1 << k);
        let (_, st) = grow_resource(&s, &EOModel::noiseless(0.0), &mut rng).unwrap();
        assert_eq!(st.completed_resource_size, 8 << k);
        assert_eq!(st.growth_rounds, k as u64 + 3);
        assert_eq!(st.abandonments, 0);
    }
}

/// Mean raw cost over independent growth runs against the recursion.
fn check_cost(s: &GrowthStrategy, p_h: f64, runs: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = EOModel::noiseless(p_h);
    let costs: Vec<f64> = (0..runs)
        .map(|_| grow_resource(s, &m, &mut rng).unwrap().1.total_raw_qubits_consumed as f64)
        .collect();
    let n = runs as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let expect = expected_cost(s, p_h).unwrap();
    let sigma = (var / n).sqrt();
    assert!(
        (mean - expect).abs() <= 3.0 * sigma + 1e-9,
        "{s:?} p_h={p_h}: mean {mean} vs {expect} (sigma {sigma})"
    );
}

#[test]
fn star_of_four_leaves_costs_match_recursion() {
    check_cost(&GrowthStrategy::star(1), 0.5, 10_000, 2);
}

#[test]
fn costs_match_recursion_across_sizes() {
    // Sizes 8 to 64. The most expensive combinations are capped at a
    // few hundred runs so that total work stays bounded.
    for (i, p_h) in [0.0, 0.25, 0.5, 0.75, 0.9].into_iter().enumerate() {
        for n in [1, 2, 4, 8] {
            let s = GrowthStrategy::star(n);
            let e = expected_cost(&s, p_h).unwrap();
            if e > 1e6 {
                continue;
            }
            let runs = ((4e7 / e) as usize).clamp(200, 4000);
            check_cost(&s, p_h, runs, 10 + i as u64 * 10 + n as u64);
        }
    }
    // p_h = 0.9 with the larger sizes exceeds the work bound; check the
    // smaller shapes of other families there instead.
    check_cost(&GrowthStrategy::cross(1), 0.9, 400, 90);
    check_cost(&GrowthStrategy::snowflake_with_depth(2, 1, 1), 0.75, 400, 91);
}

#[test]
fn attempt_counts_follow_truncated_geometric() {
    let (p_h, n) = (0.5f64, 4usize);
    let s = GrowthStrategy::star(n);
    let m = EOModel::noiseless(p_h);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // categories: success at attempt 1..=n, then all failed
    let mut counts = vec![0u64; n + 1];
    let nodes = 1500;
    for _ in 0..nodes {
        let out = fuse_and_prune_node(&s, &m, &mut rng).unwrap();
        for d in 0..4 {
            if out.bonds[d] {
                counts[out.attempts[d] - 1] += 1;
            } else {
                assert_eq!(out.attempts[d], n);
                counts[n] += 1;
            }
        }
    }
    let total = (4 * nodes) as f64;
    let mut chi2 = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let p = if k < n { p_h.powi(k as i32) * (1.0 - p_h) } else { p_h.powi(n as i32) };
        let e = p * total;
        chi2 += (c as f64 - e).powi(2) / e;
    }
    // 99.9% point of chi-squared with 4 degrees of freedom
    assert!(chi2 < 18.47, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn bond_missing_rate_is_p_h_to_the_n() {
    for p_h in [0.5, 0.9] {
        for n in [1, 4, 16] {
            let s = GrowthStrategy::cross(n);
            let mut rng = ChaCha8Rng::seed_from_u64(4 + n as u64);
            // 16 fault draws share each fusion history: 600 histories
            let prof = estimate_error_profile(&s, &EOModel::noiseless(p_h), 16 * 600, &mut rng).unwrap();
            let p = p_h.powi(n as i32);
            let sigma = (p * (1.0 - p) / 2400.0).sqrt();
            assert!(
                (prof.bond_missing_prob - p).abs() <= 3.0 * sigma + 1e-12,
                "p_h={p_h} N={n}: {} vs {p}",
                prof.bond_missing_prob
            );
        }
    }
}

#[test]
fn forward_and_backward_propagation_agree() {
    let s = GrowthStrategy::snowflake(2, 3);
    let nc = node_circuit(&s, EoKind::ParityProjection, [Some(2), None, Some(1), Some(3)]).unwrap();
    let obs = nc.observables();
    let effects = nc.circuit.channel_effects(&obs);
    let n = nc.circuit.num_qubits();
    let dense: Vec<PauliOperator> = obs.iter().map(|o| o.to_dense(n).unwrap()).collect();
    for e in &effects {
        let (qs, arity) = e.support.qubits();
        for k in 0..e.support.num_paulis() {
            let letters = e.support.pauli(k);
            let factors: Vec<(usize, Pauli)> = (0..arity).map(|i| (qs[i], letters[i])).collect();
            let fault = PauliOperator::from_factors(n, &factors);
            let prop = nc.circuit.propagate_error(e.location, &fault).unwrap();
            let mut bits = 0u32;
            for (i, o) in dense.iter().enumerate() {
                if !prop.residual.commutes(o).unwrap() {
                    bits |= 1 << i;
                }
            }
            assert_eq!(bits, e.flip_mask(k), "channel at {}", e.location);
        }
    }
}

#[test]
fn single_fault_enumeration_bounds_the_core_error() {
    // Star with one leaf per direction, every operation succeeds.
    let s = GrowthStrategy::star(1);
    let nc = node_circuit(&s, EoKind::ParityProjection, [Some(1); 4]).unwrap();
    let n = nc.circuit.num_qubits();
    let x_core = PauliOperator::single(n, nc.core, Pauli::X);
    let p_g = 1e-6;
    let mut first_order = 0.0;
    let mut touching = 0;
    for (loc, op) in nc.circuit.ops().iter().enumerate() {
        let herald_tpc::pauli::Op::ErrorChannel { support, source } = op else {
            continue;
        };
        if *source == NoiseSource::Memory {
            continue;
        }
        let (qs, arity) = support.qubits();
        let mut reaches = false;
        for k in 0..support.num_paulis() {
            let letters = support.pauli(k);
            let factors: Vec<(usize, Pauli)> = (0..arity).map(|i| (qs[i], letters[i])).collect();
            let fault = PauliOperator::from_factors(n, &factors);
            let prop = nc.circuit.propagate_error(loc, &fault).unwrap();
            if !prop.residual.commutes(&x_core).unwrap() {
                first_order += p_g / support.num_paulis() as f64;
                reaches = true;
            }
        }
        // operations whose single fault can land on the core
        touching += reaches as usize;
    }
    let table = ProfileTable::build(&s, EoKind::ParityProjection, 0.0, 1, 0).unwrap();
    let prof = table.evaluate(p_g, 0.0);
    assert!((prof.p_z - first_order).abs() < 1e-3 * first_order, "{} vs {first_order}", prof.p_z);
    assert!(prof.p_z >= p_g && prof.p_z <= touching as f64 * p_g, "{} with c = {touching}", prof.p_z);
}

#[test]
fn profiles_grow_with_gate_error() {
    let s = GrowthStrategy::snowflake(2, 4);
    let mut last: Option<NodeErrorProfile> = None;
    for (i, p_g) in [1e-3, 3e-3, 1e-2].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(20 + i as u64);
        let m = EOModel::new(0.5, p_g, 0.0).unwrap();
        let p = estimate_error_profile(&s, &m, 4000, &mut rng).unwrap();
        if let Some(prev) = last {
            assert!(prev.ci_z.1 < p.ci_z.0, "{:?} then {:?}", prev.ci_z, p.ci_z);
        }
        last = Some(p);
    }
}

#[test]
fn snowflake_same_sublattice_pairs_are_rare() {
    let s = GrowthStrategy::snowflake(2, 44);
    let t = ProfileTable::build(&s, EoKind::ParityProjection, 0.9, 8, 5).unwrap();
    let p = t.evaluate(1e-4, 0.0);
    assert!(p.p_corr_same_sublattice <= 0.1 * p.p_x.max(p.p_z), "{p:?}");
}

#[test]
fn resource_size_examples() {
    let r = required_resource_size(StrategyKind::Snowflake, 2, 0.9, 0.01).unwrap();
    assert_eq!(r.attempts_n, 44);
    assert!((0.9f64.powi(4) - 0.6561).abs() < 1e-12);
    let r0 = required_resource_size(StrategyKind::Star, 2, 0.0, 0.01).unwrap();
    assert_eq!(r0.attempts_n, 1);
    assert!(matches!(
        required_resource_size(StrategyKind::Star, 2, 0.5, 1.0),
        Err(GrowthError::InvalidArgument(_))
    ));
    let big = required_resource_size(StrategyKind::Snowflake, 2, 0.98, 0.01).unwrap();
    assert!(big.total_qubits > 1000);
}
