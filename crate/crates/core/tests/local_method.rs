use netid::experiments::{run_local_pipeline, LocalConfig};
use netid::local::{
    estimate_t_entries, plan_experiment, plan_with, solve_theorem1, solve_theorem2, TSubmatrixEstimate, Theorem,
};
use netid::network::{build_case_study, random_fir_network, simulate, true_t, ExcitationSpec, NoiseNodes, RandomNetworkSpec};
use netid::tf::{FreqGrid, PolyQ, RationalTf};
use proptest::prelude::*;

#[test]
fn estimated_block_tracks_true_t() {
    // 120 taps: the slowest closed-loop mode has modulus close to 0.99, so
    // shorter FIR models truncate a visible part of the response
    let m = build_case_study::<f64>();
    let grid = FreqGrid::uniform(100).unwrap();
    let excite = [3, 4, 5, 6];
    let spec = ExcitationSpec::new(excite, 10_000, 1).with_noise(1e-6, NoiseNodes::Only(excite.into()));
    let rec = simulate(&m, &spec).unwrap();
    let est = estimate_t_entries(&rec, &[3, 5, 6], &excite, 120, &grid).unwrap();
    let truth = true_t(&m, &[3, 5, 6], &excite, &grid).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..grid.len() {
        for r in [3, 5, 6] {
            for c in excite {
                let (a, b) = (est.samples.get(r, c, k).unwrap(), truth.get(r, c, k).unwrap());
                worst = worst.max((a - b).norm() / b.norm());
            }
        }
    }
    assert!(worst < 0.05, "max relative error {worst}");
    assert!(est.min_fit() > 0.99);
    assert_eq!(est.entries.len(), 12);
}

#[test]
fn in_neighbour_variant_recovers_g21() {
    let m = build_case_study::<f64>();
    let cfg = LocalConfig { theorem: Some(Theorem::InNeighbors), ..LocalConfig::default() };
    let rep = run_local_pipeline(&m, (2, 1), &cfg).unwrap();
    assert_eq!(rep.choice.which, Theorem::InNeighbors);
    let th = &rep.estimate.theta_hat;
    assert!((th[0] + 0.11576491).abs() < 0.02, "{th:?}");
    assert!((th[1] - 0.042048459).abs() < 0.02, "{th:?}");
}

#[test]
fn solved_samples_are_conjugate_symmetric() {
    let m = build_case_study::<f64>();
    let rep = run_local_pipeline(&m, (3, 4), &LocalConfig { samples: 3000, ..LocalConfig::default() }).unwrap();
    let s = &rep.solved;
    let grid = FreqGrid::<f64>::uniform(100).unwrap();
    for (pos, &k) in s.kept.iter().enumerate() {
        let mirror = grid.mirror_index(k).unwrap();
        let Some(mpos) = s.kept.iter().position(|&x| x == mirror) else { continue };
        for resp in &s.responses {
            assert!((resp[pos] - resp[mpos].conj()).norm() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 30, ..ProptestConfig::default() })]

    #[test]
    fn exact_t_recovers_whole_row_and_column(seed in 0u64..10_000) {
        let m = random_fir_network(seed, &RandomNetworkSpec::new(4)).unwrap();
        let grid = FreqGrid::uniform(64).unwrap();
        let ((j, i), _) = m.edges().next().unwrap();

        let inn = m.in_neighbors(j).to_vec();
        let mut rows = inn.clone();
        rows.push(j);
        rows.sort_unstable();
        let est = TSubmatrixEstimate::from_response(true_t(&m, &rows, &inn, &grid).unwrap());
        let s = solve_theorem2(&est, j, &inn).unwrap();
        for (e, &(a, b)) in s.edges.iter().enumerate() {
            let g = m.edge(a, b).unwrap();
            for (pos, &w) in s.omegas.iter().enumerate() {
                prop_assert!((s.responses[e][pos] - g.eval(w).unwrap()).norm() < 1e-8);
            }
        }

        let out = m.out_neighbors(i).to_vec();
        let mut cols = out.clone();
        cols.push(i);
        cols.sort_unstable();
        let est = TSubmatrixEstimate::from_response(true_t(&m, &out, &cols, &grid).unwrap());
        let s = solve_theorem1(&est, i, &out).unwrap();
        for (e, &(a, b)) in s.edges.iter().enumerate() {
            let g = m.edge(a, b).unwrap();
            for (pos, &w) in s.omegas.iter().enumerate() {
                prop_assert!((s.responses[e][pos] - g.eval(w).unwrap()).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn entry_counts_follow_degrees(seed in 0u64..10_000, nodes in 3usize..7) {
        let m = random_fir_network(seed, &RandomNetworkSpec::new(nodes)).unwrap();
        for ((j, i), _) in m.edges() {
            let topo = m.local_topology(j, i).unwrap();
            let (dout, din) = (m.out_degree(i), m.in_degree(j));
            let plan = plan_experiment(&topo).unwrap();
            prop_assert_eq!(plan.which == Theorem::OutNeighbors, dout <= din);
            prop_assert_eq!(plan_with(&topo, Theorem::OutNeighbors).unwrap().entry_count, dout * (dout + 1));
            prop_assert_eq!(plan_with(&topo, Theorem::InNeighbors).unwrap().entry_count, (din + 1) * din);
        }
    }

    #[test]
    fn in_neighbour_plans_ignore_remote_edges(a in 1usize..=20, b in 1usize..=20, c in -0.5f64..0.5) {
        prop_assume!(a != b && a != 2 && b != 1);
        let m = build_case_study::<f64>();
        let before = plan_with(&m.local_topology(2, 1).unwrap(), Theorem::InNeighbors).unwrap();
        if let Ok(mutated) = m.with_edge(a, b, RationalTf::fir(PolyQ::monomial(c, 1))) {
            let after = plan_with(&mutated.local_topology(2, 1).unwrap(), Theorem::InNeighbors).unwrap();
            prop_assert_eq!(after, before);
        }
    }
}
