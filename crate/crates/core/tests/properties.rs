use std::collections::BTreeMap;

use proptest::prelude::*;

use mmm_core::bipartite::{bipartise, cover_from_decomposition, cover_ratio, decompose, double_matching};
use mmm_core::blowup::{blow_up_with_cap, is_product_cover, minimalize_cover, ProductVerdict};
use mmm_core::fracmatch::{build_full, validate};
use mmm_core::gadget::{build_gadget, independent_set, mu, Flavor};
use mmm_core::graph::{random_graph, verify_maximal_matching, verify_vertex_cover, Graph};
use mmm_core::harness::{verify_lemma, LemmaId, LemmaParams};
use mmm_core::rational::{format, from_usize, parse, rat, Rational};
use mmm_core::solvers::{
    enumerate_maximal_matchings, exact_min_vertex_cover, exact_mmm, greedy_maximal_matching, SolverOptions,
};
use mmm_core::ulc::{check_labelling, generate_yes, Topology, YesParams};

fn small_graph() -> impl Strategy<Value = Graph> {
    (1usize..=8, 1u64..=3, any::<u64>()).prop_map(|(n, num, seed)| random_graph(n, num, 4, seed))
}

fn yes_params() -> impl Strategy<Value = YesParams> {
    (3usize..=6, 2usize..=3, 0i64..=2, any::<u64>(), 0usize..3).prop_map(|(n, r, xi8, seed, t)| YesParams {
        num_vars: n,
        num_colors: r,
        xi: rat(xi8, 8),
        topology: match t {
            0 => Topology::Cycle,
            1 => Topology::Complete,
            _ => Topology::Random(rat(1, 2)),
        },
        seed,
    })
}

fn epsilon() -> impl Strategy<Value = Rational> {
    (1i64..=7).prop_map(|k| rat(k, 16))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_round_trip(num in -1000i64..1000, den in 1i64..1000) {
        let q = rat(num, den);
        prop_assert_eq!(parse(&format(&q)).unwrap(), q);
    }

    #[test]
    fn planted_labelling_satisfies_x0(params in yes_params()) {
        let instance = generate_yes(&params).unwrap();
        let planted = instance.planted().unwrap();
        let labelling: BTreeMap<usize, usize> = planted.labelling.iter().copied().enumerate().collect();
        let report = check_labelling(&instance, &labelling, &planted.x0).unwrap();
        prop_assert!(report.all_satisfied());
        for c in instance.constraints() {
            let forward = instance.constraint(c.u, c.v).unwrap();
            let backward = instance.constraint(c.v, c.u).unwrap();
            for r in 0..instance.num_colors() {
                prop_assert_eq!(backward.apply(forward.apply(r)), r);
            }
        }
    }

    #[test]
    fn capacity_safety(n in 1usize..=12, r in 2usize..=8, eps in epsilon()) {
        let mu = |k| mu(n, r, &eps, k).unwrap();
        let two = from_usize(2);
        let four = from_usize(4);
        prop_assert!((mu(0) - mu(r)) / &two <= mu(0));
        for m in [r, r - 1] {
            for k in 0..=m {
                if k <= m - k {
                    prop_assert!((mu(k) - mu(m - k)) / &four <= mu(k));
                }
            }
        }
    }

    #[test]
    fn fractional_matching_saturates_complement(params in yes_params(), eps in epsilon()) {
        let instance = generate_yes(&params).unwrap();
        let planted = instance.planted().unwrap();
        let gadget = build_gadget(&instance, &eps, Flavor::Extended).unwrap();
        let fm = build_full(&gadget, planted).unwrap();
        let report = validate(&gadget, &fm);
        let is = independent_set(&gadget, planted).unwrap();
        prop_assert!(report.is_valid());
        prop_assert_eq!(report.saturation.saturated.len(), gadget.num_vertices() - is.vertices.len());
        prop_assert!(report.saturation.saturated.iter().all(|&v| !is.contains(v)));
    }

    #[test]
    fn exact_mmm_agrees_with_enumeration(g in small_graph()) {
        let exact = exact_mmm(&g, None, &SolverOptions::default()).unwrap();
        prop_assert!(exact.is_optimal());
        let all = enumerate_maximal_matchings(&g, 1_000_000).unwrap();
        let best = all.iter().map(|m| m.len()).min().unwrap();
        prop_assert_eq!(from_usize(best), exact.objective);
        prop_assert!(verify_maximal_matching(&g, &exact.witness).unwrap().is_maximal());
    }

    #[test]
    fn matching_cover_duality(g in small_graph(), seed in any::<u64>()) {
        let options = SolverOptions::default();
        let mmm = exact_mmm(&g, None, &options).unwrap().objective;
        let vc = exact_min_vertex_cover(&g, None, &options).unwrap();
        prop_assert!(verify_vertex_cover(&g, &vc.witness).is_ok());
        prop_assert!(from_usize(2) * &mmm >= vc.objective);

        let greedy = greedy_maximal_matching(&g, seed);
        prop_assert!(verify_maximal_matching(&g, &greedy).unwrap().is_maximal());
        prop_assert!(verify_vertex_cover(&g, &greedy.matched_vertices()).is_ok());
        prop_assert!(from_usize(greedy.len()) <= from_usize(2) * &mmm);
    }

    #[test]
    fn bipartisation_paths_and_covers(g in small_graph(), seed in any::<u64>()) {
        let bip = bipartise(&g);
        let m = greedy_maximal_matching(bip.graph(), seed);
        let d = decompose(&bip, &m).unwrap();
        prop_assert_eq!(d.num_arcs(), m.len());
        prop_assert!(d.paths.iter().all(|p| p.len() >= 3));
        let cover = cover_from_decomposition(&bip, &d).unwrap();
        prop_assert!(verify_vertex_cover(&g, &cover).is_ok());
        if !m.is_empty() {
            prop_assert!(cover_ratio(cover.len(), m.len()) <= rat(3, 2));
        }
        let base = greedy_maximal_matching(&g, seed);
        let doubled = double_matching(&bip, &base).unwrap();
        prop_assert_eq!(doubled.len(), 2 * base.len());
        prop_assert!(verify_maximal_matching(bip.graph(), &doubled).unwrap().is_maximal());
    }

    #[test]
    fn minimal_matching_covers_are_products(seed in 0u64..1000, rho in prop::sample::select(vec![rat(3, 2), rat(3, 1)])) {
        let instance = generate_yes(&YesParams {
            num_vars: 3,
            num_colors: 2,
            xi: rat(0, 1),
            topology: Topology::Cycle,
            seed,
        })
        .unwrap();
        let gadget = build_gadget(&instance, &rat(1, 8), Flavor::Base).unwrap();
        let blowup = blow_up_with_cap(&gadget, &rho, 40).unwrap();
        let graph = blowup.to_graph().unwrap();
        let matching = greedy_maximal_matching(&graph, seed);
        let cover = minimalize_cover(&graph, &matching.matched_vertices()).unwrap();
        prop_assert!(verify_vertex_cover(&graph, &cover).is_ok());
        prop_assert!(matches!(is_product_cover(&blowup, &cover), ProductVerdict::Product(_)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reports_are_deterministic(seed in 0u64..1000, lemma in prop::sample::select(vec![LemmaId::FraMat, LemmaId::WeiYes, LemmaId::BipCover, LemmaId::TotalVc])) {
        let params = LemmaParams { seed, size: 6, samples: 8, ..LemmaParams::default() };
        let a = verify_lemma(lemma, &params).unwrap();
        let b = verify_lemma(lemma, &params).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert!(a.passed());
    }
}
