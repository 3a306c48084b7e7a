use abcut::corpus;
use abcut::cuts::{
    boundary, brute_force_sparsest, conductance, fiedler_cut, sparsity, volume, Cut, Objective,
};
use abcut::group::{AbelianGroup, GraphSpec};
use abcut::spectral::{dense_spectrum, multiset_distance, spectrum_of};
use abcut::walks::{collision_direct, collision_spectral};
use proptest::prelude::*;

fn moduli() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..6, 1..4)
}

fn graph() -> impl Strategy<Value = abcut::group::CayleyGraph> {
    (moduli(), 1usize..6, any::<u64>()).prop_filter_map("degree too large", |(m, d, seed)| {
        corpus::random_cayley(&m, d, seed).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn index_round_trip(m in moduli(), raw in any::<u64>()) {
        let g = AbelianGroup::new(m).unwrap();
        let i = raw as usize % g.order();
        let x = g.unindex(i).unwrap();
        prop_assert_eq!(g.index(&x).unwrap(), i);
        let y = g.negate(&x);
        prop_assert_eq!(g.add(&x, &y), g.identity());
    }

    #[test]
    fn characters_match_dense(g in graph()) {
        let a = spectrum_of(&g).unwrap();
        let b = dense_spectrum(&g).unwrap();
        prop_assert!(multiset_distance(a.eigenvalues(), b.eigenvalues()) < 1e-8);
        prop_assert!(a.eigenvalues()[0].abs() < 1e-12);
    }

    #[test]
    fn collision_spectral_matches_direct(g in graph(), t in 0u32..20) {
        let s = collision_spectral(&g, t).unwrap();
        let d = collision_direct(&g, t).unwrap();
        prop_assert!((s - d).abs() < 1e-10, "{} vs {}", s, d);
        prop_assert!(d <= 1.0 + 1e-12 && d >= 1.0 / g.n() as f64 - 1e-12);
    }

    #[test]
    fn cut_measures_are_consistent(g in graph(), bits in any::<u64>()) {
        let n = g.n();
        let cut = Cut::from_members((0..n).map(|i| bits >> (i % 64) & 1 == 1).collect());
        prop_assume!(cut.is_proper());
        let co = cut.complement();
        prop_assert_eq!(boundary(&g, &cut), boundary(&g, &co));
        prop_assert_eq!(volume(&g, &cut) + volume(&g, &co), g.total_volume());
        prop_assert_eq!(sparsity(&g, &cut).unwrap(), sparsity(&g, &co).unwrap());
        prop_assert!(conductance(&g, &cut).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn spec_json_round_trip(g in graph()) {
        let text = serde_json::to_string(&g.to_spec()).unwrap();
        let back: GraphSpec = serde_json::from_str(&text).unwrap();
        let h = back.build().unwrap();
        prop_assert_eq!(g.edges(), h.edges());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cheeger_sandwich_on_small_graphs(
        m in prop::collection::vec(2usize..5, 1..3),
        d in 2usize..5,
        seed in any::<u64>(),
    ) {
        let Ok((g, _)) = corpus::random_connected_cayley(&m, d, seed) else {
            return Ok(());
        };
        prop_assume!(g.n() <= 16 && g.n() > 2);
        let spec = spectrum_of(&g).unwrap();
        let l2 = spec.lambda2();
        let opt = brute_force_sparsest(&g, Objective::Conductance).unwrap().value;
        let f = fiedler_cut(&g, &spec).unwrap();
        let fphi = conductance(&g, &f.cut.smaller_side()).unwrap();
        prop_assert!(opt >= l2 / 2.0 - 1e-9);
        prop_assert!(opt <= fphi + 1e-12);
        prop_assert!(fphi <= (2.0 * l2).sqrt() + 1e-9);
    }
}

#[test]
fn named_corpora_are_connected_cayley_graphs() {
    let all = corpus::default_corpus().unwrap();
    assert!(all.len() >= 30);
    for ng in all.iter().chain(corpus::small_corpus().unwrap().iter()) {
        assert!(ng.graph.provenance().is_some(), "{}", ng.name);
        assert!(ng.graph.is_connected(), "{}", ng.name);
        assert!(ng.graph.structure_issues().is_empty(), "{}", ng.name);
        assert!(ng.graph.n() <= 512);
    }
    assert!(corpus::small_corpus()
        .unwrap()
        .iter()
        .all(|g| g.graph.n() <= 16));
}
