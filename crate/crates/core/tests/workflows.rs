use abcut::corpus;
use abcut::cuts::{brute_force_sparsest, Objective};
use abcut::pipeline::{abelian_sparsest_cut, cut_dimension, PipelineConfig};
use abcut::sdp::{advice_cut, SolverConfig};
use abcut::special::{code_spectrum_check, zpn_approx, BinaryLinearCode};
use abcut::spectral::spectrum_of;
use abcut::verify::{verify, Status, Suite, VerifyOptions};
use abcut::Error;

#[test]
fn pipeline_is_exact_on_small_tori() {
    let cfg = PipelineConfig::default();
    for dims in [[3usize, 3], [2, 6], [3, 5]] {
        let g = corpus::torus(&dims).unwrap();
        let opt = brute_force_sparsest(&g, Objective::Conductance)
            .unwrap()
            .value;
        let r = abelian_sparsest_cut(&g, 0.5, 64, &cfg).unwrap();
        assert!(r.conductance <= 4.0 * opt, "{dims:?}");
        assert_eq!(r.vertices.len(), r.cut.cut.size());
    }
}

#[test]
fn pipeline_is_deterministic() {
    let g = corpus::circulant(12, &[1, 5]).unwrap();
    let cfg = PipelineConfig::default();
    let a = abelian_sparsest_cut(&g, 0.5, 64, &cfg).unwrap();
    let b = abelian_sparsest_cut(&g, 0.5, 64, &cfg).unwrap();
    assert_eq!(a.vertices, b.vertices);
}

#[test]
fn pipeline_rejects_plain_graphs_and_caps_dimension() {
    let g = abcut::group::CayleyGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
    let cfg = PipelineConfig::default();
    assert!(matches!(
        abelian_sparsest_cut(&g, 0.5, 64, &cfg),
        Err(Error::NotCayley)
    ));
    let c = corpus::cycle(30).unwrap();
    assert!(matches!(
        abelian_sparsest_cut(&c, 0.5, 3, &cfg),
        Err(Error::DimensionCap { .. })
    ));
}

#[test]
fn advice_from_the_optimum_is_recovered() {
    let g = corpus::cycle(10).unwrap();
    let opt = brute_force_sparsest(&g, Objective::Sparsity).unwrap();
    let out = advice_cut(&g, &opt.cut, 0.05, &SolverConfig::default()).unwrap();
    assert!(out.lower_bound() <= opt.value + 1e-5);
    assert!(out.cut.value <= 2.0 * opt.value);
    assert!(out.moments.audit(&opt.cut, 0.05).passes(1e-5));
}

#[test]
fn cut_dimension_of_c8() {
    let g = corpus::cycle(8).unwrap();
    let spec = spectrum_of(&g).unwrap();
    let d = cut_dimension(&g, &spec, 0.2, 1.0).unwrap();
    assert_eq!(d.k, 3);
}

#[test]
fn zpn_and_codes_agree_with_closed_forms() {
    let g = abcut::group::AbelianGroup::new(vec![5]).unwrap();
    let s = abcut::group::GeneratorMultiset::plus_minus(&g, &[g.element(&[1]).unwrap()]);
    let r = zpn_approx(5, 1, &s).unwrap();
    assert!(r.holds());
    assert_eq!(r.phi_exact, Some(0.5));

    let h = code_spectrum_check(&BinaryLinearCode::hamming_7_4()).unwrap();
    assert_eq!((h.distance, h.census_count), (3, 7));
    assert!(h.holds());
}

#[test]
fn default_corpus_verifies() {
    let corpus = corpus::default_corpus().unwrap();
    let opts = VerifyOptions {
        t_max: 32,
        random_cuts: 200,
        ..VerifyOptions::default()
    };
    let r = verify(&corpus, &Suite::ALL[..8], &opts);
    let fails: Vec<_> = r
        .checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .collect();
    assert!(fails.is_empty(), "{fails:#?}");
}

#[test]
fn empty_corpus_is_a_vacuous_pass() {
    let r = verify(
        &[],
        &[Suite::Spectral, Suite::Cheeger],
        &VerifyOptions::default(),
    );
    assert!(r.passed);
    assert_eq!(r.warnings.len(), 1);
}
