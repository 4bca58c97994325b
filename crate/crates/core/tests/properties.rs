use chainamp::gaussian::ModeProbability;
use chainamp::oracle::{quadrature_z, random_connected_graph, QuadratureSpec};
use chainamp::{
    action_exponent, build_j, build_k, build_ladder, build_oscillator_k, partition_function,
    spectral_decompose, verify_boundary_of_boundary, verify_scc, ChainComplex, LadderSpec,
    LinkValues, OrientedGraph, OscillatorParams, SccConfig,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_from_seed(seed: u64, max_n: usize, faces: bool) -> (OrientedGraph, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let extra = rng.gen_range(0..=n + 2);
    (random_connected_graph(&mut rng, n, extra, faces), rng)
}

fn random_links(rng: &mut ChaCha8Rng, len: usize) -> LinkValues {
    LinkValues::from_slice(
        &(0..len)
            .map(|_| rng.gen_range(-4.0..4.0))
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn boundary_of_boundary_vanishes(seed in any::<u64>()) {
        let (graph, _) = graph_from_seed(seed, 9, true);
        let cc = ChainComplex::from_graph(&graph).unwrap();
        let check = verify_boundary_of_boundary(&cc).unwrap();
        prop_assert!(check.holds);
        for col in cc.d1().column_iter() {
            prop_assert_eq!(col.iter().filter(|&&x| x == 1).count(), 1);
            prop_assert_eq!(col.iter().filter(|&&x| x == -1).count(), 1);
            prop_assert_eq!(col.iter().filter(|&&x| x != 0).count(), 2);
        }
        prop_assert_eq!(cc.d2().ncols(), graph.plaquette_count());
    }

    #[test]
    fn sources_are_divergence_free(seed in any::<u64>(), alpha in 0.1f64..5.0) {
        let (graph, mut rng) = graph_from_seed(seed, 9, false);
        let cc = ChainComplex::from_graph(&graph).unwrap();
        let e = random_links(&mut rng, graph.link_count());
        let j = build_j(&cc, &e, &SccConfig::new(alpha, 1.0).unwrap()).unwrap();
        prop_assert!(j.is_divergence_free(), "divergence {}", j.divergence());
    }

    #[test]
    fn self_consistency_holds(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in 0.1f64..3.0) {
        prop_assume!(alpha.abs() > 1e-3);
        let (graph, mut rng) = graph_from_seed(seed, 8, false);
        let cc = ChainComplex::from_graph(&graph).unwrap();
        let v = DVector::from_fn(graph.vertex_count(), |_, _| rng.gen_range(-10.0..10.0));
        let check = verify_scc(&cc, &v, &SccConfig::new(alpha, beta).unwrap()).unwrap();
        prop_assert!(check.holds, "residual {}", check.residual);
    }

    #[test]
    fn action_is_gauge_invariant(seed in any::<u64>(), c in -50.0f64..50.0) {
        let (graph, mut rng) = graph_from_seed(seed, 8, false);
        let cc = ChainComplex::from_graph(&graph).unwrap();
        let config = SccConfig::default();
        let k = build_k(&cc, &config);
        let j = build_j(&cc, &random_links(&mut rng, graph.link_count()), &config).unwrap();
        let q = DVector::from_fn(graph.vertex_count(), |_, _| rng.gen_range(-5.0..5.0));
        let s0 = action_exponent(&k, &j, &q);
        let s1 = action_exponent(&k, &j, &q.add_scalar(c));
        prop_assert!((s0 - s1).abs() <= 1e-10 * s0.abs().max(1.0), "{s0} vs {s1}");
    }

    /// Sums over a degenerate eigenspace do not depend on the basis chosen
    /// inside it.
    #[test]
    fn eigenspace_sums_are_basis_independent(half in 2usize..12, seed in any::<u64>()) {
        let spec = LadderSpec::new(2 * half).unwrap();
        let cc = ChainComplex::from_graph(&build_ladder(&spec)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_links(&mut rng, spec.link_count());
        let k = build_k(&cc, &spec.config());
        let j = build_j(&cc, &e, &spec.config()).unwrap();
        let sd = spectral_decompose(&k).unwrap();
        for space in sd.eigenspaces(1e-6) {
            let basis = sd.eigenvectors().columns(space.start, space.len()).into_owned();
            let d = space.len();
            let mixing = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
            let rotation = mixing.qr().q();
            let rotated = &basis * rotation;
            let original: f64 = (basis.transpose() * j.as_vector()).norm_squared();
            let other: f64 = (rotated.transpose() * j.as_vector()).norm_squared();
            prop_assert!((original - other).abs() <= 1e-9 * original.max(1.0));
        }
    }

    #[test]
    fn quadrature_matches_analytic_at_small_rank(seed in any::<u64>()) {
        let (graph, mut rng) = graph_from_seed(seed, 3, false);
        let cc = ChainComplex::from_graph(&graph).unwrap();
        let config = SccConfig::default();
        let k = build_k(&cc, &config);
        let j = build_j(&cc, &random_links(&mut rng, graph.link_count()), &config).unwrap();
        let analytic = partition_function(&k, &j, 1.0).unwrap().log_z;
        let numeric = quadrature_z(&k, &j, &QuadratureSpec::trapezoid(80)).unwrap().log_z;
        prop_assert!((analytic - numeric).abs() <= 1e-6 * analytic.abs().max(1.0), "{analytic} vs {numeric}");
    }

    #[test]
    fn mode_densities_normalise_and_peak(seed in any::<u64>(), hbar_beta in 0.2f64..5.0) {
        let (graph, mut rng) = graph_from_seed(seed, 7, false);
        prop_assume!(graph.vertex_count() > 1);
        let cc = ChainComplex::from_graph(&graph).unwrap();
        let config = SccConfig::default();
        let k = build_k(&cc, &config);
        let j = build_j(&cc, &random_links(&mut rng, graph.link_count()), &config).unwrap();
        let sd = spectral_decompose(&k).unwrap();
        for mode in sd.row_space() {
            let p = ModeProbability::new(&sd, &j, mode, hbar_beta).unwrap();
            let (c, s) = (p.most_probable(), p.variance().sqrt());
            let points = 2001;
            let h = 24.0 * s / (points - 1) as f64;
            let total: f64 = (0..points)
                .map(|i| {
                    let w = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
                    w * p.density(c - 12.0 * s + i as f64 * h)
                })
                .sum::<f64>() * h;
            prop_assert!((total - 1.0).abs() <= 1e-8, "mode {mode}: {total}");
            prop_assert!(p.density(c) > p.density(c + 1e-3 * s));
            prop_assert!(p.density(c) > p.density(c - 1e-3 * s));
        }
    }

    #[test]
    fn unit_oscillator_is_the_ladder(n_time in 1usize..=20) {
        let osc = build_oscillator_k(&OscillatorParams::unit(n_time).unwrap());
        let spec = LadderSpec::new(2 * n_time).unwrap();
        let k = build_k(&ChainComplex::from_graph(&build_ladder(&spec)).unwrap(), &spec.config());
        prop_assert_eq!(&osc.matrix, k.matrix());
    }
}
