use factorgm::fixtures::{self, RandomModelConfig};
use factorgm::model::for_each_tuple;
use factorgm::oracle::accumulate_all;
use factorgm::runtime::TimingVisitor;
use factorgm::{
    io, AlphaBetaSwap, AlphaExpansion, FunctionEncoding, Gibbs, GibbsParameters, GraphicalModel,
    Icm, Inference, LazyFlipper, MoveParameters, SearchParameters, Semiring,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn semiring() -> impl Strategy<Value = Semiring> {
    prop::sample::select(Semiring::ALL.to_vec())
}

fn labelings(m: &GraphicalModel) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_tuple(m.space().counts(), |x| out.push(x.to_vec()));
    out
}

/// Same factors in another order, with each function re-registered in
/// `transform`ed form.
fn rebuild(
    m: &GraphicalModel,
    order: &[usize],
    transform: impl Fn(&FunctionEncoding) -> FunctionEncoding,
) -> GraphicalModel {
    let mut out = GraphicalModel::new(m.space().clone(), m.semiring()).unwrap();
    let ids: Vec<_> = m
        .functions()
        .iter()
        .map(|f| out.add_function(transform(f)).unwrap())
        .collect();
    for &f in order {
        let factor = &m.factors()[f];
        out.add_factor(&ids[factor.function().index()], factor.variables())
            .unwrap();
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factor_order_does_not_change_values(seed in any::<u64>(), s in semiring()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = fixtures::random_model(&mut rng, s, &RandomModelConfig::default());
        let mut order: Vec<usize> = (0..m.num_factors()).collect();
        order.shuffle(&mut rng);
        let shuffled = rebuild(&m, &order, Clone::clone);
        for x in labelings(&m) {
            let (a, b) = (m.evaluate(&x).unwrap(), shuffled.evaluate(&x).unwrap());
            // real-valued folds round differently in another order
            if s == Semiring::OrAnd {
                prop_assert_eq!(a, b);
            } else {
                prop_assert!(close(a, b), "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn dense_expansion_is_transparent(seed in any::<u64>(), s in semiring()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = fixtures::random_model(&mut rng, s, &RandomModelConfig::default());
        let order: Vec<usize> = (0..m.num_factors()).collect();
        let dense = rebuild(&m, &order, FunctionEncoding::to_dense);
        for x in labelings(&m) {
            prop_assert_eq!(m.evaluate(&x).unwrap().to_bits(), dense.evaluate(&x).unwrap().to_bits());
        }
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), s in semiring()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = fixtures::random_model(&mut rng, s, &RandomModelConfig::default());
        let text = io::to_string(&m, &[]);
        let back = io::from_str(&text).unwrap().model;
        prop_assert_eq!(back.functions(), m.functions());
        prop_assert_eq!(back.factors(), m.factors());
        prop_assert_eq!(io::to_string(&back, &[]), text);
    }

    #[test]
    fn oracle_best_attains_value(seed in any::<u64>(), s in semiring()) {
        prop_assume!(s.accumulate_is_selective());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = fixtures::random_model(&mut rng, s, &RandomModelConfig::default());
        let result = accumulate_all(&m).unwrap();
        let best = result.best.unwrap();
        prop_assert_eq!(m.evaluate(&best).unwrap(), result.value);
        for x in labelings(&m) {
            prop_assert!(!s.better(m.evaluate(&x).unwrap(), result.value));
        }
    }

    #[test]
    fn local_search_never_worsens(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = fixtures::random_model(&mut rng, Semiring::MinSum, &RandomModelConfig::default());
        let start = m.evaluate(&vec![0; m.num_variables()]).unwrap();
        let icm = Icm::new(&m, SearchParameters::default()).unwrap().infer().unwrap();
        let flip = LazyFlipper::new(&m, SearchParameters::default().with_subgraph_size(k)).unwrap().infer().unwrap();
        prop_assert!(icm.value <= start);
        prop_assert!(flip.value <= start);
        let exact = accumulate_all(&m).unwrap().value;
        prop_assert!(flip.value >= exact);
    }

    #[test]
    fn larger_radius_is_never_worse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = fixtures::random_model(&mut rng, Semiring::MinSum, &RandomModelConfig::default());
        let run = |k| LazyFlipper::new(&m, SearchParameters::default().with_subgraph_size(k)).unwrap().infer().unwrap().value;
        let values: Vec<f64> = (1..=3).map(run).collect();
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0]), "{:?}", values);
        let exact = accumulate_all(&m).unwrap().value;
        prop_assert_eq!(run(m.num_variables()), exact);
    }

    #[test]
    fn graph_cut_moves_descend(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = fixtures::random_metric_model(&mut rng, 8, 4);
        let start = m.evaluate(&vec![0; m.num_variables()]).unwrap();
        let exact = accumulate_all(&m).unwrap().value;
        for state in [
            AlphaExpansion::new(&m, MoveParameters::default()).unwrap().infer_with(&mut TimingVisitor::default()),
            AlphaBetaSwap::new(&m, MoveParameters::default()).unwrap().infer_with(&mut TimingVisitor::default()),
        ] {
            let state = state.unwrap();
            prop_assert!(state.value <= start);
            prop_assert!(state.value >= exact - 1e-12);
            prop_assert_eq!(m.evaluate(state.arg.as_ref().unwrap()).unwrap(), state.value);
        }
    }

    #[test]
    fn gibbs_marginals_are_distributions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = fixtures::random_model(&mut rng, Semiring::MinSum, &RandomModelConfig::default())
            .boltzmann()
            .unwrap();
        let mut g = Gibbs::new(&m, GibbsParameters::new(2_000, 100, seed)).unwrap();
        g.infer().unwrap();
        for (v, marg) in g.marginals().unwrap().iter().enumerate() {
            prop_assert_eq!(marg.len(), m.num_labels(v));
            prop_assert!((marg.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
