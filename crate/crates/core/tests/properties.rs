//! Structural properties of the model class and the learner.

use eqvar_core::covest::sample_cov;
use eqvar_core::learner::{learn_dag, learn_ug};
use eqvar_core::oracle::{exhaustive_identifiability, population_cond_var};
use eqvar_core::rng::stream;
use eqvar_core::sem::{random_model, RandomModelSpec};
use eqvar_core::{LearnerConfig, SemModel, TieBreak, WeightedDag};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn model_strategy(max_d: usize) -> impl Strategy<Value = (SemModel, usize)> {
    (2..=max_d, any::<u64>()).prop_flat_map(|(d, seed)| {
        (1..=(d / 2).max(1)).prop_map(move |q| (RandomModelSpec::new(d, q).generate(seed).unwrap(), q))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Omitting a parent while conditioning only on nodes that are not
    /// descendants of the omitted parents leaves at least the gap.
    #[test]
    fn omitted_parent_leaves_gap((m, _q) in model_strategy(6)) {
        let d = m.d();
        let gap = m.variance_gap().unwrap();
        let dag = m.dag();
        for k in 0..d {
            let parents = dag.parents(k).unwrap();
            if parents.is_empty() {
                continue;
            }
            let nd = dag.non_descendants(k).unwrap();
            for mask in 0u32..(1 << nd.len()) {
                let a: Vec<usize> = nd.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
                let missing: Vec<usize> = parents.iter().copied().filter(|p| !a.contains(p)).collect();
                if missing.is_empty() {
                    continue;
                }
                let admissible = missing.iter().all(|&p| {
                    let desc = dag.descendants(p).unwrap();
                    a.iter().all(|&x| !desc[x])
                });
                if !admissible {
                    continue;
                }
                let v = population_cond_var(&m, k, &a).unwrap();
                prop_assert!(v - m.sigma2() >= gap * (1.0 - 1e-9), "k={} A={:?}", k, a);
            }
        }
    }

    /// Under equal variances the covariance pins down the graph.
    #[test]
    fn exact_covariance_identifies_graph((m, q) in model_strategy(4)) {
        let found = exhaustive_identifiability(&m.covariance().unwrap(), q).unwrap();
        prop_assert_eq!(found, vec![m.dag().clone()]);
    }

    /// Relabeling the variables relabels the learned graph.
    #[test]
    fn learner_is_permutation_equivariant((m, q) in model_strategy(8), seed in any::<u64>()) {
        let d = m.d();
        let c = sample_cov(&m.sample(200, seed), false).unwrap();
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut stream(seed, &[1]));
        let cfg = LearnerConfig::with_gamma(q, 0.02);
        let base = learn_dag(&c, &cfg).unwrap();
        let moved = learn_dag(&c.relabel(&perm).unwrap(), &cfg).unwrap();
        prop_assert_eq!(moved.dag, base.dag.relabel(&perm).unwrap());
    }

    /// The learned undirected graph is the moral graph of the learned DAG.
    #[test]
    fn ug_is_moralized_dag((m, q) in model_strategy(8), seed in any::<u64>()) {
        let c = sample_cov(&m.sample(100, seed), true).unwrap();
        let cfg = LearnerConfig::with_gamma(q, 0.01);
        prop_assert_eq!(learn_ug(&c, &cfg).unwrap(), learn_dag(&c, &cfg).unwrap().dag.moralize());
    }

    /// The output is always a DAG with in-degree at most q whose edges respect the learned order.
    #[test]
    fn output_respects_order_and_in_degree((m, q) in model_strategy(9), seed in any::<u64>(), n in 3usize..60) {
        let c = sample_cov(&m.sample(n, seed), false).unwrap();
        if let Ok(r) = learn_dag(&c, &LearnerConfig::with_gamma(q, 0.05)) {
            prop_assert!(r.dag.max_in_degree() <= q);
            prop_assert!(r.dag.is_valid_ordering(&r.ordering).unwrap());
        }
    }
}

#[test]
fn everything_is_reproducible() {
    for seed in 0..20 {
        let a = random_model(10, 3, seed, 0.3, 0.5, 1.0).unwrap();
        let b = random_model(10, 3, seed, 0.3, 0.5, 1.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sample(50, seed), b.sample(50, seed));
        let c = sample_cov(&a.sample(50, seed), false).unwrap();
        for tb in [TieBreak::LowestIndex, TieBreak::Randomized(seed)] {
            let cfg = LearnerConfig { tie_break: tb, ..LearnerConfig::with_gamma(3, 0.01) };
            assert_eq!(learn_dag(&c, &cfg).unwrap(), learn_dag(&c, &cfg).unwrap());
        }
    }
    assert_ne!(random_model(10, 3, 0, 0.3, 0.5, 1.0).unwrap(), random_model(10, 3, 1, 0.3, 0.5, 1.0).unwrap());
}

/// A true parent can be pruned at `γ = Δ/2` when one of its children sits in
/// the candidate set: dropping parent 0 of node 3 while conditioning on its
/// child 2 raises the variance by `β₀₃² var(X₀ | X₂)`, below half the gap.
#[test]
fn parent_with_child_in_candidate_set_can_fall_below_half_gap() {
    let edges = [
        (0, 1, 0.8397516324138334),
        (0, 2, -0.6495081519883908),
        (0, 3, 0.5339165116103436),
        (1, 2, -0.9786982866441688),
        (2, 3, -0.550084826883508),
    ];
    let m = SemModel::new(WeightedDag::from_edges(4, &edges).unwrap(), 0.09).unwrap();
    let gap = m.variance_gap().unwrap();
    let with = population_cond_var(&m, 3, &[0, 2]).unwrap();
    let without = population_cond_var(&m, 3, &[2]).unwrap();
    let change = without - with;
    let predicted = edges[2].2 * edges[2].2 * population_cond_var(&m, 0, &[2]).unwrap();
    assert!((change - predicted).abs() < 1e-12);
    assert!((with - 0.09).abs() < 1e-12);
    assert!(change < gap / 2.0, "change {change}, half gap {}", gap / 2.0);

    let learned = learn_dag(&m.covariance().unwrap(), &LearnerConfig::with_gamma(2, gap / 2.0)).unwrap();
    assert_eq!(learned.ordering.as_slice(), &[0, 1, 2, 3]);
    assert_eq!(learned.candidate_sets[3], vec![0, 2]);
    assert!(!learned.dag.has_edge(0, 3));
    // Any threshold below the actual change keeps the parent.
    let kept = learn_dag(&m.covariance().unwrap(), &LearnerConfig::with_gamma(2, change / 2.0)).unwrap();
    assert_eq!(kept.dag, *m.dag());
}
