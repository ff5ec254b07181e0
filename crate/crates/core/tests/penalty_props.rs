mod common;

use proptest::prelude::*;
use softdd_core::{
    brute_force_map, learn_penalties, learn_penalties_with_counts, ChainModel, Constraint,
    ConstraintSet, Error, FeatureId, FeatureVector, LabelId, LabelSchema, LabeledSequence,
    OracleMode, Penalty, PenaltyLearnerConfig,
};

/// A random model over `f` one-hot features and a dev corpus whose gold is a
/// random admissible sequence (decoded from a second random table).
fn setup() -> impl Strategy<Value = (ChainModel, Vec<LabeledSequence>, ConstraintSet)> {
    (
        common::constrained(4),
        prop::collection::vec(-3.0f64..3.0, 64),
        1..5usize,
    )
        .prop_map(|((inst, set), weights, n_ex)| {
            let schema = inst.schema.clone();
            let n = schema.len();
            let f = 4;
            let mut model = ChainModel::zeros(schema.clone(), f);
            for feat in 0..f {
                for l in 0..n {
                    model.set_unary_weight(FeatureId(feat as u32), l.into(), weights[feat * n + l]);
                }
            }
            let gold = inst.table.decode().unwrap().labels;
            let dev = (0..n_ex)
                .map(|e| LabeledSequence {
                    features: (0..gold.len())
                        .map(|k| {
                            [(FeatureId(((k + e) % f) as u32), 1.0)]
                                .into_iter()
                                .collect::<FeatureVector>()
                        })
                        .collect(),
                    labels: gold.clone(),
                })
                .collect();
            (model, dev, set)
        })
}

fn cfg(rate: f64, initial: f64, averaging: bool) -> PenaltyLearnerConfig {
    PenaltyLearnerConfig {
        epochs: 3,
        learning_rate: rate,
        averaging,
        initial_penalty: initial,
        ..PenaltyLearnerConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn penalties_nonnegative((model, dev, set) in setup(), avg in any::<bool>()) {
        let c = learn_penalties(&dev, &set, &model, &cfg(0.7, 0.0, avg)).unwrap();
        prop_assert_eq!(c.len(), set.len());
        prop_assert!(c.iter().all(|&x| x >= 0.0 && x.is_finite()));
    }

    #[test]
    fn zero_rate_is_identity((model, dev, set) in setup(), init in 0.0f64..3.0) {
        let c = learn_penalties(&dev, &set, &model, &cfg(0.0, init, true)).unwrap();
        prop_assert!(c.iter().all(|&x| x == init));
    }

    #[test]
    fn untouched_constraints_stay_zero((model, dev, set) in setup(), avg in any::<bool>()) {
        let r = learn_penalties_with_counts(&dev, &set, &model, &cfg(0.5, 0.0, avg)).unwrap();
        for i in 0..set.len() {
            if r.predicted_violations[i] == 0 && r.gold_violations[i] == 0 {
                prop_assert_eq!(r.penalties[i], 0.0);
            }
        }
    }

    /// A constraint no admissible sequence of the dev length can violate
    /// never moves from zero.
    #[test]
    fn unviolable_constraints_stay_zero((model, dev, set) in setup()) {
        let schema = model.schema().clone();
        let c = learn_penalties(&dev, &set, &model, &cfg(0.5, 0.0, true)).unwrap();
        let table = model.score_sequence(&dev[0].features).unwrap();
        for (i, con) in set.iter().enumerate() {
            let violated = Constraint::at_least(
                con.template,
                con.coefficients().iter().map(|(k, v)| (k.clone(), *v)),
                con.bound() + 1,
            )
            .unwrap()
            .with_penalty(Penalty::Hard);
            let probe = ConstraintSet::new(&schema, vec![violated]);
            if brute_force_map(&table, &schema, &probe, OracleMode::Hard) == Err(Error::Infeasible) {
                prop_assert_eq!(c[i], 0.0);
            }
        }
    }

    #[test]
    fn deterministic((model, dev, set) in setup(), seed in any::<u64>()) {
        let config = PenaltyLearnerConfig { shuffle_seed: Some(seed), ..cfg(0.3, 0.1, true) };
        let a = learn_penalties(&dev, &set, &model, &config).unwrap();
        let b = learn_penalties(&dev, &set, &model, &config).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// One constraint the prediction violates and gold satisfies, one the other
/// way round.
#[test]
fn update_signs() {
    let s = LabelSchema::induce(["B-a", "B-b"]).unwrap();
    let a = softdd_core::CountKey::new(["a"]);
    let b = softdd_core::CountKey::new(["b"]);
    let set = ConstraintSet::new(
        &s,
        vec![
            softdd_core::Constraint::at_most(softdd_core::Template::Singleton, [(a, 1)], 1)
                .unwrap(),
            softdd_core::Constraint::at_most(softdd_core::Template::Singleton, [(b, 1)], 1)
                .unwrap(),
        ],
    );
    let n = s.len();
    let mut model = ChainModel::zeros(s.clone(), n);
    for l in 0..n {
        model.set_unary_weight(FeatureId(l as u32), l.into(), 1.0);
    }
    let pred = s.ids(&["B-a", "B-a", "B-b"]).unwrap();
    let gold = s.ids(&["B-a", "B-b", "B-b"]).unwrap();
    let ex = LabeledSequence {
        features: pred
            .iter()
            .map(|l: &LabelId| [(FeatureId(l.0), 1.0)].into_iter().collect())
            .collect(),
        labels: gold,
    };
    let c = learn_penalties(
        &[ex],
        &set,
        &model,
        &PenaltyLearnerConfig {
            epochs: 1,
            learning_rate: 0.25,
            averaging: false,
            initial_penalty: 0.1,
            ..PenaltyLearnerConfig::default()
        },
    )
    .unwrap();
    // a: z_pred 1, z_gold 0 -> 0.1 + 0.25; b: z_pred 0, z_gold 1 -> truncated
    assert_eq!(c, vec![0.35, 0.0]);
}
