mod common;

use proptest::prelude::*;
use softdd_core::{
    brute_force_map, viterbi, ConstraintSet, LabelId, OracleMode, ScoreTable, UnaryOffset,
};

use common::{instance, Instance};

fn shifted(table: &ScoreTable, kappa: f64) -> ScoreTable {
    table
        .with_folded_offset(&UnaryOffset(vec![kappa; table.num_labels()]))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_exhaustive_search(inst in instance(6)) {
        let Instance { schema, table } = inst;
        let v = table.decode().unwrap();
        let o = brute_force_map(&table, &schema, &ConstraintSet::empty(&schema), OracleMode::Soft)
            .unwrap();
        prop_assert!((v.objective - o.objective).abs() <= 1e-9);
        prop_assert!((table.score(&v.labels) - v.objective).abs() <= 1e-9);
    }

    #[test]
    fn output_is_bio_valid(inst in instance(6)) {
        let v = inst.table.decode().unwrap();
        prop_assert_eq!(inst.schema.first_invalid_transition(&v.labels).unwrap(), None);
    }

    #[test]
    fn uniform_shift(inst in instance(6), kappa in -3.0f64..3.0) {
        let a = inst.table.decode().unwrap();
        let b = shifted(&inst.table, kappa).decode().unwrap();
        prop_assert_eq!(&a.labels, &b.labels);
        let expected = a.objective + inst.table.len() as f64 * kappa;
        prop_assert!((b.objective - expected).abs() <= 1e-9);
    }

    #[test]
    fn offset_folding(inst in instance(6), raw in prop::collection::vec(-4.0f64..4.0, 5)) {
        let offset = UnaryOffset(raw[..inst.table.num_labels()].to_vec());
        let a = viterbi(&inst.table, &offset).unwrap();
        let b = inst.table.with_folded_offset(&offset).unwrap().decode().unwrap();
        prop_assert_eq!(&a.labels, &b.labels);
        prop_assert!((a.objective - b.objective).abs() <= 1e-9);
    }

    #[test]
    fn large_negative_offset_avoids_label(inst in instance(5)) {
        let Instance { schema, table } = inst;
        let unconstrained = table.decode().unwrap();
        let avoid = unconstrained.labels[0];
        prop_assume!(avoid != schema.outside());
        let mut raw = vec![0.0; table.num_labels()];
        raw[avoid.index()] = -1e6;
        let offset = UnaryOffset(raw);
        let d = viterbi(&table, &offset).unwrap();
        prop_assert!(!d.labels.contains(&avoid));
        let folded = table.with_folded_offset(&offset).unwrap();
        let o = brute_force_map(&folded, &schema, &ConstraintSet::empty(&schema), OracleMode::Soft)
            .unwrap();
        prop_assert!((d.objective - o.objective).abs() <= 1e-6);
    }
}

#[test]
fn three_by_three_exhaustive() {
    use rand::{Rng, SeedableRng};
    let schema = softdd_core::LabelSchema::induce(["B-a", "I-a"]).unwrap();
    let mask = std::sync::Arc::new(softdd_core::TransitionMask::from_schema(&schema));
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for _ in 0..200 {
        let unary: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let trans: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = ScoreTable::new(unary, trans, mask.clone()).unwrap();
        // enumerate all 27 sequences by hand
        let mut best = f64::NEG_INFINITY;
        for a in 0..3u32 {
            for b in 0..3u32 {
                for c in 0..3u32 {
                    let y = [LabelId(a), LabelId(b), LabelId(c)];
                    if t.mask().admits(&y) {
                        best = best.max(t.score(&y));
                    }
                }
            }
        }
        assert!((t.decode().unwrap().objective - best).abs() < 1e-12);
    }
}
