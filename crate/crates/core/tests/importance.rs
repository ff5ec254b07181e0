use softdd_core::{
    importance_scores, prune, ChainModel, Constraint, ConstraintSet, CountKey, FeatureId,
    FeatureVector, LabelSchema, LabeledSequence, Template,
};

fn schema() -> LabelSchema {
    LabelSchema::induce(["B-a", "B-b"]).unwrap()
}

/// Unary weight 1 from feature `l` to label `l`: decoding copies the input.
fn copy_model(schema: &LabelSchema) -> ChainModel {
    let n = schema.len();
    let mut m = ChainModel::zeros(schema.clone(), n);
    for l in 0..n {
        m.set_unary_weight(FeatureId(l as u32), l.into(), 1.0);
    }
    m
}

fn tags(a: usize, b: usize, len: usize) -> Vec<&'static str> {
    let mut t = vec!["B-a"; a];
    t.extend(vec!["B-b"; b]);
    t.resize(len, "O");
    t
}

/// Gold and predicted `(count a, count b)` per example.
const CORPUS: [((usize, usize), (usize, usize)); 10] = [
    ((2, 1), (2, 0)),
    ((2, 1), (2, 1)),
    ((0, 1), (3, 2)),
    ((0, 1), (2, 2)),
    ((1, 1), (2, 1)),
    ((1, 1), (1, 0)),
    ((1, 1), (1, 0)),
    ((1, 1), (0, 2)),
    ((1, 1), (1, 1)),
    ((1, 1), (0, 0)),
];

fn corpus(schema: &LabelSchema) -> Vec<LabeledSequence> {
    CORPUS
        .iter()
        .map(|&((ga, gb), (pa, pb))| {
            let len = (ga + gb).max(pa + pb).max(1);
            let features = schema
                .ids(&tags(pa, pb, len))
                .unwrap()
                .into_iter()
                .map(|l| {
                    [(FeatureId(l.0), 1.0)]
                        .into_iter()
                        .collect::<FeatureVector>()
                })
                .collect();
            LabeledSequence {
                features,
                labels: schema.ids(&tags(ga, gb, len)).unwrap(),
            }
        })
        .collect()
}

fn constraints(schema: &LabelSchema) -> ConstraintSet {
    let a = || CountKey::new(["a"]);
    let b = || CountKey::new(["b"]);
    let cs = vec![
        Constraint::at_most(Template::Singleton, [(a(), 1)], 1).unwrap(),
        Constraint::at_most(Template::Singleton, [(b(), 1)], 1).unwrap(),
        Constraint::at_most(Template::PairwiseSum, [(a(), 1), (b(), 1)], 10).unwrap(),
        Constraint::at_most(Template::PairwiseDiff, [(a(), 1), (b(), -1)], 0).unwrap(),
        Constraint::at_most(Template::PairwiseDiff, [(b(), 1), (a(), -1)], 0).unwrap(),
    ];
    ConstraintSet::new(schema, cs)
}

#[test]
fn hand_counted_ratios() {
    let s = schema();
    let set = constraints(&s);
    let scores = importance_scores(&set, &corpus(&s), &copy_model(&s)).unwrap();
    // a<=1: 5 predicted / 2 gold; b<=1: 3 / 0; a+b<=10: never;
    // a-b<=0: 6 / 2; b-a<=0: 1 / 2
    assert_eq!(scores, vec![2.5, f64::INFINITY, 0.0, 3.0, 0.5]);

    let kept = prune(&set, &scores, 2.75).unwrap();
    assert_eq!(
        kept.constraints(),
        &[set.constraints()[1].clone(), set.constraints()[3].clone()]
    );
    assert_eq!(prune(&set, &scores, 0.0).unwrap().len(), 5);
    assert!(prune(&set, &scores, f64::INFINITY).unwrap().is_empty());
}

#[test]
fn prune_example() {
    let s = LabelSchema::induce(["B-a", "B-b", "B-c"]).unwrap();
    let set = ConstraintSet::new(&s, softdd_core::instantiate_singleton(&s));
    let kept = prune(&set, &[3.0, 2.5, f64::INFINITY], 2.75).unwrap();
    assert_eq!(
        kept.constraints(),
        &[set.constraints()[0].clone(), set.constraints()[2].clone()]
    );
    assert!(prune(&set, &[1.0, 2.0], 0.0).is_err());
}
