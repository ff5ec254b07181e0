mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use softdd_core::{
    count_vector, enumerate_count_keys, extract_segments, f1, instantiate_all, parse_label,
    Constraint, ConstraintSet, CountKey, LabelId, LabelSchema, ParsedLabel, Template,
};

use common::instance;

/// A random admissible sequence: the decode of a random score table.
fn sequence(max_len: usize) -> impl Strategy<Value = (LabelSchema, Vec<LabelId>)> {
    instance(max_len).prop_map(|inst| {
        let labels = inst.table.decode().unwrap().labels;
        (inst.schema, labels)
    })
}

fn pair(max_len: usize) -> impl Strategy<Value = (LabelSchema, Vec<LabelId>, Vec<LabelId>)> {
    (instance(max_len), any::<u64>()).prop_map(|(inst, seed)| {
        let a = inst.table.decode().unwrap().labels;
        // second sequence of the same length from a shifted table
        let n = inst.schema.len();
        let mut unary = Vec::new();
        for k in 0..inst.table.len() {
            for l in 0..n {
                let h = seed
                    .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    .rotate_left((k * n + l) as u32);
                unary.push((h % 1000) as f64 / 100.0);
            }
        }
        let trans = vec![0.0; n * n];
        let t = softdd_core::ScoreTable::new(
            unary,
            trans,
            std::sync::Arc::new(inst.table.mask().clone()),
        )
        .unwrap();
        let b = t.decode().unwrap().labels;
        (inst.schema, a, b)
    })
}

fn label_text() -> impl Strategy<Value = String> {
    let comp = (prop::bool::ANY, "[a-z]{1,4}")
        .prop_map(|(b, name)| format!("{}-{}", if b { "B" } else { "I" }, name));
    prop_oneof![
        Just("O".to_string()),
        prop::collection::vec(comp, 1..4).prop_map(|c| c.join("/")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn label_round_trip(raw in label_text()) {
        let parsed = parse_label(&raw).unwrap();
        prop_assert_eq!(parsed.to_string(), raw.clone());
        prop_assert_eq!(parse_label(&parsed.to_string()).unwrap(), parsed);
    }

    #[test]
    fn key_round_trip(path in prop::collection::vec("[a-z]{1,5}", 1..4)) {
        let key = CountKey::new(path);
        prop_assert_eq!(key.to_string().parse::<CountKey>().unwrap(), key);
    }

    #[test]
    fn level_zero_counts_match_segments((schema, labels) in sequence(8)) {
        let parsed = schema.parse_ids(&labels).unwrap();
        let segs = extract_segments(&parsed).unwrap();
        let keys = enumerate_count_keys(&schema);
        let counts = count_vector(&parsed, &keys);
        for (key, &n) in keys.iter().zip(&counts) {
            let matching = segs
                .iter()
                .filter(|s| s.level == key.level && s.path == key.path)
                .count();
            prop_assert_eq!(matching as u32, n);
        }
        for s in &segs {
            prop_assert!(s.start < s.end && s.end <= labels.len());
            prop_assert_eq!(s.path.len(), s.level + 1);
        }
    }

    #[test]
    fn counts_are_additive((schema, a, b) in pair(5)) {
        let keys = enumerate_count_keys(&schema);
        let pa = schema.parse_ids(&a).unwrap();
        let pb = schema.parse_ids(&b).unwrap();
        let ca = count_vector(&pa, &keys);
        let cb = count_vector(&pb, &keys);
        // a sequence starting with B (or O) can be appended without
        // changing counts of either part
        let cat: Vec<ParsedLabel> = pa.iter().chain(&pb).cloned().collect();
        let cc = count_vector(&cat, &keys);
        for i in 0..keys.len() {
            prop_assert_eq!(cc[i], ca[i] + cb[i]);
        }
    }

    #[test]
    fn matrix_matches_counts((schema, labels) in sequence(8)) {
        let set = ConstraintSet::new(&schema, instantiate_all(&schema));
        let keys = enumerate_count_keys(&schema);
        let counts = count_vector(&schema.parse_ids(&labels).unwrap(), &keys);
        let by_matrix = set.signed_violations(&labels);
        for (i, c) in set.iter().enumerate() {
            prop_assert_eq!(by_matrix[i], c.activity(&keys, &counts) - c.bound());
            let summed: i64 = labels.iter().map(|l| set.coefficient(i, l.index())).sum();
            prop_assert_eq!(summed - c.bound(), by_matrix[i]);
        }
        let z = set.violations(&labels);
        for (i, c) in set.iter().enumerate() {
            prop_assert_eq!(z[i], c.violation(&keys, &counts));
        }
    }

    #[test]
    fn f1_symmetric((schema, a, b) in pair(6)) {
        let sa = extract_segments(&schema.parse_ids(&a).unwrap()).unwrap();
        let sb = extract_segments(&schema.parse_ids(&b).unwrap()).unwrap();
        let ab = f1(&sa, &sb);
        let ba = f1(&sb, &sa);
        prop_assert_eq!(ab.per_path.len(), ba.per_path.len());
        for (path, c) in &ab.per_path {
            let d = ba.per_path[path];
            prop_assert_eq!(c.precision(), d.recall());
            prop_assert_eq!(c.recall(), d.precision());
            prop_assert_eq!(c.f1(), d.f1());
            prop_assert!(c.matched <= c.gold.min(c.predicted));
        }
        prop_assert_eq!(f1(&sa, &sa).micro().matched as usize, sa.len());
    }
}

#[test]
fn union_has_no_duplicates() {
    for schema in common::schemas() {
        let all = instantiate_all(&schema);
        let ids: BTreeSet<_> = all
            .iter()
            .map(|c| (c.coefficients().clone(), c.bound()))
            .collect();
        assert_eq!(ids.len(), all.len());
    }
}

#[test]
fn at_least_is_stored_negated() {
    let a = CountKey::new(["a"]);
    let b = CountKey::new(["b"]);
    let c =
        Constraint::at_least(Template::PairwiseDiff, [(a.clone(), 1), (b.clone(), -1)], 2).unwrap();
    assert_eq!(c.coefficients()[&a], -1);
    assert_eq!(c.coefficients()[&b], 1);
    assert_eq!(c.bound(), -2);
}

#[test]
fn slack_example() {
    let i = CountKey::new(["i"]);
    let j = CountKey::new(["j"]);
    let c =
        Constraint::at_most(Template::PairwiseDiff, [(i.clone(), 1), (j.clone(), -1)], 0).unwrap();
    assert_eq!(c.violation(&[i, j], &[3, 1]), 2);
}
