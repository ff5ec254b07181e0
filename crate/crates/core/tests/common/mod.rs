#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use softdd_core::{
    instantiate_all, ConstraintSet, LabelSchema, Penalty, ScoreTable, TransitionMask,
};

/// Small schemas with 3 to 5 labels, flat and nested.
pub fn schemas() -> Vec<LabelSchema> {
    [
        vec!["B-a", "I-a"],
        vec!["B-a", "I-a", "B-b"],
        vec!["B-a", "I-a", "B-b", "I-b"],
        vec!["B-a/B-x", "I-a/I-x", "I-a/B-x"],
    ]
    .into_iter()
    .map(|l| LabelSchema::induce(l).unwrap())
    .collect()
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub schema: LabelSchema,
    pub table: ScoreTable,
}

pub fn instance(max_len: usize) -> impl Strategy<Value = Instance> {
    (0..schemas().len(), 1..=max_len).prop_flat_map(|(s, len)| {
        let schema = schemas().swap_remove(s);
        let n = schema.len();
        (
            Just(schema),
            prop::collection::vec(-5.0f64..5.0, len * n),
            prop::collection::vec(-2.0f64..2.0, n * n),
        )
            .prop_map(|(schema, unary, transition)| {
                let mask = Arc::new(TransitionMask::from_schema(&schema));
                let table = ScoreTable::new(unary, transition, mask).unwrap();
                Instance { schema, table }
            })
    })
}

/// Up to four constraints drawn from the full template union, with penalties
/// in `[0, 5]`.
pub fn constrained(max_len: usize) -> impl Strategy<Value = (Instance, ConstraintSet)> {
    instance(max_len).prop_flat_map(|inst| {
        let all = instantiate_all(&inst.schema);
        let n = all.len();
        (
            Just(inst),
            Just(all),
            prop::collection::vec((0..n, 0.0f64..5.0), 0..=4),
        )
            .prop_map(|(inst, all, picks)| {
                let chosen = picks
                    .into_iter()
                    .map(|(i, c)| all[i].clone().with_penalty(Penalty::Soft(c)))
                    .collect();
                let set = ConstraintSet::new(&inst.schema, chosen);
                (inst, set)
            })
    })
}
