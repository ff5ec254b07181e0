//! Exhaustive constrained MAP for small instances.
//!
//! Deliberately shares nothing with the decoding path: sequences are
//! enumerated directly, validity comes from [`validate_transition`] on parsed
//! labels rather than the precomputed mask, and constraint values from
//! [`count_vector`] rather than the per-label coefficient matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::chain::ScoreTable;
use crate::constraints::{ConstraintSet, Penalty};
use crate::error::{Error, Result};
use crate::schema::{
    count_vector, enumerate_count_keys, validate_transition, LabelId, LabelSchema,
};

pub const ENUMERATION_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Every constraint must hold.
    Hard,
    /// Maximize `w·y − Σ c_i max(0, a_iᵀy − b_i)`; `Hard` penalties must hold.
    Soft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub labels: Vec<LabelId>,
    pub objective: f64,
}

/// Best admissible sequence; ties go to the lexicographically smallest.
pub fn brute_force_map(
    scores: &ScoreTable,
    schema: &LabelSchema,
    constraints: &ConstraintSet,
    mode: OracleMode,
) -> Result<OracleSolution> {
    let n = schema.len();
    let t_len = scores.len();
    if scores.num_labels() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: scores.num_labels(),
        });
    }
    match (n as u64).checked_pow(t_len as u32) {
        Some(total) if total <= ENUMERATION_BOUND => {}
        _ => {
            return Err(Error::EnumerationBound {
                bound: ENUMERATION_BOUND,
            })
        }
    }
    let keys = enumerate_count_keys(schema);
    let parsed = schema.all_parsed();

    let mut digits = vec![0usize; t_len];
    let mut best: Option<OracleSolution> = None;
    loop {
        let admissible = (0..t_len).all(|k| {
            let prev = (k > 0).then(|| &parsed[digits[k - 1]]);
            validate_transition(prev, &parsed[digits[k]])
        });
        if admissible {
            let mut objective = 0.0;
            for k in 0..t_len {
                objective += scores.unary(k, digits[k]);
                if k > 0 {
                    objective += scores.transition(digits[k - 1], digits[k]);
                }
            }
            let labels: Vec<_> = digits.iter().map(|&d| parsed[d].clone()).collect();
            let counts = count_vector(&labels, &keys);
            let mut feasible = true;
            for c in constraints.iter() {
                let z = c.violation(&keys, &counts);
                if z == 0 {
                    continue;
                }
                match (mode, c.penalty) {
                    (OracleMode::Soft, Penalty::Soft(cost)) => objective -= cost * z as f64,
                    _ => feasible = false,
                }
            }
            if feasible && best.as_ref().is_none_or(|b| objective > b.objective) {
                best = Some(OracleSolution {
                    labels: digits.iter().map(|&d| LabelId::from(d)).collect(),
                    objective,
                });
            }
        }
        // odometer, last position fastest, so enumeration is lexicographic
        let mut k = t_len;
        loop {
            if k == 0 {
                return best.ok_or(Error::Infeasible);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < n {
                break;
            }
            digits[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::TransitionMask;
    use crate::constraints::{instantiate_singleton, Constraint, Template};
    use crate::schema::CountKey;
    use alloc::sync::Arc;

    fn table(schema: &LabelSchema, unary: Vec<f64>) -> ScoreTable {
        let n = schema.len();
        ScoreTable::new(
            unary,
            vec![0.0; n * n],
            Arc::new(TransitionMask::from_schema(schema)),
        )
        .unwrap()
    }

    #[test]
    fn unconstrained_matches_viterbi() {
        let schema = LabelSchema::induce(["B-a", "I-a"]).unwrap();
        let t = table(&schema, vec![0.0, 1.0, 3.0, 0.5, 0.2, 0.9]);
        let o = brute_force_map(
            &t,
            &schema,
            &ConstraintSet::empty(&schema),
            OracleMode::Hard,
        )
        .unwrap();
        let v = t.decode().unwrap();
        assert_eq!(o.objective, v.objective);
        assert_eq!(o.labels, v.labels);
    }

    #[test]
    fn hard_infeasible() {
        let schema = LabelSchema::induce(["B-a"]).unwrap();
        let never =
            Constraint::at_most(Template::Singleton, [(CountKey::new(["a"]), 1)], -1).unwrap();
        let set = ConstraintSet::new(&schema, vec![never]);
        let t = table(&schema, vec![0.0, 1.0]);
        assert_eq!(
            brute_force_map(&t, &schema, &set, OracleMode::Hard),
            Err(Error::Infeasible)
        );
        // soft with zero cost simply ignores it
        let o = brute_force_map(&t, &schema, &set, OracleMode::Soft).unwrap();
        assert_eq!(o.objective, 1.0);
    }

    #[test]
    fn soft_penalty_applied() {
        let schema = LabelSchema::induce(["B-a", "I-a"]).unwrap();
        let ba = schema.id("B-a").unwrap().index();
        let mut unary = vec![0.0; 2 * schema.len()];
        unary[ba] = 2.0;
        unary[schema.len() + ba] = 2.0;
        let t = table(&schema, unary);
        let set = ConstraintSet::new(&schema, instantiate_singleton(&schema))
            .with_soft_penalties(&[1.5])
            .unwrap();
        let o = brute_force_map(&t, &schema, &set, OracleMode::Soft).unwrap();
        assert_eq!(o.objective, 2.5);
        let o = brute_force_map(&t, &schema, &set, OracleMode::Hard).unwrap();
        assert_eq!(o.objective, 2.0);
    }

    #[test]
    fn enumeration_bound() {
        let schema =
            LabelSchema::induce(["B-a", "I-a", "B-b", "I-b", "B-c", "I-c", "B-d"]).unwrap();
        let t = table(&schema, vec![0.0; 8 * 8]);
        assert!(matches!(
            brute_force_map(
                &t,
                &schema,
                &ConstraintSet::empty(&schema),
                OracleMode::Soft
            ),
            Err(Error::EnumerationBound { .. })
        ));
    }
}
