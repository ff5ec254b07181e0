//! Global count constraints.
//!
//! Every constraint is stored as `Σ coef(key)·count(key) <= bound`; `>=`
//! templates are negated on construction. A [`ConstraintSet`] also carries
//! the per-label coefficient matrix `A[i][label]`, the contribution one token
//! with that label makes to constraint `i`, so that `a_iᵀy` is a sum over
//! positions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::chain::{ChainModel, LabeledSequence};
use crate::error::{Error, Result};
use crate::schema::{enumerate_count_keys, CountKey, LabelId, LabelSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Template {
    Singleton,
    PairwiseSum,
    PairwiseDiff,
    Hierarchical,
}

impl Template {
    pub fn as_str(self) -> &'static str {
        match self {
            Template::Singleton => "singleton",
            Template::PairwiseSum => "pairwise-sum",
            Template::PairwiseDiff => "pairwise-diff",
            Template::Hierarchical => "hierarchical",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Template {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        Ok(match s {
            "singleton" => Template::Singleton,
            "pairwise-sum" => Template::PairwiseSum,
            "pairwise-diff" => Template::PairwiseDiff,
            "hierarchical" => Template::Hierarchical,
            _ => return Err(()),
        })
    }
}

/// Per-unit violation cost. `Hard` constraints may not be violated at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Soft(f64),
    Hard,
}

impl Penalty {
    /// Upper end of the multiplier box.
    pub fn cap(self) -> f64 {
        match self {
            Penalty::Soft(c) => c,
            Penalty::Hard => f64::INFINITY,
        }
    }

    pub fn is_hard(self) -> bool {
        matches!(self, Penalty::Hard)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    coefficients: BTreeMap<CountKey, i64>,
    bound: i64,
    pub penalty: Penalty,
    pub template: Template,
}

impl Constraint {
    /// `Σ coef·count <= bound`. Zero coefficients are dropped.
    pub fn at_most(
        template: Template,
        coefficients: impl IntoIterator<Item = (CountKey, i64)>,
        bound: i64,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (key, coef) in coefficients {
            *map.entry(key).or_insert(0) += coef;
        }
        map.retain(|_, c| *c != 0);
        if map.is_empty() {
            return Err(Error::EmptyConstraint);
        }
        Ok(Constraint {
            coefficients: map,
            bound,
            penalty: Penalty::Soft(0.0),
            template,
        })
    }

    /// `Σ coef·count >= bound`, stored negated.
    pub fn at_least(
        template: Template,
        coefficients: impl IntoIterator<Item = (CountKey, i64)>,
        bound: i64,
    ) -> Result<Self> {
        Self::at_most(
            template,
            coefficients.into_iter().map(|(k, c)| (k, -c)),
            -bound,
        )
    }

    pub fn coefficients(&self) -> &BTreeMap<CountKey, i64> {
        &self.coefficients
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Self {
        self.penalty = penalty;
        self
    }

    /// `Σ coef·count` for counts aligned with `keys`; absent keys count 0.
    pub fn activity(&self, keys: &[CountKey], counts: &[u32]) -> i64 {
        self.coefficients
            .iter()
            .map(|(key, coef)| {
                keys.iter()
                    .position(|k| k == key)
                    .map_or(0, |i| coef * i64::from(counts[i]))
            })
            .sum()
    }

    /// Slack `z = max(0, Σ coef·count − bound)`.
    pub fn violation(&self, keys: &[CountKey], counts: &[u32]) -> u64 {
        (self.activity(keys, counts) - self.bound).max(0) as u64
    }

    fn identity(&self) -> (Vec<(CountKey, i64)>, i64) {
        (
            self.coefficients
                .iter()
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
            self.bound,
        )
    }
}

/// Keeps the first of every group of constraints sharing `(coefficients, bound)`.
pub fn dedup(constraints: Vec<Constraint>) -> Vec<Constraint> {
    let mut seen = BTreeSet::new();
    constraints
        .into_iter()
        .filter(|c| seen.insert(c.identity()))
        .collect()
}

/// An ordered, deduplicated list of constraints over one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
    num_labels: usize,
    matrix: Vec<i64>,
}

impl ConstraintSet {
    pub fn new(schema: &LabelSchema, constraints: Vec<Constraint>) -> Self {
        let constraints = dedup(constraints);
        let n = schema.len();
        let mut matrix = vec![0i64; constraints.len() * n];
        for (i, c) in constraints.iter().enumerate() {
            for (l, label) in schema.all_parsed().iter().enumerate() {
                matrix[i * n + l] = c
                    .coefficients
                    .iter()
                    .filter(|(key, _)| label.begins(key))
                    .map(|(_, coef)| coef)
                    .sum();
            }
        }
        ConstraintSet {
            constraints,
            num_labels: n,
            matrix,
        }
    }

    pub fn empty(schema: &LabelSchema) -> Self {
        Self::new(schema, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Constraint> {
        self.constraints.iter()
    }

    /// `A[i][label]`.
    #[inline]
    pub fn coefficient(&self, constraint: usize, label: usize) -> i64 {
        self.matrix[constraint * self.num_labels + label]
    }

    pub fn row(&self, constraint: usize) -> &[i64] {
        &self.matrix[constraint * self.num_labels..(constraint + 1) * self.num_labels]
    }

    pub fn penalties(&self) -> Vec<Penalty> {
        self.constraints.iter().map(|c| c.penalty).collect()
    }

    pub fn with_penalties(&self, penalties: &[Penalty]) -> Result<Self> {
        if penalties.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: penalties.len(),
            });
        }
        let mut out = self.clone();
        for (c, p) in out.constraints.iter_mut().zip(penalties) {
            c.penalty = *p;
        }
        Ok(out)
    }

    pub fn with_soft_penalties(&self, penalties: &[f64]) -> Result<Self> {
        let p: Vec<Penalty> = penalties.iter().map(|&c| Penalty::Soft(c)).collect();
        self.with_penalties(&p)
    }

    /// Subset by index, keeping the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let n = self.num_labels;
        let mut matrix = Vec::with_capacity(indices.len() * n);
        for &i in indices {
            matrix.extend_from_slice(self.row(i));
        }
        ConstraintSet {
            constraints: indices
                .iter()
                .map(|&i| self.constraints[i].clone())
                .collect(),
            num_labels: n,
            matrix,
        }
    }

    /// `a_iᵀy − b_i` for every constraint, summed over positions.
    pub fn signed_violations(&self, labels: &[LabelId]) -> Vec<i64> {
        (0..self.len())
            .map(|i| {
                let row = self.row(i);
                labels.iter().map(|l| row[l.index()]).sum::<i64>() - self.constraints[i].bound
            })
            .collect()
    }

    /// Slack vector `z`.
    pub fn violations(&self, labels: &[LabelId]) -> Vec<u64> {
        self.signed_violations(labels)
            .into_iter()
            .map(|v| v.max(0) as u64)
            .collect()
    }
}

/// `count(k) <= 1` for every key.
pub fn instantiate_singleton(schema: &LabelSchema) -> Vec<Constraint> {
    enumerate_count_keys(schema)
        .into_iter()
        .map(|k| Constraint::at_most(Template::Singleton, [(k, 1)], 1).expect("non-empty"))
        .collect()
}

pub const PAIRWISE_BOUNDS: [i64; 4] = [0, 1, 2, 3];

/// Sum and difference bounds over every unordered key pair, both directions
/// of inequality and both difference orientations.
pub fn instantiate_pairwise(schema: &LabelSchema) -> Vec<Constraint> {
    let keys = enumerate_count_keys(schema);
    let mut out = Vec::new();
    for (a, i) in keys.iter().enumerate() {
        for j in &keys[a + 1..] {
            for k in PAIRWISE_BOUNDS {
                let sum = [(i.clone(), 1), (j.clone(), 1)];
                out.push(Constraint::at_most(Template::PairwiseSum, sum.clone(), k));
                out.push(Constraint::at_least(Template::PairwiseSum, sum, k));
                for (x, y) in [(i, j), (j, i)] {
                    let diff = [(x.clone(), 1), (y.clone(), -1)];
                    out.push(Constraint::at_most(Template::PairwiseDiff, diff.clone(), k));
                    out.push(Constraint::at_least(Template::PairwiseDiff, diff, k));
                }
            }
        }
    }
    dedup(out.into_iter().map(|c| c.expect("distinct keys")).collect())
}

fn related(a: &CountKey, b: &CountKey) -> bool {
    a.level != b.level && (a.is_ancestor_of(b) || b.is_ancestor_of(a) || a.name() == b.name())
}

/// Count equality, as two inequalities, between keys on different levels
/// whose paths are related (ancestor/descendant, or same element name).
pub fn instantiate_hierarchical(schema: &LabelSchema) -> Vec<Constraint> {
    let keys = enumerate_count_keys(schema);
    let mut out = Vec::new();
    for i in &keys {
        for j in &keys {
            if !related(i, j) {
                continue;
            }
            let diff = [(i.clone(), 1), (j.clone(), -1)];
            out.push(Constraint::at_most(Template::Hierarchical, diff.clone(), 0));
            out.push(Constraint::at_least(Template::Hierarchical, diff, 0));
        }
    }
    dedup(out.into_iter().map(|c| c.expect("distinct keys")).collect())
}

/// Union of all families. Earlier families win ties in deduplication, so a
/// hierarchical equality keeps its tag even though the pairwise difference
/// template generates the same inequality.
pub fn instantiate_all(schema: &LabelSchema) -> Vec<Constraint> {
    let mut all = instantiate_singleton(schema);
    all.extend(instantiate_hierarchical(schema));
    all.extend(instantiate_pairwise(schema));
    dedup(all)
}

/// Ratio of predicted to gold violation frequency, from explicit label
/// sequences. `0/0` scores 0 and `n/0` scores `+inf`.
pub fn importance_from_predictions(
    constraints: &ConstraintSet,
    gold: &[&[LabelId]],
    predicted: &[&[LabelId]],
) -> Result<Vec<f64>> {
    if gold.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: gold.len(),
            found: predicted.len(),
        });
    }
    let mut pred_count = vec![0u64; constraints.len()];
    let mut gold_count = vec![0u64; constraints.len()];
    for (g, p) in gold.iter().zip(predicted) {
        for (i, v) in constraints.signed_violations(g).into_iter().enumerate() {
            gold_count[i] += u64::from(v > 0);
        }
        for (i, v) in constraints.signed_violations(p).into_iter().enumerate() {
            pred_count[i] += u64::from(v > 0);
        }
    }
    Ok(pred_count
        .into_iter()
        .zip(gold_count)
        .map(|(p, g)| match (p, g) {
            (0, 0) => 0.0,
            (_, 0) => f64::INFINITY,
            (p, g) => p as f64 / g as f64,
        })
        .collect())
}

/// Importance of each constraint on a labeled corpus, with predictions from
/// unconstrained decoding under `base`.
pub fn importance_scores(
    constraints: &ConstraintSet,
    gold: &[LabeledSequence],
    base: &ChainModel,
) -> Result<Vec<f64>> {
    let predicted = gold
        .iter()
        .map(|ex| Ok(base.score_sequence(&ex.features)?.decode()?.labels))
        .collect::<Result<Vec<_>>>()?;
    let g: Vec<&[LabelId]> = gold.iter().map(|ex| ex.labels.as_slice()).collect();
    let p: Vec<&[LabelId]> = predicted.iter().map(Vec::as_slice).collect();
    importance_from_predictions(constraints, &g, &p)
}

/// Keeps constraints whose score is at least `cutoff`, in order. An infinite
/// cutoff keeps nothing.
pub fn prune(constraints: &ConstraintSet, scores: &[f64], cutoff: f64) -> Result<ConstraintSet> {
    if scores.len() != constraints.len() {
        return Err(Error::LengthMismatch {
            expected: constraints.len(),
            found: scores.len(),
        });
    }
    let keep: Vec<usize> = if cutoff == f64::INFINITY {
        Vec::new()
    } else {
        (0..scores.len()).filter(|&i| scores[i] >= cutoff).collect()
    };
    Ok(constraints.select(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(path: &[&str]) -> CountKey {
        CountKey::new(path.iter().copied())
    }

    #[test]
    fn singleton_family() {
        let s = LabelSchema::induce(["B-title", "I-title", "B-year"]).unwrap();
        let cs = instantiate_singleton(&s);
        assert_eq!(cs.len(), 2);
        for (c, name) in cs.iter().zip(["title", "year"]) {
            assert_eq!(c.bound(), 1);
            assert_eq!(c.coefficients().get(&key(&[name])), Some(&1));
        }
        assert!(instantiate_singleton(&LabelSchema::induce(["O"]).unwrap()).is_empty());
    }

    #[test]
    fn pairwise_two_keys() {
        let s = LabelSchema::induce(["B-a", "B-b"]).unwrap();
        let cs = instantiate_pairwise(&s);
        let sums = cs
            .iter()
            .filter(|c| c.template == Template::PairwiseSum)
            .count();
        let diffs = cs
            .iter()
            .filter(|c| c.template == Template::PairwiseDiff)
            .count();
        assert_eq!(sums, 8);
        // 16 before dedup; the k = 0 cases of `a−b >= 0` / `b−a <= 0` and
        // `a−b <= 0` / `b−a >= 0` coincide.
        assert_eq!(diffs, 14);
        let neither = cs
            .iter()
            .find(|c| c.template == Template::PairwiseSum && c.bound() == 0)
            .unwrap();
        assert_eq!(
            neither.coefficients().values().copied().collect::<Vec<_>>(),
            vec![1, 1]
        );
    }

    #[test]
    fn pairwise_needs_two_keys() {
        let s = LabelSchema::induce(["B-a", "I-a"]).unwrap();
        assert!(instantiate_pairwise(&s).is_empty());
    }

    #[test]
    fn hierarchical_person_first() {
        let s = LabelSchema::induce(["B-authors/B-person/B-first", "I-authors/I-person/B-last"])
            .unwrap();
        let cs = instantiate_hierarchical(&s);
        let person = key(&["authors", "person"]);
        let first = key(&["authors", "person", "first"]);
        let has = |a: &CountKey, b: &CountKey| {
            cs.iter().any(|c| {
                c.bound() == 0
                    && c.coefficients().get(a) == Some(&1)
                    && c.coefficients().get(b) == Some(&-1)
                    && c.coefficients().len() == 2
            })
        };
        assert!(has(&person, &first));
        assert!(has(&first, &person));
    }

    #[test]
    fn hierarchical_flat_is_empty() {
        let s = LabelSchema::induce(["B-a", "B-b", "I-b"]).unwrap();
        assert!(instantiate_hierarchical(&s).is_empty());
    }

    #[test]
    fn hierarchical_three_level_chain() {
        let s = LabelSchema::induce(["B-a/B-x/B-u"]).unwrap();
        assert_eq!(instantiate_hierarchical(&s).len(), 6);
    }

    #[test]
    fn at_least_is_negated() {
        let c = Constraint::at_least(
            Template::PairwiseSum,
            [(key(&["a"]), 1), (key(&["b"]), 2)],
            3,
        )
        .unwrap();
        assert_eq!(c.bound(), -3);
        assert_eq!(c.coefficients()[&key(&["a"])], -1);
        assert_eq!(c.coefficients()[&key(&["b"])], -2);
    }

    #[test]
    fn violation_values() {
        let keys = vec![key(&["i"]), key(&["j"])];
        let single = Constraint::at_most(Template::Singleton, [(keys[0].clone(), 1)], 1).unwrap();
        assert_eq!(single.violation(&keys, &[2, 0]), 1);
        assert_eq!(single.violation(&keys, &[1, 5]), 0);
        let diff = Constraint::at_most(
            Template::PairwiseDiff,
            [(keys[0].clone(), 1), (keys[1].clone(), -1)],
            0,
        )
        .unwrap();
        assert_eq!(diff.violation(&keys, &[3, 1]), 2);
    }

    #[test]
    fn empty_constraint_rejected() {
        assert_eq!(
            Constraint::at_most(Template::Singleton, [(key(&["a"]), 0)], 1),
            Err(Error::EmptyConstraint)
        );
    }

    #[test]
    fn matrix_counts_begin_prefixes() {
        let s = LabelSchema::induce(["B-a/B-x", "I-a/B-x", "I-a/I-x"]).unwrap();
        let set = ConstraintSet::new(&s, instantiate_hierarchical(&s));
        // a − x <= 0
        let i = set
            .iter()
            .position(|c| c.coefficients().get(&key(&["a"])) == Some(&1))
            .unwrap();
        let row = |raw: &str| set.coefficient(i, s.id(raw).unwrap().index());
        assert_eq!(row("B-a/B-x"), 0);
        assert_eq!(row("I-a/B-x"), -1);
        assert_eq!(row("I-a/I-x"), 0);
        assert_eq!(row("O"), 0);
        let y = s.ids(&["B-a/B-x", "I-a/B-x", "I-a/I-x"]).unwrap();
        assert_eq!(set.signed_violations(&y)[i], -1);
    }

    #[test]
    fn union_keeps_hierarchical_tags() {
        let s = LabelSchema::induce(["B-a/B-x", "I-a/I-x", "B-b"]).unwrap();
        let all = instantiate_all(&s);
        let h = all
            .iter()
            .filter(|c| c.template == Template::Hierarchical)
            .count();
        assert_eq!(h, instantiate_hierarchical(&s).len());
        assert_eq!(dedup(all.clone()).len(), all.len());
    }

    #[test]
    fn importance_policies() {
        let s = LabelSchema::induce(["B-a", "I-a"]).unwrap();
        let set = ConstraintSet::new(&s, instantiate_singleton(&s));
        let one = s.ids(&["B-a"]).unwrap();
        let two = s.ids(&["B-a", "B-a"]).unwrap();
        let scores = importance_from_predictions(&set, &[&one, &one], &[&two, &one]).unwrap();
        assert_eq!(scores, vec![f64::INFINITY]);
        let scores = importance_from_predictions(&set, &[&one], &[&one]).unwrap();
        assert_eq!(scores, vec![0.0]);
    }

    #[test]
    fn prune_cutoffs() {
        let s = LabelSchema::induce(["B-a", "B-b", "B-c"]).unwrap();
        let set = ConstraintSet::new(&s, instantiate_singleton(&s));
        let scores = [3.0, 2.5, f64::INFINITY];
        let kept = prune(&set, &scores, 2.75).unwrap();
        assert_eq!(
            kept.constraints(),
            &[set.constraints()[0].clone(), set.constraints()[2].clone()]
        );
        assert_eq!(prune(&set, &[0.0, 0.0, 1.0], 0.0).unwrap().len(), 3);
        assert!(prune(&set, &[1.0, 2.0, 2.7], 2.75).unwrap().is_empty());
        assert!(prune(&set, &scores, f64::INFINITY).unwrap().is_empty());
        assert!(matches!(
            prune(&set, &[1.0], 0.0),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
