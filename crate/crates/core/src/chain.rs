//! Linear-chain base model and exact MAP decoding.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::schema::{validate_transition, LabelId, LabelSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureId(pub u32);

impl FeatureId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Sparse feature activations of one token.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(FeatureId, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, id: FeatureId, value: f64) {
        self.entries.push((id, value));
    }

    pub fn entries(&self) -> &[(FeatureId, f64)] {
        &self.entries
    }
}

impl FromIterator<(FeatureId, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (FeatureId, f64)>>(iter: I) -> Self {
        FeatureVector {
            entries: iter.into_iter().collect(),
        }
    }
}

/// A token sequence with its gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub features: Vec<FeatureVector>,
    pub labels: Vec<LabelId>,
}

/// Allowed label bigrams, derived from BIO validity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMask {
    num_labels: usize,
    allowed: Vec<bool>,
    start: Vec<bool>,
}

impl TransitionMask {
    pub fn from_schema(schema: &LabelSchema) -> Self {
        let parsed = schema.all_parsed();
        let n = parsed.len();
        let mut allowed = vec![false; n * n];
        for (p, prev) in parsed.iter().enumerate() {
            for (q, next) in parsed.iter().enumerate() {
                allowed[p * n + q] = validate_transition(Some(prev), next);
            }
        }
        let start = parsed
            .iter()
            .map(|l| validate_transition(None, l))
            .collect();
        TransitionMask {
            num_labels: n,
            allowed,
            start,
        }
    }

    /// Mask allowing every transition; used for unconstrained toy tables.
    pub fn permissive(num_labels: usize) -> Self {
        TransitionMask {
            num_labels,
            allowed: vec![true; num_labels * num_labels],
            start: vec![true; num_labels],
        }
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    #[inline]
    pub fn allows(&self, prev: usize, next: usize) -> bool {
        self.allowed[prev * self.num_labels + next]
    }

    #[inline]
    pub fn allows_start(&self, label: usize) -> bool {
        self.start[label]
    }

    /// True when the whole sequence is admissible.
    pub fn admits(&self, labels: &[LabelId]) -> bool {
        let mut prev: Option<usize> = None;
        for l in labels {
            let l = l.index();
            if l >= self.num_labels {
                return false;
            }
            let ok = match prev {
                None => self.allows_start(l),
                Some(p) => self.allows(p, l),
            };
            if !ok {
                return false;
            }
            prev = Some(l);
        }
        true
    }
}

/// Per-label additive adjustment applied at every position.
#[derive(Debug, Clone, PartialEq)]
pub struct UnaryOffset(pub Vec<f64>);

impl UnaryOffset {
    pub fn zeros(num_labels: usize) -> Self {
        UnaryOffset(vec![0.0; num_labels])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Factor scores of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    len: usize,
    num_labels: usize,
    unary: Vec<f64>,
    transition: Vec<f64>,
    mask: Arc<TransitionMask>,
}

impl ScoreTable {
    /// `unary` is row-major `len x L`, `transition` is `L x L` indexed
    /// `[prev * L + next]`.
    pub fn new(unary: Vec<f64>, transition: Vec<f64>, mask: Arc<TransitionMask>) -> Result<Self> {
        let num_labels = mask.num_labels();
        if num_labels == 0 || unary.is_empty() {
            return Err(Error::EmptySequence);
        }
        if !unary.len().is_multiple_of(num_labels) {
            return Err(Error::LengthMismatch {
                expected: num_labels * (unary.len() / num_labels + 1),
                found: unary.len(),
            });
        }
        if transition.len() != num_labels * num_labels {
            return Err(Error::LengthMismatch {
                expected: num_labels * num_labels,
                found: transition.len(),
            });
        }
        if !unary.iter().chain(&transition).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("score table"));
        }
        Ok(ScoreTable {
            len: unary.len() / num_labels,
            num_labels,
            unary,
            transition,
            mask,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    #[inline]
    pub fn unary(&self, pos: usize, label: usize) -> f64 {
        self.unary[pos * self.num_labels + label]
    }

    #[inline]
    pub fn transition(&self, prev: usize, next: usize) -> f64 {
        self.transition[prev * self.num_labels + next]
    }

    pub fn mask(&self) -> &TransitionMask {
        &self.mask
    }

    /// Copy with `offset` folded into every unary row.
    pub fn with_folded_offset(&self, offset: &UnaryOffset) -> Result<Self> {
        check_offset(self, offset)?;
        let mut unary = self.unary.clone();
        for row in unary.chunks_mut(self.num_labels) {
            for (u, o) in row.iter_mut().zip(&offset.0) {
                *u += o;
            }
        }
        ScoreTable::new(unary, self.transition.clone(), Arc::clone(&self.mask))
    }

    /// Base score `w·y` of a label sequence (mask is not checked).
    pub fn score(&self, labels: &[LabelId]) -> f64 {
        let mut total = 0.0;
        for (k, l) in labels.iter().enumerate() {
            total += self.unary(k, l.index());
            if k > 0 {
                total += self.transition(labels[k - 1].index(), l.index());
            }
        }
        total
    }

    /// Unconstrained MAP.
    pub fn decode(&self) -> Result<Decoded> {
        viterbi(self, &UnaryOffset::zeros(self.num_labels))
    }
}

fn check_offset(scores: &ScoreTable, offset: &UnaryOffset) -> Result<()> {
    if offset.0.len() != scores.num_labels {
        return Err(Error::LengthMismatch {
            expected: scores.num_labels,
            found: offset.0.len(),
        });
    }
    if !offset.0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("unary offset"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub labels: Vec<LabelId>,
    pub objective: f64,
}

/// Masked Viterbi. Ties go to the lower label id, both at each back-pointer
/// and at the final position.
pub fn viterbi(scores: &ScoreTable, offset: &UnaryOffset) -> Result<Decoded> {
    check_offset(scores, offset)?;
    let n = scores.num_labels;
    let t_len = scores.len;
    let off = &offset.0;

    // best[l] is None when no admissible prefix ends in l
    let mut best: Vec<Option<f64>> = (0..n)
        .map(|l| {
            scores
                .mask
                .allows_start(l)
                .then(|| scores.unary(0, l) + off[l])
        })
        .collect();
    let mut back = vec![0usize; t_len * n];
    let mut next = vec![None; n];

    for k in 1..t_len {
        for (l, slot) in next.iter_mut().enumerate() {
            let mut arg: Option<(usize, f64)> = None;
            for (p, prev) in best.iter().enumerate() {
                let Some(prev) = prev else { continue };
                if !scores.mask.allows(p, l) {
                    continue;
                }
                let s = prev + scores.transition(p, l);
                if arg.is_none_or(|(_, b)| s > b) {
                    arg = Some((p, s));
                }
            }
            *slot = arg.map(|(p, s)| {
                back[k * n + l] = p;
                s + scores.unary(k, l) + off[l]
            });
        }
        core::mem::swap(&mut best, &mut next);
    }

    let mut end: Option<(usize, f64)> = None;
    for (l, s) in best.iter().enumerate() {
        if let Some(s) = *s {
            if end.is_none_or(|(_, b)| s > b) {
                end = Some((l, s));
            }
        }
    }
    let (mut label, objective) = end.ok_or(Error::NoValidSequence)?;
    let mut labels = vec![LabelId(0); t_len];
    for k in (0..t_len).rev() {
        labels[k] = LabelId::from(label);
        if k > 0 {
            label = back[k * n + label];
        }
    }
    Ok(Decoded { labels, objective })
}

/// Base linear-chain model: unary weights per (feature, label) and dense
/// label-bigram transition weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    schema: LabelSchema,
    mask: Arc<TransitionMask>,
    num_features: usize,
    unary: Vec<f64>,
    transition: Vec<f64>,
}

impl ChainModel {
    pub fn zeros(schema: LabelSchema, num_features: usize) -> Self {
        let n = schema.len();
        let mask = Arc::new(TransitionMask::from_schema(&schema));
        ChainModel {
            schema,
            mask,
            num_features,
            unary: vec![0.0; num_features * n],
            transition: vec![0.0; n * n],
        }
    }

    /// `unary` is `num_features x L` row-major; `transition` is `L x L`.
    pub fn from_weights(
        schema: LabelSchema,
        num_features: usize,
        unary: Vec<f64>,
        transition: Vec<f64>,
    ) -> Result<Self> {
        let n = schema.len();
        if unary.len() != num_features * n {
            return Err(Error::LengthMismatch {
                expected: num_features * n,
                found: unary.len(),
            });
        }
        if transition.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: transition.len(),
            });
        }
        if !unary.iter().chain(&transition).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("model weights"));
        }
        let mask = Arc::new(TransitionMask::from_schema(&schema));
        Ok(ChainModel {
            schema,
            mask,
            num_features,
            unary,
            transition,
        })
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn mask(&self) -> &Arc<TransitionMask> {
        &self.mask
    }

    pub fn num_labels(&self) -> usize {
        self.schema.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn unary_weights(&self) -> &[f64] {
        &self.unary
    }

    pub fn transition_weights(&self) -> &[f64] {
        &self.transition
    }

    pub fn unary_weight(&self, feature: FeatureId, label: LabelId) -> f64 {
        self.unary[feature.index() * self.num_labels() + label.index()]
    }

    pub fn transition_weight(&self, prev: LabelId, next: LabelId) -> f64 {
        self.transition[prev.index() * self.num_labels() + next.index()]
    }

    pub fn set_unary_weight(&mut self, feature: FeatureId, label: LabelId, w: f64) {
        let n = self.num_labels();
        self.unary[feature.index() * n + label.index()] = w;
    }

    pub fn set_transition_weight(&mut self, prev: LabelId, next: LabelId, w: f64) {
        let n = self.num_labels();
        self.transition[prev.index() * n + next.index()] = w;
    }

    pub fn score_sequence(&self, tokens: &[FeatureVector]) -> Result<ScoreTable> {
        score_sequence(self, tokens)
    }
}

/// Unary scores are feature dot products; unknown feature ids contribute 0.
pub fn score_sequence(model: &ChainModel, tokens: &[FeatureVector]) -> Result<ScoreTable> {
    if tokens.is_empty() {
        return Err(Error::EmptySequence);
    }
    let n = model.num_labels();
    let mut unary = vec![0.0; tokens.len() * n];
    for (row, token) in unary.chunks_mut(n).zip(tokens) {
        for &(f, value) in token.entries() {
            if f.index() >= model.num_features {
                continue;
            }
            let weights = &model.unary[f.index() * n..(f.index() + 1) * n];
            for (u, w) in row.iter_mut().zip(weights) {
                *u += value * w;
            }
        }
    }
    ScoreTable::new(unary, model.transition.clone(), Arc::clone(&model.mask))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptronConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for PerceptronConfig {
    fn default() -> Self {
        PerceptronConfig {
            epochs: 10,
            learning_rate: 1.0,
        }
    }
}

/// Weight vector plus the running sum needed for lazy averaging.
struct Averaged {
    w: Vec<f64>,
    sum: Vec<f64>,
}

impl Averaged {
    fn new(len: usize) -> Self {
        Averaged {
            w: vec![0.0; len],
            sum: vec![0.0; len],
        }
    }

    #[inline]
    fn add(&mut self, i: usize, delta: f64, step: f64) {
        self.w[i] += delta;
        self.sum[i] += step * delta;
    }

    fn average(self, steps: f64) -> Vec<f64> {
        self.w
            .iter()
            .zip(&self.sum)
            .map(|(w, s)| w - s / steps)
            .collect()
    }
}

/// Averaged structured perceptron with masked Viterbi as the inner argmax.
///
/// Examples are visited in corpus order. Every gold sequence must be
/// BIO-valid under the schema.
pub fn train_base_perceptron(
    schema: LabelSchema,
    num_features: usize,
    corpus: &[LabeledSequence],
    config: PerceptronConfig,
) -> Result<ChainModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(config.learning_rate.is_finite() && config.learning_rate >= 0.0) {
        return Err(Error::InvalidLearningRate(config.learning_rate));
    }
    for (i, ex) in corpus.iter().enumerate() {
        if ex.features.len() != ex.labels.len() {
            return Err(Error::LengthMismatch {
                expected: ex.features.len(),
                found: ex.labels.len(),
            });
        }
        if ex.labels.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(position) = schema.first_invalid_transition(&ex.labels)? {
            return Err(Error::InvalidTransition {
                sequence: i,
                position,
            });
        }
    }

    let mut model = ChainModel::zeros(schema, num_features);
    if config.epochs == 0 {
        return Ok(model);
    }
    let n = model.num_labels();
    let mut unary = Averaged::new(model.unary.len());
    let mut trans = Averaged::new(model.transition.len());
    let rate = config.learning_rate;
    // step counter starts at 1 so that average = w - sum / step
    let mut step = 1.0;

    for _ in 0..config.epochs {
        for ex in corpus {
            model.unary.copy_from_slice(&unary.w);
            model.transition.copy_from_slice(&trans.w);
            let pred = model.score_sequence(&ex.features)?.decode()?.labels;
            if pred != ex.labels {
                for (k, token) in ex.features.iter().enumerate() {
                    let (g, p) = (ex.labels[k].index(), pred[k].index());
                    if g != p {
                        for &(f, v) in token.entries() {
                            if f.index() < num_features {
                                unary.add(f.index() * n + g, rate * v, step);
                                unary.add(f.index() * n + p, -rate * v, step);
                            }
                        }
                    }
                    if k > 0 {
                        let gold_pair = ex.labels[k - 1].index() * n + g;
                        let pred_pair = pred[k - 1].index() * n + p;
                        if gold_pair != pred_pair {
                            trans.add(gold_pair, rate, step);
                            trans.add(pred_pair, -rate, step);
                        }
                    }
                }
            }
            step += 1.0;
        }
    }
    model.unary = unary.average(step);
    model.transition = trans.average(step);
    Ok(model)
}
