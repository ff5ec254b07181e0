//! Corpus-level glue between text corpora and the core algorithms.

use softdd_core::{
    extract_segments, hard_dd, soft_dd, train_base_perceptron, ConstraintSet, DdConfig, EvalReport,
    LabelSchema, LabeledSequence, PerceptronConfig, TraceRow,
};

use crate::corpus::{induce_schema, Sequence};
use crate::error::{Error, Result};
use crate::features::FeatureDictionary;
use crate::model_io::Tagger;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InferenceMode {
    Unconstrained,
    HardDd,
    #[default]
    SoftDd,
}

impl std::str::FromStr for InferenceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "unconstrained" => Ok(InferenceMode::Unconstrained),
            "hard-dd" => Ok(InferenceMode::HardDd),
            "soft-dd" => Ok(InferenceMode::SoftDd),
            _ => Err(format!(
                "unknown mode `{s}` (unconstrained | hard-dd | soft-dd)"
            )),
        }
    }
}

/// Gold-labeled feature sequences. Labels outside the tagger's schema are an
/// error.
pub fn encode_labeled(tagger: &Tagger, corpus: &[Sequence]) -> Result<Vec<LabeledSequence>> {
    corpus
        .iter()
        .map(|s| {
            Ok(LabeledSequence {
                features: tagger.encode(&s.tokens),
                labels: s.label_ids(tagger.schema())?,
            })
        })
        .collect()
}

/// Induces the schema and feature dictionary from `train` and fits the base
/// model.
pub fn train(train: &[Sequence], config: &PerceptronConfig) -> Result<Tagger> {
    let schema = induce_schema([train])?;
    let mut features = FeatureDictionary::new();
    let encoded = train
        .iter()
        .map(|s| {
            Ok(LabeledSequence {
                features: features.encode_growing(&s.tokens),
                labels: s.label_ids(&schema)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let chain = train_base_perceptron(schema, features.len(), &encoded, *config)?;
    Ok(Tagger { chain, features })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<String>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

pub fn predict_one(
    tagger: &Tagger,
    constraints: &ConstraintSet,
    mode: InferenceMode,
    config: &DdConfig,
    tokens: &[String],
) -> Result<Prediction> {
    let table = tagger.chain.score_sequence(&tagger.encode(tokens))?;
    let schema = tagger.schema();
    let names =
        |ids: &[softdd_core::LabelId]| ids.iter().map(|&l| schema.label(l).to_string()).collect();
    Ok(match mode {
        InferenceMode::Unconstrained => {
            let d = table.decode()?;
            Prediction {
                labels: names(&d.labels),
                iterations: 1,
                converged: true,
                trace: Vec::new(),
            }
        }
        InferenceMode::HardDd | InferenceMode::SoftDd => {
            let r = if mode == InferenceMode::HardDd {
                hard_dd(&table, constraints, config)?
            } else {
                soft_dd(&table, constraints, config)?
            };
            Prediction {
                labels: names(&r.labels),
                iterations: r.iterations,
                converged: r.converged(),
                trace: r.trace,
            }
        }
    })
}

pub fn predict(
    tagger: &Tagger,
    constraints: &ConstraintSet,
    mode: InferenceMode,
    config: &DdConfig,
    corpus: &[Sequence],
) -> Result<Vec<Prediction>> {
    corpus
        .iter()
        .map(|s| predict_one(tagger, constraints, mode, config, &s.tokens))
        .collect()
}

/// Fraction of tokens whose label matches.
pub fn token_accuracy(gold: &[Sequence], predicted: &[Vec<String>]) -> f64 {
    let mut total = 0usize;
    let mut right = 0usize;
    for (g, p) in gold.iter().zip(predicted) {
        total += g.labels.len();
        right += g.labels.iter().zip(p).filter(|(a, b)| a == b).count();
    }
    if total == 0 {
        0.0
    } else {
        right as f64 / total as f64
    }
}

/// Segment F1 of aligned corpora. Both sides must have the same tokens per
/// sequence and BIO-valid labels.
pub fn evaluate(gold: &[Sequence], predicted: &[Sequence]) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::Misaligned);
    }
    let mut report = EvalReport::default();
    for (i, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.tokens != p.tokens {
            return Err(Error::Misaligned);
        }
        let seg = |s: &Sequence| -> Result<_> {
            let parsed = s
                .labels
                .iter()
                .map(|l| softdd_core::parse_label(l))
                .collect::<softdd_core::Result<Vec<_>>>()?;
            extract_segments(&parsed).map_err(|e| match e {
                softdd_core::Error::InvalidTransition { position, .. } => {
                    softdd_core::Error::InvalidTransition {
                        sequence: i,
                        position,
                    }
                    .into()
                }
                e => e.into(),
            })
        };
        report.add(&seg(g)?, &seg(p)?);
    }
    Ok(report)
}

pub fn with_labels(corpus: &[Sequence], predictions: &[Prediction]) -> Vec<Sequence> {
    corpus
        .iter()
        .zip(predictions)
        .map(|(s, p)| Sequence {
            tokens: s.tokens.clone(),
            labels: p.labels.clone(),
        })
        .collect()
}

/// All constraints of every template over `schema`.
pub fn full_union(schema: &LabelSchema) -> ConstraintSet {
    ConstraintSet::new(schema, softdd_core::instantiate_all(schema))
}
