//! Segment extraction and field-level F1.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chain::{ChainModel, LabeledSequence};
use crate::constraints::ConstraintSet;
use crate::dual::{soft_dd, DdConfig};
use crate::error::{Error, Result};
use crate::schema::{validate_transition, ParsedLabel, Prefix};

/// A labeled span `[start, end)` at one hierarchy level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub level: usize,
    pub start: usize,
    pub end: usize,
    pub path: Vec<String>,
}

/// Maximal runs at every level: a segment opens at a `B` component and
/// extends over following tokens carrying `I` at that level with the same
/// name path. Sorted by level, then start.
pub fn extract_segments(labels: &[ParsedLabel]) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    let mut open: Vec<Option<Segment>> = Vec::new();
    let mut prev: Option<&ParsedLabel> = None;
    for (pos, label) in labels.iter().enumerate() {
        if !validate_transition(prev, label) {
            return Err(Error::InvalidTransition {
                sequence: 0,
                position: pos,
            });
        }
        let comps = label.components();
        if open.len() < comps.len() {
            open.resize(comps.len(), None);
        }
        for (level, slot) in open.iter_mut().enumerate() {
            match comps.get(level) {
                Some(c) if c.prefix == Prefix::Inside => {
                    if let Some(seg) = slot.as_mut() {
                        seg.end = pos + 1;
                    }
                }
                Some(_) => {
                    out.extend(slot.take());
                    *slot = Some(Segment {
                        level,
                        start: pos,
                        end: pos + 1,
                        path: comps[..=level].iter().map(|c| c.name.clone()).collect(),
                    });
                }
                None => out.extend(slot.take()),
            }
        }
        prev = Some(label);
    }
    out.extend(open.into_iter().flatten());
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathCounts {
    pub gold: u64,
    pub predicted: u64,
    pub matched: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl PathCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.predicted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.gold)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    fn add(&mut self, other: &PathCounts) {
        self.gold += other.gold;
        self.predicted += other.predicted;
        self.matched += other.matched;
    }
}

/// Exact-match segment counts, per name path and pooled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub per_path: BTreeMap<Vec<String>, PathCounts>,
}

impl EvalReport {
    pub fn micro(&self) -> PathCounts {
        let mut total = PathCounts::default();
        for c in self.per_path.values() {
            total.add(c);
        }
        total
    }

    pub fn merge(&mut self, other: &EvalReport) {
        for (path, c) in &other.per_path {
            self.per_path.entry(path.clone()).or_default().add(c);
        }
    }

    /// Adds one sequence's gold and predicted segments.
    pub fn add(&mut self, gold: &[Segment], predicted: &[Segment]) {
        let mut unmatched: BTreeMap<(usize, usize, &[String]), u64> = BTreeMap::new();
        for g in gold {
            self.per_path.entry(g.path.clone()).or_default().gold += 1;
            *unmatched
                .entry((g.start, g.end, g.path.as_slice()))
                .or_default() += 1;
        }
        for p in predicted {
            let entry = self.per_path.entry(p.path.clone()).or_default();
            entry.predicted += 1;
            if let Some(n) = unmatched.get_mut(&(p.start, p.end, p.path.as_slice())) {
                if *n > 0 {
                    *n -= 1;
                    entry.matched += 1;
                }
            }
        }
    }
}

pub fn f1(gold: &[Segment], predicted: &[Segment]) -> EvalReport {
    let mut report = EvalReport::default();
    report.add(gold, predicted);
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub cap: usize,
    pub micro_f1: f64,
    pub converged_fraction: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

/// Soft-DD under each iteration cap on every example of a labeled corpus.
/// Penalties are those carried by `constraints`.
pub fn convergence_report(
    corpus: &[LabeledSequence],
    model: &ChainModel,
    constraints: &ConstraintSet,
    caps: &[usize],
    step0: f64,
) -> Result<ConvergenceReport> {
    if caps.is_empty() {
        return Err(Error::EmptyCaps);
    }
    if caps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedCaps);
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let schema = model.schema();
    let tables = corpus
        .iter()
        .map(|ex| model.score_sequence(&ex.features))
        .collect::<Result<Vec<_>>>()?;
    let gold = corpus
        .iter()
        .map(|ex| extract_segments(&schema.parse_ids(&ex.labels)?))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(caps.len());
    for &cap in caps {
        let config = DdConfig {
            max_iters: cap,
            step0,
            ..DdConfig::default()
        };
        let mut report = EvalReport::default();
        let mut converged = 0usize;
        let mut iterations = 0usize;
        for (table, g) in tables.iter().zip(&gold) {
            let r = soft_dd(table, constraints, &config)?;
            converged += usize::from(r.converged());
            iterations += r.iterations;
            report.add(g, &extract_segments(&schema.parse_ids(&r.labels)?)?);
        }
        rows.push(ConvergenceRow {
            cap,
            micro_f1: report.micro().f1(),
            converged_fraction: converged as f64 / corpus.len() as f64,
            mean_iterations: iterations as f64 / corpus.len() as f64,
        });
    }
    Ok(ConvergenceReport { rows })
}
