//! Projected-subgradient dual decomposition with hard and soft constraints.
//!
//! For constraints `Ay <= b` the Lagrangian is
//! `L(y, λ) = w·y − λᵀ(Ay − b)`, so each iteration decodes
//! `max_y ⟨w − Aᵀλ, y⟩` with the base MAP oracle and moves `λ` along the
//! subgradient `Ay − b`. Soft constraints with cost `c_i` add slack
//! variables; eliminating them leaves the same dual restricted to
//! `0 <= λ_i <= c_i`, so soft mode differs only in the projection and the
//! optimality test.
//!
//! The dual value is `D(λ) = max_y ⟨w − Aᵀλ, y⟩ + λᵀb`. The slack terms
//! vanish at `μ = c − λ`, so no extra cap term appears.

use alloc::vec::Vec;

use crate::chain::{viterbi, Decoded, ScoreTable, UnaryOffset};
use crate::constraints::{ConstraintSet, Penalty};
use crate::error::{Error, Result};
use crate::schema::LabelId;

/// A black-box MAP solver for the base model.
pub trait MapOracle {
    fn num_labels(&self) -> usize;
    /// `argmax_y Σ_k (w_k(y_k) + offset(y_k)) + transitions`.
    fn map(&self, offset: &UnaryOffset) -> Result<Decoded>;
    /// Base score `w·y`.
    fn score(&self, labels: &[LabelId]) -> f64;
}

impl MapOracle for ScoreTable {
    fn num_labels(&self) -> usize {
        ScoreTable::num_labels(self)
    }

    fn map(&self, offset: &UnaryOffset) -> Result<Decoded> {
        viterbi(self, offset)
    }

    fn score(&self, labels: &[LabelId]) -> f64 {
        ScoreTable::score(self, labels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdConfig {
    pub max_iters: usize,
    pub step0: f64,
    /// Absolute tolerance for `λ_i = 0` and `λ_i = c_i`.
    pub tolerance: f64,
    pub trace: bool,
}

impl Default for DdConfig {
    fn default() -> Self {
        DdConfig {
            max_iters: 100,
            step0: 1.0,
            tolerance: 1e-9,
            trace: false,
        }
    }
}

impl DdConfig {
    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    Converged,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub iteration: usize,
    /// Iterations whose dual value rose above the previous one.
    pub increases: usize,
    pub previous_dual: Option<f64>,
    pub best_dual: f64,
}

impl DualState {
    pub fn new(num_constraints: usize) -> Self {
        DualState {
            lambda: alloc::vec![0.0; num_constraints],
            iteration: 0,
            increases: 0,
            previous_dual: None,
            best_dual: f64::INFINITY,
        }
    }

    fn record_dual(&mut self, dual: f64) {
        if self.previous_dual.is_some_and(|prev| dual > prev) {
            self.increases += 1;
        }
        self.previous_dual = Some(dual);
        self.best_dual = self.best_dual.min(dual);
    }
}

/// `η = step0 / (1 + number of dual increases so far)`.
pub fn step_size(state: &DualState, step0: f64) -> f64 {
    step0 / (1 + state.increases) as f64
}

/// Optimality test on the current iterate.
///
/// Soft constraint: slack with `λ = 0`, tight, or violated with `λ = c`.
/// Hard constraint: satisfied, and either tight or `λ = 0`.
pub fn kkt_check(
    lambda: &[f64],
    violations: &[i64],
    penalties: &[Penalty],
    tolerance: f64,
) -> Result<bool> {
    if lambda.len() != violations.len() {
        return Err(Error::LengthMismatch {
            expected: lambda.len(),
            found: violations.len(),
        });
    }
    if lambda.len() != penalties.len() {
        return Err(Error::LengthMismatch {
            expected: lambda.len(),
            found: penalties.len(),
        });
    }
    let at_zero = |l: f64| l.abs() <= tolerance;
    Ok(lambda
        .iter()
        .zip(violations)
        .zip(penalties)
        .all(|((&l, &v), p)| match p {
            Penalty::Soft(c) => match v.cmp(&0) {
                core::cmp::Ordering::Less => at_zero(l),
                core::cmp::Ordering::Equal => true,
                core::cmp::Ordering::Greater => (l - c).abs() <= tolerance,
            },
            Penalty::Hard => v == 0 || (v < 0 && at_zero(l)),
        }))
}

/// One line of the optional inference trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub dual: f64,
    /// `None` when a hard constraint is violated.
    pub primal: Option<f64>,
    pub violated: usize,
    pub step: f64,
    /// Multipliers used for this iteration's decode.
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionResult {
    pub labels: Vec<LabelId>,
    /// `w·y − Σ c_i z_i`; `None` when a hard constraint is violated.
    pub primal: Option<f64>,
    /// Lowest dual value seen, an upper bound on the constrained optimum.
    pub dual: f64,
    pub iterations: usize,
    pub certificate: Certificate,
    /// Slack `z_i` of the returned labels.
    pub violations: Vec<u64>,
    /// Multipliers after the last iteration.
    pub lambda: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

impl PredictionResult {
    pub fn converged(&self) -> bool {
        self.certificate == Certificate::Converged
    }
}

/// Soft-constrained MAP. `Hard` penalties in the set are honoured as hard
/// constraints.
pub fn soft_dd(
    oracle: &impl MapOracle,
    constraints: &ConstraintSet,
    config: &DdConfig,
) -> Result<PredictionResult> {
    run(oracle, constraints, &constraints.penalties(), config)
}

/// Hard-constrained MAP: every constraint is treated as `Hard`.
pub fn hard_dd(
    oracle: &impl MapOracle,
    constraints: &ConstraintSet,
    config: &DdConfig,
) -> Result<PredictionResult> {
    let hard = alloc::vec![Penalty::Hard; constraints.len()];
    run(oracle, constraints, &hard, config)
}

/// `offset(label) = −Σ_i λ_i A[i][label]`.
fn lagrangian_offset(constraints: &ConstraintSet, lambda: &[f64]) -> UnaryOffset {
    let mut offset = UnaryOffset::zeros(constraints.num_labels());
    for (i, &l) in lambda.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        for (o, &a) in offset.0.iter_mut().zip(constraints.row(i)) {
            if a != 0 {
                *o -= l * a as f64;
            }
        }
    }
    offset
}

/// Ranks iterates for the iteration-limit fallback: feasible before
/// infeasible, then by soft objective (feasible) or by total hard violation
/// and base score (infeasible).
#[derive(Clone, Copy)]
struct Rank {
    feasible: bool,
    hard_excess: u64,
    objective: f64,
}

impl Rank {
    fn better_than(&self, other: &Rank) -> bool {
        match (self.feasible, other.feasible) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.objective > other.objective,
            (false, false) => {
                self.hard_excess < other.hard_excess
                    || (self.hard_excess == other.hard_excess && self.objective > other.objective)
            }
        }
    }
}

fn run(
    oracle: &impl MapOracle,
    constraints: &ConstraintSet,
    penalties: &[Penalty],
    config: &DdConfig,
) -> Result<PredictionResult> {
    if config.max_iters < 1 {
        return Err(Error::ZeroIterations);
    }
    if !(config.step0.is_finite() && config.step0 > 0.0) {
        return Err(Error::InvalidStep(config.step0));
    }
    for (index, p) in penalties.iter().enumerate() {
        if let Penalty::Soft(c) = *p {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidPenalty { index, value: c });
            }
        }
    }
    if oracle.num_labels() != constraints.num_labels() {
        return Err(Error::LengthMismatch {
            expected: constraints.num_labels(),
            found: oracle.num_labels(),
        });
    }
    let bounds: Vec<f64> = constraints.iter().map(|c| c.bound() as f64).collect();

    let mut state = DualState::new(constraints.len());
    let mut trace = Vec::new();
    // rank, labels, signed violations, primal
    type Iterate = (Rank, Vec<LabelId>, Vec<i64>, Option<f64>);
    let mut best: Option<Iterate> = None;

    while state.iteration < config.max_iters {
        let offset = lagrangian_offset(constraints, &state.lambda);
        let decoded = oracle.map(&offset)?;
        let v = constraints.signed_violations(&decoded.labels);

        let dual = decoded.objective
            + state
                .lambda
                .iter()
                .zip(&bounds)
                .map(|(l, b)| l * b)
                .sum::<f64>();
        state.record_dual(dual);

        let base = oracle.score(&decoded.labels);
        let mut soft_cost = 0.0;
        let mut hard_excess = 0u64;
        for (&vi, p) in v.iter().zip(penalties) {
            if vi > 0 {
                match p {
                    Penalty::Soft(c) => soft_cost += c * vi as f64,
                    Penalty::Hard => hard_excess += vi as u64,
                }
            }
        }
        let primal = (hard_excess == 0).then_some(base - soft_cost);

        let converged = kkt_check(&state.lambda, &v, penalties, config.tolerance)?;
        let step = step_size(&state, config.step0);
        if config.trace {
            trace.push(TraceRow {
                iteration: state.iteration,
                dual,
                primal,
                violated: v.iter().filter(|&&x| x > 0).count(),
                step,
                lambda: state.lambda.clone(),
            });
        }
        state.iteration += 1;

        if converged {
            return Ok(PredictionResult {
                labels: decoded.labels,
                primal,
                dual: state.best_dual,
                iterations: state.iteration,
                certificate: Certificate::Converged,
                violations: v.iter().map(|&x| x.max(0) as u64).collect(),
                lambda: state.lambda,
                trace,
            });
        }

        let rank = Rank {
            feasible: primal.is_some(),
            hard_excess,
            objective: primal.unwrap_or(base),
        };
        if best.as_ref().is_none_or(|(r, ..)| rank.better_than(r)) {
            best = Some((rank, decoded.labels, v.clone(), primal));
        }

        for ((l, &vi), p) in state.lambda.iter_mut().zip(&v).zip(penalties) {
            *l = (*l + step * vi as f64).clamp(0.0, p.cap());
        }
    }

    let (_, labels, v, primal) = best.expect("at least one iteration ran");
    Ok(PredictionResult {
        labels,
        primal,
        dual: state.best_dual,
        iterations: state.iteration,
        certificate: Certificate::IterationLimit,
        violations: v.iter().map(|&x| x.max(0) as u64).collect(),
        lambda: state.lambda,
        trace,
    })
}
