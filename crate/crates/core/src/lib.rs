//! Constrained MAP inference for chain-structured sequence labelers.
//!
//! The crate is organized bottom-up:
//!
//! - [`schema`] parses hierarchical BIO labels and counts segment openings.
//! - [`chain`] scores sequences and decodes them with a masked Viterbi pass.
//! - [`constraints`] holds global count constraints in `a·count <= b` form.
//! - [`dual`] runs projected-subgradient dual decomposition with hard or soft
//!   (penalized) constraints on top of any MAP oracle.
//! - [`penalty`] learns soft-constraint penalties with a truncated perceptron.
//! - [`eval`] extracts segments and computes field-level F1.
//! - [`oracle`] is an exhaustive solver used to check everything above.
//!
//! Everything here is pure computation over `alloc` collections; file formats
//! and the command-line front end live in the `softdd` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chain;
pub mod constraints;
pub mod dual;
mod error;
pub mod eval;
pub mod oracle;
pub mod penalty;
pub mod schema;

pub use chain::{
    score_sequence, train_base_perceptron, viterbi, ChainModel, Decoded, FeatureId, FeatureVector,
    LabeledSequence, PerceptronConfig, ScoreTable, TransitionMask, UnaryOffset,
};
pub use constraints::{
    importance_scores, instantiate_all, instantiate_hierarchical, instantiate_pairwise,
    instantiate_singleton, prune, Constraint, ConstraintSet, Penalty, Template,
};
pub use dual::{
    hard_dd, kkt_check, soft_dd, step_size, Certificate, DdConfig, DualState, MapOracle,
    PredictionResult, TraceRow,
};
pub use error::{Error, Result};
pub use eval::{
    convergence_report, extract_segments, f1, ConvergenceReport, ConvergenceRow, EvalReport,
    PathCounts, Segment,
};
pub use oracle::{brute_force_map, OracleMode, OracleSolution};
pub use penalty::{
    active_constraints, learn_penalties, learn_penalties_with_counts, ActiveSet, LearnedPenalties,
    PenaltyLearnerConfig,
};
pub use schema::{
    count_vector, enumerate_count_keys, parse_label, validate_transition, Component, CountKey,
    LabelId, LabelSchema, ParsedLabel, Prefix,
};
