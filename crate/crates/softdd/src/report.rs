//! Tab-separated and JSON renderings of evaluation output.
//!
//! Column orders:
//!
//! - eval: `path gold predicted matched precision recall f1`, one row per
//!   name path (joined with `/`), then a `(micro)` row.
//! - convergence: `cap micro_f1 converged_fraction mean_iterations`.
//! - trace: `sequence iteration dual primal violated step`; `primal` is `NA`
//!   while a hard constraint is violated.

use std::fmt::Write as _;

use serde_json::{json, Value};
use softdd_core::{ConvergenceReport, EvalReport, PathCounts, TraceRow};

pub const MICRO: &str = "(micro)";

fn counts_row(s: &mut String, name: &str, c: &PathCounts) {
    let _ = writeln!(
        s,
        "{name}\t{}\t{}\t{}\t{}\t{}\t{}",
        c.gold,
        c.predicted,
        c.matched,
        c.precision(),
        c.recall(),
        c.f1()
    );
}

pub fn eval_tsv(report: &EvalReport) -> String {
    let mut s = String::from("path\tgold\tpredicted\tmatched\tprecision\trecall\tf1\n");
    for (path, c) in &report.per_path {
        counts_row(&mut s, &path.join("/"), c);
    }
    counts_row(&mut s, MICRO, &report.micro());
    s
}

fn counts_json(c: &PathCounts) -> Value {
    json!({
        "gold": c.gold,
        "predicted": c.predicted,
        "matched": c.matched,
        "precision": c.precision(),
        "recall": c.recall(),
        "f1": c.f1(),
    })
}

pub fn eval_json(report: &EvalReport) -> Value {
    let paths: Vec<Value> = report
        .per_path
        .iter()
        .map(|(path, c)| {
            let mut v = counts_json(c);
            v["path"] = json!(path);
            v
        })
        .collect();
    json!({ "micro": counts_json(&report.micro()), "paths": paths })
}

pub fn convergence_tsv(report: &ConvergenceReport) -> String {
    let mut s = String::from("cap\tmicro_f1\tconverged_fraction\tmean_iterations\n");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}",
            r.cap, r.micro_f1, r.converged_fraction, r.mean_iterations
        );
    }
    s
}

pub fn convergence_json(report: &ConvergenceReport) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "cap": r.cap,
                "micro_f1": r.micro_f1,
                "converged_fraction": r.converged_fraction,
                "mean_iterations": r.mean_iterations,
            })
        })
        .collect();
    json!({ "rows": rows })
}

pub const TRACE_HEADER: &str = "sequence\titeration\tdual\tprimal\tviolated\tstep\n";

pub fn trace_rows(s: &mut String, sequence: usize, rows: &[TraceRow]) {
    for r in rows {
        let primal = r.primal.map_or_else(|| "NA".to_string(), |p| p.to_string());
        let _ = writeln!(
            s,
            "{sequence}\t{}\t{}\t{primal}\t{}\t{}",
            r.iteration, r.dual, r.violated, r.step
        );
    }
}
