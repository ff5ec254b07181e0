//! Text format for constraint sets, one constraint per line:
//!
//! ```text
//! <template>\t<terms>\t<=\t<bound>\t<penalty>
//! ```
//!
//! `<terms>` is space-separated `+c*level:path/parts`; `<penalty>` is a number
//! or `HARD`. Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use softdd_core::{Constraint, ConstraintSet, CountKey, LabelSchema, Penalty, Template};

use crate::error::{Error, Result};

fn format_line(c: &Constraint) -> String {
    let terms: Vec<String> = c
        .coefficients()
        .iter()
        .map(|(k, v)| format!("{v:+}*{k}"))
        .collect();
    let penalty = match c.penalty {
        Penalty::Hard => "HARD".to_string(),
        Penalty::Soft(p) => format!("{p}"),
    };
    format!(
        "{}\t{}\t<=\t{}\t{penalty}",
        c.template.as_str(),
        terms.join(" "),
        c.bound()
    )
}

/// Serializes a set; `scores`, when given, are written as a comment above
/// each line.
pub fn format_constraints(set: &ConstraintSet, scores: Option<&[f64]>) -> String {
    let mut s = String::from("# template\tterms\t<=\tbound\tpenalty\n");
    for (i, c) in set.iter().enumerate() {
        if let Some(score) = scores.and_then(|sc| sc.get(i)) {
            let _ = writeln!(s, "# imp {score}");
        }
        s.push_str(&format_line(c));
        s.push('\n');
    }
    s
}

fn parse_line(line: &str) -> std::result::Result<Constraint, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    let [template, terms, op, bound, penalty] = cols[..] else {
        return Err(format!(
            "expected 5 tab-separated columns, found {}",
            cols.len()
        ));
    };
    let template: Template = template
        .parse()
        .map_err(|_| format!("unknown template `{template}`"))?;
    if op != "<=" {
        return Err(format!("expected `<=`, found `{op}`"));
    }
    let bound: i64 = bound.parse().map_err(|_| format!("bad bound `{bound}`"))?;
    let penalty = match penalty {
        "HARD" => Penalty::Hard,
        p => match p.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Penalty::Soft(v),
            _ => return Err(format!("bad penalty `{p}`")),
        },
    };
    let mut coefs = Vec::new();
    for term in terms.split(' ').filter(|t| !t.is_empty()) {
        let (coef, key) = term
            .split_once('*')
            .ok_or_else(|| format!("bad term `{term}`"))?;
        let coef: i64 = coef
            .parse()
            .map_err(|_| format!("bad coefficient in `{term}`"))?;
        let key: CountKey = key
            .parse()
            .map_err(|_| format!("bad count key in `{term}`"))?;
        coefs.push((key, coef));
    }
    Constraint::at_most(template, coefs, bound)
        .map(|c| c.with_penalty(penalty))
        .map_err(|e| e.to_string())
}

/// Parses constraints and builds the set over `schema`. Keys the schema never
/// opens are allowed; they simply contribute nothing.
pub fn parse_constraints(text: &str, schema: &LabelSchema) -> Result<ConstraintSet> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(line).map_err(|m| Error::parse(i + 1, m))?);
    }
    Ok(ConstraintSet::new(schema, out))
}

pub fn load_constraints(path: &Path, schema: &LabelSchema) -> Result<ConstraintSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_constraints(&text, schema)
}
