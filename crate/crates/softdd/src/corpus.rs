//! Token-per-line corpora: `token<TAB>label`, blank line between sequences,
//! `#` comments.

use std::fmt::Write as _;
use std::path::Path;

use softdd_core::{LabelId, LabelSchema};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
}

impl Sequence {
    pub fn new(tokens: Vec<String>, labels: Vec<String>) -> Result<Self> {
        if tokens.len() != labels.len() {
            return Err(Error::Misaligned);
        }
        Ok(Sequence { tokens, labels })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn label_ids(&self, schema: &LabelSchema) -> Result<Vec<LabelId>> {
        Ok(schema.ids(&self.labels)?)
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<Sequence>> {
    let mut out = Vec::new();
    let mut current = Sequence {
        tokens: Vec::new(),
        labels: Vec::new(),
    };
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(std::mem::replace(
                    &mut current,
                    Sequence {
                        tokens: Vec::new(),
                        labels: Vec::new(),
                    },
                ));
            }
            continue;
        }
        let (token, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected token<TAB>label"))?;
        if token.is_empty() || label.is_empty() || label.contains('\t') {
            return Err(Error::parse(i + 1, "expected token<TAB>label"));
        }
        current.tokens.push(token.to_string());
        current.labels.push(label.to_string());
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

pub fn format_corpus(corpus: &[Sequence]) -> String {
    let mut s = String::new();
    for (i, seq) in corpus.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        for (t, l) in seq.tokens.iter().zip(&seq.labels) {
            let _ = writeln!(s, "{t}\t{l}");
        }
    }
    s
}

pub fn read_corpus(path: &Path) -> Result<Vec<Sequence>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        e => e,
    })
}

/// Labels observed anywhere in the corpora, plus `O`.
pub fn induce_schema<'a>(corpora: impl IntoIterator<Item = &'a [Sequence]>) -> Result<LabelSchema> {
    let labels = corpora
        .into_iter()
        .flat_map(|c| c.iter().flat_map(|s| s.labels.iter()));
    Ok(LabelSchema::induce(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        let text = "# header\nSmith\tB-authors\n.\tO\n\n\n2001\tB-year\n";
        let c = parse_corpus(text).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].tokens, ["Smith", "."]);
        assert_eq!(c[1].labels, ["B-year"]);
        assert_eq!(parse_corpus(&format_corpus(&c)).unwrap(), c);
    }

    #[test]
    fn missing_tab() {
        assert!(matches!(
            parse_corpus("a\tO\nb O\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn empty() {
        assert!(parse_corpus("").unwrap().is_empty());
        assert_eq!(format_corpus(&[]), "");
    }
}
