//! Versioned text format for a trained tagger.
//!
//! ```text
//! softdd-model 1
//! labels <L>
//! <label>                      (L lines, id order)
//! features <F>
//! <feature name>               (F lines, id order)
//! unary <K>
//! <feature id>\t<label id>\t<weight>
//! transition <K>
//! <prev id>\t<next id>\t<weight>
//! end
//! ```
//!
//! Only weights whose bit pattern is nonzero are listed. Weights use the
//! shortest decimal that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use softdd_core::{ChainModel, FeatureVector, LabelSchema};

use crate::error::{Error, Result};
use crate::features::FeatureDictionary;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Tagger {
    pub chain: ChainModel,
    pub features: FeatureDictionary,
}

impl Tagger {
    pub fn schema(&self) -> &LabelSchema {
        self.chain.schema()
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<FeatureVector> {
        self.features.encode(tokens)
    }
}

pub fn format_model(t: &Tagger) -> String {
    let m = &t.chain;
    let n = m.num_labels();
    let mut s = format!("softdd-model {FORMAT_VERSION}\nlabels {n}\n");
    for l in m.schema().labels() {
        s.push_str(l);
        s.push('\n');
    }
    let _ = writeln!(s, "features {}", t.features.len());
    for f in t.features.names() {
        s.push_str(f);
        s.push('\n');
    }
    let nonzero = |w: &[f64]| -> Vec<(usize, f64)> {
        w.iter()
            .copied()
            .enumerate()
            .filter(|(_, v)| v.to_bits() != 0)
            .collect()
    };
    for (name, weights) in [
        ("unary", m.unary_weights()),
        ("transition", m.transition_weights()),
    ] {
        let entries = nonzero(weights);
        let _ = writeln!(s, "{name} {}", entries.len());
        for (i, w) in entries {
            let _ = writeln!(s, "{}\t{}\t{w}", i / n, i % n);
        }
    }
    s.push_str("end\n");
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let (i, l) = self
            .inner
            .next()
            .ok_or_else(|| Error::parse(self.line + 1, "unexpected end of file"))?;
        self.line = i + 1;
        Ok(l)
    }

    fn header(&mut self, word: &str) -> Result<usize> {
        let l = self.next()?;
        l.strip_prefix(word)
            .and_then(|r| r.strip_prefix(' '))
            .and_then(|r| r.parse().ok())
            .ok_or_else(|| self.err(format!("expected `{word} <count>`")))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, message)
    }
}

pub fn parse_model(text: &str) -> Result<Tagger> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let version: u32 = lines
        .next()?
        .strip_prefix("softdd-model ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| lines.err("not a softdd model file"))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version(version));
    }
    let n = lines.header("labels")?;
    let labels = (0..n)
        .map(|_| lines.next().map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    let schema = LabelSchema::from_labels(labels)?;
    let f = lines.header("features")?;
    let names = (0..f)
        .map(|_| lines.next().map(str::to_string))
        .collect::<Result<Vec<_>>>()?;

    let mut unary = vec![0.0; f * n];
    let mut transition = vec![0.0; n * n];
    for (name, weights, rows) in [("unary", &mut unary, f), ("transition", &mut transition, n)] {
        let k = lines.header(name)?;
        for _ in 0..k {
            let l = lines.next()?;
            let mut parts = l.split('\t');
            let (Some(r), Some(c), Some(w), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(lines.err("expected `<row>\\t<col>\\t<weight>`"));
            };
            let r: usize = r.parse().map_err(|_| lines.err("bad row index"))?;
            let c: usize = c.parse().map_err(|_| lines.err("bad column index"))?;
            let w: f64 = w.parse().map_err(|_| lines.err("bad weight"))?;
            if r >= rows || c >= n {
                return Err(lines.err("index out of range"));
            }
            weights[r * n + c] = w;
        }
    }
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    let chain = ChainModel::from_weights(schema, f, unary, transition)?;
    Ok(Tagger {
        chain,
        features: FeatureDictionary::from_names(names),
    })
}

pub fn load_model(path: &Path) -> Result<Tagger> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}
