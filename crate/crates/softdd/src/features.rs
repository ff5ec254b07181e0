//! Token features and the string-to-id dictionary.
//!
//! Families: word, lowercased word, character shape, 1–4 character prefixes
//! and suffixes, relative position in 8 bins, year / page-range / initial
//! regex classes, and a bias.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use softdd_core::{FeatureId, FeatureVector};

pub const POSITION_BINS: usize = 8;

static YEAR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\(?(1[5-9]|20)\d\d[a-z]?\)?[.,;:]?$").unwrap());
static PAGES: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(pp?\.)?\d+\s*(-|–|--)\s*\d+[.,;]?$").unwrap());
static INITIAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\p{Lu}\.(-?\p{Lu}\.)*$").unwrap());

/// `Xxxx.` style shape with runs collapsed: `Smith` → `Xx`, `1987` → `d`.
pub fn shape(token: &str) -> String {
    let mut out = String::new();
    for ch in token.chars() {
        let c = if ch.is_uppercase() {
            'X'
        } else if ch.is_lowercase() {
            'x'
        } else if ch.is_ascii_digit() {
            'd'
        } else {
            ch
        };
        if !out.ends_with(c) {
            out.push(c);
        }
    }
    out
}

/// Feature strings for every token of a sequence.
pub fn token_features(tokens: &[String]) -> Vec<Vec<String>> {
    let len = tokens.len();
    tokens
        .iter()
        .enumerate()
        .map(|(k, tok)| {
            let lower = tok.to_lowercase();
            let chars: Vec<char> = lower.chars().collect();
            let mut f = vec![
                "bias".to_string(),
                format!("w={tok}"),
                format!("lw={lower}"),
                format!("shape={}", shape(tok)),
                format!("pos={}", k * POSITION_BINS / len.max(1)),
            ];
            for n in 1..=4.min(chars.len()) {
                f.push(format!("p{n}={}", chars[..n].iter().collect::<String>()));
                f.push(format!(
                    "s{n}={}",
                    chars[chars.len() - n..].iter().collect::<String>()
                ));
            }
            if YEAR.is_match(tok) {
                f.push("re=year".into());
            }
            if PAGES.is_match(tok) {
                f.push("re=pages".into());
            }
            if INITIAL.is_match(tok) {
                f.push("re=initial".into());
            }
            f
        })
        .collect()
}

/// Dense ids for feature strings, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureDictionary {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl FeatureDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names(names: Vec<String>) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        FeatureDictionary { names, index }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<FeatureId> {
        self.index.get(name).copied().map(FeatureId)
    }

    pub fn intern(&mut self, name: &str) -> FeatureId {
        if let Some(&id) = self.index.get(name) {
            return FeatureId(id);
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        FeatureId(id)
    }

    /// Encodes a sequence, adding unseen features.
    pub fn encode_growing(&mut self, tokens: &[String]) -> Vec<FeatureVector> {
        token_features(tokens)
            .iter()
            .map(|fs| fs.iter().map(|f| (self.intern(f), 1.0)).collect())
            .collect()
    }

    /// Encodes a sequence; unseen features are dropped.
    pub fn encode(&self, tokens: &[String]) -> Vec<FeatureVector> {
        token_features(tokens)
            .iter()
            .map(|fs| {
                fs.iter()
                    .filter_map(|f| self.get(f))
                    .map(|id| (id, 1.0))
                    .collect()
            })
            .collect()
    }
}
