//! Synthetic citation-like corpora.
//!
//! Three citation shapes:
//!
//! ```text
//! article      authors . title . journal volume , pages , year .
//! chapter      authors . title . In editor (eds.) , booktitle . publisher , address , year .
//! title-first  title . authors . booktitle , year .
//! ```
//!
//! Every field appears at most once and every authors/editor segment holds
//! exactly one person with one first and one last name, so gold output
//! satisfies all singleton and hierarchical constraints. A chapter is
//! *confused* with probability `confusion`: the `In` / `(eds.)` markers are
//! dropped and editor names come from the author vocabulary, which makes the
//! editor look locally like the authors of a title-first citation.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaTemplate {
    Flat,
    #[default]
    Hierarchical,
}

impl std::str::FromStr for SchemaTemplate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "flat" => Ok(SchemaTemplate::Flat),
            "hierarchical" => Ok(SchemaTemplate::Hierarchical),
            _ => Err(format!(
                "unknown schema template `{s}` (flat | hierarchical)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub sequences: usize,
    /// Inclusive word-count range of free-text fields (titles).
    pub min_words: usize,
    pub max_words: usize,
    pub template: SchemaTemplate,
    pub confusion: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            sequences: 100,
            min_words: 2,
            max_words: 8,
            template: SchemaTemplate::Hierarchical,
            confusion: 0.0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.confusion) {
            return Err(format!("confusion rate {} outside [0, 1]", self.confusion));
        }
        if self.min_words == 0 || self.min_words > self.max_words {
            return Err(format!(
                "bad word range {}..={}",
                self.min_words, self.max_words
            ));
        }
        Ok(())
    }
}

const AUTHOR_FIRST: &[&str] = &[
    "A.", "B.", "C.", "D.", "E.", "F.", "G.", "H.", "J.", "K.", "L.", "M.", "N.", "P.", "R.", "S.",
    "T.", "W.", "Alice", "Bruno", "Chen", "Dana", "Emil", "Farah", "Hiro", "Ines", "Jonas", "Lena",
    "Mateo", "Priya",
];
const AUTHOR_LAST: &[&str] = &[
    "Smith",
    "Garcia",
    "Nakamura",
    "Okafor",
    "Novak",
    "Larsen",
    "Fischer",
    "Rossi",
    "Kowalski",
    "Haddad",
    "Moreau",
    "Silva",
    "Tanaka",
    "Ivanova",
    "Murphy",
    "Keller",
    "Duarte",
    "Sato",
    "Lindqvist",
    "Petrov",
    "Costa",
    "Weber",
    "Yilmaz",
    "Bauer",
    "Dubois",
    "Horvat",
    "Kim",
    "Nguyen",
    "Olsen",
    "Reyes",
];
const EDITOR_FIRST: &[&str] = &[
    "Agnes",
    "Bertram",
    "Cornelia",
    "Desmond",
    "Eudora",
    "Fitzgerald",
    "Gwendolyn",
    "Horatio",
    "Imogen",
    "Jasper",
    "Leopold",
    "Millicent",
    "Octavia",
    "Percival",
    "Rosalind",
];
const EDITOR_LAST: &[&str] = &[
    "Abernathy",
    "Blackwood",
    "Carrington",
    "Davenport",
    "Ellsworth",
    "Fairbanks",
    "Gainsborough",
    "Hollingsworth",
    "Islington",
    "Kensington",
    "Lockhart",
    "Montgomery",
    "Pemberton",
    "Rutherford",
    "Whitmore",
];
const TITLE_WORDS: &[&str] = &[
    "learning",
    "structured",
    "inference",
    "models",
    "sparse",
    "graphs",
    "efficient",
    "robust",
    "neural",
    "probabilistic",
    "extraction",
    "segmentation",
    "random",
    "fields",
    "towards",
    "parsing",
    "citations",
    "approximate",
    "bayesian",
    "kernels",
    "optimization",
    "latent",
    "variables",
    "ranking",
    "semantic",
    "text",
    "networks",
    "scalable",
    "decoding",
    "labels",
];
const JOURNALS: &[&[&str]] = &[
    &["Journal", "of", "Machine", "Learning", "Research"],
    &["Machine", "Learning"],
    &["Computational", "Linguistics"],
    &["Artificial", "Intelligence"],
    &["Transactions", "on", "Pattern", "Analysis"],
];
const BOOKTITLES: &[&[&str]] = &[
    &["Proceedings", "of", "ICML"],
    &["Proceedings", "of", "NAACL"],
    &["Advances", "in", "Neural", "Information", "Processing"],
    &["Handbook", "of", "Graphical", "Models"],
    &["Proceedings", "of", "EMNLP"],
];
const PUBLISHERS: &[&[&str]] = &[
    &["Springer"],
    &["Elsevier"],
    &["MIT", "Press"],
    &["Wiley"],
    &["Morgan", "Kaufmann"],
];
const ADDRESSES: &[&[&str]] = &[
    &["Berlin"],
    &["London"],
    &["New", "York"],
    &["Amsterdam"],
    &["Boston"],
];

struct Builder {
    template: SchemaTemplate,
    tokens: Vec<String>,
    labels: Vec<String>,
}

impl Builder {
    fn push(&mut self, token: &str, label: String) {
        self.tokens.push(token.to_string());
        self.labels.push(label);
    }

    fn punct(&mut self, p: &str) {
        self.push(p, "O".to_string());
    }

    fn field(&mut self, name: &str, words: &[&str]) {
        for (i, w) in words.iter().enumerate() {
            let prefix = if i == 0 { "B" } else { "I" };
            self.push(w, format!("{prefix}-{name}"));
        }
    }

    fn person(&mut self, field: &str, first: &str, last: &str) {
        match self.template {
            SchemaTemplate::Flat => self.field(field, &[first, last]),
            SchemaTemplate::Hierarchical => {
                self.push(first, format!("B-{field}/B-person/B-first"));
                self.push(last, format!("I-{field}/I-person/B-last"));
            }
        }
    }
}

fn title(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Vec<String> {
    let n = rng.random_range(cfg.min_words..=cfg.max_words);
    (0..n)
        .map(|i| {
            let w = *TITLE_WORDS.choose(rng).unwrap();
            if i == 0 {
                let mut c = w.chars();
                c.next()
                    .map(|f| f.to_uppercase().chain(c).collect())
                    .unwrap_or_default()
            } else {
                w.to_string()
            }
        })
        .collect()
}

fn pick<'a>(rng: &mut ChaCha8Rng, from: &[&'a str]) -> &'a str {
    from.choose(rng).unwrap()
}

fn pick_words<'a>(rng: &mut ChaCha8Rng, from: &[&'a [&'a str]]) -> &'a [&'a str] {
    from.choose(rng).unwrap()
}

fn citation(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Sequence {
    let mut b = Builder {
        template: cfg.template,
        tokens: Vec::new(),
        labels: Vec::new(),
    };
    let t = title(rng, cfg);
    let t: Vec<&str> = t.iter().map(String::as_str).collect();
    let year = rng.random_range(1960..=2023).to_string();
    let author = (pick(rng, AUTHOR_FIRST), pick(rng, AUTHOR_LAST));

    match rng.random_range(0..10) {
        0..=3 => {
            b.person("authors", author.0, author.1);
            b.punct(".");
            b.field("title", &t);
            b.punct(".");
            b.field("journal", pick_words(rng, JOURNALS));
            b.field("volume", &[&rng.random_range(1..=60).to_string()]);
            b.punct(",");
            let start = rng.random_range(1..=400);
            b.field(
                "pages",
                &[&format!("{start}-{}", start + rng.random_range(5..=30))],
            );
            b.punct(",");
            b.field("year", &[&year]);
            b.punct(".");
        }
        4..=7 => {
            let confused = rng.random_bool(cfg.confusion);
            b.person("authors", author.0, author.1);
            b.punct(".");
            b.field("title", &t);
            b.punct(".");
            if confused {
                b.person("editor", pick(rng, AUTHOR_FIRST), pick(rng, AUTHOR_LAST));
            } else {
                b.punct("In");
                b.person("editor", pick(rng, EDITOR_FIRST), pick(rng, EDITOR_LAST));
                b.punct("(eds.)");
            }
            b.punct(",");
            b.field("booktitle", pick_words(rng, BOOKTITLES));
            b.punct(".");
            b.field("publisher", pick_words(rng, PUBLISHERS));
            b.punct(",");
            b.field("address", pick_words(rng, ADDRESSES));
            b.punct(",");
            b.field("year", &[&year]);
            b.punct(".");
        }
        _ => {
            b.field("title", &t);
            b.punct(".");
            b.person("authors", author.0, author.1);
            b.punct(",");
            b.field("booktitle", pick_words(rng, BOOKTITLES));
            b.punct(".");
            b.field("publisher", pick_words(rng, PUBLISHERS));
            b.punct(",");
            b.field("address", pick_words(rng, ADDRESSES));
            b.punct(",");
            b.field("year", &[&year]);
            b.punct(".");
        }
    }
    Sequence {
        tokens: b.tokens,
        labels: b.labels,
    }
}

/// Sequence `i` is drawn from its own ChaCha stream, so the output is a pure
/// function of `(seed, i)` and prefixes of longer corpora agree.
pub fn generate(cfg: &GeneratorConfig) -> Result<Vec<Sequence>, String> {
    cfg.validate()?;
    Ok((0..cfg.sequences)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            citation(&mut rng, cfg)
        })
        .collect())
}
