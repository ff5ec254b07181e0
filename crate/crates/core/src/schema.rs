//! Hierarchical BIO labels.
//!
//! A full label such as `I-authors/B-person/B-first` is a `/`-separated list
//! of per-level components, each carrying a `B` (begin) or `I` (inside)
//! prefix. The bare label `O` marks tokens outside every segment. Depth may
//! vary from label to label; levels below a label's populated depth are
//! simply absent.
//!
//! Global constraints are written over [`CountKey`]s: a key names one element
//! of the hierarchy by its full ancestor path, and its count in a sequence is
//! the number of tokens that carry a `B` prefix for that element.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

pub const OUTSIDE: &str = "O";

/// Dense label index into a [`LabelSchema`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub u32);

impl LabelId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for LabelId {
    fn from(i: usize) -> Self {
        LabelId(i as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prefix {
    Begin,
    Inside,
}

impl Prefix {
    fn as_str(self) -> &'static str {
        match self {
            Prefix::Begin => "B",
            Prefix::Inside => "I",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Component {
    pub prefix: Prefix,
    pub name: String,
}

/// A full label split into its per-level components. `O` has none.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParsedLabel {
    components: Vec<Component>,
}

impl ParsedLabel {
    pub fn outside() -> Self {
        ParsedLabel {
            components: Vec::new(),
        }
    }

    pub fn is_outside(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    /// Names of levels `0..=level`, or `None` when the label is shallower.
    pub fn path_to(&self, level: usize) -> Option<impl Iterator<Item = &str> + '_> {
        if level < self.components.len() {
            Some(self.components[..=level].iter().map(|c| c.name.as_str()))
        } else {
            None
        }
    }

    /// True when this label opens a segment for `key`.
    pub fn begins(&self, key: &CountKey) -> bool {
        match self.components.get(key.level) {
            Some(c) if c.prefix == Prefix::Begin => self.components[..=key.level]
                .iter()
                .zip(&key.path)
                .all(|(c, name)| c.name == *name),
            _ => false,
        }
    }

    /// Keys opened by this label, one per `B`-prefixed level.
    pub fn begin_keys(&self) -> impl Iterator<Item = CountKey> + '_ {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.prefix == Prefix::Begin)
            .map(move |(level, _)| CountKey {
                level,
                path: self.components[..=level]
                    .iter()
                    .map(|c| c.name.clone())
                    .collect(),
            })
    }
}

impl fmt::Display for ParsedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str(OUTSIDE);
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{}-{}", c.prefix.as_str(), c.name)?;
        }
        Ok(())
    }
}

impl FromStr for ParsedLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_label(s)
    }
}

pub fn parse_label(raw: &str) -> Result<ParsedLabel> {
    if raw.is_empty() {
        return Err(Error::EmptyLabel);
    }
    if raw == OUTSIDE {
        return Ok(ParsedLabel::outside());
    }
    let malformed = |component: &str| Error::MalformedComponent {
        label: raw.to_string(),
        component: component.to_string(),
    };
    let mut components = Vec::new();
    for part in raw.split('/') {
        if part == OUTSIDE {
            return Err(Error::MixedOutside(raw.to_string()));
        }
        let (prefix, name) = if let Some(name) = part.strip_prefix("B-") {
            (Prefix::Begin, name)
        } else if let Some(name) = part.strip_prefix("I-") {
            (Prefix::Inside, name)
        } else {
            return Err(malformed(part));
        };
        if name.is_empty()
            || name.starts_with("B-")
            || name.starts_with("I-")
            || name.chars().any(char::is_whitespace)
        {
            return Err(malformed(part));
        }
        components.push(Component {
            prefix,
            name: name.to_string(),
        });
    }
    Ok(ParsedLabel { components })
}

/// Whether `next` may follow `prev` (`None` is the start of the sequence).
///
/// Every `I` component of `next` at level `d` must continue a component of
/// `prev` with the same name at level `d`, and the two labels must agree on
/// the names of all levels above `d`.
pub fn validate_transition(prev: Option<&ParsedLabel>, next: &ParsedLabel) -> bool {
    for (level, comp) in next.components.iter().enumerate() {
        if comp.prefix != Prefix::Inside {
            continue;
        }
        let Some(prev) = prev else {
            return false;
        };
        if prev.components.len() <= level {
            return false;
        }
        let agree = prev.components[..=level]
            .iter()
            .zip(&next.components[..=level])
            .all(|(a, b)| a.name == b.name);
        if !agree {
            return false;
        }
    }
    true
}

/// One hierarchy element, identified by level and full name path.
///
/// Ordered by level first, then lexicographically by path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountKey {
    pub level: usize,
    pub path: Vec<String>,
}

impl CountKey {
    pub fn new<S: Into<String>>(path: impl IntoIterator<Item = S>) -> Self {
        let path: Vec<String> = path.into_iter().map(Into::into).collect();
        assert!(!path.is_empty(), "count key path must be non-empty");
        CountKey {
            level: path.len() - 1,
            path,
        }
    }

    pub fn name(&self) -> &str {
        &self.path[self.level]
    }

    /// True if one key's path is a proper prefix of the other's.
    pub fn is_ancestor_of(&self, other: &CountKey) -> bool {
        self.level < other.level && other.path[..=self.level] == self.path[..]
    }
}

/// Serialized as `level:name/name/...`.
impl fmt::Display for CountKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.path.join("/"))
    }
}

impl FromStr for CountKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MalformedKey(s.to_string());
        let (level, path) = s.split_once(':').ok_or_else(bad)?;
        let level: usize = level.parse().map_err(|_| bad())?;
        let path: Vec<String> = path.split('/').map(ToString::to_string).collect();
        if path.len() != level + 1 || path.iter().any(|p| p.is_empty()) {
            return Err(bad());
        }
        Ok(CountKey { level, path })
    }
}

/// The label universe: full label strings with dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    labels: Vec<String>,
    parsed: Vec<ParsedLabel>,
    index: BTreeMap<String, LabelId>,
    depth: usize,
}

impl LabelSchema {
    /// Induces a schema from observed labels. `O` is always added and gets id
    /// 0; the rest are sorted. Duplicates are merged.
    pub fn induce<S: AsRef<str>>(observed: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut rest: Vec<String> = observed
            .into_iter()
            .map(|s| s.as_ref().to_string())
            .filter(|s| s != OUTSIDE)
            .collect();
        rest.sort();
        rest.dedup();
        let mut labels = Vec::with_capacity(rest.len() + 1);
        labels.push(OUTSIDE.to_string());
        labels.extend(rest);
        Self::from_labels(labels)
    }

    /// Builds a schema keeping the given order as the id assignment.
    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        let mut index = BTreeMap::new();
        let mut parsed = Vec::with_capacity(labels.len());
        for (i, raw) in labels.iter().enumerate() {
            parsed.push(parse_label(raw)?);
            if index.insert(raw.clone(), LabelId::from(i)).is_some() {
                return Err(Error::DuplicateLabel(raw.clone()));
            }
        }
        if !index.contains_key(OUTSIDE) {
            return Err(Error::MissingOutside);
        }
        let depth = parsed
            .iter()
            .map(ParsedLabel::depth)
            .max()
            .unwrap_or(0)
            .max(1);
        Ok(LabelSchema {
            labels,
            parsed,
            index,
            depth,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: LabelId) -> &str {
        &self.labels[id.index()]
    }

    pub fn parsed(&self, id: LabelId) -> &ParsedLabel {
        &self.parsed[id.index()]
    }

    pub fn all_parsed(&self) -> &[ParsedLabel] {
        &self.parsed
    }

    pub fn id(&self, raw: &str) -> Option<LabelId> {
        self.index.get(raw).copied()
    }

    pub fn outside(&self) -> LabelId {
        self.index[OUTSIDE]
    }

    pub fn ids<S: AsRef<str>>(&self, raw: &[S]) -> Result<Vec<LabelId>> {
        raw.iter()
            .map(|s| {
                self.id(s.as_ref())
                    .ok_or_else(|| Error::UnknownLabel(s.as_ref().to_string()))
            })
            .collect()
    }

    pub fn parse_ids(&self, ids: &[LabelId]) -> Result<Vec<ParsedLabel>> {
        ids.iter()
            .map(|&id| {
                self.parsed
                    .get(id.index())
                    .cloned()
                    .ok_or(Error::LabelOutOfRange(id.index()))
            })
            .collect()
    }

    /// Checks a full sequence, returning the first offending position.
    pub fn first_invalid_transition(&self, ids: &[LabelId]) -> Result<Option<usize>> {
        let mut prev: Option<&ParsedLabel> = None;
        for (pos, id) in ids.iter().enumerate() {
            let next = self
                .parsed
                .get(id.index())
                .ok_or(Error::LabelOutOfRange(id.index()))?;
            if !validate_transition(prev, next) {
                return Ok(Some(pos));
            }
            prev = Some(next);
        }
        Ok(None)
    }
}

/// Every `(level, path)` opened by a `B` prefix somewhere in the schema,
/// sorted by level then path.
pub fn enumerate_count_keys(schema: &LabelSchema) -> Vec<CountKey> {
    let mut keys: Vec<CountKey> = schema
        .parsed
        .iter()
        .flat_map(ParsedLabel::begin_keys)
        .collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Number of segment openings per key.
pub fn count_vector(labels: &[ParsedLabel], keys: &[CountKey]) -> Vec<u32> {
    keys.iter()
        .map(|key| labels.iter().filter(|l| l.begins(key)).count() as u32)
        .collect()
}
