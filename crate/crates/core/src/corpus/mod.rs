//! Documents, language pairs and the on-disk formats shared by every stage.

mod embedding;
mod jsonl;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::tagging::ScriptProfile;
use crate::{Error, Result};

pub use embedding::{read_embeddings, write_embeddings, EmbeddingMatrix};
pub use jsonl::{
    read_corpus, write_corpus, write_jsonl, CorpusReader, DocumentSource, IndexedCorpus,
    JsonlRecord, ReadOptions, ReadWarning, MAX_KEPT_WARNINGS,
};

/// A primary/secondary language pair together with the rule used to tell
/// their scripts apart.
#[derive(Debug, Clone)]
pub struct LanguagePair {
    primary: String,
    secondary: String,
    profile: Arc<ScriptProfile>,
}

impl LanguagePair {
    /// Builds a pair backed by one of the built-in script profiles
    /// (`en-zh`, `en-bn`, `en-ro`).
    pub fn builtin(primary: &str, secondary: &str) -> Result<Self> {
        let name = format!("{primary}-{secondary}");
        let profile = ScriptProfile::builtin(&name)
            .ok_or_else(|| Error::InvalidPair(format!("no built-in script profile for {name}")))?;
        Self::with_profile(primary, secondary, profile)
    }

    pub fn with_profile(primary: &str, secondary: &str, profile: ScriptProfile) -> Result<Self> {
        if primary.is_empty() || secondary.is_empty() {
            return Err(Error::InvalidPair("language codes must be non-empty".into()));
        }
        if primary == secondary {
            return Err(Error::InvalidPair(format!(
                "primary and secondary language are both {primary:?}"
            )));
        }
        Ok(LanguagePair {
            primary: primary.to_string(),
            secondary: secondary.to_string(),
            profile: Arc::new(profile),
        })
    }

    pub fn primary(&self) -> &str {
        &self.primary
    }

    pub fn secondary(&self) -> &str {
        &self.secondary
    }

    pub fn profile(&self) -> &ScriptProfile {
        &self.profile
    }

    pub fn contains(&self, lang: &str) -> bool {
        lang == self.primary || lang == self.secondary
    }

    /// The other language of the pair, if `lang` belongs to it.
    pub fn opposite(&self, lang: &str) -> Option<&str> {
        if lang == self.primary {
            Some(&self.secondary)
        } else if lang == self.secondary {
            Some(&self.primary)
        } else {
            None
        }
    }

    pub fn is_primary(&self, lang: &str) -> bool {
        lang == self.primary
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.primary, self.secondary)
    }
}

impl FromStr for LanguagePair {
    type Err = Error;

    /// Parses `en-zh` style codes into a built-in pair.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidPair(format!("expected <primary>-<secondary>, got {s:?}")))?;
        LanguagePair::builtin(a.trim(), b.trim())
    }
}

/// One corpus record.
///
/// `meta` is carried through every pipeline untouched; it is omitted from the
/// serialized form when empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub lang: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub meta: Map<String, Value>,
}

impl Document {
    pub fn new(id: impl Into<String>, lang: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            lang: lang.into(),
            text: text.into(),
            meta: Map::new(),
        }
    }

    pub(crate) fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.text.trim().is_empty() {
            return Err("text is empty after trimming whitespace".into());
        }
        Ok(())
    }
}

/// Half-open byte range `[start, end)` into a document's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Slices `text`, or `None` when the span is out of bounds or does not
    /// fall on char boundaries.
    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        text.get(self.start..self.end)
    }
}

impl From<[usize; 2]> for Span {
    fn from(v: [usize; 2]) -> Self {
        Span::new(v[0], v[1].max(v[0]))
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}
