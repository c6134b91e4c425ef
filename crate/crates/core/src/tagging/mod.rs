//! Sentence segmentation and per-sentence language tagging.

mod classifier;
mod profile;
mod splitter;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LanguagePair, Span};

pub use classifier::{Classification, DiacriticClassifier, SentenceClassifier};
pub use profile::{CodeRange, ScriptClass, ScriptCounts, ScriptProfile};
pub use splitter::split_sentences;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LanguageTag {
    PurePrimary,
    PureSecondary,
    Mixed,
    Other,
}

impl LanguageTag {
    /// The tag a sentence written purely in `lang` receives.
    pub fn pure_for(pair: &LanguagePair, lang: &str) -> Option<LanguageTag> {
        if lang == pair.primary() {
            Some(LanguageTag::PurePrimary)
        } else if lang == pair.secondary() {
            Some(LanguageTag::PureSecondary)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sentence {
    pub span: Span,
    pub tag: LanguageTag,
}

/// Tags one sentence by counting script characters.
///
/// With `p` primary and `s` secondary characters: `p >= min_chars, s = 0` is
/// pure primary, the mirror case is pure secondary, and any sentence with
/// both scripts is mixed. Everything else goes to the fallback classifier,
/// or is `Other` without one. Profiles whose languages share a script ask
/// the classifier first.
pub fn tag_sentence_language(
    text: &str,
    pair: &LanguagePair,
    fallback: Option<&dyn SentenceClassifier>,
) -> LanguageTag {
    let profile = pair.profile();
    let counts = profile.counts(text);
    let (p, s) = (counts.primary, counts.secondary);
    if profile.needs_classifier {
        if let Some(classifier) = fallback {
            if p + s >= profile.min_chars {
                let verdict = classifier.classify(text);
                return LanguageTag::pure_for(pair, &verdict.lang).unwrap_or(LanguageTag::Other);
            }
        }
    }
    if p >= profile.min_chars && s == 0 {
        LanguageTag::PurePrimary
    } else if s >= profile.min_chars && p == 0 {
        LanguageTag::PureSecondary
    } else if p >= 1 && s >= 1 {
        LanguageTag::Mixed
    } else if let Some(classifier) = fallback {
        let verdict = classifier.classify(text);
        LanguageTag::pure_for(pair, &verdict.lang).unwrap_or(LanguageTag::Other)
    } else {
        LanguageTag::Other
    }
}

/// Splits and tags documents for one language pair.
#[derive(Clone)]
pub struct Tagger {
    pair: LanguagePair,
    fallback: Option<Arc<dyn SentenceClassifier>>,
}

impl Tagger {
    pub fn new(pair: LanguagePair) -> Self {
        Tagger {
            pair,
            fallback: None,
        }
    }

    pub fn with_classifier(mut self, classifier: Arc<dyn SentenceClassifier>) -> Self {
        self.fallback = Some(classifier);
        self
    }

    pub fn pair(&self) -> &LanguagePair {
        &self.pair
    }

    pub fn tag_text(&self, text: &str) -> Vec<Sentence> {
        split_sentences(text)
            .into_iter()
            .map(|span| Sentence {
                span,
                tag: tag_sentence_language(&text[span.start..span.end], &self.pair, self.fallback.as_deref()),
            })
            .collect()
    }

    pub fn tag_document(&self, doc: &Document) -> Vec<Sentence> {
        self.tag_text(&doc.text)
    }
}

/// Convenience wrapper around [`Tagger::tag_document`] without a classifier.
pub fn tag_document(doc: &Document, pair: &LanguagePair) -> Vec<Sentence> {
    Tagger::new(pair.clone()).tag_document(doc)
}
