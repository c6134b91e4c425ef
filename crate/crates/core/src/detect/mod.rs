//! Code-switching segment detection and classification.
//!
//! A document is split and tagged, foreign material becomes candidate
//! segments (whole sentences or runs of foreign script inside mixed
//! sentences), unrelated noise is screened out, and the remainder is split
//! into annotation vs replacement: by translation-pair search for sentences,
//! by bracket context (or a classifier backend) for tokens.

mod encoder;
mod token;
mod unrelated;

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, JsonlRecord, LanguagePair, ReadWarning, Span};
use crate::tagging::{LanguageTag, ScriptClass, Sentence, SentenceClassifier, Tagger};
use crate::{Error, Result};

pub use encoder::{cosine, CrossLingualEncoder, LexiconEncoder};
pub use token::{
    classify_token_heuristic, TokenLevelClassifier, TokenVerdict,
    HEURISTIC_ANNOTATION_CONFIDENCE, HEURISTIC_REPLACEMENT_CONFIDENCE,
};
pub use unrelated::{garbled_ratio, screen, screen_unrelated, UnrelatedScreen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Sentence,
    Token,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Annotation,
    Replacement,
    Unrelated,
}

/// A detected, classified code-switching span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsSegment {
    #[serde(skip)]
    pub doc_id: String,
    pub span: Span,
    pub level: Level,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_span: Option<Span>,
    pub confidence: f64,
}

/// A segment whose category has not been decided yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub span: Span,
    pub level: Level,
    /// Index of the containing sentence.
    pub sentence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Minimum cosine similarity for a sentence to count as a translation.
    pub annt_similarity_threshold: f64,
    /// Sentence distance searched on each side for a translation partner.
    pub alignment_window: usize,
    pub unrelated_other_script_ratio: f64,
    pub unrelated_symbol_ratio: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            annt_similarity_threshold: 0.70,
            alignment_window: 2,
            unrelated_other_script_ratio: 0.30,
            unrelated_symbol_ratio: 0.50,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let tau = self.annt_similarity_threshold;
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Config(format!(
                "similarity threshold must be in (0, 1], got {tau}"
            )));
        }
        if self.alignment_window == 0 {
            return Err(Error::Config("alignment window must be at least 1".into()));
        }
        for (name, r) in [
            ("other-script ratio", self.unrelated_other_script_ratio),
            ("symbol ratio", self.unrelated_symbol_ratio),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {r}")));
            }
        }
        Ok(())
    }
}

/// Script classes of the document's own language and of the foreign one.
fn native_and_foreign(doc: &Document, pair: &LanguagePair) -> Result<(ScriptClass, LanguageTag, ScriptClass, LanguageTag)> {
    if doc.lang == pair.primary() {
        Ok((
            ScriptClass::Primary,
            LanguageTag::PurePrimary,
            ScriptClass::Secondary,
            LanguageTag::PureSecondary,
        ))
    } else if doc.lang == pair.secondary() {
        Ok((
            ScriptClass::Secondary,
            LanguageTag::PureSecondary,
            ScriptClass::Primary,
            LanguageTag::PurePrimary,
        ))
    } else {
        Err(Error::Document {
            doc_id: doc.id.clone(),
            message: format!("language {:?} is not part of pair {pair}", doc.lang),
        })
    }
}

fn check_sentences(doc: &Document, sentences: &[Sentence]) -> Result<()> {
    let mut prev = 0;
    for s in sentences {
        if s.span.start < prev
            || s.span.end > doc.text.len()
            || !doc.text.is_char_boundary(s.span.start)
            || !doc.text.is_char_boundary(s.span.end)
        {
            return Err(Error::Document {
                doc_id: doc.id.clone(),
                message: format!("sentence span {:?} does not fit the document", s.span),
            });
        }
        prev = s.span.end;
    }
    Ok(())
}

/// Maximal runs of foreign-script characters inside `span`.
///
/// Characters of the foreign script or of an unrelated third script extend a
/// run; a gap of at most one punctuation/digit character plus at most one
/// whitespace character is bridged (so `剃须刀、字典` or `As a result, our`
/// stay one run). Native-script characters always end a run.
fn foreign_runs(text: &str, span: Span, foreign: ScriptClass, pair: &LanguagePair) -> Vec<Span> {
    let profile = pair.profile();
    let mut runs = Vec::new();
    let mut current: Option<Span> = None;
    let (mut gap_ws, mut gap_other) = (0usize, 0usize);
    for (b, c) in text[span.start..span.end].char_indices() {
        let at = span.start + b;
        match profile.classify(c) {
            class if class == foreign || class == ScriptClass::Other => {
                match current.as_mut() {
                    Some(run) => run.end = at + c.len_utf8(),
                    None => current = Some(Span::new(at, at + c.len_utf8())),
                }
                gap_ws = 0;
                gap_other = 0;
            }
            ScriptClass::Neutral if current.is_some() => {
                if c.is_whitespace() {
                    gap_ws += 1;
                } else {
                    gap_other += 1;
                }
                if gap_ws > 1 || gap_other > 1 {
                    runs.extend(current.take());
                    gap_ws = 0;
                    gap_other = 0;
                }
            }
            ScriptClass::Neutral => {}
            _ => {
                runs.extend(current.take());
                gap_ws = 0;
                gap_other = 0;
            }
        }
    }
    runs.extend(current);
    runs
}

/// Finds code-switching candidates in a tagged document.
///
/// For a document in language A, every sentence purely in language B is a
/// sentence-level candidate, and every foreign run inside a mixed sentence
/// is a token-level candidate. Sentences written in an unrelated script
/// (tag `Other` with enough third-script characters, or a native tag with
/// more third-script than native characters, as with kanji-and-kana text in a
/// Chinese document) are also sentence-level candidates so the unrelated
/// screen can see them.
pub fn detect_segments(
    doc: &Document,
    sentences: &[Sentence],
    pair: &LanguagePair,
) -> Result<Vec<Candidate>> {
    check_sentences(doc, sentences)?;
    let (native, native_tag, foreign, foreign_tag) = native_and_foreign(doc, pair)?;
    let profile = pair.profile();
    let mut out = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        match s.tag {
            tag if tag == foreign_tag => out.push(Candidate {
                span: s.span,
                level: Level::Sentence,
                sentence: i,
            }),
            LanguageTag::Mixed => {
                out.extend(foreign_runs(&doc.text, s.span, foreign, pair).into_iter().map(
                    |span| Candidate {
                        span,
                        level: Level::Token,
                        sentence: i,
                    },
                ));
            }
            tag if tag == native_tag => {
                let counts = profile.counts(&doc.text[s.span.start..s.span.end]);
                let native_chars = if native == ScriptClass::Primary { counts.primary } else { counts.secondary };
                if counts.other >= profile.min_chars && counts.other > native_chars {
                    out.push(Candidate {
                        span: s.span,
                        level: Level::Sentence,
                        sentence: i,
                    });
                }
            }
            LanguageTag::Other => {
                let counts = profile.counts(&doc.text[s.span.start..s.span.end]);
                if counts.other >= profile.min_chars {
                    out.push(Candidate {
                        span: s.span,
                        level: Level::Sentence,
                        sentence: i,
                    });
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

fn segment(doc: &Document, c: &Candidate, category: Category, partner: Option<Span>, confidence: f64) -> CsSegment {
    CsSegment {
        doc_id: doc.id.clone(),
        span: c.span,
        level: c.level,
        category,
        partner_span: partner,
        confidence: confidence.clamp(0.0, 1.0),
    }
}

/// Decides annotation vs replacement for a sentence-level candidate by
/// searching the `alignment_window` sentences on each side for a native
/// sentence whose embedding is at least `annt_similarity_threshold` similar.
pub fn classify_sentence_segment(
    candidate: &Candidate,
    sentences: &[Sentence],
    doc: &Document,
    pair: &LanguagePair,
    encoder: &dyn CrossLingualEncoder,
    cfg: &DetectorConfig,
) -> Result<CsSegment> {
    let (_, native_tag, _, _) = native_and_foreign(doc, pair)?;
    let text = &doc.text;
    let embed = |span: Span| {
        encoder.embed(&text[span.start..span.end]).map_err(|e| Error::Document {
            doc_id: doc.id.clone(),
            message: format!("encoder failed: {e}"),
        })
    };
    let own = embed(candidate.span)?;
    let i = candidate.sentence;
    let lo = i.saturating_sub(cfg.alignment_window);
    let hi = (i + cfg.alignment_window).min(sentences.len().saturating_sub(1));
    let mut best: Option<(f64, Span)> = None;
    for (j, s) in sentences.iter().enumerate().take(hi + 1).skip(lo) {
        if j == i || s.tag != native_tag {
            continue;
        }
        let sim = cosine(&own, &embed(s.span)?);
        if best.is_none_or(|(b, _)| sim > b) {
            best = Some((sim, s.span));
        }
    }
    let max_sim = best.map_or(0.0, |(b, _)| b.max(0.0));
    Ok(match best {
        Some((sim, partner)) if sim >= cfg.annt_similarity_threshold => {
            segment(doc, candidate, Category::Annotation, Some(partner), sim)
        }
        _ => segment(doc, candidate, Category::Replacement, None, 1.0 - max_sim),
    })
}

/// Decides annotation vs replacement for a token-level candidate.
///
/// Returns the segment and whether the classifier backend failed (the
/// heuristic verdict is used in that case).
pub fn classify_token_segment(
    candidate: &Candidate,
    sentences: &[Sentence],
    doc: &Document,
    pair: &LanguagePair,
    classifier: Option<&dyn TokenLevelClassifier>,
) -> Result<(CsSegment, bool)> {
    let (native, _, _, _) = native_and_foreign(doc, pair)?;
    let profile = pair.profile();
    let sentence = sentences[candidate.sentence].span;
    let text = &doc.text;
    let (category, partner, confidence) =
        classify_token_heuristic(text, sentence, candidate.span, native, profile);
    let Some(backend) = classifier else {
        return Ok((segment(doc, candidate, category, partner, confidence), false));
    };
    let seg_text = &text[candidate.span.start..candidate.span.end];
    match backend.classify(seg_text, &text[sentence.start..sentence.end]) {
        Ok(verdict) => {
            let partner = match verdict.category {
                Category::Annotation => partner
                    .or_else(|| {
                        token::preceding_native_run(text, sentence, candidate.span.start, native, profile)
                    })
                    .or_else(|| {
                        token::following_native_run(text, sentence, candidate.span.end, native, profile)
                    }),
                _ => None,
            };
            if verdict.category == Category::Annotation && partner.is_none() {
                // No native text to annotate; keep the heuristic verdict.
                return Ok((segment(doc, candidate, category, None, confidence), false));
            }
            Ok((segment(doc, candidate, verdict.category, partner, verdict.confidence), false))
        }
        Err(e) => {
            log::warn!("document {}: token classifier failed, using heuristic: {e}", doc.id);
            Ok((segment(doc, candidate, category, partner, confidence), true))
        }
    }
}

/// Detection result for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocDetection {
    pub segments: Vec<CsSegment>,
    /// The token classifier backend failed at least once.
    pub degraded: bool,
}

/// A corpus record augmented with its segments; serialized with key order
/// `id, lang, text, meta, segments`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedDocument {
    #[serde(flatten)]
    pub doc: Document,
    #[serde(default)]
    pub segments: Vec<CsSegment>,
}

impl DetectedDocument {
    pub fn new(doc: Document, mut segments: Vec<CsSegment>) -> Self {
        for s in &mut segments {
            s.doc_id.clone_from(&doc.id);
        }
        DetectedDocument { doc, segments }
    }

    /// At least one segment that is not unrelated noise.
    pub fn has_related_cs(&self) -> bool {
        self.segments.iter().any(|s| s.category != Category::Unrelated)
    }
}

impl JsonlRecord for DetectedDocument {
    fn document(&self) -> &Document {
        &self.doc
    }
}

/// Restores `doc_id` on segments after deserialization.
pub fn fill_doc_ids(record: &mut DetectedDocument) {
    for s in &mut record.segments {
        s.doc_id.clone_from(&record.doc.id);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocError {
    pub doc_id: String,
    pub message: String,
}

/// Aggregate outcome of a detection run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DetectionReport {
    pub documents: usize,
    pub documents_with_segments: usize,
    pub segments: usize,
    pub degraded_documents: usize,
    pub error_count: usize,
    pub errors: Vec<DocError>,
    pub read_warning_count: usize,
    pub read_warnings: Vec<ReadWarning>,
}

/// The detection pipeline: tag, find candidates, screen, classify.
#[derive(Clone)]
pub struct Detector {
    tagger: Tagger,
    encoder: Arc<dyn CrossLingualEncoder>,
    token_classifier: Option<Arc<dyn TokenLevelClassifier>>,
    cfg: DetectorConfig,
}

impl Detector {
    pub fn new(pair: LanguagePair, encoder: Arc<dyn CrossLingualEncoder>, cfg: DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Detector {
            tagger: Tagger::new(pair),
            encoder,
            token_classifier: None,
            cfg,
        })
    }

    pub fn with_token_classifier(mut self, classifier: Arc<dyn TokenLevelClassifier>) -> Self {
        self.token_classifier = Some(classifier);
        self
    }

    pub fn with_sentence_classifier(mut self, classifier: Arc<dyn SentenceClassifier>) -> Self {
        self.tagger = self.tagger.with_classifier(classifier);
        self
    }

    pub fn pair(&self) -> &LanguagePair {
        self.tagger.pair()
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    pub fn detect_document(&self, doc: &Document) -> Result<DocDetection> {
        let pair = self.tagger.pair();
        let sentences = self.tagger.tag_document(doc);
        let candidates = detect_segments(doc, &sentences, pair)?;
        let mut segments = Vec::with_capacity(candidates.len());
        let mut degraded = false;
        // Sentence embeddings are reused across candidates of one document.
        let cache = CachedEncoder::new(self.encoder.as_ref());
        for c in &candidates {
            let seg_text = &doc.text[c.span.start..c.span.end];
            let context = &doc.text[sentences[c.sentence].span.start..sentences[c.sentence].span.end];
            let verdict = screen(seg_text, context, pair.profile(), &self.cfg);
            if verdict.unrelated {
                segments.push(segment(doc, c, Category::Unrelated, None, verdict.strength()));
                continue;
            }
            match c.level {
                Level::Sentence => {
                    segments.push(classify_sentence_segment(c, &sentences, doc, pair, &cache, &self.cfg)?);
                }
                Level::Token => {
                    let (seg, failed) = classify_token_segment(
                        c,
                        &sentences,
                        doc,
                        pair,
                        self.token_classifier.as_deref(),
                    )?;
                    degraded |= failed;
                    segments.push(seg);
                }
            }
        }
        Ok(DocDetection { segments, degraded })
    }

    /// Runs detection over a document stream, handing results to `sink` in
    /// input order. Documents are processed in parallel batches on the
    /// current rayon pool; output does not depend on the pool size.
    ///
    /// Per-document failures are recorded in the report and the document is
    /// passed on without segments. Stream errors abort the run.
    pub fn detect_corpus<I, F>(&self, docs: I, mut sink: F) -> Result<DetectionReport>
    where
        I: IntoIterator<Item = Result<Document>>,
        F: FnMut(DetectedDocument) -> Result<()>,
    {
        const BATCH: usize = 512;
        let mut report = DetectionReport::default();
        let mut batch = Vec::with_capacity(BATCH);
        let mut iter = docs.into_iter();
        loop {
            batch.clear();
            for doc in iter.by_ref().take(BATCH) {
                batch.push(doc?);
            }
            if batch.is_empty() {
                break;
            }
            let results: Vec<Result<DocDetection>> =
                batch.par_iter().map(|d| self.detect_document(d)).collect();
            for (doc, result) in batch.drain(..).zip(results) {
                report.documents += 1;
                let segments = match result {
                    Ok(det) => {
                        report.degraded_documents += usize::from(det.degraded);
                        det.segments
                    }
                    Err(e) => {
                        report.error_count += 1;
                        if report.errors.len() < crate::corpus::MAX_KEPT_WARNINGS {
                            report.errors.push(DocError {
                                doc_id: doc.id.clone(),
                                message: e.to_string(),
                            });
                        }
                        Vec::new()
                    }
                };
                report.segments += segments.len();
                report.documents_with_segments += usize::from(!segments.is_empty());
                sink(DetectedDocument::new(doc, segments))?;
            }
        }
        Ok(report)
    }
}

struct CachedEncoder<'a> {
    inner: &'a dyn CrossLingualEncoder,
    cache: std::sync::Mutex<HashMap<String, Vec<f32>>>,
}

impl<'a> CachedEncoder<'a> {
    fn new(inner: &'a dyn CrossLingualEncoder) -> Self {
        CachedEncoder {
            inner,
            cache: Default::default(),
        }
    }
}

impl CrossLingualEncoder for CachedEncoder<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        if let Some(v) = self.cache.lock().unwrap().get(text) {
            return Ok(v.clone());
        }
        let v = self.inner.embed(text)?;
        self.cache.lock().unwrap().insert(text.to_string(), v.clone());
        Ok(v)
    }
}

#[cfg(test)]
mod tests;
