use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{synthesize_sentence, CsType, SynthesisPlan, TokenCounter, TokenCsGenerator, Translator};
use crate::corpus::{Document, DocumentSource, Span};
use crate::seed::{hash64, Stream};
use crate::tagging::{LanguageTag, Tagger};
use crate::{Error, Result};

/// Documents prepared ahead of the sequential commit.
const LOOKAHEAD: usize = 64;

#[derive(Clone, Copy)]
pub struct Backends<'a> {
    pub translator: &'a dyn Translator,
    pub generator: &'a dyn TokenCsGenerator,
    pub counter: &'a dyn TokenCounter,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AccountingReport {
    pub docs_touched: u64,
    pub sentences_modified: u64,
    pub tokens_added_by_lang: BTreeMap<String, u64>,
    pub tokens_removed_by_lang: BTreeMap<String, u64>,
    pub failures: u64,
    /// Sum of per-sentence opposite-language deltas.
    pub added_tokens: i64,
    /// Largest single-sentence delta committed.
    pub max_delta: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shortfall: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AccountingReport {
    pub fn merge(&mut self, other: &AccountingReport) {
        self.docs_touched += other.docs_touched;
        self.sentences_modified += other.sentences_modified;
        for (mine, theirs) in [
            (&mut self.tokens_added_by_lang, &other.tokens_added_by_lang),
            (&mut self.tokens_removed_by_lang, &other.tokens_removed_by_lang),
        ] {
            for (lang, n) in theirs {
                *mine.entry(lang.clone()).or_default() += n;
            }
        }
        self.failures += other.failures;
        self.added_tokens += other.added_tokens;
        self.max_delta = self.max_delta.max(other.max_delta);
        self.budget = match (self.budget, other.budget) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        };
        self.shortfall = match (self.shortfall, other.shortfall) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        };
        self.warnings.extend(other.warnings.iter().cloned());
    }
}

/// One committed sentence rewrite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Modification {
    pub doc_id: String,
    #[serde(skip)]
    pub doc_index: usize,
    pub sentence_index: usize,
    pub cs_type: CsType,
    /// Span of the original sentence in the input text.
    pub original_span: Span,
    /// Span of the rewritten sentence in the output text.
    pub span: Span,
    pub delta: i64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthesisOutcome {
    /// Rewritten documents by position in the source.
    pub modified: BTreeMap<usize, Document>,
    pub report: AccountingReport,
    /// Committed rewrites, in commit order.
    pub log: Vec<Modification>,
}

impl SynthesisOutcome {
    /// Streams `docs` (the source, in order) to `sink`, substituting the
    /// rewritten documents.
    pub fn apply<I, F>(&self, docs: I, mut sink: F) -> Result<usize>
    where
        I: IntoIterator<Item = Result<Document>>,
        F: FnMut(Document) -> Result<()>,
    {
        let mut n = 0;
        for (i, doc) in docs.into_iter().enumerate() {
            let doc = doc?;
            match self.modified.get(&i) {
                Some(m) if m.id == doc.id => sink(m.clone())?,
                Some(m) => {
                    return Err(Error::Config(format!(
                        "document {i} is {:?} but the synthesis run saw {:?}",
                        doc.id, m.id
                    )))
                }
                None => sink(doc)?,
            }
            n += 1;
        }
        Ok(n)
    }
}

struct Edit {
    sentence_index: usize,
    span: Span,
    text: String,
    /// Change in inserted-language tokens.
    delta: i64,
    /// Change in document-language tokens.
    src_delta: i64,
}

type Prepared = Vec<std::result::Result<Edit, String>>;

/// Rewrites for one document: selected sentences in text order, each either
/// an edit or a backend failure message.
fn prepare(doc: &Document, plan: &SynthesisPlan, tagger: &Tagger, backends: &Backends) -> Prepared {
    let pair = tagger.pair();
    let (src, tgt) = plan.side.langs(pair);
    let native = LanguageTag::pure_for(pair, src).expect("side language belongs to pair");
    let sentences = tagger.tag_document(doc);
    let mut pure: Vec<usize> = (0..sentences.len()).filter(|&i| sentences[i].tag == native).collect();
    let k = ((plan.sentence_density * pure.len() as f64).ceil() as usize).min(pure.len());
    let mut stream = Stream::for_key(plan.seed, &doc.id);
    stream.partial_shuffle(&mut pure, k);
    let mut chosen = pure[..k].to_vec();
    chosen.sort_unstable();

    let count = |text: &str, lang: &str| backends.counter.count(text, lang) as i64;
    chosen
        .into_iter()
        .map(|i| {
            let span = sentences[i].span;
            let old = &doc.text[span.start..span.end];
            synthesize_sentence(old, plan.cs_type, src, tgt, backends.translator, backends.generator)
                .map(|new| Edit {
                    sentence_index: i,
                    span,
                    delta: count(&new, tgt) - count(old, tgt),
                    src_delta: count(&new, src) - count(old, src),
                    text: new,
                })
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn bump(map: &mut BTreeMap<String, u64>, lang: &str, n: i64) {
    if n > 0 {
        *map.entry(lang.to_string()).or_default() += n as u64;
    }
}

/// Eligible document positions in visiting order: sorted by a seeded hash
/// of the id, then cut to the document cap.
fn visiting_order(source: &dyn DocumentSource, mut eligible: Vec<usize>, plan: &SynthesisPlan) -> Vec<usize> {
    eligible.sort_by_cached_key(|&i| (hash64(plan.seed, source.id(i)), i));
    let cap = (plan.doc_eligibility_cap * eligible.len() as f64 + 1e-9).floor() as usize;
    eligible.truncate(cap.min(eligible.len()));
    eligible
}

/// Runs `plan` over the documents of `source` written in the plan's side
/// language.
///
/// Documents are visited in seeded order and prepared in parallel batches;
/// rewrites are committed one sentence at a time in that order until the
/// budget is reached, so the result does not depend on the thread count.
pub fn allocate_and_synthesize(
    source: &dyn DocumentSource,
    plan: &SynthesisPlan,
    tagger: &Tagger,
    backends: &Backends,
) -> Result<SynthesisOutcome> {
    let (lang, _) = plan.side.langs(tagger.pair());
    let eligible = (0..source.len()).filter(|&i| source.lang(i) == lang).collect();
    run_on(source, eligible, plan, tagger, backends)
}

pub(crate) fn run_on(
    source: &dyn DocumentSource,
    eligible: Vec<usize>,
    plan: &SynthesisPlan,
    tagger: &Tagger,
    backends: &Backends,
) -> Result<SynthesisOutcome> {
    plan.validate()?;
    let pair = tagger.pair();
    let (src, tgt) = plan.side.langs(pair);
    let mut out = SynthesisOutcome::default();
    out.report.budget = plan.token_budget;
    out.report.warnings = plan.warnings();
    let budget = plan.token_budget.map(|b| b as i64);
    let reached = |added: i64| budget.is_some_and(|b| added >= b);

    let order = visiting_order(source, eligible, plan);
    'batches: for batch in order.chunks(LOOKAHEAD) {
        if reached(out.report.added_tokens) {
            break;
        }
        let prepared: Vec<Result<(Document, Prepared)>> = batch
            .par_iter()
            .map(|&i| {
                let doc = source.load(i)?;
                let edits = prepare(&doc, plan, tagger, backends);
                Ok((doc, edits))
            })
            .collect();
        for (&idx, item) in batch.iter().zip(prepared) {
            let (doc, edits) = item?;
            let mut committed: Vec<Edit> = Vec::new();
            let mut stop = false;
            for edit in edits {
                if reached(out.report.added_tokens) {
                    stop = true;
                    break;
                }
                match edit {
                    Ok(e) => {
                        let r = &mut out.report;
                        r.added_tokens += e.delta;
                        r.max_delta = r.max_delta.max(e.delta);
                        r.sentences_modified += 1;
                        bump(&mut r.tokens_added_by_lang, tgt, e.delta);
                        bump(&mut r.tokens_removed_by_lang, tgt, -e.delta);
                        bump(&mut r.tokens_added_by_lang, src, e.src_delta);
                        bump(&mut r.tokens_removed_by_lang, src, -e.src_delta);
                        committed.push(e);
                    }
                    Err(msg) => {
                        log::warn!("document {}: {} failed: {msg}", doc.id, plan.cs_type.name());
                        out.report.failures += 1;
                    }
                }
            }
            if !committed.is_empty() {
                out.report.docs_touched += 1;
                let doc = rewrite(doc, idx, &committed, plan.cs_type, &mut out.log);
                out.modified.insert(idx, doc);
            }
            if stop {
                break 'batches;
            }
        }
    }
    if let Some(b) = budget {
        if out.report.added_tokens < b {
            out.report.shortfall = Some((b - out.report.added_tokens) as u64);
        }
    }
    Ok(out)
}

fn rewrite(mut doc: Document, idx: usize, edits: &[Edit], cs_type: CsType, log: &mut Vec<Modification>) -> Document {
    let mut text = String::with_capacity(doc.text.len() + 64);
    let mut at = 0;
    for e in edits {
        text.push_str(&doc.text[at..e.span.start]);
        let start = text.len();
        text.push_str(&e.text);
        log.push(Modification {
            doc_id: doc.id.clone(),
            doc_index: idx,
            sentence_index: e.sentence_index,
            cs_type,
            original_span: e.span,
            span: Span::new(start, text.len()),
            delta: e.delta,
        });
        at = e.span.end;
    }
    text.push_str(&doc.text[at..]);
    doc.text = text;
    doc
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::synth::{BuiltinCounter, DictionaryGenerator, DictionaryTranslator, PlanSide};
    use crate::{LanguagePair, Lexicon};

    fn fixture(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| {
                Document::new(
                    format!("d{i:03}"),
                    "en",
                    format!("Some plain words here. Let's buy some fruit. We need a razor and a dictionary. Closing line {i} today."),
                )
            })
            .collect()
    }

    struct Env {
        tagger: Tagger,
        t: DictionaryTranslator,
        g: DictionaryGenerator,
    }

    fn env() -> Env {
        let lex = Arc::new(
            Lexicon::parse_tsv(
                "let's\t我们\tc1\nbuy\t买\tc2\nsome\t一些\tc3\nfruit\t水果\tc4\nrazor\t剃须刀\tc5\ndictionary\t字典\tc6\n",
            )
            .unwrap(),
        );
        let pair: LanguagePair = "en-zh".parse().unwrap();
        Env {
            tagger: Tagger::new(pair.clone()),
            t: DictionaryTranslator::new(lex.clone(), pair.clone()),
            g: DictionaryGenerator::new(lex, pair),
        }
    }

    #[allow(clippy::ptr_arg)]
    fn run(docs: &Vec<Document>, plan: &SynthesisPlan) -> SynthesisOutcome {
        let e = env();
        let b = Backends {
            translator: &e.t,
            generator: &e.g,
            counter: &BuiltinCounter,
        };
        allocate_and_synthesize(docs, plan, &e.tagger, &b).unwrap()
    }

    #[test]
    fn zero_budget_is_identity() {
        let docs = fixture(20);
        let plan = SynthesisPlan::new(PlanSide::InPrimary, CsType::SentRepl)
            .with_budget(0)
            .with_cap(1.0);
        let out = run(&docs, &plan);
        assert!(out.modified.is_empty());
        assert_eq!(out.report.added_tokens, 0);
        assert_eq!(out.report.sentences_modified, 0);
    }

    #[test]
    fn budget_window() {
        let docs = fixture(100);
        let plan = SynthesisPlan::new(PlanSide::InPrimary, CsType::SentAnnt)
            .with_budget(500)
            .with_density(1.0)
            .with_cap(1.0)
            .with_seed(9);
        let out = run(&docs, &plan);
        let t = out.report.added_tokens;
        assert!(t >= 500 && t < 500 + out.report.max_delta, "{t}");
        assert_eq!(out.report.shortfall, None);
        // Replay: the deltas in the log sum to the reported total.
        assert_eq!(out.log.iter().map(|m| m.delta).sum::<i64>(), t);
    }

    #[test]
    fn cap_limits_documents() {
        let docs = fixture(50);
        let plan = SynthesisPlan::new(PlanSide::InPrimary, CsType::TokenRepl).with_density(1.0);
        let out = run(&docs, &plan);
        assert_eq!(out.modified.len(), 10);
        assert!(out.report.failures > 0);
    }

    #[test]
    fn shortfall_reported() {
        let docs = fixture(5);
        let plan = SynthesisPlan::new(PlanSide::InPrimary, CsType::TokenRepl)
            .with_budget(1_000)
            .with_cap(1.0)
            .with_density(1.0);
        let out = run(&docs, &plan);
        assert_eq!(out.report.shortfall, Some(1_000 - out.report.added_tokens as u64));
    }

    #[test]
    fn apply_substitutes_in_order() {
        let docs = fixture(10);
        let plan = SynthesisPlan::new(PlanSide::InPrimary, CsType::SentRepl)
            .with_cap(0.5)
            .with_density(1.0);
        let out = run(&docs, &plan);
        let mut written = Vec::new();
        out.apply(docs.iter().cloned().map(Ok), |d| {
            written.push(d);
            Ok(())
        })
        .unwrap();
        assert_eq!(written.len(), 10);
        let changed = written.iter().zip(&docs).filter(|(a, b)| a.text != b.text).count();
        assert_eq!(changed, 5);
        for m in &out.log {
            let doc = &written[m.doc_index];
            assert!(!doc.text[m.span.start..m.span.end].contains("Let's"));
        }
    }
}
