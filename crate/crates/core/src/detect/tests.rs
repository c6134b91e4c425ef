use std::sync::Arc;

use super::*;
use crate::corpus::read_corpus;
use crate::corpus::ReadOptions;
use crate::Lexicon;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

fn en_zh() -> LanguagePair {
    "en-zh".parse().unwrap()
}

fn detector() -> Detector {
    let lex = Lexicon::load(format!("{FIXTURES}/taxonomy_lexicon.tsv")).unwrap();
    Detector::new(en_zh(), Arc::new(LexiconEncoder::new(Arc::new(lex))), DetectorConfig::default()).unwrap()
}

fn taxonomy() -> Vec<Document> {
    read_corpus(format!("{FIXTURES}/taxonomy.jsonl"), ReadOptions::strict(Some(en_zh())))
        .unwrap()
        .collect::<Result<_>>()
        .unwrap()
}

fn texts<'a>(doc: &'a Document, segs: &[CsSegment]) -> Vec<&'a str> {
    segs.iter().map(|s| &doc.text[s.span.start..s.span.end]).collect()
}

#[test]
fn pure_document_has_no_candidates() {
    let doc = Document::new("d", "en", "Hello world. Nothing foreign here.");
    let sentences = Tagger::new(en_zh()).tag_document(&doc);
    assert!(detect_segments(&doc, &sentences, &en_zh()).unwrap().is_empty());
}

#[test]
fn kana_sentence_in_chinese_document_is_unrelated() {
    let doc = Document::new("d", "zh", "我们明天见。お客様、こちらのブラウスですと、よく合いますが。他走了。");
    let det = detector().detect_document(&doc).unwrap();
    assert_eq!(det.segments.len(), 1);
    assert_eq!(det.segments[0].category, Category::Unrelated);
    assert!(texts(&doc, &det.segments)[0].starts_with("お客様"));
}

#[test]
fn token_runs_join_over_list_punctuation() {
    let doc = &taxonomy()[3];
    let sentences = Tagger::new(en_zh()).tag_document(doc);
    let c = detect_segments(doc, &sentences, &en_zh()).unwrap();
    let found: Vec<&str> = c.iter().map(|c| &doc.text[c.span.start..c.span.end]).collect();
    assert_eq!(found, ["剃须刀、字典、镜子、毛巾、冰箱、微波炉、电脑", "书橱"]);
    assert!(c.iter().all(|c| c.level == Level::Token));
}

#[test]
fn token_annotation_fixture() {
    let doc = &taxonomy()[2];
    let det = detector().detect_document(doc).unwrap();
    assert_eq!(texts(doc, &det.segments), ["贴春联", "放鞭炮"]);
    for (s, partner) in det.segments.iter().zip(["Putting up Spring Couplet", "Burning Firecrackers"]) {
        assert_eq!((s.level, s.category), (Level::Token, Category::Annotation));
        let p = s.partner_span.unwrap();
        assert_eq!(&doc.text[p.start..p.end], partner);
    }
}

#[test]
fn taxonomy_categories() {
    let d = detector();
    let expected = [
        (Level::Sentence, Category::Annotation),
        (Level::Sentence, Category::Replacement),
        (Level::Token, Category::Annotation),
        (Level::Token, Category::Replacement),
    ];
    for (doc, want) in taxonomy().iter().zip(expected) {
        let det = d.detect_document(doc).unwrap();
        assert!(!det.segments.is_empty(), "{}", doc.id);
        for s in &det.segments {
            assert_eq!((s.level, s.category), want, "{}", doc.id);
            assert_eq!(s.category == Category::Annotation, s.partner_span.is_some());
        }
    }
}

#[test]
fn sentence_annotation_partner_and_confidence() {
    let doc = &taxonomy()[0];
    let det = detector().detect_document(doc).unwrap();
    assert_eq!(det.segments.len(), 1);
    let s = &det.segments[0];
    assert_eq!(s.confidence, 1.0);
    let p = s.partner_span.unwrap();
    assert!(doc.text[p.start..p.end].starts_with("Mike, the fruits stand"));
    assert!(!p.overlaps(&s.span));
}

struct Fixed(Vec<(&'static str, Vec<f32>)>);

impl CrossLingualEncoder for Fixed {
    fn dim(&self) -> usize {
        2
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        Ok(self
            .0
            .iter()
            .find(|(k, _)| text.contains(k))
            .map(|(_, v)| v.clone())
            .unwrap_or(vec![0.0, 1.0]))
    }
}

#[test]
fn threshold_monotonicity() {
    // The Chinese sentence sits at cosine 0.8 from its English neighbour.
    let enc = Fixed(vec![("水果", vec![0.8, 0.6]), ("fruit", vec![1.0, 0.0]), ("Other", vec![-1.0, 0.0])]);
    let doc = Document::new("d", "en", "Other words here. Buy some fruit. 买一些水果。");
    let sentences = Tagger::new(en_zh()).tag_document(&doc);
    let c = detect_segments(&doc, &sentences, &en_zh()).unwrap();
    assert_eq!(c.len(), 1);
    let mut prev_annt = true;
    for tau in [0.5, 0.7, 0.79, 0.8, 0.81, 0.9, 1.0] {
        let cfg = DetectorConfig {
            annt_similarity_threshold: tau,
            ..DetectorConfig::default()
        };
        let s = classify_sentence_segment(&c[0], &sentences, &doc, &en_zh(), &enc, &cfg).unwrap();
        let annt = s.category == Category::Annotation;
        assert!(prev_annt || !annt, "annotation reappeared at tau {tau}");
        prev_annt = annt;
        if !annt {
            assert!((s.confidence - 0.2).abs() < 1e-6);
        }
    }
    assert!(!prev_annt);
}

#[test]
fn identical_embedding_is_annotation() {
    let enc = Fixed(vec![("水果", vec![0.3, 0.4]), ("fruit", vec![0.3, 0.4])]);
    let doc = Document::new("d", "en", "Buy some fruit. 买一些水果。");
    let sentences = Tagger::new(en_zh()).tag_document(&doc);
    let c = detect_segments(&doc, &sentences, &en_zh()).unwrap();
    let cfg = DetectorConfig {
        annt_similarity_threshold: 1.0,
        ..DetectorConfig::default()
    };
    let s = classify_sentence_segment(&c[0], &sentences, &doc, &en_zh(), &enc, &cfg).unwrap();
    assert_eq!(s.category, Category::Annotation);
}

#[test]
fn window_limits_partner_search() {
    let enc = Fixed(vec![("水果", vec![1.0, 0.0]), ("fruit", vec![1.0, 0.0])]);
    let doc = Document::new("d", "en", "Buy some fruit. One more. Two more. Three more. 买一些水果。");
    let sentences = Tagger::new(en_zh()).tag_document(&doc);
    let c = detect_segments(&doc, &sentences, &en_zh()).unwrap();
    let s = classify_sentence_segment(&c[0], &sentences, &doc, &en_zh(), &enc, &DetectorConfig::default()).unwrap();
    assert_eq!(s.category, Category::Replacement);
}

#[test]
fn unrelated_sentence_and_token() {
    let d = detector();
    let doc = Document::new(
        "d",
        "en",
        "Some ordinary text. お客様、こちらのブラウスですと、いまお召しのスーツにもよく合いますが。 More text.",
    );
    let det = d.detect_document(&doc).unwrap();
    assert_eq!(det.segments.len(), 1);
    assert_eq!(det.segments[0].category, Category::Unrelated);

    let doc = Document::new("z", "zh", "zxx520llc发表于: 2个月前#9");
    let det = d.detect_document(&doc).unwrap();
    assert!(!det.segments.is_empty());
    assert!(det.segments.iter().all(|s| s.category == Category::Unrelated));
}

#[test]
fn secondary_side_document() {
    let d = detector();
    let doc = Document::new("z", "zh", "我们买点儿水果吧。比如盐酸(HCL)、硝酸。");
    let det = d.detect_document(&doc).unwrap();
    assert_eq!(texts(&doc, &det.segments), ["HCL"]);
    assert_eq!(det.segments[0].category, Category::Annotation);
}

#[test]
fn language_outside_pair_is_an_error() {
    let doc = Document::new("d", "fr", "Bonjour.");
    assert!(detector().detect_document(&doc).is_err());
}

struct Failing;

impl TokenLevelClassifier for Failing {
    fn classify(&self, _: &str, _: &str) -> Result<TokenVerdict> {
        Err(Error::Backend("down".into()))
    }
}

struct AlwaysRepl;

impl TokenLevelClassifier for AlwaysRepl {
    fn classify(&self, _: &str, _: &str) -> Result<TokenVerdict> {
        Ok(TokenVerdict {
            category: Category::Replacement,
            confidence: 0.8,
        })
    }
}

#[test]
fn backend_overrides_and_degrades() {
    let doc = &taxonomy()[2];
    let det = detector().with_token_classifier(Arc::new(AlwaysRepl)).detect_document(doc).unwrap();
    assert!(det.segments.iter().all(|s| s.category == Category::Replacement && s.partner_span.is_none()));
    assert!(!det.degraded);

    let det = detector().with_token_classifier(Arc::new(Failing)).detect_document(doc).unwrap();
    assert!(det.degraded);
    assert!(det.segments.iter().all(|s| s.category == Category::Annotation));
}

#[test]
fn corpus_order_and_errors() {
    let mut docs = taxonomy();
    docs.insert(1, Document::new("bad", "fr", "Bonjour."));
    let mut out = Vec::new();
    let report = detector()
        .detect_corpus(docs.iter().cloned().map(Ok), |d| {
            out.push(d);
            Ok(())
        })
        .unwrap();
    let ids: Vec<&str> = out.iter().map(|d| d.doc.id.as_str()).collect();
    assert_eq!(ids, ["tx-sent-annt", "bad", "tx-sent-repl", "tx-token-annt", "tx-token-repl"]);
    assert_eq!(report.documents, 5);
    assert_eq!(report.error_count, 1);
    assert!(out[1].segments.is_empty());

    let empty = detector().detect_corpus(std::iter::empty(), |_| Ok(())).unwrap();
    assert_eq!(empty.documents, 0);
}

#[test]
fn detected_record_key_order() {
    let doc = taxonomy().remove(2);
    let det = detector().detect_document(&doc).unwrap();
    let rec = DetectedDocument::new(doc, det.segments);
    let line = serde_json::to_string(&rec).unwrap();
    let keys: Vec<usize> = ["\"id\"", "\"lang\"", "\"text\"", "\"segments\""]
        .iter()
        .map(|k| line.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "{line}");
    assert!(line.contains(r#""level":"token","category":"annotation","partner_span":["#));
    let mut back: DetectedDocument = serde_json::from_str(&line).unwrap();
    fill_doc_ids(&mut back);
    assert_eq!(back, rec);
}

#[test]
fn config_validation() {
    for cfg in [
        DetectorConfig {
            annt_similarity_threshold: 0.0,
            ..DetectorConfig::default()
        },
        DetectorConfig {
            alignment_window: 0,
            ..DetectorConfig::default()
        },
        DetectorConfig {
            unrelated_symbol_ratio: 1.5,
            ..DetectorConfig::default()
        },
    ] {
        assert!(cfg.validate().is_err());
    }
}
