//! Segment and document counts per code-switching class.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::detect::{Category, CsSegment, DetectedDocument, Level};
use crate::{Error, Result};

/// The five segment classes of a distribution report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentClass {
    SentAnnt,
    SentRepl,
    TokenAnnt,
    TokenRepl,
    Unrelated,
}

impl SegmentClass {
    pub const ALL: [SegmentClass; 5] = [
        SegmentClass::SentAnnt,
        SegmentClass::SentRepl,
        SegmentClass::TokenAnnt,
        SegmentClass::TokenRepl,
        SegmentClass::Unrelated,
    ];

    pub fn of(level: Level, category: Category) -> SegmentClass {
        match (level, category) {
            (_, Category::Unrelated) => SegmentClass::Unrelated,
            (Level::Sentence, Category::Annotation) => SegmentClass::SentAnnt,
            (Level::Sentence, Category::Replacement) => SegmentClass::SentRepl,
            (Level::Token, Category::Annotation) => SegmentClass::TokenAnnt,
            (Level::Token, Category::Replacement) => SegmentClass::TokenRepl,
        }
    }

    pub fn of_segment(s: &CsSegment) -> SegmentClass {
        Self::of(s.level, s.category)
    }

    pub fn name(self) -> &'static str {
        match self {
            SegmentClass::SentAnnt => "sent-annt",
            SegmentClass::SentRepl => "sent-repl",
            SegmentClass::TokenAnnt => "token-annt",
            SegmentClass::TokenRepl => "token-repl",
            SegmentClass::Unrelated => "unrelated",
        }
    }

    pub fn parse(name: &str) -> Option<SegmentClass> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub doc_total: u64,
    /// Documents with at least one segment of any class.
    pub doc_with_cs: u64,
    /// Documents with at least one segment that is not unrelated.
    pub doc_with_related_cs: u64,
    segments: [u64; 5],
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

impl CorpusStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_segments(&mut self, segments: &[CsSegment]) {
        self.doc_total += 1;
        if !segments.is_empty() {
            self.doc_with_cs += 1;
        }
        if segments.iter().any(|s| s.category != Category::Unrelated) {
            self.doc_with_related_cs += 1;
        }
        for s in segments {
            self.segments[SegmentClass::of_segment(s).index()] += 1;
        }
    }

    pub fn accumulate(&mut self, doc: &DetectedDocument) {
        self.add_segments(&doc.segments);
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        self.doc_total += other.doc_total;
        self.doc_with_cs += other.doc_with_cs;
        self.doc_with_related_cs += other.doc_with_related_cs;
        for (a, b) in self.segments.iter_mut().zip(other.segments) {
            *a += b;
        }
    }

    pub fn count(&self, class: SegmentClass) -> u64 {
        self.segments[class.index()]
    }

    pub fn total_segments(&self) -> u64 {
        self.segments.iter().sum()
    }

    /// Share of all segments in `class`; zero when there are no segments.
    pub fn ratio(&self, class: SegmentClass) -> f64 {
        ratio(self.count(class), self.total_segments())
    }

    pub fn doc_cs_ratio(&self) -> f64 {
        ratio(self.doc_with_cs, self.doc_total)
    }

    pub fn doc_related_cs_ratio(&self) -> f64 {
        ratio(self.doc_with_related_cs, self.doc_total)
    }

    fn report(&self) -> StatsReport {
        StatsReport {
            doc_total: self.doc_total,
            doc_with_cs: self.doc_with_cs,
            doc_with_related_cs: self.doc_with_related_cs,
            doc_cs_ratio: round4(self.doc_cs_ratio()),
            doc_related_cs_ratio: round4(self.doc_related_cs_ratio()),
            total_segments: self.total_segments(),
            segments_by_type: SegmentClass::ALL
                .iter()
                .map(|&c| (c.name().to_string(), self.count(c).into()))
                .collect(),
            ratios: SegmentClass::ALL
                .iter()
                .map(|&c| (c.name().to_string(), round4(self.ratio(c)).into()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report()).expect("stats serialize")
    }

    /// Rebuilds stats from a JSON report; counts are authoritative and the
    /// ratio fields are ignored.
    pub fn from_json(text: &str) -> Result<CorpusStats> {
        let r: StatsReport =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("stats json: {e}")))?;
        let mut stats = CorpusStats {
            doc_total: r.doc_total,
            doc_with_cs: r.doc_with_cs,
            doc_with_related_cs: r.doc_with_related_cs,
            segments: [0; 5],
        };
        for (name, n) in r.segments_by_type {
            let class = SegmentClass::parse(&name)
                .ok_or_else(|| Error::Config(format!("unknown segment type {name:?}")))?;
            stats.segments[class.index()] = n
                .as_u64()
                .ok_or_else(|| Error::Config(format!("count for {name:?} is not an integer")))?;
        }
        Ok(stats)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("type,count,ratio\n");
        for c in SegmentClass::ALL {
            writeln!(out, "{},{},{:.4}", c.name(), self.count(c), self.ratio(c)).unwrap();
        }
        out
    }

    /// Per-class segment counts from a CSV report.
    pub fn segment_counts_from_csv(text: &str) -> Result<Vec<(SegmentClass, u64)>> {
        let mut lines = text.lines();
        if lines.next() != Some("type,count,ratio") {
            return Err(Error::Config("csv report: bad header".into()));
        }
        lines
            .filter(|l| !l.is_empty())
            .map(|line| {
                let mut cols = line.split(',');
                let class = cols.next().and_then(SegmentClass::parse);
                let count = cols.next().and_then(|c| c.parse().ok());
                match (class, count) {
                    (Some(class), Some(count)) => Ok((class, count)),
                    _ => Err(Error::Config(format!("csv report: bad row {line:?}"))),
                }
            })
            .collect()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| type | count | ratio |\n|---|---:|---:|\n");
        for c in SegmentClass::ALL {
            writeln!(out, "| {} | {} | {:.4} |", c.name(), self.count(c), self.ratio(c)).unwrap();
        }
        writeln!(out, "| **total** | {} | {:.4} |", self.total_segments(), ratio(self.total_segments(), self.total_segments())).unwrap();
        writeln!(
            out,
            "\nDocuments: {} total, {} with code-switching ({:.4}), {} with related code-switching ({:.4})",
            self.doc_total,
            self.doc_with_cs,
            self.doc_cs_ratio(),
            self.doc_with_related_cs,
            self.doc_related_cs_ratio()
        )
        .unwrap();
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => self.to_markdown(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Serialize, Deserialize)]
struct StatsReport {
    doc_total: u64,
    doc_with_cs: u64,
    doc_with_related_cs: u64,
    doc_cs_ratio: f64,
    doc_related_cs_ratio: f64,
    total_segments: u64,
    segments_by_type: serde_json::Map<String, serde_json::Value>,
    ratios: serde_json::Map<String, serde_json::Value>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Span;

    fn seg(level: Level, category: Category) -> CsSegment {
        CsSegment {
            doc_id: "d".into(),
            span: Span::new(0, 1),
            level,
            category,
            partner_span: None,
            confidence: 1.0,
        }
    }

    fn planted() -> CorpusStats {
        let mut stats = CorpusStats::new();
        let plan = [
            (Level::Sentence, Category::Unrelated, 19),
            (Level::Token, Category::Replacement, 20),
            (Level::Token, Category::Annotation, 43),
            (Level::Sentence, Category::Annotation, 9),
            (Level::Sentence, Category::Replacement, 9),
        ];
        for (level, category, n) in plan {
            for _ in 0..n {
                stats.add_segments(&[seg(level, category)]);
            }
        }
        stats
    }

    #[test]
    fn empty_is_zero() {
        let s = CorpusStats::new();
        for c in SegmentClass::ALL {
            assert_eq!(s.ratio(c), 0.0);
        }
        assert_eq!(s.doc_cs_ratio(), 0.0);
        assert!(s.to_csv().lines().skip(1).all(|l| l.ends_with(",0,0.0000")));
    }

    #[test]
    fn one_doc_two_token_segments() {
        let mut s = CorpusStats::new();
        s.add_segments(&[
            seg(Level::Token, Category::Annotation),
            seg(Level::Token, Category::Replacement),
        ]);
        assert_eq!(s.ratio(SegmentClass::TokenAnnt), 0.5);
        assert_eq!(s.ratio(SegmentClass::TokenRepl), 0.5);
        assert_eq!(s.doc_cs_ratio(), 1.0);
    }

    #[test]
    fn planted_distribution() {
        let s = planted();
        let expected = [0.09, 0.09, 0.43, 0.20, 0.19];
        for (c, e) in SegmentClass::ALL.into_iter().zip(expected) {
            assert!((s.ratio(c) - e).abs() < 1e-12, "{c:?}");
        }
        let sum: f64 = SegmentClass::ALL.iter().map(|&c| s.ratio(c)).sum();
        assert!((sum - 1.0).abs() < 1e-9);
        let rows = CorpusStats::segment_counts_from_csv(&s.to_csv()).unwrap();
        assert_eq!(rows.iter().map(|r| r.1).sum::<u64>(), 100);
    }

    #[test]
    fn json_round_trip() {
        let s = planted();
        assert_eq!(CorpusStats::from_json(&s.to_json()).unwrap(), s);
        let z = CorpusStats::new();
        assert_eq!(CorpusStats::from_json(&z.to_json()).unwrap(), z);
    }

    #[test]
    fn unrelated_only_doc() {
        let mut s = CorpusStats::new();
        s.add_segments(&[seg(Level::Token, Category::Unrelated)]);
        s.add_segments(&[]);
        assert_eq!((s.doc_with_cs, s.doc_with_related_cs, s.doc_total), (1, 0, 2));
    }

    #[test]
    fn merge_matches_whole() {
        let whole = planted();
        let mut a = CorpusStats::new();
        let mut b = CorpusStats::new();
        for _ in 0..30 {
            a.add_segments(&[seg(Level::Token, Category::Annotation)]);
        }
        for _ in 0..13 {
            b.add_segments(&[seg(Level::Token, Category::Annotation)]);
        }
        for (level, category, n) in [
            (Level::Sentence, Category::Unrelated, 19),
            (Level::Token, Category::Replacement, 20),
            (Level::Sentence, Category::Annotation, 9),
            (Level::Sentence, Category::Replacement, 9),
        ] {
            for _ in 0..n {
                b.add_segments(&[seg(level, category)]);
            }
        }
        let mut ab = a;
        ab.merge(&b);
        let mut ba = b;
        ba.merge(&a);
        assert_eq!(ab, whole);
        assert_eq!(ba, whole);
    }
}
