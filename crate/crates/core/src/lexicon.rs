//! Bilingual lexicon shared by the dictionary backends and the lexicon
//! encoder.
//!
//! File format: TSV with columns `src_term`, `tgt_term`, `concept_id`. An
//! optional header row with exactly those names is skipped, as are blank
//! lines and lines starting with `#`.

use std::collections::HashMap;
use std::path::Path;

use crate::corpus::Span;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub src: String,
    pub tgt: String,
    pub concept: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Source,
    Target,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Source => Side::Target,
            Side::Target => Side::Source,
        }
    }
}

/// A lexicon term found in a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub span: Span,
    pub entry: usize,
}

/// Whether terms of a side are matched on word boundaries (spaced scripts)
/// or character by character (CJK).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Words,
    Chars,
}

#[derive(Debug, Clone)]
struct SideIndex {
    mode: Mode,
    terms: HashMap<String, usize>,
    max_len: usize,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<Entry>,
    concepts: Vec<String>,
    source: SideIndex,
    target: SideIndex,
}

fn is_unspaced_char(c: char) -> bool {
    matches!(c as u32, 0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xAC00..=0xD7AF)
}

fn normalize_word(w: &str) -> String {
    w.replace('’', "'").to_lowercase()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '’' || c == '-'
}

/// Lowercased words of `text` with their byte spans. Words are runs of
/// alphanumerics, apostrophes and hyphens, excluding unspaced-script chars.
pub(crate) fn words(text: &str) -> Vec<(Span, String)> {
    let mut out = Vec::new();
    let mut start = None;
    for (b, c) in text.char_indices() {
        let in_word = is_word_char(c) && !is_unspaced_char(c);
        match (in_word, start) {
            (true, None) => start = Some(b),
            (false, Some(s)) => {
                push_word(text, s, b, &mut out);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push_word(text, s, text.len(), &mut out);
    }
    out
}

fn push_word(text: &str, start: usize, end: usize, out: &mut Vec<(Span, String)>) {
    // Trim apostrophes and hyphens at the edges.
    let raw = &text[start..end];
    let trimmed = raw.trim_matches(|c| c == '\'' || c == '’' || c == '-');
    if trimmed.is_empty() {
        return;
    }
    let offset = raw.find(trimmed).unwrap_or(0);
    let s = start + offset;
    out.push((Span::new(s, s + trimmed.len()), normalize_word(trimmed)));
}

impl SideIndex {
    fn build(terms: impl Iterator<Item = (usize, String)>) -> SideIndex {
        let terms: Vec<(usize, String)> = terms.collect();
        let unspaced = terms
            .iter()
            .filter(|(_, t)| t.chars().any(is_unspaced_char))
            .count();
        let mode = if unspaced * 2 > terms.len() {
            Mode::Chars
        } else {
            Mode::Words
        };
        let mut map = HashMap::new();
        let mut max_len = 0;
        for (idx, term) in terms {
            let key = match mode {
                Mode::Chars => term.trim().to_string(),
                Mode::Words => words(&term)
                    .into_iter()
                    .map(|(_, w)| w)
                    .collect::<Vec<_>>()
                    .join(" "),
            };
            if key.is_empty() {
                continue;
            }
            let len = match mode {
                Mode::Chars => key.chars().count(),
                Mode::Words => key.split(' ').count(),
            };
            max_len = max_len.max(len);
            map.entry(key).or_insert(idx);
        }
        SideIndex {
            mode,
            terms: map,
            max_len,
        }
    }

    /// Greedy longest-match scan, left to right, non-overlapping.
    fn find(&self, text: &str) -> Vec<Match> {
        match self.mode {
            Mode::Words => self.find_words(text),
            Mode::Chars => self.find_chars(text),
        }
    }

    fn find_words(&self, text: &str) -> Vec<Match> {
        let ws = words(text);
        let mut out = Vec::new();
        let mut i = 0;
        let mut key = String::new();
        while i < ws.len() {
            let mut hit = None;
            for n in (1..=self.max_len.min(ws.len() - i)).rev() {
                key.clear();
                for (k, (_, w)) in ws[i..i + n].iter().enumerate() {
                    if k > 0 {
                        key.push(' ');
                    }
                    key.push_str(w);
                }
                if let Some(&entry) = self.terms.get(key.as_str()) {
                    hit = Some((n, entry));
                    break;
                }
            }
            match hit {
                Some((n, entry)) => {
                    out.push(Match {
                        span: Span::new(ws[i].0.start, ws[i + n - 1].0.end),
                        entry,
                    });
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }

    fn find_chars(&self, text: &str) -> Vec<Match> {
        let bounds: Vec<usize> = text
            .char_indices()
            .map(|(b, _)| b)
            .chain(std::iter::once(text.len()))
            .collect();
        let n_chars = bounds.len() - 1;
        let mut out = Vec::new();
        let mut i = 0;
        while i < n_chars {
            let mut hit = None;
            for n in (1..=self.max_len.min(n_chars - i)).rev() {
                if let Some(&entry) = self.terms.get(&text[bounds[i]..bounds[i + n]]) {
                    hit = Some((n, entry));
                    break;
                }
            }
            match hit {
                Some((n, entry)) => {
                    out.push(Match {
                        span: Span::new(bounds[i], bounds[i + n]),
                        entry,
                    });
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }
}

impl Lexicon {
    pub fn from_entries(raw: Vec<(String, String, String)>) -> Result<Lexicon> {
        let mut concept_ids: HashMap<String, u32> = HashMap::new();
        let mut concepts = Vec::new();
        let mut entries = Vec::with_capacity(raw.len());
        for (src, tgt, concept) in raw {
            let next = concepts.len() as u32;
            let id = *concept_ids.entry(concept.clone()).or_insert_with(|| {
                concepts.push(concept);
                next
            });
            entries.push(Entry {
                src,
                tgt,
                concept: id,
            });
        }
        if entries.is_empty() {
            return Err(Error::Lexicon {
                line: 0,
                message: "lexicon has no entries".into(),
            });
        }
        let source = SideIndex::build(entries.iter().enumerate().map(|(i, e)| (i, e.src.clone())));
        let target = SideIndex::build(entries.iter().enumerate().map(|(i, e)| (i, e.tgt.clone())));
        Ok(Lexicon {
            entries,
            concepts,
            source,
            target,
        })
    }

    pub fn parse_tsv(text: &str) -> Result<Lexicon> {
        let mut raw = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::Lexicon {
                    line: line_no,
                    message: format!("expected 3 tab-separated columns, found {}", cols.len()),
                });
            }
            if raw.is_empty() && cols == ["src_term", "tgt_term", "concept_id"] {
                continue;
            }
            if cols.iter().any(|c| c.trim().is_empty()) {
                return Err(Error::Lexicon {
                    line: line_no,
                    message: "empty column".into(),
                });
            }
            raw.push((
                cols[0].trim().to_string(),
                cols[1].trim().to_string(),
                cols[2].trim().to_string(),
            ));
        }
        Self::from_entries(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("src_term\ttgt_term\tconcept_id\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                e.src, e.tgt, self.concepts[e.concept as usize]
            ));
        }
        out
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &Entry {
        &self.entries[idx]
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn concept_name(&self, id: u32) -> &str {
        &self.concepts[id as usize]
    }

    /// Term of `entry` on `side`.
    pub fn term(&self, entry: usize, side: Side) -> &str {
        let e = &self.entries[entry];
        match side {
            Side::Source => &e.src,
            Side::Target => &e.tgt,
        }
    }

    /// Non-overlapping greedy longest matches of `side` terms in `text`.
    pub fn find(&self, text: &str, side: Side) -> Vec<Match> {
        match side {
            Side::Source => self.source.find(text),
            Side::Target => self.target.find(text),
        }
    }

    /// Whether terms of `side` are written without spaces between words.
    pub fn is_unspaced(&self, side: Side) -> bool {
        let idx = match side {
            Side::Source => &self.source,
            Side::Target => &self.target,
        };
        idx.mode == Mode::Chars
    }
}
