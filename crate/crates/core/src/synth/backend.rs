use std::sync::Arc;

use crate::corpus::LanguagePair;
use crate::lexicon::{Lexicon, Match, Side};
use crate::{Error, Result};

pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, src: &str, tgt: &str) -> Result<String>;
}

/// Produces token-level code-switching inside one sentence.
pub trait TokenCsGenerator: Send + Sync {
    /// `sentence` (in `src`) with selected terms followed by their `tgt`
    /// translation in brackets.
    fn annotate(&self, sentence: &str, src: &str, tgt: &str) -> Result<String>;

    /// `sentence` with selected terms replaced by their `tgt` translation.
    fn replace(&self, sentence: &str, src: &str, tgt: &str) -> Result<String>;
}

fn side_of(pair: &LanguagePair, lang: &str) -> Result<Side> {
    if lang == pair.primary() {
        Ok(Side::Source)
    } else if lang == pair.secondary() {
        Ok(Side::Target)
    } else {
        Err(Error::Backend(format!("language {lang:?} is not part of pair {pair}")))
    }
}

fn is_wide(c: char) -> bool {
    matches!(c as u32, 0x3000..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xFF00..=0xFFEF)
}

/// Word-by-word translation through a bilingual lexicon.
///
/// Words without a lexicon entry are dropped and the terms are joined with
/// single spaces; a final `.`, `!` or `?` is carried over (full-width when
/// translating into an unspaced script). Text without any known term fails.
#[derive(Debug, Clone)]
pub struct DictionaryTranslator {
    lexicon: Arc<Lexicon>,
    pair: LanguagePair,
}

impl DictionaryTranslator {
    pub fn new(lexicon: Arc<Lexicon>, pair: LanguagePair) -> Self {
        DictionaryTranslator { lexicon, pair }
    }
}

fn terminal_punct(text: &str, unspaced_target: bool) -> Option<&'static str> {
    let last = text.trim_end().chars().next_back()?;
    let (ascii, wide) = match last {
        '.' | '。' => (".", "。"),
        '!' | '！' => ("!", "！"),
        '?' | '？' => ("?", "？"),
        _ => return None,
    };
    Some(if unspaced_target { wide } else { ascii })
}

impl Translator for DictionaryTranslator {
    fn translate(&self, text: &str, src: &str, tgt: &str) -> Result<String> {
        let from = side_of(&self.pair, src)?;
        let to = side_of(&self.pair, tgt)?;
        if from == to {
            return Err(Error::Backend(format!("cannot translate {src} into itself")));
        }
        let terms: Vec<&str> = self
            .lexicon
            .find(text, from)
            .iter()
            .map(|m| self.lexicon.term(m.entry, to))
            .collect();
        if terms.is_empty() {
            return Err(Error::Backend("no lexicon term in sentence".into()));
        }
        let mut out = terms.join(" ");
        if let Some(p) = terminal_punct(text, self.lexicon.is_unspaced(to)) {
            out.push_str(p);
        }
        Ok(out)
    }
}

/// Token-level code-switching from lexicon matches: the `max_terms` longest
/// matched terms of a sentence are annotated or replaced.
#[derive(Debug, Clone)]
pub struct DictionaryGenerator {
    lexicon: Arc<Lexicon>,
    pair: LanguagePair,
    max_terms: usize,
}

impl DictionaryGenerator {
    pub fn new(lexicon: Arc<Lexicon>, pair: LanguagePair) -> Self {
        DictionaryGenerator {
            lexicon,
            pair,
            max_terms: 1,
        }
    }

    pub fn with_max_terms(mut self, k: usize) -> Self {
        self.max_terms = k.max(1);
        self
    }

    /// Matches to rewrite, in text order.
    fn select(&self, sentence: &str, from: Side) -> Result<Vec<Match>> {
        let mut found = self.lexicon.find(sentence, from);
        if found.is_empty() {
            return Err(Error::Backend("no lexicon term in sentence".into()));
        }
        // Longest first; earlier position wins ties.
        found.sort_by_key(|m| (std::cmp::Reverse(sentence[m.span.start..m.span.end].chars().count()), m.span.start));
        found.truncate(self.max_terms);
        found.sort_by_key(|m| m.span.start);
        Ok(found)
    }

    fn rewrite(
        &self,
        sentence: &str,
        src: &str,
        tgt: &str,
        edit: impl Fn(&str, &str) -> String,
    ) -> Result<String> {
        let from = side_of(&self.pair, src)?;
        let to = side_of(&self.pair, tgt)?;
        let mut out = String::with_capacity(sentence.len() + 16);
        let mut at = 0;
        for m in self.select(sentence, from)? {
            out.push_str(&sentence[at..m.span.start]);
            out.push_str(&edit(&sentence[m.span.start..m.span.end], self.lexicon.term(m.entry, to)));
            at = m.span.end;
        }
        out.push_str(&sentence[at..]);
        Ok(out)
    }
}

impl TokenCsGenerator for DictionaryGenerator {
    fn annotate(&self, sentence: &str, src: &str, tgt: &str) -> Result<String> {
        let gap = if self.lexicon.is_unspaced(side_of(&self.pair, src)?) { "" } else { " " };
        self.rewrite(sentence, src, tgt, |orig, term| format!("{orig}{gap}({term})"))
    }

    fn replace(&self, sentence: &str, src: &str, tgt: &str) -> Result<String> {
        let spaced_target = !self.lexicon.is_unspaced(side_of(&self.pair, tgt)?);
        let rewritten = self.rewrite(sentence, src, tgt, |_, term| {
            if spaced_target {
                // Mark the term boundaries; padding is resolved below.
                format!("\u{1}{term}\u{2}")
            } else {
                term.to_string()
            }
        })?;
        if !spaced_target {
            return Ok(rewritten);
        }
        // A spaced-script term dropped into unspaced text gets a space on
        // each side that touches a wide character.
        let mut out = String::with_capacity(rewritten.len() + 4);
        let mut prev: Option<char> = None;
        let mut chars = rewritten.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '\u{1}' => {
                    if prev.is_some_and(|p| is_wide(p) || p.is_alphanumeric()) {
                        out.push(' ');
                    }
                }
                '\u{2}' => {
                    if chars.peek().is_some_and(|&n| is_wide(n)) {
                        out.push(' ');
                    }
                }
                _ => {
                    out.push(c);
                    prev = Some(c);
                }
            }
        }
        Ok(out)
    }
}
