use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Inclusive codepoint range, written `U+XXXX..U+YYYY` (or a single `U+XXXX`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CodeRange {
    pub lo: u32,
    pub hi: u32,
}

impl CodeRange {
    pub const fn new(lo: u32, hi: u32) -> Self {
        CodeRange { lo, hi }
    }

    #[inline]
    pub fn contains(&self, c: char) -> bool {
        let c = c as u32;
        self.lo <= c && c <= self.hi
    }

    fn intersects(&self, other: &CodeRange) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

fn parse_codepoint(s: &str) -> Result<u32> {
    let hex = s
        .trim()
        .strip_prefix("U+")
        .or_else(|| s.trim().strip_prefix("u+"))
        .ok_or_else(|| Error::InvalidProfile(format!("expected U+XXXX, got {s:?}")))?;
    let v = u32::from_str_radix(hex, 16)
        .map_err(|_| Error::InvalidProfile(format!("bad hex codepoint {s:?}")))?;
    if char::from_u32(v).is_none() && !(0xD800..=0xDFFF).contains(&v) {
        return Err(Error::InvalidProfile(format!("{s:?} is not a codepoint")));
    }
    Ok(v)
}

impl FromStr for CodeRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse_codepoint(a)?, parse_codepoint(b)?),
            None => {
                let v = parse_codepoint(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(Error::InvalidProfile(format!("empty range {s:?}")));
        }
        Ok(CodeRange { lo, hi })
    }
}

impl TryFrom<String> for CodeRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CodeRange> for String {
    fn from(r: CodeRange) -> String {
        r.to_string()
    }
}

impl fmt::Display for CodeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U+{:04X}..U+{:04X}", self.lo, self.hi)
    }
}

/// Which script bucket a character falls into under a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptClass {
    Primary,
    Secondary,
    /// A script belonging to neither language (e.g. kana in an en-zh corpus).
    Other,
    /// Digits, punctuation, symbols, whitespace, emoji.
    Neutral,
}

/// Character-filter rule that separates the two scripts of a language pair.
///
/// Config files use TOML:
///
/// ```toml
/// name = "en-zh"
/// min_chars = 2
/// primary = ["U+0041..U+005A", "U+0061..U+007A"]
/// secondary = ["U+4E00..U+9FFF"]
/// other = ["U+3040..U+309F", "U+30A0..U+30FF"]
/// needs_classifier = false
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptProfile {
    pub name: String,
    #[serde(default = "default_min_chars")]
    pub min_chars: usize,
    pub primary: Vec<CodeRange>,
    #[serde(default)]
    pub secondary: Vec<CodeRange>,
    #[serde(default)]
    pub other: Vec<CodeRange>,
    /// Both languages share a script; sentence tags come from a classifier.
    #[serde(default)]
    pub needs_classifier: bool,
}

fn default_min_chars() -> usize {
    2
}

const LATIN_BASIC: [CodeRange; 2] = [CodeRange::new(0x41, 0x5A), CodeRange::new(0x61, 0x7A)];
const CJK_UNIFIED: CodeRange = CodeRange::new(0x4E00, 0x9FFF);
const HIRAGANA: CodeRange = CodeRange::new(0x3040, 0x309F);
const KATAKANA: CodeRange = CodeRange::new(0x30A0, 0x30FF);
const BENGALI: CodeRange = CodeRange::new(0x0980, 0x09FF);
// Latin-1 letters and Latin Extended-A/B, which cover Romanian diacritics.
const LATIN_EXTENDED: CodeRange = CodeRange::new(0xC0, 0x24F);

impl ScriptProfile {
    pub const BUILTIN: [&'static str; 3] = ["en-zh", "en-bn", "en-ro"];

    pub fn builtin(name: &str) -> Option<ScriptProfile> {
        let profile = match name {
            "en-zh" => ScriptProfile {
                name: name.into(),
                min_chars: 2,
                primary: LATIN_BASIC.to_vec(),
                secondary: vec![CJK_UNIFIED],
                other: vec![HIRAGANA, KATAKANA],
                needs_classifier: false,
            },
            "en-bn" => ScriptProfile {
                name: name.into(),
                min_chars: 2,
                primary: LATIN_BASIC.to_vec(),
                secondary: vec![BENGALI],
                other: vec![HIRAGANA, KATAKANA],
                needs_classifier: false,
            },
            "en-ro" => ScriptProfile {
                name: name.into(),
                min_chars: 2,
                primary: vec![LATIN_BASIC[0], LATIN_BASIC[1], LATIN_EXTENDED],
                secondary: Vec::new(),
                other: Vec::new(),
                needs_classifier: true,
            },
            _ => return None,
        };
        Some(profile)
    }

    pub fn from_toml(text: &str) -> Result<ScriptProfile> {
        let profile: ScriptProfile =
            toml::from_str(text).map_err(|e| Error::InvalidProfile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ScriptProfile> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_chars == 0 {
            return Err(Error::InvalidProfile("min_chars must be at least 1".into()));
        }
        if self.primary.is_empty() {
            return Err(Error::InvalidProfile("no primary ranges".into()));
        }
        if self.secondary.is_empty() && !self.needs_classifier {
            return Err(Error::InvalidProfile(
                "no secondary ranges and no classifier requested".into(),
            ));
        }
        let groups = [&self.primary, &self.secondary, &self.other];
        for (i, a) in groups.iter().enumerate() {
            for b in &groups[i + 1..] {
                for ra in a.iter() {
                    if let Some(rb) = b.iter().find(|rb| ra.intersects(rb)) {
                        return Err(Error::InvalidProfile(format!(
                            "ranges {ra} and {rb} overlap"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn classify(&self, c: char) -> ScriptClass {
        if c.is_ascii() {
            // Fast path: the only ASCII characters a profile can claim are letters.
            if !c.is_ascii_alphabetic() {
                return ScriptClass::Neutral;
            }
        }
        if self.primary.iter().any(|r| r.contains(c)) {
            ScriptClass::Primary
        } else if self.secondary.iter().any(|r| r.contains(c)) {
            ScriptClass::Secondary
        } else if self.other.iter().any(|r| r.contains(c)) {
            ScriptClass::Other
        } else {
            ScriptClass::Neutral
        }
    }

    pub fn counts(&self, text: &str) -> ScriptCounts {
        let mut counts = ScriptCounts::default();
        for c in text.chars() {
            match self.classify(c) {
                ScriptClass::Primary => counts.primary += 1,
                ScriptClass::Secondary => counts.secondary += 1,
                ScriptClass::Other => counts.other += 1,
                ScriptClass::Neutral => counts.neutral += 1,
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScriptCounts {
    pub primary: usize,
    pub secondary: usize,
    pub other: usize,
    pub neutral: usize,
}

impl ScriptCounts {
    pub fn non_neutral(&self) -> usize {
        self.primary + self.secondary + self.other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: CodeRange = "U+4E00..U+9FFF".parse().unwrap();
        assert_eq!(r, CJK_UNIFIED);
        assert_eq!(r.to_string(), "U+4E00..U+9FFF");
        let single: CodeRange = "U+00E9".parse().unwrap();
        assert_eq!((single.lo, single.hi), (0xE9, 0xE9));
        assert!("4E00..9FFF".parse::<CodeRange>().is_err());
        assert!("U+9FFF..U+4E00".parse::<CodeRange>().is_err());
    }

    #[test]
    fn builtins_validate() {
        for name in ScriptProfile::BUILTIN {
            ScriptProfile::builtin(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn toml_round_trip() {
        let p = ScriptProfile::builtin("en-zh").unwrap();
        let text = toml::to_string(&p).unwrap();
        assert_eq!(ScriptProfile::from_toml(&text).unwrap(), p);
    }

    #[test]
    fn overlapping_ranges_rejected() {
        let text = r#"
            name = "bad"
            primary = ["U+0041..U+005A"]
            secondary = ["U+0050..U+0060"]
        "#;
        assert!(ScriptProfile::from_toml(text).is_err());
        let zero = r#"
            name = "bad"
            min_chars = 0
            primary = ["U+0041..U+005A"]
            secondary = ["U+4E00..U+9FFF"]
        "#;
        assert!(ScriptProfile::from_toml(zero).is_err());
    }

    #[test]
    fn classify_chars() {
        let p = ScriptProfile::builtin("en-zh").unwrap();
        assert_eq!(p.classify('a'), ScriptClass::Primary);
        assert_eq!(p.classify('贴'), ScriptClass::Secondary);
        assert_eq!(p.classify('の'), ScriptClass::Other);
        assert_eq!(p.classify('。'), ScriptClass::Neutral);
        assert_eq!(p.classify('7'), ScriptClass::Neutral);
        assert_eq!(p.classify('😀'), ScriptClass::Neutral);
        let bn = ScriptProfile::builtin("en-bn").unwrap();
        assert_eq!(bn.classify('ব'), ScriptClass::Secondary);
    }
}
