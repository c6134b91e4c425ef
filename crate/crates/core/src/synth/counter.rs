use unicode_segmentation::UnicodeSegmentation;

/// Counts tokens of one language in a text.
pub trait TokenCounter: Send + Sync {
    /// Number of `lang` tokens in `text`; material in other scripts is not
    /// counted.
    fn count(&self, text: &str, lang: &str) -> u64;
}

fn is_ideograph(c: char) -> bool {
    matches!(c as u32, 0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF)
}

fn is_bengali(c: char) -> bool {
    matches!(c as u32, 0x0980..=0x09FF)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Script {
    Ideographic,
    Bengali,
    Spaced,
}

fn script_of(lang: &str) -> Script {
    match lang {
        "zh" | "ja" => Script::Ideographic,
        "bn" => Script::Bengali,
        _ => Script::Spaced,
    }
}

/// Desk tokenizer: one token per CJK character, one per Bengali grapheme
/// cluster, and one per whitespace-delimited run of other letters. Runs with
/// no letters (numbers, punctuation) are not counted for any language.
///
/// Counting is additive over concatenation except that two word fragments
/// joined without whitespace merge into one token.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinCounter;

impl BuiltinCounter {
    fn count_words(text: &str) -> u64 {
        let mut n = 0;
        let mut in_run = false;
        let mut has_letter = false;
        for c in text.chars() {
            if c.is_whitespace() || is_ideograph(c) || is_bengali(c) {
                if in_run && has_letter {
                    n += 1;
                }
                in_run = false;
                has_letter = false;
            } else {
                in_run = true;
                has_letter |= c.is_alphabetic();
            }
        }
        if in_run && has_letter {
            n += 1;
        }
        n
    }
}

impl TokenCounter for BuiltinCounter {
    fn count(&self, text: &str, lang: &str) -> u64 {
        match script_of(lang) {
            Script::Ideographic => text.chars().filter(|&c| is_ideograph(c)).count() as u64,
            Script::Bengali => text
                .graphemes(true)
                .filter(|g| g.chars().next().is_some_and(is_bengali))
                .count() as u64,
            Script::Spaced => Self::count_words(text),
        }
    }
}
