use super::Category;
use crate::corpus::Span;
use crate::tagging::{ScriptClass, ScriptProfile};
use crate::Result;

pub const HEURISTIC_ANNOTATION_CONFIDENCE: f64 = 0.9;
pub const HEURISTIC_REPLACEMENT_CONFIDENCE: f64 = 0.6;

/// Verdict of a token-level classifier backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenVerdict {
    pub category: Category,
    pub confidence: f64,
}

/// Annotation/replacement classifier for token-level segments, e.g. an LLM
/// behind [`crate::remote::RemoteTokenClassifier`].
pub trait TokenLevelClassifier: Send + Sync {
    fn classify(&self, segment: &str, sentence: &str) -> Result<TokenVerdict>;
}

const LEADING_STOPWORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "of", "such", "as", "like", "is", "are", "was", "were", "called",
    "named", "to", "in", "on", "for", "with", "by", "from", "at", "also", "known",
];

fn is_opening_bracket(c: char) -> bool {
    matches!(c, '(' | '[' | '（' | '【' | '〔')
}

fn is_closing_bracket(c: char) -> bool {
    matches!(c, ')' | ']' | '）' | '】' | '〕')
}

/// Characters that may appear inside a native-language partner run besides
/// native script letters.
fn is_run_filler(c: char) -> bool {
    c.is_whitespace() || c.is_ascii_digit() || matches!(c, '\'' | '’' | '-')
}

/// The native-language run that ends right before byte `end` of `text`,
/// restricted to `sentence`, with leading English function words removed.
pub(crate) fn preceding_native_run(
    text: &str,
    sentence: Span,
    end: usize,
    native: ScriptClass,
    profile: &ScriptProfile,
) -> Option<Span> {
    let head = &text[sentence.start..end];
    let mut start = head.len();
    for (b, c) in head.char_indices().rev() {
        if profile.classify(c) == native || is_run_filler(c) {
            start = b;
        } else {
            break;
        }
    }
    let region = &head[start..];
    let trimmed = region.trim();
    if !trimmed.chars().any(|c| profile.classify(c) == native) {
        return None;
    }
    let mut offset = start + (region.len() - region.trim_start().len());
    let mut rest = trimmed;
    // The partner starts after the last function word in the run.
    let mut cut = None;
    for (b, word) in rest.split_whitespace().map(|w| (w.as_ptr() as usize - rest.as_ptr() as usize, w)) {
        if LEADING_STOPWORDS.contains(&word.to_lowercase().as_str()) {
            let after = rest[b + word.len()..].trim_start();
            if after.chars().any(|c| profile.classify(c) == native) {
                cut = Some(rest.len() - after.len());
            }
        }
    }
    if let Some(c) = cut {
        offset += c;
        rest = &rest[c..];
    }
    let s = sentence.start + offset;
    Some(Span::new(s, s + rest.len()))
}

/// The native-language run starting right after byte `start`.
pub(crate) fn following_native_run(
    text: &str,
    sentence: Span,
    start: usize,
    native: ScriptClass,
    profile: &ScriptProfile,
) -> Option<Span> {
    let tail = &text[start..sentence.end];
    let mut end = 0;
    for (b, c) in tail.char_indices() {
        if profile.classify(c) == native || is_run_filler(c) {
            end = b + c.len_utf8();
        } else {
            break;
        }
    }
    let region = &tail[..end];
    let lead = region.len() - region.trim_start().len();
    let trimmed = region.trim();
    if !trimmed.chars().any(|c| profile.classify(c) == native) {
        return None;
    }
    Some(Span::new(start + lead, start + lead + trimmed.len()))
}

/// Built-in token-level rule: a segment wrapped in brackets right after
/// native-language content annotates that content; anything else is a
/// replacement. Returns the category, the partner span for annotations, and
/// a confidence.
pub fn classify_token_heuristic(
    text: &str,
    sentence: Span,
    segment: Span,
    native: ScriptClass,
    profile: &ScriptProfile,
) -> (Category, Option<Span>, f64) {
    let before = text[sentence.start..segment.start].trim_end();
    let after = text[segment.end..sentence.end].trim_start();
    let opened = before.chars().next_back().filter(|&c| is_opening_bracket(c));
    let closed = after.chars().next().is_some_and(is_closing_bracket);
    if let (Some(open), true) = (opened, closed) {
        let open_at = sentence.start + before.len() - open.len_utf8();
        let partner_end = sentence.start + text[sentence.start..open_at].trim_end().len();
        if let Some(partner) = preceding_native_run(text, sentence, partner_end, native, profile) {
            return (Category::Annotation, Some(partner), HEURISTIC_ANNOTATION_CONFIDENCE);
        }
    }
    (Category::Replacement, None, HEURISTIC_REPLACEMENT_CONFIDENCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str, seg: &str) -> (Category, Option<String>) {
        let profile = ScriptProfile::builtin("en-zh").unwrap();
        let start = text.find(seg).unwrap();
        let (cat, partner, _) = classify_token_heuristic(
            text,
            Span::new(0, text.len()),
            Span::new(start, start + seg.len()),
            ScriptClass::Primary,
            &profile,
        );
        (cat, partner.map(|p| text[p.start..p.end].to_string()))
    }

    #[test]
    fn bracketed_after_english_is_annotation() {
        let text = "Putting up Spring Couplet (贴春联) and Burning Firecrackers (放鞭炮).";
        assert_eq!(
            run(text, "贴春联"),
            (Category::Annotation, Some("Putting up Spring Couplet".into()))
        );
        assert_eq!(
            run(text, "放鞭炮"),
            (Category::Annotation, Some("Burning Firecrackers".into()))
        );
    }

    #[test]
    fn inline_list_is_replacement() {
        let text = "You can use the above picture and add some related words, such as 剃须刀、字典、镜子 and 书橱.";
        assert_eq!(run(text, "剃须刀、字典、镜子"), (Category::Replacement, None));
        assert_eq!(run(text, "书橱"), (Category::Replacement, None));
    }

    #[test]
    fn nothing_before_is_replacement() {
        assert_eq!(run("(贴春联) is a custom.", "贴春联"), (Category::Replacement, None));
        assert_eq!(run("贴春联 is a custom.", "贴春联"), (Category::Replacement, None));
    }

    #[test]
    fn stopwords_are_trimmed_from_partner() {
        let text = "Bring things such as razor (剃须刀) with you.";
        assert_eq!(run(text, "剃须刀"), (Category::Annotation, Some("razor".into())));
    }

    #[test]
    fn chinese_side_annotation() {
        let profile = ScriptProfile::builtin("en-zh").unwrap();
        let text = "比如盐酸(HCL)、硝酸。";
        let start = text.find("HCL").unwrap();
        let (cat, partner, _) = classify_token_heuristic(
            text,
            Span::new(0, text.len()),
            Span::new(start, start + 3),
            ScriptClass::Secondary,
            &profile,
        );
        assert_eq!(cat, Category::Annotation);
        assert_eq!(&text[partner.unwrap().start..partner.unwrap().end], "比如盐酸");
    }
}
