use crate::corpus::Span;

/// Abbreviations whose final period never ends a sentence (compared lowercase).
const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "vs.", "e.g.", "i.e.", "u.s.",
    "u.k.", "u.n.", "fig.", "no.", "approx.", "inc.", "ltd.", "co.", "dept.", "mt.", "cf.",
];

fn is_cjk_terminator(c: char) -> bool {
    matches!(c, '。' | '！' | '？' | '；')
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…') || is_cjk_terminator(c)
}

/// Han, kana and hangul; these scripts are written without spaces, so an
/// ASCII terminator directly before one still ends a sentence.
fn is_unspaced_script(c: char) -> bool {
    matches!(c as u32, 0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xAC00..=0xD7AF | 0xF900..=0xFAFF)
}

fn is_opener(c: char) -> bool {
    matches!(c, '(' | '[' | '{' | '（' | '【' | '《' | '〔' | '「' | '『')
}

fn is_bracket_closer(c: char) -> bool {
    matches!(c, ')' | ']' | '}' | '）' | '】' | '》' | '〕' | '」' | '』')
}

fn is_quote_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | '»')
}

fn is_abbreviation(text: &str, sentence_start: usize, dot_end: usize) -> bool {
    let head = &text[sentence_start..dot_end];
    let word_start = head
        .rfind(|c: char| c.is_whitespace() || is_opener(c))
        .map(|i| i + head[i..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(0);
    let word = &head[word_start..];
    ABBREVIATIONS.iter().any(|a| word.eq_ignore_ascii_case(a))
}

/// Splits `text` into sentence spans.
///
/// Terminators are `. ! ? … 。 ！ ？ ；` and newline. A run of terminators is
/// kept together, as are closing quotes and brackets right after it.
/// Terminators inside an open bracket do not split, unless the bracket closes
/// right after the terminator (a parenthesized sentence is its own span).
/// ASCII terminators only split before whitespace, end of text, or a CJK
/// character, which keeps decimals and dotted tokens intact; known
/// abbreviations never split.
///
/// The spans are sorted, non-overlapping, trimmed, and cover every
/// non-whitespace character.
pub fn split_sentences(text: &str) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut last_end = 0usize;
    let mut depth = 0usize;
    let mut iter = text.char_indices().peekable();

    while let Some((b, c)) = iter.next() {
        if c == '\n' {
            if let Some(s) = start.take() {
                spans.push(Span::new(s, last_end));
            }
            depth = 0;
            continue;
        }
        if c.is_whitespace() {
            continue;
        }
        let s = *start.get_or_insert(b);
        last_end = b + c.len_utf8();

        if is_opener(c) {
            depth += 1;
            continue;
        }
        if is_bracket_closer(c) {
            depth = depth.saturating_sub(1);
            continue;
        }
        if !is_terminator(c) {
            continue;
        }

        let mut cjk = is_cjk_terminator(c);
        let mut dots = usize::from(c == '.');
        let mut single_char_run = true;
        while let Some(&(nb, nc)) = iter.peek() {
            if !is_terminator(nc) {
                break;
            }
            cjk |= is_cjk_terminator(nc);
            dots += usize::from(nc == '.');
            single_char_run = false;
            last_end = nb + nc.len_utf8();
            iter.next();
        }
        let run_end = last_end;
        let mut closed = false;
        while let Some(&(nb, nc)) = iter.peek() {
            if is_bracket_closer(nc) {
                depth = depth.saturating_sub(1);
                closed = true;
            } else if !is_quote_closer(nc) {
                break;
            }
            last_end = nb + nc.len_utf8();
            iter.next();
        }

        if depth > 0 {
            continue;
        }
        let next = iter.peek().map(|&(_, nc)| nc);
        let boundary_follows = next.is_none_or(|c| c.is_whitespace() || is_unspaced_script(c));
        let split = if cjk {
            true
        } else if !boundary_follows && !closed {
            false
        } else {
            !(single_char_run && dots == 1 && is_abbreviation(text, s, run_end))
        };
        if split {
            spans.push(Span::new(s, last_end));
            start = None;
            depth = 0;
        }
    }
    if let Some(s) = start {
        spans.push(Span::new(s, last_end));
    }
    if spans.is_empty() && !text.is_empty() {
        // Whitespace-only input still yields one span.
        spans.push(Span::new(0, text.len()));
    }
    spans
}
