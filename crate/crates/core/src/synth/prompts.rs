//! Prompt templates for the remote generation and classification backends.
//!
//! Placeholders: `{src}` and `{tgt}` are language names, `{a_tgt}` is the
//! target name with its indefinite article, `{sentence}` is the input text.

pub const ANNOTATION: &str = "Given a pair of {src}-{tgt} parallel sentence, generate {a_tgt}-annotated {src} sentence. \
Annotation is the use of words from another language to explain certain words in a sentence. \n\n[{src} Sentence]: {sentence}";

pub const REPLACEMENT: &str = "Given a pair of {src}-{tgt} sentence, generate a {src} and {tgt} code-switching sentence. \
Code-switching is the use of more than one linguistic variety in a manner consistent with the syntax and phonology of each variety.\n\n[{src} Sentence]: {sentence}";

pub const TRANSLATION: &str =
    "Translate the following {src} text into {tgt}. Output only the translation.\n\n{sentence}";

/// Token-level annotation/replacement classification. `{doc}` and `{cs}` are
/// the names of the sentence language and of the inserted language; `{a_doc}`
/// carries the article.
pub const TOKEN_CLASSIFICATION: &str = r#"Code-switching can be classified more finely according to different characteristics and uses. Here are some common types:

1. Annotation: In this case, another language is used to explain or define a noun before or after it. For example: During the festival, we watched a dragon dance (舞龙). In this sentence, the word "舞龙" serves as an annotation for "dragon dance".

2. Replacement: A specific word is replaced by a foreign word. For example: During the festival, we watched a 舞龙. In this sentence, the word "舞龙" replaces the English word "dragon dance".

Given {a_doc} sentence containing {cs} code-switching, please classify the sentence according to the above two types.

Examples:

[English Sentence]: During the festival, we watched a dragon dance (舞龙), which is a traditional Chinese performance.

[Answer]: "舞龙" appears after "dragon dance", which explains this English word in Chinese and is its annotation. Formatting result: \\box(1)

[English Sentence]: We enjoyed some delicious food at a nearby 茶馆.

[Answer]: The word "茶馆" is directly used as part of the sentence. It can be assumed that the original word is "teahouse", but it is directly replaced by "茶馆". Formatting result: \\box(2)

The following is your task. You can do a brief analysis, but please be sure to output it in the format of the example at the end.

[{doc} Sentence]: {sentence}

[Answer]:"#;

fn with_article(name: &str) -> String {
    let vowel = name
        .chars()
        .next()
        .is_some_and(|c| matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u'));
    format!("{} {name}", if vowel { "an" } else { "a" })
}

/// Fills a template. Only the known placeholders are substituted, and the
/// sentence is inserted last so braces inside it are left alone.
pub fn render(template: &str, src: &str, tgt: &str, sentence: &str) -> String {
    template
        .replace("{a_tgt}", &with_article(tgt))
        .replace("{a_doc}", &with_article(src))
        .replace("{src}", src)
        .replace("{tgt}", tgt)
        .replace("{doc}", src)
        .replace("{cs}", tgt)
        .replace("{sentence}", sentence)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn articles() {
        let p = render(ANNOTATION, "Chinese", "English", "你好");
        assert!(p.starts_with("Given a pair of Chinese-English parallel sentence, generate an English-annotated Chinese sentence."));
        assert!(p.ends_with("[Chinese Sentence]: 你好"));
        let p = render(ANNOTATION, "English", "Chinese", "Hi");
        assert!(p.contains("generate a Chinese-annotated English sentence"));
    }

    #[test]
    fn sentence_braces_survive() {
        let p = render(TRANSLATION, "English", "Chinese", "use {src} literally");
        assert!(p.ends_with("use {src} literally"));
    }

    #[test]
    fn classification_prompt_slots() {
        let p = render(TOKEN_CLASSIFICATION, "English", "Chinese", "We ate at a 茶馆.");
        assert!(p.contains("Given an English sentence containing Chinese code-switching"));
        assert!(p.contains("[English Sentence]: We ate at a 茶馆.\n\n[Answer]:"));
        assert!(p.contains(r"\\box(1)"));
    }
}
