use serde::{Deserialize, Serialize};

use super::prompts::{render, ANNOTATION, REPLACEMENT};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SftTask {
    Annotation,
    Replacement,
}

impl std::str::FromStr for SftTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annotation" | "annt" => Ok(SftTask::Annotation),
            "replacement" | "repl" => Ok(SftTask::Replacement),
            _ => Err(Error::Config(format!("unknown sft task {s:?}"))),
        }
    }
}

/// One instruction-tuning example for a code-switching generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub instruction: String,
    pub response: String,
    pub task: SftTask,
    /// `source-target`, e.g. `zh-en` for English-annotated Chinese.
    pub lang_pair: String,
}

/// English name of a language code for prompts; unknown codes pass through.
pub fn language_name(code: &str) -> &str {
    match code {
        "en" => "English",
        "zh" => "Chinese",
        "ro" => "Romanian",
        "bn" => "Bengali",
        "ja" => "Japanese",
        "de" => "German",
        "fr" => "French",
        "es" => "Spanish",
        other => other,
    }
}

/// Builds SFT records from parallel pairs `(source, target)` and the
/// generated code-switched outputs, one record per pair.
///
/// The instruction holds only the source sentence; a pair whose target
/// sentence nevertheless appears in the instruction is rejected.
pub fn export_sft_records(
    pairs: &[(String, String)],
    outputs: &[String],
    task: SftTask,
    src_lang: &str,
    tgt_lang: &str,
) -> Result<Vec<SftRecord>> {
    if pairs.len() != outputs.len() {
        return Err(Error::LengthMismatch(format!(
            "{} parallel pairs but {} generated outputs",
            pairs.len(),
            outputs.len()
        )));
    }
    let template = match task {
        SftTask::Annotation => ANNOTATION,
        SftTask::Replacement => REPLACEMENT,
    };
    let (src_name, tgt_name) = (language_name(src_lang), language_name(tgt_lang));
    let lang_pair = format!("{src_lang}-{tgt_lang}");
    pairs
        .iter()
        .zip(outputs)
        .enumerate()
        .map(|(i, ((src, tgt), out))| {
            let instruction = render(template, src_name, tgt_name, src);
            let tgt = tgt.trim();
            if !tgt.is_empty() && instruction.contains(tgt) {
                return Err(Error::Config(format!(
                    "pair {i}: target sentence appears in the instruction"
                )));
            }
            Ok(SftRecord {
                instruction,
                response: out.clone(),
                task,
                lang_pair: lang_pair.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_record_without_target() {
        let pairs = vec![("Let's buy some fruit.".to_string(), "我们买一些水果。".to_string())];
        let outs = vec!["Let's buy some 水果.".to_string()];
        let recs = export_sft_records(&pairs, &outs, SftTask::Replacement, "en", "zh").unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].instruction.contains("Let's buy some fruit."));
        assert!(!recs[0].instruction.contains("我们买一些水果。"));
        assert_eq!(recs[0].response, outs[0]);
        assert_eq!(recs[0].lang_pair, "en-zh");
    }

    #[test]
    fn empty_and_misaligned() {
        assert!(export_sft_records(&[], &[], SftTask::Annotation, "en", "zh").unwrap().is_empty());
        let pairs = vec![("a".to_string(), "b".to_string())];
        assert!(matches!(
            export_sft_records(&pairs, &[], SftTask::Annotation, "en", "zh"),
            Err(Error::LengthMismatch(_))
        ));
    }
}
