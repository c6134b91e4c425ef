//! Synthetic code-switching: rewriting sentences of monolingual documents
//! into one of the four code-switching types under a token budget.

mod backend;
mod counter;
mod engine;
mod mix;
pub mod prompts;
mod sft;

use serde::{Deserialize, Serialize};

use crate::corpus::LanguagePair;
use crate::{Error, Result};

pub use backend::{DictionaryGenerator, DictionaryTranslator, TokenCsGenerator, Translator};
pub use counter::{BuiltinCounter, TokenCounter};
pub use engine::{allocate_and_synthesize, AccountingReport, Backends, Modification, SynthesisOutcome};
pub use mix::{execute_mix, plan_mix, Allocation, MixOutcome, MixPlan, MixPreset, MixSettings};
pub use sft::{export_sft_records, language_name, SftRecord, SftTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsType {
    SentAnnt,
    SentRepl,
    TokenAnnt,
    TokenRepl,
}

impl CsType {
    pub const ALL: [CsType; 4] = [CsType::SentAnnt, CsType::SentRepl, CsType::TokenAnnt, CsType::TokenRepl];

    pub fn name(self) -> &'static str {
        match self {
            CsType::SentAnnt => "sent-annt",
            CsType::SentRepl => "sent-repl",
            CsType::TokenAnnt => "token-annt",
            CsType::TokenRepl => "token-repl",
        }
    }
}

impl std::str::FromStr for CsType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CsType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown code-switching type {s:?}")))
    }
}

/// Which language's documents a plan modifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanSide {
    InPrimary,
    InSecondary,
}

impl PlanSide {
    /// (document language, inserted language).
    pub fn langs<'a>(&self, pair: &'a LanguagePair) -> (&'a str, &'a str) {
        match self {
            PlanSide::InPrimary => (pair.primary(), pair.secondary()),
            PlanSide::InSecondary => (pair.secondary(), pair.primary()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlanSide::InPrimary => "in-primary",
            PlanSide::InSecondary => "in-secondary",
        }
    }

    pub fn default_cap(self) -> f64 {
        match self {
            PlanSide::InPrimary => 0.20,
            PlanSide::InSecondary => 1.0,
        }
    }
}

impl std::str::FromStr for PlanSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in-primary" | "primary" => Ok(PlanSide::InPrimary),
            "in-secondary" | "secondary" => Ok(PlanSide::InSecondary),
            _ => Err(Error::Config(format!("unknown side {s:?}"))),
        }
    }
}

/// Sentence density above which heavy rewriting of secondary-language
/// documents is flagged.
pub const SECONDARY_DENSITY_WARNING: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPlan {
    pub side: PlanSide,
    pub cs_type: CsType,
    /// Newly added opposite-language tokens to reach. `None` makes the plan
    /// density-driven: every capped document is rewritten at
    /// `sentence_density` and the token total is whatever results.
    pub token_budget: Option<u64>,
    /// Fraction of a document's eligible sentences that are rewritten.
    pub sentence_density: f64,
    /// Fraction of eligible documents that may be touched.
    pub doc_eligibility_cap: f64,
    pub seed: u64,
}

impl SynthesisPlan {
    pub fn new(side: PlanSide, cs_type: CsType) -> Self {
        SynthesisPlan {
            side,
            cs_type,
            token_budget: None,
            sentence_density: 0.5,
            doc_eligibility_cap: side.default_cap(),
            seed: 0,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.token_budget = Some(budget);
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.sentence_density = density;
        self
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.doc_eligibility_cap = cap;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sentence density", self.sentence_density),
            ("document cap", self.doc_eligibility_cap),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Non-fatal advice about the plan.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.side == PlanSide::InSecondary && self.sentence_density > SECONDARY_DENSITY_WARNING {
            out.push(format!(
                "sentence density {} rewrites most of the secondary-language text; quality usually degrades past {}",
                self.sentence_density, SECONDARY_DENSITY_WARNING
            ));
        }
        out
    }
}

/// Rewrites one sentence written in `src` into code-switching type
/// `cs_type` with `tgt` as the inserted language.
pub fn synthesize_sentence(
    sentence: &str,
    cs_type: CsType,
    src: &str,
    tgt: &str,
    translator: &dyn Translator,
    generator: &dyn TokenCsGenerator,
) -> Result<String> {
    let out = match cs_type {
        CsType::SentRepl | CsType::SentAnnt => {
            let t = translator.translate(sentence, src, tgt)?;
            let t = t.trim();
            if t.is_empty() {
                return Err(Error::Backend("empty translation".into()));
            }
            if cs_type == CsType::SentRepl {
                t.to_string()
            } else {
                format!("{sentence} ({t})")
            }
        }
        CsType::TokenAnnt => generator.annotate(sentence, src, tgt)?,
        CsType::TokenRepl => generator.replace(sentence, src, tgt)?,
    };
    if out.trim().is_empty() || out == sentence {
        return Err(Error::Backend(format!("{} produced no change", cs_type.name())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::Lexicon;

    struct Empty;

    impl Translator for Empty {
        fn translate(&self, _: &str, _: &str, _: &str) -> Result<String> {
            Ok("  ".into())
        }
    }

    fn backends() -> (DictionaryTranslator, DictionaryGenerator) {
        let lex = Arc::new(
            Lexicon::parse_tsv(
                "let's\t我们\tc1\nbuy\t买\tc2\nsome\t一些\tc3\nfruit\t水果\tc4\nrazor\t剃须刀\tc5\ndictionary\t字典\tc6\n",
            )
            .unwrap(),
        );
        let pair: LanguagePair = "en-zh".parse().unwrap();
        (
            DictionaryTranslator::new(lex.clone(), pair.clone()),
            DictionaryGenerator::new(lex, pair).with_max_terms(2),
        )
    }

    #[test]
    fn four_types() {
        let (t, g) = backends();
        let s = "Let's buy some fruit.";
        assert_eq!(
            synthesize_sentence(s, CsType::SentAnnt, "en", "zh", &t, &g).unwrap(),
            "Let's buy some fruit. (我们 买 一些 水果。)"
        );
        assert_eq!(
            synthesize_sentence(s, CsType::SentRepl, "en", "zh", &t, &g).unwrap(),
            "我们 买 一些 水果。"
        );
        assert_eq!(
            synthesize_sentence("such as razor and dictionary", CsType::TokenRepl, "en", "zh", &t, &g).unwrap(),
            "such as 剃须刀 and 字典"
        );
        assert_eq!(
            synthesize_sentence("a razor", CsType::TokenAnnt, "en", "zh", &t, &g).unwrap(),
            "a razor (剃须刀)"
        );
    }

    #[test]
    fn empty_translation_fails() {
        let (_, g) = backends();
        assert!(synthesize_sentence("Let's buy.", CsType::SentRepl, "en", "zh", &Empty, &g).is_err());
    }

    #[test]
    fn parse_names() {
        for t in CsType::ALL {
            assert_eq!(t.name().parse::<CsType>().unwrap(), t);
        }
        assert_eq!("in-secondary".parse::<PlanSide>().unwrap(), PlanSide::InSecondary);
    }

    #[test]
    fn secondary_density_warning() {
        let p = SynthesisPlan::new(PlanSide::InSecondary, CsType::TokenRepl).with_density(0.7);
        assert_eq!(p.warnings().len(), 1);
        assert!(SynthesisPlan::new(PlanSide::InPrimary, CsType::TokenRepl)
            .with_density(0.9)
            .warnings()
            .is_empty());
    }
}
