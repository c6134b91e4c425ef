use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cskit_core::ablation::SizeUnit;
use cskit_core::remote::RemoteConfig;
use cskit_core::synth::{Allocation, CsType, MixPreset, PlanSide, SftTask};
use cskit_core::{DetectorConfig, LanguagePair, ScriptProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    #[default]
    Dictionary,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    #[default]
    Heuristic,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub generator: GeneratorKind,
    pub token_classifier: ClassifierKind,
    /// Lexicon terms rewritten per sentence by the dictionary generator.
    pub max_terms: usize,
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            generator: GeneratorKind::Dictionary,
            token_classifier: ClassifierKind::Heuristic,
            max_terms: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisSection {
    pub side: PlanSide,
    pub cs_type: Option<CsType>,
    pub budget: Option<u64>,
    pub density: f64,
    /// Defaults to the side's usual cap when unset.
    pub cap: Option<f64>,
}

impl Default for SynthesisSection {
    fn default() -> Self {
        SynthesisSection {
            side: PlanSide::InPrimary,
            cs_type: None,
            budget: None,
            density: 0.5,
            cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixSection {
    pub preset: Option<MixPreset>,
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub allocations: Vec<Allocation>,
    pub primary_cap: f64,
    pub secondary_cap: f64,
}

impl Default for MixSection {
    fn default() -> Self {
        MixSection {
            preset: None,
            budget: None,
            allocations: Vec::new(),
            primary_cap: PlanSide::InPrimary.default_cap(),
            secondary_cap: PlanSide::InSecondary.default_cap(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationSection {
    pub size_unit: SizeUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SftSection {
    pub tasks: Vec<SftTask>,
    pub both_directions: bool,
}

impl Default for SftSection {
    fn default() -> Self {
        SftSection {
            tasks: vec![SftTask::Annotation, SftTask::Replacement],
            both_directions: false,
        }
    }
}

/// Everything a run depends on besides its input files. Loaded from a TOML
/// file, then overridden by flags; the result is echoed into the run report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pair: Option<String>,
    pub script_profile: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub strict: bool,
    pub lexicon: Option<PathBuf>,
    pub detector: DetectorConfig,
    pub backend: BackendSection,
    pub remote: RemoteConfig,
    pub synthesis: SynthesisSection,
    pub mix: MixSection,
    pub ablation: AblationSection,
    pub sft: SftSection,
}

const SECRET_KEYS: &[&str] = &["api_key", "apikey", "token", "secret", "password", "authorization"];

fn reject_secrets(value: &toml::Value, path: &str) -> anyhow::Result<()> {
    if let toml::Value::Table(t) = value {
        for (k, v) in t {
            let key = k.to_ascii_lowercase();
            if SECRET_KEYS.contains(&key.as_str()) {
                bail!(
                    "config key {path}{k} looks like a credential; secrets are read only from the environment variable named by remote.api_key_env"
                );
            }
            reject_secrets(v, &format!("{path}{k}."))?;
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<RunConfig> {
        let value: toml::Value = toml::from_str(text).context("config is not valid TOML")?;
        reject_secrets(&value, "")?;
        Ok(value.try_into()?)
    }

    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        RunConfig::from_toml(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn language_pair(&self) -> anyhow::Result<LanguagePair> {
        let Some(name) = &self.pair else {
            bail!("a language pair is required (--pair or `pair` in the config)");
        };
        match &self.script_profile {
            None => Ok(name.parse()?),
            Some(path) => {
                let (a, b) = name
                    .split_once('-')
                    .with_context(|| format!("language pair {name:?} must look like xx-yy"))?;
                Ok(LanguagePair::with_profile(a, b, ScriptProfile::load(path)?)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            pair = "en-zh"
            seed = 7
            [detector]
            annt_similarity_threshold = 0.8
            [synthesis]
            side = "in-secondary"
            cs_type = "token-repl"
            budget = 100
            [mix]
            preset = "extreme"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.detector.annt_similarity_threshold, 0.8);
        assert_eq!(cfg.detector.alignment_window, 2);
        assert_eq!(cfg.synthesis.cs_type, Some(CsType::TokenRepl));
        assert_eq!(cfg.synthesis.density, 0.5);
        assert_eq!(cfg.mix.preset, Some(MixPreset::Extreme));
        assert_eq!(cfg.backend.max_terms, 1);
    }

    #[test]
    fn credentials_and_typos_rejected() {
        let err = RunConfig::from_toml("[remote]\napi_key = \"sk-123\"").unwrap_err();
        assert!(err.to_string().contains("credential"));
        assert!(RunConfig::from_toml("[detector]\ntau = 0.5").is_err());
        assert!(RunConfig::from_toml("[remote]\napi_key_env = \"MY_KEY\"").is_ok());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig {
            pair: Some("en-zh".into()),
            ..RunConfig::default()
        };
        cfg.mix.allocations.push(Allocation {
            side: PlanSide::InPrimary,
            cs_type: CsType::SentAnnt,
            token_budget: 10,
        });
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }
}
