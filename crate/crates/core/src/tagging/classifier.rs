/// Result of a sentence-level language classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub lang: String,
    pub confidence: f64,
}

/// Statistical language identification for sentences the script rule cannot
/// decide. Implementations must be deterministic.
pub trait SentenceClassifier: Send + Sync {
    fn classify(&self, text: &str) -> Classification;
}

/// Weak English/Romanian discriminator based on diacritics and function words.
#[derive(Debug, Clone)]
pub struct DiacriticClassifier {
    pub primary: String,
    pub secondary: String,
}

impl Default for DiacriticClassifier {
    fn default() -> Self {
        DiacriticClassifier {
            primary: "en".into(),
            secondary: "ro".into(),
        }
    }
}

const RO_DIACRITICS: &[char] = &['ă', 'â', 'î', 'ș', 'ş', 'ț', 'ţ', 'Ă', 'Â', 'Î', 'Ș', 'Ş', 'Ț', 'Ţ'];
const RO_WORDS: &[&str] = &[
    "și", "si", "în", "in", "de", "la", "este", "care", "cu", "pe", "un", "o", "nu", "sunt", "mai",
    "din", "pentru", "foarte",
];
const EN_WORDS: &[&str] = &[
    "the", "and", "is", "of", "to", "a", "in", "that", "it", "for", "with", "are", "was", "on",
];

impl SentenceClassifier for DiacriticClassifier {
    fn classify(&self, text: &str) -> Classification {
        let diacritics = text.chars().filter(|c| RO_DIACRITICS.contains(c)).count() as f64;
        let mut ro = 2.0 * diacritics;
        let mut en = 0.0;
        for word in text.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()) {
            let w = word.to_lowercase();
            // Words on both lists count for English.
            if EN_WORDS.contains(&w.as_str()) {
                en += 1.0;
            } else if RO_WORDS.contains(&w.as_str()) {
                ro += 1.0;
            }
        }
        let total = ro + en;
        if ro > en {
            Classification {
                lang: self.secondary.clone(),
                confidence: ro / total,
            }
        } else {
            Classification {
                lang: self.primary.clone(),
                confidence: if total == 0.0 { 0.5 } else { en / total },
            }
        }
    }
}
