use std::sync::Arc;

use crate::lexicon::{Lexicon, Side};
use crate::Result;

/// Sentence encoder whose vectors are comparable across languages.
pub trait CrossLingualEncoder: Send + Sync {
    fn dim(&self) -> usize;

    fn embed(&self, text: &str) -> Result<Vec<f32>>;
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else if a == b {
        1.0
    } else {
        (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
    }
}

/// Bag-of-concepts encoder over a bilingual lexicon.
///
/// Each lexicon term found in the text (either side) adds one to its concept's
/// coordinate, so a sentence and its word-for-word dictionary translation
/// embed identically while sentences with no shared concepts are orthogonal.
#[derive(Debug, Clone)]
pub struct LexiconEncoder {
    lexicon: Arc<Lexicon>,
}

impl LexiconEncoder {
    pub fn new(lexicon: Arc<Lexicon>) -> Self {
        LexiconEncoder { lexicon }
    }
}

impl CrossLingualEncoder for LexiconEncoder {
    fn dim(&self) -> usize {
        self.lexicon.concept_count()
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        let mut v = vec![0f32; self.dim()];
        for side in [Side::Source, Side::Target] {
            for m in self.lexicon.find(text, side) {
                v[self.lexicon.entry(m.entry).concept as usize] += 1.0;
            }
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_edge_cases() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 2.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn translation_embeds_identically() {
        let lex = Lexicon::parse_tsv("fruit\t水果\tc1\nbuy\t买\tc2\nrazor\t剃须刀\tc3\n").unwrap();
        let enc = LexiconEncoder::new(Arc::new(lex));
        let a = enc.embed("Let's buy some fruit.").unwrap();
        let b = enc.embed("我们买一些水果。").unwrap();
        assert_eq!(cosine(&a, &b), 1.0);
        let c = enc.embed("剃须刀").unwrap();
        assert_eq!(cosine(&a, &c), 0.0);
    }
}
