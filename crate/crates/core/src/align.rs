//! Cross-lingual alignment score over paired sentence embeddings.
//!
//! The score is mutual nearest-neighbour retrieval accuracy under cosine
//! similarity (reported as method `mutual-nn-cosine`): the fraction of pairs
//! `i` for which `F_i` is the nearest neighbour of `E_i` among all rows of
//! `F` and `E_i` is the nearest neighbour of `F_i` among all rows of `E`.
//! Ties go to the lowest index and are counted.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{read_embeddings, EmbeddingMatrix};
use crate::{Error, Result};

pub const METHOD: &str = "mutual-nn-cosine";

const ROW_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignmentScore {
    pub score: f64,
    /// Row and column argmax decisions that had an exact tie.
    pub ties: u64,
}

fn normalized(m: &EmbeddingMatrix, which: &'static str) -> Result<Vec<f64>> {
    let d = m.dim();
    let mut out = Vec::with_capacity(m.rows() * d);
    for r in 0..m.rows() {
        let row = m.row(r);
        let norm = row.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm { which, row: r });
        }
        out.extend(row.iter().map(|&x| x as f64 / norm));
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    index: usize,
    tied: bool,
}

impl Best {
    const NONE: Best = Best {
        value: f64::NEG_INFINITY,
        index: usize::MAX,
        tied: false,
    };

    /// Candidates must arrive in increasing index order.
    fn offer(&mut self, value: f64, index: usize) {
        if value > self.value {
            *self = Best {
                value,
                index,
                tied: false,
            };
        } else if value == self.value {
            self.tied = true;
        }
    }

    /// Merges a partial result covering later indices.
    fn absorb(&mut self, later: Best) {
        if later.value > self.value {
            *self = later;
        } else if later.value == self.value {
            self.tied = true;
        }
    }
}

pub fn alignment_score(e: &EmbeddingMatrix, f: &EmbeddingMatrix) -> Result<AlignmentScore> {
    let n = e.rows();
    if n != f.rows() {
        return Err(Error::DimensionMismatch(format!("E has {n} rows, F has {}", f.rows())));
    }
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "E has dimension {}, F has {}",
            e.dim(),
            f.dim()
        )));
    }
    if n < 2 {
        return Err(Error::DimensionMismatch(format!("need at least 2 pairs, got {n}")));
    }
    let d = e.dim();
    let en = normalized(e, "E")?;
    let fn_ = normalized(f, "F")?;

    // Each chunk of E rows yields its own row maxima and a partial column
    // maximum over those rows; partials merge in row order.
    let partials: Vec<(Vec<Best>, Vec<Best>)> = (0..n)
        .step_by(ROW_CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + ROW_CHUNK).min(n);
            let mut rows = vec![Best::NONE; end - start];
            let mut cols = vec![Best::NONE; n];
            for i in start..end {
                let a = &en[i * d..(i + 1) * d];
                for (j, col) in cols.iter_mut().enumerate() {
                    let b = &fn_[j * d..(j + 1) * d];
                    let s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    rows[i - start].offer(s, j);
                    col.offer(s, i);
                }
            }
            (rows, cols)
        })
        .collect();

    let mut row_best = Vec::with_capacity(n);
    let mut col_best = vec![Best::NONE; n];
    for (rows, cols) in partials {
        row_best.extend(rows);
        for (acc, c) in col_best.iter_mut().zip(cols) {
            acc.absorb(c);
        }
    }
    let hits = (0..n).filter(|&i| row_best[i].index == i && col_best[i].index == i).count();
    let ties = row_best.iter().chain(&col_best).filter(|b| b.tied).count() as u64;
    Ok(AlignmentScore {
        score: hits as f64 / n as f64,
        ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerScore {
    /// 1-based layer number.
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ties: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentResult {
    pub method: &'static str,
    pub n_pairs: usize,
    pub layers: Vec<LayerScore>,
}

impl AlignmentResult {
    pub fn scores(&self) -> Vec<Option<f64>> {
        self.layers.iter().map(|l| l.score).collect()
    }

    pub fn failed(&self) -> usize {
        self.layers.iter().filter(|l| l.error.is_some()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("alignment result serializes")
    }

    /// `layer,score` rows; failed layers have an empty score.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,score\n");
        for l in &self.layers {
            match l.score {
                Some(s) => writeln!(out, "{},{s:.6}", l.index).unwrap(),
                None => writeln!(out, "{},", l.index).unwrap(),
            }
        }
        out
    }
}

fn collect(results: Vec<Result<(usize, AlignmentScore)>>) -> AlignmentResult {
    let mut n_pairs = 0;
    let layers = results
        .into_iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok((n, s)) => {
                n_pairs = n_pairs.max(n);
                LayerScore {
                    index: i + 1,
                    score: Some(s.score),
                    ties: Some(s.ties),
                    error: None,
                }
            }
            Err(e) => LayerScore {
                index: i + 1,
                score: None,
                ties: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    AlignmentResult {
        method: METHOD,
        n_pairs,
        layers,
    }
}

/// Scores each layer's `(E, F)` file pair. A layer that fails to load or
/// score is reported with its error; the others are still scored.
pub fn layerwise_scores(layers: &[(PathBuf, PathBuf)]) -> AlignmentResult {
    let results = layers
        .par_iter()
        .map(|(ep, fp)| {
            let e = read_embeddings(ep)?;
            let f = read_embeddings(fp)?;
            alignment_score(&e, &f).map(|s| (e.rows(), s))
        })
        .collect();
    collect(results)
}

/// In-memory variant of [`layerwise_scores`].
pub fn layerwise_scores_in_memory(layers: &[(EmbeddingMatrix, EmbeddingMatrix)]) -> AlignmentResult {
    let results = layers
        .par_iter()
        .map(|(e, f)| alignment_score(e, f).map(|s| (e.rows(), s)))
        .collect();
    collect(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f32]]) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identical_and_shifted() {
        let e = m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(alignment_score(&e, &e).unwrap().score, 1.0);
        let f = m(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(alignment_score(&e, &f).unwrap().score, 0.0);
    }

    #[test]
    fn ties_go_low_and_are_counted() {
        let e = m(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let s = alignment_score(&e, &e).unwrap();
        // Row 1 and column 1 both resolve to index 0.
        assert_eq!(s.score, 0.5);
        assert_eq!(s.ties, 4);
    }

    #[test]
    fn errors() {
        let e = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let z = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(alignment_score(&e, &z), Err(Error::ZeroNorm { which: "F", row: 1 })));
        let wide = m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!(matches!(alignment_score(&e, &wide), Err(Error::DimensionMismatch(_))));
        let one = m(&[&[1.0, 0.0]]);
        assert!(alignment_score(&one, &one).is_err());
    }

    #[test]
    fn chunk_merge_matches_small_case() {
        // More rows than one chunk, so partial column maxima are merged.
        let n = ROW_CHUNK * 2 + 5;
        let rows: Vec<Vec<f32>> = (0..n)
            .map(|i| {
                let a = i as f32 * 0.37;
                vec![a.cos(), a.sin(), 0.1 * (i % 7) as f32]
            })
            .collect();
        let e = EmbeddingMatrix::from_rows(&rows).unwrap();
        assert_eq!(alignment_score(&e, &e).unwrap().score, 1.0);
        let mut shifted = rows.clone();
        shifted.rotate_left(1);
        let f = EmbeddingMatrix::from_rows(&shifted).unwrap();
        assert_eq!(alignment_score(&e, &f).unwrap().score, 0.0);
    }

    #[test]
    fn layer_error_isolated() {
        let e = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let z = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let r = layerwise_scores_in_memory(&[(e.clone(), e.clone()), (e.clone(), z), (e.clone(), e)]);
        assert_eq!(r.scores(), vec![Some(1.0), None, Some(1.0)]);
        assert_eq!(r.layers[1].index, 2);
        assert_eq!(r.failed(), 1);
        assert!(r.to_csv().contains("\n2,\n"));
        assert!(r.to_json().contains("\"method\": \"mutual-nn-cosine\""));
    }
}
