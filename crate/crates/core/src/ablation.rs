//! Ablation datasets built by document substitution.
//!
//! The main corpus `M` and a holdout pool `P` are each split into documents
//! with code-switching (wcs) and without (wocs). The cs-free dataset swaps
//! every `M_wcs` document for a clean pool sample `S`; the control dataset
//! swaps a random clean subset `T` of `M` for the same `S`.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::Document;
use crate::detect::DetectedDocument;
use crate::seed::{derive, Stream};
use crate::synth::TokenCounter;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationMode {
    CsFree,
    Control,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeUnit {
    #[default]
    Documents,
    Tokens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationSpec {
    pub mode: AblationMode,
    pub seed: u64,
    pub size_unit: SizeUnit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocInfo {
    pub id: String,
    /// Token count, when the partition was built with a counter.
    pub tokens: Option<u64>,
}

impl DocInfo {
    fn size(&self, unit: SizeUnit) -> Result<u64> {
        match unit {
            SizeUnit::Documents => Ok(1),
            SizeUnit::Tokens => self.tokens.ok_or_else(|| {
                Error::Config("token sizes unavailable: partition without a token counter".into())
            }),
        }
    }
}

/// The four cells, each in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartitionedCorpus {
    pub m_wcs: Vec<DocInfo>,
    pub m_wocs: Vec<DocInfo>,
    pub p_wcs: Vec<DocInfo>,
    pub p_wocs: Vec<DocInfo>,
}

/// Splits detected main and pool streams into the four cells.
///
/// A document is wcs iff it has a segment that is not unrelated. With a
/// counter, token sizes are recorded for the tokens size unit.
pub fn partition<M, P>(main: M, pool: P, counter: Option<&dyn TokenCounter>) -> Result<PartitionedCorpus>
where
    M: IntoIterator<Item = Result<DetectedDocument>>,
    P: IntoIterator<Item = Result<DetectedDocument>>,
{
    let mut seen = HashSet::new();
    let mut out = PartitionedCorpus::default();
    let mut add = |rec: DetectedDocument, is_main: bool| -> Result<()> {
        if !seen.insert(rec.doc.id.clone()) {
            return Err(Error::IdCollision(rec.doc.id));
        }
        let tokens = counter.map(|c| c.count(&rec.doc.text, &rec.doc.lang));
        let wcs = rec.has_related_cs();
        let info = DocInfo { id: rec.doc.id, tokens };
        let cell = match (is_main, wcs) {
            (true, true) => &mut out.m_wcs,
            (true, false) => &mut out.m_wocs,
            (false, true) => &mut out.p_wcs,
            (false, false) => &mut out.p_wocs,
        };
        cell.push(info);
        Ok(())
    };
    for rec in main {
        add(rec?, true)?;
    }
    for rec in pool {
        add(rec?, false)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    M,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Kept,
    SubstitutedIn,
    SubstitutedOut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub origin: Origin,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationResult {
    pub spec: AblationSpec,
    /// Rows for `M_wcs`, then `M_wocs`, then `S`, each in input order.
    pub manifest: Vec<ManifestRow>,
    /// Ids of `S`, in sampling order.
    pub substituted_in: Vec<String>,
    /// Ids removed from `M` (`M_wcs` or `T`).
    pub substituted_out: Vec<String>,
    /// Size of `M` in the size unit.
    pub target_size: u64,
    pub output_size: u64,
    /// `output_size - target_size`; nonzero only in tokens mode.
    pub residual: i64,
}

impl AblationResult {
    pub fn output_ids(&self) -> impl Iterator<Item = &str> {
        self.manifest
            .iter()
            .filter(|r| r.role != Role::SubstitutedOut)
            .map(|r| r.id.as_str())
    }

    pub fn output_len(&self) -> usize {
        self.output_ids().count()
    }

    /// Writes the manifest: a header object, then one row per document.
    pub fn write_manifest<W: Write>(&self, mut out: W) -> Result<()> {
        let header = json!({
            "manifest": "ablation",
            "mode": self.spec.mode,
            "seed": self.spec.seed,
            "size_unit": self.spec.size_unit,
            "size_unit_note": "equal corpus size may be read as equal document count or equal token count; this manifest uses the unit named in size_unit",
            "target_size": self.target_size,
            "output_size": self.output_size,
            "residual": self.residual,
        });
        writeln!(out, "{header}")?;
        for row in &self.manifest {
            serde_json::to_writer(&mut out, row).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Streams the ablated corpus: kept main documents in main order, then
    /// sampled pool documents in pool order. Returns the number written.
    pub fn materialize<M, P, F>(&self, main: M, pool: P, mut sink: F) -> Result<usize>
    where
        M: IntoIterator<Item = Result<Document>>,
        P: IntoIterator<Item = Result<Document>>,
        F: FnMut(Document) -> Result<()>,
    {
        let removed: HashSet<&str> = self.substituted_out.iter().map(String::as_str).collect();
        let added: HashSet<&str> = self.substituted_in.iter().map(String::as_str).collect();
        let mut n = 0;
        for doc in main {
            let doc = doc?;
            if !removed.contains(doc.id.as_str()) {
                sink(doc)?;
                n += 1;
            }
        }
        for doc in pool {
            let doc = doc?;
            if added.contains(doc.id.as_str()) {
                sink(doc)?;
                n += 1;
            }
        }
        let expected = self.output_len();
        if n != expected {
            return Err(Error::Config(format!(
                "materialized {n} documents but the manifest lists {expected}; inputs changed since partitioning"
            )));
        }
        Ok(n)
    }
}

fn total(docs: &[DocInfo], unit: SizeUnit) -> Result<u64> {
    docs.iter().map(|d| d.size(unit)).sum()
}

/// Uniform sample without replacement from `from`, sized to reach `target`
/// in `unit`. Documents mode draws exactly `target` documents; tokens mode
/// takes documents of a seeded permutation until the total reaches `target`.
fn sample(
    from: &[DocInfo],
    target: u64,
    unit: SizeUnit,
    mut stream: Stream,
    what: &'static str,
) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..from.len()).collect();
    match unit {
        SizeUnit::Documents => {
            let k = target as usize;
            if k > from.len() {
                return Err(Error::Insufficient {
                    what,
                    needed: target,
                    available: from.len() as u64,
                    shortfall: target - from.len() as u64,
                });
            }
            stream.partial_shuffle(&mut idx, k);
            idx.truncate(k);
            Ok(idx)
        }
        SizeUnit::Tokens => {
            stream.shuffle(&mut idx);
            let mut acc = 0u64;
            let mut n = 0;
            while acc < target && n < idx.len() {
                acc += from[idx[n]].size(unit)?;
                n += 1;
            }
            if acc < target {
                return Err(Error::Insufficient {
                    what,
                    needed: target,
                    available: acc,
                    shortfall: target - acc,
                });
            }
            idx.truncate(n);
            Ok(idx)
        }
    }
}

impl PartitionedCorpus {
    /// The pool sample `S`, shared by both modes under one seed.
    pub fn sample_s(&self, seed: u64, unit: SizeUnit) -> Result<Vec<usize>> {
        let need = total(&self.m_wcs, unit)?;
        sample(&self.p_wocs, need, unit, Stream::new(derive(seed, "S")), "clean pool documents")
    }

    pub fn build(&self, spec: AblationSpec) -> Result<AblationResult> {
        let unit = spec.size_unit;
        let s = self.sample_s(spec.seed, unit)?;
        let s_size: u64 = s.iter().map(|&i| self.p_wocs[i].size(unit)).sum::<Result<u64>>()?;
        let out_set: HashSet<usize> = match spec.mode {
            AblationMode::CsFree => (0..self.m_wcs.len()).collect(),
            AblationMode::Control => sample(
                &self.m_wocs,
                s_size,
                unit,
                Stream::new(derive(spec.seed, "T")),
                "clean main documents",
            )?
            .into_iter()
            .collect(),
        };
        let removed_wcs = spec.mode == AblationMode::CsFree;

        let mut manifest = Vec::new();
        let mut substituted_out = Vec::new();
        for (i, d) in self.m_wcs.iter().enumerate() {
            let out = removed_wcs && out_set.contains(&i);
            manifest.push(row(d, Origin::M, out));
            if out {
                substituted_out.push(d.id.clone());
            }
        }
        for (i, d) in self.m_wocs.iter().enumerate() {
            let out = !removed_wcs && out_set.contains(&i);
            manifest.push(row(d, Origin::M, out));
            if out {
                substituted_out.push(d.id.clone());
            }
        }
        let mut s_sorted = s.clone();
        s_sorted.sort_unstable();
        for &i in &s_sorted {
            manifest.push(ManifestRow {
                id: self.p_wocs[i].id.clone(),
                origin: Origin::P,
                role: Role::SubstitutedIn,
            });
        }

        let target_size = total(&self.m_wcs, unit)? + total(&self.m_wocs, unit)?;
        let removed_size: u64 = manifest
            .iter()
            .zip(self.m_wcs.iter().chain(&self.m_wocs))
            .filter(|(r, _)| r.role == Role::SubstitutedOut)
            .map(|(_, d)| d.size(unit))
            .sum::<Result<u64>>()?;
        let output_size = target_size - removed_size + s_size;
        Ok(AblationResult {
            spec,
            manifest,
            substituted_in: s.iter().map(|&i| self.p_wocs[i].id.clone()).collect(),
            substituted_out,
            target_size,
            output_size,
            residual: output_size as i64 - target_size as i64,
        })
    }

    pub fn build_cs_free(&self, seed: u64, size_unit: SizeUnit) -> Result<AblationResult> {
        self.build(AblationSpec {
            mode: AblationMode::CsFree,
            seed,
            size_unit,
        })
    }

    pub fn build_control(&self, seed: u64, size_unit: SizeUnit) -> Result<AblationResult> {
        self.build(AblationSpec {
            mode: AblationMode::Control,
            seed,
            size_unit,
        })
    }
}

fn row(d: &DocInfo, origin: Origin, out: bool) -> ManifestRow {
    ManifestRow {
        id: d.id.clone(),
        origin,
        role: if out { Role::SubstitutedOut } else { Role::Kept },
    }
}
