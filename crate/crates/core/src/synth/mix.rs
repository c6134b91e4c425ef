use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::engine::run_on;
use super::{AccountingReport, Backends, CsType, Modification, PlanSide, SynthesisPlan};
use crate::corpus::{Document, DocumentSource};
use crate::seed::{derive, hash64};
use crate::tagging::Tagger;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixPreset {
    Equal,
    Extreme,
    EnReplEqual,
}

impl std::str::FromStr for MixPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(MixPreset::Equal),
            "extreme" => Ok(MixPreset::Extreme),
            "en-repl-equal" => Ok(MixPreset::EnReplEqual),
            _ => Err(Error::Config(format!("unknown mix preset {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub side: PlanSide,
    pub cs_type: CsType,
    pub token_budget: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixPlan {
    pub allocations: Vec<Allocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<MixPreset>,
}

/// Extreme preset at its reference scale: 2000 units of primary-side token
/// replacement against 200 units of secondary-side token annotation.
const EXTREME_MAJOR: u64 = 2000;
const EXTREME_MINOR: u64 = 200;

/// Splits `total` into `parts` integers that differ by at most one; the
/// remainder goes to the first parts.
fn even_split(total: u64, parts: u64) -> impl Iterator<Item = u64> {
    let (q, r) = (total / parts, total % parts);
    (0..parts).map(move |i| q + u64::from(i < r))
}

/// Expands a preset into allocations of `total_budget` tokens.
///
/// * Equal: the budget split evenly over all eight (side, type) cells.
/// * Extreme: primary-side token replacement and secondary-side token
///   annotation in the ratio 2000 : 200.
/// * EnReplEqual: primary-side token and sentence replacement, half each.
///
/// Allocations always sum to `total_budget` exactly.
pub fn plan_mix(preset: MixPreset, total_budget: u64) -> MixPlan {
    let allocations = match preset {
        MixPreset::Equal => {
            let cells = [PlanSide::InPrimary, PlanSide::InSecondary]
                .into_iter()
                .flat_map(|side| CsType::ALL.into_iter().map(move |t| (side, t)));
            cells
                .zip(even_split(total_budget, 8))
                .map(|((side, cs_type), token_budget)| Allocation {
                    side,
                    cs_type,
                    token_budget,
                })
                .collect()
        }
        MixPreset::Extreme => {
            let major = (total_budget as u128 * EXTREME_MAJOR as u128
                / (EXTREME_MAJOR + EXTREME_MINOR) as u128) as u64;
            vec![
                Allocation {
                    side: PlanSide::InPrimary,
                    cs_type: CsType::TokenRepl,
                    token_budget: major,
                },
                Allocation {
                    side: PlanSide::InSecondary,
                    cs_type: CsType::TokenAnnt,
                    token_budget: total_budget - major,
                },
            ]
        }
        MixPreset::EnReplEqual => {
            let mut halves = even_split(total_budget, 2);
            vec![
                Allocation {
                    side: PlanSide::InPrimary,
                    cs_type: CsType::TokenRepl,
                    token_budget: halves.next().unwrap(),
                },
                Allocation {
                    side: PlanSide::InPrimary,
                    cs_type: CsType::SentRepl,
                    token_budget: halves.next().unwrap(),
                },
            ]
        }
    };
    MixPlan {
        allocations,
        preset: Some(preset),
    }
}

impl MixPlan {
    pub fn explicit(allocations: Vec<Allocation>) -> Result<MixPlan> {
        if allocations.is_empty() {
            return Err(Error::Config("mix plan has no allocations".into()));
        }
        Ok(MixPlan {
            allocations,
            preset: None,
        })
    }

    pub fn total_budget(&self) -> u64 {
        self.allocations.iter().map(|a| a.token_budget).sum()
    }
}

/// Parameters shared by every allocation of a mix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixSettings {
    pub seed: u64,
    pub sentence_density: f64,
    pub primary_cap: f64,
    pub secondary_cap: f64,
}

impl Default for MixSettings {
    fn default() -> Self {
        MixSettings {
            seed: 0,
            sentence_density: 0.5,
            primary_cap: PlanSide::InPrimary.default_cap(),
            secondary_cap: PlanSide::InSecondary.default_cap(),
        }
    }
}

impl MixSettings {
    pub fn plan_for(&self, a: &Allocation) -> SynthesisPlan {
        let cap = match a.side {
            PlanSide::InPrimary => self.primary_cap,
            PlanSide::InSecondary => self.secondary_cap,
        };
        SynthesisPlan::new(a.side, a.cs_type)
            .with_budget(a.token_budget)
            .with_density(self.sentence_density)
            .with_cap(cap)
            .with_seed(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationRun {
    pub allocation: Allocation,
    pub report: AccountingReport,
    /// Documents of the allocation's partition.
    pub partition_size: usize,
    #[serde(skip)]
    pub log: Vec<Modification>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MixOutcome {
    /// Rewritten primary-language documents by position.
    pub primary: BTreeMap<usize, Document>,
    /// Rewritten secondary-language documents by position.
    pub secondary: BTreeMap<usize, Document>,
    pub runs: Vec<AllocationRun>,
    pub total: AccountingReport,
}

/// Assigns every document of `lang` in `source` to one allocation of `side`,
/// with probability proportional to allocation budgets (uniform when all
/// budgets are zero). Assignment depends only on the seed and the id.
fn partition(
    source: &dyn DocumentSource,
    lang: &str,
    allocs: &[(usize, &Allocation)],
    seed: u64,
) -> BTreeMap<usize, Vec<usize>> {
    let mut parts: BTreeMap<usize, Vec<usize>> = allocs.iter().map(|(i, _)| (*i, Vec::new())).collect();
    if allocs.is_empty() {
        return parts;
    }
    let total: u64 = allocs.iter().map(|(_, a)| a.token_budget).sum();
    let weights: Vec<u64> = if total == 0 {
        vec![1; allocs.len()]
    } else {
        allocs.iter().map(|(_, a)| a.token_budget).collect()
    };
    let sum: u128 = weights.iter().map(|&w| w as u128).sum();
    let key = derive(seed, "mix-partition");
    for i in (0..source.len()).filter(|&i| source.lang(i) == lang) {
        let r = (hash64(key, source.id(i)) as u128 * sum) >> 64;
        let mut acc = 0u128;
        for (&(alloc, _), &w) in allocs.iter().zip(&weights) {
            acc += w as u128;
            if r < acc {
                parts.get_mut(&alloc).unwrap().push(i);
                break;
            }
        }
    }
    parts
}

/// Runs every allocation of `mix` on its own share of the documents.
///
/// Documents of each side are split between that side's allocations by a
/// stable hash of their id, so no document is rewritten twice.
pub fn execute_mix(
    primary: &dyn DocumentSource,
    secondary: &dyn DocumentSource,
    mix: &MixPlan,
    settings: &MixSettings,
    tagger: &Tagger,
    backends: &Backends,
) -> Result<MixOutcome> {
    let pair = tagger.pair();
    let mut out = MixOutcome::default();
    let mut parts = BTreeMap::new();
    for (side, source) in [(PlanSide::InPrimary, primary), (PlanSide::InSecondary, secondary)] {
        let allocs: Vec<(usize, &Allocation)> =
            mix.allocations.iter().enumerate().filter(|(_, a)| a.side == side).collect();
        let (lang, _) = side.langs(pair);
        parts.extend(partition(source, lang, &allocs, settings.seed));
    }
    for (i, a) in mix.allocations.iter().enumerate() {
        let (source, target) = match a.side {
            PlanSide::InPrimary => (primary, &mut out.primary),
            PlanSide::InSecondary => (secondary, &mut out.secondary),
        };
        let eligible = parts.remove(&i).unwrap_or_default();
        let partition_size = eligible.len();
        let run = run_on(source, eligible, &settings.plan_for(a), tagger, backends)?;
        for (idx, doc) in run.modified {
            if target.insert(idx, doc).is_some() {
                return Err(Error::Config(format!("document {idx} rewritten by two allocations")));
            }
        }
        out.total.merge(&run.report);
        out.runs.push(AllocationRun {
            allocation: *a,
            report: run.report,
            partition_size,
            log: run.log,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_eight_cells() {
        let m = plan_mix(MixPreset::Equal, 8000);
        assert_eq!(m.allocations.len(), 8);
        assert!(m.allocations.iter().all(|a| a.token_budget == 1000));
        let cells: std::collections::HashSet<_> =
            m.allocations.iter().map(|a| (a.side, a.cs_type)).collect();
        assert_eq!(cells.len(), 8);
    }

    #[test]
    fn equal_remainder_sums() {
        let m = plan_mix(MixPreset::Equal, 8003);
        assert_eq!(m.total_budget(), 8003);
        assert_eq!(m.allocations[0].token_budget, 1001);
        assert_eq!(m.allocations[7].token_budget, 1000);
    }

    #[test]
    fn extreme_reference_scale() {
        let m = plan_mix(MixPreset::Extreme, 2_200_000_000);
        assert_eq!(
            m.allocations,
            vec![
                Allocation {
                    side: PlanSide::InPrimary,
                    cs_type: CsType::TokenRepl,
                    token_budget: 2_000_000_000
                },
                Allocation {
                    side: PlanSide::InSecondary,
                    cs_type: CsType::TokenAnnt,
                    token_budget: 200_000_000
                },
            ]
        );
        let small = plan_mix(MixPreset::Extreme, 22_000);
        assert_eq!(small.allocations[0].token_budget, 20_000);
        assert_eq!(small.allocations[1].token_budget, 2_000);
    }

    #[test]
    fn en_repl_equal_halves() {
        let m = plan_mix(MixPreset::EnReplEqual, 20_000);
        assert_eq!(m.allocations.len(), 2);
        assert!(m.allocations.iter().all(|a| a.token_budget == 10_000 && a.side == PlanSide::InPrimary));
        assert_eq!(m.allocations[0].cs_type, CsType::TokenRepl);
        assert_eq!(m.allocations[1].cs_type, CsType::SentRepl);
    }

    #[test]
    fn zero_budget_allowed() {
        assert_eq!(plan_mix(MixPreset::Equal, 0).total_budget(), 0);
        assert!(MixPlan::explicit(vec![]).is_err());
    }
}
