use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A human ranking of systems, 1 = best. Rankings built from scores keep
/// them, and correlations use the scores when present.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanRanking {
    pub name: String,
    ranks: BTreeMap<String, u32>,
    scores: Option<BTreeMap<String, f64>>,
}

impl HumanRanking {
    /// Ranks must be a permutation of `1..=N`.
    pub fn from_ranks(name: impl Into<String>, entries: impl IntoIterator<Item = (String, u32)>) -> Result<Self> {
        let mut ranks = BTreeMap::new();
        for (system, rank) in entries {
            if let Some(prev) = ranks.insert(system.clone(), rank) {
                return Err(Error::InvalidRanking(format!(
                    "duplicate system `{system}` (ranks {prev} and {rank})"
                )));
            }
        }
        let mut seen: Vec<u32> = ranks.values().copied().collect();
        seen.sort_unstable();
        if seen.iter().enumerate().any(|(i, &r)| r as usize != i + 1) {
            return Err(Error::InvalidRanking(format!(
                "ranks must be a permutation of 1..={}",
                ranks.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            ranks,
            scores: None,
        })
    }

    /// Ranks by descending score; equal scores are ordered by system name.
    pub fn from_scores(name: impl Into<String>, entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut scores = BTreeMap::new();
        for (system, score) in entries {
            if !score.is_finite() {
                return Err(Error::InvalidRanking(format!("non-finite score for `{system}`")));
            }
            if scores.insert(system.clone(), score).is_some() {
                return Err(Error::InvalidRanking(format!("duplicate system `{system}`")));
            }
        }
        let ranks = rank_descending(&scores);
        Ok(Self {
            name: name.into(),
            ranks,
            scores: Some(scores),
        })
    }

    pub fn ranks(&self) -> &BTreeMap<String, u32> {
        &self.ranks
    }

    pub fn scores(&self) -> Option<&BTreeMap<String, f64>> {
        self.scores.as_ref()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Higher-is-better value per system: the human score, or the negated
    /// rank.
    pub fn value(&self, system: &str) -> Option<f64> {
        match &self.scores {
            Some(scores) => scores.get(system).copied(),
            None => self.ranks.get(system).map(|&r| -f64::from(r)),
        }
    }
}

/// Dense ranks by descending value, ties broken by ascending name.
pub fn rank_descending(values: &BTreeMap<String, f64>) -> BTreeMap<String, u32> {
    let mut order: Vec<(&String, f64)> = values.iter().map(|(k, &v)| (k, v)).collect();
    // BTreeMap iteration is already name-ascending; a stable sort keeps it
    // for equal values.
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    order
        .into_iter()
        .enumerate()
        .map(|(i, (name, _))| (name.clone(), i as u32 + 1))
        .collect()
}

/// Metric scores for a set of systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemScores {
    pub metric: String,
    scores: BTreeMap<String, f64>,
}

impl SystemScores {
    pub fn new(metric: impl Into<String>, scores: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((name, _)) = scores.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite metric score for `{name}`")));
        }
        Ok(Self {
            metric: metric.into(),
            scores,
        })
    }

    pub fn scores(&self) -> &BTreeMap<String, f64> {
        &self.scores
    }

    pub fn ranks(&self) -> BTreeMap<String, u32> {
        rank_descending(&self.scores)
    }
}
