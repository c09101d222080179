//! Sentence-pair scorers and per-edit scores.
//!
//! An edit `u` applied alone to the source `S` gives `S'`; its signed score is
//! `score(S', R) - score(S, R)` for reference `R`. Positive scores mark edits
//! that move the source towards the reference. Metrics use the magnitude as
//! the edit weight.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::chrf;
use crate::edit::{apply_edits, Edit, Sentence};
use crate::error::{Error, Result};

/// Identifies scoring semantics: a scorer name plus the settings that change
/// its output. Cache keys embed the full id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScorerId {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl ScorerId {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    /// Canonical text form, `name` or `name[k1=v1;k2=v2]` with sorted keys.
    pub fn key(&self) -> String {
        self.to_string()
    }

    /// Inverse of [`ScorerId::key`].
    pub fn parse(key: &str) -> Option<Self> {
        let Some(open) = key.find('[') else {
            return (!key.is_empty()).then(|| Self::new(key));
        };
        let inner = key[open + 1..].strip_suffix(']')?;
        let mut id = Self::new(&key[..open]);
        for kv in inner.split(';').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv.split_once('=')?;
            id.params.insert(k.into(), v.into());
        }
        Some(id)
    }
}

impl fmt::Display for ScorerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            f.write_str("[")?;
            for (i, (k, v)) in self.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(";")?;
                }
                write!(f, "{k}={v}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("scorer unavailable ({reason}) for candidate `{candidate}` / reference `{reference}`")]
    Unavailable {
        candidate: String,
        reference: String,
        reason: String,
    },
    #[error("score cache miss for key {key}")]
    CacheMiss { key: String },
    #[error("scorer failure: {0}")]
    Failed(String),
}

/// A deterministic sentence-pair scorer.
pub trait PairScorer: Sync {
    fn id(&self) -> ScorerId;

    fn score(&self, candidate: &Sentence, reference: &Sentence) -> Result<f64, ScoreError>;

    /// Scores several pairs. Implementations talking to a remote service
    /// should pipeline the requests.
    fn score_batch(&self, pairs: &[(&Sentence, &Sentence)]) -> Result<Vec<f64>, ScoreError> {
        pairs.iter().map(|(c, r)| self.score(c, r)).collect()
    }

    /// A uniform scorer gives every edit weight one instead of a score
    /// difference (which would always be zero for a constant scorer).
    fn is_uniform(&self) -> bool {
        false
    }
}

/// The `self` scorer: every pair scores 1 and every edit weighs 1, which
/// turns the weighted metric into plain M².
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformScorer;

impl PairScorer for UniformScorer {
    fn id(&self) -> ScorerId {
        ScorerId::new("self")
    }

    fn score(&self, _: &Sentence, _: &Sentence) -> Result<f64, ScoreError> {
        Ok(1.0)
    }

    fn is_uniform(&self) -> bool {
        true
    }
}

/// Built-in chrF similarity.
#[derive(Debug, Clone, Copy)]
pub struct ChrfScorer {
    pub max_order: usize,
    pub beta: f64,
}

impl Default for ChrfScorer {
    fn default() -> Self {
        Self {
            max_order: chrf::DEFAULT_ORDER,
            beta: chrf::DEFAULT_BETA,
        }
    }
}

impl PairScorer for ChrfScorer {
    fn id(&self) -> ScorerId {
        let id = ScorerId::new("chrf");
        if self.max_order == chrf::DEFAULT_ORDER && self.beta == chrf::DEFAULT_BETA {
            id
        } else {
            id.with_param("beta", self.beta.to_string())
                .with_param("order", self.max_order.to_string())
        }
    }

    fn score(&self, candidate: &Sentence, reference: &Sentence) -> Result<f64, ScoreError> {
        Ok(chrf::chrf(
            &candidate.text(),
            &reference.text(),
            self.max_order,
            self.beta,
        ))
    }
}

/// Signed scores for a set of edits against one reference.
#[derive(Debug, Clone, PartialEq)]
pub struct EditScoreTable {
    scorer: ScorerId,
    entries: Vec<(Edit, f64)>,
}

impl EditScoreTable {
    pub fn scorer(&self) -> &ScorerId {
        &self.scorer
    }

    pub fn get(&self, edit: &Edit) -> Option<f64> {
        self.entries
            .binary_search_by(|(e, _)| e.cmp(edit))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn entries(&self) -> &[(Edit, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiplies every score by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            scorer: self.scorer.clone(),
            entries: self
                .entries
                .iter()
                .map(|(e, w)| (e.clone(), w * factor))
                .collect(),
        }
    }

    pub fn from_entries(scorer: ScorerId, mut entries: Vec<(Edit, f64)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|a, b| a.0 == b.0);
        Self { scorer, entries }
    }
}

/// Scores every edit in `edits` (applied alone to `source`) against
/// `reference`.
pub fn compute_edit_scores(
    source: &Sentence,
    reference: &Sentence,
    edits: &[Edit],
    scorer: &dyn PairScorer,
) -> Result<EditScoreTable> {
    let mut unique = edits.to_vec();
    unique.sort();
    unique.dedup();

    if scorer.is_uniform() {
        let entries = unique.into_iter().map(|e| (e, 1.0)).collect();
        return Ok(EditScoreTable {
            scorer: scorer.id(),
            entries,
        });
    }

    let corrected = unique
        .iter()
        .map(|e| apply_edits(source, core::slice::from_ref(e)))
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::with_capacity(corrected.len() + 1);
    pairs.push((source, reference));
    pairs.extend(corrected.iter().map(|c| (c, reference)));

    let scores = scorer.score_batch(&pairs).map_err(|err| {
        let culprit = match &err {
            ScoreError::Unavailable { candidate, .. } => corrected
                .iter()
                .position(|c| c.text() == *candidate)
                .map(|i| unique[i].clone()),
            _ => None,
        };
        match culprit {
            Some(edit) => Error::Scoring { edit, source: err },
            None => Error::Score(err),
        }
    })?;
    if scores.len() != pairs.len() {
        return Err(Error::LengthMismatch {
            what: "scorer batch size",
            expected: pairs.len(),
            found: scores.len(),
        });
    }
    let base = scores[0];
    let entries = unique
        .into_iter()
        .zip(&scores[1..])
        .map(|(e, s)| (e, s - base))
        .collect();
    Ok(EditScoreTable {
        scorer: scorer.id(),
        entries,
    })
}
