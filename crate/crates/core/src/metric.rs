//! Weighted precision, recall and F-beta over edit sets.
//!
//! For one reference, with system edits `E`, gold edits `G`, correct edits
//! `C = E ∩ G` and edit weights `|w|`:
//!
//! ```text
//! P = Σ_C |w| / Σ_E |w|      (1 when the denominator is zero)
//! R = Σ_C |w| / Σ_G |w|      (1 when the denominator is zero)
//! F = (1 + β²) · P · R / (β² · P + R)
//! ```
//!
//! A sentence scores the best F over its references. Sentence level averages
//! those maxima; corpus level sums the weighted tallies of each sentence's
//! best reference and applies the formulas once.

use alloc::vec::Vec;

use crate::align::{edit_set_ops, extract_edits};
use crate::edit::{Edit, Sentence, SentenceUnit};
use crate::error::{Error, Result};
use crate::scoring::{compute_edit_scores, EditScoreTable, PairScorer};

pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_MAX_UNCHANGED: usize = 2;
/// Weight floor used when inverting edit scores.
pub const INVERSE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Corpus,
    Sentence,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Corpus => "corpus",
            Level::Sentence => "sentence",
        }
    }
}

/// How a signed edit score becomes a weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    /// `|w|`
    Absolute,
    /// `1 / max(|w|, epsilon)`, for the inverse-weight ablation.
    Inverse { epsilon: f64 },
}

impl Weighting {
    pub fn weight(self, score: f64) -> f64 {
        match self {
            Weighting::Absolute => score.abs(),
            Weighting::Inverse { epsilon } => 1.0 / score.abs().max(epsilon),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricConfig {
    pub beta: f64,
    pub level: Level,
    pub max_unchanged: usize,
    pub case_sensitive: bool,
    pub weighting: Weighting,
    /// Leave out of the sentence-level mean any sentence where, for every
    /// reference, neither the system nor the annotator edited anything.
    pub skip_empty: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            level: Level::Corpus,
            max_unchanged: DEFAULT_MAX_UNCHANGED,
            case_sensitive: true,
            weighting: Weighting::Absolute,
            skip_empty: false,
        }
    }
}

impl MetricConfig {
    pub fn with_level(mut self, level: Level) -> Self {
        self.level = level;
        self
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if let Weighting::Inverse { epsilon } = self.weighting {
            if !(epsilon > 0.0) {
                return Err(Error::InvalidConfig("inverse epsilon must be positive".into()));
            }
        }
        Ok(())
    }
}

/// `(1 + β²)·P·R / (β²·P + R)`, or 0 when the denominator vanishes.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

/// Weighted numerator and denominators of precision and recall.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub correct: f64,
    pub proposed: f64,
    pub gold: f64,
}

impl Tally {
    pub fn precision(&self) -> f64 {
        if self.proposed == 0.0 {
            1.0
        } else {
            (self.correct / self.proposed).min(1.0)
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold == 0.0 {
            1.0
        } else {
            (self.correct / self.gold).min(1.0)
        }
    }

    pub fn f_score(&self, beta: f64) -> f64 {
        f_beta(self.precision(), self.recall(), beta)
    }

    fn add(&mut self, other: &Tally) {
        self.correct += other.correct;
        self.proposed += other.proposed;
        self.gold += other.gold;
    }

    /// Accumulates weights over `table`, whose entries must cover
    /// `system ∪ gold`. All slices are sorted.
    pub fn from_table(system: &[Edit], gold: &[Edit], table: &EditScoreTable, weighting: Weighting) -> Self {
        let mut tally = Tally::default();
        for (edit, score) in table.entries() {
            let in_system = system.binary_search(edit).is_ok();
            let in_gold = gold.binary_search(edit).is_ok();
            if !in_system && !in_gold {
                continue;
            }
            let w = weighting.weight(*score);
            if in_system {
                tally.proposed += w;
            }
            if in_gold {
                tally.gold += w;
            }
            if in_system && in_gold {
                tally.correct += w;
            }
        }
        tally
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceScore {
    pub system_edits: Vec<Edit>,
    pub gold_edits: Vec<Edit>,
    pub correct_edits: Vec<Edit>,
    pub table: EditScoreTable,
    pub tally: Tally,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceScore {
    pub references: Vec<ReferenceScore>,
    /// Index of the reference with the highest F (lowest index on ties).
    pub best: usize,
    /// No reference had any system or gold edit.
    pub empty: bool,
}

impl SentenceScore {
    pub fn f_max(&self) -> f64 {
        self.references[self.best].f_score
    }

    pub fn best_reference(&self) -> &ReferenceScore {
        &self.references[self.best]
    }

    /// Re-tallies the stored edit scores under another weighting.
    pub fn reweighted(&self, weighting: Weighting, beta: f64) -> Self {
        let references: Vec<ReferenceScore> = self
            .references
            .iter()
            .map(|r| {
                let tally = Tally::from_table(&r.system_edits, &r.gold_edits, &r.table, weighting);
                ReferenceScore {
                    precision: tally.precision(),
                    recall: tally.recall(),
                    f_score: tally.f_score(beta),
                    tally,
                    ..r.clone()
                }
            })
            .collect();
        let best = best_index(references.iter().map(|r| r.f_score));
        Self {
            references,
            best,
            empty: self.empty,
        }
    }
}

fn best_index(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut f_max = -1.0;
    for (j, f) in scores.enumerate() {
        if f > f_max {
            f_max = f;
            best = j;
        }
    }
    best
}

fn case_fold<'a>(
    unit: &'a SentenceUnit,
    hypothesis: &'a Sentence,
    case_sensitive: bool,
) -> (alloc::borrow::Cow<'a, SentenceUnit>, alloc::borrow::Cow<'a, Sentence>) {
    use alloc::borrow::Cow;
    if case_sensitive {
        (Cow::Borrowed(unit), Cow::Borrowed(hypothesis))
    } else {
        (Cow::Owned(unit.to_lowercase()), Cow::Owned(hypothesis.to_lowercase()))
    }
}

/// Scores one hypothesis against every reference of `unit`.
pub fn score_sentence(
    unit: &SentenceUnit,
    hypothesis: &Sentence,
    scorer: &dyn PairScorer,
    config: &MetricConfig,
) -> Result<SentenceScore> {
    config.validate()?;
    let (unit, hypothesis) = case_fold(unit, hypothesis, config.case_sensitive);
    let source = unit.source();
    let mut references = Vec::with_capacity(unit.gold().len());
    let mut empty = true;
    for (annotation, reference) in unit.gold().iter().zip(unit.references()) {
        let gold = &annotation.edits;
        let system = extract_edits(source, &hypothesis, gold, config.max_unchanged)?;
        let mut gold_sorted = gold.clone();
        gold_sorted.sort();
        let (union, correct) = edit_set_ops(&system, &gold_sorted);
        let table = compute_edit_scores(source, reference, &union, scorer)?;
        let tally = Tally::from_table(&system, &gold_sorted, &table, config.weighting);
        empty &= system.is_empty() && gold.is_empty();
        references.push(ReferenceScore {
            precision: tally.precision(),
            recall: tally.recall(),
            f_score: tally.f_score(config.beta),
            system_edits: system,
            gold_edits: gold_sorted,
            correct_edits: correct,
            table,
            tally,
        });
    }
    let best = best_index(references.iter().map(|r| r.f_score));
    Ok(SentenceScore {
        references,
        best,
        empty,
    })
}

/// `(P, R, F)` for one reference.
pub type PerReference = (f64, f64, f64);

/// Sentence F maximised over references, with every reference's
/// `(P, R, F)`.
pub fn sentence_f(
    unit: &SentenceUnit,
    hypothesis: &Sentence,
    scorer: &dyn PairScorer,
    config: &MetricConfig,
) -> Result<(f64, Vec<PerReference>)> {
    let score = score_sentence(unit, hypothesis, scorer, config)?;
    let per_reference = score
        .references
        .iter()
        .map(|r| (r.precision, r.recall, r.f_score))
        .collect();
    Ok((score.f_max(), per_reference))
}

/// System-level scores.
///
/// At corpus level `f_score` is F-beta of `precision` and `recall`. At
/// sentence level all three are means of the per-sentence values of each
/// sentence's best reference, so the F identity does not hold for the means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricResult {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub level: Level,
    pub n_sentences: usize,
}

/// Folds per-sentence scores (in corpus order) into a system score.
pub fn aggregate(scores: &[SentenceScore], config: &MetricConfig) -> Result<MetricResult> {
    if scores.is_empty() {
        return Err(Error::Empty("corpus has no sentences"));
    }
    match config.level {
        Level::Corpus => {
            let mut total = Tally::default();
            for s in scores {
                total.add(&s.best_reference().tally);
            }
            Ok(MetricResult {
                precision: total.precision(),
                recall: total.recall(),
                f_score: total.f_score(config.beta),
                level: Level::Corpus,
                n_sentences: scores.len(),
            })
        }
        Level::Sentence => {
            let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
            let mut n = 0usize;
            for s in scores.iter().filter(|s| !(config.skip_empty && s.empty)) {
                let best = s.best_reference();
                p += best.precision;
                r += best.recall;
                f += best.f_score;
                n += 1;
            }
            if n == 0 {
                return Err(Error::Empty("every sentence was skipped as empty"));
            }
            let n_f = n as f64;
            Ok(MetricResult {
                precision: p / n_f,
                recall: r / n_f,
                f_score: f / n_f,
                level: Level::Sentence,
                n_sentences: n,
            })
        }
    }
}

/// Scores a whole system output sequentially.
pub fn evaluate_system(
    units: &[SentenceUnit],
    hypotheses: &[Sentence],
    scorer: &dyn PairScorer,
    config: &MetricConfig,
) -> Result<MetricResult> {
    if units.len() != hypotheses.len() {
        return Err(Error::LengthMismatch {
            what: "hypotheses per source sentence",
            expected: units.len(),
            found: hypotheses.len(),
        });
    }
    let scores = units
        .iter()
        .zip(hypotheses)
        .map(|(u, h)| score_sentence(u, h, scorer, config))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&scores, config)
}

/// Plain M² by edit counting, kept independent of the weighted path.
pub mod m2 {
    use super::*;

    #[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
    pub struct Counts {
        pub correct: usize,
        pub proposed: usize,
        pub gold: usize,
    }

    impl Counts {
        pub fn precision(&self) -> f64 {
            if self.proposed == 0 {
                1.0
            } else {
                self.correct as f64 / self.proposed as f64
            }
        }

        pub fn recall(&self) -> f64 {
            if self.gold == 0 {
                1.0
            } else {
                self.correct as f64 / self.gold as f64
            }
        }
    }

    /// Per-reference edit counts for one sentence.
    pub fn sentence_counts(
        unit: &SentenceUnit,
        hypothesis: &Sentence,
        max_unchanged: usize,
    ) -> Result<Vec<Counts>> {
        unit.gold()
            .iter()
            .map(|annotation| {
                let system = extract_edits(unit.source(), hypothesis, &annotation.edits, max_unchanged)?;
                let correct = system
                    .iter()
                    .filter(|e| annotation.edits.contains(e))
                    .count();
                Ok(Counts {
                    correct,
                    proposed: system.len(),
                    gold: annotation.edits.len(),
                })
            })
            .collect()
    }

    pub fn score(
        units: &[SentenceUnit],
        hypotheses: &[Sentence],
        config: &MetricConfig,
    ) -> Result<MetricResult> {
        config.validate()?;
        if units.len() != hypotheses.len() {
            return Err(Error::LengthMismatch {
                what: "hypotheses per source sentence",
                expected: units.len(),
                found: hypotheses.len(),
            });
        }
        if units.is_empty() {
            return Err(Error::Empty("corpus has no sentences"));
        }
        let beta = config.beta;
        let mut total = Counts::default();
        let (mut p_sum, mut r_sum, mut f_sum) = (0.0, 0.0, 0.0);
        let mut n = 0usize;
        for (unit, hyp) in units.iter().zip(hypotheses) {
            let (unit, hyp) = case_fold(unit, hyp, config.case_sensitive);
            let counts = sentence_counts(&unit, &hyp, config.max_unchanged)?;
            let best = best_index(counts.iter().map(|c| f_beta(c.precision(), c.recall(), beta)));
            let c = counts[best];
            total.correct += c.correct;
            total.proposed += c.proposed;
            total.gold += c.gold;
            if config.skip_empty && counts.iter().all(|c| c.proposed == 0 && c.gold == 0) {
                continue;
            }
            p_sum += c.precision();
            r_sum += c.recall();
            f_sum += f_beta(c.precision(), c.recall(), beta);
            n += 1;
        }
        match config.level {
            Level::Corpus => Ok(MetricResult {
                precision: total.precision(),
                recall: total.recall(),
                f_score: f_beta(total.precision(), total.recall(), beta),
                level: Level::Corpus,
                n_sentences: units.len(),
            }),
            Level::Sentence if n == 0 => Err(Error::Empty("every sentence was skipped as empty")),
            Level::Sentence => Ok(MetricResult {
                precision: p_sum / n as f64,
                recall: r_sum / n as f64,
                f_score: f_sum / n as f64,
                level: Level::Sentence,
                n_sentences: n,
            }),
        }
    }
}
