//! Source-penalized GLEU baseline.
//!
//! For each order `n`, hypothesis n-grams matching the reference are
//! rewarded and n-grams kept from the source that the reference dropped are
//! penalized:
//!
//! ```text
//! p_n = max(0, Σ min(h, r) - Σ max(0, min(h, s) - min(h, r))) / Σ h
//! ```
//!
//! The sentence score is `BP · exp(mean log p_n)` with
//! `BP = min(1, exp(1 - |R| / |H|))`, averaged over references. Orders longer
//! than the hypothesis are left out of the mean.

use alloc::collections::BTreeMap;

use crate::edit::{Sentence, SentenceUnit};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 4;

/// Token n-gram multiset of one order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCounts<'a> {
    pub order: usize,
    pub counts: BTreeMap<&'a [alloc::string::String], usize>,
}

impl<'a> NGramCounts<'a> {
    pub fn new(sentence: &'a Sentence, order: usize) -> Self {
        let mut counts = BTreeMap::new();
        if order > 0 && sentence.len() >= order {
            for gram in sentence.tokens().windows(order) {
                *counts.entry(gram).or_insert(0) += 1;
            }
        }
        Self { order, counts }
    }

    fn get(&self, gram: &[alloc::string::String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// `(penalized, unpenalized)` modified precision of one order.
pub fn modified_precision(source: &Sentence, hypothesis: &Sentence, reference: &Sentence, order: usize) -> (f64, f64) {
    let h = NGramCounts::new(hypothesis, order);
    let s = NGramCounts::new(source, order);
    let r = NGramCounts::new(reference, order);
    let total = h.total();
    if total == 0 {
        return (0.0, 0.0);
    }
    let mut matched = 0usize;
    let mut penalty = 0usize;
    for (gram, &hc) in &h.counts {
        let with_ref = hc.min(r.get(gram));
        let with_src = hc.min(s.get(gram));
        matched += with_ref;
        penalty += with_src.saturating_sub(with_ref);
    }
    let t = total as f64;
    (
        (matched as f64 - penalty as f64).max(0.0) / t,
        matched as f64 / t,
    )
}

fn single_reference(source: &Sentence, hypothesis: &Sentence, reference: &Sentence, max_order: usize) -> f64 {
    let orders = max_order.min(hypothesis.len());
    if orders == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=orders {
        let (p, _) = modified_precision(source, hypothesis, reference, n);
        if p == 0.0 {
            return 0.0;
        }
        log_sum += libm::log(p);
    }
    let ratio = reference.len() as f64 / hypothesis.len() as f64;
    let bp = libm::exp(1.0 - ratio).min(1.0);
    bp * libm::exp(log_sum / orders as f64)
}

/// Mean GLEU of `hypothesis` over `references`. An empty hypothesis scores 0.
pub fn gleu_sentence(
    source: &Sentence,
    hypothesis: &Sentence,
    references: &[Sentence],
    max_order: usize,
) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::Empty("GLEU needs at least one reference"));
    }
    let sum: f64 = references
        .iter()
        .map(|r| single_reference(source, hypothesis, r, max_order))
        .sum();
    Ok(sum / references.len() as f64)
}

/// Mean sentence GLEU over a corpus.
pub fn gleu_corpus(units: &[SentenceUnit], hypotheses: &[Sentence], max_order: usize) -> Result<f64> {
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
    let mut sum = 0.0;
    for (unit, hyp) in units.iter().zip(hypotheses) {
        sum += gleu_sentence(unit.source(), hyp, unit.references(), max_order)?;
    }
    Ok(sum / units.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::{Annotation, Edit};
    use alloc::vec;

    fn s(text: &str) -> Sentence {
        Sentence::from_text(text)
    }

    #[test]
    fn perfect_match_scores_one() {
        let r = s("the cat sat on the mat");
        assert_eq!(gleu_sentence(&s("a cat sat on a mat"), &r, core::slice::from_ref(&r), 4).unwrap(), 1.0);
    }

    #[test]
    fn unchanged_disjoint_source_scores_zero() {
        let src = s("p q r");
        assert_eq!(gleu_sentence(&src, &src, &[s("x y z")], 4).unwrap(), 0.0);
    }

    #[test]
    fn short_hand_counted_case() {
        assert_eq!(gleu_sentence(&s("a b"), &s("a c"), &[s("a c")], 4).unwrap(), 1.0);
    }

    #[test]
    fn source_copy_is_penalized() {
        // Kept "b" matches the source but not the reference.
        let (p, unpenalized) = modified_precision(&s("a b"), &s("a b"), &s("a c"), 1);
        assert_eq!(unpenalized, 0.5);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn empty_hypothesis_and_references() {
        assert_eq!(gleu_sentence(&s("a"), &s(""), &[s("a")], 4).unwrap(), 0.0);
        assert!(gleu_sentence(&s("a"), &s("a"), &[], 4).is_err());
    }

    #[test]
    fn corpus_mean() {
        let unit =
            SentenceUnit::new(s("a b"), vec![Annotation::new(0, vec![Edit::new(1, 2, ["c"])])]).unwrap();
        let units = vec![unit.clone(), unit];
        let hyps = vec![s("a c"), s("x y")];
        assert_eq!(gleu_corpus(&units, &hyps, 4).unwrap(), 0.5);
        assert_eq!(gleu_corpus(&units[..1], &hyps[..1], 4).unwrap(), 1.0);
        assert!(gleu_corpus(&[], &[], 4).is_err());
        assert!(gleu_corpus(&units, &hyps[..1], 4).is_err());
    }
}
