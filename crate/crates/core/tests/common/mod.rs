#![allow(dead_code)]

use proptest::prelude::*;
use ptm2_core::{validate_edits, Edit, Sentence};

pub fn sentence(ids: &[u8]) -> Sentence {
    Sentence::from_tokens(ids.iter().map(|i| format!("t{i}"))).unwrap()
}

pub fn tokens(alphabet: u8, max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..alphabet, 0..=max_len)
}

/// Raw edit candidates; `valid_gold` filters them down to a valid set.
pub fn edit_candidates(alphabet: u8) -> impl Strategy<Value = Vec<(usize, usize, Vec<u8>)>> {
    prop::collection::vec((0usize..10, 0usize..3, prop::collection::vec(0..alphabet, 0..3)), 0..5)
}

/// Keeps the candidates that fit `len` and stay compatible with the ones
/// kept before them.
pub fn valid_gold(len: usize, candidates: &[(usize, usize, Vec<u8>)]) -> Vec<Edit> {
    let mut raw: Vec<Edit> = candidates
        .iter()
        .filter_map(|(start, width, corr)| {
            let start = *start % (len + 1);
            let end = (start + width).min(len);
            let corr: Vec<String> = corr.iter().map(|i| format!("t{i}")).collect();
            (start != end || !corr.is_empty()).then_some(Edit { start, end, correction: corr })
        })
        .collect();
    raw.sort();
    let mut kept: Vec<Edit> = Vec::new();
    for e in raw {
        kept.push(e);
        if validate_edits(len, &kept).is_err() {
            kept.pop();
        }
    }
    kept
}

use ptm2_core::{apply_edits, Annotation, SentenceUnit};

/// A sentence unit with one to three annotators and a hypothesis that mixes
/// gold edits with random ones.
pub fn unit_and_hypothesis(alphabet: u8, max_len: usize) -> impl Strategy<Value = (SentenceUnit, Sentence)> {
    (
        tokens(alphabet, max_len),
        prop::collection::vec(edit_candidates(alphabet), 1..=3),
        edit_candidates(alphabet),
        0u8..3,
    )
        .prop_map(|(src, annotators, noise, mode)| {
            let source = sentence(&src);
            let gold: Vec<Annotation> = annotators
                .iter()
                .enumerate()
                .map(|(i, c)| Annotation::new(i as u32, valid_gold(src.len(), c)))
                .collect();
            let hyp = match mode {
                0 => apply_edits(&source, &gold[0].edits).unwrap(),
                1 => apply_edits(&source, &valid_gold(src.len(), &noise)).unwrap(),
                _ => {
                    // Half of annotator 0's edits plus whatever noise fits.
                    let mut mixed: Vec<Edit> = gold[0].edits.iter().step_by(2).cloned().collect();
                    for e in valid_gold(src.len(), &noise) {
                        let mut trial = mixed.clone();
                        trial.push(e);
                        trial.sort();
                        if validate_edits(src.len(), &trial).is_ok() {
                            mixed = trial;
                        }
                    }
                    apply_edits(&source, &mixed).unwrap()
                }
            };
            (SentenceUnit::new(source, gold).unwrap(), hyp)
        })
}
