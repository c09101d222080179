//! Character n-gram F-score (chrF).
//!
//! Character n-grams of orders `1..=max_order` are taken over the
//! space-joined token string, whitespace included. Precision and recall are
//! averaged over the orders for which both strings have n-grams, then
//! combined with recall weight `beta`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub const DEFAULT_ORDER: usize = 6;
pub const DEFAULT_BETA: f64 = 2.0;

fn ngram_counts(chars: &[char], n: usize) -> BTreeMap<&[char], u32> {
    let mut counts = BTreeMap::new();
    if chars.len() >= n {
        for gram in chars.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// chrF of `hypothesis` against `reference`, in `[0, 1]`.
pub fn chrf(hypothesis: &str, reference: &str, max_order: usize, beta: f64) -> f64 {
    let hyp: Vec<char> = hypothesis.chars().collect();
    let refr: Vec<char> = reference.chars().collect();

    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut orders = 0u32;
    for n in 1..=max_order {
        let h = ngram_counts(&hyp, n);
        let r = ngram_counts(&refr, n);
        let h_total: u32 = h.values().sum();
        let r_total: u32 = r.values().sum();
        if h_total == 0 || r_total == 0 {
            continue;
        }
        let matched: u32 = h
            .iter()
            .filter_map(|(g, &c)| r.get(g).map(|&rc| c.min(rc)))
            .sum();
        precision += f64::from(matched) / f64::from(h_total);
        recall += f64::from(matched) / f64::from(r_total);
        orders += 1;
    }
    if orders == 0 {
        return if hyp == refr { 1.0 } else { 0.0 };
    }
    precision /= f64::from(orders);
    recall /= f64::from(orders);
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}
