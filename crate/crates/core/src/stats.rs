//! System-level meta-evaluation: correlation with human rankings, rank
//! difference and top-K curves.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ranking::{HumanRanking, SystemScores};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "correlation vector length",
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::UndefinedCorrelation("non-finite value"));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mean_x, b - mean_y);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant vector"));
    }
    let denom = if sxx == syy { sxx } else { libm::sqrt(sxx * syy) };
    Ok((sxy / denom).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties sharing the mean of their positions.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share rank mean((i+1)..=(j+1)).
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman correlation: Pearson over fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "correlation vector length",
            expected: x.len(),
            found: y.len(),
        });
    }
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

fn check_systems(scores: &SystemScores, human: &HumanRanking) -> Result<()> {
    let missing: Vec<String> = human
        .ranks()
        .keys()
        .filter(|k| !scores.scores().contains_key(*k))
        .cloned()
        .collect();
    let extra: Vec<String> = scores
        .scores()
        .keys()
        .filter(|k| !human.ranks().contains_key(*k))
        .cloned()
        .collect();
    if missing.is_empty() && extra.is_empty() {
        Ok(())
    } else {
        Err(Error::SystemMismatch { missing, extra })
    }
}

/// Paired (metric, human) values in system-name order, restricted to
/// systems the human ranks within `top`.
fn paired(scores: &SystemScores, human: &HumanRanking, top: usize) -> (Vec<f64>, Vec<f64>) {
    scores
        .scores()
        .iter()
        .filter(|(name, _)| human.ranks()[name.as_str()] as usize <= top)
        .map(|(name, &s)| (s, human.value(name).unwrap_or(f64::NAN)))
        .unzip()
}

/// Sum over systems of |metric rank - human rank|, with metric ranks by
/// descending score and ties broken by name.
pub fn rank_delta(scores: &SystemScores, human: &HumanRanking) -> Result<u64> {
    check_systems(scores, human)?;
    let metric = scores.ranks();
    Ok(metric
        .iter()
        .map(|(name, &r)| u64::from(r.abs_diff(human.ranks()[name])))
        .sum())
}

/// Pearson over the `K` best systems by human rank, for `K = N` down to
/// `k_min`. Undefined correlations are `None`.
pub fn topk_curve(scores: &SystemScores, human: &HumanRanking, k_min: usize) -> Result<Vec<(usize, Option<f64>)>> {
    check_systems(scores, human)?;
    if k_min < 2 {
        return Err(Error::InvalidConfig(alloc::format!("top-K needs K >= 2, got {k_min}")));
    }
    let n = human.len();
    if n < k_min {
        return Err(Error::InvalidConfig(alloc::format!(
            "top-K needs at least {k_min} systems, got {n}"
        )));
    }
    Ok((k_min..=n)
        .rev()
        .map(|k| {
            let (x, y) = paired(scores, human, k);
            (k, pearson(&x, &y).ok())
        })
        .collect())
}

/// Agreement of one metric with one human ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub metric: String,
    pub ranking: String,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub delta: u64,
    pub topk: Vec<(usize, Option<f64>)>,
    pub metric_ranks: BTreeMap<String, u32>,
}

/// Pearson, Spearman, rank difference and (when there are at least `k_min`
/// systems) the top-K curve.
pub fn correlate(scores: &SystemScores, human: &HumanRanking, k_min: usize) -> Result<CorrelationReport> {
    check_systems(scores, human)?;
    let (x, y) = paired(scores, human, usize::MAX);
    let topk = if human.len() >= k_min.max(2) {
        topk_curve(scores, human, k_min.max(2))?
    } else {
        Vec::new()
    };
    Ok(CorrelationReport {
        metric: scores.metric.clone(),
        ranking: human.name.clone(),
        pearson: pearson(&x, &y).ok(),
        spearman: spearman(&x, &y).ok(),
        delta: rank_delta(scores, human)?,
        topk,
        metric_ranks: scores.ranks(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn scores(entries: &[(&str, f64)]) -> SystemScores {
        SystemScores::new("m", entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()).unwrap()
    }

    fn ranking(entries: &[(&str, u32)]) -> HumanRanking {
        HumanRanking::from_ranks("h", entries.iter().map(|(k, v)| (k.to_string(), *v))).unwrap()
    }

    #[test]
    fn pearson_basic_cases() {
        let x = [1.0, 2.0, 3.0, 4.5];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.981981).abs() < 1e-6);
    }

    #[test]
    fn pearson_rejects_constant() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 300.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(fractional_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn delta_cases() {
        let h = ranking(&[("a", 1), ("b", 2), ("c", 3)]);
        assert_eq!(rank_delta(&scores(&[("a", 0.9), ("b", 0.5), ("c", 0.1)]), &h).unwrap(), 0);
        assert_eq!(rank_delta(&scores(&[("a", 0.5), ("b", 0.9), ("c", 0.1)]), &h).unwrap(), 2);
        let err = rank_delta(&scores(&[("a", 0.5), ("b", 0.9), ("d", 0.1)]), &h).unwrap_err();
        assert!(matches!(err, Error::SystemMismatch { ref missing, ref extra } if missing == &["c"] && extra == &["d"]));
    }

    #[test]
    fn topk_full_equals_pearson_and_rejects_small_k() {
        let h = ranking(&[("a", 1), ("b", 2), ("c", 3), ("d", 4)]);
        let m = scores(&[("a", 0.9), ("b", 0.7), ("c", 0.8), ("d", 0.1)]);
        let curve = topk_curve(&m, &h, 2).unwrap();
        let report = correlate(&m, &h, 2).unwrap();
        assert_eq!(curve[0].0, 4);
        assert_eq!(curve[0].1.unwrap().to_bits(), report.pearson.unwrap().to_bits());
        assert_eq!(curve.len(), 3);
        assert!(topk_curve(&m, &h, 1).is_err());
        assert!(topk_curve(&m, &h, 5).is_err());
    }

    #[test]
    fn constant_restriction_is_undefined() {
        let h = ranking(&[("a", 1), ("b", 2), ("c", 3)]);
        let m = scores(&[("a", 0.5), ("b", 0.5), ("c", 0.1)]);
        let curve = topk_curve(&m, &h, 2).unwrap();
        assert!(curve[0].1.is_some());
        assert_eq!(curve[1], (2, None));
    }
}
