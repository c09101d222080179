//! Human ranking files.
//!
//! ```text
//! #mode=rank
//! AMU	1
//! CAMB	2
//! ```
//!
//! With `#mode=score` the second column is a score (higher is better).
#![allow(clippy::tabs_in_doc_comments)]

use std::path::Path;

use ptm2_core::HumanRanking;

use crate::corpus::read_text;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingMode {
    Rank,
    Score,
}

pub fn parse_ranking(text: &str, name: &str, origin: &str) -> Result<HumanRanking> {
    let err = |line: usize, message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let mode = match lines.next().map(|(_, l)| l.trim()) {
        Some("#mode=rank") => RankingMode::Rank,
        Some("#mode=score") => RankingMode::Score,
        other => {
            return Err(err(
                1,
                format!("expected `#mode=rank` or `#mode=score`, found `{}`", other.unwrap_or("")),
            ))
        }
    };
    let mut ranks = Vec::new();
    let mut scores = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let Some((system, value)) = line.split_once('\t') else {
            return Err(err(i + 1, "expected `system<TAB>value`".into()));
        };
        let (system, value) = (system.trim().to_string(), value.trim());
        match mode {
            RankingMode::Rank => {
                let rank: u32 = value.parse().map_err(|_| err(i + 1, format!("bad rank `{value}`")))?;
                ranks.push((system, rank));
            }
            RankingMode::Score => {
                let score: f64 = value.parse().map_err(|_| err(i + 1, format!("bad score `{value}`")))?;
                scores.push((system, score));
            }
        }
    }
    let ranking = match mode {
        RankingMode::Rank => HumanRanking::from_ranks(name, ranks),
        RankingMode::Score => HumanRanking::from_scores(name, scores),
    };
    let ranking = ranking.map_err(|e| err(1, e.to_string()))?;
    if ranking.is_empty() {
        return Err(err(1, "ranking lists no systems".into()));
    }
    Ok(ranking)
}

pub fn load_ranking(path: &Path, name: &str) -> Result<HumanRanking> {
    parse_ranking(&read_text(path)?, name, &path.display().to_string())
}
