//! Turning a `--scorer` choice into a [`PairScorer`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use ptm2_core::{ChrfScorer, PairScorer, UniformScorer};

use crate::cache::{CachedScorer, ScoreCache};
use crate::error::{Error, Result};
use crate::external::ExternalScorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScorerChoice {
    /// Unit weights; the weighted metric reduces to plain M².
    Uniform,
    Chrf,
    Bertscore,
    Bartscore,
    /// Replay whatever single scorer the cache holds.
    Cached,
}

impl ScorerChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            ScorerChoice::Uniform => "self",
            ScorerChoice::Chrf => "chrf",
            ScorerChoice::Bertscore => "bertscore",
            ScorerChoice::Bartscore => "bartscore",
            ScorerChoice::Cached => "cached",
        }
    }
}

impl fmt::Display for ScorerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScorerChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "self" => ScorerChoice::Uniform,
            "chrf" => ScorerChoice::Chrf,
            "bertscore" => ScorerChoice::Bertscore,
            "bartscore" => ScorerChoice::Bartscore,
            "cached" => ScorerChoice::Cached,
            _ => {
                return Err(format!(
                    "unknown scorer `{s}` (expected self, chrf, bertscore, bartscore or cached)"
                ))
            }
        })
    }
}

impl<'de> serde::Deserialize<'de> for ScorerChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Builds scorers that share one score cache.
pub struct ScorerFactory {
    endpoint: Option<String>,
    model: Option<String>,
    cache: Option<Arc<ScoreCache>>,
    warnings: Mutex<Vec<String>>,
}

impl ScorerFactory {
    pub fn new(endpoint: Option<String>, cache: Option<PathBuf>, model: Option<String>) -> Result<Self> {
        let cache = cache.map(|p| ScoreCache::open(&p)).transpose()?.map(Arc::new);
        Ok(Self {
            endpoint: endpoint.filter(|e| !e.trim().is_empty()),
            model,
            cache,
            warnings: Mutex::new(Vec::new()),
        })
    }

    pub fn cache(&self) -> Option<&Arc<ScoreCache>> {
        self.cache.as_ref()
    }

    /// Warnings collected while building scorers, drained on each call.
    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().expect("warnings lock"))
    }

    fn warn(&self, message: String) {
        self.warnings.lock().expect("warnings lock").push(message);
    }

    fn cached(&self, inner: Box<dyn PairScorer + Send>) -> Box<dyn PairScorer + Send> {
        match &self.cache {
            Some(cache) => Box::new(CachedScorer::new(cache.clone(), inner)),
            None => inner,
        }
    }

    pub fn build(&self, choice: ScorerChoice) -> Result<Box<dyn PairScorer + Send>> {
        match choice {
            ScorerChoice::Uniform => Ok(Box::new(UniformScorer)),
            ScorerChoice::Chrf => Ok(self.cached(Box::new(ChrfScorer::default()))),
            ScorerChoice::Cached => {
                let cache = self
                    .cache
                    .as_ref()
                    .ok_or_else(|| Error::Usage("--scorer cached requires --cache".into()))?;
                let id = cache.resolve(|_| true)?;
                Ok(Box::new(CachedScorer::replay(cache.clone(), id)))
            }
            ScorerChoice::Bertscore | ScorerChoice::Bartscore => {
                let profile = choice.as_str();
                let replay = || -> Result<Box<dyn PairScorer + Send>> {
                    let cache = self.cache.as_ref().ok_or_else(|| {
                        Error::ScorerUnavailable(format!("no scorer endpoint and no score cache for `{profile}`"))
                    })?;
                    let id = cache.resolve(|id| {
                        id.name == profile && self.model.as_ref().is_none_or(|m| id.params.get("model") == Some(m))
                    })?;
                    Ok(Box::new(CachedScorer::replay(cache.clone(), id)))
                };
                let Some(endpoint) = &self.endpoint else {
                    return replay();
                };
                match ExternalScorer::spawn(endpoint, profile, self.model.as_deref()) {
                    Ok(scorer) => Ok(self.cached(Box::new(scorer))),
                    Err(Error::ScorerUnavailable(reason)) if self.cache.is_some() => {
                        let scorer = replay().map_err(|_| Error::ScorerUnavailable(reason.clone()))?;
                        self.warn(format!("{reason}; replaying cached scores only"));
                        Ok(scorer)
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }
}
