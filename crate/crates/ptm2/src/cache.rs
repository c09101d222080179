//! Persistent sentence-pair score cache.
//!
//! One JSON record per line:
//!
//! ```text
//! {"cand_sha256":"…","cand_text":"…","ref_sha256":"…","ref_text":"…","score":0.5,"scorer":"bertscore[fingerprint=…]"}
//! ```
//!
//! Records are keyed by scorer id and the SHA-256 of both texts. A key may
//! repeat only with scores that agree to 1e-9.

use std::collections::{BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use ptm2_core::{PairScorer, ScoreError, ScorerId, Sentence};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const AGREEMENT: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct Record {
    cand_sha256: String,
    cand_text: String,
    ref_sha256: String,
    ref_text: String,
    score: f64,
    scorer: String,
}

type Key = (String, String, String);

#[derive(Debug, Clone, Copy)]
struct Entry {
    score: f64,
    line: usize,
}

struct Appender {
    file: File,
    next_line: usize,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn key(scorer: &str, candidate: &str, reference: &str) -> Key {
    (scorer.to_string(), sha256_hex(candidate), sha256_hex(reference))
}

fn key_label(k: &Key) -> String {
    format!("{}|{}|{}", k.0, k.1, k.2)
}

/// Score cache, optionally backed by a JSONL file that new scores are
/// appended to.
pub struct ScoreCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<Key, Entry>>,
    appender: Mutex<Option<Appender>>,
}

impl std::fmt::Debug for ScoreCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScoreCache")
            .field("path", &self.path)
            .field("len", &self.len())
            .finish()
    }
}

impl ScoreCache {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            entries: RwLock::new(HashMap::new()),
            appender: Mutex::new(None),
        }
    }

    /// Loads `path` if it exists and opens it for appending.
    pub fn open(path: &Path) -> Result<Self> {
        let origin = path.display().to_string();
        let mut entries: HashMap<Key, Entry> = HashMap::new();
        let mut lines = 0;
        let mut needs_newline = false;
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            needs_newline = !text.is_empty() && !text.ends_with('\n');
            for (i, line) in text.lines().enumerate() {
                lines = i + 1;
                if line.trim().is_empty() {
                    continue;
                }
                let record: Record = serde_json::from_str(line).map_err(|e| Error::Parse {
                    origin: origin.clone(),
                    line: i + 1,
                    message: format!("bad cache record: {e}"),
                })?;
                if !record.score.is_finite() {
                    return Err(Error::Parse {
                        origin: origin.clone(),
                        line: i + 1,
                        message: "non-finite score".into(),
                    });
                }
                let k = (record.scorer, record.cand_sha256, record.ref_sha256);
                let entry = Entry {
                    score: record.score,
                    line: i + 1,
                };
                match entries.get(&k) {
                    Some(prev) if (prev.score - entry.score).abs() > AGREEMENT => {
                        return Err(Error::CacheConflict {
                            key: key_label(&k),
                            first: prev.line,
                            second: entry.line,
                            a: prev.score,
                            b: entry.score,
                        });
                    }
                    Some(_) => {}
                    None => {
                        entries.insert(k, entry);
                    }
                }
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        if needs_newline {
            file.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            lines += 1;
        }
        Ok(Self {
            path: Some(path.to_path_buf()),
            entries: RwLock::new(entries),
            appender: Mutex::new(Some(Appender {
                file,
                next_line: lines + 1,
            })),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, scorer: &str, candidate: &str, reference: &str) -> Option<f64> {
        self.entries
            .read()
            .expect("cache lock")
            .get(&key(scorer, candidate, reference))
            .map(|e| e.score)
    }

    /// Records a score, appending it to the backing file when the key is new.
    pub fn put(&self, scorer: &str, candidate: &str, reference: &str, score: f64) -> Result<()> {
        let k = key(scorer, candidate, reference);
        let mut appender = self.appender.lock().expect("cache lock");
        let mut entries = self.entries.write().expect("cache lock");
        if let Some(prev) = entries.get(&k) {
            if (prev.score - score).abs() > AGREEMENT {
                return Err(Error::CacheConflict {
                    key: key_label(&k),
                    first: prev.line,
                    second: appender.as_ref().map_or(0, |a| a.next_line),
                    a: prev.score,
                    b: score,
                });
            }
            return Ok(());
        }
        let line = match appender.as_mut() {
            Some(app) => {
                let record = Record {
                    cand_sha256: k.1.clone(),
                    cand_text: candidate.to_string(),
                    ref_sha256: k.2.clone(),
                    ref_text: reference.to_string(),
                    score,
                    scorer: scorer.to_string(),
                };
                let mut line = serde_json::to_string(&record).expect("record serialization");
                line.push('\n');
                let path = self.path.as_deref().unwrap_or(Path::new(""));
                app.file.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
                app.next_line += 1;
                app.next_line - 1
            }
            None => 0,
        };
        entries.insert(k, Entry { score, line });
        Ok(())
    }

    /// Distinct scorer ids present in the cache.
    pub fn scorer_keys(&self) -> BTreeSet<String> {
        self.entries
            .read()
            .expect("cache lock")
            .keys()
            .map(|k| k.0.clone())
            .collect()
    }

    /// The single scorer id accepted by `filter`. Errors when there is none
    /// or more than one.
    pub fn resolve(&self, filter: impl Fn(&ScorerId) -> bool) -> Result<ScorerId> {
        let keys: Vec<ScorerId> = self
            .scorer_keys()
            .iter()
            .filter_map(|k| ScorerId::parse(k))
            .filter(|id| filter(id))
            .collect();
        match keys.as_slice() {
            [id] => Ok(id.clone()),
            [] => Err(Error::ScorerUnavailable("the score cache holds no matching scorer".into())),
            many => Err(Error::Usage(format!(
                "the score cache holds several scorers ({}); pick one explicitly",
                many.iter().map(|k| k.key()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

/// Serves scores from a [`ScoreCache`], delegating misses to `inner` and
/// recording its answers. Without `inner` a miss is an error.
pub struct CachedScorer {
    id: ScorerId,
    key: String,
    cache: Arc<ScoreCache>,
    inner: Option<Box<dyn PairScorer + Send>>,
}

impl CachedScorer {
    pub fn new(cache: Arc<ScoreCache>, inner: Box<dyn PairScorer + Send>) -> Self {
        let id = inner.id();
        Self {
            key: id.key(),
            id,
            cache,
            inner: Some(inner),
        }
    }

    /// Cache-only scorer replaying `id`.
    pub fn replay(cache: Arc<ScoreCache>, id: ScorerId) -> Self {
        Self {
            key: id.key(),
            id,
            cache,
            inner: None,
        }
    }
}

impl PairScorer for CachedScorer {
    fn id(&self) -> ScorerId {
        self.id.clone()
    }

    fn score(&self, candidate: &Sentence, reference: &Sentence) -> Result<f64, ScoreError> {
        self.score_batch(&[(candidate, reference)]).map(|v| v[0])
    }

    fn score_batch(&self, pairs: &[(&Sentence, &Sentence)]) -> Result<Vec<f64>, ScoreError> {
        let texts: Vec<(String, String)> = pairs.iter().map(|(c, r)| (c.text(), r.text())).collect();
        let mut out: Vec<Option<f64>> = texts.iter().map(|(c, r)| self.cache.get(&self.key, c, r)).collect();
        let missing: Vec<usize> = (0..pairs.len()).filter(|&i| out[i].is_none()).collect();
        if missing.is_empty() {
            return Ok(out.into_iter().map(Option::unwrap).collect());
        }
        let Some(inner) = &self.inner else {
            let (c, r) = &texts[missing[0]];
            return Err(ScoreError::CacheMiss {
                key: format!("{} (candidate `{c}`, reference `{r}`)", key_label(&key(&self.key, c, r))),
            });
        };
        let batch: Vec<(&Sentence, &Sentence)> = missing.iter().map(|&i| pairs[i]).collect();
        let scores = inner.score_batch(&batch)?;
        for (&i, score) in missing.iter().zip(scores) {
            let (c, r) = &texts[i];
            self.cache
                .put(&self.key, c, r, score)
                .map_err(|e| ScoreError::Failed(e.to_string()))?;
            out[i] = Some(score);
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }
}
