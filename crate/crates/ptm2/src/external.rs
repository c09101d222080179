//! Client for an external sentence-pair scoring service.
//!
//! The service is a subprocess speaking JSON lines on stdin/stdout. Each
//! request carries a numeric `id`; responses may arrive in any order and are
//! matched by id.
//!
//! ```text
//! > {"candidate":"a b","id":1,"model":null,"profile":"bertscore","reference":"a c"}
//! < {"id":1,"model_fingerprint":"roberta-large-l17","score":0.91}
//! < {"id":2,"error":"unknown profile"}
//! ```
//!
//! On start-up the client sends one probe request to learn the model
//! fingerprint, which becomes part of the scorer id and therefore of every
//! cache key.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use ptm2_core::{PairScorer, ScoreError, ScorerId, Sentence};

use crate::error::{Error, Result};

pub mod protocol {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct Request {
        pub candidate: String,
        pub id: u64,
        pub model: Option<String>,
        pub profile: String,
        pub reference: String,
    }

    #[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
    pub struct Response {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub error: Option<String>,
        pub id: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub model_fingerprint: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub score: Option<f64>,
    }
}

use protocol::{Request, Response};

struct Connection {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
    dead: Option<String>,
}

pub struct ExternalScorer {
    command: String,
    profile: String,
    model: Option<String>,
    fingerprint: String,
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for ExternalScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalScorer")
            .field("command", &self.command)
            .field("profile", &self.profile)
            .field("fingerprint", &self.fingerprint)
            .finish()
    }
}

impl ExternalScorer {
    /// Starts the service given as a whitespace-separated command line and
    /// performs the fingerprint handshake.
    pub fn spawn(command: &str, profile: &str, model: Option<&str>) -> Result<Self> {
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::Usage("empty scorer endpoint command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::ScorerUnavailable(format!("cannot start `{command}`: {e}")))?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut conn = Connection {
            child,
            stdin,
            stdout,
            next_id: 1,
            dead: None,
        };
        let probe = Request {
            candidate: "probe".into(),
            id: 0,
            model: model.map(String::from),
            profile: profile.to_string(),
            reference: "probe".into(),
        };
        let handshake = (|| {
            let line = serde_json::to_string(&probe).expect("request serialization");
            writeln!(conn.stdin, "{line}")
                .and_then(|_| conn.stdin.flush())
                .map_err(|e| format!("writing to scorer: {e}"))?;
            let response = read_response(&mut conn.stdout)?.ok_or("scorer exited during handshake")?;
            if let Some(err) = response.error {
                return Err(format!("handshake rejected: {err}"));
            }
            if response.id != Some(0) {
                return Err("handshake response has the wrong id".into());
            }
            response
                .model_fingerprint
                .filter(|f| !f.is_empty())
                .ok_or_else(|| "handshake response lacks a model fingerprint".to_string())
        })();
        let fingerprint = match handshake {
            Ok(f) => f,
            Err(reason) => {
                let _ = conn.child.kill();
                let _ = conn.child.wait();
                return Err(Error::ScorerUnavailable(format!("`{command}`: {reason}")));
            }
        };
        Ok(Self {
            command: command.to_string(),
            profile: profile.to_string(),
            model: model.map(String::from),
            fingerprint,
            conn: Mutex::new(conn),
        })
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

impl PairScorer for ExternalScorer {
    fn id(&self) -> ScorerId {
        let id = ScorerId::new(&self.profile).with_param("fingerprint", &self.fingerprint);
        match &self.model {
            Some(m) => id.with_param("model", m),
            None => id,
        }
    }

    fn score(&self, candidate: &Sentence, reference: &Sentence) -> std::result::Result<f64, ScoreError> {
        self.score_batch(&[(candidate, reference)]).map(|v| v[0])
    }

    /// Writes all requests from a helper thread while reading responses, so
    /// neither pipe can fill up and stall the service.
    fn score_batch(&self, pairs: &[(&Sentence, &Sentence)]) -> std::result::Result<Vec<f64>, ScoreError> {
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let texts: Vec<(String, String)> = pairs.iter().map(|(c, r)| (c.text(), r.text())).collect();
        let unavailable = |i: usize, reason: String| ScoreError::Unavailable {
            candidate: texts[i].0.clone(),
            reference: texts[i].1.clone(),
            reason,
        };
        let mut guard = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        let conn = &mut *guard;
        if let Some(reason) = &conn.dead {
            return Err(unavailable(0, reason.clone()));
        }
        let base = conn.next_id;
        conn.next_id += pairs.len() as u64;

        let Connection {
            child, stdin, stdout, dead, ..
        } = conn;
        let mut scores: Vec<Option<f64>> = vec![None; pairs.len()];
        let mut failure: Option<ScoreError> = None;
        let mut lost: Option<String> = None;
        let model = self.model.as_deref();
        let profile = self.profile.as_str();
        let written = std::thread::scope(|scope| {
            let writer = scope.spawn(|| -> std::io::Result<()> {
                for (i, (candidate, reference)) in texts.iter().enumerate() {
                    let request = Request {
                        candidate: candidate.clone(),
                        id: base + i as u64,
                        model: model.map(String::from),
                        profile: profile.to_string(),
                        reference: reference.clone(),
                    };
                    serde_json::to_writer(&mut *stdin, &request)?;
                    stdin.write_all(b"\n")?;
                }
                stdin.flush()
            });
            let mut remaining = pairs.len();
            while remaining > 0 {
                let response = match read_response(stdout) {
                    Ok(Some(r)) => r,
                    Ok(None) => {
                        lost = Some("scorer process exited".into());
                        break;
                    }
                    Err(e) => {
                        lost = Some(e);
                        break;
                    }
                };
                let slot = response
                    .id
                    .and_then(|id| id.checked_sub(base))
                    .map(|i| i as usize)
                    .filter(|&i| i < pairs.len() && scores[i].is_none());
                let Some(i) = slot else {
                    lost = Some(format!("unexpected response id {:?}", response.id));
                    break;
                };
                remaining -= 1;
                let outcome = match (response.error, response.score) {
                    (Some(err), _) => Err(ScoreError::Failed(format!(
                        "scorer rejected candidate `{}`: {err}",
                        texts[i].0
                    ))),
                    (None, Some(score)) if score.is_finite() => match response.model_fingerprint {
                        Some(fp) if fp != self.fingerprint => Err(ScoreError::Failed(format!(
                            "model fingerprint changed from `{}` to `{fp}`",
                            self.fingerprint
                        ))),
                        _ => Ok(score),
                    },
                    (None, _) => Err(ScoreError::Failed(format!(
                        "scorer returned no finite score for candidate `{}`",
                        texts[i].0
                    ))),
                };
                match outcome {
                    Ok(score) => scores[i] = Some(score),
                    Err(e) => {
                        // Keep draining so the stream stays in sync.
                        scores[i] = Some(f64::NAN);
                        failure.get_or_insert(e);
                    }
                }
            }
            if lost.is_some() {
                // Unblocks a writer stuck on a full pipe.
                let _ = child.kill();
            }
            writer.join().expect("scorer writer thread")
        });
        if lost.is_none() {
            if let Err(e) = written {
                lost = Some(format!("writing to scorer: {e}"));
            }
        }
        if let Some(reason) = lost {
            *dead = Some(reason.clone());
            let first = scores.iter().position(Option::is_none).unwrap_or(0);
            return Err(unavailable(first, reason));
        }
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(scores.into_iter().map(|s| s.expect("all responses received")).collect())
    }
}

fn read_response(stdout: &mut BufReader<ChildStdout>) -> std::result::Result<Option<Response>, String> {
    let mut line = String::new();
    match stdout.read_line(&mut line) {
        Ok(0) => Ok(None),
        Ok(_) => serde_json::from_str(line.trim_end())
            .map(Some)
            .map_err(|e| format!("malformed response `{}`: {e}", line.trim_end())),
        Err(e) => Err(format!("reading from scorer: {e}")),
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        let conn = self.conn.get_mut().unwrap_or_else(|p| p.into_inner());
        let _ = conn.child.kill();
        let _ = conn.child.wait();
    }
}
