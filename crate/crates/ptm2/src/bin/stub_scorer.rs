//! A stand-in scoring service speaking the external scorer protocol.
//!
//! Scores are character n-gram F-scores, so results are deterministic and
//! need no model. The `bertscore` profile returns the chrF value in [0, 1]
//! and `bartscore` returns its logarithm, which is never positive.
//!
//! Options: `--fingerprint NAME` sets the reported model fingerprint and
//! `--exit-after N` makes the process exit after answering N requests.

use std::io::{BufRead, Write};

use ptm2::external::protocol::{Request, Response};
use ptm2_core::chrf::{chrf, DEFAULT_BETA, DEFAULT_ORDER};

const LOG_FLOOR: f64 = 1e-9;

fn answer(request: &Request, fingerprint: &str) -> Response {
    let base = chrf(&request.candidate, &request.reference, DEFAULT_ORDER, DEFAULT_BETA);
    let score = match request.profile.as_str() {
        "bertscore" => base,
        "bartscore" => base.max(LOG_FLOOR).ln(),
        other => {
            return Response {
                id: Some(request.id),
                error: Some(format!("unknown profile `{other}`")),
                ..Response::default()
            }
        }
    };
    Response {
        id: Some(request.id),
        score: Some(score),
        model_fingerprint: Some(fingerprint.to_string()),
        error: None,
    }
}

fn main() {
    let mut fingerprint = String::from("stub-chrf-v1");
    let mut exit_after: Option<usize> = None;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--fingerprint" => fingerprint = args.next().expect("--fingerprint needs a value"),
            "--exit-after" => {
                exit_after = Some(
                    args.next()
                        .and_then(|v| v.parse().ok())
                        .expect("--exit-after needs a number"),
                )
            }
            other => {
                eprintln!("stub scorer: unknown argument `{other}`");
                std::process::exit(2);
            }
        }
    }
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut answered = 0usize;
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        if exit_after.is_some_and(|n| answered >= n) {
            break;
        }
        let response = match serde_json::from_str::<Request>(&line) {
            Ok(request) => answer(&request, &fingerprint),
            Err(e) => Response {
                id: None,
                error: Some(format!("malformed request: {e}")),
                ..Response::default()
            },
        };
        let text = serde_json::to_string(&response).expect("response serialization");
        if writeln!(out, "{text}").and_then(|_| out.flush()).is_err() {
            break;
        }
        answered += 1;
    }
}
