//! JSON and TSV reports. Output is deterministic: object keys are sorted,
//! floats carry six decimals and systems are listed by descending score,
//! then name.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use ptm2_core::{CorrelationReport, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Tsv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "tsv" => Ok(Format::Tsv),
            _ => Err(format!("unknown format `{s}` (expected json or tsv)")),
        }
    }
}

/// Minimal JSON tree with the output conventions above.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(BTreeMap<String, Json>),
}

impl Json {
    pub fn object<const N: usize>(entries: [(&str, Json); N]) -> Json {
        Json::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn opt(v: Option<f64>) -> Json {
        v.map_or(Json::Null, Json::Float)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Float(f) => out.push_str(&fixed(*f).unwrap_or_else(|| "null".into())),
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string serialization")),
            Json::Array(items) if items.is_empty() => out.push_str("[]"),
            Json::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline(out, indent + 1);
                    item.write(out, indent + 1);
                }
                newline(out, indent);
                out.push(']');
            }
            Json::Object(map) if map.is_empty() => out.push_str("{}"),
            Json::Object(map) => {
                out.push('{');
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline(out, indent + 1);
                    out.push_str(&serde_json::to_string(k).expect("string serialization"));
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                newline(out, indent);
                out.push('}');
            }
        }
    }
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Six-decimal rendering; `None` for non-finite values.
pub fn fixed(v: f64) -> Option<String> {
    if !v.is_finite() {
        return None;
    }
    let s = format!("{v:.6}");
    Some(if s == "-0.000000" { "0.000000".into() } else { s })
}

fn tsv_opt(v: Option<f64>) -> String {
    v.and_then(fixed).unwrap_or_default()
}

/// One system scored by one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRow {
    pub system: String,
    /// Metric label, e.g. `sentm2+chrf`.
    pub metric: String,
    /// Full scorer id, including settings such as a model fingerprint.
    pub scorer: String,
    pub level: Option<Level>,
    pub beta: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_score: Option<f64>,
    /// Value used for ranking: F for the M² family, GLEU for GLEU.
    pub score: f64,
    pub n_sentences: usize,
}

impl SystemRow {
    fn to_json(&self) -> Json {
        Json::object([
            ("system", Json::Str(self.system.clone())),
            ("metric", Json::Str(self.metric.clone())),
            ("scorer", Json::Str(self.scorer.clone())),
            ("level", self.level.map_or(Json::Null, |l| Json::Str(l.as_str().into()))),
            ("beta", Json::opt(self.beta)),
            ("precision", Json::opt(self.precision)),
            ("recall", Json::opt(self.recall)),
            ("f_score", Json::opt(self.f_score)),
            ("score", Json::Float(self.score)),
            ("n_sentences", Json::Int(self.n_sentences as i64)),
        ])
    }
}

fn sorted_rows(rows: &[SystemRow]) -> Vec<&SystemRow> {
    let mut sorted: Vec<&SystemRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.metric
            .cmp(&b.metric)
            .then(b.score.total_cmp(&a.score))
            .then_with(|| a.system.cmp(&b.system))
    });
    sorted
}

pub fn render_systems(rows: &[SystemRow], format: Format) -> String {
    let rows = sorted_rows(rows);
    match format {
        Format::Json => Json::object([("systems", Json::Array(rows.iter().map(|r| r.to_json()).collect()))]).render(),
        Format::Tsv => {
            let mut out = String::from("system\tmetric\tscorer\tlevel\tbeta\tprecision\trecall\tf_score\tscore\tn_sentences\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.system,
                    r.metric,
                    r.scorer,
                    r.level.map_or("", |l| l.as_str()),
                    tsv_opt(r.beta),
                    tsv_opt(r.precision),
                    tsv_opt(r.recall),
                    tsv_opt(r.f_score),
                    tsv_opt(Some(r.score)),
                    r.n_sentences
                );
            }
            out
        }
    }
}

fn correlation_json(c: &CorrelationReport) -> Json {
    Json::object([
        ("metric", Json::Str(c.metric.clone())),
        ("ranking", Json::Str(c.ranking.clone())),
        ("pearson", Json::opt(c.pearson)),
        ("spearman", Json::opt(c.spearman)),
        ("delta", Json::Int(c.delta as i64)),
        (
            "topk",
            Json::Array(
                c.topk
                    .iter()
                    .map(|(k, r)| Json::object([("k", Json::Int(*k as i64)), ("pearson", Json::opt(*r))]))
                    .collect(),
            ),
        ),
        (
            "metric_ranks",
            Json::Object(
                c.metric_ranks
                    .iter()
                    .map(|(k, r)| (k.clone(), Json::Int(i64::from(*r))))
                    .collect(),
            ),
        ),
    ])
}

/// Correlation reports together with the system scores they were computed
/// from.
pub fn render_correlations(reports: &[CorrelationReport], rows: &[SystemRow], format: Format) -> String {
    match format {
        Format::Json => Json::object([
            ("correlations", Json::Array(reports.iter().map(correlation_json).collect())),
            ("systems", Json::Array(sorted_rows(rows).iter().map(|r| r.to_json()).collect())),
        ])
        .render(),
        Format::Tsv => {
            let mut out = String::from("metric\tranking\tpearson\tspearman\tdelta\ttopk\n");
            for c in reports {
                let topk: Vec<String> = c
                    .topk
                    .iter()
                    .map(|(k, r)| format!("{k}:{}", r.and_then(fixed).unwrap_or_else(|| "NA".into())))
                    .collect();
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    c.metric,
                    c.ranking,
                    tsv_opt(c.pearson),
                    tsv_opt(c.spearman),
                    c.delta,
                    topk.join(",")
                );
            }
            out
        }
    }
}
