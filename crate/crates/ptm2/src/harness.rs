//! Scoring many systems under many metrics and correlating the results with
//! human rankings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ptm2_core::metric::{aggregate, score_sentence, SentenceScore, DEFAULT_BETA, DEFAULT_MAX_UNCHANGED, INVERSE_EPSILON};
use ptm2_core::stats::correlate;
use ptm2_core::{gleu, CorrelationReport, HumanRanking, Level, MetricConfig, PairScorer, Sentence, SentenceUnit, SystemScores, Weighting};
use rayon::prelude::*;
use serde::Deserialize;

use crate::corpus;
use crate::error::{Error, Result};
use crate::ranking_file;
use crate::report::SystemRow;
use crate::scorers::{ScorerChoice, ScorerFactory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Base {
    M2,
    SentM2,
    Errant,
    SentErrant,
    Gleu,
}

impl Base {
    pub fn as_str(self) -> &'static str {
        match self {
            Base::M2 => "m2",
            Base::SentM2 => "sentm2",
            Base::Errant => "errant",
            Base::SentErrant => "senterrant",
            Base::Gleu => "gleu",
        }
    }

    pub fn level(self) -> Option<Level> {
        match self {
            Base::M2 | Base::Errant => Some(Level::Corpus),
            Base::SentM2 | Base::SentErrant => Some(Level::Sentence),
            Base::Gleu => None,
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Base {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "m2" => Base::M2,
            "sentm2" => Base::SentM2,
            "errant" => Base::Errant,
            "senterrant" => Base::SentErrant,
            "gleu" => Base::Gleu,
            _ => return Err(format!("unknown base `{s}` (expected m2, sentm2, errant, senterrant or gleu)")),
        })
    }
}

impl<'de> Deserialize<'de> for Base {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn default_scorer() -> ScorerChoice {
    ScorerChoice::Uniform
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub base: Base,
    #[serde(default = "default_scorer")]
    pub scorer: ScorerChoice,
    #[serde(default)]
    pub beta: Option<f64>,
}

impl MetricSpec {
    pub fn new(base: Base, scorer: ScorerChoice) -> Self {
        Self { base, scorer, beta: None }
    }

    /// `gleu`, or `base+scorer` for the M² family.
    pub fn label(&self) -> String {
        metric_label(self.base, self.scorer.as_str())
    }
}

/// Report label of a metric. `scorer` is the scorer id name, so a cache
/// replay is labelled after the scorer that produced the scores.
pub fn metric_label(base: Base, scorer: &str) -> String {
    match base {
        Base::Gleu => "gleu".into(),
        base => format!("{base}+{scorer}"),
    }
}

/// Settings shared by every metric in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub max_unchanged: usize,
    pub case_sensitive: bool,
    pub skip_empty: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            max_unchanged: DEFAULT_MAX_UNCHANGED,
            case_sensitive: true,
            skip_empty: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemOutput {
    pub name: String,
    pub hypotheses: Vec<Sentence>,
}

/// Rows for every system under one metric, plus the inverse-weighted rows
/// when requested.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRun {
    pub spec: MetricSpec,
    pub rows: Vec<SystemRow>,
    pub inverse_rows: Option<Vec<SystemRow>>,
}

fn metric_config(spec: &MetricSpec, level: Level, opts: &EvalOptions) -> MetricConfig {
    MetricConfig {
        beta: spec.beta.unwrap_or(DEFAULT_BETA),
        level,
        max_unchanged: opts.max_unchanged,
        case_sensitive: opts.case_sensitive,
        weighting: Weighting::Absolute,
        skip_empty: opts.skip_empty,
    }
}

/// Scores every system under `spec`, in parallel over systems and
/// sentences. Results do not depend on the thread count.
pub fn evaluate(
    units: &[SentenceUnit],
    systems: &[SystemOutput],
    spec: &MetricSpec,
    opts: &EvalOptions,
    scorer: &dyn PairScorer,
    with_inverse: bool,
) -> Result<MetricRun> {
    if systems.is_empty() {
        return Err(Error::Config("no systems to evaluate".into()));
    }
    for s in systems {
        if s.hypotheses.len() != units.len() {
            return Err(Error::Usage(format!(
                "system `{}` has {} hypotheses but the gold file has {} sentences",
                s.name,
                s.hypotheses.len(),
                units.len()
            )));
        }
    }
    let Some(level) = spec.base.level() else {
        let rows = systems
            .par_iter()
            .map(|s| {
                let score = gleu::gleu_corpus(units, &s.hypotheses, gleu::DEFAULT_MAX_ORDER)?;
                Ok(SystemRow {
                    system: s.name.clone(),
                    metric: spec.label(),
                    scorer: "gleu".into(),
                    level: None,
                    beta: None,
                    precision: None,
                    recall: None,
                    f_score: None,
                    score,
                    n_sentences: units.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(MetricRun {
            spec: spec.clone(),
            rows,
            inverse_rows: None,
        });
    };
    if matches!(spec.base, Base::Errant | Base::SentErrant) {
        return Err(Error::ErrantUnsupported);
    }
    let config = metric_config(spec, level, opts);
    config.validate()?;
    let scorer_id = scorer.id();
    let scorer_key = scorer_id.key();
    let label = metric_label(spec.base, &scorer_id.name);
    let row = |name: &str, label: String, scores: &[SentenceScore], config: &MetricConfig| -> Result<SystemRow> {
        let r = aggregate(scores, config)?;
        Ok(SystemRow {
            system: name.to_string(),
            metric: label,
            scorer: scorer_key.clone(),
            level: Some(r.level),
            beta: Some(config.beta),
            precision: Some(r.precision),
            recall: Some(r.recall),
            f_score: Some(r.f_score),
            score: r.f_score,
            n_sentences: r.n_sentences,
        })
    };
    let inverse = Weighting::Inverse {
        epsilon: INVERSE_EPSILON,
    };
    let per_system = systems
        .par_iter()
        .map(|s| {
            let scores = units
                .par_iter()
                .zip(&s.hypotheses)
                .map(|(u, h)| score_sentence(u, h, scorer, &config))
                .collect::<ptm2_core::Result<Vec<_>>>()?;
            let plain = row(&s.name, label.clone(), &scores, &config)?;
            let inv = if with_inverse {
                let reweighted: Vec<SentenceScore> =
                    scores.iter().map(|sc| sc.reweighted(inverse, config.beta)).collect();
                let inv_config = MetricConfig {
                    weighting: inverse,
                    ..config
                };
                Some(row(&s.name, format!("{label}+inverse"), &reweighted, &inv_config)?)
            } else {
                None
            };
            Ok((plain, inv))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, inverse_rows): (Vec<_>, Vec<_>) = per_system.into_iter().unzip();
    Ok(MetricRun {
        spec: spec.clone(),
        rows,
        inverse_rows: with_inverse.then(|| inverse_rows.into_iter().map(Option::unwrap).collect()),
    })
}

fn system_scores(label: &str, rows: &[SystemRow]) -> Result<SystemScores> {
    let mut map = BTreeMap::new();
    for r in rows {
        if map.insert(r.system.clone(), r.score).is_some() {
            return Err(Error::Config(format!("duplicate system name `{}`", r.system)));
        }
    }
    Ok(SystemScores::new(label, map)?)
}

fn default_k_min() -> usize {
    4
}

fn default_max_unchanged() -> usize {
    DEFAULT_MAX_UNCHANGED
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub name: String,
    pub hypothesis: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingEntry {
    pub name: String,
    pub path: PathBuf,
}

/// A meta-evaluation run description. Relative paths are resolved against
/// the directory of the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gold: PathBuf,
    #[serde(default)]
    pub source: Option<PathBuf>,
    pub systems: Vec<SystemEntry>,
    #[serde(default)]
    pub rankings: Vec<RankingEntry>,
    pub metrics: Vec<MetricSpec>,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default)]
    pub cache: Option<PathBuf>,
    #[serde(default)]
    pub scorer_endpoint: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub case_insensitive: bool,
    #[serde(default = "default_max_unchanged")]
    pub max_unchanged: usize,
    #[serde(default)]
    pub skip_empty: bool,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn options(&self) -> EvalOptions {
        EvalOptions {
            max_unchanged: self.max_unchanged,
            case_sensitive: !self.case_insensitive,
            skip_empty: self.skip_empty,
        }
    }
}

/// Loaded inputs of a run.
#[derive(Debug, Clone)]
pub struct Study {
    pub units: Vec<SentenceUnit>,
    pub systems: Vec<SystemOutput>,
    pub rankings: Vec<HumanRanking>,
    pub metrics: Vec<MetricSpec>,
    pub options: EvalOptions,
    pub k_min: usize,
}

impl Study {
    /// Reads the config at `path` and every file it names.
    pub fn load(path: &Path) -> Result<(Self, RunConfig)> {
        let config = RunConfig::parse(&corpus::read_text(path)?, &path.display().to_string())?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { dir.join(p) };
        let units = corpus::load_gold(&resolve(&config.gold))?;
        if let Some(source) = &config.source {
            corpus::check_sources(&resolve(source), &units)?;
        }
        let systems = config
            .systems
            .iter()
            .map(|s| {
                Ok(SystemOutput {
                    name: s.name.clone(),
                    hypotheses: corpus::load_system_outputs(&resolve(&s.hypothesis), units.len())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rankings = config
            .rankings
            .iter()
            .map(|r| ranking_file::load_ranking(&resolve(&r.path), &r.name))
            .collect::<Result<Vec<_>>>()?;
        let mut config = config;
        config.cache = config.cache.as_deref().map(resolve);
        let study = Study {
            units,
            systems,
            rankings,
            metrics: config.metrics.clone(),
            options: config.options(),
            k_min: config.k_min,
        };
        Ok((study, config))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationOutput {
    pub reports: Vec<CorrelationReport>,
    pub rows: Vec<SystemRow>,
}

/// Scores every system under every metric and correlates each metric with
/// each human ranking. With `with_inverse`, the M² family metrics are also
/// run with inverse weights `1 / max(|w|, 1e-6)`.
pub fn correlate_study(study: &Study, factory: &ScorerFactory, with_inverse: bool) -> Result<CorrelationOutput> {
    if study.systems.is_empty() {
        return Err(Error::Config("no systems to evaluate".into()));
    }
    if study.rankings.is_empty() {
        return Err(Error::Config("no human rankings to correlate with".into()));
    }
    if study.metrics.is_empty() {
        return Err(Error::Config("no metrics configured".into()));
    }
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for spec in &study.metrics {
        let scorer = match spec.base {
            Base::Gleu => Box::new(ptm2_core::UniformScorer) as Box<dyn PairScorer + Send>,
            _ => factory.build(spec.scorer)?,
        };
        let inverse = with_inverse && spec.base.level().is_some();
        let run = evaluate(&study.units, &study.systems, spec, &study.options, scorer.as_ref(), inverse)?;
        let label = run.rows[0].metric.clone();
        let mut variants = vec![(label.clone(), run.rows)];
        if let Some(inv) = run.inverse_rows {
            variants.push((format!("{label}+inverse"), inv));
        }
        for (label, variant_rows) in variants {
            let scores = system_scores(&label, &variant_rows)?;
            for ranking in &study.rankings {
                reports.push(correlate(&scores, ranking, study.k_min)?);
            }
            rows.extend(variant_rows);
        }
    }
    Ok(CorrelationOutput { reports, rows })
}
