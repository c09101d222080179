use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ptm2_core::{align, extract_edits, OpKind, Sentence};

use crate::corpus;
use crate::error::{Error, Result};
use crate::harness::{self, Base, EvalOptions, MetricSpec, Study, SystemOutput};
use crate::report::{self, Format};
use crate::scorers::{ScorerChoice, ScorerFactory};

pub const ENDPOINT_ENV: &str = "PTM2_SCORER_ENDPOINT";

#[derive(Debug, Parser)]
#[command(
    name = "ptm2",
    version,
    about = "Pretrained-scorer weighted M² evaluation for grammatical error correction",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    #[command(flatten)]
    pub evaluate: EvaluateArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score system outputs (the default when no subcommand is given).
    Evaluate(EvaluateArgs),
    /// Correlate metrics with human rankings as described by a run config.
    Correlate(StudyArgs),
    /// Like `correlate`, adding inverse-weighted variants of each M² metric.
    Ablate(StudyArgs),
    /// Print token alignments and extracted edits.
    AlignDebug(AlignArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScorerArgs {
    /// JSONL score cache; read first and extended with new scores.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Command line of the external scoring service [env: PTM2_SCORER_ENDPOINT]
    #[arg(long)]
    pub scorer_endpoint: Option<String>,
    /// Model name passed to the external service.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    pub format: Format,
    /// Worker threads (0 picks one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long, default_value = "m2")]
    pub base: Base,
    #[arg(long, default_value = "self")]
    pub scorer: ScorerChoice,
    /// Plain source file, checked against the gold file.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// System output, one sentence per line. Repeat for several systems.
    #[arg(long)]
    pub hypothesis: Vec<PathBuf>,
    /// Gold annotations in M² format.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = ptm2_core::metric::DEFAULT_MAX_UNCHANGED)]
    pub max_unchanged: usize,
    #[arg(long)]
    pub case_insensitive: bool,
    /// Leave out sentences where neither system nor gold edits anything
    /// (sentence level only).
    #[arg(long)]
    pub skip_empty: bool,
    #[command(flatten)]
    pub scorer_args: ScorerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    /// JSON run config.
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub scorer_args: ScorerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long)]
    pub hypothesis: PathBuf,
    /// M² file; its sources are used and annotator 0 guides edit extraction.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value_t = ptm2_core::metric::DEFAULT_MAX_UNCHANGED)]
    pub max_unchanged: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn endpoint(flag: &Option<String>, config: Option<&String>) -> Option<String> {
    flag.clone()
        .or_else(|| config.cloned())
        .or_else(|| std::env::var(ENDPOINT_ENV).ok())
        .filter(|e| !e.trim().is_empty())
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    pool.install(f)
}

fn emit(output: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn system_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn evaluate(args: &EvaluateArgs, stdout: &mut dyn Write, warnings: &mut Vec<String>) -> Result<()> {
    if matches!(args.base, Base::Errant | Base::SentErrant) {
        return Err(Error::ErrantUnsupported);
    }
    let reference = args
        .reference
        .as_ref()
        .ok_or_else(|| Error::Usage("--reference (gold M² file) is required".into()))?;
    if args.hypothesis.is_empty() {
        return Err(Error::Usage("--hypothesis is required".into()));
    }
    let units = corpus::load_gold(reference)?;
    if let Some(source) = &args.source {
        corpus::check_sources(source, &units)?;
    }
    let mut systems = Vec::with_capacity(args.hypothesis.len());
    for path in &args.hypothesis {
        let mut name = system_name(path);
        if systems.iter().any(|s: &SystemOutput| s.name == name) {
            name = path.display().to_string();
        }
        systems.push(SystemOutput {
            name,
            hypotheses: corpus::load_system_outputs(path, units.len())?,
        });
    }
    let spec = MetricSpec {
        base: args.base,
        scorer: args.scorer,
        beta: args.beta,
    };
    let options = EvalOptions {
        max_unchanged: args.max_unchanged,
        case_sensitive: !args.case_insensitive,
        skip_empty: args.skip_empty,
    };
    let scorer: Box<dyn ptm2_core::PairScorer + Send> = if args.base == Base::Gleu {
        if args.scorer != ScorerChoice::Uniform {
            warnings.push(format!("gleu ignores --scorer {}", args.scorer));
        }
        Box::new(ptm2_core::UniformScorer)
    } else {
        let factory = ScorerFactory::new(
            endpoint(&args.scorer_args.scorer_endpoint, None),
            args.scorer_args.cache.clone(),
            args.scorer_args.model.clone(),
        )?;
        let scorer = factory.build(args.scorer)?;
        warnings.extend(factory.take_warnings());
        scorer
    };
    let run = with_pool(args.out.jobs, || {
        harness::evaluate(&units, &systems, &spec, &options, scorer.as_ref(), false)
    })?;
    emit(&args.out.output, &report::render_systems(&run.rows, args.out.format), stdout)
}

fn study(args: &StudyArgs, with_inverse: bool, stdout: &mut dyn Write, warnings: &mut Vec<String>) -> Result<()> {
    let (study, config) = Study::load(&args.config)?;
    if study.metrics.iter().any(|m| matches!(m.base, Base::Errant | Base::SentErrant)) {
        return Err(Error::ErrantUnsupported);
    }
    let factory = ScorerFactory::new(
        endpoint(&args.scorer_args.scorer_endpoint, config.scorer_endpoint.as_ref()),
        args.scorer_args.cache.clone().or(config.cache.clone()),
        args.scorer_args.model.clone().or(config.model.clone()),
    )?;
    let out = with_pool(args.out.jobs, || harness::correlate_study(&study, &factory, with_inverse))?;
    warnings.extend(factory.take_warnings());
    emit(
        &args.out.output,
        &report::render_correlations(&out.reports, &out.rows, args.out.format),
        stdout,
    )
}

fn join(tokens: &[String]) -> String {
    tokens.join(" ")
}

fn align_debug(args: &AlignArgs, stdout: &mut dyn Write) -> Result<()> {
    let (sources, gold): (Vec<Sentence>, Vec<Vec<ptm2_core::Edit>>) = match (&args.reference, &args.source) {
        (Some(reference), _) => {
            let units = corpus::load_gold(reference)?;
            units
                .iter()
                .map(|u| (u.source().clone(), u.gold()[0].edits.clone()))
                .unzip()
        }
        (None, Some(source)) => {
            let text = corpus::read_text(source)?;
            let sources: Vec<Sentence> = corpus::lines(&text).iter().map(|l| Sentence::from_text(l)).collect();
            let n = sources.len();
            (sources, vec![Vec::new(); n])
        }
        (None, None) => return Err(Error::Usage("--source or --reference is required".into())),
    };
    let hyps = corpus::load_system_outputs(&args.hypothesis, sources.len())?;
    let mut out = String::from("sentence\top\tsrc_start\tsrc_end\thyp_start\thyp_end\tsource\ttarget\n");
    for (i, ((src, hyp), gold)) in sources.iter().zip(&hyps).zip(&gold).enumerate() {
        for op in align(src, hyp) {
            let kind = match op.kind {
                OpKind::Match => "match",
                OpKind::Substitution => "substitute",
                OpKind::Deletion => "delete",
                OpKind::Insertion => "insert",
            };
            let _ = writeln!(
                out,
                "{}\t{kind}\t{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                op.src.0,
                op.src.1,
                op.hyp.0,
                op.hyp.1,
                join(&src.tokens()[op.src.0..op.src.1]),
                join(&hyp.tokens()[op.hyp.0..op.hyp.1]),
            );
        }
        for e in extract_edits(src, hyp, gold, args.max_unchanged)? {
            let _ = writeln!(
                out,
                "{}\tedit\t{}\t{}\t\t\t{}\t{}",
                i + 1,
                e.start,
                e.end,
                join(&src.tokens()[e.start..e.end]),
                join(&e.correction),
            );
        }
    }
    emit(&args.output, &out, stdout)
}

/// Runs the command line and returns the process exit code. Errors are
/// reported on `stderr` as one `error:` line.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = if code == 0 { e.render().to_string() } else { e.to_string() };
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut warnings = Vec::new();
    let result = match &cli.command {
        None => evaluate(&cli.evaluate, stdout, &mut warnings),
        Some(Command::Evaluate(args)) => evaluate(args, stdout, &mut warnings),
        Some(Command::Correlate(args)) => study(args, false, stdout, &mut warnings),
        Some(Command::Ablate(args)) => study(args, true, stdout, &mut warnings),
        Some(Command::AlignDebug(args)) => align_debug(args, stdout),
    };
    for w in warnings {
        let _ = writeln!(stderr, "warning: {}", w.replace('\n', " "));
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
