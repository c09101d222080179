mod common;

use std::process::{Command, Output};

use common::{lines_text, m2_text, planted_study, ptm2_bin, run_ptm2, stub_bin, write};

struct Corpus {
    dir: tempfile::TempDir,
}

impl Corpus {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let study = planted_study(25, 5);
        write(dir.path(), "gold.m2", &m2_text(&study.units));
        for s in &study.systems[..3] {
            write(dir.path(), &format!("{}.txt", s.name), &lines_text(&s.hypotheses));
        }
        Self { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }

    fn args<'a>(&'a self, scorer: &'a str, extra: &[&'a str]) -> Vec<String> {
        let mut args: Vec<String> = vec!["--base".into(), "sentm2".into(), "--scorer".into(), scorer.into()];
        for sys in ["sys_a", "sys_b", "sys_c"] {
            args.push("--hypothesis".into());
            args.push(self.path(&format!("{sys}.txt")));
        }
        args.push("--reference".into());
        args.push(self.path("gold.m2"));
        args.extend(extra.iter().map(|s| s.to_string()));
        args
    }
}

fn run(args: &[String]) -> Output {
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    run_ptm2(&args)
}

fn ok(out: &Output) -> &[u8] {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    &out.stdout
}

#[test]
fn cached_replay_is_byte_identical_without_the_service() {
    let c = Corpus::new();
    let cache = c.path("scores.jsonl");
    for profile in ["bertscore", "bartscore"] {
        let cache = format!("{cache}.{profile}");
        let live = run(&c.args(profile, &["--scorer-endpoint", stub_bin(), "--cache", &cache]));
        let live = ok(&live).to_vec();
        let records = std::fs::read_to_string(&cache).unwrap().lines().count();
        assert!(records > 0);

        // Same profile, no endpoint: served from the cache.
        let replay = run(&c.args(profile, &["--cache", &cache]));
        assert_eq!(ok(&replay), &live[..]);
        // Pure cached mode resolves the single scorer in the cache.
        let cached = run(&c.args("cached", &["--cache", &cache]));
        assert_eq!(ok(&cached), &live[..]);
        // A dead endpoint with a warm cache falls back with a warning.
        let fallback = run(&c.args(profile, &["--scorer-endpoint", "/nonexistent/scorer", "--cache", &cache]));
        assert_eq!(ok(&fallback), &live[..]);
        assert!(String::from_utf8_lossy(&fallback.stderr).contains("warning:"));
        // Replays add no records.
        assert_eq!(std::fs::read_to_string(&cache).unwrap().lines().count(), records);

        let report: serde_json::Value = serde_json::from_slice(&live).unwrap();
        assert_eq!(report["systems"][0]["scorer"], format!("{profile}[fingerprint=stub-chrf-v1]"));
    }
}

#[test]
fn endpoint_from_environment() {
    let c = Corpus::new();
    let args = c.args("bertscore", &[]);
    let out = Command::new(ptm2_bin())
        .args(&args)
        .env("PTM2_SCORER_ENDPOINT", stub_bin())
        .output()
        .unwrap();
    let direct = run(&c.args("bertscore", &["--scorer-endpoint", stub_bin()]));
    assert_eq!(ok(&out), ok(&direct));
}

#[test]
fn cold_cache_without_service_exits_4() {
    let c = Corpus::new();
    let cache = c.path("empty.jsonl");
    let out = run(&c.args("bertscore", &["--scorer-endpoint", "/nonexistent/scorer", "--cache", &cache]));
    assert_eq!(out.status.code(), Some(4));
    let out = run(&c.args("cached", &["--cache", &cache]));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn cache_miss_in_replay_names_the_key() {
    let c = Corpus::new();
    let cache = c.path("partial.jsonl");
    // Warm the cache with one system only.
    let warm: Vec<String> = vec![
        "--scorer".into(),
        "bertscore".into(),
        "--hypothesis".into(),
        c.path("sys_a.txt"),
        "--reference".into(),
        c.path("gold.m2"),
        "--scorer-endpoint".into(),
        stub_bin().into(),
        "--cache".into(),
        cache.clone(),
    ];
    ok(&run(&warm));
    let out = run(&c.args("cached", &["--cache", &cache]));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(4), "{err}");
    assert!(err.starts_with("error: ") && err.contains("cache miss") && err.contains("bertscore[fingerprint=stub-chrf-v1]|"), "{err}");
}

#[test]
fn service_dying_mid_run_exits_4() {
    let c = Corpus::new();
    let endpoint = format!("{} --exit-after 5", stub_bin());
    let out = run(&c.args("bertscore", &["--scorer-endpoint", &endpoint, "--jobs", "1"]));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(4), "{err}");
    assert!(err.contains("scorer unavailable"), "{err}");
}

#[test]
fn corrupted_cache_is_rejected() {
    let c = Corpus::new();
    let cache = c.path("scores.jsonl");
    ok(&run(&c.args("bertscore", &["--scorer-endpoint", stub_bin(), "--cache", &cache])));
    let text = std::fs::read_to_string(&cache).unwrap();
    let first = text.lines().next().unwrap();
    let mut record: serde_json::Value = serde_json::from_str(first).unwrap();
    record["score"] = serde_json::json!(record["score"].as_f64().unwrap() + 0.25);
    std::fs::write(&cache, format!("{text}{record}\n")).unwrap();
    let out = run(&c.args("cached", &["--cache", &cache]));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(2), "{err}");
    assert!(err.contains("score cache corrupted: lines 1 and"), "{err}");
}
