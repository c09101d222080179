#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ptm2::harness::SystemOutput;
use ptm2::m2::{emit_m2, M2Annotation, M2Block, M2Edit};
use ptm2_core::{Annotation, Edit, HumanRanking, Sentence, SentenceUnit};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ptm2_bin() -> &'static str {
    env!("CARGO_BIN_EXE_ptm2")
}

pub fn stub_bin() -> &'static str {
    env!("CARGO_BIN_EXE_ptm2-stub-scorer")
}

pub fn run_ptm2(args: &[&str]) -> Output {
    Command::new(ptm2_bin())
        .args(args)
        .env_remove("PTM2_SCORER_ENDPOINT")
        .output()
        .expect("run ptm2")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

pub fn m2_text(units: &[SentenceUnit]) -> String {
    let blocks: Vec<M2Block> = units
        .iter()
        .map(|u| M2Block {
            source: u.source().clone(),
            annotations: u
                .gold()
                .iter()
                .map(|a| M2Annotation {
                    annotator: a.annotator,
                    edits: a
                        .edits
                        .iter()
                        .map(|e| M2Edit {
                            edit: e.clone(),
                            kind: "X".into(),
                            required: "REQUIRED".into(),
                            comment: "-NONE-".into(),
                            extra: Vec::new(),
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    emit_m2(&blocks)
}

pub fn lines_text(sentences: &[Sentence]) -> String {
    sentences.iter().map(|s| format!("{s}\n")).collect()
}

/// Small hand-made corpus: three sentences with two annotators on the first.
pub fn toy_corpus() -> (String, String, Vec<(&'static str, String)>) {
    let gold = "S They play the important role in our life .\n\
                A 2 3|||ArtOrDet|||an|||REQUIRED|||-NONE-|||0\n\
                A 2 3|||ArtOrDet|||a|||REQUIRED|||-NONE-|||1\n\
                \n\
                S He go to school yesterday .\n\
                A 1 2|||Verb|||went|||REQUIRED|||-NONE-|||0\n\
                \n\
                S This is fine .\n\
                A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n";
    let source = "They play the important role in our life .\nHe go to school yesterday .\nThis is fine .\n";
    let systems = vec![
        (
            "good.txt",
            "They play an important role in our life .\nHe went to school yesterday .\nThis is fine .\n".to_string(),
        ),
        (
            "partial.txt",
            "They play a important role in our lives .\nHe go to school yesterday .\nThis is fine .\n".to_string(),
        ),
        ("copy.txt", source.to_string()),
    ];
    (gold.to_string(), source.to_string(), systems)
}

/// A synthetic meta-evaluation study with a planted human ranking.
///
/// Every sentence carries two kinds of gold edits. Major errors swap a long
/// content word for a wrong one; minor errors swap a comma for a full stop.
/// Each system fixes major and minor errors with its own probabilities and
/// adds occasional spurious edits. The human score of a system is its
/// impact-weighted fix rate, where a minor fix counts 0.3 of a major one.
pub struct PlantedStudy {
    pub units: Vec<SentenceUnit>,
    pub systems: Vec<SystemOutput>,
    pub human: HumanRanking,
}

pub const PLANTED_SYSTEMS: [(&str, f64, f64); 8] = [
    ("sys_a", 0.90, 0.10),
    ("sys_b", 0.80, 0.35),
    ("sys_c", 0.70, 0.90),
    ("sys_d", 0.60, 0.50),
    ("sys_e", 0.50, 0.95),
    ("sys_f", 0.40, 0.20),
    ("sys_g", 0.30, 0.80),
    ("sys_h", 0.20, 0.60),
];

const MAJOR_IMPACT: f64 = 1.0;
const MINOR_IMPACT: f64 = 0.3;
const SPURIOUS_RATE: f64 = 0.15;
const SPURIOUS_PENALTY: f64 = 0.05;

fn word(rng: &mut ChaCha8Rng, len: std::ops::RangeInclusive<usize>) -> String {
    let n = rng.gen_range(len);
    (0..n).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

#[derive(Clone)]
enum Slot {
    Plain(String),
    Major { wrong: String, right: String },
    Minor,
}

pub fn planted_study(n_sentences: usize, seed: u64) -> PlantedStudy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fillers: Vec<String> = (0..60).map(|_| word(&mut rng, 2..=5)).collect();
    let mut sentences: Vec<Vec<Slot>> = Vec::with_capacity(n_sentences);
    for _ in 0..n_sentences {
        let n_major = rng.gen_range(1..=2);
        let n_minor = rng.gen_range(2..=3);
        let mut errors: Vec<Slot> = (0..n_major)
            .map(|_| Slot::Major {
                wrong: word(&mut rng, 8..=11),
                right: word(&mut rng, 8..=11),
            })
            .chain((0..n_minor).map(|_| Slot::Minor))
            .collect();
        errors.shuffle(&mut rng);
        let mut slots = Vec::new();
        for e in errors {
            for _ in 0..rng.gen_range(1..=3) {
                slots.push(Slot::Plain(fillers.choose(&mut rng).unwrap().clone()));
            }
            slots.push(e);
        }
        slots.push(Slot::Plain(fillers.choose(&mut rng).unwrap().clone()));
        sentences.push(slots);
    }

    let units: Vec<SentenceUnit> = sentences
        .iter()
        .map(|slots| {
            let mut source = Vec::new();
            let mut gold = Vec::new();
            for (i, slot) in slots.iter().enumerate() {
                match slot {
                    Slot::Plain(w) => source.push(w.clone()),
                    Slot::Major { wrong, right } => {
                        source.push(wrong.clone());
                        gold.push(Edit::new(i, i + 1, [right.as_str()]));
                    }
                    Slot::Minor => {
                        source.push(",".into());
                        gold.push(Edit::new(i, i + 1, ["."]));
                    }
                }
            }
            SentenceUnit::new(Sentence::from_tokens(source).unwrap(), vec![Annotation::new(0, gold)]).unwrap()
        })
        .collect();

    let mut systems = Vec::new();
    let mut human = Vec::new();
    for (k, (name, p_major, p_minor)) in PLANTED_SYSTEMS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9 * (k as u64 + 1)));
        let mut hyps = Vec::with_capacity(n_sentences);
        let mut quality = 0.0;
        for slots in &sentences {
            let mut tokens = Vec::new();
            let (mut fixed, mut total) = (0.0, 0.0);
            for slot in slots {
                match slot {
                    Slot::Plain(w) => tokens.push(w.clone()),
                    Slot::Major { wrong, right } => {
                        total += MAJOR_IMPACT;
                        if rng.gen_bool(*p_major) {
                            fixed += MAJOR_IMPACT;
                            tokens.push(right.clone());
                        } else {
                            tokens.push(wrong.clone());
                        }
                    }
                    Slot::Minor => {
                        total += MINOR_IMPACT;
                        if rng.gen_bool(*p_minor) {
                            fixed += MINOR_IMPACT;
                            tokens.push(".".into());
                        } else {
                            tokens.push(",".into());
                        }
                    }
                }
            }
            let mut penalty = 0.0;
            if rng.gen_bool(SPURIOUS_RATE) {
                let plain: Vec<usize> = (0..slots.len())
                    .filter(|&i| matches!(slots[i], Slot::Plain(_)))
                    .collect();
                let i = *plain.choose(&mut rng).unwrap();
                tokens[i].push('q');
                penalty = SPURIOUS_PENALTY;
            }
            quality += fixed / total - penalty;
            hyps.push(Sentence::from_tokens(tokens).unwrap());
        }
        systems.push(SystemOutput {
            name: name.to_string(),
            hypotheses: hyps,
        });
        human.push((name.to_string(), quality / n_sentences as f64));
    }
    PlantedStudy {
        units,
        systems,
        human: HumanRanking::from_scores("planted", human).unwrap(),
    }
}
