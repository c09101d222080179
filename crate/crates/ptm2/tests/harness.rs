mod common;

use std::collections::BTreeMap;

use ptm2::harness::{correlate_study, evaluate, Base, EvalOptions, MetricSpec, Study};
use ptm2::scorers::{ScorerChoice, ScorerFactory};
use ptm2_core::stats::correlate;
use ptm2_core::{pearson, ChrfScorer, SystemScores, UniformScorer};

use common::{planted_study, PLANTED_SYSTEMS};

fn scores_of(rows: &[ptm2::report::SystemRow]) -> BTreeMap<String, f64> {
    rows.iter().map(|r| (r.system.clone(), r.score)).collect()
}

#[test]
fn planted_study_orders_metrics() {
    let study = planted_study(200, 7);
    let opts = EvalOptions::default();
    let pt = evaluate(
        &study.units,
        &study.systems,
        &MetricSpec::new(Base::SentM2, ScorerChoice::Chrf),
        &opts,
        &ChrfScorer::default(),
        true,
    )
    .unwrap();
    let sent = evaluate(
        &study.units,
        &study.systems,
        &MetricSpec::new(Base::SentM2, ScorerChoice::Uniform),
        &opts,
        &UniformScorer,
        false,
    )
    .unwrap();
    let human: Vec<f64> = PLANTED_SYSTEMS
        .iter()
        .map(|(n, _, _)| study.human.value(n).unwrap())
        .collect();
    let column = |rows: &[ptm2::report::SystemRow]| -> Vec<f64> {
        let m = scores_of(rows);
        PLANTED_SYSTEMS.iter().map(|(n, _, _)| m[*n]).collect()
    };
    let r_pt = pearson(&column(&pt.rows), &human).unwrap();
    let r_sent = pearson(&column(&sent.rows), &human).unwrap();
    let r_inv = pearson(&column(pt.inverse_rows.as_ref().unwrap()), &human).unwrap();
    eprintln!("pt {r_pt:.4} sent {r_sent:.4} inverse {r_inv:.4}");
    assert!(r_pt > r_sent && r_inv < r_sent, "pt {r_pt} sent {r_sent} inverse {r_inv}");
}

#[test]
fn thread_count_does_not_change_scores() {
    let study = planted_study(40, 3);
    let spec = MetricSpec::new(Base::M2, ScorerChoice::Chrf);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                evaluate(&study.units, &study.systems, &spec, &EvalOptions::default(), &ChrfScorer::default(), true)
                    .unwrap()
            })
    };
    let one = run(1);
    let many = run(8);
    for (a, b) in one.rows.iter().zip(&many.rows) {
        assert_eq!(a.score.to_bits(), b.score.to_bits());
    }
}

#[test]
fn correlate_study_matches_direct_correlation() {
    let planted = planted_study(30, 11);
    let study = Study {
        units: planted.units.clone(),
        systems: planted.systems.clone(),
        rankings: vec![planted.human.clone()],
        metrics: vec![
            MetricSpec::new(Base::SentM2, ScorerChoice::Chrf),
            MetricSpec::new(Base::Gleu, ScorerChoice::Uniform),
        ],
        options: EvalOptions::default(),
        k_min: 4,
    };
    let factory = ScorerFactory::new(None, None, None).unwrap();
    let out = correlate_study(&study, &factory, true).unwrap();
    let labels: Vec<&str> = out.reports.iter().map(|r| r.metric.as_str()).collect();
    assert_eq!(labels, ["sentm2+chrf", "sentm2+chrf+inverse", "gleu"]);

    let rows: Vec<_> = out.rows.iter().filter(|r| r.metric == "sentm2+chrf").cloned().collect();
    let scores = SystemScores::new("sentm2+chrf", scores_of(&rows)).unwrap();
    let direct = correlate(&scores, &planted.human, 4).unwrap();
    assert_eq!(direct, out.reports[0]);
    assert_eq!(out.reports[0].topk.len(), 8 - 4 + 1);
    assert_eq!(
        out.reports[0].topk[0].1.unwrap().to_bits(),
        out.reports[0].pearson.unwrap().to_bits()
    );
}

#[test]
fn study_errors() {
    let planted = planted_study(5, 1);
    let mut study = Study {
        units: planted.units.clone(),
        systems: Vec::new(),
        rankings: vec![planted.human.clone()],
        metrics: vec![MetricSpec::new(Base::M2, ScorerChoice::Uniform)],
        options: EvalOptions::default(),
        k_min: 4,
    };
    let factory = ScorerFactory::new(None, None, None).unwrap();
    assert!(correlate_study(&study, &factory, true).is_err());

    // A ranking naming a system that was not evaluated.
    study.systems = planted.systems[..7].to_vec();
    let err = correlate_study(&study, &factory, false).unwrap_err();
    assert!(err.to_string().contains("sys_h"), "{err}");
}
