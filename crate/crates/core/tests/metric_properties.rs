mod common;

use common::unit_and_hypothesis;
use proptest::prelude::*;
use ptm2_core::align::{edit_set_ops, extract_edits};
use ptm2_core::metric::{self, m2, score_sentence, Level, MetricConfig, Tally, Weighting};
use ptm2_core::{compute_edit_scores, ChrfScorer, PairScorer, UniformScorer};

fn bounded(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn uniform_scorer_equals_counting(corpus in prop::collection::vec(unit_and_hypothesis(5, 8), 1..12)) {
        let (units, hyps): (Vec<_>, Vec<_>) = corpus.into_iter().unzip();
        for level in [Level::Corpus, Level::Sentence] {
            let config = MetricConfig::default().with_level(level);
            let weighted = metric::evaluate_system(&units, &hyps, &UniformScorer, &config).unwrap();
            let counted = m2::score(&units, &hyps, &config).unwrap();
            prop_assert!((weighted.f_score - counted.f_score).abs() <= 1e-12);
            prop_assert!((weighted.precision - counted.precision).abs() <= 1e-12);
            prop_assert!((weighted.recall - counted.recall).abs() <= 1e-12);
        }
    }

    #[test]
    fn scaling_weights_changes_nothing(
        (unit, hyp) in unit_and_hypothesis(5, 8),
        factor in 1e-3f64..1e3,
    ) {
        let annotation = &unit.gold()[0];
        let system = extract_edits(unit.source(), &hyp, &annotation.edits, 2).unwrap();
        let (union, _) = edit_set_ops(&system, &annotation.edits);
        let table = compute_edit_scores(unit.source(), &unit.references()[0], &union, &ChrfScorer::default()).unwrap();
        let base = Tally::from_table(&system, &annotation.edits, &table, Weighting::Absolute);
        let scaled = Tally::from_table(&system, &annotation.edits, &table.scaled(factor), Weighting::Absolute);
        prop_assert!((base.precision() - scaled.precision()).abs() <= 1e-12);
        prop_assert!((base.recall() - scaled.recall()).abs() <= 1e-12);
        prop_assert!((base.f_score(0.5) - scaled.f_score(0.5)).abs() <= 1e-12);
    }

    #[test]
    fn adding_edits_moves_scores_the_right_way(
        correct in 0.0f64..5.0,
        extra_proposed in 0.0f64..5.0,
        extra_gold in 0.0f64..5.0,
        w in 1e-6f64..5.0,
    ) {
        let t = Tally { correct, proposed: correct + extra_proposed, gold: correct + extra_gold };
        let with_correct = Tally { correct: t.correct + w, proposed: t.proposed + w, gold: t.gold + w };
        prop_assert!(with_correct.f_score(0.5) >= t.f_score(0.5) - 1e-12);
        let with_wrong = Tally { proposed: t.proposed + w, ..t };
        prop_assert!(with_wrong.precision() <= t.precision() + 1e-12);
    }

    #[test]
    fn scores_are_bounded_and_max_over_references(
        (unit, hyp) in unit_and_hypothesis(5, 8),
        inverse in any::<bool>(),
    ) {
        let weighting = if inverse {
            Weighting::Inverse { epsilon: metric::INVERSE_EPSILON }
        } else {
            Weighting::Absolute
        };
        let config = MetricConfig { weighting, ..MetricConfig::default() };
        let score = score_sentence(&unit, &hyp, &ChrfScorer::default(), &config).unwrap();
        for r in &score.references {
            prop_assert!(bounded(r.precision) && bounded(r.recall) && bounded(r.f_score));
            prop_assert!(score.f_max() >= r.f_score);
            let identity = ptm2_core::f_beta(r.precision, r.recall, 0.5);
            prop_assert!((identity - r.f_score).abs() <= 1e-12);
        }
    }

    #[test]
    fn chrf_reference_edit_is_beneficial((unit, _hyp) in unit_and_hypothesis(5, 8)) {
        // An edit that turns the source into the reference scores positive.
        let source = unit.source();
        for (annotation, reference) in unit.gold().iter().zip(unit.references()) {
            if annotation.edits.len() == 1 && reference != source {
                let table = compute_edit_scores(source, reference, &annotation.edits, &ChrfScorer::default()).unwrap();
                prop_assert!(table.entries()[0].1 > 0.0);
            }
        }
    }

    #[test]
    fn edit_order_does_not_matter((unit, hyp) in unit_and_hypothesis(5, 8)) {
        let annotation = &unit.gold()[0];
        let system = extract_edits(unit.source(), &hyp, &annotation.edits, 2).unwrap();
        let (union, _) = edit_set_ops(&system, &annotation.edits);
        let mut reversed = union.clone();
        reversed.reverse();
        let scorer: &dyn PairScorer = &ChrfScorer::default();
        let a = compute_edit_scores(unit.source(), &unit.references()[0], &union, scorer).unwrap();
        let b = compute_edit_scores(unit.source(), &unit.references()[0], &reversed, scorer).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn corpus_result_satisfies_f_identity() {
    use ptm2_core::{Annotation, Edit, Sentence, SentenceUnit};
    let s = Sentence::from_text;
    let units = vec![
        SentenceUnit::new(s("a b c"), vec![Annotation::new(0, vec![Edit::new(1, 2, ["x"])])]).unwrap(),
        SentenceUnit::new(s("d e f"), vec![Annotation::new(0, vec![Edit::new(0, 1, ["y"])])]).unwrap(),
    ];
    let hyps = vec![s("a x c"), s("d q f")];
    let res = metric::evaluate_system(&units, &hyps, &ChrfScorer::default(), &MetricConfig::default()).unwrap();
    let identity = ptm2_core::f_beta(res.precision, res.recall, 0.5);
    assert!((res.f_score - identity).abs() <= 1e-12);
    assert!(res.f_score > 0.0 && res.f_score < 1.0);
}
