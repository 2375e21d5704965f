mod common;

use common::*;
use proptest::prelude::*;
use socratic_core::domain::{ConfidenceLevel, Stage, NOT_SURE_LABEL};
use socratic_core::metrics::*;
use socratic_core::store::ExportRecord;
use socratic_stats::two_proportion_z;

fn close(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol
}

#[test]
fn annotation_flip_rates_match_table() {
    let s = flip_summary(&sarcasm_study(), "Sarcasm").unwrap();
    assert_eq!((s.total_n, s.retained_n, s.flips_k), (133, 130, 8));
    assert_eq!(pct(s.rate), "6.15");
    let r = flip_summary(&relation_study(), "Relation").unwrap();
    assert_eq!((r.total_n, r.retained_n, r.flips_k), (133, 130, 31));
    assert_eq!(pct(r.rate), "23.85");
}

#[test]
fn datapoint_flip_means_match_fixture() {
    let s = datapoint_flip_stats(&sarcasm_study()).unwrap();
    assert_eq!(s.stats.len(), 40);
    assert_eq!(pct(s.mean), "5.92");
    let r = datapoint_flip_stats(&relation_study()).unwrap();
    assert_eq!(r.stats.len(), 40);
    assert_eq!(pct(r.mean), "24.19");
}

#[test]
fn flip_z_tests_from_fixture_counts() {
    let s = flip_summary(&sarcasm_study(), "Sarcasm").unwrap();
    let b = flip_summary(&benchmark_population("Sarcasm", SARCASM, 1381, 158, 12), "Sarcasm").unwrap();
    let t = two_proportion_z(s.flips_k, s.retained_n, b.flips_k, b.retained_n).unwrap();
    assert!(close(t.statistic, -1.84, 0.01), "{}", t.statistic);
    assert!(close(t.p_value, 0.0658, 0.0005), "{}", t.p_value);

    let r = flip_summary(&relation_study(), "Relation").unwrap();
    let b = flip_summary(&benchmark_population("Relation", RELATION, 1835, 140, 0), "Relation").unwrap();
    let t = two_proportion_z(r.flips_k, r.retained_n, b.flips_k, b.retained_n).unwrap();
    assert!(close(t.statistic, 6.34, 0.01), "{}", t.statistic);
}

#[test]
fn confusion_matrices_match_table() {
    let records = relation_ground_truth();
    let pre = confusion_report(&records, Stage::Initial).unwrap();
    assert_eq!(pre.n, 71);
    assert_eq!(pre.positive_label, "Expressed");
    assert_eq!((pre.tp, pre.fn_, pre.fp, pre.tn), (18, 8, 25, 20));
    let cells: Vec<String> = pre.shares.iter().map(|s| pct(*s)).collect();
    assert_eq!(cells, ["25.35", "11.27", "35.21", "28.17"]);
    assert_eq!(pct(pre.accuracy), "53.52");

    let post = confusion_report(&records, Stage::Post).unwrap();
    assert_eq!(post.n, 71);
    assert_eq!((post.tp, post.fn_, post.fp, post.tn), (17, 9, 16, 29));
    let cells: Vec<String> = post.shares.iter().map(|s| pct(*s)).collect();
    assert_eq!(cells, ["23.94", "12.68", "22.54", "40.85"]);
    assert_eq!(pct(post.accuracy), "64.79");
    assert_eq!(pct(post.false_positive_rate), "22.54");
}

#[test]
fn confusion_requires_ground_truth() {
    let mut records = relation_study();
    for r in &mut records {
        r.ground_truth = None;
    }
    assert!(confusion_report(&records, Stage::Initial).is_err());
}

#[test]
fn confidence_shares_match_fixture() {
    let c = confidence_transitions(&confidence_population(), ExclusionRule::None);
    assert_eq!(c.total, 266);
    assert_eq!(pct(c.high_share_pre), "57.52");
    assert_eq!(pct(c.high_share_post), "85.34");
    assert_eq!(
        pct(c.share(ConfidenceLevel::SomewhatSure, ConfidenceLevel::VerySure)),
        "28.20"
    );
}

#[test]
fn tlx_mental_demand_summary() {
    let agg = tlx_aggregate(&tlx_surveys()).unwrap();
    assert_eq!(agg.n, 5);
    let (name, mental) = &agg.items[0];
    assert_eq!(name, "mental");
    assert!(close(mental.mean, 8.8, 1e-12));
    assert_eq!(format!("{:.1}", mental.sd), "5.3");
}

#[test]
fn tlx_rejects_out_of_range_scores() {
    let mut s = tlx_surveys();
    s[0].effort = 22;
    assert!(tlx_aggregate(&s).is_err());
}

#[test]
fn engagement_counts_skip_opener() {
    let records = sarcasm_study();
    let e = engagement_stats(&records).unwrap();
    assert_eq!(e.transcripts, records.len());
    assert!(e.message_counts.iter().all(|&m| m == 4));
    assert!(close(e.messages.mean, 4.0, 1e-12));
    assert!(close(e.annotator_chars.unwrap().mean, 50.0, 1e-12));

    let mut undeliberated = records.clone();
    for r in &mut undeliberated {
        r.deliberated = false;
    }
    assert!(engagement_stats(&undeliberated).is_none());
}

#[test]
fn full_report_renders_every_section() {
    let mut study = sarcasm_study();
    study.extend(relation_study());
    study.extend(relation_ground_truth());
    let mut bench = benchmark_population("Sarcasm", SARCASM, 1381, 158, 12);
    bench.extend(benchmark_population("Relation", RELATION, 1835, 140, 0));
    let report = build_report(&study, Some(&bench), &tlx_surveys()).unwrap();
    assert_eq!(report.datasets.len(), 2);
    let text = render_text(&report);
    for section in ["FLIP RATES", "TESTS: Sarcasm", "TESTS: Relation", "GROUND TRUTH", "CONFIDENCE", "ENGAGEMENT", "TASK LOAD"] {
        assert!(text.contains(section), "missing {section}:\n{text}");
    }
    let sarcasm = report.datasets.iter().find(|d| d.dataset_name == "Sarcasm").unwrap();
    let z = sarcasm.comparison.as_ref().unwrap().flip_z.as_ref().unwrap();
    assert!(close(z.statistic, -1.84, 0.01));
}

#[test]
fn report_without_benchmark_has_no_tests() {
    let report = build_report(&sarcasm_study(), None, &[]).unwrap();
    assert!(report.datasets[0].comparison.is_none());
    assert!(report.tlx.is_none());
    assert!(build_report(&[], None, &[]).is_err());
}

#[test]
fn sankey_rows_sum_to_population() {
    let s = flip_summary(&sarcasm_study(), "Sarcasm").unwrap();
    let csv = sankey_flip_csv(&s);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("source,target,count"));
    let total: u64 = lines
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 133);
}

// ---- oracle and property suites ----

fn arb_record() -> impl Strategy<Value = ExportRecord> {
    let label = prop_oneof![Just("A"), Just("B")];
    let post = prop_oneof![Just("A"), Just("B"), Just(NOT_SURE_LABEL)];
    let conf = (1i8..=3).prop_map(|o| ConfidenceLevel::from_ordinal(o).unwrap());
    let truth = proptest::option::of(prop_oneof![Just("A"), Just("B")]);
    (label, post, conf.clone(), conf, truth, 0u8..12, 0u16..500).prop_map(
        |(initial, post, pre_conf, post_conf, truth, dp, p)| {
            record(Row {
                participant: format!("p{p}"),
                dataset: "D",
                options: ["A", "B"],
                datapoint: format!("dp{dp}"),
                initial,
                post,
                pre_conf,
                post_conf,
                truth,
            })
        },
    )
}

/// Independent double-entry tally: one pass, no shared helpers.
struct Tally {
    retained: u64,
    flips: u64,
    not_sure: u64,
    conf: [[u64; 3]; 3],
}

fn tally(records: &[ExportRecord]) -> Tally {
    let mut t = Tally { retained: 0, flips: 0, not_sure: 0, conf: [[0; 3]; 3] };
    for r in records {
        let post = r.post_label.as_str();
        if post == NOT_SURE_LABEL {
            t.not_sure += 1;
        } else {
            t.retained += 1;
            if post != r.initial_label.as_str() {
                t.flips += 1;
            }
        }
        t.conf[r.initial_confidence as usize - 1][r.post_confidence as usize - 1] += 1;
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn flip_and_confidence_agree_with_tally(records in prop::collection::vec(arb_record(), 1..200)) {
        let t = tally(&records);
        let s = flip_summary(&records, "D").unwrap();
        prop_assert_eq!(s.total_n, records.len() as u64);
        prop_assert_eq!(s.retained_n, t.retained);
        prop_assert_eq!(s.flips_k, t.flips);
        if t.retained > 0 {
            prop_assert!((s.rate - t.flips as f64 / t.retained as f64).abs() < 1e-12);
        }
        let c = confidence_transitions(&records, ExclusionRule::None);
        prop_assert_eq!(c.counts, t.conf);
        prop_assert_eq!(c.total, records.len() as u64);
    }

    #[test]
    fn confusion_agrees_with_tally(records in prop::collection::vec(arb_record(), 1..200)) {
        let judged: Vec<&ExportRecord> = records
            .iter()
            .filter(|r| r.ground_truth.is_some() && r.post_label.as_str() != NOT_SURE_LABEL)
            .collect();
        for stage in [Stage::Initial, Stage::Post] {
            let result = confusion_report(&records, stage);
            if judged.is_empty() {
                continue;
            }
            let c = result.unwrap();
            let mut cells = [0u64; 4];
            for r in &judged {
                let truth_pos = r.ground_truth.as_deref() == Some("A");
                let label = match stage {
                    Stage::Initial => r.initial_label.as_str(),
                    Stage::Post => r.post_label.as_str(),
                };
                let said_pos = label == "A";
                let i = match (truth_pos, said_pos) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 3,
                };
                cells[i] += 1;
            }
            prop_assert_eq!([c.tp, c.fn_, c.fp, c.tn], cells);
            prop_assert_eq!(c.n, judged.len() as u64);
            prop_assert!((c.shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!((c.accuracy - (cells[0] + cells[3]) as f64 / c.n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn rates_are_scale_invariant(records in prop::collection::vec(arb_record(), 1..100), k in 2usize..5) {
        let scaled: Vec<ExportRecord> = records.iter().cycle().take(records.len() * k).cloned().collect();
        let a = flip_summary(&records, "D").unwrap();
        let b = flip_summary(&scaled, "D").unwrap();
        prop_assert_eq!(b.flips_k, a.flips_k * k as u64);
        prop_assert_eq!(b.retained_n, a.retained_n * k as u64);
        prop_assert!((a.rate - b.rate).abs() < 1e-12);
        let ca = confidence_transitions(&records, ExclusionRule::None);
        let cb = confidence_transitions(&scaled, ExclusionRule::None);
        prop_assert!((ca.high_share_pre - cb.high_share_pre).abs() < 1e-12);
        prop_assert!((ca.high_share_post - cb.high_share_post).abs() < 1e-12);
        if let (Ok(da), Ok(db)) = (datapoint_flip_stats(&records), datapoint_flip_stats(&scaled)) {
            prop_assert!((da.mean - db.mean).abs() < 1e-12);
        }
    }

    #[test]
    fn exclusion_rule_is_applied_consistently(records in prop::collection::vec(arb_record(), 1..200)) {
        let s = flip_summary(&records, "D").unwrap();
        let all = confidence_transitions(&records, ExclusionRule::None);
        let kept = confidence_transitions(&records, ExclusionRule::NotSurePost);
        prop_assert_eq!(kept.total, s.retained_n);
        prop_assert_eq!(all.total - kept.total, s.total_n - s.retained_n);
        let counted: u64 = datapoint_flip_stats(&records)
            .map(|d| d.stats.iter().map(|x| x.n_annotations).sum())
            .unwrap_or(0);
        prop_assert_eq!(counted, s.retained_n);
        let excluded: Vec<bool> = records.iter().map(|r| ExclusionRule::NotSurePost.excludes(r)).collect();
        for (r, ex) in records.iter().zip(excluded) {
            prop_assert_eq!(ex, r.post_label.as_str() == NOT_SURE_LABEL);
        }
    }

    #[test]
    fn confidence_changes_stay_in_range(records in prop::collection::vec(arb_record(), 1..100)) {
        for d in confidence_changes(&records) {
            prop_assert!((-2.0..=2.0).contains(&d));
        }
    }
}
