//! Record fixtures reconstructed from published aggregates.
//!
//! Each builder produces plain export records whose counts were derived by
//! hand (see the comments); the tests recompute the aggregates from them.

#![allow(dead_code)]

pub mod corpus;
pub mod prompt_golden;
pub mod session_model;

use socratic_core::domain::{ConfidenceLevel, Label, TlxScores, NOT_SURE_LABEL};
use socratic_core::store::{ExportRecord, RecordSource, SCHEMA_VERSION};

pub const SARCASM: [&str; 2] = ["Sarcastic", "Not Sarcastic"];
pub const RELATION: [&str; 2] = ["Expressed", "Not Expressed"];

pub struct Row<'a> {
    pub participant: String,
    pub dataset: &'a str,
    pub options: [&'a str; 2],
    pub datapoint: String,
    pub initial: &'a str,
    pub post: &'a str,
    pub pre_conf: ConfidenceLevel,
    pub post_conf: ConfidenceLevel,
    pub truth: Option<&'a str>,
}

pub fn record(row: Row<'_>) -> ExportRecord {
    ExportRecord {
        schema_version: SCHEMA_VERSION,
        source: RecordSource::Study,
        participant_id: row.participant.into(),
        dataset_name: row.dataset.to_string(),
        label_options: row.options.map(String::from),
        datapoint_id: row.datapoint.into(),
        ground_truth: row.truth.map(String::from),
        initial_label: Label::parse(row.initial),
        initial_confidence: row.pre_conf,
        post_label: Label::parse(row.post),
        post_confidence: row.post_conf,
        discussion_would_help: None,
        agreement_expectation: None,
        discussion_helped: None,
        doubted: None,
        changed_self_report: None,
        deliberated: true,
        annotator_message_count: 2,
        annotator_char_counts: vec![40, 60],
        socratic_char_counts: vec![120, 150],
        initial_at: None,
        post_at: None,
    }
}

fn simple(dataset: &'static str, options: [&'static str; 2], n: usize, dp: String, initial: &'static str, post: &'static str) -> ExportRecord {
    record(Row {
        participant: format!("{dataset}-p{n:04}"),
        dataset,
        options,
        datapoint: dp,
        initial,
        post,
        pre_conf: ConfidenceLevel::SomewhatSure,
        post_conf: ConfidenceLevel::VerySure,
        truth: None,
    })
}

/// Datapoints with `count` retained annotations and `flips` flips each,
/// given as (how many datapoints, annotations each, flips each), plus
/// `not_sure` extra "Not Sure" annotations spread over the first
/// datapoints.
fn datapoint_fixture(
    dataset: &'static str,
    options: [&'static str; 2],
    groups: &[(usize, usize, usize)],
    not_sure: usize,
) -> Vec<ExportRecord> {
    let mut out = Vec::new();
    let mut dp_index = 0;
    let mut n = 0;
    for &(datapoints, annotations, flips) in groups {
        for _ in 0..datapoints {
            dp_index += 1;
            let dp = format!("{}-{dp_index:02}", dataset.to_lowercase());
            for a in 0..annotations {
                n += 1;
                let (initial, post) = if a < flips {
                    (options[0], options[1])
                } else {
                    (options[a % 2], options[a % 2])
                };
                out.push(simple(dataset, options, n, dp.clone(), initial, post));
            }
        }
    }
    for i in 0..not_sure {
        n += 1;
        let dp = format!("{}-{:02}", dataset.to_lowercase(), i + 1);
        out.push(simple(dataset, options, n, dp, options[0], NOT_SURE_LABEL));
    }
    out
}

/// 133 Sarcasm annotations over 40 datapoints: 3 "Not Sure", 130 retained,
/// 8 flips (6.15%). Datapoints: 31 with 3 annotations (5 of them with one
/// flip), 8 with 4 (2 with one flip), 1 with 5 (one flip), so the mean
/// datapoint rate is (5/3 + 2/4 + 1/5) / 40 = 5.92%.
pub fn sarcasm_study() -> Vec<ExportRecord> {
    datapoint_fixture(
        "Sarcasm",
        SARCASM,
        &[(5, 3, 1), (26, 3, 0), (2, 4, 1), (6, 4, 0), (1, 5, 1)],
        3,
    )
}

/// 133 Relation annotations over 40 datapoints: 3 "Not Sure", 130
/// retained, 31 flips (23.85%). Datapoints: 34 with 3 annotations (25 with
/// one flip), 4 with 4 (each one flip), 1 with 5 (one flip), 1 with 7 (one
/// flip): mean (25/3 + 4/4 + 1/5 + 1/7) / 40 = 24.19%.
pub fn relation_study() -> Vec<ExportRecord> {
    datapoint_fixture(
        "Relation",
        RELATION,
        &[(25, 3, 1), (9, 3, 0), (4, 4, 1), (1, 5, 1), (1, 7, 1)],
        3,
    )
}

/// Benchmark-side annotation counts: `k` flips out of `retained`, plus
/// `excluded` "Irresolvable" rows.
pub fn benchmark_population(dataset: &'static str, options: [&'static str; 2], retained: usize, k: usize, excluded: usize) -> Vec<ExportRecord> {
    let mut out = Vec::new();
    for i in 0..retained + excluded {
        let dp = format!("{}-{:02}", dataset.to_lowercase(), i % 40 + 1);
        let (initial, post) = if i < k {
            (options[1], options[0])
        } else if i >= retained {
            (options[0], NOT_SURE_LABEL)
        } else {
            (options[i % 2], options[i % 2])
        };
        let mut r = simple(dataset, options, i, dp, initial, post);
        r.source = RecordSource::Benchmark;
        r.participant_id = format!("b{i:05}").into();
        out.push(r);
    }
    out
}

/// 71 Relation annotations with ground truth plus 2 with a "Not Sure" post
/// label that every confusion matrix must drop.
///
/// Truth Expressed (26): 17 stay Expressed, 1 Expressed -> Not Expressed,
/// 8 stay Not Expressed. Truth Not Expressed (45): 16 stay Expressed,
/// 9 Expressed -> Not Expressed, 20 stay Not Expressed.
/// Initial: TP 18, FN 8, FP 25, TN 20. Post: TP 17, FN 9, FP 16, TN 29.
pub fn relation_ground_truth() -> Vec<ExportRecord> {
    let [e, ne] = RELATION;
    let plan: [(&str, &str, &str, usize); 8] = [
        (e, e, e, 17),
        (e, e, ne, 1),
        (e, ne, ne, 8),
        (ne, e, e, 16),
        (ne, e, ne, 9),
        (ne, ne, ne, 20),
        (e, e, NOT_SURE_LABEL, 1),
        (ne, ne, NOT_SURE_LABEL, 1),
    ];
    let mut out = Vec::new();
    for (truth, initial, post, count) in plan {
        for _ in 0..count {
            let n = out.len();
            out.push(record(Row {
                participant: format!("gt-p{n:03}"),
                dataset: "Relation",
                options: RELATION,
                datapoint: format!("relation-gt{:02}", n % 25),
                initial,
                post,
                pre_conf: ConfidenceLevel::SomewhatSure,
                post_conf: ConfidenceLevel::VerySure,
                truth: Some(truth),
            }));
        }
    }
    out
}

/// 266 annotations: 153 start Very Sure (152 stay, 1 drops to Somewhat),
/// 103 start Somewhat Sure (75 rise to Very Sure, 28 stay), 10 start Not
/// Sure and rise to Somewhat. Very Sure share: 153/266 before, 227/266
/// after; Somewhat -> Very is 75/266.
pub fn confidence_population() -> Vec<ExportRecord> {
    use ConfidenceLevel::*;
    let plan = [
        (VerySure, VerySure, 152),
        (VerySure, SomewhatSure, 1),
        (SomewhatSure, VerySure, 75),
        (SomewhatSure, SomewhatSure, 28),
        (NotSure, SomewhatSure, 10),
    ];
    let mut out = Vec::new();
    for (pre, post, count) in plan {
        for _ in 0..count {
            let n = out.len();
            let (dataset, options) = if n % 2 == 0 {
                ("Sarcasm", SARCASM)
            } else {
                ("Relation", RELATION)
            };
            // a few "Not Sure" labels: confidence is still counted
            let post_label = if n % 50 == 0 { NOT_SURE_LABEL } else { options[0] };
            out.push(record(Row {
                participant: format!("c{n:03}"),
                dataset,
                options,
                datapoint: format!("dp{:02}", n % 40),
                initial: options[0],
                post: post_label,
                pre_conf: pre,
                post_conf: post,
                truth: None,
            }));
        }
    }
    out
}

/// Five surveys whose mental-demand item has mean 8.8 and sd 5.3.
pub fn tlx_surveys() -> Vec<TlxScores> {
    [1, 6, 11, 12, 14]
        .into_iter()
        .map(|mental| TlxScores {
            mental,
            temporal: 4,
            performance: 3,
            effort: 10,
            frustration: 3,
        })
        .collect()
}
