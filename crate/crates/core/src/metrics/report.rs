use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use socratic_stats::{
    mann_whitney_u, pooled_t_test, two_proportion_z, wilcoxon_signed_rank, Summary, TestResult,
};

use super::{
    confidence_changes, confidence_transitions, confusion_report, datapoint_flip_stats,
    engagement_stats, flip_summary, paired_rate_difference, pct, tlx_aggregate,
    ConfidenceTransition, ConfusionReport, DatapointFlipReport, EngagementStats, ExclusionRule,
    FlipSummary, PairedDifference, TlxAggregate,
};
use crate::domain::{ConfidenceLevel, Stage, TlxScores};
use crate::error::{Error, Result};
use crate::store::ExportRecord;

/// Every single-population metric for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationReport {
    pub flips: FlipSummary,
    pub datapoint_flips: Option<DatapointFlipReport>,
    /// Initial and post matrices; absent without ground truth.
    pub confusion: Option<[ConfusionReport; 2]>,
    pub confidence: ConfidenceTransition,
    /// `post - pre` confidence change.
    pub confidence_change: Option<Summary>,
    pub engagement: Option<EngagementStats>,
}

impl PopulationReport {
    pub fn compute(records: &[ExportRecord], dataset: &str) -> Result<Self> {
        let records: Vec<ExportRecord> = records
            .iter()
            .filter(|r| r.dataset_name == dataset)
            .cloned()
            .collect();
        let confusion = if records.iter().any(|r| r.ground_truth.is_some()) {
            Some([
                confusion_report(&records, Stage::Initial)?,
                confusion_report(&records, Stage::Post)?,
            ])
        } else {
            None
        };
        Ok(Self {
            flips: flip_summary(&records, dataset)?,
            datapoint_flips: datapoint_flip_stats(&records).ok(),
            confusion,
            confidence: confidence_transitions(&records, ExclusionRule::None),
            confidence_change: Summary::of(&confidence_changes(&records)),
            engagement: engagement_stats(&records),
        })
    }
}

/// Study-versus-benchmark tests for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Annotation-level flip rates.
    pub flip_z: Option<TestResult>,
    /// Datapoint-level rates, unpaired.
    pub datapoint_mwu: Option<TestResult>,
    /// Datapoint-level rates paired by datapoint.
    pub datapoint_wilcoxon: Option<TestResult>,
    pub paired_difference: Option<PairedDifference>,
    /// Confidence change, with Cohen's d as the effect size.
    pub confidence_t: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub dataset_name: String,
    pub study: PopulationReport,
    pub benchmark: Option<PopulationReport>,
    pub comparison: Option<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub datasets: Vec<DatasetReport>,
    pub tlx: Option<TlxAggregate>,
    /// Tests that could not be run, with the reason.
    pub notes: Vec<String>,
}

fn keep<T>(notes: &mut Vec<String>, what: &str, r: std::result::Result<T, impl std::fmt::Display>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{what}: {e}"));
            None
        }
    }
}

pub fn build_report(
    study: &[ExportRecord],
    benchmark: Option<&[ExportRecord]>,
    surveys: &[TlxScores],
) -> Result<ComparisonReport> {
    if study.is_empty() {
        return Err(Error::Validation("study has no records".into()));
    }
    let mut notes = Vec::new();
    let names: BTreeSet<&str> = study.iter().map(|r| r.dataset_name.as_str()).collect();
    let mut datasets = Vec::new();
    for name in names {
        let study_pop = PopulationReport::compute(study, name)?;
        let bench_pop = benchmark.and_then(|b| {
            keep(&mut notes, &format!("{name} benchmark"), PopulationReport::compute(b, name))
        });
        let comparison = match (benchmark, &bench_pop) {
            (Some(bench), Some(bp)) => Some(compare(name, study, bench, &study_pop, bp, &mut notes)),
            _ => None,
        };
        datasets.push(DatasetReport {
            dataset_name: name.to_string(),
            study: study_pop,
            benchmark: bench_pop,
            comparison,
        });
    }
    let tlx = if surveys.is_empty() {
        None
    } else {
        Some(tlx_aggregate(surveys)?)
    };
    Ok(ComparisonReport {
        datasets,
        tlx,
        notes,
    })
}

fn compare(
    name: &str,
    study: &[ExportRecord],
    bench: &[ExportRecord],
    sp: &PopulationReport,
    bp: &PopulationReport,
    notes: &mut Vec<String>,
) -> Comparison {
    let flip_z = keep(
        notes,
        &format!("{name} flip z-test"),
        two_proportion_z(sp.flips.flips_k, sp.flips.retained_n, bp.flips.flips_k, bp.flips.retained_n),
    );
    let rates = |r: &Option<DatapointFlipReport>| {
        r.as_ref()
            .map(|d| d.stats.iter().map(|s| s.r).collect::<Vec<_>>())
            .unwrap_or_default()
    };
    let datapoint_mwu = keep(
        notes,
        &format!("{name} datapoint MWU"),
        mann_whitney_u(&rates(&sp.datapoint_flips), &rates(&bp.datapoint_flips)),
    );
    let paired = match (&sp.datapoint_flips, &bp.datapoint_flips) {
        (Some(s), Some(b)) => keep(
            notes,
            &format!("{name} paired rates"),
            paired_rate_difference(&s.stats, &b.stats),
        ),
        _ => None,
    };
    let datapoint_wilcoxon = paired.as_ref().and_then(|p| {
        let diffs: Vec<f64> = p.differences.iter().map(|(_, d)| *d).collect();
        keep(
            notes,
            &format!("{name} datapoint Wilcoxon"),
            wilcoxon_signed_rank(&diffs, &vec![0.0; diffs.len()]),
        )
    });
    let pick = |rs: &[ExportRecord]| -> Vec<ExportRecord> {
        rs.iter().filter(|r| r.dataset_name == name).cloned().collect()
    };
    let confidence_t = keep(
        notes,
        &format!("{name} confidence t-test"),
        pooled_t_test(&confidence_changes(&pick(study)), &confidence_changes(&pick(bench))),
    );
    Comparison {
        flip_z,
        datapoint_mwu,
        datapoint_wilcoxon,
        paired_difference: paired,
        confidence_t,
    }
}

fn test_line(label: &str, t: &Option<TestResult>) -> String {
    match t {
        None => format!("  {label}: not available\n"),
        Some(t) => {
            let df = t.df.map(|d| format!("({d})")).unwrap_or_default();
            let d = t
                .effect_size
                .map(|d| format!(", d = {d:.2}"))
                .unwrap_or_default();
            format!(
                "  {label}: {}{df} = {:.2}, p = {:.4} (n = {}, {}){d}\n",
                t.test_name, t.statistic, t.p_value, t.n1, t.n2
            )
        }
    }
}

/// Plain-text tables: flip rates, tests, confusion matrices, confidence,
/// engagement and task load.
pub fn render_text(report: &ComparisonReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "FLIP RATES (Not Sure excluded)");
    let _ = writeln!(
        s,
        "{:<16} {:<10} {:>9} {:>6} {:>10} {:>14}",
        "dataset", "source", "retained", "flips", "rate", "by datapoint"
    );
    for d in &report.datasets {
        let pops = [("study", Some(&d.study)), ("benchmark", d.benchmark.as_ref())];
        for (source, pop) in pops {
            let Some(p) = pop else { continue };
            let by_dp = p
                .datapoint_flips
                .as_ref()
                .map(|f| format!("{}%", pct(f.mean)))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<16} {:<10} {:>9} {:>6} {:>9}% {:>14}",
                d.dataset_name,
                source,
                p.flips.retained_n,
                p.flips.flips_k,
                pct(p.flips.rate),
                by_dp
            );
        }
    }
    for d in &report.datasets {
        if let Some(c) = &d.comparison {
            let _ = writeln!(s, "\nTESTS: {}", d.dataset_name);
            s.push_str(&test_line("annotation flips", &c.flip_z));
            s.push_str(&test_line("datapoint rates", &c.datapoint_mwu));
            s.push_str(&test_line("datapoint rates (paired)", &c.datapoint_wilcoxon));
            s.push_str(&test_line("confidence change (post - pre)", &c.confidence_t));
            if let Some(p) = &c.paired_difference {
                let _ = writeln!(s, "  mean paired rate difference: {:.4}", p.mean);
            }
        }
    }
    for d in &report.datasets {
        let pops = [("study", Some(&d.study)), ("benchmark", d.benchmark.as_ref())];
        for (source, pop) in pops {
            let Some([pre, post]) = pop.and_then(|p| p.confusion.as_ref()) else {
                continue;
            };
            let _ = writeln!(
                s,
                "\nGROUND TRUTH: {} {source} (n = {}, positive = {})",
                d.dataset_name, pre.n, pre.positive_label
            );
            let _ = writeln!(
                s,
                "{:<8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>8}",
                "stage", "TP", "FN", "FP", "TN", "accuracy", "FP rate"
            );
            for c in [pre, post] {
                let stage = match c.stage {
                    Stage::Initial => "initial",
                    Stage::Post => "post",
                };
                let _ = writeln!(
                    s,
                    "{:<8} {:>7}% {:>7}% {:>7}% {:>7}% {:>8}% {:>7}%",
                    stage,
                    pct(c.shares[0]),
                    pct(c.shares[1]),
                    pct(c.shares[2]),
                    pct(c.shares[3]),
                    pct(c.accuracy),
                    pct(c.false_positive_rate)
                );
            }
        }
    }
    let _ = writeln!(s, "\nCONFIDENCE");
    for d in &report.datasets {
        let c = &d.study.confidence;
        let change = d
            .study
            .confidence_change
            .map(|m| format!("{:+.3}", m.mean))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<16} n = {:<5} high before {}%  high after {}%  somewhat -> very {}%  mean change {change}",
            d.dataset_name,
            c.total,
            pct(c.high_share_pre),
            pct(c.high_share_post),
            pct(c.share(ConfidenceLevel::SomewhatSure, ConfidenceLevel::VerySure)),
        );
    }
    let _ = writeln!(s, "\nENGAGEMENT (opener excluded)");
    for d in &report.datasets {
        match &d.study.engagement {
            None => {
                let _ = writeln!(s, "{:<16} no deliberated items", d.dataset_name);
            }
            Some(e) => {
                let chars = |x: &Option<Summary>| {
                    x.map(|x| format!("{:.1} (sd {:.1})", x.mean, x.sd))
                        .unwrap_or_else(|| "-".into())
                };
                let _ = writeln!(
                    s,
                    "{:<16} messages {:.2} (sd {:.2})  annotator chars {}  socratic chars {}",
                    d.dataset_name,
                    e.messages.mean,
                    e.messages.sd,
                    chars(&e.annotator_chars),
                    chars(&e.socratic_chars)
                );
            }
        }
    }
    if let Some(t) = &report.tlx {
        let _ = writeln!(s, "\nTASK LOAD (1-21, n = {})", t.n);
        for (name, m) in &t.items {
            let _ = writeln!(s, "{:<12} mean {:.1}  sd {:.1}", name, m.mean, m.sd);
        }
    }
    if !report.notes.is_empty() {
        let _ = writeln!(s, "\nNOTES");
        for n in &report.notes {
            let _ = writeln!(s, "- {n}");
        }
    }
    s
}

/// `source,target,count` edges from initial to post labels.
pub fn sankey_flip_csv(summary: &FlipSummary) -> String {
    let mut s = String::from("source,target,count\n");
    let targets = [
        summary.label_options[0].as_str(),
        summary.label_options[1].as_str(),
        crate::domain::NOT_SURE_LABEL,
    ];
    for (i, row) in summary.transitions.iter().enumerate() {
        for (j, count) in row.iter().enumerate() {
            let _ = writeln!(
                s,
                "initial: {},post: {},{count}",
                summary.label_options[i], targets[j]
            );
        }
    }
    s
}

/// `source,target,count` edges from initial to post confidence.
pub fn sankey_confidence_csv(t: &ConfidenceTransition) -> String {
    let mut s = String::from("source,target,count\n");
    for pre in ConfidenceLevel::ALL {
        for post in ConfidenceLevel::ALL {
            let count = t.counts[(pre.ordinal() - 1) as usize][(post.ordinal() - 1) as usize];
            let _ = writeln!(s, "before: {pre},after: {post},{count}");
        }
    }
    s
}
