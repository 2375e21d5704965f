use std::path::Path;
use std::sync::Arc;

use socratic_cli::manifest::{store_datasets, Manifest};
use socratic_cli::script::AnnotatorScript;
use socratic_cli::simulate::{Simulation, SimulationOutcome};
use socratic_core::provider::{ScriptedBehavior, ScriptedProvider};
use socratic_core::store::Store;

fn data(file: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

fn store() -> Arc<Store> {
    let store = Arc::new(Store::in_memory());
    store_datasets(&store, &Manifest::load(&data("manifest.toml")).unwrap()).unwrap();
    store
}

async fn simulate(participants: usize, seed: u64, parallelism: usize, script: AnnotatorScript) -> SimulationOutcome {
    let provider = Arc::new(ScriptedProvider::new(ScriptedBehavior::socratic_default(seed)).unwrap());
    Simulation {
        participants,
        seed,
        parallelism,
        script,
        provider,
        turn: Default::default(),
    }
    .run(store())
    .await
    .unwrap()
}

fn sample_script() -> AnnotatorScript {
    AnnotatorScript::parse(&std::fs::read_to_string(data("annotator.toml")).unwrap()).unwrap()
}

#[tokio::test]
async fn one_participant_gives_two_records() {
    let out = simulate(1, 5, 1, AnnotatorScript::default()).await;
    assert_eq!(out.records.len(), 2);
    assert_eq!(out.surveys.len(), 1);
    let datasets: Vec<&str> = out.records.iter().map(|r| r.dataset_name.as_str()).collect();
    assert_eq!(datasets, ["Relation", "Sarcasm"]);
    assert!(out.records.iter().all(|r| r.annotator_message_count == 2 && r.deliberated));
    assert_eq!(out.histogram().get(&1), Some(&2));
    assert_eq!(out.histogram().get(&0), Some(&78));
}

#[tokio::test]
async fn coverage_fills_evenly() {
    let out = simulate(120, 7, 1, sample_script()).await;
    assert_eq!(out.records.len(), 240);
    assert_eq!(out.completed, 120);
    assert!(out.coverage.values().all(|&c| c == 3));
    assert!(out.render_histogram().contains("       3          80"));
}

#[tokio::test]
async fn export_depends_only_on_the_seed() {
    let a = simulate(30, 11, 1, sample_script()).await;
    let b = simulate(30, 11, 6, sample_script()).await;
    assert_eq!(a.export, b.export);
    assert_eq!(a.surveys_jsonl(), b.surveys_jsonl());
    let c = simulate(30, 12, 1, sample_script()).await;
    assert_ne!(a.export, c.export);
}

#[tokio::test]
async fn failing_both_checks_disqualifies() {
    let mut script = AnnotatorScript::default();
    script.attention.answers = ["Blue".into(), "Rain".into()];
    let out = simulate(4, 1, 2, script.clone()).await;
    assert_eq!((out.completed, out.disqualified), (0, 4));
    assert!(out.records.is_empty());
    assert!(out.coverage.values().all(|&c| c == 0));

    script.attention.answers[1] = "Sunshine".into();
    let out = simulate(4, 1, 2, script).await;
    assert_eq!((out.completed, out.disqualified), (4, 0));
}

#[tokio::test]
async fn exhausted_fixed_script_repeats_its_last_reply() {
    let mut script = AnnotatorScript::default();
    for k in 3..=5 {
        script.chat.insert(k.to_string(), format!("Turn {k}."));
    }
    let provider = Arc::new(
        ScriptedProvider::new(ScriptedBehavior {
            mode: socratic_core::provider::ScriptMode::FixedScript {
                replies: vec!["Why?".into(), "What else?".into()],
            },
            seed: 0,
        })
        .unwrap(),
    );
    let out = Simulation {
        participants: 2,
        seed: 3,
        parallelism: 1,
        script,
        provider,
        turn: Default::default(),
    }
    .run(store())
    .await
    .unwrap();
    for r in &out.records {
        assert_eq!(r.annotator_message_count, 5);
        assert_eq!(r.socratic_char_counts, [4, 10, 10, 10, 10]);
    }
}
