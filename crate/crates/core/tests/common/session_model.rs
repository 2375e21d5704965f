//! Independent model of the session workflow and a driver that replays
//! random event interleavings against both the model and the engine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socratic_core::clock::from_millis;
use socratic_core::domain::*;
use socratic_core::ids::DatapointId;
use socratic_core::questions::ATTENTION_CHECKS;
use socratic_core::session::*;

#[derive(Debug, Clone, Copy)]
pub enum Event {
    Initial(u8),
    Attention(u8, bool),
    Confirm,
    Chat(u8),
    Reannotate(u8),
    Break,
    Survey,
    Flag,
}

/// Phases by position: the same order the workflow is documented in,
/// written out by hand rather than derived from `successor`.
pub const PATH: [&str; 11] = [
    "annotate(1)",
    "annotate(2)",
    "confirm",
    "discuss(1)",
    "reannotate(1)",
    "break",
    "discuss(2)",
    "reannotate(2)",
    "survey",
    "done",
    "",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Active,
    Completed,
    Disqualified,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub at: usize,
    pub attention: [Option<bool>; 2],
    pub messages: [u32; 2],
    pub status: Status,
}

impl Model {
    pub fn new() -> Self {
        Self { at: 0, attention: [None, None], messages: [0, 0], status: Status::Active }
    }

    pub fn phase(&self) -> &'static str {
        PATH[self.at]
    }

    /// Applies `e` if it is legal and reports whether it was.
    pub fn apply(&mut self, e: Event) -> bool {
        if self.status != Status::Active {
            return false;
        }
        let p = self.phase();
        let item_phase = |name: &str, i: u8| p == format!("{name}({i})");
        match e {
            Event::Initial(i) => {
                if item_phase("annotate", i) {
                    self.at += 1;
                    return true;
                }
                false
            }
            Event::Attention(k, correct) => {
                let shown = match self.at {
                    0 => k == 1,
                    1 | 2 => true,
                    _ => false,
                };
                if !shown || self.attention[usize::from(k - 1)].is_some() {
                    return false;
                }
                self.attention[usize::from(k - 1)] = Some(correct);
                if self.attention == [Some(false), Some(false)] {
                    self.status = Status::Disqualified;
                }
                true
            }
            Event::Confirm => {
                if p == "confirm" && self.attention.iter().all(Option::is_some) {
                    self.at += 1;
                    return true;
                }
                false
            }
            Event::Chat(i) => {
                if item_phase("discuss", i) || item_phase("reannotate", i) {
                    self.messages[usize::from(i - 1)] += 1;
                    if item_phase("discuss", i) && self.messages[usize::from(i - 1)] >= 2 {
                        self.at += 1;
                    }
                    return true;
                }
                false
            }
            Event::Reannotate(i) => {
                if item_phase("reannotate", i) {
                    self.at += 1;
                    return true;
                }
                false
            }
            Event::Break => {
                if p == "break" {
                    self.at += 1;
                    return true;
                }
                false
            }
            Event::Survey => {
                if p == "survey" {
                    self.at += 1;
                    self.status = Status::Completed;
                    return true;
                }
                false
            }
            Event::Flag => {
                self.status = Status::Disqualified;
                true
            }
        }
    }

    /// An event that moves the workflow forward from here.
    pub fn suggestion(&self, correct: bool) -> Event {
        match self.phase() {
            "annotate(1)" => Event::Initial(1),
            "annotate(2)" => Event::Initial(2),
            "confirm" => match self.attention.iter().position(Option::is_none) {
                Some(k) => Event::Attention(k as u8 + 1, correct),
                None => Event::Confirm,
            },
            "discuss(1)" => Event::Chat(1),
            "reannotate(1)" => Event::Reannotate(1),
            "break" => Event::Break,
            "discuss(2)" => Event::Chat(2),
            "reannotate(2)" => Event::Reannotate(2),
            "survey" => Event::Survey,
            _ => Event::Flag,
        }
    }
}

fn dataset(id: &str, options: [&str; 2]) -> Dataset {
    let mut ds = Dataset::new(id.into(), id, "context", options.map(String::from)).unwrap();
    ds.datapoints = vec![DatapointId::from(format!("{id}-1"))];
    ds
}

pub struct World {
    pub datasets: [Dataset; 2],
    pub session: Session,
    clock: i64,
}

impl World {
    pub fn new() -> Self {
        let datasets = [dataset("sarcasm", ["Sarcastic", "Not Sarcastic"]), dataset("relation", ["Expressed", "Not Expressed"])];
        let assignments = [
            Assignment { dataset_id: "sarcasm".into(), datapoint_id: "sarcasm-1".into() },
            Assignment { dataset_id: "relation".into(), datapoint_id: "relation-1".into() },
        ];
        let session = Session::new("s".into(), "p".into(), assignments, from_millis(0));
        Self { datasets, session, clock: 0 }
    }

    pub fn dp(&self, item: u8) -> DatapointId {
        self.session.assignment(item).datapoint_id.clone()
    }

    pub fn apply(&mut self, e: Event) -> bool {
        self.clock += 1000;
        let now = from_millis(self.clock);
        let s = &mut self.session;
        match e {
            Event::Initial(i) => {
                let dp = self.datasets[usize::from(i - 1)].datapoints[0].clone();
                let input = InitialInput {
                    label: self.datasets[usize::from(i - 1)].label_options[0].clone(),
                    confidence: ConfidenceLevel::SomewhatSure,
                    answers: InitialAnswers {
                        discussion_would_help: true,
                        agreement_expectation: AgreementExpectation::HalfAgree,
                    },
                };
                s.submit_initial(&self.datasets[usize::from(i - 1)], &dp, input, "a".into(), now).is_ok()
            }
            Event::Attention(k, correct) => {
                let check = &ATTENTION_CHECKS[usize::from(k - 1)];
                let option = if correct {
                    check.correct_option
                } else {
                    *check.options.iter().find(|o| **o != check.correct_option).unwrap()
                };
                s.record_attention_check(k, option, now).is_ok()
            }
            Event::Confirm => s.confirm_proceed(now).is_ok(),
            Event::Chat(i) => {
                let dp = self.dp(i);
                self.session.record_annotator_message(&dp, now).is_ok()
            }
            Event::Reannotate(i) => {
                let dp = self.dp(i);
                let input = PostInput {
                    label: NOT_SURE_LABEL.into(),
                    confidence: ConfidenceLevel::VerySure,
                    answers: PostAnswers {
                        discussion_helped: true,
                        doubted: false,
                        changed_self_report: false,
                        process_feeling: String::new(),
                        outcome_feeling: String::new(),
                    },
                };
                let ds = self.datasets[usize::from(i - 1)].clone();
                self.session.submit_reannotation(&ds, &dp, input, "b".into(), now).is_ok()
            }
            Event::Break => s.acknowledge_break(now).is_ok(),
            Event::Survey => {
                let response = SurveyResponse {
                    session_id: s.id.clone(),
                    tlx: TlxScores { mental: 5, temporal: 5, performance: 5, effort: 5, frustration: 5 },
                    q1_importance: Importance::SomewhatImportant,
                    q2_opinions: String::new(),
                    q3_prior_deliberation: false,
                    q4_prior_helpfulness: None,
                    q5_vs_human: None,
                    q6_would_use: WouldUse::Yes,
                    q7_why: String::new(),
                    q8_feedback: String::new(),
                };
                s.submit_survey(&response, now).is_ok()
            }
            Event::Flag => {
                let before = s.status;
                s.flag_disqualification(DisqualificationReason::Misconduct, now);
                before == ParticipantStatus::Active
            }
        }
    }
}

#[derive(Default, Debug)]
pub struct Outcome {
    pub completed: bool,
    pub disqualified_by_checks: bool,
}

pub fn check_invariants(w: &World, m: &Model) -> Result<(), String> {
    let s = &w.session;
    if s.phase.to_string() != m.phase() {
        return Err(format!("phase {} but model says {}", s.phase, m.phase()));
    }
    for (i, gate) in s.gates.iter().enumerate() {
        if gate.annotator_message_count != m.messages[i] {
            return Err(format!("gate {i} counted {} messages, model {}", gate.annotator_message_count, m.messages[i]));
        }
        if gate.unlocked != (gate.annotator_message_count >= MIN_ANNOTATOR_MESSAGES) {
            return Err(format!("gate {i} unlocked={} with {} messages", gate.unlocked, gate.annotator_message_count));
        }
    }
    // re-annotation accepted implies the gate was open
    for i in 0..2 {
        if s.post_submitted[i] && !s.gates[i].unlocked {
            return Err(format!("item {} re-annotated with a locked gate", i + 1));
        }
    }
    let status_ok = matches!(
        (&m.status, s.status),
        (Status::Active, ParticipantStatus::Active)
            | (Status::Completed, ParticipantStatus::Completed)
            | (Status::Disqualified, ParticipantStatus::Disqualified(_))
    );
    if !status_ok {
        return Err(format!("status {:?}, model {:?}", s.status, m.status));
    }
    let path = SessionPhase::path();
    for (n, change) in s.phase_log.iter().enumerate() {
        if change.from != path[n] || change.to != path[n + 1] {
            return Err(format!("illegal logged transition {} -> {}", change.from, change.to));
        }
    }
    Ok(())
}

/// Runs one interleaving; `steps` are (guided, event, correct) triples.
pub fn run(steps: &[(bool, Event, bool)]) -> Result<Outcome, String> {
    let mut w = World::new();
    let mut m = Model::new();
    for &(guided, event, correct) in steps {
        let event = if guided { m.suggestion(correct) } else { event };
        let expected = m.apply(event);
        let accepted = w.apply(event);
        if accepted != expected {
            return Err(format!("{event:?} in {}: accepted={accepted}, model={expected}", w.session.phase));
        }
        check_invariants(&w, &m)?;
        let dq_by_checks = matches!(
            w.session.status,
            ParticipantStatus::Disqualified(DisqualificationReason::FailedBothAttentionChecks)
        );
        let both_wrong = w.session.attention.iter().all(|a| a.as_ref().is_some_and(|a| !a.correct));
        if dq_by_checks != both_wrong {
            return Err(format!("attention disqualification {dq_by_checks} with answers {:?}", w.session.attention));
        }
    }
    Ok(Outcome {
        completed: w.session.status == ParticipantStatus::Completed,
        disqualified_by_checks: matches!(
            w.session.status,
            ParticipantStatus::Disqualified(DisqualificationReason::FailedBothAttentionChecks)
        ),
    })
}

pub fn random_event(rng: &mut ChaCha8Rng) -> Event {
    let item = rng.random_range(1..=2u8);
    match rng.random_range(0..15) {
        0 | 1 => Event::Initial(item),
        2 | 3 => Event::Attention(item, rng.random_bool(0.5)),
        4 => Event::Confirm,
        5..=7 => Event::Chat(item),
        8 | 9 => Event::Reannotate(item),
        10 => Event::Break,
        11 | 12 => Event::Survey,
        13 => Event::Chat(item),
        _ => {
            if rng.random_bool(0.2) {
                Event::Flag
            } else {
                Event::Initial(item)
            }
        }
    }
}


/// `cases` random interleavings from one seed. Returns how many sessions
/// completed and how many were disqualified by the attention checks.
pub fn run_interleavings(cases: usize, seed: u64) -> Result<(usize, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut completed, mut disqualified) = (0, 0);
    for case in 0..cases {
        let guided_share = rng.random_range(0.5..1.0);
        let len = rng.random_range(5..60);
        let steps: Vec<(bool, Event, bool)> = (0..len)
            .map(|_| (rng.random_bool(guided_share), random_event(&mut rng), rng.random_bool(0.7)))
            .collect();
        let outcome = run(&steps).map_err(|e| format!("case {case}: {e}\n{steps:?}"))?;
        completed += usize::from(outcome.completed);
        disqualified += usize::from(outcome.disqualified_by_checks);
    }
    Ok((completed, disqualified))
}
