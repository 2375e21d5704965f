//! Headless studies: scripted participants driven through the public API.
//!
//! Sessions are created one after another, so datapoint assignment and
//! session ids depend only on the seed. Each participant then runs on its
//! own virtual timeline with its own RNG seeded from (seed, index), which
//! keeps exports byte-identical at any parallelism.

use std::cell::Cell;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use axum::http::Method;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use socratic_core::clock::{from_millis, Clock, SteppingClock, Timestamp};
use socratic_core::dialogue::TurnConfig;
use socratic_core::domain::SurveyResponse;
use socratic_core::ids::{DatapointId, IdGenerator};
use socratic_core::provider::ChatProvider;
use socratic_core::service::{ChatReply, StudyService};
use socratic_core::session::SessionPhase;
use socratic_core::store::{read_jsonl, ExportRecord, Store};
use socratic_core::view::SessionView;
use socratic_server::{
    router, AnnotationBody, AppState, AttentionBody, AttentionReply, ChatBody, CreateSessionBody,
    ReannotationBody,
};
use tokio::sync::Semaphore;
use tokio::task::JoinSet;

use crate::client::ApiClient;
use crate::error::{CliError, Result};
use crate::script::AnnotatorScript;

/// 2024-01-01T00:00:00Z.
const EPOCH_MS: i64 = 1_704_067_200_000;
const STEP_MS: i64 = 1_000;
const LANE_MS: i64 = 3_600_000;
const MAX_STEPS: usize = 64;
const ADMIN_TOKEN: &str = "simulation";

tokio::task_local! {
    static LANE: Cell<i64>;
}

/// Reads the current participant's timeline, or a shared stepping clock
/// outside any participant task.
struct LaneClock {
    shared: SteppingClock,
}

impl Clock for LaneClock {
    fn now(&self) -> Timestamp {
        LANE.try_with(|t| {
            let now = t.get();
            t.set(now + STEP_MS);
            from_millis(now)
        })
        .unwrap_or_else(|_| self.shared.now())
    }
}

pub struct Simulation {
    pub participants: usize,
    pub seed: u64,
    pub parallelism: usize,
    pub script: AnnotatorScript,
    pub provider: Arc<dyn ChatProvider>,
    pub turn: TurnConfig,
}

#[derive(Debug)]
pub struct SimulationOutcome {
    /// The study export exactly as served by the API (JSONL).
    pub export: Vec<u8>,
    pub records: Vec<ExportRecord>,
    pub surveys: Vec<SurveyResponse>,
    pub completed: usize,
    pub disqualified: usize,
    /// Live sessions holding each datapoint, zeros included.
    pub coverage: BTreeMap<DatapointId, u32>,
}

impl SimulationOutcome {
    /// Number of datapoints at each coverage level.
    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for c in self.coverage.values() {
            *h.entry(*c).or_default() += 1;
        }
        h
    }

    pub fn render_histogram(&self) -> String {
        let mut s = String::from("coverage  datapoints\n");
        for (c, n) in self.histogram() {
            let _ = writeln!(s, "{c:>8}  {n:>10}  {}", "#".repeat(n.min(60)));
        }
        s
    }

    /// Surveys as JSONL, one response per line.
    pub fn surveys_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for s in &self.surveys {
            serde_json::to_writer(&mut out, s).expect("survey serializes");
            out.push(b'\n');
        }
        out
    }
}

pub fn participant_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

impl Simulation {
    /// Runs every participant against `store`, which must hold the two
    /// datasets.
    pub async fn run(&self, store: Arc<Store>) -> Result<SimulationOutcome> {
        if self.participants == 0 {
            return Err(CliError::Validation("--participants must be at least 1".into()));
        }
        self.script.validate()?;
        let clock = LaneClock {
            shared: SteppingClock::new(from_millis(EPOCH_MS), STEP_MS),
        };
        let service = StudyService::builder(store.clone(), self.provider.clone())
            .clock(Arc::new(clock))
            .ids(Arc::new(IdGenerator::seeded(self.seed)))
            .assignment_seed(self.seed)
            .turn_config(self.turn)
            .build();
        let state = AppState::new(Arc::new(service), Some(ADMIN_TOKEN.into()));
        let client = ApiClient::new(router(state), Some(ADMIN_TOKEN.into()));

        let mut sessions = Vec::with_capacity(self.participants);
        for i in 0..self.participants {
            let body = CreateSessionBody {
                participant_id: format!("sim-{i:05}").into(),
            };
            let view: SessionView = client.post("/v1/sessions", Some(&body)).await?;
            sessions.push(view);
        }

        let script = Arc::new(self.script.clone());
        let limit = Arc::new(Semaphore::new(self.parallelism.max(1)));
        let mut tasks = JoinSet::new();
        for (i, view) in sessions.into_iter().enumerate() {
            let participant = Participant {
                client: client.clone(),
                script: script.clone(),
                rng: participant_rng(self.seed, i),
                initial: HashMap::new(),
            };
            let limit = limit.clone();
            let start = EPOCH_MS + (i as i64 + 1) * LANE_MS;
            tasks.spawn(LANE.scope(Cell::new(start), async move {
                let _permit = limit.acquire_owned().await.expect("semaphore open");
                participant.drive(view).await
            }));
        }
        let (mut completed, mut disqualified) = (0, 0);
        while let Some(joined) = tasks.join_next().await {
            match joined.map_err(|e| CliError::Internal(format!("participant task: {e}")))?? {
                true => completed += 1,
                false => disqualified += 1,
            }
        }

        let export = client
            .raw(Method::GET, "/v1/export/study", None::<&()>, true)
            .await?;
        let records = read_jsonl(export.as_slice())?;
        let mut coverage: BTreeMap<DatapointId, u32> = store
            .datasets()
            .iter()
            .flat_map(|d| d.datapoints.iter().map(|id| (id.clone(), 0)))
            .collect();
        coverage.extend(store.coverage());
        Ok(SimulationOutcome {
            export,
            records,
            surveys: store.surveys(),
            completed,
            disqualified,
            coverage,
        })
    }
}

struct Participant {
    client: ApiClient,
    script: Arc<AnnotatorScript>,
    rng: ChaCha8Rng,
    initial: HashMap<DatapointId, String>,
}

impl Participant {
    /// Follows the views the API returns until the session ends. True when
    /// it completed, false when it was disqualified.
    async fn drive(mut self, mut view: SessionView) -> Result<bool> {
        let base = format!("/v1/sessions/{}", view.session_id);
        for _ in 0..MAX_STEPS {
            if view.status.is_terminal() {
                return Ok(view.phase == SessionPhase::Done);
            }
            if let Some(check) = view.attention_checks.first() {
                let body = AttentionBody {
                    index: check.index,
                    option: self.script.attention.answers[usize::from(check.index - 1)].clone(),
                };
                let reply: AttentionReply = self.client.post(&format!("{base}/attention"), Some(&body)).await?;
                view = reply.view;
                continue;
            }
            view = match view.phase {
                SessionPhase::Annotate(_) => {
                    let dp = current(&view)?;
                    let input = self.script.initial_input(&dp.label_options, &mut self.rng);
                    self.initial.insert(dp.datapoint_id.clone(), input.label.clone());
                    let body = AnnotationBody {
                        datapoint_id: dp.datapoint_id.clone(),
                        input,
                    };
                    self.client.post(&format!("{base}/annotations"), Some(&body)).await?
                }
                SessionPhase::Confirm => self.client.post(&format!("{base}/confirm"), None::<&()>).await?,
                SessionPhase::Break => self.client.post(&format!("{base}/break"), None::<&()>).await?,
                SessionPhase::Discuss(_) | SessionPhase::Reannotate(_) => self.discuss(&base, &view).await?,
                SessionPhase::Survey => {
                    let response = self.script.survey_response(view.session_id.clone(), &mut self.rng);
                    let mut body = serde_json::to_value(&response)
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                    if let Value::Object(map) = &mut body {
                        map.remove("session_id");
                    }
                    self.client.post(&format!("{base}/survey"), Some(&body)).await?
                }
                SessionPhase::Done => return Ok(true),
            };
        }
        Err(CliError::Internal(format!(
            "session {} did not finish within {MAX_STEPS} steps",
            view.session_id
        )))
    }

    async fn discuss(&mut self, base: &str, view: &SessionView) -> Result<SessionView> {
        let dp = current(view)?;
        let initial = self
            .initial
            .get(&dp.datapoint_id)
            .cloned()
            .ok_or_else(|| CliError::Internal(format!("no initial label for {}", dp.datapoint_id)))?;
        let sent = view.gate.as_ref().map_or(0, |g| g.annotator_message_count as usize);
        let turns = self.script.turns()?;
        for (k, turn) in turns.iter().enumerate().skip(sent) {
            let body = ChatBody {
                datapoint_id: dp.datapoint_id.clone(),
                text: AnnotatorScript::chat_message(turn, &dp.label_options, &initial),
                client_message_id: Some(format!("{}-{}-{}", view.session_id, dp.datapoint_id, k + 1)),
            };
            let _: ChatReply = self.client.post(&format!("{base}/chat"), Some(&body)).await?;
        }
        let input = self.script.post_input(&dp.label_options, &initial, &mut self.rng);
        let body = ReannotationBody {
            datapoint_id: dp.datapoint_id.clone(),
            input,
        };
        self.client.post(&format!("{base}/reannotations"), Some(&body)).await
    }
}

fn current(view: &SessionView) -> Result<&socratic_core::view::DatapointView> {
    view.datapoint
        .as_ref()
        .ok_or_else(|| CliError::Internal(format!("phase {} shows no datapoint", view.phase)))
}
