//! Key-ordered tables plus an optional append-only JSONL event log.
//!
//! Every mutation is a batch of [`StoreEvent`]s validated and applied under
//! one lock, then appended to the log as one line per event. Opening a log
//! replays it, so the tables are always the fold of the log.

mod export;
mod import;

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::domain::{
    AnnotationRecord, ChatMessage, Datapoint, Dataset, ParticipantStatus, Stage, SurveyResponse,
};
use crate::error::{Error, Result};
use crate::ids::{DatapointId, DatasetId, ParticipantId, SessionId};
use crate::session::Session;

pub use export::{
    read_jsonl, records_to_csv, write_jsonl, ExportFilter, ExportRecord, RecordSource,
    SCHEMA_VERSION,
};
pub use import::{import_benchmark_csv, BenchmarkMapping, ColumnMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum StoreEvent {
    DatasetLoaded {
        dataset: Dataset,
        datapoints: Vec<Datapoint>,
    },
    SessionSaved {
        session: Session,
    },
    AnnotationAppended {
        record: AnnotationRecord,
    },
    MessageAppended {
        message: ChatMessage,
    },
    SurveyAppended {
        response: SurveyResponse,
    },
    RecordsImported {
        records: Vec<ExportRecord>,
    },
}

#[derive(Debug, Default)]
struct Tables {
    datasets: BTreeMap<DatasetId, Dataset>,
    datapoints: BTreeMap<DatapointId, Datapoint>,
    sessions: BTreeMap<SessionId, Session>,
    by_participant: HashMap<ParticipantId, SessionId>,
    annotations: BTreeMap<(SessionId, DatapointId, Stage), AnnotationRecord>,
    /// Keyed by (session, datapoint, seq).
    messages: BTreeMap<(SessionId, DatapointId, u32), ChatMessage>,
    surveys: BTreeMap<SessionId, SurveyResponse>,
    imported_study: Vec<ExportRecord>,
    imported_benchmark: Vec<ExportRecord>,
}

impl Tables {
    fn check(&self, event: &StoreEvent) -> Result<()> {
        match event {
            StoreEvent::DatasetLoaded {
                dataset,
                datapoints,
            } => {
                dataset.validate()?;
                if self.datasets.contains_key(&dataset.id) {
                    return Err(Error::Conflict(format!("dataset {} already loaded", dataset.id)));
                }
                let mut seen = std::collections::HashSet::new();
                for dp in datapoints {
                    dp.validate(dataset)?;
                    if !seen.insert(&dp.id) || self.datapoints.contains_key(&dp.id) {
                        return Err(Error::Conflict(format!("duplicate datapoint id {}", dp.id)));
                    }
                }
            }
            StoreEvent::SessionSaved { session } => {
                if let Some(existing) = self.by_participant.get(&session.participant_id) {
                    if existing != &session.id {
                        return Err(Error::Conflict(format!(
                            "participant {} already has a session",
                            session.participant_id
                        )));
                    }
                }
            }
            StoreEvent::AnnotationAppended { record } => {
                self.known_session(&record.session_id)?;
                let key = (record.session_id.clone(), record.datapoint_id.clone(), record.stage());
                if self.annotations.contains_key(&key) {
                    return Err(Error::Conflict(format!(
                        "{:?} annotation for {} already stored",
                        record.stage(),
                        record.datapoint_id
                    )));
                }
            }
            StoreEvent::MessageAppended { message } => {
                self.known_session(&message.session_id)?;
                let key = (message.session_id.clone(), message.datapoint_id.clone(), message.seq);
                if self.messages.contains_key(&key) {
                    return Err(Error::Conflict(format!("message seq {} already stored", message.seq)));
                }
            }
            StoreEvent::SurveyAppended { response } => {
                self.known_session(&response.session_id)?;
                if self.surveys.contains_key(&response.session_id) {
                    return Err(Error::Conflict("survey already submitted".into()));
                }
            }
            StoreEvent::RecordsImported { .. } => {}
        }
        Ok(())
    }

    fn known_session(&self, id: &SessionId) -> Result<()> {
        if self.sessions.contains_key(id) {
            Ok(())
        } else {
            Err(Error::NotFound(format!("session {id}")))
        }
    }

    fn apply(&mut self, event: StoreEvent) {
        match event {
            StoreEvent::DatasetLoaded {
                dataset,
                datapoints,
            } => {
                for dp in datapoints {
                    self.datapoints.insert(dp.id.clone(), dp);
                }
                self.datasets.insert(dataset.id.clone(), dataset);
            }
            StoreEvent::SessionSaved { session } => {
                self.by_participant
                    .insert(session.participant_id.clone(), session.id.clone());
                self.sessions.insert(session.id.clone(), session);
            }
            StoreEvent::AnnotationAppended { record } => {
                let key = (record.session_id.clone(), record.datapoint_id.clone(), record.stage());
                self.annotations.insert(key, record);
            }
            StoreEvent::MessageAppended { message } => {
                let key = (message.session_id.clone(), message.datapoint_id.clone(), message.seq);
                self.messages.insert(key, message);
            }
            StoreEvent::SurveyAppended { response } => {
                self.surveys.insert(response.session_id.clone(), response);
            }
            StoreEvent::RecordsImported { records } => {
                for r in records {
                    match r.source {
                        RecordSource::Study => self.imported_study.push(r),
                        RecordSource::Benchmark => self.imported_benchmark.push(r),
                    }
                }
            }
        }
    }

    fn coverage(&self) -> HashMap<DatapointId, u32> {
        let mut counts: HashMap<DatapointId, u32> =
            self.datapoints.keys().map(|id| (id.clone(), 0)).collect();
        for session in self.sessions.values() {
            if matches!(session.status, ParticipantStatus::Disqualified(_)) {
                continue;
            }
            for a in &session.assignments {
                *counts.entry(a.datapoint_id.clone()).or_default() += 1;
            }
        }
        counts
    }
}

/// The study store. Cheap to share behind an `Arc`.
pub struct Store {
    tables: Mutex<Tables>,
    log: Option<Mutex<BufWriter<File>>>,
    path: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Self {
            tables: Mutex::new(Tables::default()),
            log: None,
            path: None,
        }
    }

    /// Opens (or creates) a log-backed store and replays existing events.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut tables = Tables::default();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: StoreEvent = serde_json::from_str(&line).map_err(|e| {
                    Error::Integrity(format!("{}:{}: {e}", path.display(), i + 1))
                })?;
                tables.check(&event).map_err(|e| {
                    Error::Integrity(format!("{}:{}: {e}", path.display(), i + 1))
                })?;
                tables.apply(event);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            tables: Mutex::new(tables),
            log: Some(Mutex::new(BufWriter::new(file))),
            path: Some(path),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Validates and applies a batch atomically: either every event is
    /// stored or none is.
    pub fn commit(&self, events: Vec<StoreEvent>) -> Result<()> {
        let mut tables = self.tables.lock();
        self.commit_locked(&mut tables, events)
    }

    fn commit_locked(&self, tables: &mut Tables, events: Vec<StoreEvent>) -> Result<()> {
        // checks run against the pre-batch state, so duplicates inside the
        // batch itself need their own test
        for (i, event) in events.iter().enumerate() {
            tables.check(event)?;
            if let StoreEvent::AnnotationAppended { record } = event {
                let dup = events[..i].iter().any(|e| matches!(e, StoreEvent::AnnotationAppended { record: r } if r.session_id == record.session_id && r.datapoint_id == record.datapoint_id && r.stage() == record.stage()));
                if dup {
                    return Err(Error::Conflict("duplicate annotation in batch".into()));
                }
            }
        }
        if let Some(log) = &self.log {
            let mut log = log.lock();
            for event in &events {
                serde_json::to_writer(&mut *log, event)?;
                log.write_all(b"\n")?;
            }
            log.flush()?;
        }
        for event in events {
            tables.apply(event);
        }
        Ok(())
    }

    pub fn load_dataset(&self, dataset: Dataset, datapoints: Vec<Datapoint>) -> Result<()> {
        let mut dataset = dataset;
        dataset.datapoints = datapoints.iter().map(|d| d.id.clone()).collect();
        self.commit(vec![StoreEvent::DatasetLoaded {
            dataset,
            datapoints,
        }])
    }

    pub fn datasets(&self) -> Vec<Dataset> {
        self.tables.lock().datasets.values().cloned().collect()
    }

    pub fn dataset(&self, id: &DatasetId) -> Result<Dataset> {
        self.tables
            .lock()
            .datasets
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("dataset {id}")))
    }

    pub fn datapoint(&self, id: &DatapointId) -> Result<Datapoint> {
        self.tables
            .lock()
            .datapoints
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("datapoint {id}")))
    }

    /// Number of live (not disqualified) sessions holding each datapoint.
    pub fn coverage(&self) -> HashMap<DatapointId, u32> {
        self.tables.lock().coverage()
    }

    /// Creates a session for `participant` atomically with respect to
    /// coverage: `build` sees the coverage counts and the datasets under the
    /// store lock, and its session is stored before the lock is released.
    pub fn create_session<F>(&self, participant: &ParticipantId, build: F) -> Result<Session>
    where
        F: FnOnce(&HashMap<DatapointId, u32>, &[Dataset]) -> Result<Session>,
    {
        let mut tables = self.tables.lock();
        if let Some(existing) = tables.by_participant.get(participant) {
            let status = tables.sessions[existing].status;
            return Err(Error::Conflict(format!(
                "participant {participant} already has a session ({})",
                match status {
                    ParticipantStatus::Active => "active",
                    ParticipantStatus::Completed => "completed",
                    ParticipantStatus::Disqualified(_) => "disqualified",
                }
            )));
        }
        let datasets: Vec<Dataset> = tables.datasets.values().cloned().collect();
        let session = build(&tables.coverage(), &datasets)?;
        self.commit_locked(
            &mut tables,
            vec![StoreEvent::SessionSaved {
                session: session.clone(),
            }],
        )?;
        Ok(session)
    }

    pub fn session(&self, id: &SessionId) -> Result<Session> {
        self.tables
            .lock()
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("session {id}")))
    }

    pub fn session_for(&self, participant: &ParticipantId) -> Option<Session> {
        let tables = self.tables.lock();
        let id = tables.by_participant.get(participant)?;
        tables.sessions.get(id).cloned()
    }

    pub fn sessions(&self) -> Vec<Session> {
        self.tables.lock().sessions.values().cloned().collect()
    }

    pub fn annotations(&self, session: &SessionId) -> Vec<AnnotationRecord> {
        self.tables
            .lock()
            .annotations
            .range((session.clone(), DatapointId::from(""), Stage::Initial)..)
            .take_while(|((s, _, _), _)| s == session)
            .map(|(_, r)| r.clone())
            .collect()
    }

    pub fn annotation(
        &self,
        session: &SessionId,
        datapoint: &DatapointId,
        stage: Stage,
    ) -> Option<AnnotationRecord> {
        self.tables
            .lock()
            .annotations
            .get(&(session.clone(), datapoint.clone(), stage))
            .cloned()
    }

    /// Messages of one discussion ordered by seq.
    pub fn transcript(&self, session: &SessionId, datapoint: &DatapointId) -> Vec<ChatMessage> {
        self.tables
            .lock()
            .messages
            .range((session.clone(), datapoint.clone(), 0)..=(session.clone(), datapoint.clone(), u32::MAX))
            .map(|(_, m)| m.clone())
            .collect()
    }

    /// Every message of a session, discussion by discussion in presentation
    /// order, each ordered by seq.
    pub fn transcript_dump(&self, session_id: &SessionId) -> Result<Vec<ChatMessage>> {
        let session = self.session(session_id)?;
        Ok(session
            .assignments
            .iter()
            .flat_map(|a| self.transcript(session_id, &a.datapoint_id))
            .collect())
    }

    pub fn survey(&self, session: &SessionId) -> Option<SurveyResponse> {
        self.tables.lock().surveys.get(session).cloned()
    }

    /// Surveys of participants included in analysis.
    pub fn surveys(&self) -> Vec<SurveyResponse> {
        let tables = self.tables.lock();
        tables
            .surveys
            .values()
            .filter(|s| tables.sessions.get(&s.session_id).is_some_and(Session::is_analyzable))
            .cloned()
            .collect()
    }

    pub fn import_records(&self, records: Vec<ExportRecord>) -> Result<usize> {
        for r in &records {
            r.validate()?;
        }
        let n = records.len();
        self.commit(vec![StoreEvent::RecordsImported { records }])?;
        Ok(n)
    }

    pub fn benchmark_records(&self, dataset: Option<&str>) -> Vec<ExportRecord> {
        let mut out: Vec<ExportRecord> = self
            .tables
            .lock()
            .imported_benchmark
            .iter()
            .filter(|r| dataset.is_none_or(|d| r.dataset_name == d))
            .cloned()
            .collect();
        export::sort_records(&mut out);
        out
    }
}
