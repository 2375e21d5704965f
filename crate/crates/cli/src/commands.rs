//! Command-line surface: argument types and the command implementations.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use socratic_core::service::StudyService;
use socratic_core::store::{
    import_benchmark_csv, records_to_csv, write_jsonl, BenchmarkMapping, ExportFilter, Store,
};
use socratic_server::AppState;

use crate::analyze::{analyze, read_records, read_surveys};
use crate::config::{Config, ProviderConfig};
use crate::error::{create_dir, read_to_string, write, CliError, Result};
use crate::manifest::{store_datasets, Manifest};
use crate::script::AnnotatorScript;
use crate::simulate::Simulation;

#[derive(Debug, Parser)]
#[command(name = "socratic", version, about = "Socratic deliberation study tooling")]
pub struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a dataset manifest and store its datasets.
    LoadDatasets {
        manifest: PathBuf,
        /// Event log to load into; defaults to the configured store. Without
        /// one the manifest is only validated.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
    },
    /// Drive N scripted participants through complete sessions.
    Simulate {
        #[arg(long)]
        participants: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Annotator script (TOML); the built-in script when omitted.
        #[arg(long)]
        annotator_script: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ProviderKind::Scripted)]
        provider: ProviderKind,
        /// Dataset manifest to load before simulating.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Event log to write; in memory when omitted.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Participants driven at the same time.
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Directory for `study.jsonl` and `surveys.jsonl`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the study export from an event log.
    Export {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Jsonl)]
        format: ExportFormat,
        /// Only this dataset (by name).
        #[arg(long)]
        dataset: Option<String>,
        /// Include sessions that have not finished.
        #[arg(long)]
        include_incomplete: bool,
        /// Also write survey responses (JSONL) here.
        #[arg(long)]
        surveys: Option<PathBuf>,
    },
    /// Convert a benchmark CSV log into export records.
    ImportBenchmark {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the comparison report.
    Analyze {
        #[arg(long)]
        study: PathBuf,
        #[arg(long)]
        benchmark: Option<PathBuf>,
        /// Survey responses (JSONL) for the task-load table.
        #[arg(long)]
        surveys: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Scripted,
    /// The remote provider from the configuration file.
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Jsonl,
    Csv,
}

/// Prints a line; a closed stdout (e.g. piped into `head`) is not an
/// error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn open_store(path: Option<&Path>) -> Result<Store> {
    match path {
        Some(p) => Ok(Store::open(p)?),
        None => Ok(Store::in_memory()),
    }
}

fn require_store(flag: Option<PathBuf>, config: &Config) -> Result<Store> {
    let path = flag
        .or_else(|| config.store.clone())
        .ok_or_else(|| CliError::Validation("no store: pass --store or set `store` in the config".into()))?;
    if !path.exists() {
        return Err(CliError::io(&path, std::io::ErrorKind::NotFound.into()));
    }
    open_store(Some(&path))
}

pub async fn run(cli: Cli) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::LoadDatasets { manifest, store } => {
            let loaded = Manifest::load(&manifest)?;
            for d in &loaded {
                say!("{d}");
            }
            match store.or_else(|| config.store.clone()) {
                Some(path) => {
                    store_datasets(&open_store(Some(&path))?, &loaded)?;
                    say!("stored in {}", path.display());
                }
                None => say!("validated only (no store given)"),
            }
        }
        Command::Serve { store, port } => {
            let mut config = config;
            if let Some(p) = port {
                config.port = p;
            }
            let store = Arc::new(open_store(store.or(config.store.clone()).as_deref())?);
            let mut builder = StudyService::builder(store, config.build_provider(None)?);
            if let Some(turn) = config.turn {
                builder = builder.turn_config(turn);
            }
            let state = AppState::new(Arc::new(builder.build()), config.admin_token());
            if state.admin_token.is_none() {
                tracing::warn!(env = %config.admin_token_env, "no admin token; admin endpoints disabled");
            }
            socratic_server::serve(config.addr(), state)
                .await
                .map_err(|e| CliError::io(config.addr().to_string(), e))?;
        }
        Command::Simulate {
            participants,
            seed,
            annotator_script,
            provider,
            manifest,
            store,
            parallelism,
            out,
        } => {
            let script = match &annotator_script {
                Some(p) => AnnotatorScript::parse(&read_to_string(p)?)?,
                None => AnnotatorScript::default(),
            };
            let provider = match provider {
                ProviderKind::Scripted => match &config.provider {
                    ProviderConfig::Scripted { .. } => config.build_provider(Some(seed))?,
                    ProviderConfig::Remote(_) => Config::default().build_provider(Some(seed))?,
                },
                ProviderKind::Remote => match &config.provider {
                    ProviderConfig::Remote(_) => config.build_provider(None)?,
                    ProviderConfig::Scripted { .. } => {
                        return Err(CliError::Validation(
                            "--provider remote needs a remote provider in the config".into(),
                        ))
                    }
                },
            };
            let store = Arc::new(open_store(store.as_deref())?);
            if let Some(m) = &manifest {
                store_datasets(&store, &Manifest::load(m)?)?;
            }
            if store.datasets().len() != 2 {
                return Err(CliError::Validation(format!(
                    "simulation needs two datasets (found {}); pass --manifest",
                    store.datasets().len()
                )));
            }
            let sim = Simulation {
                participants,
                seed,
                parallelism,
                script,
                provider,
                turn: config.turn.unwrap_or_default(),
            };
            let outcome = sim.run(store).await?;
            create_dir(&out)?;
            write(&out.join("study.jsonl"), &outcome.export)?;
            write(&out.join("surveys.jsonl"), outcome.surveys_jsonl())?;
            say!(
                "participants: {participants}, completed: {}, disqualified: {}, records: {}",
                outcome.completed,
                outcome.disqualified,
                outcome.records.len()
            );
            say!("{}", outcome.render_histogram().trim_end());
            say!("wrote {}", out.display());
        }
        Command::Export {
            store,
            out,
            format,
            dataset,
            include_incomplete,
            surveys,
        } => {
            let store = require_store(store, &config)?;
            let filter = ExportFilter {
                completed_only: !include_incomplete,
                dataset,
            };
            let records = store.export_study(&filter)?;
            let file = File::create(&out).map_err(|e| CliError::io(&out, e))?;
            match format {
                ExportFormat::Jsonl => write_jsonl(BufWriter::new(file), &records)?,
                ExportFormat::Csv => records_to_csv(BufWriter::new(file), &records)?,
            }
            say!("{} records -> {}", records.len(), out.display());
            if let Some(path) = surveys {
                let mut bytes = Vec::new();
                for s in store.surveys() {
                    serde_json::to_writer(&mut bytes, &s).map_err(|e| CliError::Internal(e.to_string()))?;
                    bytes.push(b'\n');
                }
                write(&path, bytes)?;
            }
        }
        Command::ImportBenchmark { csv, mapping, out } => {
            let mapping = BenchmarkMapping::from_toml(&read_to_string(&mapping)?)?;
            let file = File::open(&csv).map_err(|e| CliError::io(&csv, e))?;
            let records = import_benchmark_csv(file, &mapping)?;
            let target = File::create(&out).map_err(|e| CliError::io(&out, e))?;
            write_jsonl(BufWriter::new(target), &records)?;
            say!("{} benchmark records -> {}", records.len(), out.display());
        }
        Command::Analyze {
            study,
            benchmark,
            surveys,
            out,
        } => {
            let study = read_records(&study)?;
            let benchmark = benchmark.as_deref().map(read_records).transpose()?;
            let surveys = surveys.as_deref().map(read_surveys).transpose()?.unwrap_or_default();
            let (report, files) = analyze(&study, benchmark.as_deref(), &surveys, &out)?;
            for note in &report.notes {
                say!("note: {note}");
            }
            say!("wrote {} files to {}: {}", files.len(), out.display(), files.join(", "));
        }
    }
    Ok(())
}
