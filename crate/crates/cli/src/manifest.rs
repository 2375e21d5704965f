//! Dataset manifest: one `[[datasets]]` table per dataset, each pointing
//! at a CSV file of items.
//!
//! ```toml
//! [[datasets]]
//! id = "relation"
//! name = "Relation"
//! context = "Decide whether the sentence expresses the given relation."
//! options = ["Expressed", "Not Expressed"]
//! file = "relation.csv"
//! ```
//!
//! `file` is resolved against the manifest's directory. The CSV needs a
//! header row with `id` and `text`; `context` (item context) and
//! `ground_truth` are optional columns. An empty `ground_truth` cell means
//! the item has none.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use socratic_core::domain::{Datapoint, Dataset};
use socratic_core::store::Store;

use crate::error::{read_to_string, CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub datasets: Vec<DatasetEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub id: String,
    pub name: String,
    pub context: String,
    pub options: Vec<String>,
    pub file: PathBuf,
}

#[derive(Debug, Deserialize)]
struct Row {
    id: String,
    text: String,
    #[serde(default)]
    context: String,
    #[serde(default)]
    ground_truth: Option<String>,
}

/// A dataset with its items, validated and ready to store.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub datapoints: Vec<Datapoint>,
}

impl LoadedDataset {
    pub fn ground_truth_count(&self) -> usize {
        self.datapoints.iter().filter(|d| d.ground_truth.is_some()).count()
    }
}

impl fmt::Display for LoadedDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}): items: {}, ground truth: {}, options: {} / {}",
            self.dataset.name,
            self.dataset.id,
            self.datapoints.len(),
            self.ground_truth_count(),
            self.dataset.label_options[0],
            self.dataset.label_options[1]
        )
    }
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("manifest: {e}")))
    }

    /// Reads the manifest and every dataset file it names.
    pub fn load(path: &Path) -> Result<Vec<LoadedDataset>> {
        let manifest = Self::parse(&read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        manifest.resolve(|file| read_to_string(&base.join(file)))
    }

    /// Validates the entries and parses their files through `read`.
    pub fn resolve(
        &self,
        mut read: impl FnMut(&Path) -> Result<String>,
    ) -> Result<Vec<LoadedDataset>> {
        if self.datasets.len() != 2 {
            return Err(CliError::Validation(format!(
                "manifest must list exactly two datasets, found {}",
                self.datasets.len()
            )));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for entry in &self.datasets {
            let loaded = entry.load(&read(&entry.file)?)?;
            for dp in &loaded.datapoints {
                if !seen.insert(dp.id.clone()) {
                    return Err(CliError::Conflict(format!(
                        "duplicate datapoint id {} in {}",
                        dp.id,
                        entry.file.display()
                    )));
                }
            }
            out.push(loaded);
        }
        if out[0].dataset.id == out[1].dataset.id {
            return Err(CliError::Conflict(format!("duplicate dataset id {}", out[0].dataset.id)));
        }
        Ok(out)
    }
}

impl DatasetEntry {
    fn load(&self, csv_text: &str) -> Result<LoadedDataset> {
        let file = self.file.display();
        let options: [String; 2] = self.options.clone().try_into().map_err(|o: Vec<String>| {
            CliError::Validation(format!(
                "dataset {}: expected 2 label options, found {}",
                self.name,
                o.len()
            ))
        })?;
        if self.context.trim().is_empty() {
            return Err(CliError::Validation(format!("dataset {}: context is empty", self.name)));
        }
        let dataset = Dataset::new(self.id.as_str().into(), &self.name, &self.context, options)?;
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let mut datapoints = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            // header is line 1
            let line = i + 2;
            let row = row.map_err(|e| CliError::Validation(format!("{file} row {line}: {e}")))?;
            let dp = Datapoint {
                id: row.id.trim().into(),
                dataset_id: dataset.id.clone(),
                text: row.text,
                item_context: row.context,
                ground_truth: row.ground_truth.filter(|g| !g.trim().is_empty()),
            };
            if dp.id.as_str().is_empty() {
                return Err(CliError::Validation(format!("{file} row {line}: id is empty")));
            }
            dp.validate(&dataset)
                .map_err(|e| CliError::Validation(format!("{file} row {line}: {e}")))?;
            datapoints.push(dp);
        }
        if datapoints.is_empty() {
            return Err(CliError::Validation(format!("{file}: no items")));
        }
        Ok(LoadedDataset {
            dataset,
            datapoints,
        })
    }
}

/// Stores the datasets. Ids already present in the store are conflicts.
pub fn store_datasets(store: &Store, datasets: &[LoadedDataset]) -> Result<()> {
    for d in datasets {
        if store.dataset(&d.dataset.id).is_ok() {
            return Err(CliError::Conflict(format!("dataset {} is already loaded", d.dataset.id)));
        }
        if let Some(dp) = d.datapoints.iter().find(|dp| store.datapoint(&dp.id).is_ok()) {
            return Err(CliError::Conflict(format!("datapoint {} is already loaded", dp.id)));
        }
    }
    for d in datasets {
        store.load_dataset(d.dataset.clone(), d.datapoints.clone())?;
    }
    Ok(())
}
