use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use graphlet_lens::artifacts::ArtifactPaths;
use graphlet_lens::census::{census_dataset, load_census, CensusResult, GraphletCatalog};
use graphlet_lens::explainer::{projection, Mode, ProjectionPoint, Selection};
use graphlet_lens::graph::Dataset;
use graphlet_lens::neural::{GcnModel, TrainReport};
use graphlet_lens::surrogate::{SurrogateModel, SurrogateReport};
use graphlet_lens::{Error, Result};
use serde::Serialize;

use crate::config::ServiceConfig;
use crate::error::{ApiError, ApiResult};

pub struct GcnArtifact {
    pub model: GcnModel,
    pub report: TrainReport,
}

pub struct SurrogateArtifact {
    pub model: SurrogateModel,
    pub report: SurrogateReport,
}

/// An artifact that is absent, loaded, or failed to load.
pub enum Slot<T> {
    Missing,
    Ready(Arc<T>),
    Corrupt(String),
}

impl<T> Clone for Slot<T> {
    fn clone(&self) -> Self {
        match self {
            Slot::Missing => Slot::Missing,
            Slot::Ready(a) => Slot::Ready(a.clone()),
            Slot::Corrupt(s) => Slot::Corrupt(s.clone()),
        }
    }
}

impl<T> Slot<T> {
    fn load(path: &Path, read: impl FnOnce(&Path) -> Result<T>) -> Self {
        if !path.exists() {
            return Slot::Missing;
        }
        match read(path) {
            Ok(v) => Slot::Ready(Arc::new(v)),
            Err(e) => Slot::Corrupt(format!("corrupt artifact {}: {e}", path.display())),
        }
    }

    pub fn is_ready(&self) -> bool {
        matches!(self, Slot::Ready(_))
    }

    /// The artifact, 409 if it has not been produced yet, 500 if unreadable.
    pub fn require(&self, what: &str) -> ApiResult<Arc<T>> {
        match self {
            Slot::Ready(v) => Ok(v.clone()),
            Slot::Missing => Err(ApiError::conflict(format!("{what} has not been trained for this dataset"))),
            Slot::Corrupt(msg) => Err(ApiError::internal(msg.clone())),
        }
    }
}

#[derive(Clone)]
pub struct Artifacts {
    pub census: Slot<Vec<CensusResult>>,
    pub gcn: Slot<GcnArtifact>,
    pub surrogate: Slot<SurrogateArtifact>,
    /// Bumped whenever an artifact is replaced; part of every cache key.
    pub generation: u64,
}

pub struct DatasetEntry {
    pub id: String,
    pub dataset: Arc<Dataset>,
    pub paths: ArtifactPaths,
    pub artifacts: RwLock<Artifacts>,
    /// Held by training jobs and census computation: one writer per dataset.
    pub writer: tokio::sync::Mutex<()>,
}

impl DatasetEntry {
    pub fn snapshot(&self) -> Artifacts {
        self.artifacts.read().expect("artifact lock").clone()
    }

    pub fn replace(&self, f: impl FnOnce(&mut Artifacts)) {
        let mut a = self.artifacts.write().expect("artifact lock");
        f(&mut a);
        a.generation += 1;
    }
}

fn load_gcn(paths: &ArtifactPaths) -> Slot<GcnArtifact> {
    Slot::load(&paths.gcn(), |p| {
        Ok(GcnArtifact {
            model: GcnModel::load(p)?,
            report: TrainReport::load(&paths.gcn_report())?,
        })
    })
}

fn load_surrogate(paths: &ArtifactPaths) -> Slot<SurrogateArtifact> {
    Slot::load(&paths.surrogate(), |p| {
        Ok(SurrogateArtifact {
            model: SurrogateModel::load(p)?,
            report: graphlet_lens::io::read_json(&paths.surrogate_report())?,
        })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StoredSelection {
    pub id: String,
    pub dataset: String,
    #[serde(flatten)]
    pub selection: Selection,
    pub size: usize,
    pub empty: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Succeeded,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct Job {
    pub id: String,
    pub kind: String,
    pub dataset: String,
    pub status: JobStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
}

type CacheKey = (String, Mode, u64);

pub struct AppState {
    pub config: ServiceConfig,
    pub catalog: &'static GraphletCatalog,
    pub datasets: BTreeMap<String, Arc<DatasetEntry>>,
    pub selections: RwLock<HashMap<String, StoredSelection>>,
    pub jobs: Mutex<HashMap<String, Job>>,
    pub rankings: Mutex<HashMap<CacheKey, Arc<serde_json::Value>>>,
    pub active: RwLock<Option<String>>,
    next_id: AtomicU64,
}

impl AppState {
    /// Loads every `*.json` dataset in `data_dir` and whatever artifacts exist for it.
    pub fn open(config: ServiceConfig) -> Result<Self> {
        let mut datasets = BTreeMap::new();
        let dir = &config.data_dir;
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut files: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        for path in files {
            let id = path.file_stem().expect("json file").to_string_lossy().into_owned();
            let dataset = Dataset::load_json(&path)?;
            let paths = ArtifactPaths::new(config.artifact_dir.join(&id));
            let artifacts = Artifacts {
                census: Slot::load(&paths.census(), load_census),
                gcn: load_gcn(&paths),
                surrogate: load_surrogate(&paths),
                generation: 0,
            };
            datasets.insert(
                id.clone(),
                Arc::new(DatasetEntry {
                    id,
                    dataset: Arc::new(dataset),
                    paths,
                    artifacts: RwLock::new(artifacts),
                    writer: tokio::sync::Mutex::new(()),
                }),
            );
        }
        Ok(AppState {
            config,
            catalog: GraphletCatalog::shared(),
            datasets,
            selections: RwLock::new(HashMap::new()),
            jobs: Mutex::new(HashMap::new()),
            rankings: Mutex::new(HashMap::new()),
            active: RwLock::new(None),
            next_id: AtomicU64::new(1),
        })
    }

    pub fn fresh_id(&self, prefix: &str) -> String {
        format!("{prefix}{}", self.next_id.fetch_add(1, Ordering::Relaxed))
    }

    pub fn dataset(&self, id: &str) -> ApiResult<Arc<DatasetEntry>> {
        self.datasets
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown dataset {id:?}")))
    }

    pub fn set_active(&self, id: &str) {
        *self.active.write().expect("active lock") = Some(id.to_string());
    }

    /// The most recently used dataset, else the first one.
    pub fn active_dataset(&self) -> ApiResult<Arc<DatasetEntry>> {
        let active = self.active.read().expect("active lock").clone();
        match active {
            Some(id) => self.dataset(&id),
            None => self
                .datasets
                .values()
                .next()
                .cloned()
                .ok_or_else(|| ApiError::not_found("no datasets loaded")),
        }
    }

    pub fn selection(&self, sid: &str) -> ApiResult<StoredSelection> {
        self.selections
            .read()
            .expect("selection lock")
            .get(sid)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown selection {sid:?}")))
    }

    /// Census for the dataset, computed and persisted on first use.
    pub async fn census(&self, entry: &Arc<DatasetEntry>) -> ApiResult<Arc<Vec<CensusResult>>> {
        if let Slot::Ready(c) = &entry.snapshot().census {
            return Ok(c.clone());
        }
        let _guard = entry.writer.lock().await;
        match entry.snapshot().census {
            Slot::Ready(c) => return Ok(c),
            Slot::Corrupt(msg) => return Err(ApiError::internal(msg)),
            Slot::Missing => {}
        }
        let e = entry.clone();
        let policy = self.config.census.clone();
        let catalog = self.catalog;
        let results = tokio::task::spawn_blocking(move || -> Result<Vec<CensusResult>> {
            let r = census_dataset(&e.dataset, catalog, &policy)?;
            graphlet_lens::io::write_json_atomic(&e.paths.census(), &r)?;
            Ok(r)
        })
        .await
        .map_err(|e| ApiError::internal(format!("census task failed: {e}")))??;
        let results = Arc::new(results);
        let r = results.clone();
        entry.replace(|a| a.census = Slot::Ready(r));
        Ok(results)
    }

    pub async fn projection(&self, entry: &Arc<DatasetEntry>) -> ApiResult<Vec<ProjectionPoint>> {
        let census = self.census(entry).await?;
        let gcn = entry.snapshot().gcn.require("GCN")?;
        let labels = entry.dataset.labels();
        Ok(projection(
            &census,
            &gcn.report.embeddings,
            &gcn.report.probabilities,
            &labels,
            self.config.swap_axes,
        )?)
    }

    pub fn reload_gcn(&self, entry: &DatasetEntry) {
        let slot = load_gcn(&entry.paths);
        entry.replace(|a| a.gcn = slot);
    }

    pub fn reload_surrogate(&self, entry: &DatasetEntry) {
        let slot = load_surrogate(&entry.paths);
        entry.replace(|a| a.surrogate = slot);
    }
}
