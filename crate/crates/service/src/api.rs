use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use graphlet_lens::explainer::{
    class_histograms, counterfactual_score, factual_score, rank_graphlets, representatives, select_group,
    ExplainContext, Mode, PerturbOptions, SelectionFilter,
};
use graphlet_lens::layout::layout;
use graphlet_lens::neural::{train_gcn, GcnConfig};
use graphlet_lens::surrogate::{train_surrogate, SurrogateConfig};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{ApiError, ApiResult};
use crate::state::{AppState, DatasetEntry, GcnArtifact, Job, JobStatus, StoredSelection, SurrogateArtifact};

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/datasets", get(list_datasets))
        .route("/api/datasets/{id}/train-gcn", post(train_gcn_job))
        .route("/api/datasets/{id}/train-surrogate", post(train_surrogate_job))
        .route("/api/jobs/{id}", get(job_status))
        .route("/api/datasets/{id}/projection", get(get_projection))
        .route("/api/datasets/{id}/selections", post(create_selection))
        .route("/api/selections/{sid}", get(get_selection))
        .route("/api/selections/{sid}/ranking", get(get_ranking))
        .route("/api/selections/{sid}/graphlets/{gidx}/fidelity", get(get_fidelity))
        .route("/api/selections/{sid}/graphlets/{gidx}/histogram", get(get_histogram))
        .route("/api/selections/{sid}/representatives", get(get_representatives))
        .route("/api/graphs/{id}/layout", get(get_layout))
        .with_state(state)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker task failed: {e}")))?
}

async fn list_datasets(State(st): State<Shared>) -> Json<Value> {
    let list: Vec<Value> = st
        .datasets
        .values()
        .map(|e| {
            let a = e.snapshot();
            json!({
                "id": e.id,
                "name": e.dataset.name,
                "n_graphs": e.dataset.len(),
                "class_names": e.dataset.class_names,
                "class_counts": e.dataset.class_counts(),
                "artifacts": {
                    "census": a.census.is_ready(),
                    "gcn": a.gcn.is_ready(),
                    "surrogate": a.surrogate.is_ready(),
                },
            })
        })
        .collect();
    Json(Value::Array(list))
}

fn new_job(st: &AppState, kind: &str, dataset: &str) -> String {
    let id = st.fresh_id("j");
    st.jobs.lock().expect("job lock").insert(
        id.clone(),
        Job {
            id: id.clone(),
            kind: kind.into(),
            dataset: dataset.into(),
            status: JobStatus::Queued,
            error: None,
            result: None,
        },
    );
    id
}

fn set_job(st: &AppState, id: &str, status: JobStatus, result: ApiResult<Value>) {
    if let Some(job) = st.jobs.lock().expect("job lock").get_mut(id) {
        job.status = status;
        match result {
            Ok(v) if v.is_null() => {}
            Ok(v) => job.result = Some(v),
            Err(e) => job.error = Some(e.message),
        }
    }
}

fn accepted(job: String) -> impl IntoResponse {
    (
        StatusCode::ACCEPTED,
        Json(json!({ "job_id": job, "status_url": format!("/api/jobs/{job}") })),
    )
}

/// Runs `work` under the dataset's writer lock on the blocking pool, tracking it as a job.
fn spawn_job(
    st: Shared,
    entry: Arc<DatasetEntry>,
    job: String,
    work: impl FnOnce(&AppState, &DatasetEntry) -> ApiResult<Value> + Send + 'static,
) {
    tokio::spawn(async move {
        let _guard = entry.writer.lock().await;
        set_job(&st, &job, JobStatus::Running, Ok(Value::Null));
        let (s, e) = (st.clone(), entry.clone());
        let outcome = blocking(move || work(&s, &e)).await;
        let status = if outcome.is_ok() { JobStatus::Succeeded } else { JobStatus::Failed };
        set_job(&st, &job, status, outcome);
    });
}

async fn train_gcn_job(
    State(st): State<Shared>,
    Path(id): Path<String>,
    body: Option<Json<GcnConfig>>,
) -> ApiResult<impl IntoResponse> {
    let entry = st.dataset(&id)?;
    let cfg = body.map(|Json(c)| c).unwrap_or_default();
    cfg.validate()?;
    st.set_active(&id);
    let job = new_job(&st, "train-gcn", &id);
    spawn_job(st.clone(), entry, job.clone(), move |st, e| {
        let (model, report) = train_gcn(&e.dataset, &cfg)?;
        model.save(&e.paths.gcn())?;
        report.save(&e.paths.gcn_report())?;
        let summary = json!({ "accuracy": report.accuracy, "final_loss": report.final_loss });
        e.replace(|a| {
            a.gcn = crate::state::Slot::Ready(Arc::new(GcnArtifact { model, report }));
        });
        st.rankings.lock().expect("cache lock").clear();
        Ok(summary)
    });
    Ok(accepted(job))
}

async fn train_surrogate_job(
    State(st): State<Shared>,
    Path(id): Path<String>,
    body: Option<Json<SurrogateConfig>>,
) -> ApiResult<impl IntoResponse> {
    let entry = st.dataset(&id)?;
    let cfg = body.map(|Json(c)| c).unwrap_or_default();
    cfg.validate()?;
    entry.snapshot().gcn.require("GCN")?;
    let census = st.census(&entry).await?;
    st.set_active(&id);
    let job = new_job(&st, "train-surrogate", &id);
    spawn_job(st.clone(), entry, job.clone(), move |st, e| {
        let gcn = e.snapshot().gcn.require("GCN")?;
        let (model, report) = train_surrogate(&e.dataset, &census, &gcn.model, &cfg)?;
        model.save(&e.paths.surrogate())?;
        graphlet_lens::io::write_json_atomic(&e.paths.surrogate_report(), &report)?;
        let summary = json!({ "cosine_similarity": report.cosine_similarity });
        e.replace(|a| {
            a.surrogate = crate::state::Slot::Ready(Arc::new(SurrogateArtifact { model, report }));
        });
        st.rankings.lock().expect("cache lock").clear();
        Ok(summary)
    });
    Ok(accepted(job))
}

async fn job_status(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Job>> {
    st.jobs
        .lock()
        .expect("job lock")
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown job {id:?}")))
}

async fn get_projection(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let entry = st.dataset(&id)?;
    st.set_active(&id);
    Ok(Json(st.projection(&entry).await?))
}

async fn create_selection(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Json(filter): Json<SelectionFilter>,
) -> ApiResult<impl IntoResponse> {
    let entry = st.dataset(&id)?;
    filter.validate()?;
    let points = st.projection(&entry).await?;
    let selection = select_group(&points, &filter)?;
    let sid = st.fresh_id("s");
    let stored = StoredSelection {
        id: sid.clone(),
        dataset: id.clone(),
        size: selection.len(),
        empty: selection.is_empty(),
        selection,
    };
    st.selections.write().expect("selection lock").insert(sid, stored.clone());
    st.set_active(&id);
    Ok((StatusCode::CREATED, Json(stored)))
}

async fn get_selection(State(st): State<Shared>, Path(sid): Path<String>) -> ApiResult<Json<StoredSelection>> {
    Ok(Json(st.selection(&sid)?))
}

#[derive(Deserialize)]
struct ModeQuery {
    mode: Option<String>,
}

fn parse_mode(q: &Option<String>) -> ApiResult<Mode> {
    match q.as_deref() {
        None => Ok(Mode::Factual),
        Some(m) => Ok(m.parse()?),
    }
}

/// Everything needed to build an [`ExplainContext`] off the async runtime.
struct Inputs {
    st: Shared,
    entry: Arc<DatasetEntry>,
    sel: StoredSelection,
    census: Arc<Vec<graphlet_lens::census::CensusResult>>,
    gcn: Option<Arc<GcnArtifact>>,
    surrogate: Option<Arc<SurrogateArtifact>>,
    generation: u64,
}

impl Inputs {
    async fn gather(st: &Shared, sid: &str, mode: Mode) -> ApiResult<Inputs> {
        let sel = st.selection(sid)?;
        let entry = st.dataset(&sel.dataset)?;
        let census = st.census(&entry).await?;
        let a = entry.snapshot();
        let gcn = Some(a.gcn.require("GCN")?);
        let surrogate = match mode {
            Mode::Counterfactual => Some(a.surrogate.require("surrogate")?),
            Mode::Factual => None,
        };
        Ok(Inputs {
            st: st.clone(),
            entry,
            sel,
            census,
            gcn,
            surrogate,
            generation: a.generation,
        })
    }

    fn with_ctx<T>(&self, f: impl FnOnce(&ExplainContext, &[usize]) -> T) -> T {
        let labels = self.entry.dataset.labels();
        let ctx = ExplainContext {
            catalog: self.st.catalog,
            census: &self.census,
            labels: &labels,
            class_probs: self.gcn.as_ref().map(|g| g.report.probabilities.as_slice()),
            surrogate: self.surrogate.as_ref().map(|s| &s.model),
            perturb: PerturbOptions::default(),
        };
        f(&ctx, &labels)
    }
}

async fn get_ranking(
    State(st): State<Shared>,
    Path(sid): Path<String>,
    Query(q): Query<ModeQuery>,
) -> ApiResult<Json<Value>> {
    let mode = parse_mode(&q.mode)?;
    let inputs = Inputs::gather(&st, &sid, mode).await?;
    let key = (sid.clone(), mode, inputs.generation);
    if let Some(v) = st.rankings.lock().expect("cache lock").get(&key) {
        return Ok(Json((**v).clone()));
    }
    let value = blocking(move || {
        let ranking = inputs.with_ctx(|ctx, _| rank_graphlets(ctx, &inputs.sel.selection, mode))?;
        serde_json::to_value(ranking).map_err(|e| ApiError::internal(e.to_string()))
    })
    .await?;
    st.rankings.lock().expect("cache lock").insert(key, Arc::new(value.clone()));
    Ok(Json(value))
}

async fn get_fidelity(
    State(st): State<Shared>,
    Path((sid, gidx)): Path<(String, usize)>,
    Query(q): Query<ModeQuery>,
) -> ApiResult<Json<Value>> {
    let mode = parse_mode(&q.mode)?;
    let inputs = Inputs::gather(&st, &sid, mode).await?;
    let value = blocking(move || {
        inputs.with_ctx(|ctx, _| -> ApiResult<Value> {
            let sel = &inputs.sel.selection;
            Ok(match mode {
                Mode::Factual => {
                    let s = factual_score(ctx, sel, gidx)?;
                    json!({
                        "graphlet": gidx,
                        "mode": mode,
                        "rho": s.rho,
                        "degenerate": s.degenerate,
                        "n": s.n,
                        "points": s.points,
                    })
                }
                Mode::Counterfactual => {
                    let s = counterfactual_score(ctx, sel, gidx)?;
                    let mut classes: [Vec<Value>; 2] = [Vec::new(), Vec::new()];
                    for p in &s.points {
                        classes[p.label].push(json!({
                            "id": p.id,
                            "frequency": p.frequency,
                            "delta": p.delta,
                            "l1": p.l1,
                        }));
                    }
                    json!({ "graphlet": gidx, "mode": mode, "total": s.total, "classes": classes })
                }
            })
        })
    })
    .await?;
    Ok(Json(value))
}

#[derive(Deserialize)]
struct BinsQuery {
    bins: Option<usize>,
}

async fn get_histogram(
    State(st): State<Shared>,
    Path((sid, gidx)): Path<(String, usize)>,
    Query(q): Query<BinsQuery>,
) -> ApiResult<impl IntoResponse> {
    let sel = st.selection(&sid)?;
    let entry = st.dataset(&sel.dataset)?;
    let census = st.census(&entry).await?;
    let labels = entry.dataset.labels();
    let ctx = ExplainContext {
        catalog: st.catalog,
        census: &census,
        labels: &labels,
        class_probs: None,
        surrogate: None,
        perturb: PerturbOptions::default(),
    };
    Ok(Json(class_histograms(&ctx, &sel.selection, gidx, q.bins.unwrap_or(10))?))
}

#[derive(Deserialize)]
struct RepresentativesQuery {
    graphlet: usize,
    mode: Option<String>,
}

async fn get_representatives(
    State(st): State<Shared>,
    Path(sid): Path<String>,
    Query(q): Query<RepresentativesQuery>,
) -> ApiResult<impl IntoResponse> {
    let mode = parse_mode(&q.mode)?;
    let inputs = Inputs::gather(&st, &sid, mode).await?;
    let reps = blocking(move || {
        inputs.with_ctx(|ctx, _| Ok(representatives(ctx, &inputs.sel.selection, q.graphlet, mode)?))
    })
    .await?;
    Ok(Json(reps))
}

#[derive(Deserialize)]
struct LayoutQuery {
    dataset: Option<String>,
    highlight: Option<usize>,
}

async fn get_layout(
    State(st): State<Shared>,
    Path(id): Path<usize>,
    Query(q): Query<LayoutQuery>,
) -> ApiResult<impl IntoResponse> {
    let entry = match &q.dataset {
        Some(d) => st.dataset(d)?,
        None => st.active_dataset()?,
    };
    let catalog = st.catalog;
    let g = entry
        .dataset
        .graphs
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("unknown graph {id} in dataset {:?}", entry.id)))?;
    let out = blocking(move || Ok(layout(&g, q.highlight, catalog)?)).await?;
    Ok(Json(out))
}
