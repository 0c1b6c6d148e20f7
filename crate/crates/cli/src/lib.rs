//! Batch entry points for the graphlet explanation pipeline.
//!
//! Exit codes: 0 on success, 1 on invalid input or configuration, 2 on
//! runtime failure. Every artifact is written atomically.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphlet_lens::artifacts::{report_path, ArtifactPaths};
use graphlet_lens::census::{census_dataset, load_census, CensusPolicy, ForcedMode, GraphletCatalog};
use graphlet_lens::explainer::{
    explain, projection, select_group, ExplainContext, ExplanationReport, Mode, PerturbOptions, Selection,
    SelectionFilter,
};
use graphlet_lens::graph::{generate_ba_house, load_tu_dataset, BaHouseConfig, Dataset};
use graphlet_lens::io::{read_json, write_atomic, write_json_atomic};
use graphlet_lens::neural::{train_gcn, GcnConfig, GcnModel, TrainReport};
use graphlet_lens::surrogate::{train_surrogate, SurrogateModel};
use graphlet_lens::{Error, Result};
use graphlet_lens_service::ServiceConfig;

#[derive(Parser, Debug)]
#[command(name = "graphlet-lens", version, about = "Graphlet-based explanations for graph classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the synthetic BA-House dataset.
    GenBahouse(GenArgs),
    /// Convert a TU-format dataset directory to dataset JSON.
    ImportTu(ImportArgs),
    /// Compute graphlet frequency vectors for every graph.
    Census(CensusArgs),
    /// Train the GCN classifier.
    TrainGcn(TrainGcnArgs),
    /// Train the encoder-decoder surrogate against a trained GCN.
    TrainSurrogate(TrainSurrogateArgs),
    /// Rank graphlets for a selection of graphs.
    Explain(ExplainArgs),
    /// Render an explanation report as Markdown.
    Report(ReportArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

/// Location of per-dataset artifacts; individual path flags override it.
#[derive(Args, Debug, Clone)]
pub struct ArtifactArgs {
    #[arg(long, default_value = "artifacts")]
    pub artifacts: PathBuf,
}

impl ArtifactArgs {
    fn paths(&self) -> ArtifactPaths {
        ArtifactPaths::new(&self.artifacts)
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// JSON file with generator settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_graphs: Option<usize>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    pub node_range: Option<Vec<usize>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    pub houses_range: Option<Vec<usize>>,
    #[arg(long)]
    pub ba_attachment: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ImportArgs {
    /// Directory holding `<name>_A.txt`, `<name>_graph_indicator.txt`, `<name>_graph_labels.txt`.
    #[arg(long)]
    pub dir: PathBuf,
    /// Keep only graphs with fewer nodes than this.
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CensusModeArg {
    Auto,
    Exhaustive,
    Sample,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub artifacts: ArtifactArgs,
    /// JSON census policy; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: CensusModeArg,
    #[arg(long)]
    pub exhaustive_max_nodes: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainGcnArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub artifacts: ArtifactArgs,
    /// JSON GCN configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model checkpoint path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Training report path; defaults to `<out stem>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainSurrogateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub artifacts: ArtifactArgs,
    #[arg(long)]
    pub census: Option<PathBuf>,
    #[arg(long)]
    pub gcn: Option<PathBuf>,
    /// JSON surrogate configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExplainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub artifacts: ArtifactArgs,
    #[arg(long)]
    pub census: Option<PathBuf>,
    /// GCN training report (probabilities and embeddings).
    #[arg(long)]
    pub gcn_report: Option<PathBuf>,
    #[arg(long)]
    pub surrogate: Option<PathBuf>,
    /// JSON selection filter; all graphs when omitted.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Mode,
    /// Rescale size groups after perturbation.
    #[arg(long)]
    pub renormalize: bool,
    /// Put embedding PC1 on x and frequency PC1 on y when applying a lasso.
    #[arg(long)]
    pub swap_axes: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Explanation report JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Markdown output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub artifact_dir: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

fn config_or_default<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(p) => read_json(p).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", p.display())),
            other => other,
        }),
        None => Ok(T::default()),
    }
}

fn range(v: &[usize]) -> [usize; 2] {
    [v[0], v[1]]
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} not found at {}", path.display())))
    }
}

fn gen_bahouse(a: GenArgs) -> Result<String> {
    let mut cfg: BaHouseConfig = config_or_default(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.n_graphs {
        cfg.n_graphs = n;
    }
    if let Some(r) = &a.node_range {
        cfg.node_range = range(r);
    }
    if let Some(r) = &a.houses_range {
        cfg.houses_range = range(r);
    }
    if let Some(m) = a.ba_attachment {
        cfg.ba_attachment = m;
    }
    let ds = generate_ba_house(&cfg)?;
    write_json_atomic(&a.out, &ds)?;
    let [c0, c1] = ds.class_counts();
    Ok(format!("wrote {} graphs ({c0} / {c1}) to {}", ds.len(), a.out.display()))
}

fn import_tu(a: ImportArgs) -> Result<String> {
    let mut ds = load_tu_dataset(&a.dir)?;
    if let Some(m) = a.max_nodes {
        ds = ds.filter_by_node_count(m)?;
    }
    write_json_atomic(&a.out, &ds)?;
    let [c0, c1] = ds.class_counts();
    Ok(format!("wrote {} graphs ({c0} / {c1}) to {}", ds.len(), a.out.display()))
}

fn run_census(a: CensusArgs) -> Result<String> {
    let ds = load_dataset(&a.dataset)?;
    let mut policy: CensusPolicy = config_or_default(&a.config)?;
    if let Some(v) = a.exhaustive_max_nodes {
        policy.exhaustive_max_nodes = v;
    }
    if let Some(v) = a.samples {
        policy.samples = v;
    }
    if let Some(v) = a.seed {
        policy.seed = v;
    }
    match a.mode {
        CensusModeArg::Auto => {}
        CensusModeArg::Exhaustive => policy.force = Some(ForcedMode::Exhaustive),
        CensusModeArg::Sample => policy.force = Some(ForcedMode::Sample),
    }
    let results = census_dataset(&ds, GraphletCatalog::shared(), &policy)?;
    let out = a.out.unwrap_or_else(|| a.artifacts.paths().census());
    write_json_atomic(&out, &results)?;
    Ok(format!("wrote census of {} graphs to {}", results.len(), out.display()))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    require_file(path, "dataset")?;
    let ds = Dataset::load_json(path)?;
    ds.require_both_classes()?;
    Ok(ds)
}

fn run_train_gcn(a: TrainGcnArgs) -> Result<String> {
    let ds = load_dataset(&a.dataset)?;
    let mut cfg: GcnConfig = config_or_default(&a.config)?;
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.train_fraction {
        cfg.train_fraction = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    let (model, report) = train_gcn(&ds, &cfg)?;
    let out = a.out.unwrap_or_else(|| a.artifacts.paths().gcn());
    let report_out = a.report.unwrap_or_else(|| report_path(&out));
    model.save(&out)?;
    report.save(&report_out)?;
    Ok(format!(
        "accuracy {:.4}, final loss {:.6}; wrote {} and {}",
        report.accuracy,
        report.final_loss,
        out.display(),
        report_out.display()
    ))
}

fn run_train_surrogate(a: TrainSurrogateArgs) -> Result<String> {
    let ds = load_dataset(&a.dataset)?;
    let paths = a.artifacts.paths();
    let census_path = a.census.unwrap_or_else(|| paths.census());
    let gcn_path = a.gcn.unwrap_or_else(|| paths.gcn());
    require_file(&census_path, "census")?;
    require_file(&gcn_path, "GCN checkpoint")?;
    let census = load_census(&census_path)?;
    let gcn = GcnModel::load(&gcn_path)?;
    let mut cfg: graphlet_lens::surrogate::SurrogateConfig = config_or_default(&a.config)?;
    if let Some(v) = a.steps {
        cfg.steps = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    let (model, report) = train_surrogate(&ds, &census, &gcn, &cfg)?;
    let out = a.out.unwrap_or_else(|| paths.surrogate());
    let report_out = a.report.unwrap_or_else(|| report_path(&out));
    model.save(&out)?;
    write_json_atomic(&report_out, &report)?;
    Ok(format!(
        "cosine similarity {:.4}; wrote {} and {}",
        report.cosine_similarity,
        out.display(),
        report_out.display()
    ))
}

fn run_explain(a: ExplainArgs) -> Result<String> {
    let ds = load_dataset(&a.dataset)?;
    let paths = a.artifacts.paths();
    let census_path = a.census.clone().unwrap_or_else(|| paths.census());
    require_file(&census_path, "census")?;
    let census = load_census(&census_path)?;
    if census.len() != ds.len() {
        return Err(Error::Dimension(format!("census has {} rows, dataset {} graphs", census.len(), ds.len())));
    }
    let gcn_report_path = a.gcn_report.clone().unwrap_or_else(|| paths.gcn_report());
    let filter: Option<SelectionFilter> = match &a.selection {
        Some(p) => {
            require_file(p, "selection")?;
            Some(config_or_default(&Some(p.clone()))?)
        }
        None => None,
    };
    let needs_gcn = a.mode == Mode::Factual || filter.is_some();
    let gcn_report = if needs_gcn {
        require_file(&gcn_report_path, "GCN training report")?;
        Some(TrainReport::load(&gcn_report_path)?)
    } else {
        None
    };
    let surrogate = match a.mode {
        Mode::Counterfactual => {
            let p = a.surrogate.clone().unwrap_or_else(|| paths.surrogate());
            if !p.is_file() {
                return Err(Error::Config(format!(
                    "counterfactual mode requires a trained surrogate; none at {}",
                    p.display()
                )));
            }
            Some(SurrogateModel::load(&p)?)
        }
        Mode::Factual => None,
    };
    let labels = ds.labels();
    let selection = match (&filter, &gcn_report) {
        (Some(f), Some(r)) => {
            let points = projection(&census, &r.embeddings, &r.probabilities, &labels, a.swap_axes)?;
            select_group(&points, f)?
        }
        _ => Selection::all(ds.len()),
    };
    if selection.is_empty() {
        return Err(Error::Selection("the selection filter matched no graphs".into()));
    }
    let ctx = ExplainContext {
        catalog: GraphletCatalog::shared(),
        census: &census,
        labels: &labels,
        class_probs: gcn_report.as_ref().map(|r| r.probabilities.as_slice()),
        surrogate: surrogate.as_ref(),
        perturb: PerturbOptions {
            renormalize: a.renormalize,
        },
    };
    let report = explain(&ctx, &ds.name, &selection, a.mode)?;
    write_json_atomic(&a.out, &report)?;
    let top = &report.ranking[0];
    Ok(format!(
        "{} graphs; top graphlet {} ({}) score {:.4}; wrote {}",
        selection.len(),
        top.graphlet,
        top.name,
        top.score,
        a.out.display()
    ))
}

fn run_report(a: ReportArgs) -> Result<String> {
    require_file(&a.input, "explanation report")?;
    let report: ExplanationReport = read_json(&a.input)?;
    let md = report.to_markdown();
    match a.out {
        Some(p) => {
            write_atomic(&p, md.as_bytes())?;
            Ok(format!("wrote {}", p.display()))
        }
        None => Ok(md),
    }
}

fn run_serve(a: ServeArgs) -> Result<String> {
    let mut cfg = ServiceConfig::load(a.config.as_deref())?;
    if let Some(p) = a.port {
        cfg.port = p;
    }
    if let Some(d) = a.data_dir {
        cfg.data_dir = d;
    }
    if let Some(d) = a.artifact_dir {
        cfg.artifact_dir = d;
    }
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    rt.block_on(graphlet_lens_service::serve(cfg))?;
    Ok("server stopped".into())
}

pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::GenBahouse(a) => gen_bahouse(a),
        Command::ImportTu(a) => import_tu(a),
        Command::Census(a) => run_census(a),
        Command::TrainGcn(a) => run_train_gcn(a),
        Command::TrainSurrogate(a) => run_train_surrogate(a),
        Command::Explain(a) => run_explain(a),
        Command::Report(a) => run_report(a),
        Command::Serve(a) => run_serve(a),
    }
}

/// Parses arguments, runs the command, prints diagnostics, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(msg) => {
            let _ = writeln!(std::io::stdout(), "{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
