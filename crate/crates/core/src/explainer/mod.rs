//! Group selection, projections, graphlet scoring, and explanation reports.

mod pca;
mod perturb;
mod report;
mod scoring;
mod selection;
mod spearman;

pub use pca::{top_principal_component, PrincipalComponent};
pub use perturb::{dependent_weights, perturb, perturb_with, PerturbOptions};
pub use report::{explain, ExplanationReport};
pub use scoring::{
    class_histograms, counterfactual_score, factual_score, rank_graphlets, representatives, score_graphlet,
    CounterfactualPoint, CounterfactualScore, ExplainContext, FactualPoint, FactualScore, Histogram, Mode, PerGraph,
    RankedGraphlet, Representatives,
};
pub use selection::{
    point_in_polygon, projection, select_group, Brush, Direction, ProjectionPoint, Selection, SelectionFilter,
};
pub use spearman::{average_ranks, spearman, Spearman};
