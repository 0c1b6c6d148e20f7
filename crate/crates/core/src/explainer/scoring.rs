use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::perturb::{perturb_with, PerturbOptions};
use super::selection::Selection;
use super::spearman::spearman;
use crate::census::{CensusResult, GraphletCatalog, N_GRAPHLETS};
use crate::error::{Error, Result};
use crate::neural::ClassProbabilities;
use crate::surrogate::SurrogateModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Factual,
    Counterfactual,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factual" => Ok(Mode::Factual),
            "counterfactual" => Ok(Mode::Counterfactual),
            other => Err(Error::Config(format!("unknown mode {other:?}; expected factual or counterfactual"))),
        }
    }
}

/// Everything the scorers read. Factual scoring needs `class_probs` (from the
/// GCN); counterfactual scoring needs `surrogate` and never touches the GCN.
#[derive(Clone, Copy)]
pub struct ExplainContext<'a> {
    pub catalog: &'a GraphletCatalog,
    pub census: &'a [CensusResult],
    pub labels: &'a [usize],
    pub class_probs: Option<&'a [ClassProbabilities]>,
    pub surrogate: Option<&'a SurrogateModel>,
    pub perturb: PerturbOptions,
}

impl<'a> ExplainContext<'a> {
    fn check(&self, sel: &Selection) -> Result<()> {
        if self.census.len() != self.labels.len() {
            return Err(Error::Dimension(format!(
                "{} census rows for {} labels",
                self.census.len(),
                self.labels.len()
            )));
        }
        if sel.is_empty() {
            return Err(Error::Selection("selection is empty".into()));
        }
        if let Some(&bad) = sel.graph_ids.iter().find(|&&i| i >= self.census.len()) {
            return Err(Error::Selection(format!("graph id {bad} outside dataset")));
        }
        Ok(())
    }

    fn probs(&self) -> Result<&'a [ClassProbabilities]> {
        let p = self
            .class_probs
            .ok_or_else(|| Error::Config("factual scoring requires GCN probabilities".into()))?;
        if p.len() != self.census.len() {
            return Err(Error::Dimension(format!("{} probabilities for {} graphs", p.len(), self.census.len())));
        }
        Ok(p)
    }

    fn surrogate(&self) -> Result<&'a SurrogateModel> {
        self.surrogate
            .ok_or_else(|| Error::Config("counterfactual scoring requires a trained surrogate".into()))
    }

    fn check_graphlet(&self, g: usize) -> Result<()> {
        if g >= N_GRAPHLETS {
            return Err(Error::Selection(format!("graphlet index {g} out of range 0..{N_GRAPHLETS}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactualPoint {
    pub id: usize,
    pub label: usize,
    pub frequency: f64,
    pub class_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactualScore {
    pub graphlet: usize,
    pub rho: f64,
    pub degenerate: bool,
    pub n: usize,
    pub points: Vec<FactualPoint>,
}

/// Spearman correlation between graphlet frequency and P(class 1) over the selection.
pub fn factual_score(ctx: &ExplainContext, sel: &Selection, graphlet: usize) -> Result<FactualScore> {
    ctx.check(sel)?;
    ctx.check_graphlet(graphlet)?;
    let probs = ctx.probs()?;
    let classes: std::collections::BTreeSet<usize> = sel.graph_ids.iter().map(|&i| ctx.labels[i]).collect();
    if classes.len() < 2 {
        return Err(Error::Selection("factual scoring needs graphs of both classes in the selection".into()));
    }
    let points: Vec<FactualPoint> = sel
        .graph_ids
        .iter()
        .map(|&id| FactualPoint {
            id,
            label: ctx.labels[id],
            frequency: ctx.census[id].frequencies[graphlet],
            class_prob: probs[id].classification_probability(),
        })
        .collect();
    let x: Vec<f64> = points.iter().map(|p| p.frequency).collect();
    let y: Vec<f64> = points.iter().map(|p| p.class_prob).collect();
    let s = spearman(&x, &y)?;
    Ok(FactualScore {
        graphlet,
        rho: s.rho,
        degenerate: s.degenerate,
        n: points.len(),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualPoint {
    pub id: usize,
    pub label: usize,
    pub frequency: f64,
    pub baseline: ClassProbabilities,
    pub perturbed: ClassProbabilities,
    /// Perturbed minus baseline confidence in the graph's own class.
    pub delta: f64,
    pub l1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualScore {
    pub graphlet: usize,
    pub total: f64,
    pub points: Vec<CounterfactualPoint>,
}

/// Two surrogate inference runs per graph: original and perturbed frequencies.
pub fn counterfactual_score(ctx: &ExplainContext, sel: &Selection, graphlet: usize) -> Result<CounterfactualScore> {
    ctx.check(sel)?;
    ctx.check_graphlet(graphlet)?;
    let model = ctx.surrogate()?;
    let points: Vec<CounterfactualPoint> = sel
        .graph_ids
        .iter()
        .map(|&id| {
            let f = &ctx.census[id].frequencies;
            let label = ctx.labels[id];
            let baseline = model.surrogate_probs(f);
            let perturbed = model.surrogate_probs(&perturb_with(f, graphlet, ctx.catalog, ctx.perturb));
            CounterfactualPoint {
                id,
                label,
                frequency: f[graphlet],
                baseline,
                perturbed,
                delta: perturbed.confidence(label) - baseline.confidence(label),
                l1: perturbed.l1_distance(&baseline),
            }
        })
        .collect();
    let total = points.iter().map(|p| p.l1).sum();
    Ok(CounterfactualScore { graphlet, total, points })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerGraph {
    pub id: usize,
    pub label: usize,
    /// Graphlet frequency.
    pub x: f64,
    /// P(class 1), factual mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    /// Signed confidence change, counterfactual mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedGraphlet {
    pub graphlet: usize,
    pub name: String,
    /// Sort key: |rho| or the total L1 change.
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
    pub per_graph: Vec<PerGraph>,
}

/// Scores one graphlet in the given mode.
pub fn score_graphlet(ctx: &ExplainContext, sel: &Selection, graphlet: usize, mode: Mode) -> Result<RankedGraphlet> {
    let name = ctx.catalog.get(graphlet).name.clone();
    Ok(match mode {
        Mode::Factual => {
            let s = factual_score(ctx, sel, graphlet)?;
            RankedGraphlet {
                graphlet,
                name,
                score: s.rho.abs(),
                rho: Some(s.rho),
                degenerate: s.degenerate,
                per_graph: s
                    .points
                    .iter()
                    .map(|p| PerGraph {
                        id: p.id,
                        label: p.label,
                        x: p.frequency,
                        y: Some(p.class_prob),
                        delta: None,
                        l1: None,
                    })
                    .collect(),
            }
        }
        Mode::Counterfactual => {
            let s = counterfactual_score(ctx, sel, graphlet)?;
            RankedGraphlet {
                graphlet,
                name,
                score: s.total,
                rho: None,
                degenerate: false,
                per_graph: s
                    .points
                    .iter()
                    .map(|p| PerGraph {
                        id: p.id,
                        label: p.label,
                        x: p.frequency,
                        y: None,
                        delta: Some(p.delta),
                        l1: Some(p.l1),
                    })
                    .collect(),
            }
        }
    })
}

/// All 29 graphlets sorted by descending score, ties by ascending index.
pub fn rank_graphlets(ctx: &ExplainContext, sel: &Selection, mode: Mode) -> Result<Vec<RankedGraphlet>> {
    let mut ranked = (0..N_GRAPHLETS)
        .into_par_iter()
        .map(|g| score_graphlet(ctx, sel, g, mode))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.graphlet.cmp(&b.graphlet)));
    Ok(ranked)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub graphlet: usize,
    /// `n_bins + 1` shared edges spanning [0, max frequency in the selection].
    pub edges: Vec<f64>,
    pub counts: [Vec<u64>; 2],
}

pub fn class_histograms(ctx: &ExplainContext, sel: &Selection, graphlet: usize, n_bins: usize) -> Result<Histogram> {
    ctx.check(sel)?;
    ctx.check_graphlet(graphlet)?;
    if n_bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let freq = |id: usize| ctx.census[id].frequencies[graphlet];
    let max = sel.graph_ids.iter().map(|&i| freq(i)).fold(0.0, f64::max);
    let edges = (0..=n_bins).map(|i| max * i as f64 / n_bins as f64).collect();
    let mut counts = [vec![0u64; n_bins], vec![0u64; n_bins]];
    for &id in &sel.graph_ids {
        let bin = if max > 0.0 {
            ((freq(id) / max * n_bins as f64) as usize).min(n_bins - 1)
        } else {
            0
        };
        counts[ctx.labels[id]][bin] += 1;
    }
    Ok(Histogram { graphlet, edges, counts })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representatives {
    pub graphlet: usize,
    pub mode: Mode,
    pub top: usize,
    pub bottom: usize,
    pub rule: String,
}

fn pick(ids: impl Iterator<Item = (usize, f64)>, largest: bool) -> Option<usize> {
    ids.fold(None, |best: Option<(usize, f64)>, (id, v)| match best {
        None => Some((id, v)),
        Some((bid, bv)) => {
            let better = if largest { v > bv } else { v < bv };
            if better || (v == bv && id < bid) {
                Some((id, v))
            } else {
                Some((bid, bv))
            }
        }
    })
    .map(|(id, _)| id)
}

/// Factual: top is the lowest-frequency graph of the lower-mean class, bottom
/// the highest-frequency graph of the other class. Counterfactual: smallest
/// and largest L1 change. Ties go to the lowest graph id.
pub fn representatives(ctx: &ExplainContext, sel: &Selection, graphlet: usize, mode: Mode) -> Result<Representatives> {
    ctx.check(sel)?;
    ctx.check_graphlet(graphlet)?;
    match mode {
        Mode::Factual => {
            let freq = |id: usize| ctx.census[id].frequencies[graphlet];
            let mut sums = [0.0; 2];
            let mut counts = [0usize; 2];
            for &id in &sel.graph_ids {
                sums[ctx.labels[id]] += freq(id);
                counts[ctx.labels[id]] += 1;
            }
            if counts.contains(&0) {
                return Err(Error::Selection("factual representatives need graphs of both classes".into()));
            }
            let means = [sums[0] / counts[0] as f64, sums[1] / counts[1] as f64];
            let low = if means[0] <= means[1] { 0 } else { 1 };
            let of_class = |c: usize| sel.graph_ids.iter().filter(move |&&i| ctx.labels[i] == c).map(|&i| (i, freq(i)));
            Ok(Representatives {
                graphlet,
                mode,
                top: pick(of_class(low), false).expect("non-empty class"),
                bottom: pick(of_class(1 - low), true).expect("non-empty class"),
                rule: format!(
                    "top: lowest frequency in class {low} (lower mean); bottom: highest frequency in class {}",
                    1 - low
                ),
            })
        }
        Mode::Counterfactual => {
            let s = counterfactual_score(ctx, sel, graphlet)?;
            let l1 = || s.points.iter().map(|p| (p.id, p.l1));
            Ok(Representatives {
                graphlet,
                mode,
                top: pick(l1(), false).expect("non-empty selection"),
                bottom: pick(l1(), true).expect("non-empty selection"),
                rule: "top: smallest confidence change; bottom: largest confidence change".into(),
            })
        }
    }
}
