use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::scoring::{rank_graphlets, representatives, ExplainContext, Mode, RankedGraphlet, Representatives};
use super::selection::Selection;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub dataset: String,
    pub selection: Selection,
    pub mode: Mode,
    pub ranking: Vec<RankedGraphlet>,
    /// Representative graphs for the top-ranked graphlet.
    pub representatives: Representatives,
}

/// Ranks every graphlet for the selection and picks representatives for the winner.
pub fn explain(ctx: &ExplainContext, dataset: &str, selection: &Selection, mode: Mode) -> Result<ExplanationReport> {
    let ranking = rank_graphlets(ctx, selection, mode)?;
    let representatives = representatives(ctx, selection, ranking[0].graphlet, mode)?;
    Ok(ExplanationReport {
        dataset: dataset.to_string(),
        selection: selection.clone(),
        mode,
        ranking,
        representatives,
    })
}

impl ExplanationReport {
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let mode = match self.mode {
            Mode::Factual => "factual",
            Mode::Counterfactual => "counterfactual",
        };
        let _ = writeln!(s, "# Graphlet explanation: {}\n", self.dataset);
        let _ = writeln!(s, "- Mode: {mode}");
        let _ = writeln!(s, "- Selected graphs: {}", self.selection.len());
        let mut classes = [0usize; 2];
        if let Some(first) = self.ranking.first() {
            for p in &first.per_graph {
                classes[p.label] += 1;
            }
        }
        let _ = writeln!(s, "- Class sizes: {} / {}\n", classes[0], classes[1]);
        match self.mode {
            Mode::Factual => {
                let _ = writeln!(s, "| Rank | Graphlet | Name | rho | abs(rho) |");
                let _ = writeln!(s, "|---:|---:|---|---:|---:|");
                for (i, r) in self.ranking.iter().enumerate() {
                    let rho = if r.degenerate {
                        "n/a".to_string()
                    } else {
                        format!("{:.4}", r.rho.unwrap_or(0.0))
                    };
                    let _ = writeln!(s, "| {} | {} | {} | {} | {:.4} |", i + 1, r.graphlet, r.name, rho, r.score);
                }
            }
            Mode::Counterfactual => {
                let _ = writeln!(s, "| Rank | Graphlet | Name | Total L1 | Mean delta (class 0) | Mean delta (class 1) |");
                let _ = writeln!(s, "|---:|---:|---|---:|---:|---:|");
                for (i, r) in self.ranking.iter().enumerate() {
                    let mut sum = [0.0; 2];
                    let mut n = [0usize; 2];
                    for p in &r.per_graph {
                        sum[p.label] += p.delta.unwrap_or(0.0);
                        n[p.label] += 1;
                    }
                    let mean = |c: usize| {
                        if n[c] == 0 {
                            "n/a".to_string()
                        } else {
                            format!("{:+.4}", sum[c] / n[c] as f64)
                        }
                    };
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} | {:.4} | {} | {} |",
                        i + 1,
                        r.graphlet,
                        r.name,
                        r.score,
                        mean(0),
                        mean(1)
                    );
                }
            }
        }
        let r = &self.representatives;
        let _ = writeln!(s, "\n## Representatives for graphlet {}\n", r.graphlet);
        let _ = writeln!(s, "- Top view: graph {}", r.top);
        let _ = writeln!(s, "- Bottom view: graph {}", r.bottom);
        let _ = writeln!(s, "- Rule: {}", r.rule);
        s
    }
}
