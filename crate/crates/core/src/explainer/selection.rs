use serde::{Deserialize, Serialize};

use super::pca::top_principal_component;
use crate::census::CensusResult;
use crate::error::{Error, Result};
use crate::neural::ClassProbabilities;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionPoint {
    pub graph_id: usize,
    pub x: f64,
    pub y: f64,
    pub label: usize,
    pub confidence: f64,
}

/// Projects every graph to (PC1 of its frequency vector, PC1 of its embedding).
/// With `swap_axes` the two coordinates trade places.
pub fn projection(
    census: &[CensusResult],
    embeddings: &[Vec<f64>],
    probs: &[ClassProbabilities],
    labels: &[usize],
    swap_axes: bool,
) -> Result<Vec<ProjectionPoint>> {
    let n = census.len();
    if embeddings.len() != n || probs.len() != n || labels.len() != n {
        return Err(Error::Dimension(format!(
            "projection inputs disagree: {n} census rows, {} embeddings, {} probabilities, {} labels",
            embeddings.len(),
            probs.len(),
            labels.len()
        )));
    }
    let freqs: Vec<Vec<f64>> = census.iter().map(|c| c.frequencies.0.clone()).collect();
    let fx = top_principal_component(&freqs)?.scores;
    let ey = top_principal_component(embeddings)?.scores;
    Ok((0..n)
        .map(|i| {
            let (x, y) = if swap_axes { (ey[i], fx[i]) } else { (fx[i], ey[i]) };
            ProjectionPoint {
                graph_id: i,
                x,
                y,
                label: labels[i],
                confidence: probs[i].confidence(labels[i]),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Keep graphs with confidence strictly above the threshold.
    #[default]
    Higher,
    /// Keep graphs with confidence at or below the threshold.
    Lower,
}

/// Inclusive confidence range applied to one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Brush {
    pub class: usize,
    pub range: [f64; 2],
}

/// Filter stages, applied in field order; each one is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionFilter {
    /// Explicit graph ids to start from instead of the whole dataset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_ids: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub direction: Direction,
    /// Lasso polygon in projection coordinates; points on the boundary count as inside.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<[f64; 2]>>,
    /// When non-empty, only graphs of brushed classes inside one of their class's ranges remain.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub brushes: Vec<Brush>,
}

impl SelectionFilter {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.threshold {
            if !t.is_finite() {
                return Err(Error::Selection("threshold must be finite".into()));
            }
        }
        if let Some(poly) = &self.polygon {
            if poly.len() < 3 {
                return Err(Error::Selection(format!("lasso polygon needs at least 3 vertices, got {}", poly.len())));
            }
            if poly.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::Selection("lasso polygon has non-finite coordinates".into()));
            }
        }
        for b in &self.brushes {
            if b.class > 1 || b.range[0].partial_cmp(&b.range[1]).is_none_or(|o| o.is_gt()) {
                return Err(Error::Selection(format!("invalid brush {b:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Ascending, duplicate-free.
    pub graph_ids: Vec<usize>,
    pub filter: SelectionFilter,
}

impl Selection {
    pub fn from_ids(ids: impl IntoIterator<Item = usize>, n_graphs: usize) -> Result<Self> {
        let mut graph_ids: Vec<usize> = ids.into_iter().collect();
        graph_ids.sort_unstable();
        graph_ids.dedup();
        if let Some(&bad) = graph_ids.iter().find(|&&i| i >= n_graphs) {
            return Err(Error::Selection(format!("graph id {bad} outside dataset of {n_graphs} graphs")));
        }
        Ok(Selection {
            graph_ids: graph_ids.clone(),
            filter: SelectionFilter {
                graph_ids: Some(graph_ids),
                ..Default::default()
            },
        })
    }

    pub fn all(n_graphs: usize) -> Self {
        Selection {
            graph_ids: (0..n_graphs).collect(),
            filter: SelectionFilter::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.graph_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph_ids.is_empty()
    }
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let scale = (b[0] - a[0]).abs().max((b[1] - a[1]).abs()).max(1.0);
    cross.abs() <= 1e-12 * scale * scale
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// Even-odd point-in-polygon test; boundary points are inside.
pub fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if on_segment(p, a, b) {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Applies the filter stages to the projection points. An empty result is not an error.
pub fn select_group(points: &[ProjectionPoint], filter: &SelectionFilter) -> Result<Selection> {
    filter.validate()?;
    let mut keep: Vec<&ProjectionPoint> = match &filter.graph_ids {
        Some(ids) => {
            let by_id: std::collections::HashMap<usize, &ProjectionPoint> =
                points.iter().map(|p| (p.graph_id, p)).collect();
            let mut out = Vec::with_capacity(ids.len());
            for id in ids {
                out.push(
                    *by_id
                        .get(id)
                        .ok_or_else(|| Error::Selection(format!("graph id {id} is not in the projection")))?,
                );
            }
            out
        }
        None => points.iter().collect(),
    };
    if let Some(t) = filter.threshold {
        keep.retain(|p| match filter.direction {
            Direction::Higher => p.confidence > t,
            Direction::Lower => p.confidence <= t,
        });
    }
    if let Some(poly) = &filter.polygon {
        keep.retain(|p| point_in_polygon([p.x, p.y], poly));
    }
    if !filter.brushes.is_empty() {
        keep.retain(|p| {
            filter
                .brushes
                .iter()
                .any(|b| b.class == p.label && p.confidence >= b.range[0] && p.confidence <= b.range[1])
        });
    }
    let mut graph_ids: Vec<usize> = keep.iter().map(|p| p.graph_id).collect();
    graph_ids.sort_unstable();
    graph_ids.dedup();
    Ok(Selection {
        graph_ids,
        filter: filter.clone(),
    })
}
