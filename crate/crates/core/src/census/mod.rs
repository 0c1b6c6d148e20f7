//! Graphlet census: 29-dimensional graphlet frequency vectors.
//!
//! For each size `k` in `{3, 4, 5}`, the frequency of graphlet `g` is the share
//! of connected induced `k`-node subgraphs isomorphic to `g`. The three size
//! groups are concatenated (2 + 6 + 21 entries).

pub mod canon;
mod catalog;
mod enumerate;

pub use canon::{canonical_form, CanonicalForm};
pub use catalog::{Graphlet, GraphletCatalog, N_GRAPHLETS, SIZES};
pub use enumerate::{
    enumerate_connected, for_each_connected, sample_connected, sample_connected_indexed,
    AdjacencyIndex,
};

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph};

use catalog::size_slot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusMode {
    Exhaustive,
    Sampled { n: usize, seed: u64 },
}

/// A 29-entry frequency vector grouped by graphlet size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyVector(pub Vec<f64>);

impl FrequencyVector {
    pub fn zeros() -> Self {
        FrequencyVector(vec![0.0; N_GRAPHLETS])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Sum of each size group.
    pub fn group_sums(&self) -> [f64; 3] {
        let offsets = [0, 2, 8, 29];
        std::array::from_fn(|s| self.0[offsets[s]..offsets[s + 1]].iter().sum())
    }
}

impl std::ops::Index<usize> for FrequencyVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusResult {
    pub graph_id: usize,
    pub mode: CensusMode,
    pub counts: Vec<u64>,
    pub totals: [u64; 3],
    pub frequencies: FrequencyVector,
}

impl CensusResult {
    fn from_counts(graph_id: usize, mode: CensusMode, counts: Vec<u64>, catalog: &GraphletCatalog) -> Self {
        let mut totals = [0u64; 3];
        for (s, &k) in SIZES.iter().enumerate() {
            totals[s] = counts[catalog.size_range(k)].iter().sum();
        }
        let freqs = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let t = totals[size_slot(catalog.get(i).nodes)];
                if t == 0 {
                    0.0
                } else {
                    c as f64 / t as f64
                }
            })
            .collect();
        CensusResult {
            graph_id,
            mode,
            counts,
            totals,
            frequencies: FrequencyVector(freqs),
        }
    }
}

fn classify_into(index: &AdjacencyIndex, catalog: &GraphletCatalog, set: &[usize], counts: &mut [u64]) {
    let mask = index.induced_mask(set);
    let g = catalog
        .classify(set.len(), mask)
        .expect("enumerated subgraphs are connected");
    counts[g] += 1;
}

/// Counts graphlets of every size in `g`.
///
/// Sizes larger than the graph, or (when sampling) sizes with no connected
/// subgraph, leave their group all-zero.
pub fn census(g: &Graph, catalog: &GraphletCatalog, mode: CensusMode) -> Result<CensusResult> {
    let index = AdjacencyIndex::new(g);
    let mut counts = vec![0u64; catalog.len()];
    for (s, &k) in SIZES.iter().enumerate() {
        if k > g.n_nodes {
            continue;
        }
        match mode {
            CensusMode::Exhaustive => {
                for_each_connected(&index, k, |set| classify_into(&index, catalog, set, &mut counts));
            }
            CensusMode::Sampled { n, seed } => {
                let seed = seed.wrapping_add(s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                match sample_connected_indexed(&index, k, n, seed) {
                    Ok(sets) => {
                        for set in &sets {
                            classify_into(&index, catalog, set, &mut counts);
                        }
                    }
                    Err(Error::Sampling(_)) if n > 0 => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(CensusResult::from_counts(g.id, mode, counts, catalog))
}

/// How a dataset-wide census picks a mode per graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CensusPolicy {
    /// Graphs with at most this many nodes are enumerated exhaustively.
    pub exhaustive_max_nodes: usize,
    /// Per-size quota for sampled graphs.
    pub samples: usize,
    pub seed: u64,
    /// Force one mode for every graph.
    pub force: Option<ForcedMode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcedMode {
    Exhaustive,
    Sample,
}

impl Default for CensusPolicy {
    fn default() -> Self {
        CensusPolicy {
            exhaustive_max_nodes: 120,
            samples: 20_000,
            seed: 0,
            force: None,
        }
    }
}

impl CensusPolicy {
    pub fn mode_for(&self, g: &Graph) -> CensusMode {
        let sampled = CensusMode::Sampled {
            n: self.samples,
            seed: self.seed ^ (g.id as u64).wrapping_mul(0xD134_2543_DE82_EF95),
        };
        match self.force {
            Some(ForcedMode::Exhaustive) => CensusMode::Exhaustive,
            Some(ForcedMode::Sample) => sampled,
            None if g.n_nodes <= self.exhaustive_max_nodes => CensusMode::Exhaustive,
            None => sampled,
        }
    }
}

/// Census of every graph, computed in parallel; results are in dataset order.
pub fn census_dataset(ds: &Dataset, catalog: &GraphletCatalog, policy: &CensusPolicy) -> Result<Vec<CensusResult>> {
    if policy.samples == 0 {
        return Err(Error::Config("census sample quota must be at least 1".into()));
    }
    ds.graphs
        .par_iter()
        .map(|g| census(g, catalog, policy.mode_for(g)))
        .collect()
}

pub fn load_census(path: &Path) -> Result<Vec<CensusResult>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let results: Vec<CensusResult> = serde_json::from_str(&text)?;
    for (i, r) in results.iter().enumerate() {
        if r.graph_id != i || r.counts.len() != N_GRAPHLETS || r.frequencies.0.len() != N_GRAPHLETS {
            return Err(Error::Dataset(format!(
                "census entry {i} malformed (graph_id {}, {} counts)",
                r.graph_id,
                r.counts.len()
            )));
        }
    }
    Ok(results)
}
