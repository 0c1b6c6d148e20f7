//! Undirected simple graphs with binary class labels, and datasets of them.

mod bahouse;
mod features;
mod tu;

pub use bahouse::{generate_ba_house, BaHouseConfig};
pub use features::{degree_onehot, max_degree, NodeFeatures};
pub use tu::{load_tu_dataset, write_tu_dataset};

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected simple graph. Edges are stored once as `(u, v)` with `u < v`,
/// sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub id: usize,
    #[serde(rename = "n")]
    pub n_nodes: usize,
    #[serde(with = "edge_pairs")]
    pub edges: Vec<(usize, usize)>,
    pub label: usize,
}

impl Graph {
    /// Builds a graph, normalizing edge orientation and dropping duplicates.
    /// Self-loops and out-of-range endpoints are rejected.
    pub fn new(
        id: usize,
        n_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        label: usize,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Dataset(format!("graph {id}: self-loop on node {u}")));
            }
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::Dataset(format!(
                    "graph {id}: edge ({u}, {v}) out of range for {n_nodes} nodes"
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        if label > 1 {
            return Err(Error::Dataset(format!("graph {id}: label {label} not in {{0,1}}")));
        }
        Ok(Graph {
            id,
            n_nodes,
            edges: set.into_iter().collect(),
            label,
        })
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n_nodes, "permutation length");
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        Graph {
            id: self.id,
            n_nodes: self.n_nodes,
            edges,
            label: self.label,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let rebuilt = Graph::new(self.id, self.n_nodes, self.edges.iter().copied(), self.label)?;
        if rebuilt.edges.len() != self.edges.len() {
            return Err(Error::Dataset(format!("graph {}: duplicate edges", self.id)));
        }
        Ok(())
    }
}

mod edge_pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(edges: &[(usize, usize)], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[usize; 2]> = edges.iter().map(|&(u, v)| [u, v]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, usize)>, D::Error> {
        let pairs = Vec::<[usize; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[u, v]| (u, v)).collect())
    }
}

/// An ordered collection of labelled graphs with dense ids `0..len`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub class_names: [String; 2],
    pub graphs: Vec<Graph>,
    /// Ids the graphs carried before the last filtering step, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_ids: Option<Vec<usize>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.graphs.iter().map(|g| g.label).collect()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for g in &self.graphs {
            counts[g.label] += 1;
        }
        counts
    }

    /// Checks dense ids and per-graph edge invariants.
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.graphs.iter().enumerate() {
            if g.id != i {
                return Err(Error::Dataset(format!(
                    "graph at position {i} has id {}; ids must be dense",
                    g.id
                )));
            }
            g.validate()?;
        }
        Ok(())
    }

    /// Fails unless both classes are represented.
    pub fn require_both_classes(&self) -> Result<()> {
        let [c0, c1] = self.class_counts();
        if c0 == 0 || c1 == 0 {
            return Err(Error::Dataset(format!(
                "dataset '{}' needs both classes, has {c0}/{c1}",
                self.name
            )));
        }
        Ok(())
    }

    /// Keeps graphs with strictly fewer than `max_nodes` nodes and re-densifies ids.
    pub fn filter_by_node_count(&self, max_nodes: usize) -> Result<Dataset> {
        if max_nodes == 0 {
            return Err(Error::Config("max_nodes must be at least 1".into()));
        }
        let mut graphs = Vec::new();
        let mut source_ids = Vec::new();
        for g in self.graphs.iter().filter(|g| g.n_nodes < max_nodes) {
            let original = self.source_ids.as_ref().map_or(g.id, |ids| ids[g.id]);
            let mut kept = g.clone();
            kept.id = graphs.len();
            graphs.push(kept);
            source_ids.push(original);
        }
        if graphs.is_empty() {
            return Err(Error::Dataset(format!(
                "no graph in '{}' has fewer than {max_nodes} nodes",
                self.name
            )));
        }
        let out = Dataset {
            name: self.name.clone(),
            class_names: self.class_names.clone(),
            graphs,
            source_ids: Some(source_ids),
        };
        out.require_both_classes()?;
        Ok(out)
    }

    pub fn load_json(path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ds: Dataset = serde_json::from_str(&text)?;
        ds.validate()?;
        Ok(ds)
    }
}
