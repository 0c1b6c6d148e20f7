//! Deterministic force-directed layouts with optional graphlet highlighting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::census::{for_each_connected, AdjacencyIndex, GraphletCatalog, N_GRAPHLETS};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const ITERATIONS: usize = 300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutNode {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Highlight {
    pub graphlet: Option<usize>,
    /// Node-disjoint instances of the graphlet, each sorted.
    pub instances: Vec<Vec<usize>>,
    pub nodes: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutGraph {
    pub graph_id: usize,
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<[usize; 2]>,
    pub highlight: Highlight,
}

/// Fruchterman-Reingold positions, centered at the origin and scaled into [-1, 1].
pub fn fruchterman_reingold(g: &Graph, iterations: usize, seed: u64) -> Vec<[f64; 2]> {
    let n = g.n_nodes;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![[0.0, 0.0]];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)]).collect();
    let k = (1.0 / n as f64).sqrt();
    let t0 = 0.1;
    for it in 0..iterations {
        let temp = t0 * (1.0 - it as f64 / iterations as f64);
        let mut disp = vec![[0.0f64; 2]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = [pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]];
                let dist = (d[0] * d[0] + d[1] * d[1]).sqrt().max(1e-9);
                let f = k * k / dist;
                for a in 0..2 {
                    disp[i][a] += d[a] / dist * f;
                    disp[j][a] -= d[a] / dist * f;
                }
            }
        }
        for &(u, v) in &g.edges {
            let d = [pos[u][0] - pos[v][0], pos[u][1] - pos[v][1]];
            let dist = (d[0] * d[0] + d[1] * d[1]).sqrt().max(1e-9);
            let f = dist * dist / k;
            for a in 0..2 {
                disp[u][a] -= d[a] / dist * f;
                disp[v][a] += d[a] / dist * f;
            }
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if len > 0.0 {
                let step = len.min(temp);
                p[0] += d[0] / len * step;
                p[1] += d[1] / len * step;
            }
        }
    }
    let mut c = [0.0; 2];
    for p in &pos {
        c[0] += p[0] / n as f64;
        c[1] += p[1] / n as f64;
    }
    let scale = pos
        .iter()
        .map(|p| (p[0] - c[0]).abs().max((p[1] - c[1]).abs()))
        .fold(0.0, f64::max);
    pos.iter()
        .map(|p| {
            if scale > 0.0 {
                [(p[0] - c[0]) / scale, (p[1] - c[1]) / scale]
            } else {
                [0.0, 0.0]
            }
        })
        .collect()
}

/// Greedy node-disjoint instances of `graphlet`, scanning connected sets in lexicographic order.
pub fn graphlet_instances(g: &Graph, graphlet: usize, catalog: &GraphletCatalog) -> Vec<Vec<usize>> {
    let k = catalog.get(graphlet).nodes;
    if k > g.n_nodes {
        return Vec::new();
    }
    let index = AdjacencyIndex::new(g);
    let mut matches = Vec::new();
    for_each_connected(&index, k, |nodes| {
        if catalog.classify(k, index.induced_mask(nodes)) == Some(graphlet) {
            let mut s = nodes.to_vec();
            s.sort_unstable();
            matches.push(s);
        }
    });
    matches.sort();
    let mut used = vec![false; g.n_nodes];
    let mut out = Vec::new();
    for m in matches {
        if m.iter().all(|&v| !used[v]) {
            m.iter().for_each(|&v| used[v] = true);
            out.push(m);
        }
    }
    out
}

pub fn layout(g: &Graph, graphlet: Option<usize>, catalog: &GraphletCatalog) -> Result<LayoutGraph> {
    let mut highlight = Highlight::default();
    if let Some(h) = graphlet {
        if h >= N_GRAPHLETS {
            return Err(Error::Selection(format!("graphlet index {h} out of range 0..{N_GRAPHLETS}")));
        }
        let instances = graphlet_instances(g, h, catalog);
        let index = AdjacencyIndex::new(g);
        for inst in &instances {
            highlight.nodes.extend_from_slice(inst);
            for (a, &u) in inst.iter().enumerate() {
                for &v in &inst[a + 1..] {
                    if index.has_edge(u, v) {
                        highlight.edges.push([u, v]);
                    }
                }
            }
        }
        highlight.nodes.sort_unstable();
        highlight.edges.sort_unstable();
        highlight.graphlet = Some(h);
        highlight.instances = instances;
    }
    let pos = fruchterman_reingold(g, ITERATIONS, g.id as u64);
    Ok(LayoutGraph {
        graph_id: g.id,
        nodes: pos.iter().enumerate().map(|(id, p)| LayoutNode { id, x: p[0], y: p[1] }).collect(),
        edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        highlight,
    })
}
