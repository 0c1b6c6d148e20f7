//! Synthetic BA-House dataset: Barabási–Albert graphs, half of them with
//! attached house motifs.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Dataset, Graph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaHouseConfig {
    pub n_graphs: usize,
    /// Inclusive range for the number of base-graph nodes.
    pub node_range: [usize; 2],
    /// Inclusive range for the number of houses attached to class-1 graphs.
    pub houses_range: [usize; 2],
    /// Edges added per new node in the preferential-attachment process.
    pub ba_attachment: usize,
    pub seed: u64,
}

impl Default for BaHouseConfig {
    fn default() -> Self {
        BaHouseConfig {
            n_graphs: 300,
            node_range: [10, 40],
            houses_range: [2, 10],
            ba_attachment: 2,
            seed: 0,
        }
    }
}

impl BaHouseConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.node_range;
        let [hlo, hhi] = self.houses_range;
        if lo < 5 || lo > hi {
            return Err(Error::Config(format!("node_range {:?} must satisfy 5 <= min <= max", self.node_range)));
        }
        if hlo < 1 || hlo > hhi {
            return Err(Error::Config(format!(
                "houses_range {:?} must satisfy 1 <= min <= max",
                self.houses_range
            )));
        }
        if self.ba_attachment < 1 || self.ba_attachment >= lo {
            return Err(Error::Config(format!(
                "ba_attachment {} must be in 1..{lo}",
                self.ba_attachment
            )));
        }
        if self.n_graphs == 0 {
            return Err(Error::Config("n_graphs must be positive".into()));
        }
        Ok(())
    }
}

/// Preferential attachment starting from a star on `m + 1` nodes; each new
/// node links to `m` distinct existing nodes drawn proportionally to degree.
fn barabasi_albert(n: usize, m: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..=m).map(|leaf| (0, leaf)).collect();
    // each node appears once per incident edge end
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * n * m);
    for &(u, v) in &edges {
        repeated.push(u);
        repeated.push(v);
    }
    for source in (m + 1)..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(repeated[rng.gen_range(0..repeated.len())]);
        }
        for &t in &targets {
            edges.push((t, source));
            repeated.push(t);
            repeated.push(source);
        }
    }
    edges
}

/// Appends one house (5 nodes, 6 edges) starting at node `first`, plus one
/// branch edge from a random house node to a random base node.
fn attach_house(
    edges: &mut Vec<(usize, usize)>,
    first: usize,
    n_base: usize,
    rng: &mut impl Rng,
) {
    let [b1, b2, m1, m2, r] = [first, first + 1, first + 2, first + 3, first + 4];
    edges.extend([(b1, b2), (b1, m1), (b2, m2), (m1, m2), (m1, r), (m2, r)]);
    let house_node = first + rng.gen_range(0..5);
    let base_node = rng.gen_range(0..n_base);
    edges.push((base_node, house_node));
}

/// Generates the dataset: even positions are plain BA graphs (class 0), odd
/// positions BA graphs with attached houses (class 1).
pub fn generate_ba_house(cfg: &BaHouseConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut graphs = Vec::with_capacity(cfg.n_graphs);
    for id in 0..cfg.n_graphs {
        let label = id % 2;
        let n_base = rng.gen_range(cfg.node_range[0]..=cfg.node_range[1]);
        let mut edges = barabasi_albert(n_base, cfg.ba_attachment, &mut rng);
        let mut n = n_base;
        if label == 1 {
            let houses = rng.gen_range(cfg.houses_range[0]..=cfg.houses_range[1]);
            for _ in 0..houses {
                attach_house(&mut edges, n, n_base, &mut rng);
                n += 5;
            }
        }
        graphs.push(Graph::new(id, n, edges, label)?);
    }
    Ok(Dataset {
        name: "BA-House".into(),
        class_names: ["Non-House".into(), "House".into()],
        graphs,
        source_ids: None,
    })
}
