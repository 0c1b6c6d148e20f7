//! Connected induced subgraph enumeration (ESU) and its randomized variant.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

use super::canon;

/// Adjacency lists plus an optional dense bit matrix for O(1) edge queries.
pub struct AdjacencyIndex {
    adj: Vec<Vec<usize>>,
    bits: Option<Vec<u64>>,
    words: usize,
}

const DENSE_LIMIT: usize = 4096;

impl AdjacencyIndex {
    pub fn new(g: &Graph) -> Self {
        let adj = g.adjacency();
        let n = g.n_nodes;
        let words = n.div_ceil(64);
        let bits = (n <= DENSE_LIMIT).then(|| {
            let mut bits = vec![0u64; n * words];
            for &(u, v) in &g.edges {
                bits[u * words + v / 64] |= 1 << (v % 64);
                bits[v * words + u / 64] |= 1 << (u % 64);
            }
            bits
        });
        AdjacencyIndex { adj, bits, words }
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        match &self.bits {
            Some(bits) => bits[u * self.words + v / 64] & (1 << (v % 64)) != 0,
            None => self.adj[u].binary_search(&v).is_ok(),
        }
    }

    /// Raw `k`-node mask of the subgraph induced by `nodes` (in the given order).
    pub fn induced_mask(&self, nodes: &[usize]) -> u16 {
        let k = nodes.len();
        let mut mask = 0u16;
        for i in 0..k {
            for j in i + 1..k {
                if self.has_edge(nodes[i], nodes[j]) {
                    mask |= 1 << canon::pair_bit(k, i, j);
                }
            }
        }
        mask
    }
}

/// Per-depth branch retention for randomized ESU. `None` keeps every branch.
type Retention<'r> = Option<(f64, &'r mut ChaCha8Rng)>;

struct Esu<'a, F: FnMut(&[usize])> {
    index: &'a AdjacencyIndex,
    k: usize,
    /// number of current-subgraph nodes whose closed neighbourhood contains the node
    covered: Vec<u32>,
    sub: Vec<usize>,
    visit: F,
}

impl<F: FnMut(&[usize])> Esu<'_, F> {
    fn push(&mut self, w: usize) {
        self.sub.push(w);
        self.covered[w] += 1;
        for &u in self.index.neighbors(w) {
            self.covered[u] += 1;
        }
    }

    fn pop(&mut self) {
        let w = self.sub.pop().expect("non-empty subgraph");
        self.covered[w] -= 1;
        for &u in self.index.neighbors(w) {
            self.covered[u] -= 1;
        }
    }

    fn keep(retention: &mut Retention<'_>) -> bool {
        match retention {
            None => true,
            Some((p, rng)) => *p >= 1.0 || rng.gen::<f64>() < *p,
        }
    }

    fn run(&mut self, retention: &mut Retention<'_>) {
        for root in 0..self.index.n_nodes() {
            if !Self::keep(retention) {
                continue;
            }
            self.push(root);
            if self.k == 1 {
                (self.visit)(&self.sub);
            } else {
                let ext: Vec<usize> = self
                    .index
                    .neighbors(root)
                    .iter()
                    .copied()
                    .filter(|&u| u > root)
                    .collect();
                self.extend(ext, root, retention);
            }
            self.pop();
        }
    }

    fn extend(&mut self, mut ext: Vec<usize>, root: usize, retention: &mut Retention<'_>) {
        let last_level = self.sub.len() + 1 == self.k;
        while let Some(w) = ext.pop() {
            if !Self::keep(retention) {
                continue;
            }
            if last_level {
                self.sub.push(w);
                (self.visit)(&self.sub);
                self.sub.pop();
                continue;
            }
            let mut next = ext.clone();
            for &u in self.index.neighbors(w) {
                if u > root && self.covered[u] == 0 {
                    next.push(u);
                }
            }
            self.push(w);
            self.extend(next, root, retention);
            self.pop();
        }
    }
}

/// Calls `visit` once for every `k`-node set inducing a connected subgraph,
/// in a deterministic order. The slice passed to `visit` is not sorted.
pub fn for_each_connected(index: &AdjacencyIndex, k: usize, visit: impl FnMut(&[usize])) {
    if k == 0 || k > index.n_nodes() {
        return;
    }
    let mut esu = Esu {
        index,
        k,
        covered: vec![0; index.n_nodes()],
        sub: Vec::with_capacity(k),
        visit,
    };
    esu.run(&mut None);
}

/// All connected induced `k`-node sets of `g`, each sorted ascending.
pub fn enumerate_connected(g: &Graph, k: usize) -> Vec<Vec<usize>> {
    let index = AdjacencyIndex::new(g);
    let mut out = Vec::new();
    for_each_connected(&index, k, |s| {
        let mut s = s.to_vec();
        s.sort_unstable();
        out.push(s);
    });
    out
}

fn rand_esu_pass(
    index: &AdjacencyIndex,
    k: usize,
    p: f64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<Vec<usize>>,
) -> usize {
    let before = out.len();
    let mut esu = Esu {
        index,
        k,
        covered: vec![0; index.n_nodes()],
        sub: Vec::with_capacity(k),
        visit: |s: &[usize]| {
            let mut s = s.to_vec();
            s.sort_unstable();
            out.push(s);
        },
    };
    esu.run(&mut Some((p, rng)));
    out.len() - before
}

/// Draws `n_samples` connected induced `k`-node sets with randomized ESU.
///
/// Every branch of the ESU tree is kept with the same probability `p` at each
/// depth, so each connected set survives a pass with probability `p^k`.
/// Passes repeat (with `p` re-estimated from the previous yield) until the pool
/// holds at least `n_samples` sets; the pool is then shuffled and truncated.
pub fn sample_connected_indexed(
    index: &AdjacencyIndex,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if n_samples == 0 {
        return Err(Error::Sampling("n_samples must be at least 1".into()));
    }
    if k == 0 || k > index.n_nodes() {
        return Err(Error::Sampling(format!(
            "cannot draw {k}-node subgraphs from a {}-node graph",
            index.n_nodes()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<Vec<usize>> = Vec::with_capacity(n_samples);
    // leaf retention probability q = p^k
    let mut q: f64 = 1e-3;
    loop {
        let p = q.powf(1.0 / k as f64).min(1.0);
        let got = rand_esu_pass(index, k, p, &mut rng, &mut pool);
        if pool.len() >= n_samples {
            break;
        }
        if got == 0 {
            if q >= 1.0 {
                return Err(Error::Sampling(format!("graph has no connected {k}-node subgraph")));
            }
            q = (q * 4.0).min(1.0);
            continue;
        }
        let estimated_total = got as f64 / q;
        let remaining = (n_samples - pool.len()) as f64;
        q = (1.25 * remaining / estimated_total).clamp(q.min(1.0), 1.0);
    }
    pool.shuffle(&mut rng);
    pool.truncate(n_samples);
    Ok(pool)
}

pub fn sample_connected(g: &Graph, k: usize, n_samples: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    sample_connected_indexed(&AdjacencyIndex::new(g), k, n_samples, seed)
}
