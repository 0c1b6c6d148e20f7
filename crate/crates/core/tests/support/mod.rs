//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use graphlet_lens::census::GraphletCatalog;
use graphlet_lens::graph::Graph;
use rand::Rng;

pub fn random_graph(id: usize, n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(id, n, edges, 0).unwrap()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for m in 0u32..(1 << n) {
        if m.count_ones() as usize == k {
            out.push((0..n).filter(|&i| m >> i & 1 == 1).collect());
        }
    }
    out
}

fn connected(nodes: &[usize], adj: &[Vec<bool>]) -> bool {
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..nodes.len() {
            if !seen[j] && adj[nodes[i]][nodes[j]] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn all_perms(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// True if the induced subgraph on `nodes` is isomorphic to the reference edge list.
fn isomorphic(nodes: &[usize], adj: &[Vec<bool>], k: usize, edges: &[(usize, usize)]) -> bool {
    let mut r = vec![vec![false; k]; k];
    for &(a, b) in edges {
        r[a][b] = true;
        r[b][a] = true;
    }
    all_perms(k).iter().any(|p| {
        (0..k).all(|i| (0..k).all(|j| i == j || adj[nodes[i]][nodes[j]] == r[p[i]][p[j]]))
    })
}

/// Counts of every graphlet by checking all C(n, k) node subsets.
pub fn naive_counts(g: &Graph, catalog: &GraphletCatalog) -> Vec<u64> {
    let n = g.n_nodes;
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in &g.edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let mut counts = vec![0u64; catalog.len()];
    for k in 3..=5usize.min(n) {
        for s in subsets(n, k) {
            if !connected(&s, &adj) {
                continue;
            }
            let hits: Vec<usize> = catalog
                .graphlets()
                .iter()
                .filter(|gl| gl.nodes == k && gl.edges.len() == (0..k).map(|i| (i + 1..k).filter(|&j| adj[s[i]][s[j]]).count()).sum::<usize>())
                .filter(|gl| isomorphic(&s, &adj, k, &gl.edges))
                .map(|gl| gl.index)
                .collect();
            assert_eq!(hits.len(), 1, "subset {s:?} matched {hits:?}");
            counts[hits[0]] += 1;
        }
    }
    counts
}

/// Tie-corrected Spearman from squared rank differences, ranks by counting.
pub fn spearman_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let rank = |v: &[f64], i: usize| {
        let less = v.iter().filter(|&&a| a < v[i]).count() as f64;
        let eq = v.iter().filter(|&&a| a == v[i]).count() as f64;
        less + (eq + 1.0) / 2.0
    };
    let tie_term = |v: &[f64]| {
        let mut seen = Vec::new();
        let mut t = 0.0;
        for &a in v {
            if !seen.contains(&a) {
                seen.push(a);
                let c = v.iter().filter(|&&b| b == a).count() as f64;
                t += c * c * c - c;
            }
        }
        t / 12.0
    };
    let nf = n as f64;
    let base = (nf * nf * nf - nf) / 12.0;
    let sx = base - tie_term(x);
    let sy = base - tie_term(y);
    if sx == 0.0 || sy == 0.0 {
        return None;
    }
    let d2: f64 = (0..n).map(|i| (rank(x, i) - rank(y, i)).powi(2)).sum();
    Some((sx + sy - d2) / (2.0 * (sx * sy).sqrt()))
}

/// Top eigenvector of the sample covariance from a dense symmetric eigensolver.
pub fn pca_oracle(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let d = rows[0].len();
    let m = nalgebra::DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let mean = m.row_mean();
    let mut c = m.clone();
    for mut r in c.row_iter_mut() {
        r -= &mean;
    }
    let cov = c.transpose() * &c / (n as f64 - 1.0);
    let eig = nalgebra::SymmetricEigen::new(cov);
    let (best, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    eig.eigenvectors.column(best).iter().copied().collect()
}

pub fn abs_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).abs()
}
