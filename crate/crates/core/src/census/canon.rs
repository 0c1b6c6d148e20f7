//! Adjacency bitmasks for graphs on at most five nodes and their canonical forms.
//!
//! Node pairs `(i, j)` with `i < j` are numbered lexicographically:
//! `(0,1), (0,2), ..., (0,k-1), (1,2), ...`; bit `b` of the mask is set when
//! the `b`-th pair is an edge. Five nodes need ten bits.

use serde::{Deserialize, Serialize};

pub const MAX_NODES: usize = 5;

/// Bit position of the unordered pair `{i, j}` in a `k`-node mask.
pub fn pair_bit(k: usize, i: usize, j: usize) -> u32 {
    debug_assert!(i != j && i < k && j < k);
    let (i, j) = (i.min(j), i.max(j));
    // pairs before row i: sum_{r<i} (k-1-r)
    (i * (2 * k - i - 1) / 2 + (j - i - 1)) as u32
}

pub fn n_pairs(k: usize) -> usize {
    k * (k.saturating_sub(1)) / 2
}

pub fn has_edge(k: usize, mask: u16, i: usize, j: usize) -> bool {
    mask & (1 << pair_bit(k, i, j)) != 0
}

pub fn mask_from_edges(k: usize, edges: &[(usize, usize)]) -> u16 {
    edges.iter().fold(0, |m, &(i, j)| m | (1 << pair_bit(k, i, j)))
}

pub fn edges_of(k: usize, mask: u16) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if has_edge(k, mask, i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Mask of the graph with node `i` renamed to `perm[i]`.
pub fn permute_mask(k: usize, mask: u16, perm: &[usize]) -> u16 {
    let mut out = 0u16;
    for i in 0..k {
        for j in i + 1..k {
            if has_edge(k, mask, i, j) {
                out |= 1 << pair_bit(k, perm[i], perm[j]);
            }
        }
    }
    out
}

pub fn is_connected(k: usize, mask: u16) -> bool {
    if k == 0 {
        return false;
    }
    let mut seen = 1u8;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for v in 0..k {
            if v != u && seen & (1 << v) == 0 && has_edge(k, mask, u, v) {
                seen |= 1 << v;
                stack.push(v);
            }
        }
    }
    seen.count_ones() as usize == k
}

/// Mask of the `(k-1)`-node graph left after deleting node `v`.
pub fn delete_node(k: usize, mask: u16, v: usize) -> u16 {
    let keep: Vec<usize> = (0..k).filter(|&u| u != v).collect();
    let mut out = 0u16;
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate().skip(a + 1) {
            if has_edge(k, mask, i, j) {
                out |= 1 << pair_bit(k - 1, a, b);
            }
        }
    }
    out
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Isomorphism-invariant form of a small graph: node count plus the minimum
/// mask over all node relabelings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub k: u8,
    pub mask: u16,
}

impl CanonicalForm {
    /// `[k, mask_hi, mask_lo]`; byte order matches the derived ordering.
    pub fn to_bytes(self) -> [u8; 3] {
        let [hi, lo] = self.mask.to_be_bytes();
        [self.k, hi, lo]
    }
}

pub fn canonical_form(k: usize, mask: u16) -> CanonicalForm {
    assert!((1..=MAX_NODES).contains(&k), "canonical_form supports 1..=5 nodes");
    let best = permutations(k)
        .iter()
        .map(|p| permute_mask(k, mask, p))
        .min()
        .unwrap_or(mask);
    CanonicalForm { k: k as u8, mask: best }
}
