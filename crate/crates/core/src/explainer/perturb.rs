use serde::{Deserialize, Serialize};

use crate::census::{FrequencyVector, GraphletCatalog};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbOptions {
    /// Rescale each non-empty size group to sum 1 after redistribution.
    pub renormalize: bool,
}

/// Softmax weights over the original frequencies of `h`'s dependents.
pub fn dependent_weights(f: &FrequencyVector, h: usize, catalog: &GraphletCatalog) -> Vec<(usize, f64)> {
    let deps = catalog.dependents(h);
    let max = deps.iter().map(|&d| f[d]).fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = deps.iter().map(|&d| (f[d] - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    deps.iter().zip(exps).map(|(&d, e)| (d, e / sum)).collect()
}

/// Removes graphlet `target` from a frequency vector.
///
/// The target and every graphlet containing it are zeroed. Then, level by
/// level from 5-node to 4-node graphlets, each graphlet reduced by Δ passes the
/// reduction down to its dependents in proportion to the softmax of their
/// original frequencies, clamping at 0.
pub fn perturb(f: &FrequencyVector, target: usize, catalog: &GraphletCatalog) -> FrequencyVector {
    perturb_with(f, target, catalog, PerturbOptions::default())
}

pub fn perturb_with(f: &FrequencyVector, target: usize, catalog: &GraphletCatalog, opts: PerturbOptions) -> FrequencyVector {
    let mut cur = f.clone();
    cur.0[target] = 0.0;
    for c in catalog.containers(target) {
        cur.0[c] = 0.0;
    }
    for k in [5, 4] {
        let mut reduction = vec![0.0; cur.0.len()];
        for h in catalog.size_range(k) {
            let delta = f[h] - cur[h];
            if delta <= 0.0 {
                continue;
            }
            for (d, w) in dependent_weights(f, h, catalog) {
                reduction[d] += delta * w;
            }
        }
        for (c, r) in cur.0.iter_mut().zip(&reduction) {
            if *r > 0.0 {
                *c = (*c - r).max(0.0);
            }
        }
    }
    if opts.renormalize {
        for k in [3, 4, 5] {
            let range = catalog.size_range(k);
            let sum: f64 = cur.0[range.clone()].iter().sum();
            if sum > 0.0 {
                cur.0[range].iter_mut().for_each(|x| *x /= sum);
            }
        }
    }
    cur
}
