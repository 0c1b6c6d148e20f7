use super::Graph;

/// One-hot encoded clamped node degrees, stored as the hot column per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeFeatures {
    pub hot: Vec<usize>,
    pub feature_dim: usize,
}

impl NodeFeatures {
    pub fn n_nodes(&self) -> usize {
        self.hot.len()
    }

    /// Dense row-major `n_nodes x feature_dim` matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.hot.len() * self.feature_dim];
        for (i, &h) in self.hot.iter().enumerate() {
            out[i * self.feature_dim + h] = 1.0;
        }
        out
    }
}

pub fn degree_onehot(g: &Graph, cap: usize) -> NodeFeatures {
    assert!(cap >= 1, "degree cap must be at least 1");
    NodeFeatures {
        hot: g.degrees().into_iter().map(|d| d.min(cap)).collect(),
        feature_dim: cap + 1,
    }
}

/// Largest degree over a set of graphs; at least 1.
pub fn max_degree<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> usize {
    graphs
        .into_iter()
        .flat_map(|g| g.degrees())
        .max()
        .unwrap_or(0)
        .max(1)
}
