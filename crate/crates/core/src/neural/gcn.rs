//! Four-layer graph convolutional classifier over one-hot degree features.
//!
//! Each layer computes `H_l = ReLU(Â H_{l-1} W_l)` with the renormalized
//! adjacency `Â = D^-1/2 (A + I) D^-1/2`. The outputs of all layers are
//! concatenated per node, averaged over nodes into the graph embedding, and a
//! single affine head plus softmax yields class probabilities.

use std::path::Path;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{degree_onehot, max_degree, Dataset, Graph, NodeFeatures};

use super::matrix::{CsrMatrix, Matrix};
use super::optim::{Adam, AdamConfig};
use super::tape::{Tape, Var};
use super::ClassProbabilities;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GcnConfig {
    pub n_layers: usize,
    pub hidden_dim: usize,
    pub n_classes: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Share of graphs used for fitting; the rest only enter the held-out accuracy.
    pub train_fraction: f64,
}

impl Default for GcnConfig {
    fn default() -> Self {
        GcnConfig {
            n_layers: 4,
            hidden_dim: 20,
            n_classes: 2,
            learning_rate: 1e-3,
            epochs: 200,
            seed: 0,
            train_fraction: 1.0,
        }
    }
}

impl GcnConfig {
    pub fn embedding_dim(&self) -> usize {
        self.n_layers * self.hidden_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_layers == 0 || self.hidden_dim == 0 {
            return Err(Error::Config("GCN needs at least one layer of positive width".into()));
        }
        if self.n_classes != 2 {
            return Err(Error::Config("only binary classification is supported".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::Config(format!("train_fraction {} not in (0, 1]", self.train_fraction)));
        }
        Ok(())
    }
}

/// Affine classification head mapping graph embeddings to class logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl LinearHead {
    pub fn logits(&self, embedding: &[f64]) -> Vec<f64> {
        let e = Matrix::from_vec(1, embedding.len(), embedding.to_vec());
        let mut out = e.matmul(&self.weight);
        out.add_assign(&self.bias);
        out.data
    }

    pub fn probabilities(&self, embedding: &[f64]) -> ClassProbabilities {
        ClassProbabilities::from_logits(&self.logits(embedding))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    pub config: GcnConfig,
    pub layers: Vec<Matrix>,
    pub head: LinearHead,
    /// Degrees above this are clamped; input width is `feature_cap + 1`.
    pub feature_cap: usize,
}

pub(crate) fn glorot(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-a..a)).collect())
}

/// Several graphs packed into one block-diagonal propagation problem.
pub struct GraphBatch {
    pub propagation: Rc<CsrMatrix>,
    pub features: Matrix,
    pub pooling: Rc<CsrMatrix>,
    pub labels: Rc<Vec<usize>>,
}

impl GraphBatch {
    pub fn new<'a>(graphs: impl IntoIterator<Item = &'a Graph>, feature_cap: usize) -> Result<Self> {
        let graphs: Vec<&Graph> = graphs.into_iter().collect();
        let features = graphs.iter().map(|g| degree_onehot(g, feature_cap)).collect();
        Self::with_features(&graphs, features)
    }

    pub fn with_features(graphs: &[&Graph], node_features: Vec<NodeFeatures>) -> Result<Self> {
        let total: usize = graphs.iter().map(|g| g.n_nodes).sum();
        let dim = node_features.first().map_or(1, |x| x.feature_dim);
        let mut prop = Vec::new();
        let mut pool = Vec::with_capacity(total);
        let mut features = Matrix::zeros(total, dim);
        let mut offset = 0;
        for (gi, g) in graphs.iter().enumerate() {
            if g.n_nodes == 0 {
                return Err(Error::Dimension(format!("graph {} has no nodes", g.id)));
            }
            let deg = g.degrees();
            for (i, &d) in deg.iter().enumerate() {
                prop.push((offset + i, offset + i, 1.0 / (d + 1) as f64));
                pool.push((gi, offset + i, 1.0 / g.n_nodes as f64));
            }
            for &(u, v) in &g.edges {
                let w = 1.0 / (((deg[u] + 1) * (deg[v] + 1)) as f64).sqrt();
                prop.push((offset + u, offset + v, w));
                prop.push((offset + v, offset + u, w));
            }
            let x = &node_features[gi];
            if x.n_nodes() != g.n_nodes || x.feature_dim != dim {
                return Err(Error::Dimension(format!(
                    "graph {}: features are {}x{}, expected {}x{dim}",
                    g.id,
                    x.n_nodes(),
                    x.feature_dim,
                    g.n_nodes
                )));
            }
            for (i, &h) in x.hot.iter().enumerate() {
                features.set(offset + i, h, 1.0);
            }
            offset += g.n_nodes;
        }
        Ok(GraphBatch {
            propagation: Rc::new(CsrMatrix::from_triplets(total, total, prop)),
            features,
            pooling: Rc::new(CsrMatrix::from_triplets(graphs.len(), total, pool)),
            labels: Rc::new(graphs.iter().map(|g| g.label).collect()),
        })
    }

    pub fn n_graphs(&self) -> usize {
        self.labels.len()
    }
}

struct Forward {
    params: Vec<Var>,
    embedding: Var,
    logits: Var,
}

impl GcnModel {
    pub fn init(config: GcnConfig, feature_cap: usize) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut in_dim = feature_cap + 1;
        let mut layers = Vec::with_capacity(config.n_layers);
        for _ in 0..config.n_layers {
            layers.push(glorot(in_dim, config.hidden_dim, &mut rng));
            in_dim = config.hidden_dim;
        }
        let head = LinearHead {
            weight: glorot(config.embedding_dim(), config.n_classes, &mut rng),
            bias: Matrix::zeros(1, config.n_classes),
        };
        Ok(GcnModel {
            config,
            layers,
            head,
            feature_cap,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_cap + 1
    }

    /// Trainable parameters in a fixed order: layer weights, head weight, head bias.
    pub fn params(&self) -> Vec<Matrix> {
        let mut p = self.layers.clone();
        p.push(self.head.weight.clone());
        p.push(self.head.bias.clone());
        p
    }

    pub fn set_params(&mut self, mut params: Vec<Matrix>) {
        assert_eq!(params.len(), self.layers.len() + 2, "parameter count");
        self.head.bias = params.pop().expect("bias");
        self.head.weight = params.pop().expect("weight");
        self.layers = params;
    }

    fn forward(&self, tape: &mut Tape, params: &[Matrix], batch: &GraphBatch) -> Forward {
        let vars: Vec<Var> = params.iter().map(|p| tape.leaf(p.clone())).collect();
        let n_layers = self.layers.len();
        let mut h = tape.leaf(batch.features.clone());
        let mut outputs = Vec::with_capacity(n_layers);
        for &w in &vars[..n_layers] {
            let hw = tape.matmul(h, w);
            let prop = tape.spmm(batch.propagation.clone(), hw);
            h = tape.relu(prop);
            outputs.push(h);
        }
        let nodes = tape.concat_cols(&outputs);
        let embedding = tape.spmm(batch.pooling.clone(), nodes);
        let lin = tape.matmul(embedding, vars[n_layers]);
        let logits = tape.add_bias(lin, vars[n_layers + 1]);
        Forward {
            params: vars,
            embedding,
            logits,
        }
    }

    /// Mean cross-entropy over the batch and its gradient for each parameter.
    pub fn loss_and_grads(&self, params: &[Matrix], batch: &GraphBatch) -> (f64, Vec<Matrix>) {
        let mut tape = Tape::new();
        let fwd = self.forward(&mut tape, params, batch);
        let loss = tape.softmax_cross_entropy(fwd.logits, batch.labels.clone());
        let grads = tape.backward(loss);
        let g = fwd
            .params
            .iter()
            .zip(params)
            .map(|(&v, p)| grads.get(v).cloned().unwrap_or_else(|| Matrix::zeros(p.rows, p.cols)))
            .collect();
        (tape.scalar(loss), g)
    }

    /// Graph embeddings and class probabilities for every graph of the batch.
    pub fn predict(&self, batch: &GraphBatch) -> (Vec<Vec<f64>>, Vec<ClassProbabilities>) {
        if batch.features.cols != self.feature_dim() {
            panic!(
                "feature width {} does not match model input {}",
                batch.features.cols,
                self.feature_dim()
            );
        }
        let mut tape = Tape::new();
        let fwd = self.forward(&mut tape, &self.params(), batch);
        let emb = tape.value(fwd.embedding).to_rows();
        let logits = tape.value(fwd.logits);
        let probs = (0..logits.rows).map(|r| ClassProbabilities::from_logits(logits.row(r))).collect();
        (emb, probs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json_atomic(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: GcnModel = crate::io::read_json(path)?;
        model.config.validate()?;
        if model.layers.len() != model.config.n_layers
            || model.head.weight.shape() != (model.config.embedding_dim(), model.config.n_classes)
        {
            return Err(Error::Dimension(format!("checkpoint {} has inconsistent shapes", path.display())));
        }
        Ok(model)
    }
}

/// Embedding and probabilities of a single graph.
pub fn gcn_forward(g: &Graph, x: &NodeFeatures, model: &GcnModel) -> Result<(Vec<f64>, ClassProbabilities)> {
    if x.feature_dim != model.feature_dim() {
        return Err(Error::Dimension(format!(
            "feature width {} does not match model input {}",
            x.feature_dim,
            model.feature_dim()
        )));
    }
    let batch = GraphBatch::with_features(&[g], vec![x.clone()])?;
    let (mut emb, mut probs) = model.predict(&batch);
    Ok((emb.remove(0), probs.remove(0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Share of all graphs whose confidence exceeds 0.5.
    pub accuracy: f64,
    /// Accuracy on graphs excluded from fitting, when `train_fraction < 1`.
    pub holdout_accuracy: Option<f64>,
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
    pub train_ids: Vec<usize>,
    pub labels: Vec<usize>,
    pub embeddings: Vec<Vec<f64>>,
    pub probabilities: Vec<ClassProbabilities>,
}

impl TrainReport {
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json_atomic(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::io::read_json(path)
    }
}

fn accuracy(probs: &[ClassProbabilities], labels: &[usize], ids: impl Iterator<Item = usize>) -> Option<f64> {
    let (mut hit, mut n) = (0usize, 0usize);
    for i in ids {
        n += 1;
        if probs[i].confidence(labels[i]) > 0.5 {
            hit += 1;
        }
    }
    (n > 0).then(|| hit as f64 / n as f64)
}

/// Full-batch Adam training on cross-entropy. Deterministic given `cfg.seed`.
pub fn train_gcn(ds: &Dataset, cfg: &GcnConfig) -> Result<(GcnModel, TrainReport)> {
    cfg.validate()?;
    ds.require_both_classes()?;
    let mut ids: Vec<usize> = (0..ds.len()).collect();
    if cfg.train_fraction < 1.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_5A17);
        ids.shuffle(&mut rng);
        ids.truncate(((ds.len() as f64 * cfg.train_fraction).round() as usize).max(1));
        ids.sort_unstable();
    }
    let train_graphs: Vec<&Graph> = ids.iter().map(|&i| &ds.graphs[i]).collect();
    let cap = max_degree(train_graphs.iter().copied());
    let batch = GraphBatch::new(train_graphs.iter().copied(), cap)?;

    let mut model = GcnModel::init(cfg.clone(), cap)?;
    let mut params = model.params();
    let mut opt = Adam::new(AdamConfig::with_lr(cfg.learning_rate), &params.iter().collect::<Vec<_>>());
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (loss, grads) = model.loss_and_grads(&params, &batch);
        if !loss.is_finite() {
            return Err(Error::Divergence(format!("non-finite GCN loss at epoch {epoch}")));
        }
        loss_history.push(loss);
        opt.step(&mut params.iter_mut().collect::<Vec<_>>(), &grads);
    }
    model.set_params(params);
    if !model.params().iter().all(Matrix::is_finite) {
        return Err(Error::Divergence("non-finite GCN parameters after training".into()));
    }

    let full = GraphBatch::new(&ds.graphs, cap)?;
    let (embeddings, probabilities) = model.predict(&full);
    let labels = ds.labels();
    let final_loss = model.loss_and_grads(&model.params(), &batch).0;
    let holdout = (cfg.train_fraction < 1.0).then(|| {
        let train: std::collections::BTreeSet<usize> = ids.iter().copied().collect();
        accuracy(&probabilities, &labels, (0..ds.len()).filter(|i| !train.contains(i)))
    });
    let report = TrainReport {
        accuracy: accuracy(&probabilities, &labels, 0..ds.len()).unwrap_or(0.0),
        holdout_accuracy: holdout.flatten(),
        final_loss,
        loss_history,
        train_ids: ids,
        labels,
        embeddings,
        probabilities,
    };
    Ok((model, report))
}
