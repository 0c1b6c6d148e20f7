//! Encoder-decoder surrogate reproducing a trained GCN from graphlet frequencies.
//!
//! The encoder maps a 29-D frequency vector through two 20-D ReLU layers to a
//! 10-D latent vector; an encoder head turns the latent into class
//! probabilities. The decoder maps the latent back through two 20-D ReLU
//! layers to an 80-D embedding, which the GCN's own (frozen) classification
//! head turns into probabilities. Decoder hidden layers receive the encoder's
//! hidden activations in mirrored order: decoder layer 1 adds encoder layer 2,
//! decoder layer 2 adds encoder layer 1.

use std::path::Path;
use std::rc::Rc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::census::{CensusResult, FrequencyVector, N_GRAPHLETS};
use crate::error::{Error, Result};
use crate::graph::Dataset;
use crate::neural::{
    cosine_similarity, glorot, Adam, AdamConfig, ClassProbabilities, GcnModel, GraphBatch, LinearHead,
    Matrix, Tape, Var,
};

pub const HIDDEN_DIM: usize = 20;
pub const LATENT_DIM: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateConfig {
    /// Number of encoder/decoder alternations.
    pub steps: usize,
    pub learning_rate: f64,
    pub embedding_weight: f64,
    pub probability_weight: f64,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            steps: 5000,
            learning_rate: 1e-3,
            embedding_weight: 1.0,
            probability_weight: 1.0,
            seed: 0,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("surrogate training needs at least one step".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        for w in [self.embedding_weight, self.probability_weight] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("loss weight {w} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Affine layer `x W + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl Dense {
    fn init(inp: usize, out: usize, rng: &mut ChaCha8Rng) -> Self {
        Dense {
            weight: glorot(inp, out, rng),
            bias: Matrix::zeros(1, out),
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.bias.data.clone();
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.weight.row(i)) {
                *o += xi * w;
            }
        }
        out
    }
}

fn relu(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x.max(0.0)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderOutput {
    pub latent: Vec<f64>,
    pub probs: ClassProbabilities,
    /// Activations of encoder hidden layers 1 and 2.
    pub hidden: [Vec<f64>; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub config: SurrogateConfig,
    pub encoder: Vec<Dense>,
    pub encoder_head: Dense,
    pub decoder: Vec<Dense>,
    pub frozen_head: LinearHead,
}

/// Which loss a training or gradient computation targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurrogateLoss {
    /// L2 between encoder-head probabilities and GCN probabilities.
    Encoder,
    /// Weighted L2 on reconstructed embeddings plus L2 on decoder-path probabilities.
    Decoder,
    /// Sum of both.
    Combined,
}

/// Frequencies and GCN targets for a set of graphs.
pub struct SurrogateData {
    pub frequencies: Matrix,
    pub target_probs: Rc<Matrix>,
    pub target_embeddings: Rc<Matrix>,
}

impl SurrogateData {
    pub fn new(frequencies: &[&FrequencyVector], probs: &[ClassProbabilities], embeddings: &[Vec<f64>]) -> Result<Self> {
        let n = frequencies.len();
        if probs.len() != n || embeddings.len() != n || n == 0 {
            return Err(Error::Dimension(format!(
                "surrogate data needs equal non-zero counts, got {n} frequency vectors, {} probabilities, {} embeddings",
                probs.len(),
                embeddings.len()
            )));
        }
        let emb_dim = embeddings[0].len();
        if embeddings.iter().any(|e| e.len() != emb_dim) {
            return Err(Error::Dimension("ragged embeddings".into()));
        }
        let mut f = Vec::with_capacity(n * N_GRAPHLETS);
        for v in frequencies {
            if v.0.len() != N_GRAPHLETS || !v.0.iter().all(|x| x.is_finite()) {
                return Err(Error::Dimension("frequency vectors must hold 29 finite values".into()));
            }
            f.extend_from_slice(&v.0);
        }
        Ok(SurrogateData {
            frequencies: Matrix::from_vec(n, N_GRAPHLETS, f),
            target_probs: Rc::new(Matrix::from_vec(n, 2, probs.iter().flat_map(|p| p.0).collect())),
            target_embeddings: Rc::new(Matrix::from_vec(n, emb_dim, embeddings.concat())),
        })
    }
}

struct Graph {
    params: Vec<Var>,
    enc_probs: Var,
    embedding: Var,
    dec_probs: Var,
}

impl SurrogateModel {
    pub fn init(config: SurrogateConfig, frozen_head: LinearHead) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let emb_dim = frozen_head.weight.rows;
        let encoder = vec![
            Dense::init(N_GRAPHLETS, HIDDEN_DIM, &mut rng),
            Dense::init(HIDDEN_DIM, HIDDEN_DIM, &mut rng),
            Dense::init(HIDDEN_DIM, LATENT_DIM, &mut rng),
        ];
        let encoder_head = Dense::init(LATENT_DIM, 2, &mut rng);
        let decoder = vec![
            Dense::init(LATENT_DIM, HIDDEN_DIM, &mut rng),
            Dense::init(HIDDEN_DIM, HIDDEN_DIM, &mut rng),
            Dense::init(HIDDEN_DIM, emb_dim, &mut rng),
        ];
        SurrogateModel {
            config,
            encoder,
            encoder_head,
            decoder,
            frozen_head,
        }
    }

    pub fn embedding_dim(&self) -> usize {
        self.frozen_head.weight.rows
    }

    pub fn encoder_forward(&self, f: &FrequencyVector) -> EncoderOutput {
        let h1 = relu(self.encoder[0].apply(&f.0));
        let h2 = relu(self.encoder[1].apply(&h1));
        let latent = self.encoder[2].apply(&h2);
        let probs = ClassProbabilities::from_logits(&self.encoder_head.apply(&latent));
        EncoderOutput {
            latent,
            probs,
            hidden: [h1, h2],
        }
    }

    pub fn decoder_forward(&self, latent: &[f64], hidden: &[Vec<f64>; 2]) -> (Vec<f64>, ClassProbabilities) {
        let d1: Vec<f64> = relu(self.decoder[0].apply(latent))
            .into_iter()
            .zip(&hidden[1])
            .map(|(a, b)| a + b)
            .collect();
        let d2: Vec<f64> = relu(self.decoder[1].apply(&d1))
            .into_iter()
            .zip(&hidden[0])
            .map(|(a, b)| a + b)
            .collect();
        let emb = self.decoder[2].apply(&d2);
        let probs = self.frozen_head.probabilities(&emb);
        (emb, probs)
    }

    /// Probabilities through the full encoder-decoder-frozen-head path.
    pub fn surrogate_probs(&self, f: &FrequencyVector) -> ClassProbabilities {
        let enc = self.encoder_forward(f);
        self.decoder_forward(&enc.latent, &enc.hidden).1
    }

    fn encoder_params(&self) -> Vec<Matrix> {
        let mut p = Vec::new();
        for d in self.encoder.iter().chain([&self.encoder_head]) {
            p.push(d.weight.clone());
            p.push(d.bias.clone());
        }
        p
    }

    fn decoder_params(&self) -> Vec<Matrix> {
        let mut p = Vec::new();
        for d in &self.decoder {
            p.push(d.weight.clone());
            p.push(d.bias.clone());
        }
        p
    }

    /// Trainable parameters: encoder layers and head (8 matrices), then decoder layers (6).
    pub fn params(&self) -> Vec<Matrix> {
        let mut p = self.encoder_params();
        p.extend(self.decoder_params());
        p
    }

    pub fn set_params(&mut self, params: &[Matrix]) {
        assert_eq!(params.len(), 14, "surrogate parameter count");
        let mut it = params.iter().cloned();
        let layers = self
            .encoder
            .iter_mut()
            .chain(std::iter::once(&mut self.encoder_head))
            .chain(self.decoder.iter_mut());
        for d in layers {
            d.weight = it.next().expect("weight");
            d.bias = it.next().expect("bias");
        }
    }

    fn build(&self, tape: &mut Tape, params: &[Matrix], data: &SurrogateData) -> Graph {
        let v: Vec<Var> = params.iter().map(|p| tape.leaf(p.clone())).collect();
        let dense = |tape: &mut Tape, x: Var, i: usize| {
            let xw = tape.matmul(x, v[2 * i]);
            tape.add_bias(xw, v[2 * i + 1])
        };
        let x = tape.leaf(data.frequencies.clone());
        let a1 = dense(tape, x, 0);
        let e1 = tape.relu(a1);
        let a2 = dense(tape, e1, 1);
        let e2 = tape.relu(a2);
        let latent = dense(tape, e2, 2);
        let head_logits = dense(tape, latent, 3);
        let enc_probs = tape.softmax_rows(head_logits);

        let b1 = dense(tape, latent, 4);
        let r1 = tape.relu(b1);
        let d1 = tape.add(r1, e2);
        let b2 = dense(tape, d1, 5);
        let r2 = tape.relu(b2);
        let d2 = tape.add(r2, e1);
        let embedding = dense(tape, d2, 6);
        let hw = tape.leaf(self.frozen_head.weight.clone());
        let hb = tape.leaf(self.frozen_head.bias.clone());
        let lin = tape.matmul(embedding, hw);
        let logits = tape.add_bias(lin, hb);
        let dec_probs = tape.softmax_rows(logits);
        Graph {
            params: v,
            enc_probs,
            embedding,
            dec_probs,
        }
    }

    fn loss_var(&self, tape: &mut Tape, g: &Graph, data: &SurrogateData, which: SurrogateLoss) -> Var {
        let enc = tape.mse(g.enc_probs, data.target_probs.clone());
        let emb = tape.mse(g.embedding, data.target_embeddings.clone());
        let dec = tape.mse(g.dec_probs, data.target_probs.clone());
        let (we, wp) = (self.config.embedding_weight, self.config.probability_weight);
        match which {
            SurrogateLoss::Encoder => enc,
            SurrogateLoss::Decoder => tape.weighted_sum(&[(emb, we), (dec, wp)]),
            SurrogateLoss::Combined => tape.weighted_sum(&[(enc, 1.0), (emb, we), (dec, wp)]),
        }
    }

    /// Loss and gradients with respect to all 14 parameter matrices.
    pub fn loss_and_grads(&self, params: &[Matrix], data: &SurrogateData, which: SurrogateLoss) -> (f64, Vec<Matrix>) {
        let mut tape = Tape::new();
        let g = self.build(&mut tape, params, data);
        let loss = self.loss_var(&mut tape, &g, data, which);
        let grads = tape.backward(loss);
        let out = g
            .params
            .iter()
            .zip(params)
            .map(|(&v, p)| grads.get(v).cloned().unwrap_or_else(|| Matrix::zeros(p.rows, p.cols)))
            .collect();
        (tape.scalar(loss), out)
    }

    /// Batched forward pass: (encoder-head probs, reconstructed embeddings, decoder-path probs).
    pub fn predict(&self, data: &SurrogateData) -> (Vec<ClassProbabilities>, Vec<Vec<f64>>, Vec<ClassProbabilities>) {
        let mut tape = Tape::new();
        let g = self.build(&mut tape, &self.params(), data);
        let rows = |m: &Matrix| (0..m.rows).map(|r| ClassProbabilities([m.get(r, 0), m.get(r, 1)])).collect();
        (
            rows(tape.value(g.enc_probs)),
            tape.value(g.embedding).to_rows(),
            rows(tape.value(g.dec_probs)),
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json_atomic(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: SurrogateModel = crate::io::read_json(path)?;
        if m.encoder.len() != 3 || m.decoder.len() != 3 || m.frozen_head.weight.rows != m.decoder[2].weight.cols {
            return Err(Error::Dimension(format!("surrogate checkpoint {} has inconsistent shapes", path.display())));
        }
        Ok(m)
    }
}

/// Alternating optimizer: one encoder step, then one decoder step with the encoder fixed.
pub struct SurrogateTrainer {
    pub model: SurrogateModel,
    enc_opt: Adam,
    dec_opt: Adam,
}

const N_ENCODER_PARAMS: usize = 8;

impl SurrogateTrainer {
    pub fn new(model: SurrogateModel) -> Self {
        let adam = AdamConfig::with_lr(model.config.learning_rate);
        let enc = model.encoder_params();
        let dec = model.decoder_params();
        SurrogateTrainer {
            enc_opt: Adam::new(adam.clone(), &enc.iter().collect::<Vec<_>>()),
            dec_opt: Adam::new(adam, &dec.iter().collect::<Vec<_>>()),
            model,
        }
    }

    fn step(&mut self, data: &SurrogateData, which: SurrogateLoss) -> Result<f64> {
        let mut params = self.model.params();
        let (loss, grads) = self.model.loss_and_grads(&params, data, which);
        if !loss.is_finite() {
            return Err(Error::Divergence(format!("non-finite surrogate {which:?} loss")));
        }
        let (enc_p, dec_p) = params.split_at_mut(N_ENCODER_PARAMS);
        let (enc_g, dec_g) = grads.split_at(N_ENCODER_PARAMS);
        match which {
            SurrogateLoss::Encoder => self.enc_opt.step(&mut enc_p.iter_mut().collect::<Vec<_>>(), enc_g),
            SurrogateLoss::Decoder => self.dec_opt.step(&mut dec_p.iter_mut().collect::<Vec<_>>(), dec_g),
            SurrogateLoss::Combined => unreachable!("training alternates encoder and decoder"),
        }
        self.model.set_params(&params);
        Ok(loss)
    }

    /// One optimizer step on the encoder parameters only.
    pub fn encoder_step(&mut self, data: &SurrogateData) -> Result<f64> {
        self.step(data, SurrogateLoss::Encoder)
    }

    /// One optimizer step on the decoder parameters only.
    pub fn decoder_step(&mut self, data: &SurrogateData) -> Result<f64> {
        self.step(data, SurrogateLoss::Decoder)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateReport {
    /// Cosine between decoder-path and GCN probabilities, flattened over all graphs.
    pub cosine_similarity: f64,
    /// Same statistic for the encoder-head probabilities.
    pub encoder_cosine_similarity: f64,
    /// Mean per-graph cosine between reconstructed and GCN embeddings.
    pub embedding_cosine: f64,
    pub final_encoder_loss: f64,
    pub final_decoder_loss: f64,
    pub baseline_probabilities: Vec<ClassProbabilities>,
}

fn flat(p: &[ClassProbabilities]) -> Vec<f64> {
    p.iter().flat_map(|x| x.0).collect()
}

/// Trains a surrogate against GCN outputs recomputed from `gcn` on `ds`.
pub fn train_surrogate(
    ds: &Dataset,
    census: &[CensusResult],
    gcn: &GcnModel,
    cfg: &SurrogateConfig,
) -> Result<(SurrogateModel, SurrogateReport)> {
    cfg.validate()?;
    if census.len() != ds.len() {
        return Err(Error::Dimension(format!(
            "census covers {} graphs, dataset has {}",
            census.len(),
            ds.len()
        )));
    }
    let batch = GraphBatch::new(&ds.graphs, gcn.feature_cap)?;
    let (embeddings, probs) = gcn.predict(&batch);
    let freqs: Vec<&FrequencyVector> = census.iter().map(|c| &c.frequencies).collect();
    let data = SurrogateData::new(&freqs, &probs, &embeddings)?;

    let model = SurrogateModel::init(cfg.clone(), gcn.head.clone());
    let mut trainer = SurrogateTrainer::new(model);
    let (mut enc_loss, mut dec_loss) = (f64::NAN, f64::NAN);
    for _ in 0..cfg.steps {
        enc_loss = trainer.encoder_step(&data)?;
        dec_loss = trainer.decoder_step(&data)?;
    }
    let model = trainer.model;
    let (enc_probs, recon, dec_probs) = model.predict(&data);
    let target = flat(&probs);
    let embedding_cosine =
        recon.iter().zip(&embeddings).map(|(a, b)| cosine_similarity(a, b)).sum::<f64>() / recon.len() as f64;
    let report = SurrogateReport {
        cosine_similarity: cosine_similarity(&flat(&dec_probs), &target),
        encoder_cosine_similarity: cosine_similarity(&flat(&enc_probs), &target),
        embedding_cosine,
        final_encoder_loss: enc_loss,
        final_decoder_loss: dec_loss,
        baseline_probabilities: dec_probs,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::grad_check;
    use rand::Rng;

    fn head() -> LinearHead {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        LinearHead {
            weight: glorot(80, 2, &mut rng),
            bias: Matrix::from_vec(1, 2, vec![0.1, -0.2]),
        }
    }

    fn random_freqs(rng: &mut ChaCha8Rng) -> FrequencyVector {
        FrequencyVector((0..N_GRAPHLETS).map(|_| rng.gen::<f64>()).collect())
    }

    fn toy_data(n: usize, seed: u64) -> SurrogateData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let freqs: Vec<FrequencyVector> = (0..n).map(|_| random_freqs(&mut rng)).collect();
        let probs: Vec<ClassProbabilities> = (0..n)
            .map(|_| {
                let p = rng.gen::<f64>();
                ClassProbabilities([p, 1.0 - p])
            })
            .collect();
        let emb: Vec<Vec<f64>> = (0..n).map(|_| (0..80).map(|_| rng.gen::<f64>()).collect()).collect();
        SurrogateData::new(&freqs.iter().collect::<Vec<_>>(), &probs, &emb).unwrap()
    }

    #[test]
    fn zero_input_is_finite_and_normalized() {
        let m = SurrogateModel::init(SurrogateConfig::default(), head());
        let out = m.encoder_forward(&FrequencyVector::zeros());
        assert!(out.latent.iter().all(|x| x.is_finite()));
        assert!((out.probs.0[0] + out.probs.0[1] - 1.0).abs() < 1e-12);
        let p = m.surrogate_probs(&FrequencyVector::zeros());
        assert!((p.0[0] + p.0[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decoder_uses_frozen_head_exactly() {
        let m = SurrogateModel::init(SurrogateConfig::default(), head());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let enc = m.encoder_forward(&random_freqs(&mut rng));
        let (emb, probs) = m.decoder_forward(&enc.latent, &enc.hidden);
        assert_eq!(probs, head().probabilities(&emb));
    }

    #[test]
    fn batched_path_matches_single_path() {
        let m = SurrogateModel::init(SurrogateConfig { seed: 3, ..Default::default() }, head());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let freqs: Vec<FrequencyVector> = (0..5).map(|_| random_freqs(&mut rng)).collect();
        let probs = vec![ClassProbabilities([0.5, 0.5]); 5];
        let emb = vec![vec![0.0; 80]; 5];
        let data = SurrogateData::new(&freqs.iter().collect::<Vec<_>>(), &probs, &emb).unwrap();
        let (enc_p, recon, dec_p) = m.predict(&data);
        for (i, f) in freqs.iter().enumerate() {
            let enc = m.encoder_forward(f);
            let (e, p) = m.decoder_forward(&enc.latent, &enc.hidden);
            assert!((enc.probs.0[0] - enc_p[i].0[0]).abs() < 1e-12);
            assert!(e.iter().zip(&recon[i]).all(|(a, b)| (a - b).abs() < 1e-12));
            assert!((p.0[1] - dec_p[i].0[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_wiring_is_mirrored() {
        // zero every decoder weight: embedding = bias of last layer applied to encoder activations
        let mut m = SurrogateModel::init(SurrogateConfig::default(), head());
        for d in &mut m.decoder[..2] {
            d.weight = Matrix::zeros(d.weight.rows, d.weight.cols);
        }
        let h1: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let h2: Vec<f64> = (0..20).map(|i| 100.0 + i as f64).collect();
        let (emb, _) = m.decoder_forward(&[0.0; 10], &[h1.clone(), h2]);
        // decoder layer 2 output = relu(0) + h1, so the embedding is the last layer applied to h1
        assert_eq!(emb, m.decoder[2].apply(&h1));
    }

    #[test]
    fn gradient_checks() {
        let m = SurrogateModel::init(SurrogateConfig { seed: 9, ..Default::default() }, head());
        let data = toy_data(6, 4);
        for which in [SurrogateLoss::Encoder, SurrogateLoss::Decoder, SurrogateLoss::Combined] {
            let report = grad_check(&m.params(), |p| m.loss_and_grads(p, &data, which), 200, 1e-5, 7);
            assert!(report.max_rel_err < 1e-4, "{which:?}: {report:?}");
        }
    }

    #[test]
    fn alternating_steps_leave_other_half_untouched() {
        let m = SurrogateModel::init(SurrogateConfig { learning_rate: 1e-2, ..Default::default() }, head());
        let data = toy_data(8, 5);
        let mut t = SurrogateTrainer::new(m);
        let before = t.model.clone();
        t.encoder_step(&data).unwrap();
        assert_eq!(t.model.decoder, before.decoder);
        assert_ne!(t.model.encoder, before.encoder);
        let mid = t.model.clone();
        t.decoder_step(&data).unwrap();
        assert_eq!(t.model.encoder, mid.encoder);
        assert_eq!(t.model.encoder_head, mid.encoder_head);
        assert_ne!(t.model.decoder, mid.decoder);
        assert_eq!(t.model.frozen_head, head());
    }

    #[test]
    fn constant_target_is_matched() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let freqs: Vec<FrequencyVector> = (0..20).map(|_| random_freqs(&mut rng)).collect();
        let emb = vec![vec![0.3; 80]; 20];
        let p = head().probabilities(&emb[0]);
        let data = SurrogateData::new(&freqs.iter().collect::<Vec<_>>(), &vec![p; 20], &emb).unwrap();
        let cfg = SurrogateConfig { learning_rate: 1e-2, ..Default::default() };
        let mut t = SurrogateTrainer::new(SurrogateModel::init(cfg, head()));
        for _ in 0..1500 {
            t.encoder_step(&data).unwrap();
            t.decoder_step(&data).unwrap();
        }
        let (_, _, dec) = t.model.predict(&data);
        let target: Vec<f64> = vec![p; 20].iter().flat_map(|x| x.0).collect();
        assert!(cosine_similarity(&flat(&dec), &target) > 0.9999);
    }
}
