//! Dense linear algebra, reverse-mode differentiation, and the GCN classifier.

mod gcn;
mod gradcheck;
mod matrix;
mod optim;
mod tape;

pub use gcn::{gcn_forward, train_gcn, GcnConfig, GcnModel, GraphBatch, LinearHead, TrainReport};
pub use gradcheck::{grad_check, relative_error, GradCheckReport};
pub use matrix::{CsrMatrix, Matrix};
pub use optim::{Adam, AdamConfig};
pub use tape::{Gradients, Tape, Var};

pub(crate) use gcn::glorot;

use serde::{Deserialize, Serialize};

/// Softmax output over the two classes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassProbabilities(pub [f64; 2]);

impl ClassProbabilities {
    pub fn from_logits(logits: &[f64]) -> Self {
        assert_eq!(logits.len(), 2, "binary logits");
        let mut p = [0.0; 2];
        tape::softmax_row(logits, &mut p);
        ClassProbabilities(p)
    }

    /// Probability assigned to the graph's true class.
    pub fn confidence(&self, label: usize) -> f64 {
        self.0[label]
    }

    /// Probability of class 1.
    pub fn classification_probability(&self) -> f64 {
        self.0[1]
    }

    pub fn l1_distance(&self, other: &ClassProbabilities) -> f64 {
        (self.0[0] - other.0[0]).abs() + (self.0[1] - other.0[1]).abs()
    }
}

/// Cosine similarity of two equally long vectors; 0 when either is all-zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "cosine of unequal lengths");
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}
