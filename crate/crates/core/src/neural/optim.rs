use serde::{Deserialize, Serialize};

use super::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        AdamConfig {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias correction; one moment pair per parameter matrix.
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
    t: i32,
}

impl Adam {
    pub fn new(cfg: AdamConfig, params: &[&Matrix]) -> Self {
        let zeros = |p: &&Matrix| Matrix::zeros(p.rows, p.cols);
        Adam {
            m: params.iter().map(zeros).collect(),
            v: params.iter().map(zeros).collect(),
            cfg,
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [&mut Matrix], grads: &[Matrix]) {
        assert_eq!(params.len(), self.m.len(), "parameter count");
        assert_eq!(grads.len(), self.m.len(), "gradient count");
        self.t += 1;
        let AdamConfig { learning_rate, beta1, beta2, eps } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        for (i, p) in params.iter_mut().enumerate() {
            let (m, v, g) = (&mut self.m[i], &mut self.v[i], &grads[i]);
            for j in 0..p.data.len() {
                let gj = g.data[j];
                m.data[j] = beta1 * m.data[j] + (1.0 - beta1) * gj;
                v.data[j] = beta2 * v.data[j] + (1.0 - beta2) * gj * gj;
                let mh = m.data[j] / c1;
                let vh = v.data[j] / c2;
                p.data[j] -= learning_rate * mh / (vh.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        // f(x) = sum (x - 3)^2
        let mut x = Matrix::from_vec(1, 2, vec![0.0, 10.0]);
        let mut opt = Adam::new(AdamConfig::with_lr(0.1), &[&x]);
        for _ in 0..2000 {
            let g = x.map(|xi| 2.0 * (xi - 3.0));
            opt.step(&mut [&mut x], &[g]);
        }
        assert!(x.data.iter().all(|xi| (xi - 3.0).abs() < 1e-3), "{x:?}");
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut x = Matrix::from_vec(1, 1, vec![1.0]);
        let mut opt = Adam::new(AdamConfig::with_lr(0.01), &[&x]);
        opt.step(&mut [&mut x], &[Matrix::from_vec(1, 1, vec![5.0])]);
        assert!((x.data[0] - 0.99).abs() < 1e-9);
    }
}
