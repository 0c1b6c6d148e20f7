//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records every operation of one forward pass; [`Tape::backward`]
//! walks it in reverse and returns the gradient of a scalar output with
//! respect to every recorded node.

use std::rc::Rc;

use super::matrix::{CsrMatrix, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf,
    MatMul(Var, Var),
    SpMM(Rc<CsrMatrix>, Var),
    AddBias(Var, Var),
    Add(Var, Var),
    Relu(Var),
    ConcatCols(Vec<Var>),
    SoftmaxRows(Var),
    /// mean over rows of `-log softmax(logits)[label]`; keeps the softmax
    SoftmaxCrossEntropy(Var, Rc<Vec<usize>>, Matrix),
    /// mean of squared differences to a constant target
    Mse(Var, Rc<Matrix>),
    WeightedSum(Vec<(Var, f64)>),
}

struct Node {
    value: Matrix,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

pub(crate) fn softmax_row(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

pub(crate) fn softmax_rows(m: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(m.rows, m.cols);
    for r in 0..m.rows {
        softmax_row(m.row(r), out.row_mut(r));
    }
    out
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let m = self.value(v);
        debug_assert_eq!(m.shape(), (1, 1));
        m.data[0]
    }

    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).matmul(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    pub fn spmm(&mut self, s: Rc<CsrMatrix>, a: Var) -> Var {
        let v = s.matmul(self.value(a));
        self.push(v, Op::SpMM(s, a))
    }

    /// Adds a `1 x cols` bias row to every row of `a`.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Var {
        let b = self.value(bias);
        assert_eq!(b.rows, 1, "bias must be a row vector");
        let mut v = self.value(a).clone();
        assert_eq!(v.cols, b.cols, "bias width");
        for r in 0..v.rows {
            for (x, &y) in v.row_mut(r).iter_mut().zip(&b.data) {
                *x += y;
            }
        }
        self.push(v, Op::AddBias(a, bias))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let mut v = self.value(a).clone();
        v.add_assign(self.value(b));
        self.push(v, Op::Add(a, b))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows;
        let cols: usize = parts.iter().map(|&p| self.value(p).cols).sum();
        let mut v = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for &p in parts {
                let m = self.value(p);
                assert_eq!(m.rows, rows, "concat rows");
                v.row_mut(r)[offset..offset + m.cols].copy_from_slice(m.row(r));
                offset += m.cols;
            }
        }
        self.push(v, Op::ConcatCols(parts.to_vec()))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let v = softmax_rows(self.value(a));
        self.push(v, Op::SoftmaxRows(a))
    }

    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: Rc<Vec<usize>>) -> Var {
        let probs = softmax_rows(self.value(logits));
        assert_eq!(labels.len(), probs.rows, "one label per row");
        let loss = labels
            .iter()
            .enumerate()
            .map(|(r, &y)| -probs.get(r, y).max(f64::MIN_POSITIVE).ln())
            .sum::<f64>()
            / probs.rows as f64;
        self.push(Matrix::from_vec(1, 1, vec![loss]), Op::SoftmaxCrossEntropy(logits, labels, probs))
    }

    pub fn mse(&mut self, a: Var, target: Rc<Matrix>) -> Var {
        let m = self.value(a);
        assert_eq!(m.shape(), target.shape(), "mse shape");
        let loss = m
            .data
            .iter()
            .zip(&target.data)
            .map(|(x, t)| (x - t) * (x - t))
            .sum::<f64>()
            / m.data.len() as f64;
        self.push(Matrix::from_vec(1, 1, vec![loss]), Op::Mse(a, target))
    }

    pub fn weighted_sum(&mut self, terms: &[(Var, f64)]) -> Var {
        let s = terms.iter().map(|&(v, w)| w * self.scalar(v)).sum();
        self.push(Matrix::from_vec(1, 1, vec![s]), Op::WeightedSum(terms.to_vec()))
    }

    /// Gradients of the scalar `output` with respect to every node.
    pub fn backward(&self, output: Var) -> Gradients {
        let mut grads: Vec<Option<Matrix>> = vec![None; output.0 + 1];
        grads[output.0] = Some(Matrix::from_vec(1, 1, vec![1.0]));

        fn acc(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&g),
                slot => *slot = Some(g),
            }
        }

        for idx in (0..=output.0).rev() {
            let Some(g) = grads[idx].clone() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let ga = g.matmul_t(self.value(*b));
                    let gb = self.value(*a).t_matmul(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::SpMM(s, a) => acc(&mut grads, *a, s.t_matmul(&g)),
                Op::AddBias(a, bias) => {
                    let mut gb = Matrix::zeros(1, g.cols);
                    for r in 0..g.rows {
                        for (x, &y) in gb.data.iter_mut().zip(g.row(r)) {
                            *x += y;
                        }
                    }
                    acc(&mut grads, *bias, gb);
                    acc(&mut grads, *a, g);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *b, g.clone());
                    acc(&mut grads, *a, g);
                }
                Op::Relu(a) => {
                    let x = self.value(*a);
                    let mut ga = g;
                    for (d, &xi) in ga.data.iter_mut().zip(&x.data) {
                        if xi <= 0.0 {
                            *d = 0.0;
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let cols = self.value(p).cols;
                        let mut gp = Matrix::zeros(g.rows, cols);
                        for r in 0..g.rows {
                            gp.row_mut(r).copy_from_slice(&g.row(r)[offset..offset + cols]);
                        }
                        acc(&mut grads, p, gp);
                        offset += cols;
                    }
                }
                Op::SoftmaxRows(a) => {
                    let s = &node.value;
                    let mut ga = Matrix::zeros(s.rows, s.cols);
                    for r in 0..s.rows {
                        let (sr, gr) = (s.row(r), g.row(r));
                        let dot: f64 = sr.iter().zip(gr).map(|(x, y)| x * y).sum();
                        for (c, o) in ga.row_mut(r).iter_mut().enumerate() {
                            *o = sr[c] * (gr[c] - dot);
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::SoftmaxCrossEntropy(logits, labels, probs) => {
                    let scale = g.data[0] / probs.rows as f64;
                    let mut gl = probs.clone();
                    for (r, &y) in labels.iter().enumerate() {
                        gl.row_mut(r)[y] -= 1.0;
                    }
                    for x in &mut gl.data {
                        *x *= scale;
                    }
                    acc(&mut grads, *logits, gl);
                }
                Op::Mse(a, target) => {
                    let x = self.value(*a);
                    let scale = 2.0 * g.data[0] / x.data.len() as f64;
                    let data = x.data.iter().zip(&target.data).map(|(xi, ti)| scale * (xi - ti)).collect();
                    acc(&mut grads, *a, Matrix::from_vec(x.rows, x.cols, data));
                }
                Op::WeightedSum(terms) => {
                    for &(v, w) in terms {
                        acc(&mut grads, v, Matrix::from_vec(1, 1, vec![w * g.data[0]]));
                    }
                }
            }
        }
        Gradients { grads }
    }
}

pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }
}
