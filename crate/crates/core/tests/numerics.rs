mod support;

use graphlet_lens::census::{FrequencyVector, N_GRAPHLETS};
use graphlet_lens::explainer::{spearman, top_principal_component};
use graphlet_lens::graph::{degree_onehot, Graph};
use graphlet_lens::neural::{gcn_forward, GcnConfig, GcnModel, LinearHead, Matrix};
use graphlet_lens::surrogate::{SurrogateConfig, SurrogateModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn spearman_matches_rank_formula_with_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let n = rng.gen_range(3..30);
        let levels = rng.gen_range(2..8);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64 * 0.5).collect();
        let got = spearman(&x, &y).unwrap();
        match support::spearman_oracle(&x, &y) {
            Some(rho) => assert!((got.rho - rho).abs() < 1e-9, "{x:?} {y:?}: {} vs {rho}", got.rho),
            None => assert!(got.degenerate && got.rho == 0.0),
        }
    }
}

#[test]
fn spearman_invariant_under_monotone_transform() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let x: Vec<f64> = (0..15).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..15).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let tx: Vec<f64> = x.iter().map(|v| v.exp() * 2.0 + 1.0).collect();
        let ty: Vec<f64> = y.iter().map(|v| v * v * v).collect();
        let a = spearman(&x, &y).unwrap().rho;
        let b = spearman(&tx, &ty).unwrap().rho;
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn pca_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in [29, 80] {
        for _ in 0..5 {
            let scales: Vec<f64> = (0..dim).map(|i| 1.0 + (i % 7) as f64).collect();
            let rows: Vec<Vec<f64>> = (0..10)
                .map(|_| scales.iter().map(|s| rng.gen_range(-1.0..1.0) * s).collect())
                .collect();
            let pc = top_principal_component(&rows).unwrap();
            let oracle = support::pca_oracle(&rows);
            let cos = support::abs_cosine(&pc.loadings, &oracle);
            assert!(cos >= 1.0 - 1e-9, "dim {dim}: cos {cos}");
            let pivot = pc.loadings.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(pivot > 0.0);
        }
    }
}

#[test]
fn duplicated_rows_give_duplicated_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<Vec<f64>> = (0..6).map(|_| (0..5).map(|_| rng.gen::<f64>()).collect()).collect();
    let doubled: Vec<Vec<f64>> = rows.iter().chain(rows.iter()).cloned().collect();
    let a = top_principal_component(&doubled).unwrap();
    for i in 0..6 {
        assert!((a.scores[i] - a.scores[i + 6]).abs() < 1e-12);
    }
}

#[test]
fn gcn_embedding_is_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = GcnModel::init(GcnConfig { seed: 9, ..Default::default() }, 6).unwrap();
    for id in 0..20 {
        let n = rng.gen_range(2..25);
        let g = support::random_graph(id, n, 0.3, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let h = g.permuted(&perm);
        let (ea, pa) = gcn_forward(&g, &degree_onehot(&g, 6), &model).unwrap();
        let (eb, pb) = gcn_forward(&h, &degree_onehot(&h, 6), &model).unwrap();
        for (a, b) in ea.iter().zip(&eb) {
            assert!((a - b).abs() <= 1e-9);
        }
        assert!((pa.0[1] - pb.0[1]).abs() <= 1e-9);
        assert!((pa.0[0] + pa.0[1] - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn isolated_nodes_do_not_break_forward() {
    let model = GcnModel::init(GcnConfig::default(), 3).unwrap();
    let g = Graph::new(0, 4, vec![(0, 1)], 0).unwrap();
    let (e, p) = gcn_forward(&g, &degree_onehot(&g, 3), &model).unwrap();
    assert_eq!(e.len(), 80);
    assert!(e.iter().all(|v| v.is_finite()));
    assert!((p.0[0] + p.0[1] - 1.0).abs() < 1e-12);
}

fn spectral_bound(m: &Matrix) -> f64 {
    m.frobenius()
}

#[test]
fn encoder_latent_is_lipschitz_in_weight_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let head = LinearHead {
        weight: Matrix::from_vec(80, 2, (0..160).map(|_| rng.gen_range(-0.1..0.1)).collect()),
        bias: Matrix::zeros(1, 2),
    };
    let m = SurrogateModel::init(SurrogateConfig { seed: 2, ..Default::default() }, head);
    let bound: f64 = m.encoder.iter().map(|d| spectral_bound(&d.weight)).product();
    for _ in 0..50 {
        let f = FrequencyVector((0..N_GRAPHLETS).map(|_| rng.gen::<f64>()).collect());
        let mut g = f.clone();
        let i = rng.gen_range(0..N_GRAPHLETS);
        g.0[i] += 1e-6;
        let a = m.encoder_forward(&f).latent;
        let b = m.encoder_forward(&g).latent;
        let d: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        assert!(d <= 1e-6 * bound * (1.0 + 1e-9));
        assert_eq!(m.encoder_forward(&f), m.encoder_forward(&f));
    }
}
