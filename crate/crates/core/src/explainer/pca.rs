use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipalComponent {
    /// Unit-length direction; the largest-magnitude entry is positive.
    pub loadings: Vec<f64>,
    pub eigenvalue: f64,
    pub mean: Vec<f64>,
    /// Projection of each centered row onto `loadings`.
    pub scores: Vec<f64>,
}

const MAX_ITERS: usize = 100_000;
const TOL: f64 = 1e-15;

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn mat_vec(c: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    c.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Top principal component of the rows by power iteration on the sample covariance.
#[allow(clippy::needless_range_loop)]
pub fn top_principal_component(rows: &[Vec<f64>]) -> Result<PrincipalComponent> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::Dimension(format!("PCA needs at least 2 rows, got {n}")));
    }
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Dimension("PCA rows must be non-empty and equally long".into()));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Dimension("PCA input contains non-finite values".into()));
    }
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x / n as f64;
        }
    }
    let centered: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect()).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in &centered {
        for i in 0..d {
            if r[i] == 0.0 {
                continue;
            }
            for j in i..d {
                cov[i][j] += r[i] * r[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i][j] / denom;
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }

    // start from the covariance column with the largest diagonal entry
    let start = (0..d).max_by(|&a, &b| cov[a][a].total_cmp(&cov[b][b]).then(b.cmp(&a))).unwrap_or(0);
    let mut v: Vec<f64> = cov[start].clone();
    let mut eigenvalue = 0.0;
    if normalize(&mut v) == 0.0 {
        v = vec![0.0; d];
        v[0] = 1.0;
    } else {
        for _ in 0..MAX_ITERS {
            let mut w = mat_vec(&cov, &v);
            eigenvalue = normalize(&mut w);
            if eigenvalue == 0.0 {
                break;
            }
            let diff: f64 = w.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            v = w;
            if diff < TOL {
                break;
            }
        }
    }
    let pivot = (0..d).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a))).unwrap_or(0);
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let scores = centered.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
    Ok(PrincipalComponent {
        loadings: v,
        eigenvalue,
        mean,
        scores,
    })
}
