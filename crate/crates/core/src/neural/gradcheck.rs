//! Central finite-difference validation of analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub checked: usize,
}

/// Denominator floor for relative errors of near-zero gradients.
const REL_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(REL_FLOOR)
}

/// Compares `loss_and_grads` against central differences with step `h` at
/// `n_checks` randomly chosen parameter entries (with replacement).
pub fn grad_check(
    params: &[Matrix],
    loss_and_grads: impl Fn(&[Matrix]) -> (f64, Vec<Matrix>),
    n_checks: usize,
    h: f64,
    seed: u64,
) -> GradCheckReport {
    let (_, grads) = loss_and_grads(params);
    assert_eq!(grads.len(), params.len(), "one gradient per parameter");
    let sizes: Vec<usize> = params.iter().map(|p| p.data.len()).collect();
    let total: usize = sizes.iter().sum();
    assert!(total > 0, "no parameters to check");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = params.to_vec();
    let mut max_rel_err: f64 = 0.0;
    for _ in 0..n_checks {
        let mut flat = rng.gen_range(0..total);
        let mut which = 0;
        while flat >= sizes[which] {
            flat -= sizes[which];
            which += 1;
        }
        let orig = work[which].data[flat];
        work[which].data[flat] = orig + h;
        let (plus, _) = loss_and_grads(&work);
        work[which].data[flat] = orig - h;
        let (minus, _) = loss_and_grads(&work);
        work[which].data[flat] = orig;
        let numeric = (plus - minus) / (2.0 * h);
        max_rel_err = max_rel_err.max(relative_error(grads[which].data[flat], numeric));
    }
    GradCheckReport {
        max_rel_err,
        checked: n_checks,
    }
}
