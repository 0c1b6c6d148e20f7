use graphlet_lens::census::{FrequencyVector, GraphletCatalog, N_GRAPHLETS};
use graphlet_lens::explainer::{dependent_weights, perturb};
use proptest::prelude::*;

fn freq_vector() -> impl Strategy<Value = FrequencyVector> {
    proptest::collection::vec(0.0f64..1.0, N_GRAPHLETS).prop_map(|raw| {
        let mut v = raw;
        for range in [0..2, 2..8, 8..29] {
            let s: f64 = v[range.clone()].iter().sum();
            if s > 0.0 {
                v[range].iter_mut().for_each(|x| *x /= s);
            }
        }
        FrequencyVector(v)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn perturbation_properties(f in freq_vector(), target in 0..N_GRAPHLETS) {
        let cat = GraphletCatalog::shared();
        let out = perturb(&f, target, cat);
        prop_assert!(out.0.iter().all(|&x| x >= 0.0 && x.is_finite()));
        prop_assert_eq!(out[target], 0.0);
        for c in cat.containers(target) {
            prop_assert_eq!(out[c], 0.0);
        }
        for (i, (&a, &b)) in out.0.iter().zip(&f.0).enumerate() {
            prop_assert!(a <= b, "graphlet {} grew from {} to {}", i, b, a);
        }
        prop_assert_eq!(perturb(&out, target, cat), out.clone());
        for h in 2..N_GRAPHLETS {
            let w: f64 = dependent_weights(&f, h, cat).iter().map(|(_, w)| w).sum();
            prop_assert!((w - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn untouched_when_target_and_containers_absent(f in freq_vector(), target in 0..N_GRAPHLETS) {
        let cat = GraphletCatalog::shared();
        let mut g = f.clone();
        g.0[target] = 0.0;
        for c in cat.containers(target) {
            g.0[c] = 0.0;
        }
        prop_assert_eq!(perturb(&g, target, cat), g);
    }
}
