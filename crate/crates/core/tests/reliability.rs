mod common;

use common::cases::{build, worst_ratio};
use ks_certify::reconstruct::FirstSlabPolicy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn bound_dominates_fine_space_dual_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (k, gamma) in [1.0, 1.5, 2.0, 3.0, 1.25].into_iter().enumerate() {
        for uniform in [true, false] {
            let case = build(k as u64, gamma, false, uniform);
            let r_full = worst_ratio(&case, &case.states[..3], FirstSlabPolicy::Shift, &mut rng);
            let r_first = worst_ratio(&case, &case.states[..2], FirstSlabPolicy::Shift, &mut rng);
            eprintln!("gamma={gamma} uniform={uniform} ratio slab1={r_full:.3} slab0={r_first:.3}");
            assert!(r_full <= 1.0 && r_first <= 1.0);
        }
    }
}

#[test]
fn oracle_sanity_constant_state_has_zero_residual() {
    let interfaces: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let r = vec![0.7; 8];
    let v = common::residual_dual_norm(&interfaces, 2.0, &r, &r, 0.01, 0.3, 4);
    assert!(v < 1e-12, "{v}");
}
