use std::sync::Arc;

use ks_certify::chemo::EllipticSystem;
use ks_certify::harness::eoc;
use ks_certify::scheme::{assert_m_matrix, cfl_max_dt, step_with, StepOperator, StepOptions};
use ks_certify::stability::{certify, f_lower_bound, f_secant, lemma_checks, ConstantsTable};
use ks_certify::{CellField, Mesh, Mesh1D};
use proptest::prelude::*;

fn mesh_from(widths: &[f64]) -> Arc<Mesh> {
    let total: f64 = widths.iter().sum();
    let mut x = vec![0.0];
    for w in widths {
        x.push(x.last().unwrap() + w / total);
    }
    *x.last_mut().unwrap() = 1.0;
    Arc::new(Mesh::from(Mesh1D::new(&x).unwrap()))
}

/// Cell values with roughly a third of them exactly zero.
fn density(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..10.0f64, 0.0..10.0f64], n)
}

fn state() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64, f64)> {
    (4usize..16).prop_flat_map(|n| {
        (
            prop::collection::vec(0.5..1.5f64, n),
            density(n),
            1.0..=3.0f64,
            0.01..=1.0f64,
        )
    })
}

proptest! {
    #[test]
    fn step_keeps_sign_and_mass((widths, rho, gamma, frac) in state()) {
        let mesh = mesh_from(&widths);
        let rho = CellField::new(mesh.clone(), rho).unwrap();
        let c = EllipticSystem::new(mesh, true).solve(&rho.to_nodal()).unwrap();
        let limit = cfl_max_dt(&rho, &c).unwrap();
        let dt = if limit.is_finite() { frac * limit } else { frac };
        let next = step_with(&rho, &c, dt, gamma, StepOptions::default()).unwrap().rho;
        prop_assert!(next.min() >= 0.0);
        let m = rho.mass();
        prop_assert!((next.mass() - m).abs() <= 1e-12 * m.max(1e-300));
    }

    #[test]
    fn step_operator_is_m_matrix((widths, rho, gamma, frac) in state()) {
        let mesh = mesh_from(&widths);
        let rho = CellField::new(mesh.clone(), rho).unwrap();
        let c = EllipticSystem::new(mesh, false).solve(&rho.to_nodal()).unwrap();
        let limit = cfl_max_dt(&rho, &c).unwrap();
        let dt = if limit.is_finite() { frac * limit } else { frac };
        let d = assert_m_matrix(&StepOperator::assemble(&rho, &c, dt, gamma).unwrap());
        prop_assert_eq!(d.max_violation, 0.0);
        prop_assert_eq!(d.unit_row_sum_defect, 0.0);
    }

    #[test]
    fn secant_dominates_lower_bound(r in 0.0..10.0f64, rb in 0.0..10.0f64, g in 1.0..=3.0f64) {
        let f = f_secant(r, rb, g).unwrap();
        prop_assert!(f >= f_lower_bound(r, rb, g) - 1e-12 * f.max(1.0));
    }

    #[test]
    fn lemma_margins_nonnegative(u in 0.0..10.0f64, ub in 0.0..10.0f64, a in 1.0..=3.0f64,
                                 r in 1e-6..10.0f64, rb in 1e-6..10.0f64, g in 1.0..=3.0f64) {
        let m = lemma_checks(u, ub, a, r, rb, g);
        let s1 = (u.powf(a) - ub.powf(a)).abs().max(1.0);
        let s2 = ((r.powf(g) - rb.powf(g)) * (r - rb)).powf(g / (g + 1.0)).max(1.0);
        prop_assert!(m.power_difference >= -1e-12 * s1);
        prop_assert!(m.product >= -1e-12 * s2);
    }

    #[test]
    fn eoc_is_antisymmetric(a in 1e-8..1.0f64, b in 1e-8..1.0f64) {
        prop_assert!((eoc(a, b, 100, 200) + eoc(b, a, 100, 200)).abs() < 1e-12);
    }

    #[test]
    fn certified_prefix_ends_at_first_violation(
        rates in prop::collection::vec(0.0..50.0f64, 2..40),
        gamma in prop_oneof![Just(1.0), Just(1.5), Just(2.0)],
    ) {
        let c = ConstantsTable::new(gamma, 2).unwrap();
        let n = rates.len();
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 1e-3).collect();
        let mut a_cum = vec![1e-6];
        for k in 1..n {
            a_cum.push(a_cum[k - 1] + 1e-6 * rates[k]);
        }
        let r = certify(&times, &a_cum, &rates, times[n - 1], &c).unwrap();
        match r.first_violation {
            Some(tv) => {
                prop_assert!(!r.covers_final_time);
                prop_assert!(r.certified_until.map_or(true, |t| t < tv));
            }
            None => prop_assert!(r.covers_final_time),
        }
        prop_assert!(r.satisfied.iter().take_while(|s| **s).count() == r.satisfied.iter().position(|s| !s).unwrap_or(n));
    }
}
