//! Scheme-generated data for residual checks.

use std::sync::Arc;

use ks_certify::chemo::solve_chemoattractant;
use ks_certify::reconstruct::{make_slab, FirstSlabPolicy, State};
use ks_certify::residual::ResidualEvaluator;
use ks_certify::scheme::{cfl_max_dt, step};
use ks_certify::{CellField, Mesh, Mesh1D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub interfaces: Vec<f64>,
    pub gamma: f64,
    pub states: Vec<State>,
}

pub fn build(seed: u64, gamma: f64, lumping: bool, uniform: bool) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 8;
    let mut interfaces = vec![0.0];
    let widths: Vec<f64> = (0..n).map(|_| if uniform { 1.0 } else { rng.gen_range(0.6..1.4) }).collect();
    let total: f64 = widths.iter().sum();
    for w in &widths {
        let last = *interfaces.last().unwrap();
        interfaces.push(last + w / total);
    }
    *interfaces.last_mut().unwrap() = 1.0;
    let mesh = Arc::new(Mesh::from(Mesh1D::new(&interfaces).unwrap()));
    let rho0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
    let mut rho = CellField::new(mesh.clone(), rho0).unwrap();
    let mut t = 0.0;
    let mut states = Vec::new();
    for _ in 0..3 {
        let c = solve_chemoattractant(&rho.to_nodal(), lumping).unwrap();
        let limit = cfl_max_dt(&rho, &c).unwrap();
        let dt = rng.gen_range(0.002..0.01f64).min(0.9 * limit);
        states.push(State {
            t,
            rho: Arc::new(rho.clone()),
            c: Arc::new(c.clone()),
        });
        rho = step(&rho, &c, dt, gamma).unwrap();
        t += dt;
    }
    Case {
        interfaces,
        gamma,
        states,
    }
}

pub fn worst_ratio(case: &Case, history: &[State], policy: FirstSlabPolicy, rng: &mut ChaCha8Rng) -> f64 {
    let slab = make_slab(history, policy).unwrap();
    let mut ev = ResidualEvaluator::new(case.gamma);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let l0: f64 = rng.gen_range(0.0..1.0);
        let t = slab.t_n + l0 * slab.dt;
        let bound = ev.r1(&slab, t).unwrap() + ev.r2(&slab, t).unwrap() + ev.r3(&slab, t, None).unwrap();
        let truth = super::residual_dual_norm(
            &case.interfaces,
            case.gamma,
            slab.rho_n.values(),
            slab.rho_np1.values(),
            slab.dt,
            l0,
            16,
        );
        worst = worst.max(truth / bound);
    }
    worst
}

