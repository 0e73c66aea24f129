mod common;

use std::sync::Arc;

use common::cases::build;
use ks_certify::chemo::solve_chemoattractant;
use ks_certify::reconstruct::{make_slab, FirstSlabPolicy, State, TimeSlab};
use ks_certify::residual::{accumulate_A, eta_levels, integrate_slab, ResidualEvaluator};
use ks_certify::scheme::step;
use ks_certify::{CellField, Mesh, Mesh2D};

fn states_2d(gamma: f64) -> Vec<State> {
    let n = 8;
    let mesh = Arc::new(Mesh::from(Mesh2D::new(n, 1.0).unwrap()));
    let v = (0..n * n)
        .map(|i| {
            let (j, k) = (i % n, i / n);
            1.0 + 0.8 * ((j as f64 * 0.7).sin() * (k as f64 * 1.3).cos())
        })
        .collect();
    let mut rho = CellField::new(mesh, v).unwrap();
    let mut out = Vec::new();
    let mut t = 0.0;
    for dt in [2e-3, 3e-3, 2.5e-3] {
        let c = solve_chemoattractant(&rho.to_nodal(), true).unwrap();
        out.push(State {
            t,
            rho: Arc::new(rho.clone()),
            c: Arc::new(c.clone()),
        });
        rho = step(&rho, &c, dt, gamma).unwrap();
        t += dt;
    }
    out
}

fn slabs() -> Vec<(TimeSlab, f64)> {
    let mut out = Vec::new();
    for gamma in [1.0, 1.5, 2.0] {
        let c1 = build(7, gamma, true, false);
        out.push((make_slab(&c1.states, FirstSlabPolicy::Shift).unwrap(), gamma));
        out.push((make_slab(&c1.states[..2], FirstSlabPolicy::Hold).unwrap(), gamma));
        let s2 = states_2d(gamma);
        out.push((make_slab(&s2, FirstSlabPolicy::Shift).unwrap(), gamma));
        out.push((make_slab(&s2[..2], FirstSlabPolicy::Extrapolate).unwrap(), gamma));
    }
    out
}

/// 3-point Gauss–Legendre on `[0, 1]`.
fn gauss3() -> [(f64, f64); 3] {
    let d = 0.5 * (0.6f64).sqrt();
    [(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
}

#[test]
fn slab_integral_is_gauss_rule_of_pointwise_bounds() {
    for (slab, gamma) in slabs() {
        let eta = eta_levels(&slab).unwrap();
        let res = integrate_slab(&slab, gamma, Some(eta)).unwrap();
        let mut ev = ResidualEvaluator::new(gamma);
        let (mut s1, mut s2, mut s3, mut tot) = (0.0, 0.0, 0.0, 0.0);
        for (s, w) in gauss3() {
            let t = slab.t_n + s * slab.dt;
            let r1 = ev.r1(&slab, t).unwrap();
            let r2 = ev.r2(&slab, t).unwrap();
            let r3 = ev.r3(&slab, t, Some(eta)).unwrap();
            s1 += w * slab.dt * r1 * r1;
            s2 += w * slab.dt * r2 * r2;
            s3 += w * slab.dt * r3 * r3;
            tot += w * slab.dt * (r1 + r2 + r3).powi(2);
        }
        for (a, b) in [(res.r1_sq, s1), (res.r2_sq, s2), (res.r3_sq, s3), (res.total_sq, tot)] {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
        }
        // cross terms are nonnegative
        assert!(res.total_sq >= res.r1_sq + res.r2_sq + res.r3_sq);
    }
}

#[test]
fn gauss_rule_close_to_composite_simpson() {
    for (slab, gamma) in slabs() {
        let eta = eta_levels(&slab).unwrap();
        let res = integrate_slab(&slab, gamma, Some(eta)).unwrap();
        let mut ev = ResidualEvaluator::new(gamma);
        let m = 64;
        let mut acc = 0.0;
        for i in 0..=m {
            let t = slab.t_n + slab.dt * i as f64 / m as f64;
            let r = ev.r1(&slab, t).unwrap() + ev.r2(&slab, t).unwrap() + ev.r3(&slab, t, Some(eta)).unwrap();
            let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * r * r;
        }
        acc *= slab.dt / (3.0 * m as f64);
        assert!((res.total_sq - acc).abs() <= 0.05 * acc, "{} vs {acc}", res.total_sq);
    }
}

#[test]
fn constant_state_has_zero_residual() {
    let mesh = Arc::new(Mesh::from(Mesh2D::new(6, 1.0).unwrap()));
    let rho = CellField::constant(mesh.clone(), 0.9);
    let c = solve_chemoattractant(&rho.to_nodal(), true).unwrap();
    let states: Vec<State> = (0..3)
        .map(|k| State {
            t: 0.01 * k as f64,
            rho: Arc::new(rho.clone()),
            c: Arc::new(c.clone()),
        })
        .collect();
    for gamma in [1.0, 2.0] {
        let r = integrate_slab(&make_slab(&states, FirstSlabPolicy::Shift).unwrap(), gamma, None).unwrap();
        assert!(r.total_sq < 1e-24, "{}", r.total_sq);
    }
}

#[test]
fn cumulative_series_starts_at_z1_and_accumulates() {
    let states = states_2d(1.5);
    let slabs: Vec<_> = (2..=states.len())
        .map(|k| integrate_slab(&make_slab(&states[..k], FirstSlabPolicy::Shift).unwrap(), 1.5, None).unwrap())
        .collect();
    let s = accumulate_A(&slabs, 0.25);
    assert_eq!(s.a[0], 0.25);
    assert_eq!(s.times.len(), slabs.len() + 1);
    let total: f64 = slabs.iter().map(|x| x.total_sq).sum();
    assert!((s.a.last().unwrap() - 0.25 - total).abs() < 1e-15);
    assert!(s.a.windows(2).all(|w| w[1] >= w[0]));
}
