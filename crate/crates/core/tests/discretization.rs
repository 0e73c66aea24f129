mod common;

use std::sync::Arc;

use common::dense_solve;
use ks_certify::chemo::EllipticSystem;
use ks_certify::scheme::{step_with, StepOptions};
use ks_certify::{CellField, Error, Mesh, Mesh1D, Mesh2D, NodalField};

fn close(a: &[f64], b: &[f64], tol: f64) {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol * scale, "entry {i}: {x} vs {y}");
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

const INTERFACES: [f64; 9] = [0.0, 0.09, 0.21, 0.36, 0.5, 0.58, 0.71, 0.88, 1.0];

/// Dense implicit step assembled from the flux formulas.
fn step_oracle_1d(rho: &[f64], c: &[f64], dt: f64, gamma: f64) -> Vec<f64> {
    let n = rho.len();
    let h: Vec<f64> = INTERFACES.windows(2).map(|w| w[1] - w[0]).collect();
    let x: Vec<f64> = INTERFACES.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let d: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { x[i + 1] - x[i] } else { x[0] + 1.0 - x[i] })
        .collect();
    let nx = |i: usize| (i + 1) % n;
    // fluxes at x_{i+1/2}
    let adv: Vec<f64> = (0..n)
        .map(|i| {
            let s = (c[nx(i)] - c[i]) / d[i];
            pos(s) * rho[i] - pos(-s) * rho[nx(i)]
        })
        .collect();
    let k: Vec<f64> = (0..n)
        .map(|i| gamma * (0.5 * (rho[i] + rho[nx(i)])).powf(gamma - 1.0) / d[i])
        .collect();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        let p = (i + n - 1) % n;
        b[i] = rho[i] - dt / h[i] * (adv[i] - adv[p]);
        a[i * n + i] = 1.0 + dt / h[i] * (k[i] + k[p]);
        a[i * n + nx(i)] -= dt / h[i] * k[i];
        a[i * n + p] -= dt / h[i] * k[p];
    }
    dense_solve(n, a, b)
}

#[test]
fn one_d_step_matches_dense_oracle() {
    let mesh = Arc::new(Mesh::from(Mesh1D::new(&INTERFACES).unwrap()));
    let rho = vec![0.3, 1.2, 0.0, 2.5, 0.8, 0.0, 1.9, 0.4];
    let c = vec![0.1, 0.5, 0.2, 0.9, 0.4, 0.3, 0.8, 0.05];
    for gamma in [1.0, 1.5, 2.0, 3.0] {
        let dt = 2e-3;
        let got = step_with(
            &CellField::new(mesh.clone(), rho.clone()).unwrap(),
            &NodalField::p1(mesh.clone(), c.clone()).unwrap(),
            dt,
            gamma,
            StepOptions::default(),
        )
        .unwrap();
        close(got.rho.values(), &step_oracle_1d(&rho, &c, dt, gamma), 1e-12);
    }
}

#[test]
fn two_d_step_matches_dense_oracle() {
    let n = 4;
    let h = 0.25;
    let mesh = Arc::new(Mesh::from(Mesh2D::new(n, 1.0).unwrap()));
    let rho: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64 * 0.4).collect();
    let c: Vec<f64> = (0..16).map(|i| ((i * 3) % 7) as f64 * 0.01).collect();
    let id = |j: usize, k: usize| (k % n) * n + (j % n);
    for gamma in [1.0, 2.0] {
        let dt = 1e-3;
        let mut a = vec![0.0; 256];
        let mut b = rho.clone();
        for k in 0..n {
            for j in 0..n {
                let i = id(j, k);
                // east and north interfaces of cell (j,k) and of its west/south neighbours
                for (from, to) in [
                    (id(j, k), id(j + 1, k)),
                    (id(j, k), id(j, k + 1)),
                    (id(j + n - 1, k), id(j, k)),
                    (id(j, k + n - 1), id(j, k)),
                ] {
                    let s = (c[to] - c[from]) / h;
                    let f = pos(s) * rho[from] - pos(-s) * rho[to];
                    let kk = gamma * (0.5 * (rho[from] + rho[to])).powf(gamma - 1.0) / h;
                    let sign = if from == i { 1.0 } else { -1.0 };
                    b[i] -= dt / h * sign * f;
                    let other = if from == i { to } else { from };
                    a[i * 16 + i] += dt / h * kk;
                    a[i * 16 + other] -= dt / h * kk;
                }
                a[i * 16 + i] += 1.0;
            }
        }
        let want = dense_solve(16, a, b);
        let got = step_with(
            &CellField::new(mesh.clone(), rho.clone()).unwrap(),
            &NodalField::p1(mesh.clone(), c.clone()).unwrap(),
            dt,
            gamma,
            StepOptions::default(),
        )
        .unwrap();
        close(got.rho.values(), &want, 1e-11);
    }
}

#[test]
fn steady_constant_state() {
    let mesh = Arc::new(Mesh::from(Mesh2D::new(8, 1.0).unwrap()));
    let rho = CellField::constant(mesh.clone(), 1.7);
    let c = EllipticSystem::new(mesh.clone(), true).solve(&rho.to_nodal()).unwrap();
    close(c.values(), &[1.7; 64], 1e-12);
    let next = step_with(&rho, &c, 0.05, 2.0, StepOptions::default()).unwrap();
    close(next.rho.values(), rho.values(), 1e-13);
}

#[test]
fn cfl_violation_is_reported() {
    let mesh = Arc::new(Mesh::from(Mesh1D::new(&INTERFACES).unwrap()));
    let rho = CellField::new(mesh.clone(), vec![1.0; 8]).unwrap();
    let c = NodalField::p1(mesh.clone(), vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
    let err = step_with(&rho, &c, 10.0, 1.0, StepOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Cfl { .. }), "{err}");
    let opts = StepOptions {
        allow_cfl_violation: true,
        ..StepOptions::default()
    };
    assert!(step_with(&rho, &c, 10.0, 1.0, opts).is_ok());
}

/// P1 stiffness plus mass matrix on the periodic dual mesh of `INTERFACES`.
fn chemo_oracle_1d(rho: &[f64], lumping: bool) -> Vec<f64> {
    let n = rho.len();
    let x: Vec<f64> = INTERFACES.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut a = vec![0.0; n * n];
    let mut m = vec![0.0; n * n];
    for e in 0..n {
        let e1 = (e + 1) % n;
        let d = if e + 1 < n { x[e + 1] - x[e] } else { x[0] + 1.0 - x[e] };
        for (p, q, kv, mv) in [
            (e, e, 1.0 / d, d / 3.0),
            (e1, e1, 1.0 / d, d / 3.0),
            (e, e1, -1.0 / d, d / 6.0),
            (e1, e, -1.0 / d, d / 6.0),
        ] {
            a[p * n + q] += kv;
            if lumping {
                m[p * n + p] += mv;
            } else {
                m[p * n + q] += mv;
            }
        }
    }
    let b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i * n + j] * rho[j]).sum()).collect();
    for i in 0..n * n {
        a[i] += m[i];
    }
    dense_solve(n, a, b)
}

#[test]
fn one_d_chemoattractant_matches_dense_oracle() {
    let mesh = Arc::new(Mesh::from(Mesh1D::new(&INTERFACES).unwrap()));
    let rho = vec![0.3, 1.2, 0.0, 2.5, 0.8, 0.0, 1.9, 0.4];
    for lumping in [false, true] {
        let c = EllipticSystem::new(mesh.clone(), lumping)
            .solve(&NodalField::p1(mesh.clone(), rho.clone()).unwrap())
            .unwrap();
        close(c.values(), &chemo_oracle_1d(&rho, lumping), 1e-12);
    }
}

#[test]
fn two_d_chemoattractant_matches_dense_oracle() {
    let n = 4;
    let h = 0.25;
    let nn = n * n;
    let mesh = Arc::new(Mesh::from(Mesh2D::new(n, 1.0).unwrap()));
    let rho: Vec<f64> = (0..nn).map(|i| ((i * 5) % 7) as f64 * 0.3).collect();
    let id = |j: usize, k: usize| (k % n) * n + (j % n);
    for lumping in [false, true] {
        let mut a = vec![0.0; nn * nn];
        let mut m = vec![0.0; nn * nn];
        for k in 0..n {
            for j in 0..n {
                // right triangles with legs of length h
                let tris = [
                    [(id(j, k), [0.0, 0.0]), (id(j + 1, k), [h, 0.0]), (id(j, k + 1), [0.0, h])],
                    [(id(j + 1, k + 1), [h, h]), (id(j, k + 1), [0.0, h]), (id(j + 1, k), [h, 0.0])],
                ];
                for t in tris {
                    let p: Vec<[f64; 2]> = t.iter().map(|v| v.1).collect();
                    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
                    let area = 0.5 * det.abs();
                    // gradients of the barycentric coordinates
                    let g = |a: usize| {
                        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                        [(p[b][1] - p[c][1]) / det, (p[c][0] - p[b][0]) / det]
                    };
                    for r in 0..3 {
                        for s in 0..3 {
                            let (gr, gs) = (g(r), g(s));
                            let (i, jj) = (t[r].0, t[s].0);
                            a[i * nn + jj] += area * (gr[0] * gs[0] + gr[1] * gs[1]);
                            let mv = area / 12.0 * if r == s { 2.0 } else { 1.0 };
                            if lumping {
                                m[i * nn + i] += mv;
                            } else {
                                m[i * nn + jj] += mv;
                            }
                        }
                    }
                }
            }
        }
        let b: Vec<f64> = (0..nn).map(|i| (0..nn).map(|j| m[i * nn + j] * rho[j]).sum()).collect();
        for i in 0..nn * nn {
            a[i] += m[i];
        }
        let want = dense_solve(nn, a, b);
        let got = EllipticSystem::new(mesh.clone(), lumping)
            .solve(&NodalField::p1(mesh.clone(), rho.clone()).unwrap())
            .unwrap();
        close(got.values(), &want, 1e-12);
    }
}

#[test]
fn lumped_chemoattractant_is_nonnegative() {
    let mesh = Arc::new(Mesh::from(Mesh2D::new(16, 1.0).unwrap()));
    let mut rho = vec![0.0; 256];
    rho[37] = 50.0;
    let c = EllipticSystem::new(mesh.clone(), true)
        .solve(&NodalField::p1(mesh, rho).unwrap())
        .unwrap();
    assert!(c.values().iter().all(|v| *v >= 0.0));
}
