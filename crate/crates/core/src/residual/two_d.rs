//! 2D bounds on the uniform periodic mesh.
//!
//! Cell `K_{j,k}` is covered by eight micro-triangles of area `h²/8`, each
//! inside one triangle of the dual mesh, so `ρ̃` is linear and `∇c_h` is
//! constant on every micro-triangle. Corner values of `ρ̃` on `K_{j,k}` are
//! the means of the two dual vertices spanning the anti-diagonal through
//! that corner.

use super::{LevelData, LevelTerms, NormSnapshot, StepTerms};
use crate::chemo::elliptic_estimator_2d;
use crate::fields::exact::tri_sq;
use crate::fields::quadrature::QuadratureRule;
use crate::fields::{grad_lower_left, grad_upper_right, neumaier_sum};
use crate::mesh::Mesh2D;
use crate::power::PowerLaw;
use crate::reconstruct::TimeSlab;
use crate::scheme::{frozen_coefficient, upwind};

/// Neighbour indices of cell `(j, k)`.
#[derive(Clone, Copy)]
struct Stencil {
    c: usize,
    e: usize,
    w: usize,
    n: usize,
    s: usize,
    ne: usize,
    nw: usize,
    se: usize,
}

impl Stencil {
    fn new(m: &Mesh2D, j: usize, k: usize) -> Self {
        let (jp, jn, kp, kn) = (m.prev(j), m.next(j), m.prev(k), m.next(k));
        Self {
            c: m.index(j, k),
            e: m.index(jn, k),
            w: m.index(jp, k),
            n: m.index(j, kn),
            s: m.index(j, kp),
            ne: m.index(jn, kn),
            nw: m.index(jp, kn),
            se: m.index(jn, kp),
        }
    }
}

/// Values of `ρ̃` at the nine points of `K_{j,k}`: centre, the four edge
/// midpoints and the four corners.
#[derive(Clone, Copy)]
struct Points {
    c: f64,
    e: f64,
    w: f64,
    n: f64,
    s: f64,
    ne: f64,
    nw: f64,
    se: f64,
    sw: f64,
}

impl Points {
    fn new(st: &Stencil, u: &[f64]) -> Self {
        let c = u[st.c];
        Self {
            c,
            e: 0.5 * (c + u[st.e]),
            w: 0.5 * (c + u[st.w]),
            n: 0.5 * (c + u[st.n]),
            s: 0.5 * (c + u[st.s]),
            ne: 0.5 * (u[st.e] + u[st.n]),
            sw: 0.5 * (u[st.s] + u[st.w]),
            se: 0.5 * (c + u[st.se]),
            nw: 0.5 * (c + u[st.nw]),
        }
    }

    /// The eight micro-triangles, tagged with the dual triangle containing
    /// each: 0 = LL(j,k), 1 = UR(j−1,k−1), 2 = UR(j,k−1), 3 = LL(j,k−1),
    /// 4 = UR(j−1,k), 5 = LL(j−1,k).
    fn triangles(&self) -> [([f64; 3], usize); 8] {
        [
            ([self.c, self.e, self.n], 0),
            ([self.e, self.ne, self.n], 0),
            ([self.c, self.w, self.s], 1),
            ([self.w, self.sw, self.s], 1),
            ([self.c, self.e, self.se], 2),
            ([self.c, self.se, self.s], 3),
            ([self.c, self.nw, self.n], 4),
            ([self.c, self.w, self.nw], 5),
        ]
    }
}

/// Gradients of a P1 field on the six dual triangles meeting `K_{j,k}`,
/// in the tag order of [`Points::triangles`].
fn grads(m: &Mesh2D, u: &[f64], j: usize, k: usize) -> [[f64; 2]; 6] {
    let (jp, kp) = (m.prev(j), m.prev(k));
    [
        grad_lower_left(m, u, j, k),
        grad_upper_right(m, u, jp, kp),
        grad_upper_right(m, u, j, kp),
        grad_lower_left(m, u, j, kp),
        grad_upper_right(m, u, jp, k),
        grad_lower_left(m, u, jp, k),
    ]
}

pub(super) fn level(m: &Mesh2D, p: &PowerLaw, rho: &[f64], c: &[f64], eta: Option<f64>) -> LevelData {
    let nn = m.n();
    let h = m.h();
    let area = h * h / 8.0;
    let eta_c = eta.unwrap_or_else(|| elliptic_estimator_2d(m, c, rho));
    let rho_inf = rho.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let mut fx = vec![0.0; rho.len()];
    let mut fy = vec![0.0; rho.len()];
    for k in 0..nn {
        for j in 0..nn {
            let st = Stencil::new(m, j, k);
            fx[st.c] = upwind((c[st.e] - c[st.c]) / h, rho[st.c], rho[st.e]);
            fy[st.c] = upwind((c[st.n] - c[st.c]) / h, rho[st.c], rho[st.n]);
        }
    }
    let mut parts = Vec::with_capacity(rho.len());
    for k in 0..nn {
        for j in 0..nn {
            let st = Stencil::new(m, j, k);
            let pts = Points::new(&st, rho);
            let g = grads(m, c, j, k);
            let (fr, fl, ft, fb) = (fx[st.c], fx[st.w], fy[st.c], fy[st.s]);
            let mut acc = 0.0;
            for (v, tag) in pts.triangles() {
                let [gx, gy] = g[tag];
                let f = |flux: f64, d: f64| tri_sq(area, [flux - v[0] * d, flux - v[1] * d, flux - v[2] * d]);
                acc += f(fr, gx) + f(fl, gx) + f(ft, gy) + f(fb, gy);
            }
            parts.push(acc);
        }
    }
    let flux = neumaier_sum(parts).sqrt();
    let terms = LevelTerms {
        eta_c,
        flux,
        rho_inf,
        phi: 2.0 * (flux + std::f64::consts::SQRT_2 * rho_inf * eta_c),
    };

    let cell = h * h;
    let e = 1.5 * (p.gamma() - 1.0);
    let pow_int = if e == 0.0 {
        m.length() * m.length()
    } else {
        cell * neumaier_sum(rho.iter().map(|v| v.abs().powf(e)))
    };
    let cube_int = cell * neumaier_sum(rho.iter().map(|v| v.abs().powi(3)));
    let mut gl3 = Vec::with_capacity(2 * rho.len());
    let mut ginf = 0.0f64;
    for k in 0..nn {
        for j in 0..nn {
            for g in [grad_lower_left(m, c, j, k), grad_upper_right(m, c, j, k)] {
                let a = g[0].hypot(g[1]);
                ginf = ginf.max(a);
                gl3.push(0.5 * cell * a * a * a);
            }
        }
    }
    let snapshot = NormSnapshot {
        t: 0.0,
        rho_inf,
        rho_pow_l3_sq: pow_int.powf(2.0 / 3.0),
        rho_l3: cube_int.cbrt(),
        grad_c_l3: neumaier_sum(gl3).cbrt(),
        grad_c_inf: ginf,
        eta_c,
    };
    LevelData {
        terms,
        snapshot,
        coef: rho.iter().map(|&v| frozen_coefficient(p, v)).collect(),
    }
}

pub(super) fn step(m: &Mesh2D, p: &PowerLaw, a: &[f64], b: &[f64]) -> StepTerms {
    let nn = m.n();
    let h = m.h();
    let len = a.len();
    let k_of = |s: f64| frozen_coefficient(p, s);
    let mut dx = vec![0.0; len];
    let mut dy = vec![0.0; len];
    let (mut ix, mut iy, mut ex, mut ey) = (
        Vec::with_capacity(len),
        Vec::with_capacity(len),
        Vec::with_capacity(len),
        Vec::with_capacity(len),
    );
    let mis = |kk: f64, pts: [f64; 8]| pts.iter().fold(0.0f64, |acc, &v| acc.max((k_of(v) - kk).abs()));
    for k in 0..nn {
        for j in 0..nn {
            let st = Stencil::new(m, j, k);
            // x-direction, shifted cell [x_j, x_{j+1}] × [y_{k−1/2}, y_{k+1/2}]
            let e_se = m.index(m.next(j), m.prev(k));
            let kx = k_of(0.5 * (a[st.c] + a[st.e]));
            let s0 = (b[st.e] - b[st.c]) / h;
            let su = (b[st.ne] - b[st.n]) / h;
            let sd = (b[e_se] - b[st.s]) / h;
            dx[st.c] = kx * s0;
            let mx = mis(
                kx,
                [
                    a[st.c],
                    a[st.e],
                    0.5 * (a[st.c] + a[st.n]),
                    0.5 * (a[st.e] + a[st.n]),
                    0.5 * (a[st.e] + a[st.ne]),
                    0.5 * (a[st.c] + a[st.s]),
                    0.5 * (a[e_se] + a[st.c]),
                    0.5 * (a[st.e] + a[e_se]),
                ],
            );
            ix.push(mx * mx * h * h * (0.75 * s0 * s0 + 0.125 * (su * su + sd * sd)));
            ex.push(kx * kx * h * h * 0.125 * ((su - s0).powi(2) + (sd - s0).powi(2)));

            // y-direction, shifted cell [x_{j−1/2}, x_{j+1/2}] × [y_k, y_{k+1}]
            let n_w = m.index(m.prev(j), m.next(k));
            let ky = k_of(0.5 * (a[st.c] + a[st.n]));
            let t0 = (b[st.n] - b[st.c]) / h;
            let tr = (b[st.ne] - b[st.e]) / h;
            let tl = (b[n_w] - b[st.w]) / h;
            dy[st.c] = ky * t0;
            let my = mis(
                ky,
                [
                    a[st.c],
                    a[st.n],
                    0.5 * (a[st.c] + a[st.e]),
                    0.5 * (a[st.n] + a[st.e]),
                    0.5 * (a[st.n] + a[st.ne]),
                    0.5 * (a[st.c] + a[st.w]),
                    0.5 * (a[n_w] + a[st.c]),
                    0.5 * (a[st.n] + a[n_w]),
                ],
            );
            iy.push(my * my * h * h * (0.75 * t0 * t0 + 0.125 * (tr * tr + tl * tl)));
            ey.push(ky * ky * h * h * 0.125 * ((tr - t0).powi(2) + (tl - t0).powi(2)));
        }
    }
    let (mut fdx, mut fdy) = (Vec::with_capacity(len), Vec::with_capacity(len));
    for k in 0..nn {
        for j in 0..nn {
            let st = Stencil::new(m, j, k);
            fdx.push((dx[st.c] - dx[st.w]).powi(2));
            fdy.push((dy[st.c] - dy[st.s]).powi(2));
        }
    }
    let ix = neumaier_sum(ix).sqrt();
    let iy = neumaier_sum(iy).sqrt();
    let ex = neumaier_sum(ex).sqrt();
    let ey = neumaier_sum(ey).sqrt();
    let fx = 0.5 * h * neumaier_sum(fdx).sqrt();
    let fy = 0.5 * h * neumaier_sum(fdy).sqrt();
    StepTerms {
        coef: ix.hypot(iy),
        flux_diff: fx.hypot(fy),
        extra: ex.hypot(ey),
        s1: (ix + ex + fx).hypot(iy + ey + fy),
    }
}

/// `P[u] = Σ |4u_{j,k} − 2u_{j−1,k} − 2u_{j,k−1}| / 32`, the displayed
/// five-point functional.
pub fn displayed_p(m: &Mesh2D, u: &[f64]) -> f64 {
    let nn = m.n();
    neumaier_sum((0..nn * nn).map(|i| {
        let (j, k) = m.coords(i);
        let st = Stencil::new(m, j, k);
        (4.0 * u[st.c] - 2.0 * u[st.w] - 2.0 * u[st.s]).abs() / 32.0
    }))
}

/// `(D, Q, (h/Δt)·P[ρⁿ⁺¹ − ρⁿ])`.
pub(super) fn time_terms(m: &Mesh2D, slab: &TimeSlab) -> (f64, f64, f64) {
    let nn = m.n();
    let h = m.h();
    let (r0, r1) = (slab.rho_n.values(), slab.rho_np1.values());
    let (pi, po) = (slab.prev.rho_in.values(), slab.prev.rho_out.values());
    let w: Vec<f64> = r1.iter().zip(r0).map(|(a, b)| (a - b) / slab.dt).collect();
    let area = h * h / 8.0;
    let mut stencil = Vec::with_capacity(w.len());
    let mut local = Vec::with_capacity(w.len());
    for k in 0..nn {
        for j in 0..nn {
            let st = Stencil::new(m, j, k);
            let s = 10.0 * w[st.c]
                - 2.0 * (w[st.e] + w[st.w] + w[st.n] + w[st.s])
                - w[st.se]
                - w[st.nw];
            stencil.push(s * s);
            let pts = Points::new(&st, &w);
            let wc = w[st.c];
            local.push(
                pts.triangles()
                    .iter()
                    .map(|(v, _)| tri_sq(area, [wc - v[0], wc - v[1], wc - v[2]]))
                    .sum::<f64>(),
            );
        }
    }
    let p1 = h / 24.0 * neumaier_sum(stencil).sqrt();
    let p2 = h / std::f64::consts::PI * neumaier_sum(local).sqrt();
    let sd = neumaier_sum((0..w.len()).map(|i| {
        let v = w[i] - (po[i] - pi[i]) / slab.prev.dt;
        h * h * v * v
    }))
    .sqrt();
    (p1.hypot(p2), sd, h * displayed_p(m, &w))
}

/// `‖ℓ₁ I_h f(ρ^in_m) ∇ρ̃^out_m + ℓ₀ I_h f(ρⁿ) ∇ρ̃ⁿ⁺¹ − I_h f(ρ(t)) ∇ρ̃(t)‖_{L²}`
/// with `I_h` the nodal interpolant; `coef_m`, `coef_n` hold `γ f` at the
/// nodes of the two levels.
pub(super) fn lag_interp(
    m: &Mesh2D,
    p: &PowerLaw,
    slab: &TimeSlab,
    coef_m: &[f64],
    coef_n: &[f64],
    l0: f64,
    l1: f64,
) -> f64 {
    let nn = m.n();
    let area = 0.5 * m.h() * m.h();
    let (rn, rn1) = (slab.rho_n.values(), slab.rho_np1.values());
    let mo = slab.prev.rho_out.values();
    if p.is_linear() {
        if std::sync::Arc::ptr_eq(&slab.prev.rho_out, &slab.rho_n) || l1 == 0.0 {
            return 0.0;
        }
        let diff: Vec<f64> = mo.iter().zip(rn).map(|(a, b)| a - b).collect();
        let s = neumaier_sum((0..nn * nn).map(|i| {
            let (j, k) = m.coords(i);
            let (g, u) = (grad_lower_left(m, &diff, j, k), grad_upper_right(m, &diff, j, k));
            area * (g[0] * g[0] + g[1] * g[1] + u[0] * u[0] + u[1] * u[1])
        }));
        return p.gamma() * l1 * s.sqrt();
    }
    let rt: Vec<f64> = rn1.iter().zip(rn).map(|(a, b)| l0 * a + l1 * b).collect();
    let ft: Vec<f64> = rt.iter().map(|&v| frozen_coefficient(p, v)).collect();
    let s = neumaier_sum((0..nn * nn).map(|i| {
        let (j, k) = m.coords(i);
        let mut acc = 0.0;
        for (upper, g) in [(false, grad_lower_left as fn(&Mesh2D, &[f64], usize, usize) -> [f64; 2]), (true, grad_upper_right)] {
            let g1 = g(m, mo, j, k);
            let g2 = g(m, rn1, j, k);
            let g3 = g(m, &rt, j, k);
            let nodes = m.dual_triangle(
                j,
                k,
                if upper {
                    crate::mesh::DualTriangle::UpperRight
                } else {
                    crate::mesh::DualTriangle::LowerLeft
                },
            );
            let mut vx = [0.0; 3];
            let mut vy = [0.0; 3];
            for (q, &nd) in nodes.iter().enumerate() {
                let (a1, a2, a3) = (l1 * coef_m[nd], l0 * coef_n[nd], ft[nd]);
                vx[q] = a1 * g1[0] + a2 * g2[0] - a3 * g3[0];
                vy[q] = a1 * g1[1] + a2 * g2[1] - a3 * g3[1];
            }
            acc += tri_sq(area, vx) + tri_sq(area, vy);
        }
        acc
    }));
    s.max(0.0).sqrt()
}

/// `‖ρ₀ − ρ̃‖²_{L²}` by the triangle rule of order `q` on every dual triangle.
pub(super) fn l2_distance_sq(m: &Mesh2D, r: &[f64], rho0: impl Fn(f64, f64) -> f64, q: usize) -> f64 {
    let rule = QuadratureRule::triangle(q.max(1));
    let nn = m.n();
    let h = m.h();
    let len = m.length();
    neumaier_sum((0..nn * nn).map(|i| {
        let (j, k) = m.coords(i);
        let (x0, y0) = m.midpoint(j, k);
        let ll = m.dual_triangle(j, k, crate::mesh::DualTriangle::LowerLeft);
        let ur = m.dual_triangle(j, k, crate::mesh::DualTriangle::UpperRight);
        let (c00, c10, c01, c11) = (r[ll[0]], r[ll[1]], r[ll[2]], r[ur[1]]);
        let mut acc = 0.0;
        for (pt, w) in rule.points.iter().zip(&rule.weights) {
            let [u, v] = *pt;
            let x = (x0 + u * h).rem_euclid(len);
            let y = (y0 + v * h).rem_euclid(len);
            let e = rho0(x, y) - (c00 + u * (c10 - c00) + v * (c01 - c00));
            acc += w * e * e;
            let x = (x0 + (1.0 - v) * h).rem_euclid(len);
            let y = (y0 + (u + v) * h).rem_euclid(len);
            let e = rho0(x, y) - (c10 + u * (c11 - c10) + v * (c01 - c10));
            acc += w * e * e;
        }
        h * h * acc
    }))
}
