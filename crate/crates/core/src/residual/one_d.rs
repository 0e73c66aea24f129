//! 1D bounds. Index `i` of an interface quantity refers to `x_{i+1/2}`;
//! `ρ̃` is linear on each dual interval `[x_i, x_{i+1}]` of length
//! `d_{i+1/2}`.

use super::{LevelData, LevelTerms, NormSnapshot, StepTerms};
use crate::chemo::elliptic_estimator_1d;
use crate::fields::exact::seg_sq;
use crate::fields::{gauss_legendre, neumaier_sum};
use crate::mesh::Mesh1D;
use crate::power::PowerLaw;
use crate::reconstruct::TimeSlab;
use crate::scheme::{frozen_coefficient, upwind};

fn slopes(m: &Mesh1D, u: &[f64]) -> Vec<f64> {
    let d = m.d();
    (0..m.n_cells()).map(|i| (u[m.next(i)] - u[i]) / d[i]).collect()
}

/// `ρ̃` at `x_{i+1/2}`.
fn at_interface(m: &Mesh1D, r: &[f64], i: usize) -> f64 {
    let i1 = m.next(i);
    r[i] + (r[i1] - r[i]) * (0.5 * m.h()[i]) / m.d()[i]
}

pub(super) fn level(m: &Mesh1D, p: &PowerLaw, rho: &[f64], c: &[f64], eta: Option<f64>, q: usize) -> LevelData {
    let n = m.n_cells();
    let (h, d) = (m.h(), m.d());
    let eta_c = eta.unwrap_or_else(|| elliptic_estimator_1d(m, c, rho));
    let s = slopes(m, c);
    let rho_inf = rho.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    // ‖ℱ_{i+1/2} − ρ̃ ∂c_h‖² over K_i ∪ K_{i+1}, split at x_i and x_{i+1}.
    let flux_sq = neumaier_sum((0..n).map(|i| {
        let (ip, i1) = (m.prev(i), m.next(i));
        let f = upwind(s[i], rho[i], rho[i1]);
        let left = seg_sq(0.5 * h[i], f - at_interface(m, rho, ip) * s[ip], f - rho[i] * s[ip]);
        let mid = seg_sq(d[i], f - rho[i] * s[i], f - rho[i1] * s[i]);
        let right = seg_sq(0.5 * h[i1], f - rho[i1] * s[i1], f - at_interface(m, rho, i1) * s[i1]);
        left + mid + right
    }));
    let flux = flux_sq.sqrt();
    let terms = LevelTerms {
        eta_c,
        flux,
        rho_inf,
        phi: 2.0 * (flux + std::f64::consts::SQRT_2 * rho_inf * eta_c),
    };

    let (xg, wg) = gauss_legendre(q);
    let e = 1.5 * (p.gamma() - 1.0);
    let mut ipow = Vec::with_capacity(n);
    let mut icube = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (rho[i], rho[m.next(i)]);
        let (mut sp, mut sc) = (0.0, 0.0);
        for (x, w) in xg.iter().zip(&wg) {
            let v = (a + (b - a) * x).abs();
            sp += w * if e == 0.0 { 1.0 } else { v.powf(e) };
            sc += w * v * v * v;
        }
        ipow.push(d[i] * sp);
        icube.push(d[i] * sc);
    }
    let snapshot = NormSnapshot {
        t: 0.0,
        rho_inf,
        rho_pow_l3_sq: neumaier_sum(ipow).powf(2.0 / 3.0),
        rho_l3: neumaier_sum(icube).cbrt(),
        grad_c_l3: neumaier_sum((0..n).map(|i| d[i] * s[i].abs().powi(3))).cbrt(),
        grad_c_inf: s.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        eta_c,
    };
    LevelData {
        terms,
        snapshot,
        coef: Vec::new(),
    }
}

pub(super) fn step(m: &Mesh1D, p: &PowerLaw, a: &[f64], b: &[f64]) -> StepTerms {
    let n = m.n_cells();
    let (h, d) = (m.h(), m.d());
    let mut dflux = vec![0.0; n];
    let mut coef = Vec::with_capacity(n);
    for i in 0..n {
        let i1 = m.next(i);
        let k = frozen_coefficient(p, 0.5 * (a[i] + a[i1]));
        let jump = b[i1] - b[i];
        dflux[i] = k * jump / d[i];
        let mis = (frozen_coefficient(p, a[i]) - k)
            .abs()
            .max((frozen_coefficient(p, a[i1]) - k).abs());
        coef.push(jump * jump / d[i] * mis * mis);
    }
    let coef = neumaier_sum(coef).sqrt();
    let flux_diff = neumaier_sum((0..n).map(|i| {
        let v = dflux[i] - dflux[m.prev(i)];
        h[i] * v * v
    }))
    .sqrt();
    StepTerms {
        coef,
        flux_diff,
        extra: 0.0,
        s1: coef + flux_diff,
    }
}

/// `(D, Q)`: the spatial reconstruction term of `∂_t(ρ̃ − ρ_h)` and the
/// second difference in time.
pub(super) fn time_terms(m: &Mesh1D, slab: &TimeSlab) -> (f64, f64) {
    let n = m.n_cells();
    let (h, d) = (m.h(), m.d());
    let (r0, r1) = (slab.rho_n.values(), slab.rho_np1.values());
    let (pi, po) = (slab.prev.rho_in.values(), slab.prev.rho_out.values());
    let w: Vec<f64> = (0..n).map(|i| (r1[i] - r0[i]) / slab.dt).collect();
    let d2 = neumaier_sum((0..n).map(|i| {
        let v = w[m.next(i)] - w[i];
        d[i] * v * v
    }))
    .sqrt();
    let sd = neumaier_sum((0..n).map(|i| {
        let v = w[i] - (po[i] - pi[i]) / slab.prev.dt;
        h[i] * v * v
    }))
    .sqrt();
    (d2, sd)
}

/// `γ‖ℓ₁ f(ρ̃^in_m) ∂ρ̃^out_m + ℓ₀ f(ρ̃ⁿ) ∂ρ̃ⁿ⁺¹ − f(ρ̃(t)) ∂ρ̃(t)‖_{L²}`.
pub(super) fn lag_interp(m: &Mesh1D, p: &PowerLaw, slab: &TimeSlab, l0: f64, l1: f64, q: usize) -> f64 {
    let n = m.n_cells();
    let d = m.d();
    let (rn, rn1) = (slab.rho_n.values(), slab.rho_np1.values());
    let (mi, mo) = (slab.prev.rho_in.values(), slab.prev.rho_out.values());
    if p.is_linear() {
        if std::sync::Arc::ptr_eq(&slab.prev.rho_out, &slab.rho_n) || l1 == 0.0 {
            return 0.0;
        }
        let s = neumaier_sum((0..n).map(|i| {
            let i1 = m.next(i);
            let v = ((mo[i1] - mo[i]) - (rn[i1] - rn[i])) / d[i];
            d[i] * v * v
        }));
        return p.gamma() * l1 * s.sqrt();
    }
    let (xg, wg) = gauss_legendre(q);
    let k = |s: f64| frozen_coefficient(p, s);
    let s = neumaier_sum((0..n).map(|i| {
        let i1 = m.next(i);
        let sm = (mo[i1] - mo[i]) / d[i];
        let sn1 = (rn1[i1] - rn1[i]) / d[i];
        let st = l0 * sn1 + l1 * (rn[i1] - rn[i]) / d[i];
        let mut acc = 0.0;
        for (x, w) in xg.iter().zip(&wg) {
            let lin = |u: &[f64]| u[i] + (u[i1] - u[i]) * x;
            let (a, b) = (lin(mi), lin(rn));
            let t = l0 * lin(rn1) + l1 * b;
            let v = l1 * k(a) * sm + l0 * k(b) * sn1 - k(t) * st;
            acc += w * v * v;
        }
        d[i] * acc
    }));
    s.sqrt()
}

/// `‖ρ₀ − ρ̃‖²_{L²}` by Gauss quadrature on each dual interval.
pub(super) fn l2_distance_sq(m: &Mesh1D, r: &[f64], rho0: impl Fn(f64) -> f64, q: usize) -> f64 {
    let (xg, wg) = gauss_legendre(q.max(1));
    let (x, d) = (m.midpoints(), m.d());
    let len = m.length();
    neumaier_sum((0..m.n_cells()).map(|i| {
        let i1 = m.next(i);
        let mut acc = 0.0;
        for (s, w) in xg.iter().zip(&wg) {
            let xx = (x[i] + s * d[i]).rem_euclid(len);
            let v = rho0(xx) - (r[i] + (r[i1] - r[i]) * s);
            acc += w * v * v;
        }
        d[i] * acc
    }))
}
