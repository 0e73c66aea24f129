//! Independent oracles shared by the integration tests. Apart from the
//! data generators in [`cases`], nothing here calls into the library.

#![allow(dead_code)]

pub mod cases;

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().partial_cmp(&a[q * n + col].abs()).unwrap())
            .unwrap();
        for k in 0..n {
            a.swap(piv * n + k, col * n + k);
        }
        b.swap(piv, col);
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r * n + k] * x[k];
        }
        x[r] = s / a[r * n + r];
    }
    x
}

/// Gauss–Legendre on `[0, 1]` by bisection on `P_q`.
pub fn gauss(q: usize) -> Vec<(f64, f64)> {
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=q {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    let mut out = Vec::new();
    let m = 4001;
    let grid: Vec<f64> = (0..=m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        if legendre(a).0 * legendre(b).0 > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if legendre(a).0 * legendre(c).0 <= 0.0 {
                b = c;
            } else {
                a = c;
            }
        }
        let x = 0.5 * (a + b);
        let dp = legendre(x).1;
        let wt = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * wt));
    }
    assert_eq!(out.len(), q);
    out
}

/// Periodic piecewise-linear function with nodes at cell midpoints.
pub struct PwLinear {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub length: f64,
}

impl PwLinear {
    pub fn from_interfaces(interfaces: &[f64], values: Vec<f64>) -> Self {
        let nodes = interfaces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Self {
            nodes,
            values,
            length: *interfaces.last().unwrap(),
        }
    }

    /// `(interval index, offset from its left node, interval length)`.
    pub fn locate(&self, x: f64) -> (usize, f64, f64) {
        let n = self.nodes.len();
        let x = x.rem_euclid(self.length);
        for i in 0..n {
            let left = self.nodes[i];
            let right = if i + 1 < n { self.nodes[i + 1] } else { self.nodes[0] + self.length };
            let xx = if x < self.nodes[0] { x + self.length } else { x };
            if xx >= left && xx <= right {
                return (i, xx - left, right - left);
            }
        }
        unreachable!()
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (i, s, d) = self.locate(x);
        let n = self.nodes.len();
        let (a, b) = (self.values[i], self.values[(i + 1) % n]);
        (a + (b - a) * s / d, (b - a) / d)
    }
}

/// Exact periodic solution of `c − c'' = ρ̃` for piecewise-linear `ρ̃`:
/// `c = ρ̃ + A_i cosh(s) + B_i sinh(s)` on interval `i`.
pub struct ExactC {
    rho: PwLinear,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ExactC {
    pub fn new(rho: PwLinear) -> Self {
        let n = rho.nodes.len();
        let len = |i: usize| {
            if i + 1 < n {
                rho.nodes[i + 1] - rho.nodes[i]
            } else {
                rho.nodes[0] + rho.length - rho.nodes[i]
            }
        };
        let slope = |i: usize| (rho.values[(i + 1) % n] - rho.values[i]) / len(i);
        let m = 2 * n;
        let mut a = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for i in 0..n {
            let j = (i + 1) % n;
            let (ch, sh) = (len(i).cosh(), len(i).sinh());
            // value continuity
            a[(2 * i) * m + 2 * i] += ch;
            a[(2 * i) * m + 2 * i + 1] += sh;
            a[(2 * i) * m + 2 * j] -= 1.0;
            // derivative continuity
            a[(2 * i + 1) * m + 2 * i] += sh;
            a[(2 * i + 1) * m + 2 * i + 1] += ch;
            a[(2 * i + 1) * m + 2 * j + 1] -= 1.0;
            rhs[2 * i + 1] = slope(j) - slope(i);
        }
        let x = dense_solve(m, a, rhs);
        let (a, b) = (0..n).map(|i| (x[2 * i], x[2 * i + 1])).unzip();
        Self { rho, a, b }
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (i, s, _) = self.rho.locate(x);
        let (r, dr) = self.rho.eval(x);
        (
            r + self.a[i] * s.cosh() + self.b[i] * s.sinh(),
            dr + self.a[i] * s.sinh() + self.b[i] * s.cosh(),
        )
    }
}

/// `sup ⟨R̃(t), φ⟩ / ‖φ‖_{H¹}` over the P1 space on the mesh refining each
/// cell `refine` times, where
/// `⟨R̃, φ⟩ = ∫ ∂_tρ̃ φ + (γ ρ̃^{γ−1} ∂ρ̃ − ρ̃ ∂c̃) φ'`.
pub fn residual_dual_norm(
    interfaces: &[f64],
    gamma: f64,
    rho_n: &[f64],
    rho_np1: &[f64],
    dt: f64,
    l0: f64,
    refine: usize,
) -> f64 {
    let l1 = 1.0 - l0;
    let rt: Vec<f64> = rho_n.iter().zip(rho_np1).map(|(a, b)| l1 * a + l0 * b).collect();
    let dr: Vec<f64> = rho_n.iter().zip(rho_np1).map(|(a, b)| (b - a) / dt).collect();
    let rho = PwLinear::from_interfaces(interfaces, rt.clone());
    let drho = PwLinear::from_interfaces(interfaces, dr);
    let c = ExactC::new(PwLinear::from_interfaces(interfaces, rt));

    // fine nodes: interfaces and `refine − 1` interior points per cell
    let mut z = Vec::new();
    for w in interfaces.windows(2) {
        for k in 0..refine {
            z.push(w[0] + (w[1] - w[0]) * k as f64 / refine as f64);
        }
    }
    let length = *interfaces.last().unwrap();
    let nf = z.len();
    let mut b = vec![0.0; nf];
    let mut g = vec![0.0; nf * nf];
    let rule = gauss(8);
    for e in 0..nf {
        let (za, e1) = (z[e], (e + 1) % nf);
        let zb = if e1 == 0 { length } else { z[e1] };
        let h = zb - za;
        for &(s, w) in &rule {
            let x = za + s * h;
            let (r, dr) = rho.eval(x);
            let (dt_r, _) = drho.eval(x);
            let (_, dc) = c.eval(x);
            let flux = gamma * r.max(0.0).powf(gamma - 1.0) * dr - r * dc;
            let (pa, pb) = (1.0 - s, s);
            let (da, db) = (-1.0 / h, 1.0 / h);
            b[e] += w * h * (dt_r * pa + flux * da);
            b[e1] += w * h * (dt_r * pb + flux * db);
        }
        let (kk, mm) = (1.0 / h, h / 6.0);
        g[e * nf + e] += kk + 2.0 * mm;
        g[e1 * nf + e1] += kk + 2.0 * mm;
        g[e * nf + e1] += -kk + mm;
        g[e1 * nf + e] += -kk + mm;
    }
    let y = dense_solve(nf, g, b.clone());
    b.iter().zip(&y).map(|(u, v)| u * v).sum::<f64>().max(0.0).sqrt()
}
