//! The discrete chemoattractant problem: find `c_h` in the P1 space on the
//! dual mesh with `∫∇c_h·∇v + c_h v = ∫ρ̃ v` for all P1 test functions `v`,
//! and the a posteriori estimator for `‖c_h − c̃‖_{H¹}`.
//!
//! 1D systems are solved directly (periodic tridiagonal). On the uniform 2D
//! torus the stiffness and mass operators are circulant, so the default 2D
//! path diagonalizes them by FFT; an assembled sparse matrix with CG is
//! kept as an independent route.

use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fields::exact::{seg_sq, tri_sq};
use crate::fields::{grad_lower_left, grad_upper_right, neumaier_sum, NodalField, Representation};
use crate::linalg::{pcg, solve_cyclic_tridiagonal, Csr};
use crate::mesh::{Mesh, Mesh1D, Mesh2D};

/// How the linear system is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EllipticMethod {
    /// Periodic tridiagonal solve in 1D, FFT diagonalization in 2D.
    #[default]
    Direct,
    /// Assembled CSR matrix and Jacobi-preconditioned CG.
    Sparse,
}

/// Operator `K + M` of the chemoattractant problem on a fixed mesh.
pub struct EllipticSystem {
    mesh: Arc<Mesh>,
    lumping: bool,
    method: EllipticMethod,
    tolerance: f64,
    fft: Option<Mutex<Fft2>>,
}

impl std::fmt::Debug for EllipticSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticSystem")
            .field("lumping", &self.lumping)
            .field("method", &self.method)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl EllipticSystem {
    pub fn new(mesh: Arc<Mesh>, lumping: bool) -> Self {
        Self::with_method(mesh, lumping, EllipticMethod::Direct)
    }

    pub fn with_method(mesh: Arc<Mesh>, lumping: bool, method: EllipticMethod) -> Self {
        let fft = match (&*mesh, method) {
            (Mesh::TwoD(m), EllipticMethod::Direct) => Some(Mutex::new(Fft2::new(m, lumping))),
            _ => None,
        };
        Self {
            mesh,
            lumping,
            method,
            tolerance: 1e-12,
            fft,
        }
    }

    /// Relative tolerance of the iterative path.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn lumping(&self) -> bool {
        self.lumping
    }

    /// Assembled `K + M` (or `K + M_L`).
    pub fn assemble(&self) -> Csr {
        let (k, m) = self.assemble_parts();
        let mut t = Vec::new();
        for i in 0..k.n {
            t.extend(k.row(i).map(|(c, v)| (i, c, v)));
            t.extend(m.row(i).map(|(c, v)| (i, c, v)));
        }
        Csr::from_triplets(k.n, t)
    }

    /// Stiffness and (possibly lumped) mass matrices.
    pub fn assemble_parts(&self) -> (Csr, Csr) {
        let n = self.mesh.n_cells();
        let mut kt = Vec::new();
        let mut mt = Vec::new();
        match &*self.mesh {
            Mesh::OneD(m) => {
                for i in 0..n {
                    let i1 = m.next(i);
                    let d = m.d()[i];
                    for (a, b, v) in [(i, i, 1.0), (i1, i1, 1.0), (i, i1, -1.0), (i1, i, -1.0)] {
                        kt.push((a, b, v / d));
                    }
                    if self.lumping {
                        mt.push((i, i, 0.5 * d));
                        mt.push((i1, i1, 0.5 * d));
                    } else {
                        for (a, b, v) in [(i, i, 2.0), (i1, i1, 2.0), (i, i1, 1.0), (i1, i, 1.0)] {
                            mt.push((a, b, v * d / 6.0));
                        }
                    }
                }
            }
            Mesh::TwoD(m) => {
                let h2 = m.h() * m.h();
                for k in 0..m.n() {
                    for j in 0..m.n() {
                        let i = m.index(j, k);
                        let nb = [
                            m.index(m.next(j), k),
                            m.index(m.prev(j), k),
                            m.index(j, m.next(k)),
                            m.index(j, m.prev(k)),
                        ];
                        kt.push((i, i, 4.0));
                        for &q in &nb {
                            kt.push((i, q, -1.0));
                        }
                        if self.lumping {
                            mt.push((i, i, h2));
                        } else {
                            mt.push((i, i, 0.5 * h2));
                            let diag = [m.index(m.next(j), m.prev(k)), m.index(m.prev(j), m.next(k))];
                            for &q in nb.iter().chain(&diag) {
                                mt.push((i, q, h2 / 12.0));
                            }
                        }
                    }
                }
            }
        }
        (Csr::from_triplets(n, kt), Csr::from_triplets(n, mt))
    }

    /// Load vector `∫ρ̃ v_i` (lumped when the system is).
    pub fn rhs(&self, rho_tilde: &NodalField) -> Vec<f64> {
        let (_, m) = self.assemble_parts();
        let mut b = vec![0.0; m.n];
        m.matvec(rho_tilde.values(), &mut b);
        b
    }

    pub fn solve(&self, rho_tilde: &NodalField) -> Result<NodalField> {
        if !rho_tilde.same_mesh(&self.mesh) {
            return Err(Error::MeshMismatch);
        }
        let u = rho_tilde.values();
        let values = match (&*self.mesh, self.method) {
            (Mesh::OneD(m), EllipticMethod::Direct) => solve_1d(m, self.lumping, u)?,
            (Mesh::TwoD(_), EllipticMethod::Direct) => {
                let mut fft = self.fft.as_ref().expect("fft plan").lock().unwrap();
                fft.solve(u)
            }
            (_, EllipticMethod::Sparse) => {
                let a = self.assemble();
                let b = self.rhs(rho_tilde);
                let mut x = u.to_vec();
                let diag = a.diagonal();
                pcg(
                    |v, out| a.matvec(v, out),
                    &diag,
                    &b,
                    &mut x,
                    self.tolerance * 1e-2,
                    20 * a.n + 100,
                )?;
                x
            }
        };
        NodalField::p1(self.mesh.clone(), values)
    }
}

fn solve_1d(m: &Mesh1D, lumping: bool, u: &[f64]) -> Result<Vec<f64>> {
    let n = m.n_cells();
    let d = m.d();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let p = m.prev(i);
        let (dl, dr) = (d[p], d[i]);
        let (ml, md, mu) = if lumping {
            (0.0, 0.5 * (dl + dr), 0.0)
        } else {
            (dl / 6.0, (dl + dr) / 3.0, dr / 6.0)
        };
        lower[i] = -1.0 / dl + ml;
        upper[i] = -1.0 / dr + mu;
        diag[i] = 1.0 / dl + 1.0 / dr + md;
        rhs[i] = ml * u[p] + md * u[i] + mu * u[m.next(i)];
    }
    solve_cyclic_tridiagonal(&lower, &diag, &upper, &rhs)
}

/// Cached 2D FFT plans and a real spectral multiplier.
pub(crate) struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    multiplier: Vec<f64>,
    buf: Vec<Complex<f64>>,
    col: Vec<Complex<f64>>,
}

impl Fft2 {
    /// Multiplier `M̂ / (K̂ + M̂)` of the chemoattractant solve.
    fn new(m: &Mesh2D, lumping: bool) -> Self {
        let h2 = m.h() * m.h();
        Self::with_symbol(m.n(), |t1, t2| {
            let k = 4.0 - 2.0 * t1.cos() - 2.0 * t2.cos();
            let mass = if lumping {
                h2
            } else {
                h2 / 2.0 + h2 / 6.0 * (t1.cos() + t2.cos() + (t1 - t2).cos())
            };
            mass / (k + mass)
        })
    }

    /// Multiplier `symbol(θ₁, θ₂)` with `θ = 2π·(p, q)/n`.
    pub(crate) fn with_symbol(n: usize, symbol: impl Fn(f64, f64) -> f64) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut multiplier = vec![0.0; n * n];
        for q in 0..n {
            for p in 0..n {
                let t1 = 2.0 * std::f64::consts::PI * p as f64 / n as f64;
                let t2 = 2.0 * std::f64::consts::PI * q as f64 / n as f64;
                multiplier[q * n + p] = symbol(t1, t2);
            }
        }
        Self {
            n,
            fwd,
            inv,
            multiplier,
            buf: vec![Complex::new(0.0, 0.0); n * n],
            col: vec![Complex::new(0.0, 0.0); n],
        }
    }

    fn transform(&mut self, inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.inv } else { &self.fwd };
        plan.process(&mut self.buf);
        for j in 0..n {
            for k in 0..n {
                self.col[k] = self.buf[k * n + j];
            }
            plan.process(&mut self.col);
            for k in 0..n {
                self.buf[k * n + j] = self.col[k];
            }
        }
    }

    pub(crate) fn solve(&mut self, u: &[f64]) -> Vec<f64> {
        for (b, &v) in self.buf.iter_mut().zip(u) {
            *b = Complex::new(v, 0.0);
        }
        self.transform(false);
        for (b, &s) in self.buf.iter_mut().zip(&self.multiplier) {
            *b *= s;
        }
        self.transform(true);
        let scale = 1.0 / (self.n * self.n) as f64;
        self.buf.iter().map(|z| z.re * scale).collect()
    }
}

pub fn solve_chemoattractant(rho_tilde: &NodalField, lumping: bool) -> Result<NodalField> {
    EllipticSystem::new(rho_tilde.mesh().clone(), lumping).solve(rho_tilde)
}

/// Estimator for `‖c_h − c̃‖_{H¹}`, where `c̃` solves `c̃ − Δc̃ = ρ̃` exactly.
///
/// 1D: `η² = Σ d_{i+1/2}² ‖c_h − ρ̃‖²_{L²(x_i, x_{i+1})} + Σ h_i [∂c_h]_i²`.
/// 2D: `η² = Σ_T h² ‖c_h − ρ̃‖²_{L²(T)} + Σ_E h |E| [∇c_h·η_E]²`.
/// Both sums are evaluated exactly.
pub fn elliptic_estimator(c_h: &NodalField, rho_tilde: &NodalField) -> Result<f64> {
    if !c_h.same_mesh(rho_tilde.mesh()) {
        return Err(Error::MeshMismatch);
    }
    if c_h.representation() != Representation::P1 || rho_tilde.representation() != Representation::P1 {
        return Err(Error::Representation { expected: "P1" });
    }
    let c = c_h.values();
    let r = rho_tilde.values();
    match &**c_h.mesh() {
        Mesh::OneD(m) => Ok(elliptic_estimator_1d(m, c, r)),
        Mesh::TwoD(m) => Ok(elliptic_estimator_2d(m, c, r)),
    }
}

pub(crate) fn elliptic_estimator_1d(m: &Mesh1D, c: &[f64], r: &[f64]) -> f64 {
    let d = m.d();
    let h = m.h();
    neumaier_sum((0..m.n_cells()).map(|i| {
        let i1 = m.next(i);
        let p = m.prev(i);
        let vol = d[i] * d[i] * seg_sq(d[i], c[i] - r[i], c[i1] - r[i1]);
        let jump = (c[i1] - c[i]) / d[i] - (c[i] - c[p]) / d[p];
        vol + h[i] * jump * jump
    }))
    .sqrt()
}

pub(crate) fn elliptic_estimator_2d(m: &Mesh2D, c: &[f64], r: &[f64]) -> f64 {
    let h = m.h();
    let area = 0.5 * h * h;
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    neumaier_sum((0..m.n_cells()).map(|i| {
        let (j, k) = m.coords(i);
        let (j1, k1) = (m.next(j), m.next(k));
        let e = |a: usize, b: usize| {
            let q = m.index(a, b);
            c[q] - r[q]
        };
        let (e00, e10, e01, e11) = (e(j, k), e(j1, k), e(j, k1), e(j1, k1));
        let vol = h * h * (tri_sq(area, [e00, e10, e01]) + tri_sq(area, [e10, e11, e01]));
        let ll = grad_lower_left(m, c, j, k);
        let ur = grad_upper_right(m, c, j, k);
        let below = grad_upper_right(m, c, j, m.prev(k));
        let left = grad_upper_right(m, c, m.prev(j), k);
        let jh = ll[1] - below[1];
        let jv = ll[0] - left[0];
        let jd = (ll[0] - ur[0]) * s2 + (ll[1] - ur[1]) * s2;
        vol + h * h * (jh * jh + jv * jv) + h * (std::f64::consts::SQRT_2 * h) * jd * jd
    }))
    .sqrt()
}

/// Gradients of `c_h` at interface midpoints. In 1D `dx[i]` is `∂_x c_h` at
/// `x_{i+1/2}`. In 2D `dx[idx(j,k)]` is `∂_x c_h(x_{j+1/2}, y_k)` and
/// `dy[idx(j,k)]` is `∂_y c_h(x_j, y_{k+1/2})`.
#[derive(Clone, Debug, Default)]
pub struct InterfaceGradients {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

pub fn grad_at_interface_midpoints(c_h: &NodalField) -> InterfaceGradients {
    let c = c_h.values();
    match &**c_h.mesh() {
        Mesh::OneD(m) => InterfaceGradients {
            dx: (0..m.n_cells()).map(|i| (c[m.next(i)] - c[i]) / m.d()[i]).collect(),
            dy: Vec::new(),
        },
        Mesh::TwoD(m) => {
            let n = m.n();
            let h = m.h();
            let mut dx = vec![0.0; n * n];
            let mut dy = vec![0.0; n * n];
            for k in 0..n {
                let k1 = m.next(k);
                for j in 0..n {
                    let i = m.index(j, k);
                    dx[i] = (c[m.index(m.next(j), k)] - c[i]) / h;
                    dy[i] = (c[m.index(j, k1)] - c[i]) / h;
                }
            }
            InterfaceGradients { dx, dy }
        }
    }
}
