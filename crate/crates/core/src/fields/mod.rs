//! Field containers and the norms used by the estimator.
//!
//! [`CellField`] holds cell averages (a piecewise-constant density).
//! [`NodalField`] holds values at the cell midpoints, which are the vertices
//! of the dual mesh. In 1D it is interpolated linearly between consecutive
//! midpoints. In 2D it is either P1 on the dual triangulation or the
//! four-subcell form, selected by [`Representation`].

pub mod exact;
pub mod quadrature;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{DualTriangle, Mesh, Mesh1D, Mesh2D};
use quadrature::QuadratureRule;

pub use quadrature::gauss_legendre;

/// Default Gauss order per direction.
pub const DEFAULT_QUAD_ORDER: usize = 4;

/// Evaluation rule of a [`NodalField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// Piecewise linear between midpoints (1D) or P1 on the dual
    /// triangulation (2D).
    P1,
    /// 2D only: linear on each quarter `K^SW, K^SE, K^NW, K^NE` of every cell,
    /// built from the cell value and its two neighbours facing that quarter.
    /// Continuous only across the quarter boundaries inside a cell.
    Subcell,
}

fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Compensated (Neumaier) sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Piecewise-constant field of cell averages.
#[derive(Clone, Debug)]
pub struct CellField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "expected {} cell values, got {}",
                mesh.n_cells(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value in cell {i}")));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Arc<Mesh>, value: f64) -> Self {
        let n = mesh.n_cells();
        Self {
            mesh,
            values: vec![value; n],
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_mesh(&self, other_mesh: &Arc<Mesh>) -> bool {
        same_mesh(&self.mesh, other_mesh)
    }

    /// `Σ |K_i| ρ_i`, compensated.
    pub fn mass(&self) -> f64 {
        neumaier_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(i, v)| self.mesh.cell_measure(i) * v),
        )
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact `L^p` norm; `p = f64::INFINITY` gives the maximum modulus.
    pub fn norm_lp(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        if p.is_infinite() {
            return Ok(self.values.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        let s = neumaier_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(i, v)| self.mesh.cell_measure(i) * v.abs().powf(p)),
        );
        Ok(s.powf(1.0 / p))
    }

    /// The nodal interpolant `ρ̃` with `ρ̃(x_i) = ρ_i`, P1 on the dual mesh.
    pub fn to_nodal(&self) -> NodalField {
        NodalField {
            mesh: self.mesh.clone(),
            values: self.values.clone(),
            repr: Representation::P1,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {p}")))
    } else {
        Ok(())
    }
}

/// Field given by its values at the cell midpoints.
#[derive(Clone, Debug)]
pub struct NodalField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    repr: Representation,
}

/// Normal-gradient jump across one dual edge in 2D.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeJump {
    pub kind: EdgeKind,
    /// Lower-left dual vertex of the edge's dual square.
    pub j: usize,
    pub k: usize,
    pub length: f64,
    /// `(∇c|_T − ∇c|_V)·η` with `η` the unit normal pointing from `T` into `V`.
    pub value: f64,
}

/// Edge families of the dual triangulation. For dual square `(j, k)`:
/// `Horizontal` joins `(j,k)–(j+1,k)` with `T` = the upper-right triangle of
/// square `(j, k-1)` below it and `V` = lower-left of `(j, k)`; `Vertical`
/// joins `(j,k)–(j,k+1)` with `T` = upper-right of `(j-1, k)`, `V` =
/// lower-left of `(j, k)`; `Diagonal` joins `(j+1,k)–(j,k+1)` with
/// `T` = lower-left and `V` = upper-right of `(j, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Horizontal,
    Vertical,
    Diagonal,
}

/// `(∇_T − ∇_V)·η`.
#[inline]
pub fn normal_jump(grad_t: [f64; 2], grad_v: [f64; 2], normal: [f64; 2]) -> f64 {
    (grad_t[0] - grad_v[0]) * normal[0] + (grad_t[1] - grad_v[1]) * normal[1]
}

impl NodalField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>, repr: Representation) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                mesh.n_cells(),
                values.len()
            )));
        }
        if repr == Representation::Subcell && mesh.dim() != 2 {
            return Err(Error::InvalidArgument("subcell representation is 2D only".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {i}")));
        }
        Ok(Self { mesh, values, repr })
    }

    pub fn p1(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        Self::new(mesh, values, Representation::P1)
    }

    pub fn constant(mesh: Arc<Mesh>, value: f64) -> Self {
        let n = mesh.n_cells();
        Self {
            mesh,
            values: vec![value; n],
            repr: Representation::P1,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn same_mesh(&self, other_mesh: &Arc<Mesh>) -> bool {
        same_mesh(&self.mesh, other_mesh)
    }

    /// Same values under another evaluation rule.
    pub fn with_representation(&self, repr: Representation) -> Result<Self> {
        Self::new(self.mesh.clone(), self.values.clone(), repr)
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &NodalField, b: f64) -> Result<Self> {
        if !same_mesh(&self.mesh, &other.mesh) {
            return Err(Error::MeshMismatch);
        }
        if self.repr != other.repr {
            return Err(Error::InvalidArgument("representations differ".into()));
        }
        Ok(Self {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            repr: self.repr,
        })
    }

    /// Point evaluation (periodic).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match (&*self.mesh, self.repr) {
            (Mesh::OneD(m), _) => eval_1d(m, &self.values, x),
            (Mesh::TwoD(m), Representation::P1) => eval_p1_2d(m, &self.values, x, y),
            (Mesh::TwoD(m), Representation::Subcell) => eval_subcell(m, &self.values, x, y),
        }
    }

    /// `L^p` norm by Gauss quadrature of the default order.
    pub fn norm_lp(&self, p: f64) -> Result<f64> {
        self.norm_lp_with(p, DEFAULT_QUAD_ORDER)
    }

    /// `L^p` norm by per-element Gauss quadrature of order `q`; `L^∞` is the
    /// maximal modulus over element vertices.
    pub fn norm_lp_with(&self, p: f64, q: usize) -> Result<f64> {
        check_p(p)?;
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        let s = self.integrate_with(q, |v| v.abs().powf(p));
        Ok(s.powf(1.0 / p))
    }

    /// `∫ g(u)` by per-element Gauss quadrature of order `q`.
    pub fn integrate_with(&self, q: usize, g: impl Fn(f64) -> f64) -> f64 {
        let u = &self.values;
        match (&*self.mesh, self.repr) {
            (Mesh::OneD(m), _) => {
                let (xs, ws) = gauss_legendre(q);
                neumaier_sum((0..m.n_cells()).map(|i| {
                    let (a, b) = (u[i], u[m.next(i)]);
                    let s: f64 = xs.iter().zip(&ws).map(|(t, w)| w * g(a + t * (b - a))).sum();
                    s * m.d()[i]
                }))
            }
            (Mesh::TwoD(m), Representation::P1) => {
                let rule = QuadratureRule::triangle(q);
                let jac = m.h() * m.h();
                neumaier_sum((0..m.n_cells()).map(|i| {
                    let (j, k) = m.coords(i);
                    let mut s = 0.0;
                    for t in [DualTriangle::LowerLeft, DualTriangle::UpperRight] {
                        let [a, b, c] = m.dual_triangle(j, k, t).map(|v| u[v]);
                        for (pt, w) in rule.points.iter().zip(&rule.weights) {
                            s += w * g(a + pt[0] * (b - a) + pt[1] * (c - a));
                        }
                    }
                    s * jac
                }))
            }
            (Mesh::TwoD(m), Representation::Subcell) => {
                let rule = QuadratureRule::square(q);
                let jac = 0.25 * m.h() * m.h();
                neumaier_sum((0..m.n_cells()).map(|i| {
                    let (j, k) = m.coords(i);
                    let mut s = 0.0;
                    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
                        for (pt, w) in rule.points.iter().zip(&rule.weights) {
                            let a = 0.5 * sx * pt[0];
                            let b = 0.5 * sy * pt[1];
                            s += w * g(subcell_local(m, u, j, k, a, b));
                        }
                    }
                    s * jac
                }))
            }
        }
    }

    fn sup_norm(&self) -> f64 {
        match (&*self.mesh, self.repr) {
            (Mesh::TwoD(m), Representation::Subcell) => {
                // linear on each quarter: extrema sit at the quarter corners
                let u = &self.values;
                let mut best = 0.0f64;
                for k in 0..m.n() {
                    for j in 0..m.n() {
                        let c = u[m.index(j, k)];
                        for xn in [u[m.index(m.prev(j), k)], u[m.index(m.next(j), k)]] {
                            for yn in [u[m.index(j, m.prev(k))], u[m.index(j, m.next(k))]] {
                                for v in [c, 0.5 * (c + xn), 0.5 * (c + yn), 0.5 * (xn + yn)] {
                                    best = best.max(v.abs());
                                }
                            }
                        }
                    }
                }
                best
            }
            _ => self.values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// `|f|_{H¹}`, exact. For the subcell form the seminorm is broken (taken
    /// quarter by quarter).
    pub fn seminorm_h1(&self) -> f64 {
        let u = &self.values;
        match (&*self.mesh, self.repr) {
            (Mesh::OneD(m), _) => neumaier_sum((0..m.n_cells()).map(|i| {
                let s = u[m.next(i)] - u[i];
                s * s / m.d()[i]
            }))
            .sqrt(),
            (Mesh::TwoD(m), Representation::P1) => {
                let area = 0.5 * m.h() * m.h();
                neumaier_sum((0..m.n_cells()).map(|i| {
                    let (j, k) = m.coords(i);
                    let g1 = grad_lower_left(m, u, j, k);
                    let g2 = grad_upper_right(m, u, j, k);
                    area * (g1[0] * g1[0] + g1[1] * g1[1] + g2[0] * g2[0] + g2[1] * g2[1])
                }))
                .sqrt()
            }
            (Mesh::TwoD(m), Representation::Subcell) => {
                let h = m.h();
                let area = 0.25 * h * h;
                neumaier_sum((0..m.n_cells()).map(|i| {
                    let (j, k) = m.coords(i);
                    let c = u[i];
                    let e = u[m.index(m.next(j), k)];
                    let w = u[m.index(m.prev(j), k)];
                    let nn = u[m.index(j, m.next(k))];
                    let s = u[m.index(j, m.prev(k))];
                    let (gw, ge, gs, gn) = ((c - w) / h, (e - c) / h, (c - s) / h, (nn - c) / h);
                    area * (2.0 * gw * gw + 2.0 * ge * ge + 2.0 * gs * gs + 2.0 * gn * gn)
                }))
                .sqrt()
            }
        }
    }

    /// 1D gradient jumps `∂c(x_i⁺) − ∂c(x_i⁻)` at every vertex.
    pub fn jumps_1d(&self) -> Result<Vec<f64>> {
        let m = self.mesh.as_1d().ok_or(Error::InvalidArgument("1D field expected".into()))?;
        let u = &self.values;
        let slope = |i: usize| (u[m.next(i)] - u[i]) / m.d()[i];
        Ok((0..m.n_cells()).map(|i| slope(i) - slope(m.prev(i))).collect())
    }

    /// 2D normal-gradient jumps over all dual edges, three per dual square.
    pub fn jumps_2d(&self) -> Result<Vec<EdgeJump>> {
        if self.repr != Representation::P1 {
            return Err(Error::Representation { expected: "P1" });
        }
        let m = self.mesh.as_2d().ok_or(Error::InvalidArgument("2D field expected".into()))?;
        let u = &self.values;
        let h = m.h();
        let mut out = Vec::with_capacity(3 * m.n_cells());
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..m.n() {
            for j in 0..m.n() {
                let ll = grad_lower_left(m, u, j, k);
                let ur = grad_upper_right(m, u, j, k);
                let below = grad_upper_right(m, u, j, m.prev(k));
                let left = grad_upper_right(m, u, m.prev(j), k);
                out.push(EdgeJump {
                    kind: EdgeKind::Horizontal,
                    j,
                    k,
                    length: h,
                    value: normal_jump(below, ll, [0.0, 1.0]),
                });
                out.push(EdgeJump {
                    kind: EdgeKind::Vertical,
                    j,
                    k,
                    length: h,
                    value: normal_jump(left, ll, [1.0, 0.0]),
                });
                out.push(EdgeJump {
                    kind: EdgeKind::Diagonal,
                    j,
                    k,
                    length: std::f64::consts::SQRT_2 * h,
                    value: normal_jump(ll, ur, [r2, r2]),
                });
            }
        }
        Ok(out)
    }
}

/// `broken_L2_jump`: 1D vertex jumps, or 2D edge jump values in the order of
/// [`NodalField::jumps_2d`].
pub fn broken_l2_jump(c_h: &NodalField) -> Result<Vec<f64>> {
    match c_h.mesh().dim() {
        1 => c_h.jumps_1d(),
        _ => Ok(c_h.jumps_2d()?.into_iter().map(|e| e.value).collect()),
    }
}

pub fn norm_lp_cell(f: &CellField, p: f64) -> Result<f64> {
    f.norm_lp(p)
}

pub fn norm_lp_nodal(f: &NodalField, p: f64) -> Result<f64> {
    f.norm_lp(p)
}

pub fn seminorm_h1(f: &NodalField) -> f64 {
    f.seminorm_h1()
}

/// Gradient on the lower-left triangle of dual square `(j, k)`.
#[inline]
pub fn grad_lower_left(m: &Mesh2D, u: &[f64], j: usize, k: usize) -> [f64; 2] {
    let c = u[m.index(j, k)];
    [
        (u[m.index(m.next(j), k)] - c) / m.h(),
        (u[m.index(j, m.next(k))] - c) / m.h(),
    ]
}

/// Gradient on the upper-right triangle of dual square `(j, k)`.
#[inline]
pub fn grad_upper_right(m: &Mesh2D, u: &[f64], j: usize, k: usize) -> [f64; 2] {
    let (j1, k1) = (m.next(j), m.next(k));
    let c11 = u[m.index(j1, k1)];
    [
        (c11 - u[m.index(j, k1)]) / m.h(),
        (c11 - u[m.index(j1, k)]) / m.h(),
    ]
}

fn eval_1d(m: &Mesh1D, u: &[f64], x: f64) -> f64 {
    let len = m.length();
    let x = x.rem_euclid(len);
    let i = m.locate(x);
    let xm = m.midpoints();
    let (left, mut dx) = if x >= xm[i] {
        (i, x - xm[i])
    } else {
        let p = m.prev(i);
        let mut dx = x - xm[p];
        if dx < 0.0 {
            dx += len;
        }
        (p, dx)
    };
    if dx > m.d()[left] {
        dx = m.d()[left];
    }
    let t = dx / m.d()[left];
    u[left] + t * (u[m.next(left)] - u[left])
}

fn eval_p1_2d(m: &Mesh2D, u: &[f64], x: f64, y: f64) -> f64 {
    let (j, k, tri, s, t) = m.locate_dual(x, y);
    let (j1, k1) = (m.next(j), m.next(k));
    match tri {
        DualTriangle::LowerLeft => {
            let c00 = u[m.index(j, k)];
            c00 + s * (u[m.index(j1, k)] - c00) + t * (u[m.index(j, k1)] - c00)
        }
        DualTriangle::UpperRight => {
            let c11 = u[m.index(j1, k1)];
            c11 + (1.0 - s) * (u[m.index(j, k1)] - c11) + (1.0 - t) * (u[m.index(j1, k)] - c11)
        }
    }
}

fn eval_subcell(m: &Mesh2D, u: &[f64], x: f64, y: f64) -> f64 {
    let (j, k, a, b) = m.locate_cell(x, y);
    subcell_local(m, u, j, k, a, b)
}

/// Subcell form in cell `(j, k)` at offsets `a = (x-x_j)/h`, `b = (y-y_k)/h`.
fn subcell_local(m: &Mesh2D, u: &[f64], j: usize, k: usize, a: f64, b: f64) -> f64 {
    let c = u[m.index(j, k)];
    let xn = if a < 0.0 { u[m.index(m.prev(j), k)] } else { u[m.index(m.next(j), k)] };
    let yn = if b < 0.0 { u[m.index(j, m.prev(k))] } else { u[m.index(j, m.next(k))] };
    let (a, b) = (a.abs(), b.abs());
    (1.0 - a - b) * c + a * xn + b * yn
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_beats_naive() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
    }

    #[test]
    fn subcell_matches_quarter_formulas() {
        let m = Mesh2D::new(4, 1.0).unwrap();
        let u: Vec<f64> = (0..16).map(|i| (i * 7 % 5) as f64).collect();
        let (j, k) = (1, 2);
        let (x, y) = m.midpoint(j, k);
        let h = m.h();
        let c = u[m.index(j, k)];
        let w = u[m.index(0, k)];
        let s = u[m.index(j, 1)];
        // K^SW: (1 + X + Y) ρ_{j,k} − X ρ_{j−1,k} − Y ρ_{j,k−1} with X, Y ≤ 0
        let (dx, dy) = (-0.2 * h, -0.3 * h);
        let want = (1.0 + dx / h + dy / h) * c - dx / h * w - dy / h * s;
        let f = NodalField::new(Arc::new(m.clone().into()), u, Representation::Subcell).unwrap();
        assert!((f.eval(x + dx, y + dy) - want).abs() < 1e-13);
    }
}
