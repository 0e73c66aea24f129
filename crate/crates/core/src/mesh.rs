//! Periodic meshes: non-uniform interval meshes in 1D and uniform Cartesian
//! meshes in 2D, together with the dual vertex meshes carrying P1 fields.
//!
//! Indices are zero-based. In 2D cell `(j, k)` has linear index `k * n + j`,
//! `j` counting in x and `k` in y. Cell midpoints double as the vertices of
//! the dual mesh; dual square `(j, k)` has corners `(j, k)`, `(j+1, k)`,
//! `(j, k+1)`, `(j+1, k+1)` and is split along its anti-diagonal into a
//! lower-left and an upper-right triangle.

use crate::error::{Error, Result};

/// Periodic interval mesh of `[0, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    interfaces: Vec<f64>,
    h: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
}

impl Mesh1D {
    /// Builds the mesh from its interfaces `x_{1/2} = 0 < ... < x_{N+1/2} = L`.
    pub fn new(interfaces: &[f64]) -> Result<Self> {
        if interfaces.len() < 2 {
            return Err(Error::Geometry("need at least two interfaces".into()));
        }
        if interfaces[0] != 0.0 {
            return Err(Error::Geometry(format!(
                "first interface must be 0, got {}",
                interfaces[0]
            )));
        }
        for (i, w) in interfaces.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Geometry(format!(
                    "interfaces not strictly increasing at position {}",
                    i + 1
                )));
            }
        }
        let n = interfaces.len() - 1;
        let h: Vec<f64> = interfaces.windows(2).map(|w| w[1] - w[0]).collect();
        let x: Vec<f64> = interfaces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let d = (0..n).map(|i| 0.5 * (h[i] + h[(i + 1) % n])).collect();
        Ok(Self {
            interfaces: interfaces.to_vec(),
            h,
            x,
            d,
        })
    }

    pub fn uniform(n: usize, length: f64) -> Result<Self> {
        if n == 0 || !(length > 0.0) {
            return Err(Error::Geometry(format!("invalid uniform mesh n={n}, L={length}")));
        }
        let pts: Vec<f64> = (0..=n).map(|i| length * i as f64 / n as f64).collect();
        Self::new(&pts)
    }

    pub fn n_cells(&self) -> usize {
        self.h.len()
    }

    pub fn length(&self) -> f64 {
        self.interfaces[self.interfaces.len() - 1]
    }

    pub fn interfaces(&self) -> &[f64] {
        &self.interfaces
    }

    /// Cell sizes `h_i`.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Cell midpoints `x_i`.
    pub fn midpoints(&self) -> &[f64] {
        &self.x
    }

    /// Midpoint distances: `d()[i]` is `d_{i+1/2}`, the distance from `x_i`
    /// to the periodic successor `x_{i+1}`.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    #[inline]
    pub fn next(&self, i: usize) -> usize {
        if i + 1 == self.n_cells() {
            0
        } else {
            i + 1
        }
    }

    #[inline]
    pub fn prev(&self, i: usize) -> usize {
        if i == 0 {
            self.n_cells() - 1
        } else {
            i - 1
        }
    }

    /// Index of the cell containing `x` after periodic reduction.
    pub fn locate(&self, x: f64) -> usize {
        let x = x.rem_euclid(self.length());
        let pos = self.interfaces.partition_point(|&s| s <= x);
        pos.saturating_sub(1).min(self.n_cells() - 1)
    }
}

/// Which half of a dual square a triangle occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualTriangle {
    /// Vertices `(j,k)`, `(j+1,k)`, `(j,k+1)`.
    LowerLeft,
    /// Vertices `(j+1,k)`, `(j+1,k+1)`, `(j,k+1)`.
    UpperRight,
}

/// Uniform periodic Cartesian mesh of `[0, L]²` with `n × n` cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh2D {
    n: usize,
    length: f64,
    h: f64,
}

impl Mesh2D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Geometry(format!("need n >= 2, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Geometry(format!("invalid domain length {length}")));
        }
        Ok(Self {
            n,
            length,
            h: length / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_cells(&self) -> usize {
        self.n * self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        k * self.n + j
    }

    #[inline]
    pub fn coords(&self, i: usize) -> (usize, usize) {
        (i % self.n, i / self.n)
    }

    #[inline]
    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.n as isize) as usize
    }

    #[inline]
    pub fn next(&self, j: usize) -> usize {
        if j + 1 == self.n {
            0
        } else {
            j + 1
        }
    }

    #[inline]
    pub fn prev(&self, j: usize) -> usize {
        if j == 0 {
            self.n - 1
        } else {
            j - 1
        }
    }

    /// Midpoint `(x_j, y_k)` of cell `(j, k)`.
    pub fn midpoint(&self, j: usize, k: usize) -> (f64, f64) {
        ((j as f64 + 0.5) * self.h, (k as f64 + 0.5) * self.h)
    }

    /// Linear vertex indices of a dual triangle, counter-clockwise.
    pub fn dual_triangle(&self, j: usize, k: usize, t: DualTriangle) -> [usize; 3] {
        let (j1, k1) = (self.next(j), self.next(k));
        match t {
            DualTriangle::LowerLeft => [self.index(j, k), self.index(j1, k), self.index(j, k1)],
            DualTriangle::UpperRight => [self.index(j1, k), self.index(j1, k1), self.index(j, k1)],
        }
    }

    /// Locates a point in the dual triangulation: returns the dual square,
    /// the triangle and the local coordinates `(s, t) ∈ [0,1]²` relative to
    /// the square's lower-left vertex.
    pub fn locate_dual(&self, x: f64, y: f64) -> (usize, usize, DualTriangle, f64, f64) {
        let locate = |z: f64| {
            let u = (z / self.h - 0.5).rem_euclid(self.n as f64);
            let j = (u.floor() as usize).min(self.n - 1);
            (j, (u - j as f64).clamp(0.0, 1.0))
        };
        let (j, s) = locate(x);
        let (k, t) = locate(y);
        let tri = if s + t <= 1.0 {
            DualTriangle::LowerLeft
        } else {
            DualTriangle::UpperRight
        };
        (j, k, tri, s, t)
    }

    /// Locates a point in the primal mesh: cell `(j, k)` and offsets
    /// `((x - x_j)/h, (y - y_k)/h) ∈ [-1/2, 1/2]²`.
    pub fn locate_cell(&self, x: f64, y: f64) -> (usize, usize, f64, f64) {
        let locate = |z: f64| {
            let u = (z / self.h).rem_euclid(self.n as f64);
            let j = (u.floor() as usize).min(self.n - 1);
            (j, (u - j as f64 - 0.5).clamp(-0.5, 0.5))
        };
        let (j, a) = locate(x);
        let (k, b) = locate(y);
        (j, k, a, b)
    }
}

/// A mesh of either dimension.
#[derive(Clone, Debug, PartialEq)]
pub enum Mesh {
    OneD(Mesh1D),
    TwoD(Mesh2D),
}

impl Mesh {
    pub fn dim(&self) -> usize {
        match self {
            Mesh::OneD(_) => 1,
            Mesh::TwoD(_) => 2,
        }
    }

    pub fn n_cells(&self) -> usize {
        match self {
            Mesh::OneD(m) => m.n_cells(),
            Mesh::TwoD(m) => m.n_cells(),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Mesh::OneD(m) => m.length(),
            Mesh::TwoD(m) => m.length(),
        }
    }

    /// `|Ω| = L^d`.
    pub fn measure(&self) -> f64 {
        self.length().powi(self.dim() as i32)
    }

    /// Measure of cell `i`.
    pub fn cell_measure(&self, i: usize) -> f64 {
        match self {
            Mesh::OneD(m) => m.h()[i],
            Mesh::TwoD(m) => m.h() * m.h(),
        }
    }

    pub fn as_1d(&self) -> Option<&Mesh1D> {
        match self {
            Mesh::OneD(m) => Some(m),
            Mesh::TwoD(_) => None,
        }
    }

    pub fn as_2d(&self) -> Option<&Mesh2D> {
        match self {
            Mesh::TwoD(m) => Some(m),
            Mesh::OneD(_) => None,
        }
    }
}

impl From<Mesh1D> for Mesh {
    fn from(m: Mesh1D) -> Self {
        Mesh::OneD(m)
    }
}

impl From<Mesh2D> for Mesh {
    fn from(m: Mesh2D) -> Self {
        Mesh::TwoD(m)
    }
}

pub fn build_mesh_1d(interfaces: &[f64]) -> Result<Mesh1D> {
    Mesh1D::new(interfaces)
}

pub fn build_mesh_2d(n: usize, length: f64) -> Result<Mesh2D> {
    Mesh2D::new(n, length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_wraps() {
        let m = Mesh1D::new(&[0.0, 0.3, 0.7, 1.0]).unwrap();
        assert_eq!(m.locate(0.1), 0);
        assert_eq!(m.locate(0.3), 1);
        assert_eq!(m.locate(1.2), 0);
        assert_eq!(m.locate(-0.1), 2);
    }

    #[test]
    fn dual_location() {
        let m = Mesh2D::new(4, 1.0).unwrap();
        let (j, k, t, s, r) = m.locate_dual(0.125 + 0.01, 0.125 + 0.02);
        assert_eq!((j, k, t), (0, 0, DualTriangle::LowerLeft));
        assert!((s - 0.04).abs() < 1e-12 && (r - 0.08).abs() < 1e-12);
        let (j, k, t, _, _) = m.locate_dual(0.01, 0.02);
        assert_eq!((j, k, t), (3, 3, DualTriangle::UpperRight));
    }
}
