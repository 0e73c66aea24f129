//! Closed-form integrals of products of linear functions over segments and
//! triangles, given by vertex values.

/// `∫ u²` over a segment of length `len` with `u` linear from `a` to `b`.
#[inline]
pub fn seg_sq(len: f64, a: f64, b: f64) -> f64 {
    len * (a * a + a * b + b * b) / 3.0
}

/// `∫ u v` over a segment, both linear.
#[inline]
pub fn seg_dot(len: f64, u: [f64; 2], v: [f64; 2]) -> f64 {
    len * (2.0 * u[0] * v[0] + u[0] * v[1] + u[1] * v[0] + 2.0 * u[1] * v[1]) / 6.0
}

/// `∫ u²` over a triangle of area `area`, `u` linear with vertex values.
#[inline]
pub fn tri_sq(area: f64, u: [f64; 3]) -> f64 {
    let [a, b, c] = u;
    area * (a * a + b * b + c * c + a * b + a * c + b * c) / 6.0
}

/// `∫ u v` over a triangle, both linear.
#[inline]
pub fn tri_dot(area: f64, u: [f64; 3], v: [f64; 3]) -> f64 {
    let s = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    area * (s + (u[0] + u[1] + u[2]) * (v[0] + v[1] + v[2])) / 12.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::quadrature::QuadratureRule;

    #[test]
    fn against_quadrature() {
        let r = QuadratureRule::triangle(4);
        let (u, v) = ([0.3, -1.2, 2.0], [1.5, 0.7, -0.4]);
        let lin = |w: [f64; 3], p: [f64; 2]| w[0] + p[0] * (w[1] - w[0]) + p[1] * (w[2] - w[0]);
        let q: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * lin(u, *p) * lin(v, *p)).sum();
        assert!((tri_dot(0.5, u, v) - q).abs() < 1e-14);
        assert!((tri_dot(0.5, u, u) - tri_sq(0.5, u)).abs() < 1e-14);
        assert!((seg_dot(2.0, [1.0, 3.0], [1.0, 3.0]) - seg_sq(2.0, 1.0, 3.0)).abs() < 1e-14);
    }
}
