//! Gauss–Legendre rules on the reference interval, square and triangle.

/// Gauss–Legendre nodes and weights on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1, "quadrature order must be positive");
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    let m = (q + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(q, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, z);
        if d != 0.0 {
            dp = d;
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        x[i] = 0.5 * (1.0 - z);
        x[q - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[q - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

fn legendre(q: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A rule on a reference element: the unit interval, the unit square, or the
/// triangle with vertices `(0,0), (1,0), (0,1)`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn interval(q: usize) -> Self {
        let (x, w) = gauss_legendre(q);
        Self {
            points: x.iter().map(|&s| [s, 0.0]).collect(),
            weights: w,
        }
    }

    pub fn square(q: usize) -> Self {
        let (x, w) = gauss_legendre(q);
        let mut points = Vec::with_capacity(q * q);
        let mut weights = Vec::with_capacity(q * q);
        for (a, wa) in x.iter().zip(&w) {
            for (b, wb) in x.iter().zip(&w) {
                points.push([*a, *b]);
                weights.push(wa * wb);
            }
        }
        Self { points, weights }
    }

    /// Collapsed tensor rule; `q + 1` points in the collapsed direction keep
    /// the exactness degree at `2q - 1`.
    pub fn triangle(q: usize) -> Self {
        let (xu, wu) = gauss_legendre(q + 1);
        let (xv, wv) = gauss_legendre(q);
        let mut points = Vec::with_capacity(xu.len() * xv.len());
        let mut weights = Vec::with_capacity(xu.len() * xv.len());
        for (u, wa) in xu.iter().zip(&wu) {
            for (v, wb) in xv.iter().zip(&wv) {
                points.push([*u, (1.0 - u) * v]);
                weights.push(wa * wb * (1.0 - u));
            }
        }
        Self { points, weights }
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
