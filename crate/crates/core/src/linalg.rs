//! Small linear-algebra kernels: periodic tridiagonal solves, CSR matrices
//! and Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};

/// Solves the periodic tridiagonal system
/// `lower[i]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]` (indices mod N).
///
/// Intended for diagonally dominant rows. For `N <= 4` a dense elimination
/// is used, otherwise Thomas with a Sherman–Morrison correction.
pub fn solve_cyclic_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n || n == 0 {
        return Err(Error::InvalidArgument("tridiagonal band lengths differ".into()));
    }
    if n <= 4 {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] += diag[i];
            a[i * n + (i + n - 1) % n] += lower[i];
            a[i * n + (i + 1) % n] += upper[i];
        }
        return dense_solve(n, a, rhs.to_vec());
    }
    let alpha = upper[n - 1]; // A[n-1][0]
    let beta = lower[0]; // A[0][n-1]
    let g = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] -= g;
    bb[n - 1] -= alpha * beta / g;
    let x = thomas(lower, &bb, upper, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = g;
    u[n - 1] = alpha;
    let z = thomas(lower, &bb, upper, &u)?;
    let fact = (x[0] + beta * x[n - 1] / g) / (1.0 + z[0] + beta * z[n - 1] / g);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut gam = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut bet = b[0];
    if bet == 0.0 {
        return Err(Error::Solver { iterations: 0, residual: f64::NAN });
    }
    u[0] = r[0] / bet;
    for j in 1..n {
        gam[j] = c[j - 1] / bet;
        bet = b[j] - a[j] * gam[j];
        if bet == 0.0 {
            return Err(Error::Solver { iterations: j, residual: f64::NAN });
        }
        u[j] = (r[j] - a[j] * u[j - 1]) / bet;
    }
    for j in (0..n - 1).rev() {
        u[j] -= gam[j + 1] * u[j + 1];
    }
    Ok(u)
}

/// Gaussian elimination with partial pivoting on a row-major `n × n` matrix.
pub fn dense_solve(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 {
            return Err(Error::Solver { iterations: col, residual: f64::NAN });
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    Ok(x)
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, Default)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Assembles from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|(c, _)| *c == j).map(|(_, v)| v).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖r‖₁ / ‖b‖₁` of the recursively updated residual.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned CG for an SPD operator, starting from `x`.
/// Stops when `‖r‖₁ ≤ tol·‖b‖₁`.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = b.len();
    let bnorm: f64 = b.iter().map(|v| v.abs()).sum();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut rn: f64 = r.iter().map(|v| v.abs()).sum();
    if rn <= tol * bnorm {
        return Ok(SolveStats { iterations: 0, relative_residual: rn / bnorm });
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 1..=max_iter {
        apply(&p, &mut q);
        let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        if !(pq > 0.0) {
            return Err(Error::Solver { iterations: it, residual: rn / bnorm });
        }
        let alpha = rz / pq;
        rn = 0.0;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            rn += r[i].abs();
        }
        if rn <= tol * bnorm {
            return Ok(SolveStats { iterations: it, relative_residual: rn / bnorm });
        }
        let mut rz_new = 0.0;
        for i in 0..n {
            z[i] = r[i] / diag[i];
            rz_new += r[i] * z[i];
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver { iterations: max_iter, residual: rn / bnorm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_matches_dense() {
        for n in [1usize, 2, 3, 5, 9] {
            let lower: Vec<f64> = (0..n).map(|i| -0.3 - 0.1 * i as f64).collect();
            let upper: Vec<f64> = (0..n).map(|i| -0.2 - 0.05 * i as f64).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
            let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
            let x = solve_cyclic_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
            for i in 0..n {
                let r = lower[i] * x[(i + n - 1) % n] + diag[i] * x[i] + upper[i] * x[(i + 1) % n];
                let r = if n == 1 { (lower[0] + diag[0] + upper[0]) * x[0] } else { r };
                let r = if n == 2 {
                    diag[i] * x[i] + (lower[i] + upper[i]) * x[1 - i]
                } else {
                    r
                };
                assert!((r - rhs[i]).abs() < 1e-13, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn pcg_solves_spd() {
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            t.push((i, (i + 1) % n, -1.0));
            t.push(((i + 1) % n, i, -1.0));
        }
        let a = Csr::from_triplets(n, t);
        let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut x = vec![0.0; n];
        pcg(|v, out| a.matvec(v, out), &a.diagonal(), &b, &mut x, 1e-14, 200).unwrap();
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-11);
        }
    }
}
