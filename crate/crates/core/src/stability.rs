//! Conditional stability estimates: constants, the Gronwall rate `a_γ(t)`,
//! the smallness condition and the resulting error bound.
//!
//! Linear diffusion (`γ = 1`):
//!
//! ```text
//! a₁ = 2 C_S² ‖ρ̄‖²_{L³} + 2 ‖∇c̄‖²_{L∞} + ½
//! condition 8 A E₁ (8 (4√2 + 2) C_S′ (1 + T) E₁)² ≤ 1
//! ```
//!
//! Power-law diffusion (`1 < γ ≤ 3`):
//!
//! ```text
//! a_γ = 4 C_S² c_γ⁻¹ γ² ‖ρ̄^{(γ−1)/2}‖²_{L³} + C_a + 2 (C + 1) ‖ρ̄‖_{L∞} + 2 C_S ‖∇c̄‖_{L³} + ½
//! condition 8 A E_γ (8 B (1 + T) E_γ)^{1/β} ≤ 1
//! ```
//!
//! In both cases `E = exp ∫₀ᵀ a` and the bound is `8 A E`.

use std::fmt;

use crate::error::{Error, Result};
use crate::residual::NormSnapshot;

/// `H¹ ↪ L⁶` on the unit torus.
pub const C_S_DEFAULT: f64 = 2.1358;
/// `H² ↪ L∞` on the unit torus.
pub const C_S_PRIME_DEFAULT: f64 = 7.6112;
/// Cited values of `C̃_S` as `(γ, C̃_S)`.
pub const C_S_TILDE_CITED: [(f64, f64); 2] = [(1.5, 5.2494), (2.0, 3.9228)];

/// Which theorem is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Linear,
    Nonlinear,
}

impl Mode {
    pub fn for_gamma(gamma: f64) -> Mode {
        if gamma == 1.0 {
            Mode::Linear
        } else {
            Mode::Nonlinear
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Linear => "linear",
            Mode::Nonlinear => "nonlinear",
        })
    }
}

/// User-facing embedding constants. `None` selects the default.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstantOverrides {
    pub c_s: Option<f64>,
    pub c_s_prime: Option<f64>,
    pub c_s_tilde: Option<f64>,
    pub c_ell: Option<f64>,
}

/// Every constant entering `a_γ`, the condition and the bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantsTable {
    pub gamma: f64,
    pub dim: usize,
    pub c_s: f64,
    pub c_s_prime: f64,
    /// `NaN` in the linear mode, where it is not used.
    pub c_s_tilde: f64,
    pub c_ell: f64,
    pub c_gamma: f64,
    pub c_y: f64,
    pub c_y_prime: f64,
    pub c_a: f64,
    /// `C = d/2`.
    pub c_d: f64,
    pub b: f64,
    pub beta: f64,
}

pub fn c_gamma(gamma: f64) -> f64 {
    if gamma <= 2.0 {
        c_gamma_low(gamma)
    } else {
        c_gamma_high(gamma)
    }
}

/// `γ/2`.
pub fn c_gamma_low(gamma: f64) -> f64 {
    gamma / 2.0
}

/// `γ/2^{γ−1}`.
pub fn c_gamma_high(gamma: f64) -> f64 {
    gamma / 2f64.powf(gamma - 1.0)
}

pub fn beta(gamma: f64) -> f64 {
    if gamma < 2.0 {
        beta_low(gamma)
    } else {
        beta_high(gamma)
    }
}

/// `(3 − γ) / (2(γ − 1))`.
pub fn beta_low(gamma: f64) -> f64 {
    (3.0 - gamma) / (2.0 * (gamma - 1.0))
}

/// `(γ − 1)/2`.
pub fn beta_high(gamma: f64) -> f64 {
    (gamma - 1.0) / 2.0
}

/// `(1/(γ+1)) (16γ/(3γ+3))^γ`.
pub fn c_y(gamma: f64) -> f64 {
    (16.0 * gamma / (3.0 * gamma + 3.0)).powf(gamma) / (gamma + 1.0)
}

/// `√2 c̃_γ (γ−1)/(γ+1) (16√2 C̃_S c̃_γ / (3γ+3))^{2/(γ−1)}` with
/// `c̃_γ = (c_γ/2)^{(γ+1)/2}`.
pub fn c_y_prime(gamma: f64, c_s_tilde: f64) -> f64 {
    let ct = (c_gamma(gamma) / 2.0).powf((gamma + 1.0) / 2.0);
    let s2 = std::f64::consts::SQRT_2;
    s2 * ct * (gamma - 1.0) / (gamma + 1.0) * (16.0 * s2 * c_s_tilde * ct / (3.0 * gamma + 3.0)).powf(2.0 / (gamma - 1.0))
}

/// The two sides of `z^{(γ+1)/2} ≤ z + z^{(γ+1)/(2(γ−1))}` (`γ < 2`) or
/// `z^{(γ+1)/(2(γ−1))} ≤ z + z^{(γ+1)/2}` (`γ ≥ 2`) as `(lhs, rhs)`.
pub fn z1_power_comparison(z: f64, gamma: f64) -> (f64, f64) {
    let p = (gamma + 1.0) / 2.0;
    let q = (gamma + 1.0) / (2.0 * (gamma - 1.0));
    if gamma < 2.0 {
        (z.powf(p), z + z.powf(q))
    } else {
        (z.powf(q), z + z.powf(p))
    }
}

fn cited_c_s_tilde(gamma: f64) -> Option<f64> {
    C_S_TILDE_CITED.iter().find(|(g, _)| (g - gamma).abs() < 1e-12).map(|(_, v)| *v)
}

impl ConstantsTable {
    /// Defaults for `gamma` on the `dim`-dimensional unit torus.
    pub fn new(gamma: f64, dim: usize) -> Result<Self> {
        Self::with_overrides(gamma, dim, ConstantOverrides::default())
    }

    pub fn with_overrides(gamma: f64, dim: usize, o: ConstantOverrides) -> Result<Self> {
        if !(1.0..=3.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("gamma must lie in [1, 3], got {gamma}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if dim == 3 && gamma > 1.0 && gamma < 1.4 {
            return Err(Error::InvalidArgument("d = 3 requires gamma >= 7/5".into()));
        }
        for (name, v) in [
            ("C_S", o.c_s),
            ("C_S'", o.c_s_prime),
            ("C~_S", o.c_s_tilde),
            ("C_ell", o.c_ell),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("constant {name} must be positive, got {v}")));
                }
            }
        }
        let c_s = o.c_s.unwrap_or(C_S_DEFAULT);
        let c_s_prime = o.c_s_prime.unwrap_or(C_S_PRIME_DEFAULT);
        let c_ell = o.c_ell.unwrap_or(1.0);
        let c_d = dim as f64 / 2.0;
        if gamma == 1.0 {
            return Ok(Self {
                gamma,
                dim,
                c_s,
                c_s_prime,
                c_s_tilde: f64::NAN,
                c_ell,
                c_gamma: 1.0,
                c_y: c_y(1.0),
                c_y_prime: f64::NAN,
                c_a: 0.0,
                c_d,
                b: 2.0 * c_s_prime,
                beta: 0.5,
            });
        }
        let c_s_tilde = o.c_s_tilde.or_else(|| cited_c_s_tilde(gamma)).ok_or_else(|| {
            Error::Config(format!(
                "no default for C~_S at gamma = {gamma}; supply one (cited values exist for gamma = 1.5 and 2)"
            ))
        })?;
        let cy = c_y(gamma);
        let cyp = c_y_prime(gamma, c_s_tilde);
        let young = c_s * cy * (std::f64::consts::SQRT_2 * gamma).powf(gamma + 1.0);
        let c_a = if gamma < 2.0 { young } else { c_s_tilde * cyp };
        Ok(Self {
            gamma,
            dim,
            c_s,
            c_s_prime,
            c_s_tilde,
            c_ell,
            c_gamma: c_gamma(gamma),
            c_y: cy,
            c_y_prime: cyp,
            c_a,
            c_d,
            b: young + c_s_tilde * cyp,
            beta: beta(gamma),
        })
    }

    pub fn mode(&self) -> Mode {
        Mode::for_gamma(self.gamma)
    }
}

/// `F(ρ, ρ̄)`: the secant slope of `s ↦ s^γ`, or `γ ρ^{γ−1}` on the diagonal.
pub fn f_secant(rho: f64, rho_bar: f64, gamma: f64) -> Result<f64> {
    if !(rho >= 0.0) || !(rho_bar >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "F needs nonnegative arguments, got ({rho}, {rho_bar})"
        )));
    }
    if rho == rho_bar {
        return Ok(if gamma == 1.0 { 1.0 } else { gamma * rho.powf(gamma - 1.0) });
    }
    Ok((rho.powf(gamma) - rho_bar.powf(gamma)) / (rho - rho_bar))
}

/// `c_γ (ρ^{γ−1} + ρ̄^{γ−1})`.
pub fn f_lower_bound(rho: f64, rho_bar: f64, gamma: f64) -> f64 {
    c_gamma(gamma) * (rho.powf(gamma - 1.0) + rho_bar.powf(gamma - 1.0))
}

/// Margins of the scalar inequalities; each is `≥ 0` when the inequality
/// holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaMargins {
    /// `|u^α − ū^α| − |u − ū|^α`, `α ≥ 1`.
    pub power_difference: f64,
    /// `((ρ^γ − ρ̄^γ)(ρ − ρ̄))^{γ/(γ+1)} − |ρ^{γ−1} − ρ̄^{γ−1}||ρ − ρ̄|`.
    pub product: f64,
}

/// Evaluates `|u^α − ū^α| ≥ |u − ū|^α` at `α = alpha` and the product
/// inequality at `gamma`.
pub fn lemma_checks(u: f64, u_bar: f64, alpha: f64, rho: f64, rho_bar: f64, gamma: f64) -> LemmaMargins {
    let power_difference = (u.powf(alpha) - u_bar.powf(alpha)).abs() - (u - u_bar).abs().powf(alpha);
    let rhs = ((rho.powf(gamma) - rho_bar.powf(gamma)) * (rho - rho_bar)).powf(gamma / (gamma + 1.0));
    let lhs = (rho.powf(gamma - 1.0) - rho_bar.powf(gamma - 1.0)).abs() * (rho - rho_bar).abs();
    LemmaMargins {
        power_difference,
        product: rhs - lhs,
    }
}

/// Both sides of the quasi-norm equivalence for `q = (ρ^γ − ρ̄^γ)(ρ − ρ̄)`
/// and `p = |ρ^{(γ+1)/2} − ρ̄^{(γ+1)/2}|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiNormMargins {
    /// `q − p`, the lower bound with constant 1 as displayed.
    pub lower_displayed: f64,
    /// `q − 4γ/(γ+1)² · p`.
    pub lower_sharp: f64,
    /// `(γ+1)/2 · p − q`.
    pub upper_displayed: f64,
    /// `p − q`.
    pub upper_sharp: f64,
}

pub fn quasi_norm_margins(rho: f64, rho_bar: f64, gamma: f64) -> QuasiNormMargins {
    let e = (gamma + 1.0) / 2.0;
    let p = (rho.powf(e) - rho_bar.powf(e)).powi(2);
    let q = (rho.powf(gamma) - rho_bar.powf(gamma)) * (rho - rho_bar);
    QuasiNormMargins {
        lower_displayed: q - p,
        lower_sharp: q - 4.0 * gamma / ((gamma + 1.0) * (gamma + 1.0)) * p,
        upper_displayed: e * p - q,
        upper_sharp: p - q,
    }
}

/// Gradient norms of `c̄` as they enter `a_γ`.
///
/// The snapshot holds norms of `c_h`; `c̄` is the exact elliptic solution
/// for `ρ̃`. The `L³` norm is inflated by `C_S η_c`. The `L∞` norm has no
/// computable inflation and is used as is, which makes the linear mode a
/// surrogate.
pub fn grad_c_l3_bound(s: &NormSnapshot, c: &ConstantsTable) -> f64 {
    s.grad_c_l3 + c.c_s * s.eta_c
}

/// `a_γ(t)` from the norms at one time.
pub fn a_gamma(s: &NormSnapshot, c: &ConstantsTable) -> f64 {
    match c.mode() {
        Mode::Linear => 2.0 * c.c_s * c.c_s * s.rho_l3 * s.rho_l3 + 2.0 * s.grad_c_inf * s.grad_c_inf + 0.5,
        Mode::Nonlinear => {
            let g = c.gamma;
            4.0 * c.c_s * c.c_s / c.c_gamma * g * g * s.rho_pow_l3_sq
                + c.c_a
                + 2.0 * (c.c_d + 1.0) * s.rho_inf
                + 2.0 * c.c_s * grad_c_l3_bound(s, c)
                + 0.5
        }
    }
}

/// `a_γ` over a time series of snapshots.
pub fn a_gamma_series(snapshots: &[NormSnapshot], c: &ConstantsTable) -> Result<Vec<f64>> {
    if snapshots.is_empty() {
        return Err(Error::InvalidArgument("no norm snapshots".into()));
    }
    Ok(snapshots.iter().map(|s| a_gamma(s, c)).collect())
}

/// Left-hand side of the condition with final time `t`.
pub fn condition_lhs(a: f64, e: f64, t: f64, c: &ConstantsTable) -> f64 {
    match c.mode() {
        Mode::Linear => {
            let k = 8.0 * (4.0 * std::f64::consts::SQRT_2 + 2.0) * c.c_s_prime * (1.0 + t) * e;
            8.0 * a * e * k * k
        }
        Mode::Nonlinear => 8.0 * a * e * (8.0 * c.b * (1.0 + t) * e).powf(1.0 / c.beta),
    }
}

/// Outcome of [`certify`].
#[derive(Clone, Debug, PartialEq)]
pub struct CertificationReport {
    pub mode: Mode,
    pub times: Vec<f64>,
    /// `A(t)`.
    pub a_cum: Vec<f64>,
    /// `a_γ(t)`.
    pub a_rate: Vec<f64>,
    /// `E(t) = exp ∫₀ᵗ a_γ`.
    pub e: Vec<f64>,
    /// Condition left-hand side, evaluated with final time `t`.
    pub lhs: Vec<f64>,
    /// `lhs ≤ 1`.
    pub satisfied: Vec<bool>,
    /// End of the certified prefix `[t₀, t*]`; `None` if the condition
    /// fails already at `t₀`.
    pub certified_until: Option<f64>,
    pub first_violation: Option<f64>,
    /// `8 A(t*) E(t*)`.
    pub bound: Option<f64>,
    /// Whether the certified prefix reaches the requested final time.
    pub covers_final_time: bool,
    /// `a_γ` uses norms of `c_h` without a rigorous inflation.
    pub surrogate: bool,
}

/// Evaluates the condition along a residual history.
///
/// `times`, `a_cum` and `a_rate` share one grid. `E` is integrated with the
/// trapezoidal rule between grid points.
pub fn certify(times: &[f64], a_cum: &[f64], a_rate: &[f64], t_final: f64, c: &ConstantsTable) -> Result<CertificationReport> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    if a_cum.len() != times.len() || a_rate.len() != times.len() {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ: {} times, {} A values, {} rates",
            times.len(),
            a_cum.len(),
            a_rate.len()
        )));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    let n = times.len();
    let mut e = Vec::with_capacity(n);
    let mut integral = 0.0;
    e.push(1.0);
    for k in 1..n {
        integral += 0.5 * (times[k] - times[k - 1]) * (a_rate[k] + a_rate[k - 1]);
        e.push(integral.exp());
    }
    let lhs: Vec<f64> = (0..n).map(|k| condition_lhs(a_cum[k], e[k], times[k] - times[0], c)).collect();
    let satisfied: Vec<bool> = lhs.iter().map(|v| *v <= 1.0).collect();
    let first_bad = satisfied.iter().position(|s| !s);
    let last_good = match first_bad {
        Some(0) => None,
        Some(k) => Some(k - 1),
        None => Some(n - 1),
    };
    let tol = 1e-12 * t_final.abs().max(1.0);
    Ok(CertificationReport {
        mode: c.mode(),
        certified_until: last_good.map(|k| times[k]),
        first_violation: first_bad.map(|k| times[k]),
        bound: last_good.map(|k| 8.0 * a_cum[k] * e[k]),
        covers_final_time: last_good.is_some_and(|k| times[k] >= t_final - tol),
        surrogate: true,
        times: times.to_vec(),
        a_cum: a_cum.to_vec(),
        a_rate: a_rate.to_vec(),
        e,
        lhs,
        satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_agree_at_two() {
        assert_eq!(c_gamma_low(2.0), 1.0);
        assert_eq!(c_gamma_high(2.0), 1.0);
        assert_eq!(beta_low(2.0), 0.5);
        assert_eq!(beta_high(2.0), 0.5);
    }

    #[test]
    fn secant_special_cases() {
        assert_eq!(f_secant(3.0, 1.0, 2.0).unwrap(), 4.0);
        assert!((f_secant(2.0, 2.0, 1.5).unwrap() - 1.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!(f_secant(-1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn missing_tilde_constant_is_rejected() {
        assert!(matches!(ConstantsTable::new(2.5, 2), Err(Error::Config(_))));
        let o = ConstantOverrides {
            c_s_tilde: Some(4.0),
            ..Default::default()
        };
        assert!(ConstantsTable::with_overrides(2.5, 2, o).is_ok());
        assert!(ConstantsTable::new(1.0, 2).is_ok());
    }

    #[test]
    fn zero_residual_certifies_with_zero_bound() {
        let c = ConstantsTable::new(2.0, 2).unwrap();
        let t = [0.0, 0.5, 1.0];
        let r = certify(&t, &[0.0; 3], &[3.0; 3], 1.0, &c).unwrap();
        assert!(r.satisfied.iter().all(|s| *s));
        assert_eq!(r.bound, Some(0.0));
        assert!(r.covers_final_time);
        assert!((r.e[2] - 3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn empty_series_is_rejected() {
        let c = ConstantsTable::new(1.0, 1).unwrap();
        assert!(certify(&[], &[], &[], 1.0, &c).is_err());
    }
}
