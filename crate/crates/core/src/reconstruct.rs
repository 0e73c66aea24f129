//! Space-time reconstructions on a slab `[tⁿ, tⁿ⁺¹]`.
//!
//! With `ℓ₀(t) = (t − tⁿ)/Δtⁿ` and `ℓ₁ = 1 − ℓ₀`, the reconstructions are
//! `ρ̃(t) = ℓ₀ ρ̃ⁿ⁺¹ + ℓ₁ ρ̃ⁿ` and `ρ_h(t) = ℓ₀ ρ_hⁿ⁺¹ + ℓ₁ ρ_hⁿ`.
//!
//! The residual also refers to the step preceding the slab. A slab stores
//! that step generically as `(ρ^in, c^in) → ρ^out` with size `Δt_prev`; for
//! `n ≥ 1` this is `(ρⁿ⁻¹, cⁿ⁻¹) → ρⁿ`. At `n = 0` it is synthesized by a
//! [`FirstSlabPolicy`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{CellField, NodalField};

/// One stored time level.
#[derive(Clone, Debug)]
pub struct State {
    pub t: f64,
    pub rho: Arc<CellField>,
    pub c: Arc<NodalField>,
}

/// Start-up convention for the step preceding slab 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FirstSlabPolicy {
    /// The preceding step is step 0 itself: `(ρ⁰, c⁰) → ρ¹`, `Δt_prev = Δt⁰`.
    /// Every lagged term then reproduces the slab's own data.
    #[default]
    Shift,
    /// `ρ⁻¹ := ρ⁰`, `c⁻¹ := c⁰`, `Δt⁻¹ := Δt⁰`, i.e. `(ρ⁰, c⁰) → ρ⁰`.
    Hold,
    /// `ρ⁻¹ := 2ρ⁰ − ρ¹`, `c⁻¹ := 2c⁰ − c¹`, `Δt⁻¹ := Δt⁰`, i.e.
    /// `(ρ⁻¹, c⁻¹) → ρ⁰`.
    Extrapolate,
}

impl fmt::Display for FirstSlabPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FirstSlabPolicy::Shift => "shift",
            FirstSlabPolicy::Hold => "hold",
            FirstSlabPolicy::Extrapolate => "extrapolate",
        })
    }
}

impl FromStr for FirstSlabPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shift" => Ok(Self::Shift),
            "hold" => Ok(Self::Hold),
            "extrapolate" => Ok(Self::Extrapolate),
            other => Err(Error::Config(format!("unknown first-slab policy '{other}'"))),
        }
    }
}

/// The step preceding a slab.
#[derive(Clone, Debug)]
pub struct PrevStep {
    pub rho_in: Arc<CellField>,
    pub c_in: Arc<NodalField>,
    pub rho_out: Arc<CellField>,
    pub dt: f64,
}

/// Everything the residual of one slab depends on.
#[derive(Clone, Debug)]
pub struct TimeSlab {
    pub index: usize,
    pub t_n: f64,
    pub dt: f64,
    pub rho_n: Arc<CellField>,
    pub rho_np1: Arc<CellField>,
    pub c_n: Arc<NodalField>,
    pub c_np1: Arc<NodalField>,
    pub prev: PrevStep,
    pub policy: FirstSlabPolicy,
}

impl TimeSlab {
    pub fn t_np1(&self) -> f64 {
        self.t_n + self.dt
    }

    /// `(ℓ₀(t), ℓ₁(t))`; exact at both endpoints.
    pub fn weights(&self, t: f64) -> Result<(f64, f64)> {
        let t1 = self.t_np1();
        let tol = 1e-12 * self.dt.max(t1.abs());
        if t < self.t_n - tol || t > t1 + tol {
            return Err(Error::InvalidArgument(format!(
                "time {t} outside slab [{}, {t1}]",
                self.t_n
            )));
        }
        if t == t1 {
            return Ok((1.0, 0.0));
        }
        let l0 = ((t - self.t_n) / self.dt).clamp(0.0, 1.0);
        Ok((l0, 1.0 - l0))
    }

    /// Weights at the reference coordinate `s ∈ [0, 1]`.
    pub fn weights_at(&self, s: f64) -> (f64, f64) {
        (s, 1.0 - s)
    }
}

fn lincomb(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(u, v)| a * u + b * v).collect()
}

/// `(ρ̃(t), ρ_h(t))`.
pub fn interpolate_in_time(slab: &TimeSlab, t: f64) -> Result<(NodalField, CellField)> {
    let (l0, l1) = slab.weights(t)?;
    let (a, b) = (slab.rho_np1.values(), slab.rho_n.values());
    let v = if l1 == 0.0 {
        a.to_vec()
    } else if l0 == 0.0 {
        b.to_vec()
    } else {
        lincomb(l0, a, l1, b)
    };
    let cell = CellField::new(slab.rho_n.mesh().clone(), v)?;
    Ok((cell.to_nodal(), cell))
}

/// `∂_t ρ̃ = (ρ̃ⁿ⁺¹ − ρ̃ⁿ)/Δtⁿ`.
pub fn time_derivative(slab: &TimeSlab) -> Result<NodalField> {
    let v = lincomb(1.0 / slab.dt, slab.rho_np1.values(), -1.0 / slab.dt, slab.rho_n.values());
    NodalField::p1(slab.rho_n.mesh().clone(), v)
}

/// Builds slab `n` from the trailing states `[..., sⁿ⁻¹, sⁿ, sⁿ⁺¹]` of
/// `history` (at least two).
pub fn make_slab(history: &[State], policy: FirstSlabPolicy) -> Result<TimeSlab> {
    if history.len() < 2 {
        return Err(Error::InvalidArgument("a slab needs at least two states".into()));
    }
    let len = history.len();
    let (s0, s1) = (&history[len - 2], &history[len - 1]);
    let mesh = s0.rho.mesh();
    for s in history.iter().rev().take(3) {
        if !s.rho.same_mesh(mesh) || !s.c.same_mesh(mesh) {
            return Err(Error::MeshMismatch);
        }
    }
    let dt = s1.t - s0.t;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("states must be strictly increasing in time".into()));
    }
    let prev = if len >= 3 {
        let sm = &history[len - 3];
        PrevStep {
            rho_in: sm.rho.clone(),
            c_in: sm.c.clone(),
            rho_out: s0.rho.clone(),
            dt: s0.t - sm.t,
        }
    } else {
        first_prev(s0, s1, dt, policy)?
    };
    Ok(TimeSlab {
        index: len - 2,
        t_n: s0.t,
        dt,
        rho_n: s0.rho.clone(),
        rho_np1: s1.rho.clone(),
        c_n: s0.c.clone(),
        c_np1: s1.c.clone(),
        prev,
        policy,
    })
}

/// Preceding step of slab 0 under `policy`.
pub fn first_prev(s0: &State, s1: &State, dt: f64, policy: FirstSlabPolicy) -> Result<PrevStep> {
    Ok(match policy {
        FirstSlabPolicy::Shift => PrevStep {
            rho_in: s0.rho.clone(),
            c_in: s0.c.clone(),
            rho_out: s1.rho.clone(),
            dt,
        },
        FirstSlabPolicy::Hold => PrevStep {
            rho_in: s0.rho.clone(),
            c_in: s0.c.clone(),
            rho_out: s0.rho.clone(),
            dt,
        },
        FirstSlabPolicy::Extrapolate => {
            let rho = lincomb(2.0, s0.rho.values(), -1.0, s1.rho.values());
            let c = lincomb(2.0, s0.c.values(), -1.0, s1.c.values());
            PrevStep {
                rho_in: Arc::new(CellField::new(s0.rho.mesh().clone(), rho)?),
                c_in: Arc::new(NodalField::p1(s0.c.mesh().clone(), c)?),
                rho_out: s0.rho.clone(),
                dt,
            }
        }
    })
}
