//! Computable bounds for `‖R̃_ρ(t)‖_{H⁻¹}` on a time slab.
//!
//! The residual is split as `R̃ = R̃¹ + R̃² + R̃³` (diffusion, time
//! derivative, advection). Every part is bounded by a sum of terms that
//! depend on a single time level, a single step or the slab itself:
//!
//! ```text
//! r¹(t) = ℓ₀ S₁(step n) + ℓ₁ S₁(step m) + G(t)
//! r²(t) = D + ℓ₁ Q
//! r³(t) = M + ℓ₀ Φ(level n) + ℓ₁ Φ(level m)
//! ```
//!
//! where step `m` is the step preceding the slab (see
//! [`crate::reconstruct::FirstSlabPolicy`]) and `G(t)` collects the
//! time-lag and time-interpolation errors of the diffusion coefficient.
//! The total `r = r¹ + r² + r³` is squared and integrated with 3-point
//! Gauss–Legendre in time.

mod one_d;
mod two_d;

pub use two_d::displayed_p;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{CellField, NodalField, DEFAULT_QUAD_ORDER};
use crate::mesh::Mesh;
use crate::power::PowerLaw;
use crate::reconstruct::TimeSlab;


/// Gauss–Legendre nodes and weights on `[0, 1]`, three points.
pub const TIME_NODES: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];
pub const TIME_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Quantities of one time level `(ρ_h, c_h)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LevelTerms {
    /// Elliptic estimator for `‖c_h − c̃‖_{H¹}`.
    pub eta_c: f64,
    /// `(Σ ‖ℱ − ρ̃ ∂c_h‖²_{L²(K∪K')})^{1/2}` over all interfaces.
    pub flux: f64,
    /// `‖ρ̃‖_{L∞}`.
    pub rho_inf: f64,
    /// `2 (flux + √2 ‖ρ̃‖_{L∞} η_c)`.
    pub phi: f64,
}

/// Norms entering `a_γ(t)`, evaluated at one time level.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormSnapshot {
    pub t: f64,
    pub rho_inf: f64,
    /// `‖ρ̃^{(γ−1)/2}‖²_{L³}`.
    pub rho_pow_l3_sq: f64,
    pub rho_l3: f64,
    pub grad_c_l3: f64,
    pub grad_c_inf: f64,
    pub eta_c: f64,
}

/// Diffusion terms of one step `(ρ^in → ρ^out)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepTerms {
    /// Coefficient mismatch `γ|f(ρ̃^in) − f(ρ̂^in)|` against `∂ρ̃^out`.
    pub coef: f64,
    /// Flux difference `𝒟_{i+1/2} − 𝒟_{i−1/2}` against cell means.
    pub flux_diff: f64,
    /// 2D only: `γ f(ρ̂) (∂ρ̃^out − ∂ρ̃^out|_edge)` on the shifted cells.
    pub extra: f64,
    /// Combined bound `S₁`.
    pub s1: f64,
}

/// Values of the individual bounds, without time weights.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TermDiagnostics {
    pub r1_i: f64,
    pub r1_ii: f64,
    pub r1_extra: f64,
    /// Largest value of `G(t)` over the time nodes.
    pub r1_lag_interp: f64,
    pub r2_space: f64,
    pub r2_time: f64,
    pub r3_mixed: f64,
    pub r3_flux: f64,
    /// 2D only: the `P[ρ_h^{n+1} − ρ_h^n]/Δt` functional in its displayed
    /// five-point form. Reported, not used in the bound.
    pub p_displayed: f64,
}

/// Time-integrated squared bounds over one slab.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SlabResidual {
    pub index: usize,
    pub t_n: f64,
    pub dt: f64,
    pub r1_sq: f64,
    pub r2_sq: f64,
    pub r3_sq: f64,
    /// `∫ (r¹ + r² + r³)²`.
    pub total_sq: f64,
    pub terms: TermDiagnostics,
    /// Norms at `tⁿ⁺¹`.
    pub snapshot: NormSnapshot,
}

/// Elliptic estimator values for the levels of a slab.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaLevels {
    /// Level `m` (the input level of the preceding step).
    pub prev: f64,
    pub n: f64,
    pub np1: f64,
}

/// Slab-constant pieces of the bound.
#[derive(Clone, Copy, Debug, Default)]
struct SlabParts {
    s1_n: f64,
    s1_m: f64,
    d2: f64,
    sd: f64,
    mixed: f64,
    phi_n: f64,
    phi_m: f64,
}

#[derive(Clone, Debug)]
struct LevelData {
    terms: LevelTerms,
    snapshot: NormSnapshot,
    /// 2D: nodal values of `γ f(ρ)`.
    coef: Vec<f64>,
}

fn ptr_c(a: &Arc<CellField>) -> usize {
    Arc::as_ptr(a) as usize
}

fn ptr_n(a: &Arc<NodalField>) -> usize {
    Arc::as_ptr(a) as usize
}

/// Slab-by-slab bound evaluation with caching of level and step terms.
///
/// Level and step data are keyed by the identity of the shared fields, so
/// consecutive slabs sharing an `Arc` reuse the work done for the previous
/// slab.
pub struct ResidualEvaluator {
    power: PowerLaw,
    quad_order: usize,
    levels: Vec<(Arc<CellField>, Arc<NodalField>, Option<f64>, Arc<LevelData>)>,
    steps: Vec<(Arc<CellField>, Arc<CellField>, StepTerms)>,
}

const CACHE: usize = 6;

impl ResidualEvaluator {
    pub fn new(gamma: f64) -> Self {
        Self::with_quad_order(gamma, DEFAULT_QUAD_ORDER)
    }

    pub fn with_quad_order(gamma: f64, quad_order: usize) -> Self {
        Self {
            power: PowerLaw::new(gamma),
            quad_order: quad_order.max(1),
            levels: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.power.gamma()
    }

    fn level(&mut self, rho: &Arc<CellField>, c: &Arc<NodalField>, eta: Option<f64>) -> Result<Arc<LevelData>> {
        if let Some(e) = self
            .levels
            .iter()
            .find(|e| ptr_c(&e.0) == ptr_c(rho) && ptr_n(&e.1) == ptr_n(c) && (eta.is_none() || e.2 == eta))
        {
            return Ok(e.3.clone());
        }
        if !rho.same_mesh(c.mesh()) {
            return Err(Error::MeshMismatch);
        }
        let data = Arc::new(match &**rho.mesh() {
            Mesh::OneD(m) => one_d::level(m, &self.power, rho.values(), c.values(), eta, self.quad_order),
            Mesh::TwoD(m) => two_d::level(m, &self.power, rho.values(), c.values(), eta),
        });
        if self.levels.len() >= CACHE {
            self.levels.remove(0);
        }
        self.levels.push((rho.clone(), c.clone(), eta, data.clone()));
        Ok(data)
    }

    fn step(&mut self, rho_in: &Arc<CellField>, rho_out: &Arc<CellField>) -> Result<StepTerms> {
        if let Some(e) = self
            .steps
            .iter()
            .find(|e| ptr_c(&e.0) == ptr_c(rho_in) && ptr_c(&e.1) == ptr_c(rho_out))
        {
            return Ok(e.2);
        }
        if !rho_in.same_mesh(rho_out.mesh()) {
            return Err(Error::MeshMismatch);
        }
        let t = match &**rho_in.mesh() {
            Mesh::OneD(m) => one_d::step(m, &self.power, rho_in.values(), rho_out.values()),
            Mesh::TwoD(m) => two_d::step(m, &self.power, rho_in.values(), rho_out.values()),
        };
        if self.steps.len() >= CACHE {
            self.steps.remove(0);
        }
        self.steps.push((rho_in.clone(), rho_out.clone(), t));
        Ok(t)
    }

    fn check(&self, slab: &TimeSlab) -> Result<()> {
        let mesh = slab.rho_n.mesh();
        let ok = slab.rho_np1.same_mesh(mesh)
            && slab.c_n.same_mesh(mesh)
            && slab.c_np1.same_mesh(mesh)
            && slab.prev.rho_in.same_mesh(mesh)
            && slab.prev.rho_out.same_mesh(mesh)
            && slab.prev.c_in.same_mesh(mesh);
        if ok {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    fn parts(&mut self, slab: &TimeSlab, eta: Option<EtaLevels>) -> Result<(SlabParts, TermDiagnostics)> {
        self.check(slab)?;
        let ln = self.level(&slab.rho_n, &slab.c_n, eta.map(|e| e.n))?;
        let lm = self.level(&slab.prev.rho_in, &slab.prev.c_in, eta.map(|e| e.prev))?;
        let lnp1 = self.level(&slab.rho_np1, &slab.c_np1, eta.map(|e| e.np1))?;
        let sn = self.step(&slab.rho_n, &slab.rho_np1)?;
        let sm = self.step(&slab.prev.rho_in, &slab.prev.rho_out)?;
        let (rn, rnp1, rm) = (slab.rho_n.values(), slab.rho_np1.values(), slab.prev.rho_in.values());
        let (d2, sd, p_disp) = match &**slab.rho_n.mesh() {
            Mesh::OneD(m) => {
                let (d2, sd) = one_d::time_terms(m, slab);
                (d2, sd, 0.0)
            }
            Mesh::TwoD(m) => two_d::time_terms(m, slab),
        };
        let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
        let vol = slab.rho_n.mesh().measure().sqrt();
        let dn = sup(rnp1, rn);
        let dm = sup(rm, rn);
        let mixed = vol * ((ln.terms.rho_inf + lnp1.terms.rho_inf + dn) * dn + (lm.terms.rho_inf + ln.terms.rho_inf) * dm);
        let parts = SlabParts {
            s1_n: sn.s1,
            s1_m: sm.s1,
            d2,
            sd,
            mixed,
            phi_n: ln.terms.phi,
            phi_m: lm.terms.phi,
        };
        let diag = TermDiagnostics {
            r1_i: sn.coef,
            r1_ii: sn.flux_diff,
            r1_extra: sn.extra,
            r1_lag_interp: 0.0,
            r2_space: d2,
            r2_time: sd,
            r3_mixed: mixed,
            r3_flux: ln.terms.phi,
            p_displayed: p_disp,
        };
        Ok((parts, diag))
    }

    /// `G(t)`: time-lag and time-interpolation error of the diffusion term.
    fn lag_interp(&mut self, slab: &TimeSlab, l0: f64, l1: f64) -> Result<f64> {
        match &**slab.rho_n.mesh() {
            Mesh::OneD(m) => Ok(one_d::lag_interp(m, &self.power, slab, l0, l1, self.quad_order)),
            Mesh::TwoD(m) => {
                let a = self.level(&slab.prev.rho_in, &slab.prev.c_in, None)?;
                let b = self.level(&slab.rho_n, &slab.c_n, None)?;
                Ok(two_d::lag_interp(m, &self.power, slab, &a.coef, &b.coef, l0, l1))
            }
        }
    }

    pub fn r1(&mut self, slab: &TimeSlab, t: f64) -> Result<f64> {
        let (l0, l1) = slab.weights(t)?;
        let (p, _) = self.parts(slab, None)?;
        Ok(l0 * p.s1_n + l1 * p.s1_m + self.lag_interp(slab, l0, l1)?)
    }

    pub fn r2(&mut self, slab: &TimeSlab, t: f64) -> Result<f64> {
        let (_, l1) = slab.weights(t)?;
        let (p, _) = self.parts(slab, None)?;
        Ok(p.d2 + l1 * p.sd)
    }

    pub fn r3(&mut self, slab: &TimeSlab, t: f64, eta: Option<EtaLevels>) -> Result<f64> {
        let (l0, l1) = slab.weights(t)?;
        let (p, _) = self.parts(slab, eta)?;
        Ok(p.mixed + l0 * p.phi_n + l1 * p.phi_m)
    }

    /// Snapshot of the norms entering `a_γ` at a single level.
    pub fn snapshot(&mut self, t: f64, rho: &Arc<CellField>, c: &Arc<NodalField>) -> Result<NormSnapshot> {
        let mut s = self.level(rho, c, None)?.snapshot;
        s.t = t;
        Ok(s)
    }

    /// Squared bounds integrated over the slab.
    pub fn integrate(&mut self, slab: &TimeSlab, eta: Option<EtaLevels>) -> Result<SlabResidual> {
        let (p, mut diag) = self.parts(slab, eta)?;
        let mut out = SlabResidual {
            index: slab.index,
            t_n: slab.t_n,
            dt: slab.dt,
            ..SlabResidual::default()
        };
        for (s, w) in TIME_NODES.iter().zip(TIME_WEIGHTS) {
            let (l0, l1) = slab.weights_at(*s);
            let g = self.lag_interp(slab, l0, l1)?;
            diag.r1_lag_interp = diag.r1_lag_interp.max(g);
            let r1 = l0 * p.s1_n + l1 * p.s1_m + g;
            let r2 = p.d2 + l1 * p.sd;
            let r3 = p.mixed + l0 * p.phi_n + l1 * p.phi_m;
            let wt = w * slab.dt;
            out.r1_sq += wt * r1 * r1;
            out.r2_sq += wt * r2 * r2;
            out.r3_sq += wt * r3 * r3;
            out.total_sq += wt * (r1 + r2 + r3).powi(2);
        }
        out.terms = diag;
        out.snapshot = self.snapshot(slab.t_np1(), &slab.rho_np1, &slab.c_np1)?;
        Ok(out)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (1.0..=3.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("gamma must lie in [1, 3], got {gamma}")))
    }
}

fn want_dim(slab: &TimeSlab, dim: usize) -> Result<()> {
    if slab.rho_n.mesh().dim() == dim {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("expected a {dim}D slab")))
    }
}

pub fn r1_bound_1d(slab: &TimeSlab, gamma: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    want_dim(slab, 1)?;
    ResidualEvaluator::new(gamma).r1(slab, t)
}

pub fn r2_bound_1d(slab: &TimeSlab, t: f64) -> Result<f64> {
    want_dim(slab, 1)?;
    ResidualEvaluator::new(1.0).r2(slab, t)
}

pub fn r3_bound_1d(slab: &TimeSlab, t: f64, eta_c: EtaLevels) -> Result<f64> {
    want_dim(slab, 1)?;
    ResidualEvaluator::new(1.0).r3(slab, t, Some(eta_c))
}

pub fn r1_bound_2d(slab: &TimeSlab, gamma: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    want_dim(slab, 2)?;
    ResidualEvaluator::new(gamma).r1(slab, t)
}

pub fn r2_bound_2d(slab: &TimeSlab, t: f64) -> Result<f64> {
    want_dim(slab, 2)?;
    ResidualEvaluator::new(1.0).r2(slab, t)
}

pub fn r3_bound_2d(slab: &TimeSlab, t: f64, eta_c: EtaLevels) -> Result<f64> {
    want_dim(slab, 2)?;
    ResidualEvaluator::new(1.0).r3(slab, t, Some(eta_c))
}

/// Elliptic estimator values of the three levels of `slab`.
pub fn eta_levels(slab: &TimeSlab) -> Result<EtaLevels> {
    let e = |r: &Arc<CellField>, c: &Arc<NodalField>| crate::chemo::elliptic_estimator(c, &r.to_nodal());
    Ok(EtaLevels {
        prev: e(&slab.prev.rho_in, &slab.prev.c_in)?,
        n: e(&slab.rho_n, &slab.c_n)?,
        np1: e(&slab.rho_np1, &slab.c_np1)?,
    })
}

pub fn integrate_slab(slab: &TimeSlab, gamma: f64, eta_c: Option<EtaLevels>) -> Result<SlabResidual> {
    check_gamma(gamma)?;
    ResidualEvaluator::new(gamma).integrate(slab, eta_c)
}

/// Cumulative residuals `A(t_m) = z₁(0) + Σ_{slabs ≤ m} ∫ ‖R̃‖²` and the
/// restricted sums `A^j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResidualSeries {
    /// `t⁰, t¹, ...`; one entry more than slabs.
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub a3: Vec<f64>,
}

impl ResidualSeries {
    pub fn new(t0: f64, z1: f64) -> Self {
        Self {
            times: vec![t0],
            a: vec![z1],
            a1: vec![z1],
            a2: vec![z1],
            a3: vec![z1],
        }
    }

    pub fn push(&mut self, s: &SlabResidual) {
        let last = |v: &Vec<f64>| *v.last().unwrap();
        self.times.push(s.t_n + s.dt);
        self.a.push(last(&self.a) + s.total_sq);
        self.a1.push(last(&self.a1) + s.r1_sq);
        self.a2.push(last(&self.a2) + s.r2_sq);
        self.a3.push(last(&self.a3) + s.r3_sq);
    }
}

#[allow(non_snake_case)]
pub fn accumulate_A(history: &[SlabResidual], z1_initial: f64) -> ResidualSeries {
    let t0 = history.first().map_or(0.0, |s| s.t_n);
    let mut s = ResidualSeries::new(t0, z1_initial);
    for h in history {
        s.push(h);
    }
    s
}

/// `z₁(0)` bound `½ ‖ρ₀ − ρ̃⁰‖²_{L²}` with the elliptic constant 1.
/// `rho0` is evaluated by Gauss quadrature of order `q` per dual element.
pub fn z1_initial(rho0: impl Fn(f64, f64) -> f64, rho_tilde: &NodalField, q: usize) -> f64 {
    let mesh = rho_tilde.mesh();
    let err = match &**mesh {
        Mesh::OneD(m) => one_d::l2_distance_sq(m, rho_tilde.values(), |x| rho0(x, 0.0), q),
        Mesh::TwoD(m) => two_d::l2_distance_sq(m, rho_tilde.values(), rho0, q),
    };
    0.5 * err
}
