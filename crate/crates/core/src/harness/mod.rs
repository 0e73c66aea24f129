//! Experiment orchestration: a full run couples the scheme, the elliptic
//! solver, the residual bounds and the stability condition step by step.

mod config;
mod output;
pub mod selftest;
mod study;

pub use config::{parse_list, RunConfig, Z1Policy};
pub use output::{read_csv, write_csv, write_gnuplot, StoredRun, CSV_SCHEMA};
pub use study::{convergence_study, eoc, EocRow, EocTable};

use std::sync::Arc;
use std::time::Instant;

use crate::chemo::EllipticSystem;
use crate::error::{Error, Result};
use crate::fields::{gauss_legendre, CellField};
use crate::mesh::{Mesh, Mesh1D, Mesh2D};
use crate::reconstruct::{make_slab, State};
use crate::residual::{z1_initial, NormSnapshot, ResidualEvaluator, ResidualSeries, SlabResidual};
use crate::scheme::{StepOptions, Stepper};
use crate::stability::{a_gamma, certify, condition_lhs, CertificationReport, ConstantsTable};

/// `1.3 sin(πx) sin(πy) e^{−25(x−½)² − 25(y−½)²}`.
pub fn initial_density(x: f64, y: f64) -> f64 {
    use std::f64::consts::PI;
    1.3 * (PI * x).sin() * (PI * y).sin() * (-25.0 * (x - 0.5).powi(2) - 25.0 * (y - 0.5).powi(2)).exp()
}

/// `1.3 sin(πx) e^{−25(x−½)²}`.
pub fn initial_density_1d(x: f64) -> f64 {
    use std::f64::consts::PI;
    1.3 * (PI * x).sin() * (-25.0 * (x - 0.5).powi(2)).exp()
}

/// Cell averages of `f` by tensor Gauss quadrature of order `q`. In 1D `f`
/// is called with `y = 0`.
pub fn cell_averages(mesh: &Arc<Mesh>, f: &dyn Fn(f64, f64) -> f64, q: usize) -> Result<CellField> {
    let (xg, wg) = gauss_legendre(q);
    let v = match &**mesh {
        Mesh::OneD(m) => {
            let x = m.interfaces();
            (0..m.n_cells())
                .map(|i| {
                    let (a, h) = (x[i], x[i + 1] - x[i]);
                    xg.iter().zip(&wg).map(|(s, w)| w * f(a + s * h, 0.0)).sum()
                })
                .collect()
        }
        Mesh::TwoD(m) => {
            let h = m.h();
            (0..m.n_cells())
                .map(|i| {
                    let (j, k) = m.coords(i);
                    let (x0, y0) = (j as f64 * h, k as f64 * h);
                    let mut acc = 0.0;
                    for (sy, wy) in xg.iter().zip(&wg) {
                        for (sx, wx) in xg.iter().zip(&wg) {
                            acc += wx * wy * f(x0 + sx * h, y0 + sy * h);
                        }
                    }
                    acc
                })
                .collect()
        }
    };
    CellField::new(mesh.clone(), v)
}

/// One row per time level; row 0 is the initial state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunRow {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    /// `1 − Δt / Δt_CFL` of the step ending here.
    pub cfl_margin: f64,
    pub int_r1_sq: f64,
    pub int_r2_sq: f64,
    pub int_r3_sq: f64,
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a_gamma: f64,
    pub e: f64,
    pub condition_lhs: f64,
    pub certified: bool,
    pub snapshot: NormSnapshot,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub config: RunConfig,
    pub rows: Vec<RunRow>,
    pub slabs: Vec<SlabResidual>,
    pub series: ResidualSeries,
    pub z1: f64,
    pub constants: ConstantsTable,
    pub report: CertificationReport,
    /// Largest relative mass deviation from the initial mass.
    pub mass_drift: f64,
    pub wall_seconds: f64,
}

impl RunRecord {
    /// `A` at the last computed time.
    pub fn a_final(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.a)
    }

    pub fn final_row(&self) -> &RunRow {
        self.rows.last().expect("a run record has at least the initial row")
    }
}

fn build_mesh(cfg: &RunConfig) -> Result<Arc<Mesh>> {
    let m = match (cfg.dim, &cfg.interfaces) {
        (1, Some(x)) => Mesh::from(Mesh1D::new(x)?),
        (1, None) => Mesh::from(Mesh1D::uniform(cfg.n, 1.0)?),
        _ => Mesh::from(Mesh2D::new(cfg.n, 1.0)?),
    };
    Ok(Arc::new(m))
}

/// Runs the experiment of `cfg` from the default initial datum.
pub fn run(cfg: &RunConfig) -> Result<RunRecord> {
    if cfg.dim == 1 {
        run_with(cfg, &|x, _| initial_density_1d(x))
    } else {
        run_with(cfg, &initial_density)
    }
}

/// Runs the experiment of `cfg` from the initial datum `rho0`.
pub fn run_with(cfg: &RunConfig, rho0: &dyn Fn(f64, f64) -> f64) -> Result<RunRecord> {
    cfg.validate()?;
    let clock = Instant::now();
    let mesh = build_mesh(cfg)?;
    let constants = ConstantsTable::with_overrides(cfg.gamma, cfg.dim, cfg.constants)?;
    let elliptic = EllipticSystem::new(mesh.clone(), cfg.lumping);
    let mut stepper = Stepper::new(
        mesh.clone(),
        cfg.gamma,
        StepOptions {
            cfl_safety: cfg.cfl_safety,
            allow_cfl_violation: cfg.allow_cfl_violation,
            ..StepOptions::default()
        },
    );
    let mut evaluator = ResidualEvaluator::with_quad_order(cfg.gamma, cfg.quad_order);

    let rho = Arc::new(cell_averages(&mesh, rho0, cfg.quad_order)?);
    if rho.min() < 0.0 {
        return Err(Error::Config("initial density takes negative cell averages".into()));
    }
    let c = Arc::new(elliptic.solve(&rho.to_nodal())?);
    let z1 = match cfg.z1_policy {
        Z1Policy::L2 => z1_initial(rho0, &rho.to_nodal(), cfg.quad_order.max(2)),
        Z1Policy::Zero => 0.0,
    };
    let mass0 = rho.mass();
    let snap0 = evaluator.snapshot(0.0, &rho, &c)?;
    let a0 = a_gamma(&snap0, &constants);
    let lhs0 = condition_lhs(z1, 1.0, 0.0, &constants);
    let mut rows = vec![RunRow {
        step: 0,
        t: 0.0,
        mass: mass0,
        min_rho: rho.min(),
        max_rho: rho.max(),
        cfl_margin: f64::NAN,
        a: z1,
        a1: z1,
        a2: z1,
        a3: z1,
        a_gamma: a0,
        e: 1.0,
        condition_lhs: lhs0,
        certified: lhs0 <= 1.0,
        snapshot: snap0,
        ..RunRow::default()
    }];
    let mut series = ResidualSeries::new(0.0, z1);
    let mut rates = vec![a0];
    let mut slabs = Vec::new();
    let mut history = vec![State { t: 0.0, rho, c }];
    let mut integral = 0.0;
    let mut mass_drift = 0.0f64;

    let steps = cfg.n_steps();
    let dt_nominal = cfg.step_size();
    for k in 0..steps {
        let t_prev = history.last().unwrap().t;
        let t_next = if cfg.dt.is_some() {
            ((k + 1) as f64 * dt_nominal).min(cfg.t_final)
        } else {
            cfg.t_final * (k + 1) as f64 / steps as f64
        };
        let dt = t_next - t_prev;
        let last = history.last().unwrap();
        let res = stepper.step(&last.rho, &last.c, dt).map_err(|e| match e {
            Error::Cfl { dt, limit, .. } => Error::Cfl { step: k, dt, limit },
            other => other,
        })?;
        let rho = Arc::new(res.rho);
        if rho.min() < 0.0 {
            return Err(Error::Invariant {
                step: k,
                what: format!("negative density {:e}", rho.min()),
            });
        }
        let mass = rho.mass();
        let drift = if mass0 > 0.0 { (mass - mass0).abs() / mass0 } else { mass.abs() };
        mass_drift = mass_drift.max(drift);
        let c = Arc::new(elliptic.solve(&rho.to_nodal())?);
        history.push(State { t: t_next, rho, c });
        if history.len() > 3 {
            history.remove(0);
        }
        let slab = make_slab(&history, cfg.first_slab_policy)?;
        let mut sr = evaluator.integrate(&slab, None)?;
        // `make_slab` counts from the retained window only
        sr.index = k;
        series.push(&sr);
        let rate = a_gamma(&sr.snapshot, &constants);
        integral += 0.5 * dt * (rate + rates.last().unwrap());
        rates.push(rate);
        let e = integral.exp();
        let a = *series.a.last().unwrap();
        let lhs = condition_lhs(a, e, t_next, &constants);
        let cur = history.last().unwrap();
        rows.push(RunRow {
            step: k + 1,
            t: t_next,
            mass,
            min_rho: cur.rho.min(),
            max_rho: cur.rho.max(),
            cfl_margin: 1.0 - dt / res.cfl_limit,
            int_r1_sq: sr.r1_sq,
            int_r2_sq: sr.r2_sq,
            int_r3_sq: sr.r3_sq,
            a,
            a1: *series.a1.last().unwrap(),
            a2: *series.a2.last().unwrap(),
            a3: *series.a3.last().unwrap(),
            a_gamma: rate,
            e,
            condition_lhs: lhs,
            certified: lhs <= 1.0 && rows.last().unwrap().certified,
            snapshot: sr.snapshot,
        });
        slabs.push(sr);
        if (k + 1) % (steps / 10).max(1) == 0 {
            log::info!("step {}/{steps} t = {t_next:.4e} A = {a:.4e} lhs = {lhs:.3e}", k + 1);
        }
        if cfg.stop_after_violation && !rows.last().unwrap().certified {
            log::info!("condition violated at t = {t_next:e}; stopping");
            break;
        }
    }
    let report = certify(&series.times, &series.a, &rates, cfg.t_final, &constants)?;
    Ok(RunRecord {
        config: cfg.clone(),
        rows,
        slabs,
        series,
        z1,
        constants,
        report,
        mass_drift,
        wall_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Re-evaluates the condition of a stored run under `constants`.
pub fn recertify(stored: &StoredRun, constants: &ConstantsTable) -> Result<CertificationReport> {
    let times: Vec<f64> = stored.rows.iter().map(|r| r.t).collect();
    let a: Vec<f64> = stored.rows.iter().map(|r| r.a).collect();
    let rates: Vec<f64> = stored.rows.iter().map(|r| a_gamma(&r.snapshot, constants)).collect();
    certify(&times, &a, &rates, stored.t_final, constants)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_density_values() {
        assert!((initial_density(0.5, 0.5) - 1.3).abs() < 1e-15);
        assert_eq!(initial_density(0.0, 0.4), 0.0);
        let expect = 1.3 * 0.809_016_994_374_947_4 * (-1.0f64).exp();
        assert!((initial_density(0.3, 0.5) - expect).abs() < 1e-14);
    }

    #[test]
    fn zero_density_stays_zero() {
        let cfg = RunConfig {
            dim: 1,
            gamma: 2.0,
            n: 16,
            ..RunConfig::default()
        };
        let rec = run_with(&cfg, &|_, _| 0.0).unwrap();
        assert_eq!(rec.rows.len(), 17);
        assert!(rec.rows.iter().all(|r| r.max_rho == 0.0 && r.a == rec.z1));
        assert_eq!(rec.z1, 0.0);
    }

    #[test]
    fn short_1d_run_is_consistent() {
        let cfg = RunConfig {
            dim: 1,
            gamma: 1.5,
            n: 32,
            ..RunConfig::default()
        };
        let rec = run(&cfg).unwrap();
        assert_eq!(rec.rows.len(), 33);
        assert!(rec.mass_drift <= 1e-12);
        assert!(rec.rows.windows(2).all(|w| w[1].a >= w[0].a && w[1].t > w[0].t));
        assert_eq!(rec.a_final(), *rec.series.a.last().unwrap());
        assert_eq!(rec.report.lhs.len(), rec.rows.len());
        for (row, lhs) in rec.rows.iter().zip(&rec.report.lhs) {
            assert!((row.condition_lhs - lhs).abs() <= 1e-12 * lhs.abs());
        }
    }
}
