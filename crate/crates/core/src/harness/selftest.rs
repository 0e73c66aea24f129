//! Randomized checks of the scalar inequalities behind the stability
//! estimate.
//!
//! Margins are normalized by `max(1, |larger side|)`, so a check passes when
//! its worst margin is at least `−1e−12`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::stability::{
    beta, beta_high, beta_low, c_gamma, c_gamma_high, c_gamma_low, f_lower_bound, f_secant, lemma_checks, quasi_norm_margins,
    z1_power_comparison,
};

pub const MARGIN_TOL: f64 = -1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub trials: usize,
    pub worst_margin: f64,
    /// Inputs `(a, b, γ)` at the worst margin.
    pub worst_at: (f64, f64, f64),
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst_margin >= MARGIN_TOL
    }
}

fn rel(margin: f64, scale: f64) -> f64 {
    margin / scale.abs().max(1.0)
}

struct Worst {
    name: &'static str,
    trials: usize,
    margin: f64,
    at: (f64, f64, f64),
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            trials: 0,
            margin: f64::INFINITY,
            at: (0.0, 0.0, 0.0),
        }
    }

    fn add(&mut self, m: f64, at: (f64, f64, f64)) {
        self.trials += 1;
        if m < self.margin {
            self.margin = m;
            self.at = at;
        }
    }

    fn done(self) -> Check {
        Check {
            name: self.name,
            trials: self.trials,
            worst_margin: self.margin,
            worst_at: self.at,
        }
    }
}

/// `F ≥ c_γ (ρ^{γ−1} + ρ̄^{γ−1})` on `[0, 10]² × [1, 3]`.
pub fn check_f_lower_bound(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut w = Worst::new("F lower bound");
    for _ in 0..trials {
        let (r, rb, g) = (rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0), rng.gen_range(1.0..=3.0));
        let f = f_secant(r, rb, g).expect("nonnegative inputs");
        w.add(rel(f - f_lower_bound(r, rb, g), f), (r, rb, g));
    }
    w.done()
}

/// `|u^α − ū^α| ≥ |u − ū|^α` for `u, ū ∈ [0, 10]`, `α ∈ [1, 3]`.
pub fn check_power_difference(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut w = Worst::new("power difference lemma");
    for _ in 0..trials {
        let (u, ub, a) = (rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0), rng.gen_range(1.0..=3.0));
        let m = lemma_checks(u, ub, a, 1.0, 1.0, 2.0).power_difference;
        w.add(rel(m, (u.powf(a) - ub.powf(a)).abs()), (u, ub, a));
    }
    w.done()
}

/// `|ρ^{γ−1} − ρ̄^{γ−1}| |ρ − ρ̄| ≤ ((ρ^γ − ρ̄^γ)(ρ − ρ̄))^{γ/(γ+1)}` for
/// `ρ, ρ̄ ∈ (0, 10]`, `γ ∈ (1, 3]`.
pub fn check_product_lemma(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut w = Worst::new("product lemma");
    for _ in 0..trials {
        let r = 10.0 - rng.gen_range(0.0..10.0);
        let rb = 10.0 - rng.gen_range(0.0..10.0);
        let g = 3.0 - rng.gen_range(0.0..2.0);
        let m = lemma_checks(1.0, 1.0, 1.0, r, rb, g).product;
        let scale = ((r.powf(g) - rb.powf(g)) * (r - rb)).powf(g / (g + 1.0));
        w.add(rel(m, scale), (r, rb, g));
    }
    w.done()
}

/// The four quasi-norm margins on `[0, 10]² × (1, 3]`, in the order
/// displayed lower, displayed upper, sharp lower, sharp upper.
pub fn check_quasi_norm(rng: &mut ChaCha8Rng, trials: usize) -> [Check; 4] {
    let mut w = [
        Worst::new("quasi-norm lower bound (displayed, constant 1)"),
        Worst::new("quasi-norm upper bound (displayed, constant (g+1)/2)"),
        Worst::new("quasi-norm lower bound (constant 4g/(g+1)^2)"),
        Worst::new("quasi-norm upper bound (constant 1)"),
    ];
    for _ in 0..trials {
        let (r, rb) = (rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0));
        let g = 3.0 - rng.gen_range(0.0..2.0);
        let m = quasi_norm_margins(r, rb, g);
        let q = (r.powf(g) - rb.powf(g)) * (r - rb);
        let p = (r.powf((g + 1.0) / 2.0) - rb.powf((g + 1.0) / 2.0)).powi(2);
        let s = q.max(p * (g + 1.0) / 2.0);
        w[0].add(rel(m.lower_displayed, s), (r, rb, g));
        w[1].add(rel(m.upper_displayed, s), (r, rb, g));
        w[2].add(rel(m.lower_sharp, s), (r, rb, g));
        w[3].add(rel(m.upper_sharp, s), (r, rb, g));
    }
    w.map(Worst::done)
}

/// Agreement of the two branch formulas at `γ = 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchGaps {
    /// `|γ/2 − γ/2^{γ−1}|` at `γ = 2`.
    pub c_gamma_at_2: f64,
    /// `|(3−γ)/(2(γ−1)) − (γ−1)/2|` at `γ = 2`.
    pub beta_at_2: f64,
    /// `|c_γ(2−ε) − c_γ(2+ε)|`, `ε = 1e−9`.
    pub c_gamma_jump: f64,
    pub beta_jump: f64,
    /// Largest change of either side of the `z₁` power comparison across
    /// `2 ± ε`, relative to its size.
    pub z1_jump: f64,
}

pub fn branch_gaps() -> BranchGaps {
    let eps = 1e-9;
    let (lo, hi) = (2.0 - eps, 2.0 + eps);
    let mut z = 0.0f64;
    for zz in [0.01, 0.5, 1.0, 2.0, 10.0] {
        let (l1, r1) = z1_power_comparison(zz, lo);
        let (l2, r2) = z1_power_comparison(zz, hi);
        z = z.max((l1 - l2).abs().max((r1 - r2).abs()) / r1.max(1.0));
    }
    BranchGaps {
        c_gamma_at_2: (c_gamma_low(2.0) - c_gamma_high(2.0)).abs(),
        beta_at_2: (beta_low(2.0) - beta_high(2.0)).abs(),
        c_gamma_jump: (c_gamma(lo) - c_gamma(hi)).abs(),
        beta_jump: (beta(lo) - beta(hi)).abs(),
        z1_jump: z,
    }
}

/// All randomized checks with `trials` samples each.
pub fn run_all(seed: u64, trials: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        check_f_lower_bound(&mut rng, trials),
        check_power_difference(&mut rng, trials),
        check_product_lemma(&mut rng, trials),
    ];
    out.extend(check_quasi_norm(&mut rng, trials));
    out
}
