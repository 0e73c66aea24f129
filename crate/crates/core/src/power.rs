//! The diffusion nonlinearity `s ↦ s^γ` and its coefficient `f(s) = s^{γ-1}`.
//!
//! Common exponents take closed-form fast paths. `f(0) = 1` only for `γ = 1`.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    gamma: f64,
    kind: Kind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Linear,
    Sqrt,
    Quadratic,
    Cubic,
    General,
}

impl PowerLaw {
    pub fn new(gamma: f64) -> Self {
        let kind = if gamma == 1.0 {
            Kind::Linear
        } else if gamma == 1.5 {
            Kind::Sqrt
        } else if gamma == 2.0 {
            Kind::Quadratic
        } else if gamma == 3.0 {
            Kind::Cubic
        } else {
            Kind::General
        };
        Self { gamma, kind }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_linear(&self) -> bool {
        self.kind == Kind::Linear
    }

    /// `f(s) = s^{γ-1}` for `s ≥ 0`; negative arguments are clamped to 0.
    #[inline]
    pub fn coef(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self.kind {
            Kind::Linear => 1.0,
            Kind::Sqrt => s.sqrt(),
            Kind::Quadratic => s,
            Kind::Cubic => s * s,
            Kind::General => s.powf(self.gamma - 1.0),
        }
    }

    /// `s^γ` for `s ≥ 0`; negative arguments are clamped to 0.
    #[inline]
    pub fn pow(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self.kind {
            Kind::Linear => s,
            Kind::Sqrt => s * s.sqrt(),
            Kind::Quadratic => s * s,
            Kind::Cubic => s * s * s,
            Kind::General => s.powf(self.gamma),
        }
    }

    /// Diffusion coefficient `γ f(s)`.
    #[inline]
    pub fn diffusivity(&self, s: f64) -> f64 {
        self.gamma * self.coef(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_paths_match_powf() {
        for &g in &[1.5, 2.0, 3.0] {
            let p = PowerLaw::new(g);
            for &s in &[0.0, 0.3, 1.0, 2.7] {
                let want: f64 = if s == 0.0 { 0.0 } else { f64::powf(s, g - 1.0) };
                assert!((p.coef(s) - want).abs() <= 1e-14 * want.max(1.0));
                assert!((p.pow(s) - f64::powf(s, g)).abs() <= 1e-14 * s.powf(g).max(1.0));
            }
        }
        assert_eq!(PowerLaw::new(1.0).coef(0.0), 1.0);
        assert_eq!(PowerLaw::new(1.2).coef(0.0), 0.0);
    }
}
