//! Run configuration and the flat `key = value` file format.
//!
//! Recognized keys (one per line, `#` starts a comment):
//!
//! | key | value |
//! |-----|-------|
//! | `dim` | `1` or `2` |
//! | `gamma` | exponent in `[1, 3]` |
//! | `n` | cells per direction |
//! | `tfinal` | final time |
//! | `dt` | explicit step size (default `tfinal / steps`) |
//! | `steps` | number of steps (default `n`) |
//! | `interfaces` | 1D interface list `0, x₁, ..., 1` |
//! | `interfaces_file` | file with the 1D interface list |
//! | `lumping` | `true` / `false` |
//! | `quad_order` | Gauss points per direction |
//! | `first_slab_policy` | `shift`, `hold`, `extrapolate` |
//! | `z1_policy` | `l2` or `zero` |
//! | `c_s`, `c_s_prime`, `c_s_tilde`, `c_ell` | constant overrides |
//! | `cfl_safety` | admitted fraction of the CFL limit |
//! | `allow_cfl_violation` | `true` / `false` |
//! | `stop_after_violation` | `true` / `false` |
//! | `out` | CSV path |
//! | `threads` | worker threads for convergence studies |
//! | `seed` | RNG seed of the self-test |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fields::DEFAULT_QUAD_ORDER;
use crate::reconstruct::FirstSlabPolicy;
use crate::stability::ConstantOverrides;

/// How `z₁(0)` enters `A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Z1Policy {
    /// `½ ‖ρ₀ − ρ̃⁰‖²_{L²}` by quadrature.
    #[default]
    L2,
    /// The discrete initial datum is declared exact.
    Zero,
}

impl fmt::Display for Z1Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Z1Policy::L2 => "l2",
            Z1Policy::Zero => "zero",
        })
    }
}

impl FromStr for Z1Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(Z1Policy::L2),
            "zero" => Ok(Z1Policy::Zero),
            other => Err(Error::Config(format!("unknown z1 policy '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub gamma: f64,
    pub t_final: f64,
    pub n: usize,
    /// Explicit 1D interfaces; overrides `n`.
    pub interfaces: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub lumping: bool,
    pub quad_order: usize,
    pub constants: ConstantOverrides,
    pub first_slab_policy: FirstSlabPolicy,
    pub z1_policy: Z1Policy,
    pub cfl_safety: f64,
    pub allow_cfl_violation: bool,
    pub stop_after_violation: bool,
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            gamma: 1.0,
            t_final: 5e-3,
            n: 100,
            interfaces: None,
            dt: None,
            steps: None,
            lumping: true,
            quad_order: DEFAULT_QUAD_ORDER,
            constants: ConstantOverrides::default(),
            first_slab_policy: FirstSlabPolicy::default(),
            z1_policy: Z1Policy::default(),
            cfl_safety: 1.0,
            allow_cfl_violation: false,
            stop_after_violation: false,
            out: None,
            threads: 1,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse value '{v}' of key '{key}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("key '{key}' expects a boolean, got '{v}'"))),
    }
}

/// Numbers separated by commas or whitespace.
pub fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse("interfaces", s))
        .collect()
}

impl RunConfig {
    /// Number of time steps.
    pub fn n_steps(&self) -> usize {
        match (self.steps, self.dt) {
            (Some(s), _) => s,
            (None, Some(dt)) => (self.t_final / dt - 1e-9).ceil().max(1.0) as usize,
            (None, None) => self.n_cells_per_dim(),
        }
    }

    pub fn n_cells_per_dim(&self) -> usize {
        match &self.interfaces {
            Some(v) if self.dim == 1 => v.len().saturating_sub(1),
            _ => self.n,
        }
    }

    /// Nominal step size.
    pub fn step_size(&self) -> f64 {
        self.dt.unwrap_or(self.t_final / self.n_steps() as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dim != 1 && self.dim != 2 {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if !(1.0..=3.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [1, 3], got {}", self.gamma));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return bad(format!("tfinal must be positive, got {}", self.t_final));
        }
        if self.interfaces.is_some() && self.dim != 1 {
            return bad("an interface list is only valid in 1D".into());
        }
        if self.n_cells_per_dim() < 2 {
            return bad("need at least two cells per direction".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if self.steps == Some(0) {
            return bad("steps must be positive".into());
        }
        if self.quad_order == 0 {
            return bad("quad_order must be positive".into());
        }
        if !(self.cfl_safety > 0.0) {
            return bad(format!("cfl_safety must be positive, got {}", self.cfl_safety));
        }
        if self.threads == 0 {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "dim" => self.dim = parse(key, v)?,
            "gamma" => self.gamma = parse(key, v)?,
            "n" => self.n = parse(key, v)?,
            "tfinal" | "t_final" => self.t_final = parse(key, v)?,
            "dt" => self.dt = Some(parse(key, v)?),
            "steps" => self.steps = Some(parse(key, v)?),
            "interfaces" => self.interfaces = Some(parse_list(v)?),
            "interfaces_file" => {
                let p = resolve(base, v);
                self.interfaces = Some(parse_list(&std::fs::read_to_string(&p)?)?);
            }
            "lumping" => self.lumping = parse_bool(key, v)?,
            "quad_order" => self.quad_order = parse(key, v)?,
            "first_slab_policy" => self.first_slab_policy = v.parse()?,
            "z1_policy" => self.z1_policy = v.parse()?,
            "c_s" => self.constants.c_s = Some(parse(key, v)?),
            "c_s_prime" => self.constants.c_s_prime = Some(parse(key, v)?),
            "c_s_tilde" => self.constants.c_s_tilde = Some(parse(key, v)?),
            "c_ell" => self.constants.c_ell = Some(parse(key, v)?),
            "cfl_safety" => self.cfl_safety = parse(key, v)?,
            "allow_cfl_violation" => self.allow_cfl_violation = parse_bool(key, v)?,
            "stop_after_violation" => self.stop_after_violation = parse_bool(key, v)?,
            "out" => self.out = Some(resolve(base, v)),
            "threads" => self.threads = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies the assignments of a config file's text.
    pub fn apply_text(&mut self, text: &str, base: Option<&Path>) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            self.set(k, v, base)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(&std::fs::read_to_string(path)?, path.parent())?;
        Ok(c)
    }
}

fn resolve(base: Option<&Path>, v: &str) -> PathBuf {
    let p = PathBuf::from(v);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_keys_round_trip() {
        let mut c = RunConfig::default();
        c.apply_text(
            "dim = 1 # comment\n\ngamma=1.5\ninterfaces = 0, 0.3 0.7,1\nlumping = false\nc_s_tilde = 4\nz1_policy = zero\n",
            None,
        )
        .unwrap();
        assert_eq!(c.dim, 1);
        assert_eq!(c.gamma, 1.5);
        assert_eq!(c.interfaces.as_deref(), Some(&[0.0, 0.3, 0.7, 1.0][..]));
        assert!(!c.lumping);
        assert_eq!(c.constants.c_s_tilde, Some(4.0));
        assert_eq!(c.z1_policy, Z1Policy::Zero);
        assert_eq!(c.n_cells_per_dim(), 3);
        c.validate().unwrap();
    }

    #[test]
    fn bad_lines_name_the_line() {
        let mut c = RunConfig::default();
        let e = c.apply_text("dim = 2\nbogus = 1\n", None).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(c.apply_text("gamma 2", None).is_err());
    }

    #[test]
    fn step_count_follows_dt() {
        let c = RunConfig {
            t_final: 1.0,
            dt: Some(0.3),
            ..RunConfig::default()
        };
        assert_eq!(c.n_steps(), 4);
        let c = RunConfig {
            n: 50,
            ..RunConfig::default()
        };
        assert_eq!(c.n_steps(), 50);
        assert_eq!(c.step_size(), 1e-4);
    }
}
