//! Mesh convergence studies and experimental orders of convergence.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{run, RunConfig, RunRecord};
use crate::error::{Error, Result};

/// `log(a_coarse / a_fine) / log(n_fine / n_coarse)`; `log₂` of the ratio
/// when the mesh doubles.
pub fn eoc(a_coarse: f64, a_fine: f64, n_coarse: usize, n_fine: usize) -> f64 {
    if a_coarse == a_fine {
        return 0.0;
    }
    if n_fine == 2 * n_coarse {
        return (a_coarse / a_fine).log2();
    }
    (a_coarse / a_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EocRow {
    pub n: usize,
    /// `[A¹, A², A³, A]` at the final time.
    pub values: [f64; 4],
    /// EOC against the previous row; `None` in the first row.
    pub eoc: Option<[f64; 4]>,
    /// The previous mesh was not half as fine.
    pub general_ratio: bool,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EocTable {
    pub gamma: f64,
    pub rows: Vec<EocRow>,
}

impl EocTable {
    pub fn from_records(records: &[RunRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidArgument("a convergence study needs runs".into()))?;
        let mut rows: Vec<EocRow> = Vec::with_capacity(records.len());
        for rec in records {
            let last = rec.final_row();
            let n = rec.config.n_cells_per_dim();
            let values = [last.a1, last.a2, last.a3, last.a];
            let (eoc_v, general) = match rows.last() {
                Some(p) => {
                    let e = [0, 1, 2, 3].map(|j| eoc(p.values[j], values[j], p.n, n));
                    (Some(e), n != 2 * p.n)
                }
                None => (None, false),
            };
            rows.push(EocRow {
                n,
                values,
                eoc: eoc_v,
                general_ratio: general,
                wall_seconds: rec.wall_seconds,
            });
        }
        Ok(Self {
            gamma: first.config.gamma,
            rows,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "gamma = {}", self.gamma);
        let _ = writeln!(
            s,
            "{:>6}  {:>10} {:>5}  {:>10} {:>5}  {:>10} {:>5}  {:>10} {:>5}",
            "mesh", "A1", "EOC", "A2", "EOC", "A3", "EOC", "A", "EOC"
        );
        for r in &self.rows {
            let _ = write!(s, "{:>6}", r.n);
            for j in 0..4 {
                let e = r.eoc.map_or(String::new(), |e| format!("{:.2}", e[j]));
                let _ = write!(s, "  {:>10.3e} {:>5}", r.values[j], e);
            }
            if r.general_ratio {
                s.push_str("  (non-doubling)");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "gamma", "n", "A1", "eoc_A1", "A2", "eoc_A2", "A3", "eoc_A3", "A", "eoc_A", "general_ratio",
        ])?;
        for r in &self.rows {
            let mut rec = vec![self.gamma.to_string(), r.n.to_string()];
            for j in 0..4 {
                rec.push(format!("{:.16e}", r.values[j]));
                rec.push(r.eoc.map_or(String::new(), |e| format!("{:.16e}", e[j])));
            }
            rec.push((r.general_ratio as u8).to_string());
            out.write_record(rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs `template` for every mesh size in `ns` (default step `T/n`) and
/// tabulates the final residuals. Up to `template.threads` runs execute
/// concurrently.
pub fn convergence_study(template: &RunConfig, ns: &[usize]) -> Result<(EocTable, Vec<RunRecord>)> {
    if ns.len() < 2 {
        return Err(Error::Config("a convergence study needs at least two meshes".into()));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("mesh sizes must increase".into()));
    }
    let configs: Vec<RunConfig> = ns
        .iter()
        .map(|&n| RunConfig {
            n,
            interfaces: None,
            dt: None,
            steps: None,
            out: None,
            ..template.clone()
        })
        .collect();
    let results: Vec<Mutex<Option<Result<RunRecord>>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = template.threads.clamp(1, configs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let r = run(&configs[i]);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });
    let records = results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every run was scheduled"))
        .collect::<Result<Vec<_>>>()?;
    Ok((EocTable::from_records(&records)?, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eoc_of_table_values() {
        assert!((eoc(7.888e-4, 1.880e-4, 100, 200) - 2.07).abs() < 5e-3);
        assert!((eoc(1.479e-3, 3.601e-4, 100, 200) - 2.04).abs() < 5e-3);
        assert_eq!(eoc(1.0, 1.0, 100, 200), 0.0);
        assert!((eoc(9.0, 1.0, 10, 30) - 2.0).abs() < 1e-14);
    }
}
