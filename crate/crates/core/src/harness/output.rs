//! CSV and gnuplot output of a run.
//!
//! The CSV starts with one `#` metadata line naming the schema version and
//! the run parameters, followed by a header row and one row per time
//! level. Floats carry 17 significant digits.

use std::io::Write;
use std::path::Path;

use super::{RunRecord, RunRow};
use crate::error::{Error, Result};
use crate::residual::NormSnapshot;

pub const CSV_SCHEMA: &str = "ks-certify-run/1";

const HEADER: [&str; 24] = [
    "step",
    "t",
    "mass",
    "min_rho",
    "max_rho",
    "cfl_margin",
    "int_r1_sq",
    "int_r2_sq",
    "int_r3_sq",
    "A",
    "A1",
    "A2",
    "A3",
    "a_gamma",
    "E",
    "condition_lhs",
    "certified",
    "rho_inf",
    "rho_pow_l3_sq",
    "rho_l3",
    "grad_c_l3",
    "grad_c_inf",
    "eta_c",
    "z1",
];

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn row_fields(r: &RunRow, z1: f64) -> Vec<String> {
    let s = &r.snapshot;
    let mut out = vec![r.step.to_string()];
    out.extend(
        [
            r.t,
            r.mass,
            r.min_rho,
            r.max_rho,
            r.cfl_margin,
            r.int_r1_sq,
            r.int_r2_sq,
            r.int_r3_sq,
            r.a,
            r.a1,
            r.a2,
            r.a3,
            r.a_gamma,
            r.e,
            r.condition_lhs,
        ]
        .map(f),
    );
    out.push((r.certified as u8).to_string());
    out.extend([s.rho_inf, s.rho_pow_l3_sq, s.rho_l3, s.grad_c_l3, s.grad_c_inf, s.eta_c, z1].map(f));
    out
}

pub fn write_csv(rec: &RunRecord, w: impl Write) -> Result<()> {
    let mut w = std::io::BufWriter::new(w);
    let c = &rec.config;
    writeln!(
        w,
        "# {CSV_SCHEMA} dim={} gamma={} n={} tfinal={} steps={} lumping={} quad_order={} first_slab_policy={} z1_policy={}",
        c.dim,
        c.gamma,
        c.n_cells_per_dim(),
        c.t_final,
        c.n_steps(),
        c.lumping,
        c.quad_order,
        c.first_slab_policy,
        c.z1_policy
    )?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in &rec.rows {
        out.write_record(row_fields(r, rec.z1))?;
    }
    out.flush()?;
    Ok(())
}

/// Two-column files `<stem>.A.dat` (`t A`) and `<stem>.lhs.dat`
/// (`t condition_lhs`) next to `csv_path`.
pub fn write_gnuplot(rec: &RunRecord, csv_path: &Path) -> Result<()> {
    let stem = csv_path.with_extension("");
    for (suffix, col) in [("A", 0usize), ("lhs", 1)] {
        let p = stem.with_extension(format!("{suffix}.dat"));
        let mut w = std::io::BufWriter::new(std::fs::File::create(&p)?);
        writeln!(w, "# t {}", if col == 0 { "A" } else { "condition_lhs" })?;
        for r in &rec.rows {
            let v = if col == 0 { r.a } else { r.condition_lhs };
            writeln!(w, "{} {}", f(r.t), f(v))?;
        }
    }
    Ok(())
}

/// What [`read_csv`] recovers from a stored run.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredRun {
    pub dim: usize,
    pub gamma: f64,
    pub t_final: f64,
    pub rows: Vec<RunRow>,
    pub z1: f64,
}

fn meta<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

pub fn read_csv(path: &Path) -> Result<StoredRun> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("");
    if !first.starts_with('#') || !first.contains(CSV_SCHEMA) {
        return Err(Error::Config(format!(
            "{} is not a {CSV_SCHEMA} file",
            path.display()
        )));
    }
    let get = |k: &str| -> Result<f64> {
        meta(first, k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Config(format!("metadata key '{k}' missing")))
    };
    let (dim, gamma, t_final) = (get("dim")? as usize, get("gamma")?, get("tfinal")?);
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(Error::Config("unexpected CSV header".into()));
    }
    let mut rows = Vec::new();
    let mut z1 = 0.0;
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::Config(format!("bad number '{}' in column {}", &rec[i], HEADER[i])))
        };
        z1 = num(23)?;
        rows.push(RunRow {
            step: num(0)? as usize,
            t: num(1)?,
            mass: num(2)?,
            min_rho: num(3)?,
            max_rho: num(4)?,
            cfl_margin: num(5)?,
            int_r1_sq: num(6)?,
            int_r2_sq: num(7)?,
            int_r3_sq: num(8)?,
            a: num(9)?,
            a1: num(10)?,
            a2: num(11)?,
            a3: num(12)?,
            a_gamma: num(13)?,
            e: num(14)?,
            condition_lhs: num(15)?,
            certified: num(16)? != 0.0,
            snapshot: NormSnapshot {
                t: num(1)?,
                rho_inf: num(17)?,
                rho_pow_l3_sq: num(18)?,
                rho_l3: num(19)?,
                grad_c_l3: num(20)?,
                grad_c_inf: num(21)?,
                eta_c: num(22)?,
            },
        });
    }
    Ok(StoredRun {
        dim,
        gamma,
        t_final,
        rows,
        z1,
    })
}
