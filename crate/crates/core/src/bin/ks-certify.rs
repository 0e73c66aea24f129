use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ks_certify::harness::{self, selftest, RunConfig};
use ks_certify::stability::ConstantsTable;
use ks_certify::Error;

#[derive(Parser)]
#[command(name = "ks-certify", version, about = "Keller-Segel finite-volume solver with a posteriori certification")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV record.
    Run(Common),
    /// Run a mesh sequence and print the EOC table.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Mesh sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
        ns: Vec<usize>,
    },
    /// Re-evaluate the stability condition of a stored run.
    Certify {
        /// CSV written by `run`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        constants: ConstantFlags,
    },
    /// Randomized checks of the scalar inequalities.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

#[derive(Args, Default)]
struct ConstantFlags {
    #[arg(long)]
    c_s: Option<f64>,
    #[arg(long)]
    c_s_prime: Option<f64>,
    #[arg(long)]
    c_s_tilde: Option<f64>,
    #[arg(long)]
    c_ell: Option<f64>,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lumping: Option<bool>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    interfaces_file: Option<PathBuf>,
    #[arg(long)]
    first_slab_policy: Option<String>,
    #[arg(long)]
    z1_policy: Option<String>,
    #[arg(long)]
    cfl_safety: Option<f64>,
    #[arg(long)]
    allow_cfl_violation: bool,
    #[arg(long)]
    stop_after_violation: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "KS_CERTIFY_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    constants: ConstantFlags,
}

impl Common {
    fn config(&self) -> ks_certify::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let mut set = |k: &str, v: Option<String>| -> ks_certify::Result<()> {
            match v {
                Some(v) => c.set(k, &v, None),
                None => Ok(()),
            }
        };
        let s = |v: &Option<f64>| v.map(|x| x.to_string());
        set("dim", self.dim.map(|v| v.to_string()))?;
        set("gamma", s(&self.gamma))?;
        set("n", self.n.map(|v| v.to_string()))?;
        set("tfinal", s(&self.tfinal))?;
        set("dt", s(&self.dt))?;
        set("steps", self.steps.map(|v| v.to_string()))?;
        set("lumping", self.lumping.map(|v| v.to_string()))?;
        set("quad_order", self.quad_order.map(|v| v.to_string()))?;
        set("interfaces_file", self.interfaces_file.as_ref().map(|p| p.display().to_string()))?;
        set("first_slab_policy", self.first_slab_policy.clone())?;
        set("z1_policy", self.z1_policy.clone())?;
        set("cfl_safety", s(&self.cfl_safety))?;
        set("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        set("threads", self.threads.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("c_s", s(&self.constants.c_s))?;
        set("c_s_prime", s(&self.constants.c_s_prime))?;
        set("c_s_tilde", s(&self.constants.c_s_tilde))?;
        set("c_ell", s(&self.constants.c_ell))?;
        if self.allow_cfl_violation {
            c.allow_cfl_violation = true;
        }
        if self.stop_after_violation {
            c.stop_after_violation = true;
        }
        c.validate()?;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Geometry(_) => 2,
        Error::Cfl { .. } => 3,
        Error::Solver { .. } | Error::Invariant { .. } => 4,
        _ => 1,
    }
}

fn print_report(r: &ks_certify::stability::CertificationReport) {
    println!("mode                {}", r.mode);
    match r.certified_until {
        Some(t) => println!("certified until     t = {t:.6e}"),
        None => println!("certified until     (condition fails at the initial time)"),
    }
    if let Some(t) = r.first_violation {
        println!("first violation     t = {t:.6e}");
    }
    if let Some(b) = r.bound {
        println!("error bound 8AE     {b:.6e}");
    }
    println!("covers final time   {}", r.covers_final_time);
    if r.surrogate {
        println!("note                a(t) uses discrete gradient norms (uncertified surrogate)");
    }
}

fn cmd_run(common: &Common) -> ks_certify::Result<()> {
    let cfg = common.config()?;
    let rec = harness::run(&cfg)?;
    let last = rec.final_row();
    println!("steps               {}", rec.rows.len() - 1);
    println!("t                   {:.6e}", last.t);
    println!("A                   {:.6e}", last.a);
    println!("A1 A2 A3            {:.6e} {:.6e} {:.6e}", last.a1, last.a2, last.a3);
    println!("z1(0)               {:.6e}", rec.z1);
    println!("min rho             {:.6e}", rec.rows.iter().map(|r| r.min_rho).fold(f64::INFINITY, f64::min));
    println!("mass drift          {:.3e}", rec.mass_drift);
    println!("wall time           {:.2} s", rec.wall_seconds);
    print_report(&rec.report);
    if let Some(p) = &cfg.out {
        harness::write_csv(&rec, std::fs::File::create(p)?)?;
        harness::write_gnuplot(&rec, p)?;
        println!("wrote               {}", p.display());
    }
    Ok(())
}

fn cmd_converge(common: &Common, ns: &[usize]) -> ks_certify::Result<()> {
    let cfg = common.config()?;
    let (table, _) = harness::convergence_study(&cfg, ns)?;
    print!("{}", table.to_text());
    if let Some(p) = &cfg.out {
        table.write_csv(std::fs::File::create(p)?)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_certify(input: &PathBuf, f: &ConstantFlags) -> ks_certify::Result<()> {
    let stored = harness::read_csv(input)?;
    let overrides = ks_certify::stability::ConstantOverrides {
        c_s: f.c_s,
        c_s_prime: f.c_s_prime,
        c_s_tilde: f.c_s_tilde,
        c_ell: f.c_ell,
    };
    let consts = ConstantsTable::with_overrides(stored.gamma, stored.dim, overrides)?;
    let report = harness::recertify(&stored, &consts)?;
    println!("gamma               {}", stored.gamma);
    println!("A(T)                {:.6e}", stored.rows.last().map_or(0.0, |r| r.a));
    print_report(&report);
    Ok(())
}

fn cmd_selftest(seed: u64, trials: usize) -> bool {
    let mut ok = true;
    for c in selftest::run_all(seed, trials) {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        ok &= c.passed();
        println!(
            "{status}  {:<55} worst margin {:+.3e} at ({:.4}, {:.4}, gamma {:.4})",
            c.name, c.worst_margin, c.worst_at.0, c.worst_at.1, c.worst_at.2
        );
    }
    let g = selftest::branch_gaps();
    let branch_ok = g.c_gamma_at_2 <= 1e-12 && g.beta_at_2 <= 1e-12;
    ok &= branch_ok;
    println!(
        "{}  branch agreement at gamma = 2 (c_gamma {:.1e}, beta {:.1e}; jumps across 2 +- 1e-9: {:.1e}, {:.1e}, z1 {:.1e})",
        if branch_ok { "PASS" } else { "FAIL" },
        g.c_gamma_at_2,
        g.beta_at_2,
        g.c_gamma_jump,
        g.beta_jump,
        g.z1_jump
    );
    ok
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Command::Run(c) => cmd_run(c),
        Command::Converge { common, ns } => cmd_converge(common, ns),
        Command::Certify { input, constants } => cmd_certify(input, constants),
        Command::Selftest { seed, trials } => {
            return if cmd_selftest(*seed, *trials) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
