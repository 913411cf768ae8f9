//! Command-line front end: `list`, `verify`, `simulate` and `curvature`.
//!
//! Each command reads a [`RunConfig`] (JSON, optional) and applies flag
//! overrides on top. Exit codes: 0 when every requested check passes, 1 when
//! a check fails or a run is cut short, 2 for configuration errors.
//!
//! Output files, written to `--out`:
//!
//! * `report.json`: effective config plus the verification or simulation
//!   report, with a stable field order.
//! * `trajectory.csv`: `t, q1..qN, p1..pN`, then one column per monitor.
//! * `curvature.csv`: `q1..qN, numeric, closed, difference`; the last two
//!   are empty where no closed form is known.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{IntegratorConfig, LimitConfig, ParamValue, RunConfig};

use crate::catalog::{build, catalog_ids, limit_of, CatalogEntry};
use crate::coalgebra::{check_poisson_map, PoissonMapReport};
use crate::dynamics::{default_monitors, integrate};
use crate::error::{Error, Result};
use crate::geometry::{scalar_curvature_numeric, Derivatives};
use crate::verify::{classify, limit_check, LimitReport, VerificationReport};

#[derive(Debug, Parser)]
#[command(name = "coalg", version, about = "Build and check superintegrable systems from Poisson coalgebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog ids with their claimed class.
    List,
    /// Check involution, independence, class and optional limits.
    Verify,
    /// Integrate a trajectory and monitor every integral.
    Simulate,
    /// Compare numeric and closed-form scalar curvature.
    Curvature,
}

/// Overrides applied on top of the config file.
#[derive(Debug, Args, Default)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub system: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Flags {
    /// Config file (or defaults) with the flags applied.
    pub fn effective_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.system {
            c.system = v.clone();
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.samples {
            c.samples = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Singular(_) | Error::NoConvergence { .. } => 1,
        _ => 2,
    }
}

/// Parse `args` (program name first), run the command and return the exit
/// code. Human-readable output goes to `out`, errors to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.flags.jobs {
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    // workers run inside the pool; text output is assembled here and
    // written once
    let mut buf = Vec::new();
    let result = pool.install(|| {
        let w = &mut buf;
        match cli.command {
            Command::List => cmd_list(w).map(|_| true),
            Command::Verify => cli.flags.effective_config().and_then(|c| cmd_verify(&c, w)),
            Command::Simulate => cli.flags.effective_config().and_then(|c| cmd_simulate(&c, w)),
            Command::Curvature => cli.flags.effective_config().and_then(|c| cmd_curvature(&c, w)),
        }
    });
    let _ = out.write_all(&buf);
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn cmd_list(out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{:<26} {:<18} {:<14} description", "id", "claimed", "functions").map_err(io)?;
    for info in catalog_ids() {
        writeln!(
            out,
            "{:<26} {:<18} {:<14} {}",
            info.id,
            info.claimed.label(),
            info.user_functions.join(","),
            info.anchor
        )
        .map_err(io)?;
    }
    Ok(())
}

fn entry_for(c: &RunConfig) -> Result<CatalogEntry> {
    let mut e = build(&c.system, &c.entry_options()?)?;
    if let Some(b) = &c.sample_box {
        e.sample_box = b.clone();
    }
    Ok(e)
}

fn write_file(dir: &Path, name: &str, body: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct LimitOutput {
    pub parameter: String,
    pub target: String,
    pub report: LimitReport,
}

/// Contents of `report.json` for `verify`.
#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub config: RunConfig,
    pub passed: bool,
    pub verification: VerificationReport,
    pub poisson_map: Option<PoissonMapReport>,
    pub limit: Option<LimitOutput>,
}

/// Run the configured checks, write `report.json` and return whether all
/// of them passed.
pub fn verify_report(c: &RunConfig) -> Result<VerifyOutput> {
    let opts = c.entry_options()?;
    let entry = entry_for(c)?;
    let bx = &entry.sample_box;
    let verification = classify(&entry, bx, c.samples, c.seed, c.tol)?;
    let poisson_map = match (&entry.system, c.poisson_map) {
        (Some(sys), true) => Some(check_poisson_map(&sys.spec, &sys.config, bx, c.samples, c.seed, c.tol)?),
        _ => None,
    };
    let limit = match &c.limit {
        None => None,
        Some(lc) => {
            let lim = limit_of(&c.system, &opts)?
                .ok_or_else(|| Error::Config(format!("no known limit for `{}` with these functions", c.system)))?;
            let family = lim.family(&c.system, &opts);
            let report = limit_check(&family, &lim.target, &lc.values, bx, c.samples, c.seed)?;
            Some(LimitOutput { parameter: lim.parameter.to_string(), target: lim.target.id.clone(), report })
        }
    };
    let passed = verification.passed()
        && poisson_map.as_ref().is_none_or(|r| r.passed)
        && limit.as_ref().is_none_or(|l| l.report.passed);
    Ok(VerifyOutput { config: c.clone(), passed, verification, poisson_map, limit })
}

pub fn cmd_verify(c: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let r = verify_report(c)?;
    let json = serde_json::to_string_pretty(&r).map_err(|e| Error::Io(e.to_string()))? + "\n";
    let path = write_file(&c.out, "report.json", json.as_bytes())?;
    let v = &r.verification;
    writeln!(out, "{} N={}: {} (claimed {}, expected {})", v.system, v.n, v.classification, v.claimed, v.expected)
        .map_err(io)?;
    let m = &v.involution;
    let (mut worst, mut pairs) = (0.0f64, 0);
    for (i, row) in m.residuals.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            if j > i && m.required[i][j] {
                worst = worst.max(*r);
                pairs += 1;
            }
        }
    }
    writeln!(out, "involution: max residual {worst:.3e} over {pairs} required pairs, tol {:e}", v.tol).map_err(io)?;
    for f in &v.involution.failures {
        writeln!(out, "  {{{}, {}}} = {:.3e}", f.a, f.b, f.residual).map_err(io)?;
    }
    writeln!(out, "independent integrals {} ({} in involution)", v.integrals_independent, v.integrals_in_involution)
        .map_err(io)?;
    if let Some(pm) = &r.poisson_map {
        writeln!(out, "poisson map residual {:.3e}", pm.max_residual).map_err(io)?;
    }
    if let Some(l) = &r.limit {
        writeln!(
            out,
            "limit {} -> 0 onto {}: order {:?}, {}",
            l.parameter,
            l.target,
            l.report.order,
            if l.report.passed { "converges" } else { "fails" }
        )
        .map_err(io)?;
    }
    for note in &v.notes {
        writeln!(out, "note: {note}").map_err(io)?;
    }
    writeln!(out, "{} -> {}", if r.passed { "PASS" } else { "FAIL" }, path.display()).map_err(io)?;
    Ok(r.passed)
}

#[derive(Debug, Serialize)]
pub struct DriftRow {
    pub monitor: String,
    pub drift: f64,
}

/// Contents of `report.json` for `simulate`.
#[derive(Debug, Serialize)]
pub struct SimulateOutput {
    pub config: RunConfig,
    pub passed: bool,
    pub steps_taken: usize,
    pub truncated: Option<String>,
    pub drift: Vec<DriftRow>,
}

pub fn cmd_simulate(c: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let entry = entry_for(c)?;
    let x0 = match &c.initial {
        Some(x) => x.clone(),
        None => entry.sample_box.sample(1, c.seed).remove(0),
    };
    let i = &c.integrator;
    let traj = integrate(&entry, &x0, i.h, i.steps, &default_monitors(&entry), i.step_options())?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    let csv_path = write_file(&c.out, "trajectory.csv", &csv)?;

    let drift: Vec<DriftRow> =
        traj.monitors.iter().map(|m| DriftRow { monitor: m.name.clone(), drift: m.drift }).collect();
    let within = i.drift_tol.is_none_or(|t| drift.iter().all(|d| d.drift <= t));
    let passed = traj.truncated.is_none() && within;
    let report = SimulateOutput {
        config: c.clone(),
        passed,
        steps_taken: traj.times.len() - 1,
        truncated: traj.truncated.clone(),
        drift,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))? + "\n";
    write_file(&c.out, "report.json", json.as_bytes())?;

    writeln!(out, "{} N={}: {} steps of h = {}", entry.id, entry.n, report.steps_taken, i.h).map_err(io)?;
    for d in &report.drift {
        writeln!(out, "  drift {:<12} {:.3e}", d.monitor, d.drift).map_err(io)?;
    }
    if let Some(t) = &report.truncated {
        writeln!(out, "truncated: {t}").map_err(io)?;
    }
    writeln!(out, "{} -> {}", if passed { "PASS" } else { "FAIL" }, csv_path.display()).map_err(io)?;
    Ok(passed)
}

/// One row of `curvature.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureRow {
    pub q: Vec<f64>,
    pub numeric: f64,
    pub closed: Option<f64>,
}

impl CurvatureRow {
    pub fn difference(&self) -> Option<f64> {
        self.closed.map(|c| self.numeric - c)
    }
}

/// Numeric and closed-form scalar curvature at seeded box points.
pub fn curvature_table(c: &RunConfig) -> Result<Vec<CurvatureRow>> {
    let entry = entry_for(c)?;
    let metric = entry
        .metric
        .as_ref()
        .ok_or_else(|| Error::Config(format!("`{}` has no metric", entry.id)))?;
    let points = entry.sample_box.sample(c.curvature_points, c.seed);
    points
        .par_iter()
        .map(|x| {
            let numeric = scalar_curvature_numeric(metric, &x.q, &entry.params, Derivatives::Jets)?;
            let closed = match &entry.closed_curvature {
                Some(cc) => cc.scalar_at(&x.q, &entry.params)?,
                None => None,
            };
            Ok(CurvatureRow { q: x.q.clone(), numeric, closed })
        })
        .collect()
}

pub fn cmd_curvature(c: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let rows = curvature_table(c)?;
    let mut csv = String::new();
    let n = c.n;
    let mut header: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
    header.extend(["numeric", "closed", "difference"].map(String::from));
    csv.push_str(&header.join(","));
    csv.push('\n');
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in &rows {
        let mut cells: Vec<String> = r.q.iter().map(|v| v.to_string()).collect();
        cells.extend([r.numeric.to_string(), opt(r.closed), opt(r.difference())]);
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    let path = write_file(&c.out, "curvature.csv", csv.as_bytes())?;
    let worst = rows.iter().filter_map(|r| r.difference()).map(f64::abs).fold(None, |m: Option<f64>, d| {
        Some(m.map_or(d, |m| m.max(d)))
    });
    let passed = worst.is_none_or(|w| w <= c.curvature_tol);
    match worst {
        Some(w) => writeln!(out, "{}: max |numeric - closed| = {w:.3e} over {} points", c.system, rows.len()),
        None => writeln!(out, "{}: no closed form, numeric values only", c.system),
    }
    .map_err(io)?;
    writeln!(out, "{} -> {}", if passed { "PASS" } else { "FAIL" }, path.display()).map_err(io)?;
    Ok(passed)
}
