//! Batch front-end: parse a run configuration, execute the approximate
//! solve plus concatenated verification, and emit machine-readable
//! certificates and plot-ready data.
//!
//! Config files are flat `key = value` text with `#` comments. Reruns with
//! identical configs produce bitwise-identical CSV artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::bounds::{BoundsError, ProblemParams};
use crate::spectral::SineSeries;
use crate::verify::{concatenate, RunMode, StepPolicy, VerificationRun, VerifyError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("comparison: {0}")]
    Compare(String),
}

/// Parsed run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub gamma: f64,
    pub p: u32,
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub mu: f64,
    pub t_end: f64,
    pub tau0: f64,
    pub mode: RunMode,
    pub solver_tol: f64,
    pub output_dir: PathBuf,
    pub substeps: usize,
    pub adaptive: bool,
    pub tau_max: f64,
    pub eps0: f64,
    pub rho_margin: f64,
    pub export_snapshots: bool,
}

fn parse_fraction(s: &str) -> Option<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().ok()?;
        let d: f64 = den.trim().parse().ok()?;
        if d == 0.0 {
            return None;
        }
        Some(n / d)
    } else {
        s.trim().parse().ok()
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let mut map = std::collections::BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |key: &str| -> Result<String, CliError> {
            map.get(key)
                .cloned()
                .ok_or_else(|| CliError::Config(format!("missing key '{key}'")))
        };
        let f = |key: &str| -> Result<f64, CliError> {
            take(key)?
                .parse()
                .map_err(|_| CliError::Config(format!("key '{key}' is not a number")))
        };
        let fd = |key: &str, default: f64| -> Result<f64, CliError> {
            match map.get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| CliError::Config(format!("key '{key}' is not a number"))),
            }
        };

        let alpha = parse_fraction(&take("alpha")?)
            .ok_or_else(|| CliError::Config("key 'alpha' is not a number or fraction".into()))?;
        let mode = RunMode::parse(&take("mode")?)
            .ok_or_else(|| CliError::Config("mode must be 'grouped' or 'naive'".into()))?;
        let tau0 = f("tau0")?;
        let cfg = RunConfig {
            gamma: f("gamma")?,
            p: f("p")? as u32,
            d: f("d")? as usize,
            n: f("N")? as usize,
            alpha,
            mu: f("mu")?,
            t_end: f("T")?,
            tau0,
            mode,
            solver_tol: fd("solver_tol", 1e-12)?,
            output_dir: PathBuf::from(take("output_dir")?),
            substeps: fd("substeps", 2.0)? as usize,
            adaptive: map.get("adaptive").map(|v| v == "true").unwrap_or(true),
            tau_max: fd("tau_max", tau0)?,
            eps0: fd("eps0", 0.0)?,
            rho_margin: fd("rho_margin", 1.01)?,
            export_snapshots: map
                .get("export_snapshots")
                .map(|v| v == "true")
                .unwrap_or(false),
        };
        if cfg.t_end.is_nan() || cfg.t_end <= 0.0 || cfg.tau0.is_nan() || cfg.tau0 <= 0.0 {
            return Err(CliError::Config("T and tau0 must be positive".into()));
        }
        // admissibility of the problem parameters is part of parsing
        cfg.to_params()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        RunConfig::parse(&text)
    }

    pub fn to_params(&self) -> Result<ProblemParams, CliError> {
        Ok(ProblemParams::new(self.d, self.p, self.alpha, self.mu, self.gamma, self.n)?)
    }

    pub fn to_policy(&self) -> StepPolicy {
        let workers = worker_count();
        StepPolicy {
            tau0: self.tau0,
            tau_max: self.tau_max,
            max_halvings: 12,
            grow_after: 5,
            substeps: self.substeps,
            adaptive: self.adaptive,
            solver_tol: self.solver_tol,
            rho_margin: self.rho_margin,
            eps0: self.eps0,
            workers,
        }
    }
}

/// Worker parallelism: available cores, capped by HEATCERT_THREADS.
pub fn worker_count() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("HEATCERT_THREADS") {
        Ok(v) => v.parse::<usize>().map(|c| c.clamp(1, avail)).unwrap_or(avail),
        Err(_) => avail,
    }
}

/// Outcome of a run, mapped to the process exit code by the binary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// verified all the way to T (exit 0)
    Complete,
    /// verification stopped before T; artifacts still written (exit 2)
    StoppedEarly,
}

pub struct RunOutput {
    pub status: RunStatus,
    pub run: VerificationRun,
}

/// Execute a configured run and write certificates.csv, rho_vs_t.csv and
/// run_summary.txt into the output directory.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let started = Instant::now();
    let params = config.to_params()?;
    let policy = config.to_policy();
    let u0 = SineSeries::basis(config.d, config.n, &[1; 3][..config.d], config.gamma)
        .map_err(BoundsError::from)
        .map_err(CliError::Bounds)?;
    let run = concatenate(&u0, &params, &policy, config.mode, config.t_end)?;
    let wall = started.elapsed().as_secs_f64();

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;

    write_file(&dir.join("certificates.csv"), &certificates_csv(&run))?;
    write_file(&dir.join("rho_vs_t.csv"), &rho_csv(&run))?;
    write_file(&dir.join("run_summary.txt"), &summary_text(config, &run, wall))?;
    if config.export_snapshots {
        let mut buf = Vec::new();
        run.omega
            .write_csv(&mut buf)
            .map_err(VerifyError::from)?;
        fs::write(dir.join("snapshots.csv"), buf)
            .map_err(|source| CliError::Io { path: dir.join("snapshots.csv"), source })?;
    }

    let status = if run.reached_target() { RunStatus::Complete } else { RunStatus::StoppedEarly };
    Ok(RunOutput { status, run })
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn certificates_csv(run: &VerificationRun) -> String {
    let mut out = String::from(
        "i,t_start,t_end,tau,sigma_lo,sigma_hi,delta_hi,rho_lo,rho_hi,nu_hi,eps_hi,decay_hi,verified\n",
    );
    for c in &run.certificates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.index,
            c.t_start,
            c.t_end,
            c.tau.hi(),
            c.sigma.lo(),
            c.sigma.hi(),
            c.delta.hi(),
            c.rho.lo(),
            c.rho.hi(),
            c.nu.hi(),
            c.eps.hi(),
            c.decay.hi(),
            c.verified
        );
    }
    out
}

fn rho_csv(run: &VerificationRun) -> String {
    let mut out = String::from("t,rho\n");
    for c in run.certificates.iter().filter(|c| c.verified) {
        let _ = writeln!(out, "{},{}", c.t_end, c.rho.hi());
    }
    out
}

fn summary_text(config: &RunConfig, run: &VerificationRun, wall: f64) -> String {
    let verified_steps = run.certificates.iter().filter(|c| c.verified).count();
    format!(
        "gamma = {}\np = {}\nd = {}\nN = {}\nalpha = {}\nmu = {}\nT = {}\nmode = {}\n\
         tau0 = {}\nsubsteps = {}\nadaptive = {}\nlast_verified_t = {}\nreached_target = {}\n\
         verified_steps = {}\nattempted_steps = {}\nwall_seconds = {:.3}\n",
        config.gamma,
        config.p,
        config.d,
        config.n,
        config.alpha,
        config.mu,
        config.t_end,
        run.mode.name(),
        config.tau0,
        config.substeps,
        config.adaptive,
        run.last_verified_t,
        run.reached_target(),
        verified_steps,
        run.certificates.len(),
        wall,
    )
}

/// Parsed artifacts of a completed run directory.
pub struct StoredRun {
    pub summary: std::collections::BTreeMap<String, String>,
    /// (t_end, rho_hi, eps_hi) of verified steps
    pub rows: Vec<(f64, f64, f64)>,
    pub last_verified_t: f64,
}

pub fn read_run(dir: &Path) -> Result<StoredRun, CliError> {
    let summary_text = fs::read_to_string(dir.join("run_summary.txt"))
        .map_err(|source| CliError::Io { path: dir.join("run_summary.txt"), source })?;
    let mut summary = std::collections::BTreeMap::new();
    for line in summary_text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            summary.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let cert_text = fs::read_to_string(dir.join("certificates.csv"))
        .map_err(|source| CliError::Io { path: dir.join("certificates.csv"), source })?;
    let mut rows = Vec::new();
    for line in cert_text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 13 || cols[12] != "true" {
            continue;
        }
        let t: f64 = cols[2].parse().map_err(|_| CliError::Compare("bad csv".into()))?;
        let rho: f64 = cols[8].parse().map_err(|_| CliError::Compare("bad csv".into()))?;
        let eps: f64 = cols[10].parse().map_err(|_| CliError::Compare("bad csv".into()))?;
        rows.push((t, rho, eps));
    }
    let last_verified_t = summary
        .get("last_verified_t")
        .and_then(|v| v.parse().ok())
        .unwrap_or(0.0);
    Ok(StoredRun { summary, rows, last_verified_t })
}

pub struct ComparisonReport {
    pub further: String,
    pub table: String,
}

/// Compare two completed runs of the same problem; refuses mismatched
/// problem parameters.
pub fn compare(dir_a: &Path, dir_b: &Path) -> Result<ComparisonReport, CliError> {
    let a = read_run(dir_a)?;
    let b = read_run(dir_b)?;
    for key in ["gamma", "p", "d", "N", "alpha", "mu", "T"] {
        if a.summary.get(key) != b.summary.get(key) {
            return Err(CliError::Compare(format!(
                "problem parameter '{key}' differs: {:?} vs {:?}",
                a.summary.get(key),
                b.summary.get(key)
            )));
        }
    }
    let further = match a
        .last_verified_t
        .partial_cmp(&b.last_verified_t)
        .expect("finite times")
    {
        std::cmp::Ordering::Greater => format!(
            "A ({}) verified further: {} > {}",
            dir_a.display(),
            a.last_verified_t,
            b.last_verified_t
        ),
        std::cmp::Ordering::Less => format!(
            "B ({}) verified further: {} > {}",
            dir_b.display(),
            b.last_verified_t,
            a.last_verified_t
        ),
        std::cmp::Ordering::Equal => {
            format!("both verified to t = {}", a.last_verified_t)
        }
    };
    // align rows on exactly matching times
    let mut table = String::from("t,rho_a,eps_a,rho_b,eps_b\n");
    let mut bi = 0usize;
    for &(t, rho_a, eps_a) in &a.rows {
        while bi < b.rows.len() && b.rows[bi].0 < t {
            bi += 1;
        }
        if bi < b.rows.len() && b.rows[bi].0 == t {
            let (_, rho_b, eps_b) = b.rows[bi];
            let _ = writeln!(table, "{t},{rho_a},{eps_a},{rho_b},{eps_b}");
        }
    }
    Ok(ComparisonReport { further, table })
}
