//! Command orchestration for the `gdtau` binary: each command turns a
//! [`RunConfig`] into named CSV artifacts, a report and a list of failed
//! checks, and the runner maps that onto files and an exit code.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebro::{bc_matrices, branch_series, reconstruct_w, CharPoly};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::factorization::{wiener_hopf, wiener_hopf_auto};
use crate::laurent::inverse_transform;
use crate::report::fmt_f64;
use crate::symbols::{gd_symbol_auto, Family, TimeVector};
use crate::tau::{tau_stable, tau_table_csv, TauRow};
use crate::toeplitz::{build_tn, szego_widom};
use crate::verify::{self, Status, Suite};

/// Exit codes of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "GDTAU_OUT_DIR";

/// Largest N of the D_N/G^N sequence in `converge`.
pub const CONVERGE_N_MAX: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Tau,
    Converge,
    Factorize,
    Spectral,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Tau => "tau",
            Command::Converge => "converge",
            Command::Factorize => "factorize",
            Command::Spectral => "spectral",
        }
    }
}

/// Flags shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub seed: u64,
}

/// Everything a command produced, before anything touches the disk.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    /// (file name, contents), written in this order.
    pub artifacts: Vec<(String, String)>,
    pub report: String,
    /// One machine-readable line per failed check.
    pub failures: Vec<String>,
}

impl RunOutput {
    fn check(&mut self, name: &str, value: f64, tol: f64) {
        let ok = value <= tol;
        self.report.push_str(&format!(
            "check {name}: {value:.6e} (tol {tol:.1e}) {}\n",
            if ok { "PASS" } else { "FAIL" }
        ));
        if !ok {
            self.failures.push(format!("FAIL\t{name}\t{}\t{}", fmt_f64(value), fmt_f64(tol)));
        }
    }

    fn error(&mut self, name: &str, e: &Error) {
        self.report.push_str(&format!("check {name}: error {e}\n"));
        self.failures.push(format!("ERROR\t{name}\t{e}"));
    }
}

/// --out, then $GDTAU_OUT_DIR, then `output_dir` from the config, then `out`.
pub fn output_dir(cli: Option<&Path>, env: Option<&str>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return PathBuf::from(e);
    }
    config.map_or_else(|| PathBuf::from("out"), Path::to_path_buf)
}

pub fn execute(cmd: Command, cfg: &RunConfig, seed: u64, tol_override: Option<f64>) -> Result<RunOutput> {
    let mut out = match cmd {
        Command::Verify => run_verify(cfg, seed, tol_override),
        Command::Tau => run_tau(cfg)?,
        Command::Converge => run_converge(cfg)?,
        Command::Factorize => run_factorize(cfg)?,
        Command::Spectral => run_spectral(cfg)?,
    };
    let header = format!(
        "gdtau {} | family {} | n {} | tol {:.1e} | seed {seed}\n",
        cmd.name(),
        cfg.spec.family_name(),
        cfg.spec.n(),
        cfg.tol()
    );
    out.report.insert_str(0, &header);
    out.report.push_str(&format!(
        "result: {}\n",
        if out.failures.is_empty() { "ok" } else { "checks failed" }
    ));
    Ok(out)
}

/// Loads the config, runs the command and writes the artifacts. Returns the
/// exit code.
pub fn run(cmd: Command, opts: &Options) -> i32 {
    let mut cfg = match RunConfig::load(&opts.config) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    if let Some(t) = opts.tol {
        if let Err(e) = cfg.set_tol(t) {
            return config_failure(&e);
        }
    }
    let outcome = match opts.threads {
        Some(0) => return config_failure(&Error::Config("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cmd, &cfg, opts.seed, opts.tol)),
            Err(e) => return config_failure(&Error::Config(e.to_string())),
        },
        None => execute(cmd, &cfg, opts.seed, opts.tol),
    };
    let result = match outcome {
        Ok(r) => r,
        Err(e @ Error::Config(_)) => return config_failure(&e),
        Err(e) => {
            eprintln!("ERROR\t{}\t{e}", cmd.name());
            return EXIT_CHECK_FAILED;
        }
    };
    let env = std::env::var(OUT_DIR_ENV).ok();
    let dir = output_dir(opts.out.as_deref(), env.as_deref(), cfg.raw.output_dir.as_deref());
    if let Err(e) = write_artifacts(&dir, &result) {
        eprintln!("ERROR\tio\t{e}");
        return EXIT_CHECK_FAILED;
    }
    print!("{}", result.report);
    for f in &result.failures {
        eprintln!("{f}");
    }
    if result.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn config_failure(e: &Error) -> i32 {
    eprintln!("CONFIG\t{e}");
    EXIT_CONFIG
}

pub fn write_artifacts(dir: &Path, out: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, contents) in &out.artifacts {
        std::fs::write(dir.join(name), contents)?;
    }
    std::fs::write(dir.join("report.txt"), &out.report)?;
    Ok(())
}

fn run_verify(cfg: &RunConfig, seed: u64, tol_override: Option<f64>) -> RunOutput {
    let suite = Suite {
        config: cfg.clone(),
        seed,
        tol_override,
    };
    let rows = verify::run_suite(&suite);
    let mut out = RunOutput {
        report: verify::table_text(&rows),
        ..RunOutput::default()
    };
    for r in rows.iter().filter(|r| r.status == Status::Fail) {
        out.failures.push(format!(
            "FAIL\t{}\t{}\t{}\t{}",
            r.module,
            r.invariant,
            fmt_f64(r.value),
            r.tol.map_or_else(|| "-".into(), fmt_f64)
        ));
    }
    out.artifacts.push(("verify.csv".into(), verify::table_csv(&rows)));
    out
}

/// The tau sweep of a config: CSV plus the grid points that failed.
#[derive(Clone, Debug)]
pub struct TauTable {
    pub csv: String,
    pub rows: Vec<TauRow>,
    pub failures: Vec<(Vec<Complex64>, Error)>,
}

/// τ_{W,N} for N in the configured range and the stable τ_W at every grid
/// point. Finite-N errors are the change of D_N when the symbol depth doubles.
pub fn tau_table(cfg: &RunConfig) -> Result<TauTable> {
    let points = cfg.grid_points()?;
    let spec = &cfg.spec;
    let per_point: Vec<std::result::Result<Vec<TauRow>, (Vec<Complex64>, Error)>> = points
        .par_iter()
        .map(|t| {
            point_rows(cfg, t).map_err(|e| (t.values().to_vec(), e))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in per_point {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(f) => failures.push(f),
        }
    }
    let num_times = points.iter().map(|p| p.len()).max().unwrap_or(0).max(1);
    Ok(TauTable {
        csv: tau_table_csv(num_times, spec.n(), &rows),
        rows,
        failures,
    })
}

fn point_rows(cfg: &RunConfig, t: &TimeVector) -> Result<Vec<TauRow>> {
    let spec = &cfg.spec;
    let run = &cfg.raw.run;
    let depth = spec.default_depth().max(run.n_max + 1);
    let lm = gd_symbol_auto(spec, t, depth)?;
    let lm2 = gd_symbol_auto(spec, t, 2 * depth)?;
    let mut rows = Vec::new();
    for nb in run.n_min..=run.n_max {
        let tau = build_tn(&lm, nb).det();
        let check = build_tn(&lm2, nb).det();
        rows.push(TauRow {
            t: t.values().to_vec(),
            blocks: Some(nb),
            tau,
            est_error: (tau - check).norm(),
        });
    }
    let stable = tau_stable(spec, t, cfg.tol().min(1e-10))?;
    rows.push(TauRow {
        t: t.values().to_vec(),
        blocks: None,
        tau: stable.value,
        est_error: stable.fredholm.est_error,
    });
    Ok(rows)
}

fn run_tau(cfg: &RunConfig) -> Result<RunOutput> {
    let table = tau_table(cfg)?;
    let mut out = RunOutput::default();
    let points = cfg.grid_points()?.len();
    out.report.push_str(&format!(
        "grid points {points}, N = {}..{} and inf, rows {}\n",
        cfg.raw.run.n_min,
        cfg.raw.run.n_max,
        table.rows.len()
    ));
    for (t, e) in &table.failures {
        let shown: Vec<String> = t.iter().map(|v| format!("{}", v.re)).collect();
        out.error(&format!("tau at t = ({})", shown.join(", ")), e);
    }
    let worst = table
        .rows
        .iter()
        .map(|r| r.est_error)
        .fold(0.0, f64::max);
    out.check("tau est_error", worst, cfg.tol());
    out.artifacts.push(("tau.csv".into(), table.csv));
    Ok(out)
}

fn sampled(cfg: &RunConfig) -> Result<(crate::laurent::LaurentMatrix, crate::laurent::CircleSamples)> {
    let lm = gd_symbol_auto(&cfg.spec, &cfg.times, cfg.spec.default_depth())?;
    let m = (4 * (lm.hi() - lm.lo() + 1) as usize)
        .next_power_of_two()
        .max(crate::laurent::DEFAULT_SAMPLES);
    let x = inverse_transform(&lm, m)?;
    Ok((lm, x))
}

fn run_converge(cfg: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let (lm, x) = sampled(cfg)?;
    let tol = cfg.tol();
    let sw = szego_widom(&lm, &x, tol, CONVERGE_N_MAX.max(cfg.raw.run.n_max))?;
    out.report.push_str(&format!(
        "G = {:.6e} {:+.6e}i\nD_inf direct {:.16e} {:+.16e}i at N = {}\nD_inf Plemelj {:.16e} {:+.16e}i ({} blocks)\nfitted ratio {}\n",
        sw.g.re,
        sw.g.im,
        sw.d_inf_direct.re,
        sw.d_inf_direct.im,
        sw.n_used,
        sw.d_inf_plemelj.value.re,
        sw.d_inf_plemelj.value.im,
        sw.d_inf_plemelj.m_used,
        sw.fitted_ratio.map_or_else(|| "none".into(), |r| format!("{r:.6}"))
    ));
    // the two routes are each accurate to about tol, and agree to ~100 tol
    out.check("two-route discrepancy", sw.discrepancy(), 100.0 * tol);
    out.check("fitted ratio below 1", sw.fitted_ratio.unwrap_or(0.0), 1.0 - f64::EPSILON);
    out.artifacts.push(("converge.csv".into(), sw.to_csv()));
    Ok(out)
}

fn run_factorize(cfg: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let (lm, x) = sampled(cfg)?;
    let tol = cfg.tol();
    let f = match cfg.raw.run.band {
        Some(b) => wiener_hopf(&x, b, tol)?,
        None => wiener_hopf_auto(&x, (-lm.lo()) as usize, tol)?,
    };
    out.report.push_str(&format!("certificate {}\n", f.certificate()));
    out.check("gamma - T_- T_+", f.residual, tol);
    out.check("det T_+ - 1", f.det_plus_deviation()?, tol);
    out.check("det T_- - det gamma", f.det_minus_deviation(&x)?, tol);
    out.artifacts.push(("t_minus.csv".into(), f.t_minus.to_csv()));
    out.artifacts.push(("t_plus.csv".into(), f.t_plus.to_csv()));
    Ok(out)
}

fn spectral_curve(cfg: &RunConfig) -> Result<CharPoly> {
    let n = cfg.spec.n();
    match cfg.spec.family() {
        Family::Covering { a, .. } => CharPoly::covering(a, n),
        Family::Custom { .. } => {
            if cfg.raw.spectral.curve.is_empty() {
                return Err(Error::Config("custom symbols need spectral.curve".into()));
            }
            let p: Vec<Complex64> = cfg.raw.spectral.curve.iter().map(|v| v.value()).collect();
            CharPoly::curve(n, &p)
        }
        Family::Rational { .. } => Err(Error::Config(
            "spectral needs a covering or a custom symbol with a curve".into(),
        )),
    }
}

fn run_spectral(cfg: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let tol = cfg.tol();
    let sp = &cfg.raw.spectral;
    let cp = spectral_curve(cfg)?;
    let bs = branch_series(&cp, sp.terms, true)?;
    let bc = bc_matrices(&cfg.spec, &bs, sp.band)?;
    let n = cp.n();
    let p: Vec<String> = (0..=cp.degree(n).unwrap_or(0))
        .map(|k| {
            let v = -cp.coeff(n).get(k).copied().unwrap_or_default();
            format!("{:.6e}{:+.6e}i", v.re, v.im)
        })
        .collect();
    out.report.push_str(&format!(
        "curve n = {n}, m = {}, P(z) ascending [{}]\nbranch terms {}, band {}\n",
        bc.m,
        p.join(", "),
        sp.terms,
        sp.band
    ));
    out.report.push_str("degree table deg C_ij (rows i, columns j):\n");
    for row in &bc.degrees {
        let cells: Vec<String> = row
            .iter()
            .map(|d| d.map_or_else(|| "-".into(), |v| v.to_string()))
            .collect();
        out.report.push_str(&format!("  {}\n", cells.join(" ")));
    }
    let orders: Vec<String> = bc
        .column_orders
        .iter()
        .map(|o| o.map_or_else(|| "-".into(), |v| v.to_string()))
        .collect();
    out.report.push_str(&format!(
        "column orders max_i(i - j + n deg C_ij): [{}], pattern {}\n",
        orders.join(", "),
        if bc.degree_pattern_holds() { "holds" } else { "fails" }
    ));
    out.report.push_str(&format!(
        "certificate {{ negative_energy: {:.6e}, trace_max: {:.6e}, charpoly_residual: {:.6e} }}\n",
        bc.negative_energy, bc.trace_max, bc.charpoly_residual
    ));
    out.check("negative-band energy of C", bc.negative_energy, tol);
    out.check("trace C", bc.trace_max, tol);
    out.check("det(lambda - C) vs curve", bc.charpoly_residual, tol);
    match reconstruct_w(&bc.c, sp.terms, sp.band) {
        Ok(rec) => out.check("reconstruction conjugation", rec.conj_residual, tol),
        Err(e) => out.error("reconstruction", &e),
    }
    out.artifacts.push(("c.csv".into(), bc.c.to_csv()));
    out.artifacts.push(("b.csv".into(), bc.b.to_csv()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_dir_precedence() {
        let cfg = Some(Path::new("from_config"));
        assert_eq!(output_dir(Some(Path::new("cli")), Some("env"), cfg), PathBuf::from("cli"));
        assert_eq!(output_dir(None, Some("env"), cfg), PathBuf::from("env"));
        assert_eq!(output_dir(None, Some(""), cfg), PathBuf::from("from_config"));
        assert_eq!(output_dir(None, None, None), PathBuf::from("out"));
    }

    #[test]
    fn failed_checks_are_listed() {
        let mut out = RunOutput::default();
        out.check("a", 1e-3, 1e-8);
        out.check("b", 1e-12, 1e-8);
        assert_eq!(out.failures.len(), 1);
        assert!(out.failures[0].starts_with("FAIL\ta\t"));
    }
}
