//! Run configuration: a TOML file with `[symbol]`, `[run]`, `[[grid]]` and
//! `[spectral]` sections. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::laurent::LaurentMatrix;
use crate::symbols::{covering_spec, custom_spec, rational_spec, SymbolSpec, TimeVector};

/// A real number or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn value(self) -> Complex64 {
        match self {
            Number::Real(x) => Complex64::new(x, 0.0),
            Number::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Rational,
    Covering,
    Custom,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    pub family: FamilyName,
    /// c_i for `rational`, the branch points a_j for `covering`.
    #[serde(default)]
    pub params: Vec<Number>,
    /// Sheet count of a covering.
    pub n: Option<usize>,
    /// Laurent CSV of 𝒲 for `custom`, relative to the config file.
    pub coeffs: Option<PathBuf>,
    pub rho: Option<f64>,
}

fn default_n_min() -> usize {
    1
}
fn default_n_max() -> usize {
    4
}
fn default_q() -> usize {
    6
}
fn default_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Factorization band override.
    pub band: Option<usize>,
    /// Base times t̃ = (t₁, t₂, …), real.
    #[serde(default)]
    pub times: Vec<f64>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            n_min: default_n_min(),
            n_max: default_n_max(),
            q: default_q(),
            tol: default_tol(),
            band: None,
            times: Vec::new(),
        }
    }
}

/// One axis of the tau sweep: t_time over `steps` equally spaced values.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub time: usize,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

fn default_terms() -> usize {
    crate::algebro::DEFAULT_BRANCH_TERMS
}
fn default_band() -> usize {
    crate::algebro::DEFAULT_BAND
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    #[serde(default = "default_terms")]
    pub terms: usize,
    #[serde(default = "default_band")]
    pub band: usize,
    /// P(z) by ascending powers for a custom symbol's curve λⁿ = P(z).
    #[serde(default)]
    pub curve: Vec<Number>,
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection {
            terms: default_terms(),
            band: default_band(),
            curve: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub output_dir: Option<PathBuf>,
    pub symbol: SymbolSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub grid: Vec<GridAxis>,
    #[serde(default)]
    pub spectral: SpectralSection,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub spec: SymbolSpec,
    pub times: TimeVector,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn gd_times(values: &[Complex64], n: usize, what: &str) -> Result<TimeVector> {
    if values.len() > crate::gradedpoly::MAX_TIMES {
        return Err(config_err(format!(
            "{what}: at most {} times, got {}",
            crate::gradedpoly::MAX_TIMES,
            values.len()
        )));
    }
    for (i, v) in values.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(config_err(format!("{what}: t_{} is not finite", i + 1)));
        }
        if (i + 1) % n == 0 && *v != Complex64::new(0.0, 0.0) {
            return Err(config_err(format!(
                "{what}: t_{} must be 0, since n = {n} divides its index",
                i + 1
            )));
        }
    }
    Ok(TimeVector::new(values, n, true))
}

impl RunConfig {
    pub fn from_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let spec = build_spec(&raw.symbol, base_dir)?;
        let run = &raw.run;
        if !(run.tol > 0.0) {
            return Err(config_err(format!("tol must be positive, got {}", run.tol)));
        }
        if run.n_min == 0 || run.n_min > run.n_max {
            return Err(config_err(format!(
                "need 1 ≤ n_min ≤ n_max, got {}..{}",
                run.n_min, run.n_max
            )));
        }
        if run.q == 0 || run.q > crate::gradedpoly::MAX_TIMES {
            return Err(config_err(format!(
                "q must lie in 1..={}",
                crate::gradedpoly::MAX_TIMES
            )));
        }
        let values: Vec<Complex64> = run.times.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let times = gd_times(&values, spec.n(), "run.times")?;
        for axis in &raw.grid {
            if axis.time == 0 || axis.time > crate::gradedpoly::MAX_TIMES {
                return Err(config_err(format!("grid axis time index {} out of range", axis.time)));
            }
            if axis.time % spec.n() == 0 {
                return Err(config_err(format!(
                    "grid axis t_{} is frozen by the reduction n = {}",
                    axis.time,
                    spec.n()
                )));
            }
            if axis.steps == 0 || !axis.from.is_finite() || !axis.to.is_finite() {
                return Err(config_err(format!("grid axis t_{} is malformed", axis.time)));
            }
        }
        if raw.spectral.terms == 0 || raw.spectral.band == 0 {
            return Err(config_err("spectral terms and band must be positive"));
        }
        Ok(RunConfig { raw, spec, times })
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        RunConfig::from_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn tol(&self) -> f64 {
        self.raw.run.tol
    }

    pub fn set_tol(&mut self, tol: f64) -> Result<()> {
        if !(tol > 0.0) {
            return Err(config_err(format!("tol must be positive, got {tol}")));
        }
        self.raw.run.tol = tol;
        Ok(())
    }

    /// Cartesian product of the grid axes, first axis slowest. Every point
    /// starts from the base times.
    pub fn grid_points(&self) -> Result<Vec<TimeVector>> {
        let axes = &self.raw.grid;
        let len = axes
            .iter()
            .map(|a| a.time)
            .chain(std::iter::once(self.times.len()))
            .max()
            .unwrap_or(0);
        let mut base: Vec<Complex64> = self.times.values().to_vec();
        base.resize(len, Complex64::new(0.0, 0.0));
        let mut points = vec![base];
        for axis in axes {
            let mut next = Vec::with_capacity(points.len() * axis.steps);
            for p in &points {
                for s in 0..axis.steps {
                    let v = if axis.steps == 1 {
                        axis.from
                    } else {
                        axis.from + (axis.to - axis.from) * s as f64 / (axis.steps - 1) as f64
                    };
                    let mut q = p.clone();
                    q[axis.time - 1] = Complex64::new(v, 0.0);
                    next.push(q);
                }
            }
            points = next;
        }
        points
            .iter()
            .map(|p| gd_times(p, self.spec.n(), "grid point"))
            .collect()
    }
}

fn build_spec(s: &SymbolSection, base_dir: &Path) -> Result<SymbolSpec> {
    let params: Vec<Complex64> = s.params.iter().map(|v| v.value()).collect();
    let spec = match s.family {
        FamilyName::Rational => {
            if s.n.is_some() || s.coeffs.is_some() || s.rho.is_some() {
                return Err(config_err("rational symbols take only `params`"));
            }
            rational_spec(&params)
        }
        FamilyName::Covering => {
            let n = s.n.ok_or_else(|| config_err("covering symbols need `n`"))?;
            if s.coeffs.is_some() || s.rho.is_some() {
                return Err(config_err("covering symbols take only `params` and `n`"));
            }
            covering_spec(&params, n)
        }
        FamilyName::Custom => {
            let path = s
                .coeffs
                .as_ref()
                .ok_or_else(|| config_err("custom symbols need `coeffs`"))?;
            let rho = s.rho.ok_or_else(|| config_err("custom symbols need `rho`"))?;
            if !params.is_empty() || s.n.is_some() {
                return Err(config_err("custom symbols take only `coeffs` and `rho`"));
            }
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| config_err(format!("{}: {e}", full.display())))?;
            custom_spec(LaurentMatrix::from_csv(&text)?, rho)
        }
    };
    spec.map_err(|e| config_err(format!("symbol: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const RATIONAL: &str = r#"
[symbol]
family = "rational"
params = [0.3, 0.6]

[run]
times = [0.5, 0.0, 0.1]

[[grid]]
time = 1
from = -0.5
to = 0.5
steps = 3
"#;

    #[test]
    fn parses_and_expands_grid() {
        let c = RunConfig::from_str(RATIONAL, Path::new(".")).unwrap();
        assert_eq!(c.spec.n(), 2);
        let pts = c.grid_points().unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0].values()[0], Complex64::new(-0.5, 0.0));
        assert_eq!(pts[2].values()[2], Complex64::new(0.1, 0.0));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = RATIONAL.replace("[run]", "[run]\nfoo = 1");
        assert!(matches!(RunConfig::from_str(&bad, Path::new(".")), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_frozen_times_and_bad_tolerances() {
        let bad = RATIONAL.replace("times = [0.5, 0.0, 0.1]", "times = [0.5, 0.2]");
        assert!(matches!(RunConfig::from_str(&bad, Path::new(".")), Err(Error::Config(_))));
        let bad = RATIONAL.replace("[run]", "[run]\ntol = -1.0");
        assert!(matches!(RunConfig::from_str(&bad, Path::new(".")), Err(Error::Config(_))));
        let bad = RATIONAL.replace("time = 1", "time = 2");
        assert!(matches!(RunConfig::from_str(&bad, Path::new(".")), Err(Error::Config(_))));
    }

    #[test]
    fn complex_parameters() {
        let text = RATIONAL.replace("params = [0.3, 0.6]", "params = [[0.3, 0.1], 0.6]");
        let c = RunConfig::from_str(&text, Path::new(".")).unwrap();
        assert_eq!(c.spec.n(), 2);
    }
}
