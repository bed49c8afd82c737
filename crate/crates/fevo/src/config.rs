//! Run configuration: strict TOML with pre-validated expression fields.
//!
//! Unknown keys are fatal everywhere (misspelled coefficient names must
//! not silently change the symbol). All DSL strings are parsed during
//! [`parse_config`], so a loaded config is fully evaluable. Numeric
//! output written from a config embeds its SHA-256 and the master seed.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::chain::{EnsembleSpec, Retention};
use crate::symbol::{JumpDist, LevySymbol, NegativeTimeMode, SymbolError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: String,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub symbol: SymbolSection,
    pub run: RunSection,
    #[serde(default)]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub probe: Option<ProbeSection>,
    #[serde(default)]
    pub generator: Option<GeneratorSection>,
    #[serde(default)]
    pub chernoff: Option<ChernoffSection>,
    #[serde(default)]
    pub check: Option<CheckSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    pub dimension: usize,
    /// Drift vector, one expression per coordinate; defaults to zero.
    #[serde(default)]
    pub drift: Option<Vec<String>>,
    /// Upper triangle of Q, row-major (q11, q12, .., q1d, q22, ..);
    /// defaults to zero.
    #[serde(default)]
    pub diffusion: Option<Vec<String>>,
    #[serde(default)]
    pub cpp: Option<CppSection>,
    #[serde(default)]
    pub stable: Option<StableSection>,
    #[serde(default)]
    pub negative_time: Option<NegativeTimeName>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
pub enum NegativeTimeName {
    #[serde(rename = "as-given")]
    AsGiven,
    #[serde(rename = "frozen-at-zero")]
    FrozenAtZero,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CppSection {
    pub intensity: String,
    pub jump: JumpSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum JumpSection {
    #[serde(rename = "point")]
    Point { a: Vec<f64> },
    #[serde(rename = "gaussian")]
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    #[serde(rename = "two-point")]
    TwoPoint { a: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableSection {
    pub alpha: f64,
    pub scale: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t0: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Time steps per unit: the chain step is 1/n.
    pub n: u64,
    pub x0: Vec<f64>,
    pub paths: u64,
    pub seed: u64,
    #[serde(default)]
    pub retain: Option<RetainName>,
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
pub enum RetainName {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "terminal")]
    Terminal,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub a: f64,
    pub b: f64,
    /// Number of grid points; must be a power of two >= 8.
    pub points: usize,
    #[serde(default)]
    pub s_a: Option<f64>,
    #[serde(default)]
    pub s_b: Option<f64>,
    #[serde(default)]
    pub s_points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub xi_max: Option<f64>,
    #[serde(default)]
    pub xi_points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub mode: GeneratorMode,
    /// Test function over x1 (`apply`/`probe`) or over (s, x1)
    /// (`spacetime`).
    pub f: String,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub side: Option<SideName>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub samples: Option<u64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
pub enum GeneratorMode {
    #[serde(rename = "apply")]
    Apply,
    #[serde(rename = "spacetime")]
    Spacetime,
    #[serde(rename = "probe")]
    Probe,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
pub enum SideName {
    #[serde(rename = "right")]
    Right,
    #[serde(rename = "left")]
    Left,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernoffSection {
    #[serde(default)]
    pub s: Option<f64>,
    pub duration: f64,
    pub steps: u64,
    pub g: String,
    /// Lattice point for the evolution-property residual.
    #[serde(default)]
    pub r: Option<f64>,
    /// Finite-difference increment for the evolution-equation residuals.
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub xi_max: Option<f64>,
    #[serde(default)]
    pub xi_points: Option<usize>,
    #[serde(default)]
    pub bumps: Option<usize>,
    #[serde(default)]
    pub piecewise: Option<PiecewiseSection>,
}

/// Golden-scenario parameters for the piecewise-drift suite.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSection {
    pub alpha: f64,
    pub beta: f64,
    pub s0: f64,
}

/// Read and fully validate a configuration file.
pub fn parse_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text, &path.display().to_string())
}

/// Parse configuration text; `origin` names the source in errors.
pub fn parse_config_str(text: &str, origin: &str) -> Result<SimConfig, ConfigError> {
    let cfg: SimConfig = toml::from_str(text).map_err(|source| ConfigError::Toml {
        path: origin.to_string(),
        source: Box::new(source),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = self.symbol.dimension;
        if d == 0 {
            return Err(ConfigError::Invalid("symbol.dimension must be >= 1".into()));
        }
        // building the symbol parses every DSL field
        self.build_symbol()?;
        if self.run.n == 0 {
            return Err(ConfigError::Invalid("run.n must be >= 1".into()));
        }
        if self.run.paths == 0 {
            return Err(ConfigError::Invalid("run.paths must be >= 1".into()));
        }
        if self.run.t_end <= self.run.t0 {
            return Err(ConfigError::Invalid(format!(
                "run.T = {} must exceed run.t0 = {}",
                self.run.t_end, self.run.t0
            )));
        }
        if self.run.x0.len() != d {
            return Err(ConfigError::Invalid(format!(
                "run.x0 has {} entries, symbol.dimension is {d}",
                self.run.x0.len()
            )));
        }
        if let Some(g) = &self.grid {
            if g.b <= g.a {
                return Err(ConfigError::Invalid("grid.b must exceed grid.a".into()));
            }
            if !g.points.is_power_of_two() || g.points < 8 {
                return Err(ConfigError::Invalid(format!(
                    "grid.points must be a power of two >= 8, got {}",
                    g.points
                )));
            }
            if let Some(sp) = g.s_points {
                if !sp.is_power_of_two() || sp < 8 {
                    return Err(ConfigError::Invalid(format!(
                        "grid.s_points must be a power of two >= 8, got {sp}"
                    )));
                }
            }
        }
        if let Some(gen) = &self.generator {
            crate::field::FieldExpr::parse(&gen.f, 1)
                .map_err(|e| ConfigError::Invalid(format!("generator.f: {e}")))?;
            if gen.mode == GeneratorMode::Probe && gen.h.is_some_and(|h| h <= 0.0) {
                return Err(ConfigError::Invalid("generator.h must be positive".into()));
            }
        }
        if let Some(ch) = &self.chernoff {
            crate::field::FieldExpr::parse(&ch.g, 1)
                .map_err(|e| ConfigError::Invalid(format!("chernoff.g: {e}")))?;
            if ch.steps == 0 {
                return Err(ConfigError::Invalid("chernoff.steps must be >= 1".into()));
            }
            if ch.duration < 0.0 {
                return Err(ConfigError::Invalid(
                    "chernoff.duration must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    /// Construct the configured symbol (all coefficient fields parsed).
    pub fn build_symbol(&self) -> Result<LevySymbol, ConfigError> {
        let sec = &self.symbol;
        let d = sec.dimension;
        let mut b = LevySymbol::builder(d);
        if let Some(drift) = &sec.drift {
            let refs: Vec<&str> = drift.iter().map(String::as_str).collect();
            b = b.drift(&refs)?;
        }
        if let Some(diff) = &sec.diffusion {
            let refs: Vec<&str> = diff.iter().map(String::as_str).collect();
            b = b.diffusion_upper(&refs)?;
        }
        if let Some(cpp) = &sec.cpp {
            let jump = match &cpp.jump {
                JumpSection::Point { a } => JumpDist::point(a.clone()),
                JumpSection::TwoPoint { a } => JumpDist::two_point(a.clone()),
                JumpSection::Gaussian { mean, cov } => {
                    let n = mean.len();
                    if cov.len() != n || cov.iter().any(|row| row.len() != n) {
                        return Err(ConfigError::Invalid(format!(
                            "symbol.cpp.jump.cov must be {n}x{n}"
                        )));
                    }
                    let flat: Vec<f64> = cov.iter().flatten().copied().collect();
                    JumpDist::gaussian(mean.clone(), flat)?
                }
            };
            b = b.compound_poisson(&cpp.intensity, jump)?;
        }
        if let Some(st) = &sec.stable {
            b = b.stable(st.alpha, &st.scale)?;
        }
        if let Some(NegativeTimeName::FrozenAtZero) = sec.negative_time {
            b = b.negative_time(NegativeTimeMode::FrozenAtZero);
        }
        Ok(b.build())
    }

    /// The x-grid, defaulting to [-16, 16] with 1024 points.
    pub fn grid_axis(&self) -> (f64, f64, usize) {
        match &self.grid {
            Some(g) => (g.a, g.b, g.points),
            None => (-16.0, 16.0, 1024),
        }
    }

    /// The s-grid for space-time operators, defaulting to [-8, 8] x 64.
    pub fn s_axis(&self) -> (f64, f64, usize) {
        match &self.grid {
            Some(g) => (
                g.s_a.unwrap_or(-8.0),
                g.s_b.unwrap_or(8.0),
                g.s_points.unwrap_or(64),
            ),
            None => (-8.0, 8.0, 64),
        }
    }

    pub fn ensemble_spec(&self, spacetime: bool) -> Result<EnsembleSpec, ConfigError> {
        Ok(EnsembleSpec {
            symbol: self.build_symbol()?,
            x0: self.run.x0.clone(),
            t0: self.run.t0,
            t_end: self.run.t_end,
            n: self.run.n,
            paths: self.run.paths,
            seed: self.run.seed,
            retention: match self.run.retain {
                Some(RetainName::Terminal) => Retention::TerminalOnly,
                _ => Retention::FullPaths,
            },
            workers: self.run.workers,
            spacetime,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE3: &str = r#"
[symbol]
dimension = 1
drift = ["1 + 1*step(s-0.5)"]

[run]
t0 = 0.0
T = 1.0
n = 10
x0 = [0.0]
paths = 1
seed = 42

[check.piecewise]
alpha = 1.0
beta = 2.0
s0 = 0.5
"#;

    #[test]
    fn parses_piecewise_config() {
        let cfg = parse_config_str(EXAMPLE3, "test").unwrap();
        assert_eq!(cfg.symbol.dimension, 1);
        let sym = cfg.build_symbol().unwrap();
        let q = sym.eval(0.0, &[0.0], &[1.0]).unwrap();
        assert_eq!(q, num_complex::Complex64::new(0.0, -1.0));
        assert!(cfg.check.unwrap().piecewise.is_some());
    }

    #[test]
    fn rejects_alpha_two_with_guidance() {
        let text = r#"
[symbol]
dimension = 1
stable = { alpha = 2.0, scale = "1" }

[run]
t0 = 0.0
T = 1.0
n = 10
x0 = [0.0]
paths = 1
seed = 1
"#;
        match parse_config_str(text, "test") {
            Err(ConfigError::Symbol(e)) => {
                let msg = e.to_string();
                assert!(msg.contains("diffusion matrix Q"), "message: {msg}");
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_keys_by_name() {
        let text = r#"
[symbol]
dimension = 1
driftt = ["1"]

[run]
t0 = 0.0
T = 1.0
n = 10
x0 = [0.0]
paths = 1
seed = 1
"#;
        match parse_config_str(text, "test") {
            Err(ConfigError::Toml { source, .. }) => {
                let msg = source.to_string();
                assert!(msg.contains("driftt"), "message: {msg}");
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_dsl_with_key_context() {
        let text = r#"
[symbol]
dimension = 1
drift = ["1 + )"]

[run]
t0 = 0.0
T = 1.0
n = 10
x0 = [0.0]
paths = 1
seed = 1
"#;
        match parse_config_str(text, "test") {
            Err(ConfigError::Symbol(e)) => {
                let msg = e.to_string();
                assert!(msg.contains("drift[0]"), "message: {msg}");
                assert!(msg.contains("offset 5"), "message: {msg}");
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn validation_rules() {
        let base = |patch: &str| {
            format!(
                r#"
[symbol]
dimension = 1

[run]
t0 = 0.0
T = 1.0
n = 10
x0 = [0.0]
paths = 1
seed = 1
{patch}
"#
            )
        };
        assert!(parse_config_str(&base(""), "t").is_ok());
        assert!(parse_config_str(&base("[grid]\na = -1.0\nb = 1.0\npoints = 100"), "t").is_err());
        assert!(parse_config_str(&base("[grid]\na = -1.0\nb = 1.0\npoints = 128"), "t").is_ok());
        let bad_t = base("").replace("T = 1.0", "T = 0.0");
        assert!(parse_config_str(&bad_t, "t").is_err());
        let bad_x0 = base("").replace("x0 = [0.0]", "x0 = [0.0, 1.0]");
        assert!(parse_config_str(&bad_x0, "t").is_err());
    }
}
