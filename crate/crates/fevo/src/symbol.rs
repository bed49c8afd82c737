//! Lévy-Khintchine symbols with time- and state-dependent coefficients.
//!
//! A [`LevySymbol`] evaluates the continuous negative definite symbol
//!
//! ```text
//! q(s,x,ξ) = -i b(s,x)·ξ + ½ ξ·Q(s,x)ξ + λ(s,x)(1 - φ(ξ)) + c(s,x)^α Σ_i |ξ_i|^α
//! ```
//!
//! where `b` is the drift, `Q` the (PSD) diffusion matrix, `λ ≥ 0` the
//! compound-Poisson intensity with jump characteristic function `φ`, and
//! the last term an optional symmetric stable component. The compound
//! Poisson part is uncompensated (no small-jump truncation term): any
//! compensation drift must be folded into `b`. The stable term uses the
//! per-coordinate form `Σ_i |ξ_i|^α`, which coincides with the isotropic
//! `|ξ|^α` in one dimension.
//!
//! All coefficients are [`FieldExpr`] fields over `(s, x1..xd)`; symbols
//! are immutable and evaluation is pure.

use num_complex::Complex64;
use thiserror::Error;

use crate::field::{EvalError, FieldExpr, ParseError};
use crate::linalg::{dot, psd_factor, NotPsd};

#[derive(Debug, Clone, Error)]
pub enum SymbolError {
    #[error("{what}: {source}")]
    FieldParse {
        what: String,
        #[source]
        source: ParseError,
    },
    #[error("{what} evaluation failed at s={s}: {source}")]
    FieldEval {
        what: &'static str,
        s: f64,
        #[source]
        source: EvalError,
    },
    #[error("diffusion matrix not PSD at s={s}, x={x:?}: {source}")]
    NotPsd {
        s: f64,
        x: Vec<f64>,
        #[source]
        source: NotPsd,
    },
    #[error("negative jump intensity {value} at s={s}")]
    NegativeIntensity { value: f64, s: f64 },
    #[error("negative stable scale {value} at s={s}")]
    NegativeScale { value: f64, s: f64 },
    #[error("stable index alpha={0} out of range: must lie strictly inside (0, 2); express alpha = 2 through the diffusion matrix Q")]
    BadAlpha(f64),
    #[error("{0}")]
    Shape(String),
    #[error("point has dimension {got}, symbol has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// How the symbol behaves for `s < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeTimeMode {
    /// Coefficients are evaluated at the given (possibly negative) time.
    #[default]
    AsGiven,
    /// Coefficients at `s < 0` are evaluated at `s = 0`, extending a
    /// nonnegative-time symbol onto the whole line.
    FrozenAtZero,
}

/// Jump distribution of the compound Poisson component, with closed-form
/// characteristic function.
#[derive(Debug, Clone)]
pub enum JumpDist {
    /// Deterministic jump by `a`: φ(ξ) = e^{i a·ξ}.
    Point { a: Vec<f64> },
    /// Gaussian jump: φ(ξ) = e^{i m·ξ - ½ ξ·Cξ}.
    Gaussian(GaussianJump),
    /// ±a with probability ½ each: φ(ξ) = cos(a·ξ).
    TwoPointSymmetric { a: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct GaussianJump {
    pub mean: Vec<f64>,
    /// Full covariance, row-major d x d.
    pub cov: Vec<f64>,
    /// PSD factor of `cov`, column-major d x rank (fixed at construction).
    pub(crate) factor: Vec<f64>,
    pub(crate) rank: usize,
}

impl JumpDist {
    pub fn point(a: Vec<f64>) -> JumpDist {
        JumpDist::Point { a }
    }

    pub fn two_point(a: Vec<f64>) -> JumpDist {
        JumpDist::TwoPointSymmetric { a }
    }

    /// Gaussian jump law; `cov` is row-major d x d, must be symmetric PSD.
    pub fn gaussian(mean: Vec<f64>, cov: Vec<f64>) -> Result<JumpDist, SymbolError> {
        let d = mean.len();
        if cov.len() != d * d {
            return Err(SymbolError::Shape(format!(
                "gaussian jump covariance must be {d}x{d}, got {} entries",
                cov.len()
            )));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                if (cov[i * d + j] - cov[j * d + i]).abs() > 1e-12 {
                    return Err(SymbolError::Shape(
                        "gaussian jump covariance is not symmetric".into(),
                    ));
                }
            }
        }
        let mut work = cov.clone();
        let mut factor = Vec::new();
        let rank = psd_factor(&mut work, d, &mut factor).map_err(|source| SymbolError::NotPsd {
            s: f64::NAN,
            x: Vec::new(),
            source,
        })?;
        Ok(JumpDist::Gaussian(GaussianJump {
            mean,
            cov,
            factor,
            rank,
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            JumpDist::Point { a } | JumpDist::TwoPointSymmetric { a } => a.len(),
            JumpDist::Gaussian(g) => g.mean.len(),
        }
    }

    /// Characteristic function φ(ξ); satisfies φ(0) = 1 and |φ| ≤ 1.
    pub fn cf(&self, xi: &[f64]) -> Complex64 {
        match self {
            JumpDist::Point { a } => Complex64::from_polar(1.0, dot(a, xi)),
            JumpDist::Gaussian(g) => {
                let d = g.mean.len();
                let mut quad = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        quad += xi[i] * g.cov[i * d + j] * xi[j];
                    }
                }
                Complex64::from_polar((-0.5 * quad).exp(), dot(&g.mean, xi))
            }
            JumpDist::TwoPointSymmetric { a } => Complex64::new(dot(a, xi).cos(), 0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompoundPoisson {
    pub intensity: FieldExpr,
    pub jump: JumpDist,
}

#[derive(Debug, Clone)]
pub struct StableComponent {
    /// Stability index, strictly inside (0, 2).
    pub alpha: f64,
    pub scale: FieldExpr,
}

/// A Lévy-Khintchine triplet of coefficient fields; see the module docs
/// for the symbol it evaluates.
#[derive(Debug, Clone)]
pub struct LevySymbol {
    dim: usize,
    drift: Vec<FieldExpr>,
    /// Upper triangle of Q, row-major: (0,0), (0,1), .., (1,1), .. —
    /// symmetry is structural.
    diffusion_upper: Vec<FieldExpr>,
    cpp: Option<CompoundPoisson>,
    stable: Option<StableComponent>,
    negative_time: NegativeTimeMode,
    diffusion_zero: bool,
}

pub struct LevySymbolBuilder {
    dim: usize,
    drift: Option<Vec<FieldExpr>>,
    diffusion_upper: Option<Vec<FieldExpr>>,
    cpp: Option<CompoundPoisson>,
    stable: Option<StableComponent>,
    negative_time: NegativeTimeMode,
}

impl LevySymbolBuilder {
    /// Drift vector as expression strings, one per coordinate.
    pub fn drift(mut self, exprs: &[&str]) -> Result<Self, SymbolError> {
        if exprs.len() != self.dim {
            return Err(SymbolError::Shape(format!(
                "drift needs {} entries, got {}",
                self.dim,
                exprs.len()
            )));
        }
        self.drift = Some(parse_fields(exprs, self.dim, "drift")?);
        Ok(self)
    }

    /// Upper triangle of the diffusion matrix, row-major:
    /// `q11, q12, .., q1d, q22, .., qdd`.
    pub fn diffusion_upper(mut self, exprs: &[&str]) -> Result<Self, SymbolError> {
        let want = self.dim * (self.dim + 1) / 2;
        if exprs.len() != want {
            return Err(SymbolError::Shape(format!(
                "diffusion upper triangle needs {want} entries, got {}",
                exprs.len()
            )));
        }
        self.diffusion_upper = Some(parse_fields(exprs, self.dim, "diffusion")?);
        Ok(self)
    }

    pub fn compound_poisson(mut self, intensity: &str, jump: JumpDist) -> Result<Self, SymbolError> {
        if jump.dim() != self.dim {
            return Err(SymbolError::Shape(format!(
                "jump distribution has dimension {}, symbol has {}",
                jump.dim(),
                self.dim
            )));
        }
        let intensity = FieldExpr::parse(intensity, self.dim).map_err(|source| {
            SymbolError::FieldParse {
                what: "cpp intensity".into(),
                source,
            }
        })?;
        self.cpp = Some(CompoundPoisson { intensity, jump });
        Ok(self)
    }

    pub fn stable(mut self, alpha: f64, scale: &str) -> Result<Self, SymbolError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(SymbolError::BadAlpha(alpha));
        }
        let scale =
            FieldExpr::parse(scale, self.dim).map_err(|source| SymbolError::FieldParse {
                what: "stable scale".into(),
                source,
            })?;
        self.stable = Some(StableComponent { alpha, scale });
        Ok(self)
    }

    pub fn negative_time(mut self, mode: NegativeTimeMode) -> Self {
        self.negative_time = mode;
        self
    }

    pub fn build(self) -> LevySymbol {
        let zero = FieldExpr::parse("0", self.dim).expect("literal zero");
        let drift = self.drift.unwrap_or_else(|| vec![zero.clone(); self.dim]);
        let diffusion_upper = self
            .diffusion_upper
            .unwrap_or_else(|| vec![zero; self.dim * (self.dim + 1) / 2]);
        let diffusion_zero = diffusion_upper
            .iter()
            .all(|e| e.constant_value() == Some(0.0));
        LevySymbol {
            dim: self.dim,
            drift,
            diffusion_upper,
            cpp: self.cpp,
            stable: self.stable,
            negative_time: self.negative_time,
            diffusion_zero,
        }
    }
}

impl LevySymbol {
    pub fn builder(dim: usize) -> LevySymbolBuilder {
        assert!(dim >= 1, "dimension must be >= 1");
        LevySymbolBuilder {
            dim,
            drift: None,
            diffusion_upper: None,
            cpp: None,
            stable: None,
            negative_time: NegativeTimeMode::AsGiven,
        }
    }

    /// Symbol with all components zero: q ≡ 0.
    pub fn zero(dim: usize) -> LevySymbol {
        LevySymbol::builder(dim).build()
    }

    /// One-dimensional pure drift with coefficient `expr`.
    pub fn drift_1d(expr: &str) -> Result<LevySymbol, SymbolError> {
        Ok(LevySymbol::builder(1).drift(&[expr])?.build())
    }

    /// One-dimensional Brownian symbol q = ½ q_diag ξ².
    pub fn brownian_1d(q_diag: f64) -> LevySymbol {
        LevySymbol::builder(1)
            .diffusion_upper(&[&format!("{q_diag}")])
            .expect("literal diffusion")
            .build()
    }

    /// Piecewise-constant drift `l(s) = alpha` for `s < s0` and `beta` for
    /// `s >= s0`, the canonical example of a symbol discontinuous in time.
    pub fn piecewise_drift_1d(alpha: f64, beta: f64, s0: f64) -> LevySymbol {
        let expr = format!("{alpha} + ({}) * step(s - ({s0}))", beta - alpha);
        LevySymbol::drift_1d(&expr).expect("generated drift expression")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn negative_time_mode(&self) -> NegativeTimeMode {
        self.negative_time
    }

    pub fn has_diffusion(&self) -> bool {
        !self.diffusion_zero
    }

    pub fn compound_poisson(&self) -> Option<&CompoundPoisson> {
        self.cpp.as_ref()
    }

    pub fn stable_component(&self) -> Option<&StableComponent> {
        self.stable.as_ref()
    }

    /// True if no coefficient field depends on the space variables, which
    /// enables single-FFT operator application.
    pub fn is_x_independent(&self) -> bool {
        let mut fields: Vec<&FieldExpr> = Vec::new();
        fields.extend(self.drift.iter());
        fields.extend(self.diffusion_upper.iter());
        if let Some(cpp) = &self.cpp {
            fields.push(&cpp.intensity);
        }
        if let Some(st) = &self.stable {
            fields.push(&st.scale);
        }
        fields.iter().all(|f| !f.depends_on_x())
    }

    /// Effective coefficient time, honoring the negative-time mode.
    pub fn effective_time(&self, s: f64) -> f64 {
        match self.negative_time {
            NegativeTimeMode::FrozenAtZero if s < 0.0 => 0.0,
            _ => s,
        }
    }

    /// Extend the symbol onto negative times by freezing coefficients at
    /// `s = 0`; values for `s >= 0` are unchanged.
    pub fn extend_negative_time(&self) -> LevySymbol {
        let mut sym = self.clone();
        sym.negative_time = NegativeTimeMode::FrozenAtZero;
        sym
    }

    /// Space-time symbol q_L((s,x),(σ,ξ)) = -iσ + q(s,x,ξ).
    pub fn spacetime(&self) -> SpaceTimeSymbol {
        SpaceTimeSymbol { base: self.clone() }
    }

    pub(crate) fn drift_into(&self, s: f64, x: &[f64], out: &mut [f64]) -> Result<(), SymbolError> {
        let se = self.effective_time(s);
        for (o, e) in out.iter_mut().zip(self.drift.iter()) {
            *o = e
                .eval(se, x)
                .map_err(|source| SymbolError::FieldEval {
                    what: "drift",
                    s,
                    source,
                })?;
        }
        Ok(())
    }

    /// Evaluate Q(s,x) into `full` (row-major d x d) from the stored upper
    /// triangle.
    pub(crate) fn diffusion_into(
        &self,
        s: f64,
        x: &[f64],
        full: &mut [f64],
    ) -> Result<(), SymbolError> {
        let se = self.effective_time(s);
        let d = self.dim;
        let mut k = 0;
        for i in 0..d {
            for j in i..d {
                let v = self.diffusion_upper[k]
                    .eval(se, x)
                    .map_err(|source| SymbolError::FieldEval {
                        what: "diffusion",
                        s,
                        source,
                    })?;
                full[i * d + j] = v;
                full[j * d + i] = v;
                k += 1;
            }
        }
        Ok(())
    }

    /// PSD-factor Q(s,x) into `cols` (column-major d x rank); returns the
    /// rank. `work` is a d*d scratch buffer.
    pub(crate) fn diffusion_factor_into(
        &self,
        s: f64,
        x: &[f64],
        work: &mut [f64],
        cols: &mut Vec<f64>,
    ) -> Result<usize, SymbolError> {
        self.diffusion_into(s, x, work)?;
        psd_factor(work, self.dim, cols).map_err(|source| SymbolError::NotPsd {
            s,
            x: x.to_vec(),
            source,
        })
    }

    pub(crate) fn intensity_at(&self, s: f64, x: &[f64]) -> Result<Option<f64>, SymbolError> {
        match &self.cpp {
            None => Ok(None),
            Some(cpp) => {
                let se = self.effective_time(s);
                let lambda = cpp
                    .intensity
                    .eval(se, x)
                    .map_err(|source| SymbolError::FieldEval {
                        what: "cpp intensity",
                        s,
                        source,
                    })?;
                if lambda < 0.0 {
                    return Err(SymbolError::NegativeIntensity { value: lambda, s });
                }
                Ok(Some(lambda))
            }
        }
    }

    pub(crate) fn stable_scale_at(&self, s: f64, x: &[f64]) -> Result<Option<(f64, f64)>, SymbolError> {
        match &self.stable {
            None => Ok(None),
            Some(st) => {
                let se = self.effective_time(s);
                let c = st
                    .scale
                    .eval(se, x)
                    .map_err(|source| SymbolError::FieldEval {
                        what: "stable scale",
                        s,
                        source,
                    })?;
                if c < 0.0 {
                    return Err(SymbolError::NegativeScale { value: c, s });
                }
                Ok(Some((st.alpha, c)))
            }
        }
    }

    /// Evaluate q(s,x,ξ). The diffusion matrix is PSD-factorized at every
    /// evaluation; a failed factorization is an error, never a clamp.
    pub fn eval(&self, s: f64, x: &[f64], xi: &[f64]) -> Result<Complex64, SymbolError> {
        if x.len() != self.dim || xi.len() != self.dim {
            return Err(SymbolError::DimensionMismatch {
                expected: self.dim,
                got: if x.len() != self.dim { x.len() } else { xi.len() },
            });
        }
        let d = self.dim;
        let mut drift = vec![0.0; d];
        self.drift_into(s, x, &mut drift)?;
        let mut q = Complex64::new(0.0, -dot(&drift, xi));

        if !self.diffusion_zero {
            let mut work = vec![0.0; d * d];
            let mut cols = Vec::new();
            let rank = self.diffusion_factor_into(s, x, &mut work, &mut cols)?;
            // ½ ξ·Qξ through the factor, which keeps the quadratic form
            // nonnegative by construction
            let mut quad = 0.0;
            for k in 0..rank {
                let proj = dot(&cols[k * d..(k + 1) * d], xi);
                quad += proj * proj;
            }
            q.re += 0.5 * quad;
        }

        if let Some(cpp) = &self.cpp {
            let lambda = self.intensity_at(s, x)?.expect("cpp present");
            let phi = cpp.jump.cf(xi);
            q.re += lambda * (1.0 - phi.re);
            q.im += lambda * (-phi.im);
        }

        if let Some((alpha, c)) = self.stable_scale_at(s, x)? {
            let sum: f64 = xi.iter().map(|v| v.abs().powf(alpha)).sum();
            q.re += c.powf(alpha) * sum;
        }
        Ok(q)
    }
}

fn parse_fields(exprs: &[&str], dim: usize, what: &str) -> Result<Vec<FieldExpr>, SymbolError> {
    exprs
        .iter()
        .enumerate()
        .map(|(i, text)| {
            FieldExpr::parse(text, dim).map_err(|source| SymbolError::FieldParse {
                what: format!("{what}[{i}]"),
                source,
            })
        })
        .collect()
}

/// Symbol of the space-time generator L = ∂_s + A_s⁺:
/// q_L((s,x),(σ,ξ)) = -iσ + q(s,x,ξ).
#[derive(Debug, Clone)]
pub struct SpaceTimeSymbol {
    base: LevySymbol,
}

impl SpaceTimeSymbol {
    pub fn base(&self) -> &LevySymbol {
        &self.base
    }

    pub fn eval(&self, s: f64, x: &[f64], sigma: f64, xi: &[f64]) -> Result<Complex64, SymbolError> {
        let q = self.base.eval(s, x, xi)?;
        Ok(Complex64::new(q.re, q.im - sigma))
    }
}
