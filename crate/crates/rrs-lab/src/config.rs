//! Model configuration: particle count, coupling, momentum convention,
//! tolerances, and sampling ranges.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Exponent convention for the momentum factor in the dressing vector.
///
/// `Half` uses `exp(p/2)` and makes the bracket algebra close with unit
/// structure constants; `Literal` uses `exp(p)` and rescales every bracket by
/// a factor of two. Both are kept so the tension can be measured instead of
/// assumed away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Half,
    Literal,
}

impl Convention {
    /// The factor `s` in `u_j ~ exp(s * p_j)`.
    #[inline]
    pub fn momentum_scale(self) -> f64 {
        match self {
            Convention::Half => 0.5,
            Convention::Literal => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Half => "half",
            Convention::Literal => "literal",
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "half" => Ok(Convention::Half),
            "literal" => Ok(Convention::Literal),
            other => Err(Error::Config(format!(
                "unknown convention {other:?}; expected \"half\" or \"literal\""
            ))),
        }
    }
}

/// Tolerance bundle shared by the verification suites.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for structural residuals (Hermiticity, realness).
    pub abs_tol: f64,
    /// Relative tolerance for algebraic residuals.
    pub rel_tol: f64,
    /// Relative drift bound for conserved quantities along flows.
    pub drift_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            drift_tol: 1e-6,
        }
    }
}

/// Sampling box for random phase-space points. Lengths are in units of
/// `|chi|`, momenta are absolute.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SampleRanges {
    /// Adjacent gap range, in units of `|chi|`.
    pub q_gap: (f64, f64),
    /// Momentum range.
    pub p: (f64, f64),
    /// Centroid range for the configuration, in units of `|chi|`. Absolute
    /// positions matter for the weighted traces, so the centroid is drawn
    /// rather than pinned at zero.
    pub q_center: (f64, f64),
}

impl Default for SampleRanges {
    fn default() -> Self {
        Self {
            q_gap: (1.0, 5.0),
            p: (-1.5, 1.5),
            q_center: (-2.0, 2.0),
        }
    }
}

/// Full model configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Particle count.
    pub n: usize,
    /// Coupling constant, nonzero.
    pub chi: f64,
    pub convention: Convention,
    /// Minimum admissible adjacent gap; guards the `1/(q_j - q_m)^2`
    /// singularity.
    pub gap_floor: f64,
    pub tol: Tolerances,
    pub ranges: SampleRanges,
}

impl ModelConfig {
    /// Configuration with default convention (`Half`), tolerances, sampling
    /// ranges, and `gap_floor = 1e-6 * |chi|`.
    pub fn new(n: usize, chi: f64) -> Result<Self> {
        let cfg = Self {
            n,
            chi,
            convention: Convention::Half,
            gap_floor: 1e-6 * chi.abs(),
            tol: Tolerances::default(),
            ranges: SampleRanges::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParticleCount(self.n));
        }
        if self.chi == 0.0 || !self.chi.is_finite() {
            return Err(Error::ZeroCoupling);
        }
        for (name, value) in [
            ("gap_floor", self.gap_floor),
            ("abs_tol", self.tol.abs_tol),
            ("rel_tol", self.tol.rel_tol),
            ("drift_tol", self.tol.drift_tol),
        ] {
            if !(value > 0.0) {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        let (glo, ghi) = self.ranges.q_gap;
        if !(glo > 0.0 && ghi >= glo) {
            return Err(Error::Config(format!(
                "q_gap range ({glo}, {ghi}) must satisfy 0 < lo <= hi"
            )));
        }
        let (plo, phi) = self.ranges.p;
        if !(phi >= plo) {
            return Err(Error::Config(format!("p range ({plo}, {phi}) is empty")));
        }
        Ok(())
    }
}
