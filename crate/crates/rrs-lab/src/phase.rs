//! Phase-space points on the ordered configuration domain.

use crate::config::ModelConfig;
use crate::error::{Error, Result};

/// Point `(q, p)` with `q` strictly decreasing (Weyl chamber) and every
/// adjacent gap at or above the configured floor.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>, cfg: &ModelConfig) -> Result<Self> {
        if q.len() != cfg.n {
            return Err(Error::DimensionMismatch {
                expected: cfg.n,
                got: q.len(),
            });
        }
        if p.len() != cfg.n {
            return Err(Error::DimensionMismatch {
                expected: cfg.n,
                got: p.len(),
            });
        }
        for (i, v) in q.iter().chain(p.iter()).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteCoordinate { index: i % cfg.n });
            }
        }
        for i in 0..q.len().saturating_sub(1) {
            if !(q[i] > q[i + 1]) {
                return Err(Error::UnorderedConfiguration {
                    index: i,
                    value: q[i],
                    next_index: i + 1,
                    next: q[i + 1],
                });
            }
        }
        let point = Self { q, p };
        let min_gap = point.min_gap();
        if point.q.len() > 1 && min_gap < cfg.gap_floor {
            return Err(Error::SingularConfiguration {
                min_gap,
                gap_floor: cfg.gap_floor,
            });
        }
        Ok(point)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.q.len()
    }

    #[inline]
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    #[inline]
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Smallest adjacent gap; the ordering makes this the smallest pairwise
    /// difference as well. Returns infinity for a single particle.
    pub fn min_gap(&self) -> f64 {
        self.q
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min)
    }

    /// Flat state vector `[q, p]` for the integrator.
    pub(crate) fn to_state(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.q.len());
        y.extend_from_slice(&self.q);
        y.extend_from_slice(&self.p);
        y
    }

    pub(crate) fn from_state(y: &[f64], cfg: &ModelConfig) -> Result<Self> {
        let n = cfg.n;
        Self::new(y[..n].to_vec(), y[n..2 * n].to_vec(), cfg)
    }
}
