//! Seeded phase-space sampling.

use crate::config::ModelConfig;
use crate::error::Result;
use crate::phase::PhasePoint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Name of the generator recorded in reports.
pub const RNG_NAME: &str = "chacha8";

/// Bookkeeping for rejected draws.
#[derive(Clone, Copy, Debug, Default)]
pub struct SampleLog {
    pub accepted: usize,
    pub rejected: usize,
}

/// Draw one point: adjacent gaps uniform in `q_gap * |chi|`, momenta uniform
/// in the `p` range, configuration centroid uniform in `q_center * |chi|`.
pub fn sample_point(cfg: &ModelConfig, rng: &mut ChaCha8Rng) -> Result<PhasePoint> {
    let n = cfg.n;
    let scale = cfg.chi.abs();
    let (glo, ghi) = cfg.ranges.q_gap;
    let (plo, phi) = cfg.ranges.p;
    let (clo, chi_hi) = cfg.ranges.q_center;
    let gaps: Vec<f64> = (0..n.saturating_sub(1))
        .map(|_| scale * rng.random_range(glo..=ghi))
        .collect();
    // positions from the top of the chamber, then recentered
    let mut q = Vec::with_capacity(n);
    let mut x = 0.0;
    q.push(x);
    for g in &gaps {
        x -= g;
        q.push(x);
    }
    let mean = q.iter().sum::<f64>() / n as f64;
    let center = scale * rng.random_range(clo..=chi_hi);
    for qi in &mut q {
        *qi += center - mean;
    }
    let p: Vec<f64> = (0..n).map(|_| rng.random_range(plo..=phi)).collect();
    PhasePoint::new(q, p, cfg)
}

/// Draw `count` valid points, resampling (and logging) any rejected draw.
pub fn sample_points(
    cfg: &ModelConfig,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<PhasePoint>, SampleLog) {
    let mut log = SampleLog::default();
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        match sample_point(cfg, rng) {
            Ok(p) => {
                log.accepted += 1;
                points.push(p);
            }
            Err(_) => log.rejected += 1,
        }
    }
    (points, log)
}
