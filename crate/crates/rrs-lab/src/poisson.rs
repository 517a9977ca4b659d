//! Gradients, canonical Poisson brackets, and the bracket-algebra residual
//! suites.
//!
//! Gradients are forward-mode dual sweeps, one seeded coordinate per pass
//! (2n passes). A whole batch of observables shares one engine per seed, so
//! suites that need many invariants at one point pay for each matrix power
//! once. The bracket
//!
//! ```text
//! {f, g} = sum_i (df/dq_i * dg/dp_i - df/dp_i * dg/dq_i)
//! ```
//!
//! is antisymmetric bit-for-bit by construction.

use crate::config::{Convention, ModelConfig};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::model::InvariantEngine;
use crate::observable::Observable;
use crate::phase::PhasePoint;
use crate::sample::sample_points;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Phase-space gradient of a scalar observable.
#[derive(Clone, Debug)]
pub struct Gradient {
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
}

/// Values and gradients of a batch of observables at one point.
///
/// One dual sweep per coordinate evaluates every observable in the batch
/// with shared cached matrix powers.
pub fn batch_values_and_gradients(
    observables: &[Observable],
    point: &PhasePoint,
    cfg: &ModelConfig,
) -> Result<(Vec<f64>, Vec<Gradient>)> {
    let n = cfg.n;
    for obs in observables {
        obs.validate(cfg)?;
    }
    let mut values = Vec::with_capacity(observables.len());
    {
        let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
        for obs in observables {
            values.push(obs.eval_with_engine(&mut engine, cfg)?);
        }
    }
    let mut grads: Vec<Gradient> = observables
        .iter()
        .map(|_| Gradient {
            dq: vec![0.0; n],
            dp: vec![0.0; n],
        })
        .collect();
    for seed in 0..2 * n {
        let q: Vec<Dual> = point
            .q()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if seed == i {
                    Dual::seeded(x)
                } else {
                    Dual::constant(x)
                }
            })
            .collect();
        let p: Vec<Dual> = point
            .p()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if seed == n + i {
                    Dual::seeded(x)
                } else {
                    Dual::constant(x)
                }
            })
            .collect();
        let mut engine = InvariantEngine::new(&q, &p, cfg)?;
        for (obs, grad) in observables.iter().zip(grads.iter_mut()) {
            let d = obs.eval_with_engine(&mut engine, cfg)?.der;
            if !d.is_finite() {
                return Err(Error::NonFiniteDerivative {
                    observable: obs.label(),
                    index: seed,
                });
            }
            if seed < n {
                grad.dq[seed] = d;
            } else {
                grad.dp[seed - n] = d;
            }
        }
    }
    Ok((values, grads))
}

/// Gradient of one observable via dual sweeps.
pub fn gradient(obs: &Observable, point: &PhasePoint, cfg: &ModelConfig) -> Result<Gradient> {
    let (_, mut grads) = batch_values_and_gradients(std::slice::from_ref(obs), point, cfg)?;
    Ok(grads.pop().unwrap())
}

/// Canonical bracket from two precomputed gradients.
pub fn bracket_from_gradients(f: &Gradient, g: &Gradient) -> f64 {
    f.dq.iter()
        .zip(&f.dp)
        .zip(g.dq.iter().zip(&g.dp))
        .map(|((fq, fp), (gq, gp))| fq * gp - fp * gq)
        .sum()
}

/// Scale of the summed gradient products, for cancellation-aware residual
/// normalization.
pub fn bracket_scale(f: &Gradient, g: &Gradient) -> f64 {
    f.dq.iter()
        .zip(&f.dp)
        .zip(g.dq.iter().zip(&g.dp))
        .map(|((fq, fp), (gq, gp))| (fq * gp).abs() + (fp * gq).abs())
        .sum()
}

/// Canonical Poisson bracket `{f, g}` at a point.
pub fn poisson_bracket(
    f: &Observable,
    g: &Observable,
    point: &PhasePoint,
    cfg: &ModelConfig,
) -> Result<f64> {
    let (_, grads) = batch_values_and_gradients(&[f.clone(), g.clone()], point, cfg)?;
    Ok(bracket_from_gradients(&grads[0], &grads[1]))
}

/// Inclusive index window for the bracket suites, clipped by the
/// conditioning precondition `|j| + |k| <= 2n + 2`.
#[derive(Clone, Copy, Debug)]
pub struct IndexRange {
    pub j: (i32, i32),
    pub k: (i32, i32),
}

impl IndexRange {
    pub fn new(j: (i32, i32), k: (i32, i32)) -> Self {
        Self { j, k }
    }

    /// All admissible `(j, k)` pairs for a given particle count.
    pub fn pairs(&self, n: usize) -> Vec<(i32, i32)> {
        let bound = 2 * n as i32 + 2;
        let mut out = Vec::new();
        for j in self.j.0..=self.j.1 {
            for k in self.k.0..=self.k.1 {
                if j.abs() + k.abs() <= bound {
                    out.push((j, k));
                }
            }
        }
        out
    }
}

impl Default for IndexRange {
    fn default() -> Self {
        Self {
            j: (-2, 3),
            k: (-2, 3),
        }
    }
}

/// Worst residual of one `(j, k)` pair across the sampled points.
#[derive(Clone, Copy, Debug)]
pub struct PairResidual {
    pub j: i32,
    pub k: i32,
    pub max_residual: f64,
}

/// Outcome of a bracket-algebra residual suite.
#[derive(Clone, Debug)]
pub struct BracketSuiteReport {
    pub suite: &'static str,
    pub convention: Convention,
    pub samples: usize,
    pub rejected: usize,
    pub pairs: Vec<PairResidual>,
    /// Worst residual against the nominal right-hand side.
    pub max_residual: f64,
    /// Bracket scale fitted across the suite rows.
    pub kappa: f64,
    /// Worst residual against the kappa-scaled right-hand side.
    pub max_residual_scaled: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub finding: Option<String>,
}

fn normalized(residual: f64, rhs: f64) -> f64 {
    residual.abs() / (1.0 + rhs.abs())
}

struct SuiteRows {
    /// `(j, k, lhs bracket, nominal rhs)` per pair.
    rows: Vec<(i32, i32, f64, f64)>,
}

/// Rows for `{I1_k, I_j}` against `j * I_{j+k}`.
fn mixed_rows(cfg: &ModelConfig, pairs: &[(i32, i32)], point: &PhasePoint) -> Result<SuiteRows> {
    let mut ks: Vec<i32> = pairs.iter().map(|&(_, k)| k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut js: Vec<i32> = pairs.iter().map(|&(j, _)| j).collect();
    js.sort_unstable();
    js.dedup();
    let observables: Vec<Observable> = ks
        .iter()
        .map(|&k| Observable::WeightedTrace(k))
        .chain(js.iter().map(|&j| Observable::PowerTrace(j)))
        .collect();
    let (_, grads) = batch_values_and_gradients(&observables, point, cfg)?;
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    let mut rows = Vec::with_capacity(pairs.len());
    for &(j, k) in pairs {
        let gk = &grads[ks.binary_search(&k).unwrap()];
        let gj = &grads[ks.len() + js.binary_search(&j).unwrap()];
        let lhs = bracket_from_gradients(gk, gj);
        let rhs = j as f64 * engine.trace_power(j + k)?;
        rows.push((j, k, lhs, rhs));
    }
    Ok(SuiteRows { rows })
}

/// Rows for `{I1_k, I1_j}` against `(j - k) * I1_{j+k}`.
fn virasoro_rows(
    cfg: &ModelConfig,
    pairs: &[(i32, i32)],
    point: &PhasePoint,
) -> Result<SuiteRows> {
    let mut idx: Vec<i32> = pairs.iter().flat_map(|&(j, k)| [j, k]).collect();
    idx.sort_unstable();
    idx.dedup();
    let observables: Vec<Observable> =
        idx.iter().map(|&k| Observable::WeightedTrace(k)).collect();
    let (_, grads) = batch_values_and_gradients(&observables, point, cfg)?;
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    let mut rows = Vec::with_capacity(pairs.len());
    for &(j, k) in pairs {
        let gk = &grads[idx.binary_search(&k).unwrap()];
        let gj = &grads[idx.binary_search(&j).unwrap()];
        let lhs = bracket_from_gradients(gk, gj);
        let rhs = (j - k) as f64 * engine.weighted_trace(j + k)?;
        rows.push((j, k, lhs, rhs));
    }
    Ok(SuiteRows { rows })
}

fn run_suite(
    suite: &'static str,
    cfg: &ModelConfig,
    range: &IndexRange,
    samples: usize,
    rng: &mut ChaCha8Rng,
    rows_fn: impl Fn(&ModelConfig, &[(i32, i32)], &PhasePoint) -> Result<SuiteRows> + Sync,
) -> Result<BracketSuiteReport> {
    let pairs = range.pairs(cfg.n);
    let (points, log) = sample_points(cfg, samples, rng);
    let per_point: Vec<SuiteRows> = points
        .par_iter()
        .map(|point| rows_fn(cfg, &pairs, point))
        .collect::<Result<_>>()?;

    // kappa = argmin_k sum (lhs - k * rhs)^2
    let mut num = 0.0;
    let mut den = 0.0;
    for sr in &per_point {
        for &(_, _, lhs, rhs) in &sr.rows {
            num += lhs * rhs;
            den += rhs * rhs;
        }
    }
    let kappa = if den > 0.0 { num / den } else { 1.0 };

    let mut pair_residuals: Vec<PairResidual> = pairs
        .iter()
        .map(|&(j, k)| PairResidual {
            j,
            k,
            max_residual: 0.0,
        })
        .collect();
    let mut max_residual = 0.0f64;
    let mut max_residual_scaled = 0.0f64;
    for sr in &per_point {
        for (slot, &(_, _, lhs, rhs)) in pair_residuals.iter_mut().zip(&sr.rows) {
            let r = normalized(lhs - rhs, rhs);
            slot.max_residual = slot.max_residual.max(r);
            max_residual = max_residual.max(r);
            max_residual_scaled =
                max_residual_scaled.max(normalized(lhs - kappa * rhs, kappa * rhs));
        }
    }

    let tolerance = cfg.tol.rel_tol;
    // A clean scale mismatch is a finding, not a blind failure.
    let pass = max_residual_scaled < tolerance;
    let finding = ((kappa - 1.0).abs() > tolerance && pass).then(|| {
        format!(
            "{suite}: bracket scale kappa = {kappa:.9} under the {} convention (nominal 1)",
            cfg.convention
        )
    });
    Ok(BracketSuiteReport {
        suite,
        convention: cfg.convention,
        samples: log.accepted,
        rejected: log.rejected,
        pairs: pair_residuals,
        max_residual,
        kappa,
        max_residual_scaled,
        tolerance,
        pass,
        finding,
    })
}

/// Residual suite for the ladder relation `{I1_k, I_j} = j I_{j+k}`.
pub fn mixed_bracket_suite(
    cfg: &ModelConfig,
    range: &IndexRange,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BracketSuiteReport> {
    run_suite("mixed-bracket", cfg, range, samples, rng, mixed_rows)
}

/// Residual suite for the centerless Virasoro relation
/// `{I1_k, I1_j} = (j - k) I1_{k+j}`.
pub fn virasoro_bracket_suite(
    cfg: &ModelConfig,
    range: &IndexRange,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BracketSuiteReport> {
    run_suite("virasoro-bracket", cfg, range, samples, rng, virasoro_rows)
}

/// Least-squares calibration of the bracket scale `kappa` in
/// `{I1_k, I_j} = kappa * j * I_{j+k}`.
#[derive(Clone, Copy, Debug)]
pub struct KappaCalibration {
    pub kappa: f64,
    /// Relative root-mean-square misfit of the one-parameter model.
    pub fit_residual: f64,
    pub rows: usize,
    pub samples: usize,
    /// Whether the one-parameter model explains the data to `rel_tol`.
    pub consistent: bool,
}

pub fn calibrate_kappa(
    cfg: &ModelConfig,
    range: &IndexRange,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<KappaCalibration> {
    if samples < 10 {
        return Err(Error::Config(format!(
            "kappa calibration needs at least 10 samples, got {samples}"
        )));
    }
    let pairs: Vec<(i32, i32)> = range
        .pairs(cfg.n)
        .into_iter()
        .filter(|&(j, _)| j != 0) // degenerate rows: both sides vanish
        .collect();
    let (points, log) = sample_points(cfg, samples, rng);
    let rows: Vec<(f64, f64)> = points
        .par_iter()
        .map(|point| {
            let sr = mixed_rows(cfg, &pairs, point)?;
            Ok(sr
                .rows
                .iter()
                .map(|&(_, _, lhs, rhs)| (lhs, rhs))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let den: f64 = rows.iter().map(|(_, a)| a * a).sum();
    if den == 0.0 {
        return Err(Error::DegenerateFit("all calibration rows are zero"));
    }
    let num: f64 = rows.iter().map(|(b, a)| a * b).sum();
    let kappa = num / den;
    let ss_res: f64 = rows.iter().map(|(b, a)| (b - kappa * a).powi(2)).sum();
    let ss_tot: f64 = rows.iter().map(|(b, _)| b * b).sum();
    let fit_residual = (ss_res / ss_tot.max(f64::MIN_POSITIVE)).sqrt();
    Ok(KappaCalibration {
        kappa,
        fit_residual,
        rows: rows.len(),
        samples: log.accepted,
        consistent: fit_residual < cfg.tol.rel_tol,
    })
}
