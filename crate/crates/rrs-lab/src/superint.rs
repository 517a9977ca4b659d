//! Extra constants of motion and the independence tests behind maximal
//! superintegrability.
//!
//! For a fixed `j`, the constants `C_{k,j} = I1_k I_{2j} - I1_j I_{k+j}`
//! (`k != j`) Poisson commute with `I_j`; `K_j` pairs with the principal
//! Hamiltonian and `L_j` with the total momentum. Together with the
//! commuting invariants they give `2n - 1` generically independent constants
//! for the respective flows.
//!
//! Two Jacobian computations certify the construction:
//!
//! - [`jacobian_phase_space`]: the full matrix of partials of
//!   `(I_1..I_n, I1_1..I1_n)` with respect to `(p, q)`, expected to have
//!   nonzero determinant at generic points;
//! - [`jacobian_invariant_coords_at`]: the algebraic Jacobian of
//!   `(I_a, C_{b,j})` or `(I_a, K_b)` in the coordinates `(I_alpha, I1_beta)`,
//!   whose determinant equals `(I_{2j})^(n-1)` or `(I_2 - n)^(n-1)` exactly.
//!
//! The second computation treats higher traces `I_m` (`m > n`) as functions
//! of the leading ones through the characteristic-polynomial recursion, with
//! derivatives taken by dual numbers; the reference value comes from direct
//! matrix powers, so the identity is a genuine two-route check.

use crate::config::ModelConfig;
use crate::dual::{Dual, RsScalar};
use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::model::InvariantEngine;
use crate::observable::{InvariantPoly, Observable, UserFlowConstant};
use crate::phase::PhasePoint;
use crate::poisson::{batch_values_and_gradients, bracket_from_gradients, bracket_scale};
use crate::sample::sample_points;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Elementary symmetric polynomials `e_1..e_n` from power sums `s_1..s_n`
/// (Newton's identities).
pub(crate) fn elementary_from_power_sums<S: RsScalar>(s: &[S]) -> Vec<S> {
    let n = s.len();
    let mut e = vec![S::one()]; // e_0
    for k in 1..=n {
        let mut acc = S::zero();
        let mut sign = 1.0;
        for i in 1..=k {
            acc = acc + S::from_f64(sign) * e[k - i] * s[i - 1];
            sign = -sign;
        }
        e.push(acc / S::from_f64(k as f64));
    }
    e
}

/// Extend power sums `s_1..s_n` of an `n x n` matrix up to `s_m_max` using
/// the characteristic-polynomial recursion
/// `s_m = sum_{i=1..n} (-1)^(i-1) e_i s_{m-i}` with `s_0 = n`.
pub(crate) fn extend_power_sums<S: RsScalar>(leading: &[S], m_max: usize) -> Vec<S> {
    let n = leading.len();
    let e = elementary_from_power_sums(leading);
    let mut s = Vec::with_capacity(m_max + 1);
    s.push(S::from_f64(n as f64)); // s_0
    s.extend_from_slice(leading);
    for m in n + 1..=m_max {
        let mut acc = S::zero();
        let mut sign = 1.0;
        for i in 1..=n {
            acc = acc + S::from_f64(sign) * e[i] * s[m - i];
            sign = -sign;
        }
        s.push(acc);
    }
    s
}

/// Family of extra constants, each carrying the observable it must commute
/// with.
#[derive(Clone, Debug)]
pub enum ConstantFamily {
    /// `C_{k,j}` with commutant `I_j`.
    C { k: usize, j: usize },
    /// `K_j` with commutant the principal Hamiltonian.
    K { j: usize },
    /// `L_j` with commutant the total momentum.
    L { j: usize },
    /// User flow constant with a chosen commutant `I(I_1..I_n)`.
    User {
        constant: UserFlowConstant,
        commutant: InvariantPoly,
    },
}

impl ConstantFamily {
    pub fn observable(&self) -> Observable {
        match self {
            ConstantFamily::C { k, j } => Observable::ExtraC { k: *k, j: *j },
            ConstantFamily::K { j } => Observable::ExtraK { j: *j },
            ConstantFamily::L { j } => Observable::ExtraL { j: *j },
            ConstantFamily::User { constant, .. } => Observable::UserF(constant.clone()),
        }
    }

    pub fn commutant(&self) -> Observable {
        match self {
            ConstantFamily::C { j, .. } => Observable::PowerTrace(*j as i32),
            ConstantFamily::K { .. } => Observable::Hamiltonian,
            ConstantFamily::L { .. } => Observable::Momentum,
            ConstantFamily::User { commutant, .. } => {
                Observable::InvariantFunction(commutant.clone())
            }
        }
    }

    pub fn label(&self) -> String {
        format!(
            "{} vs {}",
            self.observable().label(),
            self.commutant().label()
        )
    }

    pub fn validate(&self, cfg: &ModelConfig) -> Result<()> {
        self.observable().validate(cfg)?;
        self.commutant().validate(cfg)
    }
}

/// Evaluate the constant at a point.
pub fn eval_constant(fam: &ConstantFamily, point: &PhasePoint, cfg: &ModelConfig) -> Result<f64> {
    fam.validate(cfg)?;
    fam.observable().eval(point, cfg)
}

/// Residual report of a commutation check.
#[derive(Clone, Debug)]
pub struct CommutationReport {
    pub family: String,
    pub samples: usize,
    pub rejected: usize,
    /// Worst `|{F, commutant}|` normalized by the gradient-product scale.
    pub max_residual: f64,
    /// Worst orthogonality-identity residual (flow constants only).
    pub max_orthogonality_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check `{F, commutant} = 0` over sampled points. For user flow constants
/// the defining orthogonality identity
/// `sum_k (sum_j j I_{j+k} dI/dI_j) U^k = 0` is verified pointwise as well.
pub fn commutation_check(
    fam: &ConstantFamily,
    cfg: &ModelConfig,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CommutationReport> {
    fam.validate(cfg)?;
    let (points, log) = sample_points(cfg, samples, rng);
    let obs = fam.observable();
    let com = fam.commutant();
    let results: Vec<(f64, f64)> = points
        .par_iter()
        .map(|point| {
            let (_, grads) =
                batch_values_and_gradients(&[obs.clone(), com.clone()], point, cfg)?;
            let br = bracket_from_gradients(&grads[0], &grads[1]);
            let scale = bracket_scale(&grads[0], &grads[1]);
            let resid = br.abs() / (1.0 + scale);
            let ortho = match fam {
                ConstantFamily::User {
                    constant,
                    commutant,
                } => orthogonality_residual(constant, commutant, point, cfg)?,
                _ => 0.0,
            };
            Ok((resid, ortho))
        })
        .collect::<Result<_>>()?;
    let max_residual = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_orthogonality_residual = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let tolerance = cfg.tol.rel_tol;
    Ok(CommutationReport {
        family: fam.label(),
        samples: log.accepted,
        rejected: log.rejected,
        max_residual,
        max_orthogonality_residual,
        tolerance,
        pass: max_residual < tolerance && max_orthogonality_residual < tolerance,
    })
}

fn orthogonality_residual(
    constant: &UserFlowConstant,
    commutant: &InvariantPoly,
    point: &PhasePoint,
    cfg: &ModelConfig,
) -> Result<f64> {
    let n = cfg.n;
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    let leading = engine.leading_invariants()?;
    let partials: Vec<f64> = (1..=n).map(|j| commutant.partial(j).eval(&leading)).collect();
    let mut acc = 0.0;
    let mut scale = 0.0;
    for (idx, component) in constant.components.iter().enumerate() {
        let k = (idx + 1) as i32;
        let mut inner = 0.0;
        for (j, dj) in partials.iter().enumerate() {
            let term = (j + 1) as f64 * engine.trace_power(j as i32 + 1 + k)? * dj;
            inner += term;
            scale += term.abs();
        }
        acc += inner * component.eval(&leading);
    }
    Ok(acc.abs() / (1.0 + scale))
}

/// Full phase-space Jacobian of `(I_1..I_n, I1_1..I1_n)` with respect to
/// `(p_1..p_n, q_1..q_n)`.
#[derive(Clone, Debug)]
pub struct PhaseJacobian {
    pub det: f64,
    pub matrix: RMat,
    /// Genericity scale: the closed-form determinant of the decoupled
    /// system at the same momenta (see [`decoupled_jacobian_scale`]).
    pub scale: f64,
}

/// Closed-form Jacobian determinant of the decoupled (widely separated)
/// system: with `y_i = exp(2 s p_i)` the matrix factors into Vandermonde
/// blocks and
///
/// ```text
/// det -> n! (2s)^n (prod_i y_i * prod_{i<j} (y_j - y_i))^2.
/// ```
///
/// The interacting determinant approaches this value as the gaps grow and
/// empirically never falls below it on the sampling box, which makes it the
/// natural nonvanishing scale.
pub fn decoupled_jacobian_scale(p: &[f64], cfg: &ModelConfig) -> f64 {
    let n = p.len();
    let two_s = 2.0 * cfg.convention.momentum_scale();
    let y: Vec<f64> = p.iter().map(|pi| (two_s * pi).exp()).collect();
    let mut vandermonde = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            vandermonde *= y[j] - y[i];
        }
    }
    let prod: f64 = y.iter().product();
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    (factorial * two_s.powi(n as i32) * (prod * vandermonde).powi(2)).abs()
}

pub fn jacobian_phase_space(point: &PhasePoint, cfg: &ModelConfig) -> Result<PhaseJacobian> {
    let n = cfg.n;
    let observables: Vec<Observable> = (1..=n as i32)
        .map(Observable::PowerTrace)
        .chain((1..=n as i32).map(Observable::WeightedTrace))
        .collect();
    let (_, grads) = batch_values_and_gradients(&observables, point, cfg)?;
    let mut matrix = RMat::zeros(2 * n, 2 * n);
    for (row, g) in grads.iter().enumerate() {
        for i in 0..n {
            matrix.set(row, i, g.dp[i]);
            matrix.set(row, n + i, g.dq[i]);
        }
    }
    let det = matrix.det();
    let scale = decoupled_jacobian_scale(point.p(), cfg);
    Ok(PhaseJacobian { det, matrix, scale })
}

/// Which family enters the invariant-coordinate Jacobian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantCoordMode {
    /// Rows `(I_a, C_{b,j})`, determinant `(I_{2j})^(n-1)`.
    C { j: usize },
    /// Rows `(I_a, K_b)`, determinant `(I_2 - n)^(n-1)`.
    K,
}

impl InvariantCoordMode {
    fn excluded_index(&self) -> usize {
        match self {
            InvariantCoordMode::C { j } => *j,
            InvariantCoordMode::K => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            InvariantCoordMode::C { j } => format!("C-mode (j = {j})"),
            InvariantCoordMode::K => "K-mode".to_string(),
        }
    }
}

/// Determinant of the algebraic Jacobian in the coordinates
/// `(I_alpha, I1_beta)` together with its closed-form reference value.
#[derive(Clone, Copy, Debug)]
pub struct InvariantJacobian {
    pub det: f64,
    pub reference: f64,
    pub relative_error: f64,
}

pub fn jacobian_invariant_coords_at(
    mode: InvariantCoordMode,
    point: &PhasePoint,
    cfg: &ModelConfig,
) -> Result<InvariantJacobian> {
    let n = cfg.n;
    if let InvariantCoordMode::C { j } = mode {
        if j == 0 || j > n {
            return Err(Error::IndexOutOfRange(format!(
                "C-mode index {j} outside 1..={n}"
            )));
        }
    }
    if mode == InvariantCoordMode::K && n < 2 {
        return Err(Error::IndexOutOfRange(
            "K-mode needs at least two particles".to_string(),
        ));
    }
    let excluded = mode.excluded_index();
    let b_set: Vec<usize> = (1..=n).filter(|&b| b != excluded).collect();

    // values at the point: leading invariants and weighted traces
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    let leading = engine.leading_invariants()?;
    let weighted: Vec<f64> = (1..=n as i32)
        .map(|k| engine.weighted_trace(k))
        .collect::<Result<_>>()?;

    // highest trace index entering the constants: b + j <= n + j (C-mode,
    // with 2j <= n + j), or b + 1 <= n + 1 (K-mode)
    let m_max = match mode {
        InvariantCoordMode::C { j } => n + j,
        InvariantCoordMode::K => n + 1,
    };

    let dim = 2 * n - 1;
    let mut matrix = RMat::zeros(dim, dim);
    // upper block: rows I_a
    for a in 0..n {
        matrix.set(a, a, 1.0);
    }
    // lower rows: the constants, differentiated algebraically.
    // Partial derivatives with respect to I_alpha go through the trace
    // recursion with a dual seed; partials with respect to I1_beta are the
    // explicit polynomial coefficients.
    for (row_offset, &b) in b_set.iter().enumerate() {
        let row = n + row_offset;
        // d/dI_alpha via dual-seeded recursion
        for alpha in 1..=n {
            let seeded: Vec<Dual> = leading
                .iter()
                .enumerate()
                .map(|(idx, &v)| {
                    if idx + 1 == alpha {
                        Dual::seeded(v)
                    } else {
                        Dual::constant(v)
                    }
                })
                .collect();
            let s = extend_power_sums(&seeded, m_max);
            let value = match mode {
                InvariantCoordMode::C { j } => {
                    // C_{b,j} = I1_b S_{2j} - I1_j S_{b+j}
                    Dual::constant(weighted[b - 1]) * s[2 * j]
                        - Dual::constant(weighted[j - 1]) * s[b + j]
                }
                InvariantCoordMode::K => {
                    // K_b = I1_b (S_2 - n) - I1_1 (S_{b+1} - S_{b-1})
                    Dual::constant(weighted[b - 1]) * (s[2] - Dual::constant(n as f64))
                        - Dual::constant(weighted[0]) * (s[b + 1] - s[b - 1])
                }
            };
            matrix.set(row, alpha - 1, value.der);
        }
        // d/dI1_beta: the only surviving coefficient sits on beta = b
        let s = extend_power_sums(&leading, m_max);
        for (col_offset, &beta) in b_set.iter().enumerate() {
            let col = n + col_offset;
            let coeff = match mode {
                InvariantCoordMode::C { j } => {
                    if beta == b {
                        s[2 * j]
                    } else {
                        0.0
                    }
                }
                InvariantCoordMode::K => {
                    if beta == b {
                        s[2] - n as f64
                    } else {
                        0.0
                    }
                }
            };
            matrix.set(row, col, coeff);
        }
    }
    let det = matrix.det();

    // reference from direct matrix powers, not the recursion
    let base = match mode {
        InvariantCoordMode::C { j } => engine.trace_power(2 * j as i32)?,
        InvariantCoordMode::K => engine.trace_power(2)? - n as f64,
    };
    let reference = base.powi(n as i32 - 1);
    let relative_error = (det - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
    Ok(InvariantJacobian {
        det,
        reference,
        relative_error,
    })
}

/// Sampled suite around [`jacobian_invariant_coords_at`].
#[derive(Clone, Debug)]
pub struct InvariantJacobianReport {
    pub mode: String,
    pub samples: usize,
    pub rejected: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn jacobian_invariant_coords(
    mode: InvariantCoordMode,
    cfg: &ModelConfig,
    samples: usize,
    rng: &mut ChaCha8Rng,
    tolerance: f64,
) -> Result<InvariantJacobianReport> {
    let (points, log) = sample_points(cfg, samples, rng);
    let errors: Vec<f64> = points
        .par_iter()
        .map(|p| jacobian_invariant_coords_at(mode, p, cfg).map(|j| j.relative_error))
        .collect::<Result<_>>()?;
    let max_relative_error = errors.into_iter().fold(0.0, f64::max);
    Ok(InvariantJacobianReport {
        mode: mode.label(),
        samples: log.accepted,
        rejected: log.rejected,
        max_relative_error,
        tolerance,
        pass: max_relative_error < tolerance,
    })
}

/// Relative threshold on singular values for the numerical rank.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Numerical rank of the stacked gradients of a list of observables:
/// singular values above `1e-8 * sigma_max` count.
///
/// Linear independence of differentials is a statement about directions, so
/// each gradient row is normalized to unit length first; otherwise the huge
/// magnitude spread between low and high trace powers would masquerade as
/// rank deficiency.
pub fn independence_rank(
    observables: &[Observable],
    point: &PhasePoint,
    cfg: &ModelConfig,
) -> Result<usize> {
    let n = cfg.n;
    let (_, grads) = batch_values_and_gradients(observables, point, cfg)?;
    let mut matrix = RMat::zeros(observables.len(), 2 * n);
    for (row, g) in grads.iter().enumerate() {
        let norm = g
            .dq
            .iter()
            .chain(&g.dp)
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt();
        let inv = if norm > 1e-300 { 1.0 / norm } else { 0.0 };
        for i in 0..n {
            matrix.set(row, i, g.dq[i] * inv);
            matrix.set(row, n + i, g.dp[i] * inv);
        }
    }
    let sv = matrix.singular_values();
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > RANK_THRESHOLD * sigma_max).count())
}
