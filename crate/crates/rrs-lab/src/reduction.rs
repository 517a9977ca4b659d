//! Numerical audit of the symplectic-reduction gauge slice.
//!
//! The model arises by reducing the product of a matrix cotangent bundle
//! with a minimal coadjoint orbit, `(g, J_R, xi)`, under a double unitary
//! action. The gauge slice realizes the reduced space explicitly as
//!
//! ```text
//! g   = L(q, p)^(1/2)
//! J_R = -2 diag(q)
//! xi  = i chi (1 - v v^dag),   v = L^(-1/2) u,   |v|^2 = n
//! ```
//!
//! This module rebuilds the slice at a point and checks, to roundoff, the
//! two first-class constraints (the anti-Hermitian parts of `J_R` and of
//! `g J_R g^(-1) + ...` against `-xi`), the orbit conditions on `xi`, and the
//! restriction identities expressing the invariants through unreduced data:
//! `tr((g^dag g)^k) = I_k` and `-Re tr((g^dag g)^k J_R) / 2 = I1_k`.

use crate::config::ModelConfig;
use crate::error::Result;
use crate::linalg::{hermitian_eigen, CMat};
use crate::model::{lax_matrix_generic, InvariantEngine};
use crate::phase::PhasePoint;
use crate::sample::sample_points;
use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Eigenvalues of the Lax matrix are clamped here before the square root;
/// positivity holds analytically, the clamp only guards roundoff.
const EIGENVALUE_CLAMP: f64 = 1e-14;

/// Triple `(g, J_R, xi)` realizing the gauge slice at one phase-space point.
#[derive(Clone, Debug)]
pub struct SlicePoint {
    /// Hermitian square root of the Lax matrix.
    pub g: CMat<f64>,
    /// Right moment-map block `-2 diag(q)`.
    pub jr: CMat<f64>,
    /// Orbit point `i chi (1 - v v^dag)`.
    pub xi: CMat<f64>,
    /// Normalized dressing vector `L^(-1/2) u`.
    pub v: Vec<Complex<f64>>,
    chi: f64,
}

impl SlicePoint {
    /// `|v|^2`, which must equal the particle count.
    pub fn v_norm_sq(&self) -> f64 {
        self.v.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Deviations of the slice data from its defining structure.
    pub fn orbit_diagnostics(&self, lax: &CMat<f64>, cfg: &ModelConfig) -> OrbitDiagnostics {
        let n = cfg.n as f64;
        let g_sq_error = self.g.mul(&self.g).sub(lax).max_abs() / (1.0 + lax.max_abs());
        let v_norm_error = (self.v_norm_sq() - n).abs();
        // xi is anti-Hermitian; -i xi is Hermitian with spectrum
        // {chi (1 - n)} once and {chi} with multiplicity n - 1.
        let minus_i = Complex::new(0.0, -1.0);
        let herm = self.xi.scale(minus_i);
        let xi_antiherm_error = self.xi.add(&self.xi.adjoint()).max_abs() / 2.0;
        let mut xi_spectrum_error = f64::INFINITY;
        if let Ok(eig) = hermitian_eigen(&herm) {
            let mut expect: Vec<f64> = std::iter::once(self.chi * (1.0 - n))
                .chain(std::iter::repeat_n(self.chi, cfg.n - 1))
                .collect();
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xi_spectrum_error = eig
                .values
                .iter()
                .zip(&expect)
                .map(|(got, want)| (got - want).abs())
                .fold(0.0, f64::max);
        }
        OrbitDiagnostics {
            g_sq_error,
            v_norm_error,
            xi_antiherm_error,
            xi_spectrum_error,
        }
    }
}

/// Structural residuals of a slice point.
#[derive(Clone, Copy, Debug)]
pub struct OrbitDiagnostics {
    /// `max |g g - L|` relative to `max |L|`.
    pub g_sq_error: f64,
    /// `| |v|^2 - n |`.
    pub v_norm_error: f64,
    /// Largest entry of the Hermitian part of `xi`.
    pub xi_antiherm_error: f64,
    /// Worst deviation of the `xi` spectrum from `{i chi (1-n), i chi, ...}`.
    pub xi_spectrum_error: f64,
}

impl OrbitDiagnostics {
    pub fn worst(&self) -> f64 {
        self.g_sq_error
            .max(self.v_norm_error)
            .max(self.xi_antiherm_error)
            .max(self.xi_spectrum_error)
    }
}

/// Build the slice triple at a point via Hermitian eigendecomposition.
pub fn build_slice_point(point: &PhasePoint, cfg: &ModelConfig) -> Result<SlicePoint> {
    let n = cfg.n;
    let (lax, u) = lax_matrix_generic(point.q(), point.p(), cfg)?;
    let eig = hermitian_eigen(&lax)?;
    let vec = &eig.vectors;
    let clamped: Vec<f64> = eig.values.iter().map(|l| l.max(EIGENVALUE_CLAMP)).collect();
    // g = V diag(sqrt(lambda)) V^dag
    let mut g = CMat::<f64>::zeros(n);
    let mut inv_sqrt = CMat::<f64>::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc_g = Complex::new(0.0, 0.0);
            let mut acc_i = Complex::new(0.0, 0.0);
            for m in 0..n {
                let w = vec.get(i, m) * vec.get(j, m).conj();
                acc_g += w * clamped[m].sqrt();
                acc_i += w / clamped[m].sqrt();
            }
            g.set(i, j, acc_g);
            inv_sqrt.set(i, j, acc_i);
        }
    }
    let v: Vec<Complex<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| inv_sqrt.get(i, j) * u[j])
                .sum::<Complex<f64>>()
        })
        .collect();
    let jr = CMat::<f64>::from_fn(n, |i, j| {
        if i == j {
            Complex::new(-2.0 * point.q()[i], 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let ichi = Complex::new(0.0, cfg.chi);
    let xi = CMat::<f64>::from_fn(n, |i, j| {
        let outer = v[i] * v[j].conj();
        let delta = if i == j {
            Complex::new(1.0, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        };
        ichi * (delta - outer)
    });
    Ok(SlicePoint {
        g,
        jr,
        xi,
        v,
        chi: cfg.chi,
    })
}

/// Residuals of the two first-class constraints at a slice point.
#[derive(Clone, Copy, Debug)]
pub struct ConstraintResiduals {
    /// `max |antiHermitian(J_R)|`; zero by construction.
    pub jr_residual: f64,
    /// `max |antiHermitian(g J_R g^(-1)) + xi|`.
    pub slice_residual: f64,
}

pub fn constraint_check(sp: &SlicePoint) -> Result<ConstraintResiduals> {
    let jr_residual = sp.jr.anti_hermitian_part().max_abs();
    let g_inv = sp.g.lu()?.inverse();
    let conjugated = sp.g.mul(&sp.jr).mul(&g_inv);
    let slice_residual = conjugated.anti_hermitian_part().add(&sp.xi).max_abs();
    Ok(ConstraintResiduals {
        jr_residual,
        slice_residual,
    })
}

/// Residuals of the invariant-restriction identities at one power.
#[derive(Clone, Copy, Debug)]
pub struct RestrictionResiduals {
    /// `tr((g^dag g)^k)` against `I_k`, relative.
    pub trace_residual: f64,
    /// `-Re tr((g^dag g)^k J_R)/2` against `I1_k`, relative.
    pub weighted_residual: f64,
}

pub fn invariant_restriction_check(
    point: &PhasePoint,
    cfg: &ModelConfig,
    k: i32,
) -> Result<RestrictionResiduals> {
    let sp = build_slice_point(point, cfg)?;
    let gtg = sp.g.adjoint().mul(&sp.g);
    let n = cfg.n;
    let power = {
        let mut m = CMat::<f64>::identity(n);
        if k >= 0 {
            for _ in 0..k {
                m = m.mul(&gtg);
            }
        } else {
            let inv = gtg.lu()?.inverse();
            for _ in 0..(-k) {
                m = m.mul(&inv);
            }
        }
        m
    };
    let unreduced_trace = power.trace().re;
    let unreduced_weighted = -0.5 * power.mul(&sp.jr).trace().re;
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    let i_k = engine.trace_power(k)?;
    let i1_k = engine.weighted_trace(k)?;
    Ok(RestrictionResiduals {
        trace_residual: (unreduced_trace - i_k).abs() / (1.0 + i_k.abs()),
        weighted_residual: (unreduced_weighted - i1_k).abs() / (1.0 + i1_k.abs()),
    })
}

/// Sampled audit of the whole reduction picture.
#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub samples: usize,
    pub rejected: usize,
    pub max_orbit_error: f64,
    pub max_constraint_residual: f64,
    pub max_restriction_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Run orbit, constraint, and restriction checks (`k` in `[-n, n]`) over
/// sampled points.
pub fn reduction_audit(
    cfg: &ModelConfig,
    samples: usize,
    rng: &mut ChaCha8Rng,
    tolerance: f64,
) -> Result<ReductionReport> {
    let (points, log) = sample_points(cfg, samples, rng);
    let n = cfg.n as i32;
    let results: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|point| {
            let sp = build_slice_point(point, cfg)?;
            let (lax, _) = lax_matrix_generic(point.q(), point.p(), cfg)?;
            let orbit = sp.orbit_diagnostics(&lax, cfg).worst();
            let constraints = constraint_check(&sp)?;
            let mut restriction = 0.0f64;
            for k in -n..=n {
                let r = invariant_restriction_check(point, cfg, k)?;
                restriction = restriction.max(r.trace_residual).max(r.weighted_residual);
            }
            Ok((
                orbit,
                constraints.jr_residual.max(constraints.slice_residual),
                restriction,
            ))
        })
        .collect::<Result<_>>()?;
    let max_orbit_error = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_constraint_residual = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_restriction_residual = results.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(ReductionReport {
        samples: log.accepted,
        rejected: log.rejected,
        max_orbit_error,
        max_constraint_residual,
        max_restriction_residual,
        tolerance,
        pass: max_orbit_error < tolerance
            && max_constraint_residual < tolerance
            && max_restriction_residual < tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Convention;
    use rand::SeedableRng;

    fn cfg(n: usize) -> ModelConfig {
        ModelConfig::new(n, 1.0).unwrap()
    }

    #[test]
    fn single_particle_slice_is_trivial() {
        let c = cfg(1);
        let pt = PhasePoint::new(vec![1.7], vec![0.0], &c).unwrap();
        let sp = build_slice_point(&pt, &c).unwrap();
        assert!((sp.g.get(0, 0).re - 1.0).abs() < 1e-14);
        assert!((sp.v[0].re - 1.0).abs() < 1e-14);
        // the single-particle orbit degenerates to a point: xi = 0
        assert!(sp.xi.max_abs() < 1e-14);
        let r = constraint_check(&sp).unwrap();
        assert_eq!(r.jr_residual, 0.0);
        assert!(r.slice_residual < 1e-14);
    }

    #[test]
    fn orbit_condition_at_hand_point() {
        let c = cfg(2);
        let pt = PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], &c).unwrap();
        let sp = build_slice_point(&pt, &c).unwrap();
        assert!((sp.v_norm_sq() - 2.0).abs() < 1e-10, "{}", sp.v_norm_sq());
        // xi spectrum: {+i chi, i chi (1 - n)} = {+i, -i}
        let diag = sp.orbit_diagnostics(
            &lax_matrix_generic(pt.q(), pt.p(), &c).unwrap().0,
            &c,
        );
        assert!(diag.xi_spectrum_error < 1e-10, "{:?}", diag);
        assert!(diag.worst() < 1e-10, "{diag:?}");
    }

    #[test]
    fn constraints_hold_at_hand_point() {
        let c = cfg(2);
        let pt = PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], &c).unwrap();
        let sp = build_slice_point(&pt, &c).unwrap();
        let r = constraint_check(&sp).unwrap();
        assert_eq!(r.jr_residual, 0.0, "J_R is real diagonal by construction");
        assert!(r.slice_residual < 1e-10, "residual {}", r.slice_residual);
    }

    #[test]
    fn restriction_identities() {
        let c = cfg(2);
        let pt = PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], &c).unwrap();
        for k in [-2, -1, 0, 1, 2] {
            let r = invariant_restriction_check(&pt, &c, k).unwrap();
            assert!(r.trace_residual < 1e-11, "k={k}: {}", r.trace_residual);
            assert!(r.weighted_residual < 1e-11, "k={k}: {}", r.weighted_residual);
        }
        // k = 0 shortcut: values n and sum(q)
        let c3 = cfg(3);
        let pt3 = PhasePoint::new(vec![2.0, -0.5, -2.5], vec![0.3, -0.6, 0.8], &c3).unwrap();
        let r = invariant_restriction_check(&pt3, &c3, 0).unwrap();
        assert!(r.trace_residual < 1e-12 && r.weighted_residual < 1e-12);
    }

    #[test]
    fn audit_passes_under_both_conventions() {
        // The commutation identity behind the slice constraint is
        // convention independent; the audit must agree.
        for convention in [Convention::Half, Convention::Literal] {
            let c = ModelConfig::new(3, 0.8)
                .unwrap()
                .with_convention(convention);
            let mut rng = ChaCha8Rng::seed_from_u64(31);
            let report = reduction_audit(&c, 10, &mut rng, 1e-9).unwrap();
            assert!(
                report.pass,
                "{convention}: orbit {} constraint {} restriction {}",
                report.max_orbit_error,
                report.max_constraint_residual,
                report.max_restriction_residual
            );
        }
    }
}
