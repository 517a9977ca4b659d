//! Lax matrix and invariant families of the rational Ruijsenaars-Schneider
//! model.
//!
//! The entries are
//!
//! ```text
//! L_jk = u_j * [ i*chi / (i*chi + q_j - q_k) ] * u_k,
//! u_j  = exp(s * p_j) * prod_{m != j} [ 1 + chi^2 / (q_j - q_m)^2 ]^(1/4),
//! ```
//!
//! with `s` set by the momentum convention. `L` is Hermitian and positive
//! definite on the ordered domain; traces of its integer powers `I_k` and the
//! position-weighted traces `I1_k = tr(diag(q) L^k)` generate every quantity
//! the laboratory audits.
//!
//! All evaluation routines are generic over [`RsScalar`] so the same code
//! path produces plain values and forward-mode derivatives. Negative powers
//! go through LU solves rather than an eigendecomposition for exactly that
//! reason.

use crate::config::{Convention, ModelConfig};
use crate::dual::{complex_const, RsScalar};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CLu, CMat};
use num_complex::Complex;

/// Hard conditioning threshold for the inverse-power warning.
const CONDITION_WARN_THRESHOLD: f64 = 1e10;

/// Dressing vector `u` of positive entries.
pub(crate) fn u_vector_generic<S: RsScalar>(
    q: &[S],
    p: &[S],
    cfg: &ModelConfig,
) -> Result<Vec<S>> {
    let n = cfg.n;
    debug_assert_eq!(q.len(), n);
    debug_assert_eq!(p.len(), n);
    // Guard the pair singularity on value parts; the q passed in may come
    // from integrator trial states that never went through PhasePoint.
    let mut min_gap = f64::INFINITY;
    for j in 0..n.saturating_sub(1) {
        min_gap = min_gap.min(q[j].value() - q[j + 1].value());
    }
    if n > 1 && min_gap < cfg.gap_floor {
        return Err(Error::SingularConfiguration {
            min_gap,
            gap_floor: cfg.gap_floor,
        });
    }
    let s = S::from_f64(cfg.convention.momentum_scale());
    let chi_sq = S::from_f64(cfg.chi * cfg.chi);
    let mut u = Vec::with_capacity(n);
    for j in 0..n {
        let mut dress = S::one();
        for m in 0..n {
            if m == j {
                continue;
            }
            let gap = q[j] - q[m];
            dress = dress * (S::one() + chi_sq / (gap * gap)).sqrt().sqrt();
        }
        u.push((s * p[j]).exp() * dress);
    }
    Ok(u)
}

/// Lax matrix entries from raw coordinate slices.
pub(crate) fn lax_matrix_generic<S: RsScalar>(
    q: &[S],
    p: &[S],
    cfg: &ModelConfig,
) -> Result<(CMat<S>, Vec<S>)> {
    let n = cfg.n;
    let u = u_vector_generic(q, p, cfg)?;
    let ichi = complex_const::<S>(0.0, cfg.chi);
    let lax = CMat::from_fn(n, |j, k| {
        let denom = ichi + Complex::new(q[j] - q[k], S::zero());
        (ichi / denom) * u[j] * u[k]
    });
    Ok((lax, u))
}

/// Shared evaluation context for one point (and one derivative seed).
///
/// Powers of `L` and of `L^{-1}` are cached so that an observable needing
/// several traces builds each power once.
pub(crate) struct InvariantEngine<'a, S: RsScalar> {
    cfg: &'a ModelConfig,
    q: Vec<S>,
    lax: CMat<S>,
    pos_pow: Vec<CMat<S>>,
    neg_pow: Vec<CMat<S>>,
    condition: Option<f64>,
}

impl<'a, S: RsScalar> InvariantEngine<'a, S> {
    pub fn new(q: &[S], p: &[S], cfg: &'a ModelConfig) -> Result<Self> {
        let (lax, _) = lax_matrix_generic(q, p, cfg)?;
        Ok(Self {
            cfg,
            q: q.to_vec(),
            lax,
            pos_pow: Vec::new(),
            neg_pow: Vec::new(),
            condition: None,
        })
    }

    /// Conditioning proxy of the LU factorization, if an inverse power has
    /// been requested.
    pub fn condition_estimate(&self) -> Option<f64> {
        self.condition
    }

    fn power(&mut self, k: i32) -> Result<&CMat<S>> {
        assert!(k != 0, "power 0 is handled by the trace shortcuts");
        if k > 0 {
            let k = k as usize;
            if self.pos_pow.is_empty() {
                self.pos_pow.push(self.lax.clone());
            }
            while self.pos_pow.len() < k {
                let next = self.pos_pow.last().unwrap().mul(&self.lax);
                self.pos_pow.push(next);
            }
            Ok(&self.pos_pow[k - 1])
        } else {
            let k = (-k) as usize;
            if self.neg_pow.is_empty() {
                let lu: CLu<S> = self.lax.lu()?;
                self.condition = Some(lu.condition_proxy());
                self.neg_pow.push(lu.inverse());
            }
            while self.neg_pow.len() < k {
                let next = self.neg_pow.last().unwrap().mul(&self.neg_pow[0]);
                self.neg_pow.push(next);
            }
            Ok(&self.neg_pow[k - 1])
        }
    }

    /// Assert-then-discard: the imaginary part must be negligible relative
    /// to the real part before it is dropped.
    fn real_part(&self, z: Complex<S>) -> Result<S> {
        let residue = z.im.value().abs() / (1.0 + z.re.value().abs());
        if !(residue < self.cfg.tol.abs_tol) {
            return Err(Error::ImaginaryResidue {
                residue,
                tol: self.cfg.tol.abs_tol,
            });
        }
        Ok(z.re)
    }

    /// `I_k = tr(L^k)`; `I_0 = n` exactly.
    pub fn trace_power(&mut self, k: i32) -> Result<S> {
        if k == 0 {
            return Ok(S::from_f64(self.cfg.n as f64));
        }
        let t = self.power(k)?.trace();
        self.real_part(t)
    }

    /// `I1_k = tr(diag(q) L^k)`; `I1_0 = sum(q)` exactly.
    pub fn weighted_trace(&mut self, k: i32) -> Result<S> {
        if k == 0 {
            let mut s = S::zero();
            for &qi in &self.q {
                s = s + qi;
            }
            return Ok(s);
        }
        let q = self.q.clone();
        let t = self.power(k)?.weighted_trace(&q);
        self.real_part(t)
    }

    /// Principal Hamiltonian `h = (I_1 + I_{-1}) / 2`.
    pub fn hamiltonian(&mut self) -> Result<S> {
        let half = S::from_f64(0.5);
        Ok((self.trace_power(1)? + self.trace_power(-1)?) * half)
    }

    /// Total momentum `P = (I_1 - I_{-1}) / 2`.
    pub fn momentum(&mut self) -> Result<S> {
        let half = S::from_f64(0.5);
        Ok((self.trace_power(1)? - self.trace_power(-1)?) * half)
    }

    /// The generating set `I_1, ..., I_n`.
    pub fn leading_invariants(&mut self) -> Result<Vec<S>> {
        (1..=self.cfg.n as i32).map(|k| self.trace_power(k)).collect()
    }
}

/// Validated Lax matrix at a phase-space point.
#[derive(Clone, Debug)]
pub struct LaxMatrix {
    entries: CMat<f64>,
    u: Vec<f64>,
    eigenvalues: Vec<f64>,
    convention: Convention,
}

impl LaxMatrix {
    pub fn entries(&self) -> &CMat<f64> {
        &self.entries
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Eigenvalues in ascending order; all positive.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn det(&self) -> f64 {
        self.eigenvalues.iter().product()
    }
}

/// Dressing vector at a validated point.
pub fn build_u(point: &PhasePoint, cfg: &ModelConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    u_vector_generic(point.q(), point.p(), cfg)
}

/// Lax matrix with its structural invariants checked: Hermiticity within
/// `abs_tol`, positive definiteness, and diagonal equal to `u_j^2`.
pub fn build_lax(point: &PhasePoint, cfg: &ModelConfig) -> Result<LaxMatrix> {
    cfg.validate()?;
    let (entries, u) = lax_matrix_generic(point.q(), point.p(), cfg)?;
    let defect = entries.hermiticity_defect();
    if !(defect < cfg.tol.abs_tol) {
        return Err(Error::Config(format!(
            "Lax matrix failed the Hermiticity check: defect {defect:.3e}"
        )));
    }
    for (j, &uj) in u.iter().enumerate() {
        let d = entries.get(j, j);
        if (d.re - uj * uj).abs() > cfg.tol.abs_tol * (1.0 + uj * uj) || d.im.abs() > cfg.tol.abs_tol
        {
            return Err(Error::Config(format!(
                "Lax diagonal entry {j} deviates from u_j^2"
            )));
        }
    }
    let eig = hermitian_eigen(&entries)?;
    if eig.values[0] <= 0.0 {
        return Err(Error::Config(format!(
            "Lax matrix is not positive definite: smallest eigenvalue {:.3e}",
            eig.values[0]
        )));
    }
    Ok(LaxMatrix {
        entries,
        u,
        eigenvalues: eig.values,
        convention: cfg.convention,
    })
}

/// Conditioning warning attached to traces that went through an inverse.
#[derive(Clone, Copy, Debug)]
pub struct ConditioningWarning {
    pub condition_estimate: f64,
    pub threshold: f64,
}

/// Trace value with an optional conditioning warning.
#[derive(Clone, Copy, Debug)]
pub struct TraceValue {
    pub value: f64,
    pub conditioning: Option<ConditioningWarning>,
}

fn finish_trace(engine: InvariantEngine<'_, f64>, value: f64) -> TraceValue {
    let conditioning = engine.condition_estimate().and_then(|c| {
        (c > CONDITION_WARN_THRESHOLD).then_some(ConditioningWarning {
            condition_estimate: c,
            threshold: CONDITION_WARN_THRESHOLD,
        })
    });
    TraceValue { value, conditioning }
}

/// `I_k = tr(L^k)` for any integer `k`; negative powers use LU solves.
pub fn lax_power_trace(point: &PhasePoint, cfg: &ModelConfig, k: i32) -> Result<TraceValue> {
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    let value = engine.trace_power(k)?;
    Ok(finish_trace(engine, value))
}

/// `I1_k = tr(diag(q) L^k)` for any integer `k`.
pub fn weighted_trace(point: &PhasePoint, cfg: &ModelConfig, k: i32) -> Result<TraceValue> {
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    let value = engine.weighted_trace(k)?;
    Ok(finish_trace(engine, value))
}

/// Principal Hamiltonian from the Lax route.
pub fn principal_hamiltonian(point: &PhasePoint, cfg: &ModelConfig) -> Result<f64> {
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    engine.hamiltonian()
}

/// Comparison of the Lax route against the explicit cosh sum
/// `sum_k cosh(p_k) prod_{j != k} [1 + chi^2/(q_k - q_j)^2]^(1/2)`.
///
/// The two agree under the `Half` convention; the gap under `Literal` is a
/// measured finding, not an error.
#[derive(Clone, Copy, Debug)]
pub struct HamiltonianAudit {
    pub lax_value: f64,
    pub direct_sum: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

pub fn principal_hamiltonian_audit(point: &PhasePoint, cfg: &ModelConfig) -> Result<HamiltonianAudit> {
    let lax_value = principal_hamiltonian(point, cfg)?;
    let direct_sum = cosh_sum(point, cfg);
    let residual = lax_value - direct_sum;
    Ok(HamiltonianAudit {
        lax_value,
        direct_sum,
        residual,
        relative_residual: residual.abs() / lax_value.abs().max(f64::MIN_POSITIVE),
    })
}

/// The explicit cosh-sum form of the principal Hamiltonian.
pub fn cosh_sum(point: &PhasePoint, cfg: &ModelConfig) -> f64 {
    let q = point.q();
    let p = point.p();
    let chi_sq = cfg.chi * cfg.chi;
    (0..cfg.n)
        .map(|k| {
            let dress: f64 = (0..cfg.n)
                .filter(|&j| j != k)
                .map(|j| 1.0 + chi_sq / (q[k] - q[j]).powi(2))
                .product::<f64>()
                .sqrt();
            p[k].cosh() * dress
        })
        .sum()
}

/// Total momentum `P = (I_1 - I_{-1}) / 2`.
pub fn total_momentum(point: &PhasePoint, cfg: &ModelConfig) -> Result<f64> {
    let mut engine = InvariantEngine::new(point.q(), point.p(), cfg)?;
    engine.momentum()
}

use crate::phase::PhasePoint;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT5: f64 = 2.23606797749979;

    fn cfg(n: usize) -> ModelConfig {
        ModelConfig::new(n, 1.0).unwrap()
    }

    fn hand_point(cfg: &ModelConfig) -> PhasePoint {
        PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], cfg).unwrap()
    }

    #[test]
    fn u_single_particle_closed_form() {
        let c = cfg(1);
        let pt = PhasePoint::new(vec![0.5], vec![0.3], &c).unwrap();
        let u = build_u(&pt, &c).unwrap();
        assert!((u[0] - 0.15f64.exp()).abs() < 1e-15);
        assert!((u[0] - 1.161_834_242_728_283).abs() < 1e-12);
    }

    #[test]
    fn u_symmetric_pair() {
        let c = cfg(2);
        let u = build_u(&hand_point(&c), &c).unwrap();
        let expect = 1.25f64.powf(0.25);
        assert!((u[0] - expect).abs() < 1e-15);
        assert!((u[1] - expect).abs() < 1e-15);
        assert!((expect - 1.057_371_263_440_564).abs() < 1e-12);
        // same value under either convention at p = 0
        let cl = cfg(2).with_convention(Convention::Literal);
        let ul = build_u(&hand_point(&cl), &cl).unwrap();
        assert!((ul[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_is_a_config_error() {
        let mut c = cfg(2);
        c.chi = 0.0;
        let pt = PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], &cfg(2)).unwrap();
        assert!(matches!(build_u(&pt, &c), Err(Error::ZeroCoupling)));
    }

    #[test]
    fn lax_identity_case() {
        let c = cfg(1);
        let pt = PhasePoint::new(vec![0.0], vec![0.0], &c).unwrap();
        let lax = build_lax(&pt, &c).unwrap();
        let e = lax.entries().get(0, 0);
        assert!((e.re - 1.0).abs() < 1e-15 && e.im.abs() < 1e-15);
    }

    #[test]
    fn lax_hand_values() {
        let c = cfg(2);
        let lax = build_lax(&hand_point(&c), &c).unwrap();
        let m = lax.entries();
        let diag = 1.25f64.sqrt();
        assert!((m.get(0, 0).re - diag).abs() < 1e-12);
        assert!((m.get(1, 1).re - diag).abs() < 1e-12);
        let off = m.get(0, 1);
        assert!((off.re - 0.223_606_797_749_979).abs() < 1e-12);
        assert!((off.im - 0.4472135954999579).abs() < 1e-12);
        assert!((m.get(1, 0) - off.conj()).norm() < 1e-15);
        assert!((lax.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn traces_hand_values() {
        let c = cfg(2);
        let pt = hand_point(&c);
        for (k, expect) in [(1, SQRT5), (2, 3.0), (3, 2.0 * SQRT5), (-1, SQRT5)] {
            let t = lax_power_trace(&pt, &c, k).unwrap();
            assert!(
                (t.value - expect).abs() < 1e-12,
                "I_{k} = {} != {expect}",
                t.value
            );
        }
        assert_eq!(lax_power_trace(&pt, &c, 0).unwrap().value, 2.0);
    }

    #[test]
    fn scalar_trace_closed_form() {
        let c = cfg(1);
        let pt = PhasePoint::new(vec![0.5], vec![0.3], &c).unwrap();
        for k in -3..=3 {
            let t = lax_power_trace(&pt, &c, k).unwrap();
            assert!((t.value - (0.3 * k as f64).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn weighted_trace_hand_values() {
        let c = cfg(2);
        let pt = hand_point(&c);
        assert!(weighted_trace(&pt, &c, 1).unwrap().value.abs() < 1e-13);
        assert_eq!(weighted_trace(&pt, &c, 0).unwrap().value, 0.0);
        let c1 = cfg(1);
        let pt1 = PhasePoint::new(vec![3.0], vec![0.0], &c1).unwrap();
        for k in -2..=2 {
            assert!((weighted_trace(&pt1, &c1, k).unwrap().value - 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn hamiltonian_hand_values() {
        let c = cfg(2);
        let audit = principal_hamiltonian_audit(&hand_point(&c), &c).unwrap();
        assert!((audit.lax_value - SQRT5).abs() < 1e-12);
        assert!((audit.direct_sum - SQRT5).abs() < 1e-12);
        assert!(audit.residual.abs() < 1e-12);

        let c1 = cfg(1);
        let pt = PhasePoint::new(vec![0.0], vec![0.3], &c1).unwrap();
        let audit = principal_hamiltonian_audit(&pt, &c1).unwrap();
        assert!((audit.lax_value - 0.3f64.cosh()).abs() < 1e-14);
        assert!(audit.residual.abs() < 1e-14);

        // literal convention: Lax route gives cosh(2p), cosh sum gives cosh(p)
        let c1l = ModelConfig::new(1, 1.0).unwrap().with_convention(Convention::Literal);
        let ptl = PhasePoint::new(vec![0.0], vec![0.3], &c1l).unwrap();
        let audit = principal_hamiltonian_audit(&ptl, &c1l).unwrap();
        assert!((audit.lax_value - 0.6f64.cosh()).abs() < 1e-14);
        assert!((audit.residual - (0.6f64.cosh() - 0.3f64.cosh())).abs() < 1e-14);

        // p = 0 gives h = 1 for a single particle under either convention
        let pt0 = PhasePoint::new(vec![0.0], vec![0.0], &c1).unwrap();
        assert!((principal_hamiltonian(&pt0, &c1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn momentum_hand_values() {
        let c = cfg(2);
        assert!(total_momentum(&hand_point(&c), &c).unwrap().abs() < 1e-13);
        let c1 = cfg(1);
        let pt = PhasePoint::new(vec![0.0], vec![0.3], &c1).unwrap();
        assert!((total_momentum(&pt, &c1).unwrap() - 0.3f64.sinh()).abs() < 1e-14);
    }

    #[test]
    fn momentum_vanishes_at_zero_p() {
        // spectrum(L(q, -p)) = spectrum(L(q, p)^{-1}), so p = 0 forces
        // I_1 = I_{-1}.
        let c = cfg(3);
        let pt = PhasePoint::new(vec![2.5, 0.3, -1.8], vec![0.0, 0.0, 0.0], &c).unwrap();
        assert!(total_momentum(&pt, &c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn inverse_spectrum_matches_reflected_momenta() {
        let c = cfg(3);
        let q = vec![2.0, 0.0, -1.5];
        let p = vec![0.7, -0.2, 0.4];
        let pt = PhasePoint::new(q.clone(), p.clone(), &c).unwrap();
        let reflected = PhasePoint::new(q, p.iter().map(|x| -x).collect(), &c).unwrap();
        let lax = build_lax(&pt, &c).unwrap();
        let lax_reflected = build_lax(&reflected, &c).unwrap();
        let mut inv_spec: Vec<f64> = lax.eigenvalues().iter().map(|l| 1.0 / l).collect();
        inv_spec.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in inv_spec.iter().zip(lax_reflected.eigenvalues()) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn spectral_consistency_of_power_traces() {
        let c = cfg(4);
        let pt = PhasePoint::new(
            vec![3.0, 1.0, -0.5, -2.5],
            vec![0.4, -0.3, 0.8, -0.1],
            &c,
        )
        .unwrap();
        let lax = build_lax(&pt, &c).unwrap();
        for k in [-3i32, -1, 1, 2, 3, 5] {
            let direct = lax_power_trace(&pt, &c, k).unwrap().value;
            let spectral: f64 = lax.eigenvalues().iter().map(|l| l.powi(k)).sum();
            assert!(
                (direct - spectral).abs() < 1e-10 * (1.0 + spectral.abs()),
                "k={k}: {direct} vs {spectral}"
            );
        }
    }

    #[test]
    fn determinant_is_exponential_of_total_momentum_sum() {
        // det L = exp(2 s sum(p)): the Cauchy determinant cancels every
        // q-dependent factor.
        for convention in [Convention::Half, Convention::Literal] {
            let c = ModelConfig::new(3, 0.7).unwrap().with_convention(convention);
            let pt = PhasePoint::new(vec![1.7, 0.2, -2.1], vec![0.5, -0.8, 0.3], &c).unwrap();
            let lax = build_lax(&pt, &c).unwrap();
            let s = convention.momentum_scale();
            let expect = (2.0 * s * (0.5 - 0.8 + 0.3)).exp();
            assert!(
                (lax.det() - expect).abs() < 1e-12 * expect,
                "{} vs {expect}",
                lax.det()
            );
        }
    }

    #[test]
    fn gap_floor_violation_propagates() {
        let mut c = cfg(2);
        c.gap_floor = 0.5;
        // craft raw arrays that evade PhasePoint by calling the generic path
        let err = u_vector_generic(&[0.1f64, 0.0], &[0.0, 0.0], &c).unwrap_err();
        assert!(matches!(err, Error::SingularConfiguration { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn lax_is_hermitian_positive_definite(
            g1 in 1.0f64..5.0, g2 in 1.0f64..5.0,
            p1 in -1.5f64..1.5, p2 in -1.5f64..1.5, p3 in -1.5f64..1.5,
            center in -2.0f64..2.0,
        ) {
            let c = cfg(3);
            let q = vec![center + g1 + g2, center + g2, center];
            let pt = PhasePoint::new(q, vec![p1, p2, p3], &c).unwrap();
            let lax = build_lax(&pt, &c).unwrap();
            prop_assert!(lax.entries().hermiticity_defect() < 1e-12);
            prop_assert!(lax.eigenvalues()[0] > 0.0);
        }

        #[test]
        fn traces_are_real_for_wide_power_range(
            g1 in 1.0f64..5.0, g2 in 1.0f64..5.0,
            p1 in -1.5f64..1.5, p2 in -1.5f64..1.5, p3 in -1.5f64..1.5,
        ) {
            let c = cfg(3);
            let pt = PhasePoint::new(vec![g1 + g2, g2, 0.0], vec![p1, p2, p3], &c).unwrap();
            for k in -6i32..=6 {
                // real_part returns an error when the residue is too large
                prop_assert!(lax_power_trace(&pt, &c, k).is_ok());
                prop_assert!(weighted_trace(&pt, &c, k).is_ok());
            }
        }
    }
}
