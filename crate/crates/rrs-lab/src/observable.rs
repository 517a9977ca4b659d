//! Registry of differentiable scalar fields on phase space.
//!
//! Every observable evaluates generically over the lab scalar, so the same
//! definition serves the value path and the dual-number derivative path.

use crate::config::ModelConfig;
use crate::dual::RsScalar;
use crate::error::{Error, Result};
use crate::model::InvariantEngine;
use crate::phase::PhasePoint;

/// Polynomial in the leading invariants `I_1, ..., I_n`: a sum of terms
/// `coeff * prod_i I_i^(e_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantPoly {
    arity: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl InvariantPoly {
    pub fn new(arity: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        for (_, exps) in &terms {
            if exps.len() != arity {
                return Err(Error::IndexOutOfRange(format!(
                    "polynomial term has {} exponents, expected {}",
                    exps.len(),
                    arity
                )));
            }
        }
        Ok(Self { arity, terms })
    }

    /// The zero polynomial.
    pub fn zero(arity: usize) -> Self {
        Self { arity, terms: Vec::new() }
    }

    /// The coordinate polynomial `I_k` itself (1-based `k`).
    pub fn coordinate(arity: usize, k: usize) -> Result<Self> {
        if k == 0 || k > arity {
            return Err(Error::IndexOutOfRange(format!(
                "coordinate index {k} outside 1..={arity}"
            )));
        }
        let mut exps = vec![0u32; arity];
        exps[k - 1] = 1;
        Ok(Self { arity, terms: vec![(1.0, exps)] })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval<S: RsScalar>(&self, invariants: &[S]) -> S {
        debug_assert_eq!(invariants.len(), self.arity);
        let mut acc = S::zero();
        for (coeff, exps) in &self.terms {
            let mut term = S::from_f64(*coeff);
            for (x, &e) in invariants.iter().zip(exps) {
                for _ in 0..e {
                    term = term * *x;
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Algebraic partial derivative with respect to `I_j` (1-based).
    pub fn partial(&self, j: usize) -> Self {
        assert!(j >= 1 && j <= self.arity);
        let mut terms = Vec::new();
        for (coeff, exps) in &self.terms {
            let e = exps[j - 1];
            if e == 0 {
                continue;
            }
            let mut d = exps.clone();
            d[j - 1] = e - 1;
            terms.push((coeff * e as f64, d));
        }
        Self { arity: self.arity, terms }
    }
}

/// Flow constant of the form `F = sum_k I1_k * U^k(I_1, ..., I_n)`, with the
/// component maps `U^k` supplied as invariant polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct UserFlowConstant {
    /// Components `U^1, ..., U^n`.
    pub components: Vec<InvariantPoly>,
}

impl UserFlowConstant {
    pub fn new(components: Vec<InvariantPoly>) -> Self {
        Self { components }
    }
}

/// Registry of observables.
///
/// Integer-parameter tags must satisfy the declared index ranges checked by
/// [`Observable::validate`]; the extra constants use 1-based indices bounded
/// by the particle count.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// `I_k = tr(L^k)`, any integer `k`.
    PowerTrace(i32),
    /// `I1_k = tr(diag(q) L^k)`, any integer `k`.
    WeightedTrace(i32),
    /// Principal Hamiltonian `h = (I_1 + I_{-1}) / 2`.
    Hamiltonian,
    /// Total momentum `P = (I_1 - I_{-1}) / 2`.
    Momentum,
    /// Smooth function of the commuting invariants.
    InvariantFunction(InvariantPoly),
    /// Extra constant `C_{k,j} = I1_k I_{2j} - I1_j I_{k+j}` (`k != j`),
    /// in involution with `I_j`.
    ExtraC { k: usize, j: usize },
    /// Extra constant `K_j = I1_j (I_2 - n) - I1_1 (I_{j+1} - I_{j-1})`,
    /// in involution with the principal Hamiltonian.
    ExtraK { j: usize },
    /// Extra constant `L_j = I1_j (I_2 + n) - I1_1 (I_{j+1} + I_{j-1})`,
    /// in involution with the total momentum.
    ExtraL { j: usize },
    /// User flow constant `sum_k I1_k U^k(I_1..I_n)`.
    UserF(UserFlowConstant),
}

impl Observable {
    /// Whether the observable is a function of `I_1, .., I_n` alone, and so
    /// admissible as a flow generator for the linear-evolution law.
    pub fn is_invariant_function(&self) -> bool {
        matches!(
            self,
            Observable::PowerTrace(_)
                | Observable::Hamiltonian
                | Observable::Momentum
                | Observable::InvariantFunction(_)
        )
    }

    pub fn validate(&self, cfg: &ModelConfig) -> Result<()> {
        let n = cfg.n;
        match self {
            Observable::ExtraC { k, j } => {
                if *j == 0 || *j > n || *k == 0 || *k > n {
                    return Err(Error::IndexOutOfRange(format!(
                        "C({k},{j}) needs k, j in 1..={n}"
                    )));
                }
                if k == j {
                    return Err(Error::IndexOutOfRange(format!(
                        "C({k},{j}) needs k != j"
                    )));
                }
            }
            Observable::ExtraK { j } | Observable::ExtraL { j } => {
                if *j < 2 || *j > n {
                    return Err(Error::IndexOutOfRange(format!(
                        "index {j} outside 2..={n}"
                    )));
                }
            }
            Observable::InvariantFunction(poly) => {
                if poly.arity() != n {
                    return Err(Error::IndexOutOfRange(format!(
                        "polynomial arity {} does not match n = {n}",
                        poly.arity()
                    )));
                }
            }
            Observable::UserF(user) => {
                if user.components.len() != n {
                    return Err(Error::IndexOutOfRange(format!(
                        "flow constant has {} components, expected {n}",
                        user.components.len()
                    )));
                }
                for c in &user.components {
                    if c.arity() != n {
                        return Err(Error::IndexOutOfRange(format!(
                            "component arity {} does not match n = {n}",
                            c.arity()
                        )));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Display label, also accepted by [`Observable::parse`] for the
    /// parameterized tags.
    pub fn label(&self) -> String {
        match self {
            Observable::PowerTrace(k) => format!("I({k})"),
            Observable::WeightedTrace(k) => format!("I1({k})"),
            Observable::Hamiltonian => "H".to_string(),
            Observable::Momentum => "P".to_string(),
            Observable::InvariantFunction(_) => "poly".to_string(),
            Observable::ExtraC { k, j } => format!("C({k},{j})"),
            Observable::ExtraK { j } => format!("K({j})"),
            Observable::ExtraL { j } => format!("L({j})"),
            Observable::UserF(_) => "F".to_string(),
        }
    }

    /// Parse a registry id such as `I(2)`, `I1(-1)`, `H`, `P`, `C(2,1)`,
    /// `K(2)`, or `L(3)`.
    pub fn parse(id: &str) -> Result<Self> {
        let s = id.trim();
        match s {
            "H" | "h" => return Ok(Observable::Hamiltonian),
            "P" | "p" | "momentum" | "Momentum" => return Ok(Observable::Momentum),
            _ => {}
        }
        let parse_err = || Error::UnknownObservable(id.to_string());
        let open = s.find('(').ok_or_else(parse_err)?;
        if !s.ends_with(')') {
            return Err(parse_err());
        }
        let head = &s[..open];
        let args = &s[open + 1..s.len() - 1];
        match head {
            "I" => Ok(Observable::PowerTrace(
                args.trim().parse().map_err(|_| parse_err())?,
            )),
            "I1" => Ok(Observable::WeightedTrace(
                args.trim().parse().map_err(|_| parse_err())?,
            )),
            "C" => {
                let mut it = args.split(',');
                let k = it
                    .next()
                    .and_then(|t| t.trim().parse().ok())
                    .ok_or_else(parse_err)?;
                let j = it
                    .next()
                    .and_then(|t| t.trim().parse().ok())
                    .ok_or_else(parse_err)?;
                if it.next().is_some() {
                    return Err(parse_err());
                }
                Ok(Observable::ExtraC { k, j })
            }
            "K" => Ok(Observable::ExtraK {
                j: args.trim().parse().map_err(|_| parse_err())?,
            }),
            "L" => Ok(Observable::ExtraL {
                j: args.trim().parse().map_err(|_| parse_err())?,
            }),
            _ => Err(parse_err()),
        }
    }

    /// Evaluate at raw coordinate slices with a caller-provided engine, so a
    /// batch of observables at one point shares cached matrix powers.
    pub(crate) fn eval_with_engine<S: RsScalar>(
        &self,
        engine: &mut InvariantEngine<'_, S>,
        cfg: &ModelConfig,
    ) -> Result<S> {
        let n = cfg.n as i32;
        match self {
            Observable::PowerTrace(k) => engine.trace_power(*k),
            Observable::WeightedTrace(k) => engine.weighted_trace(*k),
            Observable::Hamiltonian => engine.hamiltonian(),
            Observable::Momentum => engine.momentum(),
            Observable::InvariantFunction(poly) => {
                let invariants = engine.leading_invariants()?;
                Ok(poly.eval(&invariants))
            }
            Observable::ExtraC { k, j } => {
                let (k, j) = (*k as i32, *j as i32);
                let w_k = engine.weighted_trace(k)?;
                let w_j = engine.weighted_trace(j)?;
                let i_2j = engine.trace_power(2 * j)?;
                let i_kj = engine.trace_power(k + j)?;
                Ok(w_k * i_2j - w_j * i_kj)
            }
            Observable::ExtraK { j } => {
                let j = *j as i32;
                let w_j = engine.weighted_trace(j)?;
                let w_1 = engine.weighted_trace(1)?;
                let i2 = engine.trace_power(2)?;
                let plus = engine.trace_power(j + 1)?;
                let minus = engine.trace_power(j - 1)?;
                Ok(w_j * (i2 - S::from_f64(n as f64)) - w_1 * (plus - minus))
            }
            Observable::ExtraL { j } => {
                let j = *j as i32;
                let w_j = engine.weighted_trace(j)?;
                let w_1 = engine.weighted_trace(1)?;
                let i2 = engine.trace_power(2)?;
                let plus = engine.trace_power(j + 1)?;
                let minus = engine.trace_power(j - 1)?;
                Ok(w_j * (i2 + S::from_f64(n as f64)) - w_1 * (plus + minus))
            }
            Observable::UserF(user) => {
                let invariants = engine.leading_invariants()?;
                let mut acc = S::zero();
                for (idx, component) in user.components.iter().enumerate() {
                    let k = (idx + 1) as i32;
                    let coeff = component.eval(&invariants);
                    if coeff == S::zero() {
                        continue;
                    }
                    acc = acc + engine.weighted_trace(k)? * coeff;
                }
                Ok(acc)
            }
        }
    }

    /// Evaluate at raw coordinate slices.
    pub fn eval_raw<S: RsScalar>(&self, q: &[S], p: &[S], cfg: &ModelConfig) -> Result<S> {
        self.validate(cfg)?;
        let mut engine = InvariantEngine::new(q, p, cfg)?;
        self.eval_with_engine(&mut engine, cfg)
    }

    /// Evaluate at a validated point.
    pub fn eval(&self, point: &PhasePoint, cfg: &ModelConfig) -> Result<f64> {
        self.eval_raw(point.q(), point.p(), cfg)
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    fn cfg(n: usize) -> ModelConfig {
        ModelConfig::new(n, 1.0).unwrap()
    }

    fn hand_point(cfg: &ModelConfig) -> PhasePoint {
        PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], cfg).unwrap()
    }

    #[test]
    fn parse_roundtrip() {
        for id in ["I(2)", "I1(-1)", "H", "P", "C(2,1)", "K(2)", "L(3)"] {
            let obs = Observable::parse(id).unwrap();
            assert_eq!(obs.label(), id);
        }
        assert!(Observable::parse("Q(1)").is_err());
        assert!(Observable::parse("I(x)").is_err());
        assert!(Observable::parse("C(1)").is_err());
    }

    #[test]
    fn index_validation() {
        let c = cfg(2);
        assert!(Observable::ExtraC { k: 1, j: 1 }.validate(&c).is_err());
        assert!(Observable::ExtraC { k: 3, j: 1 }.validate(&c).is_err());
        assert!(Observable::ExtraC { k: 2, j: 1 }.validate(&c).is_ok());
        assert!(Observable::ExtraK { j: 1 }.validate(&c).is_err());
        assert!(Observable::ExtraK { j: 2 }.validate(&c).is_ok());
        assert!(Observable::ExtraL { j: 3 }.validate(&c).is_err());
    }

    #[test]
    fn extra_constants_vanish_at_symmetric_point() {
        let c = cfg(2);
        let pt = hand_point(&c);
        let cval = Observable::ExtraC { k: 2, j: 1 }.eval(&pt, &c).unwrap();
        assert!(cval.abs() < 1e-12, "C(2,1) = {cval}");
        let kval = Observable::ExtraK { j: 2 }.eval(&pt, &c).unwrap();
        assert!(kval.abs() < 1e-12, "K(2) = {kval}");
    }

    #[test]
    fn zero_flow_constant_evaluates_to_zero() {
        let c = cfg(2);
        let user = UserFlowConstant::new(vec![InvariantPoly::zero(2), InvariantPoly::zero(2)]);
        let v = Observable::UserF(user).eval(&hand_point(&c), &c).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn user_flow_constant_reproduces_extra_c() {
        // With U^1 = I_3(I_1, I_2) = (3 I_1 I_2 - I_1^3) / 2 and U^2 = -I_2,
        // the flow constant equals I1_1 I_3 - I1_2 I_2 = -C(2,1).
        let c = cfg(2);
        let u1 = InvariantPoly::new(
            2,
            vec![(1.5, vec![1, 1]), (-0.5, vec![3, 0])],
        )
        .unwrap();
        let u2 = InvariantPoly::new(2, vec![(-1.0, vec![0, 1])]).unwrap();
        let f = Observable::UserF(UserFlowConstant::new(vec![u1, u2]));
        let cjk = Observable::ExtraC { k: 2, j: 1 };
        let pt = PhasePoint::new(vec![1.3, -0.9], vec![0.4, -0.7], &c).unwrap();
        let fv = f.eval(&pt, &c).unwrap();
        let cv = cjk.eval(&pt, &c).unwrap();
        assert!(
            (fv + cv).abs() < 1e-12 * (1.0 + cv.abs()),
            "F = {fv}, C = {cv}"
        );
    }

    #[test]
    fn invariant_polynomial_partials() {
        // f = 2 I_1^2 I_2 + I_2^3
        let poly = InvariantPoly::new(2, vec![(2.0, vec![2, 1]), (1.0, vec![0, 3])]).unwrap();
        let x = [1.5, -0.5];
        let df1 = poly.partial(1).eval(&x);
        let df2 = poly.partial(2).eval(&x);
        assert!((df1 - 4.0 * 1.5 * -0.5).abs() < 1e-15);
        assert!((df2 - (2.0 * 2.25 + 3.0 * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn plain_value_matches_dual_value_component() {
        let c = cfg(3);
        let q = [2.2, 0.1, -1.9];
        let p = [0.3, -0.6, 0.9];
        let observables = [
            Observable::PowerTrace(2),
            Observable::PowerTrace(-2),
            Observable::WeightedTrace(3),
            Observable::Hamiltonian,
            Observable::Momentum,
            Observable::ExtraC { k: 2, j: 1 },
            Observable::ExtraK { j: 3 },
            Observable::ExtraL { j: 2 },
        ];
        let qd: Vec<Dual> = q.iter().map(|&x| Dual::seeded(x)).collect();
        let pd: Vec<Dual> = p.iter().map(|&x| Dual::constant(x)).collect();
        for obs in &observables {
            let plain = obs.eval_raw(&q[..], &p[..], &c).unwrap();
            let dual = obs.eval_raw(&qd[..], &pd[..], &c).unwrap();
            assert!(
                (plain - dual.val).abs() < 1e-12 * (1.0 + plain.abs()),
                "{obs}: {plain} vs {}",
                dual.val
            );
        }
    }
}
