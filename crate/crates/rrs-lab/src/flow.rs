//! Hamiltonian flows, linear evolution of the weighted traces, and
//! scattering asymptotics.
//!
//! Flows integrate the canonical equations `dq/dt = dF/dp`, `dp/dt = -dF/dq`
//! with an embedded Dormand-Prince 5(4) pair. An explicit adaptive scheme is
//! the right tool here: trajectories are short scattering arcs, conserved
//! quantities are monitored directly, and the controller resolves the
//! near-interaction region on its own. Orderedness of the configuration is
//! revalidated at every stage, so a Weyl-chamber violation surfaces as a
//! collision error instead of silent garbage.

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::model::build_lax;
use crate::observable::Observable;
use crate::phase::PhasePoint;
use crate::poisson::{gradient, poisson_bracket};

/// Step-size control for the embedded pair.
#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// One tracked observable series along a trajectory.
#[derive(Clone, Debug)]
pub struct TrackedSeries {
    pub observable: Observable,
    pub values: Vec<f64>,
    /// `max_t |v(t) - v(0)| / (1 + |v(0)|)`.
    pub drift: f64,
}

/// Time series of accepted states with per-step observable values.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub tracked: Vec<TrackedSeries>,
}

impl Trajectory {
    pub fn last_state(&self) -> &PhasePoint {
        self.states.last().expect("trajectory is never empty")
    }

    /// Largest drift among the tracked series.
    pub fn max_drift(&self) -> f64 {
        self.tracked.iter().map(|t| t.drift).fold(0.0, f64::max)
    }

    pub fn series(&self, obs: &Observable) -> Option<&TrackedSeries> {
        self.tracked.iter().find(|t| &t.observable == obs)
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate the flow generated by `flow_obs`, tracking the generator, the
/// commuting invariants `I_k` for `k` in `[-n, n]`, and any extra series.
pub fn hamiltonian_flow_tracking(
    flow_obs: &Observable,
    start: &PhasePoint,
    cfg: &ModelConfig,
    t_end: f64,
    ctrl: &StepControl,
    extra: &[Observable],
) -> Result<Trajectory> {
    flow_obs.validate(cfg)?;
    let n = cfg.n;
    let mut tracked_obs: Vec<Observable> = vec![flow_obs.clone()];
    for k in -(n as i32)..=n as i32 {
        let obs = Observable::PowerTrace(k);
        if obs != *flow_obs {
            tracked_obs.push(obs);
        }
    }
    for obs in extra {
        if !tracked_obs.contains(obs) {
            tracked_obs.push(obs.clone());
        }
    }

    let rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let point = PhasePoint::from_state(y, cfg).map_err(|e| collision_from(e, t, cfg))?;
        let g = gradient(flow_obs, &point, cfg)?;
        let mut dy = Vec::with_capacity(2 * n);
        dy.extend_from_slice(&g.dp);
        dy.extend(g.dq.iter().map(|d| -d));
        Ok(dy)
    };

    let mut times = Vec::new();
    let mut states: Vec<PhasePoint> = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); tracked_obs.len()];
    let mut record = |t: f64, point: PhasePoint| -> Result<()> {
        let mut engine =
            crate::model::InvariantEngine::new(point.q(), point.p(), cfg)?;
        for (obs, out) in tracked_obs.iter().zip(series.iter_mut()) {
            out.push(obs.eval_with_engine(&mut engine, cfg)?);
        }
        times.push(t);
        states.push(point);
        Ok(())
    };

    let mut t = 0.0;
    let mut y = start.to_state();
    record(0.0, start.clone())?;
    let mut h = ctrl.h_init.min(ctrl.h_max).min(t_end.max(1e-12));
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; 2 * n]; 7];
    k[0] = rhs(t, &y)?;
    let mut steps = 0usize;
    while t < t_end {
        if steps >= ctrl.max_steps {
            return Err(Error::StepBudgetExceeded(ctrl.max_steps));
        }
        steps += 1;
        if t + h > t_end {
            h = t_end - t;
        }
        // stages 2..7 (k[0] is fresh from FSAL)
        let mut stage_ok = Ok(());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s - 1][j];
                if a != 0.0 {
                    for (yi, ki) in ys.iter_mut().zip(kj) {
                        *yi += h * a * ki;
                    }
                }
            }
            match rhs(t + C[s] * h, &ys) {
                Ok(f) => k[s] = f,
                Err(e) => {
                    stage_ok = Err(e);
                    break;
                }
            }
        }
        if let Err(e) = stage_ok {
            // a failed trial stage with a tiny step is a genuine collision
            if h <= 16.0 * ctrl.h_min {
                return Err(e);
            }
            h *= 0.25;
            continue;
        }
        let mut y_new = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                for (yi, ki) in y_new.iter_mut().zip(kj) {
                    *yi += h * B5[j] * ki;
                }
            }
        }
        // error estimate from the embedded 4th-order weights
        let mut err_sq = 0.0;
        for i in 0..2 * n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sc = ctrl.abs_tol + ctrl.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / (2 * n) as f64).sqrt();
        if err <= 1.0 {
            t += h;
            y = y_new;
            let point = PhasePoint::from_state(&y, cfg).map_err(|e| collision_from(e, t, cfg))?;
            record(t, point)?;
            k[0] = rhs(t, &y)?; // FSAL refresh at the accepted state
            let factor = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            h = (h * factor).min(ctrl.h_max);
        } else {
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= factor;
        }
        if h < ctrl.h_min {
            return Err(Error::StepUnderflow { time: t, step: h });
        }
    }

    let tracked = tracked_obs
        .into_iter()
        .zip(series)
        .map(|(observable, values)| {
            let v0 = values[0];
            let drift = values
                .iter()
                .map(|v| (v - v0).abs() / (1.0 + v0.abs()))
                .fold(0.0, f64::max);
            TrackedSeries {
                observable,
                values,
                drift,
            }
        })
        .collect();
    Ok(Trajectory {
        times,
        states,
        tracked,
    })
}

fn collision_from(e: Error, t: f64, cfg: &ModelConfig) -> Error {
    match e {
        Error::SingularConfiguration { min_gap, .. } => Error::Collision {
            time: t,
            min_gap,
            gap_floor: cfg.gap_floor,
        },
        Error::UnorderedConfiguration { value, next, .. } => Error::Collision {
            time: t,
            min_gap: value - next,
            gap_floor: cfg.gap_floor,
        },
        other => other,
    }
}

/// Flow with the default tracked set.
pub fn hamiltonian_flow(
    flow_obs: &Observable,
    start: &PhasePoint,
    cfg: &ModelConfig,
    t_end: f64,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    hamiltonian_flow_tracking(flow_obs, start, cfg, t_end, ctrl, &[])
}

/// Line-fit summary of one weighted trace along a flow.
#[derive(Clone, Copy, Debug)]
pub struct LinearityCheck {
    pub k: i32,
    pub slope: f64,
    pub intercept: f64,
    /// Worst absolute deviation from the fitted line.
    pub max_residual: f64,
    /// Bracket `{I1_k, F}` at the initial point.
    pub bracket_slope: f64,
    /// `|slope - bracket| / (1 + |bracket|)`.
    pub slope_error: f64,
}

/// Check that `I1_k(t)` is linear along the flow of an invariant function,
/// with slope equal to the initial bracket.
pub fn linearity_check(
    flow_obs: &Observable,
    k: i32,
    start: &PhasePoint,
    cfg: &ModelConfig,
    t_end: f64,
    ctrl: &StepControl,
) -> Result<LinearityCheck> {
    let mut checks = linearity_check_multi(flow_obs, &[k], start, cfg, t_end, ctrl)?;
    Ok(checks.pop().unwrap())
}

/// Shared-trajectory variant over several trace indices.
pub fn linearity_check_multi(
    flow_obs: &Observable,
    ks: &[i32],
    start: &PhasePoint,
    cfg: &ModelConfig,
    t_end: f64,
    ctrl: &StepControl,
) -> Result<Vec<LinearityCheck>> {
    if !flow_obs.is_invariant_function() {
        return Err(Error::InvalidFlowGenerator(flow_obs.label()));
    }
    let extra: Vec<Observable> = ks.iter().map(|&k| Observable::WeightedTrace(k)).collect();
    let traj = hamiltonian_flow_tracking(flow_obs, start, cfg, t_end, ctrl, &extra)?;
    ks.iter()
        .map(|&k| {
            let series = traj
                .series(&Observable::WeightedTrace(k))
                .expect("requested series is tracked");
            let (slope, intercept, max_residual) = line_fit(&traj.times, &series.values)?;
            let bracket_slope = poisson_bracket(
                &Observable::WeightedTrace(k),
                flow_obs,
                start,
                cfg,
            )?;
            Ok(LinearityCheck {
                k,
                slope,
                intercept,
                max_residual,
                bracket_slope,
                slope_error: (slope - bracket_slope).abs() / (1.0 + bracket_slope.abs()),
            })
        })
        .collect()
}

/// Ordinary least squares `y = a + b t`; returns `(b, a, max |resid|)`.
fn line_fit(t: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = t.len() as f64;
    if t.len() < 2 {
        return Err(Error::DegenerateFit("need at least two samples"));
    }
    let tbar = t.iter().sum::<f64>() / n;
    let ybar = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|ti| (ti - tbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all sample times coincide"));
    }
    let sxy: f64 = t
        .iter()
        .zip(y)
        .map(|(ti, yi)| (ti - tbar) * (yi - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * tbar;
    let max_residual = t
        .iter()
        .zip(y)
        .map(|(ti, yi)| (yi - intercept - slope * ti).abs())
        .fold(0.0, f64::max);
    Ok((slope, intercept, max_residual))
}

/// Least squares on the basis `(1, t, 1/t)`, for asymptote extraction where
/// the interaction leaves a decaying `1/t` tail. Returns `(a, b, c)` in
/// `y = a + b t + c / t` and the worst residual of the full model.
fn tail_fit(t: &[f64], y: &[f64]) -> Result<([f64; 3], f64)> {
    if t.len() < 3 {
        return Err(Error::DegenerateFit("need at least three samples"));
    }
    // normal equations for the 3-parameter basis
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let basis = [1.0, ti, 1.0 / ti];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += basis[r] * basis[c];
            }
            aty[r] += basis[r] * yi;
        }
    }
    let coeffs = solve3(ata, aty).ok_or(Error::DegenerateFit("singular normal equations"))?;
    let max_residual = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| (yi - coeffs[0] - coeffs[1] * ti - coeffs[2] / ti).abs())
        .fold(0.0, f64::max);
    Ok((coeffs, max_residual))
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot_row = (col..3).max_by(|&r, &s| {
            a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap()
        })?;
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for c2 in col..3 {
                a[row][c2] -= f * a[col][c2];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c2 in row + 1..3 {
            acc -= a[row][c2] * x[c2];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Asymptotic data extracted from a long principal-Hamiltonian flow.
#[derive(Clone, Debug)]
pub struct ScatteringResult {
    /// Asymptotic momenta, strictly decreasing.
    pub p_plus: Vec<f64>,
    /// Asymptotic offsets `q_i(t) - t v_i`.
    pub q_plus: Vec<f64>,
    /// Worst deviation of the fitted asymptote model over the fit window.
    pub fit_residual: f64,
    /// Eigenvalues of the initial Lax matrix, descending.
    pub lax_spectrum: Vec<f64>,
    /// Worst relative mismatch of `exp(2 s p_plus)` against the spectrum.
    pub spectrum_match_error: f64,
    /// Which asymptotic form was tested, e.g. `I_k ~ sum_i exp(k p_i)`.
    pub asymptotic_form: String,
}

/// Minimum final gap, in units of `|chi|`, for the asymptotics to be
/// trusted.
pub const SEPARATION_FACTOR: f64 = 50.0;

/// Integrate the principal-Hamiltonian flow to `t_end`, fit the outgoing
/// asymptotes `q_i(t) ~ q_i + t v_i` (with a `1/t` interaction tail) over
/// the final 20% of the horizon, and convert velocities to asymptotic
/// momenta via `v = 2 s sinh(2 s p)`.
pub fn scattering_extract(
    start: &PhasePoint,
    cfg: &ModelConfig,
    t_end: f64,
    ctrl: &StepControl,
) -> Result<ScatteringResult> {
    let mut ctrl = *ctrl;
    // keep the fit window populated even when the motion is nearly free
    ctrl.h_max = ctrl.h_max.min(t_end / 200.0);
    let traj = hamiltonian_flow(&Observable::Hamiltonian, start, cfg, t_end, &ctrl)?;
    let final_gap = traj.last_state().min_gap();
    let required = SEPARATION_FACTOR * cfg.chi.abs();
    if cfg.n > 1 && final_gap < required {
        return Err(Error::NeedsLongerHorizon {
            min_gap: final_gap,
            required,
        });
    }
    let window_start = 0.8 * t_end;
    let idx: Vec<usize> = (0..traj.times.len())
        .filter(|&i| traj.times[i] >= window_start)
        .collect();
    let times: Vec<f64> = idx.iter().map(|&i| traj.times[i]).collect();
    let n = cfg.n;
    let mut q_plus = Vec::with_capacity(n);
    let mut v_plus = Vec::with_capacity(n);
    let mut fit_residual = 0.0f64;
    for coord in 0..n {
        let ys: Vec<f64> = idx.iter().map(|&i| traj.states[i].q()[coord]).collect();
        if n == 1 {
            // free motion: plain line fit
            let (slope, intercept, resid) = line_fit(&times, &ys)?;
            q_plus.push(intercept);
            v_plus.push(slope);
            fit_residual = fit_residual.max(resid);
        } else {
            let ([a, b, _c], resid) = tail_fit(&times, &ys)?;
            q_plus.push(a);
            v_plus.push(b);
            fit_residual = fit_residual.max(resid);
        }
    }
    let two_s = 2.0 * cfg.convention.momentum_scale();
    let p_plus: Vec<f64> = v_plus.iter().map(|v| (v / two_s).asinh() / two_s).collect();
    for w in p_plus.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::UnorderedAsymptotics(p_plus.clone()));
        }
    }
    let lax = build_lax(start, cfg)?;
    let mut lax_spectrum: Vec<f64> = lax.eigenvalues().to_vec();
    lax_spectrum.reverse(); // descending, paired with decreasing p_plus
    let spectrum_match_error = lax_spectrum
        .iter()
        .zip(&p_plus)
        .map(|(lam, p)| ((two_s * p).exp() - lam).abs() / lam)
        .fold(0.0, f64::max);
    let asymptotic_form = format!(
        "I_k ~ sum_i exp({} * k * p_i)",
        if two_s == 1.0 { "1" } else { "2" }
    );
    Ok(ScatteringResult {
        p_plus,
        q_plus,
        fit_residual,
        lax_spectrum,
        spectrum_match_error,
        asymptotic_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cosh_sum;

    fn cfg(n: usize) -> ModelConfig {
        ModelConfig::new(n, 1.0).unwrap()
    }

    #[test]
    fn free_particle_flow_is_exact() {
        // n = 1: q(t) = q0 + t exp(p0), p constant.
        let c = cfg(1);
        let start = PhasePoint::new(vec![0.2], vec![0.4], &c).unwrap();
        let traj = hamiltonian_flow(
            &Observable::PowerTrace(1),
            &start,
            &c,
            10.0,
            &StepControl::default(),
        )
        .unwrap();
        let end = traj.last_state();
        let expect = 0.2 + 10.0 * 0.4f64.exp();
        assert!(
            (end.q()[0] - expect).abs() < 1e-9,
            "{} vs {expect}",
            end.q()[0]
        );
        assert!((end.p()[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn energy_drift_stays_tiny() {
        let c = cfg(2);
        let start = PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], &c).unwrap();
        let traj = hamiltonian_flow(
            &Observable::Hamiltonian,
            &start,
            &c,
            50.0,
            &StepControl::default(),
        )
        .unwrap();
        let h_series = traj.series(&Observable::Hamiltonian).unwrap();
        assert!(h_series.drift < 1e-9, "drift {}", h_series.drift);
        // isospectrality: every I_k stays put
        assert!(traj.max_drift() < 1e-9, "max drift {}", traj.max_drift());
    }

    #[test]
    fn weyl_ordering_preserved_along_flow() {
        let c = cfg(3);
        let start = PhasePoint::new(vec![2.0, 0.0, -2.0], vec![-0.5, 0.1, 0.6], &c).unwrap();
        // inward momenta force a close approach; the repulsion must keep
        // the ordering intact
        let traj = hamiltonian_flow(
            &Observable::Hamiltonian,
            &start,
            &c,
            20.0,
            &StepControl::default(),
        )
        .unwrap();
        for s in &traj.states {
            assert!(s.min_gap() > 0.0);
        }
    }

    #[test]
    fn momentum_flow_translates_balanced_configurations() {
        // With mirror-symmetric momenta the total-momentum flow moves every
        // particle at the same rate, so all gaps are constant.
        let c = cfg(2);
        let start = PhasePoint::new(vec![1.0, -1.0], vec![0.4, -0.4], &c).unwrap();
        let traj = hamiltonian_flow(
            &Observable::Momentum,
            &start,
            &c,
            10.0,
            &StepControl::default(),
        )
        .unwrap();
        let gap0 = traj.states[0].min_gap();
        for s in &traj.states {
            assert!((s.min_gap() - gap0).abs() < 1e-9, "gap drifted");
        }
        // and it does translate: the centroid moves at cosh(p) * dressing
        let moved = traj.last_state().q()[0] - start.q()[0];
        assert!(moved.abs() > 1.0);
    }

    #[test]
    fn linearity_hand_slope() {
        // slope of I1_1 along the I_1 flow equals I_2 = 3 at the hand point.
        let c = cfg(2);
        let start = PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], &c).unwrap();
        let check = linearity_check(
            &Observable::PowerTrace(1),
            1,
            &start,
            &c,
            5.0,
            &StepControl::default(),
        )
        .unwrap();
        assert!((check.slope - 3.0).abs() < 1e-8, "slope {}", check.slope);
        assert!(check.slope_error < 1e-9);
        assert!(check.max_residual < 1e-6 * (1.0 + check.slope.abs() * 5.0));
    }

    #[test]
    fn constant_generator_freezes_weighted_traces() {
        // I_0 is constant, so its flow leaves everything in place.
        let c = cfg(2);
        let start = PhasePoint::new(vec![1.3, -0.8], vec![0.5, -0.2], &c).unwrap();
        let check = linearity_check(
            &Observable::PowerTrace(0),
            1,
            &start,
            &c,
            5.0,
            &StepControl::default(),
        )
        .unwrap();
        assert!(check.slope.abs() < 1e-12);
        assert!(check.max_residual < 1e-10);
    }

    #[test]
    fn weighted_trace_rejected_as_generator() {
        let c = cfg(2);
        let start = PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], &c).unwrap();
        let err = linearity_check(
            &Observable::WeightedTrace(1),
            1,
            &start,
            &c,
            1.0,
            &StepControl::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidFlowGenerator(_)));
    }

    #[test]
    fn single_particle_scattering_is_exact() {
        let c = cfg(1);
        let start = PhasePoint::new(vec![0.7], vec![0.5], &c).unwrap();
        let r = scattering_extract(&start, &c, 50.0, &StepControl::default()).unwrap();
        assert!((r.p_plus[0] - 0.5).abs() < 1e-10);
        assert!((r.q_plus[0] - 0.7).abs() < 1e-8);
        assert!(r.spectrum_match_error < 1e-12);
    }

    #[test]
    fn two_body_spectrum_matches_asymptotic_momenta() {
        let c = cfg(2);
        let start = PhasePoint::new(vec![1.0, -1.0], vec![0.4, -0.4], &c).unwrap();
        let r = scattering_extract(&start, &c, 200.0, &StepControl::default()).unwrap();
        assert!(
            r.spectrum_match_error < 1e-5,
            "spectrum mismatch {}",
            r.spectrum_match_error
        );
        assert!(r.p_plus[0] > r.p_plus[1]);
    }

    #[test]
    fn short_horizon_is_reported() {
        let c = cfg(2);
        let start = PhasePoint::new(vec![1.0, -1.0], vec![0.4, -0.4], &c).unwrap();
        let err = scattering_extract(&start, &c, 5.0, &StepControl::default()).unwrap_err();
        assert!(matches!(err, Error::NeedsLongerHorizon { .. }));
    }

    #[test]
    fn asymptotic_invariant_error_quarters_when_gaps_double() {
        // Off-diagonal decay: |I_k - sum exp(k p_i)| = O(chi^2 / gap^2).
        let c = cfg(2);
        let p = vec![0.6, -0.3];
        let delta = |gap: f64| -> f64 {
            let pt = PhasePoint::new(vec![gap / 2.0, -gap / 2.0], p.clone(), &c).unwrap();
            let i1 = crate::model::lax_power_trace(&pt, &c, 1).unwrap().value;
            let free: f64 = p.iter().map(|x| x.exp()).sum();
            (i1 - free).abs()
        };
        let d50 = delta(50.0);
        let d100 = delta(100.0);
        let ratio = d50 / d100;
        assert!(
            (3.6..=4.4).contains(&ratio),
            "ratio {ratio} (d50 = {d50}, d100 = {d100})"
        );
    }

    #[test]
    fn direct_sum_hamiltonian_matches_lax_route_along_flow() {
        let c = cfg(2);
        let start = PhasePoint::new(vec![1.2, -0.9], vec![0.3, -0.5], &c).unwrap();
        let traj = hamiltonian_flow(
            &Observable::Hamiltonian,
            &start,
            &c,
            10.0,
            &StepControl::default(),
        )
        .unwrap();
        for s in traj.states.iter().step_by(50) {
            let lax_route = crate::model::principal_hamiltonian(s, &c).unwrap();
            let direct = cosh_sum(s, &c);
            assert!((lax_route - direct).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }
}
