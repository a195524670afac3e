//! Inverse problem: find `beta` with `E(beta) = e`, or show none exists.
//!
//! The flow `∂_t beta = -J^{-1}(E(beta) - e)` moves the image point
//! `E(beta(t))` along the straight segment toward `e` with
//! `Δ(t) = Δ_0 e^{-2t}`, where `Δ = |E - e|^2 / 2`. For an interior target
//! `beta(t)` converges; for a boundary target `|beta|` diverges while `Δ → 0`;
//! for an exterior target `|beta|` diverges at finite time with `Δ` stuck
//! at a positive value. The discretized integrator here detects those three
//! outcomes with explicit thresholds and reports `Inconclusive` when none
//! fires within the step budget.
//!
//! Steps that would increase `Δ` are rejected and retried with half the
//! step size, so recorded trajectories always have non-increasing `Δ`.

mod family;
mod marginal;

pub use family::{family_at, state_family, StateFamily, INTERVAL_CAP, MAX_FAMILY_DIM};
pub use marginal::{marginal_operator_set, marginal_target, solve_marginal};

use std::collections::VecDeque;

use faer::{Mat, Side};
use faer::linalg::solvers::Solve;

use crate::error::{AtlasError, Result};
use crate::gibbs::{evaluate, BetaVector, ExpectationVector, ThermalPoint, BETA_SATURATION};
use crate::linalg::{DensityMatrix, OperatorSet};

/// Jacobians with a larger condition number count as singular.
pub const SINGULAR_CONDITION: f64 = 1e14;
/// A diverging run is a boundary candidate only if `Δ < BOUNDARY_DELTA_RATIO * Δ_0`.
pub const BOUNDARY_DELTA_RATIO: f64 = 1e-2;
/// Interior convergence also requires `|J^{-1}(E - e)| <= BETA_STEP_TOL * (1 + |beta|)`.
pub const BETA_STEP_TOL: f64 = 1e-6;
/// Step size below `dt * MIN_STEP_RATIO` means the flow cannot advance.
const MIN_STEP_RATIO: f64 = 1e-6;
/// Number of recent attempts that must show nominal decay for a "still decreasing" trend.
const TREND_WINDOW: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = AtlasError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(AtlasError::Domain(format!("unknown integrator '{other}' (expected euler or rk4)"))),
        }
    }
}

impl Integrator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Integrator::Euler => "euler",
            Integrator::Rk4 => "rk4",
        }
    }
}

/// Discretization and termination thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowParams {
    pub dt: f64,
    /// Maximum number of step attempts, rejected ones included.
    pub max_steps: usize,
    /// Interior when `Δ` drops below this (and `beta` has settled).
    pub delta_tol: f64,
    /// Divergence threshold on `|beta|`; `None` means `1e3 (1 + |beta_0|)`.
    pub beta_cap: Option<f64>,
    /// Exterior needs `Δ > delta_floor * Δ_0` at divergence.
    pub delta_floor: f64,
    pub integrator: Integrator,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            dt: 0.4,
            max_steps: 2000,
            delta_tol: 1e-16,
            beta_cap: None,
            delta_floor: 1e-6,
            integrator: Integrator::Euler,
        }
    }
}

impl FlowParams {
    /// RK4 with `dt = 0.05`, for runs that track the continuous flow closely.
    pub fn precise() -> Self {
        Self {
            dt: 0.05,
            max_steps: 5000,
            integrator: Integrator::Rk4,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.dt) || !positive(self.delta_tol) || !positive(self.delta_floor) || self.max_steps == 0 {
            return Err(AtlasError::Domain(format!("invalid flow parameters: {self:?}")));
        }
        if let Some(cap) = self.beta_cap {
            if !positive(cap) {
                return Err(AtlasError::Domain(format!("beta_cap must be positive, got {cap}")));
            }
        }
        Ok(())
    }

    fn cap_for(&self, beta0: &BetaVector) -> f64 {
        self.beta_cap.unwrap_or(1e3 * (1.0 + beta0.norm())).min(BETA_SATURATION)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Interior,
    Boundary,
    Exterior,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Interior => "interior",
            Classification::Boundary => "boundary",
            Classification::Exterior => "exterior",
            Classification::Inconclusive => "inconclusive",
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Classification::Interior => 0,
            Classification::Exterior => 2,
            Classification::Boundary => 3,
            Classification::Inconclusive => 4,
        }
    }

    /// Interior or boundary.
    pub fn is_member(&self) -> Option<bool> {
        match self {
            Classification::Interior | Classification::Boundary => Some(true),
            Classification::Exterior => Some(false),
            Classification::Inconclusive => None,
        }
    }
}

/// Why the integrator stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    BetaCap,
    SingularJacobian,
    Stalled,
    MaxSteps,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::BetaCap => "beta_cap",
            Termination::SingularJacobian => "singular_jacobian",
            Termination::Stalled => "stalled",
            Termination::MaxSteps => "max_steps",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowSample {
    pub t: f64,
    pub beta: Vec<f64>,
    pub expectations: Vec<f64>,
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub classification: Classification,
    pub termination: Termination,
    pub beta_final: BetaVector,
    /// Present exactly when the target is interior.
    pub state: Option<DensityMatrix>,
    /// Accepted steps, starting with the initial point.
    pub trajectory: Vec<FlowSample>,
    /// Final `Δ`.
    pub residual: f64,
    /// Step attempts made, rejected ones included.
    pub attempts: usize,
    pub delta_tol: f64,
}

impl FlowResult {
    pub fn final_expectations(&self) -> &[f64] {
        &self.trajectory.last().expect("trajectory always holds the initial point").expectations
    }

    pub fn initial_delta(&self) -> f64 {
        self.trajectory[0].delta
    }

    /// `true` when every recorded `Δ` is strictly below its predecessor.
    pub fn strictly_decreasing(&self) -> bool {
        self.trajectory.windows(2).all(|w| w[1].delta < w[0].delta)
    }

    /// Number of accepted steps until `Δ` first fell below `threshold`.
    pub fn steps_to_delta(&self, threshold: f64) -> Option<usize> {
        self.trajectory.iter().position(|s| s.delta < threshold)
    }
}

fn half_sq_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

enum Velocity {
    Ok(Vec<f64>),
    Singular,
}

/// Solves `J v = E - e` by symmetric indefinite factorization; the flow
/// velocity is `-v`.
fn newton_velocity(point: &ThermalPoint, target: &[f64]) -> Result<Velocity> {
    let jac = point.jacobian.as_mat();
    let ev = point.jacobian.eigenvalues()?;
    let max_abs = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min_abs = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    // J is negative definite in exact arithmetic
    if !(ev[ev.len() - 1] < 0.0) || !(min_abs > 0.0) || max_abs / min_abs > SINGULAR_CONDITION {
        return Ok(Velocity::Singular);
    }
    let e = point.expectations.as_slice();
    let n = e.len();
    let rhs = Mat::from_fn(n, 1, |i, _| e[i] - target[i]);
    let sol = jac.lblt(Side::Lower).solve(&rhs);
    let v: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
    if v.iter().all(|x| x.is_finite()) {
        Ok(Velocity::Ok(v))
    } else {
        Ok(Velocity::Singular)
    }
}

fn axpy(beta: &[f64], h: f64, v: &[f64]) -> Vec<f64> {
    beta.iter().zip(v).map(|(b, x)| b - h * x).collect()
}

/// One integrator step from `beta` (where `k1` is already known).
/// `None` means an intermediate stage hit a singular Jacobian.
fn propose(
    set: &OperatorSet,
    target: &[f64],
    beta: &[f64],
    k1: &[f64],
    h: f64,
    integrator: Integrator,
) -> Result<Option<Vec<f64>>> {
    match integrator {
        Integrator::Euler => Ok(Some(axpy(beta, h, k1))),
        Integrator::Rk4 => {
            let stage = |b: Vec<f64>| -> Result<Option<Vec<f64>>> {
                let point = match evaluate(&BetaVector::new(b)?, set) {
                    Ok(p) => p,
                    Err(AtlasError::Domain(_)) => return Ok(None),
                    Err(e) => return Err(e),
                };
                Ok(match newton_velocity(&point, target)? {
                    Velocity::Ok(v) => Some(v),
                    Velocity::Singular => None,
                })
            };
            let Some(k2) = stage(axpy(beta, h / 2.0, k1))? else { return Ok(None) };
            let Some(k3) = stage(axpy(beta, h / 2.0, &k2))? else { return Ok(None) };
            let Some(k4) = stage(axpy(beta, h, &k3))? else { return Ok(None) };
            let combined: Vec<f64> = (0..beta.len()).map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0).collect();
            Ok(Some(axpy(beta, h, &combined)))
        }
    }
}

/// Integrates the inverse flow from `beta0` toward target `e`.
pub fn integrate_flow(
    set: &OperatorSet,
    target: &ExpectationVector,
    beta0: &BetaVector,
    params: &FlowParams,
) -> Result<FlowResult> {
    params.validate()?;
    if target.len() != set.len() || beta0.len() != set.len() {
        return Err(AtlasError::Domain(format!(
            "operator set has {} operators but target has {} and beta0 has {} coordinates",
            set.len(),
            target.len(),
            beta0.len()
        )));
    }
    let e = target.as_slice();
    let cap = params.cap_for(beta0);
    let mut beta = beta0.as_slice().to_vec();
    let mut point = evaluate(beta0, set)?;
    let mut delta = half_sq_distance(point.expectations.as_slice(), e);
    let delta0 = delta;
    let mut t = 0.0;
    let mut trajectory = vec![FlowSample {
        t,
        beta: beta.clone(),
        expectations: point.expectations.as_slice().to_vec(),
        delta,
    }];
    let mut h = params.dt;
    let mut attempts = 0;
    let mut trend: VecDeque<bool> = VecDeque::with_capacity(TREND_WINDOW);

    let verdict_on_divergence = |delta: f64, trend: &VecDeque<bool>| {
        let decreasing = trend.len() == TREND_WINDOW && trend.iter().all(|ok| *ok);
        if decreasing && delta < BOUNDARY_DELTA_RATIO * delta0 {
            Classification::Boundary
        } else if delta > params.delta_floor * delta0 {
            Classification::Exterior
        } else {
            Classification::Boundary
        }
    };

    let (classification, termination) = loop {
        if delta == 0.0 {
            break (Classification::Interior, Termination::Converged);
        }
        let velocity = match newton_velocity(&point, e)? {
            Velocity::Ok(v) => v,
            Velocity::Singular => break (verdict_on_divergence(delta, &trend), Termination::SingularJacobian),
        };
        if delta < params.delta_tol && norm(&velocity) <= BETA_STEP_TOL * (1.0 + norm(&beta)) {
            break (Classification::Interior, Termination::Converged);
        }
        if norm(&beta) > cap {
            break (verdict_on_divergence(delta, &trend), Termination::BetaCap);
        }
        if attempts >= params.max_steps {
            break (Classification::Inconclusive, Termination::MaxSteps);
        }
        attempts += 1;

        let proposal = propose(set, e, &beta, &velocity, h, params.integrator)?;
        let accepted = match proposal {
            Some(next) if norm(&next) > cap => {
                break (verdict_on_divergence(delta, &trend), Termination::BetaCap);
            }
            Some(next) => {
                let next_beta = BetaVector::new(next)?;
                let next_point = evaluate(&next_beta, set)?;
                let next_delta = half_sq_distance(next_point.expectations.as_slice(), e);
                if next_delta <= delta {
                    Some((next_beta, next_point, next_delta))
                } else {
                    None
                }
            }
            None => None,
        };
        if trend.len() == TREND_WINDOW {
            trend.pop_front();
        }
        match accepted {
            Some((next_beta, next_point, next_delta)) => {
                // nominal decay is e^{-2h}; demand at least half that rate
                trend.push_back(next_delta == 0.0 || (next_delta / delta).ln() <= -h);
                t += h;
                beta = next_beta.into_vec();
                point = next_point;
                delta = next_delta;
                trajectory.push(FlowSample {
                    t,
                    beta: beta.clone(),
                    expectations: point.expectations.as_slice().to_vec(),
                    delta,
                });
                h = (2.0 * h).min(params.dt);
            }
            None => {
                trend.push_back(false);
                h /= 2.0;
                if h < params.dt * MIN_STEP_RATIO {
                    break (verdict_on_divergence(delta, &trend), Termination::Stalled);
                }
            }
        }
    };

    log::debug!(
        "flow finished: {} ({}) after {attempts} attempts, delta = {delta:.3e}, |beta| = {:.3e}",
        classification.as_str(),
        termination.as_str(),
        norm(&beta)
    );
    let state = (classification == Classification::Interior).then(|| point.spectrum.state());
    Ok(FlowResult {
        classification,
        termination,
        beta_final: BetaVector::new(beta)?,
        state,
        trajectory,
        residual: delta,
        attempts,
        delta_tol: params.delta_tol,
    })
}

/// [`integrate_flow`] from `beta0 = 0`, returning only the verdict.
pub fn classify(set: &OperatorSet, target: &ExpectationVector, params: &FlowParams) -> Result<Classification> {
    Ok(integrate_flow(set, target, &BetaVector::zeros(set.len()), params)?.classification)
}

/// Least-squares slope of `ln Δ` against `t` over samples with `Δ > 10 delta_tol`.
///
/// The continuous flow has slope exactly `-2`.
pub fn exponential_decay_check(result: &FlowResult) -> Result<f64> {
    let pts: Vec<(f64, f64)> = result
        .trajectory
        .iter()
        .filter(|s| s.delta > 10.0 * result.delta_tol)
        .map(|s| (s.t, s.delta.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(AtlasError::Domain(format!(
            "decay fit needs at least 10 samples with delta > 10 * delta_tol, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{degenerate_face_pair, pauli_set};
    use crate::gibbs::expectation_map;

    fn target(v: &[f64]) -> ExpectationVector {
        ExpectationVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bloch_interior_target_inverts_tanh() {
        let s = pauli_set();
        let r = integrate_flow(&s, &target(&[0.0, 0.0, 0.5]), &BetaVector::zeros(3), &FlowParams::default()).unwrap();
        assert_eq!(r.classification, Classification::Interior);
        let b = r.beta_final.as_slice();
        assert!(b[0].abs() < 1e-6 && b[1].abs() < 1e-6);
        assert!((b[2] + 0.5f64.atanh()).abs() < 1e-6, "{b:?}");
        let state = r.state.as_ref().unwrap();
        let e = s.expectations(state);
        let bound = (2.0 * r.delta_tol).sqrt();
        assert!(e.iter().zip([0.0, 0.0, 0.5]).all(|(a, b)| (a - b).abs() <= bound));
        assert!(r.trajectory.windows(2).all(|w| w[1].delta <= w[0].delta));
    }

    #[test]
    fn bloch_exterior_target() {
        let s = pauli_set();
        assert_eq!(classify(&s, &target(&[0.0, 0.0, 1.5]), &FlowParams::default()).unwrap(), Classification::Exterior);
    }

    #[test]
    fn bloch_boundary_target() {
        let s = pauli_set();
        assert_eq!(classify(&s, &target(&[0.0, 0.6, 0.8]), &FlowParams::default()).unwrap(), Classification::Boundary);
    }

    #[test]
    fn worked_example_verdicts() {
        let s = degenerate_face_pair();
        let p = FlowParams::default();
        assert_eq!(classify(&s, &target(&[0.5, 0.5]), &p).unwrap(), Classification::Interior);
        assert_eq!(classify(&s, &target(&[-1.0, 0.0]), &p).unwrap(), Classification::Boundary);
        assert_eq!(classify(&s, &target(&[0.0, 0.0]), &p).unwrap(), Classification::Interior);
        assert_eq!(classify(&s, &target(&[-1.5, 0.0]), &p).unwrap(), Classification::Exterior);
    }

    #[test]
    fn round_trip_from_forward_map() {
        let s = degenerate_face_pair();
        let star = BetaVector::new(vec![0.7, -1.3]).unwrap();
        let e = expectation_map(&star, &s).unwrap();
        let r = integrate_flow(&s, &e, &BetaVector::zeros(2), &FlowParams::default()).unwrap();
        assert_eq!(r.classification, Classification::Interior);
        let err = norm(&axpy(r.beta_final.as_slice(), 1.0, star.as_slice()));
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn rk4_decay_slope_is_minus_two() {
        let s = degenerate_face_pair();
        let e = expectation_map(&BetaVector::new(vec![0.4, 0.9]).unwrap(), &s).unwrap();
        let r = integrate_flow(&s, &e, &BetaVector::zeros(2), &FlowParams { dt: 0.01, max_steps: 20_000, ..FlowParams::precise() }).unwrap();
        let slope = exponential_decay_check(&r).unwrap();
        assert!((-2.02..=-1.98).contains(&slope), "{slope}");
        assert!(r.strictly_decreasing());
    }

    #[test]
    fn euler_slope_converges_as_dt_shrinks() {
        let s = pauli_set();
        let e = target(&[0.2, -0.1, 0.3]);
        let mut errors = Vec::new();
        for dt in [0.2, 0.05, 0.0125] {
            let r = integrate_flow(&s, &e, &BetaVector::zeros(3), &FlowParams { dt, max_steps: 50_000, ..FlowParams::default() }).unwrap();
            errors.push((exponential_decay_check(&r).unwrap() + 2.0).abs());
        }
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
        assert!(errors[2] < 0.02);
    }

    #[test]
    fn decay_check_needs_samples() {
        let s = pauli_set();
        let r = integrate_flow(&s, &target(&[0.0, 0.0, 0.0]), &BetaVector::zeros(3), &FlowParams::default()).unwrap();
        assert_eq!(r.classification, Classification::Interior);
        assert!(exponential_decay_check(&r).is_err());
    }

    #[test]
    fn invalid_inputs() {
        let s = pauli_set();
        assert!(integrate_flow(&s, &target(&[0.0]), &BetaVector::zeros(3), &FlowParams::default()).is_err());
        let bad = FlowParams { dt: -1.0, ..FlowParams::default() };
        assert!(classify(&s, &target(&[0.0, 0.0, 0.0]), &bad).is_err());
        assert!("simpson".parse::<Integrator>().is_err());
        assert_eq!("RK4".parse::<Integrator>().unwrap(), Integrator::Rk4);
    }
}
