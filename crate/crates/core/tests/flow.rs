mod common;

use common::*;
use expectation_atlas::boundary::{sampled_outer_hull, sphere_directions, support_value};
use expectation_atlas::fixtures::{degenerate_face_pair, pauli_set};
use expectation_atlas::flow::{
    classify, integrate_flow, state_family, Classification, FlowParams, Integrator, Termination,
};
use expectation_atlas::gibbs::{expectation_map, BetaVector, ExpectationVector};
use expectation_atlas::linalg::DensityMatrix;

fn target(v: &[f64]) -> ExpectationVector {
    ExpectationVector::new(v.to_vec()).unwrap()
}

#[test]
fn forward_targets_are_interior_and_reproduced() {
    let set = random_set(7, 4, 200);
    let mut rng = rng(201);
    for _ in 0..15 {
        let star = normal_vec(&mut rng, 4, 1.0);
        let e = expectation_map(&BetaVector::new(star.clone()).unwrap(), &set).unwrap();
        let r = integrate_flow(&set, &e, &BetaVector::zeros(4), &FlowParams::default()).unwrap();
        assert_eq!(r.classification, Classification::Interior);
        assert_eq!(r.termination, Termination::Converged);
        let state = r.state.as_ref().unwrap();
        let achieved = set.expectations(state);
        for (a, b) in achieved.iter().zip(e.as_slice()) {
            assert!((a - b).abs() < 1e-7);
        }
        assert!(r.trajectory.windows(2).all(|w| w[1].delta < w[0].delta || w[1].delta == 0.0));
    }
}

#[test]
fn rk4_and_euler_agree_on_interior_targets() {
    let set = random_set(5, 3, 210);
    let e = expectation_map(&BetaVector::new(vec![0.5, -0.2, 0.9]).unwrap(), &set).unwrap();
    let a = integrate_flow(&set, &e, &BetaVector::zeros(3), &FlowParams::default()).unwrap();
    let b = integrate_flow(&set, &e, &BetaVector::zeros(3), &FlowParams::precise()).unwrap();
    assert_eq!(b.classification, Classification::Interior);
    for (x, y) in a.beta_final.as_slice().iter().zip(b.beta_final.as_slice()) {
        assert!((x - y).abs() < 1e-5);
    }
}

#[test]
fn points_beyond_support_are_exterior() {
    let set = random_set(4, 2, 220);
    for k in 0..12 {
        let theta = std::f64::consts::TAU * k as f64 / 12.0;
        let e = [theta.cos(), theta.sin()];
        let s = support_value(&e, &set).unwrap();
        // `e·x = s - 0.3` violates the half-space `e·x >= s`
        let x = [(s - 0.3) * e[0], (s - 0.3) * e[1]];
        let r = integrate_flow(&set, &target(&x), &BetaVector::zeros(2), &FlowParams::default()).unwrap();
        assert_eq!(r.classification, Classification::Exterior, "θ = {theta}");
        assert!(r.state.is_none());
    }
}

#[test]
fn boundary_points_are_not_interior() {
    let set = random_set(4, 2, 230);
    for k in 0..8 {
        let theta = std::f64::consts::TAU * k as f64 / 8.0 + 0.1;
        let f = expectation_atlas::boundary::face(&[theta.cos(), theta.sin()], &set).unwrap();
        let p = f.point.unwrap();
        let c = classify(&set, &p, &FlowParams::default()).unwrap();
        assert_eq!(c, Classification::Boundary, "θ = {theta}");
    }
}

#[test]
fn degenerate_face_midpoint_is_boundary() {
    let c = classify(&degenerate_face_pair(), &target(&[-1.0, 0.5]), &FlowParams::default()).unwrap();
    assert_eq!(c, Classification::Boundary);
}

#[test]
fn step_budget_gives_inconclusive() {
    let params = FlowParams { max_steps: 2, ..FlowParams::default() };
    let r = integrate_flow(&pauli_set(), &target(&[0.3, 0.3, 0.3]), &BetaVector::zeros(3), &params).unwrap();
    assert_eq!(r.classification, Classification::Inconclusive);
    assert_eq!(r.termination, Termination::MaxSteps);
    assert_eq!(r.attempts, 2);
    assert!(r.state.is_none());
}

#[test]
fn explicit_beta_cap_is_respected() {
    let params = FlowParams { beta_cap: Some(5.0), ..FlowParams::default() };
    let r = integrate_flow(&pauli_set(), &target(&[0.0, 0.0, 1.2]), &BetaVector::zeros(3), &params).unwrap();
    assert_eq!(r.classification, Classification::Exterior);
    assert_eq!(r.termination, Termination::BetaCap);
    assert!(r.beta_final.norm() <= 5.0 + 1e-12);
}

#[test]
fn classification_codes() {
    assert_eq!(Classification::Interior.exit_code(), 0);
    assert_eq!(Classification::Exterior.exit_code(), 2);
    assert_eq!(Classification::Boundary.exit_code(), 3);
    assert_eq!(Classification::Inconclusive.exit_code(), 4);
    assert_eq!(Classification::Interior.is_member(), Some(true));
    assert_eq!(Classification::Boundary.is_member(), Some(true));
    assert_eq!(Classification::Exterior.is_member(), Some(false));
    assert_eq!(Classification::Inconclusive.is_member(), None);
    assert_eq!("euler".parse::<Integrator>().unwrap(), Integrator::Euler);
}

#[test]
fn interior_results_lie_inside_outer_hull() {
    let set = random_set(5, 3, 240);
    let hull = sampled_outer_hull(&set, &sphere_directions(3, 500, 0).unwrap()).unwrap();
    let mut rng = rng(241);
    for _ in 0..10 {
        let e = expectation_map(&BetaVector::new(normal_vec(&mut rng, 3, 1.5)).unwrap(), &set).unwrap();
        assert!(hull.contains(e.as_slice()));
        assert_eq!(classify(&set, &e, &FlowParams::default()).unwrap(), Classification::Interior);
    }
}

#[test]
fn family_members_share_expectations() {
    let set = random_set(3, 2, 250);
    let e = expectation_map(&BetaVector::new(vec![0.4, -0.6]).unwrap(), &set).unwrap();
    let fam = state_family(&set, &e, &FlowParams::default()).unwrap();
    assert_eq!(fam.len(), 9 - 1 - 2);
    let mut rng = rng(251);
    for k in 0..fam.len() {
        let (lo, hi) = fam.intervals[k];
        for _ in 0..5 {
            let u: f64 = rand::Rng::random_range(&mut rng, 0.0..1.0);
            let op = fam.member_along(k, lo + u * (hi - lo));
            assert!((op.trace() - 1.0).abs() < 1e-12);
            let rho = DensityMatrix::from_operator(op).unwrap();
            for (a, b) in set.expectations(&rho).iter().zip(e.as_slice()) {
                assert!((a - b).abs() < 1e-7);
            }
        }
        let past = fam.member_along(k, hi * 1.01 + 1e-9).eigenvalues().unwrap();
        assert!(past[0] < 0.0);
    }
    let zero = vec![0.0; fam.len()];
    let center = fam.member(&zero).unwrap();
    assert!((center.trace() - 1.0).abs() < 1e-12);
    assert!(fam.member(&[1.0]).is_err());
}

#[test]
fn trajectory_image_follows_straight_line() {
    let set = random_set(6, 3, 260);
    let e = expectation_map(&BetaVector::new(vec![1.2, -0.7, 0.4]).unwrap(), &set).unwrap();
    let r = integrate_flow(&set, &e, &BetaVector::zeros(3), &FlowParams::precise()).unwrap();
    let goal = e.as_slice();
    let len2: f64 = goal.iter().map(|v| v * v).sum();
    for s in &r.trajectory {
        // E(β(0)) = 0 for traceless operators, so the path is the segment from 0 to e
        let along = s.expectations.iter().zip(goal).map(|(a, b)| a * b).sum::<f64>() / len2;
        let transverse = s.expectations.iter().zip(goal).map(|(a, b)| (a - along * b).powi(2)).sum::<f64>().sqrt();
        assert!(transverse < 1e-4, "t = {}: {transverse}", s.t);
    }
}

#[test]
fn verdicts_are_scale_covariant() {
    let base = degenerate_face_pair();
    for c in [0.1, 10.0] {
        let scaled = base.scaled(c).unwrap();
        for (t, want) in [
            ([0.5, 0.5], Classification::Interior),
            ([-1.5, 0.0], Classification::Exterior),
            ([-1.0, 0.0], Classification::Boundary),
        ] {
            assert_eq!(classify(&base, &target(&t), &FlowParams::default()).unwrap(), want);
            let got = classify(&scaled, &target(&[c * t[0], c * t[1]]), &FlowParams::default()).unwrap();
            assert_eq!(got, want, "c = {c}, target {t:?}");
        }
    }
}
