//! Validates the closed-form shortest-maneuver solver against an
//! independently derived tangent-circle construction and against numeric
//! integration of the turn-rate-limited kinematics.
//!
//! The oracle shares no code with the library: it builds each candidate
//! maneuver from first principles (tangent lines and tangent circles
//! between the start and goal turning circles) and takes the minimum over
//! every geometrically valid candidate.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use wism::dubins::{dubins_shortest_path, path_endpoint, Pose, Segment};

fn norm(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Center of the circle traced by a maximal left turn from `p`.
fn left_center(p: Pose, rho: f64) -> (f64, f64) {
    (p.x - rho * p.theta.sin(), p.y + rho * p.theta.cos())
}

/// Center of the circle traced by a maximal right turn from `p`.
fn right_center(p: Pose, rho: f64) -> (f64, f64) {
    (p.x + rho * p.theta.sin(), p.y - rho * p.theta.cos())
}

fn hypot2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.0 - a.0).hypot(b.1 - a.1)
}

/// Lengths of the two straight-tangent families that keep the turn
/// direction equal on both ends (LSL, RSR). Always feasible.
///
/// The tangent heading equals the center-to-center direction, so the arc
/// angles fall out of the heading differences directly.
fn csc_same(from: Pose, to: Pose, rho: f64, left: bool) -> f64 {
    let (c1, c2) = if left {
        (left_center(from, rho), left_center(to, rho))
    } else {
        (right_center(from, rho), right_center(to, rho))
    };
    let s = hypot2(c1, c2);
    let psi = (c2.1 - c1.1).atan2(c2.0 - c1.0);
    let (t, q) = if left {
        (norm(psi - from.theta), norm(to.theta - psi))
    } else {
        (norm(from.theta - psi), norm(psi - to.theta))
    };
    rho * (t + q) + s
}

/// Lengths of the two cross-tangent families (LSR, RSL), or infinity when
/// the turning circles are too close for the inner tangent to exist.
///
/// Decomposing the center offset along the tangent direction u and its
/// -90° normal n gives c2-c1 = s·u + 2ρ·n for LSR and s·u - 2ρ·n for RSL,
/// which pins the tangent heading to δ ± atan2(2ρ, s).
fn csc_cross(from: Pose, to: Pose, rho: f64, start_left: bool) -> f64 {
    let (c1, c2) = if start_left {
        (left_center(from, rho), right_center(to, rho))
    } else {
        (right_center(from, rho), left_center(to, rho))
    };
    let d = hypot2(c1, c2);
    if d < 2.0 * rho {
        return f64::INFINITY;
    }
    let s = (d * d - 4.0 * rho * rho).max(0.0).sqrt();
    let delta = (c2.1 - c1.1).atan2(c2.0 - c1.0);
    let offset = (2.0 * rho).atan2(s);
    let (t, q) = if start_left {
        let phi = delta + offset;
        (norm(phi - from.theta), norm(phi - to.theta))
    } else {
        let phi = delta - offset;
        (norm(from.theta - phi), norm(to.theta - phi))
    };
    rho * (t + q) + s
}

/// Lengths of the triple-turn families (RLR, LRL) over both placements of
/// the middle circle, or infinity when the end circles are too far apart.
///
/// The middle circle sits at distance 2ρ from both end circles; tangent
/// points are the segment midpoints, and headings follow from the radial
/// directions at those points.
fn ccc(from: Pose, to: Pose, rho: f64, middle_left: bool) -> f64 {
    let (c1, c2) = if middle_left {
        (right_center(from, rho), right_center(to, rho))
    } else {
        (left_center(from, rho), left_center(to, rho))
    };
    let d = hypot2(c1, c2);
    if d > 4.0 * rho || d == 0.0 {
        return f64::INFINITY;
    }
    let delta = (c2.1 - c1.1).atan2(c2.0 - c1.0);
    let gamma = (d / (4.0 * rho)).clamp(-1.0, 1.0).acos();
    let mut best = f64::INFINITY;
    for side in [-1.0, 1.0] {
        let ang = delta + side * gamma;
        let c3 = (c1.0 + 2.0 * rho * ang.cos(), c1.1 + 2.0 * rho * ang.sin());
        let p1 = ((c1.0 + c3.0) / 2.0, (c1.1 + c3.1) / 2.0);
        let p2 = ((c2.0 + c3.0) / 2.0, (c2.1 + c3.1) / 2.0);
        let (t, p, q) = if middle_left {
            // right-left-right: radial direction on a right circle at
            // heading φ is (-sin φ, cos φ); on a left circle (sin φ, -cos φ).
            let u = ((p1.0 - c1.0) / rho, (p1.1 - c1.1) / rho);
            let phi1 = (-u.0).atan2(u.1);
            let v = ((p2.0 - c3.0) / rho, (p2.1 - c3.1) / rho);
            let phi2 = (v.0).atan2(-v.1);
            (norm(from.theta - phi1), norm(phi2 - phi1), norm(phi2 - to.theta))
        } else {
            let u = ((p1.0 - c1.0) / rho, (p1.1 - c1.1) / rho);
            let phi1 = (u.0).atan2(-u.1);
            let v = ((p2.0 - c3.0) / rho, (p2.1 - c3.1) / rho);
            let phi2 = (-v.0).atan2(v.1);
            (norm(phi1 - from.theta), norm(phi1 - phi2), norm(to.theta - phi2))
        };
        best = best.min(rho * (t + p + q));
    }
    best
}

/// Minimum length over every valid tangent construction.
fn oracle_shortest(from: Pose, to: Pose, rho: f64) -> f64 {
    [
        csc_same(from, to, rho, true),
        csc_same(from, to, rho, false),
        csc_cross(from, to, rho, true),
        csc_cross(from, to, rho, false),
        ccc(from, to, rho, true),
        ccc(from, to, rho, false),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

fn random_pose(rng: &mut ChaCha8Rng, span: f64) -> Pose {
    Pose::new(
        rng.random_range(-span..span),
        rng.random_range(-span..span),
        rng.random_range(0.0..TAU),
    )
}

#[test]
fn solver_matches_tangent_circle_oracle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0b1);
    for case in 0..1000 {
        let rho = [0.5, 1.0, 2.0][case % 3];
        let from = random_pose(&mut rng, 5.0);
        let to = random_pose(&mut rng, 5.0);
        let lib = dubins_shortest_path(from, to, rho).unwrap();
        let oracle = oracle_shortest(from, to, rho);
        assert!(
            (lib.length - oracle).abs() <= 1e-6,
            "case {case}: solver {} vs oracle {oracle} for {from:?} -> {to:?} rho {rho}",
            lib.length,
        );
    }
}

#[test]
fn solver_handles_axis_aligned_and_antipodal_poses() {
    // Headings and displacements on the axes exercise each family's
    // boundary angles (atan2 at 0, ±π/2, π).
    let mut cases = Vec::new();
    for &dx in &[-3.0, 0.0, 3.0] {
        for &dy in &[-3.0, 0.0, 3.0] {
            for &t0 in &[0.0, PI / 2.0, PI, 3.0 * PI / 2.0] {
                for &t1 in &[0.0, PI / 2.0, PI, 3.0 * PI / 2.0] {
                    cases.push((Pose::new(0.0, 0.0, t0), Pose::new(dx, dy, t1)));
                }
            }
        }
    }
    for (from, to) in cases {
        if from.position_distance(to) < 1e-12 && (from.theta - to.theta).abs() < 1e-12 {
            continue;
        }
        let lib = dubins_shortest_path(from, to, 1.0).unwrap();
        let oracle = oracle_shortest(from, to, 1.0);
        assert!(
            lib.length - oracle <= 1e-6,
            "solver above oracle: {} vs {oracle} for {from:?} -> {to:?}",
            lib.length,
        );
        assert!(
            oracle - lib.length <= 1e-6,
            "solver below oracle: {} vs {oracle} for {from:?} -> {to:?}",
            lib.length,
        );
    }
}

/// One fourth-order integration step of the constant-turn-rate kinematics
/// (x' = cos θ, y' = sin θ, θ' = ω).
fn rk4_step(state: (f64, f64, f64), omega: f64, h: f64) -> (f64, f64, f64) {
    let f = |th: f64| (th.cos(), th.sin(), omega);
    let (x, y, th) = state;
    let k1 = f(th);
    let k2 = f(th + 0.5 * h * k1.2);
    let k3 = f(th + 0.5 * h * k2.2);
    let k4 = f(th + h * k3.2);
    (
        x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        th + h / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
    )
}

#[test]
fn integrating_the_returned_controls_reproduces_the_goal_pose() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e65);
    for case in 0..200 {
        let rho = [0.7, 1.0, 1.6][case % 3];
        let from = random_pose(&mut rng, 4.0);
        let to = random_pose(&mut rng, 4.0);
        let path = dubins_shortest_path(from, to, rho).unwrap();

        let mut state = (from.x, from.y, from.theta);
        for (i, seg) in path.kind.segments().iter().enumerate() {
            let (omega, len) = match seg {
                Segment::Left => (1.0 / rho, path.params[i] * rho),
                Segment::Right => (-1.0 / rho, path.params[i] * rho),
                Segment::Straight => (0.0, path.params[i]),
            };
            let steps = (len / 1e-3).ceil().max(1.0) as usize;
            let h = len / steps as f64;
            for _ in 0..steps {
                state = rk4_step(state, omega, h);
            }
        }
        let pos_err = (state.0 - to.x).hypot(state.1 - to.y);
        let ang_err = {
            let d = norm(state.2 - to.theta);
            d.min(TAU - d)
        };
        assert!(
            pos_err <= 1e-6 && ang_err <= 1e-6,
            "case {case}: integrated endpoint off by ({pos_err}, {ang_err}) \
             for {from:?} -> {to:?} rho {rho} kind {}",
            path.kind.name(),
        );

        // the library's own endpoint must agree with the integrator
        let end = path_endpoint(&path, from);
        assert!((end.x - state.0).hypot(end.y - state.1) <= 1e-6);
    }
}
