//! Closed-form shortest bounded-curvature maneuvers between oriented poses.
//!
//! A vehicle moving forward at unit speed with minimum turning radius `rho`
//! admits a shortest path between any two poses that is one of six maneuver
//! families: four turn-straight-turn types (LSL, RSR, LSR, RSL) and two
//! triple-turn types (RLR, LRL). Each family has a closed form; the shortest
//! path is the feasible minimum over all six.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Wraps an angle into [0, 2π).
#[inline]
pub fn mod2pi(theta: f64) -> f64 {
    let mut r = theta % TAU;
    if r < 0.0 {
        r += TAU;
    }
    // rounding after the negative branch can land exactly on 2π
    if r >= TAU {
        r = 0.0;
    }
    r
}

/// Smallest absolute difference between two angles on the circle.
#[inline]
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = mod2pi(a - b);
    d.min(TAU - d)
}

/// An oriented state (x, y, θ) with θ normalized to [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta: mod2pi(theta) }
    }

    pub fn position_distance(&self, other: Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One motion primitive of a maneuver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Left,
    Straight,
    Right,
}

/// The six maneuver families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathKind {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl PathKind {
    pub const ALL: [PathKind; 6] =
        [PathKind::Lsl, PathKind::Rsr, PathKind::Lsr, PathKind::Rsl, PathKind::Rlr, PathKind::Lrl];

    pub fn segments(self) -> [Segment; 3] {
        use Segment::*;
        match self {
            PathKind::Lsl => [Left, Straight, Left],
            PathKind::Rsr => [Right, Straight, Right],
            PathKind::Lsr => [Left, Straight, Right],
            PathKind::Rsl => [Right, Straight, Left],
            PathKind::Rlr => [Right, Left, Right],
            PathKind::Lrl => [Left, Right, Left],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PathKind::Lsl => "LSL",
            PathKind::Rsr => "RSR",
            PathKind::Lsr => "LSR",
            PathKind::Rsl => "RSL",
            PathKind::Rlr => "RLR",
            PathKind::Lrl => "LRL",
        }
    }
}

/// A fully determined maneuver.
///
/// `params` holds the three segment magnitudes: turn segments in radians,
/// the straight segment in world length units. The total length is
/// `rho·t₁ + s + rho·t₃` for turn-straight-turn kinds and
/// `rho·(t₁ + t₂ + t₃)` for triple-turn kinds.
#[derive(Clone, Copy, Debug)]
pub struct DubinsPath {
    pub kind: PathKind,
    pub params: [f64; 3],
    pub rho: f64,
    pub length: f64,
}

impl DubinsPath {
    /// World-unit length of segment `i`.
    pub fn segment_length(&self, i: usize) -> f64 {
        match self.kind.segments()[i] {
            Segment::Straight => self.params[i],
            Segment::Left | Segment::Right => self.rho * self.params[i],
        }
    }
}

/// Normalized precomputation shared by all six closed forms.
///
/// Positions are scaled by 1/rho and rotated so the start-to-goal direction
/// is the x axis; `alpha` and `beta` are the start and goal headings in that
/// frame, `d` the normalized distance.
struct Normalized {
    alpha: f64,
    beta: f64,
    d: f64,
    sa: f64,
    sb: f64,
    ca: f64,
    cb: f64,
    c_ab: f64,
    d_sq: f64,
}

impl Normalized {
    fn new(from: Pose, to: Pose, rho: f64) -> Self {
        let dx = to.x - from.x;
        let dy = to.y - from.y;
        let d = dx.hypot(dy) / rho;
        let theta = mod2pi(dy.atan2(dx));
        let alpha = mod2pi(from.theta - theta);
        let beta = mod2pi(to.theta - theta);
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = beta.sin_cos();
        Normalized { alpha, beta, d, sa, sb, ca, cb, c_ab: (alpha - beta).cos(), d_sq: d * d }
    }

    /// Segment magnitudes in normalized units (straight length divided by
    /// rho), or `None` when the family is infeasible for these poses.
    fn params(&self, kind: PathKind) -> Option<[f64; 3]> {
        match kind {
            PathKind::Lsl => {
                let p_sq = 2.0 * self.d * (self.sa - self.sb) + 2.0 + self.d_sq - 2.0 * self.c_ab;
                if p_sq < 0.0 {
                    return None;
                }
                let tmp = f64::atan2(self.cb - self.ca, self.d + self.sa - self.sb);
                Some([mod2pi(tmp - self.alpha), p_sq.sqrt(), mod2pi(self.beta - tmp)])
            }
            PathKind::Rsr => {
                let p_sq = 2.0 * self.d * (self.sb - self.sa) + 2.0 + self.d_sq - 2.0 * self.c_ab;
                if p_sq < 0.0 {
                    return None;
                }
                let tmp = f64::atan2(self.ca - self.cb, self.d - self.sa + self.sb);
                Some([mod2pi(self.alpha - tmp), p_sq.sqrt(), mod2pi(tmp - self.beta)])
            }
            PathKind::Lsr => {
                let p_sq = 2.0 * self.d * (self.sa + self.sb) + 2.0 * self.c_ab - 2.0 + self.d_sq;
                if p_sq < 0.0 {
                    return None;
                }
                let p = p_sq.sqrt();
                let tmp = f64::atan2(-self.ca - self.cb, self.d + self.sa + self.sb)
                    - f64::atan2(-2.0, p);
                Some([mod2pi(tmp - self.alpha), p, mod2pi(tmp - mod2pi(self.beta))])
            }
            PathKind::Rsl => {
                let p_sq = 2.0 * self.c_ab - 2.0 + self.d_sq - 2.0 * self.d * (self.sa + self.sb);
                if p_sq < 0.0 {
                    return None;
                }
                let p = p_sq.sqrt();
                let tmp = f64::atan2(self.ca + self.cb, self.d - self.sa - self.sb)
                    - f64::atan2(2.0, p);
                Some([mod2pi(self.alpha - tmp), p, mod2pi(self.beta - tmp)])
            }
            PathKind::Rlr => {
                let tmp =
                    (2.0 * self.d * (self.sa - self.sb) + 2.0 * self.c_ab + 6.0 - self.d_sq) / 8.0;
                if tmp.abs() > 1.0 {
                    return None;
                }
                let p = mod2pi(TAU - tmp.acos());
                let phi = f64::atan2(self.ca - self.cb, self.d - self.sa + self.sb);
                let t = mod2pi(self.alpha - phi + mod2pi(p / 2.0));
                Some([t, p, mod2pi(self.alpha - self.beta - t + mod2pi(p))])
            }
            PathKind::Lrl => {
                let tmp =
                    (2.0 * self.d * (self.sb - self.sa) + 2.0 * self.c_ab + 6.0 - self.d_sq) / 8.0;
                if tmp.abs() > 1.0 {
                    return None;
                }
                let p = mod2pi(TAU - tmp.acos());
                let phi = f64::atan2(self.ca - self.cb, self.d + self.sa - self.sb);
                let t = mod2pi(-self.alpha - phi + p / 2.0);
                Some([t, p, mod2pi(mod2pi(self.beta) - self.alpha - t + mod2pi(p))])
            }
        }
    }
}

/// True when two poses coincide in position and heading to within 1e-12.
#[inline]
fn is_degenerate_pair(from: Pose, to: Pose) -> bool {
    from.position_distance(to) < 1e-12 && angular_distance(from.theta, to.theta) < 1e-12
}

fn validate_pair(from: Pose, to: Pose, rho: f64) -> Result<()> {
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::config(format!("turning radius must be positive and finite, got {rho}")));
    }
    for p in [from, to] {
        if !(p.x.is_finite() && p.y.is_finite() && p.theta.is_finite()) {
            return Err(Error::config("poses must be finite"));
        }
    }
    Ok(())
}

/// Shortest maneuver from `from` to `to` with turning radius `rho`.
///
/// Evaluates all six family closed forms, skips infeasible ones, and returns
/// the minimum-length candidate. Identical poses yield a zero-length path.
pub fn dubins_shortest_path(from: Pose, to: Pose, rho: f64) -> Result<DubinsPath> {
    validate_pair(from, to, rho)?;
    if is_degenerate_pair(from, to) {
        return Ok(DubinsPath { kind: PathKind::Lsl, params: [0.0; 3], rho, length: 0.0 });
    }
    let norm = Normalized::new(from, to, rho);
    let mut best: Option<(PathKind, [f64; 3], f64)> = None;
    for kind in PathKind::ALL {
        if let Some(params) = norm.params(kind) {
            let total = params[0] + params[1] + params[2];
            if best.is_none_or(|(_, _, t)| total < t) {
                best = Some((kind, params, total));
            }
        }
    }
    // LSL and RSR are feasible for every finite input, so this cannot fail
    // unless the closed forms produced NaN.
    let (kind, mut params, total) = best
        .ok_or_else(|| Error::numeric("no feasible maneuver family; inputs out of domain"))?;
    if kind.segments()[1] == Segment::Straight {
        params[1] *= rho;
    }
    Ok(DubinsPath { kind, params, rho, length: total * rho })
}

/// Length of the shortest maneuver between two poses.
pub fn dubins_length(from: Pose, to: Pose, rho: f64) -> f64 {
    match dubins_shortest_path(from, to, rho) {
        Ok(path) => path.length,
        Err(_) => f64::NAN,
    }
}

/// Advances `pose` along one segment: turns take an arc angle in radians,
/// straights a world-unit length.
fn advance(pose: Pose, segment: Segment, amount: f64, rho: f64) -> Pose {
    match segment {
        Segment::Left => {
            let theta = pose.theta + amount;
            Pose::new(
                pose.x + rho * (theta.sin() - pose.theta.sin()),
                pose.y - rho * (theta.cos() - pose.theta.cos()),
                theta,
            )
        }
        Segment::Right => {
            let theta = pose.theta - amount;
            Pose::new(
                pose.x - rho * (theta.sin() - pose.theta.sin()),
                pose.y + rho * (theta.cos() - pose.theta.cos()),
                theta,
            )
        }
        Segment::Straight => {
            Pose::new(pose.x + amount * pose.theta.cos(), pose.y + amount * pose.theta.sin(), pose.theta)
        }
    }
}

/// Pose reached after following the whole maneuver from `start`.
pub fn path_endpoint(path: &DubinsPath, start: Pose) -> Pose {
    let segments = path.kind.segments();
    let mut pose = start;
    for (seg, &param) in segments.iter().zip(&path.params) {
        pose = advance(pose, *seg, param, path.rho);
    }
    pose
}

/// Pose at arc length `s` from `start` along the maneuver.
pub fn path_pose_at(path: &DubinsPath, start: Pose, s: f64) -> Pose {
    let segments = path.kind.segments();
    let mut pose = start;
    let mut remaining = s.max(0.0);
    for (i, &seg) in segments.iter().enumerate() {
        let seg_len = path.segment_length(i);
        if remaining <= seg_len {
            let amount = match seg {
                Segment::Straight => remaining,
                _ => remaining / path.rho,
            };
            return advance(pose, seg, amount, path.rho);
        }
        pose = advance(pose, seg, path.params[i], path.rho);
        remaining -= seg_len;
    }
    pose
}

/// Poses along the maneuver at arc-length intervals of at most `step`,
/// starting at `start` and ending at the analytic endpoint.
pub fn sample_path(path: &DubinsPath, start: Pose, step: f64) -> Result<Vec<Pose>> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::config(format!("sample step must be positive, got {step}")));
    }
    if path.length <= 0.0 {
        return Ok(vec![start]);
    }
    let intervals = (path.length / step).ceil().max(1.0) as usize;
    let ds = path.length / intervals as f64;
    let mut poses = Vec::with_capacity(intervals + 1);
    poses.push(start);
    for j in 1..intervals {
        poses.push(path_pose_at(path, start, j as f64 * ds));
    }
    poses.push(path_endpoint(path, start));
    Ok(poses)
}
