//! Shared value types: planar points, problem instances, and realized tours.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dubins::{dubins_length, Pose};
use crate::error::{Error, Result};

/// A planar target location.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A problem instance: targets to visit with a minimum turning radius.
#[derive(Clone, Debug)]
pub struct Instance {
    pub targets: Vec<Point>,
    pub rho: f64,
}

impl Instance {
    pub fn new(targets: Vec<Point>, rho: f64) -> Result<Self> {
        if rho <= 0.0 || !rho.is_finite() {
            return Err(Error::config(format!("turning radius must be positive and finite, got {rho}")));
        }
        if targets.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::config("target coordinates must be finite"));
        }
        Ok(Instance { targets, rho })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Pose of target `index` under heading `theta`.
    pub fn pose(&self, index: usize, theta: f64) -> Pose {
        let p = self.targets[index];
        Pose::new(p.x, p.y, theta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.targets.len(), self.rho);
        for p in &self.targets {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = data_lines(&text);
        let header = lines
            .next()
            .ok_or_else(|| Error::format(format!("{}: empty instance file", path.display())))?;
        let mut fields = header.split_whitespace();
        let n: usize = parse_field(fields.next(), path, "target count")?;
        let rho: f64 = parse_field(fields.next(), path, "turning radius")?;
        let mut targets = Vec::with_capacity(n);
        for line in lines {
            let mut fields = line.split_whitespace();
            let x: f64 = parse_field(fields.next(), path, "x coordinate")?;
            let y: f64 = parse_field(fields.next(), path, "y coordinate")?;
            targets.push(Point::new(x, y));
        }
        if targets.len() != n {
            return Err(Error::format(format!(
                "{}: header promises {} targets, found {}",
                path.display(),
                n,
                targets.len()
            )));
        }
        Instance::new(targets, rho)
    }
}

/// A realized tour: visit order, one heading per visited target, and cost.
///
/// `headings[j]` is the heading at target `sequence[j]`; for closed tours the
/// cost includes the maneuver returning to `sequence[0]`.
#[derive(Clone, Debug)]
pub struct Tour {
    pub sequence: Vec<usize>,
    pub headings: Vec<f64>,
    pub cost: f64,
}

impl Tour {
    /// Re-derives the closed tour cost from the stored headings.
    pub fn recompute_cost(&self, instance: &Instance) -> f64 {
        let n = self.sequence.len();
        let mut total = 0.0;
        for j in 0..n {
            let a = instance.pose(self.sequence[j], self.headings[j]);
            let b = instance.pose(self.sequence[(j + 1) % n], self.headings[(j + 1) % n]);
            total += dubins_length(a, b, instance.rho);
        }
        total
    }

    pub fn save(&self, instance: &Instance, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.sequence.len(), instance.rho, self.cost);
        for (j, &idx) in self.sequence.iter().enumerate() {
            let p = instance.targets[idx];
            let _ = writeln!(out, "{} {} {} {}", idx, p.x, p.y, self.headings[j]);
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Reads a tour file back as (tour, rho, visited points in tour order).
    pub fn load(path: &Path) -> Result<(Tour, f64, Vec<Point>)> {
        let text = fs::read_to_string(path)?;
        let mut lines = data_lines(&text);
        let header = lines
            .next()
            .ok_or_else(|| Error::format(format!("{}: empty tour file", path.display())))?;
        let mut fields = header.split_whitespace();
        let n: usize = parse_field(fields.next(), path, "tour length")?;
        let rho: f64 = parse_field(fields.next(), path, "turning radius")?;
        let cost: f64 = parse_field(fields.next(), path, "tour cost")?;
        let mut sequence = Vec::with_capacity(n);
        let mut headings = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        for line in lines {
            let mut fields = line.split_whitespace();
            let idx: usize = parse_field(fields.next(), path, "target index")?;
            let x: f64 = parse_field(fields.next(), path, "x coordinate")?;
            let y: f64 = parse_field(fields.next(), path, "y coordinate")?;
            let theta: f64 = parse_field(fields.next(), path, "heading")?;
            sequence.push(idx);
            headings.push(theta);
            points.push(Point::new(x, y));
        }
        if sequence.len() != n {
            return Err(Error::format(format!(
                "{}: header promises {} rows, found {}",
                path.display(),
                n,
                sequence.len()
            )));
        }
        Ok((Tour { sequence, headings, cost }, rho, points))
    }
}

/// Reads a visiting order from a text file of whitespace-separated indices.
pub fn load_sequence(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut seq = Vec::new();
    for line in data_lines(&text) {
        for field in line.split_whitespace() {
            let idx: usize = field
                .parse()
                .map_err(|_| Error::format(format!("{}: bad index {field:?}", path.display())))?;
            seq.push(idx);
        }
    }
    Ok(seq)
}

/// True iff `seq` is a permutation of 0..n.
pub fn is_permutation(seq: &[usize], n: usize) -> bool {
    if seq.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &i in seq {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, path: &Path, what: &str) -> Result<T> {
    let field = field
        .ok_or_else(|| Error::format(format!("{}: missing {what}", path.display())))?;
    field
        .parse()
        .map_err(|_| Error::format(format!("{}: bad {what} {field:?}", path.display())))
}
