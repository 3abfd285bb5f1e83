//! Learned window-cost regression: dataset generation, training, inference.
//!
//! The regressor maps the raw coordinates of a window's w+1 locations to the
//! open-subtour cost that the refined solver would compute, replacing that
//! solver inside search loops. Training windows are synthesized from i.i.d.
//! standard-normal coordinates and labeled with the exact solver.

mod model;
mod train;

pub use model::{Layer, WismModel};
pub use train::{gradient_check, train, train_with_history, EpochStat, TrainConfig};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dtp::{solve_dtp_refined, SequencedLocations};
use crate::error::{Error, Result};
use crate::types::Point;
use crate::windowing::WindowCostProvider;

/// One labeled training window: 2(w+1) interleaved coordinates
/// (x₀,y₀,…,x_w,y_w) and the open-subtour cost of visiting them in order.
#[derive(Clone, Debug)]
pub struct WindowSample {
    pub coords: Vec<f64>,
    pub target: f64,
}

/// A labeled window corpus plus the parameters that produced it.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub w: usize,
    pub k_max: usize,
    pub seed: u64,
    pub samples: Vec<WindowSample>,
}

impl Dataset {
    pub fn input_dim(&self) -> usize {
        2 * (self.w + 1)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# wism-dataset v1 w={} count={} k_max={} seed={}",
            self.w,
            self.samples.len(),
            self.k_max,
            self.seed
        );
        for s in &self.samples {
            for c in &s.coords {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{}", s.target);
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(format!("{}: empty dataset file", path.display())))?;
        if !header.starts_with("# wism-dataset v1") {
            return Err(Error::format(format!("{}: missing dataset header", path.display())));
        }
        let mut w = None;
        let mut count = None;
        let mut k_max = None;
        let mut seed = None;
        for token in header.split_whitespace() {
            if let Some((key, value)) = token.split_once('=') {
                match key {
                    "w" => w = value.parse::<usize>().ok(),
                    "count" => count = value.parse::<usize>().ok(),
                    "k_max" => k_max = value.parse::<usize>().ok(),
                    "seed" => seed = value.parse::<u64>().ok(),
                    _ => {}
                }
            }
        }
        let (w, count, k_max, seed) = match (w, count, k_max, seed) {
            (Some(w), Some(c), Some(k), Some(s)) => (w, c, k, s),
            _ => {
                return Err(Error::format(format!(
                    "{}: dataset header must carry w, count, k_max, seed",
                    path.display()
                )))
            }
        };
        let width = 2 * (w + 1) + 1;
        let mut samples = Vec::with_capacity(count);
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut values = Vec::with_capacity(width);
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::format(format!(
                        "{}: line {}: bad number {field:?}",
                        path.display(),
                        lineno + 2
                    ))
                })?;
                values.push(v);
            }
            if values.len() != width {
                return Err(Error::format(format!(
                    "{}: line {}: expected {} values, found {}",
                    path.display(),
                    lineno + 2,
                    width,
                    values.len()
                )));
            }
            let target = values.pop().unwrap();
            samples.push(WindowSample { coords: values, target });
        }
        if samples.len() != count {
            return Err(Error::format(format!(
                "{}: header promises {} samples, found {}",
                path.display(),
                count,
                samples.len()
            )));
        }
        Ok(Dataset { w, k_max, seed, samples })
    }
}

/// Synthesizes `count` labeled windows: coordinates i.i.d. standard normal,
/// targets from the refined open solver at resolution `k_max` with unit
/// turning radius. Labeling is parallel over samples; each sample derives
/// its own generator from `seed`, so outputs are thread-count independent.
pub fn generate_dataset(count: usize, w: usize, k_max: usize, seed: u64) -> Result<Dataset> {
    if w < 1 {
        return Err(Error::config("window size must be at least 1"));
    }
    if k_max < 8 || !k_max.is_power_of_two() {
        return Err(Error::config(format!(
            "label resolution must be a power of two ≥ 8, got {k_max}"
        )));
    }
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let sub_seeds: Vec<u64> = (0..count).map(|_| seeder.random()).collect();
    let samples: Result<Vec<WindowSample>> = sub_seeds
        .par_iter()
        .map(|&sub_seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
            let coords: Vec<f64> =
                (0..2 * (w + 1)).map(|_| rng.sample(StandardNormal)).collect();
            let points: Vec<Point> =
                coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
            let seq = SequencedLocations::new(points, 1.0)?;
            let target = solve_dtp_refined(&seq, k_max, false)?.cost;
            Ok(WindowSample { coords, target })
        })
        .collect();
    Ok(Dataset { w, k_max, seed, samples: samples? })
}

/// Window-cost provider backed by a trained model.
///
/// Each window is predicted with an independent single-row forward pass, so
/// a window's value never depends on the batch it arrived in; see
/// [`WindowCostProvider`] for why that matters.
#[derive(Clone, Copy, Debug)]
pub struct WismWindowProvider<'a> {
    pub model: &'a WismModel,
}

impl WindowCostProvider for WismWindowProvider<'_> {
    fn window_costs(&self, windows: &[Vec<Point>]) -> Result<Vec<f64>> {
        let mut coords = Vec::with_capacity(self.model.input_dim());
        windows
            .iter()
            .map(|pts| {
                coords.clear();
                for p in pts {
                    coords.push(p.x);
                    coords.push(p.y);
                }
                self.model.predict_window(&coords)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_targets_dominate_euclidean_chains() {
        let ds = generate_dataset(40, 3, 32, 7).unwrap();
        assert_eq!(ds.samples.len(), 40);
        for s in &ds.samples {
            let pts: Vec<Point> =
                s.coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
            let chain: f64 = pts.windows(2).map(|p| p[0].distance(p[1])).sum();
            let max_edge = pts
                .windows(2)
                .map(|p| p[0].distance(p[1]))
                .fold(0.0f64, f64::max);
            assert!(s.target >= max_edge - 1e-9);
            assert!(s.target >= chain * 0.5);
            assert!(s.target.is_finite() && s.target > 0.0);
        }
    }

    #[test]
    fn dataset_generation_is_seed_deterministic() {
        let a = generate_dataset(10, 2, 16, 99).unwrap();
        let b = generate_dataset(10, 2, 16, 99).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.coords, y.coords);
            assert_eq!(x.target.to_bits(), y.target.to_bits());
        }
        let c = generate_dataset(10, 2, 16, 100).unwrap();
        assert!(a.samples[0].coords != c.samples[0].coords);
    }

    #[test]
    fn empty_dataset_is_allowed() {
        let ds = generate_dataset(0, 3, 16, 1).unwrap();
        assert!(ds.samples.is_empty());
    }

    #[test]
    fn dataset_round_trip() {
        let dir = std::env::temp_dir().join("wism-dataset-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dataset.csv");
        let ds = generate_dataset(12, 3, 16, 5).unwrap();
        ds.save(&path).unwrap();
        let back = Dataset::load(&path).unwrap();
        assert_eq!(back.w, ds.w);
        assert_eq!(back.k_max, ds.k_max);
        assert_eq!(back.seed, ds.seed);
        assert_eq!(back.samples.len(), ds.samples.len());
        for (a, b) in ds.samples.iter().zip(&back.samples) {
            assert_eq!(a.coords, b.coords);
            assert_eq!(a.target.to_bits(), b.target.to_bits());
        }
    }

    #[test]
    fn truncated_dataset_is_rejected() {
        let dir = std::env::temp_dir().join("wism-dataset-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("truncated.csv");
        let ds = generate_dataset(5, 1, 16, 5).unwrap();
        ds.save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(4).collect();
        fs::write(&path, truncated.join("\n")).unwrap();
        assert!(Dataset::load(&path).is_err());
    }
}
