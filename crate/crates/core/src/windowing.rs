//! Sliding-window lower-bound estimation of closed tour cost.
//!
//! For a visit order Σ over n targets, the window Σ_{w,i} is the cyclic
//! sub-sequence of w+1 consecutive targets starting at position i. Averaging
//! the n open-subtour costs of these windows and dividing by w estimates the
//! closed tour cost from below: every tour edge appears in exactly w
//! windows, and each window's open cost relaxes the corresponding stretch of
//! any closed solution.

use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;

use crate::dtp::{solve_dtp_refined, SequencedLocations};
use crate::error::{Error, Result};
use crate::types::{is_permutation, Instance, Point};

/// Identifies one window: the w+1 visited target indices in visit order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WindowKey(pub Vec<u32>);

/// Concurrent memo table from window keys to window costs.
///
/// Values are never replaced: providers are deterministic, so concurrent
/// duplicate computations of one key insert the same value and either
/// insertion order is acceptable. Keys are instance-local target indices;
/// the cache must be cleared when the underlying instance changes.
#[derive(Debug, Default)]
pub struct WindowCache {
    map: DashMap<WindowKey, f64>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl WindowCache {
    pub fn new() -> Self {
        WindowCache::default()
    }

    /// (hits, misses) over all lookups since creation or the last clear.
    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    /// Drops all entries and resets the counters.
    pub fn clear(&self) {
        self.map.clear();
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn get(&self, key: &WindowKey) -> Option<f64> {
        match self.map.get(key) {
            Some(v) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                Some(*v)
            }
            None => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    fn insert(&self, key: WindowKey, value: f64) {
        // first writer wins; any concurrent writer computed the same value
        self.map.entry(key).or_insert(value);
    }
}

/// Computes open-subtour costs for batches of windows.
///
/// Implementations must be deterministic and batch-stable: the value
/// returned for a window may depend only on that window's locations, never
/// on the rest of the batch. This keeps cached and uncached evaluation
/// bit-identical.
pub trait WindowCostProvider {
    /// Cost of each window, given the w+1 ordered locations per window.
    fn window_costs(&self, windows: &[Vec<Point>]) -> Result<Vec<f64>>;
}

/// Exact window costs from the refined open solver at a fixed resolution.
#[derive(Clone, Copy, Debug)]
pub struct DtpWindowProvider {
    pub rho: f64,
    pub k_max: usize,
}

impl WindowCostProvider for DtpWindowProvider {
    fn window_costs(&self, windows: &[Vec<Point>]) -> Result<Vec<f64>> {
        windows
            .iter()
            .map(|pts| {
                let seq = SequencedLocations::new(pts.clone(), self.rho)?;
                Ok(solve_dtp_refined(&seq, self.k_max, false)?.cost)
            })
            .collect()
    }
}

/// Windowed estimate of the closed tour cost of `sequence`:
/// (1/w)·Σᵢ cost(Σ_{w,i}) over the n cyclic windows, each window cost
/// memoized in `cache` when one is supplied.
pub fn window_cost_estimate(
    sequence: &[usize],
    instance: &Instance,
    w: usize,
    provider: &dyn WindowCostProvider,
    cache: Option<&WindowCache>,
) -> Result<f64> {
    let n = instance.len();
    if n < 2 {
        return Err(Error::config(format!("need at least 2 targets, got {n}")));
    }
    if w < 1 || w >= n {
        return Err(Error::config(format!(
            "window size must satisfy 1 ≤ w ≤ n-1, got w={w} for n={n}"
        )));
    }
    if !is_permutation(sequence, n) {
        return Err(Error::config("sequence is not a permutation of the instance targets"));
    }

    let window_points = |i: usize| -> Vec<Point> {
        (0..=w).map(|j| instance.targets[sequence[(i + j) % n]]).collect()
    };

    // distinct target values make the n window keys pairwise distinct
    let mut costs: Vec<f64> = Vec::with_capacity(n);
    match cache {
        None => {
            let windows: Vec<Vec<Point>> = (0..n).map(window_points).collect();
            costs = provider.window_costs(&windows)?;
        }
        Some(cache) => {
            let keys: Vec<WindowKey> = (0..n)
                .map(|i| WindowKey((0..=w).map(|j| sequence[(i + j) % n] as u32).collect()))
                .collect();
            let mut slots: Vec<Option<f64>> = Vec::with_capacity(n);
            let mut miss_at: Vec<usize> = Vec::new();
            let mut miss_windows: Vec<Vec<Point>> = Vec::new();
            for (i, key) in keys.iter().enumerate() {
                let cached = cache.get(key);
                if cached.is_none() {
                    miss_at.push(i);
                    miss_windows.push(window_points(i));
                }
                slots.push(cached);
            }
            if !miss_windows.is_empty() {
                let fresh = provider.window_costs(&miss_windows)?;
                for (&i, value) in miss_at.iter().zip(fresh) {
                    cache.insert(keys[i].clone(), value);
                    slots[i] = Some(value);
                }
            }
            costs.extend(slots.into_iter().map(|v| v.expect("all windows resolved")));
        }
    }

    let total: f64 = costs.iter().sum();
    Ok(total / w as f64)
}
