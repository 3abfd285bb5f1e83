//! C ABI over the core library: Dubins distances, heading optimization,
//! model inference, and the window-cost estimator.
//!
//! Conventions: every fallible function returns a [`wism_status`] and
//! writes results through out pointers; `wism_last_error_message` describes
//! the most recent failure on the calling thread. Handles returned by
//! `*_new`/`*_load` functions are owned by the caller and released with the
//! matching `*_free`. All functions catch panics and report them as
//! `WISM_PANIC` instead of unwinding across the boundary.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use wism::dtp::{solve_dtp_refined, SequencedLocations};
use wism::dubins::{dubins_shortest_path, PathKind, Pose};
use wism::surrogate::{WismModel, WismWindowProvider};
use wism::types::{Instance, Point};
use wism::windowing::{window_cost_estimate, DtpWindowProvider, WindowCache};
use wism::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum wism_status {
    WISM_OK = 0,
    /// A parameter violated a documented precondition.
    WISM_INVALID_ARGUMENT = 1,
    WISM_IO_ERROR = 2,
    /// A file exists but its contents are malformed.
    WISM_FORMAT_ERROR = 3,
    /// A computation failed to produce a finite result.
    WISM_NUMERIC_ERROR = 4,
    /// An internal invariant broke; the library state is still usable.
    WISM_PANIC = 5,
}

/// Maneuver family of a shortest path.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum wism_path_kind {
    WISM_LSL = 0,
    WISM_RSR = 1,
    WISM_LSR = 2,
    WISM_RSL = 3,
    WISM_RLR = 4,
    WISM_LRL = 5,
}

/// A shortest maneuver between two oriented poses.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct wism_path {
    pub kind: wism_path_kind,
    /// Turn angles in radians, straight length in world units.
    pub params: [f64; 3],
    pub rho: f64,
    pub length: f64,
}

/// Opaque handle to a loaded window-cost model.
pub struct wism_model(WismModel);

/// Opaque handle to a window-cost memo table.
pub struct wism_cache(WindowCache);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_of(error: &Error) -> wism_status {
    match error {
        Error::Config(_) => wism_status::WISM_INVALID_ARGUMENT,
        Error::Io(_) => wism_status::WISM_IO_ERROR,
        Error::Format(_) => wism_status::WISM_FORMAT_ERROR,
        Error::Numeric(_) => wism_status::WISM_NUMERIC_ERROR,
    }
}

/// Runs a fallible body, converting errors and panics into statuses.
fn guard(body: impl FnOnce() -> Result<(), Error>) -> wism_status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => wism_status::WISM_OK,
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            wism_status::WISM_PANIC
        }
    }
}

fn invalid(message: &str) -> Error {
    Error::config(message)
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wism_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn gather_points(
    xs: *const f64,
    ys: *const f64,
    n: usize,
) -> Result<Vec<Point>, Error> {
    if xs.is_null() || ys.is_null() {
        return Err(invalid("coordinate arrays must not be null"));
    }
    let xs = std::slice::from_raw_parts(xs, n);
    let ys = std::slice::from_raw_parts(ys, n);
    Ok(xs.iter().zip(ys).map(|(&x, &y)| Point::new(x, y)).collect())
}

/// Length of the shortest curvature-bounded path between two poses.
///
/// # Safety
/// `out_length` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn wism_dubins_length(
    x0: f64,
    y0: f64,
    theta0: f64,
    x1: f64,
    y1: f64,
    theta1: f64,
    rho: f64,
    out_length: *mut f64,
) -> wism_status {
    guard(|| {
        if out_length.is_null() {
            return Err(invalid("out_length must not be null"));
        }
        let path =
            dubins_shortest_path(Pose::new(x0, y0, theta0), Pose::new(x1, y1, theta1), rho)?;
        *out_length = path.length;
        Ok(())
    })
}

/// Shortest curvature-bounded path between two poses.
///
/// # Safety
/// `out_path` must point to a writable `wism_path`.
#[no_mangle]
pub unsafe extern "C" fn wism_dubins_shortest_path(
    x0: f64,
    y0: f64,
    theta0: f64,
    x1: f64,
    y1: f64,
    theta1: f64,
    rho: f64,
    out_path: *mut wism_path,
) -> wism_status {
    guard(|| {
        if out_path.is_null() {
            return Err(invalid("out_path must not be null"));
        }
        let path =
            dubins_shortest_path(Pose::new(x0, y0, theta0), Pose::new(x1, y1, theta1), rho)?;
        let kind = match path.kind {
            PathKind::Lsl => wism_path_kind::WISM_LSL,
            PathKind::Rsr => wism_path_kind::WISM_RSR,
            PathKind::Lsr => wism_path_kind::WISM_LSR,
            PathKind::Rsl => wism_path_kind::WISM_RSL,
            PathKind::Rlr => wism_path_kind::WISM_RLR,
            PathKind::Lrl => wism_path_kind::WISM_LRL,
        };
        *out_path =
            wism_path { kind, params: path.params, rho: path.rho, length: path.length };
        Ok(())
    })
}

/// Optimizes headings for visiting `n` locations in the given order.
/// Writes the tour cost to `out_cost` and, when `out_headings` is non-null,
/// one heading per location (radians) into it.
///
/// # Safety
/// `xs`, `ys` must hold `n` doubles; `out_headings`, if non-null, must hold
/// space for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn wism_dtp_solve(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    rho: f64,
    k_max: usize,
    closed: bool,
    out_cost: *mut f64,
    out_headings: *mut f64,
) -> wism_status {
    guard(|| {
        if out_cost.is_null() {
            return Err(invalid("out_cost must not be null"));
        }
        let points = gather_points(xs, ys, n)?;
        let seq = SequencedLocations::new(points, rho)?;
        let solution = solve_dtp_refined(&seq, k_max, closed)?;
        *out_cost = solution.cost;
        if !out_headings.is_null() {
            let out = std::slice::from_raw_parts_mut(out_headings, n);
            out.copy_from_slice(&solution.headings);
        }
        Ok(())
    })
}

/// Loads a model file and hands ownership to the caller.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wism_model_load(
    path: *const c_char,
    out_model: *mut *mut wism_model,
) -> wism_status {
    guard(|| {
        if path.is_null() || out_model.is_null() {
            return Err(invalid("path and out_model must not be null"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not valid UTF-8"))?;
        let model = WismModel::load(Path::new(path))?;
        *out_model = Box::into_raw(Box::new(wism_model(model)));
        Ok(())
    })
}

/// Releases a model handle. A null handle is ignored.
///
/// # Safety
/// `model` must have come from `wism_model_load` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn wism_model_free(model: *mut wism_model) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Window size the model was trained for; 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wism_model_window_size(model: *const wism_model) -> usize {
    model.as_ref().map_or(0, |m| m.0.w)
}

/// Number of coordinates per prediction row; 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wism_model_input_dim(model: *const wism_model) -> usize {
    model.as_ref().map_or(0, |m| m.0.input_dim())
}

/// Predicts the open subtour cost of one window of `coord_count` values
/// laid out as (x0, y0, x1, y1, ...).
///
/// # Safety
/// `coords` must hold `coord_count` doubles; `out_cost` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wism_model_predict(
    model: *const wism_model,
    coords: *const f64,
    coord_count: usize,
    out_cost: *mut f64,
) -> wism_status {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| invalid("model must not be null"))?;
        if coords.is_null() || out_cost.is_null() {
            return Err(invalid("coords and out_cost must not be null"));
        }
        let coords = std::slice::from_raw_parts(coords, coord_count);
        *out_cost = model.0.predict_window(coords)?;
        Ok(())
    })
}

/// Predicts `row_count` windows from a row-major coordinate matrix with
/// `wism_model_input_dim` columns, writing one cost per row.
///
/// # Safety
/// `coords` must hold `row_count * input_dim` doubles and `out_costs` space
/// for `row_count` doubles.
#[no_mangle]
pub unsafe extern "C" fn wism_model_predict_batch(
    model: *const wism_model,
    coords: *const f64,
    row_count: usize,
    out_costs: *mut f64,
) -> wism_status {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| invalid("model must not be null"))?;
        if coords.is_null() || out_costs.is_null() {
            return Err(invalid("coords and out_costs must not be null"));
        }
        let dim = model.0.input_dim();
        let coords = std::slice::from_raw_parts(coords, row_count * dim);
        let matrix = ndarray_from(coords, row_count, dim);
        let values = model.0.predict_batch(&matrix)?;
        std::slice::from_raw_parts_mut(out_costs, row_count).copy_from_slice(&values);
        Ok(())
    })
}

fn ndarray_from(values: &[f64], rows: usize, cols: usize) -> wism::ndarray::Array2<f64> {
    wism::ndarray::Array2::from_shape_vec((rows, cols), values.to_vec())
        .expect("length checked by caller")
}

/// Creates an empty window-cost memo table.
#[no_mangle]
pub extern "C" fn wism_cache_new() -> *mut wism_cache {
    Box::into_raw(Box::new(wism_cache(WindowCache::new())))
}

/// Releases a cache handle. A null handle is ignored.
///
/// # Safety
/// `cache` must have come from `wism_cache_new` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn wism_cache_free(cache: *mut wism_cache) {
    if !cache.is_null() {
        drop(Box::from_raw(cache));
    }
}

/// Reports lookup counters since creation or the last clear.
///
/// # Safety
/// `cache` must be a live handle; out pointers, if non-null, writable.
#[no_mangle]
pub unsafe extern "C" fn wism_cache_stats(
    cache: *const wism_cache,
    out_hits: *mut u64,
    out_misses: *mut u64,
) -> wism_status {
    guard(|| {
        let cache = cache.as_ref().ok_or_else(|| invalid("cache must not be null"))?;
        let (hits, misses) = cache.0.stats();
        if !out_hits.is_null() {
            *out_hits = hits;
        }
        if !out_misses.is_null() {
            *out_misses = misses;
        }
        Ok(())
    })
}

/// Drops all memoized entries and resets the counters.
///
/// # Safety
/// `cache` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wism_cache_clear(cache: *const wism_cache) -> wism_status {
    guard(|| {
        let cache = cache.as_ref().ok_or_else(|| invalid("cache must not be null"))?;
        cache.0.clear();
        Ok(())
    })
}

/// Windowed estimate of the closed tour cost of visiting the `n` targets
/// in the order given by `sequence`, using exact window costs solved at
/// resolution `k_max`. `cache` may be null.
///
/// # Safety
/// `xs`, `ys` must hold `n` doubles and `sequence` `n` indices; `out_cost`
/// must be writable; `cache`, if non-null, must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wism_window_cost_estimate_exact(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    rho: f64,
    sequence: *const u32,
    w: usize,
    k_max: usize,
    cache: *const wism_cache,
    out_cost: *mut f64,
) -> wism_status {
    guard(|| {
        let provider = DtpWindowProvider { rho, k_max };
        estimate_common(xs, ys, n, rho, sequence, w, &provider, cache, out_cost)
    })
}

/// Windowed estimate of the closed tour cost using model predictions for
/// the window costs. The model's window size must equal `w`.
///
/// # Safety
/// As for `wism_window_cost_estimate_exact`, plus `model` must be live.
#[no_mangle]
pub unsafe extern "C" fn wism_window_cost_estimate_model(
    model: *const wism_model,
    xs: *const f64,
    ys: *const f64,
    n: usize,
    sequence: *const u32,
    w: usize,
    cache: *const wism_cache,
    out_cost: *mut f64,
) -> wism_status {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| invalid("model must not be null"))?;
        if model.0.w != w {
            return Err(invalid("model window size does not match w"));
        }
        let provider = WismWindowProvider { model: &model.0 };
        estimate_common(xs, ys, n, 1.0, sequence, w, &provider, cache, out_cost)
    })
}

#[allow(clippy::too_many_arguments)]
unsafe fn estimate_common(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    rho: f64,
    sequence: *const u32,
    w: usize,
    provider: &dyn wism::windowing::WindowCostProvider,
    cache: *const wism_cache,
    out_cost: *mut f64,
) -> Result<(), Error> {
    if sequence.is_null() || out_cost.is_null() {
        return Err(invalid("sequence and out_cost must not be null"));
    }
    let points = gather_points(xs, ys, n)?;
    let instance = Instance::new(points, rho)?;
    let sequence: Vec<usize> =
        std::slice::from_raw_parts(sequence, n).iter().map(|&i| i as usize).collect();
    let cache = cache.as_ref().map(|c| &c.0);
    *out_cost = window_cost_estimate(&sequence, &instance, w, provider, cache)?;
    Ok(())
}
