//! Curvature-constrained tour planning toolkit.
//!
//! The library plans minimum-length tours for a vehicle with a bounded
//! turning radius. It provides:
//!
//! * closed-form shortest curvature-constrained point-to-point paths
//!   ([`dubins`]),
//! * heading-assignment solvers for a fixed visit order ([`dtp`]),
//! * a sliding-window lower-bound estimator for tour cost with a
//!   concurrent memoization cache ([`windowing`]),
//! * a small learned regressor that replaces the exact window solver
//!   inside search loops ([`surrogate`]),
//! * an evolutionary search over visit orders ([`ea`]),
//! * reference baselines ([`baselines`]) and a benchmark harness
//!   ([`bench`]).

pub mod baselines;
pub mod bench;
pub mod dtp;
pub mod dubins;
pub mod ea;
pub mod error;
pub mod surrogate;
pub mod types;
pub mod windowing;

pub use error::{Error, Result};

// batch inference works on ndarray matrices; callers need the same version
pub use ndarray;
