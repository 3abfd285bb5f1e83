//! Experiment harness: instance generation, evaluation metrics, the
//! window-size study, and the method benchmark with CSV/SVG reporting.

pub mod plot;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{solve_alternating, solve_baseline_decoupled};
use crate::dtp::{solve_dtp_refined, SequencedLocations};
use crate::ea::{run_ea, EaConfig, FullDtpEvaluator, GenerationStat, WindowedEvaluator};
use crate::error::{Error, Result};
use crate::surrogate::{WismModel, WismWindowProvider};
use crate::types::{Instance, Point, Tour};
use crate::windowing::{window_cost_estimate, DtpWindowProvider, WindowCache, WindowCostProvider};

/// Draws `n` targets uniformly from the square of side √(n/d) centered at
/// the origin; turning radius is fixed at 1.
pub fn generate_instance(n: usize, d: f64, seed: u64) -> Result<Instance> {
    if n < 3 {
        return Err(Error::config(format!("need at least 3 targets, got {n}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::config(format!("density must be positive, got {d}")));
    }
    let half = (n as f64 / d).sqrt() / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = (0..n)
        .map(|_| Point::new(rng.random_range(-half..=half), rng.random_range(-half..=half)))
        .collect();
    Instance::new(targets, 1.0)
}

/// Cost of a solution divided by the reference cost on the same instance.
pub fn normalized_cost(cost: f64, baseline: f64) -> Result<f64> {
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(Error::numeric(format!("baseline cost must be positive, got {baseline}")));
    }
    Ok(cost / baseline)
}

/// Signed relative shortfall of an estimate against the reference cost;
/// positive when the estimate is below the reference. `c_true` must be
/// positive.
pub fn relative_error(c_true: f64, c_est: f64) -> f64 {
    (c_true - c_est) / c_true
}

/// Solver selector exposed on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Evolutionary search scored by the learned window-cost model.
    WismEa,
    /// Evolutionary search scored by exact window costs at reduced resolution.
    WirisEa,
    /// Evolutionary search scored by full closed-tour heading optimization.
    IrisEa,
    /// Decoupled Euclidean-sequence solver (the normalization reference).
    Baseline,
    /// Alternating straight/Dubins heuristic.
    Aa,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::WismEa, Method::WirisEa, Method::IrisEa, Method::Baseline, Method::Aa];

    pub fn name(&self) -> &'static str {
        match self {
            Method::WismEa => "wism-ea",
            Method::WirisEa => "wiris-ea",
            Method::IrisEa => "iris-ea",
            Method::Baseline => "baseline",
            Method::Aa => "aa",
        }
    }

    /// True when the method involves no randomness: one run per instance
    /// says everything.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, Method::Baseline | Method::Aa)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown method '{s}'")))
    }
}

/// Shared knobs for [`run_method`].
#[derive(Clone, Copy)]
pub struct SolveOptions<'a> {
    /// Trained window-cost model; required by [`Method::WismEa`].
    pub model: Option<&'a WismModel>,
    /// Window size for windowed evaluators.
    pub w: usize,
    /// Heading resolution of exact fitness evaluators.
    pub fitness_k_max: usize,
    /// Heading resolution of the decoupled reference solver.
    pub baseline_k_max: usize,
    /// Evolutionary parameters (seed and stop condition included).
    pub ea: &'a EaConfig,
    /// Memoize window costs across the run.
    pub cache: bool,
}

impl<'a> SolveOptions<'a> {
    pub fn new(ea: &'a EaConfig) -> Self {
        SolveOptions {
            model: None,
            w: 3,
            fitness_k_max: 16,
            baseline_k_max: 1024,
            ea,
            cache: true,
        }
    }
}

/// Outcome of one solver run; history is empty for non-evolutionary methods.
#[derive(Clone, Debug)]
pub struct MethodRun {
    pub tour: Tour,
    pub history: Vec<GenerationStat>,
    pub evaluations: u64,
}

impl MethodRun {
    fn direct(tour: Tour) -> Self {
        MethodRun { tour, history: Vec::new(), evaluations: 0 }
    }
}

/// Runs one solver on one instance.
pub fn run_method(method: Method, instance: &Instance, opts: &SolveOptions) -> Result<MethodRun> {
    match method {
        Method::Baseline => {
            Ok(MethodRun::direct(solve_baseline_decoupled(instance, opts.baseline_k_max)?))
        }
        Method::Aa => Ok(MethodRun::direct(solve_alternating(instance)?)),
        Method::IrisEa => {
            let evaluator = FullDtpEvaluator { instance, k_max: opts.fitness_k_max };
            let outcome = run_ea(instance, opts.ea, &evaluator)?;
            Ok(MethodRun {
                tour: outcome.tour,
                history: outcome.history,
                evaluations: outcome.evaluations,
            })
        }
        Method::WirisEa => {
            let provider = DtpWindowProvider { rho: instance.rho, k_max: opts.fitness_k_max };
            run_windowed(instance, opts, &provider)
        }
        Method::WismEa => {
            let model = opts
                .model
                .ok_or_else(|| Error::config("method wism-ea needs a trained model"))?;
            if model.w != opts.w {
                return Err(Error::config(format!(
                    "model predicts windows of size {}, requested w={}",
                    model.w, opts.w
                )));
            }
            let provider = WismWindowProvider { model };
            run_windowed(instance, opts, &provider)
        }
    }
}

fn run_windowed(
    instance: &Instance,
    opts: &SolveOptions,
    provider: &dyn WindowCostProvider,
) -> Result<MethodRun> {
    let cache = opts.cache.then(WindowCache::new);
    let evaluator =
        WindowedEvaluator { instance, provider, w: opts.w, cache: cache.as_ref() };
    let outcome = run_ea(instance, opts.ea, &evaluator)?;
    Ok(MethodRun {
        tour: outcome.tour,
        history: outcome.history,
        evaluations: outcome.evaluations,
    })
}

/// Parameters of the window-size error study.
#[derive(Clone, Debug)]
pub struct WindowStudyConfig {
    pub n: usize,
    pub d: f64,
    pub instances: usize,
    pub w_min: usize,
    pub w_max: usize,
    /// Random visiting orders scored per instance.
    pub sequences_per_instance: usize,
    /// Resolution of the exact window provider.
    pub exact_k_max: usize,
    /// Resolution of the closed ground-truth solver.
    pub truth_k_max: usize,
    pub seed: u64,
}

impl Default for WindowStudyConfig {
    fn default() -> Self {
        WindowStudyConfig {
            n: 50,
            d: 1.0,
            instances: 20,
            w_min: 1,
            w_max: 4,
            sequences_per_instance: 3,
            exact_k_max: 1024,
            truth_k_max: 1024,
            seed: 1,
        }
    }
}

/// One (provider, window size, sequence) measurement of the study.
#[derive(Clone, Debug)]
pub struct WindowStudyRow {
    pub provider: &'static str,
    pub w: usize,
    pub instance_seed: u64,
    pub sequence_id: usize,
    pub c_true: f64,
    pub c_est: f64,
    pub eps_r: f64,
    pub elapsed_s: f64,
}

/// Scores windowed estimates of random visiting orders against the closed
/// ground-truth cost, for every window size in the configured range.
///
/// The exact provider runs at every w; a model contributes rows only at its
/// own window size (its input width is fixed at training time).
pub fn run_window_size_study(
    config: &WindowStudyConfig,
    model: Option<&WismModel>,
) -> Result<Vec<WindowStudyRow>> {
    if config.w_min < 1 || config.w_max >= config.n || config.w_min > config.w_max {
        return Err(Error::config(format!(
            "window range {}..={} invalid for n={}",
            config.w_min, config.w_max, config.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::new();
    for _ in 0..config.instances {
        let instance_seed = rng.random::<u64>();
        let instance = generate_instance(config.n, config.d, instance_seed)?;
        let exact =
            DtpWindowProvider { rho: instance.rho, k_max: config.exact_k_max };
        for sequence_id in 0..config.sequences_per_instance {
            let mut sequence: Vec<usize> = (0..config.n).collect();
            sequence.shuffle(&mut rng);
            let seq = SequencedLocations::from_instance(&instance, &sequence)?;
            let c_true = solve_dtp_refined(&seq, config.truth_k_max, true)?.cost;
            for w in config.w_min..=config.w_max {
                let started = Instant::now();
                let c_est = window_cost_estimate(&sequence, &instance, w, &exact, None)?;
                rows.push(WindowStudyRow {
                    provider: "dtp",
                    w,
                    instance_seed,
                    sequence_id,
                    c_true,
                    c_est,
                    eps_r: relative_error(c_true, c_est),
                    elapsed_s: started.elapsed().as_secs_f64(),
                });
                if let Some(model) = model {
                    if model.w == w {
                        let provider = WismWindowProvider { model };
                        let started = Instant::now();
                        let c_est =
                            window_cost_estimate(&sequence, &instance, w, &provider, None)?;
                        rows.push(WindowStudyRow {
                            provider: "wism",
                            w,
                            instance_seed,
                            sequence_id,
                            c_true,
                            c_est,
                            eps_r: relative_error(c_true, c_est),
                            elapsed_s: started.elapsed().as_secs_f64(),
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_window_study_csv(rows: &[WindowStudyRow], path: &Path) -> Result<()> {
    let mut out = String::from("# wism-window-study v1\n");
    out.push_str("provider,w,instance_seed,sequence_id,c_true,c_est,eps_r,elapsed_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.provider, r.w, r.instance_seed, r.sequence_id, r.c_true, r.c_est, r.eps_r,
            r.elapsed_s
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Grid and repetition layout of the method benchmark.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// (n, d) cells to sweep.
    pub cells: Vec<(usize, f64)>,
    pub instances: usize,
    /// Runs per instance for randomized methods; deterministic methods run
    /// once per instance.
    pub repeats: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let cells = [25, 50, 100]
            .iter()
            .flat_map(|&n| [0.1, 1.0, 10.0].map(|d| (n, d)))
            .collect();
        BenchConfig {
            cells,
            instances: 5,
            repeats: 3,
            methods: vec![Method::WismEa, Method::WirisEa, Method::Baseline, Method::Aa],
            seed: 1,
        }
    }
}

/// One solver run on one instance.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub method: &'static str,
    pub n: usize,
    pub d: f64,
    pub instance_seed: u64,
    pub repeat: usize,
    pub cost: f64,
    pub c_r: f64,
    pub status: &'static str,
    pub elapsed_s: f64,
}

/// Runs every configured method over the instance grid; the reference
/// solver runs once per instance and its cost normalizes all rows. A
/// failing run is recorded in its row and the sweep continues.
pub fn run_benchmark(config: &BenchConfig, opts: &SolveOptions) -> Result<Vec<BenchRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::new();
    for &(n, d) in &config.cells {
        for _ in 0..config.instances {
            let instance_seed = rng.random::<u64>();
            let run_seed_base = rng.random::<u64>();
            let instance = generate_instance(n, d, instance_seed)?;

            let started = Instant::now();
            let reference = solve_baseline_decoupled(&instance, opts.baseline_k_max)?;
            let reference_elapsed = started.elapsed().as_secs_f64();

            for &method in &config.methods {
                if method == Method::Baseline {
                    rows.push(BenchRow {
                        method: method.name(),
                        n,
                        d,
                        instance_seed,
                        repeat: 0,
                        cost: reference.cost,
                        c_r: 1.0,
                        status: "ok",
                        elapsed_s: reference_elapsed,
                    });
                    continue;
                }
                let repeats = if method.is_deterministic() { 1 } else { config.repeats };
                for repeat in 0..repeats {
                    let mut ea = opts.ea.clone();
                    ea.seed = run_seed_base
                        .wrapping_add(repeat as u64)
                        .wrapping_mul(0x9e37_79b9_7f4a_7c15);
                    let run_opts = SolveOptions { ea: &ea, ..*opts };
                    let started = Instant::now();
                    let row = match run_method(method, &instance, &run_opts) {
                        Ok(run) => BenchRow {
                            method: method.name(),
                            n,
                            d,
                            instance_seed,
                            repeat,
                            cost: run.tour.cost,
                            c_r: normalized_cost(run.tour.cost, reference.cost)?,
                            status: "ok",
                            elapsed_s: started.elapsed().as_secs_f64(),
                        },
                        Err(_) => BenchRow {
                            method: method.name(),
                            n,
                            d,
                            instance_seed,
                            repeat,
                            cost: f64::NAN,
                            c_r: f64::NAN,
                            status: "error",
                            elapsed_s: started.elapsed().as_secs_f64(),
                        },
                    };
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_bench_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    let mut out = String::from("# wism-bench v1\n");
    out.push_str("method,n,d,instance_seed,repeat,cost,c_r,status,elapsed_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.method, r.n, r.d, r.instance_seed, r.repeat, r.cost, r.c_r, r.status, r.elapsed_s
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ea::StopCondition;

    #[test]
    fn instances_stay_inside_the_density_square() {
        let instance = generate_instance(100, 1.0, 3).unwrap();
        assert_eq!(instance.len(), 100);
        for p in &instance.targets {
            assert!(p.x.abs() <= 5.0 && p.y.abs() <= 5.0);
        }
        let sparse = generate_instance(25, 0.1, 3).unwrap();
        let half = (25.0f64 / 0.1).sqrt() / 2.0;
        assert!((half - 15.811_388_300_841_896 / 2.0).abs() < 1e-12);
        for p in &sparse.targets {
            assert!(p.x.abs() <= half && p.y.abs() <= half);
        }
    }

    #[test]
    fn instance_generation_is_seeded() {
        let a = generate_instance(10, 1.0, 7).unwrap();
        let b = generate_instance(10, 1.0, 7).unwrap();
        let c = generate_instance(10, 1.0, 8).unwrap();
        assert_eq!(a.targets, b.targets);
        assert_ne!(a.targets, c.targets);
        assert!(generate_instance(2, 1.0, 0).is_err());
        assert!(generate_instance(10, 0.0, 0).is_err());
    }

    #[test]
    fn metrics_match_definitions() {
        assert_eq!(normalized_cost(2.0, 4.0).unwrap(), 0.5);
        assert_eq!(normalized_cost(4.0, 4.0).unwrap(), 1.0);
        assert!(normalized_cost(1.0, 0.0).is_err());
        assert_eq!(relative_error(10.0, 10.0), 0.0);
        assert!((relative_error(10.0, 9.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn method_names_round_trip() {
        for method in Method::ALL {
            assert_eq!(method.name().parse::<Method>().unwrap(), method);
        }
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn window_study_rows_cover_the_grid() {
        let config = WindowStudyConfig {
            n: 7,
            d: 1.0,
            instances: 2,
            w_min: 1,
            w_max: 2,
            sequences_per_instance: 2,
            exact_k_max: 32,
            truth_k_max: 32,
            seed: 5,
        };
        let rows = run_window_size_study(&config, None).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2);
        for row in &rows {
            assert!(row.c_true.is_finite() && row.c_est.is_finite());
            assert_eq!(row.provider, "dtp");
        }
    }

    #[test]
    fn benchmark_reference_rows_are_exactly_one() {
        let ea = EaConfig {
            population: 12,
            elite: 2,
            stop: StopCondition::Generations(3),
            ..EaConfig::default()
        };
        let opts =
            SolveOptions { fitness_k_max: 8, baseline_k_max: 32, ..SolveOptions::new(&ea) };
        let config = BenchConfig {
            cells: vec![(6, 1.0)],
            instances: 2,
            repeats: 2,
            methods: vec![Method::WirisEa, Method::Baseline, Method::Aa],
            seed: 9,
        };
        let rows = run_benchmark(&config, &opts).unwrap();
        // per instance: 2 wiris-ea repeats + 1 baseline + 1 aa
        assert_eq!(rows.len(), 2 * 4);
        for row in &rows {
            assert_eq!(row.status, "ok");
            if row.method == "baseline" {
                assert_eq!(row.c_r, 1.0);
            }
            assert!(row.cost.is_finite());
        }
    }

    #[test]
    fn csv_writers_emit_schema_then_rows() {
        let dir = std::env::temp_dir().join("wism-bench-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let rows = vec![BenchRow {
            method: "aa",
            n: 5,
            d: 1.0,
            instance_seed: 1,
            repeat: 0,
            cost: 12.5,
            c_r: 1.25,
            status: "ok",
            elapsed_s: 0.01,
        }];
        let path = dir.join("bench.csv");
        write_bench_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("# wism-bench"));
        assert!(lines[1].ends_with("elapsed_s"));
        assert!(lines[2].starts_with("aa,5,1,"));
    }
}
