//! Command-line front end. Every artifact-producing subcommand writes a
//! manifest alongside its outputs so the exact run can be replayed with
//! `rerun`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use wism::bench::{
    generate_instance, run_benchmark, run_method, run_window_size_study, write_bench_csv,
    write_window_study_csv, BenchConfig, Method, SolveOptions, WindowStudyConfig,
};
use wism::bench::plot::{plot_cost_vs_time, plot_normalized_costs};
use wism::dtp::{solve_dtp_refined, SequencedLocations};
use wism::ea::{EaConfig, GenerationStat, InitMode, StopCondition};
use wism::surrogate::{generate_dataset, train_with_history, Dataset, TrainConfig, WismModel};
use wism::types::{load_sequence, Instance};
use wism::{Error, Result};

#[derive(Parser)]
#[command(name = "wism", version, about = "Curvature-constrained tour planning toolkit")]
struct Cli {
    /// Worker threads for parallel stages (overrides WISM_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random benchmark instances.
    GenInstances(GenInstancesArgs),
    /// Generate a labeled window-cost dataset.
    GenDataset(GenDatasetArgs),
    /// Train the window-cost model on a dataset.
    Train(TrainArgs),
    /// Solve one instance with a chosen method.
    Solve(SolveArgs),
    /// Score windowed estimates against ground truth across window sizes.
    WindowStudy(WindowStudyArgs),
    /// Run the method benchmark over an instance grid.
    Bench(BenchArgs),
    /// Heading-optimized cost of a fixed visiting order.
    EvalDtp(EvalDtpArgs),
    /// Re-execute a previous run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Args)]
struct GenInstancesArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for instance files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenDatasetArgs {
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    w: usize,
    /// Heading resolution of the labeling solver.
    #[arg(long, default_value_t = 256)]
    kmax: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output dataset file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// JSON training configuration; omitted fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_model: PathBuf,
    /// Per-epoch loss CSV (default: model path with extension train.csv).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured epoch cap.
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Override hidden layer widths, comma separated.
    #[arg(long)]
    hidden: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// One of wism-ea, wiris-ea, iris-ea, baseline, aa.
    #[arg(long)]
    method: String,
    /// Trained model file (required by wism-ea).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Wall-clock budget in seconds.
    #[arg(long, conflicts_with = "generations")]
    time_limit: Option<f64>,
    #[arg(long)]
    generations: Option<usize>,
    /// Initial population: random or etsp.
    #[arg(long, default_value = "random")]
    init: String,
    /// Window size of windowed evaluators.
    #[arg(long, default_value_t = 3)]
    w: usize,
    /// Heading resolution of exact fitness evaluators.
    #[arg(long, default_value_t = 16)]
    kmax: usize,
    /// Heading resolution of the final polish and the baseline.
    #[arg(long, default_value_t = 1024)]
    polish_kmax: usize,
    #[arg(long, default_value_t = 100)]
    population: usize,
    #[arg(long, default_value_t = 3)]
    tournament: usize,
    #[arg(long, default_value_t = 0.8)]
    mutation_prob: f64,
    #[arg(long, default_value_t = 20)]
    elite: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Disable window-cost memoization.
    #[arg(long)]
    no_cache: bool,
    /// Output tour file.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-generation CSV log.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct WindowStudyArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long, default_value_t = 1)]
    w_min: usize,
    #[arg(long, default_value_t = 4)]
    w_max: usize,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// Random visiting orders scored per instance.
    #[arg(long, default_value_t = 3)]
    sequences: usize,
    #[arg(long, default_value_t = 1024)]
    exact_kmax: usize,
    #[arg(long, default_value_t = 1024)]
    truth_kmax: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trained model contributing rows at its own window size.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid cells as NxD pairs, comma separated (e.g. 25x1,50x0.1).
    #[arg(long)]
    grid: Option<String>,
    /// Methods to run, comma separated (default depends on --model).
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, default_value_t = 5)]
    instances: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, conflicts_with = "generations")]
    time_limit: Option<f64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long, default_value_t = 3)]
    w: usize,
    #[arg(long, default_value_t = 16)]
    kmax: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output directory (CSV, SVG plots, manifest).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalDtpArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Visiting order file: whitespace-separated target indices.
    #[arg(long)]
    sequence: PathBuf,
    #[arg(long, default_value_t = 1024)]
    kmax: usize,
    /// Solve the open variant (no closing maneuver, free end headings).
    #[arg(long)]
    open: bool,
}

#[derive(Args)]
struct RerunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Redirect all outputs into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Replayable record of one artifact-producing run.
#[derive(Serialize, Deserialize)]
struct RunManifest {
    tool: String,
    version: String,
    subcommand: String,
    argv: Vec<String>,
    outputs: Vec<String>,
}

/// Flags whose values are output paths, rewritten by `rerun --out-dir`.
const OUTPUT_FLAGS: [&str; 3] = ["--out", "--out-model", "--log"];

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli, &argv) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn dispatch(cli: Cli, argv: &[String]) -> Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::GenInstances(args) => gen_instances(args, argv),
        Command::GenDataset(args) => gen_dataset(args, argv),
        Command::Train(args) => train(args, argv),
        Command::Solve(args) => solve(args, argv),
        Command::WindowStudy(args) => window_study(args, argv),
        Command::Bench(args) => bench(args, argv),
        Command::EvalDtp(args) => eval_dtp(args),
        Command::Rerun(args) => rerun(args),
    }
}

fn init_threads(requested: Option<usize>) -> Result<()> {
    let from_env =
        std::env::var("WISM_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = requested.or(from_env) {
        if n == 0 {
            return Err(Error::config("thread count must be positive"));
        }
        // a second initialization in-process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn manifest_path_for(primary: &Path) -> PathBuf {
    if primary.is_dir() {
        primary.join("manifest.json")
    } else {
        let name = primary
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        primary.with_file_name(format!("{name}.manifest.json"))
    }
}

fn write_manifest(
    subcommand: &str,
    primary: &Path,
    outputs: &[PathBuf],
    argv: &[String],
) -> Result<()> {
    let manifest = RunManifest {
        tool: "wism".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: subcommand.into(),
        argv: argv.to_vec(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::format(format!("manifest serialization failed: {e}")))?;
    fs::write(manifest_path_for(primary), text + "\n")?;
    Ok(())
}

fn gen_instances(args: GenInstancesArgs, argv: &[String]) -> Result<()> {
    fs::create_dir_all(&args.out)?;
    let mut outputs = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let instance = generate_instance(args.n, args.d, args.seed + i as u64)?;
        let path = args.out.join(format!("instance_{i:03}.txt"));
        instance.save(&path)?;
        outputs.push(path);
    }
    write_manifest("gen-instances", &args.out, &outputs, argv)?;
    println!("wrote {} instances to {}", args.count, args.out.display());
    Ok(())
}

fn gen_dataset(args: GenDatasetArgs, argv: &[String]) -> Result<()> {
    let dataset = generate_dataset(args.count, args.w, args.kmax, args.seed)?;
    dataset.save(&args.out)?;
    write_manifest("gen-dataset", &args.out, std::slice::from_ref(&args.out), argv)?;
    println!("wrote {} samples (w={}) to {}", args.count, args.w, args.out.display());
    Ok(())
}

fn train(args: TrainArgs, argv: &[String]) -> Result<()> {
    let dataset = Dataset::load(&args.dataset)?;
    let mut config: TrainConfig = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::format(format!("{}: {e}", path.display())))?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(cap) = args.max_epochs {
        config.max_epochs = cap;
    }
    if let Some(hidden) = &args.hidden {
        config.hidden = hidden
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::config(format!("bad hidden width '{v}'")))
            })
            .collect::<Result<_>>()?;
    }

    let (model, history) = train_with_history(&dataset, &config)?;
    model.save(&args.out_model)?;
    let log = args.log.clone().unwrap_or_else(|| args.out_model.with_extension("train.csv"));
    let mut text = String::from("# wism-train-log v1\nepoch,train_mse,val_mse\n");
    for h in &history {
        text.push_str(&format!("{},{},{}\n", h.epoch, h.train_mse, h.val_mse));
    }
    fs::write(&log, text)?;
    write_manifest("train", &args.out_model, &[args.out_model.clone(), log], argv)?;

    let best = history.iter().map(|h| h.val_mse).fold(f64::INFINITY, f64::min);
    println!(
        "trained {} epochs, best validation mse {best:.6}, model at {}",
        history.len(),
        args.out_model.display()
    );
    Ok(())
}

fn parse_init(value: &str) -> Result<InitMode> {
    match value {
        "random" => Ok(InitMode::Random),
        "etsp" => Ok(InitMode::Etsp),
        other => Err(Error::config(format!("unknown init mode '{other}'"))),
    }
}

fn stop_condition(time_limit: Option<f64>, generations: Option<usize>) -> StopCondition {
    match time_limit {
        Some(secs) => StopCondition::TimeLimit(Duration::from_secs_f64(secs)),
        None => StopCondition::Generations(generations.unwrap_or(100)),
    }
}

fn solve(args: SolveArgs, argv: &[String]) -> Result<()> {
    let instance = Instance::load(&args.instance)?;
    let method: Method = args.method.parse()?;
    let model = args.model.as_deref().map(WismModel::load).transpose()?;
    let ea = EaConfig {
        population: args.population,
        tournament: args.tournament,
        mutation_prob: args.mutation_prob,
        elite: args.elite,
        stop: stop_condition(args.time_limit, args.generations),
        seed: args.seed,
        init: parse_init(&args.init)?,
        polish_k_max: args.polish_kmax,
    };
    let opts = SolveOptions {
        model: model.as_ref(),
        w: args.w,
        fitness_k_max: args.kmax,
        baseline_k_max: args.polish_kmax,
        ea: &ea,
        cache: !args.no_cache,
    };
    let run = run_method(method, &instance, &opts)?;
    run.tour.save(&instance, &args.out)?;

    let mut outputs = vec![args.out.clone()];
    if let Some(log) = &args.log {
        write_ea_log(&run.history, log)?;
        outputs.push(log.clone());
    }
    write_manifest("solve", &args.out, &outputs, argv)?;
    println!(
        "method={} cost={} generations={} evaluations={} tour={}",
        method,
        run.tour.cost,
        run.history.len(),
        run.evaluations,
        args.out.display()
    );
    Ok(())
}

fn write_ea_log(history: &[GenerationStat], path: &Path) -> Result<()> {
    let mut text = String::from("# wism-ea-log v1\ngeneration,best,mean,evaluations,elapsed_s\n");
    for h in history {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            h.generation, h.best, h.mean, h.evaluations, h.elapsed_s
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

fn window_study(args: WindowStudyArgs, argv: &[String]) -> Result<()> {
    let model = args.model.as_deref().map(WismModel::load).transpose()?;
    let config = WindowStudyConfig {
        n: args.n,
        d: args.d,
        instances: args.instances,
        w_min: args.w_min,
        w_max: args.w_max,
        sequences_per_instance: args.sequences,
        exact_k_max: args.exact_kmax,
        truth_k_max: args.truth_kmax,
        seed: args.seed,
    };
    let rows = run_window_size_study(&config, model.as_ref())?;
    write_window_study_csv(&rows, &args.out)?;
    write_manifest("window-study", &args.out, std::slice::from_ref(&args.out), argv)?;
    println!("wrote {} study rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn parse_grid(text: &str) -> Result<Vec<(usize, f64)>> {
    text.split(',')
        .map(|cell| {
            let (n, d) = cell
                .trim()
                .split_once('x')
                .ok_or_else(|| Error::config(format!("bad grid cell '{cell}', want NxD")))?;
            let n = n.parse::<usize>().map_err(|_| Error::config(format!("bad n in '{cell}'")))?;
            let d = d.parse::<f64>().map_err(|_| Error::config(format!("bad d in '{cell}'")))?;
            Ok((n, d))
        })
        .collect()
}

fn bench(args: BenchArgs, argv: &[String]) -> Result<()> {
    let model = args.model.as_deref().map(WismModel::load).transpose()?;
    let methods: Vec<Method> = match &args.methods {
        Some(list) => list.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?,
        None if model.is_some() => {
            vec![Method::WismEa, Method::WirisEa, Method::Baseline, Method::Aa]
        }
        None => vec![Method::WirisEa, Method::Baseline, Method::Aa],
    };
    let config = BenchConfig {
        cells: match &args.grid {
            Some(grid) => parse_grid(grid)?,
            None => BenchConfig::default().cells,
        },
        instances: args.instances,
        repeats: args.repeats,
        methods,
        seed: args.seed,
    };
    let ea = EaConfig {
        stop: stop_condition(args.time_limit, args.generations),
        ..EaConfig::default()
    };
    let opts = SolveOptions {
        model: model.as_ref(),
        w: args.w,
        fitness_k_max: args.kmax,
        ..SolveOptions::new(&ea)
    };

    fs::create_dir_all(&args.out)?;
    let rows = run_benchmark(&config, &opts)?;
    let csv = args.out.join("bench.csv");
    write_bench_csv(&rows, &csv)?;
    let mut outputs = vec![csv];
    for (plot, file) in [
        (plot_normalized_costs as fn(&_, &_) -> Result<()>, "normalized_costs.svg"),
        (plot_cost_vs_time, "cost_vs_time.svg"),
    ] {
        let path = args.out.join(file);
        match plot(&rows, &path) {
            Ok(()) => outputs.push(path),
            Err(e) => eprintln!("warning: skipped {file}: {e}"),
        }
    }
    write_manifest("bench", &args.out, &outputs, argv)?;
    println!("wrote {} benchmark rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn eval_dtp(args: EvalDtpArgs) -> Result<()> {
    let instance = Instance::load(&args.instance)?;
    let sequence = load_sequence(&args.sequence)?;
    let seq = SequencedLocations::from_instance(&instance, &sequence)?;
    let solution = solve_dtp_refined(&seq, args.kmax, !args.open)?;
    println!("{}", solution.cost);
    Ok(())
}

fn rerun(args: RerunArgs) -> Result<()> {
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(&args.manifest)?)
        .map_err(|e| Error::format(format!("{}: {e}", args.manifest.display())))?;
    if manifest.tool != "wism" {
        return Err(Error::config(format!("manifest written by '{}', not wism", manifest.tool)));
    }
    if manifest.subcommand == "rerun" {
        return Err(Error::config("refusing to rerun a rerun manifest"));
    }

    let mut argv = manifest.argv.clone();
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)?;
        let mut i = 0;
        while i + 1 < argv.len() {
            if OUTPUT_FLAGS.contains(&argv[i].as_str()) {
                let old = PathBuf::from(&argv[i + 1]);
                let name = old.file_name().unwrap_or(old.as_os_str());
                argv[i + 1] = dir.join(name).display().to_string();
                i += 1;
            }
            i += 1;
        }
    }

    let full = std::iter::once("wism".to_string()).chain(argv.iter().cloned());
    let cli = Cli::try_parse_from(full)
        .map_err(|e| Error::config(format!("manifest argv failed to parse: {e}")))?;
    dispatch(cli, &argv)
}
