//! Evolutionary search over visiting orders with a pluggable fitness
//! evaluator and a final heading-optimization polish.
//!
//! Individuals are permutations of target indices. Each generation produces
//! a full population of offspring (inversion mutation or order crossover,
//! parents picked by tournament), keeps elite copies of the incumbent best,
//! and fills the rest with the best offspring. The evaluator only ranks
//! sequences; the returned tour's headings and cost always come from the
//! high-resolution heading solver on the winning sequence.

use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dtp::{solve_dtp_refined, SequencedLocations};
use crate::error::{Error, Result};
use crate::types::{Instance, Tour};
use crate::windowing::{window_cost_estimate, WindowCache, WindowCostProvider};

/// Termination rule for [`run_ea`].
#[derive(Clone, Copy, Debug)]
pub enum StopCondition {
    /// Run exactly this many generations.
    Generations(usize),
    /// Stop before the first generation that begins past the deadline.
    TimeLimit(Duration),
}

/// Initial population contents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    /// Independent uniform random permutations.
    Random,
    /// Every individual starts as the Euclidean-TSP heuristic tour.
    Etsp,
}

/// Search parameters; defaults follow the benchmark configuration.
#[derive(Clone, Debug)]
pub struct EaConfig {
    pub population: usize,
    pub tournament: usize,
    pub mutation_prob: f64,
    /// Number of copies of the incumbent best carried into each generation.
    pub elite: usize,
    pub stop: StopCondition,
    pub seed: u64,
    pub init: InitMode,
    /// Grid resolution of the final closed heading optimization.
    pub polish_k_max: usize,
}

impl Default for EaConfig {
    fn default() -> Self {
        EaConfig {
            population: 100,
            tournament: 3,
            mutation_prob: 0.8,
            elite: 20,
            stop: StopCondition::Generations(100),
            seed: 0,
            init: InitMode::Random,
            polish_k_max: 1024,
        }
    }
}

impl EaConfig {
    fn validate(&self) -> Result<()> {
        if self.population == 0 || self.elite >= self.population {
            return Err(Error::config("elite count must be smaller than the population"));
        }
        if self.tournament == 0 {
            return Err(Error::config("tournament size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::config("mutation probability must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Ranks visiting orders; lower is better. Implementations must be
/// deterministic functions of the sequences so runs are reproducible.
pub trait SequenceEvaluator {
    fn evaluate(&self, sequences: &[Vec<usize>]) -> Result<Vec<f64>>;
}

/// Progress record for one generation.
#[derive(Clone, Copy, Debug)]
pub struct GenerationStat {
    pub generation: usize,
    /// Best fitness seen so far (never increases).
    pub best: f64,
    /// Mean fitness of this generation's offspring.
    pub mean: f64,
    /// Cumulative evaluator calls.
    pub evaluations: u64,
    pub elapsed_s: f64,
}

/// Result of a search run.
#[derive(Clone, Debug)]
pub struct EaOutcome {
    /// Best sequence with polished headings and realized closed-tour cost.
    pub tour: Tour,
    /// Evaluator fitness of the best sequence (surrogate scale, not `tour.cost`).
    pub best_fitness: f64,
    pub generations: usize,
    pub evaluations: u64,
    pub history: Vec<GenerationStat>,
}

fn argmin(fitness: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..fitness.len() {
        if fitness[i] < fitness[best] {
            best = i;
        }
    }
    best
}

/// Runs the evolutionary search on `instance` and polishes the winner.
pub fn run_ea(
    instance: &Instance,
    config: &EaConfig,
    evaluator: &dyn SequenceEvaluator,
) -> Result<EaOutcome> {
    config.validate()?;
    let n = instance.len();
    if n < 4 {
        return Err(Error::config(format!("need at least 4 targets, got {n}")));
    }

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pop_size = config.population;

    let mut population: Vec<Vec<usize>> = match config.init {
        InitMode::Random => (0..pop_size)
            .map(|_| {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                perm
            })
            .collect(),
        InitMode::Etsp => {
            let tour = etsp_heuristic_tour(instance)?;
            vec![tour; pop_size]
        }
    };
    let mut fitness = evaluator.evaluate(&population)?;
    let mut evaluations = pop_size as u64;

    let mut history = Vec::new();
    let mut generations = 0usize;
    loop {
        match config.stop {
            StopCondition::Generations(g) => {
                if generations >= g {
                    break;
                }
            }
            StopCondition::TimeLimit(limit) => {
                if start.elapsed() >= limit {
                    break;
                }
            }
        }
        generations += 1;

        let mut offspring = Vec::with_capacity(pop_size);
        for _ in 0..pop_size {
            if rng.random::<f64>() < config.mutation_prob {
                let p = tournament_select(&fitness, config.tournament, &mut rng);
                offspring.push(sim_mutation(&population[p], &mut rng));
            } else {
                let a = tournament_select(&fitness, config.tournament, &mut rng);
                let b = tournament_select(&fitness, config.tournament, &mut rng);
                offspring.push(ox1_crossover(&population[a], &population[b], &mut rng));
            }
        }
        let offspring_fitness = evaluator.evaluate(&offspring)?;
        evaluations += pop_size as u64;

        // incumbent best over parents and offspring; parents win ties
        let pi = argmin(&fitness);
        let oi = argmin(&offspring_fitness);
        let (best_seq, best_fit) = if offspring_fitness[oi] < fitness[pi] {
            (offspring[oi].clone(), offspring_fitness[oi])
        } else {
            (population[pi].clone(), fitness[pi])
        };

        let mut order: Vec<usize> = (0..pop_size).collect();
        order.sort_by(|&a, &b| offspring_fitness[a].total_cmp(&offspring_fitness[b]));

        let mut next_pop = Vec::with_capacity(pop_size);
        let mut next_fit = Vec::with_capacity(pop_size);
        for _ in 0..config.elite {
            next_pop.push(best_seq.clone());
            next_fit.push(best_fit);
        }
        for &i in order.iter().take(pop_size - config.elite) {
            next_pop.push(offspring[i].clone());
            next_fit.push(offspring_fitness[i]);
        }
        population = next_pop;
        fitness = next_fit;

        let mean = offspring_fitness.iter().sum::<f64>() / pop_size as f64;
        history.push(GenerationStat {
            generation: generations,
            best: best_fit,
            mean,
            evaluations,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
    }

    let best = argmin(&fitness);
    let best_sequence = population[best].clone();
    let best_fitness = fitness[best];

    let seq = SequencedLocations::from_instance(instance, &best_sequence)?;
    let polished = solve_dtp_refined(&seq, config.polish_k_max, true)?;
    let tour = Tour {
        sequence: best_sequence,
        headings: polished.headings,
        cost: polished.cost,
    };
    Ok(EaOutcome { tour, best_fitness, generations, evaluations, history })
}

/// Index of the best of `t` uniform draws with replacement; ties keep the
/// earlier draw.
pub fn tournament_select(fitness: &[f64], t: usize, rng: &mut impl Rng) -> usize {
    debug_assert!(t >= 1 && !fitness.is_empty());
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..t {
        let i = rng.random_range(0..fitness.len());
        if fitness[i] < fitness[best] {
            best = i;
        }
    }
    best
}

/// Order crossover: keeps a random contiguous slice of `p1` in place and
/// fills the remaining positions with `p2`'s elements in `p2`'s cyclic
/// order starting after the slice, skipping elements already present.
pub fn ox1_crossover(p1: &[usize], p2: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    debug_assert_eq!(p1.len(), p2.len());
    let n = p1.len();
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    ox1_with_slice(p1, p2, a.min(b), a.max(b))
}

fn ox1_with_slice(p1: &[usize], p2: &[usize], l: usize, r: usize) -> Vec<usize> {
    let n = p1.len();
    let mut child = vec![usize::MAX; n];
    let mut kept = vec![false; n];
    for i in l..=r {
        child[i] = p1[i];
        kept[p1[i]] = true;
    }
    let mut scan = (r + 1) % n;
    let mut fill = (r + 1) % n;
    for _ in 0..n - (r - l + 1) {
        while kept[p2[scan]] {
            scan = (scan + 1) % n;
        }
        child[fill] = p2[scan];
        scan = (scan + 1) % n;
        fill = (fill + 1) % n;
    }
    child
}

/// Inversion mutation: reverses one random contiguous span.
pub fn sim_mutation(p: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    let n = p.len();
    debug_assert!(n >= 2);
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    reverse_span(p, a.min(b), a.max(b))
}

fn reverse_span(p: &[usize], l: usize, r: usize) -> Vec<usize> {
    let mut out = p.to_vec();
    out[l..=r].reverse();
    out
}

/// Euclidean-TSP heuristic: nearest-neighbor construction from index 0,
/// then first-improvement 2-opt to local optimality. Deterministic.
pub fn etsp_heuristic_tour(instance: &Instance) -> Result<Vec<usize>> {
    let n = instance.len();
    if n < 3 {
        return Err(Error::config(format!("need at least 3 targets, got {n}")));
    }
    let dist = |a: usize, b: usize| instance.targets[a].distance(instance.targets[b]);

    let mut tour = nearest_neighbor_tour(instance);

    // 2-opt: replace edges (i, i+1), (j, j+1) by (i, j), (i+1, j+1) when
    // strictly shorter, reversing the span between them
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 1 {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (tour[i], tour[i + 1]);
                let (c, d) = (tour[j], tour[(j + 1) % n]);
                let delta = dist(a, c) + dist(b, d) - dist(a, b) - dist(c, d);
                if delta < -1e-10 {
                    tour[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
    }
    Ok(tour)
}

fn nearest_neighbor_tour(instance: &Instance) -> Vec<usize> {
    let n = instance.len();
    let dist = |a: usize, b: usize| instance.targets[a].distance(instance.targets[b]);
    let mut tour = Vec::with_capacity(n);
    let mut used = vec![false; n];
    tour.push(0);
    used[0] = true;
    for _ in 1..n {
        let here = *tour.last().unwrap();
        let next = (0..n)
            .filter(|&cand| !used[cand])
            .min_by(|&a, &b| dist(here, a).total_cmp(&dist(here, b)))
            .expect("unvisited target remains");
        tour.push(next);
        used[next] = true;
    }
    tour
}

/// Fitness = windowed cost estimate of each sequence over a shared
/// provider and optional cache.
pub struct WindowedEvaluator<'a> {
    pub instance: &'a Instance,
    pub provider: &'a dyn WindowCostProvider,
    pub w: usize,
    pub cache: Option<&'a WindowCache>,
}

impl SequenceEvaluator for WindowedEvaluator<'_> {
    fn evaluate(&self, sequences: &[Vec<usize>]) -> Result<Vec<f64>> {
        sequences
            .iter()
            .map(|s| window_cost_estimate(s, self.instance, self.w, self.provider, self.cache))
            .collect()
    }
}

/// Fitness = full closed-tour heading optimization of each sequence at a
/// reduced grid resolution.
pub struct FullDtpEvaluator<'a> {
    pub instance: &'a Instance,
    pub k_max: usize,
}

impl SequenceEvaluator for FullDtpEvaluator<'_> {
    fn evaluate(&self, sequences: &[Vec<usize>]) -> Result<Vec<f64>> {
        sequences
            .iter()
            .map(|s| {
                let seq = SequencedLocations::from_instance(self.instance, s)?;
                Ok(solve_dtp_refined(&seq, self.k_max, true)?.cost)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{is_permutation, Point};
    use proptest::prelude::*;

    fn random_instance(n: usize, seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let targets =
            (0..n).map(|_| Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)));
        Instance::new(targets.collect(), 1.0).unwrap()
    }

    fn euclid_closed(instance: &Instance, tour: &[usize]) -> f64 {
        let n = tour.len();
        (0..n)
            .map(|i| instance.targets[tour[i]].distance(instance.targets[tour[(i + 1) % n]]))
            .sum()
    }

    /// Closed-tour Euclidean length; cheap stand-in fitness for EA tests.
    struct EuclidEvaluator<'a>(&'a Instance);

    impl SequenceEvaluator for EuclidEvaluator<'_> {
        fn evaluate(&self, sequences: &[Vec<usize>]) -> Result<Vec<f64>> {
            Ok(sequences.iter().map(|s| euclid_closed(self.0, s)).collect())
        }
    }

    /// Minimum closed Euclidean length over all distinct sequences
    /// (first element fixed, reversal duplicates skipped).
    fn brute_force_euclid(instance: &Instance) -> f64 {
        let n = instance.len();
        let mut rest: Vec<usize> = (1..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut rest, 0, &mut |perm| {
            if perm[0] > perm[perm.len() - 1] {
                return; // reversal duplicate
            }
            let mut tour = vec![0];
            tour.extend_from_slice(perm);
            best = best.min(euclid_closed(instance, &tour));
        });
        best
    }

    fn permute(items: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
        if at == items.len() {
            visit(items);
            return;
        }
        for i in at..items.len() {
            items.swap(at, i);
            permute(items, at + 1, visit);
            items.swap(at, i);
        }
    }

    #[test]
    fn ox1_matches_hand_trace() {
        let p1: Vec<usize> = vec![0, 1, 2, 3, 4, 5, 6, 7];
        let p2: Vec<usize> = vec![7, 6, 5, 4, 3, 2, 1, 0];
        // slice holds p1's 3,4,5; remaining filled from p2 after the slice:
        // 1, 0, then wrapping 7, 6, 2
        let child = ox1_with_slice(&p1, &p2, 3, 5);
        assert_eq!(child, vec![7, 6, 2, 3, 4, 5, 1, 0]);
    }

    #[test]
    fn ox1_identical_parents_reproduce() {
        let p: Vec<usize> = vec![3, 1, 4, 0, 2];
        for l in 0..5 {
            for r in l..5 {
                assert_eq!(ox1_with_slice(&p, &p, l, r), p);
            }
        }
    }

    proptest! {
        #[test]
        fn ox1_and_sim_emit_permutations(n in 2usize..40, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p1: Vec<usize> = (0..n).collect();
            let mut p2: Vec<usize> = (0..n).collect();
            p1.shuffle(&mut rng);
            p2.shuffle(&mut rng);
            let child = ox1_crossover(&p1, &p2, &mut rng);
            prop_assert!(is_permutation(&child, n));
            let mutant = sim_mutation(&p1, &mut rng);
            prop_assert!(is_permutation(&mutant, n));
        }
    }

    #[test]
    fn sim_reverses_one_span() {
        let p: Vec<usize> = vec![1, 2, 3, 4, 5, 6];
        assert_eq!(reverse_span(&p, 1, 3), vec![1, 4, 3, 2, 5, 6]);
        assert_eq!(reverse_span(&p, 4, 4), p);
    }

    #[test]
    fn tournament_selection_pressure_matches_analytic_distribution() {
        // distinct fitnesses 0..10, so member i has rank i; with t draws
        // P(pick rank i) = ((m-i)^t - (m-i-1)^t) / m^t
        let fitness: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let m = fitness.len();
        let draws = 100_000;

        for t in [1usize, 3] {
            let mut rng = ChaCha8Rng::seed_from_u64(17 + t as u64);
            let mut counts = vec![0u32; m];
            for _ in 0..draws {
                counts[tournament_select(&fitness, t, &mut rng)] += 1;
            }
            for (i, &count) in counts.iter().enumerate() {
                let p = ((m - i).pow(t as u32) as f64 - (m - i - 1).pow(t as u32) as f64)
                    / (m as f64).powi(t as i32);
                let observed = count as f64 / draws as f64;
                assert!(
                    (observed - p).abs() < 0.01,
                    "t={t} rank {i}: observed {observed}, analytic {p}"
                );
            }
        }
    }

    #[test]
    fn etsp_square_recovers_perimeter() {
        let corners = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ];
        let instance = Instance::new(corners, 1.0).unwrap();
        let tour = etsp_heuristic_tour(&instance).unwrap();
        assert!(is_permutation(&tour, 4));
        assert!((euclid_closed(&instance, &tour) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn two_opt_never_worse_than_nearest_neighbor() {
        for seed in 0..20 {
            let instance = random_instance(15, seed);
            let nn = nearest_neighbor_tour(&instance);
            let polished = etsp_heuristic_tour(&instance).unwrap();
            assert!(
                euclid_closed(&instance, &polished) <= euclid_closed(&instance, &nn) + 1e-12
            );
        }
    }

    #[test]
    fn etsp_heuristic_near_optimal_on_small_instances() {
        for seed in 0..8 {
            let instance = random_instance(8, 100 + seed);
            let heuristic = euclid_closed(&instance, &etsp_heuristic_tour(&instance).unwrap());
            let optimal = brute_force_euclid(&instance);
            assert!(
                heuristic <= optimal * 1.05 + 1e-12,
                "seed {seed}: heuristic {heuristic} vs optimal {optimal}"
            );
        }
    }

    #[test]
    fn rejects_bad_configs_before_evaluating() {
        let instance = random_instance(6, 1);
        let evaluator = EuclidEvaluator(&instance);
        let bad = [
            EaConfig { elite: 100, ..EaConfig::default() },
            EaConfig { population: 0, ..EaConfig::default() },
            EaConfig { tournament: 0, ..EaConfig::default() },
            EaConfig { mutation_prob: 1.5, ..EaConfig::default() },
        ];
        for config in bad {
            assert!(run_ea(&instance, &config, &evaluator).is_err());
        }
        let tiny = random_instance(3, 2);
        assert!(run_ea(&tiny, &EaConfig::default(), &EuclidEvaluator(&tiny)).is_err());
    }

    #[test]
    fn best_fitness_is_monotone_and_seeded_runs_agree() {
        let instance = random_instance(9, 3);
        let evaluator = EuclidEvaluator(&instance);
        let config = EaConfig {
            population: 40,
            elite: 8,
            stop: StopCondition::Generations(40),
            seed: 5,
            ..EaConfig::default()
        };
        let a = run_ea(&instance, &config, &evaluator).unwrap();
        assert_eq!(a.generations, 40);
        assert_eq!(a.evaluations, 40 * 41);
        for pair in a.history.windows(2) {
            assert!(pair[1].best <= pair[0].best);
        }
        let b = run_ea(&instance, &config, &evaluator).unwrap();
        assert_eq!(a.tour.sequence, b.tour.sequence);
        assert_eq!(a.best_fitness.to_bits(), b.best_fitness.to_bits());
    }

    #[test]
    fn finds_euclidean_optimum_on_a_small_instance() {
        let instance = random_instance(7, 4);
        let evaluator = EuclidEvaluator(&instance);
        let config = EaConfig {
            population: 60,
            elite: 12,
            stop: StopCondition::Generations(120),
            seed: 9,
            ..EaConfig::default()
        };
        let outcome = run_ea(&instance, &config, &evaluator).unwrap();
        let optimal = brute_force_euclid(&instance);
        assert!(
            outcome.best_fitness <= optimal + 1e-9,
            "ea {} vs brute force {optimal}",
            outcome.best_fitness
        );
        // polish produces a feasible closed tour on the winning sequence
        assert!((outcome.tour.recompute_cost(&instance) - outcome.tour.cost).abs() < 1e-9);
    }

    #[test]
    fn etsp_init_seeds_population_with_heuristic_tour() {
        let instance = random_instance(10, 6);
        let evaluator = EuclidEvaluator(&instance);
        let config = EaConfig {
            population: 30,
            elite: 6,
            stop: StopCondition::Generations(0),
            init: InitMode::Etsp,
            ..EaConfig::default()
        };
        let outcome = run_ea(&instance, &config, &evaluator).unwrap();
        let etsp = etsp_heuristic_tour(&instance).unwrap();
        assert_eq!(outcome.tour.sequence, etsp);
    }
}
