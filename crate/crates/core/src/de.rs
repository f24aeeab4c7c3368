//! Seeded Differential Evolution (`DE/rand/1/bin`) over the unit hypercube.
//!
//! A run evaluates the initial population, then repeats generations of
//! mutation, binomial crossover, decision-to-plan mapping and one-to-one
//! selection until enough feasible evaluations have been seen or the next
//! full generation would exceed the evaluation budget.
//!
//! All randomness comes from a single [`ChaCha8Rng`] seeded with
//! `SolverConfig::seed`, drawn in this order:
//!
//! 1. initialization: `Np × n` uniform draws, row by row;
//! 2. for every target index `i` of every generation: `r1`, `r2`, `r3`
//!    (rejection-sampled to be mutually distinct and distinct from `i`),
//!    then `j_rand`, then one crossover draw per coordinate.

use std::collections::HashSet;
use std::ops::Range;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::duration::Deciseconds;
use crate::problem::{DeficitProblem, FitnessValue, PlanRecord, ProblemError, SavingsPlan};

pub const STRATEGY_NAME: &str = "DE/rand/1/bin";

pub fn strategy_name() -> &'static str {
    STRATEGY_NAME
}

#[derive(Debug, Error)]
pub enum DeError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("vector dimensions differ: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// A point of the decision space `[0, 1]^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateVector {
    coords: Vec<f64>,
}

impl CandidateVector {
    pub fn new(coords: Vec<f64>) -> Result<Self, DeError> {
        if let Some((index, &value)) = coords
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(DeError::OutOfRange { index, value });
        }
        Ok(Self { coords })
    }

    #[cfg(test)]
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub population_size: usize,
    pub scale_factor: f64,
    pub crossover_rate: f64,
    pub max_evaluations: u64,
    /// Number of feasible evaluations (duplicates included) that ends a run.
    /// `u64::MAX` disables the quota.
    pub feasible_hits_to_stop: u64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            scale_factor: 0.5,
            crossover_rate: 0.9,
            max_evaluations: 80_000,
            feasible_hits_to_stop: 100,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), DeError> {
        if self.population_size < 4 {
            return Err(DeError::Config(format!(
                "population size {} is below 4",
                self.population_size
            )));
        }
        if !(self.scale_factor > 0.0 && self.scale_factor <= 2.0) {
            return Err(DeError::Config(format!(
                "scale factor {} outside (0, 2]",
                self.scale_factor
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(DeError::Config(format!(
                "crossover rate {} outside [0, 1]",
                self.crossover_rate
            )));
        }
        if self.max_evaluations < self.population_size as u64 {
            return Err(DeError::Config(format!(
                "evaluation budget {} is smaller than the population size {}",
                self.max_evaluations, self.population_size
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminatedBy {
    FeasibleQuota,
    EvaluationBudget,
}

/// Distinct feasible plans in the order they were first found.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeasibleArchive {
    plans: Vec<SavingsPlan>,
    seen: HashSet<SavingsPlan>,
}

impl FeasibleArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false` when the plan was already archived.
    pub fn insert(&mut self, plan: SavingsPlan) -> bool {
        if self.seen.contains(&plan) {
            return false;
        }
        self.seen.insert(plan.clone());
        self.plans.push(plan);
        true
    }

    pub fn plans(&self) -> &[SavingsPlan] {
        &self.plans
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    pub fn contains(&self, plan: &SavingsPlan) -> bool {
        self.seen.contains(plan)
    }

    pub fn get(&self, index: usize) -> Option<&SavingsPlan> {
        self.plans.get(index)
    }
}

impl Extend<SavingsPlan> for FeasibleArchive {
    fn extend<T: IntoIterator<Item = SavingsPlan>>(&mut self, iter: T) {
        for plan in iter {
            self.insert(plan);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub archive: FeasibleArchive,
    pub evaluations_used: u64,
    pub feasible_hits: u64,
    pub best_fitness: FitnessValue,
    pub best_plan: SavingsPlan,
    pub generations: u64,
    pub terminated_by: TerminatedBy,
}

/// Uniform random population of `config.population_size` vectors in `[0, 1]^n`.
pub fn initialize_population<R: Rng + ?Sized>(
    config: &SolverConfig,
    n: usize,
    rng: &mut R,
) -> Vec<CandidateVector> {
    (0..config.population_size)
        .map(|_| CandidateVector {
            coords: (0..n).map(|_| rng.gen::<f64>()).collect(),
        })
        .collect()
}

/// `base + f · (a − b)`, each coordinate clamped into `[0, 1]`.
pub fn differential_donor(
    base: &CandidateVector,
    a: &CandidateVector,
    b: &CandidateVector,
    f: f64,
) -> Result<CandidateVector, DeError> {
    if base.len() != a.len() || base.len() != b.len() {
        return Err(DeError::Dimension(base.len(), a.len().max(b.len())));
    }
    let coords = base
        .coords
        .iter()
        .zip(a.coords.iter().zip(&b.coords))
        .map(|(x, (y, z))| (x + f * (y - z)).clamp(0.0, 1.0))
        .collect();
    Ok(CandidateVector { coords })
}

fn distinct_indices<R: Rng + ?Sized>(np: usize, target: usize, rng: &mut R) -> [usize; 3] {
    let mut picked = [usize::MAX; 3];
    for slot in 0..3 {
        loop {
            let r = rng.gen_range(0..np);
            if r != target && !picked[..slot].contains(&r) {
                picked[slot] = r;
                break;
            }
        }
    }
    picked
}

/// Builds the donor for `target_index` from three other random members.
pub fn mutate<R: Rng + ?Sized>(
    population: &[CandidateVector],
    target_index: usize,
    f: f64,
    rng: &mut R,
) -> Result<CandidateVector, DeError> {
    if population.len() < 4 {
        return Err(DeError::Config(format!(
            "mutation needs at least 4 vectors, population has {}",
            population.len()
        )));
    }
    if target_index >= population.len() {
        return Err(DeError::Config(format!(
            "target index {target_index} outside population of {}",
            population.len()
        )));
    }
    let [r1, r2, r3] = distinct_indices(population.len(), target_index, rng);
    differential_donor(&population[r1], &population[r2], &population[r3], f)
}

/// Binomial crossover with explicit draws: coordinate `j` comes from the donor
/// when `draws[j] ≤ cr` or `j == j_rand`.
pub fn crossover_with(
    target: &CandidateVector,
    donor: &CandidateVector,
    cr: f64,
    j_rand: usize,
    draws: &[f64],
) -> Result<CandidateVector, DeError> {
    if target.len() != donor.len() {
        return Err(DeError::Dimension(target.len(), donor.len()));
    }
    if draws.len() != target.len() {
        return Err(DeError::Dimension(target.len(), draws.len()));
    }
    let coords = (0..target.len())
        .map(|j| {
            if draws[j] <= cr || j == j_rand {
                donor.coords[j]
            } else {
                target.coords[j]
            }
        })
        .collect();
    Ok(CandidateVector { coords })
}

/// Binomial crossover. Draws lie in `(0, 1]`, so `cr = 1` copies the whole
/// donor and `cr = 0` copies only `j_rand`.
pub fn crossover<R: Rng + ?Sized>(
    target: &CandidateVector,
    donor: &CandidateVector,
    cr: f64,
    rng: &mut R,
) -> Result<CandidateVector, DeError> {
    if target.len() != donor.len() {
        return Err(DeError::Dimension(target.len(), donor.len()));
    }
    if target.is_empty() {
        return Ok(target.clone());
    }
    let j_rand = rng.gen_range(0..target.len());
    let draws: Vec<f64> = (0..target.len()).map(|_| 1.0 - rng.gen::<f64>()).collect();
    crossover_with(target, donor, cr, j_rand, &draws)
}

/// The trial replaces the target when it is at least as good.
pub fn trial_survives(f_target: FitnessValue, f_trial: FitnessValue) -> bool {
    f_trial.value <= f_target.value
}

pub fn select<'a>(
    target: &'a CandidateVector,
    trial: &'a CandidateVector,
    f_target: FitnessValue,
    f_trial: FitnessValue,
) -> &'a CandidateVector {
    if trial_survives(f_target, f_trial) {
        trial
    } else {
        target
    }
}

/// Stepwise solver state, for callers that want to observe generations.
pub struct DifferentialEvolution<'p> {
    config: SolverConfig,
    problem: &'p DeficitProblem,
    rng: ChaCha8Rng,
    population: Vec<CandidateVector>,
    fitness: Vec<FitnessValue>,
    archive: FeasibleArchive,
    evaluations: u64,
    hits: u64,
    generations: u64,
    terminated: Option<TerminatedBy>,
}

impl<'p> DifferentialEvolution<'p> {
    /// Validates inputs, draws the initial population and evaluates it.
    pub fn new(config: SolverConfig, problem: &'p DeficitProblem) -> Result<Self, DeError> {
        config.validate()?;
        problem.ensure_solvable()?;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let population = initialize_population(&config, problem.dimension(), &mut rng);
        let mut solver = Self {
            fitness: Vec::with_capacity(population.len()),
            population: Vec::with_capacity(population.len()),
            config,
            problem,
            rng,
            archive: FeasibleArchive::new(),
            evaluations: 0,
            hits: 0,
            generations: 0,
            terminated: None,
        };
        for member in population {
            // members left unevaluated after an early stop are never used again
            let f = if solver.terminated.is_none() {
                solver.evaluate(&member)
            } else {
                FitnessValue::new(Deciseconds(u64::MAX))
            };
            solver.population.push(member);
            solver.fitness.push(f);
        }
        solver.check_budget();
        Ok(solver)
    }

    fn evaluate(&mut self, x: &CandidateVector) -> FitnessValue {
        let plan = self.problem.map_unchecked(&x.coords);
        let f = self.problem.fitness(&plan);
        self.evaluations += 1;
        if f.feasible {
            self.hits += 1;
            self.archive.insert(plan);
            if self.hits >= self.config.feasible_hits_to_stop {
                self.terminated = Some(TerminatedBy::FeasibleQuota);
            }
        }
        f
    }

    fn check_budget(&mut self) {
        if self.terminated.is_none()
            && self.evaluations + self.config.population_size as u64 > self.config.max_evaluations
        {
            self.terminated = Some(TerminatedBy::EvaluationBudget);
        }
    }

    /// Runs one generation. Returns the termination reason once the run is over.
    pub fn step(&mut self) -> Option<TerminatedBy> {
        if self.terminated.is_some() {
            return self.terminated;
        }
        let np = self.population.len();
        let mut next = self.population.clone();
        let mut next_fitness = self.fitness.clone();
        for i in 0..np {
            let donor = mutate(&self.population, i, self.config.scale_factor, &mut self.rng)
                .expect("population validated at construction");
            let trial = crossover(
                &self.population[i],
                &donor,
                self.config.crossover_rate,
                &mut self.rng,
            )
            .expect("dimensions fixed by the problem");
            let f_trial = self.evaluate(&trial);
            if trial_survives(self.fitness[i], f_trial) {
                next[i] = trial;
                next_fitness[i] = f_trial;
            }
            if self.terminated.is_some() {
                break;
            }
        }
        self.population = next;
        self.fitness = next_fitness;
        self.generations += 1;
        self.check_budget();
        self.terminated
    }

    pub fn run_to_end(&mut self) -> TerminatedBy {
        loop {
            if let Some(reason) = self.step() {
                return reason;
            }
        }
    }

    pub fn population(&self) -> &[CandidateVector] {
        &self.population
    }

    pub fn fitness(&self) -> &[FitnessValue] {
        &self.fitness
    }

    fn best_index(&self) -> usize {
        self.fitness
            .iter()
            .enumerate()
            .min_by_key(|(_, f)| f.value)
            .map(|(i, _)| i)
            .expect("population is never empty")
    }

    pub fn best_fitness(&self) -> FitnessValue {
        self.fitness[self.best_index()]
    }

    pub fn archive(&self) -> &FeasibleArchive {
        &self.archive
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn feasible_hits(&self) -> u64 {
        self.hits
    }

    pub fn generations(&self) -> u64 {
        self.generations
    }

    pub fn into_result(self) -> RunResult {
        let best = self.best_index();
        RunResult {
            best_fitness: self.fitness[best],
            best_plan: self.problem.map_unchecked(&self.population[best].coords),
            archive: self.archive,
            evaluations_used: self.evaluations,
            feasible_hits: self.hits,
            generations: self.generations,
            terminated_by: self.terminated.unwrap_or(TerminatedBy::EvaluationBudget),
        }
    }
}

/// Runs the solver to termination. The result depends only on `config` and `problem`.
pub fn run(config: &SolverConfig, problem: &DeficitProblem) -> Result<RunResult, DeError> {
    let mut solver = DifferentialEvolution::new(config.clone(), problem)?;
    solver.run_to_end();
    Ok(solver.into_result())
}

/// Independent runs for every seed in `seeds`, spread over threads and
/// returned in seed order.
pub fn run_batch(
    config: &SolverConfig,
    problem: &DeficitProblem,
    seeds: Range<u64>,
) -> Result<Vec<(u64, RunResult)>, DeError> {
    config.validate()?;
    problem.ensure_solvable()?;
    let seeds: Vec<u64> = seeds.collect();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(seeds.len().max(1));
    let chunk = seeds.len().div_ceil(workers).max(1);

    let results: Vec<Result<(u64, RunResult), DeError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&seed| {
                            run(&config.clone().with_seed(seed), problem).map(|r| (seed, r))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// Union of archives, deduplicated, in the order the runs are given.
pub fn merge_archives<'a, I>(runs: I) -> FeasibleArchive
where
    I: IntoIterator<Item = &'a RunResult>,
{
    let mut merged = FeasibleArchive::new();
    for result in runs {
        merged.extend(result.archive.plans().iter().cloned());
    }
    merged
}

/// Machine-readable summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub strategy: String,
    pub np: usize,
    pub f: f64,
    pub cr: f64,
    pub seed: u64,
    pub evaluations: u64,
    pub feasible_hits: u64,
    pub terminated_by: TerminatedBy,
    pub plans: Vec<PlanRecord>,
}

impl RunReport {
    pub fn new(config: &SolverConfig, problem: &DeficitProblem, result: &RunResult) -> Self {
        Self {
            strategy: STRATEGY_NAME.to_string(),
            np: config.population_size,
            f: config.scale_factor,
            cr: config.crossover_rate,
            seed: config.seed,
            evaluations: result.evaluations_used,
            feasible_hits: result.feasible_hits,
            terminated_by: result.terminated_by,
            plans: result
                .archive
                .plans()
                .iter()
                .map(|p| PlanRecord::new(p, problem))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(v: &[f64]) -> CandidateVector {
        CandidateVector::new(v.to_vec()).unwrap()
    }

    fn fv(v: u64) -> FitnessValue {
        FitnessValue::new(Deciseconds(v))
    }

    fn toy() -> DeficitProblem {
        DeficitProblem::new(
            Deciseconds(30),
            vec![Deciseconds(20), Deciseconds(40), Deciseconds(0)],
        )
        .unwrap()
    }

    #[test]
    fn strategy() {
        assert_eq!(strategy_name(), "DE/rand/1/bin");
        assert_eq!(strategy_name(), strategy_name());
    }

    #[test]
    fn initialization_is_seeded() {
        let config = SolverConfig {
            population_size: 4,
            ..SolverConfig::default()
        };
        let a = initialize_population(&config, 2, &mut ChaCha8Rng::seed_from_u64(7));
        let b = initialize_population(&config, 2, &mut ChaCha8Rng::seed_from_u64(7));
        let c = initialize_population(&config, 2, &mut ChaCha8Rng::seed_from_u64(8));
        assert_eq!(a.len(), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a
            .iter()
            .all(|v| v.len() == 2 && v.coords().iter().all(|x| (0.0..=1.0).contains(x))));
    }

    #[test]
    fn donor_examples() {
        let d = differential_donor(&cv(&[0.2]), &cv(&[0.5]), &cv(&[0.1]), 0.5).unwrap();
        assert!((d.coords()[0] - 0.4).abs() < 1e-12);
        let d = differential_donor(&cv(&[0.9]), &cv(&[0.9]), &cv(&[0.1]), 0.5).unwrap();
        assert_eq!(d.coords()[0], 1.0);
        let d = differential_donor(&cv(&[0.1]), &cv(&[0.1]), &cv(&[0.9]), 0.5).unwrap();
        assert_eq!(d.coords()[0], 0.0);
        let base = cv(&[0.3, 0.7]);
        let d = differential_donor(&base, &cv(&[0.9, 0.0]), &cv(&[0.1, 1.0]), 0.0).unwrap();
        assert_eq!(d, base);
    }

    #[test]
    fn mutate_uses_other_members() {
        // only members 1..=3 differ from the target, so the donor is built from them
        let pop = vec![cv(&[0.0]), cv(&[0.5]), cv(&[0.5]), cv(&[0.5])];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = mutate(&pop, 0, 0.5, &mut rng).unwrap();
            assert_eq!(d.coords()[0], 0.5);
        }
        assert!(matches!(
            mutate(&pop[..3], 0, 0.5, &mut rng),
            Err(DeError::Config(_))
        ));
    }

    #[test]
    fn distinct_indices_exclude_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let [a, b, c] = distinct_indices(4, 2, &mut rng);
            assert!(a != b && b != c && a != c);
            assert!(![a, b, c].contains(&2));
        }
    }

    #[test]
    fn crossover_rates() {
        let target = cv(&[0.1, 0.2, 0.3, 0.4]);
        let donor = cv(&[0.9, 0.8, 0.7, 0.6]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(crossover(&target, &donor, 1.0, &mut rng).unwrap(), donor);
        for _ in 0..100 {
            let t = crossover(&target, &donor, 0.0, &mut rng).unwrap();
            let from_donor = (0..4)
                .filter(|&j| t.coords()[j] == donor.coords()[j])
                .count();
            assert_eq!(from_donor, 1);
        }
        let t = crossover_with(&target, &donor, 0.0, 2, &[0.5; 4]).unwrap();
        assert_eq!(t.coords(), &[0.1, 0.2, 0.7, 0.4]);
        let t = crossover_with(&target, &donor, 0.5, 0, &[0.9, 0.5, 0.51, 0.1]).unwrap();
        assert_eq!(t.coords(), &[0.9, 0.8, 0.3, 0.6]);
        let one = crossover(&cv(&[0.1]), &cv(&[0.8]), 0.0, &mut rng).unwrap();
        assert_eq!(one.coords(), &[0.8]);
        assert!(matches!(
            crossover(&target, &cv(&[0.5]), 0.5, &mut rng),
            Err(DeError::Dimension(4, 1))
        ));
    }

    #[test]
    fn selection_accepts_ties() {
        let target = cv(&[0.1]);
        let trial = cv(&[0.2]);
        assert_eq!(select(&target, &trial, fv(5), fv(0)), &trial);
        assert_eq!(select(&target, &trial, fv(5), fv(5)), &trial);
        assert_eq!(select(&target, &trial, fv(5), fv(6)), &target);
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        let bad = [
            SolverConfig {
                population_size: 3,
                ..ok.clone()
            },
            SolverConfig {
                scale_factor: 0.0,
                ..ok.clone()
            },
            SolverConfig {
                scale_factor: 2.5,
                ..ok.clone()
            },
            SolverConfig {
                crossover_rate: 1.1,
                ..ok.clone()
            },
            SolverConfig {
                crossover_rate: f64::NAN,
                ..ok.clone()
            },
            SolverConfig {
                max_evaluations: 99,
                ..ok.clone()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(DeError::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn refuses_unsolvable() {
        let p =
            DeficitProblem::new(Deciseconds(61), vec![Deciseconds(20), Deciseconds(40)]).unwrap();
        assert!(matches!(
            run(&SolverConfig::default(), &p),
            Err(DeError::Problem(ProblemError::Unsolvable { .. }))
        ));
    }

    #[test]
    fn zero_target_hits_immediately() {
        let p = DeficitProblem::new(Deciseconds(0), vec![Deciseconds(0), Deciseconds(0)]).unwrap();
        let r = run(&SolverConfig::default(), &p).unwrap();
        assert_eq!(r.terminated_by, TerminatedBy::FeasibleQuota);
        assert_eq!(r.evaluations_used, 100);
        assert_eq!(r.feasible_hits, 100);
        assert_eq!(r.archive.plans(), &[SavingsPlan::zeros(2)]);
        assert!(r.best_fitness.feasible);
    }

    #[test]
    fn budget_stops_on_generation_boundary() {
        let p = toy();
        let config = SolverConfig {
            population_size: 10,
            max_evaluations: 255,
            feasible_hits_to_stop: u64::MAX,
            ..SolverConfig::default()
        };
        let r = run(&config, &p).unwrap();
        assert_eq!(r.terminated_by, TerminatedBy::EvaluationBudget);
        assert_eq!(r.evaluations_used, 250);
        assert_eq!(r.generations, 24);
    }

    #[test]
    fn toy_archive_is_sound() {
        let p = toy();
        let r = run(&SolverConfig::default().with_seed(1), &p).unwrap();
        assert!(r.feasible_hits as usize >= r.archive.len());
        for plan in r.archive.plans() {
            assert_eq!(plan.total(), Deciseconds(30));
            assert_eq!(plan.savings[2], Deciseconds(0));
            assert!(p.validate_plan(plan).is_ok());
        }
    }

    #[test]
    fn batch_matches_sequential_runs() {
        let p = toy();
        let config = SolverConfig::default();
        let batch = run_batch(&config, &p, 0..6).unwrap();
        assert_eq!(
            batch.iter().map(|(s, _)| *s).collect::<Vec<_>>(),
            (0..6).collect::<Vec<_>>()
        );
        for (seed, result) in &batch {
            assert_eq!(result, &run(&config.clone().with_seed(*seed), &p).unwrap());
        }
        let merged = merge_archives(batch.iter().map(|(_, r)| r));
        let first = &batch[0].1.archive;
        assert_eq!(&merged.plans()[..first.len()], first.plans());
    }

    #[test]
    fn archive_deduplicates() {
        let mut a = FeasibleArchive::new();
        assert!(a.insert(SavingsPlan::zeros(2)));
        assert!(!a.insert(SavingsPlan::zeros(2)));
        assert!(a.insert(SavingsPlan::new(vec![Deciseconds(1), Deciseconds(0)])));
        assert_eq!(a.len(), 2);
    }

    proptest! {
        #[test]
        fn donor_stays_in_unit_box(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 5), 3),
            f in 0.0f64..=2.0,
        ) {
            let d = differential_donor(&cv(&rows[0]), &cv(&rows[1]), &cv(&rows[2]), f).unwrap();
            prop_assert!(d.coords().iter().all(|x| (0.0..=1.0).contains(x)));
        }

        #[test]
        fn crossover_takes_a_donor_coordinate(
            target in prop::collection::vec(0.0f64..0.5, 1..10),
            cr in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let donor: Vec<f64> = target.iter().map(|x| x + 0.5).collect();
            let (t, d) = (cv(&target), cv(&donor));
            let trial = crossover(&t, &d, cr, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_ne!(&trial, &t);
            prop_assert!(trial.coords().iter().zip(&donor).any(|(a, b)| a == b));
        }
    }
}
