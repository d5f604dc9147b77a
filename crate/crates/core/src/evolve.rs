//! Evolutionary loops: the elitist 1+λ EA and a generational GA.
//!
//! Both loops count fitness evaluations against a budget and emit one
//! [`RunRecord`] per generation. Offspring are built from per-slot random
//! streams, so a run is reproducible whether or not evaluation is parallel.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossover::{crossover, CrossoverContext, CrossoverOperator};
use crate::decode::{decode, DecodeSettings};
use crate::error::{Error, Result};
use crate::functions::FunctionSet;
use crate::genome::{Genome, Mode};
use crate::mutate::{mutate, MutationParams};
use crate::rng::stream;

/// Fitness recorded for an individual whose evaluation failed.
pub const WORST_FITNESS: f64 = f64::NEG_INFINITY;

/// A maximized objective over genomes.
pub trait Fitness: Sync {
    fn n_inputs(&self) -> usize;
    fn n_outputs(&self) -> usize;
    fn evaluate(&self, genome: &Genome) -> Result<f64>;
}

impl<F: Fitness + ?Sized> Fitness for &F {
    fn n_inputs(&self) -> usize {
        (**self).n_inputs()
    }
    fn n_outputs(&self) -> usize {
        (**self).n_outputs()
    }
    fn evaluate(&self, genome: &Genome) -> Result<f64> {
        (**self).evaluate(genome)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[serde(alias = "1+lambda", alias = "ea")]
    OnePlusLambda,
    Ga,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvoParams {
    pub algorithm: Algorithm,
    pub mode: Mode,
    /// Node count of freshly initialized genomes.
    pub n_nodes: usize,
    pub lambda: usize,
    pub ga_population: usize,
    pub ga_elitism: f64,
    pub ga_crossover: f64,
    pub ga_mutation: f64,
    pub tournament_size: usize,
    pub mutation: MutationParams,
    pub crossover: CrossoverOperator,
    pub decode: DecodeSettings,
    /// Maximum number of fitness evaluations.
    pub budget: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for EvoParams {
    fn default() -> Self {
        EvoParams {
            algorithm: Algorithm::OnePlusLambda,
            mode: Mode::Cgp,
            n_nodes: 40,
            lambda: 4,
            ga_population: 50,
            ga_elitism: 0.1,
            ga_crossover: 0.2,
            ga_mutation: 0.7,
            tournament_size: 3,
            mutation: MutationParams::default(),
            crossover: CrossoverOperator::SinglePoint,
            decode: DecodeSettings::default(),
            budget: 20_000,
            seed: 0,
            parallel: true,
        }
    }
}

/// Per-generation statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub generation: usize,
    pub evaluations: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_active_nodes: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Genome,
    pub best_fitness: f64,
    pub log: Vec<RunRecord>,
}

/// How a GA generation fills its `P` slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaSlots {
    pub elites: usize,
    pub crossover: usize,
    pub mutation: usize,
    pub copies: usize,
}

impl GaSlots {
    /// Rounds each fraction of `P`; on overflow mutation is cut first, then
    /// crossover. Elites are always kept.
    pub fn new(params: &EvoParams) -> GaSlots {
        let p = params.ga_population;
        let round = |f: f64| (f * p as f64).round() as usize;
        let elites = round(params.ga_elitism).min(p);
        let rest = p - elites;
        let crossover = round(params.ga_crossover).min(rest);
        let mutation = round(params.ga_mutation).min(rest - crossover);
        GaSlots {
            elites,
            crossover,
            mutation,
            copies: rest - crossover - mutation,
        }
    }

    pub fn new_individuals(&self) -> usize {
        self.crossover + self.mutation
    }
}

/// Evaluates every genome, preserving order. Failed or non-finite
/// evaluations become [`WORST_FITNESS`].
pub fn evaluate_population<F: Fitness + ?Sized>(genomes: &[Genome], fitness: &F, parallel: bool) -> Vec<f64> {
    let eval = |(i, g): (usize, &Genome)| match fitness.evaluate(g) {
        Ok(v) if !v.is_nan() => v,
        Ok(v) => {
            log::warn!("individual {i} produced fitness {v}; recorded as worst");
            WORST_FITNESS
        }
        Err(e) => {
            log::warn!("individual {i} failed evaluation: {e}");
            WORST_FITNESS
        }
    };
    if parallel {
        genomes.par_iter().enumerate().map(eval).collect()
    } else {
        genomes.iter().enumerate().map(eval).collect()
    }
}

fn check_params<F: Fitness + ?Sized>(fitness: &F, params: &EvoParams) -> Result<()> {
    if fitness.n_inputs() == 0 || fitness.n_outputs() == 0 {
        return Err(Error::Config("fitness function has no inputs or outputs".into()));
    }
    if !params.mutation.operator.supports(params.mode) {
        return Err(Error::Config(format!(
            "mutation `{}` requires PCGP",
            params.mutation.operator.name()
        )));
    }
    params.decode.validate(params.mode)?;
    let b = params.mutation.bounds;
    if b.min > b.max {
        return Err(Error::Config(format!("size_min {} > size_max {}", b.min, b.max)));
    }
    if params.n_nodes > b.max {
        return Err(Error::Config(format!(
            "initial node count {} exceeds size_max {}",
            params.n_nodes, b.max
        )));
    }
    match params.algorithm {
        Algorithm::OnePlusLambda => {
            if params.lambda == 0 {
                return Err(Error::Config("lambda must be at least 1".into()));
            }
            if params.budget < params.lambda + 1 {
                return Err(Error::Config(format!(
                    "budget {} below lambda + 1 = {}",
                    params.budget,
                    params.lambda + 1
                )));
            }
        }
        Algorithm::Ga => {
            if !params.crossover.supports(params.mode) {
                return Err(Error::Config(format!(
                    "crossover `{}` requires PCGP",
                    params.crossover.name()
                )));
            }
            if params.ga_population < 2 {
                return Err(Error::Config("GA population must be at least 2".into()));
            }
            if params.budget < params.ga_population {
                return Err(Error::Config(format!(
                    "budget {} below population {}",
                    params.budget, params.ga_population
                )));
            }
            if params.tournament_size == 0 {
                return Err(Error::Config("tournament size must be at least 1".into()));
            }
            if GaSlots::new(params).new_individuals() == 0 {
                return Err(Error::Config("GA produces no new individuals per generation".into()));
            }
        }
    }
    Ok(())
}

fn active_nodes(g: &Genome, params: &EvoParams, functions: &FunctionSet) -> usize {
    decode(g, &params.decode, functions).map_or(0, |d| d.n_active())
}

fn mean_finite(values: &[f64]) -> f64 {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        WORST_FITNESS
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

/// First index holding the maximum fitness.
fn best_index(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, f) in fitness.iter().enumerate() {
        if *f > fitness[best] {
            best = i;
        }
    }
    best
}

fn build<T, F>(count: usize, parallel: bool, make: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if parallel {
        (0..count).into_par_iter().map(&make).collect()
    } else {
        (0..count).map(make).collect()
    }
}

/// Runs the algorithm selected in `params`.
pub fn run<F: Fitness + ?Sized>(
    fitness: &F,
    params: &EvoParams,
    functions: &FunctionSet,
    on_record: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult> {
    match params.algorithm {
        Algorithm::OnePlusLambda => one_plus_lambda(fitness, params, functions, on_record),
        Algorithm::Ga => ga(fitness, params, functions, on_record),
    }
}

/// Elitist 1+λ EA. The best offspring replaces the parent whenever its
/// fitness is at least the parent's, which allows neutral drift.
pub fn one_plus_lambda<F: Fitness + ?Sized>(
    fitness: &F,
    params: &EvoParams,
    functions: &FunctionSet,
    on_record: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult> {
    let params = EvoParams {
        algorithm: Algorithm::OnePlusLambda,
        ..params.clone()
    };
    check_params(fitness, &params)?;
    let (n_in, n_out) = (fitness.n_inputs(), fitness.n_outputs());
    let mut parent = Genome::random(params.mode, n_in, n_out, params.n_nodes, &mut stream(params.seed, 0, 0))?;
    let mut parent_fit = evaluate_population(std::slice::from_ref(&parent), fitness, false)[0];
    let mut evaluations = 1;
    let mut log = Vec::new();
    let mut emit = |record: RunRecord, log: &mut Vec<RunRecord>| {
        on_record(&record);
        log.push(record);
    };
    emit(
        RunRecord {
            generation: 0,
            evaluations,
            best_fitness: parent_fit,
            mean_fitness: parent_fit,
            best_active_nodes: active_nodes(&parent, &params, functions),
        },
        &mut log,
    );

    let mut generation = 0;
    while evaluations < params.budget {
        generation += 1;
        let children = build(params.lambda, params.parallel, |slot| {
            let mut rng = stream(params.seed, generation as u64, slot as u64);
            mutate(&parent, &params.mutation, &params.decode, functions, &mut rng)
        })?;
        let scores = evaluate_population(&children, fitness, params.parallel);
        evaluations += children.len();
        let best = best_index(&scores);
        if scores[best] >= parent_fit {
            parent = children[best].clone();
            parent_fit = scores[best];
        }
        emit(
            RunRecord {
                generation,
                evaluations,
                best_fitness: parent_fit,
                mean_fitness: mean_finite(&scores),
                best_active_nodes: active_nodes(&parent, &params, functions),
            },
            &mut log,
        );
    }
    Ok(RunResult {
        best: parent,
        best_fitness: parent_fit,
        log,
    })
}

/// Tournament of `size` entrants drawn with replacement; ties among the
/// best are broken uniformly.
pub fn tournament<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let entrants: Vec<usize> = (0..size).map(|_| rng.gen_range(0..fitness.len())).collect();
    let top = entrants
        .iter()
        .map(|&i| fitness[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = entrants.into_iter().filter(|&i| fitness[i] == top).collect();
    tied[rng.gen_range(0..tied.len())]
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Cross(usize, usize),
    Mutate(usize),
}

/// Generational GA with elitism, crossover, mutation and unmodified
/// tournament winners filling any remaining slots.
pub fn ga<F: Fitness + ?Sized>(
    fitness: &F,
    params: &EvoParams,
    functions: &FunctionSet,
    on_record: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult> {
    let params = EvoParams {
        algorithm: Algorithm::Ga,
        ..params.clone()
    };
    check_params(fitness, &params)?;
    let (n_in, n_out) = (fitness.n_inputs(), fitness.n_outputs());
    let size = params.ga_population;
    let slots = GaSlots::new(&params);
    let ctx = CrossoverContext {
        settings: &params.decode,
        functions,
        size_max: params.mutation.bounds.max,
    };

    let mut population = build(size, params.parallel, |slot| {
        Genome::random(params.mode, n_in, n_out, params.n_nodes, &mut stream(params.seed, 0, slot as u64))
    })?;
    let mut scores = evaluate_population(&population, fitness, params.parallel);
    let mut evaluations = size;
    let mut log = Vec::new();
    let mut emit = |population: &[Genome], scores: &[f64], generation: usize, evaluations: usize, log: &mut Vec<RunRecord>| {
        let best = best_index(scores);
        let record = RunRecord {
            generation,
            evaluations,
            best_fitness: scores[best],
            mean_fitness: mean_finite(scores),
            best_active_nodes: active_nodes(&population[best], &params, functions),
        };
        on_record(&record);
        log.push(record);
    };
    emit(&population, &scores, 0, evaluations, &mut log);

    let mut generation = 0;
    while evaluations < params.budget {
        generation += 1;
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

        let mut select = stream(params.seed, generation as u64, u64::MAX);
        let mut jobs = Vec::with_capacity(slots.new_individuals());
        for _ in 0..slots.crossover {
            let a = tournament(&scores, params.tournament_size, &mut select);
            let mut b = tournament(&scores, params.tournament_size, &mut select);
            for _ in 0..100 {
                if b != a {
                    break;
                }
                b = tournament(&scores, params.tournament_size, &mut select);
            }
            jobs.push(Job::Cross(a, b));
        }
        for _ in 0..slots.mutation {
            jobs.push(Job::Mutate(tournament(&scores, params.tournament_size, &mut select)));
        }
        let copies: Vec<usize> = (0..slots.copies)
            .map(|_| tournament(&scores, params.tournament_size, &mut select))
            .collect();

        let children = build(jobs.len(), params.parallel, |slot| {
            let mut rng = stream(params.seed, generation as u64, slot as u64);
            match jobs[slot] {
                Job::Cross(a, b) => crossover(params.crossover, &population[a], &population[b], &ctx, &mut rng),
                Job::Mutate(a) => mutate(&population[a], &params.mutation, &params.decode, functions, &mut rng),
            }
        })?;
        let child_scores = evaluate_population(&children, fitness, params.parallel);
        evaluations += children.len();

        let mut next = Vec::with_capacity(size);
        let mut next_scores = Vec::with_capacity(size);
        for &i in order.iter().take(slots.elites).chain(&copies) {
            next.push(population[i].clone());
            next_scores.push(scores[i]);
        }
        next.extend(children);
        next_scores.extend(child_scores);
        population = next;
        scores = next_scores;
        emit(&population, &scores, generation, evaluations, &mut log);
    }
    let best = best_index(&scores);
    Ok(RunResult {
        best: population.swap_remove(best),
        best_fitness: scores[best],
        log,
    })
}
