//! Runs configured evolutions and random hyperparameter sweeps, writing
//! plain CSV and JSON artifacts.
//!
//! All output is a function of the configuration and seeds alone. Floats
//! are written in shortest round-trip form.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::bench::{symbolic_dataset, CartPoleTask, Dataset, SupervisedTask, Task};
use crate::config::{Problem, RunConfig};
use crate::crossover::CrossoverOperator;
use crate::error::{Error, Result};
use crate::evolve::{run, Fitness, RunRecord, RunResult, WORST_FITNESS};
use crate::mutate::MutationOperator;
use crate::rng::seeded;

pub const LOG_HEADER: [&str; 5] = ["generation", "evaluations", "best_fitness", "mean_fitness", "best_active_nodes"];

/// Problem data loaded once and shared across runs.
#[derive(Debug, Clone)]
pub enum ProblemData {
    Dataset(Arc<Dataset>),
    Cartpole { episode_len: usize },
}

impl ProblemData {
    pub fn load(cfg: &RunConfig) -> Result<ProblemData> {
        let csv = |task| {
            let path = cfg.data.as_ref().ok_or_else(|| {
                Error::Config(format!("problem `{}` needs a `data` CSV path", cfg.problem.name()))
            })?;
            Ok(ProblemData::Dataset(Arc::new(Dataset::load_csv(path, task)?)))
        };
        match cfg.problem {
            Problem::Classification => csv(Task::Classification),
            Problem::Regression => csv(Task::Regression),
            Problem::Symbolic => Ok(ProblemData::Dataset(Arc::new(symbolic_dataset()))),
            Problem::Cartpole => Ok(ProblemData::Cartpole {
                episode_len: cfg.episode_len,
            }),
        }
    }

    /// Fitness bound to the decode settings and function set of `cfg`.
    pub fn fitness(&self, cfg: &RunConfig) -> Result<Box<dyn Fitness>> {
        let settings = cfg.decode_settings();
        let functions = cfg.function_set()?;
        Ok(match self {
            ProblemData::Dataset(d) => Box::new(SupervisedTask {
                dataset: Arc::clone(d),
                settings,
                functions,
            }),
            ProblemData::Cartpole { episode_len } => Box::new(CartPoleTask {
                settings,
                functions,
                episode_len: *episode_len,
                seed: cfg.seed,
            }),
        })
    }
}

fn record_fields(r: &RunRecord) -> [String; 5] {
    [
        r.generation.to_string(),
        r.evaluations.to_string(),
        r.best_fitness.to_string(),
        r.mean_fitness.to_string(),
        r.best_active_nodes.to_string(),
    ]
}

/// Runs `cfg` on `data`, streaming the log CSV to `log`.
pub fn run_logged<W: Write>(cfg: &RunConfig, data: &ProblemData, log: W) -> Result<RunResult> {
    cfg.validate()?;
    let fitness = data.fitness(cfg)?;
    let functions = cfg.function_set()?;
    let mut writer = csv::Writer::from_writer(log);
    writer.write_record(LOG_HEADER)?;
    let mut failure = None;
    let result = run(fitness.as_ref(), &cfg.evo_params(), &functions, &mut |r| {
        if failure.is_none() {
            failure = writer.write_record(record_fields(r)).err();
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    writer.flush()?;
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub log: PathBuf,
    pub genome: PathBuf,
    pub result: RunResult,
}

/// Writes `<name>.csv` and `<name>.best.json` into `dir`.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path, name: &str) -> Result<RunArtifacts> {
    cfg.validate()?;
    let data = ProblemData::load(cfg)?;
    std::fs::create_dir_all(dir)?;
    let log = dir.join(format!("{name}.csv"));
    let genome = dir.join(format!("{name}.best.json"));
    let file = std::io::BufWriter::new(std::fs::File::create(&log)?);
    let result = run_logged(cfg, &data, file)?;
    std::fs::write(&genome, result.best.to_json() + "\n")?;
    Ok(RunArtifacts { log, genome, result })
}

fn grid<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    // tenths, computed from integers so endpoints are exact
    let (a, b) = ((lo * 10.0).round() as i64, (hi * 10.0).round() as i64);
    rng.gen_range(a..=b) as f64 / 10.0
}

/// Draws every swept hyperparameter uniformly from its allowed range at
/// 0.1 precision. Mode, algorithm, problem, budget and seed come from
/// `base`; operators are restricted to those the mode supports.
pub fn sample_config<R: Rng + ?Sized>(base: &RunConfig, rng: &mut R) -> RunConfig {
    use crate::config::*;
    let mutations: Vec<MutationOperator> =
        MutationOperator::ALL.into_iter().filter(|m| m.supports(base.mode)).collect();
    let crossovers: Vec<CrossoverOperator> =
        CrossoverOperator::ALL.into_iter().filter(|c| c.supports(base.mode)).collect();
    RunConfig {
        mutation: *mutations.choose(rng).expect("gene mutation always applies"),
        crossover: *crossovers.choose(rng).expect("single point always applies"),
        lambda: rng.gen_range(LAMBDA_RANGE.0..=LAMBDA_RANGE.1),
        ga_population: *GA_POPULATION_CHOICES.choose(rng).expect("non-empty"),
        input_start: grid(INPUT_START_RANGE.0, INPUT_START_RANGE.1, rng),
        recurrency: grid(RECURRENCY_RANGE.0, RECURRENCY_RANGE.1, rng),
        weights: rng.gen(),
        m_active: rng.gen(),
        m_input: grid(M_INPUT_RANGE.0, M_INPUT_RANGE.1, rng),
        m_output: grid(M_OUTPUT_RANGE.0, M_OUTPUT_RANGE.1, rng),
        m_node: grid(M_NODE_RANGE.0, M_NODE_RANGE.1, rng),
        m_delta: grid(M_DELTA_RANGE.0, M_DELTA_RANGE.1, rng),
        m_modify: grid(M_MODIFY_RANGE.0, M_MODIFY_RANGE.1, rng),
        ga_elitism: grid(GA_ELITISM_RANGE.0, GA_ELITISM_RANGE.1, rng),
        ga_crossover: grid(GA_CROSSOVER_RANGE.0, GA_CROSSOVER_RANGE.1, rng),
        ga_mutation: grid(GA_MUTATION_RANGE.0, GA_MUTATION_RANGE.1, rng),
        ..base.clone()
    }
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub index: usize,
    pub config: RunConfig,
    pub fitness: f64,
}

pub const SWEEP_HEADER: [&str; 21] = [
    "rank",
    "trial",
    "fitness",
    "mode",
    "algorithm",
    "mutation",
    "crossover",
    "lambda",
    "ga_population",
    "input_start",
    "recurrency",
    "weights",
    "m_active",
    "m_input",
    "m_output",
    "m_node",
    "m_delta",
    "m_modify",
    "ga_elitism",
    "ga_crossover",
    "ga_mutation",
];

/// Samples `n_trials` configurations with `sweep_seed`, runs each with the
/// inner seed of `base`, and returns them ranked by final fitness
/// (descending, ties by trial index). A trial that fails scores
/// [`WORST_FITNESS`].
pub fn sweep(base: &RunConfig, n_trials: usize, sweep_seed: u64) -> Result<Vec<Trial>> {
    base.validate()?;
    let data = ProblemData::load(base)?;
    let mut rng = seeded(sweep_seed);
    let configs: Vec<RunConfig> = (0..n_trials).map(|_| sample_config(base, &mut rng)).collect();
    let mut trials: Vec<Trial> = configs
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| {
            let fitness = match run_logged(&config, &data, std::io::sink()) {
                Ok(r) => r.best_fitness,
                Err(e) => {
                    log::warn!("trial {index} failed: {e}");
                    WORST_FITNESS
                }
            };
            Trial { index, config, fitness }
        })
        .collect();
    trials.sort_by(|a, b| b.fitness.total_cmp(&a.fitness).then(a.index.cmp(&b.index)));
    Ok(trials)
}

pub fn write_sweep<W: Write>(trials: &[Trial], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for (rank, t) in trials.iter().enumerate() {
        let c = &t.config;
        w.write_record([
            (rank + 1).to_string(),
            t.index.to_string(),
            t.fitness.to_string(),
            c.mode.to_string().to_lowercase(),
            serde_json::to_value(c.algorithm)?.as_str().unwrap_or_default().to_string(),
            c.mutation.name().to_string(),
            c.crossover.name().to_string(),
            c.lambda.to_string(),
            c.ga_population.to_string(),
            c.input_start.to_string(),
            c.recurrency.to_string(),
            c.weights.to_string(),
            c.m_active.to_string(),
            c.m_input.to_string(),
            c.m_output.to_string(),
            c.m_node.to_string(),
            c.m_delta.to_string(),
            c.m_modify.to_string(),
            c.ga_elitism.to_string(),
            c.ga_crossover.to_string(),
            c.ga_mutation.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::*;
    use crate::evolve::Algorithm;
    use crate::genome::Mode;

    fn small(seed: u64) -> RunConfig {
        RunConfig {
            n_nodes: 10,
            budget: 200,
            seed,
            ..RunConfig::default()
        }
    }

    fn log_text(cfg: &RunConfig) -> String {
        let mut buf = Vec::new();
        run_logged(cfg, &ProblemData::load(cfg).unwrap(), &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn log_has_fixed_header_and_rows() {
        let text = log_text(&small(1));
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), LOG_HEADER.join(","));
        // 1 + 4·50 = 201 evaluations over 50 generations after the initial one
        assert_eq!(lines.count(), 51);
    }

    #[test]
    fn logs_are_byte_identical_across_parallelism() {
        for algorithm in [Algorithm::OnePlusLambda, Algorithm::Ga] {
            let cfg = RunConfig { algorithm, ga_population: 20, ..small(3) };
            let serial = RunConfig { parallel: false, ..cfg.clone() };
            assert_eq!(log_text(&cfg), log_text(&cfg));
            assert_eq!(log_text(&cfg), log_text(&serial));
        }
        assert_ne!(log_text(&small(3)), log_text(&small(4)));
    }

    #[test]
    fn dataset_problems_need_a_path() {
        let cfg = RunConfig { problem: Problem::Regression, ..small(0) };
        assert!(matches!(ProblemData::load(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn run_to_dir_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let a = run_to_dir(&small(2), dir.path(), "x").unwrap();
        let best = crate::genome::Genome::from_json(&std::fs::read_to_string(&a.genome).unwrap()).unwrap();
        assert_eq!(best, a.result.best);
        assert!(std::fs::read_to_string(&a.log).unwrap().starts_with("generation,"));
    }

    #[test]
    fn invalid_config_stops_before_any_evaluation() {
        let cfg = RunConfig { recurrency: 1.5, ..small(0) };
        let mut buf = Vec::new();
        assert!(run_logged(&cfg, &ProblemData::load(&small(0)).unwrap(), &mut buf).is_err());
        assert!(buf.is_empty());
    }

    #[test]
    fn samples_stay_in_range() {
        let mut rng = seeded(0);
        for mode in [Mode::Cgp, Mode::Pcgp] {
            let base = RunConfig { mode, algorithm: Algorithm::Ga, budget: 20_000, ..RunConfig::default() };
            for _ in 0..500 {
                let c = sample_config(&base, &mut rng);
                c.validate().unwrap();
                assert!(GA_POPULATION_CHOICES.contains(&c.ga_population));
                for v in [c.recurrency, c.m_input, c.m_output, c.m_node, c.m_delta, c.m_modify, c.input_start] {
                    assert_eq!(v, (v * 10.0).round() / 10.0);
                }
            }
        }
    }

    #[test]
    fn sweep_ranking() {
        let base = RunConfig { budget: 60, n_nodes: 8, ..RunConfig::default() };
        let trials = sweep(&base, 6, 9).unwrap();
        assert_eq!(trials.len(), 6);
        assert!(trials.windows(2).all(|w| w[0].fitness >= w[1].fitness));
        assert!(trials.iter().all(|t| t.config.seed == base.seed));
        let mut buf = Vec::new();
        write_sweep(&trials, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().nth(1).unwrap().starts_with("1,"));
    }

    #[test]
    fn empty_sweep_writes_header_only() {
        let trials = sweep(&small(0), 0, 0).unwrap();
        let mut buf = Vec::new();
        write_sweep(&trials, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), SWEEP_HEADER.join(",") + "\n");
    }
}
