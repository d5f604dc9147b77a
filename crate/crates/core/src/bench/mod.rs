//! Fitness functions: CSV-backed classification and regression, a built-in
//! symbolic regression target, and cart-pole balancing.
//!
//! Every fitness is maximized. Recurrent state is reset once per dataset
//! pass or episode, and each call owns its state, so tasks can be evaluated
//! concurrently on distinct genomes.

mod cartpole;
mod dataset;

pub use cartpole::{episode, CartPoleState};
pub use dataset::{ColumnScale, Dataset, Targets, Task};

pub mod physics {
    pub use super::cartpole::{
        ANGLE_LIMIT, CART_MASS, DT, FORCE, GRAVITY, INIT_SPREAD, POLE_HALF_LENGTH, POLE_MASS, POSITION_LIMIT,
    };
}

use std::sync::Arc;

use crate::decode::DecodeSettings;
use crate::error::{Error, Result};
use crate::evolve::Fitness;
use crate::execute::Program;
use crate::functions::FunctionSet;
use crate::genome::Genome;

/// Number of sample points of the built-in symbolic target.
pub const SYMBOLIC_POINTS: usize = 50;

/// `x² + 2x` sampled at evenly spaced points spanning `[-1, 1]`.
pub fn symbolic_dataset() -> Dataset {
    let xs: Vec<f64> = (0..SYMBOLIC_POINTS)
        .map(|i| -1.0 + 2.0 * i as f64 / (SYMBOLIC_POINTS - 1) as f64)
        .collect();
    Dataset::regression(
        xs.iter().map(|&x| vec![x]).collect(),
        xs.iter().map(|&x| vec![x * x + 2.0 * x]).collect(),
    )
    .expect("well-formed")
}

fn check_shape(g: &Genome, n_in: usize, n_out: usize) -> Result<()> {
    if g.n_in() != n_in || g.n_out() != n_out {
        return Err(Error::Config(format!(
            "genome has {} inputs and {} outputs, task needs {n_in} and {n_out}",
            g.n_in(),
            g.n_out()
        )));
    }
    Ok(())
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Accuracy of argmax predictions over one pass in row order.
pub fn classification_fitness(
    g: &Genome,
    d: &Dataset,
    settings: &DecodeSettings,
    functions: &FunctionSet,
) -> Result<f64> {
    let Targets::Classes { labels, .. } = d.targets() else {
        return Err(Error::Config("classification fitness needs class labels".into()));
    };
    if d.is_empty() {
        return Err(Error::Dataset("empty dataset".into()));
    }
    check_shape(g, d.n_features(), d.n_targets())?;
    let program = Program::new(g, settings, functions)?;
    let mut state = program.state();
    let mut out = vec![0.0; program.n_outputs()];
    let mut correct = 0usize;
    for (row, &label) in d.features().iter().zip(labels) {
        program.step_into(&mut state, row, &mut out)?;
        correct += usize::from(argmax(&out) == label);
    }
    Ok(correct as f64 / d.len() as f64)
}

/// Negative mean squared error over every row and output.
pub fn regression_fitness(
    g: &Genome,
    d: &Dataset,
    settings: &DecodeSettings,
    functions: &FunctionSet,
) -> Result<f64> {
    let Targets::Values(targets) = d.targets() else {
        return Err(Error::Config("regression fitness needs real targets".into()));
    };
    if d.is_empty() {
        return Err(Error::Dataset("empty dataset".into()));
    }
    check_shape(g, d.n_features(), d.n_targets())?;
    let program = Program::new(g, settings, functions)?;
    let mut state = program.state();
    let mut out = vec![0.0; program.n_outputs()];
    let mut sum = 0.0;
    for (row, target) in d.features().iter().zip(targets) {
        program.step_into(&mut state, row, &mut out)?;
        sum += out.iter().zip(target).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
    }
    // + 0.0 turns a perfect -0.0 into 0.0
    Ok(-(sum / (d.len() * d.n_targets()) as f64) + 0.0)
}

/// Fraction of `episode_len` steps the pole stays up, from the initial
/// state seeded by `seed`.
pub fn cartpole_fitness(
    g: &Genome,
    settings: &DecodeSettings,
    functions: &FunctionSet,
    episode_len: usize,
    seed: u64,
) -> Result<f64> {
    check_shape(g, 4, 1)?;
    if episode_len == 0 {
        return Err(Error::Config("episode length must be positive".into()));
    }
    let program = Program::new(g, settings, functions)?;
    let mut state = program.state();
    let mut out = [0.0];
    let survived = episode(CartPoleState::initial(seed), episode_len, |obs| {
        program.step_into(&mut state, obs, &mut out)?;
        Ok(out[0])
    })?;
    Ok(survived as f64 / episode_len as f64)
}

/// A dataset task bound to decode settings and a function set.
#[derive(Debug, Clone)]
pub struct SupervisedTask {
    pub dataset: Arc<Dataset>,
    pub settings: DecodeSettings,
    pub functions: FunctionSet,
}

impl Fitness for SupervisedTask {
    fn n_inputs(&self) -> usize {
        self.dataset.n_features()
    }

    fn n_outputs(&self) -> usize {
        self.dataset.n_targets()
    }

    fn evaluate(&self, g: &Genome) -> Result<f64> {
        match self.dataset.task() {
            Task::Classification => classification_fitness(g, &self.dataset, &self.settings, &self.functions),
            Task::Regression => regression_fitness(g, &self.dataset, &self.settings, &self.functions),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CartPoleTask {
    pub settings: DecodeSettings,
    pub functions: FunctionSet,
    pub episode_len: usize,
    pub seed: u64,
}

impl Fitness for CartPoleTask {
    fn n_inputs(&self) -> usize {
        4
    }

    fn n_outputs(&self) -> usize {
        1
    }

    fn evaluate(&self, g: &Genome) -> Result<f64> {
        cartpole_fitness(g, &self.settings, &self.functions, self.episode_len, self.seed)
    }
}
