//! Run configuration: one flat JSON document, range validation, `key=value`
//! overrides and the bundled presets.
//!
//! Absent fields take the documented defaults, so a preset only lists the
//! values it pins.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::crossover::CrossoverOperator;
use crate::decode::DecodeSettings;
use crate::error::{Error, Result};
use crate::evolve::{Algorithm, EvoParams};
use crate::functions::{FunctionSet, DEFAULT_FUNCTIONS};
use crate::genome::Mode;
use crate::mutate::{MutationOperator, MutationParams, SizeBounds};

pub const LAMBDA_RANGE: (usize, usize) = (1, 10);
/// Sampled population sizes. Validation accepts any integer in the span.
pub const GA_POPULATION_CHOICES: [usize; 9] = [20, 40, 60, 80, 100, 120, 140, 160, 200];
pub const INPUT_START_RANGE: (f64, f64) = (-1.0, -0.1);
pub const RECURRENCY_RANGE: (f64, f64) = (0.0, 1.0);
pub const M_INPUT_RANGE: (f64, f64) = (0.0, 1.0);
pub const M_OUTPUT_RANGE: (f64, f64) = (0.1, 1.0);
pub const M_NODE_RANGE: (f64, f64) = (0.1, 1.0);
pub const M_DELTA_RANGE: (f64, f64) = (0.1, 0.5);
pub const M_MODIFY_RANGE: (f64, f64) = (0.1, 0.9);
pub const GA_ELITISM_RANGE: (f64, f64) = (0.0, 0.8);
pub const GA_CROSSOVER_RANGE: (f64, f64) = (0.1, 1.0);
pub const GA_MUTATION_RANGE: (f64, f64) = (0.1, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// CSV dataset, accuracy.
    Classification,
    /// CSV dataset, negative MSE.
    Regression,
    /// Balancing task, fraction of the episode survived.
    #[serde(alias = "cart_pole", alias = "control")]
    Cartpole,
    /// Built-in `x² + 2x` regression on `[-1, 1]`.
    Symbolic,
}

impl Problem {
    pub const ALL: [Problem; 4] = [Problem::Classification, Problem::Regression, Problem::Cartpole, Problem::Symbolic];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Classification => "classification",
            Problem::Regression => "regression",
            Problem::Cartpole => "cartpole",
            Problem::Symbolic => "symbolic",
        }
    }

    pub fn needs_data(self) -> bool {
        matches!(self, Problem::Classification | Problem::Regression)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub algorithm: Algorithm,
    pub lambda: usize,
    pub ga_population: usize,
    pub ga_elitism: f64,
    pub ga_crossover: f64,
    pub ga_mutation: f64,
    pub tournament_size: usize,
    pub mutation: MutationOperator,
    pub crossover: CrossoverOperator,
    pub recurrency: f64,
    pub input_start: f64,
    pub weights: bool,
    pub m_active: bool,
    pub m_input: f64,
    pub m_output: f64,
    pub m_node: f64,
    pub m_delta: f64,
    pub m_modify: f64,
    pub m_add_inverted: bool,
    pub n_nodes: usize,
    /// Defaults to `round(0.5 · n_nodes)`.
    pub size_min: Option<usize>,
    /// Defaults to `round(1.5 · n_nodes)`.
    pub size_max: Option<usize>,
    pub budget: usize,
    pub seed: u64,
    pub functions: Vec<String>,
    pub problem: Problem,
    /// CSV file for dataset problems, resolved against the working directory.
    pub data: Option<PathBuf>,
    pub episode_len: usize,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mutation = MutationParams::default();
        let evo = EvoParams::default();
        let decode = DecodeSettings::default();
        RunConfig {
            mode: evo.mode,
            algorithm: evo.algorithm,
            lambda: evo.lambda,
            ga_population: evo.ga_population,
            ga_elitism: evo.ga_elitism,
            ga_crossover: evo.ga_crossover,
            ga_mutation: evo.ga_mutation,
            tournament_size: evo.tournament_size,
            mutation: mutation.operator,
            crossover: evo.crossover,
            recurrency: decode.recurrency,
            input_start: decode.input_start,
            weights: decode.weights,
            m_active: mutation.m_active,
            m_input: mutation.m_input,
            m_output: mutation.m_output,
            m_node: mutation.m_node,
            m_delta: mutation.m_delta,
            m_modify: mutation.m_modify,
            m_add_inverted: mutation.m_add_inverted,
            n_nodes: evo.n_nodes,
            size_min: None,
            size_max: None,
            budget: evo.budget,
            seed: evo.seed,
            functions: DEFAULT_FUNCTIONS.iter().map(|s| s.to_string()).collect(),
            problem: Problem::Symbolic,
            data: None,
            episode_len: 500,
            parallel: true,
        }
    }
}

pub const PRESETS: [(&str, &str); 14] = [
    ("e0_c", include_str!("../presets/e0_c.json")),
    ("e0_r", include_str!("../presets/e0_r.json")),
    ("e0_rl", include_str!("../presets/e0_rl.json")),
    ("e1_c", include_str!("../presets/e1_c.json")),
    ("e1_r", include_str!("../presets/e1_r.json")),
    ("e1_rl", include_str!("../presets/e1_rl.json")),
    ("e2_c", include_str!("../presets/e2_c.json")),
    ("e2_r", include_str!("../presets/e2_r.json")),
    ("e2_rl", include_str!("../presets/e2_rl.json")),
    ("e3_c", include_str!("../presets/e3_c.json")),
    ("e3_r", include_str!("../presets/e3_r.json")),
    ("e3_rl", include_str!("../presets/e3_rl.json")),
    ("e4", include_str!("../presets/e4.json")),
    ("e5", include_str!("../presets/e5.json")),
];

fn in_range<T: PartialOrd + std::fmt::Display + Copy>(name: &str, v: T, (lo, hi): (T, T)) -> Result<()> {
    // NaN fails both comparisons
    if v >= lo && v <= hi {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} outside allowed range [{lo}, {hi}]")))
    }
}

/// Parses `value` as JSON, falling back to a bare string.
fn override_value(value: &str) -> Value {
    serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        RunConfig::from_value(serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?)
    }

    pub fn from_value(value: Value) -> Result<RunConfig> {
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    pub fn preset(name: &str) -> Result<RunConfig> {
        let key = name.to_ascii_lowercase().replace('-', "_");
        PRESETS
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, text)| RunConfig::from_json(text))
            .unwrap_or_else(|| {
                Err(Error::Config(format!(
                    "unknown preset `{name}`; known: {}",
                    RunConfig::preset_names().collect::<Vec<_>>().join(", ")
                )))
            })
    }

    /// Applies `key=value` overrides to top-level fields. Values are JSON
    /// literals; anything that does not parse as JSON is taken as a string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<RunConfig> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut doc = serde_json::to_value(self)?;
        let map = doc.as_object_mut().expect("config serializes to an object");
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
            let key = key.trim();
            if !map.contains_key(key) {
                return Err(Error::Config(format!("unknown config field `{key}`")));
            }
            map.insert(key.to_string(), override_value(value.trim()));
        }
        RunConfig::from_value(doc)
    }

    pub fn bounds(&self) -> SizeBounds {
        let around = SizeBounds::around(self.n_nodes);
        SizeBounds {
            min: self.size_min.unwrap_or(around.min),
            max: self.size_max.unwrap_or(around.max),
        }
    }

    pub fn decode_settings(&self) -> DecodeSettings {
        DecodeSettings {
            recurrency: self.recurrency,
            input_start: self.input_start,
            weights: self.weights,
        }
    }

    pub fn mutation_params(&self) -> MutationParams {
        MutationParams {
            operator: self.mutation,
            m_node: self.m_node,
            m_output: self.m_output,
            m_input: self.m_input,
            m_active: self.m_active,
            m_delta: self.m_delta,
            m_modify: self.m_modify,
            m_add_inverted: self.m_add_inverted,
            bounds: self.bounds(),
        }
    }

    pub fn function_set(&self) -> Result<FunctionSet> {
        FunctionSet::from_names(&self.functions)
    }

    pub fn evo_params(&self) -> EvoParams {
        EvoParams {
            algorithm: self.algorithm,
            mode: self.mode,
            n_nodes: self.n_nodes,
            lambda: self.lambda,
            ga_population: self.ga_population,
            ga_elitism: self.ga_elitism,
            ga_crossover: self.ga_crossover,
            ga_mutation: self.ga_mutation,
            tournament_size: self.tournament_size,
            mutation: self.mutation_params(),
            crossover: self.crossover,
            decode: self.decode_settings(),
            budget: self.budget,
            seed: self.seed,
            parallel: self.parallel,
        }
    }

    /// Checks every hyperparameter against its allowed range and the
    /// operators against the genome mode.
    pub fn validate(&self) -> Result<()> {
        in_range("lambda", self.lambda, LAMBDA_RANGE)?;
        in_range(
            "ga_population",
            self.ga_population,
            (GA_POPULATION_CHOICES[0], GA_POPULATION_CHOICES[GA_POPULATION_CHOICES.len() - 1]),
        )?;
        in_range("input_start", self.input_start, INPUT_START_RANGE)?;
        in_range("recurrency", self.recurrency, RECURRENCY_RANGE)?;
        in_range("m_input", self.m_input, M_INPUT_RANGE)?;
        in_range("m_output", self.m_output, M_OUTPUT_RANGE)?;
        in_range("m_node", self.m_node, M_NODE_RANGE)?;
        in_range("m_delta", self.m_delta, M_DELTA_RANGE)?;
        in_range("m_modify", self.m_modify, M_MODIFY_RANGE)?;
        in_range("ga_elitism", self.ga_elitism, GA_ELITISM_RANGE)?;
        in_range("ga_crossover", self.ga_crossover, GA_CROSSOVER_RANGE)?;
        in_range("ga_mutation", self.ga_mutation, GA_MUTATION_RANGE)?;
        if self.tournament_size == 0 {
            return Err(Error::Config("tournament_size must be at least 1".into()));
        }
        if !self.mutation.supports(self.mode) {
            return Err(Error::UnsupportedOperator {
                operator: self.mutation.name(),
                mode: self.mode,
            });
        }
        if self.algorithm == Algorithm::Ga && !self.crossover.supports(self.mode) {
            return Err(Error::UnsupportedOperator {
                operator: self.crossover.name(),
                mode: self.mode,
            });
        }
        let bounds = self.bounds();
        if bounds.min > bounds.max || self.n_nodes > bounds.max {
            return Err(Error::Config(format!(
                "size bounds [{}, {}] must contain n_nodes = {}",
                bounds.min, bounds.max, self.n_nodes
            )));
        }
        let minimum = match self.algorithm {
            Algorithm::OnePlusLambda => self.lambda + 1,
            Algorithm::Ga => self.ga_population,
        };
        if self.budget < minimum {
            return Err(Error::Config(format!(
                "budget {} below one generation ({minimum} evaluations)",
                self.budget
            )));
        }
        if self.problem == Problem::Cartpole && self.episode_len == 0 {
            return Err(Error::Config("episode_len must be positive".into()));
        }
        self.function_set()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for (name, _) in PRESETS {
            let c = RunConfig::preset(name).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn e5_preset() {
        let c = RunConfig::preset("e5").unwrap();
        assert_eq!(c.mode, Mode::Cgp);
        assert_eq!(c.algorithm, Algorithm::Ga);
        assert_eq!(c.crossover, CrossoverOperator::Proportional);
        assert_eq!(c.ga_population, 50);
        assert_eq!(c.recurrency, 0.0);
        assert_eq!((c.ga_elitism, c.ga_crossover, c.ga_mutation), (0.04, 0.5, 1.0));
    }

    #[test]
    fn e1_classification_preset() {
        let c = RunConfig::preset("e1_c").unwrap();
        assert_eq!(c.mode, Mode::Pcgp);
        assert_eq!(c.mutation, MutationOperator::Gene);
        assert_eq!(c.lambda, 6);
        assert_eq!(c.input_start, -0.5);
        assert_eq!(c.problem, Problem::Classification);
    }

    #[test]
    fn rl_presets_use_control_budget() {
        for name in ["e0_rl", "e1_rl", "e2_rl", "e3_rl"] {
            let c = RunConfig::preset(name).unwrap();
            assert_eq!(c.budget, 10_000, "{name}");
            assert_eq!(c.problem, Problem::Cartpole);
        }
        assert_eq!(RunConfig::preset("e4").unwrap().budget, 20_000);
    }

    #[test]
    fn recurrency_out_of_range() {
        let c = RunConfig { recurrency: 1.5, ..RunConfig::default() };
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("recurrency") && e.contains("[0, 1]"), "{e}");
        let nan = RunConfig { m_node: f64::NAN, ..RunConfig::default() };
        assert!(nan.validate().is_err());
    }

    #[test]
    fn pcgp_operators_rejected_for_cgp() {
        let c = RunConfig { algorithm: Algorithm::Ga, crossover: CrossoverOperator::Subgraph, ..RunConfig::default() };
        assert!(matches!(c.validate(), Err(Error::UnsupportedOperator { .. })));
        let ea = RunConfig { crossover: CrossoverOperator::Subgraph, ..RunConfig::default() };
        ea.validate().unwrap();
        let m = RunConfig { mutation: MutationOperator::MixedSubgraph, ..RunConfig::default() };
        assert!(matches!(m.validate(), Err(Error::UnsupportedOperator { .. })));
    }

    #[test]
    fn overrides_patch_top_level_fields() {
        let c = RunConfig::default()
            .with_overrides(&["lambda=7", "mode=pcgp", "crossover=prop", "data=x.csv", "weights=true"])
            .unwrap();
        assert_eq!(c.lambda, 7);
        assert_eq!(c.mode, Mode::Pcgp);
        assert_eq!(c.crossover, CrossoverOperator::Proportional);
        assert_eq!(c.data, Some(PathBuf::from("x.csv")));
        assert!(c.weights);
        assert!(RunConfig::default().with_overrides(&["nonsense=1"]).is_err());
        assert!(RunConfig::default().with_overrides(&["lambda"]).is_err());
        assert!(RunConfig::default().with_overrides(&["lambda=abc"]).is_err());
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(RunConfig::from_json(r#"{"lamda": 3}"#).is_err());
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trip_and_derived_settings() {
        let c = RunConfig { n_nodes: 20, size_max: Some(50), ..RunConfig::preset("e1_rl").unwrap() };
        assert_eq!(RunConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
        assert_eq!(c.bounds(), SizeBounds { min: 10, max: 50 });
        let p = c.evo_params();
        assert_eq!(p.lambda, 8);
        assert_eq!(p.mutation.operator, MutationOperator::MixedNode);
        assert!(p.decode.weights);
        assert_eq!(p.mutation.bounds.max, 50);
    }

    #[test]
    fn unknown_preset_lists_known() {
        let e = RunConfig::preset("e9").unwrap_err().to_string();
        assert!(e.contains("e0_c"));
        assert_eq!(RunConfig::preset("E0-C").unwrap(), RunConfig::preset("e0_c").unwrap());
    }
}
