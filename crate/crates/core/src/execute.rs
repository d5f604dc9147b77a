//! Program execution with one-step-delayed recurrent reads.
//!
//! Nodes are evaluated in stored order and write into a single value
//! buffer. A connection to an earlier node therefore reads the value from
//! the current step, while a connection to the node itself or to a later
//! node reads what that node produced on the previous step.

use crate::decode::{decode, DecodeSettings, DecodedGraph};
use crate::error::{Error, Result};
use crate::functions::{FunctionSet, Primitive};
use crate::genome::Genome;

/// Which nodes a [`Program`] computes each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    #[default]
    Active,
    All,
}

/// Per-node values carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramState {
    values: Vec<f64>,
}

impl ProgramState {
    pub fn new(n_nodes: usize) -> ProgramState {
        ProgramState {
            values: vec![0.0; n_nodes],
        }
    }

    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    graph: DecodedGraph,
    primitives: Vec<Primitive>,
    params: Vec<f64>,
    order: Vec<usize>,
    weights: bool,
}

impl Program {
    pub fn new(genome: &Genome, settings: &DecodeSettings, functions: &FunctionSet) -> Result<Program> {
        Program::with_scope(genome, settings, functions, Scope::Active)
    }

    pub fn with_scope(
        genome: &Genome,
        settings: &DecodeSettings,
        functions: &FunctionSet,
        scope: Scope,
    ) -> Result<Program> {
        let graph = decode(genome, settings, functions)?;
        Ok(Program::from_graph(graph, genome, settings, functions, scope))
    }

    pub fn from_graph(
        graph: DecodedGraph,
        genome: &Genome,
        settings: &DecodeSettings,
        functions: &FunctionSet,
        scope: Scope,
    ) -> Program {
        let order = (0..graph.n_nodes())
            .filter(|&j| scope == Scope::All || graph.active[j])
            .collect();
        Program {
            primitives: graph.function_index.iter().map(|&f| functions.get(f)).collect(),
            params: genome.nodes().iter().map(|n| n.param).collect(),
            order,
            weights: settings.weights,
            graph,
        }
    }

    pub fn graph(&self) -> &DecodedGraph {
        &self.graph
    }

    pub fn n_inputs(&self) -> usize {
        self.graph.n_in
    }

    pub fn n_outputs(&self) -> usize {
        self.graph.output_targets.len()
    }

    /// Fresh zero-initialized state.
    pub fn state(&self) -> ProgramState {
        ProgramState::new(self.graph.n_nodes())
    }

    /// Advances one step and returns the outputs.
    pub fn step(&self, state: &mut ProgramState, inputs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_outputs()];
        self.step_into(state, inputs, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant of [`Program::step`].
    pub fn step_into(&self, state: &mut ProgramState, inputs: &[f64], out: &mut [f64]) -> Result<()> {
        let n_in = self.graph.n_in;
        if inputs.len() != n_in {
            return Err(Error::InputLength {
                expected: n_in,
                got: inputs.len(),
            });
        }
        if out.len() != self.n_outputs() {
            return Err(Error::Shape(format!(
                "output buffer of {} for {} outputs",
                out.len(),
                self.n_outputs()
            )));
        }
        let values = &mut state.values;
        let read = |values: &[f64], t: usize| if t < n_in { inputs[t] } else { values[t - n_in] };
        for &j in &self.order {
            let [ta, tb] = self.graph.targets[j];
            let param = self.params[j];
            let mut v = self.primitives[j].apply(read(values, ta), read(values, tb), param);
            if self.weights {
                v *= param;
            }
            values[j] = if v.is_finite() { v } else { 0.0 };
        }
        for (o, &t) in out.iter_mut().zip(&self.graph.output_targets) {
            *o = read(values, t);
        }
        Ok(())
    }
}
