//! Genome to program-graph decoding.
//!
//! Connection genes are turned into points on the positional axis and
//! snapped to the nearest addressable element (input or computational
//! node). Targets use a unified index space: `0..n_in` are inputs and
//! `n_in + j` is computational node `j`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionSet;
use crate::genome::{Genome, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeSettings {
    /// Recurrency `r` in `[0, 1]`; `0` keeps the graph feedforward.
    pub recurrency: f64,
    /// Start of the PCGP input space, `I_start < 0`. Ignored by CGP.
    pub input_start: f64,
    /// Multiply node outputs by their parameter gene.
    pub weights: bool,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        DecodeSettings {
            recurrency: 0.0,
            input_start: -0.5,
            weights: false,
        }
    }
}

impl DecodeSettings {
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if !(0.0..=1.0).contains(&self.recurrency) {
            return Err(Error::Config(format!(
                "recurrency {} outside [0, 1]",
                self.recurrency
            )));
        }
        if mode == Mode::Pcgp && !(self.input_start >= -1.0 && self.input_start < 0.0) {
            return Err(Error::Config(format!(
                "input_start {} outside [-1, 0)",
                self.input_start
            )));
        }
        Ok(())
    }
}

/// Point on the positional axis that connection gene `x` of a node at
/// `source` refers to.
#[inline]
pub fn connection_position(x: f64, source: f64, settings: &DecodeSettings, mode: Mode) -> f64 {
    let reach = settings.recurrency * (1.0 - source) + source;
    match mode {
        Mode::Cgp => x * reach,
        Mode::Pcgp => x * (reach - settings.input_start) + settings.input_start,
    }
}

/// Point on the positional axis that output gene `o` refers to.
#[inline]
pub fn output_position(o: f64, settings: &DecodeSettings, mode: Mode) -> f64 {
    match mode {
        Mode::Cgp => o,
        Mode::Pcgp => o * (1.0 - settings.input_start) + settings.input_start,
    }
}

/// Orders candidates by distance to `point`, then position, then index.
#[inline]
fn closer(point: f64, a: (usize, f64), b: (usize, f64)) -> Ordering {
    (a.1 - point)
        .abs()
        .total_cmp(&(b.1 - point).abs())
        .then(a.1.total_cmp(&b.1))
        .then(a.0.cmp(&b.0))
}

/// Index of the candidate nearest to `point`. Ties go to the smaller
/// position, then the smaller index.
pub fn snap(point: f64, candidates: &[(usize, f64)]) -> Result<usize> {
    candidates
        .iter()
        .copied()
        .min_by(|a, b| closer(point, *a, *b))
        .map(|c| c.0)
        .ok_or_else(|| Error::Decode("no candidate to snap to".into()))
}

/// Candidates sorted by `(position, index)` for logarithmic snapping.
#[derive(Debug, Clone, Default)]
pub struct Snapper {
    sorted: Vec<(usize, f64)>,
}

impl Snapper {
    pub fn new(candidates: &[(usize, f64)]) -> Snapper {
        let mut sorted = candidates.to_vec();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        Snapper { sorted }
    }

    fn from_sorted(sorted: Vec<(usize, f64)>) -> Snapper {
        debug_assert!(sorted
            .windows(2)
            .all(|w| w[0].1.total_cmp(&w[1].1).then(w[0].0.cmp(&w[1].0)) != Ordering::Greater));
        Snapper { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Nearest candidate among the first `limit` entries.
    pub fn nearest_in_prefix(&self, point: f64, limit: usize) -> Option<(usize, f64)> {
        nearest_sorted(&self.sorted[..limit.min(self.sorted.len())], point)
    }

    pub fn nearest(&self, point: f64) -> Option<(usize, f64)> {
        nearest_sorted(&self.sorted, point)
    }

    /// Number of entries with position strictly below `position`.
    pub fn count_below(&self, position: f64) -> usize {
        self.sorted.partition_point(|c| c.1 < position)
    }
}

fn nearest_sorted(sorted: &[(usize, f64)], point: f64) -> Option<(usize, f64)> {
    if sorted.is_empty() {
        return None;
    }
    let split = sorted.partition_point(|c| c.1 < point);
    let right = sorted.get(split).copied();
    let left = split.checked_sub(1).map(|i| {
        // first entry of the run sharing this position has the smallest index
        let pos = sorted[i].1;
        sorted[sorted.partition_point(|c| c.1 < pos)]
    });
    match (left, right) {
        (Some(l), Some(r)) => Some(if closer(point, l, r) == Ordering::Greater { r } else { l }),
        (l, r) => l.or(r),
    }
}

/// A genome resolved into a concrete program graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedGraph {
    pub n_in: usize,
    /// Per node, both connection targets in the unified index space.
    pub targets: Vec<[usize; 2]>,
    pub output_targets: Vec<usize>,
    /// Per node connection, true when the target is a node at or after the source.
    pub recurrent: Vec<[bool; 2]>,
    pub function_index: Vec<usize>,
    pub arity: Vec<usize>,
    pub active: Vec<bool>,
    /// Weakly connected components over all nodes; each sorted, ordered by first member.
    pub components: Vec<Vec<usize>>,
}

impl DecodedGraph {
    pub fn n_nodes(&self) -> usize {
        self.targets.len()
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    /// Node index behind a unified target, if it is a node.
    #[inline]
    pub fn as_node(&self, target: usize) -> Option<usize> {
        target.checked_sub(self.n_in)
    }

    /// Nodes reachable backward from `output`. With `arity_aware` unset,
    /// both connections of every visited node are followed.
    pub fn output_trace(&self, output: usize, arity_aware: bool) -> BTreeSet<usize> {
        self.trace_from([self.output_targets[output]], arity_aware)
    }

    fn trace_from<I: IntoIterator<Item = usize>>(&self, roots: I, arity_aware: bool) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = roots.into_iter().filter_map(|t| self.as_node(t)).collect();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            let used = if arity_aware { self.arity[n] } else { 2 };
            stack.extend(self.targets[n][..used].iter().filter_map(|&t| self.as_node(t)));
        }
        seen
    }
}

/// Decodes `genome` into a program graph.
pub fn decode(genome: &Genome, settings: &DecodeSettings, functions: &FunctionSet) -> Result<DecodedGraph> {
    let mode = genome.mode();
    let n_in = genome.n_in();
    let n_nodes = genome.n_nodes();
    let positions = genome.positions(settings.input_start);

    let inputs = Snapper::new(&(0..n_in).map(|k| (k, positions[k])).collect::<Vec<_>>());
    // stored node order is already sorted by (position, index)
    let nodes = Snapper::from_sorted((0..n_nodes).map(|j| (n_in + j, positions[n_in + j])).collect());
    let feedforward = settings.recurrency == 0.0;

    let resolve = |point: f64, node_limit: usize| -> Result<usize> {
        let best = match (inputs.nearest(point), nodes.nearest_in_prefix(point, node_limit)) {
            (Some(a), Some(b)) => Some(if closer(point, a, b) == Ordering::Greater { b } else { a }),
            (a, b) => a.or(b),
        };
        best.map(|c| c.0)
            .ok_or_else(|| Error::Decode("no candidate to snap to".into()))
    };

    let mut targets = Vec::with_capacity(n_nodes);
    let mut recurrent = Vec::with_capacity(n_nodes);
    let mut function_index = Vec::with_capacity(n_nodes);
    let mut arity = Vec::with_capacity(n_nodes);
    for (j, node) in genome.nodes().iter().enumerate() {
        let source = positions[n_in + j];
        let limit = if feedforward { nodes.count_below(source) } else { n_nodes };
        let mut t = [0usize; 2];
        let mut rec = [false; 2];
        for (k, gene) in [node.x, node.y].into_iter().enumerate() {
            let target = resolve(connection_position(gene, source, settings, mode), limit)?;
            t[k] = target;
            rec[k] = target >= n_in + j;
        }
        targets.push(t);
        recurrent.push(rec);
        let f = functions.index_of(node.function);
        function_index.push(f);
        arity.push(functions.get(f).arity());
    }

    let output_targets = genome
        .outputs()
        .iter()
        .map(|&o| resolve(output_position(o, settings, mode), n_nodes))
        .collect::<Result<Vec<_>>>()?;

    let mut graph = DecodedGraph {
        n_in,
        targets,
        output_targets,
        recurrent,
        function_index,
        arity,
        active: vec![false; n_nodes],
        components: Vec::new(),
    };
    for n in graph.trace_from(graph.output_targets.clone(), true) {
        graph.active[n] = true;
    }
    graph.components = components(&graph);
    Ok(graph)
}

fn components(graph: &DecodedGraph) -> Vec<Vec<usize>> {
    let n = graph.n_nodes();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (j, t) in graph.targets.iter().enumerate() {
        for &target in t {
            if let Some(k) = graph.as_node(target) {
                let (a, b) = (find(&mut parent, j), find(&mut parent, k));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for j in 0..n {
        let root = find(&mut parent, j);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(j);
    }
    groups
}
