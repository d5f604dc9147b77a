//! Crossover operators.
//!
//! `single_point`, `random_node` and `proportional` work on both CGP and
//! PCGP genomes. `aligned_node`, `output_graph` and `subgraph` depend on
//! node positions being carried by the genes and reject CGP parents.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decode::{decode, DecodeSettings};
use crate::error::{Error, Result};
use crate::functions::FunctionSet;
use crate::genome::{Genome, Mode, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverOperator {
    #[serde(alias = "sp")]
    SinglePoint,
    #[serde(alias = "prop")]
    Proportional,
    RandomNode,
    AlignedNode,
    #[serde(alias = "output")]
    OutputGraph,
    Subgraph,
}

impl CrossoverOperator {
    pub const ALL: [CrossoverOperator; 6] = [
        CrossoverOperator::SinglePoint,
        CrossoverOperator::Proportional,
        CrossoverOperator::RandomNode,
        CrossoverOperator::AlignedNode,
        CrossoverOperator::OutputGraph,
        CrossoverOperator::Subgraph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CrossoverOperator::SinglePoint => "single_point",
            CrossoverOperator::Proportional => "proportional",
            CrossoverOperator::RandomNode => "random_node",
            CrossoverOperator::AlignedNode => "aligned_node",
            CrossoverOperator::OutputGraph => "output_graph",
            CrossoverOperator::Subgraph => "subgraph",
        }
    }

    pub fn pcgp_only(self) -> bool {
        matches!(
            self,
            CrossoverOperator::AlignedNode | CrossoverOperator::OutputGraph | CrossoverOperator::Subgraph
        )
    }

    pub fn supports(self, mode: Mode) -> bool {
        !self.pcgp_only() || mode == Mode::Pcgp
    }
}

/// Shared inputs for operators that decode their parents.
#[derive(Debug, Clone, Copy)]
pub struct CrossoverContext<'a> {
    pub settings: &'a DecodeSettings,
    pub functions: &'a FunctionSet,
    pub size_max: usize,
}

fn check_shape(a: &Genome, b: &Genome) -> Result<()> {
    if a.mode() != b.mode() || a.n_in() != b.n_in() || a.n_out() != b.n_out() {
        return Err(Error::Shape(format!(
            "parents differ: {} {}x{} vs {} {}x{}",
            a.mode(),
            a.n_in(),
            a.n_out(),
            b.mode(),
            b.n_in(),
            b.n_out()
        )));
    }
    Ok(())
}

fn require_pcgp(a: &Genome, operator: &'static str) -> Result<()> {
    if a.mode() == Mode::Pcgp {
        Ok(())
    } else {
        Err(Error::UnsupportedOperator {
            operator,
            mode: a.mode(),
        })
    }
}

/// Picks each input and output gene from either parent with probability ½.
fn mix_io<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let outputs = a
        .outputs()
        .iter()
        .zip(b.outputs())
        .map(|(x, y)| if rng.gen_bool(0.5) { *x } else { *y })
        .collect();
    let inputs = a
        .inputs()
        .iter()
        .zip(b.inputs())
        .map(|(x, y)| if rng.gen_bool(0.5) { *x } else { *y })
        .collect();
    (inputs, outputs)
}

fn truncate<R: Rng + ?Sized>(nodes: &mut Vec<Node>, size_max: usize, rng: &mut R) {
    if nodes.len() > size_max {
        let drop: BTreeSet<usize> = index::sample(rng, nodes.len(), nodes.len() - size_max)
            .into_iter()
            .collect();
        let mut i = 0;
        nodes.retain(|_| {
            i += 1;
            !drop.contains(&(i - 1))
        });
    }
}

/// Valid cut offsets: the start of the genome and every node boundary of
/// the shorter parent.
pub fn cut_points(a: &Genome, b: &Genome) -> Vec<usize> {
    let header = a.header_len();
    let node_len = a.mode().node_len();
    let shortest = a.n_nodes().min(b.n_nodes());
    std::iter::once(0)
        .chain((0..=shortest).map(|k| header + k * node_len))
        .collect()
}

pub fn single_point<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome> {
    check_shape(a, b)?;
    let cuts = cut_points(a, b);
    let cut = cuts[rng.gen_range(0..cuts.len())];
    single_point_at(a, b, cut, rng.gen_bool(0.5))
}

/// Child made of one parent's genes before `cut` and the other's after it.
pub fn single_point_at(a: &Genome, b: &Genome, cut: usize, prefix_from_a: bool) -> Result<Genome> {
    check_shape(a, b)?;
    let (head, tail) = if prefix_from_a { (a, b) } else { (b, a) };
    let (head, tail) = (head.to_flat(), tail.to_flat());
    if cut > head.len() || cut > tail.len() {
        return Err(Error::Shape(format!("cut {cut} beyond a parent")));
    }
    let mut flat = head[..cut].to_vec();
    flat.extend_from_slice(&tail[cut..]);
    Genome::from_flat(a.mode(), a.n_in(), a.n_out(), &flat)
}

/// Takes ⌊n_a/2⌋ nodes from `a` and ⌈n_b/2⌉ from `b`, preferring node
/// slots not already taken from `a`.
pub fn random_node<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome> {
    check_shape(a, b)?;
    let (n_a, n_b) = (a.n_nodes(), b.n_nodes());
    let mut from_a: Vec<usize> = index::sample(rng, n_a, n_a / 2).into_vec();
    from_a.sort_unstable();
    let need = n_b.div_ceil(2);
    let taken: BTreeSet<usize> = from_a.iter().copied().collect();
    let free: Vec<usize> = (0..n_b).filter(|i| !taken.contains(i)).collect();
    let mut from_b: Vec<usize> = if free.len() >= need {
        index::sample(rng, free.len(), need).into_iter().map(|i| free[i]).collect()
    } else {
        let overlap: Vec<usize> = (0..n_b).filter(|i| taken.contains(i)).collect();
        let extra = index::sample(rng, overlap.len(), need - free.len());
        free.iter().copied().chain(extra.into_iter().map(|i| overlap[i])).collect()
    };
    from_b.sort_unstable();

    let (inputs, outputs) = mix_io(a, b, rng);
    let nodes = from_a
        .iter()
        .map(|&i| a.nodes()[i])
        .chain(from_b.iter().map(|&i| b.nodes()[i]))
        .collect();
    Genome::new(a.mode(), a.n_in(), a.n_out(), inputs, outputs, nodes)
}

/// Greedy position pairing: each node of the shorter parent, in position
/// order, takes the nearest unpaired node of the other. Returns the pairs
/// `(index in a, index in b)` and the leftover indices of the longer parent.
pub fn align_nodes(a: &Genome, b: &Genome) -> (Vec<(usize, usize)>, Vec<usize>) {
    let swap = a.n_nodes() > b.n_nodes();
    let (short, long) = if swap { (b, a) } else { (a, b) };
    let mut used = vec![false; long.n_nodes()];
    let mut pairs = Vec::with_capacity(short.n_nodes());
    for (i, s) in short.nodes().iter().enumerate() {
        let best = long
            .nodes()
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(j1, n1), (j2, n2)| {
                (n1.position - s.position)
                    .abs()
                    .total_cmp(&(n2.position - s.position).abs())
                    .then(n1.position.total_cmp(&n2.position))
                    .then(j1.cmp(j2))
            })
            .map(|(j, _)| j);
        if let Some(j) = best {
            used[j] = true;
            pairs.push(if swap { (j, i) } else { (i, j) });
        }
    }
    let leftovers = (0..long.n_nodes()).filter(|j| !used[*j]).collect();
    (pairs, leftovers)
}

/// Picks one node from every position-aligned pair; unpaired nodes of the
/// longer parent survive with probability ½. PCGP only.
pub fn aligned_node<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome> {
    check_shape(a, b)?;
    require_pcgp(a, "aligned_node")?;
    let (pairs, leftovers) = align_nodes(a, b);
    let long = if a.n_nodes() > b.n_nodes() { a } else { b };
    let mut nodes: Vec<Node> = pairs
        .iter()
        .map(|&(i, j)| if rng.gen_bool(0.5) { a.nodes()[i] } else { b.nodes()[j] })
        .collect();
    nodes.extend(leftovers.iter().filter(|_| rng.gen_bool(0.5)).map(|&j| long.nodes()[j]));
    let (inputs, outputs) = mix_io(a, b, rng);
    Genome::new(a.mode(), a.n_in(), a.n_out(), inputs, outputs, nodes)
}

pub fn proportional<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome> {
    check_shape(a, b)?;
    let len = a.to_flat().len().min(b.to_flat().len());
    let weights: Vec<f64> = (0..len).map(|_| rng.gen()).collect();
    proportional_with_weights(a, b, &weights)
}

/// `C_i = (1 - w_i) A_i + w_i B_i` over the common prefix; the longer
/// parent's remaining genes are appended.
pub fn proportional_with_weights(a: &Genome, b: &Genome, weights: &[f64]) -> Result<Genome> {
    check_shape(a, b)?;
    let (fa, fb) = (a.to_flat(), b.to_flat());
    let len = fa.len().min(fb.len());
    if weights.len() != len {
        return Err(Error::Shape(format!("{} weights for {} shared genes", weights.len(), len)));
    }
    let mut flat: Vec<f64> = fa
        .iter()
        .zip(&fb)
        .zip(weights)
        .map(|((&x, &y), &w)| {
            if x == y {
                x
            } else {
                ((1.0 - w) * x + w * y).clamp(x.min(y), x.max(y))
            }
        })
        .collect();
    let longer = if fa.len() > fb.len() { &fa } else { &fb };
    flat.extend_from_slice(&longer[len..]);
    Genome::from_flat(a.mode(), a.n_in(), a.n_out(), &flat)
}

/// Inputs referenced directly by `roots` or by either connection of `nodes`.
fn inputs_used(graph: &crate::decode::DecodedGraph, roots: &[usize], nodes: &BTreeSet<usize>) -> BTreeSet<usize> {
    roots
        .iter()
        .copied()
        .chain(nodes.iter().flat_map(|&n| graph.targets[n]))
        .filter(|&t| t < graph.n_in)
        .collect()
}

pub fn output_graph<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    ctx: &CrossoverContext<'_>,
    rng: &mut R,
) -> Result<Genome> {
    check_shape(a, b)?;
    require_pcgp(a, "output_graph")?;
    let from_a: Vec<bool> = (0..a.n_out()).map(|_| rng.gen_bool(0.5)).collect();
    output_graph_with_selection(a, b, ctx, &from_a, rng)
}

/// Output graph crossover with the per-output parent choice given
/// explicitly (`true` = parent `a`).
pub fn output_graph_with_selection<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    ctx: &CrossoverContext<'_>,
    from_a: &[bool],
    rng: &mut R,
) -> Result<Genome> {
    check_shape(a, b)?;
    require_pcgp(a, "output_graph")?;
    if from_a.len() != a.n_out() {
        return Err(Error::Shape(format!("{} selections for {} outputs", from_a.len(), a.n_out())));
    }
    let (ga, gb) = (
        decode(a, ctx.settings, ctx.functions)?,
        decode(b, ctx.settings, ctx.functions)?,
    );
    let mut outputs = Vec::with_capacity(a.n_out());
    let (mut trace_a, mut trace_b) = (BTreeSet::new(), BTreeSet::new());
    let (mut roots_a, mut roots_b) = (Vec::new(), Vec::new());
    for (k, &pick_a) in from_a.iter().enumerate() {
        if pick_a {
            outputs.push(a.outputs()[k]);
            trace_a.extend(ga.output_trace(k, false));
            roots_a.push(ga.output_targets[k]);
        } else {
            outputs.push(b.outputs()[k]);
            trace_b.extend(gb.output_trace(k, false));
            roots_b.push(gb.output_targets[k]);
        }
    }
    let used_a = inputs_used(&ga, &roots_a, &trace_a);
    let used_b = inputs_used(&gb, &roots_b, &trace_b);
    let inputs = (0..a.n_in())
        .map(|k| match (used_a.contains(&k), used_b.contains(&k)) {
            (true, false) => a.inputs()[k],
            (false, true) => b.inputs()[k],
            _ => {
                if rng.gen_bool(0.5) {
                    a.inputs()[k]
                } else {
                    b.inputs()[k]
                }
            }
        })
        .collect();
    let mut nodes: Vec<Node> = trace_a
        .iter()
        .map(|&j| a.nodes()[j])
        .chain(trace_b.iter().map(|&j| b.nodes()[j]))
        .collect();
    truncate(&mut nodes, ctx.size_max, rng);
    Genome::new(a.mode(), a.n_in(), a.n_out(), inputs, outputs, nodes)
}

pub fn subgraph<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    ctx: &CrossoverContext<'_>,
    rng: &mut R,
) -> Result<Genome> {
    check_shape(a, b)?;
    require_pcgp(a, "subgraph")?;
    let (ga, gb) = (
        decode(a, ctx.settings, ctx.functions)?,
        decode(b, ctx.settings, ctx.functions)?,
    );
    let pick_a: Vec<bool> = ga.components.iter().map(|_| rng.gen_bool(0.5)).collect();
    let pick_b: Vec<bool> = gb.components.iter().map(|_| rng.gen_bool(0.5)).collect();
    subgraph_with_selection(a, b, ctx, &pick_a, &pick_b, rng)
}

/// Subgraph crossover with the per-component choice given explicitly, in
/// the order of each parent's decoded components.
pub fn subgraph_with_selection<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    ctx: &CrossoverContext<'_>,
    pick_a: &[bool],
    pick_b: &[bool],
    rng: &mut R,
) -> Result<Genome> {
    check_shape(a, b)?;
    require_pcgp(a, "subgraph")?;
    let (ga, gb) = (
        decode(a, ctx.settings, ctx.functions)?,
        decode(b, ctx.settings, ctx.functions)?,
    );
    if pick_a.len() != ga.components.len() || pick_b.len() != gb.components.len() {
        return Err(Error::Shape("component selection does not match parents".into()));
    }
    let mut chosen_a: Vec<usize> = ga
        .components
        .iter()
        .zip(pick_a)
        .filter(|(_, p)| **p)
        .flat_map(|(c, _)| c.iter().copied())
        .collect();
    let mut chosen_b: Vec<usize> = gb
        .components
        .iter()
        .zip(pick_b)
        .filter(|(_, p)| **p)
        .flat_map(|(c, _)| c.iter().copied())
        .collect();
    chosen_a.sort_unstable();
    chosen_b.sort_unstable();
    let mut nodes: Vec<Node> = chosen_a
        .iter()
        .map(|&j| a.nodes()[j])
        .chain(chosen_b.iter().map(|&j| b.nodes()[j]))
        .collect();
    let (inputs, outputs) = mix_io(a, b, rng);
    truncate(&mut nodes, ctx.size_max, rng);
    Genome::new(a.mode(), a.n_in(), a.n_out(), inputs, outputs, nodes)
}

/// Applies `operator` to two parents.
pub fn crossover<R: Rng + ?Sized>(
    operator: CrossoverOperator,
    a: &Genome,
    b: &Genome,
    ctx: &CrossoverContext<'_>,
    rng: &mut R,
) -> Result<Genome> {
    match operator {
        CrossoverOperator::SinglePoint => single_point(a, b, rng),
        CrossoverOperator::Proportional => proportional(a, b, rng),
        CrossoverOperator::RandomNode => random_node(a, b, rng),
        CrossoverOperator::AlignedNode => aligned_node(a, b, rng),
        CrossoverOperator::OutputGraph => output_graph(a, b, ctx, rng),
        CrossoverOperator::Subgraph => subgraph(a, b, ctx, rng),
    }
}
