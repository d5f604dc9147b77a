//! Mutation operators.
//!
//! Three operators are exposed through [`MutationOperator`]: plain gene
//! mutation, mixed node mutation (gene mutation, node addition or node
//! deletion) and mixed subgraph mutation (gene mutation, subgraph addition
//! or subgraph deletion, PCGP only). Size bounds are enforced by
//! truncating additions and deletions, so an operator always succeeds.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decode::{decode, DecodeSettings};
use crate::error::{Error, Result};
use crate::functions::FunctionSet;
use crate::genome::{Genome, Mode, Node};

/// Retry cap for active-gene mutation.
pub const ACTIVE_RETRY_LIMIT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOperator {
    #[serde(alias = "gene_mutation", alias = "genetic")]
    Gene,
    #[serde(alias = "node", alias = "mixed_node_mutate")]
    MixedNode,
    #[serde(alias = "subgraph", alias = "mixed_subgraph_mutate", alias = "mixed_subtree")]
    MixedSubgraph,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 3] = [
        MutationOperator::Gene,
        MutationOperator::MixedNode,
        MutationOperator::MixedSubgraph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::Gene => "gene",
            MutationOperator::MixedNode => "mixed_node",
            MutationOperator::MixedSubgraph => "mixed_subgraph",
        }
    }

    pub fn supports(self, mode: Mode) -> bool {
        self != MutationOperator::MixedSubgraph || mode == Mode::Pcgp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeBounds {
    pub min: usize,
    pub max: usize,
}

impl SizeBounds {
    /// Bounds of `[0.5, 1.5]` times a reference genome size.
    pub fn around(n_nodes: usize) -> SizeBounds {
        SizeBounds {
            min: (n_nodes as f64 * 0.5).round() as usize,
            max: (n_nodes as f64 * 1.5).round() as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationParams {
    pub operator: MutationOperator,
    pub m_node: f64,
    pub m_output: f64,
    pub m_input: f64,
    pub m_active: bool,
    pub m_delta: f64,
    pub m_modify: f64,
    /// Use `(size_max - n)` instead of `(n - size_min)` in `m_add`.
    pub m_add_inverted: bool,
    pub bounds: SizeBounds,
}

impl Default for MutationParams {
    fn default() -> Self {
        MutationParams {
            operator: MutationOperator::Gene,
            m_node: 0.1,
            m_output: 0.1,
            m_input: 0.1,
            m_active: false,
            m_delta: 0.1,
            m_modify: 0.5,
            m_add_inverted: false,
            bounds: SizeBounds::around(40),
        }
    }
}

impl MutationParams {
    /// Nodes added or removed per structural edit: `max(1, round(m_delta * size_min))`.
    pub fn step_size(&self) -> usize {
        ((self.m_delta * self.bounds.min as f64).round() as usize).max(1)
    }
}

/// Probability of choosing addition in a mixed operator for a parent of `n` nodes.
pub fn m_add(n: usize, p: &MutationParams) -> f64 {
    let SizeBounds { min, max } = p.bounds;
    if max <= min {
        return 0.0;
    }
    let n = n.clamp(min, max);
    let filled = if p.m_add_inverted { max - n } else { n - min };
    filled as f64 / (max - min) as f64 * (1.0 - p.m_modify)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedBranch {
    Modify,
    Add,
    Delete,
}

/// Branch taken by a mixed operator for uniform draw `u`.
pub fn select_branch(u: f64, n: usize, p: &MutationParams) -> MixedBranch {
    if u < p.m_modify {
        MixedBranch::Modify
    } else if u < p.m_modify + m_add(n, p) {
        MixedBranch::Add
    } else {
        MixedBranch::Delete
    }
}

fn require_pcgp(g: &Genome, operator: &'static str) -> Result<()> {
    if g.mode() == Mode::Pcgp {
        Ok(())
    } else {
        Err(Error::UnsupportedOperator {
            operator,
            mode: g.mode(),
        })
    }
}

#[inline]
fn redraw<R: Rng + ?Sized>(gene: &mut f64, rate: f64, rng: &mut R) -> bool {
    if rng.gen::<f64>() < rate {
        let old = *gene;
        *gene = rng.gen();
        *gene != old
    } else {
        false
    }
}

/// One pass of gene mutation. Returns the unsorted child and, per node,
/// whether any of its genes changed.
fn mutate_genes_once<R: Rng + ?Sized>(g: &Genome, p: &MutationParams, rng: &mut R) -> (Genome, Vec<bool>) {
    let mut child = g.clone();
    let pcgp = g.mode() == Mode::Pcgp;
    let mut changed = vec![false; g.n_nodes()];
    for (node, hit) in child.nodes.iter_mut().zip(changed.iter_mut()) {
        if pcgp {
            *hit |= redraw(&mut node.position, p.m_node, rng);
        }
        for gene in [&mut node.x, &mut node.y, &mut node.function, &mut node.param] {
            *hit |= redraw(gene, p.m_node, rng);
        }
    }
    for o in &mut child.outputs {
        redraw(o, p.m_output, rng);
    }
    for i in &mut child.inputs {
        redraw(i, p.m_input, rng);
    }
    (child, changed)
}

/// Replaces each gene with a fresh uniform value at its per-class rate.
/// With `m_active`, retries from the parent until an active node changes.
pub fn gene_mutation<R: Rng + ?Sized>(
    g: &Genome,
    p: &MutationParams,
    settings: &DecodeSettings,
    functions: &FunctionSet,
    rng: &mut R,
) -> Result<Genome> {
    let active = if p.m_active {
        Some(decode(g, settings, functions)?.active)
    } else {
        None
    };
    let mut attempts = 0;
    let mut child = loop {
        let (child, changed) = mutate_genes_once(g, p, rng);
        attempts += 1;
        let done = match &active {
            None => true,
            Some(active) => changed.iter().zip(active).any(|(c, a)| *c && *a),
        };
        if done || attempts >= ACTIVE_RETRY_LIMIT {
            break child;
        }
    };
    child.sort_nodes();
    Ok(child)
}

/// Appends `step_size` random nodes, truncated at `size_max`.
pub fn node_addition<R: Rng + ?Sized>(g: &Genome, p: &MutationParams, rng: &mut R) -> Result<Genome> {
    let room = p.bounds.max.saturating_sub(g.n_nodes());
    let count = p.step_size().min(room);
    let new: Vec<Node> = (0..count).map(|_| Node::random(g.mode(), rng)).collect();
    if new.is_empty() {
        return Ok(g.clone());
    }
    g.add_nodes(&new, p.bounds.max)
}

/// Removes `step_size` uniformly chosen nodes, never going below `size_min`.
pub fn node_deletion<R: Rng + ?Sized>(g: &Genome, p: &MutationParams, rng: &mut R) -> Result<Genome> {
    let n = g.n_nodes();
    let count = p.step_size().min(n.saturating_sub(p.bounds.min));
    if count == 0 {
        return Ok(g.clone());
    }
    let drop: BTreeSet<usize> = index::sample(rng, n, count).into_iter().collect();
    g.remove_nodes(&drop)
}

/// Connection gene that places a connection of a node at `source` exactly
/// on `target`, clamped to `[0, 1]`.
pub fn invert_connection(target: f64, source: f64, settings: &DecodeSettings) -> f64 {
    let reach = settings.recurrency * (1.0 - source) + source;
    ((target - settings.input_start) / (reach - settings.input_start)).clamp(0.0, 1.0)
}

/// Draws `count` items: without replacement when enough exist, otherwise with.
fn draw<R: Rng + ?Sized>(from: &[f64], count: usize, rng: &mut R) -> Vec<f64> {
    if from.is_empty() {
        return Vec::new();
    }
    if from.len() >= count {
        index::sample(rng, from.len(), count).into_iter().map(|i| from[i]).collect()
    } else {
        (0..count).map(|_| from[rng.gen_range(0..from.len())]).collect()
    }
}

/// Adds a block of new nodes whose connections land exactly on nodes from
/// a pool of earlier new nodes, parent nodes and parent inputs. PCGP only.
pub fn subgraph_addition<R: Rng + ?Sized>(
    g: &Genome,
    p: &MutationParams,
    settings: &DecodeSettings,
    rng: &mut R,
) -> Result<Genome> {
    require_pcgp(g, "subgraph_addition")?;
    let room = p.bounds.max.saturating_sub(g.n_nodes());
    let count = p.step_size().min(room);
    if count == 0 {
        return Ok(g.clone());
    }
    let mut new: Vec<Node> = (0..count).map(|_| Node::random(Mode::Pcgp, rng)).collect();
    new.sort_by(|a, b| a.position.total_cmp(&b.position));

    let input_positions: Vec<f64> = g.inputs().iter().map(|i| i * settings.input_start).collect();
    let parent_positions: Vec<f64> = g.nodes().iter().map(|n| n.position).collect();
    for i in 0..new.len() {
        let here = new[i].position;
        let mut pool: Vec<f64> = new[..i].iter().map(|n| n.position).filter(|&q| q < here).collect();
        let share = pool.len().max(1);
        let left = &parent_positions[..parent_positions.partition_point(|&q| q < here)];
        pool.extend(draw(left, share, rng));
        pool.extend(draw(&input_positions, share, rng));
        let x = pool[rng.gen_range(0..pool.len())];
        let y = pool[rng.gen_range(0..pool.len())];
        new[i].x = invert_connection(x, here, settings);
        new[i].y = invert_connection(y, here, settings);
    }
    g.add_nodes(&new, p.bounds.max)
}

/// Removes up to `step_size` nodes from one randomly chosen multi-node
/// component. Falls back to node deletion when every component is a
/// single node. PCGP only.
pub fn subgraph_deletion<R: Rng + ?Sized>(
    g: &Genome,
    p: &MutationParams,
    settings: &DecodeSettings,
    functions: &FunctionSet,
    rng: &mut R,
) -> Result<Genome> {
    require_pcgp(g, "subgraph_deletion")?;
    let graph = decode(g, settings, functions)?;
    let trees: Vec<&Vec<usize>> = graph.components.iter().filter(|c| c.len() > 1).collect();
    if trees.is_empty() {
        return node_deletion(g, p, rng);
    }
    let tree = trees[rng.gen_range(0..trees.len())];
    let count = p
        .step_size()
        .min(tree.len())
        .min(g.n_nodes().saturating_sub(p.bounds.min));
    if count == 0 {
        return Ok(g.clone());
    }
    let drop: BTreeSet<usize> = index::sample(rng, tree.len(), count)
        .into_iter()
        .map(|i| tree[i])
        .collect();
    g.remove_nodes(&drop)
}

pub fn mixed_node_mutate<R: Rng + ?Sized>(
    g: &Genome,
    p: &MutationParams,
    settings: &DecodeSettings,
    functions: &FunctionSet,
    rng: &mut R,
) -> Result<Genome> {
    match select_branch(rng.gen(), g.n_nodes(), p) {
        MixedBranch::Modify => gene_mutation(g, p, settings, functions, rng),
        MixedBranch::Add => node_addition(g, p, rng),
        MixedBranch::Delete => node_deletion(g, p, rng),
    }
}

pub fn mixed_subgraph_mutate<R: Rng + ?Sized>(
    g: &Genome,
    p: &MutationParams,
    settings: &DecodeSettings,
    functions: &FunctionSet,
    rng: &mut R,
) -> Result<Genome> {
    require_pcgp(g, "mixed_subgraph")?;
    match select_branch(rng.gen(), g.n_nodes(), p) {
        MixedBranch::Modify => gene_mutation(g, p, settings, functions, rng),
        MixedBranch::Add => subgraph_addition(g, p, settings, rng),
        MixedBranch::Delete => subgraph_deletion(g, p, settings, functions, rng),
    }
}

/// Applies the operator selected in `p`.
pub fn mutate<R: Rng + ?Sized>(
    g: &Genome,
    p: &MutationParams,
    settings: &DecodeSettings,
    functions: &FunctionSet,
    rng: &mut R,
) -> Result<Genome> {
    match p.operator {
        MutationOperator::Gene => gene_mutation(g, p, settings, functions, rng),
        MutationOperator::MixedNode => mixed_node_mutate(g, p, settings, functions, rng),
        MutationOperator::MixedSubgraph => mixed_subgraph_mutate(g, p, settings, functions, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn params(min: usize, max: usize, m_delta: f64) -> MutationParams {
        MutationParams {
            m_delta,
            bounds: SizeBounds { min, max },
            ..MutationParams::default()
        }
    }

    fn settings() -> DecodeSettings {
        DecodeSettings {
            recurrency: 0.0,
            input_start: -0.5,
            weights: false,
        }
    }

    #[test]
    fn zero_rates_are_identity() {
        let g = Genome::random(Mode::Pcgp, 3, 2, 20, &mut rng(1)).unwrap();
        let p = MutationParams {
            m_node: 0.0,
            m_output: 0.0,
            m_input: 0.0,
            ..MutationParams::default()
        };
        let child = gene_mutation(&g, &p, &settings(), &FunctionSet::default(), &mut rng(2)).unwrap();
        assert_eq!(child, g);
    }

    #[test]
    fn gene_change_rate_matches_m_node() {
        // 2500 CGP nodes of 4 genes = 10^4 node genes
        let g = Genome::random(Mode::Cgp, 1, 1, 2500, &mut rng(5)).unwrap();
        let m_node = 0.3;
        let p = MutationParams { m_node, ..MutationParams::default() };
        let child = gene_mutation(&g, &p, &settings(), &FunctionSet::default(), &mut rng(6)).unwrap();
        let n = 10_000.0;
        let changed = g.to_flat()[1..]
            .iter()
            .zip(&child.to_flat()[1..])
            .filter(|(a, b)| a != b)
            .count() as f64;
        let sigma = (n * m_node * (1.0 - m_node)).sqrt();
        assert!((changed - n * m_node).abs() <= 3.0 * sigma, "changed {changed}");
    }

    #[test]
    fn active_mutation_touches_active_node() {
        let f = FunctionSet::default();
        let s = settings();
        let p = MutationParams { m_active: true, m_node: 0.1, ..MutationParams::default() };
        let mut checked = 0;
        for seed in 0..50 {
            let g = Genome::random(Mode::Cgp, 2, 1, 30, &mut rng(seed)).unwrap();
            let active = decode(&g, &s, &f).unwrap().active;
            if !active.iter().any(|a| *a) {
                continue;
            }
            checked += 1;
            let child = gene_mutation(&g, &p, &s, &f, &mut rng(seed + 1000)).unwrap();
            let hit = g
                .nodes()
                .iter()
                .zip(child.nodes())
                .zip(&active)
                .any(|((a, b), act)| *act && a != b);
            assert!(hit, "seed {seed}");
        }
        assert!(checked > 10);
    }

    #[test]
    fn active_mutation_gives_up_without_active_nodes() {
        // every output snaps to the input, so no node can ever be active
        let g = Genome::new(
            Mode::Cgp,
            1,
            1,
            vec![],
            vec![0.0],
            vec![Node { position: 0.0, x: 0.1, y: 0.1, function: 0.1, param: 0.1 }; 3],
        )
        .unwrap();
        let p = MutationParams { m_active: true, m_output: 0.0, ..MutationParams::default() };
        let child = gene_mutation(&g, &p, &settings(), &FunctionSet::default(), &mut rng(0)).unwrap();
        assert_eq!(child.n_nodes(), 3);
    }

    #[test]
    fn node_addition_counts() {
        let g = Genome::random(Mode::Cgp, 1, 1, 10, &mut rng(0)).unwrap();
        assert_eq!(node_addition(&g, &params(10, 40, 0.2), &mut rng(1)).unwrap().n_nodes(), 12);
        assert_eq!(node_addition(&g, &params(5, 10, 0.2), &mut rng(1)).unwrap().n_nodes(), 10);
        assert_eq!(params(5, 10, 0.1).step_size(), 1);
        assert_eq!(node_addition(&g, &params(5, 40, 0.1), &mut rng(1)).unwrap().n_nodes(), 11);
        let pc = Genome::random(Mode::Pcgp, 1, 1, 10, &mut rng(0)).unwrap();
        node_addition(&pc, &params(10, 40, 0.5), &mut rng(2)).unwrap().validate().unwrap();
    }

    #[test]
    fn node_deletion_counts() {
        let g = Genome::random(Mode::Cgp, 1, 1, 12, &mut rng(0)).unwrap();
        assert_eq!(node_deletion(&g, &params(10, 40, 0.2), &mut rng(1)).unwrap().n_nodes(), 10);
        let g10 = Genome::random(Mode::Cgp, 1, 1, 10, &mut rng(0)).unwrap();
        assert_eq!(node_deletion(&g10, &params(10, 40, 0.2), &mut rng(1)).unwrap(), g10);
        let one = Genome::random(Mode::Cgp, 1, 1, 1, &mut rng(0)).unwrap();
        assert_eq!(node_deletion(&one, &params(0, 40, 0.5), &mut rng(1)).unwrap().n_nodes(), 0);
    }

    #[test]
    fn m_add_values() {
        let mut p = params(10, 40, 0.1);
        p.m_modify = 0.6;
        assert_eq!(m_add(10, &p), 0.0);
        assert_eq!(m_add(40, &p), 1.0 - 0.6);
        assert!((m_add(25, &p) - 0.2).abs() < 1e-12);
        p.bounds = SizeBounds { min: 10, max: 10 };
        assert_eq!(m_add(10, &p), 0.0);
        let mut inv = params(10, 40, 0.1);
        inv.m_add_inverted = true;
        assert_eq!(m_add(10, &inv), 1.0 - inv.m_modify);
        assert_eq!(m_add(40, &inv), 0.0);
    }

    #[test]
    fn mixed_at_size_min_deletes_nothing() {
        let g = Genome::random(Mode::Cgp, 1, 1, 10, &mut rng(0)).unwrap();
        let mut p = params(10, 20, 0.2);
        p.operator = MutationOperator::MixedNode;
        p.m_modify = 0.0;
        assert_eq!(select_branch(0.5, 10, &p), MixedBranch::Delete);
        let child = mixed_node_mutate(&g, &p, &settings(), &FunctionSet::default(), &mut rng(3)).unwrap();
        assert_eq!(child, g);
    }

    #[test]
    fn mixed_with_full_modify_is_gene_mutation() {
        let g = Genome::random(Mode::Cgp, 1, 1, 10, &mut rng(0)).unwrap();
        let mut p = params(5, 20, 0.2);
        p.m_modify = 1.0;
        for seed in 0..20 {
            let a = mixed_node_mutate(&g, &p, &settings(), &FunctionSet::default(), &mut rng(seed)).unwrap();
            assert_eq!(a.n_nodes(), 10);
        }
    }

    fn branch_frequencies(p: &MutationParams, n: usize, draws: usize) -> [usize; 3] {
        let mut r = rng(77);
        let mut counts = [0; 3];
        for _ in 0..draws {
            match select_branch(r.gen(), n, p) {
                MixedBranch::Modify => counts[0] += 1,
                MixedBranch::Add => counts[1] += 1,
                MixedBranch::Delete => counts[2] += 1,
            }
        }
        counts
    }

    #[test]
    fn branch_frequencies_match_probabilities() {
        let mut p = params(10, 40, 0.2);
        p.m_modify = 0.4;
        let n = 25;
        let draws = 10_000;
        let probs = [p.m_modify, m_add(n, &p), 1.0 - p.m_modify - m_add(n, &p)];
        let counts = branch_frequencies(&p, n, draws);
        for (c, q) in counts.iter().zip(probs) {
            let sigma = (draws as f64 * q * (1.0 - q)).sqrt();
            assert!((*c as f64 - draws as f64 * q).abs() <= 3.0 * sigma, "{counts:?} vs {probs:?}");
        }
    }

    #[test]
    fn inversion_formula() {
        let s = settings();
        for p_i in [0.1, 0.4, 0.8] {
            let expected = (0.5 * p_i + 0.5) / (p_i + 0.5);
            assert!((invert_connection(p_i * 0.5, p_i, &s) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn subgraph_addition_connections_land_on_pool() {
        let f = FunctionSet::default();
        for (seed, r) in [(1u64, 0.0), (2, 0.0), (3, 0.5), (4, 1.0)] {
            let s = DecodeSettings { recurrency: r, input_start: -0.7, weights: false };
            let g = Genome::random(Mode::Pcgp, 3, 2, 10, &mut rng(seed)).unwrap();
            let p = params(10, 30, 0.5);
            let child = subgraph_addition(&g, &p, &s, &mut rng(seed + 50)).unwrap();
            assert_eq!(child.n_nodes(), 15);
            child.validate().unwrap();
            let graph = decode(&child, &s, &f).unwrap();
            let positions = child.positions(s.input_start);
            for (j, node) in child.nodes().iter().enumerate() {
                if g.nodes().contains(node) {
                    continue;
                }
                for (k, gene) in [node.x, node.y].into_iter().enumerate() {
                    let point = crate::decode::connection_position(gene, node.position, &s, Mode::Pcgp);
                    let target = graph.targets[j][k];
                    assert!((positions[target] - point).abs() < 1e-9, "seed {seed}");
                    assert!(positions[target] < node.position);
                }
            }
        }
    }

    #[test]
    fn subgraph_ops_reject_cgp() {
        let g = Genome::random(Mode::Cgp, 1, 1, 10, &mut rng(0)).unwrap();
        let p = params(5, 20, 0.2);
        let (s, f) = (settings(), FunctionSet::default());
        assert!(matches!(subgraph_addition(&g, &p, &s, &mut rng(0)), Err(Error::UnsupportedOperator { .. })));
        assert!(matches!(subgraph_deletion(&g, &p, &s, &f, &mut rng(0)), Err(Error::UnsupportedOperator { .. })));
        assert!(matches!(mixed_subgraph_mutate(&g, &p, &s, &f, &mut rng(0)), Err(Error::UnsupportedOperator { .. })));
    }

    /// PCGP genome whose nodes at `positions` each connect to the node
    /// listed in `links` (`None` = the single input at -0.5).
    fn linked(positions: &[f64], links: &[Option<usize>]) -> Genome {
        let s = settings();
        let nodes = positions
            .iter()
            .zip(links)
            .map(|(&p, link)| {
                let target = link.map_or(-0.5, |k| positions[k]);
                let x = invert_connection(target, p, &s);
                Node { position: p, x, y: x, function: 0.0, param: 0.5 }
            })
            .collect();
        Genome::new(Mode::Pcgp, 1, 1, vec![1.0], vec![1.0], nodes).unwrap()
    }

    #[test]
    fn subgraph_deletion_cases() {
        let (s, f) = (settings(), FunctionSet::default());
        let chain = linked(&[0.1, 0.3, 0.5, 0.7, 0.9], &[None, Some(0), Some(1), Some(2), Some(3)]);
        assert_eq!(decode(&chain, &s, &f).unwrap().components.len(), 1);
        let p = params(3, 20, 0.5);
        assert_eq!(p.step_size(), 2);
        assert_eq!(subgraph_deletion(&chain, &p, &s, &f, &mut rng(0)).unwrap().n_nodes(), 3);

        let singles = linked(&[0.1, 0.3, 0.5, 0.7], &[None; 4]);
        let p = params(1, 20, 1.0);
        assert_eq!(subgraph_deletion(&singles, &p, &s, &f, &mut rng(0)).unwrap().n_nodes(), 3);

        let pos: Vec<f64> = (0..9).map(|i| 0.05 + 0.1 * i as f64).collect();
        let mut links = vec![None; 9];
        links[4] = Some(3);
        let pair = linked(&pos, &links);
        let p = params(6, 20, 0.5);
        assert_eq!(p.step_size(), 3);
        let child = subgraph_deletion(&pair, &p, &s, &f, &mut rng(0)).unwrap();
        assert_eq!(child.n_nodes(), 7);
        assert!(!child.nodes().contains(&pair.nodes()[3]));
        assert!(!child.nodes().contains(&pair.nodes()[4]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn children_respect_invariants(
            seed in any::<u64>(),
            pcgp in any::<bool>(),
            op in 0usize..3,
            n in 5usize..15,
            m_delta in 0.1f64..0.5,
        ) {
            let mode = if pcgp { Mode::Pcgp } else { Mode::Cgp };
            let operator = MutationOperator::ALL[op];
            prop_assume!(operator.supports(mode));
            let g = Genome::random(mode, 2, 2, n, &mut rng(seed)).unwrap();
            let p = MutationParams {
                operator,
                m_delta,
                m_modify: 0.3,
                bounds: SizeBounds { min: 5, max: 15 },
                ..MutationParams::default()
            };
            let s = DecodeSettings { recurrency: 0.3, input_start: -0.4, weights: false };
            let f = FunctionSet::default();
            let a = mutate(&g, &p, &s, &f, &mut rng(seed ^ 1)).unwrap();
            let b = mutate(&g, &p, &s, &f, &mut rng(seed ^ 1)).unwrap();
            prop_assert_eq!(&a, &b);
            a.validate().unwrap();
            prop_assert!((5..=15).contains(&a.n_nodes()));
            prop_assert!(a.n_nodes().abs_diff(n) <= p.step_size());
            if operator == MutationOperator::Gene {
                prop_assert_eq!(a.n_nodes(), n);
            }
        }
    }
}
