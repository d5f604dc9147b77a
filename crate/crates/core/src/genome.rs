//! Gene-vector representation of CGP and PCGP individuals.
//!
//! A genome is a flat collection of genes in `[0, 1]`: optional input
//! position genes (PCGP), one gene per program output, and four (CGP) or
//! five (PCGP) genes per computational node. The flattened layout is
//! `inputs ++ outputs ++ nodes`, with each node laid out as `[p,] x, y, f, c`.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Nodes sit on a fixed, evenly spaced ladder.
    Cgp,
    /// Every node and input carries an evolved position gene.
    Pcgp,
}

impl Mode {
    /// Genes per computational node.
    pub fn node_len(self) -> usize {
        match self {
            Mode::Cgp => 4,
            Mode::Pcgp => 5,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Cgp => f.write_str("CGP"),
            Mode::Pcgp => f.write_str("PCGP"),
        }
    }
}

/// Genes of one computational node. `position` is meaningful only in PCGP
/// and is kept at `0.0` for CGP genomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub position: f64,
    pub x: f64,
    pub y: f64,
    pub function: f64,
    pub param: f64,
}

impl Node {
    pub fn random<R: Rng + ?Sized>(mode: Mode, rng: &mut R) -> Node {
        let position = match mode {
            Mode::Cgp => 0.0,
            Mode::Pcgp => rng.gen(),
        };
        Node {
            position,
            x: rng.gen(),
            y: rng.gen(),
            function: rng.gen(),
            param: rng.gen(),
        }
    }

    pub(crate) fn genes(&self, mode: Mode) -> Vec<f64> {
        match mode {
            Mode::Cgp => vec![self.x, self.y, self.function, self.param],
            Mode::Pcgp => vec![self.position, self.x, self.y, self.function, self.param],
        }
    }

    pub(crate) fn from_genes(mode: Mode, genes: &[f64]) -> Node {
        match mode {
            Mode::Cgp => Node {
                position: 0.0,
                x: genes[0],
                y: genes[1],
                function: genes[2],
                param: genes[3],
            },
            Mode::Pcgp => Node {
                position: genes[0],
                x: genes[1],
                y: genes[2],
                function: genes[3],
                param: genes[4],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub(crate) mode: Mode,
    pub(crate) n_in: usize,
    pub(crate) n_out: usize,
    pub(crate) nodes: Vec<Node>,
    pub(crate) outputs: Vec<f64>,
    /// Input position genes; empty for CGP.
    pub(crate) inputs: Vec<f64>,
}

impl Genome {
    /// Builds a genome from explicit genes, validating every invariant and
    /// sorting PCGP nodes by position.
    pub fn new(
        mode: Mode,
        n_in: usize,
        n_out: usize,
        inputs: Vec<f64>,
        outputs: Vec<f64>,
        nodes: Vec<Node>,
    ) -> Result<Genome> {
        let mut g = Genome {
            mode,
            n_in,
            n_out,
            nodes,
            outputs,
            inputs,
        };
        g.sort_nodes();
        g.validate()?;
        Ok(g)
    }

    pub fn random<R: Rng + ?Sized>(
        mode: Mode,
        n_in: usize,
        n_out: usize,
        n_nodes: usize,
        rng: &mut R,
    ) -> Result<Genome> {
        check_counts(n_in, n_out)?;
        let inputs = match mode {
            Mode::Cgp => Vec::new(),
            Mode::Pcgp => (0..n_in).map(|_| rng.gen()).collect(),
        };
        let outputs = (0..n_out).map(|_| rng.gen()).collect();
        let nodes = (0..n_nodes).map(|_| Node::random(mode, rng)).collect();
        let mut g = Genome {
            mode,
            n_in,
            n_out,
            nodes,
            outputs,
            inputs,
        };
        g.sort_nodes();
        Ok(g)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    /// Number of genes before the first node.
    pub fn header_len(&self) -> usize {
        self.inputs.len() + self.outputs.len()
    }

    /// Number of addressable positions: inputs first, then nodes.
    pub fn n_addressable(&self) -> usize {
        self.n_in + self.nodes.len()
    }

    /// Position of an addressable element (inputs `0..n_in`, then nodes).
    ///
    /// In CGP inputs and nodes share one ladder of `K = n_in + n_nodes`
    /// rungs at cell centers `(k + 0.5) / K`. In PCGP a node sits at its
    /// position gene and input `k` at `i_k * input_start`.
    pub fn node_position(&self, index: usize, input_start: f64) -> Result<f64> {
        let len = self.n_addressable();
        if index >= len {
            return Err(Error::Index { index, len });
        }
        Ok(match self.mode {
            Mode::Cgp => (index as f64 + 0.5) / len as f64,
            Mode::Pcgp if index < self.n_in => self.inputs[index] * input_start,
            Mode::Pcgp => self.nodes[index - self.n_in].position,
        })
    }

    /// All addressable positions in index order.
    pub fn positions(&self, input_start: f64) -> Vec<f64> {
        let len = self.n_addressable();
        match self.mode {
            Mode::Cgp => (0..len).map(|k| (k as f64 + 0.5) / len as f64).collect(),
            Mode::Pcgp => self
                .inputs
                .iter()
                .map(|i| i * input_start)
                .chain(self.nodes.iter().map(|n| n.position))
                .collect(),
        }
    }

    /// Returns a copy with `new` nodes appended (CGP) or merged by position (PCGP).
    pub fn add_nodes(&self, new: &[Node], size_max: usize) -> Result<Genome> {
        let requested = self.nodes.len() + new.len();
        if requested > size_max {
            return Err(Error::Size {
                requested,
                max: size_max,
            });
        }
        let mut g = self.clone();
        g.nodes.extend_from_slice(new);
        g.sort_nodes();
        Ok(g)
    }

    /// Returns a copy without the listed nodes; remaining order is preserved.
    pub fn remove_nodes(&self, indices: &BTreeSet<usize>) -> Result<Genome> {
        let len = self.nodes.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= len) {
            return Err(Error::Index { index: bad, len });
        }
        let mut g = self.clone();
        g.nodes = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| !indices.contains(i))
            .map(|(_, n)| *n)
            .collect();
        Ok(g)
    }

    /// Flattened gene vector in serialization order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.header_len() + self.nodes.len() * self.mode.node_len());
        flat.extend_from_slice(&self.inputs);
        flat.extend_from_slice(&self.outputs);
        for n in &self.nodes {
            flat.extend(n.genes(self.mode));
        }
        flat
    }

    /// Rebuilds a genome from a flattened vector. PCGP nodes are re-sorted.
    pub fn from_flat(mode: Mode, n_in: usize, n_out: usize, flat: &[f64]) -> Result<Genome> {
        check_counts(n_in, n_out)?;
        let n_inputs = if mode == Mode::Pcgp { n_in } else { 0 };
        let header = n_inputs + n_out;
        let node_len = mode.node_len();
        if flat.len() < header || (flat.len() - header) % node_len != 0 {
            return Err(Error::Shape(format!(
                "flat length {} does not fit header {} plus whole nodes of {} genes",
                flat.len(),
                header,
                node_len
            )));
        }
        let nodes = flat[header..]
            .chunks(node_len)
            .map(|c| Node::from_genes(mode, c))
            .collect();
        Genome::new(
            mode,
            n_in,
            n_out,
            flat[..n_inputs].to_vec(),
            flat[n_inputs..header].to_vec(),
            nodes,
        )
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        check_counts(self.n_in, self.n_out)?;
        if self.outputs.len() != self.n_out {
            return Err(Error::Shape(format!(
                "{} output genes for n_out = {}",
                self.outputs.len(),
                self.n_out
            )));
        }
        let expected_inputs = match self.mode {
            Mode::Cgp => 0,
            Mode::Pcgp => self.n_in,
        };
        if self.inputs.len() != expected_inputs {
            return Err(Error::Shape(format!(
                "{} input genes for a {} genome with n_in = {}",
                self.inputs.len(),
                self.mode,
                self.n_in
            )));
        }
        for (i, v) in self.inputs.iter().enumerate() {
            check_gene(format!("inputs[{i}]"), *v)?;
        }
        for (i, v) in self.outputs.iter().enumerate() {
            check_gene(format!("outputs[{i}]"), *v)?;
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for (j, v) in n.genes(self.mode).into_iter().enumerate() {
                check_gene(format!("nodes[{i}][{j}]"), v)?;
            }
            if self.mode == Mode::Cgp && n.position != 0.0 {
                return Err(Error::Shape(format!("CGP node {i} carries a position gene")));
            }
        }
        if self.mode == Mode::Pcgp
            && self.nodes.windows(2).any(|w| w[0].position > w[1].position)
        {
            return Err(Error::Shape("PCGP nodes are not sorted by position".into()));
        }
        Ok(())
    }

    /// Stable sort of PCGP nodes by position; no-op for CGP.
    pub(crate) fn sort_nodes(&mut self) {
        if self.mode == Mode::Pcgp {
            self.nodes.sort_by(|a, b| a.position.total_cmp(&b.position));
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GenomeDoc::from(self)).expect("genome serializes")
    }

    pub fn from_json(text: &str) -> Result<Genome> {
        let doc: GenomeDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Genome::try_from(doc)
    }
}

fn check_counts(n_in: usize, n_out: usize) -> Result<()> {
    if n_in == 0 || n_out == 0 {
        return Err(Error::Shape(format!(
            "n_in and n_out must be at least 1 (got {n_in}, {n_out})"
        )));
    }
    Ok(())
}

fn check_gene(name: String, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::GeneRange { name, value })
    }
}

/// JSON document form of a genome.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenomeDoc {
    mode: Mode,
    n_in: usize,
    n_out: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inputs: Option<Vec<f64>>,
    outputs: Vec<f64>,
    nodes: Vec<Vec<f64>>,
}

impl From<&Genome> for GenomeDoc {
    fn from(g: &Genome) -> Self {
        GenomeDoc {
            mode: g.mode,
            n_in: g.n_in,
            n_out: g.n_out,
            inputs: (g.mode == Mode::Pcgp).then(|| g.inputs.clone()),
            outputs: g.outputs.clone(),
            nodes: g.nodes.iter().map(|n| n.genes(g.mode)).collect(),
        }
    }
}

impl TryFrom<GenomeDoc> for Genome {
    type Error = Error;

    fn try_from(doc: GenomeDoc) -> Result<Genome> {
        let node_len = doc.mode.node_len();
        if let Some((i, bad)) = doc.nodes.iter().enumerate().find(|(_, n)| n.len() != node_len) {
            return Err(Error::Parse(format!(
                "node {i} has {} genes, {} genomes need {node_len}",
                bad.len(),
                doc.mode
            )));
        }
        let inputs = match (doc.mode, doc.inputs) {
            (Mode::Cgp, None) => Vec::new(),
            (Mode::Cgp, Some(v)) if v.is_empty() => Vec::new(),
            (Mode::Cgp, Some(_)) => {
                return Err(Error::Parse("CGP genomes carry no input genes".into()))
            }
            (Mode::Pcgp, Some(v)) => v,
            (Mode::Pcgp, None) => {
                return Err(Error::Parse("PCGP genome is missing `inputs`".into()))
            }
        };
        let nodes = doc
            .nodes
            .iter()
            .map(|n| Node::from_genes(doc.mode, n))
            .collect();
        let g = Genome {
            mode: doc.mode,
            n_in: doc.n_in,
            n_out: doc.n_out,
            nodes,
            outputs: doc.outputs,
            inputs,
        };
        g.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(g)
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

    fn pcgp_node(p: f64) -> Node {
        Node {
            position: p,
            x: 0.5,
            y: 0.5,
            function: 0.5,
            param: 0.5,
        }
    }

    #[test]
    fn random_layout_sizes() {
        let g = Genome::random(Mode::Pcgp, 2, 1, 10, &mut rng(1)).unwrap();
        assert_eq!(g.to_flat().len(), 10 * 5 + 1 + 2);
        g.validate().unwrap();

        let g = Genome::random(Mode::Cgp, 3, 2, 0, &mut rng(1)).unwrap();
        assert_eq!(g.n_nodes(), 0);
        assert_eq!(g.to_flat().len(), 2);
    }

    #[test]
    fn random_is_deterministic() {
        let a = Genome::random(Mode::Pcgp, 3, 2, 15, &mut rng(9)).unwrap();
        let b = Genome::random(Mode::Pcgp, 3, 2, 15, &mut rng(9)).unwrap();
        assert_eq!(a.to_flat(), b.to_flat());
    }

    #[test]
    fn zero_io_counts_rejected() {
        assert!(Genome::random(Mode::Cgp, 0, 1, 5, &mut rng(0)).is_err());
        assert!(Genome::random(Mode::Pcgp, 1, 0, 5, &mut rng(0)).is_err());
    }

    #[test]
    fn cgp_ladder_cell_centers() {
        let g = Genome::random(Mode::Cgp, 2, 1, 2, &mut rng(0)).unwrap();
        assert_eq!(g.positions(-1.0), vec![0.125, 0.375, 0.625, 0.875]);
        assert!(g.node_position(4, -1.0).is_err());
    }

    #[test]
    fn cgp_ladder_symmetric_and_increasing() {
        for k in 1..40 {
            let g = Genome::random(Mode::Cgp, 1, 1, k, &mut rng(k as u64)).unwrap();
            let p = g.positions(-0.5);
            assert!(p.windows(2).all(|w| w[0] < w[1]));
            for (a, b) in p.iter().zip(p.iter().rev()) {
                assert!((a + b - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pcgp_positions() {
        let g = Genome::new(Mode::Pcgp, 1, 1, vec![0.5], vec![0.1], vec![pcgp_node(0.7)]).unwrap();
        assert_eq!(g.node_position(0, -1.0).unwrap(), -0.5);
        assert_eq!(g.node_position(1, -1.0).unwrap(), 0.7);
    }

    #[test]
    fn add_nodes_sorts_and_bounds() {
        let g = Genome::new(
            Mode::Pcgp,
            1,
            1,
            vec![0.5],
            vec![0.1],
            vec![pcgp_node(0.3), pcgp_node(0.6)],
        )
        .unwrap();
        let h = g.add_nodes(&[pcgp_node(0.1)], 10).unwrap();
        assert_eq!(h.nodes()[0].position, 0.1);
        assert_eq!(h.n_nodes(), 3);
        assert!(matches!(
            g.add_nodes(&[pcgp_node(0.1)], 2),
            Err(Error::Size { requested: 3, max: 2 })
        ));

        let c = Genome::random(Mode::Cgp, 2, 1, 10, &mut rng(3)).unwrap();
        let extra = [Node::random(Mode::Cgp, &mut rng(4)), Node::random(Mode::Cgp, &mut rng(5))];
        let d = c.add_nodes(&extra, 20).unwrap();
        assert_eq!(d.n_nodes(), 12);
        assert_eq!(d.nodes()[10], extra[0]);
    }

    #[test]
    fn remove_nodes_cases() {
        let g = Genome::random(Mode::Cgp, 1, 1, 3, &mut rng(2)).unwrap();
        let h = g.remove_nodes(&BTreeSet::from([0])).unwrap();
        assert_eq!(h.nodes(), &g.nodes()[1..]);
        let all = g.remove_nodes(&BTreeSet::from([0, 1, 2])).unwrap();
        assert_eq!(all.n_nodes(), 0);
        assert_eq!(g.remove_nodes(&BTreeSet::new()).unwrap(), g);
        assert!(g.remove_nodes(&BTreeSet::from([3])).is_err());
    }

    #[test]
    fn json_rejects_out_of_range_gene() {
        let text = r#"{"mode":"cgp","n_in":1,"n_out":1,"outputs":[1.5],"nodes":[]}"#;
        assert!(matches!(Genome::from_json(text), Err(Error::Parse(_))));
    }

    #[test]
    fn json_rejects_wrong_node_width() {
        let text = r#"{"mode":"pcgp","n_in":1,"n_out":1,"inputs":[0.2],"outputs":[0.5],"nodes":[[0.1,0.2,0.3,0.4]]}"#;
        assert!(Genome::from_json(text).is_err());
    }

    #[test]
    fn json_empty_nodes_round_trip() {
        let g = Genome::random(Mode::Pcgp, 2, 3, 0, &mut rng(0)).unwrap();
        assert_eq!(Genome::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn flat_rejects_partial_node() {
        assert!(Genome::from_flat(Mode::Cgp, 1, 1, &[0.1, 0.2, 0.3]).is_err());
    }

    fn arb_genome() -> impl Strategy<Value = Genome> {
        (any::<bool>(), 1usize..4, 1usize..4, 0usize..12, any::<u64>()).prop_map(
            |(pcgp, n_in, n_out, n, seed)| {
                let mode = if pcgp { Mode::Pcgp } else { Mode::Cgp };
                Genome::random(mode, n_in, n_out, n, &mut rng(seed)).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(g in arb_genome()) {
            let back = Genome::from_json(&g.to_json()).unwrap();
            prop_assert_eq!(back.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            g.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(back.to_json(), g.to_json());
        }

        #[test]
        fn flat_round_trip(g in arb_genome()) {
            let back = Genome::from_flat(g.mode(), g.n_in(), g.n_out(), &g.to_flat()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn edits_keep_pcgp_sorted(g in arb_genome(), seed in any::<u64>(), k in 0usize..6) {
            let mut r = rng(seed);
            let new: Vec<Node> = (0..k).map(|_| Node::random(g.mode(), &mut r)).collect();
            let h = g.add_nodes(&new, 100).unwrap();
            h.validate().unwrap();
            let drop: BTreeSet<usize> = (0..h.n_nodes()).filter(|_| r.gen_bool(0.3)).collect();
            let d = h.remove_nodes(&drop).unwrap();
            d.validate().unwrap();
            prop_assert_eq!(d.n_nodes(), h.n_nodes() - drop.len());
        }
    }
}
