//! Graphviz export of a decoded genome.
//!
//! Inputs are boxes, outputs double circles, nodes ellipses labelled with
//! their function. Inactive nodes and recurrent edges are dashed.

use std::fmt::Write;

use crate::decode::{decode, DecodeSettings};
use crate::error::Result;
use crate::functions::FunctionSet;
use crate::genome::Genome;

pub fn to_dot(genome: &Genome, settings: &DecodeSettings, functions: &FunctionSet) -> Result<String> {
    let graph = decode(genome, settings, functions)?;
    let n_in = graph.n_in;
    let id = |t: usize| if t < n_in { format!("in{t}") } else { format!("n{}", t - n_in) };

    let mut s = String::new();
    // writes into a String cannot fail
    let mut line = |text: String| {
        let _ = writeln!(s, "  {text}");
    };
    line("rankdir=LR;".into());
    for k in 0..n_in {
        line(format!("in{k} [shape=box, label=\"in{k}\"];"));
    }
    for (j, node) in genome.nodes().iter().enumerate() {
        let name = functions.get(graph.function_index[j]).name();
        let label = if settings.weights {
            format!("{name}\\nw={:.4}", node.param)
        } else {
            name.to_string()
        };
        let style = if graph.active[j] { "solid" } else { "dashed" };
        line(format!("n{j} [shape=ellipse, style={style}, label=\"{label}\"];"));
    }
    for o in 0..graph.output_targets.len() {
        line(format!("out{o} [shape=doublecircle, label=\"out{o}\"];"));
    }
    for j in 0..graph.n_nodes() {
        for i in 0..graph.arity[j] {
            let style = if graph.recurrent[j][i] { "dashed" } else { "solid" };
            line(format!("{} -> n{j} [style={style}];", id(graph.targets[j][i])));
        }
    }
    for (o, &t) in graph.output_targets.iter().enumerate() {
        line(format!("{} -> out{o};", id(t)));
    }
    Ok(format!("digraph genome {{\n{s}}}\n"))
}
