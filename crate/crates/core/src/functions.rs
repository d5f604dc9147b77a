//! Primitive node functions.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Threshold below which `pdiv` treats the divisor as zero.
pub const PDIV_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    Add,
    Sub,
    Mult,
    Pdiv,
    Sin,
    Cos,
    Abs,
    Const,
    Max,
    Min,
    Neg,
    Sqrt,
    Tanh,
}

impl Primitive {
    pub const ALL: [Primitive; 13] = [
        Primitive::Add,
        Primitive::Sub,
        Primitive::Mult,
        Primitive::Pdiv,
        Primitive::Sin,
        Primitive::Cos,
        Primitive::Abs,
        Primitive::Const,
        Primitive::Max,
        Primitive::Min,
        Primitive::Neg,
        Primitive::Sqrt,
        Primitive::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Add => "add",
            Primitive::Sub => "sub",
            Primitive::Mult => "mult",
            Primitive::Pdiv => "pdiv",
            Primitive::Sin => "sin",
            Primitive::Cos => "cos",
            Primitive::Abs => "abs",
            Primitive::Const => "const",
            Primitive::Max => "max",
            Primitive::Min => "min",
            Primitive::Neg => "neg",
            Primitive::Sqrt => "sqrt",
            Primitive::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Primitive> {
        Primitive::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Number of connection inputs the function reads.
    pub fn arity(self) -> usize {
        match self {
            Primitive::Const => 0,
            Primitive::Sin
            | Primitive::Cos
            | Primitive::Abs
            | Primitive::Neg
            | Primitive::Sqrt
            | Primitive::Tanh => 1,
            _ => 2,
        }
    }

    /// Applies the function. `param` is the node's parameter gene.
    #[inline]
    pub fn apply(self, a: f64, b: f64, param: f64) -> f64 {
        match self {
            Primitive::Add => a + b,
            Primitive::Sub => a - b,
            Primitive::Mult => a * b,
            Primitive::Pdiv => {
                if b.abs() < PDIV_EPSILON {
                    a
                } else {
                    a / b
                }
            }
            Primitive::Sin => a.sin(),
            Primitive::Cos => a.cos(),
            Primitive::Abs => a.abs(),
            Primitive::Const => 2.0 * param - 1.0,
            Primitive::Max => a.max(b),
            Primitive::Min => a.min(b),
            Primitive::Neg => -a,
            Primitive::Sqrt => a.abs().sqrt(),
            Primitive::Tanh => a.tanh(),
        }
    }
}

/// Ordered, non-empty list of primitives indexed by the function gene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSet {
    entries: Vec<Primitive>,
}

pub const DEFAULT_FUNCTIONS: [&str; 8] = ["add", "sub", "mult", "pdiv", "sin", "cos", "abs", "const"];

impl Default for FunctionSet {
    fn default() -> Self {
        FunctionSet::from_names(DEFAULT_FUNCTIONS).expect("default function set is valid")
    }
}

impl FunctionSet {
    pub fn new(entries: Vec<Primitive>) -> Result<FunctionSet> {
        if entries.is_empty() {
            return Err(Error::Config("function set is empty".into()));
        }
        let mut seen = HashSet::new();
        for p in &entries {
            if !seen.insert(*p) {
                return Err(Error::Config(format!("duplicate function `{}`", p.name())));
            }
        }
        Ok(FunctionSet { entries })
    }

    pub fn from_names<I, S>(names: I) -> Result<FunctionSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries = names
            .into_iter()
            .map(|n| {
                let n = n.as_ref();
                Primitive::from_name(n).ok_or_else(|| Error::Config(format!("unknown function `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionSet::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Primitive {
        self.entries[index]
    }

    pub fn entries(&self) -> &[Primitive] {
        &self.entries
    }

    /// Maps a function gene onto an entry: `min(floor(f * |F|), |F| - 1)`.
    pub fn index_of(&self, gene: f64) -> usize {
        let n = self.entries.len();
        ((gene * n as f64).floor() as usize).min(n - 1)
    }
}
