//! Floating-point Cartesian Genetic Programming (CGP) and Positional CGP (PCGP).
//!
//! Genomes are vectors of genes in `[0, 1]`. Decoding places nodes on a
//! one-dimensional axis and snaps every connection to the nearest node,
//! which lets positions, recurrency and node weights all be expressed as
//! plain genes and hyperparameters. On top of that sit nine genetic
//! operators, a 1+λ EA, a GA, and fitness functions for classification,
//! regression and cart-pole control.

pub mod bench;
pub mod config;
pub mod crossover;
pub mod decode;
pub mod dot;
pub mod error;
pub mod evolve;
pub mod execute;
pub mod experiment;
pub mod functions;
pub mod genome;
pub mod mutate;
pub mod rng;

pub use decode::{decode, DecodeSettings, DecodedGraph};
pub use error::{Error, Result};
pub use execute::{Program, ProgramState};
pub use functions::{FunctionSet, Primitive};
pub use genome::{Genome, Mode, Node};
