//! Homogeneous circuit theory: projective branch triads, cut/cycle pairs,
//! the Kirchhoff polynomial and solvers built on them.

mod error;

pub mod config;
pub mod coupled;
pub mod graph;
pub mod kirchhoff;
pub mod netlist;
pub mod numerics;
pub mod solver;

pub use config::{Configuration, Triad, C64};
pub use coupled::{ControlledPair, Coupling, PiModel};
pub use error::{Error, ErrorCategory, Result};
pub use graph::{CutCyclePair, Digraph, SpanningTree};
pub use kirchhoff::KirchhoffPolynomial;
pub use netlist::Netlist;
pub use numerics::{DenseMatrix, IndexSet, DEFAULT_TOL};
pub use solver::{Circuit, Fault, ModelKind};
