//! A string-diagram calculus for finite-state automata.
//!
//! Diagrams are terms over eleven generators and two wire sorts. The crate
//! provides their canonical port-graph form, evaluation over finite lattice
//! models, encodings of regular expressions and automata as diagrams, an
//! axiom catalog with replayable rewriting certificates, and diagrammatic
//! determinisation and minimisation.

pub mod automata;
pub mod corpus;
pub mod diagram;
pub mod encode;
pub mod interp;
pub mod lattice;
pub mod portgraph;
pub mod regex;
pub mod render;
pub mod rewrite;
pub mod text;

pub use diagram::{Diagram, DiagramError, Generator, Interface, Sort, Term};
pub use portgraph::{diagram_hash, graph_eq, PortGraph};
