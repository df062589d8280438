//! Knowledge-graph toolkit for documenting bias in machine-learning pipelines.
//!
//! The crate bundles a small RDF stack (triple store, Turtle subset, RDFS-style
//! reasoner, SPARQL-subset engine) with the bias vocabulary, closed-world
//! validation, quality indicators and bias measures built on top of it.

pub mod measures;
pub mod ns;
pub mod query;
pub mod rdf;
pub mod reasoner;
pub mod validate;
pub mod vocab;
