//! RDF data model, indexed triple store and Turtle I/O.

mod graph;
mod iso;
mod term;
mod turtle;

pub use graph::{Graph, TripleRef};
pub use iso::isomorphic;
pub use term::{BlankNode, Iri, Literal, LiteralKind, Term, TermError, Triple};
pub use turtle::{format_term, parse_turtle, serialize_turtle, TurtleError};
