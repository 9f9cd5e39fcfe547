//! Chemical reaction networks with parametric propensities.
//!
//! A network is a list of species, a list of parameters (fixed values or
//! ranges), per-species initial ranges with optional sum constraints, an
//! observable subset, and reactions. Each reaction carries an update vector
//! and a propensity expression evaluated on (state, parameters).
//!
//! Networks are defined in a line-oriented text format (see [`parse_model`]
//! for the grammar) or taken from the built-in library ([`builtin_model`]).
//! A parsed network is validated structurally and numerically before it is
//! handed out, and is immutable afterwards, so it can be shared freely
//! across threads.

mod builtins;
mod error;
mod expr;
mod grid;
mod network;
mod parser;
mod printer;

pub use builtins::{builtin_model, builtin_source, ModelLibraryEntry, BUILTIN_NAMES};
pub use error::{EvalError, ModelError};
pub use expr::PropensityExpr;
pub use grid::SimGrid;
pub use network::{Constraint, ParamValue, Parameter, Reaction, ReactionNetwork};
pub use parser::{parse_model, parse_network, ParsedModel};
pub use printer::print_model;
