//! Upper bounds on the connective constant of self-avoiding walks on the
//! square lattice.
//!
//! A finite automaton is built whose states are short walk suffixes in a
//! canonical frame. Every self-avoiding walk that can be extended in both
//! directions maps to at least one accepted word, so the growth rate of the
//! automaton (its largest eigenvalue, bounded from above by power iteration)
//! bounds the connective constant.

pub mod automaton;
pub mod geometry;
pub mod legality;
pub mod options;
pub mod oracle;
pub mod persist;
pub mod report;
pub mod simplify;
pub mod spectral;
pub mod state;
pub mod verify;

pub use geometry::{Direction, Point, Transform};
pub use options::Features;
pub use state::{AllowanceClass, Move, StateId, StateKey, Walk};
