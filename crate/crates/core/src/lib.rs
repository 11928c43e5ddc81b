//! Exact verification of extracted rules against ReLU and Boolean networks.
//!
//! All arithmetic is over exact rationals ([`arith::Rational`]). A verdict of
//! [`verify::Verdict::Holds`] is a proof; a failure carries a concrete
//! counterexample and a certificate that can be re-checked independently.

pub mod arith;
pub mod boolean;
pub mod cnf;
pub mod constructions;
pub mod error;
pub mod io;
pub mod lp;
pub mod network;
mod query;
pub mod rule;
pub mod verify;

pub use arith::{QMatrix, QVector, Rational};
pub use error::{Error, Result};
pub use network::{Activation, Layer, Network};
pub use rule::{Cmp, Formula, LinearAtom, Relation, Rule, Witness};
