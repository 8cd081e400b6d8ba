//! A rewriting kernel for the linear substitution calculus and its proof
//! nets: terms, nets, translation, correctness, read back, structural
//! equivalence and cut elimination.

pub mod corpus;
pub mod equiv;
pub mod net;
pub mod netrewrite;
pub mod readback;
pub mod rewrite;
pub mod suite;
pub mod syntax;
pub mod term;
pub mod translate;

pub use net::{Net, NetBuilder};
pub use syntax::parse;
pub use term::{Expression, Position, VarName};
pub use translate::translate;
