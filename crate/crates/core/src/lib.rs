//! Lattice-linear-algebraic expressions and finite models of free Banach
//! f-algebras.

pub mod discretizer;
pub mod expr;
pub mod free;
pub mod models;
pub mod rewrite;
pub mod star;
pub mod tau;

pub use expr::{parse, Assignment, EvalError, Expr, ParseError};
