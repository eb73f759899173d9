//! Native type systems for λ-theories with rewrite semantics: terms modulo
//! structural equations, bounded exploration of their behavior, and a
//! predicate logic mixing structural patterns with temporal modalities.

pub mod behavior;
pub mod bisim;
pub mod error;
pub mod predicate;
pub mod print;
pub mod rewrite;
pub mod sort;
pub mod syntax;
pub mod term;
pub mod theories;
pub mod theory;
pub mod universe;

pub use error::{Error, Result};
pub use sort::{name, Name, Sort};
pub use term::{Assignment, Term};
pub use theory::{check_sort, validate_theory, Diagnostic, Theory};
