use thiserror::Error;

use crate::sort::Sort;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("ill-sorted application: {0}")]
    IllSorted(String),

    #[error("sort mismatch: expected {expected}, found {found}")]
    SortMismatch { expected: Sort, found: Sort },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("unknown constructor `{0}`")]
    UnknownConstructor(String),

    #[error("unknown theory `{0}`")]
    UnknownTheory(String),

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("non-composable steps: {0}")]
    NonComposable(String),

    #[error("fixed point body is not monotone in `{0}`")]
    NonMonotoneFix(String),

    #[error("hom predicate applied to a non-abstraction")]
    NonAbstraction,

    #[error("sort {0} is not in the image of the morphism")]
    SortNotInImage(Sort),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("invalid theory: {0}")]
    InvalidTheory(String),
}

impl Error {
    pub fn parse(pos: usize, msg: impl Into<String>) -> Error {
        Error::Parse { pos, msg: msg.into() }
    }

    /// Parse, sort and resource errors map to distinct CLI exit codes.
    pub fn is_sort_error(&self) -> bool {
        matches!(
            self,
            Error::IllSorted(_)
                | Error::SortMismatch { .. }
                | Error::UnboundVariable(_)
                | Error::NonMonotoneFix(_)
                | Error::NonAbstraction
                | Error::SortNotInImage(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
