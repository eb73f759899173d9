//! Canonical forms, matching, one-step rewriting and bounded exploration.

pub mod canon;
pub mod explore;
pub mod matching;
pub mod step;

pub use canon::{canonicalize, Canon};
pub use explore::{compose_trace, explore, Edge, RewriteGraph, Trace};
pub use matching::{match_term, Matcher};
pub use step::{replay, step, RewriteStep, Stepper};
