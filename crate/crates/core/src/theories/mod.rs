//! Built-in theories, user theory lookup, refinement and theory morphisms.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::syntax::theory_file::parse_theory;
use crate::theory::{validate_theory, Theory};

pub mod morphism;
pub mod refine;

pub const BUILTIN_NAMES: [&str; 6] = ["rho-pi", "pi", "nlambda", "graph", "cat", "heap"];

pub fn builtin_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "rho-pi" => include_str!("../../theories/rho-pi.ntt"),
        "pi" => include_str!("../../theories/pi.ntt"),
        "nlambda" => include_str!("../../theories/nlambda.ntt"),
        "graph" => include_str!("../../theories/graph.ntt"),
        "cat" => include_str!("../../theories/cat.ntt"),
        "heap" => include_str!("../../theories/heap.ntt"),
        _ => return None,
    })
}

pub fn builtin(name: &str) -> Result<Theory> {
    let src = builtin_source(name).ok_or_else(|| Error::UnknownTheory(name.to_string()))?;
    strict(parse_theory(src)?)
}

fn strict(th: Theory) -> Result<Theory> {
    let diags = validate_theory(&th);
    if diags.is_empty() {
        Ok(th)
    } else {
        let msgs: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        Err(Error::InvalidTheory(msgs.join("; ")))
    }
}

/// Resolves a theory reference: a built-in name, a path to a file, or a
/// `<name>.ntt` file in one of the `NTT_THEORY_PATH` directories.
/// The result is parsed but not validated.
pub fn resolve_theory(reference: &str) -> Result<Theory> {
    if let Some(src) = builtin_source(reference) {
        return parse_theory(src);
    }
    let direct = PathBuf::from(reference);
    if direct.is_file() {
        return read(&direct);
    }
    if let Ok(dirs) = std::env::var("NTT_THEORY_PATH") {
        for dir in std::env::split_paths(&dirs) {
            let p = dir.join(format!("{reference}.ntt"));
            if p.is_file() {
                return read(&p);
            }
        }
    }
    Err(Error::UnknownTheory(reference.to_string()))
}

fn read(p: &std::path::Path) -> Result<Theory> {
    let src = std::fs::read_to_string(p).map_err(|e| Error::UnknownTheory(format!("{}: {e}", p.display())))?;
    parse_theory(&src)
}

/// Like [`resolve_theory`] but fails on any diagnostic.
pub fn load_theory(reference: &str) -> Result<Theory> {
    strict(resolve_theory(reference)?)
}
