//! Sorts of a λ-theory: base sorts, finite products and function sorts.

use std::fmt;
use std::sync::Arc;

/// Interned-ish identifier used for sorts, constructors and variables.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A sort. Products and functions are structural: equality is tree equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sort {
    Base(Name),
    Product(Vec<Sort>),
    Func(Vec<Sort>, Box<Sort>),
}

impl Sort {
    pub fn base(n: &str) -> Sort {
        Sort::Base(name(n))
    }

    pub fn func(dom: Vec<Sort>, cod: Sort) -> Sort {
        Sort::Func(dom, Box::new(cod))
    }

    /// Product of a list of sorts; a singleton list is the sort itself.
    pub fn tuple_of(mut sorts: Vec<Sort>) -> Sort {
        if sorts.len() == 1 {
            sorts.pop().unwrap()
        } else {
            Sort::Product(sorts)
        }
    }

    pub fn is_func(&self) -> bool {
        matches!(self, Sort::Func(..))
    }

    pub fn base_names(&self, out: &mut Vec<Name>) {
        match self {
            Sort::Base(n) => out.push(n.clone()),
            Sort::Product(ss) => ss.iter().for_each(|s| s.base_names(out)),
            Sort::Func(d, c) => {
                d.iter().for_each(|s| s.base_names(out));
                c.base_names(out);
            }
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Base(n) => write!(f, "{n}"),
            Sort::Product(ss) => {
                write!(f, "(")?;
                for (i, s) in ss.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
            Sort::Func(dom, cod) => {
                write!(f, "[")?;
                for (i, s) in dom.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, " -> {cod}]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_equality() {
        let a = Sort::func(vec![Sort::base("N")], Sort::base("P"));
        let b = Sort::func(vec![Sort::base("N")], Sort::base("P"));
        assert_eq!(a, b);
        assert_ne!(a, Sort::func(vec![Sort::base("P")], Sort::base("P")));
        assert_eq!(a.to_string(), "[N -> P]");
    }

    #[test]
    fn singleton_tuple_collapses() {
        assert_eq!(Sort::tuple_of(vec![Sort::base("N")]), Sort::base("N"));
        assert_eq!(
            Sort::tuple_of(vec![Sort::base("N"), Sort::base("P")]).to_string(),
            "(N, P)"
        );
    }
}
