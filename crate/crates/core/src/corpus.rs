//! Exhaustive enumeration of small terms.
//!
//! Terms are generated as canonical α-representatives: binders are named
//! `v0`, `v1`, ... in pre-order, so every term is well-named and no two
//! generated terms are α-equivalent.

use serde::{Deserialize, Serialize};

use crate::term::{Expression, VarName};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    /// Largest number of constructors.
    pub max_size: usize,
    pub free_pool: Vec<VarName>,
    /// With `false` binders are named after their depth, so names repeat
    /// across branches (the terms are still pairwise non-α-equivalent).
    pub well_named: bool,
}

impl CorpusSpec {
    pub fn new(max_size: usize) -> Self {
        CorpusSpec { max_size, free_pool: ["x", "y", "z"].map(VarName::new).to_vec(), well_named: true }
    }

    pub fn with_pool(mut self, pool: &[&str]) -> Self {
        self.free_pool = pool.iter().map(VarName::new).collect();
        self
    }
}

type Emit<'a> = dyn FnMut(Expression, usize) + 'a;

struct Generator<'s> {
    spec: &'s CorpusSpec,
    /// `v0`, `v1`, ...: a term of size n has fewer than n binders
    names: Vec<VarName>,
}

impl Generator<'_> {
    /// Terms of exactly `n` constructors with `scope` in scope; `next` is the
    /// index of the next binder, passed on to `emit` updated.
    fn go(&self, n: usize, scope: &mut Vec<VarName>, next: usize, emit: &mut Emit<'_>) {
        if n == 1 {
            for x in self.spec.free_pool.iter().chain(scope.iter()) {
                emit(Expression::Var(x.clone()), next);
            }
            return;
        }
        let x = self.names[if self.spec.well_named { next } else { scope.len() }].clone();
        scope.push(x.clone());
        self.go(n - 1, scope, next + 1, &mut |body, after| emit(Expression::Abs(x.clone(), Box::new(body)), after));
        scope.pop();
        for a in 1..n - 1 {
            let mut outer = scope.clone();
            self.go(a, scope, next, &mut |f, after| {
                self.go(n - 1 - a, &mut outer, after, &mut |arg, end| {
                    emit(Expression::App(Box::new(f.clone()), Box::new(arg)), end)
                });
            });
        }
        // the binder of a substitution comes first in pre-order
        for a in 1..n - 1 {
            let mut outer = scope.clone();
            scope.push(x.clone());
            self.go(a, scope, next + 1, &mut |body, after| {
                self.go(n - 1 - a, &mut outer, after, &mut |def, end| {
                    emit(Expression::ESub(Box::new(body.clone()), x.clone(), Box::new(def)), end)
                });
            });
            scope.pop();
        }
    }
}

/// Calls `f` on every term of the corpus, smaller sizes first.
pub fn for_each_term(spec: &CorpusSpec, mut f: impl FnMut(&Expression)) {
    let names = (0..spec.max_size).map(|i| VarName::new(format!("v{i}"))).collect();
    let g = Generator { spec, names };
    for n in 1..=spec.max_size {
        g.go(n, &mut Vec::new(), 0, &mut |t, _| f(&t));
    }
}

pub fn enumerate_terms(spec: &CorpusSpec) -> Vec<Expression> {
    let mut out = Vec::new();
    for_each_term(spec, |t| out.push(t.clone()));
    out
}

/// Number of terms of each size `0..=max_size` over a pool of `pool`
/// free names, by dynamic programming on (size, binders in scope).
pub fn count_terms(max_size: usize, pool: usize) -> Vec<u64> {
    let depth = max_size + 1;
    // t[n][k]
    let mut t = vec![vec![0u64; depth + 1]; max_size + 1];
    for n in 1..=max_size {
        for k in 0..depth {
            let mut c = if n == 1 { (pool + k) as u64 } else { t[n - 1][k + 1] };
            for a in 1..n.saturating_sub(1) {
                let b = n - 1 - a;
                c += t[a][k] * t[b][k] + t[a][k + 1] * t[b][k];
            }
            t[n][k] = c;
        }
    }
    (0..=max_size).map(|n| t[n][0]).collect()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn small_sizes() {
        let terms = enumerate_terms(&CorpusSpec::new(1).with_pool(&["x"]));
        assert_eq!(terms, vec![Expression::var("x")]);
        let terms = enumerate_terms(&CorpusSpec::new(3).with_pool(&["x"]));
        let printed: HashSet<String> = terms.iter().map(|t| t.to_string()).collect();
        for s in ["\\v0. v0", "x x", "v0[v0<-x]", "x[v0<-x]", "\\v0. \\v1. x"] {
            if crate::syntax::parse(s).unwrap().size() <= 3 {
                assert!(printed.contains(s), "{s} in {printed:?}");
            }
        }
        // hand count for one free name: size 1: x; size 2: \v0.x, \v0.v0;
        // size 3: 3 abstractions, 1 application, 2 substitutions
        assert_eq!(terms.len(), 1 + 2 + 6);
    }

    #[test]
    fn counts_match_the_recurrence() {
        let counts = count_terms(7, 3);
        let mut cumulative = 0;
        let mut expected = Vec::new();
        for c in &counts[1..] {
            cumulative += c;
            expected.push(cumulative);
        }
        assert_eq!(expected, [3, 7, 33, 130, 703, 3698, 21867]);
        let mut by_size = vec![0u64; 8];
        for_each_term(&CorpusSpec::new(7), |t| by_size[t.size()] += 1);
        assert_eq!(by_size, counts);
    }

    #[test]
    fn canonical_and_distinct() {
        let mut keys = HashSet::new();
        for_each_term(&CorpusSpec::new(5), |t| {
            assert!(t.is_well_named(), "{t}");
            assert!(keys.insert(t.alpha_key()), "duplicate {t}");
        });
        let mut keys = HashSet::new();
        let spec = CorpusSpec { well_named: false, ..CorpusSpec::new(5) };
        for_each_term(&spec, |t| assert!(keys.insert(t.alpha_key()), "duplicate {t}"));
        assert_eq!(keys.len() as u64, count_terms(5, 3).iter().sum::<u64>());
    }
}
