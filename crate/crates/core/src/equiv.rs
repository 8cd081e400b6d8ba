//! Structural equivalence: the three commutation axioms, a brute-force
//! closure oracle, the net-based decision procedure, and a generic harness
//! checking that an equivalence is a strong bisimulation for a rewriting
//! relation.
//!
//! ```text
//! (\y.t)[x<-s]    ==  \y.t[x<-s]      y not in fv(s)
//! (t u)[x<-s]     ==  t[x<-s] u       x not in fv(u)
//! t[x<-s][y<-u]   ==  t[y<-u][x<-s]   y not in fv(s), x not in fv(u)
//! ```

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::net::{net_iso, Net};
use crate::netrewrite::{find_net_redexes, step_net};
use crate::rewrite::{find_term_redexes, step, RedexKind};
use crate::term::{AlphaKey, Expression};
use crate::translate::translate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EquivAxiom {
    Lambda,
    AppLeft,
    Com,
    /// `(t u)[x<-s] == t u[x<-s]` if `x` is not free in `t`. Not part of the
    /// equivalence; kept as a mutant for the bisimulation harness.
    AppRight,
}

impl fmt::Display for EquivAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquivAxiom::Lambda => "lambda",
            EquivAxiom::AppLeft => "@l",
            EquivAxiom::Com => "com",
            EquivAxiom::AppRight => "@r",
        })
    }
}

pub const STANDARD_AXIOMS: [EquivAxiom; 3] = [EquivAxiom::Lambda, EquivAxiom::AppLeft, EquivAxiom::Com];

/// Terms one axiom away from `t`, in either direction, at any position.
pub fn equiv_neighbors(t: &Expression) -> Vec<Expression> {
    neighbors_with(t, &STANDARD_AXIOMS)
}

pub fn neighbors_with(t: &Expression, axioms: &[EquivAxiom]) -> Vec<Expression> {
    let mut out = Vec::new();
    at_root(t, axioms, &mut out);
    match t {
        Expression::Var(_) | Expression::Hole(_) => {}
        Expression::Abs(x, b) => {
            out.extend(neighbors_with(b, axioms).into_iter().map(|b| Expression::Abs(x.clone(), Box::new(b))));
        }
        Expression::App(f, a) => {
            out.extend(neighbors_with(f, axioms).into_iter().map(|f| Expression::App(Box::new(f), a.clone())));
            out.extend(neighbors_with(a, axioms).into_iter().map(|a| Expression::App(f.clone(), Box::new(a))));
        }
        Expression::ESub(b, x, d) => {
            out.extend(
                neighbors_with(b, axioms).into_iter().map(|b| Expression::ESub(Box::new(b), x.clone(), d.clone())),
            );
            out.extend(
                neighbors_with(d, axioms).into_iter().map(|d| Expression::ESub(b.clone(), x.clone(), Box::new(d))),
            );
        }
    }
    out
}

fn at_root(t: &Expression, axioms: &[EquivAxiom], out: &mut Vec<Expression>) {
    use Expression::{Abs, App, ESub};
    for axiom in axioms {
        match (axiom, t) {
            (EquivAxiom::Lambda, ESub(b, x, s)) => {
                if let Abs(y, body) = &**b {
                    if !s.occurs_free(y) {
                        out.push(Expression::abs(y.clone(), Expression::esub((**body).clone(), x.clone(), (**s).clone())));
                    }
                }
            }
            (EquivAxiom::Lambda, Abs(y, b)) => {
                if let ESub(body, x, s) = &**b {
                    if !s.occurs_free(y) {
                        out.push(Expression::esub(Expression::abs(y.clone(), (**body).clone()), x.clone(), (**s).clone()));
                    }
                }
            }
            _ => {}
        }
        match (axiom, t) {
            (EquivAxiom::AppLeft, ESub(b, x, s)) => {
                if let App(f, u) = &**b {
                    if !u.occurs_free(x) {
                        out.push(Expression::app(Expression::esub((**f).clone(), x.clone(), (**s).clone()), (**u).clone()));
                    }
                }
            }
            (EquivAxiom::AppLeft, App(f, u)) => {
                if let ESub(body, x, s) = &**f {
                    if !u.occurs_free(x) {
                        out.push(Expression::esub(Expression::app((**body).clone(), (**u).clone()), x.clone(), (**s).clone()));
                    }
                }
            }
            (EquivAxiom::Com, ESub(b, y, u)) => {
                if let ESub(body, x, s) = &**b {
                    if !s.occurs_free(y) && !u.occurs_free(x) {
                        out.push(Expression::esub(
                            Expression::esub((**body).clone(), y.clone(), (**u).clone()),
                            x.clone(),
                            (**s).clone(),
                        ));
                    }
                }
            }
            (EquivAxiom::AppRight, ESub(b, x, s)) => {
                if let App(f, u) = &**b {
                    if !f.occurs_free(x) {
                        out.push(Expression::app((**f).clone(), Expression::esub((**u).clone(), x.clone(), (**s).clone())));
                    }
                }
            }
            (EquivAxiom::AppRight, App(f, a)) => {
                if let ESub(u, x, s) = &**a {
                    if !f.occurs_free(x) {
                        out.push(Expression::esub(Expression::app((**f).clone(), (**u).clone()), x.clone(), (**s).clone()));
                    }
                }
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("closure not exhausted after {bound} rounds ({reached} terms reached)")]
    BoundExceeded { bound: usize, reached: usize },
}

/// The equivalence class of `t` under `axioms`, exhausted by breadth-first
/// search. Fails if the frontier is still non-empty after `bound` rounds.
pub fn closure_with(t: &Expression, axioms: &[EquivAxiom], bound: usize) -> Result<Vec<Expression>, EquivError> {
    let mut seen: HashSet<AlphaKey> = HashSet::from([t.alpha_key()]);
    let mut out = vec![t.clone()];
    let mut frontier = VecDeque::from([t.clone()]);
    for _ in 0..bound {
        let mut next = VecDeque::new();
        for e in frontier {
            for n in neighbors_with(&e, axioms) {
                if seen.insert(n.alpha_key()) {
                    out.push(n.clone());
                    next.push_back(n);
                }
            }
        }
        if next.is_empty() {
            return Ok(out);
        }
        frontier = next;
    }
    if frontier.is_empty() {
        Ok(out)
    } else {
        Err(EquivError::BoundExceeded { bound, reached: out.len() })
    }
}

/// Default bound: the square of the size. Axioms only permute
/// constructors, so classes are finite and shallow.
pub fn default_bound(t: &Expression) -> usize {
    t.size() * t.size()
}

/// The ≡-class of `t`.
pub fn equiv_closure(t: &Expression) -> BTreeSet<Expression> {
    closure_with(t, &STANDARD_AXIOMS, default_bound(t).max(1))
        .expect("classes are exhausted within the default bound")
        .into_iter()
        .collect()
}

/// Brute-force decision of `t ≡ s`, modulo α.
pub fn equiv_oracle(t: &Expression, s: &Expression, bound: usize) -> Result<bool, EquivError> {
    if t.size() != s.size() || t.free_vars() != s.free_vars() {
        return Ok(false);
    }
    let target = s.alpha_key();
    Ok(closure_with(t, &STANDARD_AXIOMS, bound)?.iter().any(|e| e.alpha_key() == target))
}

/// Decision of `t ≡ s` through isomorphism of the translations.
pub fn equiv_via_nets(t: &Expression, s: &Expression) -> bool {
    if t.free_vars() != s.free_vars() {
        return false;
    }
    let empty = BTreeSet::new();
    match (translate(&t.well_name(), &empty), translate(&s.well_name(), &empty)) {
        (Ok(p), Ok(q)) => net_iso(&p, &q).is_some(),
        _ => false,
    }
}

/// A rewriting relation together with an equivalence on the same objects,
/// both given by finite enumerators.
pub trait RewritingSystemModulo: Sync {
    type Object: Clone + Send + Sync;

    fn steps(&self, t: &Self::Object) -> Vec<(RedexKind, Self::Object)>;

    /// Objects one equivalence step away.
    fn equiv_one(&self, t: &Self::Object) -> Vec<Self::Object>;

    /// Whether `u` is equivalent to one of `candidates`.
    fn equivalent_any(&self, u: &Self::Object, candidates: &[Self::Object]) -> bool;

    fn show(&self, t: &Self::Object) -> String;
}

/// The calculus with its structural equivalence, or a variant of it.
#[derive(Debug, Clone)]
pub struct Lsc {
    pub axioms: Vec<EquivAxiom>,
}

impl Lsc {
    pub fn standard() -> Self {
        Lsc { axioms: STANDARD_AXIOMS.to_vec() }
    }

    /// The equivalence extended with the right-application axiom.
    pub fn with_app_right() -> Self {
        let mut axioms = STANDARD_AXIOMS.to_vec();
        axioms.push(EquivAxiom::AppRight);
        Lsc { axioms }
    }
}

impl RewritingSystemModulo for Lsc {
    type Object = Expression;

    fn steps(&self, t: &Expression) -> Vec<(RedexKind, Expression)> {
        find_term_redexes(t)
            .into_iter()
            .map(|r| (r.kind(), step(t, &r).expect("enumerated redexes apply")))
            .collect()
    }

    fn equiv_one(&self, t: &Expression) -> Vec<Expression> {
        neighbors_with(t, &self.axioms)
    }

    fn equivalent_any(&self, u: &Expression, candidates: &[Expression]) -> bool {
        if candidates.is_empty() {
            return false;
        }
        let keys: HashSet<AlphaKey> = candidates.iter().map(Expression::alpha_key).collect();
        let class = closure_with(u, &self.axioms, default_bound(u).max(1)).expect("finite class");
        class.iter().any(|e| keys.contains(&e.alpha_key()))
    }

    fn show(&self, t: &Expression) -> String {
        t.to_string()
    }
}

/// Nets with cut elimination, where the equivalence is isomorphism: no
/// one-step neighbours besides the object itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct Nets;

impl RewritingSystemModulo for Nets {
    type Object = Net;

    fn steps(&self, p: &Net) -> Vec<(RedexKind, Net)> {
        find_net_redexes(p)
            .into_iter()
            .map(|r| (r.kind, step_net(p, &r).expect("enumerated redexes apply")))
            .collect()
    }

    fn equiv_one(&self, _: &Net) -> Vec<Net> {
        Vec::new()
    }

    fn equivalent_any(&self, u: &Net, candidates: &[Net]) -> bool {
        candidates.iter().any(|c| net_iso(u, c).is_some())
    }

    fn show(&self, p: &Net) -> String {
        crate::net::to_json(p).to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BisimCounterexample {
    pub t: String,
    pub s: String,
    pub kind: RedexKind,
    pub reduct: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BisimReport {
    pub samples: usize,
    pub pairs: usize,
    pub steps_checked: usize,
    pub counterexamples: Vec<BisimCounterexample>,
}

impl BisimReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn merge(mut self, other: BisimReport) -> BisimReport {
        self.samples += other.samples;
        self.pairs += other.pairs;
        self.steps_checked += other.steps_checked;
        self.counterexamples.extend(other.counterexamples);
        self
    }
}

/// Checks one sample: for every `s` one equivalence step away from `t` and
/// every step `t ->a u`, some `s ->a r` has `u` equivalent to `r`.
pub fn check_sample<S: RewritingSystemModulo>(sys: &S, t: &S::Object) -> BisimReport {
    let mut report = BisimReport { samples: 1, ..Default::default() };
    let neighbours = sys.equiv_one(t);
    if neighbours.is_empty() {
        return report;
    }
    let steps = sys.steps(t);
    for s in neighbours {
        report.pairs += 1;
        let answers = sys.steps(&s);
        for (kind, u) in &steps {
            report.steps_checked += 1;
            let same_kind: Vec<S::Object> =
                answers.iter().filter(|(k, _)| k == kind).map(|(_, r)| r.clone()).collect();
            if !sys.equivalent_any(u, &same_kind) {
                report.counterexamples.push(BisimCounterexample {
                    t: sys.show(t),
                    s: sys.show(&s),
                    kind: *kind,
                    reduct: sys.show(u),
                });
            }
        }
    }
    report
}

pub fn check_strong_bisimulation<S, I>(sys: &S, samples: I) -> BisimReport
where
    S: RewritingSystemModulo,
    I: IntoIterator<Item = S::Object>,
{
    samples.into_iter().fold(BisimReport::default(), |acc, t| acc.merge(check_sample(sys, &t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Expression {
        parse(s).unwrap()
    }

    #[test]
    fn axiom_instances() {
        assert!(equiv_neighbors(&p("(\\y. x)[x<-z]")).contains(&p("\\y. x[x<-z]")));
        assert!(equiv_neighbors(&p("\\y. x[x<-z]")).contains(&p("(\\y. x)[x<-z]")));
        assert!(equiv_neighbors(&p("x[y<-z][w<-v]")).contains(&p("x[w<-v][y<-z]")));
        assert!(equiv_neighbors(&p("(y x)[x<-z]")).is_empty());
        assert!(!equiv_neighbors(&p("(x y)[x<-z]")).is_empty());
        // side conditions
        assert!(equiv_neighbors(&p("(\\y. x)[x<-y]")).is_empty());
        assert!(equiv_neighbors(&p("x[x<-y][y<-z]")).is_empty());
        assert!(neighbors_with(&p("(y x)[x<-z]"), &[EquivAxiom::AppRight]).contains(&p("y x[x<-z]")));
    }

    #[test]
    fn neighbours_preserve_size_and_free_variables() {
        let t = p("((\\a. (x a)[x<-b]) c)[b<-d][c<-e]");
        for n in equiv_neighbors(&t) {
            assert_eq!(n.size(), t.size());
            assert_eq!(n.free_vars(), t.free_vars());
            let mut b1 = n.binders();
            let mut b2 = t.binders();
            b1.sort();
            b2.sort();
            assert_eq!(b1, b2);
        }
    }

    #[test]
    fn oracles_agree_on_examples() {
        let pairs = [
            ("(\\y. x)[x<-z]", "\\y. x[x<-z]", true),
            ("(y x)[x<-z]", "y x[x<-z]", false),
            ("x[y<-z][w<-v]", "x[w<-v][y<-z]", true),
            ("((x w) u)[x<-y][w<-v]", "(x[x<-y] w[w<-v]) u", false),
            ("((x u) w)[x<-y][w<-v]", "(x[x<-y] u) w[w<-v]", false),
            ("((x u) a)[x<-y][u<-v]", "((x[x<-y] u) a)[u<-v]", true),
            ("\\a. a", "\\b. b", true),
        ];
        for (t, s, expected) in pairs {
            let (t, s) = (p(t), p(s));
            assert_eq!(equiv_oracle(&t, &s, 100), Ok(expected), "{t} {s}");
            assert_eq!(equiv_via_nets(&t, &s), expected, "{t} {s}");
        }
    }

    #[test]
    fn bound_exceeded() {
        let t = p("x[a<-b][c<-d][e<-f]");
        assert!(matches!(equiv_oracle(&t, &p("x[e<-f][c<-d][a<-b]"), 1), Err(EquivError::BoundExceeded { .. })));
        assert_eq!(equiv_closure(&t).len(), 6);
    }

    #[test]
    fn bisimulation_harness() {
        let report = check_strong_bisimulation(&Lsc::standard(), [p("((\\w. w) x)[x<-z]"), p("(\\y. x x)[x<-z]")]);
        assert!(report.passed(), "{report:?}");
        assert!(report.steps_checked > 0);
        let report = check_strong_bisimulation(&Lsc::with_app_right(), [p("((\\w. w) x)[x<-z]")]);
        assert!(!report.passed());
        assert_eq!(report.counterexamples[0].kind, RedexKind::M);
        let report = check_strong_bisimulation(&Nets, [translate(&p("(\\w. w) x"), &BTreeSet::new()).unwrap()]);
        assert!(report.passed());
        assert_eq!(report.pairs, 0);
    }
}
