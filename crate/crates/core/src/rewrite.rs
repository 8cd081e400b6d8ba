//! The three rewrite rules of the calculus, closed under contexts.
//!
//! ```text
//! m   L<\x.t> s        ->  L<t[x<-s]>
//! e   C<<x>>[x<-s]     ->  C<<s>>[x<-s]
//! gc  t[x<-s]          ->  t              (x not free in t)
//! ```
//!
//! `L` is a substitution context (a hole under explicit substitutions only)
//! and `C` an arbitrary context; neither may capture the free variables of
//! `s`. On well-named terms both side conditions hold automatically, and the
//! e-rule freshens the copy of `s` so that reducts stay well-named.
//!
//! Also here: the unfolding of explicit substitutions into meta-level
//! substitution and a plain leftmost-outermost β evaluator, used together
//! as an independent oracle for normal forms.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{Expression, FreshNames, Position, VarName};

/// Rule kinds, shared by terms and nets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RedexKind {
    M,
    E,
    Gc,
}

impl fmt::Display for RedexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RedexKind::M => "m",
            RedexKind::E => "e",
            RedexKind::Gc => "gc",
        })
    }
}

/// A redex of a term, identified by the position of the application (m) or
/// of the explicit substitution (e, gc). Identity is stable under renaming
/// of bound variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermRedex {
    /// `L<\x.t> s` at `position`; `subst_depth` is the number of explicit
    /// substitutions in `L`.
    M { position: Position, subst_depth: usize, binder: VarName },
    /// `C<<x>>[x<-s]` at `position`, replacing the occurrence at `occurrence`
    /// (an absolute position inside the body).
    E { position: Position, occurrence: Position, binder: VarName },
    /// `t[x<-s]` at `position` with no free `x` in `t`.
    Gc { position: Position, binder: VarName },
}

impl TermRedex {
    pub fn kind(&self) -> RedexKind {
        match self {
            TermRedex::M { .. } => RedexKind::M,
            TermRedex::E { .. } => RedexKind::E,
            TermRedex::Gc { .. } => RedexKind::Gc,
        }
    }

    pub fn position(&self) -> &Position {
        match self {
            TermRedex::M { position, .. } | TermRedex::E { position, .. } | TermRedex::Gc { position, .. } => {
                position
            }
        }
    }

    pub fn binder(&self) -> &VarName {
        match self {
            TermRedex::M { binder, .. } | TermRedex::E { binder, .. } | TermRedex::Gc { binder, .. } => binder,
        }
    }

    /// The closure context of the step: `t` with the redex replaced by a hole.
    pub fn outer_context(&self, t: &Expression) -> Result<Expression, RewriteError> {
        let (ctx, _) = t.decompose_at(self.position()).map_err(|_| RewriteError::StaleRedex(self.clone()))?;
        Ok(ctx)
    }
}

impl fmt::Display for TermRedex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermRedex::M { position, .. } => write!(f, "m@{position}"),
            TermRedex::E { position, occurrence, .. } => write!(f, "e@{position}:{occurrence}"),
            TermRedex::Gc { position, .. } => write!(f, "gc@{position}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("redex {0} does not match the term")]
    StaleRedex(TermRedex),
    #[error("fuel exhausted after {} steps", .counts.total())]
    FuelExhausted { last: Expression, counts: StepCounts },
    #[error("the β evaluator only accepts pure terms (no holes, no explicit substitutions)")]
    NotPure,
}

/// Steps taken, per kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCounts {
    pub m: usize,
    pub e: usize,
    pub gc: usize,
}

impl StepCounts {
    pub fn total(&self) -> usize {
        self.m + self.e + self.gc
    }

    pub fn record(&mut self, kind: RedexKind) {
        match kind {
            RedexKind::M => self.m += 1,
            RedexKind::E => self.e += 1,
            RedexKind::Gc => self.gc += 1,
        }
    }
}

/// All redexes of `t`, ordered by position (outer before inner, left before
/// right); the e-redexes of one substitution come in occurrence order.
pub fn find_term_redexes(t: &Expression) -> Vec<TermRedex> {
    let mut out = Vec::new();
    collect_redexes(t, &mut Vec::new(), &mut out);
    out
}

fn collect_redexes(t: &Expression, here: &mut Vec<u8>, out: &mut Vec<TermRedex>) {
    match t {
        Expression::Var(_) | Expression::Hole(_) => {}
        Expression::Abs(_, b) => {
            here.push(0);
            collect_redexes(b, here, out);
            here.pop();
        }
        Expression::App(f, a) => {
            let mut head = &**f;
            let mut depth = 0;
            while let Expression::ESub(b, _, _) = head {
                head = b;
                depth += 1;
            }
            if let Expression::Abs(x, _) = head {
                out.push(TermRedex::M { position: Position(here.clone()), subst_depth: depth, binder: x.clone() });
            }
            here.push(0);
            collect_redexes(f, here, out);
            here.pop();
            here.push(1);
            collect_redexes(a, here, out);
            here.pop();
        }
        Expression::ESub(b, x, d) => {
            let mut occurrences = Vec::new();
            here.push(0);
            collect_occurrences(b, x, here, &mut occurrences);
            here.pop();
            let position = Position(here.clone());
            if occurrences.is_empty() {
                out.push(TermRedex::Gc { position, binder: x.clone() });
            } else {
                out.extend(occurrences.into_iter().map(|occurrence| TermRedex::E {
                    position: position.clone(),
                    occurrence,
                    binder: x.clone(),
                }));
            }
            here.push(0);
            collect_redexes(b, here, out);
            here.pop();
            here.push(1);
            collect_redexes(d, here, out);
            here.pop();
        }
    }
}

fn collect_occurrences(t: &Expression, x: &VarName, here: &mut Vec<u8>, out: &mut Vec<Position>) {
    match t {
        Expression::Var(y) => {
            if y == x {
                out.push(Position(here.clone()));
            }
        }
        Expression::Hole(_) => {}
        Expression::Abs(y, b) => {
            if y != x {
                here.push(0);
                collect_occurrences(b, x, here, out);
                here.pop();
            }
        }
        Expression::App(f, a) => {
            here.push(0);
            collect_occurrences(f, x, here, out);
            here.pop();
            here.push(1);
            collect_occurrences(a, x, here, out);
            here.pop();
        }
        Expression::ESub(b, y, d) => {
            if y != x {
                here.push(0);
                collect_occurrences(b, x, here, out);
                here.pop();
            }
            here.push(1);
            collect_occurrences(d, x, here, out);
            here.pop();
        }
    }
}

/// Contracts `r` in `t`.
pub fn step(t: &Expression, r: &TermRedex) -> Result<Expression, RewriteError> {
    let stale = || RewriteError::StaleRedex(r.clone());
    let focus = t.subterm(r.position()).ok_or_else(stale)?;
    let contracted = match (r, focus) {
        (TermRedex::M { subst_depth, binder, .. }, Expression::App(f, s)) => {
            contract_m(f, s, *subst_depth, binder).ok_or_else(stale)?
        }
        (TermRedex::E { position, occurrence, binder }, Expression::ESub(body, x, s)) if x == binder => {
            if !position.child(0).is_prefix_of(occurrence) {
                return Err(stale());
            }
            let relative = Position(occurrence.0[position.len() + 1..].to_vec());
            // the occurrence must be free in the body: no binder for x above it
            let above = body.binders_above(&relative).map_err(|_| stale())?;
            if above.contains(x) || body.subterm(&relative) != Some(&Expression::Var(x.clone())) {
                return Err(stale());
            }
            let mut fresh = FreshNames::avoiding(t.all_names());
            let copy = s.freshen(&mut fresh);
            let body = body.replace_at(&relative, copy).map_err(|_| stale())?;
            Expression::ESub(Box::new(body), x.clone(), s.clone())
        }
        (TermRedex::Gc { binder, .. }, Expression::ESub(body, x, _)) if x == binder => {
            if body.occurs_free(x) {
                return Err(stale());
            }
            (**body).clone()
        }
        _ => return Err(stale()),
    };
    t.replace_at(r.position(), contracted).map_err(|_| stale())
}

fn contract_m(f: &Expression, s: &Expression, depth: usize, binder: &VarName) -> Option<Expression> {
    if depth == 0 {
        return match f {
            Expression::Abs(x, body) if x == binder => {
                Some(Expression::ESub(body.clone(), x.clone(), Box::new(s.clone())))
            }
            _ => None,
        };
    }
    match f {
        Expression::ESub(b, y, d) => {
            let inner = contract_m(b, s, depth - 1, binder)?;
            Some(Expression::ESub(Box::new(inner), y.clone(), d.clone()))
        }
        _ => None,
    }
}

/// Reduction strategies. None of them is claimed to be canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// The first redex in position order.
    LeftmostOutermost,
    /// Garbage collection first, then leftmost-outermost.
    GcEager,
    /// Breadth-first search over all reduction paths; stops at the first
    /// normal form found. Fuel bounds the number of steps explored.
    ExhaustiveEnumeration,
}

impl Strategy {
    pub fn choose<'a>(&self, redexes: &'a [TermRedex]) -> Option<&'a TermRedex> {
        match self {
            Strategy::LeftmostOutermost | Strategy::ExhaustiveEnumeration => redexes.first(),
            Strategy::GcEager => redexes.iter().find(|r| r.kind() == RedexKind::Gc).or_else(|| redexes.first()),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leftmost-outermost" | "lo" => Ok(Strategy::LeftmostOutermost),
            "gc-eager" => Ok(Strategy::GcEager),
            "exhaustive-enumeration" | "exhaustive" => Ok(Strategy::ExhaustiveEnumeration),
            other => Err(format!(
                "unknown strategy `{other}` (expected leftmost-outermost, gc-eager or exhaustive-enumeration)"
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::LeftmostOutermost => "leftmost-outermost",
            Strategy::GcEager => "gc-eager",
            Strategy::ExhaustiveEnumeration => "exhaustive-enumeration",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub term: Expression,
    pub counts: StepCounts,
}

pub fn normalize(t: &Expression, strategy: Strategy, fuel: usize) -> Result<Normalized, RewriteError> {
    normalize_traced(t, strategy, fuel, |_, _| {})
}

/// Like [`normalize`], calling `on_step` with each contracted redex and the
/// resulting term (for the exhaustive strategy: along the path found).
pub fn normalize_traced(
    t: &Expression,
    strategy: Strategy,
    fuel: usize,
    mut on_step: impl FnMut(&TermRedex, &Expression),
) -> Result<Normalized, RewriteError> {
    if strategy == Strategy::ExhaustiveEnumeration {
        return normalize_breadth_first(t, fuel, on_step);
    }
    let mut cur = t.clone();
    let mut counts = StepCounts::default();
    loop {
        let redexes = find_term_redexes(&cur);
        let Some(r) = strategy.choose(&redexes) else {
            return Ok(Normalized { term: cur, counts });
        };
        if counts.total() >= fuel {
            return Err(RewriteError::FuelExhausted { last: cur, counts });
        }
        cur = step(&cur, r)?;
        counts.record(r.kind());
        on_step(r, &cur);
    }
}

fn normalize_breadth_first(
    t: &Expression,
    fuel: usize,
    mut on_step: impl FnMut(&TermRedex, &Expression),
) -> Result<Normalized, RewriteError> {
    // parent links: index -> (parent index, redex)
    let mut nodes: Vec<(Expression, Option<(usize, TermRedex)>)> = vec![(t.clone(), None)];
    let mut seen = HashSet::from([t.alpha_key()]);
    let mut queue = VecDeque::from([0usize]);
    let mut spent = 0usize;
    while let Some(i) = queue.pop_front() {
        let redexes = find_term_redexes(&nodes[i].0);
        if redexes.is_empty() {
            let mut path = Vec::new();
            let mut j = i;
            while let Some((parent, r)) = nodes[j].1.clone() {
                path.push((r, j));
                j = parent;
            }
            let mut counts = StepCounts::default();
            for (r, j) in path.into_iter().rev() {
                counts.record(r.kind());
                on_step(&r, &nodes[j].0);
            }
            return Ok(Normalized { term: nodes[i].0.clone(), counts });
        }
        for r in redexes {
            if spent >= fuel {
                let mut counts = StepCounts::default();
                let mut j = i;
                while let Some((parent, r)) = &nodes[j].1 {
                    counts.record(r.kind());
                    j = *parent;
                }
                return Err(RewriteError::FuelExhausted { last: nodes[i].0.clone(), counts });
            }
            spent += 1;
            let next = step(&nodes[i].0, &r)?;
            if seen.insert(next.alpha_key()) {
                nodes.push((next, Some((i, r))));
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    unreachable!("the search space of a term with a redex is never empty")
}

/// Replaces every explicit substitution by meta-level substitution.
pub fn unfold(t: &Expression) -> Expression {
    match t {
        Expression::Var(_) | Expression::Hole(_) => t.clone(),
        Expression::Abs(x, b) => Expression::Abs(x.clone(), Box::new(unfold(b))),
        Expression::App(f, a) => Expression::app(unfold(f), unfold(a)),
        Expression::ESub(b, x, d) => meta_subst(&unfold(b), x, &unfold(d)),
    }
}

/// Capture-avoiding substitution `t{x := s}`.
pub fn meta_subst(t: &Expression, x: &VarName, s: &Expression) -> Expression {
    let fv_s = s.free_vars();
    subst_rec(t, x, s, &fv_s)
}

fn subst_rec(
    t: &Expression,
    x: &VarName,
    s: &Expression,
    fv_s: &std::collections::BTreeSet<VarName>,
) -> Expression {
    match t {
        Expression::Var(y) => {
            if y == x {
                s.clone()
            } else {
                t.clone()
            }
        }
        Expression::Hole(_) => t.clone(),
        Expression::App(f, a) => Expression::app(subst_rec(f, x, s, fv_s), subst_rec(a, x, s, fv_s)),
        Expression::Abs(y, b) => {
            if y == x || !b.occurs_free(x) {
                return t.clone();
            }
            let (y, b) = avoid_capture(y, b, fv_s, x);
            Expression::Abs(y, Box::new(subst_rec(&b, x, s, fv_s)))
        }
        Expression::ESub(b, y, d) => {
            let d = subst_rec(d, x, s, fv_s);
            if y == x || !b.occurs_free(x) {
                return Expression::ESub(b.clone(), y.clone(), Box::new(d));
            }
            let (y, b) = avoid_capture(y, b, fv_s, x);
            Expression::ESub(Box::new(subst_rec(&b, x, s, fv_s)), y, Box::new(d))
        }
    }
}

fn avoid_capture(
    y: &VarName,
    body: &Expression,
    fv_s: &std::collections::BTreeSet<VarName>,
    x: &VarName,
) -> (VarName, Expression) {
    if !fv_s.contains(y) {
        return (y.clone(), body.clone());
    }
    let mut fresh = FreshNames::avoiding(fv_s.iter().cloned().chain(body.all_names()).chain([x.clone()]));
    let z = fresh.fresh(y);
    let renamed = subst_rec(body, y, &Expression::Var(z.clone()), &[z.clone()].into_iter().collect());
    (z, renamed)
}

/// Leftmost-outermost β-reduction on pure terms, as an oracle.
pub fn beta_oracle(t: &Expression, fuel: usize) -> Result<(Expression, usize), RewriteError> {
    if !t.is_pure() {
        return Err(RewriteError::NotPure);
    }
    let mut cur = t.clone();
    let mut steps = 0;
    loop {
        match beta_step(&cur) {
            None => return Ok((cur, steps)),
            Some(next) => {
                if steps >= fuel {
                    return Err(RewriteError::FuelExhausted {
                        last: cur,
                        counts: StepCounts { m: steps, e: 0, gc: 0 },
                    });
                }
                cur = next;
                steps += 1;
            }
        }
    }
}

fn beta_step(t: &Expression) -> Option<Expression> {
    match t {
        Expression::App(f, a) => {
            if let Expression::Abs(x, b) = &**f {
                return Some(meta_subst(b, x, a));
            }
            if let Some(f2) = beta_step(f) {
                return Some(Expression::App(Box::new(f2), a.clone()));
            }
            beta_step(a).map(|a2| Expression::App(f.clone(), Box::new(a2)))
        }
        Expression::Abs(x, b) => beta_step(b).map(|b2| Expression::Abs(x.clone(), Box::new(b2))),
        _ => None,
    }
}

/// Church numeral `\f. \x. f (f ... x)`.
pub fn church(n: usize) -> Expression {
    let mut body = Expression::var("x");
    for _ in 0..n {
        body = Expression::app(Expression::var("f"), body);
    }
    Expression::abs("f", Expression::abs("x", body))
}

/// Counts redexes per kind; handy for comparing against nets.
pub fn redex_counts(redexes: &[TermRedex]) -> HashMap<RedexKind, usize> {
    let mut out = HashMap::new();
    for r in redexes {
        *out.entry(r.kind()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Expression {
        parse(s).unwrap()
    }

    #[test]
    fn redex_enumeration_examples() {
        let rs = find_term_redexes(&p("(\\x. x) y"));
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].kind(), RedexKind::M);

        let rs = find_term_redexes(&p("(x x)[x<-y]"));
        assert_eq!(rs.iter().map(TermRedex::kind).collect::<Vec<_>>(), vec![RedexKind::E, RedexKind::E]);
        // left occurrence first
        assert!(matches!(&rs[0], TermRedex::E { occurrence, .. } if occurrence.0 == vec![0, 0]));
        assert!(matches!(&rs[1], TermRedex::E { occurrence, .. } if occurrence.0 == vec![0, 1]));

        let rs = find_term_redexes(&p("z[x<-y]"));
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].kind(), RedexKind::Gc);
    }

    #[test]
    fn step_examples() {
        let t = p("(\\x. x) y");
        let r = &find_term_redexes(&t)[0];
        assert_eq!(step(&t, r).unwrap(), p("x[x<-y]"));

        let t = p("(x x)[x<-y]");
        let r = &find_term_redexes(&t)[0];
        assert_eq!(step(&t, r).unwrap(), p("(y x)[x<-y]"));

        let t = p("(\\x. x)[z<-w] y");
        let rs = find_term_redexes(&t);
        let m = rs.iter().find(|r| r.kind() == RedexKind::M).unwrap();
        assert!(matches!(m, TermRedex::M { subst_depth: 1, .. }));
        assert_eq!(step(&t, m).unwrap(), p("x[x<-y][z<-w]"));
    }

    #[test]
    fn e_step_freshens_the_copy() {
        let t = p("(x x)[x<-\\y. y]");
        let r = &find_term_redexes(&t)[0];
        let u = step(&t, r).unwrap();
        assert!(u.is_well_named());
        assert!(u.alpha_eq(&p("((\\z. z) x)[x<-\\y. y]")));
    }

    #[test]
    fn stale_redexes_are_rejected() {
        let t = p("(\\x. x) y");
        let r = find_term_redexes(&t)[0].clone();
        let u = step(&t, &r).unwrap();
        assert_eq!(step(&u, &r), Err(RewriteError::StaleRedex(r)));
        let gc = TermRedex::Gc { position: Position::root(), binder: VarName::new("x") };
        assert!(step(&p("x[x<-y]"), &gc).is_err());
    }

    #[test]
    fn e_redex_count_matches_multiplicity() {
        for s in ["(x (x x))[x<-y]", "(\\z. x z x)[x<-y]", "(x[y<-x])[x<-w]"] {
            let t = p(s);
            let Expression::ESub(body, x, _) = &t else { unreachable!() };
            let at_root = find_term_redexes(&t).into_iter().filter(|r| r.position().is_empty()).count();
            assert_eq!(at_root, body.multiplicity(x), "{s}");
        }
    }

    #[test]
    fn normalize_examples() {
        let n = normalize(&p("(\\x. x) y"), Strategy::LeftmostOutermost, 100).unwrap();
        assert_eq!(n.term, p("y"));
        assert_eq!(n.counts, StepCounts { m: 1, e: 1, gc: 1 });

        let n = normalize(&p("y"), Strategy::LeftmostOutermost, 100).unwrap();
        assert_eq!(n.counts.total(), 0);

        let omega = p("(\\x. x x) (\\x. x x)").well_name();
        assert!(matches!(
            normalize(&omega, Strategy::LeftmostOutermost, 20),
            Err(RewriteError::FuelExhausted { .. })
        ));
    }

    #[test]
    fn strategies_agree_on_small_terms() {
        let t = p("(\\x. \\y. x y y) (\\z. z) w").well_name();
        let lo = normalize(&t, Strategy::LeftmostOutermost, 1000).unwrap();
        let gc = normalize(&t, Strategy::GcEager, 1000).unwrap();
        let bfs = normalize(&t, Strategy::ExhaustiveEnumeration, 100_000).unwrap();
        assert!(lo.term.alpha_eq(&p("w w")));
        assert!(gc.term.alpha_eq(&lo.term));
        assert!(bfs.term.alpha_eq(&lo.term));
    }

    #[test]
    fn unfold_examples() {
        assert_eq!(unfold(&p("x[x<-y]")), p("y"));
        assert_eq!(unfold(&p("(x x)[x<-\\y. y]")), p("(\\y. y) (\\y. y)"));
        assert_eq!(unfold(&p("z[x<-y]")), p("z"));
    }

    #[test]
    fn meta_substitution_avoids_capture() {
        let r = meta_subst(&p("\\y. x y"), &VarName::new("x"), &p("y"));
        assert!(r.alpha_eq(&p("\\z. y z")));
    }

    #[test]
    fn beta_oracle_examples() {
        assert_eq!(beta_oracle(&p("(\\x. x) y"), 10).unwrap().0, p("y"));
        assert_eq!(beta_oracle(&p("\\x. x"), 10).unwrap().0, p("\\x. x"));
        let plus = p("\\m. \\n. \\f. \\x. m f (n f x)");
        let two_plus_two = Expression::app(Expression::app(plus, church(2)), church(2));
        let (nf, _) = beta_oracle(&two_plus_two, 100).unwrap();
        assert!(nf.alpha_eq(&church(4)));
        assert_eq!(beta_oracle(&p("x[x<-y]"), 10), Err(RewriteError::NotPure));
    }

    #[test]
    fn church_addition_through_the_calculus() {
        let plus = p("\\m. \\n. \\f. \\x. m f (n f x)");
        let t = Expression::app(Expression::app(plus, church(2)), church(2)).well_name();
        let n = normalize(&t, Strategy::LeftmostOutermost, 10_000).unwrap();
        assert!(unfold(&n.term).alpha_eq(&church(4)));
    }
}
