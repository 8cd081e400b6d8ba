//! Expressions of the linear substitution calculus.
//!
//! An [`Expression`] is a term (no holes), a context (exactly one hole), or
//! something more general with several holes. Holes carry their interface:
//! the set of variables that may occur free in whatever gets plugged in.
//!
//! Variables are plain names. Most of the crate assumes *well-named*
//! expressions, where every binder is distinct from every other binder and
//! from every free name; [`Expression::well_name`] produces such a
//! representative of any α-class.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A variable name. Names also identify the e-nodes of nets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarName(Arc<str>);

impl VarName {
    /// Panics on the empty string; names are never empty.
    pub fn new(name: impl AsRef<str>) -> Self {
        let name = name.as_ref();
        assert!(!name.is_empty(), "variable names are non-empty");
        VarName(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with any `_<digits>` freshness suffix removed.
    pub fn base(&self) -> &str {
        let s = self.as_str();
        match s.rfind('_') {
            Some(i) if i > 0 && i + 1 < s.len() && s[i + 1..].bytes().all(|b| b.is_ascii_digit()) => &s[..i],
            _ => s,
        }
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> Self {
        VarName::new(s)
    }
}

/// A position inside an expression: the sequence of child indices from the
/// root. `Abs` has child 0 (body); `App` has 0 (function) and 1 (argument);
/// `ESub` has 0 (body) and 1 (definition).
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub Vec<u8>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn child(&self, i: u8) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for i in &self.0 {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

/// Expressions: variables, holes, abstractions, applications and explicit
/// substitutions `body[binder <- definition]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expression {
    Var(VarName),
    Hole(BTreeSet<VarName>),
    Abs(VarName, Box<Expression>),
    App(Box<Expression>, Box<Expression>),
    ESub(Box<Expression>, VarName, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("interface violation: {var} is free in the plugged expression but not in the hole interface {{{interface}}}")]
    InterfaceViolation { var: VarName, interface: String },
    #[error("expected a context (exactly one hole), found {holes} holes")]
    NotAContext { holes: usize },
    #[error("no subexpression at position {0}")]
    BadPosition(Position),
}

impl Expression {
    pub fn var(x: impl Into<VarName>) -> Self {
        Expression::Var(x.into())
    }

    pub fn hole<I, V>(interface: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: Into<VarName>,
    {
        Expression::Hole(interface.into_iter().map(Into::into).collect())
    }

    pub fn abs(x: impl Into<VarName>, body: Expression) -> Self {
        Expression::Abs(x.into(), Box::new(body))
    }

    pub fn app(fun: Expression, arg: Expression) -> Self {
        Expression::App(Box::new(fun), Box::new(arg))
    }

    pub fn esub(body: Expression, x: impl Into<VarName>, def: Expression) -> Self {
        Expression::ESub(Box::new(body), x.into(), Box::new(def))
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self {
            Expression::Var(_) | Expression::Hole(_) => 1,
            Expression::Abs(_, b) => 1 + b.size(),
            Expression::App(f, a) => 1 + f.size() + a.size(),
            Expression::ESub(b, _, d) => 1 + b.size() + d.size(),
        }
    }

    pub fn hole_count(&self) -> usize {
        match self {
            Expression::Var(_) => 0,
            Expression::Hole(_) => 1,
            Expression::Abs(_, b) => b.hole_count(),
            Expression::App(f, a) => f.hole_count() + a.hole_count(),
            Expression::ESub(b, _, d) => b.hole_count() + d.hole_count(),
        }
    }

    pub fn is_term(&self) -> bool {
        self.hole_count() == 0
    }

    pub fn is_context(&self) -> bool {
        self.hole_count() == 1
    }

    /// Whether the expression contains no explicit substitution and no hole.
    pub fn is_pure(&self) -> bool {
        match self {
            Expression::Var(_) => true,
            Expression::Hole(_) | Expression::ESub(..) => false,
            Expression::Abs(_, b) => b.is_pure(),
            Expression::App(f, a) => f.is_pure() && a.is_pure(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a VarName>, out: &mut BTreeSet<VarName>) {
        match self {
            Expression::Var(x) => {
                if !bound.contains(&x) {
                    out.insert(x.clone());
                }
            }
            Expression::Hole(delta) => {
                for x in delta {
                    if !bound.contains(&x) {
                        out.insert(x.clone());
                    }
                }
            }
            Expression::Abs(x, b) => {
                bound.push(x);
                b.collect_free(bound, out);
                bound.pop();
            }
            Expression::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Expression::ESub(b, x, d) => {
                bound.push(x);
                b.collect_free(bound, out);
                bound.pop();
                d.collect_free(bound, out);
            }
        }
    }

    /// Whether `x` is free in the expression, hole interfaces included.
    pub fn occurs_free(&self, x: &VarName) -> bool {
        match self {
            Expression::Var(y) => y == x,
            Expression::Hole(delta) => delta.contains(x),
            Expression::Abs(y, b) => y != x && b.occurs_free(x),
            Expression::App(f, a) => f.occurs_free(x) || a.occurs_free(x),
            Expression::ESub(b, y, d) => (y != x && b.occurs_free(x)) || d.occurs_free(x),
        }
    }

    /// Number of free occurrences of `x`. Hole interfaces do not count.
    pub fn multiplicity(&self, x: &VarName) -> usize {
        match self {
            Expression::Var(y) => usize::from(y == x),
            Expression::Hole(_) => 0,
            Expression::Abs(y, b) => {
                if y == x {
                    0
                } else {
                    b.multiplicity(x)
                }
            }
            Expression::App(f, a) => f.multiplicity(x) + a.multiplicity(x),
            Expression::ESub(b, y, d) => {
                let inner = if y == x { 0 } else { b.multiplicity(x) };
                inner + d.multiplicity(x)
            }
        }
    }

    /// Binders of the expression, in pre-order, with repetitions.
    pub fn binders(&self) -> Vec<VarName> {
        let mut out = Vec::new();
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut Vec<VarName>) {
        match self {
            Expression::Var(_) | Expression::Hole(_) => {}
            Expression::Abs(x, b) => {
                out.push(x.clone());
                b.collect_binders(out);
            }
            Expression::App(f, a) => {
                f.collect_binders(out);
                a.collect_binders(out);
            }
            Expression::ESub(b, x, d) => {
                out.push(x.clone());
                b.collect_binders(out);
                d.collect_binders(out);
            }
        }
    }

    /// Every name appearing anywhere: binders, occurrences, interfaces.
    pub fn all_names(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Expression::Var(x) => {
                out.insert(x.clone());
            }
            Expression::Hole(delta) => out.extend(delta.iter().cloned()),
            Expression::Abs(x, b) => {
                out.insert(x.clone());
                b.collect_names(out);
            }
            Expression::App(f, a) => {
                f.collect_names(out);
                a.collect_names(out);
            }
            Expression::ESub(b, x, d) => {
                out.insert(x.clone());
                b.collect_names(out);
                d.collect_names(out);
            }
        }
    }

    /// Pairwise-distinct binders, none of which is also a free name.
    pub fn is_well_named(&self) -> bool {
        let binders = self.binders();
        let mut seen = HashSet::with_capacity(binders.len());
        if !binders.iter().all(|b| seen.insert(b)) {
            return false;
        }
        let free = self.free_vars();
        binders.iter().all(|b| !free.contains(b))
    }

    /// The interface of the (first) hole, if any.
    pub fn interface(&self) -> Option<&BTreeSet<VarName>> {
        match self {
            Expression::Var(_) => None,
            Expression::Hole(delta) => Some(delta),
            Expression::Abs(_, b) => b.interface(),
            Expression::App(f, a) => f.interface().or_else(|| a.interface()),
            Expression::ESub(b, _, d) => b.interface().or_else(|| d.interface()),
        }
    }

    /// Variables bound on the path from the root to the hole.
    pub fn captured_vars(&self) -> Result<BTreeSet<VarName>, TermError> {
        let holes = self.hole_count();
        if holes != 1 {
            return Err(TermError::NotAContext { holes });
        }
        let mut out = BTreeSet::new();
        let mut cur = self;
        loop {
            match cur {
                Expression::Hole(_) => return Ok(out),
                Expression::Abs(x, b) => {
                    out.insert(x.clone());
                    cur = b;
                }
                Expression::App(f, a) => cur = if f.hole_count() == 1 { f } else { a },
                Expression::ESub(b, x, d) => {
                    if b.hole_count() == 1 {
                        out.insert(x.clone());
                        cur = b;
                    } else {
                        cur = d;
                    }
                }
                Expression::Var(_) => unreachable!("hole count says a hole is below"),
            }
        }
    }

    /// Replaces the hole of a context by `e`, without renaming: binders of
    /// the context may capture free variables of `e`.
    pub fn plug(&self, e: &Expression) -> Result<Expression, TermError> {
        let holes = self.hole_count();
        if holes != 1 {
            return Err(TermError::NotAContext { holes });
        }
        let delta = self.interface().expect("context has a hole");
        if let Some(var) = e.free_vars().into_iter().find(|x| !delta.contains(x)) {
            let interface = delta.iter().map(VarName::as_str).collect::<Vec<_>>().join(",");
            return Err(TermError::InterfaceViolation { var, interface });
        }
        Ok(self.plug_unchecked(e))
    }

    fn plug_unchecked(&self, e: &Expression) -> Expression {
        match self {
            Expression::Hole(_) => e.clone(),
            Expression::Var(_) => self.clone(),
            Expression::Abs(x, b) => Expression::Abs(x.clone(), Box::new(b.plug_unchecked(e))),
            Expression::App(f, a) => {
                if f.hole_count() > 0 {
                    Expression::App(Box::new(f.plug_unchecked(e)), a.clone())
                } else {
                    Expression::App(f.clone(), Box::new(a.plug_unchecked(e)))
                }
            }
            Expression::ESub(b, x, d) => {
                if b.hole_count() > 0 {
                    Expression::ESub(Box::new(b.plug_unchecked(e)), x.clone(), d.clone())
                } else {
                    Expression::ESub(b.clone(), x.clone(), Box::new(d.plug_unchecked(e)))
                }
            }
        }
    }

    pub fn subterm(&self, pos: &Position) -> Option<&Expression> {
        let mut cur = self;
        for &i in &pos.0 {
            cur = match (cur, i) {
                (Expression::Abs(_, b), 0) => b,
                (Expression::App(f, _), 0) => f,
                (Expression::App(_, a), 1) => a,
                (Expression::ESub(b, _, _), 0) => b,
                (Expression::ESub(_, _, d), 1) => d,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Replaces the subexpression at `pos`.
    pub fn replace_at(&self, pos: &Position, new: Expression) -> Result<Expression, TermError> {
        fn go(e: &Expression, path: &[u8], new: Expression) -> Option<Expression> {
            let Some((&i, rest)) = path.split_first() else {
                return Some(new);
            };
            Some(match (e, i) {
                (Expression::Abs(x, b), 0) => Expression::Abs(x.clone(), Box::new(go(b, rest, new)?)),
                (Expression::App(f, a), 0) => Expression::App(Box::new(go(f, rest, new)?), a.clone()),
                (Expression::App(f, a), 1) => Expression::App(f.clone(), Box::new(go(a, rest, new)?)),
                (Expression::ESub(b, x, d), 0) => {
                    Expression::ESub(Box::new(go(b, rest, new)?), x.clone(), d.clone())
                }
                (Expression::ESub(b, x, d), 1) => {
                    Expression::ESub(b.clone(), x.clone(), Box::new(go(d, rest, new)?))
                }
                _ => return None,
            })
        }
        go(self, &pos.0, new).ok_or_else(|| TermError::BadPosition(pos.clone()))
    }

    /// Binders crossed on the way from the root to `pos` (the binder of an
    /// `ESub` only counts when descending into its body).
    pub fn binders_above(&self, pos: &Position) -> Result<Vec<VarName>, TermError> {
        let mut out = Vec::new();
        let mut cur = self;
        for &i in &pos.0 {
            cur = match (cur, i) {
                (Expression::Abs(x, b), 0) => {
                    out.push(x.clone());
                    b
                }
                (Expression::App(f, _), 0) => f,
                (Expression::App(_, a), 1) => a,
                (Expression::ESub(b, x, _), 0) => {
                    out.push(x.clone());
                    b
                }
                (Expression::ESub(_, _, d), 1) => d,
                _ => return Err(TermError::BadPosition(pos.clone())),
            };
        }
        Ok(out)
    }

    /// Splits `self` at `pos` into a context and the subexpression there.
    /// The hole gets the smallest valid interface, the free variables of the
    /// removed subexpression.
    pub fn decompose_at(&self, pos: &Position) -> Result<(Expression, Expression), TermError> {
        let sub = self.subterm(pos).ok_or_else(|| TermError::BadPosition(pos.clone()))?.clone();
        let ctx = self.replace_at(pos, Expression::Hole(sub.free_vars()))?;
        Ok((ctx, sub))
    }

    /// All positions, in pre-order.
    pub fn positions(&self) -> Vec<Position> {
        fn go(e: &Expression, here: &mut Vec<u8>, out: &mut Vec<Position>) {
            out.push(Position(here.clone()));
            let children: &[(&Expression, u8)] = &match e {
                Expression::Var(_) | Expression::Hole(_) => vec![],
                Expression::Abs(_, b) => vec![(&**b, 0)],
                Expression::App(f, a) => vec![(&**f, 0), (&**a, 1)],
                Expression::ESub(b, _, d) => vec![(&**b, 0), (&**d, 1)],
            };
            for &(c, i) in children {
                here.push(i);
                go(c, here, out);
                here.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// An α-equivalent expression in which all binders are pairwise distinct
    /// and distinct from the free names. Binders keep their name when it is
    /// still available; otherwise they get `base_<n>` for the first unused n.
    pub fn well_name(&self) -> Expression {
        let mut fresh = FreshNames::avoiding(self.free_vars());
        self.rename_binders(&mut fresh, &mut BTreeMap::new())
    }

    /// Renames every binder with `fresh`, keeping the original name only if
    /// `fresh` still considers it unused.
    pub(crate) fn rename_binders(
        &self,
        fresh: &mut FreshNames,
        env: &mut BTreeMap<VarName, Vec<VarName>>,
    ) -> Expression {
        fn lookup(env: &BTreeMap<VarName, Vec<VarName>>, x: &VarName) -> VarName {
            env.get(x).and_then(|s| s.last()).cloned().unwrap_or_else(|| x.clone())
        }
        match self {
            Expression::Var(x) => Expression::Var(lookup(env, x)),
            Expression::Hole(delta) => Expression::Hole(delta.iter().map(|x| lookup(env, x)).collect()),
            Expression::Abs(x, b) => {
                let y = fresh.claim(x);
                env.entry(x.clone()).or_default().push(y.clone());
                let b = b.rename_binders(fresh, env);
                env.get_mut(x).expect("pushed above").pop();
                Expression::Abs(y, Box::new(b))
            }
            Expression::App(f, a) => {
                let f = f.rename_binders(fresh, env);
                let a = a.rename_binders(fresh, env);
                Expression::App(Box::new(f), Box::new(a))
            }
            Expression::ESub(b, x, d) => {
                let y = fresh.claim(x);
                env.entry(x.clone()).or_default().push(y.clone());
                let b = b.rename_binders(fresh, env);
                env.get_mut(x).expect("pushed above").pop();
                let d = d.rename_binders(fresh, env);
                Expression::ESub(Box::new(b), y, Box::new(d))
            }
        }
    }

    /// Renames all binders to names not in `avoid` (nor clashing with each
    /// other). Used to freshen copies.
    pub fn freshen(&self, avoid: &mut FreshNames) -> Expression {
        self.rename_binders_always(avoid, &mut BTreeMap::new())
    }

    fn rename_binders_always(
        &self,
        fresh: &mut FreshNames,
        env: &mut BTreeMap<VarName, Vec<VarName>>,
    ) -> Expression {
        fn lookup(env: &BTreeMap<VarName, Vec<VarName>>, x: &VarName) -> VarName {
            env.get(x).and_then(|s| s.last()).cloned().unwrap_or_else(|| x.clone())
        }
        match self {
            Expression::Var(x) => Expression::Var(lookup(env, x)),
            Expression::Hole(delta) => Expression::Hole(delta.iter().map(|x| lookup(env, x)).collect()),
            Expression::Abs(x, b) => {
                let y = fresh.fresh(x);
                env.entry(x.clone()).or_default().push(y.clone());
                let b = b.rename_binders_always(fresh, env);
                env.get_mut(x).expect("pushed above").pop();
                Expression::Abs(y, Box::new(b))
            }
            Expression::App(f, a) => {
                let f = f.rename_binders_always(fresh, env);
                let a = a.rename_binders_always(fresh, env);
                Expression::App(Box::new(f), Box::new(a))
            }
            Expression::ESub(b, x, d) => {
                let y = fresh.fresh(x);
                env.entry(x.clone()).or_default().push(y.clone());
                let b = b.rename_binders_always(fresh, env);
                env.get_mut(x).expect("pushed above").pop();
                let d = d.rename_binders_always(fresh, env);
                Expression::ESub(Box::new(b), y, Box::new(d))
            }
        }
    }

    /// Nameless representation: bound occurrences become indices, free
    /// names stay. Two expressions are α-equivalent iff their keys are equal.
    pub fn alpha_key(&self) -> AlphaKey {
        fn go(e: &Expression, scope: &mut Vec<VarName>) -> AlphaKey {
            let var_ref = |x: &VarName, scope: &Vec<VarName>| match scope.iter().rposition(|y| y == x) {
                Some(i) => VarRef::Bound(scope.len() - 1 - i),
                None => VarRef::Free(x.clone()),
            };
            match e {
                Expression::Var(x) => AlphaKey::Var(var_ref(x, scope)),
                Expression::Hole(delta) => AlphaKey::Hole(delta.iter().map(|x| var_ref(x, scope)).collect()),
                Expression::Abs(x, b) => {
                    scope.push(x.clone());
                    let b = go(b, scope);
                    scope.pop();
                    AlphaKey::Abs(Box::new(b))
                }
                Expression::App(f, a) => AlphaKey::App(Box::new(go(f, scope)), Box::new(go(a, scope))),
                Expression::ESub(b, x, d) => {
                    scope.push(x.clone());
                    let b = go(b, scope);
                    scope.pop();
                    AlphaKey::ESub(Box::new(b), Box::new(go(d, scope)))
                }
            }
        }
        go(self, &mut Vec::new())
    }

    pub fn alpha_eq(&self, other: &Expression) -> bool {
        self.alpha_key() == other.alpha_key()
    }
}

/// A variable occurrence in an [`AlphaKey`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRef {
    /// Distance to the binder (0 = innermost).
    Bound(usize),
    Free(VarName),
}

/// Index-based form of an expression, equal exactly on α-equivalent inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlphaKey {
    Var(VarRef),
    Hole(BTreeSet<VarRef>),
    Abs(Box<AlphaKey>),
    App(Box<AlphaKey>, Box<AlphaKey>),
    ESub(Box<AlphaKey>, Box<AlphaKey>),
}

/// Deterministic fresh-name supply.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    used: HashSet<VarName>,
}

impl FreshNames {
    pub fn avoiding<I: IntoIterator<Item = VarName>>(names: I) -> Self {
        FreshNames { used: names.into_iter().collect() }
    }

    pub fn reserve(&mut self, x: VarName) {
        self.used.insert(x);
    }

    pub fn is_used(&self, x: &VarName) -> bool {
        self.used.contains(x)
    }

    /// `x` itself if unused, otherwise a fresh variant.
    pub fn claim(&mut self, x: &VarName) -> VarName {
        if self.used.insert(x.clone()) {
            x.clone()
        } else {
            self.fresh(x)
        }
    }

    /// Always a new name of the form `base_<n>`.
    pub fn fresh(&mut self, x: &VarName) -> VarName {
        let base = x.base().to_owned();
        let mut n = 1usize;
        loop {
            let candidate = VarName::new(format!("{base}_{n}"));
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
            n += 1;
        }
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Expression {
        parse(s).unwrap()
    }

    fn names(xs: &[&str]) -> BTreeSet<VarName> {
        xs.iter().map(VarName::new).collect()
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(p("x").free_vars(), names(&["x"]));
        assert_eq!(p("\\x. x y").free_vars(), names(&["y"]));
        // y[x<-z]: body contributes y (x removed), definition contributes z
        assert_eq!(p("y[x<-z]").free_vars(), names(&["y", "z"]));
        assert_eq!(p("[.]{x,y}").free_vars(), names(&["x", "y"]));
        assert_eq!(p("\\x. [.]{x,y}").free_vars(), names(&["y"]));
    }

    #[test]
    fn multiplicity_examples() {
        let x = VarName::new("x");
        let y = VarName::new("y");
        assert_eq!(p("x x").multiplicity(&x), 2);
        assert_eq!(p("\\x. x").multiplicity(&x), 0);
        // one occurrence in the body, one in the definition
        assert_eq!(p("y[x<-y]").multiplicity(&y), 2);
    }

    #[test]
    fn captured_vars_examples() {
        assert_eq!(p("[.]{x}").captured_vars().unwrap(), BTreeSet::new());
        assert_eq!(p("\\x. [.]{x,y}").captured_vars().unwrap(), names(&["x"]));
        assert_eq!(p("z [.]{x}[x<-y]").captured_vars().unwrap(), names(&["x"]));
        // a hole inside a definition is not under the substitution's binder
        assert_eq!(p("z[x<-[.]{y}]").captured_vars().unwrap(), BTreeSet::new());
        assert_eq!(p("x").captured_vars(), Err(TermError::NotAContext { holes: 0 }));
    }

    #[test]
    fn plug_examples() {
        assert_eq!(p("[.]{x}").plug(&p("x")).unwrap(), p("x"));
        let ctx = p("\\x. (y [.]{x,y})[z<-x]");
        assert_eq!(ctx.plug(&p("x x")).unwrap(), p("\\x. (y (x x))[z<-x]"));
        assert!(matches!(
            p("[.]{x}").plug(&p("y")),
            Err(TermError::InterfaceViolation { ref var, .. }) if var.as_str() == "y"
        ));
    }

    #[test]
    fn plugging_a_context_gives_a_context() {
        let c = p("\\x. [.]{x}");
        let d = p("x [.]{x}");
        let cd = c.plug(&d).unwrap();
        assert!(cd.is_context());
        assert!(c.plug(&p("x")).unwrap().is_term());
    }

    #[test]
    fn well_name_examples() {
        let t = p("\\x. \\x. x").well_name();
        assert!(t.is_well_named());
        assert!(t.alpha_eq(&p("\\x. \\x. x")));
        assert_eq!(t, p("\\x. \\x_1. x_1"));
        assert_eq!(p("x").well_name(), p("x"));
        let t = p("(\\x. x) (\\x. x)").well_name();
        assert!(t.is_well_named());
        assert!(t.alpha_eq(&p("(\\x. x) (\\y. y)")));
        // free names never move
        let t = p("x (\\x. x)").well_name();
        assert!(t.is_well_named());
        assert!(t.alpha_eq(&p("x (\\y. y)")));
    }

    #[test]
    fn alpha_eq_examples() {
        assert!(p("\\x. x").alpha_eq(&p("\\y. y")));
        assert!(!p("\\x. y").alpha_eq(&p("\\x. z")));
        assert!(p("x[x<-y]").alpha_eq(&p("x'[x'<-y]")));
        assert!(!p("x[x<-y]").alpha_eq(&p("y[x<-y]")));
        assert!(p("\\x. [.]{x,y}").alpha_eq(&p("\\z. [.]{y,z}")));
    }

    #[test]
    fn decomposition_recovers_the_term() {
        let t = p("\\x. (x y)[y<-\\z. z x]");
        for pos in t.positions() {
            let (c, s) = t.decompose_at(&pos).unwrap();
            assert!(c.is_context());
            assert_eq!(c.interface().unwrap(), &s.free_vars());
            assert_eq!(c.plug(&s).unwrap(), t);
        }
    }

    #[test]
    fn fresh_names_strip_suffixes() {
        let mut f = FreshNames::avoiding(names(&["x", "x_1"]));
        assert_eq!(f.fresh(&VarName::new("x_1")).as_str(), "x_2");
        assert_eq!(f.claim(&VarName::new("y")).as_str(), "y");
        assert_eq!(f.claim(&VarName::new("y")).as_str(), "y_1");
    }
}
