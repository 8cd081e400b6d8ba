//! Cut elimination on nets and the correspondence between term redexes and
//! net cuts.
//!
//! A cut is a node where two principal ports meet: a `⅋` target that is a
//! `⊗` source (m), a `d` target that is the e-source of a `!` (e, one cut per
//! dereliction), a `w` target that is the e-source of a `!` (gc).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::net::{net_hash, net_iso, LinkId, LinkKind, Net, NetBuilder, NodeId};
use crate::readback::read_back;
use crate::rewrite::{find_term_redexes, RedexKind, StepCounts, Strategy, TermRedex};
use crate::term::{Expression, Position, VarName};
use crate::translate::translate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NetRedex {
    pub kind: RedexKind,
    pub cut: NodeId,
    /// `(⅋, ⊗)`, `(d, !)` or `(w, !)`.
    pub links: (LinkId, LinkId),
}

impl NetRedex {
    pub fn describe(&self, p: &Net) -> String {
        format!(
            "{} at {} ({}, {})",
            self.kind,
            p.node(self.cut).name,
            p.link(self.links.0).name,
            p.link(self.links.1).name
        )
    }
}

impl fmt::Display for NetRedex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@n{}", self.kind, self.cut.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetRewriteError {
    #[error("redex {0} does not match the net")]
    StaleRedex(NetRedex),
    #[error("the term is not a read back of the net")]
    NotAReadBack,
    #[error("fuel exhausted after {} steps", .counts.total())]
    FuelExhausted { last: Box<Net>, counts: StepCounts },
}

/// Every cut of `p`, ordered by kind, then by the names of the cut node and
/// of the links involved.
pub fn find_net_redexes(p: &Net) -> Vec<NetRedex> {
    let topo = p.topology();
    let mut out = Vec::new();
    for l in p.link_ids() {
        let link = p.link(l);
        match link.kind {
            LinkKind::Par => {
                let m = link.targets[0];
                for &t in &topo.outgoing[m.index()] {
                    if p.link(t).kind == LinkKind::Tensor {
                        out.push(NetRedex { kind: RedexKind::M, cut: m, links: (l, t) });
                    }
                }
            }
            LinkKind::Der | LinkKind::Weak => {
                let x = *link.targets.last().expect("e-target");
                for &b in &topo.outgoing[x.index()] {
                    if p.link(b).kind == LinkKind::Bang && p.link(b).sources[1] == x {
                        let kind = if link.kind == LinkKind::Der { RedexKind::E } else { RedexKind::Gc };
                        out.push(NetRedex { kind, cut: x, links: (l, b) });
                    }
                }
            }
            _ => {}
        }
    }
    out.sort_by(|a, b| {
        let key = |r: &NetRedex| (r.kind, p.node(r.cut).name.clone(), p.link(r.links.0).name.clone());
        key(a).cmp(&key(b))
    });
    out
}

fn matches(p: &Net, r: &NetRedex) -> bool {
    let n = p.links().len();
    if r.links.0.index() >= n || r.links.1.index() >= n || r.cut.index() >= p.nodes().len() {
        return false;
    }
    let (a, b) = (p.link(r.links.0), p.link(r.links.1));
    match r.kind {
        RedexKind::M => {
            a.kind == LinkKind::Par && b.kind == LinkKind::Tensor && a.targets[0] == r.cut && b.sources[0] == r.cut
        }
        RedexKind::E | RedexKind::Gc => {
            let want = if r.kind == RedexKind::E { LinkKind::Der } else { LinkKind::Weak };
            a.kind == want && b.kind == LinkKind::Bang && a.targets.last() == Some(&r.cut) && b.sources[1] == r.cut
        }
    }
}

/// Eliminates the cut `r`.
pub fn step_net(p: &Net, r: &NetRedex) -> Result<Net, NetRewriteError> {
    if !matches(p, r) {
        return Err(NetRewriteError::StaleRedex(*r));
    }
    Ok(match r.kind {
        RedexKind::M => step_m(p, r),
        RedexKind::E => step_e(p, r),
        RedexKind::Gc => step_gc(p, r),
    })
}

/// `⅋`/`⊗`: the bound variable becomes the e-node of the argument's `!`,
/// and the body takes the place of the application.
fn step_m(p: &Net, r: &NetRedex) -> Net {
    let (par, ten) = (p.link(r.links.0).clone(), p.link(r.links.1).clone());
    let (x, body) = (par.sources[0], par.sources[1]);
    let (app, arg) = (ten.targets[0], ten.targets[1]);
    let mut b = NetBuilder::from_net(p);
    b.remove_link(r.links.0);
    b.remove_link(r.links.1);
    b.redirect(arg, x);
    b.redirect(body, app);
    b.normalize_weakenings();
    b.finish(if p.root() == body { app } else { p.root() })
}

/// Milner rule: the box is copied in place of the dereliction, at the
/// dereliction's level; the substitution stays.
fn step_e(p: &Net, r: &NetRedex) -> Net {
    let (d, bang) = r.links;
    let m_d = p.link(d).targets[0];
    let x = r.cut;
    let topo = p.topology();
    let interior = p.ibox(bang).clone();
    let free = p.box_free_vars(bang, &topo);
    let box_root = p.link(bang).sources[0];

    let mut b = NetBuilder::from_net(p);
    let enclosing = b.boxes_containing(d);
    let mut node_map: HashMap<NodeId, NodeId> = HashMap::new();
    node_map.insert(box_root, m_d);
    for n in &free {
        node_map.insert(*n, *n);
    }
    let mut link_map: HashMap<LinkId, LinkId> = HashMap::new();
    for &l in &interior {
        let link = p.link(l).clone();
        let mut map = |n: NodeId, b: &mut NetBuilder| {
            *node_map.entry(n).or_insert_with(|| b.fresh_node(&p.node(n).name, p.node(n).ty))
        };
        let sources = link.sources.iter().map(|n| map(*n, &mut b)).collect();
        let targets = link.targets.iter().map(|n| map(*n, &mut b)).collect();
        let id = b.add_link(link.kind, sources, targets);
        for e in &enclosing {
            b.add_to_box(*e, id);
        }
        link_map.insert(l, id);
    }
    for (inner, inner_box) in p.boxes() {
        if let Some(copy) = link_map.get(inner) {
            b.set_box(*copy, inner_box.iter().map(|l| link_map[l]).collect());
        }
    }
    b.remove_link(d);
    if !topo.incoming[x.index()].iter().any(|l| *l != d) {
        b.add_link(LinkKind::Weak, vec![], vec![x]);
    }
    b.normalize_weakenings();
    b.finish(p.root())
}

/// Erasure: the weakening, the `!` and its box go; the free variables of
/// the box left without incoming links get weakenings.
fn step_gc(p: &Net, r: &NetRedex) -> Net {
    let (w, bang) = r.links;
    let topo = p.topology();
    let free = p.box_free_vars(bang, &topo);
    let mut removed: BTreeSet<LinkId> = p.ibox(bang).clone();
    removed.insert(bang);
    removed.insert(w);
    let mut b = NetBuilder::from_net(p);
    for l in &removed {
        b.remove_link(*l);
    }
    for n in free {
        if topo.incoming[n.index()].iter().all(|l| removed.contains(l)) {
            b.add_link(LinkKind::Weak, vec![], vec![n]);
        }
    }
    b.normalize_weakenings();
    b.finish(p.root())
}

fn position_name(prefix: &str, components: &[u8]) -> String {
    format!("{prefix}@{}", Position(components.to_vec()))
}

/// The bijection between the redexes of `t` and the cuts of `p`, where `t`
/// is a read back of `p`. Each pair is given term side first, in the order
/// of [`find_term_redexes`].
pub fn redex_bijection(p: &Net, t: &Expression) -> Result<Vec<(TermRedex, NetRedex)>, NetRewriteError> {
    let weakened: BTreeSet<VarName> = p.free_weakening_names().into_iter().map(VarName::new).collect();
    let image = translate(t, &weakened).map_err(|_| NetRewriteError::NotAReadBack)?;
    let witness = net_iso(&image, p).ok_or(NetRewriteError::NotAReadBack)?;
    let link = |name: String| -> Result<LinkId, NetRewriteError> {
        image.link_by_name(&name).map(|l| witness.link(l)).ok_or(NetRewriteError::NotAReadBack)
    };
    let mut out = Vec::new();
    for r in find_term_redexes(t) {
        let net_redex = match &r {
            TermRedex::M { position, subst_depth, .. } => {
                let mut abs = position.0.clone();
                abs.extend(std::iter::repeat_n(0, subst_depth + 1));
                let par = link(position_name("par", &abs))?;
                let ten = link(position_name("ten", &position.0))?;
                NetRedex { kind: RedexKind::M, cut: p.link(ten).sources[0], links: (par, ten) }
            }
            TermRedex::E { position, occurrence, .. } => {
                let der = link(position_name("der", &occurrence.0))?;
                let bang = link(position_name("bang", &position.0))?;
                NetRedex { kind: RedexKind::E, cut: p.link(bang).sources[1], links: (der, bang) }
            }
            TermRedex::Gc { position, binder } => {
                let weak = link(format!("weak@{binder}"))?;
                let bang = link(position_name("bang", &position.0))?;
                NetRedex { kind: RedexKind::Gc, cut: p.link(bang).sources[1], links: (weak, bang) }
            }
        };
        out.push((r, net_redex));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetNormalized {
    pub net: Net,
    pub counts: StepCounts,
}

/// Normalises a correct term net. The deterministic strategies choose the
/// cut corresponding, through the bijection, to the redex the strategy
/// picks on the read back; the exhaustive one searches breadth-first,
/// identifying isomorphic nets. `on_step` sees each cut and its result.
pub fn normalize_net(
    p: &Net,
    strategy: Strategy,
    fuel: usize,
    mut on_step: impl FnMut(&NetRedex, &Net, &Net),
) -> Result<NetNormalized, NetRewriteError> {
    if strategy == Strategy::ExhaustiveEnumeration {
        return normalize_breadth_first(p, fuel, on_step);
    }
    let mut cur = p.clone();
    let mut counts = StepCounts::default();
    loop {
        let t = read_back(&cur).map_err(|_| NetRewriteError::NotAReadBack)?;
        let pairs = redex_bijection(&cur, &t)?;
        let terms: Vec<TermRedex> = pairs.iter().map(|(r, _)| r.clone()).collect();
        let Some(chosen) = strategy.choose(&terms) else {
            return Ok(NetNormalized { net: cur, counts });
        };
        if counts.total() >= fuel {
            return Err(NetRewriteError::FuelExhausted { last: Box::new(cur), counts });
        }
        let r = pairs.iter().find(|(t, _)| t == chosen).expect("chosen among the pairs").1;
        let next = step_net(&cur, &r)?;
        counts.record(r.kind);
        on_step(&r, &cur, &next);
        cur = next;
    }
}

fn normalize_breadth_first(
    p: &Net,
    fuel: usize,
    mut on_step: impl FnMut(&NetRedex, &Net, &Net),
) -> Result<NetNormalized, NetRewriteError> {
    let mut nodes: Vec<(Net, Option<(usize, NetRedex)>)> = vec![(p.clone(), None)];
    let mut by_hash: HashMap<u64, Vec<usize>> = HashMap::from([(net_hash(p), vec![0])]);
    let mut queue = VecDeque::from([0usize]);
    let mut spent = 0usize;
    let path_counts = |nodes: &[(Net, Option<(usize, NetRedex)>)], mut j: usize| {
        let mut path = Vec::new();
        while let Some((parent, r)) = nodes[j].1 {
            path.push((parent, r, j));
            j = parent;
        }
        path.reverse();
        path
    };
    while let Some(i) = queue.pop_front() {
        let redexes = find_net_redexes(&nodes[i].0);
        if redexes.is_empty() {
            let mut counts = StepCounts::default();
            for (parent, r, j) in path_counts(&nodes, i) {
                counts.record(r.kind);
                on_step(&r, &nodes[parent].0, &nodes[j].0);
            }
            return Ok(NetNormalized { net: nodes[i].0.clone(), counts });
        }
        for r in redexes {
            if spent >= fuel {
                let mut counts = StepCounts::default();
                for (_, r, _) in path_counts(&nodes, i) {
                    counts.record(r.kind);
                }
                return Err(NetRewriteError::FuelExhausted { last: Box::new(nodes[i].0.clone()), counts });
            }
            spent += 1;
            let next = step_net(&nodes[i].0, &r)?;
            let h = net_hash(&next);
            let bucket = by_hash.entry(h).or_default();
            if bucket.iter().any(|k| net_iso(&nodes[*k].0, &next).is_some()) {
                continue;
            }
            bucket.push(nodes.len());
            nodes.push((next, Some((i, r))));
            queue.push_back(nodes.len() - 1);
        }
    }
    unreachable!("the search space of a net with a cut is never empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::readback::is_correct;
    use crate::rewrite::step;
    use crate::syntax::parse;

    fn tr(s: &str, delta: &[&str]) -> Net {
        let delta: BTreeSet<VarName> = delta.iter().map(|x| VarName::new(*x)).collect();
        translate(&parse(s).unwrap(), &delta).unwrap()
    }

    fn kinds(p: &Net) -> Vec<RedexKind> {
        find_net_redexes(p).iter().map(|r| r.kind).collect()
    }

    fn only(p: &Net, kind: RedexKind) -> NetRedex {
        let rs: Vec<NetRedex> = find_net_redexes(p).into_iter().filter(|r| r.kind == kind).collect();
        assert_eq!(rs.len(), 1);
        rs[0]
    }

    fn assert_iso(a: &Net, b: &Net) {
        assert!(net_iso(a, b).is_some(), "{}\n{}", crate::net::to_json(a), crate::net::to_json(b));
    }

    #[test]
    fn cuts() {
        assert_eq!(kinds(&tr("(\\x. x) y", &[])), [RedexKind::M]);
        assert_eq!(kinds(&tr("(x x)[x<-y]", &[])), [RedexKind::E, RedexKind::E]);
        assert_eq!(kinds(&tr("z[x<-y]", &[])), [RedexKind::Gc]);
        assert_eq!(kinds(&tr("(\\x. x)[z<-w] y", &[])).len(), 2);
        assert!(kinds(&tr("\\x. x y", &[])).is_empty());
    }

    #[test]
    fn multiplicative_steps() {
        let p = tr("(\\x. x) y", &[]);
        assert_iso(&step_net(&p, &only(&p, RedexKind::M)).unwrap(), &tr("x[x<-y]", &[]));
        let p = tr("(\\x. z) y", &[]);
        assert_iso(&step_net(&p, &only(&p, RedexKind::M)).unwrap(), &tr("z[x<-y]", &[]));
        let p = tr("(\\x. x)[z<-w] y", &[]);
        assert_iso(&step_net(&p, &only(&p, RedexKind::M)).unwrap(), &tr("x[x<-y][z<-w]", &[]));
    }

    #[test]
    fn garbage_collection_steps() {
        let p = tr("z[x<-y]", &[]);
        assert_iso(&step_net(&p, &only(&p, RedexKind::Gc)).unwrap(), &tr("z", &["y"]));
        let p = tr("z[x<-z]", &[]);
        assert_iso(&step_net(&p, &only(&p, RedexKind::Gc)).unwrap(), &tr("z", &[]));
        let p = tr("z[x<-\\w. w]", &[]);
        assert_iso(&step_net(&p, &only(&p, RedexKind::Gc)).unwrap(), &tr("z", &[]));
        // the freed variable is bound higher up: its weakening moves into place
        let p = tr("\\y. z[x<-y]", &[]);
        assert_iso(&step_net(&p, &only(&p, RedexKind::Gc)).unwrap(), &tr("\\y. z", &[]));
    }

    #[test]
    fn exponential_steps() {
        let p = tr("x[x<-y]", &[]);
        assert_iso(&step_net(&p, &only(&p, RedexKind::E)).unwrap(), &tr("y[x<-y]", &[]));
        let p = tr("(x x)[x<-y]", &[]);
        let left = find_net_redexes(&p)
            .into_iter()
            .find(|r| p.link(r.links.0).name == "der@/0/0")
            .unwrap();
        assert_iso(&step_net(&p, &left).unwrap(), &tr("(y x)[x<-y]", &[]));
        // across a box border
        let t = parse("((\\z. x) w)[x<-y]").unwrap();
        let p = tr("((\\z. x) w)[x<-y]", &[]);
        let r = only(&p, RedexKind::E);
        let expected = step(&t, &find_term_redexes(&t).into_iter().find(|r| r.kind() == RedexKind::E).unwrap()).unwrap();
        assert_iso(&step_net(&p, &r).unwrap(), &translate(&expected, &BTreeSet::new()).unwrap());
        // copying a box with boxes inside
        let t = parse("(x x)[x<-\\a. a (\\b. b)]").unwrap();
        let p = translate(&t, &BTreeSet::new()).unwrap();
        for (tr_, nr) in redex_bijection(&p, &t).unwrap() {
            let q = step_net(&p, &nr).unwrap();
            assert_eq!(q.validate(), Ok(()));
            assert_eq!(is_correct(&q), Ok(()));
            assert_iso(&q, &translate(&step(&t, &tr_).unwrap(), &q.free_weakening_names().into_iter().map(VarName::new).collect()).unwrap());
        }
    }

    #[test]
    fn bijection() {
        for s in ["(\\x. x) y", "(x x)[x<-y]", "z[x<-y]", "((\\a. a[b<-c]) d)[e<-f] (x x)[x<-y]"] {
            let t = parse(s).unwrap();
            let p = translate(&t, &BTreeSet::new()).unwrap();
            let pairs = redex_bijection(&p, &t).unwrap();
            let mut image: Vec<NetRedex> = pairs.iter().map(|(_, n)| *n).collect();
            image.sort();
            let mut all = find_net_redexes(&p);
            all.sort();
            assert_eq!(image, all, "{s}");
            assert!(pairs.iter().all(|(t, n)| t.kind() == n.kind));
        }
        let t = parse("x").unwrap();
        assert_eq!(redex_bijection(&tr("y", &[]), &t), Err(NetRewriteError::NotAReadBack));
    }

    #[test]
    fn normalisation() {
        let p = tr("(\\x. x) y", &[]);
        let mut trace = Vec::new();
        let n = normalize_net(&p, Strategy::LeftmostOutermost, 10, |r, _, _| trace.push(r.kind)).unwrap();
        assert_eq!(trace, [RedexKind::M, RedexKind::E, RedexKind::Gc]);
        assert_iso(&n.net, &tr("y", &[]));
        let n = normalize_net(&p, Strategy::ExhaustiveEnumeration, 100, |_, _, _| {}).unwrap();
        assert_iso(&n.net, &tr("y", &[]));
        let omega = tr("(\\x. x x) (\\y. y y)", &[]);
        assert!(matches!(
            normalize_net(&omega, Strategy::LeftmostOutermost, 20, |_, _, _| {}),
            Err(NetRewriteError::FuelExhausted { .. })
        ));
    }
}
