//! Correction nets, the correctness criterion, the linear skeleton,
//! decomposition of correct nets and read back (sequentialisation).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::net::{net_iso, LinkId, LinkKind, Net, NetBuilder, NodeId, NodeType};
use crate::term::{Expression, Position, VarName};
use crate::translate::translate;

/// Every `!`-box at level 0 collapsed into a generalised axiom from the
/// box's e-node to the free variables of the box.
pub fn correction_net(p: &Net) -> Net {
    let topo = p.topology();
    let levels = p.link_levels();
    let mut b = NetBuilder::from_net(p);
    let level0: Vec<LinkId> =
        p.links_of_kind(LinkKind::Bang).filter(|l| levels[l.index()] == 0).collect();
    for bang in level0 {
        let mut fv: Vec<NodeId> = p.box_free_vars(bang, &topo).into_iter().collect();
        fv.sort_by(|a, c| p.node(*a).name.cmp(&p.node(*c).name));
        let e = p.link(bang).sources[1];
        for l in p.ibox(bang).clone() {
            b.remove_link(l);
        }
        b.remove_link(bang);
        b.add_named_link(format!("genax:{}", p.link(bang).name), LinkKind::GenAx, vec![e], fv);
    }
    b.finish(p.root())
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum CorrectnessError {
    #[error("root: the root is not a terminal m-node of the correction net")]
    RootNotTerminal,
    #[error("root: {0} is another terminal m-node of the correction net")]
    ExtraTerminal(String),
    #[error("acyclicity: the correction net has the cycle {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("recursive correctness: the box of {bang} is not correct ({inner})")]
    Box { bang: String, inner: Box<CorrectnessError> },
}

/// The correctness criterion. Assumes `p` is valid.
pub fn is_correct(p: &Net) -> Result<(), CorrectnessError> {
    let c = correction_net(p);
    let topo = c.topology();
    if c.node(c.root()).ty != NodeType::M || !topo.is_terminal(c.root()) {
        return Err(CorrectnessError::RootNotTerminal);
    }
    if let Some(n) = c.node_ids().find(|n| *n != c.root() && c.node(*n).ty == NodeType::M && topo.is_terminal(*n)) {
        return Err(CorrectnessError::ExtraTerminal(c.node(n).name.clone()));
    }
    if let Some(cycle) = find_cycle(&c) {
        return Err(CorrectnessError::Cycle(cycle.into_iter().map(|n| c.node(n).name.clone()).collect()));
    }
    let levels = p.link_levels();
    for bang in p.links_of_kind(LinkKind::Bang).filter(|l| levels[l.index()] == 0) {
        is_correct(&p.box_net(bang)).map_err(|inner| CorrectnessError::Box {
            bang: p.link(bang).name.clone(),
            inner: Box::new(inner),
        })?;
    }
    Ok(())
}

/// A directed cycle (as a node sequence) following sources to targets.
fn find_cycle(c: &Net) -> Option<Vec<NodeId>> {
    let topo = c.topology();
    let succ = |n: NodeId| -> Vec<NodeId> {
        topo.outgoing[n.index()].iter().flat_map(|l| c.link(*l).targets.iter().copied()).collect()
    };
    let mut state = vec![0u8; c.nodes().len()];
    let mut stack: Vec<NodeId> = Vec::new();
    fn dfs(
        n: NodeId,
        succ: &dyn Fn(NodeId) -> Vec<NodeId>,
        state: &mut [u8],
        stack: &mut Vec<NodeId>,
    ) -> Option<Vec<NodeId>> {
        state[n.index()] = 1;
        stack.push(n);
        for m in succ(n) {
            match state[m.index()] {
                1 => {
                    let start = stack.iter().position(|x| *x == m).expect("on stack");
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(m);
                    return Some(cycle);
                }
                0 => {
                    if let Some(c) = dfs(m, succ, state, stack) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        stack.pop();
        state[n.index()] = 2;
        None
    }
    for n in c.node_ids() {
        if state[n.index()] == 0 {
            if let Some(cycle) = dfs(n, &succ, &mut state, &mut stack) {
                return Some(cycle);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkeletonError {
    #[error("the linear skeleton is not a linear order: {0}")]
    NotLinear(String),
}

/// The m-nodes of the correction net in the order of the linear paths
/// between them, the root last.
pub fn linear_skeleton(p: &Net) -> Result<Vec<NodeId>, SkeletonError> {
    let c = correction_net(p);
    let topo = c.topology();
    let m_nodes = c.node_ids().filter(|n| c.node(*n).ty == NodeType::M).count();
    let mut chain = vec![c.root()];
    let mut seen = BTreeSet::from([c.root()]);
    let mut current = c.root();
    loop {
        let incoming = &topo.incoming[current.index()];
        let [l] = incoming.as_slice() else {
            return Err(SkeletonError::NotLinear(format!("m-node {} has {} incoming links", c.node(current).name, incoming.len())));
        };
        match c.link(*l).m_source() {
            Some(prev) if matches!(c.link(*l).kind, LinkKind::Par | LinkKind::Tensor) => {
                if !seen.insert(prev) {
                    return Err(SkeletonError::NotLinear("cyclic linear path".into()));
                }
                chain.push(prev);
                current = prev;
            }
            _ => break,
        }
    }
    if chain.len() != m_nodes {
        return Err(SkeletonError::NotLinear(format!(
            "{} of {} m-nodes lie on the path to the root",
            chain.len(),
            m_nodes
        )));
    }
    chain.reverse();
    // report ids of p, not of the correction net
    Ok(chain.into_iter().map(|n| p.node_by_name(&c.node(n).name).expect("shared node")).collect())
}

/// The clause of the decomposition lemma that applies to a correct net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecompositionCase {
    OneLinkDer(LinkId),
    OneLinkHole(LinkId),
    FreeWeakening(LinkId),
    FreeSubstitution(LinkId),
    RootAbstraction(LinkId),
    RootApplicationFreeArgument { tensor: LinkId, bang: LinkId },
}

impl DecompositionCase {
    /// Links removed from the net by this case.
    pub fn removal_set(&self, p: &Net) -> BTreeSet<LinkId> {
        match *self {
            DecompositionCase::OneLinkDer(l)
            | DecompositionCase::OneLinkHole(l)
            | DecompositionCase::FreeWeakening(l)
            | DecompositionCase::RootAbstraction(l) => BTreeSet::from([l]),
            DecompositionCase::FreeSubstitution(b) => {
                let mut s = p.ibox(b).clone();
                s.insert(b);
                s
            }
            DecompositionCase::RootApplicationFreeArgument { tensor, bang } => {
                let mut s = p.ibox(bang).clone();
                s.insert(bang);
                s.insert(tensor);
                s
            }
        }
    }
}

fn root_link(p: &Net) -> Option<LinkId> {
    p.link_ids().find(|l| p.link(*l).m_target() == Some(p.root()))
}

fn by_name<T: Copy>(p: &Net, mut items: Vec<(NodeId, T)>) -> Vec<T> {
    items.sort_by(|a, b| p.node(a.0).name.cmp(&p.node(b.0).name));
    items.into_iter().map(|(_, t)| t).collect()
}

/// Free substitutions of `p`, ordered by the name of their e-node.
fn free_substitutions(p: &Net) -> Vec<LinkId> {
    let topo = p.topology();
    let levels = p.link_levels();
    let candidates = p
        .links_of_kind(LinkKind::Bang)
        .filter(|b| levels[b.index()] == 0)
        .filter(|b| {
            let e = p.link(*b).sources[1];
            !topo.incoming[e.index()].iter().any(|l| p.link(*l).kind == LinkKind::Tensor)
        })
        .filter(|b| p.box_free_vars(*b, &topo).is_subset(p.free_vars()))
        .map(|b| (p.link(b).sources[1], b))
        .collect();
    by_name(p, candidates)
}

fn root_case(p: &Net) -> Option<DecompositionCase> {
    let l = root_link(p)?;
    match p.link(l).kind {
        LinkKind::Par => Some(DecompositionCase::RootAbstraction(l)),
        LinkKind::Tensor => {
            let arg = p.link(l).targets[1];
            let bang = p.link_ids().find(|b| p.link(*b).kind == LinkKind::Bang && p.link(*b).sources[1] == arg)?;
            let class = p.classify_box(bang)?;
            class.free.then_some(DecompositionCase::RootApplicationFreeArgument { tensor: l, bang })
        }
        _ => None,
    }
}

/// Every applicable case, in priority order: free weakenings, free
/// substitutions, then the root case (ties by e-node name).
pub fn decompositions(p: &Net) -> Vec<DecompositionCase> {
    if p.links().len() == 1 {
        let l = LinkId(0);
        return match p.link(l).kind {
            LinkKind::Der => vec![DecompositionCase::OneLinkDer(l)],
            LinkKind::Hole => vec![DecompositionCase::OneLinkHole(l)],
            _ => vec![],
        };
    }
    let mut out: Vec<DecompositionCase> = by_name(
        p,
        p.free_weakenings().into_iter().map(|w| (p.link(w).targets[0], w)).collect(),
    )
    .into_iter()
    .map(DecompositionCase::FreeWeakening)
    .collect();
    out.extend(free_substitutions(p).into_iter().map(DecompositionCase::FreeSubstitution));
    out.extend(root_case(p));
    out
}

/// The highest-priority case. `None` only for nets that are not correct.
pub fn decompose(p: &Net) -> Option<DecompositionCase> {
    decompositions(p).into_iter().next()
}

/// The rest of the net after removing the links of a case.
pub fn remainder(p: &Net, case: &DecompositionCase) -> Net {
    let removed = case.removal_set(p);
    let keep: BTreeSet<LinkId> = p.link_ids().filter(|l| !removed.contains(l)).collect();
    let root = match case {
        DecompositionCase::RootAbstraction(l) => p.link(*l).sources[1],
        DecompositionCase::RootApplicationFreeArgument { tensor, .. } => p.link(*tensor).sources[0],
        _ => p.root(),
    };
    p.restrict(&keep, root)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadBackError {
    #[error("no decomposition applies to a net with {links} links")]
    Stuck { links: usize },
}

fn var(p: &Net, n: NodeId) -> VarName {
    VarName::new(&p.node(n).name)
}

/// The read back with the fixed priority of [`decompositions`]. Bound
/// variables are named after their e-nodes.
pub fn read_back(p: &Net) -> Result<Expression, ReadBackError> {
    let case = decompose(p).ok_or(ReadBackError::Stuck { links: p.links().len() })?;
    Ok(match case {
        DecompositionCase::OneLinkDer(l) => Expression::Var(var(p, p.link(l).targets[1])),
        DecompositionCase::OneLinkHole(l) => {
            Expression::Hole(p.link(l).targets[1..].iter().map(|n| var(p, *n)).collect())
        }
        DecompositionCase::FreeWeakening(_) => read_back(&remainder(p, &case))?,
        DecompositionCase::RootAbstraction(l) => {
            Expression::Abs(var(p, p.link(l).sources[0]), Box::new(read_back(&remainder(p, &case))?))
        }
        DecompositionCase::FreeSubstitution(b) => Expression::ESub(
            Box::new(read_back(&remainder(p, &case))?),
            var(p, p.link(b).sources[1]),
            Box::new(read_back(&p.box_net(b))?),
        ),
        DecompositionCase::RootApplicationFreeArgument { bang, .. } => Expression::App(
            Box::new(read_back(&remainder(p, &case))?),
            Box::new(read_back(&p.box_net(bang))?),
        ),
    })
}

/// Every read back of `p`. Free weakenings do not influence the result,
/// so they are all removed first; every other applicable case is explored.
pub fn read_back_all(p: &Net) -> BTreeSet<Expression> {
    let mut memo = BTreeMap::new();
    read_back_all_memo(p, &mut memo)
}

fn read_back_all_memo(p: &Net, memo: &mut BTreeMap<Vec<String>, BTreeSet<Expression>>) -> BTreeSet<Expression> {
    let weakenings = p.free_weakenings();
    if !weakenings.is_empty() && p.links().len() > weakenings.len() {
        let keep: BTreeSet<LinkId> = p.link_ids().filter(|l| !weakenings.contains(l)).collect();
        return read_back_all_memo(&p.restrict(&keep, p.root()), memo);
    }
    // nets reached here are link subsets of one original; names identify them
    let mut key: Vec<String> = p.links().iter().map(|l| l.name.clone()).collect();
    key.sort();
    key.push(p.node(p.root()).name.clone());
    if let Some(found) = memo.get(&key) {
        return found.clone();
    }
    let mut out = BTreeSet::new();
    for case in decompositions(p) {
        match case {
            DecompositionCase::OneLinkDer(l) => {
                out.insert(Expression::Var(var(p, p.link(l).targets[1])));
            }
            DecompositionCase::OneLinkHole(l) => {
                out.insert(Expression::Hole(p.link(l).targets[1..].iter().map(|n| var(p, *n)).collect()));
            }
            DecompositionCase::FreeWeakening(_) => {}
            DecompositionCase::RootAbstraction(l) => {
                let x = var(p, p.link(l).sources[0]);
                for body in read_back_all_memo(&remainder(p, &case), memo) {
                    out.insert(Expression::Abs(x.clone(), Box::new(body)));
                }
            }
            DecompositionCase::FreeSubstitution(b) => {
                let x = var(p, p.link(b).sources[1]);
                let defs = read_back_all_memo(&p.box_net(b), memo);
                for body in read_back_all_memo(&remainder(p, &case), memo) {
                    for d in &defs {
                        out.insert(Expression::ESub(Box::new(body.clone()), x.clone(), Box::new(d.clone())));
                    }
                }
            }
            DecompositionCase::RootApplicationFreeArgument { bang, .. } => {
                let args = read_back_all_memo(&p.box_net(bang), memo);
                for f in read_back_all_memo(&remainder(p, &case), memo) {
                    for a in &args {
                        out.insert(Expression::App(Box::new(f.clone()), Box::new(a.clone())));
                    }
                }
            }
        }
    }
    memo.insert(key, out.clone());
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error("{0} is not a dereliction on a free variable")]
    NotAFreeDereliction(String),
    #[error("the term is not a read back of the net")]
    NotAReadBack,
}

/// Factorises a term net at a dereliction `d` on a free variable `x`: a
/// context net `Q` whose hole replaces `d`, and the context `C` replacing
/// the corresponding occurrence in the read back `t`, both of interface
/// `delta ∪ {x}`.
pub fn factor_at_var(
    p: &Net,
    t: &Expression,
    d: LinkId,
    delta: &BTreeSet<VarName>,
) -> Result<(Net, Expression), FactorError> {
    let link = p.link(d);
    if link.kind != LinkKind::Der || !p.free_vars().contains(&link.targets[1]) {
        return Err(FactorError::NotAFreeDereliction(link.name.clone()));
    }
    let x = var(p, link.targets[1]);
    let mut interface = delta.clone();
    interface.insert(x.clone());

    // the occurrence of t matching d, through the translation of t
    let weakened: BTreeSet<VarName> = p.free_weakening_names().into_iter().map(VarName::new).collect();
    let image = translate(t, &weakened).map_err(|_| FactorError::NotAReadBack)?;
    let witness = net_iso(&image, p).ok_or(FactorError::NotAReadBack)?;
    let source = image.link_ids().find(|l| witness.link(*l) == d).expect("bijection");
    let pos = parse_position(&image.link(source).name["der@".len()..]);
    let c = t.replace_at(&pos, Expression::Hole(interface.clone())).map_err(|_| FactorError::NotAReadBack)?;

    let mut b = NetBuilder::from_net(p);
    let boxes = b.boxes_containing(d);
    b.remove_link(d);
    let mut targets = vec![link.targets[0]];
    targets.extend(interface.iter().map(|v| b.node(v.as_str(), NodeType::E)));
    let hole = b.add_named_link(format!("hole:{}", link.name), LinkKind::Hole, vec![], targets);
    for bang in boxes {
        b.add_to_box(bang, hole);
    }
    Ok((b.finish(p.root()), c))
}

/// Inverse of the position printer: `/` or `/0/1`.
pub(crate) fn parse_position(s: &str) -> Position {
    Position(s.split('/').filter(|c| !c.is_empty()).map(|c| c.parse().expect("position component")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::equiv_closure;
    use crate::net::{from_json, plug_net};
    use crate::syntax::parse;

    fn tr(s: &str) -> Net {
        translate(&parse(s).unwrap(), &BTreeSet::new()).unwrap()
    }

    pub(crate) const CYCLIC_FIXTURE: &str = r#"{
      "nodes": [{"id":"r","ntype":"m"},{"id":"z","ntype":"e"},{"id":"rs","ntype":"m"},{"id":"x","ntype":"e"}],
      "links": [
        {"id":"dz","kind":"der","sources":[],"targets":["r","z"]},
        {"id":"dx","kind":"der","sources":[],"targets":["rs","x"]},
        {"id":"b","kind":"bang","sources":["rs","x"],"targets":[]}
      ],
      "root": "r", "freeVars": ["z"], "iboxes": {"b": ["dx"]}
    }"#;

    #[test]
    fn correction_nets() {
        assert_eq!(correction_net(&tr("x")), tr("x"));
        let c = correction_net(&tr("x[x<-y]"));
        assert_eq!(c.links().len(), 2);
        let g = c.links().iter().find(|l| l.kind == LinkKind::GenAx).unwrap();
        assert_eq!(c.node(g.sources[0]).name, "x");
        assert_eq!(g.targets.iter().map(|n| c.node(*n).name.as_str()).collect::<Vec<_>>(), ["y"]);
        // nested boxes: only the outer one collapses
        let c = correction_net(&tr("x[x<-y[y<-u]]"));
        assert_eq!(c.links().iter().filter(|l| l.kind == LinkKind::GenAx).count(), 1);
        assert!(c.links().iter().all(|l| l.kind != LinkKind::Bang));
    }

    #[test]
    fn correctness() {
        for s in ["x", "\\x. x", "(\\x. x x) (\\y. y)", "(x [.]{x})[x<-z]"] {
            assert_eq!(is_correct(&tr(s)), Ok(()), "{s}");
        }
        let cyclic = from_json(CYCLIC_FIXTURE).unwrap();
        assert_eq!(cyclic.validate(), Ok(()));
        match is_correct(&cyclic) {
            Err(CorrectnessError::Cycle(path)) => assert_eq!(path, ["x", "x"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn skeletons() {
        let p = tr("x");
        assert_eq!(linear_skeleton(&p).unwrap(), vec![p.root()]);
        let p = tr("\\x. x");
        let s = linear_skeleton(&p).unwrap();
        assert_eq!(s.iter().map(|n| p.node(*n).name.as_str()).collect::<Vec<_>>(), ["m@/0", "m@/"]);
        let p = tr("(\\x. x) y z");
        assert_eq!(linear_skeleton(&p).unwrap().len(), 4);
    }

    #[test]
    fn decomposition_cases() {
        assert!(matches!(decompose(&tr("\\x. y")), Some(DecompositionCase::RootAbstraction(_))));
        assert!(matches!(
            decompose(&translate(&parse("y").unwrap(), &[VarName::new("x")].into()).unwrap()),
            Some(DecompositionCase::FreeWeakening(_))
        ));
        assert!(matches!(decompose(&tr("x[x<-y]")), Some(DecompositionCase::FreeSubstitution(_))));
        assert!(matches!(decompose(&tr("x y")), Some(DecompositionCase::RootApplicationFreeArgument { .. })));
        assert!(matches!(decompose(&tr("x")), Some(DecompositionCase::OneLinkDer(_))));
        assert!(matches!(decompose(&tr("[.]{x}")), Some(DecompositionCase::OneLinkHole(_))));
        for s in ["\\x. y", "x[x<-y]", "x y", "(x (\\z. z))[x<-y] w"] {
            let p = tr(s);
            for case in decompositions(&p) {
                let removed = case.removal_set(&p);
                let rest: BTreeSet<LinkId> = p.link_ids().filter(|l| !removed.contains(l)).collect();
                assert!(p.is_subnet(&rest), "{s} {case:?}");
            }
        }
    }

    #[test]
    fn read_backs() {
        assert_eq!(read_back(&tr("x")).unwrap(), parse("x").unwrap());
        assert_eq!(read_back(&tr("[.]{x,y}")).unwrap(), parse("[.]{x,y}").unwrap());
        for s in ["\\x. x", "(\\x. x x) y", "(y x)[x<-z]", "y x[x<-z]", "\\y. (x w)[x<-y] [.]{w}"] {
            
            let back = read_back(&tr(s)).unwrap();
            assert!(net_iso(&translate(&back, &BTreeSet::new()).unwrap(), &tr(s)).is_some(), "{s} / {back}");
        }
    }

    #[test]
    fn all_read_backs() {
        let all = read_back_all(&tr("(\\y. x)[x<-z]"));
        let expected: BTreeSet<Expression> =
            ["(\\y. x)[x<-z]", "\\y. x[x<-z]"].iter().map(|s| parse(s).unwrap()).collect();
        assert_eq!(all, expected);
        assert_eq!(read_back_all(&tr("x")), BTreeSet::from([parse("x").unwrap()]));
        let t = parse("(x w)[x<-y][w<-u]").unwrap();
        let closure: BTreeSet<Expression> = equiv_closure(&t);
        assert_eq!(read_back_all(&tr("(x w)[x<-y][w<-u]")), closure);
    }

    #[test]
    fn factorisation() {
        let p = tr("x");
        let (q, c) = factor_at_var(&p, &parse("x").unwrap(), LinkId(0), &BTreeSet::new()).unwrap();
        assert_eq!(c, parse("[.]{x}").unwrap());
        assert!(net_iso(&q, &tr("[.]{x}")).is_some());

        let p = tr("x y");
        let d = p.link_by_name("der@/0").unwrap();
        let t = parse("x y").unwrap();
        let (q, c) = factor_at_var(&p, &t, d, &BTreeSet::new()).unwrap();
        assert_eq!(c, parse("[.]{x} y").unwrap());
        assert!(net_iso(&plug_net(&q, &tr("x")).unwrap(), &p).is_some());
        assert!(net_iso(&q, &translate(&c, &BTreeSet::new()).unwrap()).is_some());

        // an occurrence inside a box
        let p = tr("(w (x x))[w<-y]");
        let t = parse("(w (x x))[w<-y]").unwrap();
        let d = p.link_by_name("der@/0/1/1").unwrap();
        let (q, c) = factor_at_var(&p, &t, d, &BTreeSet::new()).unwrap();
        assert_eq!(c, parse("(w (x [.]{x}))[w<-y]").unwrap());
        assert!(net_iso(&plug_net(&q, &tr("x")).unwrap(), &p).is_some());
        assert_eq!(c.plug(&parse("x").unwrap()).unwrap(), t);
    }
}
