//! Structural validation of nets: link signatures, the pre-net conditions,
//! the box conditions, and the weakening placement convention.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{LinkId, LinkKind, Net, NodeId, NodeType, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    LinkSignature,
    Root,
    FreeVariables,
    NodeDegree,
    Multiplicative,
    Exponential,
    BoxMap,
    Border,
    Nesting,
    InternalClosure,
    NestingCycle,
    WeakeningPlacement,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::LinkSignature => "link signature",
            Condition::Root => "root",
            Condition::FreeVariables => "free variables",
            Condition::NodeDegree => "node degree",
            Condition::Multiplicative => "multiplicative",
            Condition::Exponential => "exponential",
            Condition::BoxMap => "box map",
            Condition::Border => "border",
            Condition::Nesting => "nesting",
            Condition::InternalClosure => "internal closure",
            Condition::NestingCycle => "nesting cycle",
            Condition::WeakeningPlacement => "weakening placement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    /// Name of the offending link or node.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} [{}]", self.condition, self.message, self.subject)
    }
}

struct Report<'a> {
    net: &'a Net,
    out: Vec<Violation>,
}

impl Report<'_> {
    fn link(&mut self, condition: Condition, l: LinkId, message: impl Into<String>) {
        let subject = self.net.link(l).name.clone();
        self.out.push(Violation { condition, subject, message: message.into() });
    }

    fn node(&mut self, condition: Condition, n: NodeId, message: impl Into<String>) {
        let subject = self.net.node(n).name.clone();
        self.out.push(Violation { condition, subject, message: message.into() });
    }
}

fn signature(kind: LinkKind) -> (&'static [NodeType], &'static [NodeType]) {
    use NodeType::{E, M};
    match kind {
        LinkKind::Der => (&[], &[M, E]),
        LinkKind::Weak => (&[], &[E]),
        LinkKind::Par => (&[E, M], &[M]),
        LinkKind::Tensor => (&[M], &[M, E]),
        LinkKind::Bang => (&[M, E], &[]),
        LinkKind::Hole => (&[], &[M]),
        LinkKind::GenAx => (&[E], &[]),
    }
}

impl Net {
    /// Checks every structural condition; all violations are reported.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut r = Report { net: self, out: Vec::new() };
        let topo = self.topology();
        check_signatures(self, &mut r);
        if !r.out.is_empty() {
            // the remaining checks rely on well-typed ports
            return Err(r.out);
        }
        check_pre_net(self, &topo, &mut r);
        check_boxes(self, &topo, &mut r);
        check_weakening_placement(self, &topo, &mut r);
        if r.out.is_empty() {
            Ok(())
        } else {
            Err(r.out)
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }
}

fn check_signatures(net: &Net, r: &mut Report) {
    let ty = |n: &NodeId| net.nodes.get(n.index()).map(|n| n.ty);
    for l in net.link_ids() {
        let link = net.link(l);
        let (src, tgt) = signature(link.kind);
        let sources: Vec<_> = link.sources.iter().map(ty).collect();
        let targets: Vec<_> = link.targets.iter().map(ty).collect();
        if sources.iter().chain(targets.iter()).any(Option::is_none) {
            r.link(Condition::LinkSignature, l, "connection to a node that does not exist");
            continue;
        }
        let want = |v: &[NodeType]| v.iter().copied().map(Some).collect::<Vec<_>>();
        let ok = match link.kind {
            LinkKind::Hole => {
                sources.is_empty()
                    && targets.first() == Some(&Some(NodeType::M))
                    && targets[1..].iter().all(|t| *t == Some(NodeType::E))
            }
            LinkKind::GenAx => {
                sources == want(src) && targets.iter().all(|t| *t == Some(NodeType::E))
            }
            _ => sources == want(src) && targets == want(tgt),
        };
        if !ok {
            r.link(Condition::LinkSignature, l, format!("ports do not match the signature of a {} link", link.kind));
            continue;
        }
        let mut seen = BTreeSet::new();
        if !link.targets.iter().all(|t| seen.insert(*t)) {
            r.link(Condition::LinkSignature, l, "the same node appears twice among the targets");
        }
    }
    if net.nodes.get(net.root.index()).is_none() {
        r.out.push(Violation {
            condition: Condition::Root,
            subject: format!("#{}", net.root.0),
            message: "the root does not exist".into(),
        });
    }
    for &n in &net.free_vars {
        if net.nodes.get(n.index()).is_none() {
            r.out.push(Violation {
                condition: Condition::FreeVariables,
                subject: format!("#{}", n.0),
                message: "free variable does not exist".into(),
            });
        }
    }
    for (b, interior) in &net.boxes {
        if b.index() >= net.links.len() || interior.iter().any(|l| l.index() >= net.links.len()) {
            r.out.push(Violation {
                condition: Condition::BoxMap,
                subject: format!("#{}", b.0),
                message: "box refers to a link that does not exist".into(),
            });
        }
    }
}

fn check_pre_net(net: &Net, topo: &Topology, r: &mut Report) {
    let root = net.root;
    if net.node(root).ty != NodeType::M {
        r.node(Condition::Root, root, "the root is not an m-node");
    }
    if !topo.is_terminal(root) {
        r.node(Condition::Root, root, "the root is not terminal");
    }
    let computed: BTreeSet<NodeId> =
        net.node_ids().filter(|n| net.node(*n).ty == NodeType::E && topo.is_terminal(*n)).collect();
    if computed != net.free_vars {
        for n in computed.symmetric_difference(&net.free_vars) {
            let msg = if computed.contains(n) {
                "terminal e-node missing from the free variables"
            } else {
                "declared free variable is not a terminal e-node"
            };
            r.node(Condition::FreeVariables, *n, msg);
        }
    }
    for &n in &computed {
        if topo.incoming[n.index()].iter().any(|l| net.link(*l).kind == LinkKind::Tensor) {
            r.node(Condition::FreeVariables, n, "free variable is the target of a tensor");
        }
    }
    for n in net.node_ids() {
        let incoming = &topo.incoming[n.index()];
        if incoming.is_empty() {
            r.node(Condition::NodeDegree, n, "node without incoming links");
        }
        if topo.outgoing[n.index()].len() > 1 {
            r.node(Condition::NodeDegree, n, "node with more than one outgoing link");
        }
        match net.node(n).ty {
            NodeType::M => {
                if incoming.len() > 1 {
                    r.node(Condition::Multiplicative, n, "m-node with more than one incoming link");
                }
            }
            NodeType::E if incoming.len() > 1 => {
                let kinds: Vec<LinkKind> = incoming.iter().map(|l| net.link(*l).kind).collect();
                if kinds.contains(&LinkKind::Weak) {
                    r.node(Condition::Exponential, n, "weakenings cannot be contracted");
                } else if kinds.contains(&LinkKind::Tensor) {
                    r.node(Condition::Exponential, n, "tensor targets cannot be contracted");
                } else if kinds.iter().filter(|k| **k == LinkKind::Hole).count() > 1 {
                    r.node(Condition::Exponential, n, "two hole links share a node");
                }
            }
            NodeType::E => {}
        }
    }
}

/// Terminal e-nodes, internal nodes and incoming degree inside a link set.
struct SubView {
    nodes: BTreeSet<NodeId>,
    incoming: BTreeMap<NodeId, usize>,
    outgoing: BTreeMap<NodeId, usize>,
}

impl SubView {
    fn of(net: &Net, links: &BTreeSet<LinkId>) -> Self {
        let mut v = SubView { nodes: BTreeSet::new(), incoming: BTreeMap::new(), outgoing: BTreeMap::new() };
        for l in links {
            let link = net.link(*l);
            for s in &link.sources {
                v.nodes.insert(*s);
                *v.outgoing.entry(*s).or_default() += 1;
            }
            for t in &link.targets {
                v.nodes.insert(*t);
                *v.incoming.entry(*t).or_default() += 1;
            }
        }
        v
    }

    fn incoming(&self, n: NodeId) -> usize {
        self.incoming.get(&n).copied().unwrap_or(0)
    }

    fn outgoing(&self, n: NodeId) -> usize {
        self.outgoing.get(&n).copied().unwrap_or(0)
    }

    fn internal(&self, n: NodeId) -> bool {
        self.incoming(n) > 0 && self.outgoing(n) > 0
    }

    fn free_vars<'a>(&'a self, net: &'a Net) -> impl Iterator<Item = NodeId> + 'a {
        self.nodes.iter().copied().filter(move |n| net.node(*n).ty == NodeType::E && self.outgoing(*n) == 0)
    }
}

fn check_boxes(net: &Net, topo: &Topology, r: &mut Report) {
    let bangs: BTreeSet<LinkId> = net.links_of_kind(LinkKind::Bang).collect();
    for b in &bangs {
        if !net.boxes.contains_key(b) {
            r.link(Condition::BoxMap, *b, "!-link without a box");
        }
    }
    let mut views = BTreeMap::new();
    for (b, interior) in &net.boxes {
        if !bangs.contains(b) {
            r.link(Condition::BoxMap, *b, "box attached to a link that is not a !-link");
            continue;
        }
        if interior.contains(b) {
            r.link(Condition::BoxMap, *b, "!-link inside its own box");
            continue;
        }
        if interior.is_empty() {
            r.link(Condition::BoxMap, *b, "empty box");
            continue;
        }
        let view = SubView::of(net, interior);
        let root = net.link(*b).sources[0];
        // the interior is a pre-net rooted at the !-link's m-source
        if !view.nodes.contains(&root) || view.outgoing(root) > 0 {
            r.link(Condition::Border, *b, "the box root is not the terminal m-source of its !-link");
        }
        for &n in &view.nodes {
            let inc = view.incoming(n);
            if inc == 0 {
                r.link(
                    Condition::BoxMap,
                    *b,
                    format!("node {} has no incoming link inside the box", net.node(n).name),
                );
            }
        }
        for v in view.free_vars(net) {
            if topo.incoming[v.index()].iter().any(|l| net.link(*l).kind == LinkKind::Weak) {
                r.link(
                    Condition::Border,
                    *b,
                    format!("free variable {} of the box is the target of a weakening", net.node(v).name),
                );
            }
            if topo.incoming[v.index()].iter().any(|l| net.link(*l).kind == LinkKind::Tensor && interior.contains(l)) {
                r.link(
                    Condition::Border,
                    *b,
                    format!("free variable {} of the box is the target of a tensor", net.node(v).name),
                );
            }
        }
        // internal closure: contractions
        for &n in &view.nodes {
            if net.node(n).ty == NodeType::E
                && view.internal(n)
                && topo.incoming[n.index()].iter().any(|l| !interior.contains(l))
            {
                r.link(
                    Condition::InternalClosure,
                    *b,
                    format!("node {} is internal to the box but not all its premises are", net.node(n).name),
                );
            }
        }
        // internal closure: boxes
        for h in interior {
            if let Some(inner) = net.boxes.get(h) {
                if !inner.is_subset(interior) {
                    r.link(
                        Condition::InternalClosure,
                        *b,
                        format!("contains !-link {} but not all of its box", net.link(*h).name),
                    );
                }
            }
        }
        views.insert(*b, view);
    }
    // nesting
    let keys: Vec<LinkId> = views.keys().copied().collect();
    for (i, b) in keys.iter().enumerate() {
        for h in &keys[i + 1..] {
            let (ib, ih) = (&net.boxes[b], &net.boxes[h]);
            if ib.is_subset(ih) || ih.is_subset(ib) {
                continue;
            }
            let (vb, vh) = (&views[b], &views[h]);
            let free_b: BTreeSet<NodeId> = vb.free_vars(net).collect();
            let free_h: BTreeSet<NodeId> = vh.free_vars(net).collect();
            for n in vb.nodes.intersection(&vh.nodes) {
                if !(free_b.contains(n) && free_h.contains(n)) {
                    r.out.push(Violation {
                        condition: Condition::Nesting,
                        subject: format!("{}/{}", net.link(*b).name, net.link(*h).name),
                        message: format!(
                            "overlapping boxes share node {} which is not a free variable of both",
                            net.node(*n).name
                        ),
                    });
                }
            }
        }
    }
    // acyclicity of the containment relation
    let mut state: BTreeMap<LinkId, u8> = BTreeMap::new();
    fn visit(net: &Net, b: LinkId, state: &mut BTreeMap<LinkId, u8>) -> bool {
        match state.get(&b) {
            Some(1) => return false,
            Some(_) => return true,
            None => {}
        }
        state.insert(b, 1);
        for h in net.ibox(b) {
            if net.boxes.contains_key(h) && !visit(net, *h, state) {
                return false;
            }
        }
        state.insert(b, 2);
        true
    }
    for b in net.boxes.keys() {
        if !visit(net, *b, &mut state) {
            r.link(Condition::NestingCycle, *b, "box containment is cyclic");
            break;
        }
    }
}

/// A weakening sits in exactly the boxes containing the link its node
/// flows into (in no box if the node is terminal).
fn check_weakening_placement(net: &Net, topo: &Topology, r: &mut Report) {
    let containing = |l: LinkId| -> BTreeSet<LinkId> {
        net.boxes.iter().filter(|(_, i)| i.contains(&l)).map(|(b, _)| *b).collect()
    };
    for w in net.links_of_kind(LinkKind::Weak) {
        let n = net.link(w).targets[0];
        let wanted = match topo.outgoing[n.index()].first() {
            Some(&next) => containing(next),
            None => BTreeSet::new(),
        };
        if containing(w) != wanted {
            r.link(Condition::WeakeningPlacement, w, "weakening not pushed out of boxes as far as possible");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetBuilder;
    use crate::syntax::parse;
    use crate::translate::translate;

    fn net(s: &str) -> Net {
        translate(&parse(s).unwrap(), &BTreeSet::new()).unwrap()
    }

    fn conditions(n: &Net) -> Vec<Condition> {
        n.validate().err().unwrap_or_default().into_iter().map(|v| v.condition).collect()
    }

    #[test]
    fn translations_are_valid() {
        for s in ["x", "\\x. x", "(\\x. x x) y", "x[x<-y]", "(\\y. z)[z<-u u] (\\w. w)", "[.]{x} y"] {
            assert_eq!(net(s).validate(), Ok(()), "{s}");
        }
    }

    #[test]
    fn contracted_weakening() {
        let mut b = NetBuilder::new();
        let m = b.node("r", NodeType::M);
        let x = b.node("x", NodeType::E);
        b.add_named_link("d".into(), LinkKind::Der, vec![], vec![m, x]);
        b.add_named_link("w".into(), LinkKind::Weak, vec![], vec![x]);
        let n = b.finish(m);
        let errs = n.validate().unwrap_err();
        assert!(errs.iter().any(|v| v.message == "weakenings cannot be contracted" && v.subject == "x"));
    }

    #[test]
    fn box_missing_a_contraction_premise() {
        let mut n = net("z (\\y. y y)");
        let bang = n.link_by_name("bang@/").unwrap();
        let d = n.link_by_name("der@/1/0/0").unwrap();
        n.boxes.get_mut(&bang).unwrap().remove(&d);
        assert!(conditions(&n).contains(&Condition::InternalClosure));
    }

    #[test]
    fn bad_signature() {
        let mut b = NetBuilder::new();
        let m = b.node("r", NodeType::M);
        let x = b.node("x", NodeType::E);
        b.add_named_link("d".into(), LinkKind::Der, vec![], vec![x, m]);
        let n = b.finish(m);
        assert_eq!(conditions(&n), vec![Condition::LinkSignature]);
    }

    #[test]
    fn misplaced_weakening_and_border() {
        // weakening on a free variable kept inside a box
        let mut n = translate(&parse("z[z<-y]").unwrap(), &["w".into()].into()).unwrap();
        let bang = n.link_by_name("bang@/").unwrap();
        let w = n.link_by_name("weak@w").unwrap();
        n.boxes.get_mut(&bang).unwrap().insert(w);
        let c = conditions(&n);
        assert!(c.contains(&Condition::WeakeningPlacement));
        assert!(c.contains(&Condition::Border));
    }

    #[test]
    fn wrong_free_variables() {
        let mut n = net("x");
        n.free_vars.clear();
        assert_eq!(conditions(&n), vec![Condition::FreeVariables]);
    }

    #[test]
    fn root_must_be_terminal() {
        let mut n = net("\\x. x");
        n.root = n.node_by_name("m@/0").unwrap();
        assert!(conditions(&n).contains(&Condition::Root));
    }
}
