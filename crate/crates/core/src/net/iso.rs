//! Net isomorphism with free variables fixed by name.
//!
//! A net is viewed as a coloured graph whose vertices are its nodes and
//! links; edges are port connections (labelled by port) and box
//! memberships. Colour refinement narrows the candidate pairs, then an
//! individualise-and-refine search finds a bijection, which is always
//! verified exactly before being returned.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use super::{LinkId, LinkKind, Net, NodeId};

/// A bijection between the nodes and links of two nets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoWitness {
    /// `nodes[i]` is the image of node `i`.
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

impl IsoWitness {
    pub fn node(&self, n: NodeId) -> NodeId {
        self.nodes[n.index()]
    }

    pub fn link(&self, l: LinkId) -> LinkId {
        self.links[l.index()]
    }

    pub fn compose(&self, next: &IsoWitness) -> IsoWitness {
        IsoWitness {
            nodes: self.nodes.iter().map(|n| next.node(*n)).collect(),
            links: self.links.iter().map(|l| next.link(*l)).collect(),
        }
    }

    pub fn inverse(&self) -> IsoWitness {
        let mut nodes = vec![NodeId(0); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            nodes[n.index()] = NodeId(i as u32);
        }
        let mut links = vec![LinkId(0); self.links.len()];
        for (i, l) in self.links.iter().enumerate() {
            links[l.index()] = LinkId(i as u32);
        }
        IsoWitness { nodes, links }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Role {
    Source(u8),
    Target(u8),
    /// A target of a hole or generalised axiom beyond the first: unordered.
    Interface,
    SourceOf(u8),
    TargetOf(u8),
    InterfaceOf,
    BoxContains,
    InBox,
}

struct Graph {
    /// Vertices `0..n` are nodes, `n..n+l` links.
    initial: Vec<u64>,
    adj: Vec<Vec<(Role, usize)>>,
    nodes: usize,
}

fn hash_of<T: Hash>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

impl Graph {
    fn of(net: &Net) -> Graph {
        let n = net.nodes().len();
        let total = n + net.links().len();
        let mut adj = vec![Vec::new(); total];
        let mut initial = Vec::with_capacity(total);
        for id in net.node_ids() {
            let node = net.node(id);
            let free_name = net.free_vars().contains(&id).then_some(node.name.as_str());
            initial.push(hash_of(&("node", node.ty, id == net.root(), free_name)));
        }
        for id in net.link_ids() {
            let link = net.link(id);
            initial.push(hash_of(&("link", link.kind)));
            let v = n + id.index();
            let unordered = matches!(link.kind, LinkKind::Hole | LinkKind::GenAx);
            for (i, s) in link.sources.iter().enumerate() {
                adj[v].push((Role::Source(i as u8), s.index()));
                adj[s.index()].push((Role::SourceOf(i as u8), v));
            }
            for (i, t) in link.targets.iter().enumerate() {
                if unordered && (i > 0 || link.kind == LinkKind::GenAx) {
                    adj[v].push((Role::Interface, t.index()));
                    adj[t.index()].push((Role::InterfaceOf, v));
                } else {
                    adj[v].push((Role::Target(i as u8), t.index()));
                    adj[t.index()].push((Role::TargetOf(i as u8), v));
                }
            }
        }
        for (bang, interior) in net.boxes() {
            let b = n + bang.index();
            for l in interior {
                adj[b].push((Role::BoxContains, n + l.index()));
                adj[n + l.index()].push((Role::InBox, b));
            }
        }
        Graph { initial, adj, nodes: n }
    }

    fn refine_once(&self, colors: &[u64]) -> Vec<u64> {
        let mut out = Vec::with_capacity(colors.len());
        let mut signature = Vec::new();
        for (v, c) in colors.iter().enumerate() {
            signature.clear();
            signature.extend(self.adj[v].iter().map(|(role, w)| (*role, colors[*w])));
            signature.sort_unstable();
            out.push(hash_of(&(c, &signature)));
        }
        out
    }
}

fn class_count(colors: &[u64]) -> usize {
    let mut v = colors.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn histogram(colors: &[u64]) -> Vec<u64> {
    let mut v = colors.to_vec();
    v.sort_unstable();
    v
}

/// Refines both colourings in lockstep until neither partition splits
/// further. Returns false as soon as the colour histograms differ.
fn refine_pair(g: &Graph, h: &Graph, a: &mut Vec<u64>, b: &mut Vec<u64>) -> bool {
    let (mut ca, mut cb) = (class_count(a), class_count(b));
    loop {
        if histogram(a) != histogram(b) {
            return false;
        }
        let na = g.refine_once(a);
        let nb = h.refine_once(b);
        let (ka, kb) = (class_count(&na), class_count(&nb));
        *a = na;
        *b = nb;
        if ka == ca && kb == cb {
            return histogram(a) == histogram(b);
        }
        ca = ka;
        cb = kb;
    }
}

fn stable_colors(g: &Graph) -> Vec<u64> {
    let mut colors = g.initial.clone();
    let mut count = class_count(&colors);
    loop {
        let next = g.refine_once(&colors);
        let k = class_count(&next);
        colors = next;
        if k == count {
            return colors;
        }
        count = k;
    }
}

/// An isomorphism-invariant hash: equal for isomorphic nets.
pub fn net_hash(net: &Net) -> u64 {
    let g = Graph::of(net);
    let colors = stable_colors(&g);
    hash_of(&(net.nodes().len(), net.links().len(), histogram(&colors)))
}

/// Searches for an isomorphism from `p` to `q` preserving node types, link
/// kinds, port order (interfaces of holes and generalised axioms as sets),
/// the root, the box map, and the free variables by name.
pub fn net_iso(p: &Net, q: &Net) -> Option<IsoWitness> {
    if p.nodes().len() != q.nodes().len()
        || p.links().len() != q.links().len()
        || p.boxes().len() != q.boxes().len()
        || p.free_var_names() != q.free_var_names()
    {
        return None;
    }
    let (g, h) = (Graph::of(p), Graph::of(q));
    let (mut a, mut b) = (g.initial.clone(), h.initial.clone());
    if !refine_pair(&g, &h, &mut a, &mut b) {
        return None;
    }
    search(p, q, &g, &h, a, b, 0)
}

fn search(p: &Net, q: &Net, g: &Graph, h: &Graph, a: Vec<u64>, b: Vec<u64>, depth: u64) -> Option<IsoWitness> {
    // smallest non-singleton class, ties broken by colour value
    let mut classes: HashMap<u64, usize> = HashMap::new();
    for c in &a {
        *classes.entry(*c).or_default() += 1;
    }
    let target = classes.iter().filter(|(_, n)| **n > 1).min_by_key(|(c, n)| (**n, **c)).map(|(c, _)| *c);
    let Some(color) = target else {
        return witness_from_colors(p, q, g, &a, &b).filter(|w| verify(p, q, w));
    };
    let v = a.iter().position(|c| *c == color).expect("class is non-empty");
    let marker = hash_of(&("individual", depth, color));
    for (w, _) in b.iter().enumerate().filter(|(_, c)| **c == color) {
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2[v] = marker;
        b2[w] = marker;
        if refine_pair(g, h, &mut a2, &mut b2) {
            if let Some(found) = search(p, q, g, h, a2, b2, depth + 1) {
                return Some(found);
            }
        }
    }
    None
}

fn witness_from_colors(p: &Net, q: &Net, g: &Graph, a: &[u64], b: &[u64]) -> Option<IsoWitness> {
    let index: HashMap<u64, usize> = b.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let n = g.nodes;
    let mut nodes = Vec::with_capacity(p.nodes().len());
    let mut links = Vec::with_capacity(p.links().len());
    for (v, c) in a.iter().enumerate() {
        let w = *index.get(c)?;
        if v < n {
            if w >= n {
                return None;
            }
            nodes.push(NodeId(w as u32));
        } else {
            if w < n {
                return None;
            }
            links.push(LinkId((w - n) as u32));
        }
    }
    debug_assert_eq!(links.len(), q.links().len());
    Some(IsoWitness { nodes, links })
}

/// Exact check that a candidate bijection is an isomorphism.
pub(crate) fn verify(p: &Net, q: &Net, w: &IsoWitness) -> bool {
    if w.nodes.len() != q.nodes().len() || w.links.len() != q.links().len() {
        return false;
    }
    let distinct_nodes: BTreeSet<NodeId> = w.nodes.iter().copied().collect();
    let distinct_links: BTreeSet<LinkId> = w.links.iter().copied().collect();
    if distinct_nodes.len() != w.nodes.len() || distinct_links.len() != w.links.len() {
        return false;
    }
    for n in p.node_ids() {
        let (a, b) = (p.node(n), q.node(w.node(n)));
        if a.ty != b.ty {
            return false;
        }
        let (fa, fb) = (p.free_vars().contains(&n), q.free_vars().contains(&w.node(n)));
        if fa != fb || (fa && a.name != b.name) {
            return false;
        }
    }
    if w.node(p.root()) != q.root() {
        return false;
    }
    for l in p.link_ids() {
        let (a, b) = (p.link(l), q.link(w.link(l)));
        if a.kind != b.kind || a.sources.len() != b.sources.len() || a.targets.len() != b.targets.len() {
            return false;
        }
        if a.sources.iter().map(|n| w.node(*n)).ne(b.sources.iter().copied()) {
            return false;
        }
        match a.kind {
            LinkKind::Hole | LinkKind::GenAx => {
                let skip = usize::from(a.kind == LinkKind::Hole);
                if skip == 1 && w.node(a.targets[0]) != b.targets[0] {
                    return false;
                }
                let ta: BTreeSet<NodeId> = a.targets[skip..].iter().map(|n| w.node(*n)).collect();
                let tb: BTreeSet<NodeId> = b.targets[skip..].iter().copied().collect();
                if ta != tb {
                    return false;
                }
            }
            _ => {
                if a.targets.iter().map(|n| w.node(*n)).ne(b.targets.iter().copied()) {
                    return false;
                }
            }
        }
    }
    if p.boxes().len() != q.boxes().len() {
        return false;
    }
    for (bang, interior) in p.boxes() {
        let Some(other) = q.boxes().get(&w.link(*bang)) else {
            return false;
        };
        let mapped: BTreeSet<LinkId> = interior.iter().map(|l| w.link(*l)).collect();
        if &mapped != other {
            return false;
        }
    }
    true
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

    /// The same net with nodes and links listed in reverse order and
    /// internal names changed.
    fn scrambled(n: &Net) -> Net {
        let mut b = NetBuilder::new();
        let mut map = HashMap::new();
        for id in n.node_ids().rev() {
            let node = n.node(id);
            let name = if n.free_vars().contains(&id) { node.name.clone() } else { format!("{}'", node.name) };
            map.insert(id, b.node(&name, node.ty));
        }
        let mut links = HashMap::new();
        for id in n.link_ids().rev() {
            let l = n.link(id);
            let new = b.add_named_link(
                format!("{}'", l.name),
                l.kind,
                l.sources.iter().map(|x| map[x]).collect(),
                l.targets.iter().map(|x| map[x]).collect(),
            );
            links.insert(id, new);
        }
        for (bang, interior) in n.boxes() {
            b.set_box(links[bang], interior.iter().map(|l| links[l]).collect());
        }
        b.finish(map[&n.root()])
    }

    #[test]
    fn renamed_copy_is_isomorphic() {
        for s in ["x", "(\\x. x x) y", "(x x)[x<-\\y. y z]", "(\\a. a (\\b. b a))[c<-d]"] {
            let p = net(s);
            let q = scrambled(&p);
            let w = net_iso(&p, &q).expect(s);
            assert!(verify(&p, &q, &w));
            assert_eq!(net_hash(&p), net_hash(&q));
            let back = net_iso(&q, &p).unwrap();
            assert!(verify(&p, &p, &w.compose(&back)));
            assert!(verify(&q, &p, &w.inverse()));
        }
    }

    #[test]
    fn lambda_axiom_sides_are_isomorphic() {
        assert!(net_iso(&net("(\\y. x)[x<-z]"), &net("\\y. x[x<-z]")).is_some());
        assert!(net_iso(&net("(x w)[x<-z]"), &net("x[x<-z] w")).is_some());
        assert!(net_iso(&net("x[x<-y][w<-z]"), &net("x[w<-z][x<-y]")).is_some());
    }

    #[test]
    fn right_application_axiom_is_not_sound_for_nets() {
        assert!(net_iso(&net("(y x)[x<-z]"), &net("y (x[x<-z])")).is_none());
    }

    #[test]
    fn free_names_are_fixed() {
        assert!(net_iso(&net("x"), &net("y")).is_none());
        assert!(net_iso(&net("\\x. x"), &net("\\y. y")).is_some());
        assert!(net_iso(&net("x y"), &net("y x")).is_none());
    }

    #[test]
    fn symmetric_nets() {
        // contraction symmetry forces the search to backtrack
        let p = net("(x x) (x x)");
        assert!(net_iso(&p, &scrambled(&p)).is_some());
        let p = net("x[x<-y][z<-y] (w[w<-y])");
        assert!(net_iso(&p, &scrambled(&p)).is_some());
    }
}
