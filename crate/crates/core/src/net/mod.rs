//! Nets: directed hypergraphs whose nodes are typed `e` (exponential) or
//! `m` (multiplicative) and whose hyperedges ("links") are the rules of the
//! logic, plus a box for every `!`-link.
//!
//! Port conventions, following the polarised orientation:
//!
//! | kind   | sources        | targets              | principal  |
//! |--------|----------------|----------------------|------------|
//! | `d`    | –              | `[m, e]`             | e-target   |
//! | `w`    | –              | `[e]`                | e-target   |
//! | `⅋`    | `[e, m]`       | `[m]`                | m-target   |
//! | `⊗`    | `[m]`          | `[m, e]`             | m-source   |
//! | `!`    | `[m, e]`       | –                    | e-source   |
//! | `⟨·⟩`  | –              | `[m, e...]`          | none       |
//! | genax  | `[e]`          | `[e...]`             | none       |
//!
//! Contraction is not a link: an e-node that is the target of several
//! dereliction links is shared. Cuts are not stored either; they are nodes
//! where two principal ports meet.

mod io;
mod iso;
mod plug;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{from_json, to_dot, to_json, NetIoError};
pub use iso::{net_hash, net_iso, IsoWitness};
pub use plug::{plug_net, PlugError};
pub use validate::{Condition, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LinkId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeType {
    #[serde(rename = "e")]
    E,
    #[serde(rename = "m")]
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Bang,
    Der,
    Weak,
    Par,
    Tensor,
    Hole,
    GenAx,
}

impl LinkKind {
    pub fn symbol(self) -> &'static str {
        match self {
            LinkKind::Bang => "!",
            LinkKind::Der => "d",
            LinkKind::Weak => "w",
            LinkKind::Par => "⅋",
            LinkKind::Tensor => "⊗",
            LinkKind::Hole => "⟨·⟩",
            LinkKind::GenAx => "genax",
        }
    }

    /// The port on which the link interacts.
    pub fn principal(self) -> Option<Port> {
        match self {
            LinkKind::Der => Some(Port::Target(1)),
            LinkKind::Weak => Some(Port::Target(0)),
            LinkKind::Par => Some(Port::Target(0)),
            LinkKind::Tensor => Some(Port::Source(0)),
            LinkKind::Bang => Some(Port::Source(1)),
            LinkKind::Hole | LinkKind::GenAx => None,
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkKind::Bang => "bang",
            LinkKind::Der => "der",
            LinkKind::Weak => "weak",
            LinkKind::Par => "par",
            LinkKind::Tensor => "tensor",
            LinkKind::Hole => "hole",
            LinkKind::GenAx => "genax",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    Source(usize),
    Target(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub ty: NodeType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub name: String,
    pub kind: LinkKind,
    pub sources: Vec<NodeId>,
    pub targets: Vec<NodeId>,
}

impl Link {
    pub fn principal_node(&self) -> Option<NodeId> {
        match self.kind.principal()? {
            Port::Source(i) => self.sources.get(i).copied(),
            Port::Target(i) => self.targets.get(i).copied(),
        }
    }

    /// The e-node a `d`, `w`, `⅋`, `!` or `⊗` link is about (the variable
    /// for `d`/`w`/`⅋`, the box's e-node for `!`, the argument for `⊗`).
    pub fn e_node(&self) -> Option<NodeId> {
        match self.kind {
            LinkKind::Der => self.targets.get(1).copied(),
            LinkKind::Weak => self.targets.first().copied(),
            LinkKind::Par => self.sources.first().copied(),
            LinkKind::Bang => self.sources.get(1).copied(),
            LinkKind::Tensor => self.targets.get(1).copied(),
            LinkKind::Hole | LinkKind::GenAx => None,
        }
    }

    /// The m-node a link produces (`d`, `⅋`, `⊗`, `⟨·⟩`).
    pub fn m_target(&self) -> Option<NodeId> {
        match self.kind {
            LinkKind::Der | LinkKind::Par | LinkKind::Tensor | LinkKind::Hole => self.targets.first().copied(),
            _ => None,
        }
    }

    /// The m-node a link consumes (`⅋`, `⊗`, `!`).
    pub fn m_source(&self) -> Option<NodeId> {
        match self.kind {
            LinkKind::Par => self.sources.get(1).copied(),
            LinkKind::Tensor | LinkKind::Bang => self.sources.first().copied(),
            _ => None,
        }
    }
}

/// A net. Links and nodes are addressed by index; names are what the
/// outside world sees (and, for e-nodes, the variable names).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    nodes: Vec<Node>,
    links: Vec<Link>,
    root: NodeId,
    free_vars: BTreeSet<NodeId>,
    boxes: BTreeMap<LinkId, BTreeSet<LinkId>>,
}

/// Incidence lists.
#[derive(Debug, Clone)]
pub struct Topology {
    pub incoming: Vec<Vec<LinkId>>,
    pub outgoing: Vec<Vec<LinkId>>,
}

impl Topology {
    pub fn of(nodes: usize, links: &[Link]) -> Self {
        let mut incoming = vec![Vec::new(); nodes];
        let mut outgoing = vec![Vec::new(); nodes];
        for (i, l) in links.iter().enumerate() {
            let id = LinkId(i as u32);
            for s in &l.sources {
                outgoing[s.index()].push(id);
            }
            for t in &l.targets {
                incoming[t.index()].push(id);
            }
        }
        Topology { incoming, outgoing }
    }

    pub fn is_terminal(&self, n: NodeId) -> bool {
        self.outgoing[n.index()].is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetKind {
    TermNet,
    ContextNet,
    CorrectionNet,
    Other,
}

/// Whether a `!`-link's e-node is the target of a `⊗` (an argument) or not
/// (a substitution), and whether the box is free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxClass {
    pub role: BoxRole,
    /// Level 0 and every free variable of the box free in the net.
    pub free: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxRole {
    Argument,
    Substitution,
}

impl Net {
    /// Assembles a net from parts without checking anything; see
    /// [`Net::validate`].
    pub fn from_parts(
        nodes: Vec<Node>,
        links: Vec<Link>,
        root: NodeId,
        free_vars: BTreeSet<NodeId>,
        boxes: BTreeMap<LinkId, BTreeSet<LinkId>>,
    ) -> Self {
        Net { nodes, links, root, free_vars, boxes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.index()]
    }

    pub fn link(&self, l: LinkId) -> &Link {
        &self.links[l.index()]
    }

    pub fn node_ids(&self) -> impl DoubleEndedIterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn link_ids(&self) -> impl DoubleEndedIterator<Item = LinkId> {
        (0..self.links.len() as u32).map(LinkId)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn free_vars(&self) -> &BTreeSet<NodeId> {
        &self.free_vars
    }

    pub fn free_var_names(&self) -> BTreeSet<String> {
        self.free_vars.iter().map(|n| self.node(*n).name.clone()).collect()
    }

    pub fn boxes(&self) -> &BTreeMap<LinkId, BTreeSet<LinkId>> {
        &self.boxes
    }

    /// Interior of the box of a `!`-link (empty for other links).
    pub fn ibox(&self, bang: LinkId) -> &BTreeSet<LinkId> {
        static EMPTY: BTreeSet<LinkId> = BTreeSet::new();
        self.boxes.get(&bang).unwrap_or(&EMPTY)
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(|i| NodeId(i as u32))
    }

    pub fn link_by_name(&self, name: &str) -> Option<LinkId> {
        self.links.iter().position(|l| l.name == name).map(|i| LinkId(i as u32))
    }

    pub fn topology(&self) -> Topology {
        Topology::of(self.nodes.len(), &self.links)
    }

    pub fn links_of_kind(&self, kind: LinkKind) -> impl Iterator<Item = LinkId> + '_ {
        self.link_ids().filter(move |l| self.link(*l).kind == kind)
    }

    pub fn kind(&self) -> NetKind {
        let count = |k| self.links.iter().filter(|l| l.kind == k).count();
        let (holes, genax, bangs) = (count(LinkKind::Hole), count(LinkKind::GenAx), count(LinkKind::Bang));
        if holes == 0 && genax == 0 {
            NetKind::TermNet
        } else if holes == 1 && genax == 0 {
            NetKind::ContextNet
        } else if bangs == 0 {
            NetKind::CorrectionNet
        } else {
            NetKind::Other
        }
    }

    pub fn is_term_net(&self) -> bool {
        self.kind() == NetKind::TermNet
    }

    pub fn is_context_net(&self) -> bool {
        self.kind() == NetKind::ContextNet
    }

    /// The `⟨·⟩`-link of a context net.
    pub fn hole_link(&self) -> Option<LinkId> {
        let mut holes = self.links_of_kind(LinkKind::Hole);
        let first = holes.next()?;
        holes.next().is_none().then_some(first)
    }

    /// Interface of a context net: the e-nodes of its hole.
    pub fn interface(&self) -> Option<BTreeSet<String>> {
        let h = self.hole_link()?;
        Some(self.link(h).targets[1..].iter().map(|n| self.node(*n).name.clone()).collect())
    }

    /// Level of every link: the number of boxes containing it.
    pub fn link_levels(&self) -> Vec<usize> {
        let mut levels = vec![0; self.links.len()];
        for interior in self.boxes.values() {
            for l in interior {
                levels[l.index()] += 1;
            }
        }
        levels
    }

    pub fn link_level(&self, l: LinkId) -> usize {
        self.boxes.values().filter(|interior| interior.contains(&l)).count()
    }

    /// The box of `bang` as a net of its own, rooted at the `!`'s m-source.
    pub fn box_net(&self, bang: LinkId) -> Net {
        let root = self.link(bang).sources[0];
        self.restrict(self.ibox(bang), root)
    }

    /// Sub-hypergraph induced by a set of links (nodes are those the links
    /// touch); boxes are inherited. Free variables are recomputed as the
    /// terminal e-nodes of the result.
    pub fn restrict(&self, keep: &BTreeSet<LinkId>, root: NodeId) -> Net {
        let mut b = NetBuilder::new();
        let mut node_map: HashMap<NodeId, NodeId> = HashMap::new();
        let mut map_node = |b: &mut NetBuilder, n: NodeId| -> NodeId {
            *node_map.entry(n).or_insert_with(|| {
                let node = self.node(n);
                b.push_node(node.name.clone(), node.ty)
            })
        };
        let mut link_map: HashMap<LinkId, LinkId> = HashMap::new();
        for &l in keep {
            let link = self.link(l);
            let sources = link.sources.iter().map(|&n| map_node(&mut b, n)).collect();
            let targets = link.targets.iter().map(|&n| map_node(&mut b, n)).collect();
            let id = b.add_named_link(link.name.clone(), link.kind, sources, targets);
            link_map.insert(l, id);
        }
        for (bang, interior) in &self.boxes {
            if let Some(&new_bang) = link_map.get(bang) {
                let mapped = interior.iter().filter_map(|l| link_map.get(l).copied()).collect();
                b.boxes.insert(new_bang, mapped);
            }
        }
        let root = map_node(&mut b, root);
        b.finish(root)
    }

    /// Free variables of the box of `bang`: its terminal e-nodes.
    pub fn box_free_vars(&self, bang: LinkId, topo: &Topology) -> BTreeSet<NodeId> {
        let interior = self.ibox(bang);
        let mut out = BTreeSet::new();
        for l in interior {
            for &n in self.link(*l).targets.iter() {
                if self.node(n).ty == NodeType::E
                    && !topo.outgoing[n.index()].iter().any(|o| interior.contains(o))
                {
                    out.insert(n);
                }
            }
        }
        out
    }

    pub fn classify_box(&self, bang: LinkId) -> Option<BoxClass> {
        let link = self.link(bang);
        if link.kind != LinkKind::Bang {
            return None;
        }
        let topo = self.topology();
        let e = link.sources[1];
        let argument =
            topo.incoming[e.index()].iter().any(|l| self.link(*l).kind == LinkKind::Tensor);
        let role = if argument { BoxRole::Argument } else { BoxRole::Substitution };
        let free =
            self.link_level(bang) == 0 && self.box_free_vars(bang, &topo).is_subset(&self.free_vars);
        Some(BoxClass { role, free })
    }

    /// Free weakenings: `w`-links on free variables of the net.
    pub fn free_weakenings(&self) -> Vec<LinkId> {
        self.links_of_kind(LinkKind::Weak)
            .filter(|w| self.free_vars.contains(&self.link(*w).targets[0]))
            .collect()
    }

    /// Names of the e-nodes of the free weakenings.
    pub fn free_weakening_names(&self) -> BTreeSet<String> {
        self.free_weakenings().into_iter().map(|w| self.node(self.link(w).targets[0]).name.clone()).collect()
    }

    /// Multiplicity of a variable: 0 under a weakening, else the number of
    /// derelictions on it.
    pub fn multiplicity(&self, name: &str) -> Option<usize> {
        let n = self.node_by_name(name)?;
        let topo = self.topology();
        Some(topo.incoming[n.index()].iter().filter(|l| self.link(**l).kind == LinkKind::Der).count())
    }

    /// Whether a set of links is a subnet: a correct net under the inherited
    /// boxes, closed under contractions, box interiors and box free
    /// variables.
    pub fn is_subnet(&self, subset: &BTreeSet<LinkId>) -> bool {
        if subset.is_empty() || !subset.iter().all(|l| l.index() < self.links.len()) {
            return false;
        }
        let topo = self.topology();
        // nodes of the subset and which of them are internal to it
        let mut touched = BTreeSet::new();
        for l in subset {
            let link = self.link(*l);
            touched.extend(link.sources.iter().copied());
            touched.extend(link.targets.iter().copied());
        }
        let internal = |n: NodeId| {
            topo.outgoing[n.index()].iter().any(|o| subset.contains(o))
                && topo.incoming[n.index()].iter().any(|i| subset.contains(i))
        };
        // contractions
        for &n in &touched {
            if self.node(n).ty == NodeType::E
                && internal(n)
                && !topo.incoming[n.index()].iter().all(|i| subset.contains(i))
            {
                return false;
            }
        }
        // box interiors
        for l in subset {
            if self.link(*l).kind == LinkKind::Bang && !self.ibox(*l).is_subset(subset) {
                return false;
            }
        }
        // box free variables
        for bang in self.boxes.keys() {
            let fv = self.box_free_vars(*bang, &topo);
            if fv.iter().any(|n| internal(*n)) && !self.ibox(*bang).is_subset(subset) {
                return false;
            }
        }
        // the subset must be a correct net; its root is its unique terminal m-node
        let terminal_m: Vec<NodeId> = touched
            .iter()
            .copied()
            .filter(|n| {
                self.node(*n).ty == NodeType::M && !topo.outgoing[n.index()].iter().any(|o| subset.contains(o))
            })
            .collect();
        let [root] = terminal_m.as_slice() else {
            return false;
        };
        let sub = self.restrict(subset, *root);
        crate::readback::is_correct(&sub).is_ok()
    }
}

/// Incremental construction and rewriting of nets.
#[derive(Debug, Clone, Default)]
pub struct NetBuilder {
    nodes: Vec<Node>,
    by_name: HashMap<String, NodeId>,
    links: Vec<Option<Link>>,
    boxes: BTreeMap<LinkId, BTreeSet<LinkId>>,
    counter: usize,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_net(net: &Net) -> Self {
        let by_name = net.nodes.iter().enumerate().map(|(i, n)| (n.name.clone(), NodeId(i as u32))).collect();
        NetBuilder {
            nodes: net.nodes.clone(),
            by_name,
            links: net.links.iter().cloned().map(Some).collect(),
            boxes: net.boxes.clone(),
            counter: 0,
        }
    }

    fn push_node(&mut self, name: String, ty: NodeType) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.by_name.insert(name.clone(), id);
        self.nodes.push(Node { name, ty });
        id
    }

    /// The node called `name`, created if absent. Sharing by name is how
    /// contractions arise.
    pub fn node(&mut self, name: &str, ty: NodeType) -> NodeId {
        if let Some(&id) = self.by_name.get(name) {
            debug_assert_eq!(self.nodes[id.index()].ty, ty, "node {name} used with two types");
            return id;
        }
        self.push_node(name.to_owned(), ty)
    }

    pub fn lookup(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n.index()].name
    }

    pub fn node_type(&self, n: NodeId) -> NodeType {
        self.nodes[n.index()].ty
    }

    /// A node whose name is not yet used, derived from `base`.
    pub fn fresh_node(&mut self, base: &str, ty: NodeType) -> NodeId {
        let name = self.fresh_name(base);
        self.push_node(name, ty)
    }

    /// For e-nodes the result is a valid variable name (`base_<n>`).
    pub fn fresh_name(&mut self, base: &str) -> String {
        let stem = crate::term::VarName::new(base).base().to_owned();
        loop {
            self.counter += 1;
            let candidate = format!("{stem}_{}", self.counter);
            if !self.by_name.contains_key(&candidate) {
                return candidate;
            }
        }
    }

    pub fn add_link(&mut self, kind: LinkKind, sources: Vec<NodeId>, targets: Vec<NodeId>) -> LinkId {
        let name = loop {
            self.counter += 1;
            let candidate = format!("{kind}#{}", self.counter);
            if !self.links.iter().flatten().any(|l| l.name == candidate) {
                break candidate;
            }
        };
        self.add_named_link(name, kind, sources, targets)
    }

    pub fn add_named_link(
        &mut self,
        name: String,
        kind: LinkKind,
        sources: Vec<NodeId>,
        targets: Vec<NodeId>,
    ) -> LinkId {
        let id = LinkId(self.links.len() as u32);
        self.links.push(Some(Link { name, kind, sources, targets }));
        id
    }

    pub fn link(&self, l: LinkId) -> Option<&Link> {
        self.links.get(l.index()).and_then(Option::as_ref)
    }

    pub fn link_mut(&mut self, l: LinkId) -> Option<&mut Link> {
        self.links.get_mut(l.index()).and_then(Option::as_mut)
    }

    pub fn live_links(&self) -> impl Iterator<Item = (LinkId, &Link)> {
        self.links.iter().enumerate().filter_map(|(i, l)| l.as_ref().map(|l| (LinkId(i as u32), l)))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Removes a link everywhere, including from the box map.
    pub fn remove_link(&mut self, l: LinkId) {
        if let Some(slot) = self.links.get_mut(l.index()) {
            *slot = None;
        }
        self.boxes.remove(&l);
        for interior in self.boxes.values_mut() {
            interior.remove(&l);
        }
    }

    /// Makes every connection to `from` point to `to` instead.
    pub fn redirect(&mut self, from: NodeId, to: NodeId) {
        for link in self.links.iter_mut().flatten() {
            for n in link.sources.iter_mut().chain(link.targets.iter_mut()) {
                if *n == from {
                    *n = to;
                }
            }
        }
    }

    /// Renames a node; any other node with that name loses it to a fresh one.
    pub fn rename_node(&mut self, n: NodeId, name: &str) {
        if let Some(other) = self.by_name.get(name).copied() {
            if other == n {
                return;
            }
            let fresh = self.fresh_name(name);
            self.nodes[other.index()].name = fresh.clone();
            self.by_name.insert(fresh, other);
        }
        let old = std::mem::replace(&mut self.nodes[n.index()].name, name.to_owned());
        if self.by_name.get(&old) == Some(&n) {
            self.by_name.remove(&old);
        }
        self.by_name.insert(name.to_owned(), n);
    }

    pub fn set_box(&mut self, bang: LinkId, interior: BTreeSet<LinkId>) {
        self.boxes.insert(bang, interior);
    }

    pub fn boxes(&self) -> &BTreeMap<LinkId, BTreeSet<LinkId>> {
        &self.boxes
    }

    /// Bangs whose box contains `l`.
    pub fn boxes_containing(&self, l: LinkId) -> Vec<LinkId> {
        self.boxes.iter().filter(|(_, i)| i.contains(&l)).map(|(b, _)| *b).collect()
    }

    pub fn add_to_box(&mut self, bang: LinkId, l: LinkId) {
        self.boxes.entry(bang).or_default().insert(l);
    }

    fn topology(&self) -> (Vec<Vec<LinkId>>, Vec<Vec<LinkId>>) {
        let mut incoming = vec![Vec::new(); self.nodes.len()];
        let mut outgoing = vec![Vec::new(); self.nodes.len()];
        for (id, l) in self.live_links() {
            for s in &l.sources {
                outgoing[s.index()].push(id);
            }
            for t in &l.targets {
                incoming[t.index()].push(id);
            }
        }
        (incoming, outgoing)
    }

    /// Restores the weakening conventions: a weakening sharing its node with
    /// another link disappears, and every weakening sits in exactly the
    /// boxes containing the link its node flows into (none if the node is
    /// terminal), i.e. it is pushed out of boxes as far as possible.
    pub fn normalize_weakenings(&mut self) {
        let (incoming, outgoing) = self.topology();
        let weakenings: Vec<(LinkId, NodeId)> = self
            .live_links()
            .filter(|(_, l)| l.kind == LinkKind::Weak)
            .map(|(id, l)| (id, l.targets[0]))
            .collect();
        for (w, n) in weakenings {
            if incoming[n.index()].len() > 1 {
                self.remove_link(w);
                continue;
            }
            let wanted: BTreeSet<LinkId> = match outgoing[n.index()].first() {
                Some(&next) => self.boxes_containing(next).into_iter().collect(),
                None => BTreeSet::new(),
            };
            for (bang, interior) in self.boxes.iter_mut() {
                if wanted.contains(bang) {
                    interior.insert(w);
                } else {
                    interior.remove(&w);
                }
            }
        }
    }

    /// Drops removed links and unused nodes, renumbers, and computes the
    /// free variables (terminal e-nodes).
    pub fn finish(self, root: NodeId) -> Net {
        let mut used = vec![false; self.nodes.len()];
        for l in self.links.iter().flatten() {
            for n in l.sources.iter().chain(l.targets.iter()) {
                used[n.index()] = true;
            }
        }
        used[root.index()] = true;
        let mut node_map = vec![None; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.into_iter().enumerate() {
            if used[i] {
                node_map[i] = Some(NodeId(nodes.len() as u32));
                nodes.push(node);
            }
        }
        let remap = |n: &NodeId| node_map[n.index()].expect("used node");
        let mut link_map = vec![None; self.links.len()];
        let mut links = Vec::new();
        for (i, l) in self.links.into_iter().enumerate() {
            if let Some(l) = l {
                link_map[i] = Some(LinkId(links.len() as u32));
                links.push(Link {
                    name: l.name,
                    kind: l.kind,
                    sources: l.sources.iter().map(remap).collect(),
                    targets: l.targets.iter().map(remap).collect(),
                });
            }
        }
        let boxes = self
            .boxes
            .into_iter()
            .filter_map(|(b, interior)| {
                let b = link_map[b.index()]?;
                Some((b, interior.into_iter().filter_map(|l| link_map[l.index()]).collect()))
            })
            .collect();
        let root = remap(&root);
        let topo = Topology::of(nodes.len(), &links);
        let free_vars = (0..nodes.len() as u32)
            .map(NodeId)
            .filter(|n| nodes[n.index()].ty == NodeType::E && topo.is_terminal(*n))
            .collect();
        Net { nodes, links, root, free_vars, boxes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::translate::translate;

    fn net(s: &str) -> Net {
        translate(&parse(s).unwrap(), &BTreeSet::new()).unwrap()
    }

    fn bang_named(n: &Net, pos: &str) -> LinkId {
        n.link_by_name(&format!("bang@{pos}")).unwrap()
    }

    #[test]
    fn levels() {
        let n = net("x");
        assert!(n.link_levels().iter().all(|&l| l == 0));

        // the d-link of y inside the argument box
        let n = net("(\\x. x) y");
        let d = n.link_by_name("der@/1").unwrap();
        assert_eq!(n.link_level(d), 1);
        assert_eq!(n.link_level(bang_named(&n, "/")), 0);

        // (y z) is boxed, and z is boxed again inside it
        let n = net("(\\x. x) (y z)");
        assert_eq!(n.link_level(n.link_by_name("der@/1/1").unwrap()), 2);
        assert_eq!(n.link_level(n.link_by_name("der@/1/0").unwrap()), 1);
    }

    #[test]
    fn box_classification() {
        let n = net("x[x<-y]");
        let c = n.classify_box(bang_named(&n, "/")).unwrap();
        assert_eq!(c, BoxClass { role: BoxRole::Substitution, free: true });

        let n = net("x y");
        let c = n.classify_box(bang_named(&n, "/")).unwrap();
        assert_eq!(c.role, BoxRole::Argument);

        let n = net("x (y z)");
        let inner = bang_named(&n, "/1");
        assert!(!n.classify_box(inner).unwrap().free);

        // bound free variable: not free
        let n = net("\\y. x[x<-y]");
        assert!(!n.classify_box(bang_named(&n, "/0")).unwrap().free);
        assert!(n.classify_box(n.link_by_name("der@/0/0").unwrap()).is_none());
    }

    #[test]
    fn subnets() {
        let n = net("\\y. x (z w)");
        let all: BTreeSet<LinkId> = n.link_ids().collect();
        assert!(n.is_subnet(&all));

        let n = translate(&parse("z").unwrap(), &["w".into()].into()).unwrap();
        let all: BTreeSet<LinkId> = n.link_ids().collect();
        let weak = n.free_weakenings()[0];
        let mut without: BTreeSet<LinkId> = all.clone();
        without.remove(&weak);
        assert!(n.is_subnet(&without));

        // a box interior minus one link is not closed
        let n = net("x (\\y. y y)");
        let bang = bang_named(&n, "/");
        let mut partial = n.ibox(bang).clone();
        let d = n.link_by_name("der@/1/0/0").unwrap();
        partial.remove(&d);
        assert!(!n.is_subnet(&partial));
        let mut missing_one: BTreeSet<LinkId> = n.link_ids().collect();
        missing_one.remove(&d);
        assert!(!n.is_subnet(&missing_one));
    }

    #[test]
    fn multiplicity_of_nodes() {
        let n = net("(x x)[x<-y]");
        assert_eq!(n.multiplicity("x"), Some(2));
        assert_eq!(n.multiplicity("y"), Some(1));
        let n = net("\\z. y");
        assert_eq!(n.multiplicity("z"), Some(0));
    }

    #[test]
    fn restrict_recomputes_free_variables() {
        let n = net("x[x<-y]");
        let der = n.link_by_name("der@/0").unwrap();
        let sub = n.restrict(&[der].into(), n.root());
        assert_eq!(sub.free_var_names(), ["x".to_string()].into());
        assert_eq!(sub.links().len(), 1);
    }
}
