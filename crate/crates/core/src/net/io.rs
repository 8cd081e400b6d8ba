//! JSON interchange and Graphviz export.
//!
//! ```json
//! { "nodes": [{"id": "x", "ntype": "e"}, ...],
//!   "links": [{"id": "d1", "kind": "der", "sources": [], "targets": ["r", "x"]}, ...],
//!   "root": "r",
//!   "freeVars": ["x"],
//!   "iboxes": {"b1": ["d2"]} }
//! ```
//!
//! Reading performs no semantic check beyond resolving identifiers; use
//! [`Net::validate`] for that.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Link, LinkId, LinkKind, Net, Node, NodeId, NodeType, Port};

#[derive(Debug, Error)]
pub enum NetIoError {
    #[error("malformed input at {location}: {message}")]
    MalformedInput { location: String, message: String },
}

fn malformed(location: impl Into<String>, message: impl Into<String>) -> NetIoError {
    NetIoError::MalformedInput { location: location.into(), message: message.into() }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: String,
    ntype: NodeType,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkJson {
    id: String,
    kind: LinkKind,
    sources: Vec<String>,
    targets: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetJson {
    nodes: Vec<NodeJson>,
    links: Vec<LinkJson>,
    root: String,
    #[serde(rename = "freeVars")]
    free_vars: Vec<String>,
    iboxes: BTreeMap<String, Vec<String>>,
}

pub fn to_json(net: &Net) -> serde_json::Value {
    let node = |n: &NodeId| net.node(*n).name.clone();
    let doc = NetJson {
        nodes: net.nodes().iter().map(|n| NodeJson { id: n.name.clone(), ntype: n.ty }).collect(),
        links: net
            .links()
            .iter()
            .map(|l| LinkJson {
                id: l.name.clone(),
                kind: l.kind,
                sources: l.sources.iter().map(node).collect(),
                targets: l.targets.iter().map(node).collect(),
            })
            .collect(),
        root: node(&net.root()),
        free_vars: net.free_vars().iter().map(node).collect(),
        iboxes: net
            .boxes()
            .iter()
            .map(|(b, i)| (net.link(*b).name.clone(), i.iter().map(|l| net.link(*l).name.clone()).collect()))
            .collect(),
    };
    serde_json::to_value(doc).expect("nets serialise")
}

pub fn from_json(text: &str) -> Result<Net, NetIoError> {
    let doc: NetJson = serde_json::from_str(text)
        .map_err(|e| malformed(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let mut node_ids: HashMap<&str, NodeId> = HashMap::new();
    let mut nodes = Vec::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        if n.id.is_empty() {
            return Err(malformed(format!("nodes[{i}].id"), "empty identifier"));
        }
        if node_ids.insert(&n.id, NodeId(i as u32)).is_some() {
            return Err(malformed(format!("nodes[{i}].id"), format!("duplicate node `{}`", n.id)));
        }
        nodes.push(Node { name: n.id.clone(), ty: n.ntype });
    }
    let resolve = |name: &str, location: String| {
        node_ids.get(name).copied().ok_or_else(|| malformed(location, format!("unknown node `{name}`")))
    };
    let mut link_ids: HashMap<&str, LinkId> = HashMap::new();
    let mut links = Vec::new();
    for (i, l) in doc.links.iter().enumerate() {
        if link_ids.insert(&l.id, LinkId(i as u32)).is_some() {
            return Err(malformed(format!("links[{i}].id"), format!("duplicate link `{}`", l.id)));
        }
        let sources = l
            .sources
            .iter()
            .enumerate()
            .map(|(j, s)| resolve(s, format!("links[{i}].sources[{j}]")))
            .collect::<Result<_, _>>()?;
        let targets = l
            .targets
            .iter()
            .enumerate()
            .map(|(j, s)| resolve(s, format!("links[{i}].targets[{j}]")))
            .collect::<Result<_, _>>()?;
        links.push(Link { name: l.id.clone(), kind: l.kind, sources, targets });
    }
    let root = resolve(&doc.root, "root".into())?;
    let free_vars = doc
        .free_vars
        .iter()
        .enumerate()
        .map(|(j, s)| resolve(s, format!("freeVars[{j}]")))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let mut boxes = BTreeMap::new();
    for (b, interior) in &doc.iboxes {
        let bang = *link_ids.get(b.as_str()).ok_or_else(|| malformed(format!("iboxes.{b}"), "unknown link"))?;
        let interior = interior
            .iter()
            .enumerate()
            .map(|(j, l)| {
                link_ids
                    .get(l.as_str())
                    .copied()
                    .ok_or_else(|| malformed(format!("iboxes.{b}[{j}]"), format!("unknown link `{l}`")))
            })
            .collect::<Result<BTreeSet<_>, _>>()?;
        boxes.insert(bang, interior);
    }
    Ok(Net::from_parts(nodes, links, root, free_vars, boxes))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: links are drawn as small vertices fanning out to
/// their nodes, principal connections end in a dot, boxes are clusters.
pub fn to_dot(net: &Net) -> String {
    let mut out = String::from("digraph net {\n  rankdir=BT;\n  node [fontsize=10];\n");
    for id in net.node_ids() {
        let node = net.node(id);
        let shape = match node.ty {
            NodeType::E => "circle, color=cyan4",
            NodeType::M => "point, width=0.12, color=brown",
        };
        let extra = if id == net.root() { ", peripheries=2" } else { "" };
        let label = match node.ty {
            NodeType::E => node.name.as_str(),
            NodeType::M => "",
        };
        let _ = writeln!(out, "  {} [shape={shape}, label={}, xlabel={}{extra}];", quote(&format!("n:{}", node.name)), quote(label), quote(if node.ty == NodeType::M { &node.name } else { "" }));
    }
    // innermost enclosing box of every link
    let levels = net.link_levels();
    let mut parent: HashMap<LinkId, LinkId> = HashMap::new();
    for (bang, interior) in net.boxes() {
        for l in interior {
            // the innermost box containing l is the one with the highest level
            let better = match parent.get(l) {
                Some(other) => levels[bang.index()] > levels[other.index()],
                None => true,
            };
            if better {
                parent.insert(*l, *bang);
            }
        }
    }
    let mut children: BTreeMap<Option<LinkId>, Vec<LinkId>> = BTreeMap::new();
    for l in net.link_ids() {
        children.entry(parent.get(&l).copied()).or_default().push(l);
    }
    fn emit(net: &Net, scope: Option<LinkId>, children: &BTreeMap<Option<LinkId>, Vec<LinkId>>, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        for &l in children.get(&scope).map(Vec::as_slice).unwrap_or(&[]) {
            let link = net.link(l);
            let _ = writeln!(
                out,
                "{pad}{} [shape=box, style=rounded, width=0.2, height=0.2, label={}];",
                quote(&format!("l:{}", link.name)),
                quote(link.kind.symbol())
            );
            if link.kind == LinkKind::Bang {
                let _ = writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{}", link.name)));
                let _ = writeln!(out, "{pad}  style=dashed; label=\"\";");
                emit(net, Some(l), children, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
    emit(net, None, &children, 1, &mut out);
    for id in net.link_ids() {
        let link = net.link(id);
        let name = quote(&format!("l:{}", link.name));
        let principal = link.kind.principal();
        for (i, s) in link.sources.iter().enumerate() {
            let mark = if principal == Some(Port::Source(i)) { ", arrowtail=dot, dir=both" } else { "" };
            let style = edge_style(net.node(*s).ty);
            let _ = writeln!(out, "  {} -> {name} [{style}{mark}];", quote(&format!("n:{}", net.node(*s).name)));
        }
        for (i, t) in link.targets.iter().enumerate() {
            let mark = if principal == Some(Port::Target(i)) { ", arrowhead=dot" } else { "" };
            let style = edge_style(net.node(*t).ty);
            let _ = writeln!(out, "  {name} -> {} [{style}{mark}];", quote(&format!("n:{}", net.node(*t).name)));
        }
    }
    out.push_str("}\n");
    out
}

fn edge_style(ty: NodeType) -> &'static str {
    match ty {
        NodeType::E => "style=dotted, color=blue",
        NodeType::M => "color=red",
    }
}
