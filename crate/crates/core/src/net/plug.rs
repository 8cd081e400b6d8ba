//! Plugging a net into the hole of a context net.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{LinkKind, Net, NetBuilder, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlugError {
    #[error("not a context net")]
    NotAContextNet,
    #[error("interface violation: {var} is free in the plugged net but not in the hole interface")]
    InterfaceViolation { var: String },
}

/// `P<Q>`: the hole of `p` is replaced by `q`, whose free variables must
/// lie in the hole's interface. Interface variables left without incoming
/// links get a weakening, and weakenings are then pushed out of boxes
/// (which also drops the free weakenings of `q` that end up contracted).
pub fn plug_net(p: &Net, q: &Net) -> Result<Net, PlugError> {
    let hole = p.hole_link().ok_or(PlugError::NotAContextNet)?;
    let interface: BTreeSet<String> = p.interface().expect("context net");
    for v in q.free_var_names() {
        if !interface.contains(&v) {
            return Err(PlugError::InterfaceViolation { var: v });
        }
    }
    let hole_link = p.link(hole).clone();
    let enclosing: Vec<_> = p.boxes().iter().filter(|(_, i)| i.contains(&hole)).map(|(b, _)| *b).collect();

    let mut b = NetBuilder::from_net(p);
    b.remove_link(hole);

    // nodes of q: the root becomes the hole's m-node, free variables are
    // identified by name, anything else is renamed away from p's names
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    map.insert(q.root(), hole_link.targets[0]);
    for n in q.node_ids() {
        if n == q.root() {
            continue;
        }
        let node = q.node(n);
        let id = if q.free_vars().contains(&n) {
            b.node(&node.name, node.ty)
        } else if b.lookup(&node.name).is_some() {
            b.fresh_node(&node.name, node.ty)
        } else {
            b.node(&node.name, node.ty)
        };
        map.insert(n, id);
    }
    let mut link_map = HashMap::new();
    for l in q.link_ids() {
        let link = q.link(l);
        let id = b.add_link(
            link.kind,
            link.sources.iter().map(|n| map[n]).collect(),
            link.targets.iter().map(|n| map[n]).collect(),
        );
        for bang in &enclosing {
            b.add_to_box(*bang, id);
        }
        link_map.insert(l, id);
    }
    for (bang, interior) in q.boxes() {
        b.set_box(link_map[bang], interior.iter().map(|l| link_map[l]).collect());
    }

    // weaken interface variables that lost their only incoming link
    let mut has_incoming = vec![false; b.node_count()];
    for (_, link) in b.live_links() {
        for t in &link.targets {
            has_incoming[t.index()] = true;
        }
    }
    for x in &hole_link.targets[1..] {
        if !has_incoming[x.index()] {
            b.add_link(LinkKind::Weak, vec![], vec![*x]);
        }
    }
    b.normalize_weakenings();
    Ok(b.finish(p.root()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::net_iso;
    use crate::syntax::parse;
    use crate::translate::translate;
    use crate::VarName;

    fn tr(s: &str, delta: &[&str]) -> Net {
        let delta: BTreeSet<VarName> = delta.iter().map(|x| VarName::new(*x)).collect();
        translate(&parse(s).unwrap(), &delta).unwrap()
    }

    #[test]
    fn identity_context() {
        let plugged = plug_net(&tr("[.]{x}", &[]), &tr("x", &[])).unwrap();
        assert!(net_iso(&plugged, &tr("x", &[])).is_some());
    }

    #[test]
    fn interface_violation() {
        let err = plug_net(&tr("[.]{x}", &[]), &tr("y", &["x"])).unwrap_err();
        assert_eq!(err, PlugError::InterfaceViolation { var: "y".into() });
        assert_eq!(plug_net(&tr("x", &[]), &tr("x", &[])).unwrap_err(), PlugError::NotAContextNet);
    }

    #[test]
    fn unused_interface_variables_are_weakened() {
        let plugged = plug_net(&tr("\\x. [.]{x,y}", &[]), &tr("y", &[])).unwrap();
        assert!(net_iso(&plugged, &tr("\\x. y", &[])).is_some());
        // y free and unused: becomes a free weakening
        let plugged = plug_net(&tr("[.]{x,y}", &[]), &tr("x", &[])).unwrap();
        assert!(net_iso(&plugged, &tr("x", &["y"])).is_some());
        // a free weakening of the plugged net landing on a shared variable disappears
        let plugged = plug_net(&tr("y [.]{y,w}", &[]), &tr("w", &["y"])).unwrap();
        assert!(net_iso(&plugged, &tr("y w", &[])).is_some());
    }

    #[test]
    fn plugging_inside_boxes() {
        let cases = [
            ("y (\\z. [.]{x,z})", "x", "y (\\z. x)"),
            ("y ([.]{x}[w<-u])", "x x", "y ((x x)[w<-u])"),
            ("(y [.]{x,y})[x<-\\a. a]", "x", "(y x)[x<-\\a. a]"),
            ("(y [.]{x,y})[x<-\\a. a]", "y", "(y y)[x<-\\a. a]"),
        ];
        for (c, e, expected) in cases {
            let plugged = plug_net(&tr(c, &[]), &tr(e, &[])).unwrap();
            assert_eq!(plugged.validate(), Ok(()), "{c} {e}");
            assert!(net_iso(&plugged, &tr(expected, &[])).is_some(), "{c} <- {e}");
        }
    }
}
