//! Translation of expressions to nets.
//!
//! Names are derived from positions, so the output is reproducible:
//! links are `der@<pos>`, `par@<pos>`, `ten@<pos>`, `bang@<pos>`,
//! `hole@<pos>` and `weak@<var>`; m-nodes are `m@<pos>`, argument e-nodes
//! `arg@<pos>`, and variables keep their own name.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::net::{LinkKind, Net, NetBuilder, NodeId, NodeType};
use crate::term::{Expression, Position, VarName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("well-naming violation: {0}")]
    WellNamingViolation(String),
}

/// Translates `e` with the extra weakened variables `delta`.
pub fn translate(e: &Expression, delta: &BTreeSet<VarName>) -> Result<Net, TranslateError> {
    if !e.is_well_named() {
        return Err(TranslateError::WellNamingViolation(format!("{e} is not well-named")));
    }
    let binders: BTreeSet<VarName> = e.binders().into_iter().collect();
    if let Some(x) = delta.intersection(&binders).next() {
        return Err(TranslateError::WellNamingViolation(format!("{x} is both weakened and bound")));
    }
    let mut b = NetBuilder::new();
    let root = go(&mut b, e, &mut Vec::new());
    let fv = e.free_vars();
    for x in delta {
        if !fv.contains(x) {
            let n = b.node(x.as_str(), NodeType::E);
            b.add_named_link(format!("weak@{x}"), LinkKind::Weak, vec![], vec![n]);
        }
    }
    b.normalize_weakenings();
    Ok(b.finish(root))
}

fn at(prefix: &str, pos: &[u8]) -> String {
    format!("{prefix}@{}", Position(pos.to_vec()))
}

fn go(b: &mut NetBuilder, e: &Expression, pos: &mut Vec<u8>) -> NodeId {
    let m = b.node(&at("m", pos), NodeType::M);
    match e {
        Expression::Var(x) => {
            let xe = b.node(x.as_str(), NodeType::E);
            b.add_named_link(at("der", pos), LinkKind::Der, vec![], vec![m, xe]);
        }
        Expression::Hole(delta) => {
            let mut targets = vec![m];
            targets.extend(delta.iter().map(|x| b.node(x.as_str(), NodeType::E)));
            b.add_named_link(at("hole", pos), LinkKind::Hole, vec![], targets);
        }
        Expression::Abs(x, body) => {
            pos.push(0);
            let r = go(b, body, pos);
            pos.pop();
            let xe = b.node(x.as_str(), NodeType::E);
            b.add_named_link(at("par", pos), LinkKind::Par, vec![xe, r], vec![m]);
            if !body.occurs_free(x) {
                b.add_named_link(format!("weak@{x}"), LinkKind::Weak, vec![], vec![xe]);
            }
        }
        Expression::App(f, a) => {
            pos.push(0);
            let rf = go(b, f, pos);
            pos.pop();
            let (ra, bang_box) = boxed(b, a, pos);
            let arg = b.node(&at("arg", pos), NodeType::E);
            b.add_named_link(at("ten", pos), LinkKind::Tensor, vec![rf], vec![m, arg]);
            let bang = b.add_named_link(at("bang", pos), LinkKind::Bang, vec![ra, arg], vec![]);
            b.set_box(bang, bang_box);
        }
        Expression::ESub(body, x, s) => {
            // the root of t[x<-s] is the root of t
            pos.push(0);
            let rt = go(b, body, pos);
            pos.pop();
            let (rs, bang_box) = boxed(b, s, pos);
            let xe = b.node(x.as_str(), NodeType::E);
            let bang = b.add_named_link(at("bang", pos), LinkKind::Bang, vec![rs, xe], vec![]);
            b.set_box(bang, bang_box);
            if !body.occurs_free(x) {
                b.add_named_link(format!("weak@{x}"), LinkKind::Weak, vec![], vec![xe]);
            }
            return rt;
        }
    }
    m
}

/// Translates the right child of `pos` and returns its root and links.
fn boxed(b: &mut NetBuilder, e: &Expression, pos: &mut Vec<u8>) -> (NodeId, BTreeSet<crate::net::LinkId>) {
    let start = b.link_count();
    pos.push(1);
    let r = go(b, e, pos);
    pos.pop();
    let interior = (start..b.link_count()).map(|i| crate::net::LinkId(i as u32)).collect();
    (r, interior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::net_iso;
    use crate::syntax::parse;

    fn tr(s: &str, delta: &[&str]) -> Net {
        let delta: BTreeSet<VarName> = delta.iter().map(|x| VarName::new(*x)).collect();
        translate(&parse(s).unwrap(), &delta).unwrap()
    }

    #[test]
    fn variable() {
        let n = tr("x", &[]);
        assert_eq!(n.nodes().len(), 2);
        assert_eq!(n.links().len(), 1);
        assert_eq!(n.links()[0].kind, LinkKind::Der);
        assert_eq!(n.free_var_names(), ["x".to_string()].into());
        assert_eq!(n.validate(), Ok(()));
    }

    #[test]
    fn weakened_variable() {
        let n = tr("x", &["y"]);
        assert_eq!(n.free_var_names(), ["x".to_string(), "y".to_string()].into());
        assert_eq!(n.free_weakening_names(), ["y".to_string()].into());
        // already free: nothing added
        assert_eq!(tr("x", &["x"]), tr("x", &[]));
    }

    #[test]
    fn quotient_examples() {
        assert!(net_iso(&tr("(\\y. x)[x<-z]", &[]), &tr("\\y. x[x<-z]", &[])).is_some());
    }

    #[test]
    fn errors() {
        let e = parse("\\x. \\x. x").unwrap();
        assert!(translate(&e, &BTreeSet::new()).is_err());
        let e = parse("\\x. x").unwrap();
        assert!(translate(&e, &[VarName::new("x")].into()).is_err());
    }

    #[test]
    fn multiplicities_and_kinds() {
        let n = tr("(x x)[x<-y] (\\z. w)", &[]);
        assert_eq!(n.multiplicity("x"), Some(2));
        assert_eq!(n.multiplicity("z"), Some(0));
        assert!(n.is_term_net());
        assert!(tr("x [.]{x}", &[]).is_context_net());
        assert_eq!(tr("x [.]{x}", &[]).validate(), Ok(()));
    }

    #[test]
    fn weakenings_live_where_their_variable_is_bound() {
        // the weakening of z sits in the argument box together with the abstraction
        let n = tr("y (\\z. w)", &[]);
        let bang = n.link_by_name("bang@/").unwrap();
        assert!(n.ibox(bang).contains(&n.link_by_name("weak@z").unwrap()));
        let n = tr("y (w[z<-u])", &[]);
        let bang = n.link_by_name("bang@/").unwrap();
        assert!(n.ibox(bang).contains(&n.link_by_name("weak@z").unwrap()));
    }
}
