use std::collections::BTreeSet;

use proptest::prelude::*;

use lsc_core::equiv::{equiv_neighbors, equiv_via_nets};
use lsc_core::net::{from_json, net_hash, net_iso, plug_net, to_json};
use lsc_core::netrewrite::{redex_bijection, step_net};
use lsc_core::readback::{factor_at_var, is_correct, read_back, read_back_all};
use lsc_core::rewrite::{find_term_redexes, step};
use lsc_core::{parse, translate, Expression, VarName};

const NAMES: [&str; 4] = ["x", "y", "z", "w"];

/// Arbitrary terms over a small alphabet, with shadowing and clashes left in.
fn any_term() -> impl Strategy<Value = Expression> {
    let name = prop::sample::select(&NAMES[..]);
    let leaf = name.clone().prop_map(Expression::var);
    leaf.prop_recursive(5, 24, 2, move |inner| {
        prop_oneof![
            (name.clone(), inner.clone()).prop_map(|(x, b)| Expression::abs(x, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Expression::app(f, a)),
            (inner.clone(), name.clone(), inner).prop_map(|(b, x, d)| Expression::esub(b, x, d)),
        ]
    })
}

fn well_named() -> impl Strategy<Value = Expression> {
    any_term().prop_map(|t| t.well_name())
}

fn none() -> BTreeSet<VarName> {
    BTreeSet::new()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn printing_then_parsing_is_the_identity(t in any_term()) {
        prop_assert_eq!(parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn well_naming_is_an_alpha_renaming(t in any_term()) {
        let u = t.well_name();
        prop_assert!(u.is_well_named());
        prop_assert!(u.alpha_eq(&t));
        prop_assert_eq!(u.free_vars(), t.free_vars());
        prop_assert_eq!(u.well_name(), u.clone());
    }

    #[test]
    fn plugging_respects_free_variables(t in well_named(), i in any::<prop::sample::Index>()) {
        let positions = t.positions();
        let pos = &positions[i.index(positions.len())];
        let (c, s) = t.decompose_at(pos).unwrap();
        prop_assert_eq!(c.plug(&s).unwrap(), t.clone());
        let fv = t.free_vars();
        let outer: BTreeSet<VarName> = c.free_vars();
        prop_assert!(outer.is_subset(&fv));
    }

    #[test]
    fn equivalence_steps_preserve_size_and_free_variables(t in well_named()) {
        for u in equiv_neighbors(&t) {
            prop_assert_eq!(u.size(), t.size());
            prop_assert_eq!(u.free_vars(), t.free_vars());
            let mut a = u.binders();
            let mut b = t.binders();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            prop_assert!(equiv_via_nets(&t, &u), "{} and {}", t, u);
        }
    }

    #[test]
    fn translations_are_correct_and_read_back(t in well_named(), weaken in any::<bool>()) {
        let mut delta = none();
        if weaken {
            delta.insert(VarName::new("fresh"));
        }
        let p = translate(&t, &delta).unwrap();
        prop_assert!(p.validate().is_ok());
        prop_assert!(is_correct(&p).is_ok());
        let back = read_back(&p).unwrap();
        prop_assert!(net_iso(&translate(&back, &delta).unwrap(), &p).is_some());
        let all = read_back_all(&p);
        prop_assert!(all.iter().any(|u| u.alpha_eq(&t)), "{} not among {} read backs", t, all.len());
    }

    #[test]
    fn json_round_trip(t in well_named()) {
        let p = translate(&t, &none()).unwrap();
        let q = from_json(&to_json(&p).to_string()).unwrap();
        prop_assert_eq!(net_hash(&p), net_hash(&q));
        prop_assert!(net_iso(&p, &q).is_some());
    }

    #[test]
    fn steps_commute_with_translation(t in well_named()) {
        let p = translate(&t, &none()).unwrap();
        let pairs = redex_bijection(&p, &t).unwrap();
        prop_assert_eq!(pairs.len(), find_term_redexes(&t).len());
        for (r, n) in pairs {
            let u = step(&t, &r).unwrap();
            let q = step_net(&p, &n).unwrap();
            prop_assert!(is_correct(&q).is_ok());
            // garbage collection may leave weakened variables behind
            let delta: BTreeSet<VarName> = t.free_vars().difference(&u.free_vars()).cloned().collect();
            prop_assert!(net_iso(&translate(&u, &delta).unwrap(), &q).is_some(), "{} -> {}", t, u);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn factorisation_at_free_derelictions(t in well_named()) {
        let p = translate(&t, &none()).unwrap();
        let ders: Vec<_> = p
            .links_of_kind(lsc_core::net::LinkKind::Der)
            .filter(|&d| p.free_vars().contains(&p.link(d).targets[1]))
            .collect();
        for d in ders {
            let (q, c) = factor_at_var(&p, &t, d, &none()).unwrap();
            let x = p.node(p.link(d).targets[1]).name.clone();
            let plugged = c.plug(&Expression::var(x.as_str())).unwrap();
            prop_assert_eq!(&plugged, &t);
            let hole = translate(&Expression::var(x.as_str()), &none()).unwrap();
            prop_assert!(net_iso(&plug_net(&q, &hole).unwrap(), &p).is_some());
        }
    }
}
