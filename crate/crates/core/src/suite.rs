//! Corpus-wide checks of the kernel's theorems, grouped into suites.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{for_each_term, CorpusSpec};
use crate::equiv::{check_sample, closure_with, default_bound, Lsc, STANDARD_AXIOMS};
use crate::net::{from_json, net_hash, net_iso, Net};
use crate::netrewrite::{find_net_redexes, normalize_net, redex_bijection, step_net};
use crate::readback::{is_correct, linear_skeleton, read_back, read_back_all, CorrectnessError};
use crate::rewrite::{beta_oracle, church, find_term_redexes, normalize, step, unfold, RedexKind, Strategy};
use crate::syntax::parse;
use crate::term::{AlphaKey, Expression, VarName};
use crate::translate::translate;

/// The net whose correction net has a cycle: a box containing a
/// dereliction on the box's own e-node.
pub const CYCLIC_NET: &str = r#"{
  "nodes": [{"id":"r","ntype":"m"},{"id":"z","ntype":"e"},{"id":"rs","ntype":"m"},{"id":"x","ntype":"e"}],
  "links": [
    {"id":"dz","kind":"der","sources":[],"targets":["r","z"]},
    {"id":"dx","kind":"der","sources":[],"targets":["rs","x"]},
    {"id":"b","kind":"bang","sources":["rs","x"],"targets":[]}
  ],
  "root": "r", "freeVars": ["z"], "iboxes": {"b": ["dx"]}
}"#;

/// Name of the extra weakened variable in the static checks.
pub const WEAKENED: &str = "w1";

const KEEP: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub summary: String,
    pub counterexamples: Vec<String>,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} ({}): {} [{} checked, {} failed, {:.1}s] {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.checked,
            self.failures,
            self.seconds,
            self.summary
        )?;
        for c in &self.counterexamples {
            write!(f, "\n  counterexample: {c}")?;
        }
        Ok(())
    }
}

/// Failure bookkeeping shared by the checks.
#[derive(Debug, Default)]
struct Tally {
    checked: usize,
    failures: usize,
    examples: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < KEEP {
                self.examples.push(describe());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.failures += other.failures;
        for e in other.examples {
            if self.examples.len() < KEEP {
                self.examples.push(e);
            }
        }
        self
    }

    fn report(self, id: u8, name: &'static str, summary: String, start: Instant) -> CriterionReport {
        CriterionReport {
            id,
            name,
            passed: self.failures == 0,
            checked: self.checked,
            failures: self.failures,
            summary,
            counterexamples: self.examples,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Runs `check` over the corpus in parallel batches.
fn sweep(spec: &CorpusSpec, check: impl Fn(&Expression) -> Tally + Sync) -> Tally {
    const BATCH: usize = 4096;
    let mut total = Tally::default();
    let mut batch = Vec::with_capacity(BATCH);
    let flush = |batch: &mut Vec<Expression>, total: &mut Tally| {
        let t = batch.par_iter().map(&check).reduce(Tally::default, Tally::merge);
        *total = std::mem::take(total).merge(t);
        batch.clear();
    };
    for_each_term(spec, |t| {
        batch.push(t.clone());
        if batch.len() == BATCH {
            flush(&mut batch, &mut total);
        }
    });
    flush(&mut batch, &mut total);
    total
}

fn deltas() -> [BTreeSet<VarName>; 2] {
    [BTreeSet::new(), BTreeSet::from([VarName::new(WEAKENED)])]
}

fn tr(t: &Expression, delta: &BTreeSet<VarName>) -> Net {
    translate(t, delta).expect("corpus terms are well-named")
}

fn weakened(p: &Net) -> BTreeSet<VarName> {
    p.free_weakening_names().into_iter().map(VarName::new).collect()
}

/// Occurrences of `x` anywhere in `t`; on well-named terms these are the
/// occurrences bound by `x`'s binder (or free ones).
fn occurrences(t: &Expression, x: &VarName) -> usize {
    match t {
        Expression::Var(y) => usize::from(y == x),
        Expression::Hole(_) => 0,
        Expression::Abs(_, b) => occurrences(b, x),
        Expression::App(f, a) => occurrences(f, x) + occurrences(a, x),
        Expression::ESub(b, _, d) => occurrences(b, x) + occurrences(d, x),
    }
}

/// Criterion 1: Translations are valid and correct nets with the right free
/// variables and multiplicities.
pub fn static_soundness(spec: &CorpusSpec) -> CriterionReport {
    let start = Instant::now();
    let tally = sweep(spec, |t| {
        let mut tally = Tally::default();
        for delta in deltas() {
            let p = tr(t, &delta);
            let valid = p.validate();
            tally.check(valid.is_ok(), || format!("{t} with {delta:?}: {valid:?}"));
            let correct = is_correct(&p);
            tally.check(correct.is_ok(), || format!("{t} with {delta:?}: {correct:?}"));
            let mut fv: BTreeSet<String> = t.free_vars().iter().map(|x| x.to_string()).collect();
            fv.extend(delta.iter().map(|x| x.to_string()));
            tally.check(p.free_var_names() == fv, || format!("{t} with {delta:?}: free variables {:?}", p.free_var_names()));
            for x in t.free_vars().iter().chain(t.binders().iter()).chain(delta.iter()) {
                let m = p.multiplicity(x.as_str());
                let expected = occurrences(t, x);
                tally.check(m == Some(expected), || format!("{t}: multiplicity of {x} is {m:?}, expected {expected}"));
            }
        }
        tally
    });
    let summary = format!("corpus size <= {} with delta in {{{{}}, {{{WEAKENED}}}}}", spec.max_size);
    tally.report(1, "static soundness", summary, start)
}

/// Criterion 2: Read back round trips.
pub fn sequentialisation(spec: &CorpusSpec, oracle_max: usize) -> CriterionReport {
    let start = Instant::now();
    let tally = sweep(spec, |t| {
        let mut tally = Tally::default();
        for delta in deltas() {
            let p = tr(t, &delta);
            match read_back(&p) {
                Ok(e) => {
                    let image = translate(&e, &weakened(&p));
                    let ok = image.as_ref().is_ok_and(|q| net_iso(q, &p).is_some());
                    tally.check(ok, || format!("{t} with {delta:?}: read back {e} translates to another net"));
                    if delta.is_empty() {
                        let same = crate::equiv::equiv_via_nets(&e, t);
                        tally.check(same, || format!("{t}: read back {e} not equivalent"));
                        if t.size() <= oracle_max {
                            let class = closure_with(t, &STANDARD_AXIOMS, default_bound(t)).expect("finite class");
                            let key = e.alpha_key();
                            tally.check(class.iter().any(|c| c.alpha_key() == key), || {
                                format!("{t}: read back {e} outside the closure")
                            });
                        }
                    }
                }
                Err(err) => tally.check(false, || format!("{t} with {delta:?}: {err}")),
            }
        }
        tally
    });
    let summary = format!(
        "corpus size <= {}; closure cross-check up to size {oracle_max}",
        spec.max_size
    );
    tally.report(2, "sequentialisation round trips", summary, start)
}

/// Criterion 3: The partition of the corpus by the closure oracle equals the
/// partition by net isomorphism, read_back_all computes the class, and the
/// right-application instance is told apart.
pub fn quotient(spec: &CorpusSpec) -> CriterionReport {
    let start = Instant::now();
    let mut tally = Tally::default();
    let mut terms = Vec::new();
    for_each_term(spec, |t| terms.push(t.clone()));
    let keys: Vec<AlphaKey> = terms.iter().map(Expression::alpha_key).collect();
    let index: HashMap<&AlphaKey, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();

    // classes of the oracle, as the smallest corpus index in each closure
    let closures: Vec<Vec<AlphaKey>> = terms
        .par_iter()
        .map(|t| {
            closure_with(t, &STANDARD_AXIOMS, default_bound(t))
                .expect("finite class")
                .iter()
                .map(Expression::alpha_key)
                .collect()
        })
        .collect();
    let mut closure_class = vec![usize::MAX; terms.len()];
    for (i, class) in closures.iter().enumerate() {
        let mut members = Vec::new();
        for k in class {
            match index.get(k) {
                Some(j) => members.push(*j),
                None => tally.check(false, || format!("{}: closure leaves the corpus", terms[i])),
            }
        }
        let rep = members.iter().copied().min().unwrap_or(i);
        tally.check(closure_class[i] == usize::MAX || closure_class[i] == rep, || {
            format!("{}: closure is not symmetric", terms[i])
        });
        closure_class[i] = rep;
    }
    // symmetry and transitivity: every member's closure has the same representative
    for (i, class) in closures.iter().enumerate() {
        for k in class {
            if let Some(j) = index.get(k) {
                let (a, b) = (closure_class[i], closure_class[*j]);
                if a != b {
                    tally.check(false, || format!("{} and {} have different closures", terms[i], terms[*j]));
                }
            }
        }
    }

    // classes of isomorphism, within buckets of equal free variables and hash
    let nets: Vec<Net> = terms.par_iter().map(|t| tr(t, &BTreeSet::new())).collect();
    let mut buckets: HashMap<(BTreeSet<String>, u64), Vec<usize>> = HashMap::new();
    for (i, p) in nets.iter().enumerate() {
        buckets.entry((p.free_var_names(), net_hash(p))).or_default().push(i);
    }
    let bucket_list: Vec<Vec<usize>> = buckets.into_values().collect();
    let iso_classes: Vec<Vec<Vec<usize>>> = bucket_list
        .par_iter()
        .map(|bucket| {
            let mut classes: Vec<Vec<usize>> = Vec::new();
            for &i in bucket {
                match classes.iter_mut().find(|c| net_iso(&nets[c[0]], &nets[i]).is_some()) {
                    Some(c) => c.push(i),
                    None => classes.push(vec![i]),
                }
            }
            classes
        })
        .collect();
    let mut iso_class = vec![0usize; terms.len()];
    let mut iso_count = 0;
    for classes in iso_classes {
        for class in classes {
            let rep = *class.iter().min().expect("non-empty");
            for &i in &class {
                iso_class[i] = rep;
            }
            iso_count += 1;
        }
    }
    let closure_count = closure_class.iter().collect::<HashSet<_>>().len();
    for i in 0..terms.len() {
        tally.check(iso_class[i] == closure_class[i], || {
            format!(
                "{}: equivalent to {} but isomorphic to {}",
                terms[i], terms[closure_class[i]], terms[iso_class[i]]
            )
        });
    }

    // read_back_all against the closure
    let all = terms
        .par_iter()
        .zip(nets.par_iter())
        .zip(closures.par_iter())
        .map(|((t, p), class)| {
            let mut tally = Tally::default();
            let got: BTreeSet<AlphaKey> = read_back_all(p).iter().map(Expression::alpha_key).collect();
            let want: BTreeSet<AlphaKey> = class.iter().cloned().collect();
            tally.check(got == want, || format!("{t}: {} read backs, class of {}", got.len(), want.len()));
            tally
        })
        .reduce(Tally::default, Tally::merge);
    tally = tally.merge(all);

    let (a, b) = (parse("(y x)[x<-z]").expect("literal"), parse("y x[x<-z]").expect("literal"));
    let apart = net_iso(&tr(&a, &BTreeSet::new()), &tr(&b, &BTreeSet::new())).is_none();
    tally.check(apart, || format!("{a} and {b} have isomorphic nets"));

    let summary = format!(
        "corpus size <= {}: {} terms, {closure_count} classes by closure, {iso_count} by isomorphism",
        spec.max_size,
        terms.len()
    );
    tally.report(3, "quotient", summary, start)
}

/// Per-term counts for criteria 4 and 5.
#[derive(Default)]
struct Dynamic {
    squares: Tally,
    correctness: Tally,
    steps: [usize; 3],
}

fn dynamic_term(t: &Expression) -> Dynamic {
    let mut d = Dynamic::default();
    let p = tr(t, &BTreeSet::new());
    let pairs = match redex_bijection(&p, t) {
        Ok(pairs) => pairs,
        Err(e) => {
            d.squares.check(false, || format!("{t}: {e}"));
            return d;
        }
    };
    // φ is a kind-preserving bijection onto the cuts
    let mut image: Vec<_> = pairs.iter().map(|(_, n)| *n).collect();
    image.sort();
    let mut cuts = find_net_redexes(&p);
    cuts.sort();
    let terms = find_term_redexes(t);
    d.squares.check(image == cuts && terms.len() == pairs.len(), || {
        format!("{t}: {} term redexes, {} cuts, {} in the image", terms.len(), cuts.len(), image.len())
    });
    d.squares.check(pairs.iter().all(|(r, n)| r.kind() == n.kind), || format!("{t}: kinds differ"));
    for (r, n) in &pairs {
        let u = step(t, r).expect("enumerated redex");
        let q = match step_net(&p, n) {
            Ok(q) => q,
            Err(e) => {
                d.squares.check(false, || format!("{t}, {r}: {e}"));
                continue;
            }
        };
        d.steps[match r.kind() {
            RedexKind::M => 0,
            RedexKind::E => 1,
            RedexKind::Gc => 2,
        }] += 1;
        let image = translate(&u, &weakened(&q)).expect("reducts stay well-named");
        d.squares.check(net_iso(&image, &q).is_some(), || format!("{t}, {r} -> {u}: the square does not close"));
        let valid = q.validate();
        d.correctness.check(valid.is_ok(), || format!("{t}, {r}: {valid:?}"));
        let correct = is_correct(&q);
        d.correctness.check(correct.is_ok(), || format!("{t}, {r}: {correct:?}"));
    }
    d
}

/// 4 and 5. The redex bijection, both commuting squares (one set of pairs
/// serves both directions since the bijection onto the cuts is checked),
/// and correctness of every reduct.
pub fn dynamic(spec: &CorpusSpec) -> (CriterionReport, CriterionReport) {
    let start = Instant::now();
    const BATCH: usize = 4096;
    let mut squares = Tally::default();
    let mut correctness = Tally::default();
    let mut steps = [0usize; 3];
    let mut batch = Vec::with_capacity(BATCH);
    let mut flush = |batch: &mut Vec<Expression>| {
        for d in batch.par_iter().map(dynamic_term).collect::<Vec<_>>() {
            squares = std::mem::take(&mut squares).merge(d.squares);
            correctness = std::mem::take(&mut correctness).merge(d.correctness);
            for (total, n) in steps.iter_mut().zip(d.steps) {
                *total += n;
            }
        }
        batch.clear();
    };
    for_each_term(spec, |t| {
        batch.push(t.clone());
        if batch.len() == BATCH {
            flush(&mut batch);
        }
    });
    flush(&mut batch);
    let summary = format!(
        "corpus size <= {}: {} m, {} e, {} gc steps",
        spec.max_size, steps[0], steps[1], steps[2]
    );
    let a = squares.report(4, "dynamic isomorphism", summary.clone(), start);
    let b = correctness.report(5, "preservation of correctness", summary, start);
    (a, b)
}

/// Criterion 6: The structural equivalence is a strong bisimulation; with the
/// right-application axiom it is not.
pub fn bisimulation(spec: &CorpusSpec, mutant_spec: &CorpusSpec) -> CriterionReport {
    let start = Instant::now();
    let lsc = Lsc::standard();
    let mut tally = sweep(spec, |t| {
        let r = check_sample(&lsc, t);
        let mut tally = Tally { checked: r.steps_checked, ..Default::default() };
        tally.failures = r.counterexamples.len();
        tally.examples =
            r.counterexamples.iter().take(KEEP).map(|c| format!("{} == {}, {} step to {}", c.t, c.s, c.kind, c.reduct)).collect();
        tally
    });
    let mutant = Lsc::with_app_right();
    let mut found = None;
    let mut mutant_checked = 0;
    for_each_term(mutant_spec, |t| {
        if found.is_none() {
            let r = check_sample(&mutant, t);
            mutant_checked += 1;
            if let Some(c) = r.counterexamples.first() {
                found = Some(format!("{} == {} (with @r), {} step to {}", c.t, c.s, c.kind, c.reduct));
            }
        }
    });
    tally.check(found.is_some(), || "no counterexample with the right-application axiom".into());
    let summary = format!(
        "corpus size <= {}; mutant counterexample after {mutant_checked} terms: {}",
        spec.max_size,
        found.as_deref().unwrap_or("none")
    );
    tally.report(6, "strong bisimulation", summary, start)
}

/// Church-numeral and combinator terms that normalise.
pub fn arithmetic_terms() -> Vec<Expression> {
    let plus = "(\\m. \\n. \\f. \\a. m f (n f a))";
    let times = "(\\p. \\q. \\g. p (q g))";
    let succ = "(\\k. \\h. \\b. h (k h b))";
    let c = |n: usize| format!("({})", church(n));
    let mut out: Vec<Expression> = [
        format!("{plus} {} {}", c(2), c(2)),
        format!("{plus} {} {}", c(0), c(3)),
        format!("{times} {} {}", c(2), c(3)),
        format!("{succ} {}", c(2)),
        format!("{succ} ({succ} {})", c(0)),
        format!("{times} {} ({plus} {} {})", c(2), c(1), c(1)),
        "(\\x. \\y. x) (\\u. u) (\\v. v v)".to_string(),
        "(\\x. x x) (\\y. y)".to_string(),
        "(\\f. \\x. f (f x)) (\\y. y)".to_string(),
    ]
    .iter()
    .map(|s| parse(s).expect("literal").well_name())
    .collect();
    out.dedup();
    out
}

/// Criterion 7: Normal forms of the calculus, of the β evaluator, and of the nets
/// agree.
pub fn normal_forms(spec: &CorpusSpec, fuel: usize) -> CriterionReport {
    let start = Instant::now();
    let mut candidates = arithmetic_terms();
    let closed = CorpusSpec { free_pool: Vec::new(), ..spec.clone() };
    for_each_term(&closed, |t| candidates.push(t.clone()));
    let results: Vec<(Tally, bool)> = candidates
        .par_iter()
        .map(|t| {
            let mut tally = Tally::default();
            let Ok((beta, _)) = beta_oracle(&unfold(t), fuel) else {
                return (tally, false);
            };
            let Ok(lsc) = normalize(t, Strategy::LeftmostOutermost, fuel) else {
                return (tally, false);
            };
            let nf = unfold(&lsc.term);
            tally.check(nf.alpha_eq(&beta), || format!("{t}: {nf} but the β normal form is {beta}"));
            tally.check(lsc.term.is_pure(), || format!("{t}: normal form {} has substitutions", lsc.term));
            let p = tr(t, &BTreeSet::new());
            match normalize_net(&p, Strategy::LeftmostOutermost, fuel, |_, _, _| {}) {
                Ok(n) => {
                    let back = read_back(&n.net);
                    tally.check(back.as_ref().is_ok_and(|e| e.alpha_eq(&beta)), || {
                        format!("{t}: the net normal form reads back to {back:?}, expected {beta}")
                    });
                }
                Err(e) => tally.check(false, || format!("{t}: net normalisation failed: {e}")),
            }
            (tally, true)
        })
        .collect();
    let terminating = results.iter().filter(|(_, ok)| *ok).count();
    let mut tally = results.into_iter().map(|(t, _)| t).fold(Tally::default(), Tally::merge);
    tally.check(terminating >= 50, || format!("only {terminating} terminating terms"));
    let four = normalize(&arithmetic_terms()[0], Strategy::LeftmostOutermost, fuel).map(|n| n.term);
    tally.check(four.as_ref().is_ok_and(|n| n.alpha_eq(&church(4))), || format!("2 + 2 gave {four:?}"));
    let summary = format!(
        "{terminating} terminating closed terms (arithmetic plus corpus size <= {}), fuel {fuel}",
        spec.max_size
    );
    tally.report(7, "normal-form agreement", summary, start)
}

/// Criterion 8: Linear skeletons of correct nets, and the cyclic net.
pub fn skeletons(spec: &CorpusSpec) -> CriterionReport {
    let start = Instant::now();
    let mut tally = sweep(spec, |t| {
        let mut tally = Tally::default();
        for delta in deltas() {
            let p = tr(t, &delta);
            let s = linear_skeleton(&p);
            let ok = s.as_ref().is_ok_and(|s| s.last() == Some(&p.root()));
            tally.check(ok, || format!("{t} with {delta:?}: {s:?}"));
        }
        tally
    });
    let cyclic = from_json(CYCLIC_NET).expect("fixture parses");
    let verdict = is_correct(&cyclic);
    tally.check(cyclic.validate().is_ok(), || "the cyclic fixture is not a valid net".into());
    tally.check(matches!(verdict, Err(CorrectnessError::Cycle(_))), || format!("cyclic fixture: {verdict:?}"));
    let summary = format!(
        "corpus size <= {}; cyclic fixture: {}",
        spec.max_size,
        verdict.err().map(|e| e.to_string()).unwrap_or_else(|| "accepted".into())
    );
    tally.report(8, "linear skeleton", summary, start)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Static,
    Quotient,
    Dynamic,
    Bisim,
    All,
}

impl FromStr for SuiteName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(SuiteName::Static),
            "quotient" => Ok(SuiteName::Quotient),
            "dynamic" => Ok(SuiteName::Dynamic),
            "bisim" => Ok(SuiteName::Bisim),
            "all" => Ok(SuiteName::All),
            other => Err(format!("unknown suite `{other}` (expected static, quotient, dynamic, bisim or all)")),
        }
    }
}

/// Corpus bounds for each group of checks.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub static_max: usize,
    pub quotient_max: usize,
    pub dynamic_max: usize,
    pub bisim_max: usize,
    pub normal_form_max: usize,
    pub fuel: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { static_max: 8, quotient_max: 7, dynamic_max: 7, bisim_max: 7, normal_form_max: 7, fuel: 2000 }
    }
}

impl SuiteConfig {
    /// Every bound set to `n`, except the quotient (at most 7) and the
    /// normal forms (6, enough for 50 terminating closed terms).
    pub fn uniform(n: usize) -> Self {
        SuiteConfig {
            static_max: n,
            quotient_max: n.min(7),
            dynamic_max: n,
            bisim_max: n,
            normal_form_max: 6,
            ..Default::default()
        }
    }
}

pub fn run_suite(name: SuiteName, config: &SuiteConfig) -> Vec<CriterionReport> {
    let spec = CorpusSpec::new;
    let mut out = Vec::new();
    let all = name == SuiteName::All;
    if all || name == SuiteName::Static {
        out.push(static_soundness(&spec(config.static_max)));
        out.push(skeletons(&spec(config.static_max)));
    }
    if all || name == SuiteName::Quotient {
        out.push(sequentialisation(&spec(config.static_max), config.quotient_max));
        out.push(quotient(&spec(config.quotient_max)));
    }
    if all || name == SuiteName::Dynamic {
        let (a, b) = dynamic(&spec(config.dynamic_max));
        out.push(a);
        out.push(b);
        out.push(normal_forms(&spec(config.normal_form_max), config.fuel));
    }
    if all || name == SuiteName::Bisim {
        out.push(bisimulation(&spec(config.bisim_max), &spec(6)));
    }
    out.sort_by_key(|r| r.id);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        for report in run_suite(SuiteName::All, &SuiteConfig::uniform(4)) {
            assert!(report.passed, "{report}");
        }
    }
}
