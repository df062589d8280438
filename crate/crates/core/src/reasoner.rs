//! Forward-chaining materialization for an RDFS-style rule set with
//! `owl:equivalentClass` and `owl:inverseOf` support.
//!
//! Rules are triple patterns over variables. [`materialize`] runs semi-naive
//! evaluation: each round only fires rules where at least one premise binds to
//! a triple derived in the previous round. Reflexive `subClassOf`,
//! `subPropertyOf` and `equivalentClass` triples are never produced.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ns;
use crate::rdf::{Graph, Iri, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule `{rule}`: conclusion variable ?{var} does not occur in any premise")]
    UnboundConclusionVar { rule: String, var: String },
    #[error("rule `{rule}`: guard variable ?{var} does not occur in any premise")]
    UnboundGuardVar { rule: String, var: String },
    #[error("rule `{rule}` has no premises")]
    NoPremises { rule: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(usize),
    Const(Term),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

/// One inference rule. Guards list variable pairs that must bind to different terms.
#[derive(Debug, Clone)]
pub struct Rule {
    name: String,
    vars: Vec<String>,
    premises: Vec<Pattern>,
    conclusion: Pattern,
    guards: Vec<(usize, usize)>,
}

/// Small builder syntax: `?x` is a variable, anything else a constant IRI.
fn pattern(vars: &mut Vec<String>, [s, p, o]: [&str; 3]) -> Pattern {
    let mut term = |t: &str| {
        if let Some(name) = t.strip_prefix('?') {
            let idx = vars.iter().position(|v| v == name).unwrap_or_else(|| {
                vars.push(name.to_owned());
                vars.len() - 1
            });
            PatternTerm::Var(idx)
        } else {
            PatternTerm::Const(Term::Iri(Iri::new(t).expect("rule constants are valid IRIs")))
        }
    };
    Pattern { subject: term(s), predicate: term(p), object: term(o) }
}

impl Rule {
    /// Builds a rule from `?var`/IRI string patterns.
    pub fn new(
        name: impl Into<String>,
        premises: &[[&str; 3]],
        conclusion: [&str; 3],
        distinct: &[(&str, &str)],
    ) -> Result<Self, RuleError> {
        let name = name.into();
        if premises.is_empty() {
            return Err(RuleError::NoPremises { rule: name });
        }
        let mut vars = Vec::new();
        let premises: Vec<Pattern> = premises.iter().map(|p| pattern(&mut vars, *p)).collect();
        let bound = vars.len();
        let conclusion = pattern(&mut vars, conclusion);
        if let Some(var) = vars.get(bound) {
            return Err(RuleError::UnboundConclusionVar { rule: name, var: var.clone() });
        }
        let lookup = |v: &str| {
            let v = v.trim_start_matches('?');
            vars.iter()
                .position(|x| x == v)
                .ok_or_else(|| RuleError::UnboundGuardVar { rule: name.clone(), var: v.to_owned() })
        };
        let guards =
            distinct.iter().map(|(a, b)| Ok((lookup(a)?, lookup(b)?))).collect::<Result<Vec<_>, RuleError>>()?;
        Ok(Rule { name, vars, premises, conclusion, guards })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn premises(&self) -> &[Pattern] {
        &self.premises
    }

    pub fn conclusion(&self) -> &Pattern {
        &self.conclusion
    }
}

/// An ordered list of rules.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

const SC: &str = ns::rdfs::SUB_CLASS_OF;
const SP: &str = ns::rdfs::SUB_PROPERTY_OF;
const TYPE: &str = ns::rdf::TYPE;
const EQ: &str = ns::owl::EQUIVALENT_CLASS;

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Self {
        RuleSet { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Transitivity, type inheritance, domain/range, equivalence and inverse rules.
    pub fn rdfs_lite() -> Self {
        let rule = |name, premises: &[[&str; 3]], conclusion, distinct: &[(&str, &str)]| {
            Rule::new(name, premises, conclusion, distinct).expect("built-in rules are well formed")
        };
        RuleSet::new(vec![
            rule("subClassOf-transitivity", &[["?a", SC, "?b"], ["?b", SC, "?c"]], ["?a", SC, "?c"], &[("?a", "?c")]),
            rule(
                "subPropertyOf-transitivity",
                &[["?a", SP, "?b"], ["?b", SP, "?c"]],
                ["?a", SP, "?c"],
                &[("?a", "?c")],
            ),
            rule("type-inheritance", &[["?x", TYPE, "?a"], ["?a", SC, "?b"]], ["?x", TYPE, "?b"], &[]),
            rule("domain-inference", &[["?p", ns::rdfs::DOMAIN, "?c"], ["?x", "?p", "?y"]], ["?x", TYPE, "?c"], &[]),
            rule("range-inference", &[["?p", ns::rdfs::RANGE, "?c"], ["?x", "?p", "?y"]], ["?y", TYPE, "?c"], &[]),
            rule("equivalentClass-symmetry", &[["?a", EQ, "?b"]], ["?b", EQ, "?a"], &[("?a", "?b")]),
            rule("equivalentClass-to-subClassOf", &[["?a", EQ, "?b"]], ["?a", SC, "?b"], &[("?a", "?b")]),
            rule("inverse-property", &[["?p", ns::owl::INVERSE_OF, "?q"], ["?x", "?p", "?y"]], ["?y", "?q", "?x"], &[]),
            rule(
                "inverse-property-reverse",
                &[["?p", ns::owl::INVERSE_OF, "?q"], ["?x", "?q", "?y"]],
                ["?y", "?p", "?x"],
                &[],
            ),
        ])
    }

    /// The rule set minus the named rules.
    pub fn without(&self, names: &[&str]) -> Self {
        RuleSet::new(self.rules.iter().filter(|r| !names.contains(&r.name())).cloned().collect())
    }

    /// Hierarchy and type closure only, no domain/range typing. Used where
    /// asserted types must not be widened by the very triples being checked.
    pub fn asserted_types() -> Self {
        Self::rdfs_lite().without(&["domain-inference", "range-inference"])
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::rdfs_lite()
    }
}

/// A base graph together with the triples its closure adds.
#[derive(Debug, Clone, Default)]
pub struct InferredGraph {
    base: Graph,
    inferred: Graph,
    closure: Graph,
}

impl InferredGraph {
    /// Wraps a graph with no inferred triples.
    pub fn from_base(base: Graph) -> Self {
        InferredGraph { closure: base.clone(), base, inferred: Graph::new() }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn inferred(&self) -> &Graph {
        &self.inferred
    }

    /// Base plus inferred triples.
    pub fn closure(&self) -> &Graph {
        &self.closure
    }

    pub fn is_subclass_of(&self, sub: &Iri, sup: &Iri) -> bool {
        sub == sup
            || self.closure.contains(
                &Triple::new(sub.clone(), Iri::from_static(SC), sup.clone()).expect("IRIs are valid subjects"),
            )
    }

    /// Every class the term is typed with in the closure.
    pub fn infer_types(&self, instance: &Term) -> BTreeSet<Iri> {
        let rdf_type = Iri::from_static(TYPE);
        self.closure.objects(instance, &rdf_type).filter_map(|t| t.as_iri().cloned()).collect()
    }
}

type Bindings = Vec<Option<Term>>;

fn unify(pattern: &PatternTerm, term: &Term, bindings: &mut Bindings) -> bool {
    match pattern {
        PatternTerm::Const(c) => c == term,
        PatternTerm::Var(v) => match &bindings[*v] {
            Some(bound) => bound == term,
            None => {
                bindings[*v] = Some(term.clone());
                true
            }
        },
    }
}

fn unify_triple(p: &Pattern, s: &Term, pred: &Iri, o: &Term, bindings: &mut Bindings) -> bool {
    unify(&p.subject, s, bindings)
        && unify(&p.predicate, &Term::Iri(pred.clone()), bindings)
        && unify(&p.object, o, bindings)
}

fn resolve<'a>(p: &'a PatternTerm, bindings: &'a Bindings) -> Option<&'a Term> {
    match p {
        PatternTerm::Const(c) => Some(c),
        PatternTerm::Var(v) => bindings[*v].as_ref(),
    }
}

/// Joins the premises in `rest` against `store`, calling `emit` for each full binding.
fn join(store: &Graph, rest: &[&Pattern], bindings: &Bindings, emit: &mut dyn FnMut(&Bindings)) {
    let Some((first, tail)) = rest.split_first() else {
        emit(bindings);
        return;
    };
    let s = resolve(&first.subject, bindings);
    let p = match resolve(&first.predicate, bindings) {
        Some(Term::Iri(iri)) => Some(iri),
        Some(_) => return,
        None => None,
    };
    let o = resolve(&first.object, bindings);
    for t in store.matching(s, p, o) {
        let mut next = bindings.clone();
        if unify_triple(first, t.subject, t.predicate, t.object, &mut next) {
            join(store, tail, &next, emit);
        }
    }
}

fn instantiate(rule: &Rule, bindings: &Bindings) -> Option<Triple> {
    if rule.guards.iter().any(|(a, b)| bindings[*a] == bindings[*b]) {
        return None;
    }
    let s = resolve(&rule.conclusion.subject, bindings)?.clone();
    let Term::Iri(p) = resolve(&rule.conclusion.predicate, bindings)? else {
        return None;
    };
    let o = resolve(&rule.conclusion.object, bindings)?.clone();
    Triple::new(s, p.clone(), o).ok()
}

/// Fires `rule` for every derivation that uses `trigger` as one of its premises.
fn fire_with(rule: &Rule, trigger: &Triple, store: &Graph, out: &mut BTreeSet<Triple>) {
    for (i, premise) in rule.premises.iter().enumerate() {
        let mut bindings: Bindings = vec![None; rule.vars.len()];
        if !unify_triple(premise, trigger.subject(), trigger.predicate(), trigger.object(), &mut bindings) {
            continue;
        }
        let rest: Vec<&Pattern> = rule.premises.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p).collect();
        join(store, &rest, &bindings, &mut |b| {
            if let Some(t) = instantiate(rule, b) {
                if !store.contains(&t) {
                    out.insert(t);
                }
            }
        });
    }
}

/// Computes the fixpoint closure of `g` under `rules` by semi-naive evaluation.
pub fn materialize(g: &Graph, rules: &RuleSet) -> InferredGraph {
    let mut store = g.clone();
    let mut inferred = Graph::new();
    let mut delta: Vec<Triple> = g.iter().map(|t| t.to_triple()).collect();
    while !delta.is_empty() {
        let mut fresh = BTreeSet::new();
        for t in &delta {
            for rule in &rules.rules {
                fire_with(rule, t, &store, &mut fresh);
            }
        }
        for t in &fresh {
            store.insert(t);
            inferred.insert(t);
        }
        delta = fresh.into_iter().collect();
    }
    InferredGraph { base: g.clone(), inferred, closure: store }
}

/// Naive evaluation that applies whole rules one at a time in the given order,
/// each seeing everything derived so far, repeating until a full pass is idle.
/// Reaches the same fixpoint as [`materialize`] for any order.
pub fn materialize_in_order(g: &Graph, rules: &RuleSet, order: &[usize]) -> InferredGraph {
    let mut store = g.clone();
    let mut inferred = Graph::new();
    loop {
        let mut changed = false;
        for &idx in order {
            let rule = &rules.rules[idx % rules.rules.len()];
            let refs: Vec<&Pattern> = rule.premises.iter().collect();
            let mut fresh = BTreeSet::new();
            join(&store, &refs, &vec![None; rule.vars.len()], &mut |b| {
                if let Some(t) = instantiate(rule, b) {
                    if !store.contains(&t) {
                        fresh.insert(t);
                    }
                }
            });
            for t in &fresh {
                changed |= store.insert(t);
                inferred.insert(t);
            }
        }
        if !changed {
            break;
        }
    }
    InferredGraph { base: g.clone(), inferred, closure: store }
}

/// Direct and indirect superclasses of `class` by walking asserted
/// `subClassOf` and `equivalentClass` edges. Excludes `class` itself.
pub fn ancestors(g: &Graph, class: &Iri) -> BTreeSet<Iri> {
    let sc = Iri::from_static(SC);
    let eq = Iri::from_static(EQ);
    let mut seen = BTreeSet::new();
    let mut stack = vec![Term::Iri(class.clone())];
    while let Some(c) = stack.pop() {
        let ups = g
            .objects(&c, &sc)
            .chain(g.objects(&c, &eq))
            .chain(g.subjects(&eq, &c))
            .filter_map(|t| t.as_iri().cloned())
            .collect::<Vec<_>>();
        for up in ups {
            if up != *class && seen.insert(up.clone()) {
                stack.push(Term::Iri(up));
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;
    use proptest::prelude::*;

    const PREFIXES: &str = "@prefix ex: <http://ex/> .\n\
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
        @prefix owl: <http://www.w3.org/2002/07/owl#> .\n";

    fn graph(body: &str) -> Graph {
        parse_turtle(&format!("{PREFIXES}{body}")).unwrap()
    }

    fn ex(s: &str) -> Iri {
        Iri::new(format!("http://ex/{s}")).unwrap()
    }

    fn has(ig: &InferredGraph, s: &str, p: &str, o: &str) -> bool {
        ig.closure().contains(&Triple::new(ex(s), Iri::new(p).unwrap(), ex(o)).unwrap())
    }

    #[test]
    fn subclass_transitivity() {
        let ig = materialize(&graph("ex:A rdfs:subClassOf ex:B . ex:B rdfs:subClassOf ex:C ."), &RuleSet::rdfs_lite());
        assert!(has(&ig, "A", SC, "C"));
        assert!(ig.inferred().contains(&Triple::new(ex("A"), Iri::new(SC).unwrap(), ex("C")).unwrap()));
        assert!(ig.is_subclass_of(&ex("A"), &ex("C")));
        assert!(ig.is_subclass_of(&ex("A"), &ex("A")));
        assert!(!ig.is_subclass_of(&ex("C"), &ex("A")));
    }

    #[test]
    fn equivalence_carries_types_both_ways() {
        let ig =
            materialize(&graph("ex:A owl:equivalentClass ex:B . ex:x a ex:A . ex:y a ex:B ."), &RuleSet::rdfs_lite());
        assert!(has(&ig, "x", TYPE, "B"));
        assert!(has(&ig, "y", TYPE, "A"));
        assert!(has(&ig, "B", EQ, "A"));
        // No reflexive axioms despite the A ⊑ B ⊑ A cycle.
        assert!(!has(&ig, "A", SC, "A"));
        assert!(!has(&ig, "B", SC, "B"));
    }

    #[test]
    fn domain_range_and_inverse() {
        let ig = materialize(
            &graph(
                "ex:p rdfs:domain ex:D ; rdfs:range ex:R . ex:q owl:inverseOf ex:p .\n\
                 ex:s ex:p ex:o . ex:o2 ex:q ex:s2 . ex:s ex:p \"lit\" .",
            ),
            &RuleSet::rdfs_lite(),
        );
        assert!(has(&ig, "s", TYPE, "D"));
        assert!(has(&ig, "o", TYPE, "R"));
        assert!(has(&ig, "o", "http://ex/q", "s"));
        assert!(has(&ig, "s2", "http://ex/p", "o2"));
        assert!(has(&ig, "s2", TYPE, "D"));
        assert_eq!(ig.infer_types(&Term::Iri(ex("o"))), [ex("R")].into_iter().collect());
        assert!(ig.infer_types(&Term::Iri(ex("nowhere"))).is_empty());
    }

    #[test]
    fn base_and_inferred_are_disjoint() {
        let ig = materialize(
            &graph("ex:A rdfs:subClassOf ex:B . ex:B rdfs:subClassOf ex:C . ex:A rdfs:subClassOf ex:C ."),
            &RuleSet::rdfs_lite(),
        );
        assert!(ig.inferred().is_empty());
        assert_eq!(ig.closure().len(), 3);
    }

    #[test]
    fn rule_construction_checks_variables() {
        assert!(matches!(
            Rule::new("bad", &[["?a", SC, "?b"]], ["?a", SC, "?z"], &[]),
            Err(RuleError::UnboundConclusionVar { .. })
        ));
        assert!(matches!(
            Rule::new("empty", &[], ["http://ex/a", SC, "http://ex/b"], &[]),
            Err(RuleError::NoPremises { .. })
        ));
        assert!(matches!(
            Rule::new("guard", &[["?a", SC, "?b"]], ["?a", SC, "?b"], &[("?a", "?q")]),
            Err(RuleError::UnboundGuardVar { .. })
        ));
    }

    #[test]
    fn ancestors_walks_hierarchy() {
        let g = graph("ex:A rdfs:subClassOf ex:B . ex:B owl:equivalentClass ex:C . ex:C rdfs:subClassOf ex:D .");
        let up = ancestors(&g, &ex("A"));
        assert_eq!(up, [ex("B"), ex("C"), ex("D")].into_iter().collect());
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        let preds =
            [SC, TYPE, EQ, ns::rdfs::DOMAIN, ns::rdfs::RANGE, ns::owl::INVERSE_OF, "http://ex/p", "http://ex/q"];
        prop::collection::vec((0..6u8, 0..preds.len(), 0..6u8), 0..18).prop_map(move |edges| {
            let mut g = Graph::new();
            for (s, p, o) in edges {
                let pred = Iri::new(preds[p]).unwrap();
                let node = |i: u8| {
                    // Low ids double as property names so domain/range/inverse fire.
                    if i < 2 {
                        Term::Iri(Iri::new(["http://ex/p", "http://ex/q"][i as usize]).unwrap())
                    } else {
                        Term::Iri(ex(&format!("n{i}")))
                    }
                };
                g.add(node(s), pred, node(o)).unwrap();
            }
            g
        })
    }

    proptest! {
        #[test]
        fn idempotent(g in arb_graph()) {
            let rs = RuleSet::rdfs_lite();
            let ig = materialize(&g, &rs);
            let again = materialize(ig.closure(), &rs);
            prop_assert!(again.inferred().is_empty());
        }

        #[test]
        fn monotone(g in arb_graph(), extra in arb_graph()) {
            let rs = RuleSet::rdfs_lite();
            let small = materialize(&g, &rs);
            let mut bigger = g.clone();
            for t in extra.iter() { bigger.insert(&t.to_triple()); }
            let big = materialize(&bigger, &rs);
            prop_assert!(small.closure().to_set().is_subset(&big.closure().to_set()));
        }

        #[test]
        fn closure_bounded_per_predicate(g in arb_graph()) {
            let ig = materialize(&g, &RuleSet::rdfs_lite());
            let terms: BTreeSet<Term> = ig.closure().iter().flat_map(|t| [t.subject.clone(), t.object.clone()]).collect();
            let preds: BTreeSet<Iri> = ig.closure().iter().map(|t| t.predicate.clone()).collect();
            for p in preds {
                prop_assert!(ig.closure().matching(None, Some(&p), None).count() <= terms.len() * terms.len());
            }
        }

        #[test]
        fn equivalence_symmetric_in_closure(g in arb_graph()) {
            let ig = materialize(&g, &RuleSet::rdfs_lite());
            let eq = Iri::new(EQ).unwrap();
            for t in ig.closure().matching(None, Some(&eq), None) {
                let flipped = Triple::new(t.object.clone(), eq.clone(), t.subject.clone()).unwrap();
                prop_assert!(t.subject == t.object || ig.closure().contains(&flipped));
            }
        }

        #[test]
        fn schedule_independent(g in arb_graph(), order in Just((0..9usize).collect::<Vec<_>>()).prop_shuffle()) {
            let rs = RuleSet::rdfs_lite();
            let semi = materialize(&g, &rs).closure().to_set();
            let naive = materialize_in_order(&g, &rs, &order).closure().to_set();
            prop_assert_eq!(semi, naive);
        }
    }
}
