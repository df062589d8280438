//! Closed-world instance validation, consistency checks, a small pitfall
//! catalogue and the vocabulary quality indicators.
//!
//! Domain and range checks read types from the hierarchy closure of the
//! asserted data only (`RuleSet::asserted_types`). Under the full RDFS closure
//! every object of a ranged property is typed with the range by construction,
//! so no violation could ever be observed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::ns;
use crate::rdf::{Graph, Iri, Term};
use crate::reasoner::{ancestors, materialize, InferredGraph, RuleSet};
use crate::vocab::{preferred_literal, NamespaceKind, PropertyKind, VocabManifest, TOP_CONCEPTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Finding {
    pub code: &'static str,
    pub subject: Term,
    pub severity: Severity,
    pub message: String,
}

impl Finding {
    fn error(code: &'static str, subject: impl Into<Term>, message: impl Into<String>) -> Self {
        Finding { code, subject: subject.into(), severity: Severity::Error, message: message.into() }
    }

    fn warning(code: &'static str, subject: impl Into<Term>, message: impl Into<String>) -> Self {
        Finding { code, subject: subject.into(), severity: Severity::Warning, message: message.into() }
    }
}

/// Findings sorted by code, then subject.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn new(findings: impl IntoIterator<Item = Finding>) -> Self {
        let mut findings: Vec<Finding> = findings.into_iter().collect();
        findings.sort();
        findings.dedup();
        ValidationReport { findings }
    }

    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn with_code<'a>(&'a self, code: &'a str) -> impl Iterator<Item = &'a Finding> + 'a {
        self.findings.iter().filter(move |f| f.code == code)
    }

    pub fn merge(self, other: ValidationReport) -> Self {
        ValidationReport::new(self.findings.into_iter().chain(other.findings))
    }

    /// One line per finding: severity, code, subject, message.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let msg = f.message.replace(['\t', '\n'], " ");
            let _ = writeln!(out, "{}\t{}\t{}\t{msg}", f.severity, f.code, f.subject);
        }
        out
    }
}

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("vocabulary constants are valid IRIs")
}

struct Types {
    closure: InferredGraph,
}

impl Types {
    fn of_asserted(g: &Graph) -> Self {
        Types { closure: materialize(g, &RuleSet::asserted_types()) }
    }

    fn of(&self, t: &Term) -> BTreeSet<Iri> {
        self.closure.infer_types(t)
    }

    /// Some type of `t` is `class` or below it, or `t` is itself a class below it.
    fn compatible(&self, t: &Term, types: &BTreeSet<Iri>, class: &Iri) -> bool {
        types.iter().any(|ty| self.closure.is_subclass_of(ty, class))
            || t.as_iri().is_some_and(|c| c != class && self.closure.is_subclass_of(c, class))
    }
}

fn in_bias_namespace(t: &Term) -> bool {
    t.as_iri().is_some_and(|i| i.as_str().starts_with(ns::bias::NS))
}

fn literal_fits(lit: &crate::rdf::Literal, range: &Iri) -> bool {
    match range.as_str() {
        ns::rdfs::LITERAL => true,
        ns::xsd::DECIMAL => lit.datatype() == ns::xsd::DECIMAL || lit.datatype() == ns::xsd::INTEGER,
        other => lit.datatype() == other,
    }
}

fn finite_decimal(lit: &crate::rdf::Literal) -> bool {
    matches!(lit.datatype(), ns::xsd::DECIMAL | ns::xsd::INTEGER)
        && lit.lexical().parse::<f64>().is_ok_and(f64::is_finite)
        && lit.lexical().chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '+' | '-'))
}

/// Checks the asserted data against declared domains, ranges and the
/// evaluation record shape. Triples added by inference are not re-checked.
pub fn validate_instances(ig: &InferredGraph, manifest: &VocabManifest) -> ValidationReport {
    let base = ig.base();
    let types = Types::of_asserted(base);
    let rdf_type = iri(ns::rdf::TYPE);
    let declared_annotations: BTreeSet<Iri> = base
        .subjects(&rdf_type, &Term::Iri(iri(ns::owl::ANNOTATION_PROPERTY)))
        .chain(base.subjects(&rdf_type, &Term::Iri(iri(ns::rdf::PROPERTY))))
        .filter_map(Term::as_iri)
        .cloned()
        .collect();
    let mut findings = Vec::new();
    let mut untyped = BTreeSet::new();
    let mut note_untyped = |t: &Term, types: &BTreeSet<Iri>, findings: &mut Vec<Finding>| {
        if types.is_empty() && in_bias_namespace(t) && untyped.insert(t.clone()) {
            findings.push(Finding::warning("untyped-instance", t.clone(), format!("{t} has no rdf:type")));
        }
    };

    for t in base.iter() {
        let (s, p, o) = (t.subject, t.predicate, t.object);
        let st = types.of(s);
        note_untyped(s, &st, &mut findings);
        if o.as_iri().is_some() {
            let ot = types.of(o);
            note_untyped(o, &ot, &mut findings);
        }
        let Some(def) = manifest.property(p) else {
            if p.as_str().starts_with(ns::bias::NS) && !declared_annotations.contains(p) {
                findings.push(Finding::error(
                    "undeclared-property",
                    s.clone(),
                    format!("{p} is used but not declared in the vocabulary"),
                ));
            }
            continue;
        };
        if let Some(domain) = &def.domain {
            if !st.is_empty() && !types.compatible(s, &st, domain) {
                findings.push(Finding::error(
                    "domain-violation",
                    s.clone(),
                    format!("subject of {p} is not a {domain}"),
                ));
            }
        }
        if p.as_str() == ns::bias::HAS_VALUE {
            continue;
        }
        match (def.kind, &def.range, o) {
            (PropertyKind::Object, _, Term::Literal(lit)) => findings.push(Finding::error(
                "range-violation",
                s.clone(),
                format!("{p} expects a resource but has literal \"{}\"", lit.lexical()),
            )),
            (PropertyKind::Object, Some(range), obj) => {
                let ot = types.of(obj);
                if !ot.is_empty() && !types.compatible(obj, &ot, range) {
                    findings.push(Finding::error(
                        "range-violation",
                        s.clone(),
                        format!("object {obj} of {p} is not a {range}"),
                    ));
                }
            }
            (PropertyKind::Data, Some(range), Term::Literal(lit)) if !literal_fits(lit, range) => findings.push(
                Finding::error("range-violation", s.clone(), format!("{p} expects {range} but has {}", lit.datatype())),
            ),
            (PropertyKind::Data, _, obj @ (Term::Iri(_) | Term::Blank(_))) => findings.push(Finding::error(
                "range-violation",
                s.clone(),
                format!("{p} expects a literal but has {obj}"),
            )),
            _ => {}
        }
    }

    let evaluation = Term::Iri(iri(ns::bias::BIAS_EVALUATION));
    let (evaluates, uses, has_value) =
        (iri(ns::bias::EVALUATES_BIAS), iri(ns::bias::USES_MEASURE), iri(ns::bias::HAS_VALUE));
    let instances: BTreeSet<&Term> = types.closure.closure().subjects(&rdf_type, &evaluation).collect();
    for inst in instances {
        if base.objects(inst, &evaluates).next().is_none() {
            findings.push(Finding::error(
                "evaluation-missing-bias",
                inst.clone(),
                "evaluation has no evaluatesBias link",
            ));
        }
        if base.objects(inst, &uses).next().is_none() {
            findings.push(Finding::error(
                "evaluation-missing-measure",
                inst.clone(),
                "evaluation has no usesMeasure link",
            ));
        }
    }
    for t in base.matching(None, Some(&has_value), None) {
        match t.object {
            Term::Literal(lit) if finite_decimal(lit) => {}
            other => findings.push(Finding::error(
                "invalid-value",
                t.subject.clone(),
                format!("evaluation value {other} is not a finite decimal"),
            )),
        }
    }
    ValidationReport::new(findings)
}

/// Subclass cycles, disjointness clashes and classes disjoint with a superclass.
pub fn check_consistency(ig: &InferredGraph) -> ValidationReport {
    let g = ig.closure();
    let (sc, eq, dis) = (iri(ns::rdfs::SUB_CLASS_OF), iri(ns::owl::EQUIVALENT_CLASS), iri(ns::owl::DISJOINT_WITH));
    let mut findings = Vec::new();

    let declared_equivalent =
        |a: &Term, b: &Term| g.objects(a, &eq).any(|x| x == b) || g.objects(b, &eq).any(|x| x == a);
    let mut cycles: BTreeSet<BTreeSet<Term>> = BTreeSet::new();
    for t in g.matching(None, Some(&sc), None) {
        let (a, b) = (t.subject, t.object);
        if a == b || declared_equivalent(a, b) {
            continue;
        }
        if g.objects(b, &sc).any(|x| x == a) {
            let mut members: BTreeSet<Term> = BTreeSet::from([a.clone()]);
            members.extend(
                g.objects(a, &sc)
                    .filter(|m| *m != a && g.objects(m, &sc).any(|x| x == a) && !declared_equivalent(a, m))
                    .cloned(),
            );
            cycles.insert(members);
        }
    }
    for members in cycles {
        let names: Vec<String> = members.iter().map(ToString::to_string).collect();
        let first = members.into_iter().next().expect("non-empty cycle");
        findings.push(Finding::error("subclass-cycle", first, format!("subclass cycle among {}", names.join(", "))));
    }

    let mut pairs: BTreeSet<(Iri, Iri)> = BTreeSet::new();
    for t in g.matching(None, Some(&dis), None) {
        if let (Some(a), Some(b)) = (t.subject.as_iri(), t.object.as_iri()) {
            pairs.insert((a.clone().min(b.clone()), a.clone().max(b.clone())));
        }
    }
    for (a, b) in &pairs {
        if a == b || ig.is_subclass_of(a, b) || ig.is_subclass_of(b, a) {
            let (sub, sup) = if ig.is_subclass_of(b, a) && a != b { (b, a) } else { (a, b) };
            findings.push(Finding::error(
                "disjoint-superclass",
                Term::Iri(sub.clone()),
                format!("{sub} is declared disjoint with its superclass {sup}"),
            ));
        }
        let rdf_type = iri(ns::rdf::TYPE);
        let in_a: BTreeSet<&Term> = g.subjects(&rdf_type, &Term::Iri(a.clone())).collect();
        for x in g.subjects(&rdf_type, &Term::Iri(b.clone())) {
            if in_a.contains(x) {
                findings.push(Finding::error(
                    "disjoint-instance",
                    x.clone(),
                    format!("{x} is typed with disjoint classes {a} and {b}"),
                ));
            }
        }
    }
    ValidationReport::new(findings)
}

/// Lowercased alphanumerics, so `isAssociatedWith` and "is associated with" agree.
fn normalize_name(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

/// The pitfall catalogue. Every finding is a warning.
///
/// | code | check |
/// |------|-------|
/// | `missing-definition` | vocabulary class without `skos:definition` |
/// | `missing-domain`, `missing-range` | declared property lacking either |
/// | `unreachable-class` | vocabulary class not below any top concept |
/// | `unused-property` | declared property never used as a predicate |
/// | `label-mismatch` | `rdfs:label` disagrees with the IRI local name |
///
/// Classes in namespaces the manifest marks external are stubs and skip the
/// definition and reachability checks.
pub fn scan_pitfalls(g: &Graph, manifest: &VocabManifest) -> ValidationReport {
    let mut findings = Vec::new();
    let roots: Vec<Iri> = TOP_CONCEPTS.iter().map(|t| iri(t)).collect();
    for c in &manifest.classes {
        let own = manifest.classify(&c.iri) != Some(NamespaceKind::External);
        if own && c.definition.is_none() {
            findings.push(Finding::warning(
                "missing-definition",
                c.iri.clone(),
                format!("{} has no skos:definition", c.iri),
            ));
        }
        if own && !roots.contains(&c.iri) {
            let up = ancestors(g, &c.iri);
            if !roots.iter().any(|r| up.contains(r)) {
                findings.push(Finding::warning(
                    "unreachable-class",
                    c.iri.clone(),
                    format!("{} is not below any top concept", c.iri),
                ));
            }
        }
    }
    for p in &manifest.properties {
        if p.domain.is_none() {
            findings.push(Finding::warning(
                "missing-domain",
                p.iri.clone(),
                format!("{} declares no rdfs:domain", p.iri),
            ));
        }
        if p.range.is_none() {
            findings.push(Finding::warning(
                "missing-range",
                p.iri.clone(),
                format!("{} declares no rdfs:range", p.iri),
            ));
        }
        if g.matching(None, Some(&p.iri), None).next().is_none() {
            findings.push(Finding::warning("unused-property", p.iri.clone(), format!("{} is never used", p.iri)));
        }
    }
    let label = iri(ns::rdfs::LABEL);
    let named = manifest.classes.iter().map(|c| &c.iri).chain(manifest.properties.iter().map(|p| &p.iri));
    for term in named {
        if let Some(l) = preferred_literal(g, &Term::Iri(term.clone()), &label) {
            if normalize_name(l.lexical()) != normalize_name(term.local_name()) {
                findings.push(Finding::warning(
                    "label-mismatch",
                    term.clone(),
                    format!("label \"{}\" does not match local name {}", l.lexical(), term.local_name()),
                ));
            }
        }
    }
    ValidationReport::new(findings)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QualityError {
    #[error("empty schema: no declared classes or properties")]
    EmptySchema,
    #[error("no namespace classification for {0}")]
    UnclassifiedNamespace(Iri),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completeness {
    pub defined_classes: usize,
    pub total_classes: usize,
    /// `defined_classes / total_classes`, 0 when there are no bias classes.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interoperability {
    pub external_terms: usize,
    pub proprietary_terms: usize,
    pub total_terms: usize,
    pub external_ratio: f64,
    pub proprietary_ratio: f64,
}

impl Interoperability {
    pub fn from_counts(external_terms: usize, proprietary_terms: usize) -> Result<Self, QualityError> {
        let total_terms = external_terms + proprietary_terms;
        if total_terms == 0 {
            return Err(QualityError::EmptySchema);
        }
        Ok(Interoperability {
            external_terms,
            proprietary_terms,
            total_terms,
            external_ratio: external_terms as f64 / total_terms as f64,
            proprietary_ratio: proprietary_terms as f64 / total_terms as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub completeness: Completeness,
    pub interoperability: Interoperability,
    pub accessibility: String,
}

fn percent(r: f64) -> String {
    format!("{:.0}%", r * 100.0)
}

impl QualityReport {
    /// Labeled key/value lines, tab-separated.
    pub fn render(&self) -> String {
        let c = &self.completeness;
        let i = &self.interoperability;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}\t{v}");
        };
        line("definedClasses", c.defined_classes.to_string());
        line("totalClasses", c.total_classes.to_string());
        line("completeness", format!("{:.4}\t{}", c.ratio, percent(c.ratio)));
        line("externalTerms", i.external_terms.to_string());
        line("proprietaryTerms", i.proprietary_terms.to_string());
        line("totalTerms", i.total_terms.to_string());
        line("externalRatio", format!("{:.4}\t{}", i.external_ratio, percent(i.external_ratio)));
        line("proprietaryRatio", format!("{:.4}\t{}", i.proprietary_ratio, percent(i.proprietary_ratio)));
        line("accessibility", self.accessibility.clone());
        out
    }
}

/// IRIs that are declared classes or properties, or take part in
/// subclass or equivalence axioms.
pub fn schema_terms(g: &Graph) -> BTreeSet<Iri> {
    let rdf_type = iri(ns::rdf::TYPE);
    let mut out = BTreeSet::new();
    for decl in [
        ns::owl::CLASS,
        ns::rdfs::CLASS,
        ns::owl::OBJECT_PROPERTY,
        ns::owl::DATATYPE_PROPERTY,
        ns::owl::ANNOTATION_PROPERTY,
        ns::rdf::PROPERTY,
    ] {
        out.extend(g.subjects(&rdf_type, &Term::Iri(iri(decl))).filter_map(Term::as_iri).cloned());
    }
    for axiom in [ns::rdfs::SUB_CLASS_OF, ns::owl::EQUIVALENT_CLASS] {
        for t in g.matching(None, Some(&iri(axiom)), None) {
            out.extend([t.subject, t.object].into_iter().filter_map(Term::as_iri).cloned());
        }
    }
    out
}

/// Completeness of bias-class definitions and the external/proprietary split
/// of schema terms. `locator` is reported as the accessibility indicator.
pub fn quality_indicators(g: &Graph, manifest: &VocabManifest, locator: &str) -> Result<QualityReport, QualityError> {
    let mut counts: BTreeMap<NamespaceKind, usize> = BTreeMap::new();
    for term in schema_terms(g) {
        let kind = manifest.classify(&term).ok_or_else(|| QualityError::UnclassifiedNamespace(term.clone()))?;
        *counts.entry(kind).or_default() += 1;
    }
    let interoperability = Interoperability::from_counts(
        counts.get(&NamespaceKind::External).copied().unwrap_or(0),
        counts.get(&NamespaceKind::Proprietary).copied().unwrap_or(0),
    )?;

    let bias = iri(ns::bias::BIAS);
    let bias_classes: Vec<_> =
        manifest.classes.iter().filter(|c| c.iri != bias && ancestors(g, &c.iri).contains(&bias)).collect();
    let defined = bias_classes.iter().filter(|c| c.definition.is_some()).count();
    let total = bias_classes.len();
    Ok(QualityReport {
        completeness: Completeness {
            defined_classes: defined,
            total_classes: total,
            ratio: if total == 0 { 0.0 } else { defined as f64 / total as f64 },
        },
        interoperability,
        accessibility: locator.to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{parse_turtle, Literal};
    use crate::vocab::{
        record_evaluation, register_bias_class, seed_graph, BiasEvaluationRecord, ClassDef, NamespaceTable,
    };
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn b(local: &str) -> Iri {
        iri(&format!("{}{local}", ns::bias::NS))
    }

    fn closure(g: &Graph) -> InferredGraph {
        materialize(g, &RuleSet::rdfs_lite())
    }

    fn manifest(g: &Graph) -> VocabManifest {
        VocabManifest::from_graph(g, &NamespaceTable::default())
    }

    fn codes(r: &ValidationReport) -> Vec<&'static str> {
        r.findings().iter().map(|f| f.code).collect()
    }

    #[test]
    fn seed_instances_are_valid() {
        let g = seed_graph();
        let r = validate_instances(&closure(&g), &manifest(&g));
        assert!(r.ok(), "{}", r.to_tsv());
        assert!(r.findings().is_empty(), "{}", r.to_tsv());
    }

    #[test]
    fn range_violation_names_property() {
        let mut g = seed_graph();
        g.add(b("PopularityBias"), b("hasBiasMeasure"), b("Erasure")).unwrap();
        let r = validate_instances(&closure(&g), &manifest(&g));
        let errs: Vec<_> = r.errors().collect();
        assert_eq!(errs.len(), 1, "{}", r.to_tsv());
        assert_eq!(errs[0].code, "range-violation");
        assert!(errs[0].message.contains("hasBiasMeasure"));
    }

    #[test]
    fn domain_violation() {
        let mut g = seed_graph();
        g.add(b("Erasure"), b("isAlignedWith"), b("Erasure")).unwrap();
        let r = validate_instances(&closure(&g), &manifest(&g));
        assert_eq!(codes(&r), vec!["domain-violation"]);
    }

    #[test]
    fn untyped_objects_warn_instead() {
        let mut g = seed_graph();
        g.add(b("PopularityBias"), b("isAlignedWith"), b("Stereotyping")).unwrap();
        let r = validate_instances(&closure(&g), &manifest(&g));
        assert!(r.ok());
        assert_eq!(codes(&r), vec!["untyped-instance"]);
        // Outside the bias namespace untyped objects pass silently.
        let mut g = seed_graph();
        g.add(b("PopularityBias"), b("isAlignedWith"), iri("http://example.org/harm")).unwrap();
        assert!(validate_instances(&closure(&g), &manifest(&g)).findings().is_empty());
    }

    #[test]
    fn undeclared_bias_property() {
        let mut g = seed_graph();
        g.add(b("PopularityBias"), b("hasMitigation"), b("Erasure")).unwrap();
        let r = validate_instances(&closure(&g), &manifest(&g));
        assert_eq!(codes(&r), vec!["undeclared-property"]);
    }

    #[test]
    fn literal_ranges() {
        let mut g = seed_graph();
        g.add(b("GiniInDegree"), b("formalization"), b("Erasure")).unwrap();
        g.add(b("PopularityBias"), b("isAlignedWith"), Literal::string("erasure")).unwrap();
        let r = validate_instances(&closure(&g), &manifest(&g));
        assert_eq!(codes(&r), vec!["range-violation", "range-violation"]);
    }

    fn ts() -> chrono::DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 1, 2, 3, 4, 5).unwrap()
    }

    #[test]
    fn evaluation_records() {
        let mut g = seed_graph();
        let rec =
            BiasEvaluationRecord::new(b("PopularityBias"), b("GiniInDegree"), 0.5, iri("http://example.org/ds"), ts());
        record_evaluation(&mut g, &rec).unwrap();
        let r = validate_instances(&closure(&g), &manifest(&g));
        assert!(r.ok(), "{}", r.to_tsv());

        let mut bad = seed_graph();
        let e = b("evaluation-broken");
        bad.add(e.clone(), iri(ns::rdf::TYPE), b("BiasEvaluation")).unwrap();
        bad.add(e.clone(), b("hasValue"), Literal::typed("NaN", iri(ns::xsd::DOUBLE))).unwrap();
        let r = validate_instances(&closure(&bad), &manifest(&bad));
        assert_eq!(codes(&r), vec!["evaluation-missing-bias", "evaluation-missing-measure", "invalid-value"]);
        assert!(r.findings().iter().all(|f| f.subject == Term::Iri(e.clone())));
    }

    #[test]
    fn findings_do_not_depend_on_inferred_triples() {
        let mut g = seed_graph();
        g.add(b("PopularityBias"), b("hasBiasMeasure"), b("Erasure")).unwrap();
        let m = manifest(&g);
        assert_eq!(validate_instances(&closure(&g), &m), validate_instances(&InferredGraph::from_base(g.clone()), &m));
    }

    #[test]
    fn seed_is_consistent() {
        let r = check_consistency(&closure(&seed_graph()));
        assert!(r.findings().is_empty(), "{}", r.to_tsv());
    }

    const PREFIXES: &str = "@prefix ex: <http://ex/> .
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
";

    fn doc(body: &str) -> InferredGraph {
        closure(&parse_turtle(&format!("{PREFIXES}{body}")).unwrap())
    }

    #[test]
    fn subclass_cycles() {
        let r = check_consistency(&doc("ex:A rdfs:subClassOf ex:B . ex:B rdfs:subClassOf ex:A ."));
        assert_eq!(codes(&r), vec!["subclass-cycle"]);
        let r = check_consistency(&doc(
            "ex:A rdfs:subClassOf ex:B . ex:B rdfs:subClassOf ex:C . ex:C rdfs:subClassOf ex:A .",
        ));
        assert_eq!(codes(&r), vec!["subclass-cycle"]);
        assert!(r.findings()[0].message.contains("<http://ex/C>"));
        let r = check_consistency(&doc("ex:A owl:equivalentClass ex:B ."));
        assert!(r.findings().is_empty());
        let r = check_consistency(&doc(
            "ex:A rdfs:subClassOf ex:B . ex:B rdfs:subClassOf ex:A . ex:A owl:equivalentClass ex:B .",
        ));
        assert!(r.findings().is_empty());
    }

    #[test]
    fn disjointness() {
        let r = check_consistency(&doc("ex:A owl:disjointWith ex:B . ex:x a ex:A , ex:B ."));
        assert_eq!(codes(&r), vec!["disjoint-instance"]);
        let r =
            check_consistency(&doc("ex:A owl:disjointWith ex:B . ex:C rdfs:subClassOf ex:B . ex:x a ex:A , ex:C ."));
        assert_eq!(codes(&r), vec!["disjoint-instance"]);
        let r = check_consistency(&doc("ex:A rdfs:subClassOf ex:B . ex:A owl:disjointWith ex:B ."));
        assert_eq!(codes(&r), vec!["disjoint-superclass"]);
        assert_eq!(r.findings()[0].subject, Term::Iri(iri("http://ex/A")));
        let r = check_consistency(&doc("ex:A owl:disjointWith ex:B . ex:x a ex:A . ex:y a ex:B ."));
        assert!(r.findings().is_empty());
    }

    #[test]
    fn seed_pitfall_baseline() {
        let g = seed_graph();
        let r = scan_pitfalls(&g, &manifest(&g));
        assert!(r.ok());
        // Only the evaluation-record properties go unused in the bare vocabulary.
        let unused: Vec<&str> =
            r.with_code("unused-property").map(|f| f.subject.as_iri().unwrap().local_name()).collect();
        assert_eq!(
            unused,
            vec![
                "documentedIn",
                "evaluatedAt",
                "evaluatesBias",
                "forTask",
                "hasValue",
                "inApplication",
                "onDataset",
                "usesMeasure"
            ]
        );
        assert_eq!(r.findings().len(), 8, "{}", r.to_tsv());
    }

    #[test]
    fn pitfalls_after_registration() {
        let mut g = seed_graph();
        register_bias_class(&mut g, &ClassDef::new(b("SelectionBias"), "Choice Bias")).unwrap();
        g.add(b("hasSeverity"), iri(ns::rdf::TYPE), iri(ns::owl::OBJECT_PROPERTY)).unwrap();
        g.add(b("hasSeverity"), iri(ns::rdfs::DOMAIN), b("Harm")).unwrap();
        g.add(b("Orphan"), iri(ns::rdf::TYPE), iri(ns::owl::CLASS)).unwrap();
        let r = scan_pitfalls(&g, &manifest(&g));
        let of =
            |code| r.with_code(code).map(|f| f.subject.as_iri().unwrap().local_name().to_owned()).collect::<Vec<_>>();
        assert_eq!(of("missing-definition"), vec!["Orphan", "SelectionBias"]);
        assert_eq!(of("missing-range"), vec!["hasSeverity"]);
        assert!(of("missing-domain").is_empty());
        assert_eq!(of("unreachable-class"), vec!["Orphan"]);
        assert_eq!(of("label-mismatch"), vec!["SelectionBias"]);
    }

    #[test]
    fn seed_quality_matches_hand_count() {
        let g = seed_graph();
        let q = quality_indicators(&g, &VocabManifest::seed(), ns::bias::NS).unwrap();
        // 15 bias classes + 13 bias properties; 5 external classes + 2 annotation properties.
        assert_eq!((q.interoperability.external_terms, q.interoperability.proprietary_terms), (7, 28));
        assert_eq!(q.interoperability.total_terms, 35);
        assert!((q.interoperability.external_ratio - 0.2).abs() < 1e-12);
        assert_eq!(q.completeness, Completeness { defined_classes: 6, total_classes: 6, ratio: 1.0 });
        assert_eq!(q.accessibility, ns::bias::NS);
    }

    #[test]
    fn quality_ratios_round_like_reported() {
        let i = Interoperability::from_counts(316, 73).unwrap();
        assert_eq!(percent(i.external_ratio), "81%");
        assert_eq!(percent(i.proprietary_ratio), "19%");
        assert_eq!(format!("{:.2}", i.external_ratio), "0.81");
    }

    #[test]
    fn quality_errors() {
        let g = Graph::new();
        assert_eq!(quality_indicators(&g, &manifest(&g), "x"), Err(QualityError::EmptySchema));
        let g = parse_turtle(&format!("{PREFIXES}ex:A a owl:Class .")).unwrap();
        assert_eq!(
            quality_indicators(&g, &manifest(&g), "x"),
            Err(QualityError::UnclassifiedNamespace(iri("http://ex/A")))
        );
    }

    #[test]
    fn report_rendering() {
        let g = seed_graph();
        let text = quality_indicators(&g, &VocabManifest::seed(), "https://example.org/onto").unwrap().render();
        assert!(text.contains("externalRatio\t0.2000\t20%\n"));
        assert!(text.ends_with("accessibility\thttps://example.org/onto\n"));
    }

    proptest! {
        #[test]
        fn ratios_sum_to_one(ext in 0usize..500, prop in 0usize..500) {
            prop_assume!(ext + prop > 0);
            let i = Interoperability::from_counts(ext, prop).unwrap();
            prop_assert!((i.external_ratio + i.proprietary_ratio - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&i.external_ratio));
        }

        #[test]
        fn violations_survive_unrelated_data(extra in prop::collection::vec((0u8..4, 0u8..4), 0..10)) {
            let mut g = seed_graph();
            g.add(b("PopularityBias"), b("hasBiasMeasure"), b("Erasure")).unwrap();
            let before = validate_instances(&closure(&g), &manifest(&g));
            for (s, o) in extra {
                g.add(iri(&format!("http://example.org/s{s}")), iri("http://example.org/p"), iri(&format!("http://example.org/o{o}"))).unwrap();
            }
            let after = validate_instances(&closure(&g), &manifest(&g));
            for f in before.findings() {
                prop_assert!(after.findings().contains(f));
            }
        }

        #[test]
        fn reports_are_deterministic(extra in prop::collection::vec((0u8..4, 0u8..3), 0..8)) {
            let mut g = seed_graph();
            for (s, o) in extra {
                let objs = [b("Erasure"), b("RecommenderSystem"), b("GiniInDegree")];
                g.add(b(&format!("x{s}")), b("isAlignedWith"), objs[o as usize].clone()).unwrap();
            }
            let m = manifest(&g);
            prop_assert_eq!(validate_instances(&closure(&g), &m), validate_instances(&closure(&g.clone()), &m));
            let r = validate_instances(&closure(&g), &m);
            let mut sorted = r.findings().to_vec();
            sorted.sort_by(|a, b| (a.code, &a.subject).cmp(&(b.code, &b.subject)));
            prop_assert_eq!(sorted.iter().map(|f| (f.code, &f.subject)).collect::<Vec<_>>(),
                r.findings().iter().map(|f| (f.code, &f.subject)).collect::<Vec<_>>());
        }
    }
}
