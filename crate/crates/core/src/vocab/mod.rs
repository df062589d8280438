//! The built-in bias vocabulary and the typed API for extending it.
//!
//! The seed is shipped as canonical Turtle (`seed.ttl`, byte-identical to what
//! [`serialize_turtle`](crate::rdf::serialize_turtle) emits for it) together
//! with a key/value manifest sidecar (`seed.manifest`) recording its
//! declaration counts and namespace classification.
//!
//! Measure and bias classes are punned: `bias:PopularityBias` is both a
//! subclass of `bias:Bias` and an instance of it, so it can sit in the object
//! position of `bias:measures` and in evaluation records alike.

mod manifest;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use chrono::{DateTime, SecondsFormat, Utc};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ns;
use crate::rdf::{parse_turtle, Graph, Iri, Literal, Term};
use crate::reasoner::ancestors;

pub use manifest::{
    ClassDef, Counts, ManifestSidecar, NamespaceKind, NamespaceTable, PropertyDef, PropertyKind, SidecarError,
    VocabManifest,
};

/// The seed vocabulary document.
pub const SEED_TTL: &str = include_str!("seed.ttl");

/// The seed manifest sidecar, with hand-counted declarations.
pub const SEED_MANIFEST: &str = include_str!("seed.manifest");

/// Root classes of the vocabulary forest.
pub const TOP_CONCEPTS: [&str; 7] = [
    ns::bias::BIAS,
    ns::bias::APPLICATION,
    ns::bias::ML_TASK,
    ns::dcat::DATASET,
    ns::bias::HARM,
    ns::bias::BIAS_MEASURE,
    ns::bias::BIAS_EVALUATION,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VocabError {
    #[error("parent class {0} is not a declared bias class")]
    UnresolvedParent(Iri),
    #[error("class {0} lists itself as a parent")]
    SelfParent(Iri),
    #[error("class {0} already exists with a different definition")]
    ConflictingDefinition(Iri),
    #[error("definition of {0} must carry a language tag")]
    UntaggedDefinition(Iri),
    #[error("{0} is not a bias class or instance")]
    UnresolvedBias(Iri),
    #[error("{0} is not a bias measure class or instance")]
    UnresolvedMeasure(Iri),
    #[error("evaluation value {0} is not finite")]
    NonFiniteValue(f64),
}

pub(crate) fn iri(s: &str) -> Iri {
    Iri::new(s).expect("vocabulary constants are valid IRIs")
}

/// A fresh copy of the built-in vocabulary graph.
pub fn seed_graph() -> Graph {
    static SEED: OnceLock<Graph> = OnceLock::new();
    SEED.get_or_init(|| parse_turtle(SEED_TTL).expect("embedded seed vocabulary parses")).clone()
}

/// The skos:definition of a term, preferring English.
pub fn lookup_definition(g: &Graph, term: &Iri) -> Option<Literal> {
    preferred_literal(g, &Term::Iri(term.clone()), &iri(ns::skos::DEFINITION))
}

/// The literal value of `predicate`: `@en` first, then `@en-*`, then the smallest other.
pub fn preferred_literal(g: &Graph, subject: &Term, predicate: &Iri) -> Option<Literal> {
    let lits: BTreeSet<&Literal> = g.objects(subject, predicate).filter_map(Term::as_literal).collect();
    let rank = |l: &Literal| match l.language().map(str::to_ascii_lowercase) {
        Some(tag) if tag == "en" => 0,
        Some(tag) if tag.starts_with("en-") => 1,
        None => 2,
        Some(_) => 3,
    };
    lits.into_iter().min_by_key(|l| rank(l)).cloned()
}

/// True if `class` is `root` or has it among its asserted ancestors.
pub(crate) fn descends_from(g: &Graph, class: &Iri, root: &Iri) -> bool {
    class == root || ancestors(g, class).contains(root)
}

/// True if `term` is a subclass of `root` or an instance of one.
pub(crate) fn is_kind_of(g: &Graph, term: &Iri, root: &Iri) -> bool {
    if is_declared_class(g, term) && descends_from(g, term, root) {
        return true;
    }
    let rdf_type = iri(ns::rdf::TYPE);
    g.objects(&Term::Iri(term.clone()), &rdf_type).filter_map(Term::as_iri).any(|t| descends_from(g, t, root))
}

pub(crate) fn is_declared_class(g: &Graph, class: &Iri) -> bool {
    let rdf_type = iri(ns::rdf::TYPE);
    let subject = Term::Iri(class.clone());
    [ns::owl::CLASS, ns::rdfs::CLASS]
        .iter()
        .any(|c| g.objects(&subject, &rdf_type).any(|t| t.as_iri().is_some_and(|i| i.as_str() == *c)))
}

fn check_definition(def: &ClassDef) -> Result<(), VocabError> {
    if def.definition.as_ref().is_some_and(|d| d.language().is_none()) {
        return Err(VocabError::UntaggedDefinition(def.iri.clone()));
    }
    if def.parents.contains(&def.iri) {
        return Err(VocabError::SelfParent(def.iri.clone()));
    }
    Ok(())
}

fn check_conflict(g: &Graph, def: &ClassDef) -> Result<(), VocabError> {
    if !is_declared_class(g, &def.iri) {
        return Ok(());
    }
    let existing: BTreeSet<Literal> = g
        .objects(&Term::Iri(def.iri.clone()), &iri(ns::skos::DEFINITION))
        .filter_map(Term::as_literal)
        .cloned()
        .collect();
    match &def.definition {
        Some(new) if !existing.is_empty() && !existing.contains(new) => {
            Err(VocabError::ConflictingDefinition(def.iri.clone()))
        }
        _ => Ok(()),
    }
}

fn insert_class(g: &mut Graph, def: &ClassDef, extra_types: &[&str], parents: &[Iri]) {
    let subject = Term::Iri(def.iri.clone());
    let mut add = |p: &str, o: Term| {
        g.add(subject.clone(), iri(p), o).expect("IRI subject");
    };
    add(ns::rdf::TYPE, Term::Iri(iri(ns::owl::CLASS)));
    for t in extra_types {
        add(ns::rdf::TYPE, Term::Iri(iri(t)));
    }
    if !def.label.is_empty() {
        add(ns::rdfs::LABEL, Term::Literal(Literal::lang(def.label.clone(), "en").expect("valid tag")));
    }
    if let Some(d) = &def.definition {
        add(ns::skos::DEFINITION, Term::Literal(d.clone()));
    }
    for p in parents {
        add(ns::rdfs::SUB_CLASS_OF, Term::Iri(p.clone()));
    }
    for e in &def.equivalents {
        add(ns::owl::EQUIVALENT_CLASS, Term::Iri(e.clone()));
    }
    if let Some(src) = &def.source {
        add(ns::dcterms::SOURCE, Term::Literal(Literal::string(src.clone())));
    }
}

/// Adds a bias class under existing bias classes. Parents default to `bias:Bias`.
///
/// Re-registering identical content is a no-op; a different definition for an
/// existing class is rejected.
pub fn register_bias_class(g: &mut Graph, def: &ClassDef) -> Result<Iri, VocabError> {
    check_definition(def)?;
    let root = iri(ns::bias::BIAS);
    let parents = if def.parents.is_empty() { vec![root.clone()] } else { def.parents.clone() };
    for p in &parents {
        if !is_declared_class(g, p) || !descends_from(g, p, &root) {
            return Err(VocabError::UnresolvedParent(p.clone()));
        }
    }
    check_conflict(g, def)?;
    insert_class(g, def, &[ns::bias::BIAS], &parents);
    Ok(def.iri.clone())
}

/// Adds a measure class for `measures`, with its formalization text.
pub fn register_measure(
    g: &mut Graph,
    def: &ClassDef,
    measures: &Iri,
    formalization: Literal,
) -> Result<Iri, VocabError> {
    check_definition(def)?;
    let bias_root = iri(ns::bias::BIAS);
    if !is_declared_class(g, measures) || !descends_from(g, measures, &bias_root) {
        return Err(VocabError::UnresolvedBias(measures.clone()));
    }
    let measure_root = iri(ns::bias::BIAS_MEASURE);
    let mut parents = def.parents.clone();
    if !parents.contains(&measure_root) {
        parents.push(measure_root.clone());
    }
    for p in &parents {
        if !is_declared_class(g, p) || !descends_from(g, p, &measure_root) {
            return Err(VocabError::UnresolvedParent(p.clone()));
        }
    }
    check_conflict(g, def)?;
    insert_class(g, def, &[ns::bias::BIAS_MEASURE], &parents);
    let subject = Term::Iri(def.iri.clone());
    g.add(subject.clone(), iri(ns::bias::MEASURES), Term::Iri(measures.clone())).expect("IRI subject");
    g.add(subject, iri(ns::bias::FORMALIZATION), Term::Literal(formalization)).expect("IRI subject");
    Ok(def.iri.clone())
}

/// One evaluation of a bias measure: the n-ary link between bias, measure,
/// value, dataset and the optional task, document and application.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasEvaluationRecord {
    pub bias: Iri,
    pub measure: Iri,
    pub value: f64,
    pub dataset: Iri,
    pub ml_task: Option<Iri>,
    pub document: Option<Iri>,
    pub application: Option<Iri>,
    pub timestamp: DateTime<Utc>,
}

impl BiasEvaluationRecord {
    pub fn new(bias: Iri, measure: Iri, value: f64, dataset: Iri, timestamp: DateTime<Utc>) -> Self {
        BiasEvaluationRecord {
            bias,
            measure,
            value,
            dataset,
            ml_task: None,
            document: None,
            application: None,
            timestamp,
        }
    }

    fn digest(&self) -> String {
        let mut h = Sha256::new();
        let opt = |o: &Option<Iri>| o.as_ref().map(|i| i.as_str().to_owned()).unwrap_or_default();
        for part in [
            self.bias.as_str().to_owned(),
            self.measure.as_str().to_owned(),
            format!("{:?}", self.value),
            self.dataset.as_str().to_owned(),
            opt(&self.ml_task),
            opt(&self.document),
            opt(&self.application),
            timestamp_lexical(&self.timestamp),
        ] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        hex::encode(&h.finalize()[..8])
    }
}

pub(crate) fn timestamp_lexical(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Mints a `bias:BiasEvaluation` instance for the record and links every present field.
pub fn record_evaluation(g: &mut Graph, rec: &BiasEvaluationRecord) -> Result<Iri, VocabError> {
    if !rec.value.is_finite() {
        return Err(VocabError::NonFiniteValue(rec.value));
    }
    if !is_kind_of(g, &rec.bias, &iri(ns::bias::BIAS)) {
        return Err(VocabError::UnresolvedBias(rec.bias.clone()));
    }
    if !is_kind_of(g, &rec.measure, &iri(ns::bias::BIAS_MEASURE)) {
        return Err(VocabError::UnresolvedMeasure(rec.measure.clone()));
    }
    let stem = format!("{}evaluation-{}", ns::bias::NS, rec.digest());
    let mut minted = iri(&stem);
    let mut n = 2;
    while g.mentions(&Term::Iri(minted.clone())) {
        minted = iri(&format!("{stem}-{n}"));
        n += 1;
    }
    let subject = Term::Iri(minted.clone());
    let mut add = |p: &str, o: Term| {
        g.add(subject.clone(), iri(p), o).expect("IRI subject");
    };
    add(ns::rdf::TYPE, Term::Iri(iri(ns::bias::BIAS_EVALUATION)));
    add(ns::bias::EVALUATES_BIAS, Term::Iri(rec.bias.clone()));
    add(ns::bias::USES_MEASURE, Term::Iri(rec.measure.clone()));
    add(ns::bias::HAS_VALUE, Term::Literal(Literal::decimal(rec.value)));
    add(ns::bias::ON_DATASET, Term::Iri(rec.dataset.clone()));
    for (p, v) in [
        (ns::bias::FOR_TASK, &rec.ml_task),
        (ns::bias::DOCUMENTED_IN, &rec.document),
        (ns::bias::IN_APPLICATION, &rec.application),
    ] {
        if let Some(v) = v {
            add(p, Term::Iri(v.clone()));
        }
    }
    add(
        ns::bias::EVALUATED_AT,
        Term::Literal(Literal::typed(timestamp_lexical(&rec.timestamp), iri(ns::xsd::DATE_TIME))),
    );
    Ok(minted)
}
