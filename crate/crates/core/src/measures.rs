//! Bias measures computed from interaction data.
//!
//! The Gini coefficient uses the population form
//! `G = Σᵢ Σⱼ |xᵢ − xⱼ| / (2 n² x̄)`, bounded by `[0, (n−1)/n]`, evaluated with
//! the equivalent sorted-rank expression in `O(n log n)`.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ns;
use crate::rdf::{Graph, Iri, Literal, Term};
use crate::vocab::{record_evaluation, BiasEvaluationRecord, VocabError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("empty node id")]
    EmptyNodeId,
    #[error("edge target `{0}` is not in the node universe")]
    OutsideUniverse(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("gini of an empty list")]
    EmptyValues,
    #[error("value {0} is negative or not finite")]
    InvalidValue(f64),
    #[error("no interactions to measure")]
    EmptyInput,
    #[error("{0} is not a registered measure")]
    Unregistered(Iri),
    #[error("{0} does not measure any bias")]
    NoBias(Iri),
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

/// Directed interactions, e.g. user → item.
///
/// The universe lists every node whose in-degree is reported. Edge targets
/// must belong to it; sources need not.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeList {
    edges: Vec<(String, String)>,
    universe: Option<Vec<String>>,
}

impl EdgeList {
    pub fn new(edges: Vec<(String, String)>, universe: Option<Vec<String>>) -> Result<Self, MeasureError> {
        if edges.iter().any(|(s, t)| s.is_empty() || t.is_empty()) {
            return Err(MeasureError::EmptyNodeId);
        }
        if let Some(u) = &universe {
            if u.iter().any(String::is_empty) {
                return Err(MeasureError::EmptyNodeId);
            }
            let known: std::collections::BTreeSet<&str> = u.iter().map(String::as_str).collect();
            if let Some((_, t)) = edges.iter().find(|(_, t)| !known.contains(t.as_str())) {
                return Err(MeasureError::OutsideUniverse(t.clone()));
            }
        }
        Ok(EdgeList { edges, universe })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, MeasureError> {
        EdgeList::new(pairs.into_iter().map(|(s, t)| (s.to_owned(), t.to_owned())).collect(), None)
    }

    pub fn with_universe(self, universe: Vec<String>) -> Result<Self, MeasureError> {
        EdgeList::new(self.edges, Some(universe))
    }

    /// `source<TAB>target` per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, MeasureError> {
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            let [s, t] = fields[..] else {
                return Err(MeasureError::Parse {
                    line: i + 1,
                    message: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            };
            if s.is_empty() || t.is_empty() {
                return Err(MeasureError::Parse { line: i + 1, message: "empty node id".into() });
            }
            edges.push((s.to_owned(), t.to_owned()));
        }
        EdgeList::new(edges, None)
    }

    /// One node id per line; blank lines and `#` comments are skipped.
    pub fn parse_universe(text: &str) -> Vec<String> {
        text.lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect()
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn universe(&self) -> Option<&[String]> {
        self.universe.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// SHA-256 over the edges in order, then the universe if given.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (s, t) in &self.edges {
            h.update(format!("{s}\t{t}\n").as_bytes());
        }
        if let Some(u) = &self.universe {
            h.update(b"#universe\n");
            for n in u {
                h.update(format!("{n}\n").as_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DegreeDistribution {
    pub counts: BTreeMap<String, u64>,
}

impl DegreeDistribution {
    pub fn values(&self) -> Vec<f64> {
        self.counts.values().map(|&c| c as f64).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Incoming edge counts per node. Parallel edges count separately; nodes of
/// the universe (or, without one, every edge endpoint) start at zero.
pub fn in_degree_distribution(e: &EdgeList) -> DegreeDistribution {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    match &e.universe {
        Some(u) => counts.extend(u.iter().map(|n| (n.clone(), 0))),
        None => {
            for (s, t) in &e.edges {
                counts.entry(s.clone()).or_insert(0);
                counts.entry(t.clone()).or_insert(0);
            }
        }
    }
    for (_, t) in &e.edges {
        *counts.get_mut(t).expect("targets are in the universe") += 1;
    }
    DegreeDistribution { counts }
}

/// Population Gini coefficient. All-zero input gives 0.
pub fn gini(values: &[f64]) -> Result<f64, MeasureError> {
    if values.is_empty() {
        return Err(MeasureError::EmptyValues);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(MeasureError::InvalidValue(bad));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let n = sorted.len() as f64;
    let weighted: f64 = sorted.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
    let g = 2.0 * weighted / (n * total) - (n + 1.0) / n;
    Ok(g.clamp(0.0, (n - 1.0) / n))
}

/// A computed measure value and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult {
    pub measure: Iri,
    pub value: f64,
    pub input_digest: String,
    pub n: usize,
}

/// Computes a value and population size from interaction data.
pub type MeasureFn = fn(&EdgeList) -> Result<(f64, usize), MeasureError>;

fn gini_in_degree(e: &EdgeList) -> Result<(f64, usize), MeasureError> {
    let values = in_degree_distribution(e).values();
    Ok((gini(&values)?, values.len()))
}

#[derive(Debug, Clone)]
pub struct MeasureRegistry {
    measures: BTreeMap<Iri, MeasureFn>,
}

impl MeasureRegistry {
    pub fn empty() -> Self {
        MeasureRegistry { measures: BTreeMap::new() }
    }

    /// `bias:GiniInDegree` → Gini of the in-degree distribution.
    pub fn seed() -> Self {
        let mut r = MeasureRegistry::empty();
        r.register(Iri::new(ns::bias::GINI_IN_DEGREE).expect("valid IRI"), gini_in_degree);
        r
    }

    pub fn register(&mut self, measure: Iri, f: MeasureFn) {
        self.measures.insert(measure, f);
    }

    pub fn contains(&self, measure: &Iri) -> bool {
        self.measures.contains_key(measure)
    }

    pub fn measures(&self) -> impl Iterator<Item = &Iri> {
        self.measures.keys()
    }

    pub fn compute(&self, measure: &Iri, data: &EdgeList) -> Result<MeasureResult, MeasureError> {
        let f = self.measures.get(measure).ok_or_else(|| MeasureError::Unregistered(measure.clone()))?;
        if data.is_empty() {
            return Err(MeasureError::EmptyInput);
        }
        let (value, n) = f(data)?;
        Ok(MeasureResult { measure: measure.clone(), value, input_digest: data.digest(), n })
    }
}

impl Default for MeasureRegistry {
    fn default() -> Self {
        MeasureRegistry::seed()
    }
}

/// Computes the measure, records a `bias:BiasEvaluation` for the bias it
/// measures and notes the node universe and input digest in an `rdfs:comment`.
pub fn evaluate_measure(
    g: &mut Graph,
    registry: &MeasureRegistry,
    measure: &Iri,
    data: &EdgeList,
    dataset: &Iri,
    timestamp: DateTime<Utc>,
) -> Result<(BiasEvaluationRecord, Iri, MeasureResult), MeasureError> {
    let result = registry.compute(measure, data)?;
    let measures = Iri::new(ns::bias::MEASURES).expect("valid IRI");
    let bias = g
        .objects(&Term::Iri(measure.clone()), &measures)
        .filter_map(Term::as_iri)
        .min()
        .cloned()
        .ok_or_else(|| MeasureError::NoBias(measure.clone()))?;
    let record = BiasEvaluationRecord::new(bias, measure.clone(), result.value, dataset.clone(), timestamp);
    let id = record_evaluation(g, &record)?;
    let universe = match data.universe() {
        Some(u) => format!("explicit universe of {} nodes", u.len()),
        None => format!("universe of all {} edge endpoints", result.n),
    };
    let note = format!("Computed over {} edges, {universe}; input sha256 {}", data.edges().len(), result.input_digest);
    g.add(id.clone(), Iri::new(ns::rdfs::COMMENT).expect("valid IRI"), Literal::string(note)).expect("IRI subject");
    Ok((record, id, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::seed_graph;
    use chrono::TimeZone;
    use proptest::prelude::*;

    // Mean absolute difference over all ordered pairs.
    fn pairwise(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if mean == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for a in xs {
            for b in xs {
                s += (a - b).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn oracle_values() {
        assert_eq!(pairwise(&[0.0, 0.0, 0.0, 4.0]), 0.75);
        assert_eq!(pairwise(&[1.0, 2.0, 3.0, 4.0]), 0.25);
        assert_eq!(pairwise(&[3.0, 1.0]), 0.25);
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[2.0, 2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 4.0]).unwrap() - 0.75).abs() < 1e-12);
        assert!((gini(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(gini(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(gini(&[5.0]).unwrap(), 0.0);
    }

    #[test]
    fn gini_errors() {
        assert_eq!(gini(&[]), Err(MeasureError::EmptyValues));
        assert_eq!(gini(&[1.0, -1.0]), Err(MeasureError::InvalidValue(-1.0)));
        assert!(matches!(gini(&[f64::NAN]), Err(MeasureError::InvalidValue(_))));
    }

    fn dist(e: &EdgeList) -> Vec<(String, u64)> {
        in_degree_distribution(e).counts.into_iter().collect()
    }

    fn counts(pairs: &[(&str, u64)]) -> Vec<(String, u64)> {
        pairs.iter().map(|(k, c)| (k.to_string(), *c)).collect()
    }

    #[test]
    fn in_degree_examples() {
        let e = EdgeList::from_pairs([("a", "b"), ("c", "b"), ("a", "c")]).unwrap();
        assert_eq!(dist(&e), counts(&[("a", 0), ("b", 2), ("c", 1)]));
        let e = EdgeList::new(vec![], Some(vec!["a".into(), "b".into()])).unwrap();
        assert_eq!(dist(&e), counts(&[("a", 0), ("b", 0)]));
        let e = EdgeList::from_pairs([("a", "b"), ("a", "b")]).unwrap();
        assert_eq!(dist(&e), counts(&[("a", 0), ("b", 2)]));
    }

    #[test]
    fn edge_list_validation() {
        assert_eq!(EdgeList::from_pairs([("a", "")]), Err(MeasureError::EmptyNodeId));
        let e = EdgeList::from_pairs([("u", "x")]).unwrap();
        assert_eq!(e.clone().with_universe(vec!["y".into()]), Err(MeasureError::OutsideUniverse("x".into())));
        assert!(e.with_universe(vec!["x".into()]).is_ok());
    }

    #[test]
    fn edge_file_format() {
        let e = EdgeList::parse("# user\titem\nu1\ti1\n\nu2\ti1\r\n").unwrap();
        assert_eq!(e.edges(), &[("u1".to_owned(), "i1".to_owned()), ("u2".to_owned(), "i1".to_owned())]);
        assert_eq!(
            EdgeList::parse("u1 i1\n"),
            Err(MeasureError::Parse { line: 1, message: "expected 2 tab-separated fields, found 1".into() })
        );
        assert!(matches!(EdgeList::parse("a\tb\n\tb\n"), Err(MeasureError::Parse { line: 2, .. })));
        assert_eq!(EdgeList::parse_universe("# items\ni1\n\ni2\n"), vec!["i1", "i2"]);
    }

    fn fixture() -> EdgeList {
        EdgeList::from_pairs([("u1", "item1"), ("u2", "item1"), ("u3", "item1"), ("u4", "item2")])
            .unwrap()
            .with_universe(vec!["item1".into(), "item2".into()])
            .unwrap()
    }

    fn ts() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 3, 1, 9, 30, 0).unwrap()
    }

    #[test]
    fn evaluate_gini_fixture() {
        let mut g = seed_graph();
        let gini_iri = Iri::new(ns::bias::GINI_IN_DEGREE).unwrap();
        let ds = Iri::new("http://example.org/interactions").unwrap();
        let (rec, id, result) =
            evaluate_measure(&mut g, &MeasureRegistry::seed(), &gini_iri, &fixture(), &ds, ts()).unwrap();
        assert_eq!(result.value, pairwise(&[3.0, 1.0]));
        assert_eq!(result.value, 0.25);
        assert_eq!(result.n, 2);
        assert_eq!(rec.bias.as_str(), ns::bias::POPULARITY_BIAS);
        let subject = Term::Iri(id);
        let comment =
            g.objects(&subject, &Iri::new(ns::rdfs::COMMENT).unwrap()).next().unwrap().as_literal().unwrap().clone();
        assert!(comment.lexical().contains("explicit universe of 2 nodes"));
        assert!(comment.lexical().contains(&result.input_digest));
    }

    #[test]
    fn evaluate_default_universe_and_uniform() {
        let mut g = seed_graph();
        let gini_iri = Iri::new(ns::bias::GINI_IN_DEGREE).unwrap();
        let ds = Iri::new("http://example.org/d").unwrap();
        let e = EdgeList::from_pairs([("u1", "item1"), ("u2", "item1"), ("u3", "item1"), ("u4", "item2")]).unwrap();
        let (_, _, r) = evaluate_measure(&mut g, &MeasureRegistry::seed(), &gini_iri, &e, &ds, ts()).unwrap();
        assert!((r.value - pairwise(&[0.0, 0.0, 0.0, 0.0, 3.0, 1.0])).abs() < 1e-12);
        assert_eq!(r.n, 6);

        let uniform = EdgeList::from_pairs([("a", "b"), ("b", "a")]).unwrap();
        let before = g.len();
        let (rec, _, r) = evaluate_measure(&mut g, &MeasureRegistry::seed(), &gini_iri, &uniform, &ds, ts()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(rec.value, 0.0);
        assert!(g.len() > before);
    }

    #[test]
    fn evaluate_errors() {
        let mut g = seed_graph();
        let ds = Iri::new("http://example.org/d").unwrap();
        let other = Iri::new(ns::bias::POPULARITY_MEASURE_2).unwrap();
        assert_eq!(
            evaluate_measure(&mut g, &MeasureRegistry::seed(), &other, &fixture(), &ds, ts()).unwrap_err(),
            MeasureError::Unregistered(other)
        );
        let gini_iri = Iri::new(ns::bias::GINI_IN_DEGREE).unwrap();
        assert_eq!(
            evaluate_measure(&mut g, &MeasureRegistry::seed(), &gini_iri, &EdgeList::default(), &ds, ts()).unwrap_err(),
            MeasureError::EmptyInput
        );
        let mut bare = Graph::new();
        assert_eq!(
            evaluate_measure(&mut bare, &MeasureRegistry::seed(), &gini_iri, &fixture(), &ds, ts()).unwrap_err(),
            MeasureError::NoBias(gini_iri)
        );
    }

    #[test]
    fn digest_tracks_content() {
        let a = fixture();
        let b = EdgeList::from_pairs([("u1", "item1")]).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), fixture().digest());
        assert_eq!(a.digest().len(), 64);
    }

    fn values() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0u32..50, 1..=200).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn matches_pairwise_oracle(xs in values()) {
            prop_assert!((gini(&xs).unwrap() - pairwise(&xs)).abs() < 1e-9);
        }

        #[test]
        fn scale_invariant(xs in values(), k in 1u32..1000) {
            let scaled: Vec<f64> = xs.iter().map(|x| x * f64::from(k) / 7.0).collect();
            prop_assert!((gini(&scaled).unwrap() - gini(&xs).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn permutation_invariant(xs in values().prop_shuffle()) {
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assert_eq!(gini(&xs).unwrap(), gini(&sorted).unwrap());
        }

        #[test]
        fn bounded(xs in values()) {
            let n = xs.len() as f64;
            let g = gini(&xs).unwrap();
            prop_assert!((0.0..=(n - 1.0) / n).contains(&g));
        }

        #[test]
        fn one_hot_attains_bound(n in 1usize..=200, at in 0usize..200, mass in 1u32..1000) {
            let mut xs = vec![0.0; n];
            xs[at % n] = f64::from(mass);
            let nf = n as f64;
            prop_assert!((gini(&xs).unwrap() - (nf - 1.0) / nf).abs() < 1e-12);
        }

        #[test]
        fn replication(xs in prop::collection::vec(0u32..50, 1..=40)) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            let base = gini(&xs).unwrap();
            let mut last = f64::INFINITY;
            for m in 1..=5 {
                let rep: Vec<f64> = xs.iter().copied().cycle().take(xs.len() * m).collect();
                let gap = (gini(&rep).unwrap() - base).abs();
                prop_assert!((gini(&rep).unwrap() - pairwise(&rep)).abs() < 1e-9);
                prop_assert!(gap <= last + 1e-12);
                last = gap;
            }
        }

        #[test]
        fn in_degree_conserves_edges(pairs in prop::collection::vec((0u8..6, 0u8..6), 0..40)) {
            let edges: Vec<(String, String)> = pairs.iter().map(|(s, t)| (format!("n{s}"), format!("n{t}"))).collect();
            let e = EdgeList::new(edges.clone(), None).unwrap();
            prop_assert_eq!(in_degree_distribution(&e).total(), edges.len() as u64);
        }
    }
}
