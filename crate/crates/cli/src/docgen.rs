//! Human-readable documentation of a bias, measure or other resource,
//! assembled only from triples of the inferred graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use biasdoc_core::ns;
use biasdoc_core::rdf::{format_term, Graph, Iri, Term, Triple};
use biasdoc_core::reasoner::InferredGraph;
use biasdoc_core::vocab::preferred_literal;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocgenError {
    #[error("unknown subject {0}")]
    UnknownSubject(Iri),
}

/// One rendered fact with the triples it was read from.
///
/// Depth 0 renders as a paragraph, deeper lines as nested list items.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub text: String,
    pub depth: usize,
    pub support: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub heading: String,
    pub lines: Vec<Line>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentationBundle {
    pub subject: Iri,
    pub title: String,
    pub sections: Vec<Section>,
}

pub const SECTION_ORDER: [&str; 6] =
    ["Definition", "Bias Category", "Associated Applications", "Aligned Harms", "Measures", "Recorded Evaluations"];

impl DocumentationBundle {
    pub fn section(&self, heading: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.heading == heading)
    }

    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for s in &self.sections {
            let _ = write!(out, "\n## {}\n\n", s.heading);
            for l in &s.lines {
                match l.depth {
                    0 => out.push_str(&l.text),
                    d => {
                        out.push_str(&"  ".repeat(d - 1));
                        out.push_str("- ");
                        out.push_str(&l.text);
                    }
                }
                out.push('\n');
            }
        }
        out
    }
}

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("vocabulary IRIs are valid")
}

fn triple(s: &Term, p: &str, o: &Term) -> Triple {
    Triple::new(s.clone(), iri(p), o.clone()).expect("subject is not a literal")
}

struct Ctx<'a> {
    g: &'a Graph,
    prefixes: &'a BTreeMap<String, Iri>,
}

impl Ctx<'_> {
    fn compact(&self, t: &Term) -> String {
        format_term(t, self.prefixes)
    }

    /// `Label (prefix:name)`, or the bare name when unlabelled.
    fn name(&self, t: &Term) -> (String, Vec<Triple>) {
        match preferred_literal(self.g, t, &iri(ns::rdfs::LABEL)) {
            Some(l) => {
                let text = format!("{} ({})", l.lexical(), self.compact(t));
                (text, vec![triple(t, ns::rdfs::LABEL, &Term::Literal(l))])
            }
            None => (self.compact(t), Vec::new()),
        }
    }

    fn objects(&self, s: &Term, p: &str) -> BTreeSet<Term> {
        self.g.objects(s, &iri(p)).cloned().collect()
    }

    fn subjects(&self, p: &str, o: &Term) -> BTreeSet<Term> {
        self.g.subjects(&iri(p), o).cloned().collect()
    }

    fn literal_line(&self, s: &Term, p: &str, prefix: &str, depth: usize) -> Option<Line> {
        let l = preferred_literal(self.g, s, &iri(p))?;
        Some(Line { text: format!("{prefix}{}", l.lexical()), depth, support: vec![triple(s, p, &Term::Literal(l))] })
    }

    /// Every maximal path up the asserted subclass hierarchy.
    fn chains(&self, base: &Graph, start: &Term) -> Vec<Vec<Term>> {
        fn walk(base: &Graph, sc: &Iri, at: &Term, path: &mut Vec<Term>, out: &mut Vec<Vec<Term>>) {
            let parents: BTreeSet<&Term> = base.objects(at, sc).filter(|p| !path.contains(p) && *p != at).collect();
            if parents.is_empty() {
                if path.len() > 1 {
                    out.push(path[1..].to_vec());
                }
                return;
            }
            for p in parents {
                path.push(p.clone());
                walk(base, sc, p, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(base, &iri(ns::rdfs::SUB_CLASS_OF), start, &mut vec![start.clone()], &mut out);
        out
    }
}

/// Collects the documented facts about `subject`.
pub fn docgen(ig: &InferredGraph, subject: &Iri) -> Result<DocumentationBundle, DocgenError> {
    let g = ig.closure();
    let s = Term::Iri(subject.clone());
    if !g.mentions(&s) {
        return Err(DocgenError::UnknownSubject(subject.clone()));
    }
    let cx = Ctx { g, prefixes: ig.base().prefixes() };
    let mut sections = Vec::new();
    let mut push = |heading: &str, lines: Vec<Line>| {
        if !lines.is_empty() {
            sections.push(Section { heading: heading.to_owned(), lines });
        }
    };

    push("Definition", cx.literal_line(&s, ns::skos::DEFINITION, "", 0).into_iter().collect());

    let mut category = Vec::new();
    for chain in cx.chains(ig.base(), &s) {
        let mut support = Vec::new();
        let mut names = Vec::new();
        let mut below = s.clone();
        for c in &chain {
            support.push(triple(&below, ns::rdfs::SUB_CLASS_OF, c));
            let (n, labels) = cx.name(c);
            names.push(n);
            support.extend(labels);
            below = c.clone();
        }
        category.push(Line { text: names.join(" > "), depth: 1, support });
    }
    push("Bias Category", category);

    for (heading, p) in
        [("Associated Applications", ns::bias::IS_ASSOCIATED_WITH), ("Aligned Harms", ns::bias::IS_ALIGNED_WITH)]
    {
        let lines = cx
            .objects(&s, p)
            .iter()
            .map(|o| {
                let (text, labels) = cx.name(o);
                let mut support = vec![triple(&s, p, o)];
                support.extend(labels);
                Line { text, depth: 1, support }
            })
            .collect();
        push(heading, lines);
    }

    let mut measures: BTreeMap<Term, Vec<Triple>> = BTreeMap::new();
    for m in cx.objects(&s, ns::bias::HAS_BIAS_MEASURE) {
        measures.entry(m.clone()).or_default().push(triple(&s, ns::bias::HAS_BIAS_MEASURE, &m));
    }
    for m in cx.subjects(ns::bias::MEASURES, &s) {
        measures.entry(m.clone()).or_default().push(triple(&m, ns::bias::MEASURES, &s));
    }
    let mut lines = Vec::new();
    for (m, mut support) in measures {
        let (text, labels) = cx.name(&m);
        support.extend(labels);
        lines.push(Line { text, depth: 1, support });
        lines.extend(cx.literal_line(&m, ns::skos::DEFINITION, "definition: ", 2));
        lines.extend(cx.literal_line(&m, ns::bias::FORMALIZATION, "formalization: ", 2));
    }
    push("Measures", lines);

    let evaluation = Term::Iri(iri(ns::bias::BIAS_EVALUATION));
    let mut evaluations: BTreeSet<Term> = cx.subjects(ns::bias::EVALUATES_BIAS, &s);
    evaluations.extend(cx.subjects(ns::bias::USES_MEASURE, &s));
    let mut lines = Vec::new();
    for e in evaluations.iter().filter(|e| g.contains(&triple(e, ns::rdf::TYPE, &evaluation))) {
        lines.push(Line { text: cx.compact(e), depth: 1, support: vec![triple(e, ns::rdf::TYPE, &evaluation)] });
        for (label, p) in [
            ("bias", ns::bias::EVALUATES_BIAS),
            ("measure", ns::bias::USES_MEASURE),
            ("value", ns::bias::HAS_VALUE),
            ("dataset", ns::bias::ON_DATASET),
            ("task", ns::bias::FOR_TASK),
            ("application", ns::bias::IN_APPLICATION),
            ("document", ns::bias::DOCUMENTED_IN),
            ("evaluated at", ns::bias::EVALUATED_AT),
        ] {
            for o in cx.objects(e, p) {
                let (shown, mut support) = match &o {
                    Term::Literal(l) => (l.lexical().to_owned(), Vec::new()),
                    _ => cx.name(&o),
                };
                support.insert(0, triple(e, p, &o));
                lines.push(Line { text: format!("{label}: {shown}"), depth: 2, support });
            }
        }
    }
    push("Recorded Evaluations", lines);

    let (title, _) = cx.name(&s);
    Ok(DocumentationBundle { subject: subject.clone(), title, sections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use biasdoc_core::reasoner::{materialize, RuleSet};
    use biasdoc_core::vocab::seed_graph;

    fn seed() -> InferredGraph {
        materialize(&seed_graph(), &RuleSet::rdfs_lite())
    }

    #[test]
    fn popularity_bias_sections() {
        let doc = docgen(&seed(), &iri(ns::bias::POPULARITY_BIAS)).unwrap();
        let headings: Vec<&str> = doc.sections.iter().map(|s| s.heading.as_str()).collect();
        assert_eq!(headings, ["Definition", "Bias Category", "Associated Applications", "Aligned Harms", "Measures"]);
        assert_eq!(doc.title, "Popularity Bias (bias:PopularityBias)");
        let text = doc.render();
        assert!(text.contains("\n\nWhen collaborative filtering recommenders emphasize popular items"));
        assert!(
            text.contains("- Statistical/Computational Bias (bias:StatisticalComputationalBias) > Bias (bias:Bias)\n")
        );
        assert!(text.contains("## Associated Applications\n\n- Recommender System (bias:RecommenderSystem)\n"));
        assert!(text.contains("## Aligned Harms\n\n- Erasure (bias:Erasure)\n"));
        let measures = doc.section("Measures").unwrap();
        assert_eq!(measures.lines.iter().filter(|l| l.depth == 1).count(), 3);
        assert!(text.contains("  - formalization: G = sum_i"));
    }

    #[test]
    fn every_line_is_supported() {
        let ig = seed();
        for subject in
            [ns::bias::POPULARITY_BIAS, ns::bias::GINI_IN_DEGREE, ns::bias::BIAS, ns::bias::RECOMMENDER_SYSTEM]
        {
            let doc = docgen(&ig, &iri(subject)).unwrap();
            for l in doc.sections.iter().flat_map(|s| &s.lines) {
                assert!(!l.support.is_empty(), "{}", l.text);
                for t in &l.support {
                    assert!(ig.closure().contains(t), "{t:?}");
                }
            }
        }
    }

    #[test]
    fn section_order_is_fixed() {
        let doc = docgen(&seed(), &iri(ns::bias::GINI_IN_DEGREE)).unwrap();
        let positions: Vec<usize> =
            doc.sections.iter().map(|s| SECTION_ORDER.iter().position(|h| *h == s.heading).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unknown_subject() {
        let missing = iri("http://example.org/Nothing");
        assert_eq!(docgen(&seed(), &missing), Err(DocgenError::UnknownSubject(missing)));
    }

    #[test]
    fn instance_without_facts_has_no_sections() {
        let doc = docgen(&seed(), &iri(ns::bias::ERASURE)).unwrap();
        assert!(doc.sections.is_empty());
        assert_eq!(doc.render(), "# Erasure (bias:Erasure)\n");
    }
}
