use std::collections::BTreeMap;

use biasdoc_core::measures::{evaluate_measure, EdgeList, MeasureRegistry};
use biasdoc_core::ns;
use biasdoc_core::query::{ask_competency, Value};
use biasdoc_core::rdf::{isomorphic, parse_turtle, serialize_turtle, Iri, Literal, Term};
use biasdoc_core::reasoner::{materialize, RuleSet};
use biasdoc_core::validate::{check_consistency, quality_indicators, scan_pitfalls, validate_instances};
use biasdoc_core::vocab::{
    register_bias_class, register_measure, seed_graph, ClassDef, ManifestSidecar, NamespaceTable, VocabManifest,
    SEED_MANIFEST,
};
use chrono::{TimeZone, Utc};

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

#[test]
fn extend_measure_query_validate() {
    let mut g = seed_graph();
    let exposure = register_bias_class(
        &mut g,
        &ClassDef::new(iri(&format!("{}ExposureBias", ns::bias::NS)), "Exposure Bias")
            .with_definition(Literal::lang("Items shown more often collect more interactions.", "en").unwrap())
            .with_parent(iri(ns::bias::STATISTICAL_BIAS)),
    )
    .unwrap();
    let measure = register_measure(
        &mut g,
        &ClassDef::new(iri(&format!("{}ExposureGini", ns::bias::NS)), "Exposure Gini")
            .with_definition(Literal::lang("Gini coefficient of exposure counts.", "en").unwrap()),
        &exposure,
        Literal::lang("G over exposure counts", "en").unwrap(),
    )
    .unwrap();

    let mut registry = MeasureRegistry::seed();
    registry.register(measure.clone(), |e| Ok((e.edges().len() as f64, e.edges().len())));
    let edges = EdgeList::parse("u1\ti1\nu2\ti1\nu2\ti2\n").unwrap();
    let ts = Utc.with_ymd_and_hms(2024, 1, 2, 3, 4, 5).unwrap();
    let dataset = iri("http://example.org/log");
    let (rec, _, _) = evaluate_measure(&mut g, &registry, &measure, &edges, &dataset, ts).unwrap();
    assert_eq!((rec.bias.clone(), rec.value), (exposure.clone(), 3.0));
    let gini = iri(ns::bias::GINI_IN_DEGREE);
    let (rec, _, _) = evaluate_measure(&mut g, &registry, &gini, &edges, &dataset, ts).unwrap();
    assert_eq!(rec.bias.as_str(), ns::bias::POPULARITY_BIAS);

    let reparsed = parse_turtle(&serialize_turtle(&g)).unwrap();
    assert!(isomorphic(&g, &reparsed));

    let ig = materialize(&reparsed, &RuleSet::rdfs_lite());
    let bindings = BTreeMap::from([("bias".to_owned(), Term::Iri(exposure.clone()))]);
    let table = ask_competency(&ig, "Q4.1", &bindings).unwrap();
    assert_eq!(table.rows, vec![vec![Value::Term(Term::Iri(exposure)), Value::Count(1)]]);

    let manifest = VocabManifest::from_graph(&reparsed, &NamespaceTable::default());
    let findings =
        validate_instances(&ig, &manifest).merge(check_consistency(&ig)).merge(scan_pitfalls(&reparsed, &manifest));
    assert!(findings.ok(), "{}", findings.to_tsv());
    let unused: Vec<_> = findings.with_code("unused-property").collect();
    assert_eq!(unused.len(), 3, "{unused:?}");

    let quality = quality_indicators(&reparsed, &manifest, "urn:test").unwrap();
    assert_eq!(quality.completeness.total_classes, quality.completeness.defined_classes);
    assert_eq!(quality.completeness.total_classes, 7);
}

#[test]
fn shipped_manifest_matches_seed() {
    let counted = VocabManifest::from_graph(&seed_graph(), &NamespaceTable::default()).to_sidecar();
    assert_eq!(ManifestSidecar::parse(SEED_MANIFEST).unwrap(), counted);
}
