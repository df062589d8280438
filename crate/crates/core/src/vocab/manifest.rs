use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{iri, preferred_literal, seed_graph, SEED_MANIFEST};
use crate::ns;
use crate::rdf::{Graph, Iri, Literal, Term};

/// A class declaration as the registration API and the manifest see it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub iri: Iri,
    pub label: String,
    pub definition: Option<Literal>,
    pub parents: Vec<Iri>,
    pub equivalents: Vec<Iri>,
    pub source: Option<String>,
}

impl ClassDef {
    pub fn new(iri: Iri, label: impl Into<String>) -> Self {
        ClassDef {
            iri,
            label: label.into(),
            definition: None,
            parents: Vec::new(),
            equivalents: Vec::new(),
            source: None,
        }
    }

    pub fn with_definition(mut self, definition: Literal) -> Self {
        self.definition = Some(definition);
        self
    }

    pub fn with_parent(mut self, parent: Iri) -> Self {
        self.parents.push(parent);
        self
    }

    pub fn with_equivalent(mut self, other: Iri) -> Self {
        self.equivalents.push(other);
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PropertyKind {
    Object,
    Data,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDef {
    pub iri: Iri,
    pub kind: PropertyKind,
    pub domain: Option<Iri>,
    pub range: Option<Iri>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NamespaceKind {
    External,
    Proprietary,
}

impl NamespaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NamespaceKind::External => "external",
            NamespaceKind::Proprietary => "proprietary",
        }
    }
}

/// Namespace prefixes and their classification; lookups use the longest matching prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamespaceTable(BTreeMap<String, NamespaceKind>);

impl NamespaceTable {
    pub fn empty() -> Self {
        NamespaceTable(BTreeMap::new())
    }

    pub fn insert(&mut self, prefix: impl Into<String>, kind: NamespaceKind) {
        self.0.insert(prefix.into(), kind);
    }

    pub fn classify(&self, iri: &str) -> Option<(&str, NamespaceKind)> {
        self.0
            .iter()
            .filter(|(ns, _)| iri.starts_with(ns.as_str()))
            .max_by_key(|(ns, _)| ns.len())
            .map(|(ns, k)| (ns.as_str(), *k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, NamespaceKind)> {
        self.0.iter().map(|(ns, k)| (ns.as_str(), *k))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for NamespaceTable {
    fn default() -> Self {
        let mut t = NamespaceTable::empty();
        for ext in [
            ns::rdf::NS,
            ns::rdfs::NS,
            ns::owl::NS,
            ns::xsd::NS,
            ns::skos::NS,
            ns::foaf::NS,
            ns::dcat::NS,
            ns::mls::NS,
            ns::prov::NS,
            ns::dqv::NS,
            ns::dcterms::NS,
        ] {
            t.insert(ext, NamespaceKind::External);
        }
        t.insert(ns::bias::NS, NamespaceKind::Proprietary);
        t
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub classes: usize,
    pub object_properties: usize,
    pub data_properties: usize,
}

/// The declared vocabulary: classes, properties and namespace classification.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabManifest {
    pub classes: Vec<ClassDef>,
    pub properties: Vec<PropertyDef>,
    pub namespaces: NamespaceTable,
    pub counts: Counts,
}

fn subjects_typed(g: &Graph, class: &str) -> Vec<Iri> {
    let mut out: Vec<Iri> =
        g.subjects(&iri(ns::rdf::TYPE), &Term::Iri(iri(class))).filter_map(Term::as_iri).cloned().collect();
    out.sort();
    out.dedup();
    out
}

fn first_iri(g: &Graph, s: &Iri, p: &str) -> Option<Iri> {
    g.objects(&Term::Iri(s.clone()), &iri(p)).filter_map(Term::as_iri).min().cloned()
}

fn all_iris(g: &Graph, s: &Iri, p: &str) -> Vec<Iri> {
    let mut v: Vec<Iri> = g.objects(&Term::Iri(s.clone()), &iri(p)).filter_map(Term::as_iri).cloned().collect();
    v.sort();
    v
}

impl VocabManifest {
    /// Reads the declarations present in `g`.
    pub fn from_graph(g: &Graph, namespaces: &NamespaceTable) -> Self {
        let mut class_iris = subjects_typed(g, ns::owl::CLASS);
        class_iris.extend(subjects_typed(g, ns::rdfs::CLASS));
        class_iris.sort();
        class_iris.dedup();
        let classes: Vec<ClassDef> = class_iris
            .into_iter()
            .map(|c| {
                let subject = Term::Iri(c.clone());
                let label = preferred_literal(g, &subject, &iri(ns::rdfs::LABEL))
                    .map(|l| l.lexical().to_owned())
                    .unwrap_or_else(|| c.local_name().to_owned());
                ClassDef {
                    definition: super::lookup_definition(g, &c),
                    parents: all_iris(g, &c, ns::rdfs::SUB_CLASS_OF),
                    equivalents: all_iris(g, &c, ns::owl::EQUIVALENT_CLASS),
                    source: preferred_literal(g, &subject, &iri(ns::dcterms::SOURCE)).map(|l| l.lexical().to_owned()),
                    label,
                    iri: c,
                }
            })
            .collect();
        let mut properties = Vec::new();
        for (kind, decl) in
            [(PropertyKind::Object, ns::owl::OBJECT_PROPERTY), (PropertyKind::Data, ns::owl::DATATYPE_PROPERTY)]
        {
            for p in subjects_typed(g, decl) {
                properties.push(PropertyDef {
                    domain: first_iri(g, &p, ns::rdfs::DOMAIN),
                    range: first_iri(g, &p, ns::rdfs::RANGE),
                    iri: p,
                    kind,
                });
            }
        }
        let counts = Counts {
            classes: classes.len(),
            object_properties: properties.iter().filter(|p| p.kind == PropertyKind::Object).count(),
            data_properties: properties.iter().filter(|p| p.kind == PropertyKind::Data).count(),
        };
        VocabManifest { classes, properties, namespaces: namespaces.clone(), counts }
    }

    /// The manifest of the built-in seed, with the namespace table from its sidecar.
    pub fn seed() -> Self {
        let sidecar = ManifestSidecar::parse(SEED_MANIFEST).expect("embedded manifest parses");
        VocabManifest::from_graph(&seed_graph(), &sidecar.namespaces)
    }

    pub fn classify(&self, iri: &Iri) -> Option<NamespaceKind> {
        self.namespaces.classify(iri.as_str()).map(|(_, k)| k)
    }

    pub fn class(&self, iri: &Iri) -> Option<&ClassDef> {
        self.classes.iter().find(|c| &c.iri == iri)
    }

    pub fn property(&self, iri: &Iri) -> Option<&PropertyDef> {
        self.properties.iter().find(|p| &p.iri == iri)
    }

    /// Declared class and property IRIs that fall in no classified namespace.
    pub fn unclassified(&self) -> Vec<Iri> {
        self.classes
            .iter()
            .map(|c| &c.iri)
            .chain(self.properties.iter().map(|p| &p.iri))
            .filter(|i| self.classify(i).is_none())
            .cloned()
            .collect()
    }

    pub fn to_sidecar(&self) -> ManifestSidecar {
        let props = |k: PropertyKind| self.properties.iter().filter(|p| p.kind == k).map(|p| p.iri.clone()).collect();
        ManifestSidecar {
            counts: self.counts,
            namespaces: self.namespaces.clone(),
            classes: self.classes.iter().map(|c| c.iri.clone()).collect(),
            object_properties: props(PropertyKind::Object),
            data_properties: props(PropertyKind::Data),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SidecarError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {message}")]
    BadValue { line: usize, message: String },
}

/// Key/value text form of a manifest: counts, namespace classes and IRI lists.
///
/// ```text
/// classCount = 2
/// namespace = https://bias-project.x/bias/ proprietary
/// class = https://bias-project.x/bias/Bias
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestSidecar {
    pub counts: Counts,
    pub namespaces: NamespaceTable,
    pub classes: Vec<Iri>,
    pub object_properties: Vec<Iri>,
    pub data_properties: Vec<Iri>,
}

impl ManifestSidecar {
    pub fn parse(text: &str) -> Result<Self, SidecarError> {
        let mut out = ManifestSidecar {
            counts: Counts::default(),
            namespaces: NamespaceTable::empty(),
            classes: Vec::new(),
            object_properties: Vec::new(),
            data_properties: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or(SidecarError::Malformed { line })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |message: String| SidecarError::BadValue { line, message };
            let count = || value.parse::<usize>().map_err(|e| bad(e.to_string()));
            let one_iri = || Iri::new(value).map_err(|e| bad(e.to_string()));
            match key {
                "classCount" => out.counts.classes = count()?,
                "objectPropertyCount" => out.counts.object_properties = count()?,
                "dataPropertyCount" => out.counts.data_properties = count()?,
                "class" => out.classes.push(one_iri()?),
                "objectProperty" => out.object_properties.push(one_iri()?),
                "dataProperty" => out.data_properties.push(one_iri()?),
                "namespace" => {
                    let (prefix, kind) = value
                        .rsplit_once(char::is_whitespace)
                        .ok_or_else(|| bad("expected `<prefix> <kind>`".into()))?;
                    let kind = match kind {
                        "external" => NamespaceKind::External,
                        "proprietary" => NamespaceKind::Proprietary,
                        other => return Err(bad(format!("unknown namespace kind `{other}`"))),
                    };
                    out.namespaces.insert(prefix.trim(), kind);
                }
                other => return Err(SidecarError::UnknownKey { line, key: other.to_owned() }),
            }
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "classCount = {}", self.counts.classes);
        let _ = writeln!(s, "objectPropertyCount = {}", self.counts.object_properties);
        let _ = writeln!(s, "dataPropertyCount = {}", self.counts.data_properties);
        s.push('\n');
        for (prefix, kind) in self.namespaces.iter() {
            let _ = writeln!(s, "namespace = {prefix} {}", kind.as_str());
        }
        for (key, list) in [
            ("class", &self.classes),
            ("objectProperty", &self.object_properties),
            ("dataProperty", &self.data_properties),
        ] {
            s.push('\n');
            for i in list {
                let _ = writeln!(s, "{key} = {}", i.as_str());
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_counts_match_hand_count() {
        let sidecar = ManifestSidecar::parse(SEED_MANIFEST).unwrap();
        assert_eq!(sidecar.counts, Counts { classes: 20, object_properties: 10, data_properties: 3 });
        let m = VocabManifest::seed();
        assert_eq!(m.counts, sidecar.counts);
        assert_eq!(m.to_sidecar().classes, sidecar.classes);
        assert_eq!(m.to_sidecar().object_properties, sidecar.object_properties);
        assert_eq!(m.to_sidecar().data_properties, sidecar.data_properties);
    }

    #[test]
    fn seed_namespaces_all_classified() {
        let m = VocabManifest::seed();
        assert!(m.unclassified().is_empty());
        assert_eq!(m.namespaces, NamespaceTable::default());
    }

    #[test]
    fn sidecar_round_trip() {
        let m = VocabManifest::seed().to_sidecar();
        assert_eq!(ManifestSidecar::parse(&m.render()).unwrap(), m);
    }

    #[test]
    fn shipped_sidecar_is_rendered_form() {
        let m = VocabManifest::seed().to_sidecar();
        let body: String = SEED_MANIFEST.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        assert_eq!(body.trim_start(), m.render());
    }

    #[test]
    fn sidecar_errors() {
        assert_eq!(ManifestSidecar::parse("nope"), Err(SidecarError::Malformed { line: 1 }));
        assert!(matches!(ManifestSidecar::parse("\nfoo = 1"), Err(SidecarError::UnknownKey { line: 2, .. })));
        assert!(matches!(ManifestSidecar::parse("classCount = x"), Err(SidecarError::BadValue { line: 1, .. })));
        assert!(matches!(ManifestSidecar::parse("namespace = http://x/ weird"), Err(SidecarError::BadValue { .. })));
    }

    #[test]
    fn longest_prefix_wins() {
        let mut t = NamespaceTable::empty();
        t.insert("http://a/", NamespaceKind::External);
        t.insert("http://a/b/", NamespaceKind::Proprietary);
        assert_eq!(t.classify("http://a/b/c").map(|x| x.1), Some(NamespaceKind::Proprietary));
        assert_eq!(t.classify("http://a/c").map(|x| x.1), Some(NamespaceKind::External));
        assert_eq!(t.classify("http://z/"), None);
    }

    #[test]
    fn property_kinds_have_matching_ranges() {
        let m = VocabManifest::seed();
        for p in &m.properties {
            let range = p.range.as_ref().expect("seed properties declare ranges");
            let is_datatype = range.as_str().starts_with(ns::xsd::NS) || range.as_str() == ns::rdfs::LITERAL;
            assert_eq!(is_datatype, p.kind == PropertyKind::Data, "{}", p.iri);
        }
    }
}
