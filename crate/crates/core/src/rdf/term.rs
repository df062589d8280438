use std::fmt;

use thiserror::Error;

use crate::ns;

/// Errors raised when constructing terms or triples that break RDF position rules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid IRI `{0}`: {1}")]
    InvalidIri(String, &'static str),
    #[error("invalid blank node label `{0}`")]
    InvalidBlankLabel(String),
    #[error("invalid language tag `{0}`")]
    InvalidLanguageTag(String),
    #[error("literal `{0}` cannot be used as a subject")]
    LiteralSubject(String),
}

/// An absolute IRI. Compared as a plain string, no normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if value.is_empty() {
            return Err(TermError::InvalidIri(value, "empty"));
        }
        if value.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
        {
            return Err(TermError::InvalidIri(value, "contains whitespace or a forbidden character"));
        }
        let absolute = value.contains("://") || value.get(..4).is_some_and(|p| p.eq_ignore_ascii_case("urn:"));
        if !absolute {
            return Err(TermError::InvalidIri(value, "not absolute (needs `://` or a `urn:` scheme)"));
        }
        Ok(Iri(value))
    }

    /// Builds an IRI from a compile-time constant known to be valid.
    pub(crate) fn from_static(value: &str) -> Self {
        debug_assert!(Iri::new(value).is_ok(), "bad static IRI {value}");
        Iri(value.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['#', '/']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }

    /// The part up to and including the last `#` or `/`.
    pub fn namespace(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['#', '/']) {
            Some(i) => &s[..=i],
            None => s,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// A blank node, scoped to the graph that contains it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        let valid = !label.is_empty()
            && label.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.')
            && !label.ends_with('.')
            && !label.starts_with(['-', '.']);
        if valid {
            Ok(BlankNode(label))
        } else {
            Err(TermError::InvalidBlankLabel(label))
        }
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

/// What qualifies a literal's lexical form: a language tag or a datatype, never both.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LiteralKind {
    Lang(String),
    Typed(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    kind: LiteralKind,
}

impl Literal {
    /// A plain string literal, datatype `xsd:string`.
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), kind: LiteralKind::Typed(Iri::from_static(ns::xsd::STRING)) }
    }

    pub fn lang(lexical: impl Into<String>, tag: impl Into<String>) -> Result<Self, TermError> {
        let tag = tag.into();
        let mut parts = tag.split('-');
        let primary_ok =
            parts.next().is_some_and(|p| (1..=8).contains(&p.len()) && p.chars().all(|c| c.is_ascii_alphabetic()));
        let rest_ok = parts.all(|p| (1..=8).contains(&p.len()) && p.chars().all(|c| c.is_ascii_alphanumeric()));
        if !(primary_ok && rest_ok) {
            return Err(TermError::InvalidLanguageTag(tag));
        }
        Ok(Literal { lexical: lexical.into(), kind: LiteralKind::Lang(tag) })
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal { lexical: lexical.into(), kind: LiteralKind::Typed(datatype) }
    }

    pub fn integer(value: i64) -> Self {
        Literal::typed(value.to_string(), Iri::from_static(ns::xsd::INTEGER))
    }

    /// A finite value rendered as an `xsd:decimal` (always with a decimal point).
    pub fn decimal(value: f64) -> Self {
        let mut s = format!("{value}");
        if !s.contains('.') {
            s.push_str(".0");
        }
        Literal::typed(s, Iri::from_static(ns::xsd::DECIMAL))
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn kind(&self) -> &LiteralKind {
        &self.kind
    }

    pub fn language(&self) -> Option<&str> {
        match &self.kind {
            LiteralKind::Lang(tag) => Some(tag),
            LiteralKind::Typed(_) => None,
        }
    }

    /// The datatype IRI as a string; `rdf:langString` for tagged literals.
    pub fn datatype(&self) -> &str {
        match &self.kind {
            LiteralKind::Lang(_) => ns::rdf::LANG_STRING,
            LiteralKind::Typed(dt) => dt.as_str(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", escape_string(&self.lexical))?;
        match &self.kind {
            LiteralKind::Lang(tag) => write!(f, "@{tag}"),
            LiteralKind::Typed(dt) if dt.as_str() == ns::xsd::STRING => Ok(()),
            LiteralKind::Typed(dt) => write!(f, "^^{dt}"),
        }
    }
}

/// Escapes a lexical form for a double-quoted single-line Turtle string.
pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if c.is_control() => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// An RDF term. Variant order gives IRIs < blank nodes < literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    /// SPARQL `str()`: IRI string or lexical form. Blank nodes have none.
    pub fn str_value(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri.as_str()),
            Term::Literal(lit) => Some(lit.lexical()),
            Term::Blank(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(t) => t.fmt(f),
            Term::Blank(t) => t.fmt(f),
            Term::Literal(t) => t.fmt(f),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<&Iri> for Term {
    fn from(iri: &Iri) -> Self {
        Term::Iri(iri.clone())
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::Blank(b)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Term>, predicate: Iri, object: impl Into<Term>) -> Result<Self, TermError> {
        let subject = subject.into();
        if let Term::Literal(lit) = &subject {
            return Err(TermError::LiteralSubject(lit.lexical().to_owned()));
        }
        Ok(Triple { subject, predicate, object: object.into() })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Iri, Term) {
        (self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
