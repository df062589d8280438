use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::RangeInclusive;

use super::term::{Iri, Term, TermError, Triple};

type Key = (u32, u32, u32);

/// A borrowed view of a triple stored in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TripleRef<'a> {
    pub subject: &'a Term,
    pub predicate: &'a Iri,
    pub object: &'a Term,
}

impl TripleRef<'_> {
    pub fn to_triple(&self) -> Triple {
        Triple::new(self.subject.clone(), self.predicate.clone(), self.object.clone())
            .expect("stored triples satisfy position rules")
    }
}

/// In-memory triple set with SPO, POS and OSP indexes over interned term ids.
///
/// Terms are interned once; ids are never reused, so iteration order is a
/// function of insertion history. Cloning yields an independent version.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    terms: Vec<Term>,
    ids: HashMap<Term, u32>,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
    prefixes: BTreeMap<String, Iri>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn prefixes(&self) -> &BTreeMap<String, Iri> {
        &self.prefixes
    }

    pub fn set_prefix(&mut self, name: impl Into<String>, iri: Iri) {
        self.prefixes.insert(name.into(), iri);
    }

    fn intern(&mut self, term: &Term) -> u32 {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = u32::try_from(self.terms.len()).expect("term dictionary overflow");
        self.terms.push(term.clone());
        self.ids.insert(term.clone(), id);
        id
    }

    fn id_of(&self, term: &Term) -> Option<u32> {
        self.ids.get(term).copied()
    }

    fn iri_id(&self, iri: &Iri) -> Option<u32> {
        // Avoid allocating a Term just for the lookup when the IRI is absent.
        self.ids.get(&Term::Iri(iri.clone())).copied()
    }

    /// Inserts a triple. Returns `true` if it was not already present.
    pub fn insert(&mut self, triple: &Triple) -> bool {
        let s = self.intern(triple.subject());
        let p = self.intern(&Term::Iri(triple.predicate().clone()));
        let o = self.intern(triple.object());
        if !self.spo.insert((s, p, o)) {
            return false;
        }
        self.pos.insert((p, o, s));
        self.osp.insert((o, s, p));
        true
    }

    /// Builds and inserts a triple, rejecting literal subjects.
    pub fn add(
        &mut self,
        subject: impl Into<Term>,
        predicate: Iri,
        object: impl Into<Term>,
    ) -> Result<bool, TermError> {
        let triple = Triple::new(subject, predicate, object)?;
        Ok(self.insert(&triple))
    }

    pub fn extend<'a>(&mut self, triples: impl IntoIterator<Item = &'a Triple>) {
        for t in triples {
            self.insert(t);
        }
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        let (Some(s), Some(p), Some(o)) =
            (self.id_of(triple.subject()), self.iri_id(triple.predicate()), self.id_of(triple.object()))
        else {
            return false;
        };
        self.spo.contains(&(s, p, o))
    }

    fn view(&self, (s, p, o): Key) -> TripleRef<'_> {
        let Term::Iri(predicate) = &self.terms[p as usize] else { unreachable!("predicate ids always point at IRIs") };
        TripleRef { subject: &self.terms[s as usize], predicate, object: &self.terms[o as usize] }
    }

    pub fn iter(&self) -> impl Iterator<Item = TripleRef<'_>> + '_ {
        self.spo.iter().map(move |&k| self.view(k))
    }

    /// All triples matching the bound positions; `None` is a wildcard.
    ///
    /// Picks the index whose prefix covers the most bound positions, so every
    /// pattern is answered by one range scan.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&Term>,
        predicate: Option<&Iri>,
        object: Option<&Term>,
    ) -> Box<dyn Iterator<Item = TripleRef<'a>> + 'a> {
        let lookup = |t: Option<&Term>| t.map(|t| self.id_of(t));
        let s = lookup(subject);
        let p = predicate.map(|p| self.iri_id(p));
        let o = lookup(object);
        if matches!(s, Some(None)) || matches!(p, Some(None)) || matches!(o, Some(None)) {
            return Box::new(std::iter::empty());
        }
        let (s, p, o) = (s.flatten(), p.flatten(), o.flatten());
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let hit = self.spo.contains(&(s, p, o)).then(|| self.view((s, p, o)));
                Box::new(hit.into_iter())
            }
            (Some(s), Some(p), None) => Box::new(self.spo.range(span2(s, p)).map(move |&k| self.view(k))),
            (Some(s), None, Some(o)) => {
                Box::new(self.osp.range(span2(o, s)).map(move |&(o, s, p)| self.view((s, p, o))))
            }
            (Some(s), None, None) => Box::new(self.spo.range(span1(s)).map(move |&k| self.view(k))),
            (None, Some(p), Some(o)) => {
                Box::new(self.pos.range(span2(p, o)).map(move |&(p, o, s)| self.view((s, p, o))))
            }
            (None, Some(p), None) => Box::new(self.pos.range(span1(p)).map(move |&(p, o, s)| self.view((s, p, o)))),
            (None, None, Some(o)) => Box::new(self.osp.range(span1(o)).map(move |&(o, s, p)| self.view((s, p, o)))),
            (None, None, None) => Box::new(self.iter()),
        }
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(&'a self, subject: &Term, predicate: &Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.matching(Some(subject), Some(predicate), None).map(|t| t.object)
    }

    /// Subjects of `(?, predicate, object)`.
    pub fn subjects<'a>(&'a self, predicate: &Iri, object: &Term) -> impl Iterator<Item = &'a Term> + 'a {
        self.matching(None, Some(predicate), Some(object)).map(|t| t.subject)
    }

    /// True if the term occurs anywhere in the graph.
    pub fn mentions(&self, term: &Term) -> bool {
        match self.id_of(term) {
            Some(id) => {
                self.spo.range(span1(id)).next().is_some()
                    || self.pos.range(span1(id)).next().is_some()
                    || self.osp.range(span1(id)).next().is_some()
            }
            None => false,
        }
    }

    /// The triple set, ordered by term value.
    pub fn to_set(&self) -> BTreeSet<Triple> {
        self.iter().map(|t| t.to_triple()).collect()
    }

    /// Index sizes, for consistency checks.
    pub fn index_sizes(&self) -> (usize, usize, usize) {
        (self.spo.len(), self.pos.len(), self.osp.len())
    }
}

fn span1(a: u32) -> RangeInclusive<Key> {
    (a, 0, 0)..=(a, u32::MAX, u32::MAX)
}

fn span2(a: u32, b: u32) -> RangeInclusive<Key> {
    (a, b, 0)..=(a, b, u32::MAX)
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        for t in iter {
            g.insert(&t);
        }
        g
    }
}
