use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use super::graph::Graph;
use super::term::{BlankNode, Term, Triple};

/// True iff some bijection between blank nodes makes the triple sets equal.
///
/// Blank nodes are coloured by iterated neighbourhood hashing, then a
/// backtracking search only tries candidates of matching colour.
pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let (ga, gb) = (a.to_set(), b.to_set());
    let ground = |set: &BTreeSet<Triple>| -> BTreeSet<Triple> {
        set.iter().filter(|t| !t.subject().is_blank() && !t.object().is_blank()).cloned().collect()
    };
    if ground(&ga) != ground(&gb) {
        return false;
    }
    let (ba, bb) = (blanks(&ga), blanks(&gb));
    if ba.len() != bb.len() {
        return false;
    }
    if ba.is_empty() {
        return true;
    }
    let (ca, cb) = (colours(&ga, &ba), colours(&gb, &bb));
    let histogram = |c: &HashMap<BlankNode, u64>| {
        let mut h: BTreeMap<u64, usize> = BTreeMap::new();
        for v in c.values() {
            *h.entry(*v).or_default() += 1;
        }
        h
    };
    if histogram(&ca) != histogram(&cb) {
        return false;
    }
    // Most constrained first: rarest colours go to the front.
    let hist = histogram(&ca);
    let mut order: Vec<BlankNode> = ba.into_iter().collect();
    order.sort_by_key(|n| (hist[&ca[n]], ca[n], n.clone()));
    let with_blanks: Vec<&Triple> = ga.iter().filter(|t| t.subject().is_blank() || t.object().is_blank()).collect();
    let mut mapping = HashMap::new();
    let mut used = BTreeSet::new();
    search(0, &order, &ca, &cb, &bb, &with_blanks, &gb, &mut mapping, &mut used)
}

fn blanks(set: &BTreeSet<Triple>) -> BTreeSet<BlankNode> {
    let mut out = BTreeSet::new();
    for t in set {
        for term in [t.subject(), t.object()] {
            if let Term::Blank(b) = term {
                out.insert(b.clone());
            }
        }
    }
    out
}

fn hash_of(v: impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    v.hash(&mut h);
    h.finish()
}

fn colours(set: &BTreeSet<Triple>, nodes: &BTreeSet<BlankNode>) -> HashMap<BlankNode, u64> {
    let mut colour: HashMap<BlankNode, u64> = nodes.iter().map(|n| (n.clone(), 0)).collect();
    let term_key = |t: &Term, colour: &HashMap<BlankNode, u64>| -> u64 {
        match t {
            Term::Blank(b) => hash_of(("blank", colour[b])),
            other => hash_of(other),
        }
    };
    for _ in 0..nodes.len().min(8) + 1 {
        let mut next: HashMap<BlankNode, Vec<u64>> = nodes.iter().map(|n| (n.clone(), Vec::new())).collect();
        for t in set {
            if let Term::Blank(b) = t.subject() {
                let sig = hash_of(("out", t.predicate(), term_key(t.object(), &colour)));
                next.get_mut(b).expect("known blank").push(sig);
            }
            if let Term::Blank(b) = t.object() {
                let sig = hash_of(("in", t.predicate(), term_key(t.subject(), &colour)));
                next.get_mut(b).expect("known blank").push(sig);
            }
        }
        colour = next
            .into_iter()
            .map(|(n, mut sigs)| {
                sigs.sort_unstable();
                let c = hash_of((colour[&n], sigs));
                (n, c)
            })
            .collect();
    }
    colour
}

#[allow(clippy::too_many_arguments)]
fn search(
    depth: usize,
    order: &[BlankNode],
    ca: &HashMap<BlankNode, u64>,
    cb: &HashMap<BlankNode, u64>,
    bb: &BTreeSet<BlankNode>,
    with_blanks: &[&Triple],
    target: &BTreeSet<Triple>,
    mapping: &mut HashMap<BlankNode, BlankNode>,
    used: &mut BTreeSet<BlankNode>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    let node = &order[depth];
    for cand in bb.iter().filter(|c| cb[*c] == ca[node]) {
        if used.contains(cand) {
            continue;
        }
        mapping.insert(node.clone(), cand.clone());
        used.insert(cand.clone());
        if consistent(with_blanks, mapping, target)
            && search(depth + 1, order, ca, cb, bb, with_blanks, target, mapping, used)
        {
            return true;
        }
        mapping.remove(node);
        used.remove(cand);
    }
    false
}

/// Every triple whose blank nodes are all mapped must exist in the target.
fn consistent(with_blanks: &[&Triple], mapping: &HashMap<BlankNode, BlankNode>, target: &BTreeSet<Triple>) -> bool {
    let map = |t: &Term| -> Option<Term> {
        match t {
            Term::Blank(b) => mapping.get(b).cloned().map(Term::Blank),
            other => Some(other.clone()),
        }
    };
    with_blanks.iter().all(|t| match (map(t.subject()), map(t.object())) {
        (Some(s), Some(o)) => {
            target.contains(&Triple::new(s, t.predicate().clone(), o).expect("mapped positions stay valid"))
        }
        _ => true,
    })
}
