//! A small SPARQL SELECT subset: basic graph patterns, FILTER with REGEX and
//! `str()`, GROUP BY and `COUNT`, plus the built-in competency questions.
//!
//! Evaluation order is fixed: bag joins, filters, grouping and aggregates,
//! projection, then DISTINCT. Rows are sorted so output is deterministic.

mod competency;
mod parser;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use regex::Regex;
use thiserror::Error;

use crate::ns;
use crate::rdf::{format_term, Graph, Iri, Literal, Term};
use crate::reasoner::InferredGraph;

pub use competency::{ask_competency, CompetencyError, CompetencyLibrary, Template, LISTING_Q41, LISTING_Q6};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: {feature} not supported")]
    Unsupported { feature: String, line: usize, column: usize },
    #[error("invalid query: {0}")]
    Invalid(String),
}

impl QueryError {
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            QueryError::Syntax { line, column, .. } | QueryError::Unsupported { line, column, .. } => {
                Some((*line, *column))
            }
            QueryError::Invalid(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    Var(String),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Slot,
    pub predicate: Slot,
    pub object: Slot,
}

impl TriplePattern {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object].into_iter().filter_map(|s| match s {
            Slot::Var(v) => Some(v.as_str()),
            Slot::Term(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Var(String),
    Count { var: String, distinct: bool, alias: String },
}

impl Projection {
    pub fn name(&self) -> &str {
        match self {
            Projection::Var(v) => v,
            Projection::Count { alias, .. } => alias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterExpr {
    Var(String),
    Const(Term),
    Str(Box<FilterExpr>),
    Regex { text: Box<FilterExpr>, pattern: String, case_insensitive: bool },
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
    Eq(Box<FilterExpr>, Box<FilterExpr>),
}

impl FilterExpr {
    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            FilterExpr::Var(v) => {
                out.insert(v);
            }
            FilterExpr::Const(_) => {}
            FilterExpr::Str(e) | FilterExpr::Not(e) | FilterExpr::Regex { text: e, .. } => e.collect_vars(out),
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) | FilterExpr::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    pub prefixes: BTreeMap<String, Iri>,
    pub projection: Vec<Projection>,
    pub distinct: bool,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub group_by: Vec<String>,
}

impl QueryPlan {
    pub fn has_aggregate(&self) -> bool {
        self.projection.iter().any(|p| matches!(p, Projection::Count { .. }))
    }

    fn validate(&self) -> Result<(), QueryError> {
        let pattern_vars: BTreeSet<&str> = self.patterns.iter().flat_map(TriplePattern::variables).collect();
        for f in &self.filters {
            for v in f.variables() {
                if !pattern_vars.contains(v) {
                    return Err(QueryError::Invalid(format!("filter variable ?{v} does not occur in the patterns")));
                }
            }
        }
        if self.has_aggregate() || !self.group_by.is_empty() {
            for p in &self.projection {
                if let Projection::Var(v) = p {
                    if !self.group_by.contains(v) {
                        return Err(QueryError::Invalid(format!("?{v} is projected but not grouped")));
                    }
                }
            }
        }
        let mut names = BTreeSet::new();
        for p in &self.projection {
            if !names.insert(p.name()) {
                return Err(QueryError::Invalid(format!("?{} is projected twice", p.name())));
            }
        }
        Ok(())
    }
}

/// Parses a query in the supported subset.
pub fn parse_query(text: &str) -> Result<QueryPlan, QueryError> {
    parser::parse(text)
}

pub(crate) fn compile_regex(pattern: &str, case_insensitive: bool) -> Result<Regex, String> {
    let full = if case_insensitive { format!("(?i){pattern}") } else { pattern.to_owned() };
    Regex::new(&full).map_err(|e| format!("invalid REGEX pattern: {e}"))
}

/// One cell of a solution table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Unbound,
    Count(u64),
    Term(Term),
}

impl Value {
    pub fn as_term(&self) -> Option<&Term> {
        match self {
            Value::Term(t) => Some(t),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Unbound => 0,
            Value::Count(_) => 1,
            Value::Term(_) => 2,
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Count(a), Value::Count(b)) => a.cmp(b),
            (Value::Term(a), Value::Term(b)) => a.to_string().cmp(&b.to_string()).then_with(|| a.cmp(b)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    prefixes: BTreeMap<String, Iri>,
}

impl SolutionTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Value> {
        self.rows.get(row)?.get(self.column(name)?)
    }

    /// Tab-separated rendering with a header row. IRIs are compacted with the query's prefixes.
    pub fn to_tsv(&self) -> String {
        let mut out = self.header.join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Unbound => String::new(),
                    Value::Count(n) => n.to_string(),
                    Value::Term(t) => format_term(t, &self.prefixes),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("\t"));
        }
        out
    }
}

type Solution = Vec<Option<Term>>;

struct Prepared<'p> {
    plan: &'p QueryPlan,
    vars: Vec<String>,
    index: HashMap<String, usize>,
    regexes: HashMap<(String, bool), Regex>,
}

impl<'p> Prepared<'p> {
    fn new(plan: &'p QueryPlan) -> Self {
        let mut vars: Vec<String> = Vec::new();
        let mut index = HashMap::new();
        let mut add = |v: &str| {
            if !index.contains_key(v) {
                index.insert(v.to_owned(), vars.len());
                vars.push(v.to_owned());
            }
        };
        for p in &plan.patterns {
            p.variables().for_each(&mut add);
        }
        for p in &plan.projection {
            match p {
                Projection::Var(v) => add(v),
                Projection::Count { var, .. } => add(var),
            }
        }
        plan.group_by.iter().for_each(|v| add(v));
        let mut regexes = HashMap::new();
        let mut stack: Vec<&FilterExpr> = plan.filters.iter().collect();
        while let Some(e) = stack.pop() {
            match e {
                FilterExpr::Regex { text, pattern, case_insensitive } => {
                    let re = compile_regex(pattern, *case_insensitive).expect("patterns are checked at parse time");
                    regexes.insert((pattern.clone(), *case_insensitive), re);
                    stack.push(text);
                }
                FilterExpr::Str(e) | FilterExpr::Not(e) => stack.push(e),
                FilterExpr::And(a, b) | FilterExpr::Or(a, b) | FilterExpr::Eq(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                FilterExpr::Var(_) | FilterExpr::Const(_) => {}
            }
        }
        Prepared { plan, vars, index, regexes }
    }

    fn slot<'a>(&self, slot: &'a Slot, sol: &'a Solution) -> Option<&'a Term> {
        match slot {
            Slot::Term(t) => Some(t),
            Slot::Var(v) => sol[self.index[v]].as_ref(),
        }
    }

    fn bind(&self, slot: &Slot, term: &Term, sol: &mut Solution) -> bool {
        match slot {
            Slot::Term(t) => t == term,
            Slot::Var(v) => {
                let cell = &mut sol[self.index[v]];
                match cell {
                    Some(bound) => bound == term,
                    None => {
                        *cell = Some(term.clone());
                        true
                    }
                }
            }
        }
    }

    fn join(&self, g: &Graph, solutions: Vec<Solution>, pattern: &TriplePattern) -> Vec<Solution> {
        let mut out = Vec::new();
        for sol in solutions {
            let s = self.slot(&pattern.subject, &sol);
            let p = match self.slot(&pattern.predicate, &sol) {
                Some(Term::Iri(i)) => Some(i),
                Some(_) => continue,
                None => None,
            };
            let o = self.slot(&pattern.object, &sol);
            for t in g.matching(s, p, o) {
                let mut next = sol.clone();
                let predicate = Term::Iri(t.predicate.clone());
                if self.bind(&pattern.subject, t.subject, &mut next)
                    && self.bind(&pattern.predicate, &predicate, &mut next)
                    && self.bind(&pattern.object, t.object, &mut next)
                {
                    out.push(next);
                }
            }
        }
        out
    }

    /// Left-to-right join, always taking the remaining pattern with the most bound positions.
    fn bgp(&self, g: &Graph, pushdown: bool) -> Vec<Solution> {
        let mut solutions = vec![vec![None; self.vars.len()]];
        let mut bound: BTreeSet<&str> = BTreeSet::new();
        let mut remaining: Vec<&TriplePattern> = self.plan.patterns.iter().collect();
        let mut pending: Vec<&FilterExpr> = self.plan.filters.iter().collect();
        loop {
            if pushdown {
                let (ready, later): (Vec<&FilterExpr>, Vec<&FilterExpr>) =
                    pending.into_iter().partition(|f| f.variables().iter().all(|v| bound.contains(v)));
                pending = later;
                solutions.retain(|s| ready.iter().all(|f| self.holds(f, s)));
            }
            if remaining.is_empty() || solutions.is_empty() {
                break;
            }
            let score = |p: &TriplePattern| {
                [&p.subject, &p.predicate, &p.object]
                    .iter()
                    .filter(|s| match s {
                        Slot::Term(_) => true,
                        Slot::Var(v) => bound.contains(v.as_str()),
                    })
                    .count()
            };
            let mut best = 0;
            for (i, p) in remaining.iter().enumerate() {
                if score(p) > score(remaining[best]) {
                    best = i;
                }
            }
            let pattern = remaining.remove(best);
            solutions = self.join(g, solutions, pattern);
            bound.extend(pattern.variables());
        }
        if !remaining.is_empty() {
            return Vec::new();
        }
        solutions.retain(|s| pending.iter().all(|f| self.holds(f, s)));
        solutions
    }

    fn holds(&self, f: &FilterExpr, sol: &Solution) -> bool {
        matches!(self.eval(f, sol).and_then(effective_boolean), Some(true))
    }

    /// `None` is a SPARQL evaluation error.
    fn eval(&self, e: &FilterExpr, sol: &Solution) -> Option<Eval> {
        match e {
            FilterExpr::Var(v) => sol[self.index[v]].clone().map(Eval::Term),
            FilterExpr::Const(t) => Some(Eval::Term(t.clone())),
            FilterExpr::Str(inner) => match self.eval(inner, sol)? {
                Eval::Term(t) => t.str_value().map(|s| Eval::Term(Term::Literal(Literal::string(s)))),
                Eval::Bool(_) => None,
            },
            FilterExpr::Regex { text, pattern, case_insensitive } => {
                let Eval::Term(Term::Literal(lit)) = self.eval(text, sol)? else {
                    return None;
                };
                let plain = lit.language().is_some() || lit.datatype() == ns::xsd::STRING;
                if !plain {
                    return None;
                }
                Some(Eval::Bool(self.regexes[&(pattern.clone(), *case_insensitive)].is_match(lit.lexical())))
            }
            FilterExpr::And(a, b) => {
                let (x, y) =
                    (self.eval(a, sol).and_then(effective_boolean), self.eval(b, sol).and_then(effective_boolean));
                match (x, y) {
                    (Some(false), _) | (_, Some(false)) => Some(Eval::Bool(false)),
                    (Some(true), Some(true)) => Some(Eval::Bool(true)),
                    _ => None,
                }
            }
            FilterExpr::Or(a, b) => {
                let (x, y) =
                    (self.eval(a, sol).and_then(effective_boolean), self.eval(b, sol).and_then(effective_boolean));
                match (x, y) {
                    (Some(true), _) | (_, Some(true)) => Some(Eval::Bool(true)),
                    (Some(false), Some(false)) => Some(Eval::Bool(false)),
                    _ => None,
                }
            }
            FilterExpr::Not(inner) => self.eval(inner, sol).and_then(effective_boolean).map(|b| Eval::Bool(!b)),
            FilterExpr::Eq(a, b) => {
                let (x, y) = (self.eval(a, sol)?, self.eval(b, sol)?);
                Some(Eval::Bool(x == y))
            }
        }
    }

    fn project(&self, solutions: Vec<Solution>) -> Vec<Vec<Value>> {
        let plan = self.plan;
        let cell = |s: &Solution, v: &str| s[self.index[v]].clone().map_or(Value::Unbound, Value::Term);
        if !plan.has_aggregate() && plan.group_by.is_empty() {
            return solutions
                .iter()
                .map(|s| {
                    plan.projection
                        .iter()
                        .map(|p| match p {
                            Projection::Var(v) => cell(s, v),
                            Projection::Count { .. } => unreachable!("no aggregates"),
                        })
                        .collect()
                })
                .collect();
        }
        let mut groups: BTreeMap<Vec<Value>, Vec<&Solution>> = BTreeMap::new();
        if plan.group_by.is_empty() {
            groups.insert(Vec::new(), solutions.iter().collect());
        } else {
            for s in &solutions {
                let key = plan.group_by.iter().map(|v| cell(s, v)).collect();
                groups.entry(key).or_default().push(s);
            }
        }
        groups
            .into_iter()
            .map(|(key, members)| {
                plan.projection
                    .iter()
                    .map(|p| match p {
                        Projection::Var(v) => {
                            let at = plan.group_by.iter().position(|g| g == v).expect("validated: grouped");
                            key[at].clone()
                        }
                        Projection::Count { var, distinct, .. } => {
                            let bound = members.iter().filter_map(|s| s[self.index[var]].as_ref());
                            let n = if *distinct { bound.collect::<BTreeSet<_>>().len() } else { bound.count() };
                            Value::Count(n as u64)
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Eval {
    Term(Term),
    Bool(bool),
}

fn effective_boolean(v: Eval) -> Option<bool> {
    match v {
        Eval::Bool(b) => Some(b),
        Eval::Term(Term::Literal(lit)) => {
            if lit.language().is_some() {
                return Some(!lit.lexical().is_empty());
            }
            match lit.datatype() {
                ns::xsd::STRING => Some(!lit.lexical().is_empty()),
                ns::xsd::BOOLEAN => match lit.lexical() {
                    "true" | "1" => Some(true),
                    "false" | "0" => Some(false),
                    _ => Some(false),
                },
                ns::xsd::INTEGER | ns::xsd::DECIMAL | ns::xsd::DOUBLE => {
                    lit.lexical().parse::<f64>().ok().map(|x| x != 0.0 && !x.is_nan())
                }
                _ => None,
            }
        }
        Eval::Term(_) => None,
    }
}

fn run(g: &Graph, plan: &QueryPlan, pushdown: bool) -> SolutionTable {
    let prepared = Prepared::new(plan);
    let solutions = prepared.bgp(g, pushdown);
    let mut rows = prepared.project(solutions);
    rows.sort();
    if plan.distinct {
        rows.dedup();
    }
    SolutionTable {
        header: plan.projection.iter().map(|p| p.name().to_owned()).collect(),
        rows,
        prefixes: plan.prefixes.clone(),
    }
}

/// Runs the plan over a plain graph.
pub fn execute_graph(g: &Graph, plan: &QueryPlan) -> SolutionTable {
    run(g, plan, true)
}

/// Runs the plan over base and inferred triples.
pub fn execute(ig: &InferredGraph, plan: &QueryPlan) -> SolutionTable {
    execute_graph(ig.closure(), plan)
}
