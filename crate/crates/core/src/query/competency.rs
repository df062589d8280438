use std::collections::{BTreeMap, BTreeSet};

use regex::Regex;
use thiserror::Error;

use super::{execute, parse_query, QueryError, SolutionTable, Value};
use crate::rdf::Term;
use crate::reasoner::InferredGraph;

/// Measures documented per bias class.
pub const LISTING_Q41: &str = "PREFIX  skos: <http://www.w3.org/2004/02/skos/core#>
PREFIX  owl:  <http://www.w3.org/2002/07/owl#>
PREFIX  rdfs: <http://www.w3.org/2000/01/rdf-schema#>
PREFIX  bias: <https://bias-project.x/bias/>

SELECT DISTINCT
    ?bias_1 (COUNT(DISTINCT ?biasMeasure_1) AS
    ?number_of_measures)
WHERE { ?bias_1  rdfs:subClassOf bias:Bias .
        ?biasMeasure_1 bias:measures ?bias_1}
GROUP BY ?bias_1
";

/// Definition and formalization of measures whose IRI matches "Gini".
///
/// Kept as published: the WHERE clause binds `?formal_1` while the
/// projection asks for `?formalization_1`.
pub const LISTING_Q6: &str = "PREFIX skos: <http://www.w3.org/2004/02/skos/core#>
PREFIX owl: <http://www.w3.org/2002/07/owl#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
PREFIX bias: <https://bias-project.x/bias/>

SELECT DISTINCT
    ?biasMeasure_1 ?definition_1  ?formalization_1
WHERE {
   ?biasMeasure_1 rdfs:subClassOf bias:BiasMeasure ;
                       skos:definition ?definition_1 ;
                       bias:formalization ?formal_1
FILTER ( (  REGEX(str(?biasMeasure_1), \"Gini\", 'i')))}
";

const Q1: &str = "PREFIX skos: <http://www.w3.org/2004/02/skos/core#>

SELECT DISTINCT ?definition
WHERE { {{bias}} skos:definition ?definition }
";

const Q6: &str = "PREFIX skos: <http://www.w3.org/2004/02/skos/core#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
PREFIX bias: <https://bias-project.x/bias/>

SELECT DISTINCT
    ?biasMeasure_1 ?definition_1 ?formalization_1
WHERE {
   ?biasMeasure_1 rdfs:subClassOf bias:BiasMeasure ;
                       skos:definition ?definition_1 ;
                       bias:formalization ?formalization_1
FILTER ( ( REGEX(str(?biasMeasure_1), {{measure}}, 'i')))}
";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompetencyError {
    #[error("unknown competency question `{0}`")]
    UnknownTemplate(String),
    #[error("{id} needs a value for `{name}`")]
    MissingPlaceholder { id: String, name: String },
    #[error("questions file line {line}: {message}")]
    BadFile { line: usize, message: String },
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// A stored query with `{{name}}` placeholders.
///
/// `narrow_by` names an optional binding that, when given, keeps only rows
/// whose column of the same name holds that term.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub id: String,
    pub text: String,
    pub narrow_by: Option<(String, String)>,
}

impl Template {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Template { id: id.into(), text: text.into(), narrow_by: None }
    }

    pub fn placeholders(&self) -> BTreeSet<String> {
        placeholder_re().captures_iter(&self.text).map(|c| c[1].to_owned()).collect()
    }

    /// Substitutes every placeholder with the term in SPARQL syntax.
    pub fn instantiate(&self, bindings: &BTreeMap<String, Term>) -> Result<String, CompetencyError> {
        for name in self.placeholders() {
            if !bindings.contains_key(&name) {
                return Err(CompetencyError::MissingPlaceholder { id: self.id.clone(), name });
            }
        }
        Ok(placeholder_re().replace_all(&self.text, |c: &regex::Captures| bindings[&c[1]].to_string()).into_owned())
    }
}

fn placeholder_re() -> Regex {
    Regex::new(r"\{\{([A-Za-z_][A-Za-z0-9_]*)\}\}").expect("static pattern")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompetencyLibrary {
    templates: BTreeMap<String, Template>,
}

impl CompetencyLibrary {
    /// Q1 (definition of a bias), Q4.1 (measures per bias) and Q6 (formalization of a measure).
    pub fn builtin() -> Self {
        let mut lib = CompetencyLibrary { templates: BTreeMap::new() };
        lib.add(Template::new("Q1", Q1));
        let mut q41 = Template::new("Q4.1", LISTING_Q41);
        q41.narrow_by = Some(("bias".into(), "bias_1".into()));
        lib.add(q41);
        lib.add(Template::new("Q6", Q6));
        lib
    }

    pub fn add(&mut self, t: Template) {
        self.templates.insert(t.id.clone(), t);
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    /// Adds the templates of a questions file: `[id]` header lines, each
    /// followed by the query text. Each template must parse once its
    /// placeholders are filled.
    pub fn load(&mut self, text: &str) -> Result<usize, CompetencyError> {
        let mut found: Vec<(usize, String, String)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if let Some(id) = trimmed.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                if id.is_empty() || id.contains(char::is_whitespace) {
                    return Err(CompetencyError::BadFile { line: i + 1, message: format!("bad question id `{id}`") });
                }
                found.push((i + 1, id.to_owned(), String::new()));
            } else if let Some((_, _, body)) = found.last_mut() {
                body.push_str(line);
                body.push('\n');
            } else if !trimmed.is_empty() && !trimmed.starts_with('#') {
                return Err(CompetencyError::BadFile {
                    line: i + 1,
                    message: "text before the first `[id]` header".into(),
                });
            }
        }
        let n = found.len();
        for (line, id, body) in found {
            let t = Template::new(id, body);
            let probe: BTreeMap<String, Term> = t
                .placeholders()
                .into_iter()
                .map(|p| (p, Term::Iri(crate::rdf::Iri::new("urn:placeholder").expect("valid"))))
                .collect();
            parse_query(&t.instantiate(&probe)?)
                .map_err(|e| CompetencyError::BadFile { line, message: format!("{}: {e}", t.id) })?;
            self.add(t);
        }
        Ok(n)
    }

    pub fn ask(
        &self,
        ig: &InferredGraph,
        id: &str,
        bindings: &BTreeMap<String, Term>,
    ) -> Result<SolutionTable, CompetencyError> {
        let t = self.get(id).ok_or_else(|| CompetencyError::UnknownTemplate(id.to_owned()))?;
        let plan = parse_query(&t.instantiate(bindings)?)?;
        let mut table = execute(ig, &plan);
        if let Some((binding, column)) = &t.narrow_by {
            if let (Some(term), Some(col)) = (bindings.get(binding), table.column(column)) {
                let want = Value::Term(term.clone());
                table.rows.retain(|r| r[col] == want);
            }
        }
        Ok(table)
    }
}

impl Default for CompetencyLibrary {
    fn default() -> Self {
        CompetencyLibrary::builtin()
    }
}

/// Runs a built-in competency question.
pub fn ask_competency(
    ig: &InferredGraph,
    id: &str,
    bindings: &BTreeMap<String, Term>,
) -> Result<SolutionTable, CompetencyError> {
    CompetencyLibrary::builtin().ask(ig, id, bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ns;
    use crate::rdf::{Iri, Literal};
    use crate::reasoner::{materialize, RuleSet};
    use crate::vocab::{register_measure, seed_graph, ClassDef};

    fn seed() -> InferredGraph {
        materialize(&seed_graph(), &RuleSet::rdfs_lite())
    }

    fn bind(name: &str, t: Term) -> BTreeMap<String, Term> {
        BTreeMap::from([(name.to_owned(), t)])
    }

    fn bias(local: &str) -> Term {
        Term::Iri(Iri::new(format!("{}{local}", ns::bias::NS)).unwrap())
    }

    #[test]
    fn q1_definition() {
        let t = ask_competency(&seed(), "Q1", &bind("bias", bias("PopularityBias"))).unwrap();
        assert_eq!(t.len(), 1);
        let lit = t.rows[0][0].as_term().unwrap().as_literal().unwrap();
        assert!(lit.lexical().starts_with("When collaborative filtering recommenders emphasize popular items"));
        assert_eq!(lit.language(), Some("en"));
    }

    #[test]
    fn q41_with_and_without_bias() {
        let ig = seed();
        let all = ask_competency(&ig, "Q4.1", &BTreeMap::new()).unwrap();
        assert_eq!(all.rows, vec![vec![Value::Term(bias("PopularityBias")), Value::Count(3)]]);
        let one = ask_competency(&ig, "Q4.1", &bind("bias", bias("PopularityBias"))).unwrap();
        assert_eq!(one, all);
        let none = ask_competency(&ig, "Q4.1", &bind("bias", bias("HumanBias"))).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn q6_projects_formalization() {
        let t = ask_competency(&seed(), "Q6", &bind("measure", Term::Literal(Literal::string("gini")))).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(0, "biasMeasure_1").unwrap().as_term(), Some(&bias("GiniInDegree")));
        assert!(t.get(0, "definition_1").unwrap().as_term().unwrap().as_literal().is_some());
        assert!(t.get(0, "formalization_1").unwrap().as_term().unwrap().as_literal().is_some());
    }

    #[test]
    fn fourth_measure_is_counted() {
        let mut g = seed_graph();
        let def = ClassDef::new(Iri::new(format!("{}LongTailShare", ns::bias::NS)).unwrap(), "Long Tail Share")
            .with_definition(Literal::lang("Share of recommendations from the long tail.", "en").unwrap());
        register_measure(
            &mut g,
            &def,
            bias("PopularityBias").as_iri().unwrap(),
            Literal::lang("tail / all", "en").unwrap(),
        )
        .unwrap();
        let ig = materialize(&g, &RuleSet::rdfs_lite());
        let t = ask_competency(&ig, "Q4.1", &BTreeMap::new()).unwrap();
        assert_eq!(t.rows[0][1], Value::Count(4));
        let t = ask_competency(&ig, "Q6", &bind("measure", Term::Literal(Literal::string("tail")))).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(
            t.get(0, "formalization_1").unwrap().as_term().unwrap().as_literal().unwrap().lexical(),
            "tail / all"
        );
    }

    #[test]
    fn errors() {
        let ig = seed();
        assert_eq!(ask_competency(&ig, "Q9", &BTreeMap::new()), Err(CompetencyError::UnknownTemplate("Q9".into())));
        assert!(matches!(
            ask_competency(&ig, "Q1", &BTreeMap::new()),
            Err(CompetencyError::MissingPlaceholder { ref name, .. }) if name == "bias"
        ));
    }

    #[test]
    fn questions_file() {
        let mut lib = CompetencyLibrary::builtin();
        let n = lib
            .load(
                "# extra questions\n[Q2]\nPREFIX bias: <https://bias-project.x/bias/>\nSELECT ?h WHERE { {{bias}} bias:isAlignedWith ?h }\n",
            )
            .unwrap();
        assert_eq!(n, 1);
        assert_eq!(lib.ids().collect::<Vec<_>>(), vec!["Q1", "Q2", "Q4.1", "Q6"]);
        let t = lib.ask(&seed(), "Q2", &bind("bias", bias("PopularityBias"))).unwrap();
        assert_eq!(t.rows, vec![vec![Value::Term(bias("Erasure"))]]);

        assert!(matches!(lib.load("SELECT"), Err(CompetencyError::BadFile { line: 1, .. })));
        assert!(matches!(lib.load("[Q3]\nSELECT ?x WHERE {"), Err(CompetencyError::BadFile { line: 1, .. })));
    }
}
