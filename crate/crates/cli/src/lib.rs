//! The `biasdoc` command line.
//!
//! [`run`] parses arguments, dispatches to the core library and returns the
//! process exit code: 0 on success, 1 when validation finds errors, 2 for
//! usage and input errors, 3 for internal failures.

pub mod docgen;

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::Write;

use biasdoc_core::measures::{evaluate_measure, EdgeList, MeasureRegistry};
use biasdoc_core::ns;
use biasdoc_core::query::{execute, parse_query, CompetencyLibrary};
use biasdoc_core::rdf::{parse_turtle, serialize_turtle, Graph, Iri, Literal, Term};
use biasdoc_core::reasoner::{materialize, InferredGraph, RuleSet};
use biasdoc_core::validate::{check_consistency, quality_indicators, scan_pitfalls, validate_instances, Severity};
use biasdoc_core::vocab::{
    register_bias_class, register_measure, seed_graph, ClassDef, NamespaceKind, NamespaceTable, VocabManifest,
};
use chrono::{DateTime, SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};

pub use docgen::{docgen, DocgenError, DocumentationBundle};

/// Environment variable naming the graph used when `--data` is absent.
pub const DATA_ENV: &str = "BIASDOC_DATA";

#[derive(Debug, Parser)]
#[command(name = "biasdoc", version, about = "Document, query and measure bias in ML pipelines as a knowledge graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and materialize a graph and print its size
    Load(LoadArgs),
    /// Run a SPARQL query file
    Query(QueryArgs),
    /// Answer a competency question
    Ask(AskArgs),
    /// Check instance data, consistency and modelling pitfalls
    Validate(ValidateArgs),
    /// Print quality indicators
    Report(ReportArgs),
    /// Compute a bias measure and record the evaluation
    Measure(MeasureArgs),
    /// Add bias classes, measures or evaluation details to a graph
    #[command(subcommand)]
    Annotate(Annotate),
    /// Render documentation for a resource
    Docgen(DocgenArgs),
}

#[derive(Debug, Args)]
struct DataArg {
    /// Turtle file, or `seed` for the built-in vocabulary
    #[arg(long, value_name = "PATH|seed")]
    data: Option<String>,
}

#[derive(Debug, Args)]
struct LoadArgs {
    #[command(flatten)]
    data: DataArg,
    /// Write base and inferred triples as Turtle to standard output
    #[arg(long)]
    materialize: bool,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long, value_name = "PATH")]
    file: String,
    #[command(flatten)]
    data: DataArg,
}

#[derive(Debug, Args)]
struct AskArgs {
    /// Question id, e.g. Q1, Q4.1, Q6
    id: String,
    #[command(flatten)]
    data: DataArg,
    /// Bias IRI for the `bias` placeholder
    #[arg(long)]
    bias: Option<String>,
    /// Pattern for the `measure` placeholder
    #[arg(long)]
    measure: Option<String>,
    /// Any other placeholder, as name=value
    #[arg(long, value_name = "NAME=VALUE")]
    bind: Vec<String>,
    /// Extra questions file with `[id]` headers
    #[arg(long, value_name = "PATH")]
    questions: Option<String>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(value_name = "PATH|seed", conflicts_with = "data")]
    source: Option<String>,
    #[command(flatten)]
    data: DataArg,
    /// Write every finding as tab-separated lines
    #[arg(long, value_name = "PATH")]
    report: Option<String>,
    /// Also list warnings
    #[arg(long)]
    all: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(value_name = "PATH|seed", conflicts_with = "data")]
    source: Option<String>,
    #[command(flatten)]
    data: DataArg,
    /// Where the vocabulary is published; defaults to the ontology IRI
    #[arg(long)]
    locator: Option<String>,
    /// Extra namespace counted as external
    #[arg(long = "external-ns", value_name = "IRI")]
    external: Vec<String>,
    /// Extra namespace counted as proprietary
    #[arg(long = "proprietary-ns", value_name = "IRI")]
    proprietary: Vec<String>,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// `gini-indegree` or the IRI of a registered measure
    name: String,
    #[arg(long, value_name = "PATH")]
    edges: String,
    #[arg(long, value_name = "PATH")]
    universe: Option<String>,
    #[arg(long, value_name = "IRI")]
    dataset: String,
    #[command(flatten)]
    data: DataArg,
    #[arg(long, value_name = "PATH")]
    out: String,
    /// RFC 3339 time of the evaluation; defaults to now
    #[arg(long)]
    timestamp: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Annotate {
    /// Declare a bias class
    Bias(AnnotateBias),
    /// Declare a bias measure
    Measure(AnnotateMeasure),
    /// Add task, application or document links to a recorded evaluation
    Evaluation(AnnotateEvaluation),
}

#[derive(Debug, Args)]
struct ClassArgs {
    #[arg(long)]
    iri: String,
    #[arg(long)]
    label: String,
    #[arg(long)]
    definition: Option<String>,
    /// Language tag of label and definition
    #[arg(long, default_value = "en")]
    lang: String,
    #[arg(long)]
    source: Option<String>,
}

#[derive(Debug, Args)]
struct AnnotateBias {
    #[command(flatten)]
    class: ClassArgs,
    /// Superclass; defaults to bias:Bias
    #[arg(long)]
    parent: Vec<String>,
    #[arg(long)]
    equivalent: Vec<String>,
    #[arg(long = "associated-with", value_name = "APPLICATION")]
    associated_with: Vec<String>,
    #[arg(long = "aligned-with", value_name = "HARM")]
    aligned_with: Vec<String>,
    #[command(flatten)]
    data: DataArg,
    #[arg(long, value_name = "PATH")]
    out: String,
}

#[derive(Debug, Args)]
struct AnnotateMeasure {
    #[command(flatten)]
    class: ClassArgs,
    /// The bias this measure quantifies
    #[arg(long, value_name = "BIAS")]
    measures: String,
    #[arg(long)]
    formalization: String,
    #[command(flatten)]
    data: DataArg,
    #[arg(long, value_name = "PATH")]
    out: String,
}

#[derive(Debug, Args)]
struct AnnotateEvaluation {
    #[arg(long)]
    iri: String,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    application: Option<String>,
    #[arg(long)]
    document: Option<String>,
    #[command(flatten)]
    data: DataArg,
    #[arg(long, value_name = "PATH")]
    out: String,
}

#[derive(Debug, Args)]
struct DocgenArgs {
    #[arg(long, value_name = "IRI")]
    subject: String,
    #[command(flatten)]
    data: DataArg,
    /// Write the report here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
}

enum Failure {
    Input(String),
    Internal(String),
}

fn input(e: impl Display) -> Failure {
    Failure::Input(e.to_string())
}

type Outcome = Result<i32, Failure>;

/// Runs one invocation; `args` includes the program name.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                0
            } else {
                let _ = write!(err, "{}", e.render());
                2
            };
        }
    };
    let result = match cli.command {
        Command::Load(a) => load(a, out, err),
        Command::Query(a) => query(a, out),
        Command::Ask(a) => ask(a, out),
        Command::Validate(a) => validate(a, out, err),
        Command::Report(a) => report(a, out),
        Command::Measure(a) => measure(a, out),
        Command::Annotate(a) => annotate(a, out),
        Command::Docgen(a) => doc(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Internal(m)) => {
            let _ = writeln!(err, "internal error: {m}");
            3
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Internal(e.to_string())
}

fn read(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

fn write_file(path: &str, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    if path == "-" {
        out.write_all(text.as_bytes()).map_err(io)
    } else {
        fs::write(path, text).map_err(|e| Failure::Input(format!("{path}: {e}")))
    }
}

fn data_source(flag: &DataArg, positional: Option<&String>) -> String {
    positional
        .or(flag.data.as_ref())
        .cloned()
        .or_else(|| std::env::var(DATA_ENV).ok().filter(|v| !v.is_empty()))
        .unwrap_or_else(|| "seed".to_owned())
}

/// Reads `seed` or a Turtle file.
pub fn load_graph(source: &str) -> Result<Graph, String> {
    if source == "seed" {
        return Ok(seed_graph());
    }
    let text = fs::read_to_string(source).map_err(|e| format!("{source}: {e}"))?;
    parse_turtle(&text).map_err(|e| format!("{source}:{e}"))
}

fn graph(flag: &DataArg, positional: Option<&String>) -> Result<(String, Graph), Failure> {
    let source = data_source(flag, positional);
    let g = load_graph(&source).map_err(Failure::Input)?;
    Ok((source, g))
}

fn closure_of(g: &Graph) -> InferredGraph {
    materialize(g, &RuleSet::rdfs_lite())
}

/// Accepts `<iri>`, `prefix:local` with a prefix declared in the graph, or an absolute IRI.
pub fn resolve_iri(text: &str, prefixes: &BTreeMap<String, Iri>) -> Result<Iri, String> {
    if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return Iri::new(inner).map_err(|e| e.to_string());
    }
    if let Some((prefix, local)) = text.split_once(':') {
        if let Some(ns) = prefixes.get(prefix) {
            return Iri::new(format!("{}{local}", ns.as_str())).map_err(|e| e.to_string());
        }
        if local.starts_with("//") || prefix == "urn" {
            return Iri::new(text).map_err(|e| e.to_string());
        }
    }
    Err(format!("`{text}` is not an IRI or known prefixed name"))
}

fn resolve(text: &str, g: &Graph) -> Result<Iri, Failure> {
    resolve_iri(text, g.prefixes()).map_err(Failure::Input)
}

fn load(a: LoadArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (_, g) = graph(&a.data, None)?;
    let ig = closure_of(&g);
    let summary = format!("{} triples, {} inferred", ig.base().len(), ig.inferred().len());
    if a.materialize {
        let mut inferred = ig.inferred().clone();
        for (name, iri) in g.prefixes() {
            inferred.set_prefix(name.clone(), iri.clone());
        }
        let body: String = serialize_turtle(&inferred)
            .lines()
            .filter(|l| !l.starts_with("@prefix"))
            .skip_while(|l| l.is_empty())
            .map(|l| format!("{l}\n"))
            .collect();
        write!(out, "{}\n# Inferred triples\n\n{body}", serialize_turtle(ig.base())).map_err(io)?;
        writeln!(err, "{summary}").map_err(io)?;
    } else {
        writeln!(out, "{summary}").map_err(io)?;
    }
    Ok(0)
}

fn query(a: QueryArgs, out: &mut dyn Write) -> Outcome {
    let text = read(&a.file)?;
    let plan = parse_query(&text).map_err(|e| Failure::Input(format!("{}:{e}", a.file)))?;
    let (_, g) = graph(&a.data, None)?;
    out.write_all(execute(&closure_of(&g), &plan).to_tsv().as_bytes()).map_err(io)?;
    Ok(0)
}

/// Binding values that look like IRIs become IRIs; anything else is a string literal.
fn binding_term(text: &str, g: &Graph) -> Term {
    match resolve_iri(text, g.prefixes()) {
        Ok(i) => Term::Iri(i),
        Err(_) => Term::Literal(Literal::string(text)),
    }
}

fn ask(a: AskArgs, out: &mut dyn Write) -> Outcome {
    let mut library = CompetencyLibrary::builtin();
    if let Some(path) = &a.questions {
        library.load(&read(path)?).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    }
    let (_, g) = graph(&a.data, None)?;
    let mut bindings = BTreeMap::new();
    if let Some(b) = &a.bias {
        bindings.insert("bias".to_owned(), Term::Iri(resolve(b, &g)?));
    }
    if let Some(m) = &a.measure {
        bindings.insert("measure".to_owned(), Term::Literal(Literal::string(m.as_str())));
    }
    for pair in &a.bind {
        let (k, v) =
            pair.split_once('=').ok_or_else(|| Failure::Input(format!("--bind expects NAME=VALUE, got `{pair}`")))?;
        bindings.insert(k.to_owned(), binding_term(v, &g));
    }
    let table = library.ask(&closure_of(&g), &a.id, &bindings).map_err(input)?;
    out.write_all(table.to_tsv().as_bytes()).map_err(io)?;
    Ok(0)
}

fn validate(a: ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (_, g) = graph(&a.data, a.source.as_ref())?;
    let manifest = VocabManifest::from_graph(&g, &NamespaceTable::default());
    let ig = closure_of(&g);
    let report = validate_instances(&ig, &manifest).merge(check_consistency(&ig)).merge(scan_pitfalls(&g, &manifest));
    if let Some(path) = &a.report {
        write_file(path, &report.to_tsv(), out)?;
    }
    let prefixes = g.prefixes();
    for f in report.findings() {
        if f.severity == Severity::Error || a.all {
            let subject = biasdoc_core::rdf::format_term(&f.subject, prefixes);
            writeln!(out, "{}[{}] {subject}: {}", f.severity, f.code, f.message).map_err(io)?;
        }
    }
    let errors = report.errors().count();
    let warnings = report.warnings().count();
    if errors == 0 {
        writeln!(out, "OK").map_err(io)?;
        if warnings > 0 && !a.all {
            writeln!(err, "{warnings} warnings (--all lists them)").map_err(io)?;
        }
        Ok(0)
    } else {
        writeln!(out, "{errors} errors, {warnings} warnings").map_err(io)?;
        Ok(1)
    }
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Outcome {
    let (source, g) = graph(&a.data, a.source.as_ref())?;
    let mut table = NamespaceTable::default();
    for ns in &a.external {
        table.insert(ns.clone(), NamespaceKind::External);
    }
    for ns in &a.proprietary {
        table.insert(ns.clone(), NamespaceKind::Proprietary);
    }
    let manifest = VocabManifest::from_graph(&g, &table);
    let locator = a.locator.clone().unwrap_or_else(|| {
        let ontology = Term::Iri(Iri::new(ns::owl::ONTOLOGY).expect("valid IRI"));
        let rdf_type = Iri::new(ns::rdf::TYPE).expect("valid IRI");
        g.subjects(&rdf_type, &ontology).find_map(Term::as_iri).map(|i| i.as_str().to_owned()).unwrap_or(source)
    });
    let q = quality_indicators(&g, &manifest, &locator).map_err(input)?;
    out.write_all(q.render().as_bytes()).map_err(io)?;
    Ok(0)
}

fn timestamp(text: Option<&String>) -> Result<DateTime<Utc>, Failure> {
    match text {
        Some(t) => DateTime::parse_from_rfc3339(t)
            .map(|d| d.with_timezone(&Utc))
            .map_err(|e| Failure::Input(format!("--timestamp `{t}`: {e}"))),
        None => {
            let now = Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true);
            Ok(DateTime::parse_from_rfc3339(&now).expect("round trip").with_timezone(&Utc))
        }
    }
}

fn measure(a: MeasureArgs, out: &mut dyn Write) -> Outcome {
    let (_, mut g) = graph(&a.data, None)?;
    let measure = match a.name.as_str() {
        "gini-indegree" => Iri::new(ns::bias::GINI_IN_DEGREE).expect("valid IRI"),
        other => resolve(other, &g)?,
    };
    let mut edges = EdgeList::parse(&read(&a.edges)?).map_err(|e| Failure::Input(format!("{}: {e}", a.edges)))?;
    if let Some(path) = &a.universe {
        edges = edges
            .with_universe(EdgeList::parse_universe(&read(path)?))
            .map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    }
    let dataset = resolve(&a.dataset, &g)?;
    let ts = timestamp(a.timestamp.as_ref())?;
    let (_, id, result) =
        evaluate_measure(&mut g, &MeasureRegistry::seed(), &measure, &edges, &dataset, ts).map_err(input)?;
    write_file(&a.out, &serialize_turtle(&g), out)?;
    let id = biasdoc_core::rdf::format_term(&Term::Iri(id), g.prefixes());
    if a.out != "-" {
        write!(
            out,
            "evaluation\t{id}\nvalue\t{}\nnodes\t{}\nsha256\t{}\n",
            result.value, result.n, result.input_digest
        )
        .map_err(io)?;
    }
    Ok(0)
}

fn class_def(c: &ClassArgs, g: &Graph) -> Result<ClassDef, Failure> {
    let mut def = ClassDef::new(resolve(&c.iri, g)?, c.label.clone());
    if let Some(d) = &c.definition {
        def = def.with_definition(Literal::lang(d.as_str(), c.lang.as_str()).map_err(input)?);
    }
    if let Some(s) = &c.source {
        def = def.with_source(s.clone());
    }
    Ok(def)
}

fn annotate(a: Annotate, out: &mut dyn Write) -> Outcome {
    let (subject, target) = match a {
        Annotate::Bias(b) => {
            let (_, mut g) = graph(&b.data, None)?;
            let mut def = class_def(&b.class, &g)?;
            for p in &b.parent {
                def = def.with_parent(resolve(p, &g)?);
            }
            for e in &b.equivalent {
                def = def.with_equivalent(resolve(e, &g)?);
            }
            let links: Vec<(&str, Iri)> = b
                .associated_with
                .iter()
                .map(|x| (ns::bias::IS_ASSOCIATED_WITH, x))
                .chain(b.aligned_with.iter().map(|x| (ns::bias::IS_ALIGNED_WITH, x)))
                .map(|(p, x)| resolve(x, &g).map(|i| (p, i)))
                .collect::<Result<_, _>>()?;
            let iri = register_bias_class(&mut g, &def).map_err(input)?;
            for (p, o) in links {
                g.add(iri.clone(), Iri::new(p).expect("valid IRI"), o).expect("IRI subject");
            }
            (iri, (g, b.out))
        }
        Annotate::Measure(m) => {
            let (_, mut g) = graph(&m.data, None)?;
            let def = class_def(&m.class, &g)?;
            let bias = resolve(&m.measures, &g)?;
            let formalization = Literal::lang(m.formalization.as_str(), m.class.lang.as_str()).map_err(input)?;
            let iri = register_measure(&mut g, &def, &bias, formalization).map_err(input)?;
            (iri, (g, m.out))
        }
        Annotate::Evaluation(e) => {
            let (_, mut g) = graph(&e.data, None)?;
            let iri = resolve(&e.iri, &g)?;
            let evaluation = Term::Iri(Iri::new(ns::bias::BIAS_EVALUATION).expect("valid IRI"));
            let rdf_type = Iri::new(ns::rdf::TYPE).expect("valid IRI");
            if !g.objects(&Term::Iri(iri.clone()), &rdf_type).any(|t| *t == evaluation) {
                return Err(Failure::Input(format!("{iri} is not a recorded bias evaluation")));
            }
            for (p, v) in [
                (ns::bias::FOR_TASK, &e.task),
                (ns::bias::IN_APPLICATION, &e.application),
                (ns::bias::DOCUMENTED_IN, &e.document),
            ] {
                if let Some(v) = v {
                    let o = resolve(v, &g)?;
                    g.add(iri.clone(), Iri::new(p).expect("valid IRI"), o).expect("IRI subject");
                }
            }
            (iri, (g, e.out))
        }
    };
    let (g, path) = target;
    write_file(&path, &serialize_turtle(&g), out)?;
    if path != "-" {
        writeln!(out, "{}", biasdoc_core::rdf::format_term(&Term::Iri(subject), g.prefixes())).map_err(io)?;
    }
    Ok(0)
}

fn doc(a: DocgenArgs, out: &mut dyn Write) -> Outcome {
    let (_, g) = graph(&a.data, None)?;
    let subject = resolve(&a.subject, &g)?;
    let bundle = docgen(&closure_of(&g), &subject).map_err(input)?;
    write_file(a.out.as_deref().unwrap_or("-"), &bundle.render(), out)?;
    Ok(0)
}
