//! A Turtle subset: prefix directives, IRIs, prefixed names, labeled blank
//! nodes, single-line strings with language tags or datatypes, numeric and
//! boolean literals, the `a` keyword, and `;` / `,` lists.
//!
//! Collections, `[ ]` blank nodes, `@base` and triple-quoted strings are
//! rejected with a syntax error.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::graph::Graph;
use super::term::{escape_string, BlankNode, Iri, Literal, Term, TermError, Triple};
use crate::ns;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurtleError {
    #[error("{line}:{column}: syntax error at `{token}`: {message}")]
    Syntax { line: usize, column: usize, token: String, message: String },
    #[error("{line}:{column}: undeclared prefix `{prefix}`")]
    UndeclaredPrefix { line: usize, column: usize, prefix: String },
    #[error("{line}:{column}: literal `{token}` in subject position")]
    LiteralSubject { line: usize, column: usize, token: String },
    #[error("{line}:{column}: {source}")]
    Term {
        line: usize,
        column: usize,
        #[source]
        source: TermError,
    },
}

impl TurtleError {
    /// 1-based line and column of the offending token.
    pub fn position(&self) -> (usize, usize) {
        match self {
            TurtleError::Syntax { line, column, .. }
            | TurtleError::UndeclaredPrefix { line, column, .. }
            | TurtleError::LiteralSubject { line, column, .. }
            | TurtleError::Term { line, column, .. } => (*line, *column),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    Blank(String),
    Str(String),
    AtWord(String),
    Carets,
    Integer(String),
    Decimal(String),
    Double(String),
    Boolean(bool),
    A,
    SparqlPrefix,
    Dot,
    Semicolon,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    text: String,
    line: usize,
    column: usize,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

impl Lexer {
    fn new(text: &str) -> Self {
        Lexer { chars: text.chars().collect(), pos: 0, line: 1, column: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, token: impl Into<String>, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax { line, column, token: token.into(), message: message.into() }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads name characters, leaving a trailing `.` for the statement terminator.
    fn read_name(&mut self, allow_colon: bool) -> String {
        let start = self.pos;
        let mut end = start;
        while let Some(c) = self.chars.get(end).copied() {
            if is_name_char(c) || (allow_colon && c == ':') {
                end += 1;
            } else {
                break;
            }
        }
        while end > start && self.chars[end - 1] == '.' {
            end -= 1;
        }
        let mut s = String::new();
        while self.pos < end {
            s.push(self.bump().expect("in bounds"));
        }
        s
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, TurtleError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, column, start) = (self.line, self.column, self.pos);
            let Some(c) = self.peek() else {
                out.push(Spanned { tok: Tok::Eof, text: "end of input".into(), line, column });
                return Ok(out);
            };
            let tok = match c {
                '<' => self.iri_ref(line, column)?,
                '"' | '\'' => self.string(line, column)?,
                '@' => {
                    self.bump();
                    let word = self.read_name(false);
                    if word.is_empty() {
                        return Err(self.error(line, column, "@", "expected a directive or language tag"));
                    }
                    Tok::AtWord(word)
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.error(line, column, "^", "expected `^^`"));
                    }
                    Tok::Carets
                }
                '.' if !self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                    self.bump();
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semicolon
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '_' if self.peek_at(1) == Some(':') => {
                    self.bump();
                    self.bump();
                    let label = self.read_name(false);
                    if label.is_empty() {
                        return Err(self.error(line, column, "_:", "empty blank node label"));
                    }
                    Tok::Blank(label)
                }
                '+' | '-' | '.' | '0'..='9' => self.number(line, column)?,
                ':' => {
                    self.bump();
                    let local = self.read_name(true);
                    Tok::PName { prefix: String::new(), local }
                }
                '[' | '(' | ']' | ')' => {
                    return Err(self.error(
                        line,
                        column,
                        c.to_string(),
                        "collections and bracketed blank nodes are not supported",
                    ))
                }
                c if is_name_start(c) => {
                    let word = self.read_name(false);
                    if self.peek() == Some(':') {
                        self.bump();
                        let local = self.read_name(true);
                        Tok::PName { prefix: word, local }
                    } else {
                        match word.as_str() {
                            "a" => Tok::A,
                            "true" => Tok::Boolean(true),
                            "false" => Tok::Boolean(false),
                            w if w.eq_ignore_ascii_case("prefix") => Tok::SparqlPrefix,
                            w if w.eq_ignore_ascii_case("base") => {
                                return Err(self.error(line, column, w, "BASE is not supported"))
                            }
                            w => return Err(self.error(line, column, w, "unexpected bare word")),
                        }
                    }
                }
                other => {
                    return Err(self.error(line, column, other.to_string(), "unexpected character"));
                }
            };
            let text: String = self.chars[start..self.pos].iter().collect();
            out.push(Spanned { tok, text, line, column });
        }
    }

    fn iri_ref(&mut self, line: usize, column: usize) -> Result<Tok, TurtleError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(Tok::IriRef(s)),
                Some('\\') => {
                    let c = self.unicode_escape(line, column)?;
                    s.push(c);
                }
                Some(c) if c.is_whitespace() => {
                    return Err(self.error(line, column, format!("<{s}"), "whitespace inside IRI"));
                }
                Some(c) => s.push(c),
                None => return Err(self.error(line, column, format!("<{s}"), "unterminated IRI")),
            }
        }
    }

    fn unicode_escape(&mut self, line: usize, column: usize) -> Result<char, TurtleError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            other => {
                return Err(self.error(line, column, format!("\\{}", other.unwrap_or(' ')), "invalid escape"));
            }
        };
        let mut hex = String::new();
        for _ in 0..width {
            match self.bump() {
                Some(h) if h.is_ascii_hexdigit() => hex.push(h),
                _ => return Err(self.error(line, column, format!("\\u{hex}"), "invalid unicode escape")),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.error(line, column, format!("\\u{hex}"), "escape is not a valid code point"))
    }

    fn string(&mut self, line: usize, column: usize) -> Result<Tok, TurtleError> {
        let quote = self.bump().expect("quote");
        if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
            return Err(self.error(line, column, quote.to_string().repeat(3), "multi-line strings are not supported"));
        }
        let mut s = String::new();
        loop {
            match self.bump() {
                Some(c) if c == quote => return Ok(Tok::Str(s)),
                Some('\\') => {
                    let esc = match self.peek() {
                        Some('t') => '\t',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') | Some('U') => {
                            let c = self.unicode_escape(line, column)?;
                            s.push(c);
                            continue;
                        }
                        other => {
                            return Err(self.error(
                                line,
                                column,
                                format!("\\{}", other.map(String::from).unwrap_or_default()),
                                "invalid string escape",
                            ))
                        }
                    };
                    self.bump();
                    s.push(esc);
                }
                Some('\n') | Some('\r') | None => {
                    return Err(self.error(line, column, format!("{quote}{s}"), "unterminated string"));
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self, line: usize, column: usize) -> Result<Tok, TurtleError> {
        let mut s = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            s.push(sign);
            self.bump();
        }
        let digits = |lx: &mut Lexer, s: &mut String| {
            let mut n = 0;
            while let Some(d) = lx.peek().filter(char::is_ascii_digit) {
                s.push(d);
                lx.bump();
                n += 1;
            }
            n
        };
        let int_digits = digits(self, &mut s);
        let mut frac_digits = 0;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
            s.push('.');
            self.bump();
            frac_digits = digits(self, &mut s);
        }
        if int_digits + frac_digits == 0 {
            return Err(self.error(line, column, s, "malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            s.push(e);
            self.bump();
            if let Some(sign @ ('+' | '-')) = self.peek() {
                s.push(sign);
                self.bump();
            }
            if digits(self, &mut s) == 0 {
                return Err(self.error(line, column, s, "malformed exponent"));
            }
            return Ok(Tok::Double(s));
        }
        Ok(if frac_digits > 0 { Tok::Decimal(s) } else { Tok::Integer(s) })
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: BTreeMap<String, Iri>,
    graph: Graph,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(t: &Spanned, message: &str) -> TurtleError {
        TurtleError::Syntax { line: t.line, column: t.column, token: t.text.clone(), message: message.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), TurtleError> {
        let t = self.next();
        if t.tok == tok {
            Ok(())
        } else {
            Err(Self::unexpected(&t, &format!("expected {what}")))
        }
    }

    fn make_iri(t: &Spanned, value: String) -> Result<Iri, TurtleError> {
        Iri::new(value).map_err(|source| TurtleError::Term { line: t.line, column: t.column, source })
    }

    fn resolve(&self, t: &Spanned) -> Result<Iri, TurtleError> {
        match &t.tok {
            Tok::IriRef(s) => Self::make_iri(t, s.clone()),
            Tok::PName { prefix, local } => {
                let ns = self.prefixes.get(prefix).ok_or_else(|| TurtleError::UndeclaredPrefix {
                    line: t.line,
                    column: t.column,
                    prefix: prefix.clone(),
                })?;
                Self::make_iri(t, format!("{}{}", ns.as_str(), local))
            }
            _ => Err(Self::unexpected(t, "expected an IRI")),
        }
    }

    fn document(mut self) -> Result<Graph, TurtleError> {
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::AtWord(w) if w == "prefix" => {
                    self.next();
                    self.prefix_body()?;
                    self.expect(Tok::Dot, "`.` after @prefix")?;
                }
                Tok::AtWord(w) => return Err(Self::unexpected(&t, &format!("unsupported directive @{w}"))),
                Tok::SparqlPrefix => {
                    self.next();
                    self.prefix_body()?;
                }
                _ => {
                    self.triples()?;
                    self.expect(Tok::Dot, "`.` to end the statement")?;
                }
            }
        }
        for (name, iri) in &self.prefixes {
            self.graph.set_prefix(name.clone(), iri.clone());
        }
        Ok(self.graph)
    }

    fn prefix_body(&mut self) -> Result<(), TurtleError> {
        let name = self.next();
        let Tok::PName { prefix, local } = &name.tok else {
            return Err(Self::unexpected(&name, "expected a prefix name like `ex:`"));
        };
        if !local.is_empty() {
            return Err(Self::unexpected(&name, "prefix name must end with `:`"));
        }
        let target = self.next();
        let Tok::IriRef(s) = &target.tok else {
            return Err(Self::unexpected(&target, "expected `<iri>` for the prefix"));
        };
        let iri = Self::make_iri(&target, s.clone())?;
        self.prefixes.insert(prefix.clone(), iri);
        Ok(())
    }

    fn subject(&mut self) -> Result<Term, TurtleError> {
        let t = self.next();
        match &t.tok {
            Tok::IriRef(_) | Tok::PName { .. } => Ok(Term::Iri(self.resolve(&t)?)),
            Tok::Blank(label) => Ok(Term::Blank(Self::blank(&t, label)?)),
            Tok::Str(_) | Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_) | Tok::Boolean(_) => {
                Err(TurtleError::LiteralSubject { line: t.line, column: t.column, token: t.text.clone() })
            }
            _ => Err(Self::unexpected(&t, "expected a subject")),
        }
    }

    fn blank(t: &Spanned, label: &str) -> Result<BlankNode, TurtleError> {
        BlankNode::new(label).map_err(|source| TurtleError::Term { line: t.line, column: t.column, source })
    }

    fn verb(&mut self) -> Result<Iri, TurtleError> {
        let t = self.next();
        match &t.tok {
            Tok::A => Ok(Iri::from_static(ns::rdf::TYPE)),
            Tok::IriRef(_) | Tok::PName { .. } => self.resolve(&t),
            _ => Err(Self::unexpected(&t, "expected a predicate")),
        }
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        let t = self.next();
        let typed = |lex: &str, dt: &str| Term::Literal(Literal::typed(lex, Iri::from_static(dt)));
        match &t.tok {
            Tok::IriRef(_) | Tok::PName { .. } => Ok(Term::Iri(self.resolve(&t)?)),
            Tok::Blank(label) => Ok(Term::Blank(Self::blank(&t, label)?)),
            Tok::Integer(s) => Ok(typed(s, ns::xsd::INTEGER)),
            Tok::Decimal(s) => Ok(typed(s, ns::xsd::DECIMAL)),
            Tok::Double(s) => Ok(typed(s, ns::xsd::DOUBLE)),
            Tok::Boolean(b) => Ok(typed(if *b { "true" } else { "false" }, ns::xsd::BOOLEAN)),
            Tok::Str(lex) => {
                let next = self.peek().clone();
                match &next.tok {
                    Tok::AtWord(tag) => {
                        self.next();
                        Literal::lang(lex.clone(), tag.clone()).map(Term::Literal).map_err(|source| TurtleError::Term {
                            line: next.line,
                            column: next.column,
                            source,
                        })
                    }
                    Tok::Carets => {
                        self.next();
                        let dt = self.next();
                        let dt = self.resolve(&dt)?;
                        Ok(Term::Literal(Literal::typed(lex.clone(), dt)))
                    }
                    _ => Ok(Term::Literal(Literal::string(lex.clone()))),
                }
            }
            _ => Err(Self::unexpected(&t, "expected an object")),
        }
    }

    fn triples(&mut self) -> Result<(), TurtleError> {
        let subject = self.subject()?;
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.object()?;
                let triple = Triple::new(subject.clone(), predicate.clone(), object).expect("subject checked");
                self.graph.insert(&triple);
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            if self.peek().tok != Tok::Semicolon {
                return Ok(());
            }
            while self.peek().tok == Tok::Semicolon {
                self.next();
            }
            if matches!(self.peek().tok, Tok::Dot | Tok::Eof) {
                return Ok(());
            }
        }
    }
}

/// Parses a Turtle document in the supported subset.
pub fn parse_turtle(text: &str) -> Result<Graph, TurtleError> {
    let toks = Lexer::new(text).tokens()?;
    Parser { toks, pos: 0, prefixes: BTreeMap::new(), graph: Graph::new() }.document()
}

fn is_pn_local(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        None => return true,
        Some(c) if c.is_alphanumeric() || c == '_' => {}
        Some(_) => return false,
    }
    s.chars().all(|c| is_name_char(c) || c == ':') && !s.ends_with('.')
}

fn is_pn_prefix(s: &str) -> bool {
    s.is_empty() || (s.starts_with(is_name_start) && s.chars().all(is_name_char) && !s.ends_with('.'))
}

/// Renders a term in Turtle syntax, compacting IRIs with `prefixes` where possible.
pub fn format_term(term: &Term, prefixes: &BTreeMap<String, Iri>) -> String {
    Writer { prefixes }.term(term)
}

struct Writer<'a> {
    prefixes: &'a BTreeMap<String, Iri>,
}

impl Writer<'_> {
    fn iri(&self, iri: &Iri) -> String {
        let best = self
            .prefixes
            .iter()
            .filter(|(name, ns)| is_pn_prefix(name) && iri.as_str().starts_with(ns.as_str()))
            .filter(|(_, ns)| is_pn_local(&iri.as_str()[ns.as_str().len()..]))
            .max_by(|(na, a), (nb, b)| a.as_str().len().cmp(&b.as_str().len()).then(nb.cmp(na)));
        match best {
            Some((name, ns)) => format!("{name}:{}", &iri.as_str()[ns.as_str().len()..]),
            None => format!("<{}>", iri.as_str()),
        }
    }

    fn term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::Blank(b) => format!("_:{}", b.label()),
            Term::Literal(lit) => self.literal(lit),
        }
    }

    fn literal(&self, lit: &Literal) -> String {
        let lex = lit.lexical();
        if let Some(tag) = lit.language() {
            return format!("\"{}\"@{tag}", escape_string(lex));
        }
        let bare = match lit.datatype() {
            ns::xsd::STRING => return format!("\"{}\"", escape_string(lex)),
            ns::xsd::INTEGER => is_integer_lexical(lex),
            ns::xsd::DECIMAL => is_decimal_lexical(lex),
            ns::xsd::BOOLEAN => lex == "true" || lex == "false",
            _ => false,
        };
        if bare {
            lex.to_owned()
        } else {
            let dt = Iri::new(lit.datatype()).expect("datatype is an IRI");
            format!("\"{}\"^^{}", escape_string(lex), self.iri(&dt))
        }
    }
}

fn is_integer_lexical(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

fn is_decimal_lexical(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            !int.is_empty()
                && !frac.is_empty()
                && int.chars().all(|c| c.is_ascii_digit())
                && frac.chars().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

/// Renames blank nodes `b0, b1, …` in first-occurrence order over the sorted triples.
fn canonical_triples(g: &Graph) -> Vec<Triple> {
    let sorted: Vec<Triple> = g.to_set().into_iter().collect();
    let mut names: HashMap<BlankNode, BlankNode> = HashMap::new();
    let mut rename = |t: &Term| -> Term {
        match t {
            Term::Blank(b) => {
                let next = names.len();
                Term::Blank(
                    names
                        .entry(b.clone())
                        .or_insert_with(|| BlankNode::new(format!("b{next}")).expect("valid label"))
                        .clone(),
                )
            }
            other => other.clone(),
        }
    };
    let mut out: Vec<Triple> = sorted
        .iter()
        .map(|t| {
            let s = rename(t.subject());
            let o = rename(t.object());
            Triple::new(s, t.predicate().clone(), o).expect("renaming keeps positions")
        })
        .collect();
    out.sort();
    out
}

/// Serializes a graph deterministically: prefixes sorted by name, then
/// statements grouped by subject in (subject, predicate, object) order.
pub fn serialize_turtle(g: &Graph) -> String {
    let w = Writer { prefixes: g.prefixes() };
    let mut out = String::new();
    for (name, iri) in g.prefixes() {
        let _ = writeln!(out, "@prefix {name}: <{}> .", iri.as_str());
    }
    let triples = canonical_triples(g);
    if triples.is_empty() {
        return out;
    }
    if !out.is_empty() {
        out.push('\n');
    }
    let rdf_type = Iri::from_static(ns::rdf::TYPE);
    let mut i = 0;
    while i < triples.len() {
        let subject = triples[i].subject();
        let _ = write!(out, "{}", w.term(subject));
        let mut first_pred = true;
        while i < triples.len() && triples[i].subject() == subject {
            let predicate = triples[i].predicate();
            let verb = if *predicate == rdf_type { "a".to_owned() } else { w.iri(predicate) };
            let mut objects = Vec::new();
            while i < triples.len() && triples[i].subject() == subject && triples[i].predicate() == predicate {
                objects.push(w.term(triples[i].object()));
                i += 1;
            }
            if first_pred {
                out.push(' ');
                first_pred = false;
            } else {
                out.push_str(" ;\n    ");
            }
            let _ = write!(out, "{verb} {}", objects.join(" , "));
        }
        out.push_str(" .\n");
        if i < triples.len() {
            out.push('\n');
        }
    }
    out
}
