use std::collections::{BTreeMap, BTreeSet};

use super::{FilterExpr, Projection, QueryError, QueryPlan, Slot, TriplePattern};
use crate::ns;
use crate::rdf::{Iri, Literal, Term};

const UNSUPPORTED: &[&str] = &[
    "OPTIONAL",
    "UNION",
    "MINUS",
    "ORDER",
    "LIMIT",
    "OFFSET",
    "CONSTRUCT",
    "ASK",
    "DESCRIBE",
    "SERVICE",
    "BIND",
    "VALUES",
    "GRAPH",
    "HAVING",
    "BASE",
    "FROM",
    "NAMED",
    "EXISTS",
    "INSERT",
    "DELETE",
    "LOAD",
    "CLEAR",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Str(String),
    LangTag(String),
    Carets,
    Number(String),
    Word(String),
    Punct(&'static str),
    Blank(String),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Iri(s) => format!("<{s}>"),
        Tok::PName(p, l) => format!("{p}:{l}"),
        Tok::Var(v) => format!("?{v}"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::LangTag(t) => format!("@{t}"),
        Tok::Carets => "^^".into(),
        Tok::Number(n) => n.clone(),
        Tok::Word(w) => w.clone(),
        Tok::Punct(p) => (*p).into(),
        Tok::Blank(b) => format!("_:{b}"),
        Tok::Eof => "end of input".into(),
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> QueryError {
        QueryError::Syntax { line, column, message: message.into() }
    }

    fn tokens(mut self) -> Result<Vec<Token>, QueryError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '#' {
                    self.take_while(|c| c != '\n');
                } else {
                    break;
                }
            }
            let (line, column) = (self.line, self.column);
            let mut trailing_dots = 0;
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, line, column });
                return Ok(out);
            };
            let tok = match c {
                '<' => {
                    self.bump();
                    if self.peek() == Some('=') || self.peek().is_some_and(char::is_whitespace) {
                        return Err(QueryError::Unsupported { feature: "comparison operators".into(), line, column });
                    }
                    let s = self.take_while(|c| c != '>' && c != '\n');
                    if self.bump() != Some('>') {
                        return Err(self.err(line, column, "unterminated IRI"));
                    }
                    Tok::Iri(s)
                }
                '?' | '$' => {
                    self.bump();
                    let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                    if name.is_empty() {
                        return Err(self.err(line, column, "expected variable name"));
                    }
                    Tok::Var(name)
                }
                '"' | '\'' => Tok::Str(self.string(c, line, column)?),
                '@' => {
                    self.bump();
                    let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                    if tag.is_empty() {
                        return Err(self.err(line, column, "expected language tag"));
                    }
                    Tok::LangTag(tag)
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.err(line, column, "expected `^^`"));
                    }
                    Tok::Carets
                }
                '_' => {
                    self.bump();
                    if self.bump() != Some(':') {
                        return Err(self.err(line, column, "expected `_:`"));
                    }
                    Tok::Blank(self.take_while(is_name_char))
                }
                c if c.is_ascii_digit() => {
                    let mut n = self.take_while(|c| c.is_ascii_digit());
                    if self.peek() == Some('.') {
                        let mut ahead = self.chars.clone();
                        ahead.next();
                        if ahead.peek().is_some_and(char::is_ascii_digit) {
                            self.bump();
                            n.push('.');
                            n.push_str(&self.take_while(|c| c.is_ascii_digit()));
                        }
                    }
                    Tok::Number(n)
                }
                c if c.is_alphabetic() || c == ':' => {
                    let word = self.take_while(is_name_char);
                    if self.peek() == Some(':') {
                        self.bump();
                        let mut local = self.take_while(|c| is_name_char(c) || c == '.' || c == ':');
                        // Trailing dots terminate the statement, they are not part of the name.
                        while local.ends_with('.') {
                            local.pop();
                            trailing_dots += 1;
                        }
                        Tok::PName(word, local)
                    } else {
                        let upper = word.to_ascii_uppercase();
                        if UNSUPPORTED.contains(&upper.as_str()) {
                            return Err(QueryError::Unsupported { feature: upper, line, column });
                        }
                        Tok::Word(word)
                    }
                }
                _ => {
                    self.bump();
                    let two = |l: &mut Self, second: char, both: &'static str, one: Option<&'static str>| {
                        if l.peek() == Some(second) {
                            l.bump();
                            Ok(both)
                        } else {
                            one.ok_or_else(|| l.err(line, column, format!("unexpected character `{c}`")))
                        }
                    };
                    let p = match c {
                        '{' => "{",
                        '}' => "}",
                        '(' => "(",
                        ')' => ")",
                        '.' => ".",
                        ';' => ";",
                        ',' => ",",
                        '*' => "*",
                        '=' => "=",
                        '!' => two(&mut self, '=', "!=", Some("!"))?,
                        '&' => two(&mut self, '&', "&&", None)?,
                        '|' => two(&mut self, '|', "||", None)?,
                        '[' | ']' => {
                            return Err(QueryError::Unsupported { feature: "anonymous nodes".into(), line, column })
                        }
                        '>' | '+' | '/' => {
                            return Err(QueryError::Unsupported { feature: format!("operator `{c}`"), line, column })
                        }
                        _ => return Err(self.err(line, column, format!("unexpected character `{c}`"))),
                    };
                    Tok::Punct(p)
                }
            };
            out.push(Token { tok, line, column });
            for i in 0..trailing_dots {
                out.push(Token { tok: Tok::Punct("."), line: self.line, column: self.column - trailing_dots + i });
            }
        }
    }

    fn string(&mut self, quote: char, line: usize, column: usize) -> Result<String, QueryError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.err(line, column, "unterminated string")),
                Some(c) if c == quote => return Ok(s),
                Some('\\') => {
                    let e = self.bump();
                    s.push(match e {
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        _ => return Err(self.err(self.line, self.column - 1, "invalid escape")),
                    });
                }
                Some(c) => s.push(c),
            }
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    prefixes: BTreeMap<String, Iri>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, t: &Token, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("{} (found {})", message.into(), describe(&t.tok)),
        }
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn expect_word(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.is_word(kw) {
            self.next();
            Ok(())
        } else {
            Err(self.syntax(self.peek(), format!("expected {kw}")))
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), QueryError> {
        if self.is_punct(p) {
            self.next();
            Ok(())
        } else {
            Err(self.syntax(self.peek(), format!("expected `{p}`")))
        }
    }

    fn var(&mut self) -> Result<String, QueryError> {
        match self.next() {
            Token { tok: Tok::Var(v), .. } => Ok(v),
            t => Err(self.syntax(&t, "expected variable")),
        }
    }

    fn resolve(&self, t: &Token, prefix: &str, local: &str) -> Result<Iri, QueryError> {
        let ns = self.prefixes.get(prefix).ok_or_else(|| QueryError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("undeclared prefix `{prefix}:`"),
        })?;
        self.make_iri(t, format!("{}{local}", ns.as_str()))
    }

    fn make_iri(&self, t: &Token, s: String) -> Result<Iri, QueryError> {
        Iri::new(s).map_err(|e| QueryError::Syntax { line: t.line, column: t.column, message: e.to_string() })
    }

    fn query(mut self) -> Result<QueryPlan, QueryError> {
        while self.is_word("PREFIX") {
            self.next();
            let t = self.next();
            let Tok::PName(name, local) = &t.tok else {
                return Err(self.syntax(&t, "expected prefix name"));
            };
            if !local.is_empty() {
                return Err(self.syntax(&t, "expected prefix name"));
            }
            let it = self.next();
            let Tok::Iri(s) = &it.tok else {
                return Err(self.syntax(&it, "expected IRI"));
            };
            let iri = self.make_iri(&it, s.clone())?;
            self.prefixes.insert(name.clone(), iri);
        }
        self.expect_word("SELECT")?;
        let distinct = if self.is_word("DISTINCT") {
            self.next();
            true
        } else {
            false
        };
        let mut projection = Vec::new();
        let mut star = false;
        if self.is_punct("*") {
            self.next();
            star = true;
        } else {
            loop {
                match &self.peek().tok {
                    Tok::Var(_) => projection.push(Projection::Var(self.var()?)),
                    Tok::Punct("(") => projection.push(self.aggregate()?),
                    _ => break,
                }
            }
            if projection.is_empty() {
                return Err(self.syntax(self.peek(), "expected projection"));
            }
        }
        if self.is_word("WHERE") {
            self.next();
        }
        self.expect_punct("{")?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        self.group_body(&mut patterns, &mut filters)?;
        self.expect_punct("}")?;
        let mut group_by = Vec::new();
        if self.is_word("GROUP") {
            self.next();
            self.expect_word("BY")?;
            while let Tok::Var(_) = self.peek().tok {
                group_by.push(self.var()?);
            }
            if group_by.is_empty() {
                return Err(self.syntax(self.peek(), "expected GROUP BY variable"));
            }
        }
        let end = self.next();
        if end.tok != Tok::Eof {
            return Err(self.syntax(&end, "expected end of query"));
        }
        if star {
            let mut seen = BTreeSet::new();
            for p in &patterns {
                for v in p.variables() {
                    if seen.insert(v.to_owned()) {
                        projection.push(Projection::Var(v.to_owned()));
                    }
                }
            }
        }
        let plan = QueryPlan { prefixes: self.prefixes, projection, distinct, patterns, filters, group_by };
        plan.validate()?;
        Ok(plan)
    }

    fn aggregate(&mut self) -> Result<Projection, QueryError> {
        self.expect_punct("(")?;
        let t = self.peek().clone();
        if !self.is_word("COUNT") {
            return match &t.tok {
                Tok::Word(w) => Err(QueryError::Unsupported {
                    feature: format!("{} aggregate", w.to_ascii_uppercase()),
                    line: t.line,
                    column: t.column,
                }),
                _ => Err(self.syntax(&t, "expected COUNT")),
            };
        }
        self.next();
        self.expect_punct("(")?;
        let distinct = if self.is_word("DISTINCT") {
            self.next();
            true
        } else {
            false
        };
        if self.is_punct("*") {
            let t = self.peek().clone();
            return Err(QueryError::Unsupported { feature: "COUNT(*)".into(), line: t.line, column: t.column });
        }
        let var = self.var()?;
        self.expect_punct(")")?;
        self.expect_word("AS")?;
        let alias = self.var()?;
        self.expect_punct(")")?;
        Ok(Projection::Count { var, distinct, alias })
    }

    fn group_body(
        &mut self,
        patterns: &mut Vec<TriplePattern>,
        filters: &mut Vec<FilterExpr>,
    ) -> Result<(), QueryError> {
        loop {
            if self.is_punct("}") {
                return Ok(());
            }
            if self.is_word("FILTER") {
                self.next();
                filters.push(self.constraint()?);
                if self.is_punct(".") {
                    self.next();
                }
                continue;
            }
            if self.is_punct("{") {
                let t = self.peek().clone();
                return Err(QueryError::Unsupported {
                    feature: "nested group patterns".into(),
                    line: t.line,
                    column: t.column,
                });
            }
            self.triples(patterns)?;
            if self.is_punct(".") {
                self.next();
            } else if !self.is_punct("}") && !self.is_word("FILTER") {
                return Err(self.syntax(self.peek(), "expected `.` or `}`"));
            }
        }
    }

    fn triples(&mut self, patterns: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.slot(false)?;
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.slot(true)?;
                patterns.push(TriplePattern { subject: subject.clone(), predicate: predicate.clone(), object });
                if self.is_punct(",") {
                    self.next();
                } else {
                    break;
                }
            }
            if !self.is_punct(";") {
                return Ok(());
            }
            while self.is_punct(";") {
                self.next();
            }
            if self.is_punct(".") || self.is_punct("}") || self.is_word("FILTER") {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<Slot, QueryError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Word(w) if w == "a" => {
                self.next();
                Ok(Slot::Term(Term::Iri(self.make_iri(&t, ns::rdf::TYPE.into())?)))
            }
            Tok::Var(_) => Ok(Slot::Var(self.var()?)),
            Tok::Iri(s) => {
                self.next();
                Ok(Slot::Term(Term::Iri(self.make_iri(&t, s.clone())?)))
            }
            Tok::PName(p, l) => {
                self.next();
                Ok(Slot::Term(Term::Iri(self.resolve(&t, p, l)?)))
            }
            Tok::Punct("(") | Tok::Punct("!") => {
                Err(QueryError::Unsupported { feature: "property paths".into(), line: t.line, column: t.column })
            }
            _ => Err(self.syntax(&t, "expected predicate")),
        }
    }

    fn slot(&mut self, object: bool) -> Result<Slot, QueryError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Var(_) => Ok(Slot::Var(self.var()?)),
            Tok::Blank(_) => Err(QueryError::Unsupported {
                feature: "blank nodes in patterns".into(),
                line: t.line,
                column: t.column,
            }),
            Tok::Punct("(") => {
                Err(QueryError::Unsupported { feature: "collections".into(), line: t.line, column: t.column })
            }
            _ => {
                let term = self.term_constant()?;
                if !object && matches!(term, Term::Literal(_)) {
                    return Err(QueryError::Syntax {
                        line: t.line,
                        column: t.column,
                        message: "literal in subject position".into(),
                    });
                }
                Ok(Slot::Term(term))
            }
        }
    }

    fn term_constant(&mut self) -> Result<Term, QueryError> {
        let t = self.next();
        match &t.tok {
            Tok::Iri(s) => Ok(Term::Iri(self.make_iri(&t, s.clone())?)),
            Tok::PName(p, l) => Ok(Term::Iri(self.resolve(&t, p, l)?)),
            Tok::Str(s) => {
                let s = s.clone();
                match self.peek().tok.clone() {
                    Tok::LangTag(tag) => {
                        let tt = self.next();
                        Literal::lang(s, tag).map(Term::Literal).map_err(|e| QueryError::Syntax {
                            line: tt.line,
                            column: tt.column,
                            message: e.to_string(),
                        })
                    }
                    Tok::Carets => {
                        self.next();
                        let dt = self.next();
                        let iri = match &dt.tok {
                            Tok::Iri(i) => self.make_iri(&dt, i.clone())?,
                            Tok::PName(p, l) => self.resolve(&dt, p, l)?,
                            _ => return Err(self.syntax(&dt, "expected datatype IRI")),
                        };
                        Ok(Term::Literal(Literal::typed(s, iri)))
                    }
                    _ => Ok(Term::Literal(Literal::string(s))),
                }
            }
            Tok::Number(n) => {
                let dt = if n.contains('.') { ns::xsd::DECIMAL } else { ns::xsd::INTEGER };
                Ok(Term::Literal(Literal::typed(n.clone(), self.make_iri(&t, dt.into())?)))
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                Ok(Term::Literal(Literal::typed(w.clone(), self.make_iri(&t, ns::xsd::BOOLEAN.into())?)))
            }
            _ => Err(self.syntax(&t, "expected term")),
        }
    }

    fn constraint(&mut self) -> Result<FilterExpr, QueryError> {
        if self.is_punct("(") {
            self.next();
            let e = self.expr()?;
            self.expect_punct(")")?;
            Ok(e)
        } else {
            self.call()
        }
    }

    fn expr(&mut self) -> Result<FilterExpr, QueryError> {
        let mut left = self.and()?;
        while self.is_punct("||") {
            self.next();
            left = FilterExpr::Or(Box::new(left), Box::new(self.and()?));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<FilterExpr, QueryError> {
        let mut left = self.relational()?;
        while self.is_punct("&&") {
            self.next();
            left = FilterExpr::And(Box::new(left), Box::new(self.relational()?));
        }
        Ok(left)
    }

    fn relational(&mut self) -> Result<FilterExpr, QueryError> {
        let left = self.unary()?;
        if self.is_punct("=") {
            self.next();
            return Ok(FilterExpr::Eq(Box::new(left), Box::new(self.unary()?)));
        }
        if self.is_punct("!=") {
            self.next();
            return Ok(FilterExpr::Not(Box::new(FilterExpr::Eq(Box::new(left), Box::new(self.unary()?)))));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<FilterExpr, QueryError> {
        if self.is_punct("!") {
            self.next();
            return Ok(FilterExpr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<FilterExpr, QueryError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Punct("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Var(_) => Ok(FilterExpr::Var(self.var()?)),
            Tok::Word(w) if w != "true" && w != "false" => self.call(),
            _ => Ok(FilterExpr::Const(self.term_constant()?)),
        }
    }

    fn call(&mut self) -> Result<FilterExpr, QueryError> {
        let t = self.next();
        let Tok::Word(name) = &t.tok else {
            return Err(self.syntax(&t, "expected `(` or function call"));
        };
        let upper = name.to_ascii_uppercase();
        match upper.as_str() {
            "STR" => {
                self.expect_punct("(")?;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(FilterExpr::Str(Box::new(e)))
            }
            "REGEX" => {
                self.expect_punct("(")?;
                let text = self.expr()?;
                self.expect_punct(",")?;
                let pt = self.next();
                let Tok::Str(pattern) = pt.tok.clone() else {
                    return Err(self.syntax(&pt, "expected pattern string"));
                };
                let mut flags = String::new();
                if self.is_punct(",") {
                    self.next();
                    let ft = self.next();
                    let Tok::Str(f) = ft.tok.clone() else {
                        return Err(self.syntax(&ft, "expected flags string"));
                    };
                    if !f.is_empty() && f != "i" {
                        return Err(QueryError::Syntax {
                            line: ft.line,
                            column: ft.column,
                            message: format!("REGEX flags must be \"\" or \"i\", found \"{f}\""),
                        });
                    }
                    flags = f;
                }
                self.expect_punct(")")?;
                let case_insensitive = flags == "i";
                super::compile_regex(&pattern, case_insensitive).map_err(|e| QueryError::Syntax {
                    line: pt.line,
                    column: pt.column,
                    message: e,
                })?;
                Ok(FilterExpr::Regex { text: Box::new(text), pattern, case_insensitive })
            }
            _ if self.is_punct("(") => {
                Err(QueryError::Unsupported { feature: format!("function {upper}"), line: t.line, column: t.column })
            }
            _ => Err(self.syntax(&t, "expected expression")),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<QueryPlan, QueryError> {
    let toks = Lexer::new(text).tokens()?;
    Parser { toks, pos: 0, prefixes: BTreeMap::new() }.query()
}
