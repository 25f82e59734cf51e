use std::collections::BTreeMap;

use super::{Order, PatternTerm, Projection, Query, QueryError, QueryErrorKind, TriplePattern};
use crate::rdf::Term;
use crate::vocab;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Literal(Term),
    Integer(String),
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const UNSUPPORTED: &[&str] = &[
    "FILTER", "OPTIONAL", "UNION", "MINUS", "BIND", "VALUES", "GRAPH", "SERVICE", "HAVING", "OFFSET", "CONSTRUCT",
    "ASK", "DESCRIBE", "FROM", "BASE", "SUM", "AVG", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT", "INSERT", "DELETE",
];

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Lexer<'_> {
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

    fn err(&self, kind: QueryErrorKind) -> QueryError {
        QueryError { line: self.line, column: self.column, kind }
    }

    fn name(&mut self) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' || (c == '.' && !s.is_empty() && self.dot_continues()) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    // a '.' inside a prefixed name only if followed by a name character
    fn dot_continues(&self) -> bool {
        let mut ahead = self.chars.clone();
        ahead.next();
        ahead.next().is_some_and(|c| c.is_alphanumeric() || c == '_')
    }

    fn string(&mut self, quote: char) -> Result<String, QueryError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.err(QueryErrorKind::Syntax("unterminated string".into()))),
                Some(c) if c == quote => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some(c @ ('"' | '\'' | '\\')) => s.push(c),
                    _ => return Err(self.err(QueryErrorKind::Syntax("bad escape".into()))),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, QueryError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let (line, column) = (self.line, self.column);
            let tok = match c {
                c if c.is_whitespace() => {
                    self.bump();
                    continue;
                }
                '#' => {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                    continue;
                }
                '<' => {
                    self.bump();
                    let mut iri = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some(c) if !c.is_whitespace() => iri.push(c),
                            _ => return Err(self.err(QueryErrorKind::Syntax("unterminated IRI".into()))),
                        }
                    }
                    Tok::Iri(iri)
                }
                '?' | '$' => {
                    self.bump();
                    let name = self.name();
                    if name.is_empty() {
                        return Err(self.err(QueryErrorKind::Syntax("empty variable name".into())));
                    }
                    Tok::Var(name)
                }
                '"' | '\'' => {
                    self.bump();
                    let value = self.string(c)?;
                    if self.chars.peek() == Some(&'@') {
                        self.bump();
                        Tok::Literal(Term::lang(value, self.name()))
                    } else if self.chars.peek() == Some(&'^') {
                        self.bump();
                        if self.bump() != Some('^') {
                            return Err(self.err(QueryErrorKind::Syntax("expected ^^".into())));
                        }
                        // the parser attaches the datatype that follows the marker
                        out.push(Token { tok: Tok::Literal(Term::string(value)), line, column });
                        out.push(Token { tok: Tok::Punct('^'), line: self.line, column: self.column });
                        continue;
                    } else {
                        Tok::Literal(Term::string(value))
                    }
                }
                c if c.is_ascii_digit() || ((c == '-' || c == '+') && self.sign_starts_number()) => {
                    let mut n = String::new();
                    n.push(c);
                    self.bump();
                    while let Some(&d) = self.chars.peek() {
                        if d.is_ascii_digit() {
                            n.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Integer(n)
                }
                '{' | '}' | '(' | ')' | '.' | ';' | ',' | '*' | '[' | ']' => {
                    self.bump();
                    Tok::Punct(c)
                }
                c if c.is_alphabetic() || c == ':' || c == '_' => {
                    let first = self.name();
                    if self.chars.peek() == Some(&':') {
                        self.bump();
                        let local = self.name();
                        Tok::PName(first, local)
                    } else {
                        Tok::Word(first)
                    }
                }
                other => return Err(self.err(QueryErrorKind::Syntax(format!("unexpected character {other:?}")))),
            };
            out.push(Token { tok, line, column });
        }
        Ok(out)
    }

    fn sign_starts_number(&self) -> bool {
        let mut ahead = self.chars.clone();
        ahead.next();
        ahead.next().is_some_and(|c| c.is_ascii_digit())
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn at(&self) -> (usize, usize) {
        self.tokens.get(self.pos).map_or(self.end, |t| (t.line, t.column))
    }

    fn err(&self, kind: QueryErrorKind) -> QueryError {
        let (line, column) = self.at();
        QueryError { line, column, kind }
    }

    fn syntax(&self, msg: impl Into<String>) -> QueryError {
        self.err(QueryErrorKind::Syntax(msg.into()))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn check_unsupported(&self) -> Result<(), QueryError> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED.contains(&upper.as_str()) {
                return Err(self.err(QueryErrorKind::Unsupported(upper)));
            }
        }
        Ok(())
    }

    fn expect_word(&mut self, w: &str) -> Result<(), QueryError> {
        self.check_unsupported()?;
        if self.is_word(w) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected {w}")))
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QueryError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected '{c}'")))
        }
    }

    fn var(&mut self) -> Result<String, QueryError> {
        match self.next() {
            Some(Tok::Var(v)) => Ok(v),
            _ => {
                self.pos -= 1;
                Err(self.syntax("expected a variable"))
            }
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<String, QueryError> {
        self.prefixes
            .get(prefix)
            .map(|ns| format!("{ns}{local}"))
            .ok_or_else(|| self.err(QueryErrorKind::UndefinedPrefix(prefix.to_string())))
    }

    fn term(&mut self, predicate: bool) -> Result<PatternTerm, QueryError> {
        self.check_unsupported()?;
        let tok = self.peek().cloned().ok_or_else(|| self.syntax("unexpected end of query"))?;
        let term = match tok {
            Tok::Var(v) => PatternTerm::Var(v),
            Tok::Iri(i) => PatternTerm::Term(Term::iri(i)),
            Tok::PName(p, l) => PatternTerm::Term(Term::iri(self.expand(&p, &l)?)),
            Tok::Word(w) if predicate && w == "a" => PatternTerm::Term(Term::iri(vocab::RDF_TYPE)),
            Tok::Word(w) if !predicate && (w == "true" || w == "false") => PatternTerm::Term(Term::typed(w, vocab::XSD_BOOLEAN)),
            Tok::Integer(n) if !predicate => PatternTerm::Term(Term::typed(n, vocab::XSD_INTEGER)),
            Tok::Literal(t) if !predicate => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Punct('^')) {
                    self.pos += 1;
                    let datatype = match self.next() {
                        Some(Tok::Iri(i)) => i,
                        Some(Tok::PName(p, l)) => self.expand(&p, &l)?,
                        _ => {
                            self.pos -= 1;
                            return Err(self.syntax("expected a datatype IRI"));
                        }
                    };
                    return Ok(PatternTerm::Term(Term::typed(t.value(), datatype)));
                }
                return Ok(PatternTerm::Term(t));
            }
            Tok::Punct('{') => return Err(self.err(QueryErrorKind::Unsupported("nested group or subquery".into()))),
            Tok::Punct('[') => return Err(self.err(QueryErrorKind::Unsupported("blank node".into()))),
            _ => return Err(self.syntax("expected a term")),
        };
        self.pos += 1;
        Ok(term)
    }

    fn projection(&mut self) -> Result<(Vec<Projection>, bool), QueryError> {
        let distinct = if self.is_word("DISTINCT") {
            self.pos += 1;
            true
        } else {
            if self.is_word("REDUCED") {
                return Err(self.err(QueryErrorKind::Unsupported("REDUCED".into())));
            }
            false
        };
        if self.peek() == Some(&Tok::Punct('*')) {
            self.pos += 1;
            return Ok((Vec::new(), distinct));
        }
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Var(_)) => items.push(Projection::Var(self.var()?)),
                Some(Tok::Punct('(')) => {
                    self.pos += 1;
                    self.check_unsupported()?;
                    if !self.is_word("COUNT") {
                        return Err(match self.peek() {
                            Some(Tok::Word(w)) => self.err(QueryErrorKind::Unsupported(w.to_ascii_uppercase())),
                            _ => self.err(QueryErrorKind::Unsupported("expression in projection".into())),
                        });
                    }
                    self.pos += 1;
                    self.expect_punct('(')?;
                    let distinct = if self.is_word("DISTINCT") {
                        self.pos += 1;
                        true
                    } else {
                        false
                    };
                    let var = if self.peek() == Some(&Tok::Punct('*')) {
                        self.pos += 1;
                        None
                    } else {
                        Some(self.var()?)
                    };
                    self.expect_punct(')')?;
                    self.expect_word("AS")?;
                    let alias = self.var()?;
                    self.expect_punct(')')?;
                    items.push(Projection::Count { var, distinct, alias });
                }
                _ => break,
            }
        }
        if items.is_empty() {
            return Err(self.syntax("expected a projection"));
        }
        Ok((items, distinct))
    }

    fn patterns(&mut self) -> Result<Vec<TriplePattern>, QueryError> {
        self.expect_punct('{')?;
        let mut patterns = Vec::new();
        loop {
            self.check_unsupported()?;
            match self.peek() {
                Some(Tok::Punct('}')) => {
                    self.pos += 1;
                    return Ok(patterns);
                }
                Some(Tok::Punct('.')) => {
                    self.pos += 1;
                    continue;
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("SELECT") => {
                    return Err(self.err(QueryErrorKind::Unsupported("subquery".into())));
                }
                None => return Err(self.syntax("unterminated WHERE block")),
                _ => {}
            }
            let subject = self.term(false)?;
            loop {
                let predicate = self.term(true)?;
                loop {
                    let object = self.term(false)?;
                    patterns.push(TriplePattern { subject: subject.clone(), predicate: predicate.clone(), object });
                    if self.peek() == Some(&Tok::Punct(',')) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if self.peek() == Some(&Tok::Punct(';')) {
                    self.pos += 1;
                    if matches!(self.peek(), Some(Tok::Punct('.' | '}'))) {
                        break;
                    }
                } else {
                    break;
                }
            }
            match self.peek() {
                Some(Tok::Punct('.')) => self.pos += 1,
                Some(Tok::Punct('}')) => {}
                _ => {
                    self.check_unsupported()?;
                    return Err(self.syntax("expected '.' or '}'"));
                }
            }
        }
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        loop {
            if self.is_word("PREFIX") {
                self.pos += 1;
                let (p, local) = match self.next() {
                    Some(Tok::PName(p, l)) => (p, l),
                    _ => {
                        self.pos -= 1;
                        return Err(self.syntax("expected a prefix name"));
                    }
                };
                if !local.is_empty() {
                    return Err(self.syntax("prefix declaration must end with ':'"));
                }
                match self.next() {
                    Some(Tok::Iri(ns)) => {
                        self.prefixes.insert(p, ns);
                    }
                    _ => {
                        self.pos -= 1;
                        return Err(self.syntax("expected a namespace IRI"));
                    }
                }
            } else {
                break;
            }
        }
        self.expect_word("SELECT")?;
        let (projection, distinct) = self.projection()?;
        if self.is_word("WHERE") {
            self.pos += 1;
        }
        self.check_unsupported()?;
        let patterns = self.patterns()?;

        let mut group_by = Vec::new();
        if self.is_word("GROUP") {
            self.pos += 1;
            self.expect_word("BY")?;
            while let Some(Tok::Var(_)) = self.peek() {
                group_by.push(self.var()?);
            }
            if group_by.is_empty() {
                return Err(self.syntax("expected a variable after GROUP BY"));
            }
        }
        self.check_unsupported()?;
        let mut order_by = Vec::new();
        if self.is_word("ORDER") {
            self.pos += 1;
            self.expect_word("BY")?;
            loop {
                let order = if self.is_word("ASC") {
                    Order::Asc
                } else if self.is_word("DESC") {
                    Order::Desc
                } else if let Some(Tok::Var(_)) = self.peek() {
                    order_by.push((self.var()?, Order::Asc));
                    continue;
                } else {
                    break;
                };
                self.pos += 1;
                self.expect_punct('(')?;
                let v = self.var()?;
                self.expect_punct(')')?;
                order_by.push((v, order));
            }
            if order_by.is_empty() {
                return Err(self.syntax("expected an ordering condition"));
            }
        }
        self.check_unsupported()?;
        let mut limit = None;
        if self.is_word("LIMIT") {
            self.pos += 1;
            match self.next() {
                Some(Tok::Integer(n)) if !n.starts_with(['-', '+']) => {
                    limit = Some(n.parse().map_err(|_| self.syntax("LIMIT out of range"))?);
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.syntax("expected a non-negative integer"));
                }
            }
        }
        self.check_unsupported()?;
        if self.pos < self.tokens.len() {
            return Err(self.syntax("unexpected trailing input"));
        }
        let q = Query { prefixes: std::mem::take(&mut self.prefixes), projection, distinct, patterns, group_by, order_by, limit };
        q.check().map_err(|msg| QueryError { line: self.end.0, column: self.end.1, kind: QueryErrorKind::Invalid(msg) })?;
        Ok(q)
    }
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let lexer = Lexer { chars: text.chars().peekable(), line: 1, column: 1 };
    let end = {
        let lines: Vec<&str> = text.split('\n').collect();
        (lines.len(), lines.last().map_or(0, |l| l.chars().count()) + 1)
    };
    let tokens = lexer.tokens()?;
    Parser { tokens, pos: 0, prefixes: BTreeMap::new(), end }.query()
}
