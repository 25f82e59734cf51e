//! A TriG reader covering prefixed names, typed and language-tagged
//! literals, numeric/boolean shorthands, blank node property lists and
//! `GRAPH` blocks. Collections, `@base` and default-graph triples are
//! rejected.

use std::collections::HashSet;
use std::fmt;

use super::{is_absolute_iri, is_blank_label, Dataset, Literal, Quad, Term};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndefinedPrefix(String),
    MalformedIri(String),
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UndefinedPrefix(p) => write!(f, "undefined prefix {p:?}"),
            ParseErrorKind::MalformedIri(i) => write!(f, "malformed IRI <{i}>"),
            ParseErrorKind::Unsupported(m) => write!(f, "unsupported construct: {m}"),
        }
    }
}

/// Parses a TriG document into a dataset, keeping its prefix declarations.
pub fn parse_trig(text: &str) -> Result<Dataset, ParseError> {
    let mut p = Parser {
        src: text.chars().collect(),
        pos: 0,
        dataset: Dataset::new(),
        used_labels: prescan_labels(text),
        next_fresh: 0,
    };
    p.document()?;
    Ok(p.dataset)
}

fn prescan_labels(text: &str) -> HashSet<String> {
    text.match_indices("_:")
        .map(|(i, _)| text[i + 2..].chars().take_while(|c| c.is_ascii_alphanumeric()).collect())
        .collect()
}

struct Parser {
    src: Vec<char>,
    pos: usize,
    dataset: Dataset,
    used_labels: HashSet<String>,
    next_fresh: usize,
}

type PResult<T> = Result<T, ParseError>;

fn is_pn_chars_base(c: char) -> bool {
    c.is_ascii_alphabetic()
        || matches!(c as u32,
            0xC0..=0xD6 | 0xD8..=0xF6 | 0xF8..=0x2FF | 0x370..=0x37D | 0x37F..=0x1FFF
            | 0x200C..=0x200D | 0x2070..=0x218F | 0x2C00..=0x2FEF | 0x3001..=0xD7FF
            | 0xF900..=0xFDCF | 0xFDF0..=0xFFFD | 0x10000..=0xEFFFF)
}

fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c) || c == '-' || c.is_ascii_digit() || matches!(c as u32, 0xB7 | 0x300..=0x36F | 0x203F..=0x2040)
}

impl Parser {
    fn err<T>(&self, kind: ParseErrorKind) -> PResult<T> {
        Err(self.error_at(self.pos, kind))
    }

    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let (mut line, mut column) = (1, 1);
        for &c in &self.src[..pos.min(self.src.len())] {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        ParseError { line, column, kind }
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> PResult<T> {
        self.err(ParseErrorKind::Syntax(msg.into()))
    }

    fn peek(&self) -> Option<char> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.src.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += 1;
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

    fn expect(&mut self, c: char) -> PResult<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.syntax(format!("expected '{c}', found '{found}'")),
                None => self.syntax(format!("expected '{c}', found end of input")),
            }
        }
    }

    fn keyword_ahead(&self, kw: &str) -> bool {
        let n = kw.chars().count();
        if self.pos + n > self.src.len() {
            return false;
        }
        let word: String = self.src[self.pos..self.pos + n].iter().collect();
        word.eq_ignore_ascii_case(kw) && self.src.get(self.pos + n).is_none_or(|c| !is_pn_chars(*c) && *c != ':')
    }

    fn document(&mut self) -> PResult<()> {
        loop {
            self.skip_ws();
            let Some(c) = self.peek() else { return Ok(()) };
            if c == '@' {
                if self.keyword_ahead("@prefix") {
                    self.pos += 7;
                    self.prefix_decl()?;
                    self.expect('.')?;
                } else if self.keyword_ahead("@base") {
                    return self.err(ParseErrorKind::Unsupported("@base".into()));
                } else {
                    return self.syntax("unknown directive");
                }
            } else if self.keyword_ahead("PREFIX") {
                self.pos += 6;
                self.prefix_decl()?;
            } else if self.keyword_ahead("BASE") {
                return self.err(ParseErrorKind::Unsupported("BASE".into()));
            } else if self.keyword_ahead("GRAPH") {
                self.pos += 5;
                self.skip_ws();
                let graph = self.graph_label()?;
                self.graph_block(graph)?;
            } else if c == '{' {
                return self.err(ParseErrorKind::Unsupported("default graph block".into()));
            } else {
                let start = self.pos;
                let label = self.graph_label_or_subject()?;
                self.skip_ws();
                if self.peek() == Some('{') {
                    let Term::Iri(g) = label else {
                        return Err(self.error_at(start, ParseErrorKind::Unsupported("blank node graph name".into())));
                    };
                    self.graph_block(g)?;
                } else {
                    return Err(self.error_at(start, ParseErrorKind::Unsupported("triples outside a named graph".into())));
                }
            }
        }
    }

    fn prefix_decl(&mut self) -> PResult<()> {
        self.skip_ws();
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if is_pn_chars(c) || c == '.' {
                prefix.push(c);
                self.pos += 1;
            } else {
                return self.syntax(format!("invalid character '{c}' in prefix name"));
            }
        }
        self.expect(':')?;
        self.skip_ws();
        let ns = self.iriref()?;
        self.dataset.add_prefix(prefix, ns);
        Ok(())
    }

    fn graph_label(&mut self) -> PResult<String> {
        match self.graph_label_or_subject()? {
            Term::Iri(g) => Ok(g),
            _ => self.err(ParseErrorKind::Unsupported("blank node graph name".into())),
        }
    }

    fn graph_label_or_subject(&mut self) -> PResult<Term> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_label(),
            Some('[') => self.syntax("graph name or subject expected"),
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => self.syntax("unexpected end of input"),
        }
    }

    fn graph_block(&mut self, graph: String) -> PResult<()> {
        self.expect('{')?;
        let graph = Term::Iri(graph);
        loop {
            self.skip_ws();
            match self.peek() {
                Some('}') => {
                    self.pos += 1;
                    return Ok(());
                }
                None => return self.syntax("unterminated graph block"),
                _ => {}
            }
            self.triples(&graph)?;
            self.skip_ws();
            match self.peek() {
                Some('.') => self.pos += 1,
                Some('}') => {}
                Some(c) => return self.syntax(format!("expected '.' or '}}', found '{c}'")),
                None => return self.syntax("unterminated graph block"),
            }
        }
    }

    fn triples(&mut self, graph: &Term) -> PResult<()> {
        self.skip_ws();
        if self.peek() == Some('[') {
            let subject = self.blank_property_list(graph)?;
            self.skip_ws();
            if matches!(self.peek(), Some('.') | Some('}')) {
                return Ok(());
            }
            return self.predicate_object_list(&subject, graph);
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject, graph)
    }

    fn subject(&mut self) -> PResult<Term> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_label(),
            Some('(') => self.err(ParseErrorKind::Unsupported("collection".into())),
            Some('"') | Some('\'') => self.syntax("literal in subject position"),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => self.syntax("literal in subject position"),
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => self.syntax("unexpected end of input"),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term, graph: &Term) -> PResult<()> {
        loop {
            self.skip_ws();
            let predicate = self.verb()?;
            loop {
                self.skip_ws();
                let object = self.object(graph)?;
                self.emit(subject.clone(), predicate.clone(), object, graph.clone());
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.pos += 1;
                self.skip_ws();
            }
            if matches!(self.peek(), Some('.') | Some(']') | Some('}')) {
                return Ok(());
            }
        }
    }

    fn emit(&mut self, subject: Term, predicate: Term, object: Term, graph: Term) {
        self.dataset.insert(Quad { subject, predicate, object, graph });
    }

    fn verb(&mut self) -> PResult<Term> {
        if self.peek() == Some('a') && self.peek_at(1).is_none_or(|c| c.is_whitespace() || c == '<' || c == '#') {
            self.pos += 1;
            return Ok(Term::iri(vocab::RDF_TYPE));
        }
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.syntax("blank node in predicate position"),
            Some(c) if c == '"' || c == '\'' || c == '[' => self.syntax("predicate must be an IRI"),
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => self.syntax("unexpected end of input"),
        }
    }

    fn object(&mut self, graph: &Term) -> PResult<Term> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_label(),
            Some('[') => self.blank_property_list(graph),
            Some('(') => self.err(ParseErrorKind::Unsupported("collection".into())),
            Some('"') | Some('\'') => self.literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) => {
                self.number()
            }
            Some(_) if self.keyword_ahead("true") => {
                self.pos += 4;
                Ok(Term::typed("true", vocab::XSD_BOOLEAN))
            }
            Some(_) if self.keyword_ahead("false") => {
                self.pos += 5;
                Ok(Term::typed("false", vocab::XSD_BOOLEAN))
            }
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => self.syntax("unexpected end of input"),
        }
    }

    fn fresh_blank(&mut self) -> Term {
        loop {
            self.next_fresh += 1;
            let label = format!("genid{}", self.next_fresh);
            if self.used_labels.insert(label.clone()) {
                return Term::Blank(label);
            }
        }
    }

    fn blank_property_list(&mut self, graph: &Term) -> PResult<Term> {
        self.expect('[')?;
        let node = self.fresh_blank();
        self.skip_ws();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(node);
        }
        self.predicate_object_list(&node, graph)?;
        self.expect(']')?;
        Ok(node)
    }

    fn blank_label(&mut self) -> PResult<Term> {
        let start = self.pos;
        self.pos += 2;
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || (c == '.' && self.peek_at(1).is_some_and(is_pn_chars)) {
                label.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if !is_blank_label(&label) {
            return Err(self.error_at(start, ParseErrorKind::Unsupported(format!("blank node label _:{label}"))));
        }
        Ok(Term::Blank(label))
    }

    fn iriref(&mut self) -> PResult<String> {
        let start = self.pos;
        if self.bump() != Some('<') {
            return Err(self.error_at(start, ParseErrorKind::Syntax("expected IRI".into())));
        }
        let mut iri = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error_at(start, ParseErrorKind::Syntax("unterminated IRI".into()))),
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => iri.push(self.hex_escape(4)?),
                    Some('U') => iri.push(self.hex_escape(8)?),
                    _ => return self.syntax("invalid escape in IRI"),
                },
                Some(c) if c == '\n' || c == ' ' => {
                    return Err(self.error_at(start, ParseErrorKind::MalformedIri(iri)));
                }
                Some(c) => iri.push(c),
            }
        }
        if !is_absolute_iri(&iri) {
            return Err(self.error_at(start, ParseErrorKind::MalformedIri(iri)));
        }
        Ok(iri)
    }

    fn hex_escape(&mut self, digits: usize) -> PResult<char> {
        let mut v = 0u32;
        for _ in 0..digits {
            let Some(d) = self.bump().and_then(|c| c.to_digit(16)) else {
                return self.syntax("invalid hex escape");
            };
            v = v * 16 + d;
        }
        match char::from_u32(v) {
            Some(c) => Ok(c),
            None => self.syntax("escape is not a valid code point"),
        }
    }

    fn prefixed_name(&mut self) -> PResult<String> {
        let start = self.pos;
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if is_pn_chars(c) || (c == '.' && !prefix.is_empty()) {
                prefix.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.peek() != Some(':') {
            return match self.peek() {
                Some(c) => Err(self.error_at(start, ParseErrorKind::Syntax(format!("unexpected character '{c}'")))),
                None => Err(self.error_at(start, ParseErrorKind::Syntax("unexpected end of input".into()))),
            };
        }
        self.pos += 1;
        let mut local = String::new();
        loop {
            match self.peek() {
                Some('%') => {
                    let (a, b) = (self.peek_at(1), self.peek_at(2));
                    if a.is_some_and(|c| c.is_ascii_hexdigit()) && b.is_some_and(|c| c.is_ascii_hexdigit()) {
                        local.push('%');
                        local.push(a.unwrap_or_default());
                        local.push(b.unwrap_or_default());
                        self.pos += 3;
                    } else {
                        return self.syntax("invalid percent escape in local name");
                    }
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => local.push(c),
                        _ => return self.syntax("invalid local name escape"),
                    }
                }
                Some(c) if is_pn_chars(c) || c == ':' => {
                    local.push(c);
                    self.pos += 1;
                }
                Some('.') if self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == ':' || n == '%') && !local.is_empty() => {
                    local.push('.');
                    self.pos += 1;
                }
                _ => break,
            }
        }
        let Some(ns) = self.dataset.prefixes().get(&prefix) else {
            return Err(self.error_at(start, ParseErrorKind::UndefinedPrefix(prefix)));
        };
        let iri = format!("{ns}{local}");
        if !is_absolute_iri(&iri) {
            return Err(self.error_at(start, ParseErrorKind::MalformedIri(iri)));
        }
        Ok(iri)
    }

    fn literal(&mut self) -> PResult<Term> {
        let quote = self.bump().unwrap_or('"');
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.pos += 2;
        }
        let start = self.pos;
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error_at(start, ParseErrorKind::Syntax("unterminated string".into()))),
                Some(c) if c == quote => {
                    if !long {
                        break;
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        // a closing triple quote may be preceded by up to two quote chars
                        while self.peek_at(2) == Some(quote) {
                            value.push(quote);
                            self.pos += 1;
                        }
                        self.pos += 2;
                        break;
                    }
                    value.push(c);
                }
                Some('\\') => match self.bump() {
                    Some('t') => value.push('\t'),
                    Some('b') => value.push('\u{8}'),
                    Some('n') => value.push('\n'),
                    Some('r') => value.push('\r'),
                    Some('f') => value.push('\u{c}'),
                    Some('"') => value.push('"'),
                    Some('\'') => value.push('\''),
                    Some('\\') => value.push('\\'),
                    Some('u') => value.push(self.hex_escape(4)?),
                    Some('U') => value.push(self.hex_escape(8)?),
                    _ => return self.syntax("invalid string escape"),
                },
                Some(c) if !long && (c == '\n' || c == '\r') => {
                    return self.syntax("newline in short string");
                }
                Some(c) => value.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                let mut tag = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || (c == '-' && !tag.is_empty()) {
                        tag.push(c);
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if tag.is_empty() || !tag.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return self.syntax("invalid language tag");
                }
                Ok(Term::Literal(Literal { value, datatype: None, language: Some(tag) }))
            }
            Some('^') if self.peek_at(1) == Some('^') => {
                self.pos += 2;
                let dt = match self.peek() {
                    Some('<') => self.iriref()?,
                    Some(_) => self.prefixed_name()?,
                    None => return self.syntax("missing datatype"),
                };
                Ok(Term::Literal(Literal { value, datatype: Some(dt), language: None }))
            }
            _ => Ok(Term::string(value)),
        }
    }

    fn number(&mut self) -> PResult<Term> {
        let mut text = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            text.push(c);
            self.pos += 1;
        }
        let mut digits = 0;
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            text.push(c);
            digits += 1;
            self.pos += 1;
        }
        let mut datatype = vocab::XSD_INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            datatype = vocab::XSD_DECIMAL;
            text.push('.');
            self.pos += 1;
            while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                text.push(c);
                digits += 1;
                self.pos += 1;
            }
        }
        if digits == 0 {
            return self.syntax("malformed number");
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            datatype = vocab::XSD_DOUBLE;
            text.push(e);
            self.pos += 1;
            if let Some(c @ ('+' | '-')) = self.peek() {
                text.push(c);
                self.pos += 1;
            }
            let mut exp = 0;
            while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                text.push(c);
                exp += 1;
                self.pos += 1;
            }
            if exp == 0 {
                return self.syntax("malformed exponent");
            }
        }
        Ok(Term::typed(text, datatype))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;

    #[test]
    fn empty_document() {
        let d = parse_trig("").unwrap();
        assert!(d.is_empty());
        assert!(parse_trig("  # only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn single_graph_single_triple() {
        let text = "@prefix np: <http://www.nanopub.org/nschema#> .\n\
                    <http://ex/np#Head> { <http://ex/np> a np:Nanopublication . }";
        let d = parse_trig(text).unwrap();
        assert_eq!(d.len(), 1);
        let q = d.iter().next().unwrap();
        assert_eq!(q.graph, Term::iri("http://ex/np#Head"));
        assert_eq!(q.object, Term::iri(vocab::NP_NANOPUBLICATION));
        assert_eq!(d.prefixes().get("np").map(String::as_str), Some(vocab::NP));
    }

    #[test]
    fn pplan_prefix_expands() {
        let text = "PREFIX p-plan: <http://purl.org/net/p-plan#>\n\
                    <http://ex/g> { <http://ex/s> p-plan:isStepOfPlan <http://ex/p> }";
        let d = parse_trig(text).unwrap();
        let q = d.iter().next().unwrap();
        assert_eq!(q.predicate.as_iri(), Some("http://purl.org/net/p-plan#isStepOfPlan"));
    }

    #[test]
    fn lists_literals_and_blank_nodes() {
        let text = r#"@prefix ex: <http://ex/> .
            @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
            GRAPH ex:g {
              ex:s ex:p "a", 'b'@en ; ex:q 42, -1.5, 2e3, true ;
                   ex:r """multi
line "quoted" """ ; ex:t "5"^^xsd:integer .
              _:x ex:p [ ex:q ex:o ] .
              [] ex:p ex:o
            }"#;
        let d = parse_trig(text).unwrap();
        assert_eq!(d.len(), 11);
        let r = Term::iri("http://ex/r");
        let lit = d.match_pattern(None, Some(&r), None, None).next().unwrap();
        assert_eq!(lit.object.value(), "multi\nline \"quoted\" ");
        let q = Term::iri("http://ex/q");
        let nums: Vec<_> = d.match_pattern(None, Some(&q), None, None).map(|q| q.object.clone()).collect();
        assert!(nums.contains(&Term::typed("-1.5", vocab::XSD_DECIMAL)));
        assert!(nums.contains(&Term::typed("2e3", vocab::XSD_DOUBLE)));
        assert!(nums.contains(&Term::typed("true", vocab::XSD_BOOLEAN)));
    }

    #[test]
    fn undefined_prefix_reports_position() {
        let err = parse_trig("<http://g> {\n  <http://s> foo:bar <http://o> }").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndefinedPrefix("foo".into()));
        assert_eq!((err.line, err.column), (2, 14));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_trig("<rel> { <http://s> <http://p> <http://o> }").unwrap_err().kind, ParseErrorKind::MalformedIri(_)));
        assert!(matches!(parse_trig("<http://s> <http://p> <http://o> .").unwrap_err().kind, ParseErrorKind::Unsupported(_)));
        assert!(matches!(parse_trig("<http://g> { <http://s> <http://p> ( 1 2 ) }").unwrap_err().kind, ParseErrorKind::Unsupported(_)));
        assert!(matches!(parse_trig("<http://g> { <http://s> <http://p> \"x }").unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(parse_trig("<http://g> { <http://s> <http://p> <http://o> ").unwrap_err().kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn fresh_blank_labels_avoid_explicit_ones() {
        let d = parse_trig("<http://g> { [] <http://p> _:genid1 }").unwrap();
        let q = d.iter().next().unwrap();
        assert_ne!(q.subject, q.object);
    }

    #[test]
    fn reparses_own_output() {
        let mut d = Dataset::with_standard_prefixes();
        d.insert(Triple::iri("http://ex/s", vocab::RDFS_LABEL, Term::string("tab\there \\ \"q\"")).in_graph("http://ex/g"));
        d.insert(Triple::iri("http://ex/s", vocab::PPLAN_HAS_INPUT_VAR, Term::iri("http://ex/s#in.x")).in_graph("http://ex/g"));
        let back = parse_trig(&crate::rdf::serialize_trig(&d)).unwrap();
        assert!(back.same_quads(&d));
    }
}
