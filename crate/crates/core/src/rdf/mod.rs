//! RDF data model: terms, quads and datasets of named graphs.
//!
//! Only named graphs are representable; every [`Quad`] carries a graph IRI.
//! Parsing lives in [`trig`], serialization and canonicalization in
//! [`serialize`].

pub mod serialize;
pub mod trig;

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexSet;

pub use serialize::{canonical_nquads, serialize_nquads, serialize_trig, CanonicalizationError, PLACEHOLDER};
pub use trig::{parse_trig, ParseError};

use crate::vocab;

/// A literal value with an optional datatype or language tag (never both).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub value: String,
    pub datatype: Option<String>,
    pub language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

impl Term {
    /// Builds an IRI term without validation. Use [`Term::try_iri`] for
    /// untrusted input.
    pub fn iri(value: impl Into<String>) -> Self {
        Term::Iri(value.into())
    }

    pub fn try_iri(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if is_absolute_iri(&value) {
            Ok(Term::Iri(value))
        } else {
            Err(TermError::MalformedIri(value))
        }
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if is_blank_label(&label) {
            Ok(Term::Blank(label))
        } else {
            Err(TermError::BadBlankLabel(label))
        }
    }

    /// A plain string literal.
    pub fn string(value: impl Into<String>) -> Self {
        Term::Literal(Literal { value: value.into(), datatype: None, language: None })
    }

    pub fn typed(value: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal(Literal { value: value.into(), datatype: Some(datatype.into()), language: None })
    }

    pub fn lang(value: impl Into<String>, language: impl Into<String>) -> Self {
        Term::Literal(Literal { value: value.into(), datatype: None, language: Some(language.into()) })
    }

    pub fn integer(value: i64) -> Self {
        Term::typed(value.to_string(), vocab::XSD_INTEGER)
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    /// The lexical value: IRI string, blank label, or literal lexical form.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(v) | Term::Blank(v) => v,
            Term::Literal(l) => &l.value,
        }
    }
}

/// N-Triples rendering; this is the canonical string used for ordering.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(v) => write!(f, "<{}>", serialize::escape_iri(v)),
            Term::Blank(v) => write!(f, "_:{v}"),
            Term::Literal(l) => {
                write!(f, "\"{}\"", serialize::escape_literal(&l.value))?;
                if let Some(lang) = &l.language {
                    write!(f, "@{lang}")
                } else if let Some(dt) = &l.datatype {
                    write!(f, "^^<{}>", serialize::escape_iri(dt))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("malformed IRI: {0:?}")]
    MalformedIri(String),
    #[error("blank node label must match [A-Za-z0-9]+: {0:?}")]
    BadBlankLabel(String),
    #[error("{0} may not appear in {1} position")]
    BadPosition(&'static str, &'static str),
    #[error("literal cannot carry both a datatype and a language tag")]
    DatatypeAndLanguage,
}

/// Absolute IRI check: a scheme followed by ':' and no forbidden characters.
pub fn is_absolute_iri(value: &str) -> bool {
    let Some((scheme, rest)) = value.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok
        && !rest.is_empty()
        && !value
            .chars()
            .any(|c| c.is_control() || c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
}

pub fn is_blank_label(label: &str) -> bool {
    !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric())
}

/// A statement without a graph; the unit produced by the model emitters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Triple { subject, predicate, object }
    }

    /// Convenience for the common IRI–IRI–term shape.
    pub fn iri(subject: &str, predicate: &str, object: Term) -> Self {
        Triple::new(Term::iri(subject), Term::iri(predicate), object)
    }

    pub fn in_graph(self, graph: &str) -> Quad {
        Quad { subject: self.subject, predicate: self.predicate, object: self.object, graph: Term::iri(graph) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quad {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
    pub graph: Term,
}

impl Quad {
    pub fn new(subject: Term, predicate: Term, object: Term, graph: Term) -> Result<Self, TermError> {
        let q = Quad { subject, predicate, object, graph };
        q.check()?;
        Ok(q)
    }

    /// Checks the positional invariants.
    pub fn check(&self) -> Result<(), TermError> {
        if matches!(self.subject, Term::Literal(_)) {
            return Err(TermError::BadPosition("literal", "subject"));
        }
        if !self.predicate.is_iri() {
            return Err(TermError::BadPosition("non-IRI term", "predicate"));
        }
        if !self.graph.is_iri() {
            return Err(TermError::BadPosition("non-IRI term", "graph"));
        }
        if let Term::Literal(l) = &self.object {
            if l.datatype.is_some() && l.language.is_some() {
                return Err(TermError::DatatypeAndLanguage);
            }
        }
        Ok(())
    }

    pub fn triple(&self) -> Triple {
        Triple::new(self.subject.clone(), self.predicate.clone(), self.object.clone())
    }

    pub fn graph_iri(&self) -> &str {
        self.graph.value()
    }
}

/// One slot of a [`Dataset::match_pattern`] query; `None` is a wildcard.
pub type Slot<'a> = Option<&'a Term>;

/// An insertion-ordered set of quads plus a prefix table.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    quads: IndexSet<Quad>,
    prefixes: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// A dataset preloaded with the standard prefix table.
    pub fn with_standard_prefixes() -> Self {
        let mut d = Self::new();
        d.set_standard_prefixes();
        d
    }

    pub fn set_standard_prefixes(&mut self) {
        self.prefixes = vocab::PREFIXES.iter().map(|(p, ns)| (p.to_string(), ns.to_string())).collect();
    }

    /// Inserts a quad; returns false if it was already present.
    pub fn insert(&mut self, quad: Quad) -> bool {
        self.quads.insert(quad)
    }

    pub fn remove(&mut self, quad: &Quad) -> bool {
        self.quads.shift_remove(quad)
    }

    pub fn extend(&mut self, quads: impl IntoIterator<Item = Quad>) {
        for q in quads {
            self.insert(q);
        }
    }

    pub fn add_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(prefix.into(), namespace.into());
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn contains(&self, quad: &Quad) -> bool {
        self.quads.contains(quad)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Quad> {
        self.quads.iter()
    }

    /// All and only the quads matching every bound slot.
    pub fn match_pattern<'a>(
        &'a self,
        subject: Slot<'a>,
        predicate: Slot<'a>,
        object: Slot<'a>,
        graph: Slot<'a>,
    ) -> impl Iterator<Item = &'a Quad> + 'a {
        self.quads.iter().filter(move |q| {
            subject.is_none_or(|s| &q.subject == s)
                && predicate.is_none_or(|p| &q.predicate == p)
                && object.is_none_or(|o| &q.object == o)
                && graph.is_none_or(|g| &q.graph == g)
        })
    }

    /// Quads of a single named graph, in insertion order.
    pub fn graph<'a>(&'a self, graph: &'a str) -> impl Iterator<Item = &'a Quad> + 'a {
        self.quads.iter().filter(move |q| q.graph_iri() == graph)
    }

    /// Distinct graph IRIs in first-seen order.
    pub fn graph_names(&self) -> Vec<&str> {
        let mut seen = IndexSet::new();
        for q in &self.quads {
            seen.insert(q.graph_iri());
        }
        seen.into_iter().collect()
    }

    /// Quad-set equality, ignoring insertion order and prefixes.
    pub fn same_quads(&self, other: &Dataset) -> bool {
        self.len() == other.len() && self.quads.iter().all(|q| other.contains(q))
    }
}

impl FromIterator<Quad> for Dataset {
    fn from_iter<I: IntoIterator<Item = Quad>>(iter: I) -> Self {
        let mut d = Dataset::new();
        d.extend(iter);
        d
    }
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.same_quads(other)
    }
}
