//! TriG and N-Quads writers, plus the canonical N-Quads form used for
//! content hashing and signing.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Dataset, Quad, Term};
use crate::vocab;

/// Token substituted for the nanopub URI in canonical form.
pub const PLACEHOLDER: &str = "@@NP@@";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CanonicalizationError {
    #[error("blank node _:{0} cannot be canonicalized; skolemize it first")]
    BlankNode(String),
}

pub(crate) fn escape_iri(iri: &str) -> String {
    let mut out = String::with_capacity(iri.len());
    for c in iri.chars() {
        if (c as u32) <= 0x20 || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out
}

pub(crate) fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn canonical_term(term: &Term, target: &str) -> Result<String, CanonicalizationError> {
    match term {
        Term::Blank(label) => Err(CanonicalizationError::BlankNode(label.clone())),
        Term::Iri(iri) if !target.is_empty() && iri.starts_with(target) => {
            Ok(format!("<{}{}>", PLACEHOLDER, escape_iri(&iri[target.len()..])))
        }
        Term::Literal(l) => match &l.datatype {
            Some(dt) if !target.is_empty() && dt.starts_with(target) => Ok(format!(
                "\"{}\"^^<{}{}>",
                escape_literal(&l.value),
                PLACEHOLDER,
                escape_iri(&dt[target.len()..])
            )),
            _ => Ok(term.to_string()),
        },
        _ => Ok(term.to_string()),
    }
}

/// Canonical N-Quads: every IRI starting with `placeholder_target` has that
/// prefix replaced by [`PLACEHOLDER`], lines are sorted bytewise and the
/// output ends with exactly one newline (or is empty).
pub fn canonical_nquads(d: &Dataset, placeholder_target: &str) -> Result<String, CanonicalizationError> {
    canonical_lines(d.iter(), placeholder_target)
}

pub(crate) fn canonical_lines<'a>(
    quads: impl Iterator<Item = &'a Quad>,
    target: &str,
) -> Result<String, CanonicalizationError> {
    let mut lines = Vec::new();
    for q in quads {
        lines.push(format!(
            "{} {} {} {} .",
            canonical_term(&q.subject, target)?,
            canonical_term(&q.predicate, target)?,
            canonical_term(&q.object, target)?,
            canonical_term(&q.graph, target)?,
        ));
    }
    lines.sort_unstable();
    lines.dedup();
    if lines.is_empty() {
        return Ok(String::new());
    }
    let mut out = lines.join("\n");
    out.push('\n');
    Ok(out)
}

/// Plain N-Quads in sorted order. Blank nodes are written as-is.
pub fn serialize_nquads(d: &Dataset) -> String {
    let mut lines: Vec<String> =
        d.iter().map(|q| format!("{} {} {} {} .", q.subject, q.predicate, q.object, q.graph)).collect();
    lines.sort_unstable();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        }
        Some(_) => false,
    }
}

struct Compactor<'a> {
    // longest namespace first so the most specific prefix wins
    table: Vec<(&'a str, &'a str)>,
}

impl<'a> Compactor<'a> {
    fn new(prefixes: &'a BTreeMap<String, String>) -> Self {
        let mut table: Vec<(&str, &str)> = prefixes.iter().map(|(p, ns)| (p.as_str(), ns.as_str())).collect();
        table.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
        Compactor { table }
    }

    fn iri(&self, iri: &str) -> String {
        for (prefix, ns) in &self.table {
            if let Some(local) = iri.strip_prefix(ns) {
                if is_safe_local(local) {
                    return format!("{prefix}:{local}");
                }
            }
        }
        format!("<{}>", escape_iri(iri))
    }

    fn term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::Blank(label) => format!("_:{label}"),
            Term::Literal(l) => {
                let mut s = format!("\"{}\"", escape_literal(&l.value));
                if let Some(lang) = &l.language {
                    s.push('@');
                    s.push_str(lang);
                } else if let Some(dt) = &l.datatype {
                    s.push_str("^^");
                    s.push_str(&self.iri(dt));
                }
                s
            }
        }
    }

    fn predicate(&self, term: &Term) -> String {
        if term.as_iri() == Some(vocab::RDF_TYPE) {
            "a".to_string()
        } else {
            self.term(term)
        }
    }
}

/// Writes TriG with graphs, subjects, predicates and objects each ordered by
/// their canonical N-Triples string.
pub fn serialize_trig(d: &Dataset) -> String {
    let compact = Compactor::new(d.prefixes());
    let mut out = String::new();
    for (prefix, ns) in d.prefixes() {
        let _ = writeln!(out, "@prefix {prefix}: <{}> .", escape_iri(ns));
    }

    type Tree<'a> = BTreeMap<String, (&'a Term, BTreeMap<String, (&'a Term, BTreeMap<String, &'a Term>)>)>;
    let mut graphs: BTreeMap<String, (&Term, Tree)> = BTreeMap::new();
    for q in d.iter() {
        let (_, subjects) = graphs.entry(q.graph.to_string()).or_insert_with(|| (&q.graph, BTreeMap::new()));
        let (_, preds) = subjects.entry(q.subject.to_string()).or_insert_with(|| (&q.subject, BTreeMap::new()));
        let (_, objs) = preds.entry(q.predicate.to_string()).or_insert_with(|| (&q.predicate, BTreeMap::new()));
        objs.insert(q.object.to_string(), &q.object);
    }

    for (graph, subjects) in graphs.values() {
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "{} {{", compact.term(graph));
        for (subject, preds) in subjects.values() {
            let _ = write!(out, "  {}", compact.term(subject));
            let n_preds = preds.len();
            for (i, (pred, objs)) in preds.values().enumerate() {
                if i > 0 {
                    out.push_str("    ");
                } else {
                    out.push(' ');
                }
                out.push_str(&compact.predicate(pred));
                let rendered: Vec<String> = objs.values().map(|o| compact.term(o)).collect();
                out.push(' ');
                out.push_str(&rendered.join(", "));
                out.push_str(if i + 1 == n_preds { " .\n" } else { " ;\n" });
            }
        }
        out.push_str("}\n");
    }
    out
}
