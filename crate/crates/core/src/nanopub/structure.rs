use std::collections::BTreeSet;
use std::fmt;

use crate::rdf::{Dataset, Term};
use crate::vocab;

/// A breach of the four-graph nanopub contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingHead,
    MultipleHeads(Vec<String>),
    MissingType,
    MissingLink(&'static str),
    DuplicateLink(&'static str),
    LinkNotIri(&'static str),
    SharedGraph(String),
    MissingGraph(&'static str, String),
    EmptyAssertion,
    ExtraHeadTriple(String),
    StrayGraph(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingHead => write!(f, "missing head"),
            Violation::MultipleHeads(g) => write!(f, "multiple heads: {}", g.join(", ")),
            Violation::MissingType => write!(f, "head lacks rdf:type np:Nanopublication"),
            Violation::MissingLink(p) => write!(f, "head lacks np:{p}"),
            Violation::DuplicateLink(p) => write!(f, "head has more than one np:{p}"),
            Violation::LinkNotIri(p) => write!(f, "np:{p} does not point to a graph IRI"),
            Violation::SharedGraph(g) => write!(f, "graph {g} is used for more than one part"),
            Violation::MissingGraph(part, g) => write!(f, "{part} graph {g} is referenced but absent"),
            Violation::EmptyAssertion => write!(f, "assertion graph is empty"),
            Violation::ExtraHeadTriple(t) => write!(f, "unexpected head triple {t}"),
            Violation::StrayGraph(g) => write!(f, "graph {g} is not part of the nanopub"),
        }
    }
}

const LINKS: [(&str, &str); 3] = [
    ("assertion", vocab::NP_HAS_ASSERTION),
    ("provenance", vocab::NP_HAS_PROVENANCE),
    ("pubinfo", vocab::NP_HAS_PUBINFO),
];

fn link_name(predicate: &str) -> &'static str {
    match predicate {
        vocab::NP_HAS_ASSERTION => "hasAssertion",
        vocab::NP_HAS_PROVENANCE => "hasProvenance",
        _ => "hasPublicationInfo",
    }
}

/// Checks the four-graph contract; an empty result means valid.
pub fn validate_structure(d: &Dataset) -> Vec<Violation> {
    let mut violations = Vec::new();
    let has_assertion = Term::iri(vocab::NP_HAS_ASSERTION);
    let heads: BTreeSet<String> = d
        .match_pattern(None, Some(&has_assertion), None, None)
        .map(|q| q.graph_iri().to_string())
        .collect();
    let head = match heads.len() {
        0 => {
            violations.push(Violation::MissingHead);
            return violations;
        }
        1 => heads.into_iter().next().unwrap_or_default(),
        _ => {
            violations.push(Violation::MultipleHeads(heads.into_iter().collect()));
            return violations;
        }
    };
    let head_term = Term::iri(&head);
    let Some(np) = d
        .match_pattern(None, Some(&has_assertion), None, Some(&head_term))
        .map(|q| q.subject.clone())
        .next()
    else {
        return violations;
    };

    let mut part_graphs: Vec<String> = vec![head.clone()];
    let mut expected_head = 1;
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    let np_class = Term::iri(vocab::NP_NANOPUBLICATION);
    if d.match_pattern(Some(&np), Some(&rdf_type), Some(&np_class), Some(&head_term)).next().is_none() {
        violations.push(Violation::MissingType);
    }
    for (part, predicate) in LINKS {
        let p = Term::iri(predicate);
        let objects: Vec<&Term> = d.match_pattern(Some(&np), Some(&p), None, Some(&head_term)).map(|q| &q.object).collect();
        expected_head += objects.len();
        match objects.as_slice() {
            [] => violations.push(Violation::MissingLink(link_name(predicate))),
            [Term::Iri(g)] => {
                if part_graphs.contains(g) {
                    violations.push(Violation::SharedGraph(g.clone()));
                }
                part_graphs.push(g.clone());
                let size = d.graph(g).count();
                if size == 0 {
                    if part == "assertion" {
                        violations.push(Violation::EmptyAssertion);
                    } else {
                        violations.push(Violation::MissingGraph(part, g.clone()));
                    }
                }
            }
            [_] => violations.push(Violation::LinkNotIri(link_name(predicate))),
            _ => violations.push(Violation::DuplicateLink(link_name(predicate))),
        }
    }

    let head_size = d.graph(&head).count();
    if head_size > expected_head {
        for q in d.graph(&head) {
            let known = (q.subject == np && q.predicate == rdf_type && q.object == np_class)
                || (q.subject == np && LINKS.iter().any(|(_, p)| q.predicate.as_iri() == Some(p)));
            if !known {
                violations.push(Violation::ExtraHeadTriple(format!("{} {} {}", q.subject, q.predicate, q.object)));
            }
        }
    }

    for g in d.graph_names() {
        if !part_graphs.iter().any(|p| p == g) {
            violations.push(Violation::StrayGraph(g.to_string()));
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;

    fn well_formed(base: &str) -> Dataset {
        let mut d = Dataset::new();
        let head = format!("{base}#Head");
        d.insert(Triple::iri(base, vocab::RDF_TYPE, Term::iri(vocab::NP_NANOPUBLICATION)).in_graph(&head));
        d.insert(Triple::iri(base, vocab::NP_HAS_ASSERTION, Term::iri(format!("{base}#assertion"))).in_graph(&head));
        d.insert(Triple::iri(base, vocab::NP_HAS_PROVENANCE, Term::iri(format!("{base}#provenance"))).in_graph(&head));
        d.insert(Triple::iri(base, vocab::NP_HAS_PUBINFO, Term::iri(format!("{base}#pubinfo"))).in_graph(&head));
        d.insert(Triple::iri("http://ex/s", vocab::RDFS_LABEL, Term::string("x")).in_graph(&format!("{base}#assertion")));
        d.insert(Triple::iri(&format!("{base}#assertion"), vocab::PROV_WAS_DERIVED_FROM, Term::iri("http://ex/o")).in_graph(&format!("{base}#provenance")));
        d.insert(Triple::iri(base, vocab::PROV_WAS_ATTRIBUTED_TO, Term::iri("http://ex/me")).in_graph(&format!("{base}#pubinfo")));
        d
    }

    #[test]
    fn well_formed_has_no_violations() {
        assert_eq!(validate_structure(&well_formed("http://ex/np")), vec![]);
    }

    #[test]
    fn two_heads() {
        let mut d = well_formed("http://ex/np");
        d.extend(well_formed("http://ex/np2").iter().cloned());
        let v = validate_structure(&d);
        assert!(matches!(v.as_slice(), [Violation::MultipleHeads(_)]));
        assert!(v[0].to_string().starts_with("multiple heads"));
    }

    #[test]
    fn absent_assertion_graph() {
        let d: Dataset = well_formed("http://ex/np").iter().filter(|q| q.graph_iri() != "http://ex/np#assertion").cloned().collect();
        assert_eq!(validate_structure(&d), vec![Violation::EmptyAssertion]);
    }

    #[test]
    fn missing_link_and_stray_graph() {
        let mut d: Dataset = well_formed("http://ex/np")
            .iter()
            .filter(|q| q.predicate.as_iri() != Some(vocab::NP_HAS_PROVENANCE))
            .cloned()
            .collect();
        let v = validate_structure(&d);
        assert!(v.contains(&Violation::MissingLink("hasProvenance")));
        assert!(v.contains(&Violation::StrayGraph("http://ex/np#provenance".into())));
        d.insert(Triple::iri("http://ex/np", vocab::RDFS_LABEL, Term::string("x")).in_graph("http://ex/np#Head"));
        assert!(validate_structure(&d).iter().any(|v| matches!(v, Violation::ExtraHeadTriple(_))));
    }

    #[test]
    fn empty_dataset() {
        assert_eq!(validate_structure(&Dataset::new()), vec![Violation::MissingHead]);
    }
}
