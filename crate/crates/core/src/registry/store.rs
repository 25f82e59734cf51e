use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;

use super::{tokenize, Kind, RegistryError, SearchHit};
use crate::nanopub::{Nanopub, Part};
use crate::query::{parse_query, evaluate, ResultTable, TripleStore};
use crate::rdf::Term;
use crate::vocab;

#[derive(Debug, Clone, PartialEq)]
struct Summary {
    subject: String,
    label: String,
    description: String,
    kind: Kind,
}

/// In-memory registry state. Every record has passed verification.
#[derive(Debug, Clone, Default)]
pub struct RegistryStore {
    records: IndexMap<String, Nanopub>,
    summaries: BTreeMap<String, Summary>,
    index: BTreeMap<String, BTreeSet<String>>,
    triples: TripleStore,
}

fn literal_of(np: &Nanopub, subject: &Term, predicate: &str) -> Option<String> {
    let g = np.graph_iri(Part::Assertion);
    let predicate = Term::iri(predicate);
    let mut values: Vec<&str> = np
        .dataset()
        .match_pattern(Some(subject), Some(&predicate), None, None)
        .filter(|q| q.graph_iri() == g)
        .filter_map(|q| q.object.as_literal().map(|l| l.value.as_str()))
        .collect();
    values.sort();
    values.first().map(|s| s.to_string())
}

fn summarize(np: &Nanopub) -> Summary {
    let g = np.graph_iri(Part::Assertion);
    let subject = np.introduces().into_iter().next().unwrap_or_else(|| {
        np.graph(Part::Assertion)
            .find(|q| q.predicate.as_iri() == Some(vocab::RDFS_LABEL))
            .or_else(|| np.graph(Part::Assertion).next())
            .map(|q| q.subject.value().to_string())
            .unwrap_or_default()
    });
    let s = Term::iri(&subject);
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    let types = np
        .dataset()
        .match_pattern(Some(&s), Some(&rdf_type), None, None)
        .filter(|q| q.graph_iri() == g)
        .filter_map(|q| q.object.as_iri())
        .collect::<Vec<_>>();
    Summary {
        kind: Kind::from_types(types),
        label: literal_of(np, &s, vocab::RDFS_LABEL).unwrap_or_default(),
        description: literal_of(np, &s, vocab::DCTERMS_DESCRIPTION).unwrap_or_default(),
        subject,
    }
}

impl RegistryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Verifies and stores `np`. Returns whether it was newly added.
    pub fn insert(&mut self, np: Nanopub) -> Result<bool, RegistryError> {
        let report = np.verify();
        if !report.ok() {
            return Err(RegistryError::Rejected(report));
        }
        if let Some(existing) = self.records.get(np.uri()) {
            return if existing.dataset().same_quads(np.dataset()) {
                Ok(false)
            } else {
                Err(RegistryError::Conflict(np.uri().to_string()))
            };
        }
        let summary = summarize(&np);
        for token in tokenize(&summary.label).into_iter().chain(tokenize(&summary.description)) {
            self.index.entry(token).or_default().insert(np.uri().to_string());
        }
        self.summaries.insert(np.uri().to_string(), summary);
        self.triples.extend_from(np.dataset());
        self.records.insert(np.uri().to_string(), np);
        Ok(true)
    }

    pub fn get(&self, uri: &str) -> Option<&Nanopub> {
        self.records.get(uri)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &Nanopub> {
        self.records.values()
    }

    pub fn triples(&self) -> &TripleStore {
        &self.triples
    }

    /// Token → URIs, as maintained incrementally.
    pub fn index(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.index
    }

    /// A fresh store built from this store's records, for index checks.
    pub fn rebuilt(&self) -> Result<RegistryStore, RegistryError> {
        let mut fresh = RegistryStore::new();
        for np in self.records.values() {
            fresh.insert(np.clone())?;
        }
        Ok(fresh)
    }

    fn hit(&self, uri: &str, score: u32) -> SearchHit {
        let s = &self.summaries[uri];
        SearchHit {
            uri: uri.to_string(),
            subject: s.subject.clone(),
            label: s.label.clone(),
            kind: s.kind,
            description: s.description.clone(),
            score,
        }
    }

    /// Hits ranked by matched query tokens, then label, then URI.
    pub fn search(&self, q: &str) -> Vec<SearchHit> {
        let tokens: BTreeSet<String> = tokenize(q).into_iter().collect();
        let mut scores: BTreeMap<&str, u32> = BTreeMap::new();
        for t in &tokens {
            for uri in self.index.get(t).into_iter().flatten() {
                *scores.entry(uri).or_default() += 1;
            }
        }
        let mut hits: Vec<SearchHit> = scores.into_iter().map(|(uri, score)| self.hit(uri, score)).collect();
        hits.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.label.cmp(&b.label)).then_with(|| a.uri.cmp(&b.uri)));
        hits
    }

    pub fn list(&self, kind: Option<Kind>) -> Vec<SearchHit> {
        let mut hits: Vec<SearchHit> = self
            .summaries
            .iter()
            .filter(|(_, s)| kind.is_none_or(|k| s.kind == k))
            .map(|(uri, _)| self.hit(uri, 0))
            .collect();
        hits.sort_by(|a, b| a.label.cmp(&b.label).then_with(|| a.uri.cmp(&b.uri)));
        hits
    }

    pub fn query(&self, text: &str) -> Result<ResultTable, RegistryError> {
        Ok(evaluate(&parse_query(text)?, &self.triples))
    }
}
