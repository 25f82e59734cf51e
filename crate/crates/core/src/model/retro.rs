use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};

use super::{ModelError, Value};
use crate::nanopub::{datetime_literal, is_minted_uri};
use crate::rdf::{Term, Triple};
use crate::vocab;

/// Values whose lexical form exceeds this many bytes are recorded by digest.
pub const INLINE_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum ValueRecord {
    Inline(Value),
    Digest(String),
}

impl ValueRecord {
    pub fn capture(v: &Value) -> Self {
        let lexical = v.lexical();
        if lexical.len() <= INLINE_LIMIT {
            ValueRecord::Inline(v.clone())
        } else {
            ValueRecord::Digest(hex::encode(Sha256::digest(lexical.as_bytes())))
        }
    }

    pub fn to_literal(&self) -> Term {
        match self {
            ValueRecord::Inline(v) => v.to_literal(),
            ValueRecord::Digest(d) => Term::typed(d, vocab::PLEX_CONTENT_DIGEST),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepExecution {
    pub step_id: String,
    /// `<base>#activity`; `<base>` becomes the nanopub placeholder when published.
    pub activity_uri: String,
    pub step_uri: String,
    pub started: DateTime<Utc>,
    pub ended: DateTime<Utc>,
    pub input_values: BTreeMap<String, ValueRecord>,
    pub output_values: BTreeMap<String, ValueRecord>,
    /// Set when the step did not complete.
    pub error: Option<String>,
}

impl StepExecution {
    pub fn base(&self) -> &str {
        self.activity_uri.split('#').next().unwrap_or(&self.activity_uri)
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowExecution {
    /// `<base>#execution`
    pub execution_uri: String,
    pub plan_uri: String,
    pub step_executions: Vec<StepExecution>,
    pub started: DateTime<Utc>,
    pub ended: DateTime<Utc>,
    pub outputs: BTreeMap<String, ValueRecord>,
    pub error: Option<String>,
}

impl WorkflowExecution {
    pub fn base(&self) -> &str {
        self.execution_uri.split('#').next().unwrap_or(&self.execution_uri)
    }
}

/// One assertion graph's worth of triples plus the subject it introduces.
#[derive(Debug, Clone, PartialEq)]
pub struct AssertionSet {
    pub base: String,
    pub subject: String,
    pub triples: Vec<Triple>,
}

fn value_triples(out: &mut Vec<Triple>, owner: &str, link: &str, node: &str, name: &str, record: &ValueRecord) {
    out.push(Triple::iri(owner, link, Term::iri(node)));
    out.push(Triple::iri(node, vocab::RDF_TYPE, Term::iri(vocab::PROV_ENTITY)));
    out.push(Triple::iri(node, vocab::RDFS_LABEL, Term::string(name)));
    out.push(Triple::iri(node, vocab::PROV_VALUE, record.to_literal()));
}

fn step_execution_to_rdf(s: &StepExecution) -> AssertionSet {
    let base = s.base();
    let activity = &s.activity_uri;
    let mut t = vec![
        Triple::iri(activity, vocab::RDF_TYPE, Term::iri(vocab::PPLAN_ACTIVITY)),
        Triple::iri(activity, vocab::PPLAN_CORRESPONDS_TO_STEP, Term::iri(&s.step_uri)),
        Triple::iri(activity, vocab::PROV_STARTED_AT_TIME, datetime_literal(&s.started)),
        Triple::iri(activity, vocab::PROV_ENDED_AT_TIME, datetime_literal(&s.ended)),
    ];
    for (name, v) in &s.input_values {
        value_triples(&mut t, activity, vocab::PROV_USED, &format!("{base}#in/{name}"), name, v);
    }
    for (name, v) in &s.output_values {
        value_triples(&mut t, activity, vocab::PROV_GENERATED, &format!("{base}#out/{name}"), name, v);
    }
    if let Some(err) = &s.error {
        t.push(Triple::iri(activity, vocab::PLEX_FAILED_WITH, Term::string(err)));
    }
    AssertionSet { base: base.to_string(), subject: activity.clone(), triples: t }
}

/// The bundle assertion for the whole run, referencing each activity's
/// current URI.
pub fn workflow_execution_to_rdf(e: &WorkflowExecution) -> Result<AssertionSet, ModelError> {
    if !is_minted_uri(e.plan_uri.split('#').next().unwrap_or_default()) {
        return Err(ModelError::Unpublished(e.plan_uri.clone()));
    }
    let exec = &e.execution_uri;
    let base = e.base();
    let mut t = vec![
        Triple::iri(exec, vocab::RDF_TYPE, Term::iri(vocab::PROV_BUNDLE)),
        Triple::iri(exec, vocab::PROV_WAS_DERIVED_FROM, Term::iri(&e.plan_uri)),
        Triple::iri(exec, vocab::PROV_STARTED_AT_TIME, datetime_literal(&e.started)),
        Triple::iri(exec, vocab::PROV_ENDED_AT_TIME, datetime_literal(&e.ended)),
    ];
    for s in &e.step_executions {
        t.push(Triple::iri(exec, vocab::PLEX_INCLUDES_ACTIVITY, Term::iri(&s.activity_uri)));
    }
    for (i, (name, v)) in e.outputs.iter().enumerate() {
        value_triples(&mut t, exec, vocab::PROV_GENERATED, &format!("{base}#output/{i}"), name, v);
    }
    if let Some(err) = &e.error {
        t.push(Triple::iri(exec, vocab::PLEX_FAILED_WITH, Term::string(err)));
    }
    Ok(AssertionSet { base: base.to_string(), subject: exec.clone(), triples: t })
}

/// One assertion set per step execution followed by one for the run.
pub fn retroprov_to_rdf(e: &WorkflowExecution) -> Result<Vec<AssertionSet>, ModelError> {
    let workflow = workflow_execution_to_rdf(e)?;
    let mut sets = Vec::with_capacity(e.step_executions.len() + 1);
    for s in &e.step_executions {
        if !is_minted_uri(s.step_uri.split('#').next().unwrap_or_default()) {
            return Err(ModelError::Unpublished(s.step_uri.clone()));
        }
        sets.push(step_execution_to_rdf(s));
    }
    sets.push(workflow);
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    const PLAN: &str = "http://purl.org/np/RAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAA#plan";

    fn step_uri(i: usize) -> String {
        format!("http://purl.org/np/RA{:0>43}#step", i)
    }

    fn execution(n: usize) -> WorkflowExecution {
        let t = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
        WorkflowExecution {
            execution_uri: "http://purl.org/nanopub/temp/run#execution".into(),
            plan_uri: PLAN.into(),
            step_executions: (0..n)
                .map(|i| StepExecution {
                    step_id: format!("s{i}"),
                    activity_uri: format!("http://purl.org/nanopub/temp/a{i}#activity"),
                    step_uri: step_uri(i),
                    started: t,
                    ended: t,
                    input_values: [("x".to_string(), ValueRecord::capture(&Value::Int(i as i64)))].into(),
                    output_values: [("y".to_string(), ValueRecord::capture(&Value::Str("big".repeat(100))))].into(),
                    error: None,
                })
                .collect(),
            started: t,
            ended: t,
            outputs: BTreeMap::new(),
            error: None,
        }
    }

    #[test]
    fn n_plus_one_sets() {
        assert_eq!(retroprov_to_rdf(&execution(5)).unwrap().len(), 6);
        assert_eq!(retroprov_to_rdf(&execution(0)).unwrap().len(), 1);
    }

    #[test]
    fn corresponds_to_published_steps() {
        let sets = retroprov_to_rdf(&execution(3)).unwrap();
        let targets: Vec<&str> = sets
            .iter()
            .flat_map(|s| &s.triples)
            .filter(|t| t.predicate.as_iri() == Some(vocab::PPLAN_CORRESPONDS_TO_STEP))
            .filter_map(|t| t.object.as_iri())
            .collect();
        assert_eq!(targets, vec![step_uri(0), step_uri(1), step_uri(2)]);
        let last = sets.last().unwrap();
        assert!(last.triples.iter().any(|t| t.predicate.as_iri() == Some(vocab::PROV_WAS_DERIVED_FROM) && t.object.as_iri() == Some(PLAN)));
        assert_eq!(last.triples.iter().filter(|t| t.predicate.as_iri() == Some(vocab::PLEX_INCLUDES_ACTIVITY)).count(), 3);
    }

    #[test]
    fn unpublished_plan_rejected() {
        let mut e = execution(1);
        e.plan_uri = format!("{}plan", vocab::LOCAL_BASE);
        assert!(matches!(retroprov_to_rdf(&e), Err(ModelError::Unpublished(_))));
    }

    #[test]
    fn large_values_are_digested() {
        let small = ValueRecord::capture(&Value::Str("a".repeat(INLINE_LIMIT)));
        assert!(matches!(small, ValueRecord::Inline(_)));
        let big = ValueRecord::capture(&Value::Str("a".repeat(INLINE_LIMIT + 1)));
        let ValueRecord::Digest(d) = &big else { panic!("expected digest") };
        assert_eq!(d.len(), 64);
        assert_eq!(big.to_literal().as_literal().unwrap().datatype.as_deref(), Some(vocab::PLEX_CONTENT_DIGEST));
    }
}
