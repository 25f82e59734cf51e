use chrono::{DateTime, Utc};
use indexmap::IndexMap;

use super::{normalize_uri, Registry, RegistryError};
use crate::model::{
    plan_iri, retroprov_to_rdf, step_from_rdf, step_iri, step_to_rdf, workflow_execution_to_rdf, workflow_from_rdf,
    workflow_to_rdf, AssertionSet, FairStep, FairWorkflow, ModelError, WorkflowExecution,
};
use crate::nanopub::{assemble, new_temp_uri, sign, Nanopub, NanopubContent, Part, Profile};
use crate::rdf::{Term, Triple};
use crate::vocab;

fn build(
    temp: &str,
    assertion: Vec<Triple>,
    subject: &str,
    derived_from: Option<&str>,
    profile: &Profile,
    created: DateTime<Utc>,
) -> Result<Nanopub, RegistryError> {
    let provenance = derived_from
        .map(|origin| vec![Triple::iri(&Part::Assertion.graph_of(temp), vocab::PROV_WAS_DERIVED_FROM, Term::iri(origin))])
        .unwrap_or_default();
    let pubinfo = vec![Triple::iri(temp, vocab::NPX_INTRODUCES, Term::iri(subject))];
    let unsigned = assemble(temp, NanopubContent { assertion, provenance, pubinfo }, profile, created)?;
    Ok(sign(&unsigned, profile)?)
}

/// A signed nanopub describing `step`, with a derivation link in its
/// provenance when the step reuses a published one.
pub fn step_nanopub(step: &FairStep, profile: &Profile, created: DateTime<Utc>) -> Result<Nanopub, RegistryError> {
    let temp = new_temp_uri();
    let assertion = step_to_rdf(step, &temp)?;
    build(&temp, assertion, &step_iri(&temp), step.derived_from.as_deref(), profile, created)
}

/// A signed plan nanopub; `step_uris` maps step ids to published step IRIs.
pub fn plan_nanopub(
    w: &FairWorkflow,
    step_uris: &IndexMap<String, String>,
    profile: &Profile,
    created: DateTime<Utc>,
) -> Result<Nanopub, RegistryError> {
    let temp = new_temp_uri();
    let assertion = workflow_to_rdf(w, &temp, step_uris)?;
    build(&temp, assertion, &plan_iri(&temp), None, profile, created)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowPublication {
    /// Step nanopubs in declaration order, then the plan nanopub.
    pub nanopubs: Vec<String>,
    pub plan_uri: String,
    pub step_uris: IndexMap<String, String>,
    /// The workflow with its plan and step URIs filled in.
    pub workflow: FairWorkflow,
}

/// Builds the N step nanopubs and the plan nanopub without publishing.
pub fn prepare_workflow(
    w: &FairWorkflow,
    profile: &Profile,
    created: DateTime<Utc>,
) -> Result<(Vec<Nanopub>, WorkflowPublication), RegistryError> {
    w.validate()?;
    let mut nps = Vec::with_capacity(w.steps.len() + 1);
    let mut step_uris = IndexMap::new();
    let mut published = w.clone();
    for (id, step) in &w.steps {
        let np = step_nanopub(step, profile, created)?;
        let uri = step_iri(np.uri());
        published.steps[id].uri = Some(uri.clone());
        step_uris.insert(id.clone(), uri);
        nps.push(np);
    }
    let plan = plan_nanopub(w, &step_uris, profile, created)?;
    let plan_uri = plan_iri(plan.uri());
    published.uri = Some(plan_uri.clone());
    nps.push(plan);
    let publication = WorkflowPublication {
        nanopubs: nps.iter().map(|np| np.uri().to_string()).collect(),
        plan_uri,
        step_uris,
        workflow: published,
    };
    Ok((nps, publication))
}

fn publish_all(reg: &dyn Registry, nps: &[Nanopub]) -> Result<Vec<String>, RegistryError> {
    let mut done = Vec::with_capacity(nps.len());
    for np in nps {
        match reg.publish(np) {
            Ok(uri) => done.push(uri),
            Err(cause) => return Err(RegistryError::Partial { published: done, cause: Box::new(cause) }),
        }
    }
    Ok(done)
}

/// Publishes every step, then the plan that references them.
pub fn publish_workflow(
    reg: &dyn Registry,
    w: &FairWorkflow,
    profile: &Profile,
    created: DateTime<Utc>,
) -> Result<WorkflowPublication, RegistryError> {
    let (nps, publication) = prepare_workflow(w, profile, created)?;
    publish_all(reg, &nps)?;
    Ok(publication)
}

pub fn publish_step(reg: &dyn Registry, step: &FairStep, profile: &Profile, created: DateTime<Utc>) -> Result<Nanopub, RegistryError> {
    let np = step_nanopub(step, profile, created)?;
    reg.publish(&np)?;
    Ok(np)
}

fn set_nanopub(set: AssertionSet, profile: &Profile, created: DateTime<Utc>) -> Result<Nanopub, RegistryError> {
    build(&set.base, set.triples, &set.subject, None, profile, created)
}

/// Builds one nanopub per step execution plus one for the run. Activity
/// URIs in the run record point at the published activity nanopubs.
pub fn prepare_retroprov(e: &WorkflowExecution, profile: &Profile, created: DateTime<Utc>) -> Result<Vec<Nanopub>, RegistryError> {
    let mut sets = retroprov_to_rdf(e)?;
    sets.pop();
    let mut rebased = e.clone();
    let mut nps = Vec::with_capacity(sets.len() + 1);
    for (set, step) in sets.into_iter().zip(rebased.step_executions.iter_mut()) {
        let base = set.base.clone();
        let np = set_nanopub(set, profile, created)?;
        step.activity_uri = format!("{}{}", np.uri(), &step.activity_uri[base.len()..]);
        nps.push(np);
    }
    nps.push(set_nanopub(workflow_execution_to_rdf(&rebased)?, profile, created)?);
    Ok(nps)
}

/// Publishes the execution record; the plan must already be in `reg`.
pub fn publish_retroprov(
    reg: &dyn Registry,
    e: &WorkflowExecution,
    profile: &Profile,
    created: DateTime<Utc>,
) -> Result<Vec<String>, RegistryError> {
    match reg.fetch(&e.plan_uri) {
        Ok(_) => {}
        Err(RegistryError::NotFound(_)) => return Err(ModelError::Unpublished(e.plan_uri.clone()).into()),
        Err(other) => return Err(other),
    }
    publish_all(reg, &prepare_retroprov(e, profile, created)?)
}

fn fetch_verified(reg: &dyn Registry, uri: &str) -> Result<Nanopub, RegistryError> {
    let np = reg.fetch(uri)?;
    let report = np.verify();
    if !report.ok() {
        return Err(RegistryError::Rejected(report));
    }
    Ok(np)
}

fn subject_iri(np: &Nanopub, requested: &str, fallback: impl Fn(&str) -> String) -> String {
    match requested.split_once('#') {
        Some((_, fragment)) => format!("{}#{fragment}", np.uri()),
        None => np.introduces().into_iter().next().unwrap_or_else(|| fallback(np.uri())),
    }
}

/// Fetches, verifies and decodes a published step. Accepts a nanopub URI,
/// a step IRI or a bare code.
pub fn fetch_step(reg: &dyn Registry, uri: &str) -> Result<FairStep, RegistryError> {
    let np = fetch_verified(reg, uri)?;
    let iri = subject_iri(&np, uri, step_iri);
    Ok(step_from_rdf(np.dataset(), &iri)?)
}

/// Fetches a published plan together with all of its steps.
pub fn fetch_workflow(reg: &dyn Registry, uri: &str) -> Result<FairWorkflow, RegistryError> {
    let np = fetch_verified(reg, uri)?;
    let iri = subject_iri(&np, uri, plan_iri);
    let mut dataset = np.dataset().clone();
    let step_refs: Vec<String> = np
        .graph(Part::Assertion)
        .filter(|q| q.predicate.as_iri() == Some(vocab::PLEX_USES_STEP))
        .filter_map(|q| q.object.as_iri().map(str::to_string))
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    for step in step_refs {
        if seen.insert(normalize_uri(&step)) {
            dataset.extend(fetch_verified(reg, &step)?.dataset().iter().cloned());
        }
    }
    Ok(workflow_from_rdf(&dataset, &iri)?)
}
