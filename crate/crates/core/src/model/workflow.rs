use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;

use super::step::{first_literal, has_type, objects, position, step_from_rdf, variable_triples, variables_from_rdf};
use super::{FairWorkflow, ModelError, Source, Value};
use crate::exec::build_graph;
use crate::rdf::{Dataset, Term, Triple};
use crate::vocab;

pub fn plan_iri(base: &str) -> String {
    format!("{base}#plan")
}

fn slot_iri(base: &str, id: &str) -> String {
    format!("{base}#slot/{id}")
}

fn source_triples(node: &str, base: &str, source: &Source) -> Vec<Triple> {
    match source {
        Source::WorkflowInput(name) => {
            vec![Triple::iri(node, vocab::PLEX_FROM_WORKFLOW_INPUT, Term::iri(format!("{base}#input/{name}")))]
        }
        Source::Constant(v) => vec![Triple::iri(node, vocab::PLEX_CONSTANT_VALUE, v.to_literal())],
        Source::StepOutput { step, output } => vec![
            Triple::iri(node, vocab::PLEX_FROM_SLOT, Term::iri(slot_iri(base, step))),
            Triple::iri(node, vocab::PLEX_FROM_OUTPUT, Term::string(output)),
        ],
    }
}

/// Emits the plan description. `step_uris` maps step ids to the published
/// step IRIs; ids missing from it fall back to the step's own `uri`.
pub fn workflow_to_rdf(
    w: &FairWorkflow,
    base: &str,
    step_uris: &IndexMap<String, String>,
) -> Result<Vec<Triple>, ModelError> {
    w.validate()?;
    let graph = build_graph(w)?;
    let plan = plan_iri(base);
    let uri_of = |id: &str| -> Result<String, ModelError> {
        step_uris
            .get(id)
            .cloned()
            .or_else(|| w.steps.get(id).and_then(|s| s.uri.clone()))
            .ok_or_else(|| ModelError::MissingStepUri(id.to_string()))
    };

    let mut out = vec![
        Triple::iri(&plan, vocab::RDF_TYPE, Term::iri(vocab::PPLAN_PLAN)),
        Triple::iri(&plan, vocab::RDFS_LABEL, Term::string(&w.label)),
        Triple::iri(&plan, vocab::DCTERMS_DESCRIPTION, Term::string(&w.description)),
    ];
    for (i, v) in w.workflow_inputs.iter().enumerate() {
        let var = format!("{base}#input/{}", v.name);
        out.push(Triple::iri(&plan, vocab::PLEX_HAS_WORKFLOW_INPUT, Term::iri(&var)));
        out.push(Triple::iri(&var, vocab::PPLAN_IS_VARIABLE_OF_PLAN, Term::iri(&plan)));
        out.extend(variable_triples(&var, i, v));
    }
    for (i, (id, _)) in w.steps.iter().enumerate() {
        let step_uri = uri_of(id)?;
        Term::try_iri(step_uri.as_str())?;
        let slot = slot_iri(base, id);
        out.push(Triple::iri(&step_uri, vocab::PPLAN_IS_STEP_OF_PLAN, Term::iri(&plan)));
        out.push(Triple::iri(&plan, vocab::PLEX_HAS_STEP_SLOT, Term::iri(&slot)));
        out.push(Triple::iri(&slot, vocab::PLEX_SLOT_ID, Term::string(id)));
        out.push(Triple::iri(&slot, vocab::PLEX_USES_STEP, Term::iri(&step_uri)));
        out.push(Triple::iri(&slot, vocab::PLEX_POSITION, Term::integer(i as i64)));
        for pred in w.after.get(id).into_iter().flatten() {
            out.push(Triple::iri(&slot, vocab::PLEX_RUNS_AFTER, Term::iri(slot_iri(base, pred))));
        }
    }
    for ((id, input), source) in &w.bindings {
        let node = format!("{base}#bind/{id}/{input}");
        out.push(Triple::iri(&slot_iri(base, id), vocab::PLEX_HAS_BINDING, Term::iri(&node)));
        out.push(Triple::iri(&node, vocab::PLEX_TARGET_INPUT, Term::string(input)));
        out.extend(source_triples(&node, base, source));
    }
    for (i, source) in w.workflow_outputs.iter().enumerate() {
        let node = format!("{base}#output/{i}");
        out.push(Triple::iri(&plan, vocab::PLEX_HAS_WORKFLOW_OUTPUT, Term::iri(&node)));
        out.push(Triple::iri(&node, vocab::PLEX_POSITION, Term::integer(i as i64)));
        out.extend(source_triples(&node, base, source));
    }
    let mut precedes = BTreeSet::new();
    for (from, to) in graph.edges() {
        precedes.insert((uri_of(from)?, uri_of(to)?));
    }
    for (from, to) in precedes {
        out.push(Triple::iri(&from, vocab::DUL_PRECEDES, Term::iri(to)));
    }
    Ok(out)
}

fn malformed(subject: &Term, reason: impl Into<String>) -> ModelError {
    ModelError::Malformed { subject: subject.value().to_string(), reason: reason.into() }
}

fn source_from_rdf(
    d: &Dataset,
    node: &Term,
    slot_ids: &BTreeMap<Term, String>,
    input_names: &BTreeMap<Term, String>,
) -> Result<Source, ModelError> {
    if let Some(v) = objects(d, node, vocab::PLEX_FROM_WORKFLOW_INPUT).next() {
        let name = input_names.get(v).ok_or_else(|| malformed(node, "unknown workflow input"))?;
        return Ok(Source::WorkflowInput(name.clone()));
    }
    if let Some(lit) = objects(d, node, vocab::PLEX_CONSTANT_VALUE).next() {
        let value = Value::from_literal(lit).ok_or_else(|| malformed(node, "unsupported constant literal"))?;
        return Ok(Source::Constant(value));
    }
    if let Some(slot) = objects(d, node, vocab::PLEX_FROM_SLOT).next() {
        let step = slot_ids.get(slot).ok_or_else(|| malformed(node, "source slot is not part of the plan"))?;
        let output = first_literal(d, node, vocab::PLEX_FROM_OUTPUT).ok_or_else(|| malformed(node, "missing output name"))?;
        return Ok(Source::StepOutput { step: step.clone(), output });
    }
    Err(malformed(node, "binding has no source"))
}

/// Rebuilds a workflow from a dataset holding the plan and all of its
/// steps' descriptions.
pub fn workflow_from_rdf(d: &Dataset, plan_uri: &str) -> Result<FairWorkflow, ModelError> {
    let plan = Term::iri(plan_uri);
    if !has_type(d, &plan, vocab::PPLAN_PLAN) {
        return Err(ModelError::MissingType(plan_uri.to_string(), "p-plan:Plan"));
    }
    let label = first_literal(d, &plan, vocab::RDFS_LABEL).ok_or_else(|| ModelError::MissingLabelOn(plan_uri.to_string()))?;
    let workflow_inputs = variables_from_rdf(d, &plan, vocab::PLEX_HAS_WORKFLOW_INPUT)?;
    let input_names: BTreeMap<Term, String> = objects(d, &plan, vocab::PLEX_HAS_WORKFLOW_INPUT)
        .filter_map(|v| first_literal(d, v, vocab::RDFS_LABEL).map(|n| (v.clone(), n)))
        .collect();

    let mut slots: Vec<(i64, String, Term)> = Vec::new();
    for slot in objects(d, &plan, vocab::PLEX_HAS_STEP_SLOT) {
        let id = first_literal(d, slot, vocab::PLEX_SLOT_ID).ok_or_else(|| malformed(slot, "slot without id"))?;
        slots.push((position(d, slot), id, slot.clone()));
    }
    slots.sort();
    let slot_ids: BTreeMap<Term, String> = slots.iter().map(|(_, id, slot)| (slot.clone(), id.clone())).collect();

    let mut w = FairWorkflow {
        uri: Some(plan_uri.to_string()),
        label,
        description: first_literal(d, &plan, vocab::DCTERMS_DESCRIPTION).unwrap_or_default(),
        workflow_inputs,
        ..Default::default()
    };
    for (_, id, slot) in &slots {
        let step_uri = objects(d, slot, vocab::PLEX_USES_STEP)
            .find_map(|t| t.as_iri().map(str::to_string))
            .ok_or_else(|| malformed(slot, "slot without step"))?;
        w.steps.insert(id.clone(), step_from_rdf(d, &step_uri)?);
        for pred in objects(d, slot, vocab::PLEX_RUNS_AFTER) {
            let pred_id = slot_ids.get(pred).ok_or_else(|| malformed(slot, "runsAfter target is not part of the plan"))?;
            w.after.entry(id.clone()).or_default().insert(pred_id.clone());
        }
        for node in objects(d, slot, vocab::PLEX_HAS_BINDING) {
            let input = first_literal(d, node, vocab::PLEX_TARGET_INPUT).ok_or_else(|| malformed(node, "binding without target"))?;
            w.bindings.insert((id.clone(), input), source_from_rdf(d, node, &slot_ids, &input_names)?);
        }
    }
    let mut outputs: Vec<(i64, Source)> = Vec::new();
    for node in objects(d, &plan, vocab::PLEX_HAS_WORKFLOW_OUTPUT) {
        outputs.push((position(d, node), source_from_rdf(d, node, &slot_ids, &input_names)?));
    }
    outputs.sort_by_key(|(p, _)| *p);
    w.workflow_outputs = outputs.into_iter().map(|(_, s)| s).collect();
    Ok(w)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{step_iri, step_to_rdf, FairStep, Variable};
    use proptest::prelude::*;

    const PLAN_BASE: &str = "http://purl.org/nanopub/temp/plan";

    pub(crate) fn chain(n: usize) -> FairWorkflow {
        let mut w = FairWorkflow::new(format!("chain of {n}"));
        w.workflow_inputs.push(Variable::new("x"));
        for i in 0..n {
            let id = format!("s{i}");
            w.add_step(&id, FairStep::new(format!("step {i}"), "builtin:identity").with_input(Variable::new("x")).with_output(Variable::new("y")));
            let source = if i == 0 {
                Source::WorkflowInput("x".into())
            } else {
                Source::StepOutput { step: format!("s{}", i - 1), output: "y".into() }
            };
            w.bind(&id, "x", source);
        }
        if n > 0 {
            w.workflow_outputs.push(Source::StepOutput { step: format!("s{}", n - 1), output: "y".into() });
        }
        w
    }

    fn uris(w: &FairWorkflow) -> IndexMap<String, String> {
        w.steps.keys().map(|id| (id.clone(), step_iri(&format!("http://purl.org/np/RA{id}")))).collect()
    }

    fn full_dataset(w: &FairWorkflow) -> Dataset {
        let step_uris = uris(w);
        let mut d = Dataset::new();
        for (id, s) in &w.steps {
            let base = format!("http://purl.org/np/RA{id}");
            d.extend(step_to_rdf(s, &base).unwrap().into_iter().map(|t| t.in_graph(&format!("{base}#assertion"))));
        }
        d.extend(workflow_to_rdf(w, PLAN_BASE, &step_uris).unwrap().into_iter().map(|t| t.in_graph("http://purl.org/nanopub/temp/plan#assertion")));
        d
    }

    fn count(triples: &[Triple], p: &str) -> usize {
        triples.iter().filter(|t| t.predicate.as_iri() == Some(p)).count()
    }

    #[test]
    fn membership_and_precedence_counts() {
        for (n, precedes) in [(1, 0), (3, 2), (5, 4)] {
            let w = chain(n);
            let t = workflow_to_rdf(&w, PLAN_BASE, &uris(&w)).unwrap();
            assert_eq!(count(&t, vocab::PPLAN_IS_STEP_OF_PLAN), n);
            assert_eq!(count(&t, vocab::DUL_PRECEDES), precedes);
        }
    }

    #[test]
    fn workflow_input_variable_of_plan() {
        let w = chain(2);
        let t = workflow_to_rdf(&w, PLAN_BASE, &uris(&w)).unwrap();
        assert_eq!(count(&t, vocab::PPLAN_IS_VARIABLE_OF_PLAN), 1);
    }

    #[test]
    fn cycle_and_unbound_rejected() {
        let mut w = chain(2);
        w.bind("s0", "x", Source::StepOutput { step: "s1".into(), output: "y".into() });
        assert!(matches!(workflow_to_rdf(&w, PLAN_BASE, &uris(&w)), Err(ModelError::Cycle(_))));
        let mut w = chain(2);
        w.bindings.remove(&("s1".to_string(), "x".to_string()));
        assert!(matches!(workflow_to_rdf(&w, PLAN_BASE, &uris(&w)), Err(ModelError::UnboundInput { .. })));
    }

    #[test]
    fn round_trip_with_constants_and_after() {
        let mut w = chain(3);
        w.description = "three steps".into();
        w.steps.get_mut("s2").unwrap().inputs.push(Variable::new("k"));
        w.bind("s2", "k", Source::Constant(Value::Int(7)));
        w.after.entry("s2".into()).or_default().insert("s0".into());
        let back = workflow_from_rdf(&full_dataset(&w), &plan_iri(PLAN_BASE)).unwrap();
        assert_eq!(back.uri.as_deref(), Some(plan_iri(PLAN_BASE).as_str()));
        let strip = |mut w: FairWorkflow| {
            w.uri = None;
            for s in w.steps.values_mut() {
                s.uri = None;
            }
            w
        };
        assert_eq!(strip(back), w);
    }

    fn arb_workflow() -> impl Strategy<Value = FairWorkflow> {
        // random DAG: each step i may read from any earlier step or from the input
        (1usize..7, proptest::collection::vec((any::<u8>(), any::<bool>(), any::<i32>()), 7))
            .prop_map(|(n, picks)| {
                let mut w = FairWorkflow::new("random");
                w.workflow_inputs.push(Variable::new("seed"));
                for (i, &(pick, constant, c)) in picks.iter().enumerate().take(n) {
                    let id = format!("n{i}");
                    w.add_step(&id, FairStep::new(format!("node {i}"), "builtin:add").with_input(Variable::new("a")).with_input(Variable::new("b")).with_output(Variable::new("sum")));
                    let a = if i == 0 { Source::WorkflowInput("seed".into()) } else { Source::StepOutput { step: format!("n{}", pick as usize % i), output: "sum".into() } };
                    let b = if constant { Source::Constant(Value::Int(c as i64)) } else { Source::WorkflowInput("seed".into()) };
                    w.bind(&id, "a", a);
                    w.bind(&id, "b", b);
                }
                w.workflow_outputs.push(Source::StepOutput { step: format!("n{}", n - 1), output: "sum".into() });
                w
            })
    }

    proptest! {
        #[test]
        fn workflow_round_trip(w in arb_workflow()) {
            let back = workflow_from_rdf(&full_dataset(&w), &plan_iri(PLAN_BASE)).unwrap();
            prop_assert_eq!(back.steps.keys().collect::<Vec<_>>(), w.steps.keys().collect::<Vec<_>>());
            prop_assert_eq!(&back.bindings, &w.bindings);
            prop_assert_eq!(&back.workflow_outputs, &w.workflow_outputs);
            prop_assert_eq!(&back.workflow_inputs, &w.workflow_inputs);
        }

        #[test]
        fn emitted_predicates_come_from_vocabulary(w in arb_workflow()) {
            for q in full_dataset(&w).iter() {
                prop_assert!(vocab::is_vocabulary_term(q.predicate.value()));
                if q.predicate.as_iri() == Some(vocab::RDF_TYPE) {
                    prop_assert!(vocab::is_vocabulary_term(q.object.value()));
                }
            }
        }
    }
}
