use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use plexflow_core::corpus::{self, seed};
use plexflow_core::exec::{execute, Executors, ValueMap};
use plexflow_core::manifest::{parse_step_manifest, parse_workflow_manifest, resolve};
use plexflow_core::model::{step_from_rdf, step_iri, FairStep, FairWorkflow, Value};
use plexflow_core::nanopub::{Nanopub, Profile};
use plexflow_core::query::{Cell, ResultTable, PLAN_SIZES_QUERY, STEP_EXECUTIONS_QUERY, STEP_REUSE_QUERY};
use plexflow_core::rdf::{canonical_nquads, Term};
use plexflow_core::registry::{
    fetch_step, fetch_workflow, publish_retroprov, publish_step, publish_workflow, Kind, LocalRegistry, Registry, RegistryError,
};
use plexflow_core::vocab;

fn profile() -> Profile {
    Profile::from_signing_key("Test Author", None, ed25519_dalek::SigningKey::from_bytes(&[7; 32])).unwrap()
}

fn created() -> chrono::DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 3, 1, 12, 0, 0).unwrap()
}

fn inline(text: &str) -> FairWorkflow {
    resolve(&parse_workflow_manifest(text).unwrap(), |_: &str| Err::<FairStep, _>("offline")).unwrap()
}

fn string_inputs(w: &FairWorkflow) -> ValueMap {
    w.workflow_inputs.iter().map(|v| (v.name.clone(), Value::Str("img".into()))).collect()
}

#[test]
fn publish_fetch_and_idempotence() {
    let reg = LocalRegistry::in_memory();
    let step = parse_step_manifest(corpus::step_manifest("add_blur").unwrap()).unwrap().to_step();
    let np = publish_step(&reg, &step, &profile(), created()).unwrap();
    assert_eq!(reg.fetch(np.uri()).unwrap().to_trig(), np.to_trig());
    assert_eq!(reg.publish(&np).unwrap(), np.uri());
    assert_eq!(reg.len(), 1);
    let back = fetch_step(&reg, np.uri()).unwrap();
    assert_eq!(back.label, step.label);
    assert_eq!(back.inputs, step.inputs);
    assert_eq!(back.uri.as_deref(), Some(step_iri(np.uri()).as_str()));
    assert!(matches!(reg.fetch("RAnothing"), Err(RegistryError::NotFound(_))));
}

#[test]
fn tampered_nanopub_rejected() {
    let reg = LocalRegistry::in_memory();
    let step = parse_step_manifest(corpus::step_manifest("add").unwrap()).unwrap().to_step();
    let np = plexflow_core::registry::step_nanopub(&step, &profile(), created()).unwrap();
    let tampered = np.to_trig().replace("Add two numbers", "Subtract two numbers");
    let tampered = Nanopub::from_trig(&tampered).unwrap();
    match reg.publish(&tampered) {
        Err(RegistryError::Rejected(report)) => assert!(!report.uri_ok),
        other => panic!("expected rejection, got {other:?}"),
    }
    assert!(reg.is_empty());
}

#[test]
fn n_plus_one_for_fixtures() {
    let reg = LocalRegistry::in_memory();
    for (text, n) in [(corpus::PENCIL_SKETCH, 5), (corpus::THREE_STEP, 3)] {
        let w = inline(text);
        let publication = publish_workflow(&reg, &w, &profile(), created()).unwrap();
        assert_eq!(publication.nanopubs.len(), n + 1);
        let run = execute(&publication.workflow, &string_inputs(&w), &mut Executors::default()).unwrap();
        let retro = publish_retroprov(&reg, &run.retroprov, &profile(), created()).unwrap();
        assert_eq!(retro.len(), n + 1);
        for uri in &retro[..n] {
            let np = reg.fetch(uri).unwrap();
            assert!(np.dataset().iter().any(|q| q.predicate.as_iri() == Some(vocab::PPLAN_CORRESPONDS_TO_STEP)));
        }
    }
}

#[test]
fn single_step_and_empty_runs() {
    let reg = LocalRegistry::in_memory();
    let w = inline("workflow:\n  label: one\n  inputs: [a]\n  steps:\n    - id: s\n      step: {label: up, code: 'builtin:upper', inputs: [{name: x}], outputs: [{name: y}]}\n      bind: {x: workflow.a}\n");
    assert_eq!(publish_workflow(&reg, &w, &profile(), created()).unwrap().nanopubs.len(), 2);

    let empty = FairWorkflow::new("nothing to do");
    let publication = publish_workflow(&reg, &empty, &profile(), created()).unwrap();
    assert_eq!(publication.nanopubs.len(), 1);
    let run = execute(&publication.workflow, &ValueMap::new(), &mut Executors::default()).unwrap();
    assert_eq!(publish_retroprov(&reg, &run.retroprov, &profile(), created()).unwrap().len(), 1);
}

#[test]
fn retroprov_requires_published_plan() {
    let reg = LocalRegistry::in_memory();
    let w = inline(corpus::THREE_STEP);
    let run = execute(&w, &string_inputs(&w), &mut Executors::default()).unwrap();
    assert!(publish_retroprov(&reg, &run.retroprov, &profile(), created()).is_err());
}

#[test]
fn fetched_workflow_round_trips() {
    let reg = LocalRegistry::in_memory();
    let w = inline(corpus::PENCIL_SKETCH);
    let publication = publish_workflow(&reg, &w, &profile(), created()).unwrap();
    let back = fetch_workflow(&reg, publication.nanopubs.last().unwrap()).unwrap();
    assert_eq!(back, publication.workflow);
}

#[test]
fn search_ranks_labels() {
    let reg = LocalRegistry::in_memory();
    seed(&reg, &profile(), created()).unwrap();
    let hits = reg.search("blur").unwrap();
    assert_eq!(hits[0].label, "Add blur to image");
    assert!(hits.iter().all(|h| h.score > 0));
    assert!(reg.search("zzz-nonexistent").unwrap().is_empty());
    assert!(reg.search("").unwrap().is_empty());
    let sketch = reg.search("pencil sketch").unwrap();
    assert_eq!(sketch[0].kind, Kind::Workflow);
    assert!(sketch[0].label.contains("pencil sketch"));
    assert_eq!(reg.list(Some(Kind::Workflow)).unwrap().len(), 3);
}

fn quads(reg: &LocalRegistry) -> Vec<(String, String, String)> {
    let mut all: Vec<(String, String, String)> = reg.with_store(|s| {
        s.records()
            .flat_map(|np| np.dataset().iter())
            .map(|q| (q.subject.to_string(), q.predicate.to_string(), q.object.to_string()))
            .collect()
    });
    all.sort();
    all.dedup();
    all
}

// Nested-loop join over N-Triples strings; patterns use `?var` or full terms.
fn oracle(patterns: &[[String; 3]], triples: &[(String, String, String)], group: &str, count: &str, distinct: bool) -> BTreeMap<String, u64> {
    let mut envs = vec![BTreeMap::<String, String>::new()];
    for pat in patterns {
        let mut next = Vec::new();
        for env in &envs {
            for (s, p, o) in triples {
                let mut e = env.clone();
                if pat.iter().zip([s, p, o]).all(|(pt, v)| match pt.strip_prefix('?') {
                    Some(var) => e.entry(var.to_string()).or_insert_with(|| v.clone()) == v,
                    None => pt == v,
                }) {
                    next.push(e);
                }
            }
        }
        envs = next;
    }
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for e in envs {
        let key = e[group].clone();
        groups.entry(key).or_default().push(e[count].clone());
    }
    groups
        .into_iter()
        .map(|(k, mut v)| {
            if distinct {
                v.sort();
                v.dedup();
            }
            // strip the N-Triples quoting of plain literals
            (k.trim_matches('"').to_string(), v.len() as u64)
        })
        .collect()
}

fn as_map(t: &ResultTable) -> BTreeMap<String, u64> {
    t.rows
        .iter()
        .map(|r| match (&r[0], &r[1]) {
            (Cell::Text(l), Cell::Count(n)) => (l.clone(), *n),
            other => panic!("unexpected row {other:?}"),
        })
        .collect()
}

fn iri(s: &str) -> String {
    Term::iri(s).to_string()
}

fn v(s: &str) -> String {
    s.to_string()
}

#[test]
fn stored_queries_match_oracle_on_seeded_corpus() {
    let reg = LocalRegistry::in_memory();
    let seeded = seed(&reg, &profile(), created()).unwrap();
    let triples = quads(&reg);
    let before = reg.with_store(|s| s.records().map(|np| canonical_nquads(np.dataset(), np.uri()).unwrap()).collect::<Vec<_>>());

    let reuse = reg.query(STEP_REUSE_QUERY).unwrap();
    let expected = oracle(
        &[
            [v("?step"), iri(vocab::PPLAN_IS_STEP_OF_PLAN), v("?plan")],
            [v("?nanopub"), iri(vocab::NPX_INTRODUCES), v("?step")],
            [v("?nanopub"), iri(vocab::NP_HAS_ASSERTION), v("?assertion")],
            [v("?assertion"), iri(vocab::PROV_WAS_DERIVED_FROM), v("?step_org")],
            [v("?step_org"), iri(vocab::RDFS_LABEL), v("?step_label")],
        ],
        &triples,
        "step_label",
        "plan",
        false,
    );
    assert_eq!(as_map(&reuse), expected);
    assert_eq!(expected["Add blur to image"], 3);
    assert_eq!(expected["Blend two images"], 3);
    assert_eq!(expected["contrast image by factor"], 2);
    assert_eq!(reuse.rows[0][0], Cell::Text("Add blur to image".into()));

    let executions = reg.query(STEP_EXECUTIONS_QUERY).unwrap();
    let expected = oracle(
        &[
            [v("?step_prov"), iri(vocab::PPLAN_CORRESPONDS_TO_STEP), v("?step")],
            [v("?step"), iri(vocab::RDFS_LABEL), v("?step_label")],
        ],
        &triples,
        "step_label",
        "step_prov",
        false,
    );
    assert_eq!(as_map(&executions), expected);
    assert_eq!(executions.rows.len(), 5);
    assert!(executions.rows.iter().all(|r| r[1] == Cell::Count(1)));

    let sizes = reg.query(PLAN_SIZES_QUERY).unwrap();
    let expected = oracle(
        &[[v("?step"), iri(vocab::PPLAN_IS_STEP_OF_PLAN), v("?plan")], [v("?plan"), iri(vocab::RDFS_LABEL), v("?plan_label")]],
        &triples,
        "plan_label",
        "step",
        true,
    );
    assert_eq!(as_map(&sizes), expected);
    assert_eq!(sizes.rows[0][1], Cell::Count(5));
    assert_eq!(seeded.workflows.len(), 3);

    let after = reg.with_store(|s| s.records().map(|np| canonical_nquads(np.dataset(), np.uri()).unwrap()).collect::<Vec<_>>());
    assert_eq!(before, after);
}

#[test]
fn lineage_pairs_equal_reused_step_count() {
    let reg = LocalRegistry::in_memory();
    let mut origins = Vec::new();
    for name in corpus::REUSED_STEPS {
        let step = parse_step_manifest(corpus::step_manifest(name).unwrap()).unwrap().to_step();
        origins.push(step_iri(publish_step(&reg, &step, &profile(), created()).unwrap().uri()));
    }
    let text = format!(
        "workflow:\n  label: two reused\n  inputs: [a]\n  steps:\n    - {{id: b, uses: '{}', bind: {{image: workflow.a, radius: 'const:int:1'}}}}\n    - {{id: c, uses: '{}', bind: {{image: b.out, factor: 'const:int:1'}}}}\n",
        origins[0], origins[2]
    );
    let w = resolve(&parse_workflow_manifest(&text).unwrap(), |u: &str| fetch_step(&reg, u)).unwrap();
    let publication = publish_workflow(&reg, &w, &profile(), created()).unwrap();
    let pairs = reg.query(
        "PREFIX prov: <http://www.w3.org/ns/prov#>\nSELECT ?assertion ?org WHERE { ?assertion prov:wasDerivedFrom ?org . ?org a <http://purl.org/net/p-plan#Step> }",
    )
    .unwrap();
    assert_eq!(pairs.rows.len(), 2);
    for (id, origin) in [("b", &origins[0]), ("c", &origins[2])] {
        let np = reg.fetch(&publication.step_uris[id]).unwrap();
        let step = step_from_rdf(np.dataset(), &publication.step_uris[id]).unwrap();
        assert_eq!(step.derived_from.as_deref(), Some(origin.as_str()));
    }
}

#[test]
fn persistence_and_index_rebuild() {
    let dir = tempfile::tempdir().unwrap();
    let (count, index) = {
        let reg = LocalRegistry::open(dir.path()).unwrap();
        seed(&reg, &profile(), created()).unwrap();
        let rebuilt = reg.with_store(|s| s.rebuilt().unwrap());
        assert_eq!(reg.with_store(|s| s.index().clone()), rebuilt.index().clone());
        assert_eq!(reg.stored_index().unwrap().unwrap(), rebuilt.index().clone());
        (reg.len(), rebuilt.index().clone())
    };
    std::fs::remove_dir_all(dir.path().join("index")).unwrap();
    let reopened = LocalRegistry::open(dir.path()).unwrap();
    assert_eq!(reopened.len(), count);
    assert_eq!(reopened.with_store(|s| s.index().clone()), index);
    assert_eq!(reopened.search("blur").unwrap()[0].label, "Add blur to image");

    let victim = std::fs::read_dir(dir.path().join("np")).unwrap().next().unwrap().unwrap().path();
    let text = std::fs::read_to_string(&victim).unwrap();
    std::fs::write(&victim, text.replacen("2024-03-01", "2025-03-01", 1)).unwrap();
    assert!(matches!(LocalRegistry::open(dir.path()), Err(RegistryError::Corrupt { .. })));
}
