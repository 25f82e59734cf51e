//! Bundled example manifests and a small demonstration corpus: three
//! reusable image steps, three workflows built from them, and one recorded
//! execution.

use chrono::{DateTime, Utc};
use indexmap::IndexMap;

use crate::exec::{execute, ExecutionFailure, Executors, ValueMap};
use crate::manifest::{parse_step_manifest, parse_workflow_manifest, resolve, ManifestError};
use crate::model::{step_iri, Value};
use crate::nanopub::Profile;
use crate::registry::{fetch_step, publish_retroprov, publish_step, publish_workflow, Registry, RegistryError, WorkflowPublication};

pub const PENCIL_SKETCH: &str = include_str!("../fixtures/pencil_sketch.yaml");
pub const THREE_STEP: &str = include_str!("../fixtures/three_step.yaml");

/// Standalone step manifests by name.
pub const STEPS: &[(&str, &str)] = &[
    ("add_blur", include_str!("../fixtures/steps/add_blur.yaml")),
    ("blend", include_str!("../fixtures/steps/blend.yaml")),
    ("contrast", include_str!("../fixtures/steps/contrast.yaml")),
    ("add", include_str!("../fixtures/steps/add.yaml")),
    ("echo_shell", include_str!("../fixtures/steps/echo_shell.yaml")),
    ("inspect_manual", include_str!("../fixtures/steps/inspect_manual.yaml")),
];

/// The steps the corpus workflows reuse.
pub const REUSED_STEPS: &[&str] = &["add_blur", "blend", "contrast"];

/// Workflow templates; `@name@` stands for the published IRI of step `name`.
const WORKFLOWS: &[&str] = &[
    include_str!("../fixtures/corpus/sketch_a.yaml"),
    include_str!("../fixtures/corpus/sketch_b.yaml"),
    include_str!("../fixtures/corpus/composite.yaml"),
];

pub fn step_manifest(name: &str) -> Option<&'static str> {
    STEPS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, thiserror::Error)]
pub enum SeedError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Execution(#[from] ExecutionFailure),
}

#[derive(Debug, Clone)]
pub struct SeededCorpus {
    /// Step name → published step IRI.
    pub steps: IndexMap<String, String>,
    pub workflows: Vec<WorkflowPublication>,
    /// Nanopubs recording one run of the first workflow.
    pub execution: Vec<String>,
}

/// Publishes the demonstration corpus into `reg`.
pub fn seed(reg: &dyn Registry, profile: &Profile, created: DateTime<Utc>) -> Result<SeededCorpus, SeedError> {
    let mut steps = IndexMap::new();
    for name in REUSED_STEPS {
        let manifest = parse_step_manifest(step_manifest(name).expect("bundled step"))?;
        let np = publish_step(reg, &manifest.to_step(), profile, created)?;
        steps.insert(name.to_string(), step_iri(np.uri()));
    }
    let mut workflows = Vec::new();
    for template in WORKFLOWS {
        let mut text = template.to_string();
        for (name, iri) in &steps {
            text = text.replace(&format!("@{name}@"), iri);
        }
        let w = resolve(&parse_workflow_manifest(&text)?, |uri: &str| fetch_step(reg, uri))?;
        workflows.push(publish_workflow(reg, &w, profile, created)?);
    }
    let first = &workflows[0].workflow;
    let inputs: ValueMap = first.workflow_inputs.iter().map(|v| (v.name.clone(), Value::Str("Parrot.PNG".into()))).collect();
    let run = execute(first, &inputs, &mut Executors::default())?;
    let execution = publish_retroprov(reg, &run.retroprov, profile, created)?;
    Ok(SeededCorpus { steps, workflows, execution })
}
