//! YAML step and workflow manifests.
//!
//! A manifest file holds one document whose only top-level key is `step:`
//! or `workflow:`. Workflow steps either reuse a published step (`uses:`)
//! or define one inline (`step:`), and wire inputs with `bind:`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::exec::{build_graph, OPERATIONS};
use crate::model::{is_identifier, mark_derivation, CodeKind, FairStep, FairWorkflow, ModelError, Source, Variable};
use crate::rdf::is_absolute_iri;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{problem} {path}")]
    Invalid { path: String, problem: String },
    #[error("fetching {uri} for {path}: {message}")]
    Fetch { path: String, uri: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn invalid(path: impl Into<String>, problem: impl Into<String>) -> ManifestError {
    ManifestError::Invalid { path: path.into(), problem: problem.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepManifest {
    pub label: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub code_kind: CodeKind,
    #[serde(default)]
    pub code: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub is_manual: bool,
    #[serde(default)]
    pub inputs: Vec<VariableSpec>,
    #[serde(default)]
    pub outputs: Vec<VariableSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uses: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepManifest>,
    #[serde(default)]
    pub bind: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub after: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowManifest {
    pub label: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
    pub steps: Vec<StepEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDocument {
    step: StepManifest,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkflowDocument {
    workflow: WorkflowManifest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Manifest {
    Step(StepManifest),
    Workflow(WorkflowManifest),
}

fn from_yaml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ManifestError> {
    let de = serde_yaml::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ManifestError::Schema { path: if path == "." { "(document)".into() } else { path }, message: e.into_inner().to_string() }
    })
}

pub fn parse_step_manifest(text: &str) -> Result<StepManifest, ManifestError> {
    let doc: StepDocument = from_yaml(text)?;
    doc.step.check("step")?;
    Ok(doc.step)
}

pub fn parse_workflow_manifest(text: &str) -> Result<WorkflowManifest, ManifestError> {
    let doc: WorkflowDocument = from_yaml(text)?;
    doc.workflow.check()?;
    Ok(doc.workflow)
}

/// Parses either kind, dispatching on the top-level key.
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let value: serde_yaml::Value =
        serde_yaml::from_str(text).map_err(|e| ManifestError::Schema { path: "(document)".into(), message: e.to_string() })?;
    let key = value.as_mapping().and_then(|m| m.keys().next()).and_then(|k| k.as_str()).unwrap_or_default();
    match key {
        "step" => parse_step_manifest(text).map(Manifest::Step),
        "workflow" => parse_workflow_manifest(text).map(Manifest::Workflow),
        _ => Err(ManifestError::Schema {
            path: "(document)".into(),
            message: "expected a single top-level `step:` or `workflow:` key".into(),
        }),
    }
}

fn check_variables(path: &str, kind: &str, vars: &[VariableSpec]) -> Result<(), ManifestError> {
    let mut seen = BTreeSet::new();
    for (i, v) in vars.iter().enumerate() {
        let at = format!("{path}.{kind}[{i}]");
        if !is_identifier(&v.name) {
            return Err(invalid(format!("{at}.name"), format!("invalid name {:?} at", v.name)));
        }
        if !seen.insert(v.name.as_str()) {
            return Err(invalid(format!("{at}.name"), format!("duplicate {kind} name {:?} at", v.name)));
        }
        if let Some(t) = &v.semantic_type {
            if !is_absolute_iri(t) {
                return Err(invalid(format!("{at}.semantic_type"), format!("semantic type {t:?} is not an absolute IRI at")));
            }
        }
    }
    Ok(())
}

fn is_builtin_code(code: &str) -> bool {
    code.strip_prefix("builtin:")
        .is_some_and(|op| !op.is_empty() && op.bytes().all(|b| b.is_ascii_lowercase() || b == b'_'))
}

impl StepManifest {
    fn check(&self, path: &str) -> Result<(), ManifestError> {
        if self.label.trim().is_empty() {
            return Err(invalid(format!("{path}.label"), "empty label at"));
        }
        check_variables(path, "inputs", &self.inputs)?;
        check_variables(path, "outputs", &self.outputs)?;
        if self.is_manual {
            return Ok(());
        }
        match self.code_kind {
            CodeKind::Builtin if !is_builtin_code(&self.code) => {
                Err(invalid(format!("{path}.code"), format!("builtin code must look like builtin:<op>, got {:?} at", self.code)))
            }
            CodeKind::Builtin if !OPERATIONS.contains(&&self.code["builtin:".len()..]) => {
                Err(invalid(format!("{path}.code"), format!("unknown builtin operation {:?} at", self.code)))
            }
            CodeKind::Shell if self.code.trim().is_empty() => Err(invalid(format!("{path}.code"), "empty shell command at")),
            _ => Ok(()),
        }
    }

    pub fn to_step(&self) -> FairStep {
        let var = |v: &VariableSpec| Variable {
            name: v.name.clone(),
            semantic_types: v.semantic_type.iter().cloned().collect(),
            description: v.description.clone(),
        };
        FairStep {
            uri: None,
            label: self.label.clone(),
            description: self.description.clone(),
            code: self.code.clone(),
            code_kind: self.code_kind,
            inputs: self.inputs.iter().map(var).collect(),
            outputs: self.outputs.iter().map(var).collect(),
            is_manual: self.is_manual,
            derived_from: None,
        }
    }

    /// Keeps only the first semantic type of each variable.
    pub fn from_step(s: &FairStep) -> Self {
        let var = |v: &Variable| VariableSpec {
            name: v.name.clone(),
            semantic_type: v.semantic_types.first().cloned(),
            description: v.description.clone(),
        };
        StepManifest {
            label: s.label.clone(),
            description: s.description.clone(),
            code_kind: s.code_kind,
            code: s.code.clone(),
            is_manual: s.is_manual,
            inputs: s.inputs.iter().map(var).collect(),
            outputs: s.outputs.iter().map(var).collect(),
        }
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(&StepDocument { step: self.clone() }).expect("manifest serializes")
    }
}

impl WorkflowManifest {
    fn check(&self) -> Result<(), ManifestError> {
        if self.label.trim().is_empty() {
            return Err(invalid("workflow.label", "empty label at"));
        }
        let mut inputs = BTreeSet::new();
        for (i, name) in self.inputs.iter().enumerate() {
            if !is_identifier(name) || !inputs.insert(name.as_str()) {
                return Err(invalid(format!("inputs[{i}]"), format!("invalid or duplicate input {name:?} at")));
            }
        }
        let mut ids: BTreeMap<&str, &StepEntry> = BTreeMap::new();
        for (i, entry) in self.steps.iter().enumerate() {
            if !is_identifier(&entry.id) {
                return Err(invalid(format!("steps[{i}].id"), format!("invalid step id {:?} at", entry.id)));
            }
            if ids.insert(&entry.id, entry).is_some() {
                return Err(invalid(format!("steps.{}", entry.id), "duplicate step id"));
            }
        }
        let source_ok = |path: String, text: &str| -> Result<Source, ManifestError> {
            let source: Source = text.parse().map_err(|e: String| invalid(path.clone(), format!("{e} at")))?;
            match &source {
                Source::WorkflowInput(name) if !inputs.contains(name.as_str()) => {
                    Err(invalid(path, format!("unknown workflow input {name:?} at")))
                }
                Source::StepOutput { step, output } => match ids.get(step.as_str()) {
                    None => Err(invalid(path, "dangling bind target")),
                    Some(StepEntry { step: Some(inline), .. }) if !inline.outputs.iter().any(|o| &o.name == output) => {
                        Err(invalid(path, format!("step {step:?} has no output {output:?} at")))
                    }
                    _ => Ok(source),
                },
                _ => Ok(source),
            }
        };

        let mut skeleton = FairWorkflow::new(&self.label);
        for entry in &self.steps {
            skeleton.add_step(&entry.id, FairStep::default());
        }
        for entry in &self.steps {
            let path = format!("steps.{}", entry.id);
            match (&entry.uses, &entry.step) {
                (Some(uri), None) => {
                    if !is_absolute_iri(uri) {
                        return Err(invalid(format!("{path}.uses"), format!("{uri:?} is not an absolute IRI at")));
                    }
                }
                (None, Some(inline)) => {
                    inline.check(&format!("{path}.step"))?;
                    if let Some(v) = inline.inputs.iter().find(|v| !entry.bind.contains_key(&v.name)) {
                        return Err(invalid(format!("{path}.bind.{}", v.name), "unbound input"));
                    }
                }
                _ => return Err(invalid(path, "exactly one of `uses` or `step` required at")),
            }
            for (input, text) in &entry.bind {
                let at = format!("{path}.bind.{input}");
                if let Some(inline) = &entry.step {
                    if !inline.inputs.iter().any(|v| &v.name == input) {
                        return Err(invalid(at, "binding for undeclared input"));
                    }
                }
                let source = source_ok(at, text)?;
                skeleton.bind(&entry.id, input, source);
            }
            for (i, dep) in entry.after.iter().enumerate() {
                if !ids.contains_key(dep.as_str()) {
                    return Err(invalid(format!("{path}.after[{i}]"), "dangling ordering target"));
                }
                skeleton.after.entry(entry.id.clone()).or_default().insert(dep.clone());
            }
        }
        for (i, text) in self.outputs.iter().enumerate() {
            if !matches!(source_ok(format!("outputs[{i}]"), text)?, Source::StepOutput { .. }) {
                return Err(invalid(format!("outputs[{i}]"), "outputs must reference <step>.<output> at"));
            }
        }
        build_graph(&skeleton).map_err(|e| invalid("steps", format!("{e} in")))?;
        Ok(())
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(&WorkflowDocument { workflow: self.clone() }).expect("manifest serializes")
    }

    /// The manifest that describes `w`: published steps become `uses:`
    /// references, unpublished ones are written inline.
    pub fn from_workflow(w: &FairWorkflow) -> Self {
        let steps = w
            .steps
            .iter()
            .map(|(id, step)| StepEntry {
                id: id.clone(),
                uses: step.uri.clone(),
                step: step.uri.is_none().then(|| StepManifest::from_step(step)),
                bind: w.bindings.iter().filter(|((s, _), _)| s == id).map(|((_, input), src)| (input.clone(), src.to_string())).collect(),
                after: w.after.get(id).map(|a| a.iter().cloned().collect()).unwrap_or_default(),
            })
            .collect();
        WorkflowManifest {
            label: w.label.clone(),
            description: w.description.clone(),
            inputs: w.workflow_inputs.iter().map(|v| v.name.clone()).collect(),
            outputs: w.workflow_outputs.iter().map(ToString::to_string).collect(),
            steps,
        }
    }

    /// Published step URIs referenced through `uses:`.
    pub fn reused(&self) -> impl Iterator<Item = &str> {
        self.steps.iter().filter_map(|e| e.uses.as_deref())
    }
}

/// Builds the workflow model, fetching every reused step through `fetch` and
/// marking it as derived from the URI it was fetched from.
pub fn resolve<F, E>(w: &WorkflowManifest, mut fetch: F) -> Result<FairWorkflow, ManifestError>
where
    F: FnMut(&str) -> Result<FairStep, E>,
    E: std::fmt::Display,
{
    let mut wf = FairWorkflow::new(&w.label);
    wf.description = w.description.clone();
    wf.workflow_inputs = w.inputs.iter().map(Variable::new).collect();
    for entry in &w.steps {
        let path = format!("steps.{}.uses", entry.id);
        let step = match (&entry.uses, &entry.step) {
            (Some(uri), _) => {
                let fetched = fetch(uri).map_err(|e| ManifestError::Fetch { path, uri: uri.clone(), message: e.to_string() })?;
                let origin = fetched.uri.clone().unwrap_or_else(|| uri.clone());
                mark_derivation(fetched, &origin)?
            }
            (None, Some(inline)) => inline.to_step(),
            (None, None) => return Err(invalid(format!("steps.{}", entry.id), "exactly one of `uses` or `step` required at")),
        };
        wf.add_step(&entry.id, step);
        for (input, text) in &entry.bind {
            let source = text.parse().map_err(|e: String| invalid(format!("steps.{}.bind.{input}", entry.id), format!("{e} at")))?;
            wf.bind(&entry.id, input, source);
        }
        if !entry.after.is_empty() {
            wf.after.insert(entry.id.clone(), entry.after.iter().cloned().collect());
        }
    }
    for text in &w.outputs {
        wf.workflow_outputs.push(text.parse().map_err(|e: String| invalid("outputs", format!("{e} at")))?);
    }
    wf.validate()?;
    Ok(wf)
}

/// Commented metadata header followed by the step's code, ready to paste
/// into a script or notebook cell.
pub fn emit_code_template(s: &FairStep) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# plexflow step: {}", s.label);
    let _ = writeln!(out, "# uri: {}", s.uri.as_deref().unwrap_or("(unpublished)"));
    for line in s.description.lines() {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "# code kind: {}", s.code_kind.as_str());
    if s.is_manual {
        let _ = writeln!(out, "# MANUAL TASK: performed by a person, not by code");
    }
    for (kind, vars) in [("input", &s.inputs), ("output", &s.outputs)] {
        for v in vars {
            let types = if v.semantic_types.is_empty() { String::new() } else { format!(" [{}]", v.semantic_types.join(", ")) };
            let _ = writeln!(out, "# {kind} {}{types}", v.name);
        }
    }
    if let Some(origin) = &s.derived_from {
        let _ = writeln!(out, "# derived from: {origin}");
    }
    if !s.is_manual && !s.code.is_empty() {
        out.push_str(&s.code);
        if !s.code.ends_with('\n') {
            out.push('\n');
        }
    }
    out
}
