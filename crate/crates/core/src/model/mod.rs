//! Steps, workflows and executions, and their RDF form.
//!
//! A step is described by a `p-plan:Step` with typed input and output
//! variables; a workflow by a `p-plan:Plan` whose member steps are linked
//! through `p-plan:isStepOfPlan` and ordered with `dul:precedes`. Executions
//! become `p-plan:Activity` records linked back with
//! `p-plan:correspondsToStep`, grouped under a `prov:Bundle` derived from
//! the plan.

mod retro;
mod step;
mod value;
pub(crate) mod workflow;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use retro::{
    retroprov_to_rdf, workflow_execution_to_rdf, AssertionSet, StepExecution, ValueRecord, WorkflowExecution,
    INLINE_LIMIT,
};
pub use step::{input_var_iri, mark_derivation, output_var_iri, step_from_rdf, step_iri, step_to_rdf};
pub use value::{Value, ValueError};
pub use workflow::{plan_iri, workflow_from_rdf, workflow_to_rdf};

use crate::rdf::TermError;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("step label must not be empty")]
    MissingLabel,
    #[error("{0} has no rdf:type {1}")]
    MissingType(String, &'static str),
    #[error("missing label on {0}")]
    MissingLabelOn(String),
    #[error("invalid variable name {0:?}")]
    BadVariableName(String),
    #[error("duplicate {kind} variable {name:?} on step {step:?}")]
    DuplicateVariable { step: String, kind: &'static str, name: String },
    #[error("unknown step {0:?}")]
    UnknownStep(String),
    #[error("step {step:?} has no input {input:?}")]
    UnknownInput { step: String, input: String },
    #[error("step {step:?} has no output {output:?}")]
    UnknownOutput { step: String, output: String },
    #[error("unknown workflow input {0:?}")]
    UnknownWorkflowInput(String),
    #[error("input {input:?} of step {step:?} is not bound")]
    UnboundInput { step: String, input: String },
    #[error("cycle: {}", .0.join("→"))]
    Cycle(Vec<String>),
    #[error("step {0:?} has no URI")]
    MissingStepUri(String),
    #[error("malformed RDF for {subject}: {reason}")]
    Malformed { subject: String, reason: String },
    #[error("{0} is not a published URI")]
    Unpublished(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    #[default]
    Builtin,
    Shell,
    External,
}

impl CodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodeKind::Builtin => "builtin",
            CodeKind::Shell => "shell",
            CodeKind::External => "external",
        }
    }
}

impl FromStr for CodeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(CodeKind::Builtin),
            "shell" => Ok(CodeKind::Shell),
            "external" => Ok(CodeKind::External),
            other => Err(format!("unknown code kind {other:?}")),
        }
    }
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Variable {
    pub name: String,
    pub semantic_types: Vec<String>,
    pub description: Option<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Variable { name: name.into(), ..Default::default() }
    }

    pub fn typed(name: impl Into<String>, semantic_type: impl Into<String>) -> Self {
        Variable { name: name.into(), semantic_types: vec![semantic_type.into()], description: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FairStep {
    pub uri: Option<String>,
    pub label: String,
    pub description: String,
    pub code: String,
    pub code_kind: CodeKind,
    pub inputs: Vec<Variable>,
    pub outputs: Vec<Variable>,
    pub is_manual: bool,
    pub derived_from: Option<String>,
}

impl FairStep {
    pub fn new(label: impl Into<String>, code: impl Into<String>) -> Self {
        FairStep { label: label.into(), code: code.into(), ..Default::default() }
    }

    pub fn with_input(mut self, v: Variable) -> Self {
        self.inputs.push(v);
        self
    }

    pub fn with_output(mut self, v: Variable) -> Self {
        self.outputs.push(v);
        self
    }

    pub fn input(&self, name: &str) -> Option<&Variable> {
        self.inputs.iter().find(|v| v.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&Variable> {
        self.outputs.iter().find(|v| v.name == name)
    }

    /// Label, identifier and uniqueness checks on the step's own fields.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.label.trim().is_empty() {
            return Err(ModelError::MissingLabel);
        }
        for (kind, vars) in [("input", &self.inputs), ("output", &self.outputs)] {
            let mut seen = BTreeSet::new();
            for v in vars {
                if !is_identifier(&v.name) {
                    return Err(ModelError::BadVariableName(v.name.clone()));
                }
                if !seen.insert(v.name.as_str()) {
                    return Err(ModelError::DuplicateVariable { step: self.label.clone(), kind, name: v.name.clone() });
                }
            }
        }
        Ok(())
    }
}

/// Where a step input (or a workflow output) takes its value from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    WorkflowInput(String),
    Constant(Value),
    StepOutput { step: String, output: String },
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::WorkflowInput(name) => write!(f, "workflow.{name}"),
            Source::Constant(v) => write!(f, "const:{}", v.to_tagged()),
            Source::StepOutput { step, output } => write!(f, "{step}.{output}"),
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(v) = s.strip_prefix("const:") {
            return Ok(Source::Constant(Value::parse_tagged(v).map_err(|e| e.to_string())?));
        }
        if let Some(name) = s.strip_prefix("workflow.") {
            if is_identifier(name) {
                return Ok(Source::WorkflowInput(name.to_string()));
            }
            return Err(format!("invalid workflow input reference {s:?}"));
        }
        match s.split_once('.') {
            Some((step, output)) if is_identifier(step) && is_identifier(output) => {
                Ok(Source::StepOutput { step: step.to_string(), output: output.to_string() })
            }
            _ => Err(format!("expected workflow.<name>, const:<value> or <step>.<output>, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FairWorkflow {
    pub uri: Option<String>,
    pub label: String,
    pub description: String,
    pub steps: IndexMap<String, FairStep>,
    /// (step id, input name) → source
    pub bindings: BTreeMap<(String, String), Source>,
    /// step id → steps that must finish first without passing data
    pub after: BTreeMap<String, BTreeSet<String>>,
    pub workflow_inputs: Vec<Variable>,
    pub workflow_outputs: Vec<Source>,
}

impl FairWorkflow {
    pub fn new(label: impl Into<String>) -> Self {
        FairWorkflow { label: label.into(), ..Default::default() }
    }

    pub fn add_step(&mut self, id: impl Into<String>, step: FairStep) -> &mut Self {
        self.steps.insert(id.into(), step);
        self
    }

    pub fn bind(&mut self, step: &str, input: &str, source: Source) -> &mut Self {
        self.bindings.insert((step.to_string(), input.to_string()), source);
        self
    }

    fn check_source(&self, source: &Source) -> Result<(), ModelError> {
        match source {
            Source::WorkflowInput(name) => {
                if self.workflow_inputs.iter().any(|v| &v.name == name) {
                    Ok(())
                } else {
                    Err(ModelError::UnknownWorkflowInput(name.clone()))
                }
            }
            Source::Constant(_) => Ok(()),
            Source::StepOutput { step, output } => {
                let s = self.steps.get(step).ok_or_else(|| ModelError::UnknownStep(step.clone()))?;
                if s.output(output).is_some() {
                    Ok(())
                } else {
                    Err(ModelError::UnknownOutput { step: step.clone(), output: output.clone() })
                }
            }
        }
    }

    /// Checks binding references, input coverage and acyclicity.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.label.trim().is_empty() {
            return Err(ModelError::MissingLabel);
        }
        for v in &self.workflow_inputs {
            if !is_identifier(&v.name) {
                return Err(ModelError::BadVariableName(v.name.clone()));
            }
        }
        for step in self.steps.values() {
            step.validate()?;
        }
        for ((step_id, input), source) in &self.bindings {
            let step = self.steps.get(step_id).ok_or_else(|| ModelError::UnknownStep(step_id.clone()))?;
            if step.input(input).is_none() {
                return Err(ModelError::UnknownInput { step: step_id.clone(), input: input.clone() });
            }
            self.check_source(source)?;
        }
        for (id, step) in &self.steps {
            for v in &step.inputs {
                if !self.bindings.contains_key(&(id.clone(), v.name.clone())) {
                    return Err(ModelError::UnboundInput { step: id.clone(), input: v.name.clone() });
                }
            }
        }
        for (id, preds) in &self.after {
            if !self.steps.contains_key(id) {
                return Err(ModelError::UnknownStep(id.clone()));
            }
            if let Some(p) = preds.iter().find(|p| !self.steps.contains_key(*p)) {
                return Err(ModelError::UnknownStep(p.clone()));
            }
        }
        for source in &self.workflow_outputs {
            self.check_source(source)?;
        }
        crate::exec::build_graph(self).map(|_| ())
    }
}
