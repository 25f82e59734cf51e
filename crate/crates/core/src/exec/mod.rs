//! Call-graph construction and sequential execution with provenance capture.

mod builtin;
mod graph;
mod manual;
mod shell;

use std::collections::BTreeMap;
use std::time::Duration;

use chrono::{DateTime, SubsecRound, Utc};

pub use builtin::{builtin_eval, BuiltinError, OPERATIONS};
pub use graph::{build_graph, DependencyGraph};
pub use manual::{manual_execute, ManualError, ManualPrompt, ScriptedPrompt, TerminalPrompt};
pub use shell::{shell_execute, ShellError, DEFAULT_TIMEOUT, STEP_URI_ENV};

use crate::model::{CodeKind, FairStep, FairWorkflow, ModelError, Source, StepExecution, Value, ValueRecord, WorkflowExecution};
use crate::nanopub::new_temp_uri;
use crate::vocab;

pub type ValueMap = BTreeMap<String, Value>;

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error(transparent)]
    Shell(#[from] ShellError),
    #[error(transparent)]
    Manual(#[from] ManualError),
    #[error("builtin steps need code of the form builtin:<op>, got {0:?}")]
    BadBuiltinCode(String),
    #[error("builtin steps declare exactly one output, found {0}")]
    BuiltinOutputs(usize),
    #[error("no executor for {0} steps")]
    NoExecutor(&'static str),
}

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("missing workflow input {0:?}")]
    MissingInput(String),
    #[error("step {step}: {cause}")]
    StepFailed { step: String, cause: StepError },
    #[error("step {step}: undeclared output {output:?}")]
    UndeclaredOutput { step: String, output: String },
    #[error("step {step}: declared output {output:?} absent from result")]
    MissingOutput { step: String, output: String },
}

/// Runs a single step. Implementations must return exactly the declared
/// outputs; the engine checks this.
pub trait Executor {
    fn execute(&mut self, step_id: &str, step: &FairStep, inputs: &ValueMap) -> Result<ValueMap, StepError>;
}

/// Dispatches on the step kind: manual, builtin or shell.
pub struct Executors<'p> {
    pub timeout: Duration,
    pub prompt: Option<&'p mut dyn ManualPrompt>,
}

impl Default for Executors<'_> {
    fn default() -> Self {
        Executors { timeout: DEFAULT_TIMEOUT, prompt: None }
    }
}

impl<'p> Executors<'p> {
    pub fn with_prompt(prompt: &'p mut dyn ManualPrompt) -> Self {
        Executors { timeout: DEFAULT_TIMEOUT, prompt: Some(prompt) }
    }
}

pub fn run_builtin(step: &FairStep, inputs: &ValueMap) -> Result<ValueMap, StepError> {
    let op = step.code.trim().strip_prefix("builtin:").ok_or_else(|| StepError::BadBuiltinCode(step.code.clone()))?;
    let [out] = step.outputs.as_slice() else {
        return Err(StepError::BuiltinOutputs(step.outputs.len()));
    };
    let args: Vec<Value> = step.inputs.iter().filter_map(|v| inputs.get(&v.name).cloned()).collect();
    let value = builtin_eval(op, &args)?;
    Ok([(out.name.clone(), value)].into())
}

impl Executor for Executors<'_> {
    fn execute(&mut self, _step_id: &str, step: &FairStep, inputs: &ValueMap) -> Result<ValueMap, StepError> {
        if step.is_manual {
            let prompt = self.prompt.as_deref_mut().ok_or(ManualError::NoPrompt)?;
            return Ok(manual_execute(prompt, step, inputs)?);
        }
        match step.code_kind {
            CodeKind::Builtin => run_builtin(step, inputs),
            CodeKind::Shell => Ok(shell_execute(step, inputs, self.timeout)?),
            CodeKind::External => Err(StepError::NoExecutor("external")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionResult {
    pub outputs: ValueMap,
    pub retroprov: WorkflowExecution,
}

/// A failed run together with the record of everything up to the failure.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct ExecutionFailure {
    pub error: ExecError,
    pub partial: Box<WorkflowExecution>,
}

fn now() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(3)
}

fn step_uri_of(id: &str, step: &FairStep) -> String {
    step.uri.clone().unwrap_or_else(|| format!("{}step/{id}", vocab::LOCAL_BASE))
}

fn resolve(source: &Source, inputs: &ValueMap, produced: &BTreeMap<String, ValueMap>) -> Option<Value> {
    match source {
        Source::WorkflowInput(name) => inputs.get(name).cloned(),
        Source::Constant(v) => Some(v.clone()),
        Source::StepOutput { step, output } => produced.get(step)?.get(output).cloned(),
    }
}

fn capture(values: &ValueMap) -> BTreeMap<String, ValueRecord> {
    values.iter().map(|(k, v)| (k.clone(), ValueRecord::capture(v))).collect()
}

/// Runs every step of `w` once, in topological order, recording an activity
/// per step attempted.
pub fn execute(w: &FairWorkflow, inputs: &ValueMap, executor: &mut dyn Executor) -> Result<ExecutionResult, ExecutionFailure> {
    let started = now();
    let mut record = WorkflowExecution {
        execution_uri: format!("{}#execution", new_temp_uri()),
        plan_uri: w.uri.clone().unwrap_or_else(|| format!("{}plan", vocab::LOCAL_BASE)),
        step_executions: Vec::new(),
        started,
        ended: started,
        outputs: BTreeMap::new(),
        error: None,
    };
    let fail = |mut record: WorkflowExecution, error: ExecError| {
        record.ended = record.step_executions.last().map_or(record.started, |s| s.ended).max(now());
        record.error = Some(error.to_string());
        ExecutionFailure { error, partial: Box::new(record) }
    };

    let graph = match w.validate().and_then(|_| build_graph(w)) {
        Ok(g) => g,
        Err(e) => return Err(fail(record, e.into())),
    };
    if let Some(missing) = w.workflow_inputs.iter().find(|v| !inputs.contains_key(&v.name)) {
        return Err(fail(record, ExecError::MissingInput(missing.name.clone())));
    }

    let mut produced: BTreeMap<String, ValueMap> = BTreeMap::new();
    let mut clock = started;
    for id in graph.topological_order() {
        let step = &w.steps[id];
        let mut step_inputs = ValueMap::new();
        for v in &step.inputs {
            let source = &w.bindings[&(id.to_string(), v.name.clone())];
            // validated bindings and topological order guarantee availability
            if let Some(value) = resolve(source, inputs, &produced) {
                step_inputs.insert(v.name.clone(), value);
            }
        }
        let step_started = now().max(clock);
        let outcome = executor.execute(id, step, &step_inputs);
        let step_ended = now().max(step_started);
        clock = step_ended;

        let checked = outcome.map_err(|cause| ExecError::StepFailed { step: id.into(), cause }).and_then(|out| {
            if let Some(extra) = out.keys().find(|k| step.output(k).is_none()) {
                return Err(ExecError::UndeclaredOutput { step: id.into(), output: extra.clone() });
            }
            if let Some(missing) = step.outputs.iter().find(|v| !out.contains_key(&v.name)) {
                return Err(ExecError::MissingOutput { step: id.into(), output: missing.name.clone() });
            }
            Ok(out)
        });
        let mut exec = StepExecution {
            step_id: id.to_string(),
            activity_uri: format!("{}#activity", new_temp_uri()),
            step_uri: step_uri_of(id, step),
            started: step_started,
            ended: step_ended,
            input_values: capture(&step_inputs),
            output_values: BTreeMap::new(),
            error: None,
        };
        match checked {
            Ok(out) => {
                exec.output_values = capture(&out);
                record.step_executions.push(exec);
                produced.insert(id.to_string(), out);
            }
            Err(e) => {
                exec.error = Some(e.to_string());
                record.step_executions.push(exec);
                return Err(fail(record, e));
            }
        }
    }

    let mut outputs = ValueMap::new();
    for source in &w.workflow_outputs {
        if let Some(v) = resolve(source, inputs, &produced) {
            outputs.insert(source.to_string(), v);
        }
    }
    record.outputs = capture(&outputs);
    record.ended = clock.max(now());
    Ok(ExecutionResult { outputs, retroprov: record })
}
