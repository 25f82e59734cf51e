use std::collections::{BTreeMap, VecDeque};
use std::io::{BufRead, Write};

use crate::model::{FairStep, Value, Variable};

/// Interaction with whoever performs a manual step.
pub trait ManualPrompt {
    fn present(&mut self, step: &FairStep, inputs: &BTreeMap<String, Value>);
    /// `None` aborts the step.
    fn ask(&mut self, output: &Variable) -> Option<String>;
    /// Confirmation for steps without outputs; `false` aborts.
    fn acknowledge(&mut self) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManualError {
    #[error("manual step aborted")]
    Aborted,
    #[error("no prompt available for manual step")]
    NoPrompt,
}

/// Runs a manual step: shows the instructions and inputs, then collects one
/// answer per output. Answers use the tagged value syntax (`int:3`).
pub fn manual_execute(
    prompt: &mut dyn ManualPrompt,
    step: &FairStep,
    inputs: &BTreeMap<String, Value>,
) -> Result<BTreeMap<String, Value>, ManualError> {
    prompt.present(step, inputs);
    if step.outputs.is_empty() {
        return if prompt.acknowledge() { Ok(BTreeMap::new()) } else { Err(ManualError::Aborted) };
    }
    let mut outputs = BTreeMap::new();
    for var in &step.outputs {
        let answer = prompt.ask(var).ok_or(ManualError::Aborted)?;
        let value = Value::parse_tagged(&answer).unwrap_or(Value::Str(answer));
        outputs.insert(var.name.clone(), value);
    }
    Ok(outputs)
}

/// Line-oriented prompt over any reader/writer pair; end of input aborts.
pub struct TerminalPrompt<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> TerminalPrompt<R, W> {
    pub fn new(input: R, output: W) -> Self {
        TerminalPrompt { input, output }
    }

    fn read_line(&mut self) -> Option<String> {
        let mut line = String::new();
        match self.input.read_line(&mut line) {
            Ok(0) | Err(_) => None,
            Ok(_) => Some(line.trim_end_matches(['\r', '\n']).to_string()),
        }
    }
}

impl TerminalPrompt<std::io::StdinLock<'static>, std::io::Stderr> {
    pub fn stdio() -> Self {
        TerminalPrompt::new(std::io::stdin().lock(), std::io::stderr())
    }
}

impl<R: BufRead, W: Write> ManualPrompt for TerminalPrompt<R, W> {
    fn present(&mut self, step: &FairStep, inputs: &BTreeMap<String, Value>) {
        let _ = writeln!(self.output, "== manual step: {}", step.label);
        if !step.description.is_empty() {
            let _ = writeln!(self.output, "{}", step.description);
        }
        if !step.code.is_empty() {
            let _ = writeln!(self.output, "instructions: {}", step.code);
        }
        for (name, v) in inputs {
            let _ = writeln!(self.output, "  {name} = {v}");
        }
    }

    fn ask(&mut self, output: &Variable) -> Option<String> {
        let _ = write!(self.output, "{}> ", output.name);
        let _ = self.output.flush();
        self.read_line()
    }

    fn acknowledge(&mut self) -> bool {
        let _ = write!(self.output, "press enter when done (ctrl-d aborts) ");
        let _ = self.output.flush();
        self.read_line().is_some()
    }
}

/// Pre-recorded answers, for non-interactive runs.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPrompt {
    answers: VecDeque<Option<String>>,
    pub presented: Vec<String>,
}

impl ScriptedPrompt {
    pub fn new<I, S>(answers: I) -> Self
    where
        I: IntoIterator<Item = Option<S>>,
        S: Into<String>,
    {
        ScriptedPrompt { answers: answers.into_iter().map(|a| a.map(Into::into)).collect(), presented: Vec::new() }
    }
}

impl ManualPrompt for ScriptedPrompt {
    fn present(&mut self, step: &FairStep, _inputs: &BTreeMap<String, Value>) {
        self.presented.push(step.label.clone());
    }

    fn ask(&mut self, _output: &Variable) -> Option<String> {
        self.answers.pop_front().flatten()
    }

    fn acknowledge(&mut self) -> bool {
        self.answers.pop_front().is_some_and(|a| a.is_some())
    }
}
