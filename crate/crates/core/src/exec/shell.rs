//! Shell step protocol: inputs as one JSON object on stdin, outputs as one
//! JSON object on stdout, exit status 0 for success.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use wait_timeout::ChildExt;

use crate::model::{FairStep, Value};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const STEP_URI_ENV: &str = "PLEXFLOW_STEP_URI";

#[derive(Debug, thiserror::Error)]
pub enum ShellError {
    #[error("failed to start command: {0}")]
    Spawn(std::io::Error),
    #[error("command exited with status {code:?}: {stderr}")]
    NonZeroExit { code: Option<i32>, stderr: String },
    #[error("command timed out after {0:?}")]
    Timeout(Duration),
    #[error("malformed output JSON: {0}")]
    MalformedOutput(String),
    #[error("output JSON lacks declared output {0:?}")]
    MissingOutput(String),
}

pub fn shell_execute(
    step: &FairStep,
    inputs: &BTreeMap<String, Value>,
    timeout: Duration,
) -> Result<BTreeMap<String, Value>, ShellError> {
    let payload: serde_json::Map<String, serde_json::Value> =
        inputs.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
    let payload = serde_json::Value::Object(payload).to_string();

    let mut cmd = Command::new("sh");
    cmd.arg("-c").arg(&step.code).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    if let Some(uri) = &step.uri {
        cmd.env(STEP_URI_ENV, uri);
    }
    let mut child = cmd.spawn().map_err(ShellError::Spawn)?;

    let mut stdin = child.stdin.take();
    let writer = thread::spawn(move || {
        if let Some(stdin) = stdin.as_mut() {
            // a command that ignores stdin may close it early
            let _ = stdin.write_all(payload.as_bytes());
        }
    });
    let mut stdout = child.stdout.take();
    let out_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(s) = stdout.as_mut() {
            let _ = s.read_to_end(&mut buf);
        }
        buf
    });
    let mut stderr = child.stderr.take();
    let err_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(s) = stderr.as_mut() {
            let _ = s.read_to_end(&mut buf);
        }
        buf
    });

    let status = match child.wait_timeout(timeout).map_err(ShellError::Spawn)? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(ShellError::Timeout(timeout));
        }
    };
    let _ = writer.join();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(ShellError::NonZeroExit {
            code: status.code(),
            stderr: String::from_utf8_lossy(&stderr).trim().to_string(),
        });
    }
    let parsed: serde_json::Value =
        serde_json::from_slice(&stdout).map_err(|e| ShellError::MalformedOutput(e.to_string()))?;
    let serde_json::Value::Object(map) = parsed else {
        return Err(ShellError::MalformedOutput("expected a JSON object".into()));
    };
    let mut outputs = BTreeMap::new();
    for var in &step.outputs {
        let v = map.get(&var.name).ok_or_else(|| ShellError::MissingOutput(var.name.clone()))?;
        let value = Value::from_json(v).map_err(|e| ShellError::MalformedOutput(e.to_string()))?;
        outputs.insert(var.name.clone(), value);
    }
    Ok(outputs)
}
