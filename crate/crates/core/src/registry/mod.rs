//! Nanopub registry: verified storage, text search, listing and queries,
//! plus the client-side orchestration that publishes workflows and
//! execution records as sets of nanopubs.

mod local;
mod publish;
mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use local::LocalRegistry;
pub use publish::{
    fetch_step, fetch_workflow, plan_nanopub, prepare_retroprov, prepare_workflow, publish_retroprov, publish_step,
    publish_workflow, step_nanopub, WorkflowPublication,
};
pub use store::RegistryStore;

use crate::model::ModelError;
use crate::nanopub::{NanopubError, VerificationReport};
use crate::query::{QueryError, ResultTable};
use crate::vocab;

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("nanopub rejected: {}", .0.problems.join("; "))]
    Rejected(VerificationReport),
    #[error("integrity error: different content already stored under {0}")]
    Conflict(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("published {} nanopub(s) before failing: {cause}", .published.len())]
    Partial { published: Vec<String>, cause: Box<RegistryError> },
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Nanopub(#[from] NanopubError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt registry file {path}: {message}")]
    Corrupt { path: String, message: String },
    #[error("registry request failed: {0}")]
    Transport(String),
    /// The remote registry refused the request.
    #[error("registry returned {status}: {message}")]
    Remote { status: u16, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Step,
    Workflow,
    Execution,
    Other,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Step => "step",
            Kind::Workflow => "workflow",
            Kind::Execution => "execution",
            Kind::Other => "other",
        }
    }

    pub fn from_types<'a>(types: impl IntoIterator<Item = &'a str>) -> Kind {
        let mut kind = Kind::Other;
        for t in types {
            let k = match t {
                vocab::PPLAN_STEP => Kind::Step,
                vocab::PPLAN_PLAN => Kind::Workflow,
                vocab::PROV_BUNDLE | vocab::PPLAN_ACTIVITY => Kind::Execution,
                _ => continue,
            };
            kind = kind.min(k);
        }
        kind
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "step" => Ok(Kind::Step),
            "workflow" => Ok(Kind::Workflow),
            "execution" => Ok(Kind::Execution),
            "other" => Ok(Kind::Other),
            _ => Err(format!("unknown kind {s:?} (expected step, workflow, execution or other)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub uri: String,
    /// The IRI the nanopub introduces.
    pub subject: String,
    pub label: String,
    pub kind: Kind,
    pub description: String,
    pub score: u32,
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Normalizes a nanopub URI, a URI with a fragment, or a bare `RA…` code to
/// the nanopub URI.
pub fn normalize_uri(uri_or_code: &str) -> String {
    let base = uri_or_code.split('#').next().unwrap_or(uri_or_code).trim();
    if base.starts_with("http://") || base.starts_with("https://") {
        base.to_string()
    } else {
        format!("http://purl.org/np/{base}")
    }
}

/// Storage and lookup backend: a local store or a remote registry service.
pub trait Registry {
    /// Stores a verified nanopub; republishing identical content is a no-op.
    fn publish(&self, np: &crate::nanopub::Nanopub) -> Result<String, RegistryError>;
    fn fetch(&self, uri: &str) -> Result<crate::nanopub::Nanopub, RegistryError>;
    fn search(&self, q: &str) -> Result<Vec<SearchHit>, RegistryError>;
    fn list(&self, kind: Option<Kind>) -> Result<Vec<SearchHit>, RegistryError>;
    fn query(&self, text: &str) -> Result<ResultTable, RegistryError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens() {
        assert_eq!(tokenize("Add blur-to IMAGE!"), vec!["add", "blur", "to", "image"]);
        assert!(tokenize("  --- ").is_empty());
    }

    #[test]
    fn uri_forms() {
        let uri = "http://purl.org/np/RAabc";
        assert_eq!(normalize_uri("RAabc"), uri);
        assert_eq!(normalize_uri("http://purl.org/np/RAabc#step"), uri);
        assert_eq!(normalize_uri(uri), uri);
    }

    #[test]
    fn kinds() {
        assert_eq!(Kind::from_types([vocab::PPLAN_STEP, vocab::PLEX_SCRIPT_TASK]), Kind::Step);
        assert_eq!(Kind::from_types([vocab::PROV_BUNDLE]), Kind::Execution);
        assert_eq!(Kind::from_types([]), Kind::Other);
        assert_eq!("workflow".parse::<Kind>().unwrap(), Kind::Workflow);
    }
}
