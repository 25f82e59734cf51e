//! Client for a remote registry service.

use std::time::Duration;

use plexflow_core::nanopub::{Nanopub, VerificationReport};
use plexflow_core::query::ResultTable;
use plexflow_core::registry::{normalize_uri, Kind, Registry, RegistryError, SearchHit};
use plexflow_core::nanopub::uri_code;
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub struct HttpRegistry {
    base: String,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
    #[serde(default)]
    report: Option<VerificationReport>,
}

#[derive(Deserialize)]
struct Published {
    uri: String,
}

fn transport(e: impl std::fmt::Display) -> RegistryError {
    RegistryError::Transport(e.to_string())
}

impl HttpRegistry {
    pub fn new(base: &str) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(30)).build();
        HttpRegistry { base: base.trim_end_matches('/').to_string(), agent }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn call(&self, req: Result<ureq::Response, ureq::Error>, subject: &str) -> Result<ureq::Response, RegistryError> {
        match req {
            Ok(resp) => Ok(resp),
            Err(ureq::Error::Status(status, resp)) => {
                let text = resp.into_string().unwrap_or_default();
                let body: Option<ErrorBody> = serde_json::from_str(&text).ok();
                Err(match (status, body) {
                    (404, _) => RegistryError::NotFound(subject.to_string()),
                    (422, Some(ErrorBody { report: Some(report), .. })) => RegistryError::Rejected(report),
                    (409, _) => RegistryError::Conflict(subject.to_string()),
                    (_, Some(b)) => RegistryError::Remote { status, message: b.error },
                    (_, None) => RegistryError::Remote { status, message: text },
                })
            }
            Err(e) => Err(transport(e)),
        }
    }

    fn json<T: DeserializeOwned>(resp: ureq::Response) -> Result<T, RegistryError> {
        resp.into_json().map_err(transport)
    }
}

impl Registry for HttpRegistry {
    fn publish(&self, np: &Nanopub) -> Result<String, RegistryError> {
        let req = self.agent.post(&self.url("/np")).set("Content-Type", "application/trig").send_string(&np.to_trig());
        let published: Published = Self::json(self.call(req, np.uri())?)?;
        Ok(published.uri)
    }

    fn fetch(&self, uri: &str) -> Result<Nanopub, RegistryError> {
        let uri = normalize_uri(uri);
        let resp = self.call(self.agent.get(&self.url(&format!("/np/{}", uri_code(&uri)))).call(), &uri)?;
        let text = resp.into_string().map_err(transport)?;
        Ok(Nanopub::from_trig(&text)?)
    }

    fn search(&self, q: &str) -> Result<Vec<SearchHit>, RegistryError> {
        Self::json(self.call(self.agent.get(&self.url("/search")).query("q", q).call(), q)?)
    }

    fn list(&self, kind: Option<Kind>) -> Result<Vec<SearchHit>, RegistryError> {
        let mut req = self.agent.get(&self.url("/list"));
        if let Some(k) = kind {
            req = req.query("kind", k.as_str());
        }
        Self::json(self.call(req.call(), "list")?)
    }

    fn query(&self, text: &str) -> Result<ResultTable, RegistryError> {
        let req = self.agent.post(&self.url("/query")).set("Content-Type", "application/sparql-query").send_string(text);
        Self::json(self.call(req, "query")?)
    }
}
