//! Semantic workflow steps published as signed, content-addressed
//! nanopublications, with provenance-recording execution, a publication
//! registry and a small query engine for analysing the published graph.

pub mod rdf;
pub mod vocab;
pub mod nanopub;
pub mod model;
pub mod exec;
pub mod manifest;
pub mod query;
pub mod registry;
pub mod corpus;

pub use exec::{execute, ExecutionResult, Executors};
pub use manifest::{parse_manifest, Manifest};
pub use model::{FairStep, FairWorkflow, Source, Value, Variable, WorkflowExecution};
pub use nanopub::{Nanopub, Profile, VerificationReport};
pub use query::{parse_query, ResultTable};
pub use registry::{Kind, LocalRegistry, Registry, RegistryError, SearchHit};
