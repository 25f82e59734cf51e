//! Namespace table and the fixed set of terms the emitters are allowed to use.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const DCTERMS: &str = "http://purl.org/dc/terms/";
pub const PPLAN: &str = "http://purl.org/net/p-plan#";
pub const PROV: &str = "http://www.w3.org/ns/prov#";
pub const DUL: &str = "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#";
pub const NP: &str = "http://www.nanopub.org/nschema#";
pub const NPX: &str = "http://purl.org/nanopub/x/";
pub const PLEX: &str = "http://purl.org/plexflow#";

/// Prefix used for every minted nanopub URI.
pub const NP_URI_PREFIX: &str = "http://purl.org/np/RA";
/// Base for placeholder URIs of not-yet-minted nanopubs.
pub const TEMP_NP_BASE: &str = "http://purl.org/nanopub/temp/";
/// Base for step and plan identifiers that were never published.
pub const LOCAL_BASE: &str = "urn:plexflow:local:";

/// The prefix table written into every serialized nanopub.
pub const PREFIXES: &[(&str, &str)] = &[
    ("dcterms", DCTERMS),
    ("dul", DUL),
    ("np", NP),
    ("npx", NPX),
    ("p-plan", PPLAN),
    ("plex", PLEX),
    ("prov", PROV),
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("xsd", XSD),
];

/// Namespaces whose terms may appear in predicate or class position.
pub const VOCABULARY_NAMESPACES: &[&str] = &[RDF, RDFS, XSD, DCTERMS, PPLAN, PROV, DUL, NP, NPX, PLEX];

macro_rules! terms {
    ($($name:ident = $ns:ident + $local:literal;)*) => {
        $(pub const $name: &str = concat_ns!($ns, $local);)*
    };
}

macro_rules! concat_ns {
    (RDF, $l:literal) => { concat!("http://www.w3.org/1999/02/22-rdf-syntax-ns#", $l) };
    (RDFS, $l:literal) => { concat!("http://www.w3.org/2000/01/rdf-schema#", $l) };
    (XSD, $l:literal) => { concat!("http://www.w3.org/2001/XMLSchema#", $l) };
    (DCTERMS, $l:literal) => { concat!("http://purl.org/dc/terms/", $l) };
    (PPLAN, $l:literal) => { concat!("http://purl.org/net/p-plan#", $l) };
    (PROV, $l:literal) => { concat!("http://www.w3.org/ns/prov#", $l) };
    (DUL, $l:literal) => { concat!("http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#", $l) };
    (NP, $l:literal) => { concat!("http://www.nanopub.org/nschema#", $l) };
    (NPX, $l:literal) => { concat!("http://purl.org/nanopub/x/", $l) };
    (PLEX, $l:literal) => { concat!("http://purl.org/plexflow#", $l) };
}

terms! {
    RDF_TYPE = RDF + "type";
    RDFS_LABEL = RDFS + "label";
    DCTERMS_DESCRIPTION = DCTERMS + "description";

    XSD_STRING = XSD + "string";
    XSD_INTEGER = XSD + "integer";
    XSD_DECIMAL = XSD + "decimal";
    XSD_DOUBLE = XSD + "double";
    XSD_BOOLEAN = XSD + "boolean";
    XSD_DATETIME = XSD + "dateTime";

    PPLAN_PLAN = PPLAN + "Plan";
    PPLAN_STEP = PPLAN + "Step";
    PPLAN_VARIABLE = PPLAN + "Variable";
    PPLAN_ACTIVITY = PPLAN + "Activity";
    PPLAN_HAS_INPUT_VAR = PPLAN + "hasInputVar";
    PPLAN_HAS_OUTPUT_VAR = PPLAN + "hasOutputVar";
    PPLAN_IS_STEP_OF_PLAN = PPLAN + "isStepOfPlan";
    PPLAN_IS_VARIABLE_OF_PLAN = PPLAN + "isVariableOfPlan";
    PPLAN_CORRESPONDS_TO_STEP = PPLAN + "correspondsToStep";

    PROV_BUNDLE = PROV + "Bundle";
    PROV_ENTITY = PROV + "Entity";
    PROV_USED = PROV + "used";
    PROV_GENERATED = PROV + "generated";
    PROV_VALUE = PROV + "value";
    PROV_STARTED_AT_TIME = PROV + "startedAtTime";
    PROV_ENDED_AT_TIME = PROV + "endedAtTime";
    PROV_GENERATED_AT_TIME = PROV + "generatedAtTime";
    PROV_WAS_DERIVED_FROM = PROV + "wasDerivedFrom";
    PROV_WAS_ATTRIBUTED_TO = PROV + "wasAttributedTo";

    DUL_PRECEDES = DUL + "precedes";

    NP_NANOPUBLICATION = NP + "Nanopublication";
    NP_HAS_ASSERTION = NP + "hasAssertion";
    NP_HAS_PROVENANCE = NP + "hasProvenance";
    NP_HAS_PUBINFO = NP + "hasPublicationInfo";

    NPX_INTRODUCES = NPX + "introduces";

    PLEX_SCRIPT_TASK = PLEX + "ScriptTask";
    PLEX_MANUAL_TASK = PLEX + "ManualTask";
    PLEX_HAS_SOURCE_CODE = PLEX + "hasSourceCode";
    PLEX_CODE_KIND = PLEX + "codeKind";
    PLEX_POSITION = PLEX + "position";
    PLEX_HAS_SIGNATURE = PLEX + "hasSignature";
    PLEX_HAS_PUBLIC_KEY = PLEX + "hasPublicKey";
    PLEX_CONTENT_DIGEST = PLEX + "contentDigest";
    PLEX_INCLUDES_ACTIVITY = PLEX + "includesActivity";
    PLEX_HAS_STEP_SLOT = PLEX + "hasStepSlot";
    PLEX_SLOT_ID = PLEX + "slotId";
    PLEX_USES_STEP = PLEX + "usesStep";
    PLEX_RUNS_AFTER = PLEX + "runsAfter";
    PLEX_HAS_BINDING = PLEX + "hasBinding";
    PLEX_TARGET_INPUT = PLEX + "targetInput";
    PLEX_FROM_WORKFLOW_INPUT = PLEX + "fromWorkflowInput";
    PLEX_FROM_SLOT = PLEX + "fromSlot";
    PLEX_FROM_OUTPUT = PLEX + "fromOutput";
    PLEX_CONSTANT_VALUE = PLEX + "constantValue";
    PLEX_HAS_WORKFLOW_INPUT = PLEX + "hasWorkflowInput";
    PLEX_HAS_WORKFLOW_OUTPUT = PLEX + "hasWorkflowOutput";
    PLEX_FAILED_WITH = PLEX + "failedWith";
}

/// True when `iri` belongs to one of the fixed vocabulary namespaces.
pub fn is_vocabulary_term(iri: &str) -> bool {
    VOCABULARY_NAMESPACES.iter().any(|ns| iri.starts_with(ns))
}
