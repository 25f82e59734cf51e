//! Nanopublications: assembly of the four named graphs, content-hash URI
//! minting, Ed25519 signing and verification.
//!
//! The URI is `http://purl.org/np/RA` followed by the unpadded base64url
//! SHA-256 of the canonical N-Quads of all four graphs, with the URI itself
//! replaced by a placeholder token. The signature quad is the only quad
//! excluded from the hash; it signs `uri + "\n" + canonical bytes`.

mod profile;
mod structure;

use base64::engine::general_purpose::{STANDARD, URL_SAFE_NO_PAD};
use base64::Engine as _;
use chrono::{DateTime, Utc};
use ed25519_dalek::{Signature, Signer as _, Verifier as _, VerifyingKey};
use indexmap::IndexMap;
use sha2::{Digest, Sha256};

pub use profile::{Profile, ProfileError, ProfileFile};
pub use structure::{validate_structure, Violation};

use crate::rdf::{self, serialize_trig, CanonicalizationError, Dataset, Quad, Term, Triple};
use crate::vocab;

/// The four graphs of a nanopub, with their IRI suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Head,
    Assertion,
    Provenance,
    PubInfo,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::Head, Part::Assertion, Part::Provenance, Part::PubInfo];

    pub fn suffix(self) -> &'static str {
        match self {
            Part::Head => "#Head",
            Part::Assertion => "#assertion",
            Part::Provenance => "#provenance",
            Part::PubInfo => "#pubinfo",
        }
    }

    pub fn graph_of(self, base: &str) -> String {
        format!("{base}{}", self.suffix())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NanopubError {
    #[error("assertion graph is empty")]
    EmptyAssertion,
    #[error(transparent)]
    Canonicalization(#[from] CanonicalizationError),
    #[error("profile {0:?} has no private key")]
    MissingPrivateKey(String),
    #[error("profile key does not match the public key recorded at assembly")]
    KeyMismatch,
    #[error("not a nanopublication: {0}")]
    NotANanopub(String),
    #[error(transparent)]
    Parse(#[from] rdf::ParseError),
}

/// Formats a timestamp as an `xsd:dateTime` literal with millisecond precision.
pub fn datetime_literal(t: &DateTime<Utc>) -> Term {
    Term::typed(t.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string(), vocab::XSD_DATETIME)
}

/// A fresh placeholder base for a nanopub that has not been minted yet.
pub fn new_temp_uri() -> String {
    format!("{}{}", vocab::TEMP_NP_BASE, uuid::Uuid::new_v4().simple())
}

/// Content for the three user-supplied graphs.
#[derive(Debug, Clone, Default)]
pub struct NanopubContent {
    pub assertion: Vec<Triple>,
    pub provenance: Vec<Triple>,
    pub pubinfo: Vec<Triple>,
}

#[derive(Debug, Clone)]
pub struct UnsignedNanopub {
    temp_uri: String,
    dataset: Dataset,
}

impl UnsignedNanopub {
    pub fn temp_uri(&self) -> &str {
        &self.temp_uri
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn graph(&self, part: Part) -> impl Iterator<Item = &Quad> {
        let g = part.graph_of(&self.temp_uri);
        self.dataset.iter().filter(move |q| q.graph_iri() == g)
    }

    pub fn to_trig(&self) -> String {
        serialize_trig(&self.dataset)
    }
}

fn skolemize(term: Term, temp_uri: &str, labels: &mut IndexMap<String, String>) -> Term {
    match term {
        Term::Blank(label) => {
            let n = labels.len() + 1;
            let iri = labels.entry(label).or_insert_with(|| format!("{temp_uri}#_b{n}"));
            Term::iri(iri.clone())
        }
        other => other,
    }
}

/// Builds the four-graph structure around `content`.
///
/// Blank nodes become `temp_uri#_b<n>` in first-seen order. An empty
/// provenance graph gets a `prov:generatedAtTime` triple on the assertion
/// graph; pubinfo gains attribution, creation time and the signer's public key.
pub fn assemble(
    temp_uri: &str,
    content: NanopubContent,
    profile: &Profile,
    created: DateTime<Utc>,
) -> Result<UnsignedNanopub, NanopubError> {
    if content.assertion.is_empty() {
        return Err(NanopubError::EmptyAssertion);
    }
    let head_g = Part::Head.graph_of(temp_uri);
    let assertion_g = Part::Assertion.graph_of(temp_uri);
    let provenance_g = Part::Provenance.graph_of(temp_uri);
    let pubinfo_g = Part::PubInfo.graph_of(temp_uri);
    let timestamp = datetime_literal(&created);

    let mut d = Dataset::with_standard_prefixes();
    d.insert(Triple::iri(temp_uri, vocab::RDF_TYPE, Term::iri(vocab::NP_NANOPUBLICATION)).in_graph(&head_g));
    d.insert(Triple::iri(temp_uri, vocab::NP_HAS_ASSERTION, Term::iri(&assertion_g)).in_graph(&head_g));
    d.insert(Triple::iri(temp_uri, vocab::NP_HAS_PROVENANCE, Term::iri(&provenance_g)).in_graph(&head_g));
    d.insert(Triple::iri(temp_uri, vocab::NP_HAS_PUBINFO, Term::iri(&pubinfo_g)).in_graph(&head_g));

    let mut labels = IndexMap::new();
    let mut add = |d: &mut Dataset, t: Triple, g: &str| {
        let subject = skolemize(t.subject, temp_uri, &mut labels);
        let object = skolemize(t.object, temp_uri, &mut labels);
        d.insert(Triple::new(subject, t.predicate, object).in_graph(g));
    };

    for t in content.assertion {
        add(&mut d, t, &assertion_g);
    }
    let no_provenance = content.provenance.is_empty();
    for t in content.provenance {
        add(&mut d, t, &provenance_g);
    }
    if no_provenance {
        add(&mut d, Triple::iri(&assertion_g, vocab::PROV_GENERATED_AT_TIME, timestamp.clone()), &provenance_g);
    }
    for t in content.pubinfo {
        add(&mut d, t, &pubinfo_g);
    }

    let agent = match &profile.orcid {
        Some(orcid) => orcid.clone(),
        None => format!("{temp_uri}#signer"),
    };
    d.insert(Triple::iri(temp_uri, vocab::PROV_WAS_ATTRIBUTED_TO, Term::iri(&agent)).in_graph(&pubinfo_g));
    d.insert(Triple::iri(&agent, vocab::RDFS_LABEL, Term::string(&profile.name)).in_graph(&pubinfo_g));
    d.insert(Triple::iri(temp_uri, vocab::PROV_GENERATED_AT_TIME, timestamp).in_graph(&pubinfo_g));
    d.insert(Triple::iri(temp_uri, vocab::PLEX_HAS_PUBLIC_KEY, Term::string(profile.public_key_base64())).in_graph(&pubinfo_g));

    Ok(UnsignedNanopub { temp_uri: temp_uri.to_string(), dataset: d })
}

fn is_signature_quad(q: &Quad, uri: &str) -> bool {
    q.predicate.as_iri() == Some(vocab::PLEX_HAS_SIGNATURE)
        && q.subject.as_iri() == Some(uri)
        && q.graph_iri() == Part::PubInfo.graph_of(uri)
}

fn hashed_content(d: &Dataset, uri: &str) -> Result<String, CanonicalizationError> {
    rdf::serialize::canonical_lines(d.iter().filter(|q| !is_signature_quad(q, uri)), uri)
}

fn uri_from_canonical(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    format!("{}{}", vocab::NP_URI_PREFIX, URL_SAFE_NO_PAD.encode(digest))
}

/// Computes the content-hash URI of an unsigned nanopub.
pub fn mint_uri(u: &UnsignedNanopub) -> Result<String, NanopubError> {
    Ok(uri_from_canonical(&hashed_content(&u.dataset, &u.temp_uri)?))
}

fn rebase_iri(iri: &str, from: &str, to: &str) -> String {
    match iri.strip_prefix(from) {
        Some(rest) => format!("{to}{rest}"),
        None => iri.to_string(),
    }
}

fn rebase_term(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Iri(iri) => Term::Iri(rebase_iri(iri, from, to)),
        Term::Literal(l) => {
            let mut l = l.clone();
            l.datatype = l.datatype.map(|dt| rebase_iri(&dt, from, to));
            Term::Literal(l)
        }
        other => other.clone(),
    }
}

fn signed_message(uri: &str, canonical: &str) -> Vec<u8> {
    let mut msg = Vec::with_capacity(uri.len() + 1 + canonical.len());
    msg.extend_from_slice(uri.as_bytes());
    msg.push(b'\n');
    msg.extend_from_slice(canonical.as_bytes());
    msg
}

/// Mints the URI, rebases every graph onto it and attaches the signature.
pub fn sign(u: &UnsignedNanopub, profile: &Profile) -> Result<Nanopub, NanopubError> {
    let key = profile.signing_key().ok_or_else(|| NanopubError::MissingPrivateKey(profile.name.clone()))?;
    let recorded = u
        .dataset
        .match_pattern(None, Some(&Term::iri(vocab::PLEX_HAS_PUBLIC_KEY)), None, None)
        .map(|q| q.object.value().to_string())
        .next();
    if recorded.as_deref() != Some(profile.public_key_base64().as_str()) {
        return Err(NanopubError::KeyMismatch);
    }

    let canonical = hashed_content(&u.dataset, &u.temp_uri)?;
    let uri = uri_from_canonical(&canonical);
    let mut d = Dataset::with_standard_prefixes();
    for q in u.dataset.iter() {
        d.insert(Quad {
            subject: rebase_term(&q.subject, &u.temp_uri, &uri),
            predicate: rebase_term(&q.predicate, &u.temp_uri, &uri),
            object: rebase_term(&q.object, &u.temp_uri, &uri),
            graph: rebase_term(&q.graph, &u.temp_uri, &uri),
        });
    }
    let signature = key.sign(&signed_message(&uri, &canonical));
    d.insert(
        Triple::iri(&uri, vocab::PLEX_HAS_SIGNATURE, Term::string(STANDARD.encode(signature.to_bytes())))
            .in_graph(&Part::PubInfo.graph_of(&uri)),
    );
    Ok(Nanopub { uri, dataset: d })
}

/// A minted, signed nanopublication.
#[derive(Debug, Clone)]
pub struct Nanopub {
    uri: String,
    dataset: Dataset,
}

impl PartialEq for Nanopub {
    fn eq(&self, other: &Self) -> bool {
        self.uri == other.uri && self.dataset.same_quads(&other.dataset)
    }
}

impl Nanopub {
    /// Wraps a dataset, taking the URI from the subject of its head's
    /// `np:hasAssertion` triple. No verification is performed.
    pub fn from_dataset(mut dataset: Dataset) -> Result<Self, NanopubError> {
        let has_assertion = Term::iri(vocab::NP_HAS_ASSERTION);
        let uri = dataset
            .match_pattern(None, Some(&has_assertion), None, None)
            .find_map(|q| q.subject.as_iri().map(str::to_string))
            .ok_or_else(|| NanopubError::NotANanopub("no np:hasAssertion triple".into()))?;
        dataset.set_standard_prefixes();
        Ok(Nanopub { uri, dataset })
    }

    pub fn from_trig(text: &str) -> Result<Self, NanopubError> {
        Self::from_dataset(rdf::parse_trig(text)?)
    }

    pub fn uri(&self) -> &str {
        &self.uri
    }

    /// The part of the URI after `http://purl.org/np/`.
    pub fn code(&self) -> &str {
        uri_code(&self.uri)
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn into_dataset(self) -> Dataset {
        self.dataset
    }

    pub fn to_trig(&self) -> String {
        serialize_trig(&self.dataset)
    }

    /// The graph IRI of `part`, as declared by the head.
    pub fn graph_iri(&self, part: Part) -> String {
        let predicate = match part {
            Part::Head => {
                let has_assertion = Term::iri(vocab::NP_HAS_ASSERTION);
                return self
                    .dataset
                    .match_pattern(Some(&Term::iri(&self.uri)), Some(&has_assertion), None, None)
                    .map(|q| q.graph_iri().to_string())
                    .next()
                    .unwrap_or_else(|| part.graph_of(&self.uri));
            }
            Part::Assertion => vocab::NP_HAS_ASSERTION,
            Part::Provenance => vocab::NP_HAS_PROVENANCE,
            Part::PubInfo => vocab::NP_HAS_PUBINFO,
        };
        self.dataset
            .match_pattern(Some(&Term::iri(&self.uri)), Some(&Term::iri(predicate)), None, None)
            .find_map(|q| q.object.as_iri().map(str::to_string))
            .unwrap_or_else(|| part.graph_of(&self.uri))
    }

    pub fn graph(&self, part: Part) -> impl Iterator<Item = &Quad> {
        let g = self.graph_iri(part);
        self.dataset.iter().filter(move |q| q.graph_iri() == g)
    }

    fn pubinfo_value(&self, predicate: &str) -> Option<String> {
        let g = Part::PubInfo.graph_of(&self.uri);
        self.dataset
            .match_pattern(Some(&Term::iri(&self.uri)), Some(&Term::iri(predicate)), None, None)
            .filter(|q| q.graph_iri() == g)
            .map(|q| q.object.value().to_string())
            .next()
    }

    pub fn signature(&self) -> Option<Vec<u8>> {
        self.pubinfo_value(vocab::PLEX_HAS_SIGNATURE).and_then(|s| STANDARD.decode(s).ok())
    }

    pub fn public_key(&self) -> Option<Vec<u8>> {
        self.pubinfo_value(vocab::PLEX_HAS_PUBLIC_KEY).and_then(|s| STANDARD.decode(s).ok())
    }

    /// Subjects this nanopub introduces (`npx:introduces` in pubinfo).
    pub fn introduces(&self) -> Vec<String> {
        let g = self.graph_iri(Part::PubInfo);
        self.dataset
            .match_pattern(Some(&Term::iri(&self.uri)), Some(&Term::iri(vocab::NPX_INTRODUCES)), None, None)
            .filter(|q| q.graph_iri() == g)
            .filter_map(|q| q.object.as_iri().map(str::to_string))
            .collect()
    }

    pub fn verify(&self) -> VerificationReport {
        verify(self)
    }

    /// Verifies and additionally requires the signer to be `expected`.
    pub fn verify_against(&self, expected: &VerifyingKey) -> VerificationReport {
        let mut report = verify(self);
        if self.public_key().as_deref() != Some(expected.as_bytes().as_slice()) {
            report.signature_ok = false;
            report.problems.push("signed by a different key".into());
        }
        report
    }
}

/// Strips the `http://purl.org/np/` prefix and any fragment.
pub fn uri_code(uri: &str) -> &str {
    let base = uri.split('#').next().unwrap_or(uri);
    base.strip_prefix("http://purl.org/np/").unwrap_or(base)
}

/// True for URIs of the minted shape `http://purl.org/np/RA` + 43 base64url chars.
pub fn is_minted_uri(uri: &str) -> bool {
    uri.strip_prefix(vocab::NP_URI_PREFIX)
        .is_some_and(|h| h.len() == 43 && h.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_'))
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct VerificationReport {
    pub structure_ok: bool,
    pub uri_ok: bool,
    pub signature_ok: bool,
    pub problems: Vec<String>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.structure_ok && self.uri_ok && self.signature_ok
    }
}

pub fn verify(np: &Nanopub) -> VerificationReport {
    let mut problems: Vec<String> = validate_structure(&np.dataset).iter().map(ToString::to_string).collect();
    let expected_graphs: Vec<String> = Part::ALL.iter().map(|p| p.graph_of(&np.uri)).collect();
    let graphs_match = Part::ALL.iter().zip(&expected_graphs).all(|(p, g)| &np.graph_iri(*p) == g);
    if !graphs_match {
        problems.push("graph names are not derived from the nanopub URI".into());
    }
    let structure_ok = problems.is_empty();

    let canonical = hashed_content(&np.dataset, &np.uri);
    let uri_ok = match &canonical {
        Ok(c) => is_minted_uri(&np.uri) && uri_from_canonical(c) == np.uri,
        Err(e) => {
            problems.push(e.to_string());
            false
        }
    };
    if !uri_ok && canonical.is_ok() {
        problems.push("content hash does not match URI".into());
    }

    let signature_ok = check_signature(np, canonical.as_deref().ok()).unwrap_or_else(|p| {
        problems.push(p);
        false
    });
    VerificationReport { structure_ok, uri_ok, signature_ok, problems }
}

fn check_signature(np: &Nanopub, canonical: Option<&str>) -> Result<bool, String> {
    let canonical = canonical.ok_or("content cannot be canonicalized")?;
    let pubinfo = Part::PubInfo.graph_of(&np.uri);
    let subject = Term::iri(&np.uri);
    let values = |predicate: &str| -> Vec<String> {
        np.dataset
            .match_pattern(Some(&subject), Some(&Term::iri(predicate)), None, None)
            .filter(|q| q.graph_iri() == pubinfo)
            .map(|q| q.object.value().to_string())
            .collect()
    };
    let sigs = values(vocab::PLEX_HAS_SIGNATURE);
    let keys = values(vocab::PLEX_HAS_PUBLIC_KEY);
    let [sig] = sigs.as_slice() else {
        return Err(format!("expected one signature, found {}", sigs.len()));
    };
    let [key] = keys.as_slice() else {
        return Err(format!("expected one public key, found {}", keys.len()));
    };
    let key_bytes: [u8; 32] = STANDARD
        .decode(key)
        .ok()
        .and_then(|b| b.try_into().ok())
        .ok_or("public key is not 32 base64 bytes")?;
    let key = VerifyingKey::from_bytes(&key_bytes).map_err(|e| format!("invalid public key: {e}"))?;
    let sig_bytes: [u8; 64] = STANDARD
        .decode(sig)
        .ok()
        .and_then(|b| b.try_into().ok())
        .ok_or("signature is not 64 base64 bytes")?;
    let sig = Signature::from_bytes(&sig_bytes);
    key.verify(&signed_message(&np.uri, canonical), &sig)
        .map(|_| true)
        .map_err(|_| "signature does not verify".to_string())
}
