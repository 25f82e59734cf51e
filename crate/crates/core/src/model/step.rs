use super::{CodeKind, FairStep, ModelError, Variable};
use crate::rdf::{Dataset, Term, Triple};
use crate::vocab;

pub fn step_iri(base: &str) -> String {
    format!("{base}#step")
}

pub fn input_var_iri(base: &str, name: &str) -> String {
    format!("{base}#in/{name}")
}

pub fn output_var_iri(base: &str, name: &str) -> String {
    format!("{base}#out/{name}")
}

pub(super) fn objects<'a>(d: &'a Dataset, subject: &'a Term, predicate: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
    d.iter()
        .filter(move |q| &q.subject == subject && q.predicate.as_iri() == Some(predicate))
        .map(|q| &q.object)
}

pub(super) fn first_literal(d: &Dataset, subject: &Term, predicate: &str) -> Option<String> {
    objects(d, subject, predicate).find_map(|o| o.as_literal().map(|l| l.value.clone()))
}

pub(super) fn position(d: &Dataset, subject: &Term) -> i64 {
    first_literal(d, subject, vocab::PLEX_POSITION).and_then(|p| p.parse().ok()).unwrap_or(i64::MAX)
}

pub(super) fn has_type(d: &Dataset, subject: &Term, class: &str) -> bool {
    objects(d, subject, vocab::RDF_TYPE).any(|o| o.as_iri() == Some(class))
}

pub(super) fn variable_triples(var_iri: &str, index: usize, v: &Variable) -> Vec<Triple> {
    let mut out = vec![
        Triple::iri(var_iri, vocab::RDF_TYPE, Term::iri(vocab::PPLAN_VARIABLE)),
        Triple::iri(var_iri, vocab::RDFS_LABEL, Term::string(&v.name)),
        Triple::iri(var_iri, vocab::PLEX_POSITION, Term::integer(index as i64)),
    ];
    for t in &v.semantic_types {
        out.push(Triple::iri(var_iri, vocab::RDF_TYPE, Term::iri(t)));
    }
    if let Some(desc) = &v.description {
        out.push(Triple::iri(var_iri, vocab::DCTERMS_DESCRIPTION, Term::string(desc)));
    }
    out
}

pub(super) fn variables_from_rdf(d: &Dataset, owner: &Term, link: &str) -> Result<Vec<Variable>, ModelError> {
    let mut vars = Vec::new();
    for var in objects(d, owner, link) {
        let name = first_literal(d, var, vocab::RDFS_LABEL).ok_or_else(|| ModelError::MissingLabelOn(var.to_string()))?;
        let mut semantic_types: Vec<String> = objects(d, var, vocab::RDF_TYPE)
            .filter_map(|t| t.as_iri())
            .filter(|t| *t != vocab::PPLAN_VARIABLE)
            .map(str::to_string)
            .collect();
        semantic_types.sort();
        semantic_types.dedup();
        let description = first_literal(d, var, vocab::DCTERMS_DESCRIPTION);
        vars.push((position(d, var), name.clone(), Variable { name, semantic_types, description }));
    }
    vars.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(vars.into_iter().map(|(_, _, v)| v).collect())
}

/// Emits the assertion triples describing `s`, rooted at `base#step`.
pub fn step_to_rdf(s: &FairStep, base: &str) -> Result<Vec<Triple>, ModelError> {
    s.validate()?;
    for t in s.inputs.iter().chain(&s.outputs).flat_map(|v| &v.semantic_types) {
        Term::try_iri(t.as_str())?;
    }
    let step = step_iri(base);
    let mut out = vec![
        Triple::iri(&step, vocab::RDF_TYPE, Term::iri(vocab::PPLAN_STEP)),
        Triple::iri(
            &step,
            vocab::RDF_TYPE,
            Term::iri(if s.is_manual { vocab::PLEX_MANUAL_TASK } else { vocab::PLEX_SCRIPT_TASK }),
        ),
        Triple::iri(&step, vocab::RDFS_LABEL, Term::string(&s.label)),
        Triple::iri(&step, vocab::DCTERMS_DESCRIPTION, Term::string(&s.description)),
        Triple::iri(&step, vocab::PLEX_CODE_KIND, Term::string(s.code_kind.as_str())),
    ];
    if !s.code.is_empty() {
        out.push(Triple::iri(&step, vocab::PLEX_HAS_SOURCE_CODE, Term::string(&s.code)));
    }
    for (i, v) in s.inputs.iter().enumerate() {
        let var = input_var_iri(base, &v.name);
        out.push(Triple::iri(&step, vocab::PPLAN_HAS_INPUT_VAR, Term::iri(&var)));
        out.extend(variable_triples(&var, i, v));
    }
    for (i, v) in s.outputs.iter().enumerate() {
        let var = output_var_iri(base, &v.name);
        out.push(Triple::iri(&step, vocab::PPLAN_HAS_OUTPUT_VAR, Term::iri(&var)));
        out.extend(variable_triples(&var, i, v));
    }
    Ok(out)
}

/// Reconstructs a step from its description. The derivation origin is
/// picked up from `prov:wasDerivedFrom` on the step or on the graph that
/// holds its description, when those quads are present.
pub fn step_from_rdf(d: &Dataset, step_uri: &str) -> Result<FairStep, ModelError> {
    let step = Term::iri(step_uri);
    let type_quad = d
        .iter()
        .find(|q| q.subject == step && q.predicate.as_iri() == Some(vocab::RDF_TYPE) && q.object.as_iri() == Some(vocab::PPLAN_STEP))
        .ok_or_else(|| ModelError::MissingType(step_uri.to_string(), "p-plan:Step"))?;
    let graph = type_quad.graph.clone();
    let label = first_literal(d, &step, vocab::RDFS_LABEL).ok_or(ModelError::MissingLabel)?;
    let code_kind = match first_literal(d, &step, vocab::PLEX_CODE_KIND) {
        Some(k) => k.parse().map_err(|reason| ModelError::Malformed { subject: step_uri.to_string(), reason })?,
        None => CodeKind::default(),
    };
    let derived_from = objects(d, &step, vocab::PROV_WAS_DERIVED_FROM)
        .chain(objects(d, &graph, vocab::PROV_WAS_DERIVED_FROM))
        .find_map(|o| o.as_iri().map(str::to_string));
    Ok(FairStep {
        uri: Some(step_uri.to_string()),
        label,
        description: first_literal(d, &step, vocab::DCTERMS_DESCRIPTION).unwrap_or_default(),
        code: first_literal(d, &step, vocab::PLEX_HAS_SOURCE_CODE).unwrap_or_default(),
        code_kind,
        inputs: variables_from_rdf(d, &step, vocab::PPLAN_HAS_INPUT_VAR)?,
        outputs: variables_from_rdf(d, &step, vocab::PPLAN_HAS_OUTPUT_VAR)?,
        is_manual: has_type(d, &step, vocab::PLEX_MANUAL_TASK),
        derived_from,
    })
}

/// Records that `new_step` is a reuse of the published step `origin`.
pub fn mark_derivation(new_step: FairStep, origin: &str) -> Result<FairStep, ModelError> {
    Term::try_iri(origin)?;
    Ok(FairStep { derived_from: Some(origin.to_string()), ..new_step })
}
