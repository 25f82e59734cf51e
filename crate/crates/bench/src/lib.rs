//! Shared inputs for the benchmarks.

use chrono::{DateTime, TimeZone, Utc};
use plexflow_core::corpus;
use plexflow_core::manifest::{parse_workflow_manifest, resolve};
use plexflow_core::{FairStep, FairWorkflow, LocalRegistry, Profile};

pub fn fixed_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

pub fn profile() -> Profile {
    Profile::generate("Bench", None).expect("valid profile")
}

/// The bundled five-step workflow with inline steps.
pub fn pencil_sketch() -> FairWorkflow {
    let m = parse_workflow_manifest(corpus::PENCIL_SKETCH).expect("bundled manifest");
    resolve(&m, |_: &str| Err::<FairStep, _>("no registry")).expect("resolves offline")
}

/// An in-memory registry holding the demonstration corpus `copies` times over.
pub fn seeded_registry(copies: usize) -> LocalRegistry {
    let reg = LocalRegistry::in_memory();
    let profile = profile();
    for i in 0..copies {
        let t = fixed_time() + chrono::Duration::seconds(i as i64);
        corpus::seed(&reg, &profile, t).expect("corpus seeds");
    }
    reg
}
