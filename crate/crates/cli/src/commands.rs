use std::cell::OnceCell;
use std::fs;
use std::io::{Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, SubsecRound, TimeZone, Utc};
use plexflow_core::exec::{execute, ExecutionFailure, ExecutionResult, Executors, TerminalPrompt, ValueMap};
use plexflow_core::manifest::{emit_code_template, parse_manifest, resolve, Manifest, StepManifest};
use plexflow_core::model::{FairWorkflow, Source, StepExecution, Value, Variable, WorkflowExecution};
use plexflow_core::nanopub::{Nanopub, Profile};
use plexflow_core::query::{Cell, ResultTable, PLAN_SIZES_QUERY, STEP_EXECUTIONS_QUERY, STEP_REUSE_QUERY};
use plexflow_core::registry::{fetch_step, fetch_workflow, prepare_workflow, publish_retroprov, step_nanopub, Kind, LocalRegistry, Registry, SearchHit};
use serde_json::json;

use crate::http::HttpRegistry;
use crate::server::{self, AppState};
use crate::{Cli, CliError, Command, Format, Global, ProfileCommand, Stat};

type Result<T> = std::result::Result<T, CliError>;

struct Ctx {
    global: Global,
    registry: OnceCell<Box<dyn Registry>>,
}

fn plexflow_home() -> PathBuf {
    std::env::var_os("HOME").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")).join(".plexflow")
}

fn is_url(location: &str) -> bool {
    location.starts_with("http://") || location.starts_with("https://")
}

impl Ctx {
    fn json(&self) -> bool {
        self.global.format == Format::Json
    }

    fn registry_location(&self) -> String {
        self.global
            .registry
            .clone()
            .unwrap_or_else(|| plexflow_home().join("registry").display().to_string())
    }

    fn registry(&self) -> Result<&dyn Registry> {
        if let Some(r) = self.registry.get() {
            return Ok(r.as_ref());
        }
        let location = self.registry_location();
        let reg: Box<dyn Registry> = if is_url(&location) {
            Box::new(HttpRegistry::new(&location))
        } else {
            Box::new(LocalRegistry::open(&location).map_err(|e| CliError::internal(format!("opening registry {location}: {e}")))?)
        };
        Ok(self.registry.get_or_init(|| reg).as_ref())
    }

    fn profile_path(&self) -> PathBuf {
        self.global.profile.clone().unwrap_or_else(|| plexflow_home().join("profile.yaml"))
    }

    fn profile(&self) -> Result<Profile> {
        let path = self.profile_path();
        if !path.exists() {
            return Err(CliError::user(format!(
                "no profile at {}; create one with `plexflow profile init --name <NAME>`",
                path.display()
            )));
        }
        Profile::load(&path).map_err(CliError::user)
    }

    /// Prints `human` in human mode or `json` as the single JSON document.
    fn emit(&self, human: impl FnOnce() -> String, json: impl FnOnce() -> serde_json::Value) {
        if self.json() {
            println!("{}", json());
        } else {
            print!("{}", human());
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(CliError::internal)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
}

fn creation_time(flag: Option<&str>) -> Result<DateTime<Utc>> {
    let t = if let Some(text) = flag {
        DateTime::parse_from_rfc3339(text)
            .map_err(|e| CliError::user(format!("invalid --timestamp {text:?}: {e}")))?
            .with_timezone(&Utc)
    } else if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        let secs: i64 = epoch.trim().parse().map_err(|_| CliError::user(format!("invalid SOURCE_DATE_EPOCH {epoch:?}")))?;
        Utc.timestamp_opt(secs, 0).single().ok_or_else(|| CliError::user(format!("SOURCE_DATE_EPOCH out of range: {secs}")))?
    } else {
        Utc::now()
    };
    Ok(t.trunc_subsecs(3))
}

fn table(vars: &[&str], rows: Vec<Vec<String>>) -> ResultTable {
    ResultTable {
        vars: vars.iter().map(|v| v.to_string()).collect(),
        rows: rows.into_iter().map(|r| r.into_iter().map(Cell::Text).collect()).collect(),
    }
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let ctx = Ctx { global: cli.global, registry: OnceCell::new() };
    match cli.command {
        Command::Profile(ProfileCommand::Init { name, orcid, force }) => profile_init(&ctx, &name, orcid, force),
        Command::Profile(ProfileCommand::Show) => profile_show(&ctx),
        Command::Publish { manifest, dry_run, timestamp } => publish(&ctx, &manifest, dry_run, timestamp.as_deref()),
        Command::Search { query } => search(&ctx, &query.join(" ")),
        Command::List { kind } => list(&ctx, kind.as_deref()),
        Command::Fetch { uri, output } => fetch(&ctx, &uri, output.as_deref()),
        Command::Inject { uri, manifest } => inject(&ctx, &uri, manifest),
        Command::Run { target, inputs, publish_prov, timeout, timestamp } => {
            run(&ctx, &target, &inputs, publish_prov, timeout, timestamp.as_deref())
        }
        Command::Stats { which } => {
            let text = match which {
                Stat::Reuse => STEP_REUSE_QUERY,
                Stat::Executions => STEP_EXECUTIONS_QUERY,
                Stat::PlanSizes => PLAN_SIZES_QUERY,
            };
            query(&ctx, text)
        }
        Command::Query { file } => query(&ctx, &read_input(&file)?),
        Command::Serve { port, host, data, ui } => serve(&ctx, &host, port, data, ui),
        Command::Verify { target } => verify(&ctx, &target),
    }
}

fn profile_init(ctx: &Ctx, name: &str, orcid: Option<String>, force: bool) -> Result<()> {
    let path = ctx.profile_path();
    if path.exists() && !force {
        return Err(CliError::user(format!("{} already exists; pass --force to replace it", path.display())));
    }
    let profile = Profile::generate(name, orcid).map_err(CliError::user)?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let saved = profile.save(dir).map_err(CliError::internal)?;
    if saved != path {
        fs::rename(&saved, &path).map_err(CliError::internal)?;
    }
    ctx.emit(
        || format!("profile written to {}\npublic key {}\n", path.display(), profile.public_key_base64()),
        || json!({ "profile": path, "name": profile.name, "orcid": profile.orcid, "public_key": profile.public_key_base64() }),
    );
    Ok(())
}

fn profile_show(ctx: &Ctx) -> Result<()> {
    let profile = ctx.profile()?;
    let signing = profile.signing_key().is_some();
    ctx.emit(
        || {
            let orcid = profile.orcid.as_deref().map(|o| format!("orcid       {o}\n")).unwrap_or_default();
            format!(
                "name        {}\n{orcid}public key  {}\ncan sign    {}\n",
                profile.name,
                profile.public_key_base64(),
                if signing { "yes" } else { "no" }
            )
        },
        || json!({ "name": profile.name, "orcid": profile.orcid, "public_key": profile.public_key_base64(), "can_sign": signing }),
    );
    Ok(())
}

fn resolve_workflow(ctx: &Ctx, m: &plexflow_core::manifest::WorkflowManifest) -> Result<FairWorkflow> {
    resolve(m, |uri: &str| -> std::result::Result<_, String> {
        let reg = ctx.registry().map_err(|e| e.to_string())?;
        fetch_step(reg, uri).map_err(|e| e.to_string())
    })
    .map_err(CliError::user)
}

fn publish(ctx: &Ctx, path: &Path, dry_run: bool, timestamp: Option<&str>) -> Result<()> {
    let manifest = parse_manifest(&read_input(path)?).map_err(|e| CliError::user(format!("{}: {e}", path.display())))?;
    let profile = ctx.profile()?;
    let created = creation_time(timestamp)?;
    let (nps, roles, plan): (Vec<Nanopub>, Vec<String>, Option<String>) = match manifest {
        Manifest::Step(m) => {
            let step = m.to_step();
            step.validate().map_err(CliError::user)?;
            (vec![step_nanopub(&step, &profile, created)?], vec!["step".into()], None)
        }
        Manifest::Workflow(m) => {
            let w = resolve_workflow(ctx, &m)?;
            let (nps, publication) = prepare_workflow(&w, &profile, created)?;
            let mut roles: Vec<String> = publication.step_uris.keys().map(|id| format!("step {id}")).collect();
            roles.push("plan".into());
            (nps, roles, Some(publication.plan_uri))
        }
    };
    if dry_run {
        ctx.emit(
            || nps.iter().map(Nanopub::to_trig).collect::<Vec<_>>().join("\n"),
            || {
                let items: Vec<_> = nps
                    .iter()
                    .zip(&roles)
                    .map(|(np, role)| json!({ "uri": np.uri(), "role": role, "trig": np.to_trig() }))
                    .collect();
                json!({ "dry_run": true, "nanopubs": items, "plan": plan })
            },
        );
        return Ok(());
    }
    let reg = ctx.registry()?;
    for (i, np) in nps.iter().enumerate() {
        if let Err(e) = reg.publish(np) {
            let done: Vec<&str> = nps[..i].iter().map(Nanopub::uri).collect();
            if !done.is_empty() {
                eprintln!("published before failing:\n  {}", done.join("\n  "));
            }
            return Err(e.into());
        }
    }
    if !ctx.json() {
        for (np, role) in nps.iter().zip(&roles) {
            eprintln!("{role:<12} {}", np.uri());
        }
        eprintln!("published {} nanopub(s)", nps.len());
    }
    ctx.emit(
        || nps.iter().map(|np| format!("{}\n", np.uri())).collect(),
        || {
            let items: Vec<_> = nps.iter().zip(&roles).map(|(np, role)| json!({ "uri": np.uri(), "role": role })).collect();
            json!({ "nanopubs": items, "plan": plan })
        },
    );
    Ok(())
}

fn hits_table(hits: &[SearchHit], with_score: bool) -> String {
    let rows = hits
        .iter()
        .map(|h| {
            let mut row = vec![h.kind.to_string(), h.label.clone(), h.uri.clone()];
            if with_score {
                row.insert(0, h.score.to_string());
            }
            row
        })
        .collect();
    let vars: &[&str] = if with_score { &["score", "kind", "label", "uri"] } else { &["kind", "label", "uri"] };
    table(vars, rows).render()
}

fn search(ctx: &Ctx, q: &str) -> Result<()> {
    let hits = ctx.registry()?.search(q)?;
    if hits.is_empty() && !ctx.json() {
        eprintln!("no results for {q:?}");
        return Ok(());
    }
    ctx.emit(|| hits_table(&hits, true), || json!(hits));
    Ok(())
}

fn list(ctx: &Ctx, kind: Option<&str>) -> Result<()> {
    let kind = kind.map(str::parse::<Kind>).transpose().map_err(CliError::user)?;
    let hits = ctx.registry()?.list(kind)?;
    ctx.emit(|| hits_table(&hits, false), || json!(hits));
    Ok(())
}

fn fetch(ctx: &Ctx, uri: &str, output: Option<&Path>) -> Result<()> {
    let np = ctx.registry()?.fetch(uri)?;
    let trig = np.to_trig();
    match output {
        Some(path) => {
            fs::write(path, &trig).map_err(|e| CliError::user(format!("{}: {e}", path.display())))?;
            ctx.emit(|| format!("wrote {} to {}\n", np.uri(), path.display()), || json!({ "uri": np.uri(), "path": path }));
        }
        None => ctx.emit(|| trig.clone(), || json!({ "uri": np.uri(), "trig": trig })),
    }
    Ok(())
}

fn inject(ctx: &Ctx, uri: &str, as_manifest: bool) -> Result<()> {
    let reg = ctx.registry()?;
    let text = if as_manifest { server::manifest_of(reg, uri)? } else { emit_code_template(&fetch_step(reg, uri)?) };
    let key = if as_manifest { "manifest" } else { "template" };
    ctx.emit(|| text.clone(), || json!({ "uri": uri, key: text }));
    Ok(())
}

fn single_step_workflow(m: &StepManifest) -> FairWorkflow {
    let step = m.to_step();
    let mut w = FairWorkflow::new(&m.label);
    w.description = m.description.clone();
    w.workflow_inputs = step.inputs.iter().map(|v| Variable::new(&v.name)).collect();
    for v in &step.inputs {
        w.bind("step", &v.name, Source::WorkflowInput(v.name.clone()));
    }
    w.workflow_outputs = step.outputs.iter().map(|v| Source::StepOutput { step: "step".into(), output: v.name.clone() }).collect();
    w.add_step("step", step);
    w
}

/// Returns the workflow and whether it came from the registry.
fn load_workflow(ctx: &Ctx, target: &str) -> Result<(FairWorkflow, bool)> {
    let path = Path::new(target);
    if path.exists() {
        let manifest = parse_manifest(&read_input(path)?).map_err(|e| CliError::user(format!("{target}: {e}")))?;
        let w = match manifest {
            Manifest::Step(m) => single_step_workflow(&m),
            Manifest::Workflow(m) => resolve_workflow(ctx, &m)?,
        };
        w.validate().map_err(CliError::user)?;
        return Ok((w, false));
    }
    if is_url(target) || target.starts_with("RA") {
        return Ok((fetch_workflow(ctx.registry()?, target)?, true));
    }
    Err(CliError::user(format!("{target}: no such manifest file or workflow URI")))
}

fn parse_inputs(w: &FairWorkflow, raw: &[String]) -> Result<ValueMap> {
    let mut inputs = ValueMap::new();
    for item in raw {
        let (name, value) = item.split_once('=').ok_or_else(|| CliError::user(format!("--input {item:?}: expected NAME=VALUE")))?;
        if !w.workflow_inputs.iter().any(|v| v.name == name) {
            let known: Vec<&str> = w.workflow_inputs.iter().map(|v| v.name.as_str()).collect();
            return Err(CliError::user(format!("unknown workflow input {name:?} (inputs: {})", known.join(", "))));
        }
        inputs.insert(name.to_string(), Value::parse_tagged(value).map_err(CliError::user)?);
    }
    Ok(inputs)
}

fn step_json(w: &FairWorkflow, s: &StepExecution) -> serde_json::Value {
    json!({
        "id": s.step_id,
        "label": w.steps.get(&s.step_id).map(|st| st.label.as_str()),
        "step": s.step_uri,
        "activity": s.activity_uri,
        "started": s.started.to_rfc3339(),
        "ended": s.ended.to_rfc3339(),
        "status": if s.succeeded() { "ok" } else { "failed" },
        "error": s.error,
    })
}

fn summary(w: &FairWorkflow, e: &WorkflowExecution) -> String {
    let ms = (e.ended - e.started).num_milliseconds();
    let mut out = format!("ran {} step(s) in {ms} ms\n", e.step_executions.len());
    for s in &e.step_executions {
        let label = w.steps.get(&s.step_id).map(|st| st.label.as_str()).unwrap_or_default();
        let status = match &s.error {
            None => "ok".to_string(),
            Some(err) => format!("FAILED: {err}"),
        };
        out.push_str(&format!("  {:<12} {label}  [{status}]\n", s.step_id));
    }
    out
}

fn run(ctx: &Ctx, target: &str, raw_inputs: &[String], publish_prov: bool, timeout: f64, timestamp: Option<&str>) -> Result<()> {
    let (w, published) = load_workflow(ctx, target)?;
    if publish_prov && !published {
        return Err(CliError::user(
            "--publish-prov needs a published workflow; publish the manifest first and run its URI",
        ));
    }
    let inputs = parse_inputs(&w, raw_inputs)?;
    if !timeout.is_finite() || timeout <= 0.0 {
        return Err(CliError::user("--timeout must be a positive number of seconds"));
    }
    let mut prompt = TerminalPrompt::stdio();
    let mut executors = Executors::with_prompt(&mut prompt);
    executors.timeout = Duration::from_secs_f64(timeout);
    let outcome = execute(&w, &inputs, &mut executors);
    let record = match &outcome {
        Ok(ExecutionResult { retroprov, .. }) => retroprov,
        Err(ExecutionFailure { partial, .. }) => partial,
    };
    let provenance = if publish_prov {
        let profile = ctx.profile()?;
        publish_retroprov(ctx.registry()?, record, &profile, creation_time(timestamp)?)?
    } else {
        Vec::new()
    };
    let steps: Vec<_> = record.step_executions.iter().map(|s| step_json(&w, s)).collect();
    match outcome {
        Ok(result) => {
            ctx.emit(
                || {
                    let mut out: String = result.outputs.iter().map(|(k, v)| format!("{k} = {}\n", v.lexical())).collect();
                    out.push_str(&summary(&w, &result.retroprov));
                    if !provenance.is_empty() {
                        out.push_str(&format!("published {} provenance nanopub(s):\n", provenance.len()));
                        out.extend(provenance.iter().map(|u| format!("  {u}\n")));
                    }
                    out
                },
                || {
                    let outputs: serde_json::Map<_, _> = result.outputs.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
                    json!({ "ok": true, "outputs": outputs, "steps": steps, "provenance": provenance })
                },
            );
            Ok(())
        }
        Err(failure) => {
            if ctx.json() {
                println!("{}", json!({ "ok": false, "error": failure.error.to_string(), "steps": steps, "provenance": provenance }));
            } else {
                eprint!("{}", summary(&w, &failure.partial));
                for u in &provenance {
                    eprintln!("  recorded {u}");
                }
                eprintln!("error: execution failed: {}", failure.error);
            }
            Err(CliError::Reported(1))
        }
    }
}

fn query(ctx: &Ctx, text: &str) -> Result<()> {
    let result = ctx.registry()?.query(text)?;
    ctx.emit(|| result.render(), || json!(result));
    Ok(())
}

fn serve(ctx: &Ctx, host: &str, port: u16, data: Option<PathBuf>, ui: Option<PathBuf>) -> Result<()> {
    let dir = match data {
        Some(d) => d,
        None => {
            let location = ctx.registry_location();
            if is_url(&location) {
                return Err(CliError::user("serve needs --data when the registry is a URL"));
            }
            PathBuf::from(location)
        }
    };
    let registry = LocalRegistry::open(&dir).map_err(|e| CliError::internal(format!("opening {}: {e}", dir.display())))?;
    let profile = if ctx.profile_path().exists() { Some(ctx.profile()?) } else { None };
    if profile.is_none() {
        eprintln!("no profile found; POST /publish is disabled");
    }
    if let Some(ui) = &ui {
        if !ui.is_dir() {
            return Err(CliError::user(format!("--ui {}: not a directory", ui.display())));
        }
    }
    let addr: SocketAddr = format!("{host}:{port}").parse().map_err(|e| CliError::user(format!("invalid address {host}:{port}: {e}")))?;
    eprintln!("serving {} ({} nanopubs)", dir.display(), registry.len());
    let app = server::router(Arc::new(AppState { registry, profile }), ui);
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::internal)?;
    runtime
        .block_on(server::serve(addr, app, |bound| {
            println!("listening on http://{bound}");
            let _ = std::io::stdout().flush();
        }))
        .map_err(|e| CliError::internal(format!("server on {addr}: {e}")))
}

fn verify(ctx: &Ctx, target: &str) -> Result<()> {
    let path = Path::new(target);
    let np = if path.exists() {
        Nanopub::from_trig(&read_input(path)?).map_err(|e| CliError::user(format!("{target}: {e}")))?
    } else {
        ctx.registry()?.fetch(target)?
    };
    let report = np.verify();
    let mark = |ok: bool| if ok { "ok" } else { "FAILED" };
    ctx.emit(
        || {
            let mut out = format!(
                "uri        {}\nstructure  {}\nuri hash   {}\nsignature  {}\n",
                np.uri(),
                mark(report.structure_ok),
                mark(report.uri_ok),
                mark(report.signature_ok)
            );
            out.extend(report.problems.iter().map(|p| format!("  - {p}\n")));
            out
        },
        || json!({ "uri": np.uri(), "ok": report.ok(), "report": report }),
    );
    if report.ok() {
        Ok(())
    } else {
        Err(CliError::Reported(1))
    }
}
