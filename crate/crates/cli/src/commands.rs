//! Command dispatch. Reports go to `out` as JSON; diagnostics go to `err`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use wdsec::attacks::{apply_script, attack_diff, transport_script, CompositeSystem, DiffReport, LogEntry};
use wdsec::fincat::{representable_iso_check, yoneda_check};
use wdsec::moore::{validate_machine, MooreMachine};
use wdsec::oracle::trace_equivalent;
use wdsec::probes::{yoneda_filter, Classification, KnowledgeBase, MachineOracle};
use wdsec::random::{check_laws, Law};
use wdsec::wiring::{identity_wiring, BoxShape};
use wdsec::Word;

use crate::dot::{architecture_dot, wiring_dot};
use crate::schema::{self, load, Document, LoadError, SystemBuilder};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIFFERS: i32 = 1;
pub const EXIT_AMBIGUOUS: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DOMAIN: i32 = 65;

const AFTER_HELP: &str = "\
Input words are comma-separated tuples; the symbols of one tuple are
separated by `|` in port order, e.g. --input \"0|1,1|0\".

Exit codes:
  0   success (diff: equivalent; learn: exact; iso-check: isomorphic)
  1   diff: behaviors differ; laws: a law failed; iso-check: not isomorphic
  2   learn: ambiguous
  3   learn: unknown
  64  usage error
  65  invalid input or failed domain check";

#[derive(Debug, Parser)]
#[command(name = "wdsec", version, about = "Compose, probe and attack wired Moore-machine systems", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load any document and report what it contains.
    Validate { file: PathBuf },
    /// Emit the composite machine of a system as a machine file.
    Compose {
        file: PathBuf,
        #[arg(long)]
        system: String,
    },
    /// Run a system on an input word.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        system: String,
        /// Comma-separated tuples, ports separated by `|`.
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        /// Repeat the word cyclically to this many steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Filter a knowledge base against a target with a test battery.
    Learn {
        #[arg(long)]
        target: PathBuf,
        /// System to take from the target file when it is a system file.
        #[arg(long)]
        target_system: Option<String>,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        battery: PathBuf,
    },
    /// Run an attack script on a scenario's attacker view and its real system.
    Attack {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        script: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Also write the baseline and attacked systems to this system file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Compare two behaviors.
    Diff {
        #[arg(long = "a")]
        a: PathBuf,
        #[arg(long = "b")]
        b: PathBuf,
        #[arg(long)]
        a_system: Option<String>,
        #[arg(long)]
        b_system: Option<String>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Render a wiring or architecture as Graphviz DOT.
    #[command(group(ArgGroup::new("what").args(["system", "wiring", "architecture"])))]
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        wiring: Option<String>,
        #[arg(long)]
        architecture: Option<String>,
    },
    /// Check the Yoneda bijection for one object and functor.
    YonedaCheck {
        file: PathBuf,
        #[arg(long)]
        object: String,
        #[arg(long)]
        functor: String,
    },
    /// Decide whether two objects are isomorphic via their representables.
    IsoCheck {
        file: PathBuf,
        #[arg(long = "a")]
        a: String,
        #[arg(long = "b")]
        b: String,
    },
    /// Check the algebra laws on seeded random networks.
    Laws {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Domain(String),
}

fn domain(e: impl ToString) -> CliError {
    CliError::Domain(e.to_string())
}

struct Report {
    body: String,
    code: i32,
}

impl Report {
    fn json(v: &Value, code: i32) -> Self {
        Report {
            body: schema::to_json(v),
            code,
        }
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(r) => {
            let _ = out.write_all(r.body.as_bytes());
            r.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn dispatch(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Validate { file } => validate(&file),
        Command::Compose { file, system } => {
            let sys = system_of(&file, Some(&system))?;
            let m = sys.composite().map_err(domain)?.with_name(system);
            Ok(Report {
                body: schema::to_json(&schema::machine_file(&m)),
                code: EXIT_OK,
            })
        }
        Command::Simulate {
            file,
            system,
            input,
            steps,
        } => simulate(&file, &system, &input, steps),
        Command::Learn {
            target,
            target_system,
            kb,
            battery,
        } => learn(&target, target_system.as_deref(), &kb, &battery),
        Command::Attack {
            scenario,
            script,
            depth,
            emit,
        } => attack(&scenario, &script, depth, emit.as_deref()),
        Command::Diff {
            a,
            b,
            a_system,
            b_system,
            depth,
        } => {
            let a = system_of(&a, a_system.as_deref())?;
            let b = system_of(&b, b_system.as_deref())?;
            let d = attack_diff(&a, &b, depth).map_err(domain)?;
            let shape = a.outer().map_err(domain)?;
            let code = if d.equivalent { EXIT_OK } else { EXIT_DIFFERS };
            Ok(Report::json(&diff_json(&d, &shape), code))
        }
        Command::ExportDot {
            file,
            system,
            wiring,
            architecture,
        } => export_dot(&file, system, wiring, architecture),
        Command::YonedaCheck { file, object, functor } => {
            let fc = schema::load_fincat(&file)?;
            let f = fc
                .functor(&functor)
                .ok_or_else(|| domain(format!("no functor `{functor}` in {}", fc.doc.name)))?;
            let w = yoneda_check(&fc.category, &object, f).map_err(domain)?;
            let pairs: Vec<Value> = w
                .pairs
                .iter()
                .map(|(eta, x)| json!({"element": x, "components": eta.components}))
                .collect();
            Ok(Report::json(
                &json!({
                    "category": fc.doc.name,
                    "object": object,
                    "functor": functor,
                    "set_size": w.set_size,
                    "nat_count": w.nat_count(),
                    "bijection": true,
                    "pairs": pairs,
                }),
                EXIT_OK,
            ))
        }
        Command::IsoCheck { file, a, b } => {
            let fc = schema::load_fincat(&file)?;
            let r = representable_iso_check(&fc.category, &a, &b).map_err(domain)?;
            let code = if r.iso { EXIT_OK } else { EXIT_DIFFERS };
            Ok(Report::json(
                &json!({"category": fc.doc.name, "a": a, "b": b, "iso": r.iso, "witness": r.witness}),
                code,
            ))
        }
        Command::Laws { seed, count, depth } => {
            let r = check_laws(seed, count, depth, &Law::ALL).map_err(domain)?;
            let failures: serde_json::Map<String, Value> = r
                .failures
                .iter()
                .map(|(law, idx)| (law.name().to_string(), json!(idx)))
                .collect();
            let code = if r.passed() { EXIT_OK } else { EXIT_DIFFERS };
            Ok(Report::json(
                &json!({
                    "seed": r.seed,
                    "count": r.count,
                    "depth": r.depth,
                    "laws": Law::ALL.iter().map(|l| l.name()).collect::<Vec<_>>(),
                    "passed": r.passed(),
                    "failures": failures,
                }),
                code,
            ))
        }
    }
}

fn validate(file: &Path) -> Result<Report, CliError> {
    let doc = load(file)?;
    let detail = match &doc {
        Document::System(lib) => json!({
            "boxes": lib.doc.boxes.len(),
            "machines": lib.doc.machines.len(),
            "wirings": lib.doc.wirings.len(),
            "architectures": lib.doc.architectures.len(),
            "systems": lib.system_names(),
        }),
        Document::Machine(m) => {
            let warnings: Vec<String> = validate_machine(&m.to_spec()).warnings.iter().map(|w| w.to_string()).collect();
            json!({"name": m.name(), "states": m.num_states(), "warnings": warnings})
        }
        Document::Wiring(name, w) => json!({
            "name": name,
            "inner": w.inner().iter().map(|b| b.name()).collect::<Vec<_>>(),
            "outer": w.outer().iter().map(|b| b.name()).collect::<Vec<_>>(),
        }),
        Document::Battery(tests) => json!({"tests": tests.iter().map(|t| t.name.as_str()).collect::<Vec<_>>()}),
        Document::Attack(a) => json!({"name": a.name, "steps": a.steps.len()}),
        Document::Scenario(s) => json!({
            "real": s.doc.real,
            "attacker_view": s.doc.attacker_view,
            "kb": s.scenario.kb.names(),
            "battery": s.scenario.battery.iter().map(|t| t.name.as_str()).collect::<Vec<_>>(),
            "scripts": s.scenario.scripts.keys().collect::<Vec<_>>(),
        }),
        Document::Fincat(f) => json!({
            "name": f.doc.name,
            "objects": f.category.objects.len(),
            "morphisms": f.category.morphisms.len(),
            "functors": f.functors.iter().map(|x| x.name.as_str()).collect::<Vec<_>>(),
        }),
    };
    Ok(Report::json(
        &json!({"file": file.display().to_string(), "schema": doc.schema(), "valid": true, "detail": detail}),
        EXIT_OK,
    ))
}

/// A system from a system file, or a machine file wrapped in an identity
/// wiring. `name` may be omitted when the file holds a single system.
fn system_of(file: &Path, name: Option<&str>) -> Result<CompositeSystem, CliError> {
    match load(file)? {
        Document::Machine(m) => {
            if let Some(n) = name {
                return Err(domain(format!("{}: a machine file has no system `{n}`", file.display())));
            }
            Ok(machine_system(m))
        }
        Document::System(lib) => {
            let names = lib.system_names();
            let n = match (name, names.as_slice()) {
                (Some(n), _) => n,
                (None, [only]) => only,
                (None, _) => {
                    return Err(domain(format!(
                        "{}: choose a system with --system (one of: {})",
                        file.display(),
                        names.join(", ")
                    )))
                }
            };
            lib.system(n)
                .cloned()
                .ok_or_else(|| domain(format!("{}: no system `{n}`", file.display())))
        }
        other => Err(domain(format!(
            "{}: expected a system or machine file, found {}",
            file.display(),
            other.schema()
        ))),
    }
}

fn machine_system(m: MooreMachine) -> CompositeSystem {
    CompositeSystem::new(identity_wiring(m.shape()), vec![m]).expect("a machine fits its own box")
}

/// Parses `0|1,1|0` into a word over the inputs of `shape`.
pub fn parse_word(shape: &BoxShape, text: &str) -> Result<Word, String> {
    if text.trim().is_empty() {
        return Ok(vec![]);
    }
    text.split(',')
        .enumerate()
        .map(|(t, tuple)| {
            let symbols: Vec<&str> = if shape.inputs().is_empty() && tuple.trim().is_empty() {
                vec![]
            } else {
                tuple.trim().split('|').collect()
            };
            shape.parse_inputs(&symbols).map_err(|e| format!("input tuple {t} \"{tuple}\": {e}"))
        })
        .collect()
}

fn render_inputs(shape: &BoxShape, w: &Word) -> Vec<String> {
    w.iter().map(|x| shape.render_inputs(x)).collect()
}

fn render_outputs(shape: &BoxShape, w: &Word) -> Vec<String> {
    w.iter().map(|x| shape.render_outputs(x)).collect()
}

fn simulate(file: &Path, system: &str, input: &str, steps: Option<usize>) -> Result<Report, CliError> {
    let sys = system_of(file, Some(system))?;
    let m = sys.composite().map_err(domain)?;
    let shape = m.shape().clone();
    let mut word = parse_word(&shape, input).map_err(domain)?;
    if let Some(n) = steps {
        if word.is_empty() && n > 0 {
            return Err(domain("--steps needs a nonempty --input"));
        }
        word = word.iter().cycle().take(n).cloned().collect();
    }
    let outputs = m.run(&word).map_err(domain)?;
    Ok(Report::json(
        &json!({
            "system": system,
            "input": render_inputs(&shape, &word),
            "output": render_outputs(&shape, &outputs),
        }),
        EXIT_OK,
    ))
}

fn learn(target: &Path, target_system: Option<&str>, kb: &Path, battery: &Path) -> Result<Report, CliError> {
    let target = match target_system {
        None => match load(target)? {
            Document::Machine(m) => m,
            _ => system_of(target, None)?.composite().map_err(domain)?,
        },
        Some(n) => system_of(target, Some(n))?.composite().map_err(domain)?,
    };
    let kb: KnowledgeBase = schema::load_kb(kb, target.shape())?;
    let battery = schema::load_battery(battery)?;
    let r = yoneda_filter(&kb, &battery, &MachineOracle::new(target));
    let code = match r.classification {
        Classification::Exact => EXIT_OK,
        Classification::Ambiguous => EXIT_AMBIGUOUS,
        Classification::Unknown => EXIT_UNKNOWN,
    };
    let incomplete: Vec<Value> = r
        .incomplete
        .iter()
        .map(|(t, why)| json!({"test": t, "reason": why}))
        .collect();
    Ok(Report::json(
        &json!({
            "classification": r.classification.to_string(),
            "candidates": r.candidates,
            "entries": r.entries,
            "tests": r.tests,
            "matrix": r.matrix,
            "witnesses": r.witnesses,
            "incomplete": incomplete,
        }),
        code,
    ))
}

fn log_json(log: &[LogEntry]) -> Vec<Value> {
    log.iter()
        .map(|e| {
            json!({
                "step": e.step,
                "kind": e.kind,
                "index": e.index,
                "component": e.component,
                "wiring_sha256": e.wiring_sha256,
                "component_sha256": e.component_sha256,
                "system_sha256": e.system_sha256,
            })
        })
        .collect()
}

fn diff_json(d: &DiffReport, shape: &BoxShape) -> Value {
    json!({
        "depth": d.depth,
        "equivalent": d.equivalent,
        "witness": d.witness.as_ref().map(|w| render_inputs(shape, w)),
        "baseline_outputs": d.baseline_outputs.as_ref().map(|w| render_outputs(shape, w)),
        "attacked_outputs": d.attacked_outputs.as_ref().map(|w| render_outputs(shape, w)),
        "battery": d.battery.iter().map(|(t, agree)| json!({"test": t, "agree": agree})).collect::<Vec<_>>(),
    })
}

fn attack(scenario: &Path, script: &str, depth: usize, emit: Option<&Path>) -> Result<Report, CliError> {
    let loaded = schema::load_scenario(scenario)?;
    let s = &loaded.scenario;
    let sc = s.scripts.get(script).ok_or_else(|| {
        domain(format!(
            "no script `{script}` (available: {})",
            s.scripts.keys().cloned().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let (view_attacked, view_log) = apply_script(&s.attacker_view, sc).map_err(|f| domain(failure_text("view", &f)))?;
    let moved = transport_script(sc, &s.attacker_view, &s.real, &s.correspondence).map_err(domain)?;
    let (real_attacked, real_log) = apply_script(&s.real, &moved).map_err(|f| domain(failure_text("real", &f)))?;
    let shape = s.attacker_view.outer().map_err(domain)?;
    let view_diff = attack_diff(&s.attacker_view, &view_attacked, depth).map_err(domain)?;
    let real_diff = attack_diff(&s.real, &real_attacked, depth).map_err(domain)?;
    let transported = trace_equivalent(
        &view_attacked.composite().map_err(domain)?,
        &real_attacked.composite().map_err(domain)?,
        depth,
    )
    .map_err(domain)?;
    if let Some(path) = emit {
        let mut b = SystemBuilder::new();
        for (name, sys) in [
            ("baseline", &s.attacker_view),
            ("attacked", &view_attacked),
            ("real_baseline", &s.real),
            ("real_attacked", &real_attacked),
        ] {
            b.add_composite(name, sys).map_err(domain)?;
        }
        fs::write(path, schema::to_json(&b.finish())).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    }
    Ok(Report::json(
        &json!({
            "script": script,
            "view": {
                "system": loaded.doc.attacker_view,
                "log": log_json(&view_log),
                "diff": diff_json(&view_diff, &shape),
            },
            "real": {
                "system": loaded.doc.real,
                "steps": moved.steps.len(),
                "log": log_json(&real_log),
                "diff": diff_json(&real_diff, &shape),
            },
            "transported_equivalent": transported,
        }),
        EXIT_OK,
    ))
}

fn failure_text(side: &str, f: &wdsec::attacks::ScriptFailure) -> String {
    let mut s = format!("{side}: {f}");
    for e in &f.log {
        s.push_str(&format!("\n  {e}"));
    }
    s
}

fn export_dot(
    file: &Path,
    system: Option<String>,
    wiring: Option<String>,
    architecture: Option<String>,
) -> Result<Report, CliError> {
    let body = match load(file)? {
        Document::Wiring(name, w) => wiring_dot(&name, &w),
        Document::System(lib) => {
            let missing = |what: &str, n: &str| domain(format!("{}: no {what} `{n}`", file.display()));
            if let Some(n) = system {
                wiring_dot(&n, lib.system(&n).ok_or_else(|| missing("system", &n))?.wiring())
            } else if let Some(n) = wiring {
                wiring_dot(&n, lib.wiring(&n).ok_or_else(|| missing("wiring", &n))?)
            } else if let Some(n) = architecture {
                architecture_dot(&n, lib.architecture(&n).ok_or_else(|| missing("architecture", &n))?)
            } else {
                return Err(domain("give one of --system, --wiring, --architecture"));
            }
        }
        other => {
            return Err(domain(format!(
                "{}: expected a system or wiring file, found {}",
                file.display(),
                other.schema()
            )))
        }
    };
    Ok(Report { body, code: EXIT_OK })
}
