use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use wdsec::attacks::AttackScript;
use wdsec::probes::Test;
use wdsec::scenarios::*;
use wdsec_cli::commands::{EXIT_AMBIGUOUS, EXIT_DIFFERS, EXIT_DOMAIN, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE};
use wdsec_cli::fixtures;
use wdsec_cli::schema::{
    self, battery_doc, load, load_scenario, load_system, machine_file, parse_as, to_json, AttackDoc, BatteryDoc,
    Document, FincatDoc, LoadError, MachineDoc, ScenarioDoc, SystemDoc,
};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn uav(rel: &str) -> String {
    root().join("uav").join(rel).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (vec![], vec![]);
    let mut argv = vec!["wdsec"];
    argv.extend_from_slice(args);
    let code = wdsec_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn files_under(dir: &Path) -> BTreeSet<PathBuf> {
    let mut out = BTreeSet::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.insert(p);
        }
    }
    out
}

#[test]
fn shipped_fixtures_match_the_builders() {
    let generated = fixtures::all();
    for (rel, text) in &generated {
        let on_disk = fs::read_to_string(root().join(rel)).unwrap_or_else(|e| panic!("{}: {e}", rel.display()));
        assert_eq!(&on_disk, text, "{} is stale; rerun gen_fixtures", rel.display());
    }
    let expected: BTreeSet<PathBuf> = generated.iter().map(|(r, _)| root().join(r)).collect();
    assert_eq!(files_under(&root()), expected);
}

fn reserialize(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    match schema::probe_text(path, &text).unwrap().as_str() {
        schema::SYSTEM => to_json(&parse_as::<SystemDoc>(path, &text, schema::SYSTEM).unwrap()),
        schema::MACHINE => to_json(&parse_as::<MachineDoc>(path, &text, schema::MACHINE).unwrap()),
        schema::BATTERY => to_json(&parse_as::<BatteryDoc>(path, &text, schema::BATTERY).unwrap()),
        schema::ATTACK => to_json(&parse_as::<AttackDoc>(path, &text, schema::ATTACK).unwrap()),
        schema::SCENARIO => to_json(&parse_as::<ScenarioDoc>(path, &text, schema::SCENARIO).unwrap()),
        schema::FINCAT => to_json(&parse_as::<FincatDoc>(path, &text, schema::FINCAT).unwrap()),
        other => panic!("unexpected schema {other}"),
    }
}

#[test]
fn every_fixture_round_trips() {
    for path in files_under(&root()) {
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(reserialize(&path), text, "{}", path.display());
        let doc = load(&path).unwrap_or_else(|e| panic!("{e}"));
        match doc {
            Document::Machine(m) => assert_eq!(to_json(&machine_file(&m)), text),
            Document::Battery(t) => assert_eq!(to_json(&battery_doc(&t)), text),
            Document::System(lib) => {
                assert_eq!(to_json(&lib.doc), text);
                let again = schema::Library::from_doc(lib.doc.clone()).unwrap();
                assert_eq!(again, *lib);
            }
            Document::Fincat(f) => {
                assert_eq!(to_json(&schema::fincat_doc(&f.doc.name, &f.category, &f.functors)), text)
            }
            Document::Scenario(s) => assert_eq!(to_json(&s.doc), text),
            Document::Attack(a) => assert_eq!(to_json(&a), text),
            Document::Wiring(..) => unreachable!("no standalone wiring fixtures"),
        }
    }
}

#[test]
fn scenario_manifest_loads_the_full_scenario() {
    let loaded = load_scenario(Path::new(&uav("scenario.json"))).unwrap();
    let s = &loaded.scenario;
    let built = uav_scenario();
    for (got, want) in [(&s.real, &built.real), (&s.attacker_view, &built.attacker_view)] {
        assert_eq!(got.components(), want.components());
        assert!(got.wiring().structurally_equal(want.wiring()));
    }
    assert_eq!(s.correspondence, built.correspondence);
    assert_eq!(s.battery, built.battery);
    let mut want: Vec<_> = built.kb.entries().to_vec();
    want.sort_by(|a, b| a.name().cmp(b.name()));
    assert_eq!(s.kb.entries(), want.as_slice());
    for (name, script) in &built.scripts {
        assert_eq!(&s.scripts[name], script, "{name}");
    }
    assert!(loaded.doc.notes.iter().any(|n| n.contains("Outer routing")));
}

#[test]
fn system_file_matches_the_builders() {
    let lib = load_system(Path::new(&uav("system.json"))).unwrap();
    let view = build_uav_attacker_view();
    let expected = [
        ("uav_real", build_uav_real()),
        ("uav_view", view.clone()),
        ("uav_gps_dropped", build_uav_gps_dropped()),
        ("uav_view_env", wrap_environment(&view).unwrap()),
        ("uav_view_gcs", wrap_gcs(&view).unwrap()),
    ];
    for (name, want) in expected {
        let got = lib.system(name).unwrap();
        assert_eq!(got.components(), want.components(), "{name}");
        assert!(got.wiring().structurally_equal(want.wiring()), "{name}");
    }
    for (name, w) in fixture_wirings() {
        if let Some(got) = lib.wiring(name) {
            assert_eq!(got, &w, "{name}");
        }
    }
    assert_eq!(lib.architecture("uav_real").unwrap(), &uav_architecture_real());
    assert_eq!(lib.architecture("uav_view").unwrap(), &uav_architecture_view());
}

#[test]
fn minimal_system_file_loads() {
    let dir = scratch("minimal");
    let p = dir.join("min.json");
    fs::write(
        &p,
        r#"{
  "schema": "system.v1",
  "boxes": [{"name": "X", "inputs": [{"name": "a", "alphabet": ["lo", "hi"]}], "outputs": [{"name": "y", "alphabet": ["0", "1"]}]}],
  "machines": [{"name": "m", "box": "X", "states": ["s"], "init": "s",
    "update": [{"state": "s", "input": "lo", "next": "s"}, {"state": "s", "input": "hi", "next": "s"}],
    "readout": [{"state": "s", "output": "1"}]}],
  "wirings": [],
  "systems": [{"name": "one", "wiring": {"identity": "X"}, "components": ["m"]}]
}"#,
    )
    .unwrap();
    let lib = load_system(&p).unwrap();
    assert_eq!(lib.system_names(), ["one"]);
    let (code, out, _) = run(&["simulate", p.to_str().unwrap(), "--system", "one", "--input", "lo,hi"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["output"], serde_json::json!(["1", "1"]));
}

fn edited_system(name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v = json(&fs::read_to_string(uav("system.json")).unwrap());
    edit(&mut v);
    let p = scratch(name).join("system.json");
    fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

#[test]
fn unknown_port_names_the_field_path() {
    let p = edited_system("g9", |v| {
        v["wirings"][0]["in_map"][1]["from"] = serde_json::json!({"outer_in": "UAV.g9"});
    });
    let err = load_system(&p).unwrap_err();
    let LoadError::Field { error, .. } = &err else { panic!("{err}") };
    assert_eq!(error.field, "wirings[0].in_map[1].from.outer_in");
    assert!(error.message.contains("\"g9\""), "{err}");
}

#[test]
fn undefined_references_are_reported() {
    let p = edited_system("undef-machine", |v| {
        v["systems"][0]["components"][0] = "nope".into();
    });
    assert!(load_system(&p).unwrap_err().to_string().contains("systems[0].components[0]: undefined machine `nope`"));
    let p = edited_system("undef-box", |v| {
        v["wirings"][0]["inner"][0] = "Nope".into();
    });
    assert!(load_system(&p).unwrap_err().to_string().contains("wirings[0].inner[0]"));
}

#[test]
fn incomplete_tables_are_loud() {
    let p = edited_system("missing-row", |v| {
        v["machines"][0]["update"].as_array_mut().unwrap().pop();
    });
    let msg = load_system(&p).unwrap_err().to_string();
    assert!(msg.contains("machines[0]") && msg.contains("missing"), "{msg}");
}

#[test]
fn parse_and_schema_errors() {
    let dir = scratch("syntax");
    let p = dir.join("broken.json");
    fs::write(&p, "{\n  \"schema\": \"system.v1\",\n  \"boxes\": [}\n").unwrap();
    assert!(matches!(load(&p), Err(LoadError::Parse { line: 3, .. })));
    fs::write(&p, r#"{"schema": "system.v2"}"#).unwrap();
    assert!(matches!(load(&p), Err(LoadError::Schema { .. })));
    fs::write(&p, r#"{"schema": "battery.v1", "tests": [], "extra": 1}"#).unwrap();
    assert!(matches!(load(&p), Err(LoadError::Parse { .. })));
    assert!(matches!(load_system(Path::new(&uav("battery.json"))), Err(LoadError::Schema { .. })));
}

#[test]
fn dot_export_matches_golden_files() {
    for name in ["uav_real", "uav_view"] {
        let (code, out, _) = run(&["export-dot", &uav("system.json"), "--system", name]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, fs::read_to_string(uav(&format!("dot/{name}.dot"))).unwrap());
        assert_eq!(run(&["export-dot", &uav("system.json"), "--system", name]).1, out);
    }
    let real = fs::read_to_string(uav("dot/uav_real.dot")).unwrap();
    let clusters: BTreeSet<&str> = real
        .lines()
        .filter_map(|l| l.trim().strip_prefix("label=\""))
        .filter_map(|l| l.strip_suffix("\";"))
        .collect();
    let want: BTreeSet<&str> = ["UAV", "IMU1", "IMU2", "G", "P", "C", "D"].into();
    assert_eq!(clusters, want);
}

fn edges(dot: &str) -> BTreeSet<String> {
    dot.lines().filter(|l| l.contains("->")).map(|l| l.trim().to_string()).collect()
}

#[test]
fn swap_crosses_only_the_gps_inputs() {
    let before = fs::read_to_string(uav("dot/uav_view.dot")).unwrap();
    let after = fs::read_to_string(uav("dot/uav_view_swapped.dot")).unwrap();
    let nodes = |d: &str| -> Vec<String> { d.lines().filter(|l| l.contains("[label=")).map(String::from).collect() };
    assert_eq!(nodes(&before), nodes(&after));
    let (b, a) = (edges(&before), edges(&after));
    let removed: Vec<_> = b.difference(&a).cloned().collect();
    let added: Vec<_> = a.difference(&b).cloned().collect();
    // G is inner box 1; its inputs a, b trade sources.
    assert_eq!(removed, ["\"i4_out0\" -> \"i1_in1\";", "\"o0_in1\" -> \"i1_in0\";"]);
    assert_eq!(added, ["\"i4_out0\" -> \"i1_in0\";", "\"o0_in1\" -> \"i1_in1\";"]);
}

#[test]
fn architecture_export_nests_clusters() {
    let (code, out, _) = run(&["export-dot", &uav("system.json"), "--architecture", "uav_real"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.matches("subgraph").count(), 7);
    assert!(out.contains("subgraph \"cluster_r_0_3\""));
    assert_eq!(run(&["export-dot", &uav("system.json"), "--architecture", "uav_real"]).1, out);
}

#[test]
fn validate_exit_codes() {
    assert_eq!(run(&["validate", &uav("system.json")]).0, EXIT_OK);
    assert_eq!(run(&["validate", "/nonexistent.json"]).0, EXIT_DOMAIN);
    assert_eq!(run(&["validate"]).0, EXIT_USAGE);
}

#[test]
fn compose_exit_codes() {
    let (code, out, _) = run(&["compose", &uav("system.json"), "--system", "uav_view"]);
    assert_eq!(code, EXIT_OK);
    let doc: MachineDoc = serde_json::from_str(&out).unwrap();
    assert_eq!(doc.states.len(), 32);
    assert_eq!(run(&["compose", &uav("system.json"), "--system", "nope"]).0, EXIT_DOMAIN);
    assert_eq!(run(&["compose", &uav("system.json")]).0, EXIT_USAGE);
}

#[test]
fn simulate_exit_codes() {
    let (code, out, _) = run(&["simulate", &uav("system.json"), "--system", "uav_view", "--input", "1|1,1|0", "--steps", "5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["input"].as_array().unwrap().len(), 5);
    let m = build_uav_attacker_view().composite().unwrap();
    let w = vec![vec![1, 1], vec![1, 0], vec![1, 1], vec![1, 0], vec![1, 1]];
    let want: Vec<String> = m.run(&w).unwrap().iter().map(|y| m.shape().render_outputs(y)).collect();
    assert_eq!(json(&out)["output"], serde_json::json!(want));
    assert_eq!(run(&["simulate", &uav("system.json"), "--system", "uav_view", "--input", "2|1"]).0, EXIT_DOMAIN);
    assert_eq!(run(&["simulate", &uav("system.json"), "--system", "uav_view"]).0, EXIT_USAGE);
}

#[test]
fn learn_exit_codes() {
    let (code, out, _) = run(&["learn", "--target", &uav("target.json"), "--kb", &uav("kb"), "--battery", &uav("battery.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["classification"], "exact");
    assert_eq!(json(&out)["candidates"], serde_json::json!(["uav_model"]));

    let dir = scratch("learn");
    let terminal = dir.join("terminal.json");
    fs::write(&terminal, to_json(&battery_doc(&[Test::terminal()]))).unwrap();
    let (code, out, _) = run(&["learn", "--target", &uav("target.json"), "--kb", &uav("kb"), "--battery", terminal.to_str().unwrap()]);
    assert_eq!(code, EXIT_AMBIGUOUS);
    assert_eq!(json(&out)["candidates"].as_array().unwrap().len(), 5);

    let kb = dir.join("kb");
    fs::create_dir_all(&kb).unwrap();
    for e in fs::read_dir(uav("kb")).unwrap() {
        let p = e.unwrap().path();
        if !p.ends_with("uav_gps_swapped.json") {
            fs::copy(&p, kb.join(p.file_name().unwrap())).unwrap();
        }
    }
    let (code, out, _) = run(&[
        "learn",
        "--target",
        &uav("kb/uav_gps_swapped.json"),
        "--kb",
        kb.to_str().unwrap(),
        "--battery",
        &uav("battery.json"),
    ]);
    assert_eq!(code, EXIT_UNKNOWN);
    assert_eq!(json(&out)["classification"], "unknown");
    assert_eq!(run(&["learn", "--target", &uav("target.json"), "--kb", "/nonexistent", "--battery", &uav("battery.json")]).0, EXIT_DOMAIN);
}

#[test]
fn attack_exit_codes() {
    let dir = scratch("attack");
    let emit = dir.join("attacked.json");
    let (code, out, _) = run(&[
        "attack",
        "--scenario",
        &uav("scenario.json"),
        "--script",
        "gps_combined",
        "--emit",
        emit.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let r = json(&out);
    assert_eq!(r["view"]["diff"]["equivalent"], false);
    assert!(r["view"]["diff"]["witness"].as_array().unwrap().len() <= DEPTH);
    assert_eq!(r["transported_equivalent"], true);
    assert_eq!(r["view"]["log"].as_array().unwrap().len(), 2);
    let e = emit.to_str().unwrap();
    assert_eq!(run(&["diff", "--a", e, "--a-system", "baseline", "--b", e, "--b-system", "attacked"]).0, EXIT_DIFFERS);
    assert_eq!(run(&["diff", "--a", e, "--a-system", "attacked", "--b", e, "--b-system", "real_attacked"]).0, EXIT_OK);

    let (code, out, _) = run(&["attack", "--scenario", &uav("scenario.json"), "--script", "gps_double_swap"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["view"]["diff"]["equivalent"], true);
    assert_eq!(run(&["attack", "--scenario", &uav("scenario.json"), "--script", "nope"]).0, EXIT_DOMAIN);
    assert_eq!(run(&["attack", "--scenario", &uav("scenario.json")]).0, EXIT_USAGE);
}

#[test]
fn attack_reports_are_deterministic() {
    let args = ["attack", "--scenario", &uav("scenario.json"), "--script", "gps_combined"];
    assert_eq!(run(&args).1, run(&args).1);
}

#[test]
fn diff_exit_codes() {
    let t = uav("target.json");
    let (code, out, _) = run(&["diff", "--a", &t, "--b", &t]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["equivalent"], true);
    let sys = uav("system.json");
    assert_eq!(run(&["diff", "--a", &t, "--b", &sys, "--b-system", "uav_view"]).0, EXIT_OK);
    assert_eq!(run(&["diff", "--a", &t, "--b", &sys, "--b-system", "uav_gps_dropped"]).0, EXIT_DIFFERS);
    assert_eq!(run(&["diff", "--a", &t, "--b", &sys]).0, EXIT_DOMAIN);
    assert_eq!(run(&["diff", "--a", &t]).0, EXIT_USAGE);
}

#[test]
fn export_dot_exit_codes() {
    assert_eq!(run(&["export-dot", &uav("system.json"), "--wiring", "gps_swap"]).0, EXIT_OK);
    assert_eq!(run(&["export-dot", &uav("system.json")]).0, EXIT_DOMAIN);
    assert_eq!(run(&["export-dot", &uav("battery.json"), "--system", "x"]).0, EXIT_DOMAIN);
    assert_eq!(run(&["export-dot", &uav("system.json"), "--system", "a", "--wiring", "b"]).0, EXIT_USAGE);
}

fn fincat(name: &str) -> String {
    root().join("fincat").join(format!("{name}.json")).display().to_string()
}

#[test]
fn yoneda_check_exit_codes() {
    let (code, out, _) = run(&["yoneda-check", &fincat("poset01"), "--object", "0", "--functor", "inclusion"]);
    assert_eq!(code, EXIT_OK);
    let r = json(&out);
    assert_eq!(r["bijection"], true);
    assert_eq!(r["nat_count"], r["set_size"]);
    assert_eq!(run(&["yoneda-check", &fincat("poset01"), "--object", "0", "--functor", "nope"]).0, EXIT_DOMAIN);
    assert_eq!(run(&["yoneda-check", &fincat("poset01"), "--object", "9", "--functor", "point"]).0, EXIT_DOMAIN);
    assert_eq!(run(&["yoneda-check", &fincat("poset01")]).0, EXIT_USAGE);
}

#[test]
fn iso_check_exit_codes() {
    assert_eq!(run(&["iso-check", &fincat("iso_pair"), "--a", "A", "--b", "B"]).0, EXIT_OK);
    assert_eq!(run(&["iso-check", &fincat("poset01"), "--a", "0", "--b", "1"]).0, EXIT_DIFFERS);
    assert_eq!(run(&["iso-check", &fincat("poset01"), "--a", "0", "--b", "x"]).0, EXIT_DOMAIN);
}

#[test]
fn laws_exit_codes() {
    let (code, out, _) = run(&["laws", "--count", "20"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["passed"], true);
    assert_eq!(run(&["laws", "--seed", "x"]).0, EXIT_USAGE);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_wdsec");
    let t = uav("target.json");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["diff", "--a", &t, "--b", &t]), Some(EXIT_OK));
    assert_eq!(status(&["frobnicate"]), Some(EXIT_USAGE));
    assert_eq!(status(&["validate", "/nonexistent.json"]), Some(EXIT_DOMAIN));
    assert_eq!(status(&["--help"]), Some(EXIT_OK));
}

#[test]
fn loaded_scripts_are_the_builder_scripts() {
    let loaded = load_scenario(Path::new(&uav("scenario.json"))).unwrap();
    let built: Vec<AttackScript> = uav_scripts();
    for s in built {
        assert_eq!(loaded.scenario.scripts[&s.name], s);
    }
}
