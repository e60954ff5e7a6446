//! The shipped fixture files, generated from the library's builders. The
//! `gen_fixtures` example writes them under `fixtures/`; tests check the
//! checked-in copies still match.

use std::path::PathBuf;

use wdsec::attacks::{apply_script, AttackScript, AttackStep, CompositeSystem};
use wdsec::fincat::examples;
use wdsec::probes::full_battery;
use wdsec::scenarios::*;

use crate::dot::wiring_dot;
use crate::schema::{
    battery_doc, fincat_doc, machine_file, to_json, ArchitectureDoc, AttackDoc, ChildDoc, ExprDoc, PayloadDoc,
    Library, ScenarioDoc, StepDoc, StepKindDoc, SystemBuilder, SystemDoc, ATTACK, SCENARIO,
};

pub const ROUTING_NOTE: &str = "Outer routing: L reads (u2, D.d), C reads (u1, L.l), D reads C.c, and the UAV output y is D.d.";

fn arch(name: &str, root: &str, wiring: &str, children: Vec<ChildDoc>) -> ArchitectureDoc {
    ArchitectureDoc {
        name: name.into(),
        root: root.into(),
        wiring: wiring.into(),
        children,
    }
}

fn leaves(names: &[&str]) -> Vec<ChildDoc> {
    names.iter().map(|n| ChildDoc::Leaf(n.to_string())).collect()
}

fn refs(name: &str) -> ExprDoc {
    ExprDoc::Ref(name.into())
}

/// The UAV system file: every box, machine and named wiring, the two
/// architectures, and the systems built on them.
pub fn uav_system() -> SystemDoc {
    let mut b = SystemBuilder::new();
    let wirings = [
        ("outer", outer_wiring()),
        ("sensors_view", sensor_wiring()),
        ("sensors_real", sensor_wiring_real()),
        ("sensors_gps_dropped", sensor_wiring_gps_dropped()),
        ("real_to_view", real_to_view_morphism()),
        ("gps_swap", gps_swap_endo()),
        ("environment_context", environment_context()),
        ("gcs_context", gcs_context()),
    ];
    for (n, w) in &wirings {
        b.add_wiring(n, w).expect("fixture names are distinct");
    }
    for m in [gps_hacked(), gps_symmetric(), spoofed_environment(), hijacked_gcs()] {
        b.add_machine(&m).expect("fixture names are distinct");
    }
    b.add_architecture(arch(
        "sensor_unit_real",
        "L",
        "sensors_real",
        leaves(&["IMU1", "IMU2", "G", "P"]),
    ));
    b.add_architecture(arch("sensor_unit_view", "L", "sensors_view", leaves(&["I", "G", "P'"])));
    for side in ["real", "view"] {
        let mut children = vec![ChildDoc::Architecture(format!("sensor_unit_{side}"))];
        children.extend(leaves(&["C", "D"]));
        b.add_architecture(arch(&format!("uav_{side}"), "UAV", "outer", children));
    }
    let real = build_uav_real();
    let view = build_uav_attacker_view();
    let add = |b: &mut SystemBuilder, name: &str, wiring: ExprDoc, sys: &CompositeSystem| {
        b.add_system(name, wiring, sys.components()).expect("fixture names are distinct");
    };
    add(&mut b, "uav_real", ExprDoc::Architecture("uav_real".into()), &real);
    add(&mut b, "uav_view", ExprDoc::Architecture("uav_view".into()), &view);
    add(
        &mut b,
        "uav_gps_dropped",
        ExprDoc::Compose(vec![
            refs("outer"),
            ExprDoc::Tensor(vec![
                refs("sensors_gps_dropped"),
                ExprDoc::Identity("C".into()),
                ExprDoc::Identity("D".into()),
            ]),
        ]),
        &build_uav_gps_dropped(),
    );
    add(
        &mut b,
        "uav_view_env",
        ExprDoc::Compose(vec![
            refs("environment_context"),
            ExprDoc::Tensor(vec![ExprDoc::Architecture("uav_view".into()), ExprDoc::Identity("Env".into())]),
        ]),
        &wrap_environment(&view).expect("fixture wrap"),
    );
    add(
        &mut b,
        "uav_view_gcs",
        ExprDoc::Compose(vec![
            refs("gcs_context"),
            ExprDoc::Tensor(vec![ExprDoc::Identity("GCS".into()), ExprDoc::Architecture("uav_view".into())]),
        ]),
        &wrap_gcs(&view).expect("fixture wrap"),
    );
    b.finish()
}

fn step(kind: StepKindDoc, payload: PayloadDoc) -> StepDoc {
    StepDoc {
        kind,
        index: None,
        name: Some("G".into()),
        payload,
    }
}

pub fn uav_attacks() -> Vec<AttackDoc> {
    let firmware = || step(StepKindDoc::Rewrite, PayloadDoc::Machine("G_H".into()));
    let swap = || step(StepKindDoc::Rewire, PayloadDoc::Wiring("gps_swap".into()));
    let doc = |name: &str, steps| AttackDoc {
        schema: ATTACK.into(),
        name: name.into(),
        steps,
    };
    vec![
        doc("gps_firmware", vec![firmware()]),
        doc("gps_swap", vec![swap()]),
        doc("gps_combined", vec![firmware(), swap()]),
        doc("gps_double_swap", vec![swap(), swap()]),
    ]
}

pub fn uav_manifest() -> ScenarioDoc {
    ScenarioDoc {
        schema: SCENARIO.into(),
        system: "system.json".into(),
        real: "uav_real".into(),
        attacker_view: "uav_view".into(),
        correspondence: uav_correspondence(),
        kb: "kb".into(),
        battery: "battery.json".into(),
        scripts: uav_attacks()
            .iter()
            .map(|a| format!("attacks/{}.json", a.name))
            .collect(),
        notes: vec![
            ROUTING_NOTE.into(),
            "The attacker's view merges IMU1 and IMU2 into one IMU I and fuses with the two-input P'; \
             the correspondence maps I to both IMUs and P' to P."
                .into(),
            "The real P computes (i1 AND i2) OR g, which agrees with P' = i OR g whenever both IMUs agree."
                .into(),
        ],
    }
}

/// Every file under `fixtures/`, as relative path and contents.
pub fn all() -> Vec<(PathBuf, String)> {
    let mut files = vec![];
    let mut put = |path: &str, text: String| files.push((PathBuf::from(path), text));
    put("uav/system.json", to_json(&uav_system()));
    put("uav/scenario.json", to_json(&uav_manifest()));
    put("uav/battery.json", to_json(&battery_doc(&full_battery(DEPTH))));
    for a in uav_attacks() {
        put(&format!("uav/attacks/{}.json", a.name), to_json(&a));
    }
    for m in uav_knowledge_base().entries() {
        put(&format!("uav/kb/{}.json", m.name()), to_json(&machine_file(m)));
    }
    let target = build_uav_real().composite().expect("fixture composite").with_name("uav_real");
    put("uav/target.json", to_json(&machine_file(&target)));
    for (name, text) in golden_dot() {
        put(&format!("uav/dot/{name}.dot"), text);
    }
    for (name, cat, functors) in examples::suite() {
        put(&format!("fincat/{name}.json"), to_json(&fincat_doc(name, &cat, &functors)));
    }
    files
}

/// DOT renderings of the real UAV and of the attacker's view before and
/// after the GPS input swap, taken from the loaded system file.
pub fn golden_dot() -> Vec<(&'static str, String)> {
    let lib = Library::from_doc(uav_system()).expect("fixture system loads");
    let sys = |n: &str| lib.system(n).expect("fixture system").clone();
    let swap = AttackScript::new("swap", vec![AttackStep::Rewire(gps_swap_rewiring())]);
    let (swapped, _) = apply_script(&sys("uav_view"), &swap).expect("fixture attack");
    vec![
        ("uav_real", wiring_dot("uav_real", sys("uav_real").wiring())),
        ("uav_view", wiring_dot("uav_view", sys("uav_view").wiring())),
        ("uav_view_swapped", wiring_dot("uav_view_swapped", swapped.wiring())),
    ]
}
