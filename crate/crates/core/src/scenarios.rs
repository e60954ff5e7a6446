//! The UAV fixtures.
//!
//! The UAV box has two inputs `u1, u2` and one output `y`. Its outer wiring
//! splits it into sensors `L`, controller `C` and dynamics `D`:
//!
//! ```text
//! L.in = (u2, D.d)    C.in = (u1, L.l)    D.in = (C.c)    y = D.d
//! ```
//!
//! The real sensor unit has two identical IMUs, a GPS `G` and a fusion box
//! `P` with three inputs. The attacker's view has one IMU `I` and a two-input
//! fusion box `P'`. Both IMUs see the same inputs and start in the same state, so
//! they never disagree and the two systems behave the same.
//!
//! All machines have at most two states and binary alphabets.

use std::collections::BTreeMap;

use crate::attacks::{
    AttackError, AttackScript, AttackStep, CompositeSystem, Correspondence, RewireStep, RewriteMode, RewriteStep,
    Target,
};
use crate::moore::{MachineHom, MooreMachine};
use crate::probes::{full_battery, KnowledgeBase, Test};
use crate::wiring::{compose, identity_wiring, tensor, Architecture, BoxShape, SourceExpr, Wiring};

/// Depth used for behavioral claims about the fixtures.
pub const DEPTH: usize = 6;

pub fn uav_box() -> BoxShape {
    BoxShape::binary("UAV", &["u1", "u2"], &["y"])
}

pub fn sensors_box() -> BoxShape {
    BoxShape::binary("L", &["l1", "l2"], &["l"])
}

pub fn controller_box() -> BoxShape {
    BoxShape::binary("C", &["c1", "c2"], &["c"])
}

pub fn dynamics_box() -> BoxShape {
    BoxShape::binary("D", &["x"], &["d"])
}

pub fn imu_box(name: &str) -> BoxShape {
    BoxShape::binary(name, &["a", "b"], &["i"])
}

pub fn gps_box() -> BoxShape {
    BoxShape::binary("G", &["a", "b"], &["g"])
}

/// The attacker's two-input fusion box.
pub fn fusion_box() -> BoxShape {
    BoxShape::binary("P'", &["i", "g"], &["p"])
}

/// The real three-input fusion box.
pub fn fusion_box_real() -> BoxShape {
    BoxShape::binary("P", &["i1", "i2", "g"], &["p"])
}

fn bit_states() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

fn two_state(
    name: &str,
    shape: BoxShape,
    update: impl Fn(usize, &[usize]) -> usize,
    readout: impl Fn(usize) -> usize,
) -> MooreMachine {
    MooreMachine::from_fn(name, shape, bit_states(), 0, update, |s| vec![readout(s)])
        .expect("fixture machines are valid")
}

/// Conjunction of its two inputs.
pub fn imu(name: &str) -> MooreMachine {
    two_state(name, imu_box(name), |_, x| x[0] & x[1], |s| s)
}

/// Latches its first input.
pub fn gps() -> MooreMachine {
    two_state("G", gps_box(), |_, x| x[0], |s| s)
}

/// Same updates as [`gps`], inverted readout.
pub fn gps_hacked() -> MooreMachine {
    two_state("G_H", gps_box(), |_, x| x[0], |s| 1 - s)
}

/// A GPS whose update does not care about input order.
pub fn gps_symmetric() -> MooreMachine {
    two_state("G_sym", gps_box(), |_, x| x[0] ^ x[1], |s| s)
}

/// `i OR g`.
pub fn fusion() -> MooreMachine {
    two_state("P'", fusion_box(), |_, x| x[0] | x[1], |s| s)
}

/// `(i1 AND i2) OR g`; agrees with [`fusion`] whenever `i1 = i2`.
pub fn fusion_real() -> MooreMachine {
    two_state("P", fusion_box_real(), |_, x| (x[0] & x[1]) | x[2], |s| s)
}

/// `c1 XOR c2`.
pub fn controller() -> MooreMachine {
    two_state("C", controller_box(), |_, x| x[0] ^ x[1], |s| s)
}

/// Latches the command.
pub fn dynamics() -> MooreMachine {
    two_state("D", dynamics_box(), |_, x| x[0], |s| s)
}

/// A GPS carrying `extra` unobservable toggle bits next to the latched
/// input. States are labelled `s` followed by the extra bits.
pub fn gps_shadowed(extra: usize) -> MooreMachine {
    let n = 1usize << (extra + 1);
    MooreMachine::from_fn(
        format!("G+{extra}"),
        gps_box(),
        (0..n).map(|s| format!("{s:0width$b}", width = extra + 1)).collect(),
        0,
        move |s, x| {
            let mask = (1 << extra) - 1;
            (x[0] << extra) | ((s & mask) ^ (mask * x[1]))
        },
        move |s| vec![s >> extra],
    )
    .expect("fixture machines are valid")
}

/// Forgets the lowest shadow bit: `gps_shadowed(extra) → gps_shadowed(extra - 1)`.
/// With `extra = 1` the target is [`gps`] itself.
pub fn drop_shadow_bit(extra: usize) -> MachineHom {
    assert!(extra >= 1, "nothing to drop");
    let target = if extra == 1 {
        gps()
    } else {
        gps_shadowed(extra - 1)
    };
    let map = (0..1usize << (extra + 1))
        .map(|s| {
            let high = s >> extra;
            let rest = (s & ((1 << extra) - 1)) >> 1;
            (high << (extra - 1)) | rest
        })
        .collect();
    MachineHom::new(gps_shadowed(extra), target, map).expect("shadow bits are unobservable")
}

fn wiring(inner: Vec<BoxShape>, outer: BoxShape, in_map: Vec<Vec<SourceExpr>>, out_map: Vec<SourceExpr>) -> Wiring {
    Wiring::new(inner, vec![outer], in_map, vec![out_map]).expect("fixture wirings are valid")
}

use SourceExpr as E;

/// `v : L ⊗ C ⊗ D → UAV`.
pub fn outer_wiring() -> Wiring {
    wiring(
        vec![sensors_box(), controller_box(), dynamics_box()],
        uav_box(),
        vec![
            vec![E::outer_in(0, 1), E::inner_out(2, 0)],
            vec![E::outer_in(0, 0), E::inner_out(0, 0)],
            vec![E::inner_out(1, 0)],
        ],
        vec![E::inner_out(2, 0)],
    )
}

/// `w : I ⊗ G ⊗ P' → L`, the attacker's sensor decomposition.
pub fn sensor_wiring() -> Wiring {
    wiring(
        vec![imu_box("I"), gps_box(), fusion_box()],
        sensors_box(),
        vec![
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::inner_out(0, 0), E::inner_out(1, 0)],
        ],
        vec![E::inner_out(2, 0)],
    )
}

/// `w' : IMU1 ⊗ IMU2 ⊗ G ⊗ P → L`, the real sensor decomposition. Both IMUs
/// get a copy of the sensor inputs.
pub fn sensor_wiring_real() -> Wiring {
    wiring(
        vec![imu_box("IMU1"), imu_box("IMU2"), gps_box(), fusion_box_real()],
        sensors_box(),
        vec![
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::inner_out(0, 0), E::inner_out(1, 0), E::inner_out(2, 0)],
        ],
        vec![E::inner_out(3, 0)],
    )
}

/// Like [`sensor_wiring`] but the fusion box never hears from the GPS.
pub fn sensor_wiring_gps_dropped() -> Wiring {
    wiring(
        vec![imu_box("I"), gps_box(), fusion_box()],
        sensors_box(),
        vec![
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::inner_out(0, 0), E::Const(0)],
        ],
        vec![E::inner_out(2, 0)],
    )
}

/// The slice morphism from the real sensor architecture to the attacker's:
/// `IMU1 ⊗ IMU2 ⊗ G ⊗ P → I ⊗ G ⊗ P'` with
/// `sensor_wiring() ∘ k = sensor_wiring_real()`.
pub fn real_to_view_morphism() -> Wiring {
    Wiring::new(
        vec![imu_box("IMU1"), imu_box("IMU2"), gps_box(), fusion_box_real()],
        vec![imu_box("I"), gps_box(), fusion_box()],
        vec![
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::outer_in(0, 0), E::outer_in(0, 1)],
            vec![E::outer_in(1, 0), E::outer_in(1, 1)],
            vec![E::outer_in(2, 0), E::inner_out(1, 0), E::outer_in(2, 1)],
        ],
        vec![
            vec![E::inner_out(0, 0)],
            vec![E::inner_out(2, 0)],
            vec![E::inner_out(3, 0)],
        ],
    )
    .expect("fixture wirings are valid")
}

fn uav_architecture(sensors: Wiring) -> Architecture {
    let leaves = |w: &Wiring| w.inner().iter().cloned().map(Architecture::leaf).collect();
    let l = Architecture::node(sensors_box(), sensors.clone(), leaves(&sensors)).expect("fixture architecture");
    Architecture::node(
        uav_box(),
        outer_wiring(),
        vec![
            l,
            Architecture::leaf(controller_box()),
            Architecture::leaf(dynamics_box()),
        ],
    )
    .expect("fixture architecture")
}

pub fn uav_architecture_real() -> Architecture {
    uav_architecture(sensor_wiring_real())
}

pub fn uav_architecture_view() -> Architecture {
    uav_architecture(sensor_wiring())
}

/// `v ∘ (w ⊗ id_C ⊗ id_D)` built directly, without the architecture tree.
pub fn flattened(sensors: &Wiring) -> Wiring {
    let inner = tensor(&[
        sensors.clone(),
        identity_wiring(&controller_box()),
        identity_wiring(&dynamics_box()),
    ])
    .expect("fixture tensor");
    compose(&outer_wiring(), &inner).expect("fixture composition")
}

pub fn build_uav_real() -> CompositeSystem {
    CompositeSystem::new(
        flattened(&sensor_wiring_real()),
        vec![imu("IMU1"), imu("IMU2"), gps(), fusion_real(), controller(), dynamics()],
    )
    .expect("fixture system")
}

pub fn build_uav_attacker_view() -> CompositeSystem {
    CompositeSystem::new(
        flattened(&sensor_wiring()),
        vec![imu("I"), gps(), fusion(), controller(), dynamics()],
    )
    .expect("fixture system")
}

pub fn build_uav_gps_dropped() -> CompositeSystem {
    CompositeSystem::new(
        flattened(&sensor_wiring_gps_dropped()),
        vec![imu("I"), gps(), fusion(), controller(), dynamics()],
    )
    .expect("fixture system")
}

/// Swaps the GPS inputs: `h_in(a, b) = (b, a)`, `h_out(g) = g`.
pub fn gps_swap_endo() -> Wiring {
    wiring(
        vec![gps_box()],
        gps_box(),
        vec![vec![E::outer_in(0, 1), E::outer_in(0, 0)]],
        vec![E::inner_out(0, 0)],
    )
}

pub fn gps_swap_rewiring() -> RewireStep {
    RewireStep {
        target: Target::Name("G".into()),
        endo: gps_swap_endo(),
    }
}

pub fn gps_firmware_rewrite() -> RewriteStep {
    RewriteStep {
        target: Target::Name("G".into()),
        mode: RewriteMode::Replace(gps_hacked()),
    }
}

pub fn environment_box() -> BoxShape {
    BoxShape::binary("Env", &["pos"], &["sense"])
}

/// Senses the position it was last given.
pub fn environment() -> MooreMachine {
    two_state("Env", environment_box(), |_, x| x[0], |s| s)
}

/// Always reports `1`, whatever the position.
pub fn spoofed_environment() -> MooreMachine {
    two_state("Env_spoofed", environment_box(), |_, x| x[0], |_| 1)
}

pub fn world_box() -> BoxShape {
    BoxShape::binary("World", &["cmd"], &["y"])
}

pub fn gcs_box() -> BoxShape {
    BoxShape::binary("GCS", &["op"], &["cmd"])
}

/// Forwards the operator's command one step later.
pub fn gcs() -> MooreMachine {
    two_state("GCS", gcs_box(), |_, x| x[0], |s| s)
}

/// Always commands `1`.
pub fn hijacked_gcs() -> MooreMachine {
    two_state("GCS_hijacked", gcs_box(), |_, x| x[0], |_| 1)
}

pub fn ground_box() -> BoxShape {
    BoxShape::binary("Ground", &["op", "u2"], &["y"])
}

fn check_uav(uav: &CompositeSystem) -> Result<(), AttackError> {
    let outer = uav.outer()?;
    match outer.interface_mismatch(&uav_box()) {
        Some((port, detail)) => Err(AttackError::OuterMismatch(format!("{port}: {detail}"))),
        None => Ok(()),
    }
}

/// `UAV ⊗ Env → World`: the environment senses the UAV output and feeds the
/// reading back into `u2`.
pub fn environment_context() -> Wiring {
    Wiring::new(
        vec![uav_box(), environment_box()],
        vec![world_box()],
        vec![vec![E::outer_in(0, 0), E::inner_out(1, 0)], vec![E::inner_out(0, 0)]],
        vec![vec![E::inner_out(0, 0)]],
    )
    .expect("fixture wirings are valid")
}

/// `GCS ⊗ UAV → Ground`: the station drives `u1`.
pub fn gcs_context() -> Wiring {
    Wiring::new(
        vec![gcs_box(), uav_box()],
        vec![ground_box()],
        vec![vec![E::outer_in(0, 0)], vec![E::inner_out(0, 0), E::outer_in(0, 1)]],
        vec![vec![E::inner_out(1, 0)]],
    )
    .expect("fixture wirings are valid")
}

/// Places the UAV in [`environment_context`]. The environment is the last
/// component.
pub fn wrap_environment(uav: &CompositeSystem) -> Result<CompositeSystem, AttackError> {
    check_uav(uav)?;
    let ctx = environment_context();
    let inner = tensor(&[uav.wiring().clone(), identity_wiring(&environment_box())])?;
    let mut components = uav.components().to_vec();
    components.push(environment());
    CompositeSystem::new(compose(&ctx, &inner)?, components)
}

/// Places the UAV in [`gcs_context`]. The station is component 0.
pub fn wrap_gcs(uav: &CompositeSystem) -> Result<CompositeSystem, AttackError> {
    check_uav(uav)?;
    let ctx = gcs_context();
    let inner = tensor(&[identity_wiring(&gcs_box()), uav.wiring().clone()])?;
    let mut components = vec![gcs()];
    components.extend(uav.components().iter().cloned());
    CompositeSystem::new(compose(&ctx, &inner)?, components)
}

/// Every named wiring the fixtures use, including the tensors that appear in
/// the flattened systems. Identities are not listed.
pub fn fixture_wirings() -> Vec<(&'static str, Wiring)> {
    let id = |b: BoxShape| identity_wiring(&b);
    let with_cd = |w: Wiring| tensor(&[w, id(controller_box()), id(dynamics_box())]).expect("fixture tensor");
    let swap_in_view = tensor(&[
        id(imu_box("I")),
        gps_swap_endo(),
        id(fusion_box()),
        id(controller_box()),
        id(dynamics_box()),
    ])
    .expect("fixture tensor");
    vec![
        ("outer", outer_wiring()),
        ("sensors_view", sensor_wiring()),
        ("sensors_real", sensor_wiring_real()),
        ("sensors_gps_dropped", sensor_wiring_gps_dropped()),
        ("real_to_view", real_to_view_morphism()),
        ("gps_swap", gps_swap_endo()),
        ("sensors_view_cd", with_cd(sensor_wiring())),
        ("sensors_real_cd", with_cd(sensor_wiring_real())),
        ("real_to_view_cd", with_cd(real_to_view_morphism())),
        ("swap_in_view", swap_in_view),
        ("uav_view", flattened(&sensor_wiring())),
        ("uav_real", flattened(&sensor_wiring_real())),
        ("environment_context", environment_context()),
        ("gcs_context", gcs_context()),
        ("uav_view_env", tensor(&[flattened(&sensor_wiring()), id(environment_box())]).expect("fixture tensor")),
        ("gcs_uav_view", tensor(&[id(gcs_box()), flattened(&sensor_wiring())]).expect("fixture tensor")),
    ]
}

/// View component to real components.
pub fn uav_correspondence() -> Correspondence {
    [
        ("I", vec!["IMU1", "IMU2"]),
        ("G", vec!["G"]),
        ("P'", vec!["P"]),
        ("C", vec!["C"]),
        ("D", vec!["D"]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.into_iter().map(String::from).collect()))
    .collect()
}

pub fn uav_scripts() -> Vec<AttackScript> {
    vec![
        AttackScript::new("gps_firmware", vec![AttackStep::Rewrite(gps_firmware_rewrite())]),
        AttackScript::new("gps_swap", vec![AttackStep::Rewire(gps_swap_rewiring())]),
        AttackScript::new(
            "gps_combined",
            vec![
                AttackStep::Rewrite(gps_firmware_rewrite()),
                AttackStep::Rewire(gps_swap_rewiring()),
            ],
        ),
    ]
}

fn composite(sys: &CompositeSystem) -> MooreMachine {
    sys.composite().expect("fixture composite")
}

/// Entries, in order: an isomorphic copy of the real UAV, the one-IMU model,
/// the hacked-GPS and swapped-GPS models, and an idle UAV.
pub fn uav_knowledge_base() -> KnowledgeBase {
    let view = build_uav_attacker_view();
    let real = composite(&build_uav_real())
        .relabeled(|i, _| format!("q{i}"))
        .expect("fresh labels are distinct")
        .with_name("uav_model");
    let attacked = |step: AttackStep| composite(&crate::attacks::apply_step(&view, &step).expect("fixture attack"));
    let idle = MooreMachine::from_fn("uav_idle", uav_box(), vec!["idle".into()], 0, |_, _| 0, |_| vec![0])
        .expect("fixture machine");
    KnowledgeBase::new(
        uav_box(),
        vec![
            real,
            composite(&view).with_name("uav_one_imu"),
            attacked(AttackStep::Rewrite(gps_firmware_rewrite())).with_name("uav_gps_hacked"),
            attacked(AttackStep::Rewire(gps_swap_rewiring())).with_name("uav_gps_swapped"),
            idle,
        ],
    )
    .expect("fixture knowledge base")
}

/// The UAV walkthrough bundled together.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub real: CompositeSystem,
    pub attacker_view: CompositeSystem,
    pub correspondence: Correspondence,
    pub kb: KnowledgeBase,
    pub battery: Vec<Test>,
    pub scripts: BTreeMap<String, AttackScript>,
}

pub fn uav_scenario() -> Scenario {
    Scenario {
        real: build_uav_real(),
        attacker_view: build_uav_attacker_view(),
        correspondence: uav_correspondence(),
        kb: uav_knowledge_base(),
        battery: full_battery(DEPTH),
        scripts: uav_scripts().into_iter().map(|s| (s.name.clone(), s)).collect(),
    }
}
