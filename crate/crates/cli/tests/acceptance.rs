//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use wdsec::attacks::{apply_rewrite, apply_script, transport_script, AttackScript, AttackStep, CompositeSystem, RewriteMode, RewriteStep, Target};
use wdsec::fincat::{examples, hom_functor, naturality_failure, yoneda_check, yoneda_inverse, FinCategory, FinSetFunctor};
use wdsec::moore::MooreMachine;
use wdsec::oracle::{find_distinguishing_word, stagewise_simulate, trace_equivalent, words};
use wdsec::probes::{yoneda_filter, Classification, KnowledgeBase, MachineOracle, Test};
use wdsec::random::{check_law, check_laws, instances, Law, MAX_BOXES, MAX_STATES};
use wdsec::scenarios::*;
use wdsec::wiring::{compose, eval_equal, identity_on};
use wdsec_cli::schema::{load_fincat, load_scenario, load_system};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn e(x: impl std::fmt::Display) -> String {
    x.to_string()
}

fn functor_laws() -> Outcome {
    let insts = instances(0, 100);
    for (i, inst) in insts.iter().enumerate() {
        check(inst.f.inner().len() <= MAX_BOXES, || format!("instance {i}: too many boxes"))?;
        for m in &inst.machines {
            check(m.num_states() <= MAX_STATES, || format!("instance {i}: {} states", m.num_states()))?;
            let binary = m.shape().inputs().iter().chain(m.shape().outputs()).all(|p| p.alphabet.len() == 2);
            check(binary, || format!("instance {i}: non-binary port"))?;
        }
    }
    let laws = [Law::Identity, Law::UnitComposition, Law::Composition];
    let r = check_laws(0, 100, 6, &laws).map_err(e)?;
    check(r.passed(), || format!("failures: {:?}", r.failures))?;
    Ok(format!("{} laws x {} instances, seed 0, depth 6, 0 failures", laws.len(), r.count))
}

fn category_laws() -> Outcome {
    let ws = fixture_wirings();
    let mut failures = vec![];
    for (n, w) in &ws {
        let left = compose(&identity_on(w.outer()).map_err(e)?, w).map_err(e)?;
        let right = compose(w, &identity_on(w.inner()).map_err(e)?).map_err(e)?;
        if !(eval_equal(&left, w).map_err(e)? && eval_equal(&right, w).map_err(e)?) {
            failures.push(format!("identity on {n}"));
        }
    }
    let mut triples = 0;
    for (nf, f) in &ws {
        for (ng, g) in &ws {
            let Ok(gf) = compose(g, f) else { continue };
            for (nh, h) in &ws {
                let Ok(h_gf) = compose(h, &gf) else { continue };
                let hg_f = compose(&compose(h, g).map_err(e)?, f).map_err(e)?;
                triples += 1;
                if !eval_equal(&h_gf, &hg_f).map_err(e)? {
                    failures.push(format!("{nh} ∘ {ng} ∘ {nf}"));
                }
            }
        }
    }
    check(failures.is_empty(), || failures.join(", "))?;
    check(triples > 0, || "no composable triples".into())?;
    Ok(format!("{} wirings, {triples} composable triples, 0 failures", ws.len()))
}

/// Counts natural transformations `Hom(a, -) ⇒ f` by trying every family
/// of functions.
fn brute_force_nat_count(cat: &FinCategory, a: &str, f: &FinSetFunctor) -> Option<usize> {
    let h = hom_functor(cat, a).ok()?;
    let slots: Vec<(String, String)> = cat
        .objects
        .iter()
        .flat_map(|o| h.set(o).iter().map(move |x| (o.clone(), x.clone())))
        .collect();
    let total: usize = slots.iter().map(|(o, _)| f.set(o).len()).product();
    if total > 1 << 16 {
        return None;
    }
    let mut count = 0;
    for mut code in 0..total {
        let mut components: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (o, x) in &slots {
            let set = f.set(o);
            components.entry(o.clone()).or_default().insert(x.clone(), set[code % set.len()].clone());
            code /= set.len();
        }
        let natural = cat.morphisms.iter().all(|m| {
            h.set(&m.source).iter().all(|x| {
                let hx = h.apply(&m.id, x).unwrap();
                f.apply(&m.id, &components[&m.source][x]) == Some(components[&m.target][hx].as_str())
            })
        });
        count += natural as usize;
    }
    Some(count)
}

fn yoneda() -> Outcome {
    let suite = examples::suite();
    check(suite.len() >= 5, || format!("only {} categories", suite.len()))?;
    let mut checks = 0;
    let mut brute = 0;
    for (name, cat, functors) in &suite {
        let file = load_fincat(&fixtures().join(format!("fincat/{name}.json"))).map_err(e)?;
        check(&file.category == cat && &file.functors == functors, || format!("{name}: fixture differs from builder"))?;
        check(cat.objects.len() <= 4 && cat.morphisms.len() <= 20, || format!("{name}: too large"))?;
        check(functors.len() >= 3, || format!("{name}: {} functors", functors.len()))?;
        for f in functors {
            for a in &cat.objects {
                let w = yoneda_check(cat, a, f).map_err(|x| format!("{name}/{}/{a}: {x}", f.name))?;
                let fa: BTreeSet<&str> = f.set(a).iter().map(String::as_str).collect();
                check(w.nat_count() == fa.len(), || format!("{name}/{}/{a}: |Nat| {} vs |FA| {}", f.name, w.nat_count(), fa.len()))?;
                let id = cat.identity_of(a).unwrap();
                let mut images = BTreeSet::new();
                for (eta, x) in &w.pairs {
                    check(naturality_failure(cat, &hom_functor(cat, a).unwrap(), f, eta).is_none(), || format!("{name}: unnatural η"))?;
                    check(eta.at(a, id) == Some(x.as_str()), || format!("{name}: η_A(id_A) ≠ {x}"))?;
                    check(&yoneda_inverse(cat, a, f, x) == eta, || format!("{name}: inverse of {x} differs"))?;
                    images.insert(x.as_str());
                }
                check(images == fa, || format!("{name}/{}/{a}: η ↦ η_A(id_A) not onto F A", f.name))?;
                if let Some(n) = brute_force_nat_count(cat, a, f) {
                    check(n == fa.len(), || format!("{name}/{}/{a}: brute force found {n}", f.name))?;
                    brute += 1;
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{} categories, {checks} (object, functor) pairs, {brute} cross-checked by brute force", suite.len()))
}

fn learning() -> Outcome {
    let loaded = load_scenario(&fixtures().join("uav/scenario.json")).map_err(e)?;
    let s = &loaded.scenario;
    let target = s.real.composite().map_err(e)?;

    let exact = yoneda_filter(&s.kb, &s.battery, &MachineOracle::new(target.clone()));
    check(exact.classification == Classification::Exact && exact.candidates == ["uav_model"], || {
        format!("(a) {} {:?}", exact.classification, exact.candidates)
    })?;

    let absent = "uav_gps_swapped";
    let swapped = s.kb.entries().iter().find(|m| m.name() == absent).cloned().ok_or("no swapped entry")?;
    let rest: Vec<MooreMachine> = s.kb.entries().iter().filter(|m| m.name() != absent).cloned().collect();
    for m in &rest {
        check(find_distinguishing_word(m, &swapped, DEPTH).map_err(e)?.is_some(), || format!("(b) {} is equivalent to the target", m.name()))?;
    }
    let kb = KnowledgeBase::new(s.kb.shape().clone(), rest).map_err(e)?;
    let unknown = yoneda_filter(&kb, &s.battery, &MachineOracle::new(swapped));
    check(unknown.classification == Classification::Unknown, || format!("(b) {}", unknown.classification))?;

    check(s.kb.entries().len() >= 3, || "(c) KB too small".into())?;
    let terminal = yoneda_filter(&s.kb, &[Test::terminal()], &MachineOracle::new(target));
    check(
        terminal.classification == Classification::Ambiguous && terminal.candidates == s.kb.names(),
        || format!("(c) {} {:?}", terminal.classification, terminal.candidates),
    )?;
    Ok(format!("exact / unknown / ambiguous ({} of {} entries)", terminal.candidates.len(), s.kb.entries().len()))
}

fn equivalence_despite_error() -> Outcome {
    let lib = load_system(&fixtures().join("uav/system.json")).map_err(e)?;
    let real = lib.system("uav_real").ok_or("no uav_real")?;
    let view = lib.system("uav_view").ok_or("no uav_view")?;
    let counts = (real.components().len(), view.components().len());
    check(counts == (6, 5), || format!("component counts {counts:?}"))?;
    check(lib.architecture("uav_real") != lib.architecture("uav_view"), || "architectures coincide".into())?;
    let eq = trace_equivalent(&real.composite().map_err(e)?, &view.composite().map_err(e)?, DEPTH).map_err(e)?;
    check(eq, || "not trace equivalent".into())?;
    Ok(format!("trace equivalent at depth {DEPTH}, components 6 vs 5"))
}

fn attack_transport() -> Outcome {
    let loaded = load_scenario(&fixtures().join("uav/scenario.json")).map_err(e)?;
    let s = &loaded.scenario;
    let script = &s.scripts["gps_combined"];
    let shape_ok = matches!(script.steps.as_slice(), [AttackStep::Rewrite(_), AttackStep::Rewire(_)]);
    check(shape_ok, || "combined script is not rewrite then rewire".into())?;
    let baseline = s.attacker_view.composite().map_err(e)?;
    let (view_attacked, _) = apply_script(&s.attacker_view, script).map_err(e)?;
    let va = view_attacked.composite().map_err(e)?;
    let w = find_distinguishing_word(&baseline, &va, DEPTH).map_err(e)?.ok_or("(i) no distinguishing word")?;
    check(w.len() <= DEPTH, || format!("(i) word of length {}", w.len()))?;

    let moved = transport_script(script, &s.attacker_view, &s.real, &s.correspondence).map_err(e)?;
    let (real_attacked, _) = apply_script(&s.real, &moved).map_err(e)?;
    let eq = trace_equivalent(&va, &real_attacked.composite().map_err(e)?, DEPTH).map_err(e)?;
    check(eq, || "(ii) transported attack differs".into())?;

    let swap = AttackStep::Rewire(gps_swap_rewiring());
    let (twice, _) = apply_script(&s.attacker_view, &AttackScript::new("double", vec![swap.clone(), swap])).map_err(e)?;
    check(trace_equivalent(&baseline, &twice.composite().map_err(e)?, DEPTH).map_err(e)?, || "(iii) double swap differs".into())?;
    Ok(format!("witness of length {}, transported equivalent, double swap restores", w.len()))
}

/// The homomorphism squares, checked directly on the tables.
fn hom_squares(source: &MooreMachine, target: &MooreMachine, map: &[usize]) -> Result<(), String> {
    check(map[source.init()] == target.init(), || "init".into())?;
    for s in 0..source.num_states() {
        check(source.output(s) == target.output(map[s]), || format!("readout at {s}"))?;
        for x in 0..source.num_inputs() {
            check(map[source.next(s, x)] == target.next(map[s], x), || format!("update at ({s}, {x})"))?;
        }
    }
    Ok(())
}

fn hom_witnesses() -> Outcome {
    let mut checked = 0;
    let systems = |g: MooreMachine| -> Result<Vec<CompositeSystem>, String> {
        let view = CompositeSystem::new(
            flattened(&sensor_wiring()),
            vec![imu("I"), g.clone(), fusion(), controller(), dynamics()],
        )
        .map_err(e)?;
        let real = CompositeSystem::new(
            flattened(&sensor_wiring_real()),
            vec![imu("IMU1"), imu("IMU2"), g, fusion_real(), controller(), dynamics()],
        )
        .map_err(e)?;
        let env = wrap_environment(&view).map_err(e)?;
        Ok(vec![view, real, env])
    };
    for extra in 1..=3 {
        for sys in systems(gps_shadowed(extra))? {
            let step = RewriteStep {
                target: Target::Name("G".into()),
                mode: RewriteMode::Hom(drop_shadow_bit(extra)),
            };
            let out = apply_rewrite(&sys, &step).map_err(e)?;
            let w = out.witness.ok_or("no witness")?;
            w.verify().map_err(e)?;
            let (pre, post) = (sys.composite().map_err(e)?, out.system.composite().map_err(e)?);
            check(w.source() == &pre && w.target() == &post, || format!("extra {extra}: witness endpoints"))?;
            hom_squares(&pre, &post, w.state_map()).map_err(|x| format!("extra {extra}: {x}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} hom-mode rewrites, all witnesses commute"))
}

fn stagewise() -> Outcome {
    let lib = load_system(&fixtures().join("uav/system.json")).map_err(e)?;
    let mut systems: Vec<(String, CompositeSystem)> =
        lib.system_names().iter().map(|n| (n.to_string(), lib.system(n).unwrap().clone())).collect();
    systems.push(("uav_real_gcs".into(), wrap_gcs(&build_uav_real()).map_err(e)?));
    let mut runs = 0;
    for (name, sys) in &systems {
        let m = sys.composite().map_err(e)?;
        let space = m.shape().input_space();
        for n in 0..=4 {
            for w in words(&space, n) {
                let direct = m.run(&w).map_err(e)?;
                let staged = stagewise_simulate(sys.wiring(), sys.components(), &w).map_err(e)?;
                check(direct == staged, || format!("{name}: mismatch on {w:?}"))?;
                runs += 1;
            }
        }
    }
    let insts = instances(0, 500);
    for (i, inst) in insts.iter().enumerate() {
        check(check_law(Law::Stagewise, inst, DEPTH).map_err(e)?, || format!("random instance {i}"))?;
    }
    Ok(format!("{} fixture systems ({runs} words), {} random instances", systems.len(), insts.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("functor laws on random networks", functor_laws),
        ("wiring category laws on fixtures", category_laws),
        ("Yoneda bijection on finite categories", yoneda),
        ("learning corner cases", learning),
        ("behavioral equivalence despite architecture error", equivalence_despite_error),
        ("attack effect and transport", attack_transport),
        ("hom-mode rewrite witnesses", hom_witnesses),
        ("stagewise simulation agrees with the algebra", stagewise),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut outcome = run();
        let took = t.elapsed();
        if i == 2 && outcome.is_ok() && took >= Duration::from_secs(10) {
            outcome = Err(format!("took {took:.2?}, limit 10s"));
        }
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    let total = start.elapsed();
    if total >= Duration::from_secs(60) {
        failed += 1;
        println!("FAIL total runtime {total:.2?} exceeds 60s");
    }
    println!("acceptance: {} of {} criteria passed in {total:.2?}", criteria.len() - failed.min(criteria.len()), criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
