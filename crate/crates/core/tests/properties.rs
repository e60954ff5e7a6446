use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use wdsec::fincat::{examples, validate_category, FinCategory};
use wdsec::moore::{MachineHom, MooreMachine};
use wdsec::oracle::{bisimilar, find_distinguishing_word, trace_equivalent};
use wdsec::probes::{compare_outcomes, run_test, transport, yoneda_filter, KnowledgeBase, MachineOracle, Test};
use wdsec::random::{random_machine, rng};
use wdsec::wiring::BoxShape;

fn shape() -> BoxShape {
    BoxShape::binary("X", &["a", "b"], &["y"])
}

fn machine(seed: u64) -> MooreMachine {
    random_machine(&mut rng(seed), &shape(), &format!("m{seed}"))
}

/// The same machine with its states shuffled; `state_map` takes old to new.
fn permuted(m: &MooreMachine, seed: u64) -> (MooreMachine, Vec<usize>) {
    let n = m.num_states();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng(seed));
    let mut inv = vec![0; n];
    for (old, &new) in perm.iter().enumerate() {
        inv[new] = old;
    }
    let space = m.shape().input_space();
    let p = MooreMachine::from_fn(
        format!("{}'", m.name()),
        m.shape().clone(),
        (0..n).map(|s| format!("p{s}")).collect(),
        perm[m.init()],
        |s, x| perm[m.next(inv[s], space.encode(x))],
        |s| m.output(inv[s]).to_vec(),
    )
    .unwrap();
    (p, perm)
}

/// `m` with an unobservable toggle bit; `state_map` forgets the bit.
fn doubled(m: &MooreMachine) -> (MooreMachine, Vec<usize>) {
    let space = m.shape().input_space();
    let d = MooreMachine::from_fn(
        format!("{}x2", m.name()),
        m.shape().clone(),
        m.states().iter().flat_map(|s| [format!("{s}.0"), format!("{s}.1")]).collect(),
        2 * m.init(),
        |s, x| 2 * m.next(s / 2, space.encode(x)) + ((s % 2) ^ x[0]),
        |s| m.output(s / 2).to_vec(),
    )
    .unwrap();
    (d, (0..2 * m.num_states()).map(|s| s / 2).collect())
}

fn tests() -> Vec<Test> {
    vec![
        Test::trace_set(4),
        Test::state_set(),
        Test::terminal(),
        Test::output_image(2),
        Test::output_image(3),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isomorphic_machines_pass_every_test(seed in any::<u64>()) {
        let m = machine(seed);
        let (p, perm) = permuted(&m, seed ^ 1);
        let iso = MachineHom::new(m.clone(), p.clone(), perm).unwrap();
        for t in tests() {
            let (a, b) = (run_test(&t, &m), run_test(&t, &p));
            prop_assert!(compare_outcomes(&t, &a, &b).unwrap().agree, "{}", t.name);
            let moved = transport(&t, &iso, &a).unwrap();
            prop_assert!(compare_outcomes(&t, &moved, &b).unwrap().agree);
        }
    }

    #[test]
    fn transport_is_functorial(seed in any::<u64>()) {
        let m = machine(seed);
        let (d, to_m) = doubled(&m);
        let (p, perm) = permuted(&m, seed ^ 2);
        let h1 = MachineHom::new(d.clone(), m.clone(), to_m).unwrap();
        let h2 = MachineHom::new(m.clone(), p, perm).unwrap();
        let both = h1.then(&h2).unwrap();
        for t in tests() {
            let o = run_test(&t, &d);
            prop_assert_eq!(transport(&t, &MachineHom::identity(&d), &o).unwrap(), o.clone());
            let stepwise = transport(&t, &h2, &transport(&t, &h1, &o).unwrap()).unwrap();
            prop_assert_eq!(transport(&t, &both, &o).unwrap(), stepwise);
        }
    }

    #[test]
    fn homs_preserve_traces(seed in any::<u64>()) {
        let m = machine(seed);
        let (d, _) = doubled(&m);
        prop_assert!(trace_equivalent(&d, &m, 6).unwrap());
        prop_assert!(bisimilar(&d, &m).unwrap());
    }

    #[test]
    fn bisimilarity_implies_trace_equivalence(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (machine(a), machine(b));
        let bisim = bisimilar(&x, &y).unwrap();
        for k in 0..=6 {
            let eq = trace_equivalent(&x, &y, k).unwrap();
            if bisim {
                prop_assert!(eq);
            }
            let w = find_distinguishing_word(&x, &y, k).unwrap();
            prop_assert_eq!(w.is_none(), eq);
            if let Some(w) = w {
                prop_assert!(w.len() <= k);
                prop_assert_ne!(x.run(&w).unwrap(), y.run(&w).unwrap());
            }
        }
    }

    #[test]
    fn adding_tests_never_adds_candidates(seed in any::<u64>(), picks in prop::collection::vec(0usize..5, 0..4), extra in 0usize..5) {
        let mut r = rng(seed);
        let mut entries: Vec<MooreMachine> = (0..4).map(|i| machine(seed.wrapping_add(i))).collect();
        entries.dedup_by(|a, b| a.name() == b.name());
        let kb = KnowledgeBase::new(shape(), entries.clone()).unwrap();
        let target = MachineOracle::new(entries[r.gen_range(0..entries.len())].clone());
        let all = tests();
        let battery: Vec<Test> = picks.iter().map(|&i| all[i].clone()).collect();
        let before = yoneda_filter(&kb, &battery, &target);
        let mut bigger = battery.clone();
        bigger.push(all[extra].clone());
        let after = yoneda_filter(&kb, &bigger, &target);
        prop_assert!(after.candidates.iter().all(|c| before.candidates.contains(c)));
        let mut with_terminal = battery.clone();
        with_terminal.push(Test::terminal());
        prop_assert_eq!(yoneda_filter(&kb, &with_terminal, &target).candidates, before.candidates);
    }

    #[test]
    fn category_validation_ignores_table_order(seed in any::<u64>()) {
        let mut cats: Vec<FinCategory> = examples::suite().into_iter().map(|(_, c, _)| c).collect();
        cats.push(examples::truncated_monoid());
        let mut r = rng(seed);
        for cat in cats {
            let report = validate_category(&cat);
            prop_assert_eq!(validate_category(&cat), report.clone());
            let mut shuffled = cat.clone();
            shuffled.objects.shuffle(&mut r);
            shuffled.morphisms.shuffle(&mut r);
            prop_assert_eq!(validate_category(&shuffled), report);
        }
    }
}
