//! Seeded random wired networks and the algebra laws checked over them.
//!
//! An [`Instance`] is a wiring `f` from up to three random boxes into one
//! box, a random machine per inner box, a wiring `g` out of `f`'s outer box
//! and an input word for `f`. Everything is binary.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::moore::{apply_algebra, MooreError, MooreMachine};
use crate::oracle::{stagewise_simulate, trace_equivalent, EquivError};
use crate::wiring::{compose, identity_on, identity_wiring, BoxShape, SourceExpr, SourceRef, Wiring};
use crate::Word;

pub const MAX_BOXES: usize = 3;
pub const MAX_STATES: usize = 3;
pub const MAX_PORTS: usize = 2;
pub const MAX_WORD: usize = 6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn port_names(prefix: char, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn random_box(rng: &mut impl Rng, name: &str) -> BoxShape {
    let ins = port_names('x', rng.gen_range(1..=MAX_PORTS));
    let outs = port_names('y', rng.gen_range(1..=MAX_PORTS));
    let ins: Vec<&str> = ins.iter().map(String::as_str).collect();
    let outs: Vec<&str> = outs.iter().map(String::as_str).collect();
    BoxShape::binary(name, &ins, &outs)
}

pub fn random_machine(rng: &mut impl Rng, shape: &BoxShape, name: &str) -> MooreMachine {
    let n = rng.gen_range(1..=MAX_STATES);
    let inputs = shape.input_space().count();
    let update: Vec<usize> = (0..n * inputs).map(|_| rng.gen_range(0..n)).collect();
    let readout: Vec<Vec<usize>> = (0..n)
        .map(|_| shape.outputs().iter().map(|p| rng.gen_range(0..p.alphabet.len())).collect())
        .collect();
    let space = shape.input_space();
    MooreMachine::from_fn(
        name,
        shape.clone(),
        (0..n).map(|s| format!("s{s}")).collect(),
        rng.gen_range(0..n),
        |s, x| update[s * inputs + space.encode(x)],
        |s| readout[s].clone(),
    )
    .expect("random machines are well formed")
}

fn random_expr(rng: &mut impl Rng, refs: &[SourceRef]) -> SourceExpr {
    match rng.gen_range(0..6) {
        0 => SourceExpr::Const(rng.gen_range(0..2)),
        1 | 2 if !refs.is_empty() => {
            let k = rng.gen_range(1..=refs.len().min(2));
            let sources: Vec<SourceRef> = refs.choose_multiple(rng, k).copied().collect();
            let values = (0..1usize << k).map(|_| rng.gen_range(0..2)).collect();
            SourceExpr::Table { sources, values }
        }
        _ if !refs.is_empty() => SourceExpr::Ref(*refs.choose(rng).expect("non-empty")),
        _ => SourceExpr::Const(rng.gen_range(0..2)),
    }
}

/// A random wiring between the given boxes. Inner inputs may read outer
/// inputs and inner outputs; outer outputs read inner outputs only.
pub fn random_wiring(rng: &mut impl Rng, inner: Vec<BoxShape>, outer: Vec<BoxShape>) -> Wiring {
    let inner_outs: Vec<SourceRef> = inner
        .iter()
        .enumerate()
        .flat_map(|(b, x)| (0..x.outputs().len()).map(move |p| SourceRef::InnerOut { boxi: b, port: p }))
        .collect();
    let mut all = inner_outs.clone();
    all.extend(
        outer
            .iter()
            .enumerate()
            .flat_map(|(b, x)| (0..x.inputs().len()).map(move |p| SourceRef::OuterIn { boxi: b, port: p })),
    );
    let in_map = inner
        .iter()
        .map(|x| x.inputs().iter().map(|_| random_expr(rng, &all)).collect())
        .collect();
    let out_map = outer
        .iter()
        .map(|x| x.outputs().iter().map(|_| random_expr(rng, &inner_outs)).collect())
        .collect();
    Wiring::new(inner, outer, in_map, out_map).expect("random wirings are well typed")
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub f: Wiring,
    pub machines: Vec<MooreMachine>,
    /// A wiring whose only inner box is `f`'s outer box.
    pub g: Wiring,
    /// An input word for `f`'s outer box.
    pub word: Word,
}

pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let n = rng.gen_range(1..=MAX_BOXES);
    let inner: Vec<BoxShape> = (0..n).map(|i| random_box(rng, &format!("B{i}"))).collect();
    let machines = inner
        .iter()
        .map(|b| random_machine(rng, b, &format!("m{}", b.name())))
        .collect();
    let mid = random_box(rng, "M");
    let f = random_wiring(rng, inner, vec![mid.clone()]);
    let top = random_box(rng, "T");
    let g = random_wiring(rng, vec![mid.clone()], vec![top]);
    let len = rng.gen_range(0..=MAX_WORD);
    let space = mid.input_space();
    let word = (0..len).map(|_| space.decode(rng.gen_range(0..space.count()))).collect();
    Instance { f, machines, g, word }
}

/// `count` instances from `seed`.
pub fn instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut r = rng(seed);
    (0..count).map(|_| random_instance(&mut r)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    /// `F(id_X)(S) ≃ S` for every component.
    Identity,
    /// `F(f ∘ id) ≃ F(f) ≃ F(id ∘ f)`.
    UnitComposition,
    /// `F(g ∘ f)(S) ≃ F(g)(F(f)(S))`.
    Composition,
    /// `run(F(f)(S), w) = stagewise_simulate(f, S, w)`.
    Stagewise,
}

impl Law {
    pub const ALL: [Law; 4] = [Law::Identity, Law::UnitComposition, Law::Composition, Law::Stagewise];

    pub fn name(self) -> &'static str {
        match self {
            Law::Identity => "identity",
            Law::UnitComposition => "unit-composition",
            Law::Composition => "composition",
            Law::Stagewise => "stagewise",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LawError {
    #[error(transparent)]
    Moore(#[from] MooreError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error(transparent)]
    Wiring(#[from] crate::wiring::WiringError),
}

/// Checks one law on one instance. `depth` bounds trace comparisons.
pub fn check_law(law: Law, inst: &Instance, depth: usize) -> Result<bool, LawError> {
    let composite = apply_algebra(&inst.f, &inst.machines)?;
    Ok(match law {
        Law::Identity => {
            for m in &inst.machines {
                let lifted = apply_algebra(&identity_wiring(m.shape()), std::slice::from_ref(m))?;
                if !trace_equivalent(&lifted, m, depth)? {
                    return Ok(false);
                }
            }
            true
        }
        Law::UnitComposition => {
            let right = compose(&inst.f, &identity_on(inst.f.inner())?)?;
            let left = compose(&identity_on(inst.f.outer())?, &inst.f)?;
            trace_equivalent(&apply_algebra(&right, &inst.machines)?, &composite, depth)?
                && trace_equivalent(&apply_algebra(&left, &inst.machines)?, &composite, depth)?
        }
        Law::Composition => {
            let whole = apply_algebra(&compose(&inst.g, &inst.f)?, &inst.machines)?;
            let staged = apply_algebra(&inst.g, &[composite])?;
            trace_equivalent(&whole, &staged, depth)?
        }
        Law::Stagewise => composite.run(&inst.word)? == stagewise_simulate(&inst.f, &inst.machines, &inst.word)?,
    })
}

/// Per-law failure counts over a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub seed: u64,
    pub count: usize,
    pub depth: usize,
    /// `(law, failing instance indices)`.
    pub failures: Vec<(Law, Vec<usize>)>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.iter().all(|(_, f)| f.is_empty())
    }
}

pub fn check_laws(seed: u64, count: usize, depth: usize, laws: &[Law]) -> Result<LawReport, LawError> {
    let batch = instances(seed, count);
    let mut failures = vec![];
    for &law in laws {
        let mut bad = vec![];
        for (i, inst) in batch.iter().enumerate() {
            if !check_law(law, inst, depth)? {
                bad.push(i);
            }
        }
        failures.push((law, bad));
    }
    Ok(LawReport {
        seed,
        count,
        depth,
        failures,
    })
}
