//! Tests (functors from machines to finite sets), knowledge bases and the
//! learning filter.
//!
//! The attacker never reads the target machine. It only sees outcomes
//! returned by a [`TargetOracle`], and compares them with outcomes of the
//! same tests run on the machines it already knows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::attacks::CompositeSystem;
use crate::moore::{MachineHom, MooreError, MooreMachine};
use crate::oracle::words;
use crate::wiring::BoxShape;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbeError {
    #[error("outcome of `{found}` compared under test `{expected}`")]
    TestMismatch { expected: String, found: String },
    #[error("knowledge base entry `{0}` does not fit the common box")]
    EntryBox(String),
    #[error("knowledge base lists `{0}` twice")]
    DuplicateEntry(String),
    #[error("hypothesis `{0}` does not compose to the target's box")]
    HypothesisBox(String),
    #[error("state `{0}` is not a state of the homomorphism's source")]
    UnknownState(String),
    #[error(transparent)]
    Moore(#[from] MooreError),
}

/// What a test observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    /// All `(input word, output word)` pairs of length `k` from the initial
    /// state.
    TraceSet(usize),
    /// The declared state set.
    StateSet,
    /// The singleton `{*}`.
    Terminal,
    /// The outputs reachable at step `t`.
    OutputImage(usize),
}

/// When two outcomes count as isomorphic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    /// Identical canonical values.
    Equality,
    /// Equal cardinality: isomorphic as bare finite sets.
    Cardinality,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Test {
    pub name: String,
    pub kind: TestKind,
    pub comparator: Comparator,
}

impl Test {
    pub fn new(name: impl Into<String>, kind: TestKind, comparator: Comparator) -> Self {
        Test {
            name: name.into(),
            kind,
            comparator,
        }
    }

    pub fn trace_set(depth: usize) -> Self {
        Test::new(format!("trace{depth}"), TestKind::TraceSet(depth), Comparator::Equality)
    }

    pub fn state_set() -> Self {
        Test::new("states", TestKind::StateSet, Comparator::Cardinality)
    }

    pub fn terminal() -> Self {
        Test::new("terminal", TestKind::Terminal, Comparator::Equality)
    }

    pub fn output_image(step: usize) -> Self {
        Test::new(format!("image{step}"), TestKind::OutputImage(step), Comparator::Equality)
    }
}

/// `{TraceSet(depth), StateSet}`.
pub fn full_battery(depth: usize) -> Vec<Test> {
    vec![Test::trace_set(depth), Test::state_set()]
}

/// A test outcome: a finite set, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub test: String,
    pub value: Vec<String>,
}

impl Outcome {
    pub fn new(test: impl Into<String>, value: impl IntoIterator<Item = String>) -> Self {
        let set: BTreeSet<String> = value.into_iter().collect();
        Outcome {
            test: test.into(),
            value: set.into_iter().collect(),
        }
    }
}

fn render_word(shape: &BoxShape, word: &[crate::Tuple], outputs: bool) -> String {
    let parts: Vec<String> = word
        .iter()
        .map(|t| {
            if outputs {
                shape.render_outputs(t)
            } else {
                shape.render_inputs(t)
            }
        })
        .collect();
    format!("[{}]", parts.join(","))
}

/// Probes a machine.
pub fn run_test(t: &Test, m: &MooreMachine) -> Outcome {
    let shape = m.shape();
    match t.kind {
        TestKind::TraceSet(depth) => Outcome::new(
            &t.name,
            words(&shape.input_space(), depth).into_iter().map(|w| {
                let out = m.run(&w).expect("enumerated words are well typed");
                format!("{}->{}", render_word(shape, &w, false), render_word(shape, &out, true))
            }),
        ),
        TestKind::StateSet => Outcome::new(&t.name, m.states().iter().cloned()),
        TestKind::Terminal => Outcome::new(&t.name, ["*".to_string()]),
        TestKind::OutputImage(step) => {
            let mut layer = BTreeSet::from([m.init()]);
            for _ in 0..step {
                layer = layer
                    .iter()
                    .flat_map(|&s| (0..m.num_inputs()).map(move |x| m.next(s, x)))
                    .collect();
            }
            Outcome::new(&t.name, layer.iter().map(|&s| shape.render_outputs(m.output(s))))
        }
    }
}

/// The action of a test on a homomorphism: carries an outcome of the
/// source machine to an outcome of the target.
pub fn transport(t: &Test, hom: &MachineHom, outcome: &Outcome) -> Result<Outcome, ProbeError> {
    match t.kind {
        TestKind::StateSet => {
            let image = outcome
                .value
                .iter()
                .map(|label| {
                    let s = hom
                        .source()
                        .state_index(label)
                        .ok_or_else(|| ProbeError::UnknownState(label.clone()))?;
                    Ok(hom.target().states()[hom.state_map()[s]].clone())
                })
                .collect::<Result<Vec<_>, ProbeError>>()?;
            Ok(Outcome::new(&outcome.test, image))
        }
        TestKind::TraceSet(_) | TestKind::OutputImage(_) | TestKind::Terminal => Ok(outcome.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub agree: bool,
    /// Least element in the symmetric difference, for `Equality` mismatches.
    pub witness: Option<String>,
}

/// Compares two outcomes of `t` with its comparator.
pub fn compare_outcomes(t: &Test, a: &Outcome, b: &Outcome) -> Result<Comparison, ProbeError> {
    for o in [a, b] {
        if o.test != t.name {
            return Err(ProbeError::TestMismatch {
                expected: t.name.clone(),
                found: o.test.clone(),
            });
        }
    }
    Ok(match t.comparator {
        Comparator::Cardinality => Comparison {
            agree: a.value.len() == b.value.len(),
            witness: None,
        },
        Comparator::Equality => {
            let sa: BTreeSet<&String> = a.value.iter().collect();
            let sb: BTreeSet<&String> = b.value.iter().collect();
            let witness = sa.symmetric_difference(&sb).min().map(|s| s.to_string());
            Comparison {
                agree: witness.is_none(),
                witness,
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle cannot answer `{test}`: {reason}")]
pub struct QueryError {
    pub test: String,
    pub reason: String,
}

/// Black-box access to a target system: its box, and outcomes of tests.
pub trait TargetOracle {
    fn interface(&self) -> &BoxShape;
    fn query(&self, test: &Test) -> Result<Outcome, QueryError>;
}

/// An oracle backed by a machine the caller cannot reach through it.
#[derive(Debug, Clone)]
pub struct MachineOracle {
    machine: MooreMachine,
}

impl MachineOracle {
    pub fn new(machine: MooreMachine) -> Self {
        MachineOracle { machine }
    }
}

impl TargetOracle for MachineOracle {
    fn interface(&self) -> &BoxShape {
        self.machine.shape()
    }

    fn query(&self, test: &Test) -> Result<Outcome, QueryError> {
        Ok(run_test(test, &self.machine))
    }
}

/// Machines the attacker knows, all over one box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    shape: BoxShape,
    entries: Vec<MooreMachine>,
}

impl KnowledgeBase {
    pub fn new(shape: BoxShape, entries: Vec<MooreMachine>) -> Result<Self, ProbeError> {
        let mut names = BTreeSet::new();
        for e in &entries {
            if !e.shape().same_interface(&shape) {
                return Err(ProbeError::EntryBox(e.name().to_string()));
            }
            if !names.insert(e.name().to_string()) {
                return Err(ProbeError::DuplicateEntry(e.name().to_string()));
            }
        }
        Ok(KnowledgeBase { shape, entries })
    }

    pub fn shape(&self) -> &BoxShape {
        &self.shape
    }

    pub fn entries(&self) -> &[MooreMachine] {
        &self.entries
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name().to_string()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Exact,
    Ambiguous,
    Unknown,
}

impl Classification {
    pub fn of_count(n: usize) -> Self {
        match n {
            0 => Classification::Unknown,
            1 => Classification::Exact,
            _ => Classification::Ambiguous,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Exact => "exact",
            Classification::Ambiguous => "ambiguous",
            Classification::Unknown => "unknown",
        })
    }
}

/// Surviving candidates and the full agreement matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnResult {
    pub candidates: Vec<String>,
    pub classification: Classification,
    pub entries: Vec<String>,
    pub tests: Vec<String>,
    /// `matrix[entry][test]`; `None` when the oracle could not answer the test.
    pub matrix: Vec<Vec<Option<bool>>>,
    /// Witness from the first failing test, per eliminated entry.
    pub witnesses: BTreeMap<String, String>,
    /// Tests the oracle failed on, with the reason.
    pub incomplete: Vec<(String, String)>,
}

impl LearnResult {
    fn assemble(
        entries: Vec<String>,
        tests: Vec<String>,
        matrix: Vec<Vec<Option<bool>>>,
        witnesses: BTreeMap<String, String>,
        incomplete: Vec<(String, String)>,
    ) -> Self {
        let candidates: Vec<String> = entries
            .iter()
            .zip(&matrix)
            .filter(|(_, row)| row.iter().all(|v| *v != Some(false)))
            .map(|(e, _)| e.clone())
            .collect();
        LearnResult {
            classification: Classification::of_count(candidates.len()),
            candidates,
            entries,
            tests,
            matrix,
            witnesses,
            incomplete,
        }
    }
}

/// Keeps the knowledge-base entries whose outcomes agree with the target's
/// on every test of the battery.
pub fn yoneda_filter(kb: &KnowledgeBase, battery: &[Test], oracle: &dyn TargetOracle) -> LearnResult {
    let mut incomplete = vec![];
    let targets: Vec<Option<Outcome>> = battery
        .iter()
        .map(|t| match oracle.query(t) {
            Ok(o) => Some(o),
            Err(e) => {
                incomplete.push((t.name.clone(), e.reason));
                None
            }
        })
        .collect();
    let mut witnesses = BTreeMap::new();
    let matrix = kb
        .entries
        .iter()
        .map(|entry| {
            battery
                .iter()
                .zip(&targets)
                .map(|(t, target)| {
                    let target = target.as_ref()?;
                    let cmp = compare_outcomes(t, &run_test(t, entry), target).ok()?;
                    if let Some(w) = cmp.witness.filter(|_| !cmp.agree) {
                        witnesses.entry(entry.name().to_string()).or_insert(format!("{}: {w}", t.name));
                    } else if !cmp.agree {
                        witnesses
                            .entry(entry.name().to_string())
                            .or_insert(format!("{}: cardinality differs", t.name));
                    }
                    Some(cmp.agree)
                })
                .collect()
        })
        .collect();
    LearnResult::assemble(
        kb.names(),
        battery.iter().map(|t| t.name.clone()).collect(),
        matrix,
        witnesses,
        incomplete,
    )
}

/// Keeps the candidate architectures whose composite behavior agrees with the
/// target on `TraceSet(depth)`.
pub fn architecture_probe(
    oracle: &dyn TargetOracle,
    hypotheses: &[(String, CompositeSystem)],
    depth: usize,
) -> Result<LearnResult, ProbeError> {
    let test = Test::trace_set(depth);
    let mut composites = Vec::with_capacity(hypotheses.len());
    for (name, sys) in hypotheses {
        let m = sys.composite()?;
        if !m.shape().same_interface(oracle.interface()) {
            return Err(ProbeError::HypothesisBox(name.clone()));
        }
        composites.push(m);
    }
    let mut incomplete = vec![];
    let target = match oracle.query(&test) {
        Ok(o) => Some(o),
        Err(e) => {
            incomplete.push((test.name.clone(), e.reason));
            None
        }
    };
    let mut witnesses = BTreeMap::new();
    let mut matrix = Vec::with_capacity(hypotheses.len());
    for ((name, _), m) in hypotheses.iter().zip(&composites) {
        let verdict = match &target {
            None => None,
            Some(target) => {
                let cmp = compare_outcomes(&test, &run_test(&test, m), target)?;
                if let Some(w) = cmp.witness {
                    witnesses.insert(name.clone(), format!("{}: {w}", test.name));
                }
                Some(cmp.agree)
            }
        };
        matrix.push(vec![verdict]);
    }
    Ok(LearnResult::assemble(
        hypotheses.iter().map(|(n, _)| n.clone()).collect(),
        vec![test.name],
        matrix,
        witnesses,
        incomplete,
    ))
}
