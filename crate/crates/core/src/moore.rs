//! Moore machines over boxes and the wiring-diagram algebra they form.
//!
//! A [`MooreMachine`] inhabits a [`BoxShape`]: its inputs are tuples over the
//! box's input ports and its readout, which depends on the state only, is a
//! tuple over the output ports. [`apply_algebra`] is the action of the algebra
//! on a wiring: it builds the composite machine over the outer box from one
//! machine per inner box. [`lift_hom`] is its action on homomorphisms.
//!
//! Step convention: the output at step `t` is the readout of the state
//! reached after `t` inputs, read before the `t`-th input is consumed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::wiring::{BoxShape, TupleSpace, Wiring, WiringError};
use crate::{Tuple, Word};

/// Upper bound on composite state-space size.
pub const MAX_STATES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MooreError {
    #[error("invalid machine `{name}`: {report}")]
    Invalid { name: String, report: MachineReport },
    #[error(transparent)]
    Wiring(#[from] WiringError),
    #[error("state index {0} out of range")]
    State(usize),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("component {index} does not fit its box: {detail}")]
    Alignment { index: usize, detail: String },
    #[error("invalid homomorphism: {0}")]
    Hom(HomViolation),
    #[error("composite would have {0} states")]
    TooManyStates(usize),
}

/// One transition-table row in symbolic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateRow {
    pub state: String,
    pub input: Vec<String>,
    pub next: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadoutRow {
    pub state: String,
    pub output: Vec<String>,
}

/// A machine as written in a file: explicit symbolic tables, possibly
/// incomplete or ill-typed. [`validate_machine`] reports what is wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    pub name: String,
    pub shape: BoxShape,
    pub states: Vec<String>,
    pub init: String,
    pub update: Vec<UpdateRow>,
    pub readout: Vec<ReadoutRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineIssue {
    NoStates,
    DuplicateState(String),
    UnknownInit(String),
    UnknownState { table: &'static str, row: usize, state: String },
    Arity { table: &'static str, row: usize, expected: usize, found: usize },
    Symbol { table: &'static str, row: usize, port: String, symbol: String },
    DuplicateUpdate { state: String, input: Vec<String> },
    MissingUpdate { state: String, input: Vec<String> },
    DuplicateReadout(String),
    MissingReadout(String),
    /// Declared but not reachable from the initial state. Warning only.
    Unreachable(String),
}

impl fmt::Display for MachineIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineIssue::NoStates => write!(f, "no states declared"),
            MachineIssue::DuplicateState(s) => write!(f, "state `{s}` declared twice"),
            MachineIssue::UnknownInit(s) => write!(f, "initial state `{s}` is not declared"),
            MachineIssue::UnknownState { table, row, state } => {
                write!(f, "{table}[{row}]: unknown state `{state}`")
            }
            MachineIssue::Arity {
                table,
                row,
                expected,
                found,
            } => write!(f, "{table}[{row}]: {found} symbols, expected {expected}"),
            MachineIssue::Symbol {
                table,
                row,
                port,
                symbol,
            } => write!(f, "{table}[{row}]: symbol `{symbol}` not in the alphabet of `{port}`"),
            MachineIssue::DuplicateUpdate { state, input } => {
                write!(f, "update ({state}, {}) given twice", input.join("|"))
            }
            MachineIssue::MissingUpdate { state, input } => {
                write!(f, "update ({state}, {}) missing", input.join("|"))
            }
            MachineIssue::DuplicateReadout(s) => write!(f, "readout of `{s}` given twice"),
            MachineIssue::MissingReadout(s) => write!(f, "readout of `{s}` missing"),
            MachineIssue::Unreachable(s) => write!(f, "state `{s}` is unreachable"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MachineReport {
    pub errors: Vec<MachineIssue>,
    pub warnings: Vec<MachineIssue>,
}

impl MachineReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for MachineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.errors.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks a symbolic machine for totality, typing and reachability.
pub fn validate_machine(spec: &MachineSpec) -> MachineReport {
    let mut report = MachineReport::default();
    let shape = &spec.shape;
    if spec.states.is_empty() {
        report.errors.push(MachineIssue::NoStates);
    }
    let mut index = BTreeMap::new();
    for (i, s) in spec.states.iter().enumerate() {
        if index.insert(s.as_str(), i).is_some() {
            report.errors.push(MachineIssue::DuplicateState(s.clone()));
        }
    }
    if !spec.states.is_empty() && !index.contains_key(spec.init.as_str()) {
        report.errors.push(MachineIssue::UnknownInit(spec.init.clone()));
    }

    let in_space = shape.input_space();
    let mut seen_update: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut edges: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (row, r) in spec.update.iter().enumerate() {
        let from = index.get(r.state.as_str()).copied();
        let to = index.get(r.next.as_str()).copied();
        for (s, ok) in [(&r.state, from.is_some()), (&r.next, to.is_some())] {
            if !ok {
                report.errors.push(MachineIssue::UnknownState {
                    table: "update",
                    row,
                    state: s.clone(),
                });
            }
        }
        let tuple = typed_tuple(&mut report, "update", row, shape.inputs(), &r.input);
        if let (Some(from), Some(tuple)) = (from, tuple) {
            if seen_update.insert((from, in_space.encode(&tuple)), row).is_some() {
                report.errors.push(MachineIssue::DuplicateUpdate {
                    state: r.state.clone(),
                    input: r.input.clone(),
                });
            }
            if let Some(to) = to {
                edges.entry(from).or_default().insert(to);
            }
        }
    }
    for (s, name) in spec.states.iter().enumerate() {
        if index.get(name.as_str()) != Some(&s) {
            continue;
        }
        for x in in_space.iter() {
            if !seen_update.contains_key(&(s, in_space.encode(&x))) {
                report.errors.push(MachineIssue::MissingUpdate {
                    state: name.clone(),
                    input: x
                        .iter()
                        .zip(shape.inputs())
                        .map(|(&v, p)| p.alphabet[v].clone())
                        .collect(),
                });
            }
        }
    }

    let mut seen_readout = BTreeSet::new();
    for (row, r) in spec.readout.iter().enumerate() {
        match index.get(r.state.as_str()) {
            None => report.errors.push(MachineIssue::UnknownState {
                table: "readout",
                row,
                state: r.state.clone(),
            }),
            Some(&s) => {
                if !seen_readout.insert(s) {
                    report.errors.push(MachineIssue::DuplicateReadout(r.state.clone()));
                }
            }
        }
        typed_tuple(&mut report, "readout", row, shape.outputs(), &r.output);
    }
    for (s, name) in spec.states.iter().enumerate() {
        if index.get(name.as_str()) == Some(&s) && !seen_readout.contains(&s) {
            report.errors.push(MachineIssue::MissingReadout(name.clone()));
        }
    }

    if let Some(&init) = index.get(spec.init.as_str()) {
        let mut reached = BTreeSet::from([init]);
        let mut queue = VecDeque::from([init]);
        while let Some(s) = queue.pop_front() {
            for &t in edges.get(&s).into_iter().flatten() {
                if reached.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        for (s, name) in spec.states.iter().enumerate() {
            if index.get(name.as_str()) == Some(&s) && !reached.contains(&s) {
                report.warnings.push(MachineIssue::Unreachable(name.clone()));
            }
        }
    }
    report
}

fn typed_tuple(
    report: &mut MachineReport,
    table: &'static str,
    row: usize,
    ports: &[crate::wiring::Port],
    symbols: &[String],
) -> Option<Tuple> {
    if symbols.len() != ports.len() {
        report.errors.push(MachineIssue::Arity {
            table,
            row,
            expected: ports.len(),
            found: symbols.len(),
        });
        return None;
    }
    let mut out = Vec::with_capacity(ports.len());
    for (p, s) in ports.iter().zip(symbols) {
        match p.symbol_index(s) {
            Some(i) => out.push(i),
            None => {
                report.errors.push(MachineIssue::Symbol {
                    table,
                    row,
                    port: p.name.clone(),
                    symbol: s.clone(),
                });
                return None;
            }
        }
    }
    Some(out)
}

/// A finite, deterministic Moore machine inhabiting a box.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MooreMachine {
    name: String,
    shape: BoxShape,
    states: Vec<String>,
    init: usize,
    /// `update[s * inputs + x]`, `x` the mixed-radix index of the input tuple.
    update: Vec<usize>,
    readout: Vec<Tuple>,
}

impl MooreMachine {
    pub fn from_spec(spec: &MachineSpec) -> Result<Self, MooreError> {
        let report = validate_machine(spec);
        if !report.is_valid() {
            return Err(MooreError::Invalid {
                name: spec.name.clone(),
                report,
            });
        }
        let index: BTreeMap<&str, usize> = spec
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let in_space = spec.shape.input_space();
        let n_in = in_space.count();
        let mut update = vec![0; spec.states.len() * n_in];
        for r in &spec.update {
            let x = spec.shape.parse_inputs(&r.input)?;
            update[index[r.state.as_str()] * n_in + in_space.encode(&x)] = index[r.next.as_str()];
        }
        let mut readout = vec![vec![]; spec.states.len()];
        for r in &spec.readout {
            readout[index[r.state.as_str()]] =
                crate::wiring::parse_tuple(spec.shape.outputs(), &r.output)?;
        }
        Ok(MooreMachine {
            name: spec.name.clone(),
            shape: spec.shape.clone(),
            states: spec.states.clone(),
            init: index[spec.init.as_str()],
            update,
            readout,
        })
    }

    /// Builds a machine from index-level transition and readout functions.
    pub fn from_fn(
        name: impl Into<String>,
        shape: BoxShape,
        states: Vec<String>,
        init: usize,
        update: impl Fn(usize, &[usize]) -> usize,
        readout: impl Fn(usize) -> Tuple,
    ) -> Result<Self, MooreError> {
        let in_space = shape.input_space();
        let out_space = shape.output_space();
        if init >= states.len() {
            return Err(MooreError::State(init));
        }
        let mut table = Vec::with_capacity(states.len() * in_space.count());
        for s in 0..states.len() {
            for x in in_space.iter() {
                let next = update(s, &x);
                if next >= states.len() {
                    return Err(MooreError::State(next));
                }
                table.push(next);
            }
        }
        let outs = (0..states.len())
            .map(|s| {
                let o = readout(s);
                out_space.check(&o, shape.outputs())?;
                Ok(o)
            })
            .collect::<Result<Vec<_>, WiringError>>()?;
        let distinct: BTreeSet<&String> = states.iter().collect();
        if distinct.len() != states.len() {
            return Err(MooreError::Arity("duplicate state names".to_string()));
        }
        Ok(MooreMachine {
            name: name.into(),
            shape,
            states,
            init,
            update: table,
            readout: outs,
        })
    }

    pub fn to_spec(&self) -> MachineSpec {
        let in_space = self.shape.input_space();
        let mut update = Vec::with_capacity(self.update.len());
        for (s, state) in self.states.iter().enumerate() {
            for x in in_space.iter() {
                update.push(UpdateRow {
                    state: state.clone(),
                    input: symbols(self.shape.inputs(), &x),
                    next: self.states[self.next(s, in_space.encode(&x))].clone(),
                });
            }
        }
        MachineSpec {
            name: self.name.clone(),
            shape: self.shape.clone(),
            states: self.states.clone(),
            init: self.states[self.init].clone(),
            update,
            readout: self
                .states
                .iter()
                .zip(&self.readout)
                .map(|(s, o)| ReadoutRow {
                    state: s.clone(),
                    output: symbols(self.shape.outputs(), o),
                })
                .collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &BoxShape {
        &self.shape
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// Number of distinct input tuples.
    pub fn num_inputs(&self) -> usize {
        self.update.len() / self.states.len().max(1)
    }

    /// Transition by input-tuple index.
    pub fn next(&self, state: usize, input: usize) -> usize {
        self.update[state * self.num_inputs() + input]
    }

    pub fn output(&self, state: usize) -> &[usize] {
        &self.readout[state]
    }

    /// The raw transition table, `state * num_inputs + input`.
    pub fn update_table(&self) -> &[usize] {
        &self.update
    }

    pub fn readout_table(&self) -> &[Tuple] {
        &self.readout
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Renames states; the result is isomorphic to `self`.
    pub fn relabeled(&self, label: impl Fn(usize, &str) -> String) -> Result<Self, MooreError> {
        let states: Vec<String> = self.states.iter().enumerate().map(|(i, s)| label(i, s)).collect();
        let distinct: BTreeSet<&String> = states.iter().collect();
        if distinct.len() != states.len() {
            return Err(MooreError::Arity("relabeling is not injective".to_string()));
        }
        Ok(MooreMachine {
            states,
            ..self.clone()
        })
    }

    /// One step: `(update(s, x), readout(s))`.
    pub fn step(&self, state: usize, input: &[usize]) -> Result<(usize, Tuple), MooreError> {
        if state >= self.states.len() {
            return Err(MooreError::State(state));
        }
        let space = self.shape.input_space();
        space.check(input, self.shape.inputs())?;
        Ok((self.next(state, space.encode(input)), self.readout[state].clone()))
    }

    /// Runs from the initial state; one output per input.
    pub fn run(&self, word: &[Tuple]) -> Result<Word, MooreError> {
        let mut state = self.init;
        let mut out = Vec::with_capacity(word.len());
        for x in word {
            let (next, o) = self.step(state, x)?;
            out.push(o);
            state = next;
        }
        Ok(out)
    }

    /// States reachable from the initial state, in breadth-first order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut order = vec![self.init];
        seen[self.init] = true;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            for x in 0..self.num_inputs() {
                let t = self.next(s, x);
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        order
    }

    /// A stable textual rendering, used for fingerprints.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("machine {} over {}\ninit {}\n", self.name, self.shape.name(), self.states[self.init]);
        let in_space = self.shape.input_space();
        for (i, state) in self.states.iter().enumerate() {
            let _ = write!(s, "{state} / {} :", self.shape.render_outputs(&self.readout[i]));
            for x in 0..in_space.count() {
                let _ = write!(s, " {}", self.states[self.next(i, x)]);
            }
            s.push('\n');
        }
        s
    }
}

fn symbols(ports: &[crate::wiring::Port], tuple: &[usize]) -> Vec<String> {
    ports
        .iter()
        .zip(tuple)
        .map(|(p, &v)| p.alphabet[v].clone())
        .collect()
}

/// A system: a box together with a machine inhabiting it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    shape: BoxShape,
    machine: MooreMachine,
}

impl System {
    pub fn new(shape: BoxShape, machine: MooreMachine) -> Result<Self, MooreError> {
        if let Some((port, detail)) = shape.interface_mismatch(machine.shape()) {
            return Err(MooreError::Alignment {
                index: 0,
                detail: format!("{port}: {detail}"),
            });
        }
        Ok(System { shape, machine })
    }

    pub fn shape(&self) -> &BoxShape {
        &self.shape
    }

    pub fn machine(&self) -> &MooreMachine {
        &self.machine
    }
}

/// Which commuting square a candidate homomorphism breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomViolation {
    Shape(String),
    MapLength { expected: usize, found: usize },
    MapRange { state: String },
    Init { mapped: String, expected: String },
    Readout { state: String, image: String },
    Update { state: String, input: String, left: String, right: String },
}

impl fmt::Display for HomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomViolation::Shape(d) => write!(f, "box mismatch: {d}"),
            HomViolation::MapLength { expected, found } => {
                write!(f, "state map has {found} entries, expected {expected}")
            }
            HomViolation::MapRange { state } => write!(f, "state `{state}` maps out of range"),
            HomViolation::Init { mapped, expected } => {
                write!(f, "init maps to `{mapped}`, target init is `{expected}`")
            }
            HomViolation::Readout { state, image } => {
                write!(f, "readout differs between `{state}` and its image `{image}`")
            }
            HomViolation::Update {
                state,
                input,
                left,
                right,
            } => write!(
                f,
                "square fails at ({state}, {input}): map(update) = `{left}`, update(map) = `{right}`"
            ),
        }
    }
}

/// A morphism of machines over the same box: a state map preserving the
/// initial state, readout and transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineHom {
    source: MooreMachine,
    target: MooreMachine,
    state_map: Vec<usize>,
}

impl MachineHom {
    pub fn new(source: MooreMachine, target: MooreMachine, state_map: Vec<usize>) -> Result<Self, MooreError> {
        check_hom(&source, &target, &state_map).map_err(MooreError::Hom)?;
        Ok(MachineHom {
            source,
            target,
            state_map,
        })
    }

    /// Looks states up by label.
    pub fn from_labels(
        source: MooreMachine,
        target: MooreMachine,
        pairs: &[(&str, &str)],
    ) -> Result<Self, MooreError> {
        let mut map = vec![usize::MAX; source.num_states()];
        for (from, to) in pairs {
            let f = source.state_index(from).ok_or(MooreError::Hom(HomViolation::MapRange {
                state: from.to_string(),
            }))?;
            let t = target.state_index(to).ok_or(MooreError::Hom(HomViolation::MapRange {
                state: from.to_string(),
            }))?;
            map[f] = t;
        }
        MachineHom::new(source, target, map)
    }

    pub fn identity(m: &MooreMachine) -> Self {
        MachineHom {
            source: m.clone(),
            target: m.clone(),
            state_map: (0..m.num_states()).collect(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &MachineHom) -> Result<MachineHom, MooreError> {
        if next.source != self.target {
            return Err(MooreError::Hom(HomViolation::Shape(
                "homomorphisms are not composable".to_string(),
            )));
        }
        MachineHom::new(
            self.source.clone(),
            next.target.clone(),
            self.state_map.iter().map(|&s| next.state_map[s]).collect(),
        )
    }

    pub fn source(&self) -> &MooreMachine {
        &self.source
    }

    pub fn target(&self) -> &MooreMachine {
        &self.target
    }

    pub fn state_map(&self) -> &[usize] {
        &self.state_map
    }

    /// Re-checks every square; always `Ok` for values built through `new`.
    pub fn verify(&self) -> Result<(), HomViolation> {
        check_hom(&self.source, &self.target, &self.state_map)
    }
}

/// Checks the homomorphism conditions for a candidate state map.
pub fn check_hom(source: &MooreMachine, target: &MooreMachine, map: &[usize]) -> Result<(), HomViolation> {
    if let Some((port, detail)) = source.shape().interface_mismatch(target.shape()) {
        return Err(HomViolation::Shape(format!("{port}: {detail}")));
    }
    if map.len() != source.num_states() {
        return Err(HomViolation::MapLength {
            expected: source.num_states(),
            found: map.len(),
        });
    }
    if let Some(s) = map.iter().position(|&t| t >= target.num_states()) {
        return Err(HomViolation::MapRange {
            state: source.states[s].clone(),
        });
    }
    if map[source.init] != target.init {
        return Err(HomViolation::Init {
            mapped: target.states[map[source.init]].clone(),
            expected: target.states[target.init].clone(),
        });
    }
    for (s, &image) in map.iter().enumerate() {
        if source.output(s) != target.output(image) {
            return Err(HomViolation::Readout {
                state: source.states[s].clone(),
                image: target.states[image].clone(),
            });
        }
    }
    let in_space = source.shape().input_space();
    for s in 0..source.num_states() {
        for x in 0..source.num_inputs() {
            let left = map[source.next(s, x)];
            let right = target.next(map[s], x);
            if left != right {
                return Err(HomViolation::Update {
                    state: source.states[s].clone(),
                    input: source.shape().render_inputs(&in_space.decode(x)),
                    left: target.states[left].clone(),
                    right: target.states[right].clone(),
                });
            }
        }
    }
    Ok(())
}

fn check_alignment(w: &Wiring, shapes: &[&BoxShape]) -> Result<(), MooreError> {
    if shapes.len() != w.inner().len() {
        return Err(MooreError::Arity(format!(
            "{} machines for {} inner boxes",
            shapes.len(),
            w.inner().len()
        )));
    }
    for (i, (b, s)) in w.inner().iter().zip(shapes).enumerate() {
        if let Some((port, detail)) = b.interface_mismatch(s) {
            return Err(MooreError::Alignment {
                index: i,
                detail: format!("{port}: {detail}"),
            });
        }
    }
    Ok(())
}

/// The composite machine `Fw(S_1, …, S_n)` over the tensor of `w`'s outer
/// boxes.
///
/// States are the ordered product of component states, labelled
/// `(s_1,…,s_n)`. In a composite state the readout is `f_out` of the
/// component readouts, and an outer input `y` moves every component with
/// its share of `f_in(readouts, y)`.
pub fn apply_algebra(w: &Wiring, machines: &[MooreMachine]) -> Result<MooreMachine, MooreError> {
    check_alignment(w, &machines.iter().map(|m| m.shape()).collect::<Vec<_>>())?;
    let shape = BoxShape::tensor(w.outer())?;
    let sizes: Vec<usize> = machines.iter().map(|m| m.num_states()).collect();
    let total = sizes
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n).filter(|&t| t <= MAX_STATES))
        .ok_or(MooreError::TooManyStates(usize::MAX))?;
    let product = TupleSpace::new(sizes);
    let in_spaces: Vec<TupleSpace> = machines.iter().map(|m| m.shape().input_space()).collect();
    let outer_in = shape.input_space();

    let mut states = Vec::with_capacity(total);
    let mut update = Vec::with_capacity(total * outer_in.count());
    let mut readout = Vec::with_capacity(total);
    for s in 0..total {
        let parts = product.decode(s);
        states.push(format!(
            "({})",
            parts
                .iter()
                .zip(machines)
                .map(|(&p, m)| m.states()[p].as_str())
                .collect::<Vec<_>>()
                .join(",")
        ));
        let inner_outs: Tuple = parts
            .iter()
            .zip(machines)
            .flat_map(|(&p, m)| m.output(p).iter().copied())
            .collect();
        let (_, outs) = w.eval_unchecked(&inner_outs, &vec![0; outer_in.len()]);
        readout.push(outs);
        for y in outer_in.iter() {
            let (inner_ins, _) = w.eval_unchecked(&inner_outs, &y);
            let mut offset = 0;
            let next: Tuple = parts
                .iter()
                .zip(machines)
                .zip(&in_spaces)
                .map(|((&p, m), space)| {
                    let x = &inner_ins[offset..offset + space.len()];
                    offset += space.len();
                    m.next(p, space.encode(x))
                })
                .collect();
            update.push(product.encode(&next));
        }
    }
    let init = product.encode(&machines.iter().map(|m| m.init()).collect::<Vec<_>>());
    Ok(MooreMachine {
        name: format!(
            "[{}]",
            machines.iter().map(|m| m.name()).collect::<Vec<_>>().join("⊗")
        ),
        shape,
        states,
        init,
        update,
        readout,
    })
}

/// Lifts component homomorphisms `h_i : S_i → S'_i` to the composite
/// homomorphism `Fw(S_1, …, S_n) → Fw(S'_1, …, S'_n)`.
pub fn lift_hom(w: &Wiring, homs: &[MachineHom]) -> Result<MachineHom, MooreError> {
    for (i, h) in homs.iter().enumerate() {
        h.verify().map_err(|v| MooreError::Alignment {
            index: i,
            detail: v.to_string(),
        })?;
    }
    let sources: Vec<MooreMachine> = homs.iter().map(|h| h.source.clone()).collect();
    let targets: Vec<MooreMachine> = homs.iter().map(|h| h.target.clone()).collect();
    let source = apply_algebra(w, &sources)?;
    let target = apply_algebra(w, &targets)?;
    let from = TupleSpace::new(sources.iter().map(|m| m.num_states()).collect());
    let to = TupleSpace::new(targets.iter().map(|m| m.num_states()).collect());
    let state_map = (0..from.count())
        .map(|s| {
            let image: Tuple = from
                .decode(s)
                .iter()
                .zip(homs)
                .map(|(&p, h)| h.state_map[p])
                .collect();
            to.encode(&image)
        })
        .collect();
    MachineHom::new(source, target, state_map)
}

/// Checks that machine boxes line up with a wiring's inner boxes.
pub fn check_components(w: &Wiring, machines: &[MooreMachine]) -> Result<(), MooreError> {
    check_alignment(w, &machines.iter().map(|m| m.shape()).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiring::{identity_wiring, SourceExpr};

    fn delay() -> MooreMachine {
        MooreMachine::from_fn(
            "delay",
            BoxShape::binary("Z", &["x"], &["y"]),
            vec!["0".into(), "1".into()],
            0,
            |_, x| x[0],
            |s| vec![s],
        )
        .unwrap()
    }

    fn constant(v: usize) -> MooreMachine {
        MooreMachine::from_fn(
            "const",
            BoxShape::binary("Z", &["x"], &["y"]),
            vec!["k".into()],
            0,
            |_, _| 0,
            move |_| vec![v],
        )
        .unwrap()
    }

    #[test]
    fn constant_machine_steps_to_itself() {
        let m = constant(1);
        for x in 0..2 {
            assert_eq!(m.step(0, &[x]).unwrap(), (0, vec![1]));
        }
    }

    #[test]
    fn delay_step_reads_before_moving() {
        assert_eq!(delay().step(0, &[1]).unwrap(), (1, vec![0]));
    }

    #[test]
    fn out_of_alphabet_input_is_rejected() {
        let err = delay().step(0, &[2]).unwrap_err();
        assert!(matches!(err, MooreError::Wiring(WiringError::Symbol { .. })));
    }

    #[test]
    fn delay_runs() {
        let m = delay();
        assert_eq!(m.run(&[]).unwrap(), Vec::<Tuple>::new());
        assert_eq!(m.run(&[vec![1], vec![0], vec![1]]).unwrap(), vec![vec![0], vec![1], vec![0]]);
    }

    #[test]
    fn spec_roundtrip() {
        let m = delay();
        assert_eq!(MooreMachine::from_spec(&m.to_spec()).unwrap(), m);
        assert!(validate_machine(&constant(0).to_spec()).is_valid());
    }

    #[test]
    fn validation_catches_missing_rows_and_bad_symbols() {
        let shape = BoxShape::binary("X", &["a", "b"], &["o"]);
        let m = MooreMachine::from_fn("m", shape, vec!["s0".into(), "s1".into()], 0, |_, x| x[0], |s| vec![s]).unwrap();
        let mut spec = m.to_spec();
        spec.update.retain(|r| !(r.state == "s1" && r.input == ["0", "1"]));
        let report = validate_machine(&spec);
        assert_eq!(
            report.errors,
            vec![MachineIssue::MissingUpdate {
                state: "s1".into(),
                input: vec!["0".into(), "1".into()]
            }]
        );

        let mut spec = m.to_spec();
        spec.readout[0].output = vec!["2".into()];
        let report = validate_machine(&spec);
        assert!(matches!(report.errors[..], [MachineIssue::Symbol { table: "readout", .. }]));
        assert!(MooreMachine::from_spec(&spec).is_err());
    }

    #[test]
    fn unreachable_state_is_a_warning() {
        let shape = BoxShape::binary("X", &["a"], &["o"]);
        let m = MooreMachine::from_fn("m", shape, vec!["s0".into(), "dead".into()], 0, |_, _| 0, |_| vec![0]).unwrap();
        let report = validate_machine(&m.to_spec());
        assert!(report.is_valid());
        assert_eq!(report.warnings, vec![MachineIssue::Unreachable("dead".into())]);
    }

    #[test]
    fn identity_wiring_composite_is_state_bijective() {
        let m = delay();
        let c = apply_algebra(&identity_wiring(m.shape()), std::slice::from_ref(&m)).unwrap();
        assert_eq!(c.num_states(), m.num_states());
        assert_eq!(c.update_table(), m.update_table());
        assert_eq!(c.readout_table(), m.readout_table());
        assert_eq!(c.states(), &["(0)".to_string(), "(1)".to_string()]);
    }

    #[test]
    fn serial_delays_compose() {
        let z = BoxShape::binary("Z", &["x"], &["y"]);
        let w = Wiring::new(
            vec![z.clone(), z.clone()],
            vec![z.clone()],
            vec![vec![SourceExpr::outer_in(0, 0)], vec![SourceExpr::inner_out(0, 0)]],
            vec![vec![SourceExpr::inner_out(1, 0)]],
        )
        .unwrap();
        let c = apply_algebra(&w, &[delay(), delay()]).unwrap();
        assert_eq!(c.num_states(), 4);
        let out = c.run(&[vec![1], vec![0], vec![1], vec![1]]).unwrap();
        assert_eq!(out, vec![vec![0], vec![0], vec![1], vec![0]]);
    }

    #[test]
    fn hom_squares_are_checked() {
        let d = delay();
        // duplicate state 1 into two copies
        let big = MooreMachine::from_fn(
            "delay3",
            d.shape().clone(),
            vec!["0".into(), "1a".into(), "1b".into()],
            0,
            |s, x| if x[0] == 0 { 0 } else if s == 1 { 2 } else { 1 },
            |s| vec![usize::from(s != 0)],
        )
        .unwrap();
        let h = MachineHom::from_labels(big.clone(), d.clone(), &[("0", "0"), ("1a", "1"), ("1b", "1")]).unwrap();
        assert!(h.verify().is_ok());
        let bad = MachineHom::new(big, d.clone(), vec![0, 1, 0]).unwrap_err();
        assert!(matches!(bad, MooreError::Hom(HomViolation::Readout { .. })));
        let id = MachineHom::identity(&d);
        assert_eq!(h.then(&id).unwrap(), h);
    }

    #[test]
    fn lifting_identities_gives_identity() {
        let z = BoxShape::binary("Z", &["x"], &["y"]);
        let w = Wiring::new(
            vec![z.clone(), z.clone()],
            vec![z],
            vec![vec![SourceExpr::outer_in(0, 0)], vec![SourceExpr::inner_out(0, 0)]],
            vec![vec![SourceExpr::inner_out(1, 0)]],
        )
        .unwrap();
        let lifted = lift_hom(&w, &[MachineHom::identity(&delay()), MachineHom::identity(&delay())]).unwrap();
        assert_eq!(lifted.state_map(), &[0, 1, 2, 3]);
        assert_eq!(lifted.source(), lifted.target());
    }
}
