//! File formats. Every document is JSON with a top-level `schema` field
//! naming one of [`SYSTEM`], [`MACHINE`], [`WIRING`], [`BATTERY`],
//! [`ATTACK`], [`SCENARIO`] or [`FINCAT`].
//!
//! Symbols of a multi-port tuple are joined with `|`, so `"0|1"` is the
//! tuple `(0, 1)`. Port references are written `Box.port`, or `#i.port` when
//! a box name occurs more than once in a wiring's list.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use wdsec::attacks::{AttackScript, AttackStep, CompositeSystem, RewireStep, RewriteMode, RewriteStep, Target};
use wdsec::fincat::{validate_category, validate_functor, FinCategory, FinSetFunctor, Morphism};
use wdsec::moore::{validate_machine, MachineHom, MachineSpec, MooreMachine, ReadoutRow, UpdateRow};
use wdsec::probes::{Comparator, KnowledgeBase, Test, TestKind};
use wdsec::scenarios::Scenario;
use wdsec::wiring::{
    identity_wiring, compose, tensor, Architecture, BoxShape, Port, SourceExpr, SourceRef, TupleSpace, Wiring,
};

pub const SYSTEM: &str = "system.v1";
pub const MACHINE: &str = "machine.v1";
pub const WIRING: &str = "wiring.v1";
pub const BATTERY: &str = "battery.v1";
pub const ATTACK: &str = "attack.v1";
pub const SCENARIO: &str = "scenario.v1";
pub const FINCAT: &str = "fincat.v1";

pub const SCHEMAS: [&str; 7] = [SYSTEM, MACHINE, WIRING, BATTERY, ATTACK, SCENARIO, FINCAT];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortDoc {
    pub name: String,
    pub alphabet: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDoc {
    pub name: String,
    pub inputs: Vec<PortDoc>,
    pub outputs: Vec<PortDoc>,
}

/// A box by name, or spelled out in place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoxRef {
    Name(String),
    Inline(BoxDoc),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateDoc {
    pub state: String,
    pub input: String,
    pub next: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutDoc {
    pub state: String,
    pub output: String,
}

/// A Moore machine with exhaustive tables. Carries `schema` only as a
/// standalone file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub name: String,
    #[serde(rename = "box")]
    pub shape: BoxRef,
    pub states: Vec<String>,
    pub init: String,
    pub update: Vec<UpdateDoc>,
    pub readout: Vec<ReadoutDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RefDoc {
    OuterIn(String),
    InnerOut(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowDoc {
    #[serde(rename = "in")]
    pub input: String,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDoc {
    pub sources: Vec<RefDoc>,
    pub rows: Vec<RowDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FromDoc {
    OuterIn(String),
    InnerOut(String),
    Const(String),
    Table(TableDoc),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub to: String,
    pub from: FromDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WiringDoc {
    pub name: String,
    pub inner: Vec<String>,
    pub outer: Vec<String>,
    pub in_map: Vec<MapDoc>,
    pub out_map: Vec<MapDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChildDoc {
    Leaf(String),
    Architecture(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureDoc {
    pub name: String,
    pub root: String,
    pub wiring: String,
    pub children: Vec<ChildDoc>,
}

/// How a system's wiring is assembled. `compose` lists wirings outermost
/// first: `[g, f]` is `g ∘ f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExprDoc {
    Ref(String),
    Identity(String),
    Tensor(Vec<ExprDoc>),
    Compose(Vec<ExprDoc>),
    Architecture(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntryDoc {
    pub name: String,
    pub wiring: ExprDoc,
    pub components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub schema: String,
    #[serde(default)]
    pub boxes: Vec<BoxDoc>,
    #[serde(default)]
    pub machines: Vec<MachineDoc>,
    #[serde(default)]
    pub wirings: Vec<WiringDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub architectures: Vec<ArchitectureDoc>,
    #[serde(default)]
    pub systems: Vec<SystemEntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WiringFileDoc {
    pub schema: String,
    pub boxes: Vec<BoxDoc>,
    pub wiring: WiringDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindDoc {
    TraceSet,
    StateSet,
    Terminal,
    OutputImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparatorDoc {
    Equality,
    Cardinality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator: Option<ComparatorDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryDoc {
    pub schema: String,
    pub tests: Vec<TestDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKindDoc {
    Rewrite,
    Rewire,
}

/// A homomorphism out of `source`, given as a state-label map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomDoc {
    pub source: String,
    pub target: String,
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PayloadDoc {
    Machine(String),
    Hom(HomDoc),
    Wiring(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    #[serde(rename = "type")]
    pub kind: StepKindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub payload: PayloadDoc,
}

/// Payload names refer to machines and wirings of the system file the
/// script is applied with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackDoc {
    pub schema: String,
    pub name: String,
    pub steps: Vec<StepDoc>,
}

/// Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema: String,
    pub system: String,
    pub real: String,
    pub attacker_view: String,
    pub correspondence: BTreeMap<String, Vec<String>>,
    pub kb: String,
    pub battery: String,
    pub scripts: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub id: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctorDoc {
    pub name: String,
    pub objects: BTreeMap<String, Vec<String>>,
    pub morphisms: BTreeMap<String, BTreeMap<String, String>>,
}

/// Composition rows are `[g, f, g∘f]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FincatDoc {
    pub schema: String,
    pub name: String,
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismDoc>,
    pub identity: BTreeMap<String, String>,
    pub composition: Vec<[String; 3]>,
    #[serde(default)]
    pub functors: Vec<FunctorDoc>,
}

/// A problem inside a well-formed document, anchored at a field path such
/// as `wirings[0].in_map[3].from.outer_in`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {message}")]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

fn ferr(field: impl Into<String>, message: impl ToString) -> FieldError {
    FieldError {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: schema `{found}`, expected {expected}")]
    Schema {
        path: String,
        found: String,
        expected: String,
    },
    #[error("{path}: {error}")]
    Field { path: String, error: FieldError },
}

impl LoadError {
    fn field(path: &Path, error: FieldError) -> Self {
        LoadError::Field {
            path: path.display().to_string(),
            error,
        }
    }
}

fn split_symbols(s: &str) -> Vec<String> {
    if s.is_empty() {
        vec![]
    } else {
        s.split('|').map(String::from).collect()
    }
}

fn join_symbols(symbols: &[String]) -> String {
    symbols.join("|")
}

pub fn resolve_box(doc: &BoxDoc, field: &str) -> Result<BoxShape, FieldError> {
    let ports = |ps: &[PortDoc]| ps.iter().map(|p| Port::new(p.name.clone(), &p.alphabet)).collect();
    BoxShape::new(doc.name.clone(), ports(&doc.inputs), ports(&doc.outputs)).map_err(|e| ferr(field, e))
}

pub fn box_doc(b: &BoxShape) -> BoxDoc {
    let ports = |ps: &[Port]| {
        ps.iter()
            .map(|p| PortDoc {
                name: p.name.clone(),
                alphabet: p.alphabet.clone(),
            })
            .collect()
    };
    BoxDoc {
        name: b.name().to_string(),
        inputs: ports(b.inputs()),
        outputs: ports(b.outputs()),
    }
}

pub fn resolve_machine(
    doc: &MachineDoc,
    boxes: &BTreeMap<String, BoxShape>,
    field: &str,
) -> Result<MooreMachine, FieldError> {
    let shape = match &doc.shape {
        BoxRef::Name(n) => boxes
            .get(n)
            .cloned()
            .ok_or_else(|| ferr(format!("{field}.box"), format!("undefined box `{n}`")))?,
        BoxRef::Inline(b) => resolve_box(b, &format!("{field}.box"))?,
    };
    let spec = MachineSpec {
        name: doc.name.clone(),
        shape,
        states: doc.states.clone(),
        init: doc.init.clone(),
        update: doc
            .update
            .iter()
            .map(|r| UpdateRow {
                state: r.state.clone(),
                input: split_symbols(&r.input),
                next: r.next.clone(),
            })
            .collect(),
        readout: doc
            .readout
            .iter()
            .map(|r| ReadoutRow {
                state: r.state.clone(),
                output: split_symbols(&r.output),
            })
            .collect(),
    };
    let report = validate_machine(&spec);
    if let Some(issue) = report.errors.first() {
        return Err(ferr(field, issue));
    }
    MooreMachine::from_spec(&spec).map_err(|e| ferr(field, e))
}

/// `inline` spells the box out, as standalone machine files do.
pub fn machine_doc(m: &MooreMachine, inline: bool) -> MachineDoc {
    let spec = m.to_spec();
    MachineDoc {
        schema: None,
        name: spec.name,
        shape: if inline {
            BoxRef::Inline(box_doc(&spec.shape))
        } else {
            BoxRef::Name(spec.shape.name().to_string())
        },
        states: spec.states,
        init: spec.init,
        update: spec
            .update
            .iter()
            .map(|r| UpdateDoc {
                state: r.state.clone(),
                input: join_symbols(&r.input),
                next: r.next.clone(),
            })
            .collect(),
        readout: spec
            .readout
            .iter()
            .map(|r| ReadoutDoc {
                state: r.state.clone(),
                output: join_symbols(&r.output),
            })
            .collect(),
    }
}

pub fn machine_file(m: &MooreMachine) -> MachineDoc {
    MachineDoc {
        schema: Some(MACHINE.to_string()),
        ..machine_doc(m, true)
    }
}

/// Finds `Box.port` or `#i.port` among `boxes`, splitting on the last `.`.
fn locate(spec: &str, boxes: &[BoxShape], outputs: bool) -> Result<(usize, usize), String> {
    let (b, p) = spec
        .rsplit_once('.')
        .ok_or_else(|| format!("expected `Box.port`, found \"{spec}\""))?;
    let bi = match b.strip_prefix('#') {
        Some(i) => {
            let i: usize = i.parse().map_err(|_| format!("bad box index \"{b}\""))?;
            if i >= boxes.len() {
                return Err(format!("box index {i} out of range ({} boxes)", boxes.len()));
            }
            i
        }
        None => {
            let hits: Vec<usize> = (0..boxes.len()).filter(|&i| boxes[i].name() == b).collect();
            match hits.as_slice() {
                [] => return Err(format!("unknown box \"{b}\"")),
                [i] => *i,
                _ => return Err(format!("box \"{b}\" occurs more than once; use `#i.{p}`")),
            }
        }
    };
    let ports = if outputs { boxes[bi].outputs() } else { boxes[bi].inputs() };
    let pi = ports
        .iter()
        .position(|q| q.name == p)
        .ok_or_else(|| format!("unknown port \"{p}\" on box {}", boxes[bi].name()))?;
    Ok((bi, pi))
}

fn label(boxes: &[BoxShape], bi: usize, port: &Port) -> String {
    let name = boxes[bi].name();
    if boxes.iter().filter(|b| b.name() == name).count() > 1 {
        format!("#{bi}.{}", port.name)
    } else {
        format!("{name}.{}", port.name)
    }
}

struct Sides<'a> {
    inner: &'a [BoxShape],
    outer: &'a [BoxShape],
    allow_outer: bool,
}

impl Sides<'_> {
    fn source(&self, r: &RefDoc, field: &str) -> Result<(SourceRef, Port), FieldError> {
        match r {
            RefDoc::OuterIn(s) => {
                let field = format!("{field}.outer_in");
                if !self.allow_outer {
                    return Err(ferr(field, "outer outputs may only read inner outputs"));
                }
                let (boxi, port) = locate(s, self.outer, false).map_err(|m| ferr(&field, m))?;
                Ok((SourceRef::OuterIn { boxi, port }, self.outer[boxi].inputs()[port].clone()))
            }
            RefDoc::InnerOut(s) => {
                let (boxi, port) = locate(s, self.inner, true).map_err(|m| ferr(format!("{field}.inner_out"), m))?;
                Ok((SourceRef::InnerOut { boxi, port }, self.inner[boxi].outputs()[port].clone()))
            }
        }
    }

    fn expr(&self, from: &FromDoc, target: &Port, field: &str) -> Result<SourceExpr, FieldError> {
        match from {
            FromDoc::OuterIn(s) => Ok(SourceExpr::Ref(self.source(&RefDoc::OuterIn(s.clone()), field)?.0)),
            FromDoc::InnerOut(s) => Ok(SourceExpr::Ref(self.source(&RefDoc::InnerOut(s.clone()), field)?.0)),
            FromDoc::Const(sym) => target.symbol_index(sym).map(SourceExpr::Const).ok_or_else(|| {
                ferr(
                    format!("{field}.const"),
                    format!("symbol \"{sym}\" not in the alphabet of {}", target.name),
                )
            }),
            FromDoc::Table(t) => {
                let field = format!("{field}.table");
                let mut sources = vec![];
                let mut ports = vec![];
                for (j, r) in t.sources.iter().enumerate() {
                    let (r, p) = self.source(r, &format!("{field}.sources[{j}]"))?;
                    sources.push(r);
                    ports.push(p);
                }
                let space = TupleSpace::of_ports(&ports);
                let mut values = vec![None; space.count()];
                for (k, row) in t.rows.iter().enumerate() {
                    let rf = format!("{field}.rows[{k}]");
                    let symbols = split_symbols(&row.input);
                    if symbols.len() != ports.len() {
                        return Err(ferr(
                            format!("{rf}.in"),
                            format!("{} symbols, expected {}", symbols.len(), ports.len()),
                        ));
                    }
                    let mut tuple = vec![];
                    for (sym, p) in symbols.iter().zip(&ports) {
                        let i = p.symbol_index(sym).ok_or_else(|| {
                            ferr(format!("{rf}.in"), format!("symbol \"{sym}\" not in the alphabet of {}", p.name))
                        })?;
                        tuple.push(i);
                    }
                    let v = target.symbol_index(&row.out).ok_or_else(|| {
                        ferr(
                            format!("{rf}.out"),
                            format!("symbol \"{}\" not in the alphabet of {}", row.out, target.name),
                        )
                    })?;
                    let slot = &mut values[space.encode(&tuple)];
                    if slot.is_some() {
                        return Err(ferr(format!("{rf}.in"), format!("row \"{}\" given twice", row.input)));
                    }
                    *slot = Some(v);
                }
                let values = values
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.ok_or_else(|| {
                            let missing: Vec<String> = space
                                .decode(i)
                                .iter()
                                .zip(&ports)
                                .map(|(&s, p)| p.alphabet[s].clone())
                                .collect();
                            ferr(format!("{field}.rows"), format!("no row for \"{}\"", missing.join("|")))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                Ok(SourceExpr::Table { sources, values })
            }
        }
    }

    /// One exhaustive port map: every port of `targets` exactly once.
    fn map(&self, entries: &[MapDoc], targets: &[BoxShape], outputs: bool, field: &str) -> Result<Vec<Vec<SourceExpr>>, FieldError> {
        let mut slots: Vec<Vec<Option<SourceExpr>>> = targets
            .iter()
            .map(|b| vec![None; if outputs { b.outputs().len() } else { b.inputs().len() }])
            .collect();
        for (k, e) in entries.iter().enumerate() {
            let ef = format!("{field}[{k}]");
            let (bi, pi) = locate(&e.to, targets, outputs).map_err(|m| ferr(format!("{ef}.to"), m))?;
            let port = if outputs { &targets[bi].outputs()[pi] } else { &targets[bi].inputs()[pi] };
            if slots[bi][pi].is_some() {
                return Err(ferr(format!("{ef}.to"), format!("port {} is wired twice", e.to)));
            }
            slots[bi][pi] = Some(self.expr(&e.from, port, &format!("{ef}.from"))?);
        }
        slots
            .into_iter()
            .enumerate()
            .map(|(bi, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(pi, s)| {
                        s.ok_or_else(|| {
                            let ports = if outputs { targets[bi].outputs() } else { targets[bi].inputs() };
                            ferr(field, format!("no source for port {}", label(targets, bi, &ports[pi])))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

fn lookup_boxes(names: &[String], boxes: &BTreeMap<String, BoxShape>, field: &str) -> Result<Vec<BoxShape>, FieldError> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            boxes
                .get(n)
                .cloned()
                .ok_or_else(|| ferr(format!("{field}[{i}]"), format!("undefined box `{n}`")))
        })
        .collect()
}

pub fn resolve_wiring(doc: &WiringDoc, boxes: &BTreeMap<String, BoxShape>, field: &str) -> Result<Wiring, FieldError> {
    let inner = lookup_boxes(&doc.inner, boxes, &format!("{field}.inner"))?;
    let outer = lookup_boxes(&doc.outer, boxes, &format!("{field}.outer"))?;
    let mut sides = Sides {
        inner: &inner,
        outer: &outer,
        allow_outer: true,
    };
    let in_map = sides.map(&doc.in_map, &inner, false, &format!("{field}.in_map"))?;
    sides.allow_outer = false;
    let out_map = sides.map(&doc.out_map, &outer, true, &format!("{field}.out_map"))?;
    Wiring::new(inner.clone(), outer.clone(), in_map, out_map).map_err(|e| ferr(field, e))
}

fn ref_doc(w: &Wiring, r: &SourceRef) -> RefDoc {
    let port = w.source_port(r).expect("validated wiring");
    match *r {
        SourceRef::OuterIn { boxi, .. } => RefDoc::OuterIn(label(w.outer(), boxi, port)),
        SourceRef::InnerOut { boxi, .. } => RefDoc::InnerOut(label(w.inner(), boxi, port)),
    }
}

fn from_doc(w: &Wiring, e: &SourceExpr, target: &Port) -> FromDoc {
    match e {
        SourceExpr::Ref(r) => match ref_doc(w, r) {
            RefDoc::OuterIn(s) => FromDoc::OuterIn(s),
            RefDoc::InnerOut(s) => FromDoc::InnerOut(s),
        },
        SourceExpr::Const(c) => FromDoc::Const(target.alphabet[*c].clone()),
        SourceExpr::Table { sources, values } => {
            let ports: Vec<Port> = sources
                .iter()
                .map(|r| w.source_port(r).expect("validated wiring").clone())
                .collect();
            let space = TupleSpace::of_ports(&ports);
            FromDoc::Table(TableDoc {
                sources: sources.iter().map(|r| ref_doc(w, r)).collect(),
                rows: space
                    .iter()
                    .map(|t| RowDoc {
                        input: t.iter().zip(&ports).map(|(&s, p)| p.alphabet[s].as_str()).collect::<Vec<_>>().join("|"),
                        out: target.alphabet[values[space.encode(&t)]].clone(),
                    })
                    .collect(),
            })
        }
    }
}

pub fn wiring_doc(name: &str, w: &Wiring) -> WiringDoc {
    let entries = |targets: &[BoxShape], map: &[Vec<SourceExpr>], outputs: bool| {
        let mut out = vec![];
        for (bi, b) in targets.iter().enumerate() {
            let ports = if outputs { b.outputs() } else { b.inputs() };
            for (p, e) in ports.iter().zip(&map[bi]) {
                out.push(MapDoc {
                    to: label(targets, bi, p),
                    from: from_doc(w, e, p),
                });
            }
        }
        out
    };
    WiringDoc {
        name: name.to_string(),
        inner: w.inner().iter().map(|b| b.name().to_string()).collect(),
        outer: w.outer().iter().map(|b| b.name().to_string()).collect(),
        in_map: entries(w.inner(), w.in_map(), false),
        out_map: entries(w.outer(), w.out_map(), true),
    }
}

/// A resolved `system.v1` document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    pub doc: SystemDoc,
    boxes: BTreeMap<String, BoxShape>,
    machines: BTreeMap<String, MooreMachine>,
    wirings: BTreeMap<String, Wiring>,
    architectures: BTreeMap<String, Architecture>,
    systems: BTreeMap<String, CompositeSystem>,
}

fn insert_unique<T>(map: &mut BTreeMap<String, T>, name: &str, value: T, field: String, what: &str) -> Result<(), FieldError> {
    if map.contains_key(name) {
        return Err(ferr(format!("{field}.name"), format!("{what} `{name}` defined twice")));
    }
    map.insert(name.to_string(), value);
    Ok(())
}

impl Library {
    pub fn from_doc(doc: SystemDoc) -> Result<Self, FieldError> {
        if doc.schema != SYSTEM {
            return Err(ferr("schema", format!("expected {SYSTEM}, found `{}`", doc.schema)));
        }
        let mut lib = Library {
            doc: SystemDoc {
                schema: SYSTEM.into(),
                boxes: vec![],
                machines: vec![],
                wirings: vec![],
                architectures: vec![],
                systems: vec![],
            },
            boxes: BTreeMap::new(),
            machines: BTreeMap::new(),
            wirings: BTreeMap::new(),
            architectures: BTreeMap::new(),
            systems: BTreeMap::new(),
        };
        for (i, b) in doc.boxes.iter().enumerate() {
            let f = format!("boxes[{i}]");
            let shape = resolve_box(b, &f)?;
            insert_unique(&mut lib.boxes, &b.name, shape, f, "box")?;
        }
        for (i, m) in doc.machines.iter().enumerate() {
            let f = format!("machines[{i}]");
            if m.schema.is_some() {
                return Err(ferr(format!("{f}.schema"), "only standalone machine files carry a schema"));
            }
            let machine = resolve_machine(m, &lib.boxes, &f)?;
            insert_unique(&mut lib.machines, &m.name, machine, f, "machine")?;
        }
        for (i, w) in doc.wirings.iter().enumerate() {
            let f = format!("wirings[{i}]");
            let wiring = resolve_wiring(w, &lib.boxes, &f)?;
            insert_unique(&mut lib.wirings, &w.name, wiring, f, "wiring")?;
        }
        for (i, a) in doc.architectures.iter().enumerate() {
            let f = format!("architectures[{i}]");
            let arch = lib.resolve_architecture(a, &f)?;
            insert_unique(&mut lib.architectures, &a.name, arch, f, "architecture")?;
        }
        for (i, s) in doc.systems.iter().enumerate() {
            let f = format!("systems[{i}]");
            let wiring = lib.resolve_expr(&s.wiring, &format!("{f}.wiring"))?;
            let components = s
                .components
                .iter()
                .enumerate()
                .map(|(j, n)| {
                    lib.machines
                        .get(n)
                        .cloned()
                        .ok_or_else(|| ferr(format!("{f}.components[{j}]"), format!("undefined machine `{n}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let sys = CompositeSystem::new(wiring, components).map_err(|e| ferr(&f, e))?;
            insert_unique(&mut lib.systems, &s.name, sys, f, "system")?;
        }
        lib.doc = doc;
        Ok(lib)
    }

    fn resolve_architecture(&self, a: &ArchitectureDoc, field: &str) -> Result<Architecture, FieldError> {
        let root = self
            .boxes
            .get(&a.root)
            .cloned()
            .ok_or_else(|| ferr(format!("{field}.root"), format!("undefined box `{}`", a.root)))?;
        let wiring = self
            .wirings
            .get(&a.wiring)
            .cloned()
            .ok_or_else(|| ferr(format!("{field}.wiring"), format!("undefined wiring `{}`", a.wiring)))?;
        let children = a
            .children
            .iter()
            .enumerate()
            .map(|(j, c)| match c {
                ChildDoc::Leaf(b) => self
                    .boxes
                    .get(b)
                    .cloned()
                    .map(Architecture::leaf)
                    .ok_or_else(|| ferr(format!("{field}.children[{j}].leaf"), format!("undefined box `{b}`"))),
                ChildDoc::Architecture(n) => self.architectures.get(n).cloned().ok_or_else(|| {
                    ferr(
                        format!("{field}.children[{j}].architecture"),
                        format!("undefined architecture `{n}` (define children first)"),
                    )
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Architecture::node(root, wiring, children).map_err(|e| ferr(field, e))
    }

    fn resolve_expr(&self, e: &ExprDoc, field: &str) -> Result<Wiring, FieldError> {
        match e {
            ExprDoc::Ref(n) => self
                .wirings
                .get(n)
                .cloned()
                .ok_or_else(|| ferr(format!("{field}.ref"), format!("undefined wiring `{n}`"))),
            ExprDoc::Identity(b) => self
                .boxes
                .get(b)
                .map(identity_wiring)
                .ok_or_else(|| ferr(format!("{field}.identity"), format!("undefined box `{b}`"))),
            ExprDoc::Architecture(n) => self
                .architectures
                .get(n)
                .ok_or_else(|| ferr(format!("{field}.architecture"), format!("undefined architecture `{n}`")))?
                .flatten()
                .map_err(|e| ferr(format!("{field}.architecture"), e)),
            ExprDoc::Tensor(parts) => {
                let ws = parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| self.resolve_expr(p, &format!("{field}.tensor[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                tensor(&ws).map_err(|e| ferr(format!("{field}.tensor"), e))
            }
            ExprDoc::Compose(parts) => {
                let ws = parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| self.resolve_expr(p, &format!("{field}.compose[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut it = ws.into_iter().enumerate().rev();
                let (_, mut acc) = it.next().ok_or_else(|| ferr(format!("{field}.compose"), "empty composition"))?;
                for (i, g) in it {
                    acc = compose(&g, &acc).map_err(|e| ferr(format!("{field}.compose[{i}]"), e))?;
                }
                Ok(acc)
            }
        }
    }

    pub fn box_shape(&self, name: &str) -> Option<&BoxShape> {
        self.boxes.get(name)
    }

    pub fn machine(&self, name: &str) -> Option<&MooreMachine> {
        self.machines.get(name)
    }

    pub fn wiring(&self, name: &str) -> Option<&Wiring> {
        self.wirings.get(name)
    }

    pub fn architecture(&self, name: &str) -> Option<&Architecture> {
        self.architectures.get(name)
    }

    pub fn system(&self, name: &str) -> Option<&CompositeSystem> {
        self.systems.get(name)
    }

    /// System names in document order.
    pub fn system_names(&self) -> Vec<&str> {
        self.doc.systems.iter().map(|s| s.name.as_str()).collect()
    }
}

/// Assembles a `system.v1` document from library values. Boxes are added on
/// first use; a second, different box or machine under a taken name is an
/// error.
#[derive(Debug, Clone, Default)]
pub struct SystemBuilder {
    boxes: BTreeMap<String, BoxShape>,
    machines: BTreeMap<String, MooreMachine>,
    doc: Option<SystemDoc>,
}

impl SystemBuilder {
    pub fn new() -> Self {
        SystemBuilder::default()
    }

    fn doc(&mut self) -> &mut SystemDoc {
        self.doc.get_or_insert_with(|| SystemDoc {
            schema: SYSTEM.into(),
            boxes: vec![],
            machines: vec![],
            wirings: vec![],
            architectures: vec![],
            systems: vec![],
        })
    }

    pub fn add_box(&mut self, b: &BoxShape) -> Result<&mut Self, String> {
        match self.boxes.get(b.name()) {
            Some(existing) if existing == b => {}
            Some(_) => return Err(format!("two different boxes named `{}`", b.name())),
            None => {
                self.boxes.insert(b.name().to_string(), b.clone());
                self.doc().boxes.push(box_doc(b));
            }
        }
        Ok(self)
    }

    pub fn add_machine(&mut self, m: &MooreMachine) -> Result<&mut Self, String> {
        self.add_box(m.shape())?;
        match self.machines.get(m.name()) {
            Some(existing) if existing == m => {}
            Some(_) => return Err(format!("two different machines named `{}`", m.name())),
            None => {
                self.machines.insert(m.name().to_string(), m.clone());
                self.doc().machines.push(machine_doc(m, false));
            }
        }
        Ok(self)
    }

    pub fn add_wiring(&mut self, name: &str, w: &Wiring) -> Result<&mut Self, String> {
        for b in w.inner().iter().chain(w.outer()) {
            self.add_box(b)?;
        }
        if self.doc().wirings.iter().any(|x| x.name == name) {
            return Err(format!("wiring `{name}` defined twice"));
        }
        self.doc().wirings.push(wiring_doc(name, w));
        Ok(self)
    }

    pub fn add_architecture(&mut self, a: ArchitectureDoc) -> &mut Self {
        self.doc().architectures.push(a);
        self
    }

    pub fn add_system(&mut self, name: &str, wiring: ExprDoc, components: &[MooreMachine]) -> Result<&mut Self, String> {
        for m in components {
            self.add_machine(m)?;
        }
        self.doc().systems.push(SystemEntryDoc {
            name: name.to_string(),
            wiring,
            components: components.iter().map(|m| m.name().to_string()).collect(),
        });
        Ok(self)
    }

    /// Adds `sys` with its flattened wiring stored as `<name>.wiring`.
    pub fn add_composite(&mut self, name: &str, sys: &CompositeSystem) -> Result<&mut Self, String> {
        let wname = format!("{name}.wiring");
        self.add_wiring(&wname, sys.wiring())?;
        self.add_system(name, ExprDoc::Ref(wname), sys.components())
    }

    pub fn finish(mut self) -> SystemDoc {
        self.doc().clone()
    }
}

pub fn resolve_battery(doc: &BatteryDoc) -> Result<Vec<Test>, FieldError> {
    doc.tests
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let f = format!("tests[{i}]");
            let unexpected = |key: &str| ferr(format!("{f}.{key}"), format!("not used by {:?} tests", t.kind));
            let base = match t.kind {
                KindDoc::TraceSet => {
                    if t.step.is_some() {
                        return Err(unexpected("step"));
                    }
                    Test::trace_set(t.depth.ok_or_else(|| ferr(format!("{f}.depth"), "required for trace_set"))?)
                }
                KindDoc::OutputImage => {
                    if t.depth.is_some() {
                        return Err(unexpected("depth"));
                    }
                    Test::output_image(t.step.ok_or_else(|| ferr(format!("{f}.step"), "required for output_image"))?)
                }
                KindDoc::StateSet | KindDoc::Terminal => {
                    if t.depth.is_some() {
                        return Err(unexpected("depth"));
                    }
                    if t.step.is_some() {
                        return Err(unexpected("step"));
                    }
                    if t.kind == KindDoc::StateSet {
                        Test::state_set()
                    } else {
                        Test::terminal()
                    }
                }
            };
            let comparator = match t.comparator {
                None => base.comparator,
                Some(ComparatorDoc::Equality) => Comparator::Equality,
                Some(ComparatorDoc::Cardinality) => Comparator::Cardinality,
            };
            Ok(Test::new(t.name.clone().unwrap_or(base.name), base.kind, comparator))
        })
        .collect()
}

pub fn battery_doc(tests: &[Test]) -> BatteryDoc {
    BatteryDoc {
        schema: BATTERY.into(),
        tests: tests
            .iter()
            .map(|t| {
                let (kind, depth, step) = match t.kind {
                    TestKind::TraceSet(k) => (KindDoc::TraceSet, Some(k), None),
                    TestKind::StateSet => (KindDoc::StateSet, None, None),
                    TestKind::Terminal => (KindDoc::Terminal, None, None),
                    TestKind::OutputImage(s) => (KindDoc::OutputImage, None, Some(s)),
                };
                TestDoc {
                    name: Some(t.name.clone()),
                    kind,
                    depth,
                    step,
                    comparator: Some(match t.comparator {
                        Comparator::Equality => ComparatorDoc::Equality,
                        Comparator::Cardinality => ComparatorDoc::Cardinality,
                    }),
                }
            })
            .collect(),
    }
}

/// Resolves payload names against `lib`.
pub fn resolve_attack(doc: &AttackDoc, lib: &Library) -> Result<AttackScript, FieldError> {
    let steps = doc
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let f = format!("steps[{i}]");
            let target = match (&s.index, &s.name) {
                (Some(i), None) => Target::Index(*i),
                (None, Some(n)) => Target::Name(n.clone()),
                _ => return Err(ferr(&f, "give exactly one of `index` and `name`")),
            };
            let machine = |n: &str, field: String| {
                lib.machine(n)
                    .cloned()
                    .ok_or_else(|| ferr(field, format!("undefined machine `{n}`")))
            };
            let pf = format!("{f}.payload");
            Ok(match (s.kind, &s.payload) {
                (StepKindDoc::Rewrite, PayloadDoc::Machine(m)) => AttackStep::Rewrite(RewriteStep {
                    target,
                    mode: RewriteMode::Replace(machine(m, format!("{pf}.machine"))?),
                }),
                (StepKindDoc::Rewrite, PayloadDoc::Hom(h)) => {
                    let source = machine(&h.source, format!("{pf}.hom.source"))?;
                    let tgt = machine(&h.target, format!("{pf}.hom.target"))?;
                    let pairs: Vec<(&str, &str)> = h.map.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                    let hom = MachineHom::from_labels(source, tgt, &pairs).map_err(|e| ferr(format!("{pf}.hom"), e))?;
                    AttackStep::Rewrite(RewriteStep {
                        target,
                        mode: RewriteMode::Hom(hom),
                    })
                }
                (StepKindDoc::Rewire, PayloadDoc::Wiring(w)) => AttackStep::Rewire(RewireStep {
                    target,
                    endo: lib
                        .wiring(w)
                        .cloned()
                        .ok_or_else(|| ferr(format!("{pf}.wiring"), format!("undefined wiring `{w}`")))?,
                }),
                (StepKindDoc::Rewrite, _) => return Err(ferr(pf, "a rewrite takes a `machine` or `hom` payload")),
                (StepKindDoc::Rewire, _) => return Err(ferr(pf, "a rewire takes a `wiring` payload")),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AttackScript::new(doc.name.clone(), steps))
}

/// A category together with the set-valued functors declared over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FincatFile {
    pub doc: FincatDoc,
    pub category: FinCategory,
    pub functors: Vec<FinSetFunctor>,
}

impl FincatFile {
    pub fn functor(&self, name: &str) -> Option<&FinSetFunctor> {
        self.functors.iter().find(|f| f.name == name)
    }
}

pub fn resolve_fincat(doc: FincatDoc) -> Result<FincatFile, FieldError> {
    let category = FinCategory {
        objects: doc.objects.clone(),
        morphisms: doc
            .morphisms
            .iter()
            .map(|m| Morphism::new(&m.id, &m.source, &m.target))
            .collect(),
        identity: doc.identity.clone(),
        composition: BTreeMap::new(),
    };
    let mut category = category;
    for (i, [g, f, gf]) in doc.composition.iter().enumerate() {
        if category
            .composition
            .insert((g.clone(), f.clone()), gf.clone())
            .is_some()
        {
            return Err(ferr(format!("composition[{i}]"), format!("{g} ∘ {f} given twice")));
        }
    }
    let report = validate_category(&category);
    if !report.is_valid() {
        return Err(ferr("composition", format!("not a category: {}", report.to_string().trim())));
    }
    let mut names = BTreeSet::new();
    let mut functors = vec![];
    for (i, fd) in doc.functors.iter().enumerate() {
        let field = format!("functors[{i}]");
        if !names.insert(fd.name.clone()) {
            return Err(ferr(format!("{field}.name"), format!("functor `{}` defined twice", fd.name)));
        }
        let f = FinSetFunctor {
            name: fd.name.clone(),
            objects: fd.objects.clone(),
            morphisms: fd.morphisms.clone(),
        };
        let issues = validate_functor(&category, &f);
        if !issues.is_empty() {
            return Err(ferr(field, issues.join("; ")));
        }
        functors.push(f);
    }
    Ok(FincatFile {
        doc,
        category,
        functors,
    })
}

pub fn fincat_doc(name: &str, cat: &FinCategory, functors: &[FinSetFunctor]) -> FincatDoc {
    FincatDoc {
        schema: FINCAT.into(),
        name: name.to_string(),
        objects: cat.objects.clone(),
        morphisms: cat
            .morphisms
            .iter()
            .map(|m| MorphismDoc {
                id: m.id.clone(),
                source: m.source.clone(),
                target: m.target.clone(),
            })
            .collect(),
        identity: cat.identity.clone(),
        composition: cat
            .composition
            .iter()
            .map(|((g, f), gf)| [g.clone(), f.clone(), gf.clone()])
            .collect(),
        functors: functors
            .iter()
            .map(|f| FunctorDoc {
                name: f.name.clone(),
                objects: f.objects.clone(),
                morphisms: f.morphisms.clone(),
            })
            .collect(),
    }
}

/// A scenario manifest with everything it points at loaded.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub doc: ScenarioDoc,
    pub library: Library,
    pub attacks: Vec<AttackDoc>,
    pub scenario: Scenario,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[derive(Deserialize)]
struct Probe {
    schema: Option<serde_json::Value>,
}

fn parse_error(path: &Path, e: serde_json::Error) -> LoadError {
    LoadError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Reads the `schema` field of a JSON document.
pub fn probe_text(path: &Path, text: &str) -> Result<String, LoadError> {
    let probe: Probe = serde_json::from_str(text).map_err(|e| parse_error(path, e))?;
    match probe.schema {
        Some(serde_json::Value::String(s)) => Ok(s),
        Some(other) => Err(LoadError::Schema {
            path: path.display().to_string(),
            found: other.to_string(),
            expected: "a string".into(),
        }),
        None => Err(LoadError::Schema {
            path: path.display().to_string(),
            found: "<missing>".into(),
            expected: format!("one of {}", SCHEMAS.join(", ")),
        }),
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses `text` as a `T` after checking its schema is `expected`.
pub fn parse_as<T: DeserializeOwned>(path: &Path, text: &str, expected: &str) -> Result<T, LoadError> {
    let found = probe_text(path, text)?;
    if found != expected {
        return Err(LoadError::Schema {
            path: path.display().to_string(),
            found,
            expected: expected.into(),
        });
    }
    serde_json::from_str(text).map_err(|e| parse_error(path, e))
}

fn read_as<T: DeserializeOwned>(path: &Path, expected: &str) -> Result<T, LoadError> {
    parse_as(path, &read(path)?, expected)
}

pub fn load_system(path: &Path) -> Result<Library, LoadError> {
    Library::from_doc(read_as(path, SYSTEM)?).map_err(|e| LoadError::field(path, e))
}

pub fn load_machine(path: &Path) -> Result<MooreMachine, LoadError> {
    let doc: MachineDoc = read_as(path, MACHINE)?;
    resolve_machine(&doc, &BTreeMap::new(), "").map_err(|mut e| {
        e.field = e.field.trim_start_matches('.').to_string();
        if e.field.is_empty() {
            e.field = doc.name.clone();
        }
        LoadError::field(path, e)
    })
}

pub fn load_wiring(path: &Path) -> Result<(String, Wiring), LoadError> {
    let doc: WiringFileDoc = read_as(path, WIRING)?;
    let mut boxes = BTreeMap::new();
    for (i, b) in doc.boxes.iter().enumerate() {
        let f = format!("boxes[{i}]");
        let shape = resolve_box(b, &f).map_err(|e| LoadError::field(path, e))?;
        insert_unique(&mut boxes, &b.name, shape, f, "box").map_err(|e| LoadError::field(path, e))?;
    }
    let w = resolve_wiring(&doc.wiring, &boxes, "wiring").map_err(|e| LoadError::field(path, e))?;
    Ok((doc.wiring.name, w))
}

pub fn wiring_file(name: &str, w: &Wiring) -> WiringFileDoc {
    let mut boxes: Vec<BoxDoc> = vec![];
    for b in w.inner().iter().chain(w.outer()) {
        if !boxes.iter().any(|d| d.name == b.name()) {
            boxes.push(box_doc(b));
        }
    }
    WiringFileDoc {
        schema: WIRING.into(),
        boxes,
        wiring: wiring_doc(name, w),
    }
}

pub fn load_battery(path: &Path) -> Result<Vec<Test>, LoadError> {
    let doc: BatteryDoc = read_as(path, BATTERY)?;
    resolve_battery(&doc).map_err(|e| LoadError::field(path, e))
}

pub fn load_attack(path: &Path) -> Result<AttackDoc, LoadError> {
    let doc: AttackDoc = read_as(path, ATTACK)?;
    for (i, s) in doc.steps.iter().enumerate() {
        if s.index.is_some() == s.name.is_some() {
            return Err(LoadError::field(
                path,
                ferr(format!("steps[{i}]"), "give exactly one of `index` and `name`"),
            ));
        }
    }
    Ok(doc)
}

pub fn load_fincat(path: &Path) -> Result<FincatFile, LoadError> {
    resolve_fincat(read_as(path, FINCAT)?).map_err(|e| LoadError::field(path, e))
}

/// The machine files of a knowledge-base directory, sorted by file name.
pub fn kb_files(dir: &Path) -> Result<Vec<PathBuf>, LoadError> {
    let io = |source| LoadError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut files = vec![];
    for entry in fs::read_dir(dir).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.extension().is_some_and(|e| e == "json") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every machine in `dir` as knowledge-base entries over `shape`.
pub fn load_kb(dir: &Path, shape: &BoxShape) -> Result<KnowledgeBase, LoadError> {
    let entries = kb_files(dir)?
        .iter()
        .map(|p| load_machine(p))
        .collect::<Result<Vec<_>, _>>()?;
    KnowledgeBase::new(shape.clone(), entries).map_err(|e| LoadError::field(dir, ferr("kb", e)))
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, LoadError> {
    let doc: ScenarioDoc = read_as(path, SCENARIO)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let library = load_system(&base.join(&doc.system))?;
    let system = |name: &str, field: &str| {
        library
            .system(name)
            .cloned()
            .ok_or_else(|| LoadError::field(path, ferr(field, format!("undefined system `{name}`"))))
    };
    let real = system(&doc.real, "real")?;
    let attacker_view = system(&doc.attacker_view, "attacker_view")?;
    for (v, reals) in &doc.correspondence {
        let field = format!("correspondence.{v}");
        if !attacker_view.names().contains(&v.as_str()) {
            return Err(LoadError::field(path, ferr(field, format!("no view component `{v}`"))));
        }
        if let Some(r) = reals.iter().find(|r| !real.names().contains(&r.as_str())) {
            return Err(LoadError::field(path, ferr(field, format!("no real component `{r}`"))));
        }
    }
    let shape = real.outer().map_err(|e| LoadError::field(path, ferr("real", e)))?;
    let kb = load_kb(&base.join(&doc.kb), &shape)?;
    let battery = load_battery(&base.join(&doc.battery))?;
    let mut attacks = vec![];
    let mut scripts = BTreeMap::new();
    for (i, s) in doc.scripts.iter().enumerate() {
        let p = base.join(s);
        let a = load_attack(&p)?;
        let script = resolve_attack(&a, &library).map_err(|e| LoadError::field(&p, e))?;
        if scripts.insert(a.name.clone(), script).is_some() {
            return Err(LoadError::field(
                path,
                ferr(format!("scripts[{i}]"), format!("script `{}` listed twice", a.name)),
            ));
        }
        attacks.push(a);
    }
    Ok(LoadedScenario {
        scenario: Scenario {
            real,
            attacker_view,
            correspondence: doc.correspondence.clone(),
            kb,
            battery,
            scripts,
        },
        doc,
        library,
        attacks,
    })
}

/// Any document, dispatched on its `schema` field.
#[derive(Debug, Clone)]
pub enum Document {
    System(Box<Library>),
    Machine(MooreMachine),
    Wiring(String, Wiring),
    Battery(Vec<Test>),
    Attack(AttackDoc),
    Scenario(Box<LoadedScenario>),
    Fincat(Box<FincatFile>),
}

impl Document {
    pub fn schema(&self) -> &'static str {
        match self {
            Document::System(_) => SYSTEM,
            Document::Machine(_) => MACHINE,
            Document::Wiring(..) => WIRING,
            Document::Battery(_) => BATTERY,
            Document::Attack(_) => ATTACK,
            Document::Scenario(_) => SCENARIO,
            Document::Fincat(_) => FINCAT,
        }
    }
}

pub fn load(path: &Path) -> Result<Document, LoadError> {
    let text = read(path)?;
    let schema = probe_text(path, &text)?;
    Ok(match schema.as_str() {
        SYSTEM => Document::System(Box::new(load_system(path)?)),
        MACHINE => Document::Machine(load_machine(path)?),
        WIRING => {
            let (n, w) = load_wiring(path)?;
            Document::Wiring(n, w)
        }
        BATTERY => Document::Battery(load_battery(path)?),
        ATTACK => Document::Attack(load_attack(path)?),
        SCENARIO => Document::Scenario(Box::new(load_scenario(path)?)),
        FINCAT => Document::Fincat(Box::new(load_fincat(path)?)),
        _ => {
            return Err(LoadError::Schema {
                path: path.display().to_string(),
                found: schema,
                expected: format!("one of {}", SCHEMAS.join(", ")),
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use wdsec::scenarios::{build_uav_attacker_view, gps_swap_endo, sensor_wiring};

    fn lib_of(doc: SystemDoc) -> Library {
        Library::from_doc(doc).unwrap()
    }

    #[test]
    fn wiring_doc_round_trips() {
        for w in [sensor_wiring(), gps_swap_endo(), build_uav_attacker_view().wiring().clone()] {
            let doc = wiring_doc("w", &w);
            let mut boxes = BTreeMap::new();
            for b in w.inner().iter().chain(w.outer()) {
                boxes.insert(b.name().to_string(), b.clone());
            }
            assert_eq!(resolve_wiring(&doc, &boxes, "w").unwrap(), w);
        }
    }

    #[test]
    fn machine_doc_round_trips() {
        let sys = build_uav_attacker_view();
        let m = sys.composite().unwrap();
        let doc = machine_file(&m);
        assert_eq!(resolve_machine(&doc, &BTreeMap::new(), "m").unwrap(), m);
    }

    #[test]
    fn builder_output_loads() {
        let mut b = SystemBuilder::new();
        b.add_composite("view", &build_uav_attacker_view()).unwrap();
        let lib = lib_of(b.finish());
        assert_eq!(lib.system("view").unwrap(), &build_uav_attacker_view());
    }

    #[test]
    fn builder_rejects_name_clash() {
        let mut b = SystemBuilder::new();
        b.add_box(&BoxShape::binary("X", &["a"], &["y"])).unwrap();
        assert!(b.add_box(&BoxShape::binary("X", &["a", "b"], &["y"])).is_err());
    }

    #[test]
    fn table_sources_round_trip() {
        let x = BoxShape::binary("X", &["a", "b"], &["y"]);
        let w = Wiring::new(
            vec![x.clone()],
            vec![x.clone()],
            vec![vec![
                SourceExpr::Table {
                    sources: vec![SourceRef::OuterIn { boxi: 0, port: 0 }, SourceRef::InnerOut { boxi: 0, port: 0 }],
                    values: vec![0, 1, 1, 0],
                },
                SourceExpr::Const(1),
            ]],
            vec![vec![SourceExpr::inner_out(0, 0)]],
        )
        .unwrap();
        let doc = wiring_doc("t", &w);
        let boxes = BTreeMap::from([("X".to_string(), x)]);
        assert_eq!(resolve_wiring(&doc, &boxes, "t").unwrap(), w);
    }

    #[test]
    fn repeated_boxes_use_indices() {
        let x = BoxShape::binary("X", &["a"], &["y"]);
        let w = tensor(&[identity_wiring(&x), identity_wiring(&x)]).unwrap();
        let doc = wiring_doc("xx", &w);
        assert_eq!(doc.in_map[1].to, "#1.a");
        let boxes = BTreeMap::from([("X".to_string(), x)]);
        assert_eq!(resolve_wiring(&doc, &boxes, "xx").unwrap(), w);
    }

    #[test]
    fn missing_and_duplicate_ports_are_reported() {
        let x = BoxShape::binary("X", &["a", "b"], &["y"]);
        let boxes = BTreeMap::from([("X".to_string(), x.clone())]);
        let mut doc = wiring_doc("w", &identity_wiring(&x));
        doc.in_map.pop();
        let e = resolve_wiring(&doc, &boxes, "w").unwrap_err();
        assert_eq!(e.field, "w.in_map");
        assert!(e.message.contains("X.b"), "{e}");
        let mut doc = wiring_doc("w", &identity_wiring(&x));
        doc.in_map[1].to = "X.a".into();
        let e = resolve_wiring(&doc, &boxes, "w").unwrap_err();
        assert_eq!(e.field, "w.in_map[1].to");
    }

    #[test]
    fn out_map_may_not_read_outer_inputs() {
        let x = BoxShape::binary("X", &["a"], &["y"]);
        let boxes = BTreeMap::from([("X".to_string(), x.clone())]);
        let mut doc = wiring_doc("w", &identity_wiring(&x));
        doc.out_map[0].from = FromDoc::OuterIn("X.a".into());
        let e = resolve_wiring(&doc, &boxes, "w").unwrap_err();
        assert_eq!(e.field, "w.out_map[0].from.outer_in");
    }

    #[test]
    fn battery_defaults_and_checks() {
        let doc: BatteryDoc = serde_json::from_str(
            r#"{"schema": "battery.v1", "tests": [{"kind": "trace_set", "depth": 3}, {"kind": "state_set"}]}"#,
        )
        .unwrap();
        assert_eq!(resolve_battery(&doc).unwrap(), vec![Test::trace_set(3), Test::state_set()]);
        let bad: BatteryDoc =
            serde_json::from_str(r#"{"schema": "battery.v1", "tests": [{"kind": "terminal", "depth": 3}]}"#).unwrap();
        assert_eq!(resolve_battery(&bad).unwrap_err().field, "tests[0].depth");
        let t = vec![Test::trace_set(2), Test::terminal(), Test::output_image(4)];
        assert_eq!(resolve_battery(&battery_doc(&t)).unwrap(), t);
    }
}
