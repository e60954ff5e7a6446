//! The wiring-diagram category: boxes, wirings, composition and tensor.
//!
//! A [`Wiring`] from the inner boxes `X_1 ⊗ … ⊗ X_n` to the outer boxes
//! `Y_1 ⊗ … ⊗ Y_m` is a pair of set functions
//!
//! * `f_in : X_out × Y_in → X_in` (every inner input port gets a source), and
//! * `f_out : X_out → Y_out` (every outer output port gets a source).
//!
//! Both are presented port by port as [`SourceExpr`]s. Reading the same
//! source from several targets is duplication; a [`SourceExpr::Table`] covers
//! arbitrary finite functions.
//!
//! Symbols are carried as indices into the port alphabet. Tuples are flat:
//! the ports of every box in order, boxes in order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::Tuple;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WiringError {
    #[error("box {boxname}: duplicate port name `{port}`")]
    DuplicatePort { boxname: String, port: String },
    #[error("box {boxname}: port `{port}` has an empty alphabet")]
    EmptyAlphabet { boxname: String, port: String },
    #[error("box {boxname}: port `{port}` repeats symbol `{symbol}`")]
    DuplicateSymbol {
        boxname: String,
        port: String,
        symbol: String,
    },
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("{target}: bad source reference ({detail})")]
    BadRef { target: String, detail: String },
    #[error("{target}: outer outputs may only read inner outputs")]
    ForbiddenRef { target: String },
    #[error("{target}: source {source_port} has a different alphabet")]
    AlphabetMismatch { target: String, source_port: String },
    #[error("{target}: constant symbol index {index} outside the target alphabet")]
    ConstOutOfRange { target: String, index: usize },
    #[error("{target}: table has {found} rows, expected {expected}")]
    TableShape {
        target: String,
        expected: usize,
        found: usize,
    },
    #[error("{target}: table value {index} outside the target alphabet")]
    TableValue { target: String, index: usize },
    #[error("boundary mismatch at {port}: {detail}")]
    Boundary { port: String, detail: String },
    #[error("symbol index {index} outside the alphabet of {port}")]
    Symbol { port: String, index: usize },
    #[error("unknown symbol `{symbol}` for port {port}")]
    UnknownSymbol { port: String, symbol: String },
    #[error("tuple has {found} entries, expected {expected}")]
    TupleLength { expected: usize, found: usize },
    #[error("tensor of an empty list")]
    EmptyTensor,
}

/// A named port with a finite, nonempty alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Port {
    pub name: String,
    pub alphabet: Vec<String>,
}

impl Port {
    pub fn new<S: AsRef<str>>(name: impl Into<String>, alphabet: &[S]) -> Self {
        Port {
            name: name.into(),
            alphabet: alphabet.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Port::new(name, &["0", "1"])
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == symbol)
    }
}

/// An object of the wiring-diagram category: `(X_in, X_out)` as ordered
/// lists of ports.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxShape {
    name: String,
    inputs: Vec<Port>,
    outputs: Vec<Port>,
}

impl BoxShape {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<Port>,
        outputs: Vec<Port>,
    ) -> Result<Self, WiringError> {
        let name = name.into();
        for side in [&inputs, &outputs] {
            let mut seen = BTreeSet::new();
            for port in side {
                if !seen.insert(port.name.as_str()) {
                    return Err(WiringError::DuplicatePort {
                        boxname: name.clone(),
                        port: port.name.clone(),
                    });
                }
                if port.alphabet.is_empty() {
                    return Err(WiringError::EmptyAlphabet {
                        boxname: name.clone(),
                        port: port.name.clone(),
                    });
                }
                let mut symbols = BTreeSet::new();
                for symbol in &port.alphabet {
                    if !symbols.insert(symbol.as_str()) {
                        return Err(WiringError::DuplicateSymbol {
                            boxname: name.clone(),
                            port: port.name.clone(),
                            symbol: symbol.clone(),
                        });
                    }
                }
            }
        }
        Ok(BoxShape {
            name,
            inputs,
            outputs,
        })
    }

    /// A box whose ports all carry the alphabet `{0, 1}`.
    ///
    /// Panics on duplicate port names; meant for fixtures.
    pub fn binary(name: &str, inputs: &[&str], outputs: &[&str]) -> Self {
        BoxShape::new(
            name,
            inputs.iter().map(|p| Port::binary(*p)).collect(),
            outputs.iter().map(|p| Port::binary(*p)).collect(),
        )
        .expect("fixture box must be well formed")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[Port] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Port] {
        &self.outputs
    }

    pub fn input_space(&self) -> TupleSpace {
        TupleSpace::of_ports(&self.inputs)
    }

    pub fn output_space(&self) -> TupleSpace {
        TupleSpace::of_ports(&self.outputs)
    }

    /// Same ports and alphabets in the same order. Box names are ignored.
    pub fn same_interface(&self, other: &BoxShape) -> bool {
        self.interface_mismatch(other).is_none()
    }

    /// Describes the first port at which two interfaces differ.
    pub fn interface_mismatch(&self, other: &BoxShape) -> Option<(String, String)> {
        for (side, a, b) in [
            ("in", &self.inputs, &other.inputs),
            ("out", &self.outputs, &other.outputs),
        ] {
            for (i, (pa, pb)) in a.iter().zip(b.iter()).enumerate() {
                if pa.name != pb.name {
                    return Some((
                        format!("{}.{}", self.name, pa.name),
                        format!("{side} port {i} is `{}` vs `{}`", pa.name, pb.name),
                    ));
                }
                if pa.alphabet != pb.alphabet {
                    return Some((
                        format!("{}.{}", self.name, pa.name),
                        format!(
                            "alphabet {{{}}} vs {{{}}}",
                            pa.alphabet.join(","),
                            pb.alphabet.join(",")
                        ),
                    ));
                }
            }
            if a.len() != b.len() {
                return Some((
                    format!("{}.{side}", self.name),
                    format!("{} {side} ports vs {}", a.len(), b.len()),
                ));
            }
        }
        None
    }

    /// The monoidal product of a list of boxes: ports concatenated in order.
    ///
    /// Port names are qualified by box name (and position when box names
    /// repeat). A single box is returned unchanged.
    pub fn tensor(boxes: &[BoxShape]) -> Result<BoxShape, WiringError> {
        match boxes {
            [] => Err(WiringError::EmptyTensor),
            [single] => Ok(single.clone()),
            _ => {
                let names: Vec<&str> = boxes.iter().map(|b| b.name()).collect();
                let unique = names.iter().collect::<BTreeSet<_>>().len() == names.len();
                let qualify = |i: usize, b: &BoxShape, p: &Port| Port {
                    name: if unique {
                        format!("{}.{}", b.name, p.name)
                    } else {
                        format!("{}#{}.{}", b.name, i, p.name)
                    },
                    alphabet: p.alphabet.clone(),
                };
                let inputs = boxes
                    .iter()
                    .enumerate()
                    .flat_map(|(i, b)| b.inputs.iter().map(move |p| qualify(i, b, p)))
                    .collect();
                let outputs = boxes
                    .iter()
                    .enumerate()
                    .flat_map(|(i, b)| b.outputs.iter().map(move |p| qualify(i, b, p)))
                    .collect();
                BoxShape::new(names.join("⊗"), inputs, outputs)
            }
        }
    }

    pub fn parse_inputs<S: AsRef<str>>(&self, symbols: &[S]) -> Result<Tuple, WiringError> {
        parse_tuple(&self.inputs, symbols)
    }

    pub fn render_outputs(&self, tuple: &[usize]) -> String {
        render_tuple(&self.outputs, tuple)
    }

    pub fn render_inputs(&self, tuple: &[usize]) -> String {
        render_tuple(&self.inputs, tuple)
    }
}

/// Parses symbol names into a tuple over `ports`.
pub fn parse_tuple<S: AsRef<str>>(ports: &[Port], symbols: &[S]) -> Result<Tuple, WiringError> {
    if ports.len() != symbols.len() {
        return Err(WiringError::TupleLength {
            expected: ports.len(),
            found: symbols.len(),
        });
    }
    ports
        .iter()
        .zip(symbols)
        .map(|(p, s)| {
            p.symbol_index(s.as_ref())
                .ok_or_else(|| WiringError::UnknownSymbol {
                    port: p.name.clone(),
                    symbol: s.as_ref().to_string(),
                })
        })
        .collect()
}

/// Renders a tuple as its symbols joined by `|`.
pub fn render_tuple(ports: &[Port], tuple: &[usize]) -> String {
    ports
        .iter()
        .zip(tuple)
        .map(|(p, &i)| p.alphabet.get(i).map(String::as_str).unwrap_or("?"))
        .collect::<Vec<_>>()
        .join("|")
}

/// Mixed-radix enumeration of tuples. The first coordinate is most
/// significant, so indices follow lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSpace {
    radices: Vec<usize>,
}

impl TupleSpace {
    pub fn new(radices: Vec<usize>) -> Self {
        TupleSpace { radices }
    }

    pub fn of_ports(ports: &[Port]) -> Self {
        TupleSpace::new(ports.iter().map(|p| p.alphabet.len()).collect())
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn len(&self) -> usize {
        self.radices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radices.is_empty()
    }

    /// Number of tuples (1 for the empty product).
    pub fn count(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.radices.len());
        tuple
            .iter()
            .zip(&self.radices)
            .fold(0, |acc, (&v, &r)| acc * r + v)
    }

    pub fn decode(&self, mut index: usize) -> Tuple {
        let mut out = vec![0; self.radices.len()];
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = index % r;
            index /= r;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Tuple> + '_ {
        (0..self.count()).map(move |i| self.decode(i))
    }

    pub fn check(&self, tuple: &[usize], ports: &[Port]) -> Result<(), WiringError> {
        if tuple.len() != self.radices.len() {
            return Err(WiringError::TupleLength {
                expected: self.radices.len(),
                found: tuple.len(),
            });
        }
        for (i, (&v, &r)) in tuple.iter().zip(&self.radices).enumerate() {
            if v >= r {
                return Err(WiringError::Symbol {
                    port: ports.get(i).map(|p| p.name.clone()).unwrap_or_default(),
                    index: v,
                });
            }
        }
        Ok(())
    }
}

/// A wire end a source expression may read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceRef {
    /// Input port `port` of outer box `boxi`.
    OuterIn { boxi: usize, port: usize },
    /// Output port `port` of inner box `boxi`.
    InnerOut { boxi: usize, port: usize },
}

/// What feeds one target port.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SourceExpr {
    Ref(SourceRef),
    /// A fixed symbol of the target alphabet.
    Const(usize),
    /// A total function of the listed sources, indexed in mixed radix over
    /// their alphabets; values are target-alphabet indices.
    Table {
        sources: Vec<SourceRef>,
        values: Vec<usize>,
    },
}

impl SourceExpr {
    pub fn outer_in(boxi: usize, port: usize) -> Self {
        SourceExpr::Ref(SourceRef::OuterIn { boxi, port })
    }

    pub fn inner_out(boxi: usize, port: usize) -> Self {
        SourceExpr::Ref(SourceRef::InnerOut { boxi, port })
    }

    pub fn refs(&self) -> Vec<SourceRef> {
        match self {
            SourceExpr::Ref(r) => vec![*r],
            SourceExpr::Const(_) => vec![],
            SourceExpr::Table { sources, .. } => sources.clone(),
        }
    }

    fn shifted(&self, inner_offset: usize, outer_offset: usize) -> SourceExpr {
        let shift = |r: &SourceRef| match *r {
            SourceRef::OuterIn { boxi, port } => SourceRef::OuterIn {
                boxi: boxi + outer_offset,
                port,
            },
            SourceRef::InnerOut { boxi, port } => SourceRef::InnerOut {
                boxi: boxi + inner_offset,
                port,
            },
        };
        match self {
            SourceExpr::Ref(r) => SourceExpr::Ref(shift(r)),
            SourceExpr::Const(c) => SourceExpr::Const(*c),
            SourceExpr::Table { sources, values } => SourceExpr::Table {
                sources: sources.iter().map(shift).collect(),
                values: values.clone(),
            },
        }
    }
}

/// A morphism of the wiring-diagram category from `⊗ inner` to `⊗ outer`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Wiring {
    inner: Vec<BoxShape>,
    outer: Vec<BoxShape>,
    in_map: Vec<Vec<SourceExpr>>,
    out_map: Vec<Vec<SourceExpr>>,
}

impl Wiring {
    pub fn new(
        inner: Vec<BoxShape>,
        outer: Vec<BoxShape>,
        in_map: Vec<Vec<SourceExpr>>,
        out_map: Vec<Vec<SourceExpr>>,
    ) -> Result<Self, WiringError> {
        let w = Wiring {
            inner,
            outer,
            in_map,
            out_map,
        };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<(), WiringError> {
        if self.in_map.len() != self.inner.len() {
            return Err(WiringError::Arity(format!(
                "in_map covers {} boxes, wiring has {} inner boxes",
                self.in_map.len(),
                self.inner.len()
            )));
        }
        if self.out_map.len() != self.outer.len() {
            return Err(WiringError::Arity(format!(
                "out_map covers {} boxes, wiring has {} outer boxes",
                self.out_map.len(),
                self.outer.len()
            )));
        }
        for (b, (bx, exprs)) in self.inner.iter().zip(&self.in_map).enumerate() {
            if exprs.len() != bx.inputs.len() {
                return Err(WiringError::Arity(format!(
                    "inner box #{b} {} has {} inputs, in_map gives {}",
                    bx.name,
                    bx.inputs.len(),
                    exprs.len()
                )));
            }
            for (p, expr) in exprs.iter().enumerate() {
                let target = format!("inner {}.{}", bx.name, bx.inputs[p].name);
                self.check_expr(&target, &bx.inputs[p], expr, true)?;
            }
        }
        for (b, (bx, exprs)) in self.outer.iter().zip(&self.out_map).enumerate() {
            if exprs.len() != bx.outputs.len() {
                return Err(WiringError::Arity(format!(
                    "outer box #{b} {} has {} outputs, out_map gives {}",
                    bx.name,
                    bx.outputs.len(),
                    exprs.len()
                )));
            }
            for (p, expr) in exprs.iter().enumerate() {
                let target = format!("outer {}.{}", bx.name, bx.outputs[p].name);
                self.check_expr(&target, &bx.outputs[p], expr, false)?;
            }
        }
        Ok(())
    }

    fn check_expr(
        &self,
        target: &str,
        port: &Port,
        expr: &SourceExpr,
        may_read_outer: bool,
    ) -> Result<(), WiringError> {
        let check_ref = |r: &SourceRef| -> Result<&Port, WiringError> {
            if !may_read_outer && matches!(r, SourceRef::OuterIn { .. }) {
                return Err(WiringError::ForbiddenRef {
                    target: target.to_string(),
                });
            }
            self.source_port(r).ok_or_else(|| WiringError::BadRef {
                target: target.to_string(),
                detail: format!("{r:?} out of range"),
            })
        };
        match expr {
            SourceExpr::Ref(r) => {
                let src = check_ref(r)?;
                if src.alphabet != port.alphabet {
                    return Err(WiringError::AlphabetMismatch {
                        target: target.to_string(),
                        source_port: self.ref_label(r),
                    });
                }
            }
            SourceExpr::Const(c) => {
                if *c >= port.alphabet.len() {
                    return Err(WiringError::ConstOutOfRange {
                        target: target.to_string(),
                        index: *c,
                    });
                }
            }
            SourceExpr::Table { sources, values } => {
                let mut expected = 1;
                for r in sources {
                    expected *= check_ref(r)?.alphabet.len();
                }
                if values.len() != expected {
                    return Err(WiringError::TableShape {
                        target: target.to_string(),
                        expected,
                        found: values.len(),
                    });
                }
                if let Some(&bad) = values.iter().find(|&&v| v >= port.alphabet.len()) {
                    return Err(WiringError::TableValue {
                        target: target.to_string(),
                        index: bad,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn inner(&self) -> &[BoxShape] {
        &self.inner
    }

    pub fn outer(&self) -> &[BoxShape] {
        &self.outer
    }

    pub fn in_map(&self) -> &[Vec<SourceExpr>] {
        &self.in_map
    }

    pub fn out_map(&self) -> &[Vec<SourceExpr>] {
        &self.out_map
    }

    /// The port a reference points at, if it is in range.
    pub fn source_port(&self, r: &SourceRef) -> Option<&Port> {
        match *r {
            SourceRef::OuterIn { boxi, port } => self.outer.get(boxi)?.inputs.get(port),
            SourceRef::InnerOut { boxi, port } => self.inner.get(boxi)?.outputs.get(port),
        }
    }

    /// `Box.port` label for a reference, for diagnostics and rendering.
    pub fn ref_label(&self, r: &SourceRef) -> String {
        match *r {
            SourceRef::OuterIn { boxi, port } => match self.outer.get(boxi) {
                Some(b) => format!(
                    "{}.{}",
                    b.name,
                    b.inputs.get(port).map(|p| p.name.as_str()).unwrap_or("?")
                ),
                None => format!("outer#{boxi}.{port}"),
            },
            SourceRef::InnerOut { boxi, port } => match self.inner.get(boxi) {
                Some(b) => format!(
                    "{}.{}",
                    b.name,
                    b.outputs.get(port).map(|p| p.name.as_str()).unwrap_or("?")
                ),
                None => format!("inner#{boxi}.{port}"),
            },
        }
    }

    /// All inner output ports, flattened.
    pub fn inner_output_ports(&self) -> Vec<Port> {
        self.inner.iter().flat_map(|b| b.outputs.clone()).collect()
    }

    pub fn inner_input_ports(&self) -> Vec<Port> {
        self.inner.iter().flat_map(|b| b.inputs.clone()).collect()
    }

    pub fn outer_input_ports(&self) -> Vec<Port> {
        self.outer.iter().flat_map(|b| b.inputs.clone()).collect()
    }

    pub fn outer_output_ports(&self) -> Vec<Port> {
        self.outer.iter().flat_map(|b| b.outputs.clone()).collect()
    }

    fn offsets(boxes: &[BoxShape], side: impl Fn(&BoxShape) -> usize) -> Vec<usize> {
        let mut acc = 0;
        boxes
            .iter()
            .map(|b| {
                let at = acc;
                acc += side(b);
                at
            })
            .collect()
    }

    /// Evaluates `(f_in(inner_outs, outer_in), f_out(inner_outs))`.
    pub fn eval(&self, inner_outs: &[usize], outer_in: &[usize]) -> Result<(Tuple, Tuple), WiringError> {
        let io_ports = self.inner_output_ports();
        TupleSpace::of_ports(&io_ports).check(inner_outs, &io_ports)?;
        let oi_ports = self.outer_input_ports();
        TupleSpace::of_ports(&oi_ports).check(outer_in, &oi_ports)?;
        Ok(self.eval_unchecked(inner_outs, outer_in))
    }

    /// [`Wiring::eval`] without range checks on the arguments.
    pub(crate) fn eval_unchecked(&self, inner_outs: &[usize], outer_in: &[usize]) -> (Tuple, Tuple) {
        let inner_off = Self::offsets(&self.inner, |b| b.outputs.len());
        let outer_off = Self::offsets(&self.outer, |b| b.inputs.len());
        let read = |r: &SourceRef| match *r {
            SourceRef::OuterIn { boxi, port } => outer_in[outer_off[boxi] + port],
            SourceRef::InnerOut { boxi, port } => inner_outs[inner_off[boxi] + port],
        };
        let value = |expr: &SourceExpr| match expr {
            SourceExpr::Ref(r) => read(r),
            SourceExpr::Const(c) => *c,
            SourceExpr::Table { sources, values } => {
                let index = sources.iter().fold(0, |acc, r| {
                    let radix = self.source_port(r).map(|p| p.alphabet.len()).unwrap_or(1);
                    acc * radix + read(r)
                });
                values[index]
            }
        };
        let inner_ins = self.in_map.iter().flatten().map(value).collect();
        let outer_outs = self.out_map.iter().flatten().map(value).collect();
        (inner_ins, outer_outs)
    }

    /// The same wiring with every expression in canonical form: table
    /// sources sorted and restricted to the ones that matter, constant tables
    /// turned into `Const`, identity tables into direct references.
    pub fn normalized(&self) -> Wiring {
        let norm = |exprs: &Vec<SourceExpr>, ports: &[Port]| -> Vec<SourceExpr> {
            exprs
                .iter()
                .zip(ports)
                .map(|(e, p)| {
                    let node = Node::lift(e, &|r| Node::Leaf(*r), &|r| self.radix(r));
                    node.normalize(&p.alphabet, &|r| self.source_port(r).map(|p| p.alphabet.clone()).unwrap_or_default())
                })
                .collect()
        };
        Wiring {
            inner: self.inner.clone(),
            outer: self.outer.clone(),
            in_map: self
                .in_map
                .iter()
                .zip(&self.inner)
                .map(|(e, b)| norm(e, &b.inputs))
                .collect(),
            out_map: self
                .out_map
                .iter()
                .zip(&self.outer)
                .map(|(e, b)| norm(e, &b.outputs))
                .collect(),
        }
    }

    fn radix(&self, r: &SourceRef) -> usize {
        self.source_port(r).map(|p| p.alphabet.len()).unwrap_or(1)
    }

    /// Structural equality: same boundary interfaces and identical
    /// normalized expressions.
    pub fn structurally_equal(&self, other: &Wiring) -> bool {
        same_boxes(&self.inner, &other.inner)
            && same_boxes(&self.outer, &other.outer)
            && {
                let a = self.normalized();
                let b = other.normalized();
                a.in_map == b.in_map && a.out_map == b.out_map
            }
    }

    /// A stable textual rendering, used for fingerprints.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let boxes = |s: &mut String, tag: &str, bs: &[BoxShape]| {
            for b in bs {
                let _ = write!(s, "{tag} {}(", b.name);
                for p in &b.inputs {
                    let _ = write!(s, "{}:{{{}}};", p.name, p.alphabet.join(","));
                }
                s.push_str(")->(");
                for p in &b.outputs {
                    let _ = write!(s, "{}:{{{}}};", p.name, p.alphabet.join(","));
                }
                s.push_str(")\n");
            }
        };
        boxes(&mut s, "inner", &self.inner);
        boxes(&mut s, "outer", &self.outer);
        for (b, exprs) in self.in_map.iter().enumerate() {
            for (p, e) in exprs.iter().enumerate() {
                let _ = writeln!(s, "in {b}.{p} <- {e:?}");
            }
        }
        for (b, exprs) in self.out_map.iter().enumerate() {
            for (p, e) in exprs.iter().enumerate() {
                let _ = writeln!(s, "out {b}.{p} <- {e:?}");
            }
        }
        s
    }
}

fn same_boxes(a: &[BoxShape], b: &[BoxShape]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_interface(y))
}

/// First mismatch between two ordered box lists, as a composition error.
pub(crate) fn boundary_mismatch(expected: &[BoxShape], found: &[BoxShape]) -> Option<WiringError> {
    if expected.len() != found.len() {
        return Some(WiringError::Boundary {
            port: "box list".to_string(),
            detail: format!("{} boxes vs {}", expected.len(), found.len()),
        });
    }
    expected.iter().zip(found).find_map(|(a, b)| {
        a.interface_mismatch(b)
            .map(|(port, detail)| WiringError::Boundary { port, detail })
    })
}

/// Expression tree used while substituting one wiring into another.
#[derive(Debug, Clone)]
enum Node {
    Leaf(SourceRef),
    Const(usize),
    Table {
        args: Vec<Node>,
        radices: Vec<usize>,
        values: Vec<usize>,
    },
}

impl Node {
    /// Builds a tree from an expression, resolving each of its references
    /// with `resolve`. `radix` gives the alphabet size of a reference in the
    /// expression's own space.
    fn lift(
        expr: &SourceExpr,
        resolve: &dyn Fn(&SourceRef) -> Node,
        radix: &dyn Fn(&SourceRef) -> usize,
    ) -> Node {
        match expr {
            SourceExpr::Ref(r) => resolve(r),
            SourceExpr::Const(c) => Node::Const(*c),
            SourceExpr::Table { sources, values } => Node::Table {
                args: sources.iter().map(resolve).collect(),
                radices: sources.iter().map(radix).collect(),
                values: values.clone(),
            },
        }
    }

    fn eval(&self, env: &dyn Fn(&SourceRef) -> usize) -> usize {
        match self {
            Node::Leaf(r) => env(r),
            Node::Const(c) => *c,
            Node::Table {
                args,
                radices,
                values,
            } => {
                let index = args
                    .iter()
                    .zip(radices)
                    .fold(0, |acc, (a, &r)| acc * r + a.eval(env));
                values[index]
            }
        }
    }

    fn leaves(&self, out: &mut BTreeSet<SourceRef>) {
        match self {
            Node::Leaf(r) => {
                out.insert(*r);
            }
            Node::Const(_) => {}
            Node::Table { args, .. } => args.iter().for_each(|a| a.leaves(out)),
        }
    }

    fn normalize(
        &self,
        target_alphabet: &[String],
        alphabet_of: &dyn Fn(&SourceRef) -> Vec<String>,
    ) -> SourceExpr {
        let mut set = BTreeSet::new();
        self.leaves(&mut set);
        let mut leaves: Vec<SourceRef> = set.into_iter().collect();
        let radix = |r: &SourceRef| alphabet_of(r).len();
        let tabulate = |leaves: &[SourceRef]| -> Vec<usize> {
            let space = TupleSpace::new(leaves.iter().map(radix).collect());
            space
                .iter()
                .map(|t| {
                    self.eval(&|r| {
                        leaves
                            .iter()
                            .position(|l| l == r)
                            .map(|i| t[i])
                            // leaves dropped as irrelevant read as symbol 0
                            .unwrap_or(0)
                    })
                })
                .collect()
        };
        let mut values = tabulate(&leaves);
        // drop sources the table does not depend on
        let mut j = 0;
        while j < leaves.len() {
            let space = TupleSpace::new(leaves.iter().map(radix).collect());
            let relevant = space.iter().any(|t| {
                let base = values[space.encode(&t)];
                (0..space.radices()[j]).any(|v| {
                    let mut u = t.clone();
                    u[j] = v;
                    values[space.encode(&u)] != base
                })
            });
            if relevant {
                j += 1;
            } else {
                leaves.remove(j);
                values = tabulate(&leaves);
            }
        }
        match leaves.as_slice() {
            [] => SourceExpr::Const(values[0]),
            [only]
                if alphabet_of(only) == target_alphabet
                    && values.iter().enumerate().all(|(i, &v)| i == v) =>
            {
                SourceExpr::Ref(*only)
            }
            _ => SourceExpr::Table {
                sources: leaves,
                values,
            },
        }
    }
}

/// The identity morphism on a box.
pub fn identity_wiring(x: &BoxShape) -> Wiring {
    Wiring {
        inner: vec![x.clone()],
        outer: vec![x.clone()],
        in_map: vec![(0..x.inputs.len()).map(|p| SourceExpr::outer_in(0, p)).collect()],
        out_map: vec![(0..x.outputs.len()).map(|p| SourceExpr::inner_out(0, p)).collect()],
    }
}

/// The identity on a tensor of boxes.
pub fn identity_on(boxes: &[BoxShape]) -> Result<Wiring, WiringError> {
    tensor(&boxes.iter().map(identity_wiring).collect::<Vec<_>>())
}

/// `g ∘ f`: first `f`, then `g`. Requires `f.outer` to match `g.inner`.
///
/// Source expressions of `f` are substituted into those of `g`; tables are
/// composed pointwise and the result is normalized.
pub fn compose(g: &Wiring, f: &Wiring) -> Result<Wiring, WiringError> {
    if let Some(err) = boundary_mismatch(&g.inner, &f.outer) {
        return Err(err);
    }
    let mut h = Wiring {
        inner: f.inner.clone(),
        outer: g.outer.clone(),
        in_map: vec![],
        out_map: vec![],
    };
    let leaf = |r: &SourceRef| Node::Leaf(*r);
    // outer output (b, q) of f, i.e. inner output of g, over inner outputs of f
    let f_out = |b: usize, q: usize| Node::lift(&f.out_map[b][q], &leaf, &|r| f.radix(r));
    // inner input (b, q) of g, i.e. outer input of f
    let g_in = |b: usize, q: usize| {
        Node::lift(
            &g.in_map[b][q],
            &|r| match *r {
                SourceRef::InnerOut { boxi, port } => f_out(boxi, port),
                outer => Node::Leaf(outer),
            },
            &|r| g.radix(r),
        )
    };
    let alphabet_of = |r: &SourceRef| h.source_port(r).map(|p| p.alphabet.clone()).unwrap_or_default();
    let in_map = f
        .in_map
        .iter()
        .zip(&f.inner)
        .map(|(exprs, bx)| {
            exprs
                .iter()
                .zip(&bx.inputs)
                .map(|(e, port)| {
                    Node::lift(
                        e,
                        &|r| match *r {
                            SourceRef::OuterIn { boxi, port } => g_in(boxi, port),
                            inner => Node::Leaf(inner),
                        },
                        &|r| f.radix(r),
                    )
                    .normalize(&port.alphabet, &alphabet_of)
                })
                .collect()
        })
        .collect();
    let out_map = g
        .out_map
        .iter()
        .zip(&g.outer)
        .map(|(exprs, bx)| {
            exprs
                .iter()
                .zip(&bx.outputs)
                .map(|(e, port)| {
                    Node::lift(
                        e,
                        &|r| match *r {
                            SourceRef::InnerOut { boxi, port } => f_out(boxi, port),
                            outer => Node::Leaf(outer),
                        },
                        &|r| g.radix(r),
                    )
                    .normalize(&port.alphabet, &alphabet_of)
                })
                .collect()
        })
        .collect();
    h.in_map = in_map;
    h.out_map = out_map;
    Ok(h)
}

/// Places wirings side by side. No cross wiring is introduced.
pub fn tensor(ws: &[Wiring]) -> Result<Wiring, WiringError> {
    if ws.is_empty() {
        return Err(WiringError::EmptyTensor);
    }
    let mut out = Wiring {
        inner: vec![],
        outer: vec![],
        in_map: vec![],
        out_map: vec![],
    };
    for w in ws {
        let (io, oo) = (out.inner.len(), out.outer.len());
        out.in_map.extend(
            w.in_map
                .iter()
                .map(|es| es.iter().map(|e| e.shifted(io, oo)).collect()),
        );
        out.out_map.extend(
            w.out_map
                .iter()
                .map(|es| es.iter().map(|e| e.shifted(io, oo)).collect()),
        );
        out.inner.extend(w.inner.iter().cloned());
        out.outer.extend(w.outer.iter().cloned());
    }
    Ok(out)
}

/// Exhaustive semantic comparison of two wirings with the same boundary.
///
/// Returns the first `(inner_outs, outer_in)` argument on which the two
/// evaluations differ, or `None` when they agree everywhere.
pub fn eval_difference(a: &Wiring, b: &Wiring) -> Result<Option<(Tuple, Tuple)>, WiringError> {
    if let Some(err) = boundary_mismatch(&a.inner, &b.inner) {
        return Err(err);
    }
    if let Some(err) = boundary_mismatch(&a.outer, &b.outer) {
        return Err(err);
    }
    let inner_outs = TupleSpace::of_ports(&a.inner_output_ports());
    let outer_in = TupleSpace::of_ports(&a.outer_input_ports());
    for o in inner_outs.iter() {
        for y in outer_in.iter() {
            if a.eval_unchecked(&o, &y) != b.eval_unchecked(&o, &y) {
                return Ok(Some((o, y)));
            }
        }
    }
    Ok(None)
}

/// Eval-equality: the semantic notion of equal wirings.
pub fn eval_equal(a: &Wiring, b: &Wiring) -> Result<bool, WiringError> {
    Ok(eval_difference(a, b)?.is_none())
}

/// Outcome of checking a morphism of architectures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchCheck {
    pub commutes: bool,
    /// An argument `(inner_outs, outer_in)` on which `psi ∘ k` and `phi`
    /// disagree.
    pub witness: Option<(Tuple, Tuple)>,
}

/// Checks that `k` is a morphism from `phi` to `psi` in the slice over their
/// common outer box, i.e. that `psi ∘ k` and `phi` agree on every input.
pub fn check_arch_morphism(phi: &Wiring, psi: &Wiring, k: &Wiring) -> Result<ArchCheck, WiringError> {
    if let Some(err) = boundary_mismatch(&phi.outer, &psi.outer) {
        return Err(err);
    }
    if let Some(err) = boundary_mismatch(&phi.inner, &k.inner) {
        return Err(err);
    }
    let triangle = compose(psi, k)?;
    let witness = eval_difference(&triangle, phi)?;
    Ok(ArchCheck {
        commutes: witness.is_none(),
        witness,
    })
}

/// A hierarchical decomposition of a box: either atomic, or a wiring whose
/// inner boxes are the roots of further architectures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    root: BoxShape,
    decomposition: Option<(Wiring, Vec<Architecture>)>,
}

impl Architecture {
    pub fn leaf(root: BoxShape) -> Self {
        Architecture {
            root,
            decomposition: None,
        }
    }

    pub fn node(root: BoxShape, wiring: Wiring, children: Vec<Architecture>) -> Result<Self, WiringError> {
        if let Some(err) = boundary_mismatch(std::slice::from_ref(&root), wiring.outer()) {
            return Err(err);
        }
        let roots: Vec<BoxShape> = children.iter().map(|c| c.root.clone()).collect();
        if let Some(err) = boundary_mismatch(wiring.inner(), &roots) {
            return Err(err);
        }
        Ok(Architecture {
            root,
            decomposition: Some((wiring, children)),
        })
    }

    pub fn root(&self) -> &BoxShape {
        &self.root
    }

    pub fn decomposition(&self) -> Option<(&Wiring, &[Architecture])> {
        self.decomposition.as_ref().map(|(w, c)| (w, c.as_slice()))
    }

    /// Atomic boxes in left-to-right order.
    pub fn leaves(&self) -> Vec<&BoxShape> {
        match &self.decomposition {
            None => vec![&self.root],
            Some((_, children)) => children.iter().flat_map(|c| c.leaves()).collect(),
        }
    }

    /// The single wiring from the leaves to the root.
    pub fn flatten(&self) -> Result<Wiring, WiringError> {
        match &self.decomposition {
            None => Ok(identity_wiring(&self.root)),
            Some((w, children)) => {
                let parts = children
                    .iter()
                    .map(Architecture::flatten)
                    .collect::<Result<Vec<_>, _>>()?;
                compose(w, &tensor(&parts)?)
            }
        }
    }
}
