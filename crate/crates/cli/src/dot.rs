//! Graphviz export. Inner boxes become clusters holding one node per port;
//! every source reference becomes one edge. Output depends only on the
//! wiring, so repeated runs are byte-identical.

use std::fmt::Write;

use wdsec::wiring::{Architecture, BoxShape, SourceExpr, SourceRef, Wiring};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

struct Ports {
    inputs: Vec<String>,
    outputs: Vec<String>,
}

fn port_ids(prefix: &str, b: &BoxShape) -> Ports {
    Ports {
        inputs: (0..b.inputs().len()).map(|j| format!("{prefix}_in{j}")).collect(),
        outputs: (0..b.outputs().len()).map(|j| format!("{prefix}_out{j}")).collect(),
    }
}

#[derive(Default)]
struct Dot {
    body: String,
    edges: String,
    consts: usize,
    tables: usize,
}

impl Dot {
    fn line(&mut self, indent: usize, text: &str) {
        let _ = writeln!(self.body, "{}{}", "  ".repeat(indent), text);
    }

    fn port_nodes(&mut self, indent: usize, b: &BoxShape, ids: &Ports, qualified: bool) {
        let name = |p: &str| if qualified { format!("{}.{}", b.name(), p) } else { p.to_string() };
        let shape = if qualified { ", shape=plaintext" } else { "" };
        for (id, p) in ids.inputs.iter().zip(b.inputs()) {
            self.line(indent, &format!("{} [label={}{}];", quote(id), quote(&name(&p.name)), shape));
        }
        for (id, p) in ids.outputs.iter().zip(b.outputs()) {
            self.line(indent, &format!("{} [label={}{}];", quote(id), quote(&name(&p.name)), shape));
        }
    }

    fn edge(&mut self, from: &str, to: &str) {
        let _ = writeln!(self.edges, "  {} -> {};", quote(from), quote(to));
    }

    fn source_edges(&mut self, w: &Wiring, outer: &[Ports], inner: &[Ports], e: &SourceExpr, target: &str, alphabet: &[String]) {
        let id = |r: &SourceRef| match *r {
            SourceRef::OuterIn { boxi, port } => outer[boxi].inputs[port].clone(),
            SourceRef::InnerOut { boxi, port } => inner[boxi].outputs[port].clone(),
        };
        match e {
            SourceExpr::Ref(r) => self.edge(&id(r), target),
            SourceExpr::Const(c) => {
                let node = format!("const{}", self.consts);
                self.consts += 1;
                let _ = writeln!(
                    self.edges,
                    "  {} [label={}, shape=box, style=dashed];",
                    quote(&node),
                    quote(&alphabet[*c])
                );
                self.edge(&node, target);
            }
            SourceExpr::Table { sources, .. } => {
                let node = format!("table{}", self.tables);
                self.tables += 1;
                let _ = writeln!(self.edges, "  {} [label=\"table\", shape=diamond];", quote(&node));
                for r in sources {
                    debug_assert!(w.source_port(r).is_some());
                    self.edge(&id(r), &node);
                }
                self.edge(&node, target);
            }
        }
    }

    fn wiring_edges(&mut self, w: &Wiring, outer: &[Ports], inner: &[Ports]) {
        for (bi, b) in w.inner().iter().enumerate() {
            for (pi, p) in b.inputs().iter().enumerate() {
                self.source_edges(w, outer, inner, &w.in_map()[bi][pi], &inner[bi].inputs[pi], &p.alphabet);
            }
        }
        for (bi, b) in w.outer().iter().enumerate() {
            for (pi, p) in b.outputs().iter().enumerate() {
                self.source_edges(w, outer, inner, &w.out_map()[bi][pi], &outer[bi].outputs[pi], &p.alphabet);
            }
        }
    }

    fn finish(self, name: &str, label: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", quote(name));
        out.push_str("  rankdir=LR;\n");
        let _ = writeln!(out, "  label={};", quote(label));
        out.push_str("  node [shape=circle, fontsize=10];\n");
        out.push_str(&self.body);
        out.push_str(&self.edges);
        out.push_str("}\n");
        out
    }
}

/// A flat wiring: outer ports at top level, one cluster per inner box.
pub fn wiring_dot(name: &str, w: &Wiring) -> String {
    let mut dot = Dot::default();
    let outer: Vec<Ports> = w
        .outer()
        .iter()
        .enumerate()
        .map(|(i, b)| port_ids(&format!("o{i}"), b))
        .collect();
    let inner: Vec<Ports> = w
        .inner()
        .iter()
        .enumerate()
        .map(|(i, b)| port_ids(&format!("i{i}"), b))
        .collect();
    for (b, ids) in w.outer().iter().zip(&outer) {
        dot.port_nodes(1, b, ids, true);
    }
    for (i, (b, ids)) in w.inner().iter().zip(&inner).enumerate() {
        dot.line(1, &format!("subgraph {} {{", quote(&format!("cluster_i{i}"))));
        dot.line(2, &format!("label={};", quote(b.name())));
        dot.port_nodes(2, b, ids, false);
        dot.line(1, "}");
    }
    dot.wiring_edges(w, &outer, &inner);
    let label: Vec<&str> = w.outer().iter().map(|b| b.name()).collect();
    dot.finish(name, &label.join(" ⊗ "))
}

fn arch_clusters(dot: &mut Dot, a: &Architecture, path: &str, indent: usize) {
    let Some((w, children)) = a.decomposition() else {
        return;
    };
    let outer = [port_ids(path, a.root())];
    let inner: Vec<Ports> = children
        .iter()
        .enumerate()
        .map(|(i, c)| port_ids(&format!("{path}_{i}"), c.root()))
        .collect();
    for (i, (c, ids)) in children.iter().zip(&inner).enumerate() {
        let child = format!("{path}_{i}");
        dot.line(indent, &format!("subgraph {} {{", quote(&format!("cluster_{child}"))));
        dot.line(indent + 1, &format!("label={};", quote(c.root().name())));
        dot.port_nodes(indent + 1, c.root(), ids, false);
        arch_clusters(dot, c, &child, indent + 1);
        dot.line(indent, "}");
    }
    dot.wiring_edges(w, &outer, &inner);
}

/// A hierarchical architecture: every decomposed box is a cluster nesting
/// its parts, with the edges of its own wiring.
pub fn architecture_dot(name: &str, a: &Architecture) -> String {
    let mut dot = Dot::default();
    dot.port_nodes(1, a.root(), &port_ids("r", a.root()), true);
    arch_clusters(&mut dot, a, "r", 1);
    dot.finish(name, a.root().name())
}
