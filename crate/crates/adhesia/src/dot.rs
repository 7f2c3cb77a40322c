//! GraphViz rendering: containers as nested clusters, hyperedges as box
//! nodes with incidence arcs. Output is deterministic and stable under
//! re-serialization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::graph::{node_properties, CoalgGraph};
use crate::term::{AtomId, NestedTerm};

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders a graph as DOT text.
pub fn export_dot(g: &CoalgGraph) -> String {
    let mut out = String::from("digraph G {\n");
    let _ = writeln!(out, "  compound=true;");

    let props = node_properties(g);
    // first parent of each node among the containers, in canonical order
    let mut parent: BTreeMap<AtomId, AtomId> = BTreeMap::new();
    for c in &props.containers {
        if let Some(members) = g.contains[c].set_members() {
            for m in members {
                if let NestedTerm::Atom(a) = m {
                    if g.nodes.contains(a) && !parent.contains_key(a) && a != c {
                        parent.insert(a.clone(), c.clone());
                    }
                }
            }
        }
    }
    // extra containments beyond the first parent, drawn as dashed arcs
    let mut extra: Vec<(AtomId, AtomId)> = Vec::new();
    for c in &props.containers {
        if let Some(members) = g.contains[c].set_members() {
            for m in members {
                if let NestedTerm::Atom(a) = m {
                    if g.nodes.contains(a) && parent.get(a) != Some(c) && a != c {
                        extra.push((c.clone(), a.clone()));
                    }
                }
            }
        }
    }

    let roots: Vec<AtomId> = g
        .nodes
        .iter()
        .filter(|n| !parent.contains_key(*n))
        .cloned()
        .collect();
    let mut children: BTreeMap<AtomId, Vec<AtomId>> = BTreeMap::new();
    for (child, p) in &parent {
        children.entry(p.clone()).or_default().push(child.clone());
    }

    fn emit_node(
        out: &mut String,
        containers: &BTreeSet<AtomId>,
        children: &BTreeMap<AtomId, Vec<AtomId>>,
        n: &AtomId,
        indent: usize,
    ) {
        let pad = "  ".repeat(indent);
        if containers.contains(n) {
            let _ = writeln!(out, "{pad}subgraph {} {{", quoted(&format!("cluster_{n}")));
            let _ = writeln!(out, "{pad}  label={};", quoted(&n.0));
            let _ = writeln!(
                out,
                "{pad}  {} [shape=point, style=invis];",
                quoted(&format!("{n}__anchor"))
            );
            if let Some(kids) = children.get(n) {
                for kid in kids {
                    emit_node(out, containers, children, kid, indent + 1);
                }
            }
            let _ = writeln!(out, "{pad}}}");
        } else {
            let _ = writeln!(out, "{pad}{} [shape=circle];", quoted(&n.0));
        }
    }

    for n in &roots {
        emit_node(&mut out, &props.containers, &children, n, 1);
    }
    for (c, member) in &extra {
        let tail = format!("{c}__anchor");
        let _ = writeln!(
            out,
            "  {} -> {} [style=dashed, ltail={}];",
            quoted(&tail),
            quoted(&member.0),
            quoted(&format!("cluster_{c}"))
        );
    }

    for e in g.edges.iter() {
        let _ = writeln!(out, "  {} [shape=box];", quoted(&e.0));
        for (target, label) in incidences(&g.neighbours[e]) {
            let attrs = match label {
                Some(l) => format!("label={}", quoted(&l)),
                None => String::new(),
            };
            let head = if g.nodes.contains(&target) && node_is_container(g, &target) {
                // arcs into containers point at their anchor
                format!("{target}__anchor")
            } else {
                target.0.clone()
            };
            if attrs.is_empty() {
                let _ = writeln!(out, "  {} -> {};", quoted(&e.0), quoted(&head));
            } else {
                let _ = writeln!(out, "  {} -> {} [{}];", quoted(&e.0), quoted(&head), attrs);
            }
        }
    }

    out.push_str("}\n");
    out
}

fn node_is_container(g: &CoalgGraph, n: &AtomId) -> bool {
    g.contains.get(n).map(NestedTerm::is_set).unwrap_or(false)
}

/// Atoms an edge is incident to, with a positional label for pair and
/// sequence components.
fn incidences(t: &NestedTerm) -> Vec<(AtomId, Option<String>)> {
    let mut out = Vec::new();
    walk(t, None, &mut out);
    out.sort();
    out.dedup();
    out
}

fn walk(t: &NestedTerm, label: Option<String>, out: &mut Vec<(AtomId, Option<String>)>) {
    match t {
        NestedTerm::Atom(a) => out.push((a.clone(), label)),
        NestedTerm::Set(xs) => {
            for x in xs {
                walk(x, label.clone(), out);
            }
        }
        NestedTerm::Pair(a, b) => {
            let prefix = label.map(|l| format!("{l}.")).unwrap_or_default();
            walk(a, Some(format!("{prefix}1")), out);
            walk(b, Some(format!("{prefix}2")), out);
        }
        NestedTerm::Seq(xs) => {
            let prefix = label.map(|l| format!("{l}.")).unwrap_or_default();
            for (i, x) in xs.iter().enumerate() {
                walk(x, Some(format!("{prefix}{}", i + 1)), out);
            }
        }
        NestedTerm::Unit => {}
    }
}
