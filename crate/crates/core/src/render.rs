//! Plain-text and Graphviz renderings of diagrams.
//!
//! Both work on the canonical port graph, so node ids are stable across
//! terms that are equal up to the monoidal laws.

use std::fmt::Write;

use crate::diagram::{Diagram, Generator, Sort};
use crate::portgraph::{PortGraph, Source, Target};

fn source_name(s: Source) -> String {
    match s {
        Source::Left(i) => format!("L{i}"),
        Source::Out(b, k) => format!("b{b}.{k}"),
    }
}

fn label(g: Generator) -> String {
    match g {
        Generator::Letter(c) => c.to_string(),
        g => g.keyword().to_string(),
    }
}

fn sort_code(s: Sort) -> char {
    s.code()
}

/// One ASCII box per generator, with the wire feeding each input on the
/// left and the name of each output wire on the right.
pub fn render_text(d: &Diagram) -> String {
    let g = PortGraph::from_diagram(d).canonical();
    let sorts = |i: &crate::diagram::Interface| -> String {
        let v: Vec<String> = i.sorts().iter().map(|s| sort_code(*s).to_string()).collect();
        if v.is_empty() {
            "e".into()
        } else {
            v.join(" ")
        }
    };
    let mut out = format!("diagram {} -> {}\n", sorts(g.dom()), sorts(g.cod()));
    for (b, gen) in g.boxes().iter().enumerate() {
        let name = label(*gen);
        let ins: Vec<String> = (0..gen.arity_in()).map(|k| source_name(g.input_source(b, k))).collect();
        let outs: Vec<String> = (0..gen.arity_out()).map(|k| format!("b{b}.{k}")).collect();
        let rows = ins.len().max(outs.len()).max(1);
        let pad = ins.iter().map(String::len).max().unwrap_or(0);
        let inner = name.len() + 2;
        let blank = " ".repeat(pad + 2);
        let _ = writeln!(out, "b{b}:");
        let _ = writeln!(out, "{blank}+{}+", "-".repeat(inner));
        for r in 0..rows {
            let left = match ins.get(r) {
                Some(s) => format!("{s:>pad$} -|"),
                None => format!("{blank}|"),
            };
            let mid = if r == 0 {
                format!(" {name} ")
            } else {
                " ".repeat(inner)
            };
            let right = match outs.get(r) {
                Some(s) => format!("|- {s}"),
                None => "|".into(),
            };
            let _ = writeln!(out, "{left}{mid}{right}");
        }
        let _ = writeln!(out, "{blank}+{}+", "-".repeat(inner));
    }
    for j in 0..g.cod().len() {
        let _ = writeln!(out, "R{j} <- {}", source_name(g.right_source(j)));
    }
    out
}

/// Graphviz `digraph`. Boundary ports are pinned to the first and last
/// rank; ◀ wires are drawn against the direction of flow.
pub fn render_dot(d: &Diagram) -> String {
    let g = PortGraph::from_diagram(d).canonical();
    let mut body = String::new();
    let (n, m) = (g.dom().len(), g.cod().len());
    if n > 0 {
        let ids: Vec<String> = (0..n).map(|i| format!("L{i}")).collect();
        let _ = writeln!(body, "  {{ rank=min; {}; }}", ids.join("; "));
    }
    if m > 0 {
        let ids: Vec<String> = (0..m).map(|j| format!("R{j}")).collect();
        let _ = writeln!(body, "  {{ rank=max; {}; }}", ids.join("; "));
    }
    for (i, s) in g.dom().sorts().iter().enumerate() {
        let _ = writeln!(body, "  L{i} [shape=point, xlabel=\"{}\"];", sort_code(*s));
    }
    for (j, s) in g.cod().sorts().iter().enumerate() {
        let _ = writeln!(body, "  R{j} [shape=point, xlabel=\"{}\"];", sort_code(*s));
    }
    for (b, gen) in g.boxes().iter().enumerate() {
        let shape = match gen {
            Generator::Letter(_) => "box",
            g if g.is_white() => "circle, style=\"\"",
            Generator::Cap | Generator::Cup => "plaintext",
            _ => "circle, style=filled, fillcolor=black, fontcolor=white",
        };
        let _ = writeln!(body, "  b{b} [label=\"{}\", shape={shape}];", label(*gen));
    }
    for s in g.wires() {
        let t = g.target(s);
        let from = match s {
            Source::Left(i) => format!("L{i}"),
            Source::Out(b, _) => format!("b{b}"),
        };
        let to = match t {
            Target::Right(j) => format!("R{j}"),
            Target::In(b, _) => format!("b{b}"),
        };
        let dir = match g.sort_of(s) {
            Sort::Right => "",
            Sort::Left => ", dir=back",
        };
        let tail = match s {
            Source::Out(_, k) => k.to_string(),
            Source::Left(_) => String::new(),
        };
        let head = match t {
            Target::In(_, k) => k.to_string(),
            Target::Right(_) => String::new(),
        };
        let _ = writeln!(
            body,
            "  {from} -> {to} [taillabel=\"{tail}\", headlabel=\"{head}\"{dir}];"
        );
    }
    if body.is_empty() {
        return "digraph kda {\n}\n".into();
    }
    format!("digraph kda {{\n  rankdir=LR;\n{body}}}\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse_regex;

    #[test]
    fn text_sketch_of_copy() {
        let t = render_text(&Diagram::gen(Generator::Copy));
        assert!(t.starts_with("diagram r -> r r\n"));
        assert!(t.contains("L0 -| copy |- b0.0"));
        assert!(t.contains("|- b0.1"));
        assert!(t.contains("R1 <- b0.1"));
    }

    #[test]
    fn dot_of_empty_diagram_has_empty_body() {
        assert_eq!(render_dot(&Diagram::empty()), "digraph kda {\n}\n");
    }

    #[test]
    fn dot_of_star_has_feedback() {
        let dot = render_dot(&parse_regex("a*").unwrap().to_diagram());
        let nodes = dot.lines().filter(|l| l.contains(" [label=")).count();
        let edges = dot.lines().filter(|l| l.contains(" -> ")).count();
        // merge, copy, a, cap, cup; one wire per output port plus the input
        assert_eq!(nodes, 5);
        assert_eq!(edges, 7);
        assert!(dot.contains("label=\"cap\"") && dot.contains("label=\"cup\""));
        assert!(dot.contains("dir=back"));
    }

    #[test]
    fn rendering_ignores_bracketing() {
        let a = Diagram::letter('a');
        let x = a.then(&a).then(&a);
        let y = a.then(&a.then(&a));
        assert_eq!(render_dot(&x), render_dot(&y));
        assert_eq!(render_text(&x), render_text(&y));
    }
}
