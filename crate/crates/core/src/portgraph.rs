//! Port graphs: the canonical representative of a term modulo the laws of
//! symmetric monoidal categories.
//!
//! Every wire is identified by its source end. Boxes have ordered input and
//! output ports, so a connected component is rigid once one of its ports is
//! pinned; canonical labelling is a breadth-first discovery from the
//! boundary. Components not reachable from the boundary are labelled from
//! their lexicographically least root and sorted.

use std::collections::{BTreeSet, VecDeque};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diagram::{Diagram, DiagramError, Generator, Interface, Sort, Term};

/// Source end of a wire: a left boundary port or a box output port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Left(usize),
    Out(usize, usize),
}

/// Target end of a wire: a right boundary port or a box input port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Right(usize),
    In(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("port graph contains a directed cycle")]
    Cyclic,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortGraph {
    dom: Interface,
    cod: Interface,
    boxes: Vec<Generator>,
    /// Source feeding each input port of each box.
    inputs: Vec<Vec<Source>>,
    /// Source feeding each right boundary port.
    right: Vec<Source>,
    left_targets: Vec<Target>,
    out_targets: Vec<Vec<Target>>,
}

impl PortGraph {
    /// Assemble a graph from its source tables; targets are derived.
    ///
    /// # Panics
    /// Panics if some source does not meet exactly one target.
    pub fn from_parts(
        dom: Interface,
        cod: Interface,
        boxes: Vec<Generator>,
        inputs: Vec<Vec<Source>>,
        right: Vec<Source>,
    ) -> Self {
        const UNSET: Target = Target::Right(usize::MAX);
        let mut left_targets = vec![UNSET; dom.len()];
        let mut out_targets: Vec<Vec<Target>> =
            boxes.iter().map(|g| vec![UNSET; g.arity_out()]).collect();
        let mut set = |s: Source, t: Target| {
            let slot = match s {
                Source::Left(i) => &mut left_targets[i],
                Source::Out(b, k) => &mut out_targets[b][k],
            };
            assert_eq!(*slot, UNSET, "source {s:?} used twice");
            *slot = t;
        };
        for (b, ins) in inputs.iter().enumerate() {
            assert_eq!(ins.len(), boxes[b].arity_in());
            for (k, s) in ins.iter().enumerate() {
                set(*s, Target::In(b, k));
            }
        }
        for (j, s) in right.iter().enumerate() {
            set(*s, Target::Right(j));
        }
        assert!(left_targets.iter().all(|t| *t != UNSET), "dangling left port");
        assert!(
            out_targets.iter().flatten().all(|t| *t != UNSET),
            "dangling box output"
        );
        PortGraph {
            dom,
            cod,
            boxes,
            inputs,
            right,
            left_targets,
            out_targets,
        }
    }

    pub fn from_diagram(d: &Diagram) -> Self {
        let mut boxes = Vec::new();
        let mut inputs = Vec::new();
        let start: Vec<Source> = (0..d.dom().len()).map(Source::Left).collect();
        let right = build(d, start, &mut boxes, &mut inputs);
        Self::from_parts(d.dom().clone(), d.cod().clone(), boxes, inputs, right)
    }

    pub fn dom(&self) -> &Interface {
        &self.dom
    }

    pub fn cod(&self) -> &Interface {
        &self.cod
    }

    pub fn boxes(&self) -> &[Generator] {
        &self.boxes
    }

    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }

    pub fn input_source(&self, b: usize, k: usize) -> Source {
        self.inputs[b][k]
    }

    pub fn right_source(&self, j: usize) -> Source {
        self.right[j]
    }

    pub fn target(&self, s: Source) -> Target {
        match s {
            Source::Left(i) => self.left_targets[i],
            Source::Out(b, k) => self.out_targets[b][k],
        }
    }

    pub fn source(&self, t: Target) -> Source {
        match t {
            Target::Right(j) => self.right[j],
            Target::In(b, k) => self.inputs[b][k],
        }
    }

    pub fn sort_of(&self, s: Source) -> Sort {
        match s {
            Source::Left(i) => self.dom.sorts()[i],
            Source::Out(b, k) => self.boxes[b].cod().sorts()[k],
        }
    }

    /// All wires, as their sources, in a fixed order.
    pub fn wires(&self) -> Vec<Source> {
        let mut out: Vec<Source> = (0..self.dom.len()).map(Source::Left).collect();
        for (b, g) in self.boxes.iter().enumerate() {
            out.extend((0..g.arity_out()).map(|k| Source::Out(b, k)));
        }
        out
    }

    /// Boxes adjacent to `b` in port order: inputs first, then outputs.
    fn neighbours(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        let ins = self.inputs[b].iter().filter_map(|s| match s {
            Source::Out(x, _) => Some(*x),
            Source::Left(_) => None,
        });
        let outs = self.out_targets[b].iter().filter_map(|t| match t {
            Target::In(x, _) => Some(*x),
            Target::Right(_) => None,
        });
        ins.chain(outs)
    }

    /// Renumber boxes: `order[new] = old`.
    pub fn permuted(&self, order: &[usize]) -> PortGraph {
        let mut new_of = vec![usize::MAX; self.boxes.len()];
        for (n, &o) in order.iter().enumerate() {
            new_of[o] = n;
        }
        let map = |s: Source| match s {
            Source::Left(i) => Source::Left(i),
            Source::Out(b, k) => Source::Out(new_of[b], k),
        };
        PortGraph::from_parts(
            self.dom.clone(),
            self.cod.clone(),
            order.iter().map(|&o| self.boxes[o]).collect(),
            order
                .iter()
                .map(|&o| self.inputs[o].iter().map(|s| map(*s)).collect())
                .collect(),
            self.right.iter().map(|s| map(*s)).collect(),
        )
    }

    /// Canonical box order: `order[new] = old`.
    pub fn canonical_order(&self) -> Vec<usize> {
        let n = self.boxes.len();
        let mut index = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut seeds = Vec::new();
        for t in &self.left_targets {
            if let Target::In(b, _) = t {
                seeds.push(*b);
            }
        }
        for s in &self.right {
            if let Source::Out(b, _) = s {
                seeds.push(*b);
            }
        }
        self.discover(&seeds, &mut index, &mut order);

        let mut components: Vec<(String, Vec<usize>)> = Vec::new();
        let mut seen = index.iter().map(|i| *i != usize::MAX).collect::<Vec<_>>();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([root]);
            seen[root] = true;
            while let Some(b) = queue.pop_front() {
                comp.push(b);
                for x in self.neighbours(b) {
                    if !seen[x] {
                        seen[x] = true;
                        queue.push_back(x);
                    }
                }
            }
            let mut best: Option<(String, Vec<usize>)> = None;
            for &r in &comp {
                let mut local_index = vec![usize::MAX; n];
                let mut local_order = Vec::new();
                self.discover(&[r], &mut local_index, &mut local_order);
                let code = self.encode_component(&local_order, &local_index);
                if best.as_ref().is_none_or(|(c, _)| code < *c) {
                    best = Some((code, local_order));
                }
            }
            components.push(best.expect("non-empty component"));
        }
        components.sort();
        for (_, comp_order) in components {
            for b in comp_order {
                index[b] = order.len();
                order.push(b);
            }
        }
        order
    }

    fn discover(&self, seeds: &[usize], index: &mut [usize], order: &mut Vec<usize>) {
        let mut queue = VecDeque::new();
        let mut visit = |b: usize, order: &mut Vec<usize>, queue: &mut VecDeque<usize>| {
            if index[b] == usize::MAX {
                index[b] = order.len();
                order.push(b);
                queue.push_back(b);
            }
        };
        for &b in seeds {
            visit(b, order, &mut queue);
        }
        while let Some(b) = queue.pop_front() {
            let ns: Vec<usize> = self.neighbours(b).collect();
            for x in ns {
                visit(x, order, &mut queue);
            }
        }
    }

    fn encode_component(&self, order: &[usize], index: &[usize]) -> String {
        let mut out = String::new();
        for &b in order {
            push_label(&mut out, self.boxes[b]);
            out.push('<');
            for s in &self.inputs[b] {
                push_source(&mut out, *s, index);
            }
            out.push(';');
        }
        out
    }

    pub fn canonical(&self) -> PortGraph {
        self.permuted(&self.canonical_order())
    }

    /// Encoding of this graph with its current box numbering. Equal for
    /// two canonical graphs iff they are isomorphic.
    pub fn encoding(&self) -> String {
        let identity: Vec<usize> = (0..self.boxes.len()).collect();
        let mut out = format!("{}>{}|", self.dom, self.cod);
        for (b, g) in self.boxes.iter().enumerate() {
            push_label(&mut out, *g);
            out.push('<');
            for s in &self.inputs[b] {
                push_source(&mut out, *s, &identity);
            }
            out.push(';');
        }
        out.push('|');
        for s in &self.right {
            push_source(&mut out, *s, &identity);
        }
        out
    }

    /// Hash of the canonical encoding, 16 hex digits.
    pub fn canonical_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().encoding().as_bytes());
        hex::encode(&digest[..8])
    }

    /// Box order in which every box comes after the boxes feeding it,
    /// preferring lower indices.
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let n = self.boxes.len();
        let mut pending: Vec<usize> = self
            .inputs
            .iter()
            .map(|ins| ins.iter().filter(|s| matches!(s, Source::Out(..))).count())
            .collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&b| pending[b] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(b) = ready.pop_first() {
            order.push(b);
            for t in &self.out_targets[b] {
                if let Target::In(x, _) = t {
                    pending[*x] -= 1;
                    if pending[*x] == 0 {
                        ready.insert(*x);
                    }
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(GraphError::Cyclic)
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Read the graph back as a term: one layer per box in topological
    /// order, with symmetries bringing the box inputs together.
    pub fn to_diagram(&self) -> Result<Diagram, GraphError> {
        let order = self.topological_order()?;
        let mut cur: Vec<Source> = (0..self.dom.len()).map(Source::Left).collect();
        let mut layers: Vec<Diagram> = Vec::new();
        let sorts = |cur: &[Source]| -> Vec<Sort> { cur.iter().map(|s| self.sort_of(*s)).collect() };
        for b in order {
            let g = self.boxes[b];
            let pos: Vec<usize> = self.inputs[b]
                .iter()
                .map(|s| cur.iter().position(|c| c == s).expect("source placed"))
                .collect();
            let (lo, hi) = match (pos.iter().min(), pos.iter().max()) {
                (Some(&lo), Some(&hi)) => (lo, hi + 1),
                _ => (0, 0),
            };
            let rest: Vec<usize> = (lo..hi).filter(|p| !pos.contains(p)).collect();
            let mut span_order = pos.clone();
            span_order.extend(&rest);
            let span_sorts = sorts(&cur[lo..hi]);
            let local: Vec<usize> = span_order.iter().map(|p| p - lo).collect();
            if local.iter().enumerate().any(|(i, p)| i != *p) {
                layers.push(pad(
                    &sorts(&cur[..lo]),
                    permutation(&span_sorts, &local),
                    &sorts(&cur[hi..]),
                ));
            }
            let rest_sorts: Vec<Sort> = rest.iter().map(|p| self.sort_of(cur[*p])).collect();
            let mut after_sorts = rest_sorts;
            after_sorts.extend(sorts(&cur[hi..]));
            layers.push(pad(&sorts(&cur[..lo]), Diagram::gen(g), &after_sorts));
            let mut next: Vec<Source> = cur[..lo].to_vec();
            next.extend((0..g.arity_out()).map(|k| Source::Out(b, k)));
            next.extend(rest.iter().map(|p| cur[*p]));
            next.extend_from_slice(&cur[hi..]);
            cur = next;
        }
        let fin: Vec<usize> = self
            .right
            .iter()
            .map(|s| cur.iter().position(|c| c == s).expect("source placed"))
            .collect();
        if fin.iter().enumerate().any(|(i, p)| i != *p) {
            layers.push(permutation(&sorts(&cur), &fin));
        }
        if layers.is_empty() {
            return Ok(Diagram::ids(&self.dom));
        }
        Ok(Diagram::seq_all(layers))
    }

    /// Canonical term for this graph (readback of the canonical form).
    pub fn canonical_diagram(&self) -> Diagram {
        self.canonical()
            .to_diagram()
            .expect("graphs built from terms are acyclic")
    }
}

fn push_label(out: &mut String, g: Generator) {
    match g {
        Generator::Letter(a) => {
            out.push('\'');
            out.push(a);
        }
        g => out.push_str(g.keyword()),
    }
}

fn push_source(out: &mut String, s: Source, index: &[usize]) {
    match s {
        Source::Left(i) => out.push_str(&format!("L{i},")),
        Source::Out(b, k) => out.push_str(&format!("b{}.{k},", index[b])),
    }
}

fn build(
    d: &Diagram,
    inputs: Vec<Source>,
    boxes: &mut Vec<Generator>,
    box_inputs: &mut Vec<Vec<Source>>,
) -> Vec<Source> {
    match d.term() {
        Term::Empty | Term::Id(_) => inputs,
        Term::Sym(..) => vec![inputs[1], inputs[0]],
        Term::Gen(g) => {
            let b = boxes.len();
            boxes.push(*g);
            box_inputs.push(inputs);
            (0..g.arity_out()).map(|k| Source::Out(b, k)).collect()
        }
        Term::Seq(c, e) => {
            let mid = build(c, inputs, boxes, box_inputs);
            build(e, mid, boxes, box_inputs)
        }
        Term::Par(c, e) => {
            let split = c.dom().len();
            let mut left = inputs;
            let right = left.split_off(split);
            let mut out = build(c, left, boxes, box_inputs);
            out.extend(build(e, right, boxes, box_inputs));
            out
        }
    }
}

/// `ids(before) ⊕ d ⊕ ids(after)`, omitting empty parts.
pub fn pad(before: &[Sort], d: Diagram, after: &[Sort]) -> Diagram {
    let mut parts = Vec::new();
    if !before.is_empty() {
        parts.push(Diagram::ids(&Interface::new(before.to_vec())));
    }
    parts.push(d);
    if !after.is_empty() {
        parts.push(Diagram::ids(&Interface::new(after.to_vec())));
    }
    Diagram::par_all(parts)
}

/// Permutation diagram on wires of the given sorts. Output position `i`
/// carries input wire `perm[i]`. Built as an odd-even transposition network.
pub fn permutation(sorts: &[Sort], perm: &[usize]) -> Diagram {
    let n = sorts.len();
    assert_eq!(perm.len(), n);
    let mut rank = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        rank[p] = i;
    }
    // arr[pos] = input wire currently at pos
    let mut arr: Vec<usize> = (0..n).collect();
    let mut layers = Vec::new();
    let mut parity = 0;
    let mut quiet_rounds = 0;
    while quiet_rounds < 2 {
        let mut parts = Vec::new();
        let mut swapped = false;
        let mut i = 0;
        while i < n {
            if i % 2 == parity && i + 1 < n && rank[arr[i]] > rank[arr[i + 1]] {
                parts.push(Diagram::sym(sorts[arr[i]], sorts[arr[i + 1]]));
                arr.swap(i, i + 1);
                swapped = true;
                i += 2;
            } else {
                parts.push(Diagram::id(sorts[arr[i]]));
                i += 1;
            }
        }
        if swapped {
            layers.push(Diagram::par_all(parts));
            quiet_rounds = 0;
        } else {
            quiet_rounds += 1;
        }
        parity ^= 1;
    }
    if layers.is_empty() {
        Diagram::ids(&Interface::new(sorts.to_vec()))
    } else {
        Diagram::seq_all(layers)
    }
}

/// Equality modulo the laws of symmetric monoidal categories.
pub fn graph_eq(c: &Diagram, d: &Diagram) -> Result<bool, DiagramError> {
    c.check_same_type(d)?;
    Ok(PortGraph::from_diagram(c).canonical() == PortGraph::from_diagram(d).canonical())
}

/// Canonical hash of a diagram; equal for graph-equal diagrams.
pub fn diagram_hash(d: &Diagram) -> String {
    PortGraph::from_diagram(d).canonical_hash()
}

/// An occurrence of a pattern in a host graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    /// Host box for each pattern box.
    pub boxes: Vec<usize>,
    /// Host wire for each pattern wire running straight from the left to
    /// the right boundary, in order of the pattern's left ports.
    pub wires: Vec<Source>,
}

impl Match {
    pub fn to_location(&self) -> String {
        let boxes: Vec<String> = self.boxes.iter().map(|b| b.to_string()).collect();
        let wires: Vec<String> = self
            .wires
            .iter()
            .map(|s| match s {
                Source::Left(i) => format!("L{i}"),
                Source::Out(b, k) => format!("b{b}.{k}"),
            })
            .collect();
        format!("g:{};{}", boxes.join(","), wires.join(","))
    }

    pub fn parse_location(s: &str) -> Option<Match> {
        let body = s.strip_prefix("g:")?;
        let (b, w) = body.split_once(';')?;
        let boxes = if b.is_empty() {
            Vec::new()
        } else {
            b.split(',').map(|x| x.parse().ok()).collect::<Option<Vec<_>>>()?
        };
        let wires = if w.is_empty() {
            Vec::new()
        } else {
            w.split(',').map(parse_source).collect::<Option<Vec<_>>>()?
        };
        Some(Match { boxes, wires })
    }
}

fn parse_source(s: &str) -> Option<Source> {
    if let Some(i) = s.strip_prefix('L') {
        return Some(Source::Left(i.parse().ok()?));
    }
    let (b, k) = s.strip_prefix('b')?.split_once('.')?;
    Some(Source::Out(b.parse().ok()?, k.parse().ok()?))
}

/// Result of replacing a matched subgraph.
#[derive(Clone, Debug)]
pub struct Replacement {
    pub graph: PortGraph,
    /// New index of each host box, `None` for removed boxes.
    pub host_map: Vec<Option<usize>>,
    /// New index of each replacement box.
    pub inserted: Vec<usize>,
}

impl PortGraph {
    fn pass_through(&self) -> Vec<(usize, usize)> {
        self.left_targets
            .iter()
            .enumerate()
            .filter_map(|(i, t)| match t {
                Target::Right(j) => Some((i, *j)),
                Target::In(..) => None,
            })
            .collect()
    }

    /// Check a candidate match; returns false if it is not an occurrence.
    pub fn is_match(&self, pattern: &PortGraph, m: &Match) -> bool {
        let pt = pattern.pass_through();
        if m.boxes.len() != pattern.boxes.len() || m.wires.len() != pt.len() {
            return false;
        }
        let mut used = vec![false; self.boxes.len()];
        for (pb, &hb) in m.boxes.iter().enumerate() {
            if hb >= self.boxes.len() || used[hb] || self.boxes[hb] != pattern.boxes[pb] {
                return false;
            }
            used[hb] = true;
        }
        let in_match = |s: Source| matches!(s, Source::Out(b, _) if used[b]);
        let target_in_match = |t: Target| matches!(t, Target::In(b, _) if used[b]);
        for (pb, &hb) in m.boxes.iter().enumerate() {
            for (k, s) in pattern.inputs[pb].iter().enumerate() {
                let hs = self.inputs[hb][k];
                match s {
                    Source::Out(pb2, k2) => {
                        if hs != Source::Out(m.boxes[*pb2], *k2) {
                            return false;
                        }
                    }
                    Source::Left(_) => {
                        if in_match(hs) {
                            return false;
                        }
                    }
                }
            }
            for (k, t) in pattern.out_targets[pb].iter().enumerate() {
                if let Target::Right(_) = t {
                    if target_in_match(self.out_targets[hb][k]) {
                        return false;
                    }
                }
            }
        }
        let mut seen = BTreeSet::new();
        for ((i, _), w) in pt.iter().zip(&m.wires) {
            let valid = match *w {
                Source::Left(x) => x < self.dom.len(),
                Source::Out(b, k) => b < self.boxes.len() && k < self.boxes[b].arity_out(),
            };
            if !valid
                || in_match(*w)
                || target_in_match(self.target(*w))
                || self.sort_of(*w) != pattern.dom.sorts()[*i]
                || !seen.insert(*w)
            {
                return false;
            }
        }
        self.is_convex(&used, &m.wires)
    }

    /// No path leaves the matched region (boxes and pass-through wires)
    /// and comes back into it.
    fn is_convex(&self, used: &[bool], wires: &[Source]) -> bool {
        // Boxes whose outputs feed a matched pass-through wire count as entry points.
        let mut entry = used.to_vec();
        for w in wires {
            if let Source::Out(b, _) = w {
                entry[*b] = true;
            }
        }
        let mut seen = vec![false; self.boxes.len()];
        let mut stack = Vec::new();
        let mut exits: Vec<Target> = Vec::new();
        for (b, u) in used.iter().enumerate() {
            if *u {
                exits.extend(self.out_targets[b].iter().copied());
            }
        }
        exits.extend(wires.iter().map(|w| self.target(*w)));
        for t in exits {
            if let Target::In(x, _) = t {
                if !used[x] && !seen[x] {
                    seen[x] = true;
                    stack.push(x);
                }
            }
        }
        while let Some(b) = stack.pop() {
            if entry[b] {
                return false;
            }
            for t in &self.out_targets[b] {
                if let Target::In(x, _) = t {
                    if used[*x] {
                        return false;
                    }
                    if !seen[*x] {
                        seen[*x] = true;
                        stack.push(*x);
                    }
                }
            }
        }
        true
    }

    /// All occurrences of `pattern`, in lexicographic order.
    pub fn find_matches(&self, pattern: &PortGraph) -> Vec<Match> {
        let mut results = Vec::new();
        let mut assign = Vec::new();
        self.extend_match(pattern, &mut assign, &mut results);
        results.sort();
        results.dedup();
        results
    }

    fn extend_match(&self, pattern: &PortGraph, assign: &mut Vec<usize>, out: &mut Vec<Match>) {
        let pb = assign.len();
        if pb == pattern.boxes.len() {
            let pt = pattern.pass_through();
            let wires = self.wires();
            let mut choice = Vec::new();
            self.choose_wires(pattern, assign, &pt, &wires, &mut choice, out);
            return;
        }
        let mut candidates: Option<Vec<usize>> = None;
        for (k, s) in pattern.inputs[pb].iter().enumerate() {
            if let Source::Out(p2, k2) = s {
                if *p2 < pb {
                    if let Target::In(hb, hk) = self.target(Source::Out(assign[*p2], *k2)) {
                        candidates = Some(if hk == k { vec![hb] } else { vec![] });
                    } else {
                        candidates = Some(vec![]);
                    }
                    break;
                }
            }
        }
        if candidates.is_none() {
            for (k, t) in pattern.out_targets[pb].iter().enumerate() {
                if let Target::In(p2, k2) = t {
                    if *p2 < pb {
                        candidates = Some(match self.inputs[assign[*p2]][*k2] {
                            Source::Out(hb, hk) if hk == k => vec![hb],
                            _ => vec![],
                        });
                        break;
                    }
                }
            }
        }
        let candidates = candidates.unwrap_or_else(|| (0..self.boxes.len()).collect());
        for hb in candidates {
            if self.boxes[hb] != pattern.boxes[pb] || assign.contains(&hb) {
                continue;
            }
            assign.push(hb);
            self.extend_match(pattern, assign, out);
            assign.pop();
        }
    }

    fn choose_wires(
        &self,
        pattern: &PortGraph,
        assign: &[usize],
        pt: &[(usize, usize)],
        wires: &[Source],
        choice: &mut Vec<Source>,
        out: &mut Vec<Match>,
    ) {
        if choice.len() == pt.len() {
            let m = Match {
                boxes: assign.to_vec(),
                wires: choice.clone(),
            };
            if self.is_match(pattern, &m) {
                out.push(m);
            }
            return;
        }
        for w in wires {
            if choice.contains(w) {
                continue;
            }
            choice.push(*w);
            self.choose_wires(pattern, assign, pt, wires, choice, out);
            choice.pop();
        }
    }

    /// Replace the occurrence `m` of `pattern` by `rhs`, which must have the
    /// same interface as `pattern`.
    pub fn replace(
        &self,
        pattern: &PortGraph,
        m: &Match,
        rhs: &PortGraph,
    ) -> Result<Replacement, GraphError> {
        assert!(self.is_match(pattern, m), "replace called on a non-match");
        assert_eq!(pattern.dom, rhs.dom);
        assert_eq!(pattern.cod, rhs.cod);
        let mut used = vec![false; self.boxes.len()];
        for &b in &m.boxes {
            used[b] = true;
        }
        let mut host_map = vec![None; self.boxes.len()];
        let mut boxes = Vec::new();
        for (b, g) in self.boxes.iter().enumerate() {
            if !used[b] {
                host_map[b] = Some(boxes.len());
                boxes.push(*g);
            }
        }
        let inserted: Vec<usize> = (0..rhs.boxes.len()).map(|i| boxes.len() + i).collect();
        boxes.extend_from_slice(&rhs.boxes);

        let pt = pattern.pass_through();
        // Host source entering pattern left port i; host target leaving pattern right port j.
        let mut enter = vec![Source::Left(usize::MAX); pattern.dom.len()];
        let mut leave = vec![Target::Right(usize::MAX); pattern.cod.len()];
        for (i, t) in pattern.left_targets.iter().enumerate() {
            if let Target::In(pb, k) = t {
                enter[i] = self.inputs[m.boxes[*pb]][*k];
            }
        }
        for ((i, j), w) in pt.iter().zip(&m.wires) {
            enter[*i] = *w;
            leave[*j] = self.target(*w);
        }
        for (j, s) in pattern.right.iter().enumerate() {
            if let Source::Out(pb, k) = s {
                leave[j] = self.out_targets[m.boxes[*pb]][*k];
            }
        }
        let map_host = |s: Source| match s {
            Source::Left(i) => Source::Left(i),
            Source::Out(b, k) => Source::Out(host_map[b].expect("outside source"), k),
        };
        let map_rhs = |s: Source| match s {
            Source::Left(i) => map_host(enter[i]),
            Source::Out(rb, k) => Source::Out(inserted[rb], k),
        };

        let mut inputs: Vec<Vec<Source>> = Vec::with_capacity(boxes.len());
        let mut right: Vec<Source> = Vec::with_capacity(self.cod.len());
        let rerouted = |t: Target| leave.iter().position(|l| *l == t);
        for (b, ins) in self.inputs.iter().enumerate() {
            if used[b] {
                continue;
            }
            inputs.push(
                ins.iter()
                    .enumerate()
                    .map(|(k, s)| match rerouted(Target::In(b, k)) {
                        Some(j) => map_rhs(rhs.right[j]),
                        None => map_host(*s),
                    })
                    .collect(),
            );
        }
        for ins in &rhs.inputs {
            inputs.push(ins.iter().map(|s| map_rhs(*s)).collect());
        }
        for (j, s) in self.right.iter().enumerate() {
            right.push(match rerouted(Target::Right(j)) {
                Some(r) => map_rhs(rhs.right[r]),
                None => map_host(*s),
            });
        }
        let graph =
            PortGraph::from_parts(self.dom.clone(), self.cod.clone(), boxes, inputs, right);
        if !graph.is_acyclic() {
            return Err(GraphError::Cyclic);
        }
        Ok(Replacement {
            graph,
            host_map,
            inserted,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse;

    fn d(s: &str) -> Diagram {
        parse(s).unwrap()
    }

    fn eq(a: &str, b: &str) -> bool {
        graph_eq(&d(a), &d(b)).unwrap()
    }

    #[test]
    fn unit_law() {
        assert!(eq("(seq (id r) copy)", "copy"));
        assert!(eq("(seq (id r) (letter a))", "(letter a)"));
    }

    #[test]
    fn symmetry_naturality() {
        assert!(eq(
            "(seq (par (letter a) (letter b)) (sym r r))",
            "(seq (sym r r) (par (letter b) (letter a)))"
        ));
    }

    #[test]
    fn interchange_law() {
        assert!(eq(
            "(par (seq (letter a) (letter b)) (seq (letter c) (letter d)))",
            "(seq (par (letter a) (letter c)) (par (letter b) (letter d)))"
        ));
    }

    #[test]
    fn labels_matter() {
        assert!(!eq("(letter a)", "(letter b)"));
        assert!(!eq("copy", "(seq copy (sym r r))"));
        assert!(graph_eq(&d("copy"), &d("merge")).is_err());
    }

    #[test]
    fn double_symmetry_cancels() {
        assert!(eq("(seq (sym r l) (sym l r))", "(par (id r) (id l))"));
    }

    #[test]
    fn floating_components_are_canonical() {
        let loop1 = "(seq cup (seq (sym l r) cap))";
        let a = format!("(par {loop1} (par generate discard))");
        let b = format!("(par (par generate discard) {loop1})");
        assert!(eq(&a, &b));
        let c = format!("(par {loop1} (par generate (seq (letter a) discard)))");
        assert!(!eq(&a, &c));
    }

    #[test]
    fn readback_is_graph_equal() {
        for s in [
            "(seq copy (par (letter a) (letter b)))",
            "(seq (par (id r) cup) (par cap (id r)))",
            "(seq (par copy copy) (seq (par (id r) (par (sym r r) (id r))) (par merge merge)))",
            "(par generate (par discard (id l)))",
            "empty",
        ] {
            let x = d(s);
            let back = PortGraph::from_diagram(&x).canonical_diagram();
            assert!(graph_eq(&x, &back).unwrap(), "{s}");
        }
    }

    #[test]
    fn permutation_network() {
        let sorts = [Sort::Right, Sort::Left, Sort::Right, Sort::Right];
        let perm = [2, 0, 3, 1];
        let p = permutation(&sorts, &perm);
        let g = PortGraph::from_diagram(&p);
        for (i, &src) in perm.iter().enumerate() {
            assert_eq!(g.right_source(i), Source::Left(src));
        }
    }

    #[test]
    fn match_and_replace_copy_merge() {
        let host = PortGraph::from_diagram(&d("(seq (letter a) (seq copy merge))")).canonical();
        let pat = PortGraph::from_diagram(&d("(seq copy merge)")).canonical();
        let rhs = PortGraph::from_diagram(&d("(id r)"));
        let ms = host.find_matches(&pat);
        assert_eq!(ms.len(), 1);
        let r = host.replace(&pat, &ms[0], &rhs).unwrap();
        assert_eq!(r.graph.canonical(), PortGraph::from_diagram(&d("(letter a)")).canonical());
    }

    #[test]
    fn pass_through_pattern_matches_every_wire() {
        let host = PortGraph::from_diagram(&d("(seq (letter a) (letter b))")).canonical();
        let pat = PortGraph::from_diagram(&d("(id r)"));
        assert_eq!(host.find_matches(&pat).len(), 3);
    }

    #[test]
    fn non_convex_match_rejected() {
        // copy feeds a letter that feeds merge; the pattern copy ⊕ merge
        // would be non-convex through the letter.
        let host = PortGraph::from_diagram(&d(
            "(seq copy (seq (par (letter a) (id r)) merge))",
        ))
        .canonical();
        let pat = PortGraph::from_diagram(&d("(par copy merge)")).canonical();
        assert!(host.find_matches(&pat).is_empty());
    }

    #[test]
    fn location_round_trip() {
        let m = Match {
            boxes: vec![3, 1],
            wires: vec![Source::Left(0), Source::Out(2, 1)],
        };
        assert_eq!(Match::parse_location(&m.to_location()), Some(m));
        let e = Match {
            boxes: vec![],
            wires: vec![],
        };
        assert_eq!(e.to_location(), "g:;");
        assert_eq!(Match::parse_location("g:;"), Some(e));
    }
}
