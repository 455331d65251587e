//! Applying axioms and lemmas to diagrams.
//!
//! A rule is named either by an axiom (`B2`, or `E6:b` for a letter axiom
//! instantiated at `b`) or by a lemma (`det-init:reach`, `bisimulation`,
//! ...). Locations are term paths (`/`, `/0/1`) or port-graph matches in the
//! canonical graph of the diagram (`g:3,4;b1.0`).
//!
//! Lemma rules work on representation-shaped terms `(E ; d*) ; F` and are
//! checked by recomputing their matrices, so replaying a step is the same
//! computation as producing it.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::diagram::{format_path, parse_path, Diagram, Generator, Interface, Sort, Term};
use crate::encode::{
    matrix_of, matrix_to_diagram, representation_of, star, trace_canonical_form, EncodeError,
    LangMatrix, Representation,
};
use crate::interp::{AxiomInstance, Relation};
use crate::portgraph::{graph_eq, GraphError, Match, PortGraph, Source, Target};
use crate::regex::Alphabet;

use super::catalog::lookup;

/// Largest state count for full-powerset steps.
pub const MAX_POWERSET: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("unknown rule '{0}'")]
    UnknownRule(String),
    #[error("invalid location '{0}'")]
    BadLocation(String),
    #[error("rule {rule} does not match at {loc}")]
    NoMatch { rule: String, loc: String },
    #[error("rule {0} is an inequality and cannot be applied backward")]
    BackwardInequality(String),
    #[error("rule {rule}: {msg}")]
    SideCondition { rule: String, msg: String },
    #[error("rewriting produced a cyclic graph")]
    Cyclic,
    #[error("{0}")]
    Encode(#[from] EncodeError),
    #[error("unsupported diagram: {0}")]
    Unsupported(String),
    #[error("{0} states exceed the powerset limit")]
    TooLarge(usize),
}

impl From<GraphError> for RewriteError {
    fn from(_: GraphError) -> Self {
        RewriteError::Cyclic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        })
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fwd" => Ok(Direction::Forward),
            "bwd" => Ok(Direction::Backward),
            _ => Err(format!("expected 'fwd' or 'bwd', found '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    Path(Vec<usize>),
    Graph(Match),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Path(p) => f.write_str(&format_path(p)),
            Location::Graph(m) => f.write_str(&m.to_location()),
        }
    }
}

impl FromStr for Location {
    type Err = RewriteError;
    fn from_str(s: &str) -> Result<Self, RewriteError> {
        if s.starts_with("g:") {
            Match::parse_location(s).map(Location::Graph)
        } else {
            parse_path(s).map(Location::Path)
        }
        .ok_or_else(|| RewriteError::BadLocation(s.to_string()))
    }
}

/// Subset family used by the powerset steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// All `2^s` subsets, in mask order.
    Full,
    /// Subsets reachable from the start set, breadth-first.
    Reach,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Reach => "reach",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        match s {
            "full" => Some(Mode::Full),
            "reach" => Some(Mode::Reach),
            _ => None,
        }
    }
}

/// The matrix-level lemmas usable as rewrite rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lemma {
    TraceForm,
    Representation,
    Matrix,
    DetInit(Mode),
    Bisimulation,
    DetFinal,
    CodetFinal(Mode),
    CoBisimulation,
    CodetInit,
    Rename,
    Del,
    CoDel,
}

impl Lemma {
    pub fn name(self) -> String {
        match self {
            Lemma::TraceForm => "trace-form".into(),
            Lemma::Representation => "representation".into(),
            Lemma::Matrix => "matrix".into(),
            Lemma::DetInit(m) => format!("det-init:{}", m.name()),
            Lemma::Bisimulation => "bisimulation".into(),
            Lemma::DetFinal => "det-final".into(),
            Lemma::CodetFinal(m) => format!("codet-final:{}", m.name()),
            Lemma::CoBisimulation => "co-bisimulation".into(),
            Lemma::CodetInit => "codet-init".into(),
            Lemma::Rename => "rename".into(),
            Lemma::Del => "del".into(),
            Lemma::CoDel => "co-del".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Lemma> {
        let (head, mode) = match s.split_once(':') {
            Some((h, m)) => (h, Some(Mode::parse(m)?)),
            None => (s, None),
        };
        Some(match (head, mode) {
            ("trace-form", None) => Lemma::TraceForm,
            ("representation", None) => Lemma::Representation,
            ("matrix", None) => Lemma::Matrix,
            ("det-init", Some(m)) => Lemma::DetInit(m),
            ("bisimulation", None) => Lemma::Bisimulation,
            ("det-final", None) => Lemma::DetFinal,
            ("codet-final", Some(m)) => Lemma::CodetFinal(m),
            ("co-bisimulation", None) => Lemma::CoBisimulation,
            ("codet-init", None) => Lemma::CodetInit,
            ("rename", None) => Lemma::Rename,
            ("del", None) => Lemma::Del,
            ("co-del", None) => Lemma::CoDel,
            _ => return None,
        })
    }
}

/// A named rule: an instantiated axiom or a lemma.
#[derive(Clone, Debug)]
pub enum Rule {
    Axiom(AxiomInstance),
    Lemma(Lemma),
}

impl Rule {
    pub fn parse(name: &str) -> Result<Rule, RewriteError> {
        if let Some(l) = Lemma::parse(name) {
            return Ok(Rule::Lemma(l));
        }
        let unknown = || RewriteError::UnknownRule(name.to_string());
        let (base, letter) = match name.split_once(':') {
            Some((b, l)) => {
                let mut cs = l.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) if crate::diagram::is_letter(c) => (b, Some(c)),
                    _ => return Err(unknown()),
                }
            }
            None => (name, None),
        };
        let ax = lookup(base).ok_or_else(unknown)?;
        match (ax.letter_param, letter) {
            (true, Some(c)) => Ok(Rule::Axiom(ax.instantiate(c))),
            (false, None) => Ok(Rule::Axiom(ax.instantiate(super::catalog::PLACEHOLDER))),
            _ => Err(unknown()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Rule::Axiom(a) => a.name.clone(),
            Rule::Lemma(l) => l.name(),
        }
    }

    pub fn relation(&self) -> Relation {
        match self {
            Rule::Axiom(a) => a.relation,
            Rule::Lemma(_) => Relation::Eq,
        }
    }
}

/// Apply a rule by name.
pub fn apply_rule(
    d: &Diagram,
    rule: &str,
    dir: Direction,
    loc: &Location,
    alphabet: &Alphabet,
) -> Result<Diagram, RewriteError> {
    match Rule::parse(rule)? {
        Rule::Axiom(a) => apply_axiom(d, &a, loc, dir),
        Rule::Lemma(l) => {
            if dir == Direction::Backward {
                return Err(RewriteError::SideCondition {
                    rule: rule.into(),
                    msg: "lemma steps are recorded forward".into(),
                });
            }
            apply_lemma(d, l, loc, alphabet)
        }
    }
}

/// Replace an occurrence of one side of an axiom by the other side.
pub fn apply_axiom(
    d: &Diagram,
    a: &AxiomInstance,
    loc: &Location,
    dir: Direction,
) -> Result<Diagram, RewriteError> {
    let (pattern, replacement) = match dir {
        Direction::Forward => (&a.lhs, &a.rhs),
        Direction::Backward => {
            if a.relation == Relation::Leq {
                return Err(RewriteError::BackwardInequality(a.name.clone()));
            }
            (&a.rhs, &a.lhs)
        }
    };
    let no_match = || RewriteError::NoMatch {
        rule: a.name.clone(),
        loc: loc.to_string(),
    };
    match loc {
        Location::Path(p) => {
            let sub = d.subterm(p).ok_or_else(|| RewriteError::BadLocation(loc.to_string()))?;
            if !sub.same_type(pattern) || !graph_eq(sub, pattern).expect("same type") {
                return Err(no_match());
            }
            d.replace_at(p, replacement).map_err(|_| no_match())
        }
        Location::Graph(m) => {
            let host = PortGraph::from_diagram(d).canonical();
            let pg = PortGraph::from_diagram(pattern);
            if !host.is_match(&pg, m) {
                return Err(no_match());
            }
            let r = host.replace(&pg, m, &PortGraph::from_diagram(replacement))?;
            Ok(r.graph.to_diagram()?)
        }
    }
}

fn side(rule: Lemma, msg: impl Into<String>) -> RewriteError {
    RewriteError::SideCondition {
        rule: rule.name(),
        msg: msg.into(),
    }
}

fn apply_lemma(d: &Diagram, l: Lemma, loc: &Location, alphabet: &Alphabet) -> Result<Diagram, RewriteError> {
    match (l, loc) {
        (Lemma::Del | Lemma::CoDel, Location::Graph(m)) => apply_region(d, l, m),
        (Lemma::Del | Lemma::CoDel, Location::Path(_)) | (_, Location::Graph(_)) => {
            Err(RewriteError::BadLocation(loc.to_string()))
        }
        (_, Location::Path(p)) => {
            let sub = d.subterm(p).ok_or_else(|| RewriteError::BadLocation(loc.to_string()))?;
            let new = lemma_at(sub, l, alphabet)?;
            Ok(d.replace_at(p, &new).expect("lemmas preserve the interface"))
        }
    }
}

fn seq_parts(x: &Diagram) -> Option<(&Diagram, &Diagram)> {
    match x.term() {
        Term::Seq(a, b) => Some((a, b)),
        _ => None,
    }
}

/// The square diagram `d` with `star(d) == s`, if `s` was built that way.
pub fn unstar(s: &Diagram) -> Option<Diagram> {
    let from_trace = || {
        let (rest, _) = seq_parts(s)?;
        let (rest, _) = seq_parts(rest)?;
        let (_, b) = seq_parts(rest)?;
        match b.term() {
            Term::Par(_, body) => Some(body.clone()),
            _ => None,
        }
    };
    for body in [from_trace(), Some(s.clone())].into_iter().flatten() {
        if let Some((_, last)) = seq_parts(&body) {
            if let Term::Par(d, _) = last.term() {
                if d.dom() == d.cod() && d.dom().is_right_only() && star(d) == *s {
                    return Some(d.clone());
                }
            }
        }
    }
    None
}

fn boolean_matrix(x: &Diagram, l: Lemma, what: &str) -> Result<LangMatrix, RewriteError> {
    let m = matrix_of(x).map_err(|e| side(l, format!("{what}: {e}")))?;
    if !m.is_boolean() {
        return Err(side(l, format!("{what} is not a relation-diagram")));
    }
    Ok(m)
}

fn transition_matrix(s: &Diagram, l: Lemma) -> Result<(Diagram, LangMatrix), RewriteError> {
    let d = unstar(s).ok_or_else(|| side(l, "expected a star of a matrix-diagram"))?;
    let m = matrix_of(&d).map_err(|e| side(l, format!("transition block: {e}")))?;
    if m.max_word_len() > 1 || (0..m.rows()).any(|t| (0..m.cols()).any(|s| m.has_epsilon(t, s))) {
        return Err(side(l, "transition block is not ε-free"));
    }
    Ok((d, m))
}

/// Targets of `set` on `c` in the transition matrix `d`.
fn succ(d: &LangMatrix, set: &BTreeSet<usize>, c: char) -> BTreeSet<usize> {
    (0..d.rows()).filter(|t| set.iter().any(|s| d.get(*t, *s).contains(&[c]))).collect()
}

/// Sources reaching `set` on `c`.
fn pred(d: &LangMatrix, set: &BTreeSet<usize>, c: char) -> BTreeSet<usize> {
    (0..d.cols()).filter(|s| set.iter().any(|t| d.get(*t, *s).contains(&[c]))).collect()
}

fn family(
    start: BTreeSet<usize>,
    states: usize,
    mode: Mode,
    alphabet: &Alphabet,
    step: impl Fn(&BTreeSet<usize>, char) -> BTreeSet<usize>,
) -> Result<Vec<BTreeSet<usize>>, RewriteError> {
    match mode {
        Mode::Full => {
            if states > MAX_POWERSET {
                return Err(RewriteError::TooLarge(states));
            }
            Ok((0..1usize << states)
                .map(|m| (0..states).filter(|i| m >> i & 1 == 1).collect())
                .collect())
        }
        Mode::Reach => {
            let mut out = vec![start.clone()];
            let mut seen: HashMap<BTreeSet<usize>, usize> = [(start, 0)].into();
            let mut i = 0;
            while i < out.len() {
                for c in alphabet.letters() {
                    let t = step(&out[i], *c);
                    if !seen.contains_key(&t) {
                        seen.insert(t.clone(), out.len());
                        out.push(t);
                    }
                }
                i += 1;
            }
            Ok(out)
        }
    }
}

/// `membership(family)[s][j]` holds iff state `s` is in subset `j`.
fn membership(family: &[BTreeSet<usize>], states: usize) -> LangMatrix {
    LangMatrix::boolean(states, family.len(), |s, j| family[j].contains(&s))
}

fn family_of_columns(p: &LangMatrix) -> Vec<BTreeSet<usize>> {
    (0..p.cols())
        .map(|j| (0..p.rows()).filter(|s| p.has_epsilon(*s, j)).collect())
        .collect()
}

/// Transition matrix on subsets: `step(S_j, c) = S_k` contributes `c` at
/// `(k, j)`, or at `(j, k)` when `transposed`.
fn subset_transitions(
    fam: &[BTreeSet<usize>],
    alphabet: &Alphabet,
    l: Lemma,
    transposed: bool,
    step: impl Fn(&BTreeSet<usize>, char) -> BTreeSet<usize>,
) -> Result<LangMatrix, RewriteError> {
    let index: HashMap<&BTreeSet<usize>, usize> = fam.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut out = LangMatrix::zero(fam.len(), fam.len());
    for (j, set) in fam.iter().enumerate() {
        for c in alphabet.letters() {
            let t = step(set, *c);
            let k = *index
                .get(&t)
                .ok_or_else(|| side(l, format!("subset family is not closed: {t:?} on '{c}'")))?;
            let (row, col) = if transposed { (j, k) } else { (k, j) };
            out.get_mut(row, col).insert(vec![*c]);
        }
    }
    Ok(out)
}

fn mat(m: &LangMatrix) -> Diagram {
    matrix_to_diagram(m).expect("entries have length at most one")
}

fn set_of_column(m: &LangMatrix, col: usize) -> BTreeSet<usize> {
    (0..m.rows()).filter(|r| m.has_epsilon(*r, col)).collect()
}

fn lemma_at(x: &Diagram, l: Lemma, alphabet: &Alphabet) -> Result<Diagram, RewriteError> {
    let shape = || side(l, "subterm does not have the expected shape");
    match l {
        Lemma::TraceForm => Ok(trace_canonical_form(x)?.assemble()),
        Lemma::Representation => Ok(representation_of(x, alphabet)?.to_diagram()),
        Lemma::Matrix => Ok(matrix_to_diagram(&matrix_of(x)?)?),
        Lemma::DetInit(mode) => {
            // E ; d*  =  Ê ; (P ; d*)
            let (e_d, s) = seq_parts(x).ok_or_else(shape)?;
            let e = boolean_matrix(e_d, l, "initial block")?;
            let (_, d) = transition_matrix(s, l)?;
            let start = set_of_column(&e, 0);
            let fam = family(start.clone(), d.rows(), mode, alphabet, |set, c| succ(&d, set, c))?;
            let i = fam.iter().position(|f| *f == start).expect("start set is in the family");
            let e_hat = LangMatrix::boolean(fam.len(), 1, |j, _| j == i);
            let p = membership(&fam, d.rows());
            if e_hat.compose(&p) != e {
                return Err(side(l, "Ê ; P differs from E"));
            }
            Ok(mat(&e_hat).then(&mat(&p).then(s)))
        }
        Lemma::Bisimulation => {
            // P ; d*  =  d̂* ; P   given   P ; d = d̂ ; P
            let (p_d, s) = seq_parts(x).ok_or_else(shape)?;
            let p = boolean_matrix(p_d, l, "membership block")?;
            let (_, d) = transition_matrix(s, l)?;
            let fam = family_of_columns(&p);
            let d_hat = subset_transitions(&fam, alphabet, l, false, |set, c| succ(&d, set, c))?;
            if p.compose(&d) != d_hat.compose(&p) {
                return Err(side(l, "P ; d differs from d̂ ; P"));
            }
            Ok(star(&mat(&d_hat)).then(p_d))
        }
        Lemma::DetFinal => {
            // (Ê ; (d̂* ; P)) ; F  =  (Ê ; d̂*) ; (P ; F)
            let (left, f_d) = seq_parts(x).ok_or_else(shape)?;
            let (e_d, rest) = seq_parts(left).ok_or_else(shape)?;
            let (s, p_d) = seq_parts(rest).ok_or_else(shape)?;
            transition_matrix(s, l)?;
            let p = boolean_matrix(p_d, l, "membership block")?;
            let f = boolean_matrix(f_d, l, "final block")?;
            Ok(e_d.then(s).then(&mat(&p.compose(&f))))
        }
        Lemma::CodetFinal(mode) => {
            // (E ; d*) ; F  =  (E ; (d* ; Pᵀ)) ; G   with   Pᵀ ; G = F
            let (left, f_d) = seq_parts(x).ok_or_else(shape)?;
            let (e_d, s) = seq_parts(left).ok_or_else(shape)?;
            let (_, d) = transition_matrix(s, l)?;
            let f = boolean_matrix(f_d, l, "final block")?;
            let start: BTreeSet<usize> = (0..f.cols()).filter(|s| f.has_epsilon(0, *s)).collect();
            let fam = family(start.clone(), d.rows(), mode, alphabet, |set, c| pred(&d, set, c))?;
            let i = fam.iter().position(|f| *f == start).expect("start set is in the family");
            let pt = membership(&fam, d.rows()).transpose();
            let g = LangMatrix::boolean(1, fam.len(), |_, j| j == i);
            if pt.compose(&g) != f {
                return Err(side(l, "Pᵀ ; G differs from F"));
            }
            Ok(e_d.then(&s.then(&mat(&pt))).then(&mat(&g)))
        }
        Lemma::CoBisimulation => {
            // d* ; Pᵀ  =  Pᵀ ; d''*   given   d ; Pᵀ = Pᵀ ; d''
            let (s, pt_d) = seq_parts(x).ok_or_else(shape)?;
            let (_, d) = transition_matrix(s, l)?;
            let pt = boolean_matrix(pt_d, l, "membership block")?;
            let fam = family_of_columns(&pt.transpose());
            let d2 = subset_transitions(&fam, alphabet, l, true, |set, c| pred(&d, set, c))?;
            if d.compose(&pt) != pt.compose(&d2) {
                return Err(side(l, "d ; Pᵀ differs from Pᵀ ; d''"));
            }
            Ok(pt_d.then(&star(&mat(&d2))))
        }
        Lemma::CodetInit => {
            // (E ; (Pᵀ ; d''*)) ; G  =  ((E ; Pᵀ) ; d''*) ; G
            let (left, g_d) = seq_parts(x).ok_or_else(shape)?;
            let (e_d, rest) = seq_parts(left).ok_or_else(shape)?;
            let (pt_d, s) = seq_parts(rest).ok_or_else(shape)?;
            transition_matrix(s, l)?;
            let e = boolean_matrix(e_d, l, "initial block")?;
            let pt = boolean_matrix(pt_d, l, "membership block")?;
            boolean_matrix(g_d, l, "final block")?;
            Ok(mat(&e.compose(&pt)).then(s).then(g_d))
        }
        Lemma::Rename => {
            let rep = representation_from_diagram(x, alphabet).ok_or_else(shape)?;
            Ok(renamed(&rep).to_diagram())
        }
        Lemma::Del | Lemma::CoDel => unreachable!("region lemmas use graph locations"),
    }
}

/// Recognise a term produced by [`Representation::to_diagram`].
pub fn representation_from_diagram(x: &Diagram, alphabet: &Alphabet) -> Option<Representation> {
    let (left, f_d) = seq_parts(x)?;
    let (e_d, s) = seq_parts(left)?;
    let d_d = unstar(s)?;
    let e = matrix_of(e_d).ok()?;
    let d = matrix_of(&d_d).ok()?;
    let f = matrix_of(f_d).ok()?;
    if !e.is_boolean() || !f.is_boolean() || e.cols() != 1 || f.rows() != 1 {
        return None;
    }
    let sigma = alphabet.union(&Alphabet::new(d.letters()).ok()?);
    Some(Representation::new(sigma, e, d, f))
}

/// Keep the states reachable from the initial ones, numbered breadth-first
/// with letters in alphabet order and successors in index order.
pub fn renamed(rep: &Representation) -> Representation {
    let mut order: Vec<usize> = rep.initial_states();
    let mut index: HashMap<usize, usize> = order.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut queue: VecDeque<usize> = order.iter().copied().collect();
    while let Some(s) = queue.pop_front() {
        for c in rep.alphabet.letters() {
            for t in rep.successors(s, *c) {
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(t) {
                    e.insert(order.len());
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
    }
    let n = order.len();
    let e = LangMatrix::boolean(n, 1, |i, _| !rep.e.get(order[i], 0).is_zero());
    let f = LangMatrix::boolean(1, n, |_, i| !rep.f.get(0, order[i]).is_zero());
    let mut d = LangMatrix::zero(n, n);
    for (i, s) in order.iter().enumerate() {
        for (k, t) in order.iter().enumerate() {
            d.set(k, i, rep.d.get(*t, *s).clone());
        }
    }
    Representation::new(rep.alphabet.clone(), e, d, f)
}

/// `co-del`: a region with no inputs and only ▶ outputs becomes a row of
/// generates. `del`: a region with no outputs and only ▶ inputs becomes a
/// row of discards. Regions must consist of automaton generators.
fn apply_region(d: &Diagram, l: Lemma, m: &Match) -> Result<Diagram, RewriteError> {
    let host = PortGraph::from_diagram(d).canonical();
    let bad = || RewriteError::BadLocation(m.to_location());
    if !m.wires.is_empty() || m.boxes.is_empty() {
        return Err(bad());
    }
    let mut boxes = m.boxes.clone();
    boxes.sort_unstable();
    boxes.dedup();
    if boxes.len() != m.boxes.len() || boxes.iter().any(|b| *b >= host.box_count()) {
        return Err(bad());
    }
    if let Some(g) = boxes.iter().map(|b| host.boxes()[*b]).find(|g| !g.is_automaton()) {
        return Err(side(l, format!("region contains {g}")));
    }
    let local: HashMap<usize, usize> = m.boxes.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let inside = |s: Source| matches!(s, Source::Out(b, _) if local.contains_key(&b));
    let mut entering: Vec<(usize, usize)> = Vec::new();
    let mut leaving: Vec<Source> = Vec::new();
    for (pb, hb) in m.boxes.iter().enumerate() {
        let g = host.boxes()[*hb];
        for k in 0..g.arity_in() {
            if !inside(host.input_source(*hb, k)) {
                entering.push((pb, k));
            }
        }
        for k in 0..g.arity_out() {
            let s = Source::Out(*hb, k);
            if !matches!(host.target(s), Target::In(b, _) if local.contains_key(&b)) {
                leaving.push(s);
            }
        }
    }
    let (count, gen) = match l {
        Lemma::CoDel if entering.is_empty() => (leaving.len(), Generator::Generate),
        Lemma::Del if leaving.is_empty() => (entering.len(), Generator::Discard),
        _ => return Err(side(l, "region has wires on the wrong side")),
    };
    let sorts_of = |srcs: &mut dyn Iterator<Item = Source>| -> Vec<Sort> { srcs.map(|s| host.sort_of(s)).collect() };
    let in_sorts = sorts_of(&mut entering.iter().map(|(pb, k)| host.input_source(m.boxes[*pb], *k)));
    let out_sorts = sorts_of(&mut leaving.iter().copied());
    if in_sorts.iter().chain(&out_sorts).any(|s| *s != Sort::Right) {
        return Err(side(l, "region boundary has ◀ wires"));
    }
    let inputs: Vec<Vec<Source>> = m
        .boxes
        .iter()
        .map(|hb| {
            (0..host.boxes()[*hb].arity_in())
                .map(|k| match host.input_source(*hb, k) {
                    Source::Out(b, j) if local.contains_key(&b) => Source::Out(local[&b], j),
                    _ => Source::Left(
                        entering
                            .iter()
                            .position(|e| *e == (local[hb], k))
                            .expect("entering wire"),
                    ),
                })
                .collect()
        })
        .collect();
    let right: Vec<Source> = leaving
        .iter()
        .map(|s| match s {
            Source::Out(b, k) => Source::Out(local[b], *k),
            Source::Left(_) => unreachable!("region outputs are box outputs"),
        })
        .collect();
    let pattern = PortGraph::from_parts(
        Interface::new(in_sorts),
        Interface::new(out_sorts),
        m.boxes.iter().map(|b| host.boxes()[*b]).collect(),
        inputs,
        right,
    );
    if !host.is_match(&pattern, m) {
        return Err(side(l, "region is not convex"));
    }
    let rhs = PortGraph::from_diagram(&Diagram::par_all((0..count).map(|_| Diagram::gen(gen))));
    let r = host.replace(&pattern, m, &rhs)?;
    Ok(r.graph.to_diagram()?)
}

/// Free helper for building Boolean column vectors in callers.
pub fn unit_column(rows: usize, at: usize) -> LangMatrix {
    LangMatrix::boolean(rows, 1, |r, _| r == at)
}
