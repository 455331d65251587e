//! Bridges between diagrams, language matrices and automata.
//!
//! Matrices are indexed `[target][source]`: entry `(j, i)` holds the words
//! read along paths from left port `i` to right port `j`. Composition
//! follows diagram order, so `first.compose(&second)` concatenates a word of
//! `first` with a word of `second`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::automata::{Dfa, Nfa};
use crate::diagram::{Diagram, Generator, Interface, Sort, Term};
use crate::portgraph::{permutation, PortGraph, Source, Target};
use crate::regex::{format_word, Alphabet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("diagram is not matrix-shaped (found {0})")]
    NotMatrixShaped(String),
    #[error("matrix entry ({row}, {col}) has a word longer than one letter")]
    EntryTooLong { row: usize, col: usize },
    #[error("diagram is not an automaton-diagram")]
    NotAutomatonDiagram,
    #[error("expected a diagram of type {expected}, found {found}")]
    WrongType { expected: String, found: String },
    #[error("representation has {0} initial states, expected exactly one")]
    MultipleInitial(usize),
    #[error("representation is not deterministic")]
    NotDeterministic,
    #[error("representation has an ε-transition from {source_state} to {target}")]
    NotEpsilonFree { source_state: usize, target: usize },
    #[error("index range {0:?} out of bounds for {1} ports")]
    IndexOutOfRange(Range<usize>, usize),
}

/// A finite set of words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteLanguage(BTreeSet<Vec<char>>);

impl FiniteLanguage {
    pub fn zero() -> Self {
        FiniteLanguage(BTreeSet::new())
    }

    pub fn one() -> Self {
        FiniteLanguage([vec![]].into())
    }

    pub fn letter(c: char) -> Self {
        FiniteLanguage([vec![c]].into())
    }

    pub fn from_words(words: impl IntoIterator<Item = Vec<char>>) -> Self {
        FiniteLanguage(words.into_iter().collect())
    }

    pub fn words(&self) -> &BTreeSet<Vec<char>> {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, w: &[char]) -> bool {
        self.0.contains(w)
    }

    pub fn insert(&mut self, w: Vec<char>) {
        self.0.insert(w);
    }

    pub fn union(&self, other: &FiniteLanguage) -> FiniteLanguage {
        FiniteLanguage(self.0.union(&other.0).cloned().collect())
    }

    /// Words of `self` followed by words of `other`.
    pub fn concat(&self, other: &FiniteLanguage) -> FiniteLanguage {
        let mut out = BTreeSet::new();
        for u in &self.0 {
            for v in &other.0 {
                out.insert(u.iter().chain(v).copied().collect());
            }
        }
        FiniteLanguage(out)
    }

    pub fn max_len(&self) -> usize {
        self.0.iter().map(Vec::len).max().unwrap_or(0)
    }
}

impl fmt::Display for FiniteLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let words: Vec<String> = self.0.iter().map(|w| format_word(w)).collect();
        write!(f, "{{{}}}", words.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LangMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<FiniteLanguage>,
}

impl LangMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        LangMatrix {
            rows,
            cols,
            entries: vec![FiniteLanguage::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, FiniteLanguage::one());
        }
        m
    }

    /// Boolean matrix with `{ε}` where `f(row, col)` holds.
    pub fn boolean(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = Self::zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, FiniteLanguage::one());
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &FiniteLanguage {
        &self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, l: FiniteLanguage) {
        self.entries[row * self.cols + col] = l;
    }

    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut FiniteLanguage {
        &mut self.entries[row * self.cols + col]
    }

    /// Diagram-order composite: `self` then `second`.
    pub fn compose(&self, second: &LangMatrix) -> LangMatrix {
        assert_eq!(self.rows, second.cols, "inner dimensions differ");
        let mut out = Self::zero(second.rows, self.cols);
        for k in 0..second.rows {
            for i in 0..self.cols {
                let mut acc = FiniteLanguage::zero();
                for j in 0..self.rows {
                    let a = self.get(j, i);
                    let b = second.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.union(&a.concat(b));
                    }
                }
                out.set(k, i, acc);
            }
        }
        out
    }

    pub fn union(&self, other: &LangMatrix) -> LangMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        LangMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.union(b)).collect(),
        }
    }

    /// Block-diagonal sum, for parallel composition.
    pub fn direct_sum(&self, other: &LangMatrix) -> LangMatrix {
        let mut out = Self::zero(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out.set(self.rows + r, self.cols + c, other.get(r, c).clone());
            }
        }
        out
    }

    /// Transpose. Words are kept as they are; every word in the matrices
    /// this is used on has length at most one.
    pub fn transpose(&self) -> LangMatrix {
        let mut out = Self::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn is_boolean(&self) -> bool {
        self.entries.iter().all(|e| e.words().iter().all(Vec::is_empty))
    }

    /// Whether `(row, col)` contains the empty word.
    pub fn has_epsilon(&self, row: usize, col: usize) -> bool {
        self.get(row, col).contains(&[])
    }

    pub fn max_word_len(&self) -> usize {
        self.entries.iter().map(FiniteLanguage::max_len).max().unwrap_or(0)
    }

    pub fn letters(&self) -> BTreeSet<char> {
        self.entries.iter().flat_map(|e| e.words().iter().flatten().copied()).collect()
    }

    /// Rows `rows` and columns `cols`.
    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> LangMatrix {
        let mut out = Self::zero(rows.len(), cols.len());
        for (r2, r) in rows.clone().enumerate() {
            for (c2, c) in cols.clone().enumerate() {
                out.set(r2, c2, self.get(r, c).clone());
            }
        }
        out
    }
}

impl fmt::Display for LangMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let cells: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

fn check_matrix_shaped(d: &Diagram) -> Result<(), EncodeError> {
    if let Some(g) = d.generators().into_iter().find(|g| !g.is_relational() && !matches!(g, Generator::Letter(_))) {
        return Err(EncodeError::NotMatrixShaped(g.keyword().to_string()));
    }
    if !d.dom().is_right_only() || !d.cod().is_right_only() {
        return Err(EncodeError::NotMatrixShaped("a ◀ boundary wire".into()));
    }
    Ok(())
}

/// The matrix of a diagram built from copy, discard, merge, generate and
/// letters, by enumerating paths in its port graph.
pub fn matrix_of(d: &Diagram) -> Result<LangMatrix, EncodeError> {
    check_matrix_shaped(d)?;
    let g = PortGraph::from_diagram(d);
    let mut m = LangMatrix::zero(g.cod().len(), g.dom().len());
    fn follow(g: &PortGraph, src: Source, word: &mut Vec<char>, col: usize, m: &mut LangMatrix) {
        match g.target(src) {
            Target::Right(j) => m.get_mut(j, col).insert(word.clone()),
            Target::In(b, _) => match g.boxes()[b] {
                Generator::Copy => {
                    follow(g, Source::Out(b, 0), word, col, m);
                    follow(g, Source::Out(b, 1), word, col, m);
                }
                Generator::Merge => follow(g, Source::Out(b, 0), word, col, m),
                Generator::Letter(c) => {
                    word.push(c);
                    follow(g, Source::Out(b, 0), word, col, m);
                    word.pop();
                }
                Generator::Discard => {}
                other => unreachable!("checked matrix-shaped, found {other}"),
            },
        }
    }
    for i in 0..g.dom().len() {
        follow(&g, Source::Left(i), &mut Vec::new(), i, &mut m);
    }
    Ok(m)
}

/// The same matrix, computed compositionally over the term.
pub fn matrix_of_terms(d: &Diagram) -> Result<LangMatrix, EncodeError> {
    check_matrix_shaped(d)?;
    fn go(d: &Diagram) -> LangMatrix {
        match d.term() {
            Term::Empty => LangMatrix::zero(0, 0),
            Term::Id(_) => LangMatrix::identity(1),
            Term::Sym(..) => LangMatrix::boolean(2, 2, |r, c| r != c),
            Term::Gen(g) => match g {
                Generator::Copy => LangMatrix::boolean(2, 1, |_, _| true),
                Generator::Merge => LangMatrix::boolean(1, 2, |_, _| true),
                Generator::Discard => LangMatrix::zero(0, 1),
                Generator::Generate => LangMatrix::zero(1, 0),
                Generator::Letter(c) => {
                    let mut m = LangMatrix::zero(1, 1);
                    m.set(0, 0, FiniteLanguage::letter(*c));
                    m
                }
                other => unreachable!("checked matrix-shaped, found {other}"),
            },
            Term::Seq(a, b) => go(a).compose(&go(b)),
            Term::Par(a, b) => go(a).direct_sum(&go(b)),
        }
    }
    Ok(go(d))
}

/// `k`-fold copy: 0 is discard, 1 the identity.
pub fn copy_tree(k: usize) -> Diagram {
    match k {
        0 => Diagram::gen(Generator::Discard),
        1 => Diagram::id(Sort::Right),
        _ => Diagram::gen(Generator::Copy).then(&Diagram::id(Sort::Right).beside(&copy_tree(k - 1))),
    }
}

/// `k`-fold merge: 0 is generate, 1 the identity.
pub fn merge_tree(k: usize) -> Diagram {
    match k {
        0 => Diagram::gen(Generator::Generate),
        1 => Diagram::id(Sort::Right),
        _ => Diagram::id(Sort::Right)
            .beside(&merge_tree(k - 1))
            .then(&Diagram::gen(Generator::Merge)),
    }
}

/// The three-block diagram of a matrix whose words have length ≤ 1: copies
/// per source, then letters, then merges per target.
pub fn matrix_to_diagram(m: &LangMatrix) -> Result<Diagram, EncodeError> {
    let mut paths: Vec<(usize, usize, Vec<char>)> = Vec::new();
    for i in 0..m.cols() {
        for j in 0..m.rows() {
            for w in m.get(j, i).words() {
                if w.len() > 1 {
                    return Err(EncodeError::EntryTooLong { row: j, col: i });
                }
                paths.push((i, j, w.clone()));
            }
        }
    }
    type Path = (usize, usize, Vec<char>);
    let count = |f: &dyn Fn(&Path) -> bool| paths.iter().filter(|p| f(p)).count();
    let copies = Diagram::par_all((0..m.cols()).map(|i| copy_tree(count(&|p| p.0 == i))));
    let letters = Diagram::par_all(paths.iter().map(|(_, _, w)| match w.first() {
        Some(c) => Diagram::letter(*c),
        None => Diagram::id(Sort::Right),
    }));
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by_key(|k| (paths[*k].1, paths[*k].0, paths[*k].2.clone()));
    let perm = permutation(&vec![Sort::Right; paths.len()], &order);
    let merges = Diagram::par_all((0..m.rows()).map(|j| merge_tree(count(&|p| p.1 == j))));
    Ok(Diagram::seq_all([copies, letters, perm, merges]))
}

fn sorts(s: Sort, n: usize) -> Vec<Sort> {
    vec![s; n]
}

/// `ε → ◀^l ▶^l`; the `i`-th ◀ is bent onto the `i`-th ▶.
fn cups(l: usize) -> Diagram {
    let raw = Diagram::par_all((0..l).map(|_| Diagram::gen(Generator::Cup)));
    let order: Vec<usize> = (0..l).map(|i| 2 * i).chain((0..l).map(|i| 2 * i + 1)).collect();
    let mixed: Vec<Sort> = (0..l).flat_map(|_| [Sort::Left, Sort::Right]).collect();
    raw.then(&permutation(&mixed, &order))
}

/// `▶^l ◀^l → ε`; the `i`-th ▶ is bent onto the `i`-th ◀.
fn caps(l: usize) -> Diagram {
    let order: Vec<usize> = (0..l).flat_map(|i| [i, l + i]).collect();
    let mut blocked = sorts(Sort::Right, l);
    blocked.extend(sorts(Sort::Left, l));
    let raw = Diagram::par_all((0..l).map(|_| Diagram::gen(Generator::Cap)));
    permutation(&blocked, &order).then(&raw)
}

/// Feed the first `l` outputs of `r` back into its first `l` inputs.
pub fn trace(r: &Diagram, l: usize) -> Diagram {
    if l == 0 {
        return r.clone();
    }
    assert!(r.dom().is_right_only() && r.cod().is_right_only(), "trace needs ▶ wires");
    let n = r.dom().len() - l;
    let m = r.cod().len() - l;
    let mut swap_sorts = sorts(Sort::Left, l);
    swap_sorts.extend(sorts(Sort::Right, l));
    let swap_order: Vec<usize> = (l..2 * l).chain(0..l).collect();
    Diagram::seq_all([
        cups(l).beside(&Diagram::id_right(n)),
        Diagram::ids(&Interface::new(sorts(Sort::Left, l))).beside(r),
        permutation(&swap_sorts, &swap_order).beside(&Diagram::id_right(m)),
        caps(l).beside(&Diagram::id_right(m)),
    ])
}

/// Star of a square ▶-only diagram, as a trace around merge, copy and `d`.
pub fn star(d: &Diagram) -> Diagram {
    let l = d.dom().len();
    assert!(d.dom() == d.cod() && d.dom().is_right_only(), "star needs ▶^l → ▶^l");
    let right = |n| sorts(Sort::Right, n);
    // (fb_0..fb_{l-1}, in_0..in_{l-1}) → (fb_0, in_0, fb_1, in_1, ...)
    let interleave: Vec<usize> = (0..l).flat_map(|i| [i, l + i]).collect();
    let merges = Diagram::par_all((0..l).map(|_| Diagram::gen(Generator::Merge)));
    let copies = Diagram::par_all((0..l).map(|_| Diagram::gen(Generator::Copy)));
    let unzip: Vec<usize> = (0..l).map(|i| 2 * i).chain((0..l).map(|i| 2 * i + 1)).collect();
    let body = Diagram::seq_all([
        permutation(&right(2 * l), &interleave),
        merges,
        copies,
        permutation(&right(2 * l), &unzip),
        d.beside(&Diagram::id_right(l)),
    ]);
    trace(&body, l)
}

/// Factorisation of a left-to-right automaton-diagram as a trace of a
/// relation-diagram with one letter per feedback wire.
#[derive(Clone, Debug)]
pub struct TraceForm {
    /// ▶^{l+n} → ▶^{l+m}, built from copy/discard/merge/generate only.
    pub r: Diagram,
    pub l: usize,
    pub letters: Vec<char>,
    /// The Boolean matrix of `r`.
    pub matrix: LangMatrix,
}

impl TraceForm {
    pub fn assemble(&self) -> Diagram {
        let m = self.r.cod().len() - self.l;
        let stack = Diagram::par_all(self.letters.iter().map(|c| Diagram::letter(*c)));
        trace(&self.r.then(&stack.beside(&Diagram::id_right(m))), self.l)
    }
}

fn check_automaton(d: &Diagram) -> Result<(), EncodeError> {
    let c = d.classify();
    if !c.is_automaton_diagram || !c.is_left_to_right {
        return Err(EncodeError::NotAutomatonDiagram);
    }
    Ok(())
}

/// Cut every letter box out of the port graph; what remains denotes the
/// reachability relation between the cut points and the boundary.
pub fn trace_canonical_form(d: &Diagram) -> Result<TraceForm, EncodeError> {
    check_automaton(d)?;
    let g = PortGraph::from_diagram(d).canonical();
    let letter_boxes: Vec<(usize, char)> = g
        .boxes()
        .iter()
        .enumerate()
        .filter_map(|(b, g)| match g {
            Generator::Letter(c) => Some((b, *c)),
            _ => None,
        })
        .collect();
    let l = letter_boxes.len();
    let (n, m) = (g.dom().len(), g.cod().len());
    let slot: std::collections::HashMap<usize, usize> =
        letter_boxes.iter().enumerate().map(|(k, (b, _))| (*b, k)).collect();
    let starts: Vec<Source> = letter_boxes
        .iter()
        .map(|(b, _)| Source::Out(*b, 0))
        .chain((0..n).map(Source::Left))
        .collect();
    let mut matrix = LangMatrix::zero(l + m, l + n);
    for (col, start) in starts.iter().enumerate() {
        for row in flow_targets(&g, *start, &slot, l) {
            matrix.set(row, col, FiniteLanguage::one());
        }
    }
    let r = matrix_to_diagram(&matrix).expect("Boolean matrix");
    Ok(TraceForm {
        r,
        l,
        letters: letter_boxes.iter().map(|(_, c)| *c).collect(),
        matrix,
    })
}

/// Ends reachable by ε-flow from a ▶ wire: letter inputs (as `slot`) and
/// right boundary ports (as `l + j`).
fn flow_targets(
    g: &PortGraph,
    start: Source,
    slot: &std::collections::HashMap<usize, usize>,
    l: usize,
) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut seen: HashSet<Source> = HashSet::new();
    let mut queue = VecDeque::from([start]);
    // Each queued wire carries flow in its own direction: ▶ wires towards
    // their target end, ◀ wires towards their source end.
    while let Some(w) = queue.pop_front() {
        if !seen.insert(w) {
            continue;
        }
        let mut push = |s: Source| queue.push_back(s);
        match g.sort_of(w) {
            Sort::Right => match g.target(w) {
                Target::Right(j) => {
                    out.insert(l + j);
                }
                Target::In(b, _) => match g.boxes()[b] {
                    Generator::Copy => {
                        push(Source::Out(b, 0));
                        push(Source::Out(b, 1));
                    }
                    Generator::Merge => push(Source::Out(b, 0)),
                    Generator::Letter(_) => {
                        out.insert(slot[&b]);
                    }
                    Generator::Cap => push(g.input_source(b, 1)),
                    Generator::Discard => {}
                    other => unreachable!("{other} has no ▶ input"),
                },
            },
            Sort::Left => match w {
                Source::Out(b, 0) if g.boxes()[b] == Generator::Cup => push(Source::Out(b, 1)),
                // ◀ boundary wires do not occur in left-to-right diagrams
                other => unreachable!("◀ flow ends at {other:?}"),
            },
        }
    }
    out
}

/// An automaton in matrix form: initial column `e` (l × 1), transition
/// matrix `d` (l × l, one letter per word) and final row `f` (1 × l).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Representation {
    pub alphabet: Alphabet,
    pub e: LangMatrix,
    pub d: LangMatrix,
    pub f: LangMatrix,
}

impl Representation {
    pub fn new(alphabet: Alphabet, e: LangMatrix, d: LangMatrix, f: LangMatrix) -> Self {
        let l = d.rows();
        assert_eq!((d.cols(), e.rows(), e.cols(), f.rows(), f.cols()), (l, l, 1, 1, l));
        Representation { alphabet, e, d, f }
    }

    pub fn states(&self) -> usize {
        self.d.rows()
    }

    pub fn initial_states(&self) -> Vec<usize> {
        (0..self.states()).filter(|s| !self.e.get(*s, 0).is_zero()).collect()
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.states()).filter(|s| !self.f.get(0, *s).is_zero()).collect()
    }

    /// Successors of `s` on `c`.
    pub fn successors(&self, s: usize, c: char) -> Vec<usize> {
        (0..self.states()).filter(|t| self.d.get(*t, s).contains(&[c])).collect()
    }

    pub fn check_epsilon_free(&self) -> Result<(), EncodeError> {
        for s in 0..self.states() {
            for t in 0..self.states() {
                if self.d.has_epsilon(t, s) {
                    return Err(EncodeError::NotEpsilonFree { source_state: s, target: t });
                }
            }
        }
        Ok(())
    }

    pub fn is_deterministic(&self) -> bool {
        self.initial_states().len() == 1
            && (0..self.states())
                .all(|s| self.alphabet.letters().all(|c| self.successors(s, *c).len() <= 1))
    }

    /// `e ; d* ; f` as a diagram.
    pub fn to_diagram(&self) -> Diagram {
        let e = matrix_to_diagram(&self.e).expect("Boolean");
        let d = matrix_to_diagram(&self.d).expect("single letters");
        let f = matrix_to_diagram(&self.f).expect("Boolean");
        e.then(&star(&d)).then(&f)
    }

    /// The representation with the same states and transitions as an
    /// ε-free automaton.
    pub fn from_nfa(n: &Nfa) -> Result<Self, EncodeError> {
        if let Some((p, _, q)) = n.transitions.iter().find(|t| t.1.is_none()) {
            return Err(EncodeError::NotEpsilonFree { source_state: *p, target: *q });
        }
        Ok(Self::from_nfa_parts(n))
    }

    fn from_nfa_parts(n: &Nfa) -> Self {
        let s = n.states;
        let e = LangMatrix::boolean(s, 1, |q, _| q == n.initial);
        let f = LangMatrix::boolean(1, s, |_, q| n.accepting.contains(&q));
        let mut d = LangMatrix::zero(s, s);
        for (p, l, q) in &n.transitions {
            d.get_mut(*q, *p).insert(l.map(|c| vec![c]).unwrap_or_default());
        }
        Representation { alphabet: n.alphabet.clone(), e, d, f }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.states())?;
        writeln!(f, "e:")?;
        write!(f, "{}", self.e)?;
        writeln!(f, "d:")?;
        write!(f, "{}", self.d)?;
        writeln!(f, "f:")?;
        write!(f, "{}", self.f)
    }
}

fn check_endo(d: &Diagram) -> Result<(), EncodeError> {
    if d.dom() != &Interface::right(1) || d.cod() != &Interface::right(1) {
        return Err(EncodeError::WrongType {
            expected: "[r] -> [r]".into(),
            found: format!("{} -> {}", d.dom(), d.cod()),
        });
    }
    Ok(())
}

/// Read a representation off the trace form of a ▶ → ▶ automaton-diagram.
/// States `0..k` sit just after each letter box; state `k` is the input.
pub fn representation_of(d: &Diagram, alphabet: &Alphabet) -> Result<Representation, EncodeError> {
    check_automaton(d)?;
    check_endo(d)?;
    let tf = trace_canonical_form(d)?;
    Ok(representation_from_trace_form(&tf, alphabet))
}

pub fn representation_from_trace_form(tf: &TraceForm, alphabet: &Alphabet) -> Representation {
    let k = tf.l;
    let l = k + 1;
    let r = &tf.matrix;
    let e = LangMatrix::boolean(l, 1, |s, _| s == k);
    let f = LangMatrix::boolean(1, l, |_, s| r.has_epsilon(k, s));
    let mut d = LangMatrix::zero(l, l);
    for t in 0..k {
        for s in 0..l {
            if r.has_epsilon(t, s) {
                d.set(t, s, FiniteLanguage::letter(tf.letters[t]));
            }
        }
    }
    let sigma = alphabet.union(&Alphabet::new(tf.letters.iter().copied()).expect("diagram letters are valid"));
    Representation { alphabet: sigma, e, d, f }
}

/// The automaton of a representation. Several (or no) initial states are
/// joined by a fresh ε-initial state.
pub fn representation_to_nfa(rep: &Representation) -> Nfa {
    let l = rep.states();
    let init = rep.initial_states();
    let extra = init.len() != 1;
    let mut n = Nfa::new(rep.alphabet.clone(), l + usize::from(extra), if extra { l } else { init[0] });
    for s in 0..l {
        for t in 0..l {
            for w in rep.d.get(t, s).words() {
                n.add(s, w.first().copied(), t);
            }
        }
    }
    n.accepting.extend(rep.accepting_states());
    if extra {
        for q in init {
            n.add(l, None, q);
        }
    }
    n
}

/// The DFA of a deterministic representation, on the same states.
pub fn representation_to_dfa(rep: &Representation) -> Result<Dfa, EncodeError> {
    let init = rep.initial_states();
    if init.len() != 1 {
        return Err(EncodeError::MultipleInitial(init.len()));
    }
    if !rep.is_deterministic() {
        return Err(EncodeError::NotDeterministic);
    }
    let acc = rep.accepting_states();
    Ok(Dfa {
        alphabet: rep.alphabet.clone(),
        initial: init[0],
        accepting: (0..rep.states()).map(|s| acc.contains(&s)).collect(),
        delta: (0..rep.states())
            .map(|s| rep.alphabet.letters().map(|c| rep.successors(s, *c).first().copied()).collect())
            .collect(),
    })
}

/// `e ; d* ; f` for the automaton, with ε-transitions kept as `{ε}`
/// entries.
pub fn nfa_to_diagram(n: &Nfa) -> Diagram {
    Representation::from_nfa_parts(n).to_diagram()
}

/// Restrict a left-to-right diagram to the given target rows and source
/// columns, generating the other inputs and discarding the other outputs.
pub fn submatrix(d: &Diagram, rows: Range<usize>, cols: Range<usize>) -> Result<Diagram, EncodeError> {
    let (n, m) = (d.dom().len(), d.cod().len());
    if !d.dom().is_right_only() || !d.cod().is_right_only() {
        return Err(EncodeError::NotMatrixShaped("a ◀ boundary wire".into()));
    }
    if cols.start > cols.end || cols.end > n {
        return Err(EncodeError::IndexOutOfRange(cols, n));
    }
    if rows.start > rows.end || rows.end > m {
        return Err(EncodeError::IndexOutOfRange(rows, m));
    }
    let pre = Diagram::par_all((0..n).map(|i| {
        if cols.contains(&i) {
            Diagram::id(Sort::Right)
        } else {
            Diagram::gen(Generator::Generate)
        }
    }));
    let post = Diagram::par_all((0..m).map(|j| {
        if rows.contains(&j) {
            Diagram::id(Sort::Right)
        } else {
            Diagram::gen(Generator::Discard)
        }
    }));
    Ok(pre.then(d).then(&post))
}
