//! Classical NFA/DFA algorithms, used as the independent oracle for the
//! diagrammatic pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::regex::{Alphabet, Regex};

/// Largest state count accepted by the full powerset construction.
pub const MAX_POWERSET_STATES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("automata are over different alphabets ({0} and {1})")]
    AlphabetMismatch(Alphabet, Alphabet),
    #[error("automaton has ε-transitions")]
    NotEpsilonFree,
    #[error("powerset of {0} states is too large")]
    TooLarge(usize),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// `None` labels are ε-transitions.
pub type Transition = (usize, Option<char>, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    pub alphabet: Alphabet,
    pub states: usize,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub transitions: BTreeSet<Transition>,
}

impl Nfa {
    pub fn new(alphabet: Alphabet, states: usize, initial: usize) -> Self {
        assert!(initial < states, "initial state out of range");
        Nfa {
            alphabet,
            states,
            initial,
            accepting: BTreeSet::new(),
            transitions: BTreeSet::new(),
        }
    }

    pub fn add(&mut self, p: usize, label: Option<char>, q: usize) {
        assert!(p < self.states && q < self.states, "state out of range");
        if let Some(c) = label {
            assert!(self.alphabet.contains(c), "letter '{c}' outside the alphabet");
        }
        self.transitions.insert((p, label, q));
    }

    fn fresh(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    pub fn is_epsilon_free(&self) -> bool {
        self.transitions.iter().all(|(_, l, _)| l.is_some())
    }

    pub fn epsilon_closure(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = set.clone();
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(p) = stack.pop() {
            for (_, _, q) in self.transitions.range((p, None, 0)..(p, Some('\0'), 0)) {
                if out.insert(*q) {
                    stack.push(*q);
                }
            }
        }
        out
    }

    fn step(&self, set: &BTreeSet<usize>, c: char) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for p in set {
            for (_, _, q) in self.transitions.range((*p, Some(c), 0)..=(*p, Some(c), usize::MAX)) {
                out.insert(*q);
            }
        }
        out
    }

    pub fn accepts(&self, word: &[char]) -> bool {
        let mut cur = self.epsilon_closure(&[self.initial].into());
        for c in word {
            cur = self.epsilon_closure(&self.step(&cur, *c));
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|q| self.accepting.contains(q))
    }
}

/// A DFA, possibly partial. `delta[q][k]` is the successor of `q` on the
/// `k`-th letter of the alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub alphabet: Alphabet,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub delta: Vec<Vec<Option<usize>>>,
}

impl Dfa {
    pub fn states(&self) -> usize {
        self.delta.len()
    }

    pub fn is_complete(&self) -> bool {
        self.delta.iter().all(|row| row.iter().all(Option::is_some))
    }

    pub fn accepts(&self, word: &[char]) -> bool {
        let mut q = self.initial;
        for c in word {
            let Some(k) = self.alphabet.index_of(*c) else {
                return false;
            };
            match self.delta[q][k] {
                Some(r) => q = r,
                None => return false,
            }
        }
        self.accepting[q]
    }

    /// Add a rejecting sink if some transition is missing.
    pub fn complete(&self) -> Dfa {
        if self.is_complete() {
            return self.clone();
        }
        let sink = self.states();
        let mut out = self.clone();
        out.accepting.push(false);
        out.delta.push(vec![Some(sink); self.alphabet.len()]);
        for row in &mut out.delta {
            for t in row.iter_mut() {
                t.get_or_insert(sink);
            }
        }
        out
    }

    /// Renumber reachable states in breadth-first discovery order (letters in
    /// alphabet order) and drop unreachable ones.
    pub fn canonical(&self) -> Dfa {
        let mut order = vec![self.initial];
        let mut index: HashMap<usize, usize> = [(self.initial, 0)].into();
        let mut i = 0;
        while i < order.len() {
            for t in self.delta[order[i]].iter().flatten() {
                if !index.contains_key(t) {
                    index.insert(*t, order.len());
                    order.push(*t);
                }
            }
            i += 1;
        }
        Dfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting: order.iter().map(|q| self.accepting[*q]).collect(),
            delta: order
                .iter()
                .map(|q| self.delta[*q].iter().map(|t| t.map(|t| index[&t])).collect())
                .collect(),
        }
    }

    /// Isomorphism of the reachable parts.
    pub fn is_isomorphic(&self, other: &Dfa) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn to_nfa(&self) -> Nfa {
        let mut n = Nfa::new(self.alphabet.clone(), self.states(), self.initial);
        for (q, row) in self.delta.iter().enumerate() {
            if self.accepting[q] {
                n.accepting.insert(q);
            }
            for (k, t) in row.iter().enumerate() {
                if let Some(t) = t {
                    n.add(q, Some(self.alphabet.as_slice()[k]), *t);
                }
            }
        }
        n
    }
}

/// Classical Thompson construction.
pub fn thompson(e: &Regex, alphabet: &Alphabet) -> Nfa {
    fn build(e: &Regex, n: &mut Nfa) -> (usize, usize) {
        let s = n.fresh();
        let t = n.fresh();
        match e {
            Regex::Zero => {}
            Regex::One => n.add(s, None, t),
            Regex::Letter(c) => n.add(s, Some(*c), t),
            Regex::Plus(a, b) => {
                for part in [a, b] {
                    let (i, f) = build(part, n);
                    n.add(s, None, i);
                    n.add(f, None, t);
                }
            }
            Regex::Concat(a, b) => {
                let (i1, f1) = build(a, n);
                let (i2, f2) = build(b, n);
                n.add(s, None, i1);
                n.add(f1, None, i2);
                n.add(f2, None, t);
            }
            Regex::Star(a) => {
                let (i, f) = build(a, n);
                n.add(s, None, i);
                n.add(f, None, t);
                n.add(s, None, t);
                n.add(f, None, i);
            }
        }
        (s, t)
    }
    let sigma = alphabet.union(&Alphabet::new(e.letters()).expect("regex letters are valid"));
    let mut n = Nfa {
        alphabet: sigma,
        states: 0,
        initial: 0,
        accepting: BTreeSet::new(),
        transitions: BTreeSet::new(),
    };
    let (s, t) = build(e, &mut n);
    n.initial = s;
    n.accepting.insert(t);
    n
}

/// Remove ε-transitions without changing the state set.
pub fn epsilon_elimination(n: &Nfa) -> Nfa {
    if n.is_epsilon_free() {
        return n.clone();
    }
    let mut out = Nfa::new(n.alphabet.clone(), n.states, n.initial);
    for p in 0..n.states {
        let closure = n.epsilon_closure(&[p].into());
        if closure.iter().any(|q| n.accepting.contains(q)) {
            out.accepting.insert(p);
        }
        for r in &closure {
            for (_, l, q) in n.transitions.range((*r, Some('\0'), 0)..=(*r, Some(char::MAX), usize::MAX)) {
                out.add(p, *l, *q);
            }
        }
    }
    out
}

/// Mirror the language. A fresh initial state has ε-edges to the old
/// accepting states.
pub fn reverse(n: &Nfa) -> Nfa {
    let mut out = Nfa::new(n.alphabet.clone(), n.states + 1, n.states);
    out.accepting.insert(n.initial);
    for (p, l, q) in &n.transitions {
        out.add(*q, *l, *p);
    }
    for f in &n.accepting {
        out.add(n.states, None, *f);
    }
    out
}

/// A DFA built by the subset construction, with the subset behind each
/// state.
#[derive(Clone, Debug)]
pub struct SubsetDfa {
    pub dfa: Dfa,
    pub subsets: Vec<BTreeSet<usize>>,
}

fn mask_set(mask: u64) -> BTreeSet<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Reachable subsets of an ε-free NFA from `start`, breadth-first with
/// letters in alphabet order.
fn reachable_subsets(n: &Nfa, start: BTreeSet<usize>) -> SubsetDfa {
    let letters = n.alphabet.as_slice();
    let mut subsets = vec![start.clone()];
    let mut index: HashMap<BTreeSet<usize>, usize> = [(start, 0)].into();
    let mut delta = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        let row: Vec<Option<usize>> = letters
            .iter()
            .map(|c| {
                let t = n.step(&subsets[i], *c);
                let next = subsets.len();
                let k = *index.entry(t.clone()).or_insert(next);
                if k == next {
                    subsets.push(t);
                }
                Some(k)
            })
            .collect();
        delta.push(row);
        i += 1;
    }
    let dfa = Dfa {
        alphabet: n.alphabet.clone(),
        initial: 0,
        accepting: subsets.iter().map(|s| s.iter().any(|q| n.accepting.contains(q))).collect(),
        delta,
    };
    SubsetDfa { dfa, subsets }
}

/// Subset construction on an ε-free NFA. Full mode lists all `2^s` subsets
/// in mask order (bit i = state i); otherwise the reachable subsets in
/// breadth-first order. The result is complete: the empty subset is a state
/// whenever it is reached.
pub fn subset_construction_sets(n: &Nfa, full: bool) -> Result<SubsetDfa, AutomataError> {
    if !n.is_epsilon_free() {
        return Err(AutomataError::NotEpsilonFree);
    }
    if !full {
        return Ok(reachable_subsets(n, [n.initial].into()));
    }
    if n.states > MAX_POWERSET_STATES {
        return Err(AutomataError::TooLarge(n.states));
    }
    let subsets: Vec<BTreeSet<usize>> = (0..1u64 << n.states).map(mask_set).collect();
    let mask = |set: &BTreeSet<usize>| set.iter().fold(0usize, |m, q| m | 1 << q);
    let dfa = Dfa {
        alphabet: n.alphabet.clone(),
        initial: 1 << n.initial,
        accepting: subsets.iter().map(|s| s.iter().any(|q| n.accepting.contains(q))).collect(),
        delta: subsets
            .iter()
            .map(|s| n.alphabet.letters().map(|c| Some(mask(&n.step(s, *c)))).collect())
            .collect(),
    };
    Ok(SubsetDfa { dfa, subsets })
}

pub fn subset_construction(n: &Nfa, full: bool) -> Result<Dfa, AutomataError> {
    subset_construction_sets(n, full).map(|s| s.dfa)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Hopcroft,
    Brzozowski,
}

fn determinise(n: &Nfa) -> Dfa {
    subset_construction(&epsilon_elimination(n), false).expect("ε-free")
}

/// Determinise the mirror image of an ε-free NFA whose initial states are
/// `initials`, starting from the set of its accepting states. Starting from
/// a set (rather than a fresh ε-initial state) is what makes two rounds
/// minimal.
fn reverse_determinise(n: &Nfa, initials: &BTreeSet<usize>) -> Dfa {
    let mut flipped = Nfa::new(n.alphabet.clone(), n.states, n.initial);
    flipped.transitions = n.transitions.iter().map(|(p, l, q)| (*q, *l, *p)).collect();
    flipped.accepting = initials.clone();
    reachable_subsets(&flipped, n.accepting.clone()).dfa
}

/// Minimal complete DFA, states in canonical breadth-first order.
pub fn minimise(n: &Nfa, method: Method) -> Dfa {
    match method {
        Method::Hopcroft => hopcroft(&determinise(n).complete().canonical()),
        Method::Brzozowski => {
            let once = reverse_determinise(&epsilon_elimination(n), &[n.initial].into());
            reverse_determinise(&once.to_nfa(), &[once.initial].into()).complete().canonical()
        }
    }
}

/// Hopcroft partition refinement on a complete DFA whose states are all
/// reachable.
pub fn hopcroft(d: &Dfa) -> Dfa {
    let n = d.states();
    let k = d.alphabet.len();
    let mut inverse: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; k];
    for (q, row) in d.delta.iter().enumerate() {
        for (a, t) in row.iter().enumerate() {
            inverse[a][t.expect("complete DFA")].push(q);
        }
    }
    let (acc, rej): (Vec<usize>, Vec<usize>) = (0..n).partition(|q| d.accepting[*q]);
    let mut blocks: Vec<BTreeSet<usize>> = [acc, rej]
        .into_iter()
        .filter(|b| !b.is_empty())
        .map(|b| b.into_iter().collect())
        .collect();
    let mut block_of = vec![0; n];
    for (i, b) in blocks.iter().enumerate() {
        for q in b {
            block_of[*q] = i;
        }
    }
    let mut work: VecDeque<(usize, usize)> = VecDeque::new();
    let smaller = if blocks.len() == 2 && blocks[1].len() < blocks[0].len() { 1 } else { 0 };
    for a in 0..k {
        work.push_back((smaller, a));
    }
    let mut queued: BTreeSet<(usize, usize)> = work.iter().copied().collect();
    while let Some((splitter, a)) = work.pop_front() {
        queued.remove(&(splitter, a));
        let pre: BTreeSet<usize> = blocks[splitter]
            .iter()
            .flat_map(|q| inverse[a][*q].iter().copied())
            .collect();
        let touched: BTreeSet<usize> = pre.iter().map(|q| block_of[*q]).collect();
        for b in touched {
            let (inside, outside): (BTreeSet<usize>, BTreeSet<usize>) =
                blocks[b].iter().partition(|q| pre.contains(q));
            if inside.is_empty() || outside.is_empty() {
                continue;
            }
            let new = blocks.len();
            let (keep, moved) = if inside.len() <= outside.len() {
                (outside, inside)
            } else {
                (inside, outside)
            };
            for q in &moved {
                block_of[*q] = new;
            }
            blocks[b] = keep;
            blocks.push(moved);
            // whether or not (b, c) is pending, queueing the smaller half
            // (now `new`) is enough
            for c in 0..k {
                if queued.insert((new, c)) {
                    work.push_back((new, c));
                }
            }
        }
    }
    Dfa {
        alphabet: d.alphabet.clone(),
        initial: block_of[d.initial],
        accepting: blocks.iter().map(|b| d.accepting[*b.iter().next().expect("nonempty")]).collect(),
        delta: blocks
            .iter()
            .map(|b| {
                let q = *b.iter().next().expect("nonempty");
                d.delta[q].iter().map(|t| t.map(|t| block_of[t])).collect()
            })
            .collect(),
    }
    .canonical()
}

fn check_alphabets(m: &Nfa, n: &Nfa) -> Result<(), AutomataError> {
    if m.alphabet != n.alphabet {
        return Err(AutomataError::AlphabetMismatch(m.alphabet.clone(), n.alphabet.clone()));
    }
    Ok(())
}

/// A shortest word (ties broken by alphabet order) accepted by exactly one
/// of the two automata.
pub fn distinguishing_word(m: &Nfa, n: &Nfa) -> Result<Option<Vec<char>>, AutomataError> {
    check_alphabets(m, n)?;
    let a = determinise(m).complete();
    let b = determinise(n).complete();
    // each reached pair remembers the pair and letter it was reached from
    type Parent = Option<((usize, usize), char)>;
    let mut seen: BTreeMap<(usize, usize), Parent> = BTreeMap::new();
    let start = (a.initial, b.initial);
    seen.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some((p, q)) = queue.pop_front() {
        if a.accepting[p] != b.accepting[q] {
            let mut word = Vec::new();
            let mut cur = (p, q);
            while let Some(Some((prev, c))) = seen.get(&cur) {
                word.push(*c);
                cur = *prev;
            }
            word.reverse();
            return Ok(Some(word));
        }
        for (k, c) in a.alphabet.as_slice().iter().enumerate() {
            let next = (a.delta[p][k].expect("complete"), b.delta[q][k].expect("complete"));
            if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(next) {
                e.insert(Some(((p, q), *c)));
                queue.push_back(next);
            }
        }
    }
    Ok(None)
}

/// Words of length ≤ `bound` on which the two automata disagree, by direct
/// simulation.
pub fn bounded_disagreement(m: &Nfa, n: &Nfa, bound: usize) -> Option<Vec<char>> {
    m.alphabet
        .words_up_to(bound)
        .into_iter()
        .find(|w| m.accepts(w) != n.accepts(w))
}

/// Language equality via isomorphism of minimal DFAs. A negative verdict is
/// cross-checked against the product search and, when the distinguishing
/// word is short, against direct simulation.
pub fn language_equiv(m: &Nfa, n: &Nfa) -> Result<bool, AutomataError> {
    check_alphabets(m, n)?;
    let same = minimise(m, Method::Hopcroft).is_isomorphic(&minimise(n, Method::Hopcroft));
    if !same {
        let w = distinguishing_word(m, n)?.expect("non-isomorphic minimal DFAs differ on some word");
        assert_ne!(m.accepts(&w), n.accepts(&w), "distinguishing word must separate");
        if w.len() <= 8 {
            assert!(bounded_disagreement(m, n, w.len()).is_some());
        }
    }
    Ok(same)
}

/// Text format; see the crate README.
pub fn print_nfa(n: &Nfa) -> String {
    let mut out = String::new();
    let letters: Vec<String> = n.alphabet.letters().map(|c| c.to_string()).collect();
    writeln!(out, "alphabet: {}", letters.join(" ")).unwrap();
    writeln!(out, "states: {}", n.states).unwrap();
    writeln!(out, "init: {}", n.initial).unwrap();
    let acc: Vec<String> = n.accepting.iter().map(|q| q.to_string()).collect();
    writeln!(out, "accept:{}{}", if acc.is_empty() { "" } else { " " }, acc.join(" ")).unwrap();
    for (p, l, q) in &n.transitions {
        writeln!(out, "trans: {p} {} {q}", l.unwrap_or('@')).unwrap();
    }
    out
}

pub fn parse_nfa(text: &str) -> Result<Nfa, AutomataError> {
    let err = |line: usize, msg: String| AutomataError::Format { line, msg };
    let mut alphabet = None;
    let mut states = None;
    let mut init = None;
    let mut accept = BTreeSet::new();
    let mut trans = Vec::new();
    let num = |line: usize, s: &str| s.parse::<usize>().map_err(|_| err(line, format!("'{s}' is not a state number")));
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (key, rest) = l
            .split_once(':')
            .ok_or_else(|| err(line, format!("expected 'key: value', found '{l}'")))?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        match key.trim() {
            "alphabet" => {
                let mut letters = Vec::new();
                for f in &fields {
                    let mut cs = f.chars();
                    match (cs.next(), cs.next()) {
                        (Some(c), None) => letters.push(c),
                        _ => return Err(err(line, format!("'{f}' is not a single letter"))),
                    }
                }
                alphabet = Some(Alphabet::new(letters).map_err(|e| err(line, e.to_string()))?);
            }
            "states" => match fields.as_slice() {
                [s] => states = Some(num(line, s)?),
                _ => return Err(err(line, "expected one state count".into())),
            },
            "init" => match fields.as_slice() {
                [s] => init = Some((line, num(line, s)?)),
                _ => return Err(err(line, "expected exactly one initial state".into())),
            },
            "accept" => {
                for f in &fields {
                    accept.insert((line, num(line, f)?));
                }
            }
            "trans" => match fields.as_slice() {
                [p, a, q] => {
                    let label = match *a {
                        "@" => None,
                        s if s.chars().count() == 1 => s.chars().next(),
                        s => return Err(err(line, format!("'{s}' is not a letter or '@'"))),
                    };
                    trans.push((line, num(line, p)?, label, num(line, q)?));
                }
                _ => return Err(err(line, "expected 'trans: <from> <label> <to>'".into())),
            },
            other => return Err(err(line, format!("unknown key '{other}'"))),
        }
    }
    let alphabet = alphabet.ok_or_else(|| err(0, "missing 'alphabet:' line".into()))?;
    let states = states.ok_or_else(|| err(0, "missing 'states:' line".into()))?;
    let (iline, init) = init.ok_or_else(|| err(0, "missing 'init:' line".into()))?;
    let check = |line: usize, q: usize| {
        if q < states {
            Ok(q)
        } else {
            Err(err(line, format!("state {q} out of range (states: {states})")))
        }
    };
    let mut n = Nfa::new(alphabet, states.max(1), check(iline, init)?);
    n.states = states;
    for (line, q) in accept {
        n.accepting.insert(check(line, q)?);
    }
    for (line, p, l, q) in trans {
        if let Some(c) = l {
            if !n.alphabet.contains(c) {
                return Err(err(line, format!("letter '{c}' is not in the alphabet")));
            }
        }
        n.transitions.insert((check(line, p)?, l, check(line, q)?));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::{membership, parse_regex};

    fn sigma(s: &str) -> Alphabet {
        Alphabet::parse(s).unwrap()
    }

    fn nfa(re: &str, s: &str) -> Nfa {
        thompson(&parse_regex(re).unwrap(), &sigma(s))
    }

    fn example_nfa() -> Nfa {
        parse_nfa("alphabet: a b\nstates: 3\ninit: 0\naccept: 2\ntrans: 0 a 1\ntrans: 1 b 2\ntrans: 2 a 1\ntrans: 2 a 2\n")
            .unwrap()
    }

    #[test]
    fn thompson_agrees_with_derivatives() {
        let s = sigma("a b");
        for re in ["a", "0", "a*", "ab(a+ab)*", "(aa)*(1+a)", "(a+b)*b(a+b)", "0*", "1"] {
            let e = parse_regex(re).unwrap();
            let n = thompson(&e, &s);
            for w in s.words_up_to(6) {
                assert_eq!(n.accepts(&w), membership(&e, &w), "{re}");
            }
        }
    }

    #[test]
    fn thompson_examples() {
        let a = nfa("a", "a");
        let words: Vec<_> = a.alphabet.words_up_to(3).into_iter().filter(|w| a.accepts(w)).collect();
        assert_eq!(words, vec![vec!['a']]);
        assert!(!nfa("0", "a").accepts(&[]));
        let star = nfa("a*", "a");
        assert!(star.accepts(&[]) && star.accepts(&['a']) && star.accepts(&['a', 'a']));
    }

    #[test]
    fn epsilon_cycle() {
        let n = parse_nfa("alphabet: a\nstates: 2\ninit: 0\naccept: 1\ntrans: 0 @ 1\ntrans: 1 @ 0\n").unwrap();
        let e = epsilon_elimination(&n);
        assert!(e.is_epsilon_free());
        assert_eq!(e.accepting, [0, 1].into());
        let lang: Vec<_> = e.alphabet.words_up_to(4).into_iter().filter(|w| e.accepts(w)).collect();
        assert_eq!(lang, vec![Vec::<char>::new()]);
        let f = example_nfa();
        assert_eq!(epsilon_elimination(&f), f);
        let one = epsilon_elimination(&nfa("1", "a"));
        assert!(one.accepts(&[]) && !one.accepts(&['a']));
    }

    #[test]
    fn reverse_examples() {
        let ab = nfa("ab", "a b");
        let r = reverse(&ab);
        let lang: Vec<_> = r.alphabet.words_up_to(3).into_iter().filter(|w| r.accepts(w)).collect();
        assert_eq!(lang, vec![vec!['b', 'a']]);
        assert!(language_equiv(&reverse(&reverse(&ab)), &ab).unwrap());
        let star = nfa("a*", "a");
        assert!(language_equiv(&reverse(&star), &star).unwrap());
    }

    #[test]
    fn full_subset_order() {
        let mut n = Nfa::new(sigma("a"), 2, 0);
        n.add(0, Some('a'), 1);
        n.accepting.insert(1);
        let s = subset_construction_sets(&n, true).unwrap();
        let sets: Vec<Vec<usize>> = s.subsets.iter().map(|s| s.iter().copied().collect()).collect();
        assert_eq!(sets, vec![vec![], vec![0], vec![1], vec![0, 1]]);
        assert_eq!(s.dfa.states(), 4);
        assert_eq!(s.dfa.initial, 1);
        assert_eq!(s.dfa.delta[1][0], Some(2));
        assert!(subset_construction(&nfa("a*", "a"), true).is_err());
    }

    #[test]
    fn parallel_edges_merge() {
        let mut n = Nfa::new(sigma("a"), 3, 0);
        n.add(0, Some('a'), 1);
        n.add(0, Some('a'), 2);
        n.accepting.extend([1, 2]);
        let d = subset_construction(&n, false).unwrap();
        assert_eq!(d.delta[0][0], Some(1));
        let lang: Vec<_> = sigma("a").words_up_to(3).into_iter().filter(|w| d.accepts(w)).collect();
        assert_eq!(lang, vec![vec!['a']]);
    }

    #[test]
    fn deterministic_input_keeps_its_reachable_part() {
        let n = example_nfa();
        let mut det = Nfa::new(sigma("a b"), 3, 0);
        det.add(0, Some('a'), 1);
        det.add(1, Some('b'), 2);
        det.add(2, Some('a'), 1);
        det.accepting.insert(2);
        let d = subset_construction(&det, false).unwrap();
        let partial = Dfa {
            alphabet: sigma("a b"),
            initial: 0,
            accepting: vec![false, false, true],
            delta: vec![vec![Some(1), None], vec![None, Some(2)], vec![Some(1), None]],
        };
        assert!(d.is_isomorphic(&partial.complete()));
        assert!(language_equiv(&d.to_nfa(), &det).unwrap());
        assert!(!language_equiv(&n, &det).unwrap());
    }

    /// All complete DFAs over {a} with at most `k` states, for brute force.
    fn small_dfas(k: usize) -> Vec<Dfa> {
        let mut out = Vec::new();
        for n in 1..=k {
            for targets in 0..n.pow(n as u32) {
                for acc in 0..1usize << n {
                    let mut t = targets;
                    let delta = (0..n)
                        .map(|_| {
                            let x = t % n;
                            t /= n;
                            vec![Some(x)]
                        })
                        .collect();
                    out.push(Dfa {
                        alphabet: sigma("a"),
                        initial: 0,
                        accepting: (0..n).map(|q| acc >> q & 1 == 1).collect(),
                        delta,
                    });
                }
            }
        }
        out
    }

    fn brute_minimal_size(n: &Nfa) -> usize {
        small_dfas(3)
            .into_iter()
            .find(|d| n.alphabet.words_up_to(8).iter().all(|w| d.accepts(w) == n.accepts(w)))
            .map(|d| d.states())
            .expect("small language")
    }

    #[test]
    fn minimise_examples() {
        for m in [Method::Hopcroft, Method::Brzozowski] {
            let n = nfa("(aa)*(1+a)", "a");
            let d = minimise(&n, m);
            assert_eq!(d.states(), brute_minimal_size(&n));
            assert_eq!(d.states(), 1);
            assert!(d.accepting[0] && d.delta[0][0] == Some(0));
            let even = nfa("(aa)*", "a");
            assert_eq!(minimise(&even, m).states(), brute_minimal_size(&even));
            assert_eq!(minimise(&even, m).states(), 2);
            let zero = minimise(&nfa("0", "a"), m);
            assert_eq!((zero.states(), zero.accepting[0]), (1, false));
        }
    }

    #[test]
    fn methods_agree_and_are_idempotent() {
        for re in ["ab(a+ab)*", "(a+b)*b(a+b)", "(ab+b)*a*", "a*b*a*", "0", "(a+b)(a+b)"] {
            let n = nfa(re, "a b");
            let h = minimise(&n, Method::Hopcroft);
            assert!(h.is_isomorphic(&minimise(&n, Method::Brzozowski)), "{re}");
            assert_eq!(minimise(&h.to_nfa(), Method::Hopcroft), h);
        }
    }

    #[test]
    fn equivalence_examples() {
        assert!(language_equiv(&nfa("(aa)*(1+a)", "a"), &nfa("a*", "a")).unwrap());
        assert!(!language_equiv(&nfa("a", "a"), &nfa("aa", "a")).unwrap());
        assert!(language_equiv(&example_nfa(), &nfa("ab(a+ab)*", "a b")).unwrap());
        assert!(language_equiv(&nfa("a", "a"), &nfa("a", "a b")).is_err());
        assert_eq!(
            distinguishing_word(&nfa("a*", "a b"), &nfa("(ab)*", "a b")).unwrap(),
            Some(vec!['a'])
        );
    }

    #[test]
    fn format_round_trip() {
        let n = nfa("ab(a+ab)*", "a b");
        let text = print_nfa(&n);
        assert_eq!(parse_nfa(&text).unwrap(), n);
        assert_eq!(print_nfa(&parse_nfa(&text).unwrap()), text);
    }

    #[test]
    fn format_errors() {
        assert!(parse_nfa("alphabet: a\nstates: 1\n").is_err());
        let e = parse_nfa("alphabet: a\nstates: 1\ninit: 0\ntrans: 0 b 0\n").unwrap_err();
        assert!(matches!(e, AutomataError::Format { line: 4, .. }));
        assert!(parse_nfa("alphabet: a\nstates: 1\ninit: 3\n").is_err());
    }
}
