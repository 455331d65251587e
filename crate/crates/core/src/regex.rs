//! Regular expressions: syntax, a derivative-based membership oracle and the
//! encoding into automaton-diagrams.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::diagram::{is_letter, Diagram, Generator, Sort};

/// A finite alphabet of single-character letters, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Alphabet(Vec<char>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("'{0}' is not a valid letter (expected an ASCII letter)")]
    BadLetter(char),
    #[error("letter '{0}' is not in the alphabet {1}")]
    NotInAlphabet(char, Alphabet),
}

impl Alphabet {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Result<Self, AlphabetError> {
        let set: BTreeSet<char> = letters.into_iter().collect();
        if let Some(c) = set.iter().find(|c| !is_letter(**c)) {
            return Err(AlphabetError::BadLetter(*c));
        }
        Ok(Alphabet(set.into_iter().collect()))
    }

    /// Parse whitespace- or comma-separated letters, e.g. `"a b"` or `"ab"`.
    pub fn parse(text: &str) -> Result<Self, AlphabetError> {
        Alphabet::new(text.chars().filter(|c| !c.is_whitespace() && *c != ','))
    }

    pub fn letters(&self) -> impl ExactSizeIterator<Item = &char> + '_ {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.0.binary_search(&c).ok()
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.0.iter().chain(&other.0).copied()).expect("both valid")
    }

    pub fn check_word(&self, w: &[char]) -> Result<(), AlphabetError> {
        match w.iter().find(|c| !self.contains(**c)) {
            Some(c) => Err(AlphabetError::NotInAlphabet(*c, self.clone())),
            None => Ok(()),
        }
    }

    /// All words of length at most `n`, shortest first, then in alphabet order.
    pub fn words_up_to(&self, n: usize) -> Vec<Vec<char>> {
        let mut out = vec![vec![]];
        let mut layer = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &layer {
                for c in &self.0 {
                    let mut v: Vec<char> = w.clone();
                    v.push(*c);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Print a word, with `@` for the empty word.
pub fn format_word(w: &[char]) -> String {
    if w.is_empty() {
        "@".to_string()
    } else {
        w.iter().collect()
    }
}

pub fn parse_word(text: &str) -> Vec<char> {
    let t = text.trim();
    if t == "@" {
        vec![]
    } else {
        t.chars().filter(|c| !c.is_whitespace()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regex {
    Zero,
    One,
    Letter(char),
    Plus(Box<Regex>, Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

impl Regex {
    pub fn plus(a: Regex, b: Regex) -> Regex {
        Regex::Plus(Box::new(a), Box::new(b))
    }

    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn star(a: Regex) -> Regex {
        Regex::Star(Box::new(a))
    }

    pub fn depth(&self) -> usize {
        match self {
            Regex::Zero | Regex::One | Regex::Letter(_) => 0,
            Regex::Plus(a, b) | Regex::Concat(a, b) => 1 + a.depth().max(b.depth()),
            Regex::Star(a) => 1 + a.depth(),
        }
    }

    pub fn letters(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.collect_letters(&mut out);
        out
    }

    fn collect_letters(&self, out: &mut BTreeSet<char>) {
        match self {
            Regex::Letter(c) => {
                out.insert(*c);
            }
            Regex::Plus(a, b) | Regex::Concat(a, b) => {
                a.collect_letters(out);
                b.collect_letters(out);
            }
            Regex::Star(a) => a.collect_letters(out),
            Regex::Zero | Regex::One => {}
        }
    }

    pub fn nullable(&self) -> bool {
        match self {
            Regex::Zero | Regex::Letter(_) => false,
            Regex::One | Regex::Star(_) => true,
            Regex::Plus(a, b) => a.nullable() || b.nullable(),
            Regex::Concat(a, b) => a.nullable() && b.nullable(),
        }
    }

    /// Brzozowski derivative with light simplification to keep terms small.
    pub fn derivative(&self, c: char) -> Regex {
        match self {
            Regex::Zero | Regex::One => Regex::Zero,
            Regex::Letter(x) => {
                if *x == c {
                    Regex::One
                } else {
                    Regex::Zero
                }
            }
            Regex::Plus(a, b) => simple_plus(a.derivative(c), b.derivative(c)),
            Regex::Concat(a, b) => {
                let left = simple_concat(a.derivative(c), (**b).clone());
                if a.nullable() {
                    simple_plus(left, b.derivative(c))
                } else {
                    left
                }
            }
            Regex::Star(a) => simple_concat(a.derivative(c), self.clone()),
        }
    }

    /// The automaton-diagram ▶ → ▶ encoding this expression.
    pub fn to_diagram(&self) -> Diagram {
        match self {
            Regex::Zero => Diagram::gen(Generator::Discard).then(&Diagram::gen(Generator::Generate)),
            Regex::One => Diagram::id(Sort::Right),
            Regex::Letter(c) => Diagram::letter(*c),
            Regex::Plus(a, b) => Diagram::gen(Generator::Copy)
                .then(&a.to_diagram().beside(&b.to_diagram()))
                .then(&Diagram::gen(Generator::Merge)),
            Regex::Concat(a, b) => a.to_diagram().then(&b.to_diagram()),
            Regex::Star(a) => crate::encode::star(&a.to_diagram()),
        }
    }
}

fn simple_plus(a: Regex, b: Regex) -> Regex {
    match (a, b) {
        (Regex::Zero, x) | (x, Regex::Zero) => x,
        (x, y) if x == y => x,
        (x, y) => Regex::plus(x, y),
    }
}

fn simple_concat(a: Regex, b: Regex) -> Regex {
    match (a, b) {
        (Regex::Zero, _) | (_, Regex::Zero) => Regex::Zero,
        (Regex::One, x) | (x, Regex::One) => x,
        (x, y) => Regex::concat(x, y),
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence: 0 plus, 1 concat, 2 star/atom
        fn go(r: &Regex, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let own = match r {
                Regex::Plus(..) => 0,
                Regex::Concat(..) => 1,
                _ => 2,
            };
            if own < ctx {
                f.write_str("(")?;
            }
            match r {
                Regex::Zero => f.write_str("0")?,
                Regex::One => f.write_str("1")?,
                Regex::Letter(c) => write!(f, "{c}")?,
                Regex::Plus(a, b) => {
                    go(a, 0, f)?;
                    f.write_str("+")?;
                    go(b, 1, f)?;
                }
                Regex::Concat(a, b) => {
                    go(a, 1, f)?;
                    go(b, 2, f)?;
                }
                Regex::Star(a) => {
                    go(a, 3, f)?;
                    f.write_str("*")?;
                }
            }
            if own < ctx {
                f.write_str(")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

/// Parse with precedence star > concatenation > plus; both binary forms
/// associate to the left.
pub fn parse_regex(text: &str) -> Result<Regex, SyntaxError> {
    let tokens: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let mut p = RegexParser { tokens, pos: 0, len: text.len() };
    let r = p.plus()?;
    if let Some((at, c)) = p.peek() {
        return Err(SyntaxError {
            pos: at,
            msg: format!("unexpected '{c}'"),
        });
    }
    Ok(r)
}

struct RegexParser {
    tokens: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl RegexParser {
    fn peek(&self) -> Option<(usize, char)> {
        self.tokens.get(self.pos).copied()
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.len, |(at, _)| at)
    }

    fn plus(&mut self) -> Result<Regex, SyntaxError> {
        let mut acc = self.concat()?;
        while let Some((_, '+')) = self.peek() {
            self.pos += 1;
            acc = Regex::plus(acc, self.concat()?);
        }
        Ok(acc)
    }

    fn starts_atom(c: char) -> bool {
        c == '(' || c == '0' || c == '1' || is_letter(c)
    }

    fn concat(&mut self) -> Result<Regex, SyntaxError> {
        let mut acc = self.starred()?;
        while matches!(self.peek(), Some((_, c)) if Self::starts_atom(c)) {
            acc = Regex::concat(acc, self.starred()?);
        }
        Ok(acc)
    }

    fn starred(&mut self) -> Result<Regex, SyntaxError> {
        let mut acc = self.atom()?;
        while let Some((_, '*')) = self.peek() {
            self.pos += 1;
            acc = Regex::star(acc);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Regex, SyntaxError> {
        let at = self.offset();
        match self.peek() {
            None => Err(SyntaxError {
                pos: at,
                msg: "unexpected end of expression".into(),
            }),
            Some((_, '(')) => {
                self.pos += 1;
                let r = self.plus()?;
                match self.peek() {
                    Some((_, ')')) => {
                        self.pos += 1;
                        Ok(r)
                    }
                    _ => Err(SyntaxError {
                        pos: self.offset(),
                        msg: format!("expected ')' to close '(' at offset {at}"),
                    }),
                }
            }
            Some((_, '0')) => {
                self.pos += 1;
                Ok(Regex::Zero)
            }
            Some((_, '1')) => {
                self.pos += 1;
                Ok(Regex::One)
            }
            Some((_, c)) if is_letter(c) => {
                self.pos += 1;
                Ok(Regex::Letter(c))
            }
            Some((_, c)) => Err(SyntaxError {
                pos: at,
                msg: format!("unexpected '{c}'"),
            }),
        }
    }
}

/// Membership by repeated derivatives.
pub fn membership(e: &Regex, w: &[char]) -> bool {
    let mut r = e.clone();
    for c in w {
        r = r.derivative(*c);
        if r == Regex::Zero {
            return false;
        }
    }
    r.nullable()
}

/// Language equality, decided by comparing minimal complete DFAs.
pub fn regex_equiv(e: &Regex, f: &Regex, alphabet: &Alphabet) -> bool {
    let sigma = alphabet
        .union(&Alphabet::new(e.letters()).expect("regex letters are valid"))
        .union(&Alphabet::new(f.letters()).expect("regex letters are valid"));
    let a = crate::automata::minimise(&crate::automata::thompson(e, &sigma), crate::automata::Method::Hopcroft);
    let b = crate::automata::minimise(&crate::automata::thompson(f, &sigma), crate::automata::Method::Hopcroft);
    a.is_isomorphic(&b)
}
