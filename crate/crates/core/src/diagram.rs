//! Typed diagram terms over the two-sorted signature.
//!
//! A [`Diagram`] is an immutable, reference-counted term whose domain and
//! codomain are computed once at construction. Ill-typed sequential
//! composition is rejected by [`Diagram::seq`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Wire sort: `Right` flows left to right, `Left` flows right to left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Right,
    Left,
}

impl Sort {
    /// Single-character name used by the text format.
    pub fn code(self) -> char {
        match self {
            Sort::Right => 'r',
            Sort::Left => 'l',
        }
    }

    pub fn from_code(c: char) -> Option<Sort> {
        match c {
            'r' => Some(Sort::Right),
            'l' => Some(Sort::Left),
            _ => None,
        }
    }
}

/// Ordered list of sorts on one side of a diagram.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interface(Vec<Sort>);

impl Interface {
    pub fn new(sorts: Vec<Sort>) -> Self {
        Interface(sorts)
    }

    pub fn empty() -> Self {
        Interface(Vec::new())
    }

    /// `n` copies of the right sort.
    pub fn right(n: usize) -> Self {
        Interface(vec![Sort::Right; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.0
    }

    pub fn concat(&self, other: &Interface) -> Interface {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Interface(v)
    }

    pub fn is_right_only(&self) -> bool {
        self.0.iter().all(|s| *s == Sort::Right)
    }
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", s.code())?;
        }
        write!(f, "]")
    }
}

/// The eleven generating morphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Copy,
    Discard,
    Merge,
    Generate,
    Cap,
    Cup,
    Letter(char),
    WMult,
    WUnit,
    WComult,
    WCounit,
}

impl Generator {
    pub fn dom(self) -> Interface {
        use Generator::*;
        match self {
            Copy | Discard | Letter(_) | WComult | WCounit => Interface::right(1),
            Merge | WMult => Interface::right(2),
            Generate | WUnit | Cup => Interface::empty(),
            Cap => Interface::new(vec![Sort::Right, Sort::Left]),
        }
    }

    pub fn cod(self) -> Interface {
        use Generator::*;
        match self {
            Copy | WComult => Interface::right(2),
            Discard | WCounit | Cap => Interface::empty(),
            Merge | Generate | Letter(_) | WMult | WUnit => Interface::right(1),
            Cup => Interface::new(vec![Sort::Left, Sort::Right]),
        }
    }

    pub fn arity_in(self) -> usize {
        self.dom().len()
    }

    pub fn arity_out(self) -> usize {
        self.cod().len()
    }

    /// Black generators, letters and cap/cup.
    pub fn is_automaton(self) -> bool {
        !self.is_white()
    }

    pub fn is_white(self) -> bool {
        matches!(
            self,
            Generator::WMult | Generator::WUnit | Generator::WComult | Generator::WCounit
        )
    }

    /// Copy, discard, merge and generate: the generators of relation-diagrams.
    pub fn is_relational(self) -> bool {
        matches!(
            self,
            Generator::Copy | Generator::Discard | Generator::Merge | Generator::Generate
        )
    }

    /// Name used by the text format (letters print as `(letter a)`).
    pub fn keyword(self) -> &'static str {
        use Generator::*;
        match self {
            Copy => "copy",
            Discard => "discard",
            Merge => "merge",
            Generate => "generate",
            Cap => "cap",
            Cup => "cup",
            Letter(_) => "letter",
            WMult => "wmult",
            WUnit => "wunit",
            WComult => "wcomult",
            WCounit => "wcounit",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Generator> {
        use Generator::*;
        Some(match s {
            "copy" => Copy,
            "discard" => Discard,
            "merge" => Merge,
            "generate" => Generate,
            "cap" => Cap,
            "cup" => Cup,
            "wmult" => WMult,
            "wunit" => WUnit,
            "wcomult" => WComult,
            "wcounit" => WCounit,
            _ => return None,
        })
    }

    /// Horizontal mirror on generators that have a mirror image of the
    /// right type. Cap and cup need a symmetry and are handled by
    /// [`Diagram::transpose`].
    fn mirror(self) -> Generator {
        use Generator::*;
        match self {
            Copy => Merge,
            Merge => Copy,
            Discard => Generate,
            Generate => Discard,
            WComult => WMult,
            WMult => WComult,
            WCounit => WUnit,
            WUnit => WCounit,
            g => g,
        }
    }

    fn colour_swap(self) -> Generator {
        use Generator::*;
        match self {
            Copy => WMult,
            WMult => Copy,
            Discard => WUnit,
            WUnit => Discard,
            Merge => WComult,
            WComult => Merge,
            Generate => WCounit,
            WCounit => Generate,
            g => g,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Letter(a) => write!(f, "{a}"),
            g => write!(f, "{}", g.keyword()),
        }
    }
}

/// Letters are alphabetic characters; `0`, `1` and `@` are reserved.
pub fn is_letter(c: char) -> bool {
    c.is_ascii_alphabetic()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("type mismatch: codomain {left} does not match domain {right}")]
    TypeMismatch { left: Interface, right: Interface },
    #[error("interfaces differ: {left_dom} -> {left_cod} versus {right_dom} -> {right_cod}")]
    InterfaceMismatch {
        left_dom: Interface,
        left_cod: Interface,
        right_dom: Interface,
        right_cod: Interface,
    },
    #[error("invalid term path {0}")]
    BadPath(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// Identity on the empty interface.
    Empty,
    Gen(Generator),
    Id(Sort),
    Sym(Sort, Sort),
    Seq(Diagram, Diagram),
    Par(Diagram, Diagram),
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct Node {
    term: Term,
    dom: Interface,
    cod: Interface,
}

/// A well-typed diagram term. Cloning is cheap.
#[derive(Clone, Debug, Eq)]
pub struct Diagram(Arc<Node>);

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

// Hashes the node, so it agrees with the structural equality above.
impl std::hash::Hash for Diagram {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

/// Classification of a diagram's generators and boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub is_automaton_diagram: bool,
    pub is_left_to_right: bool,
}

impl Diagram {
    fn make(term: Term, dom: Interface, cod: Interface) -> Self {
        Diagram(Arc::new(Node { term, dom, cod }))
    }

    pub fn empty() -> Self {
        Self::make(Term::Empty, Interface::empty(), Interface::empty())
    }

    pub fn gen(g: Generator) -> Self {
        Self::make(Term::Gen(g), g.dom(), g.cod())
    }

    pub fn letter(a: char) -> Self {
        Self::gen(Generator::Letter(a))
    }

    pub fn id(s: Sort) -> Self {
        let i = Interface::new(vec![s]);
        Self::make(Term::Id(s), i.clone(), i)
    }

    pub fn sym(a: Sort, b: Sort) -> Self {
        Self::make(
            Term::Sym(a, b),
            Interface::new(vec![a, b]),
            Interface::new(vec![b, a]),
        )
    }

    /// Parallel identities on an interface; `Empty` for the empty one.
    pub fn ids(i: &Interface) -> Self {
        Self::par_all(i.sorts().iter().map(|s| Self::id(*s)))
    }

    /// `n` parallel right identities.
    pub fn id_right(n: usize) -> Self {
        Self::ids(&Interface::right(n))
    }

    pub fn seq(c: &Diagram, d: &Diagram) -> Result<Self, DiagramError> {
        if c.cod() != d.dom() {
            return Err(DiagramError::TypeMismatch {
                left: c.cod().clone(),
                right: d.dom().clone(),
            });
        }
        Ok(Self::make(
            Term::Seq(c.clone(), d.clone()),
            c.dom().clone(),
            d.cod().clone(),
        ))
    }

    pub fn par(c: &Diagram, d: &Diagram) -> Self {
        Self::make(
            Term::Par(c.clone(), d.clone()),
            c.dom().concat(d.dom()),
            c.cod().concat(d.cod()),
        )
    }

    /// `self ; d`, for compositions that are well-typed by construction.
    ///
    /// # Panics
    /// Panics if the interfaces do not match.
    pub fn then(&self, d: &Diagram) -> Self {
        match Self::seq(self, d) {
            Ok(x) => x,
            Err(e) => panic!("internal composition is ill-typed: {e}"),
        }
    }

    /// `self ⊕ d`.
    pub fn beside(&self, d: &Diagram) -> Self {
        Self::par(self, d)
    }

    /// Left-nested parallel product; `Empty` when the iterator is empty.
    pub fn par_all<I: IntoIterator<Item = Diagram>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Self::empty(),
            Some(first) => it.fold(first, |acc, d| Self::par(&acc, &d)),
        }
    }

    /// Left-nested sequential composition of a non-empty list.
    ///
    /// # Panics
    /// Panics on an empty list or an ill-typed composition.
    pub fn seq_all<I: IntoIterator<Item = Diagram>>(items: I) -> Self {
        let mut it = items.into_iter();
        let first = it.next().expect("seq_all needs at least one diagram");
        it.fold(first, |acc, d| acc.then(&d))
    }

    pub fn term(&self) -> &Term {
        &self.0.term
    }

    pub fn dom(&self) -> &Interface {
        &self.0.dom
    }

    pub fn cod(&self) -> &Interface {
        &self.0.cod
    }

    pub fn same_type(&self, other: &Diagram) -> bool {
        self.dom() == other.dom() && self.cod() == other.cod()
    }

    pub fn check_same_type(&self, other: &Diagram) -> Result<(), DiagramError> {
        if self.same_type(other) {
            Ok(())
        } else {
            Err(DiagramError::InterfaceMismatch {
                left_dom: self.dom().clone(),
                left_cod: self.cod().clone(),
                right_dom: other.dom().clone(),
                right_cod: other.cod().clone(),
            })
        }
    }

    /// Generators in left-to-right, depth-first term order.
    pub fn generators(&self) -> Vec<Generator> {
        let mut out = Vec::new();
        self.visit_generators(&mut |g| out.push(g));
        out
    }

    fn visit_generators(&self, f: &mut impl FnMut(Generator)) {
        match self.term() {
            Term::Gen(g) => f(*g),
            Term::Seq(a, b) | Term::Par(a, b) => {
                a.visit_generators(f);
                b.visit_generators(f);
            }
            _ => {}
        }
    }

    pub fn letters(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.visit_generators(&mut |g| {
            if let Generator::Letter(a) = g {
                out.insert(a);
            }
        });
        out
    }

    /// Number of term nodes.
    pub fn size(&self) -> usize {
        match self.term() {
            Term::Seq(a, b) | Term::Par(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    pub fn classify(&self) -> Classification {
        let mut automaton = true;
        self.visit_generators(&mut |g| automaton &= g.is_automaton());
        Classification {
            is_automaton_diagram: automaton,
            is_left_to_right: self.dom().is_right_only() && self.cod().is_right_only(),
        }
    }

    /// Horizontal reflection. Sorts of boundary wires are kept; cap and cup
    /// pick up a symmetry so that the result stays well-typed.
    pub fn transpose(&self) -> Diagram {
        match self.term() {
            Term::Empty => self.clone(),
            Term::Id(_) => self.clone(),
            Term::Sym(a, b) => Diagram::sym(*b, *a),
            Term::Gen(Generator::Cap) => {
                Diagram::gen(Generator::Cup).then(&Diagram::sym(Sort::Left, Sort::Right))
            }
            Term::Gen(Generator::Cup) => {
                Diagram::sym(Sort::Left, Sort::Right).then(&Diagram::gen(Generator::Cap))
            }
            Term::Gen(g) => Diagram::gen(g.mirror()),
            Term::Seq(c, d) => d.transpose().then(&c.transpose()),
            Term::Par(c, d) => Diagram::par(&c.transpose(), &d.transpose()),
        }
    }

    /// Swap black and white generators and reflect horizontally.
    pub fn colour_transpose(&self) -> Diagram {
        match self.term() {
            Term::Empty | Term::Id(_) => self.clone(),
            Term::Sym(a, b) => Diagram::sym(*b, *a),
            Term::Gen(Generator::Cap) | Term::Gen(Generator::Cup) => self.transpose(),
            Term::Gen(g) => Diagram::gen(g.colour_swap()),
            Term::Seq(c, d) => d.colour_transpose().then(&c.colour_transpose()),
            Term::Par(c, d) => Diagram::par(&c.colour_transpose(), &d.colour_transpose()),
        }
    }

    /// Replace every letter via `f`.
    pub fn map_letters(&self, f: &impl Fn(char) -> char) -> Diagram {
        match self.term() {
            Term::Gen(Generator::Letter(a)) => Diagram::letter(f(*a)),
            Term::Seq(c, d) => c.map_letters(f).then(&d.map_letters(f)),
            Term::Par(c, d) => Diagram::par(&c.map_letters(f), &d.map_letters(f)),
            _ => self.clone(),
        }
    }

    /// Subterm at a path of child indices (0 = left/first, 1 = right/second).
    pub fn subterm(&self, path: &[usize]) -> Option<&Diagram> {
        let mut cur = self;
        for &i in path {
            cur = match (cur.term(), i) {
                (Term::Seq(a, _), 0) | (Term::Par(a, _), 0) => a,
                (Term::Seq(_, b), 1) | (Term::Par(_, b), 1) => b,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Replace the subterm at `path` by `new`, which must have the same type.
    pub fn replace_at(&self, path: &[usize], new: &Diagram) -> Result<Diagram, DiagramError> {
        match path.split_first() {
            None => {
                self.check_same_type(new)?;
                Ok(new.clone())
            }
            Some((&i, rest)) => match (self.term(), i) {
                (Term::Seq(a, b), 0) => Ok(a.replace_at(rest, new)?.then(b)),
                (Term::Seq(a, b), 1) => Ok(a.then(&b.replace_at(rest, new)?)),
                (Term::Par(a, b), 0) => Ok(Diagram::par(&a.replace_at(rest, new)?, b)),
                (Term::Par(a, b), 1) => Ok(Diagram::par(a, &b.replace_at(rest, new)?)),
                _ => Err(DiagramError::BadPath(format_path(path))),
            },
        }
    }
}

/// Render a term path as `/0/1`; the root is `/`.
pub fn format_path(path: &[usize]) -> String {
    if path.is_empty() {
        return "/".to_string();
    }
    path.iter().map(|i| format!("/{i}")).collect()
}

/// Parse a term path written by [`format_path`].
pub fn parse_path(s: &str) -> Option<Vec<usize>> {
    if s == "/" {
        return Some(Vec::new());
    }
    let rest = s.strip_prefix('/')?;
    rest.split('/')
        .map(|p| match p {
            "0" => Some(0),
            "1" => Some(1),
            _ => None,
        })
        .collect()
}
