//! Evaluation of diagrams as monotone relations over finite lattice models.
//!
//! [`eval`] works on the port graph: every wire is a variable, every box a
//! constraint, and internal wires are eliminated one at a time. This is the
//! relational composite of the term because generator relations are closed
//! under the order, so internal `≤` links collapse to equalities.
//! [`eval_by_terms`] composes relations along the term structure and serves
//! as an independent route.

use std::fmt;

use thiserror::Error;

use crate::diagram::{Diagram, Generator, Interface, Sort, Term};
use crate::lattice::{FiniteLattice, LatticeModel};
use crate::portgraph::{PortGraph, Source};

/// Largest table (in entries) built during evaluation.
pub const MAX_TABLE: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("letter '{0}' has no action in this model")]
    UnknownLetter(char),
    #[error("relation table would need {0} entries")]
    TooLarge(usize),
}

/// `≤` or `=` between two diagrams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Leq,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Leq => "<=",
            Relation::Eq => "=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

fn table_size(n: usize, arity: usize) -> Result<usize, InterpError> {
    let mut size: usize = 1;
    for _ in 0..arity {
        size = size.checked_mul(n).filter(|s| *s <= MAX_TABLE).ok_or(InterpError::TooLarge(usize::MAX))?;
    }
    Ok(size)
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
}

/// A relation between tuples of lattice elements. Index of `(x, y)` is the
/// mixed-radix number with digits `x` then `y`, first digit most significant.
#[derive(Clone, PartialEq, Eq)]
pub struct MonotoneRelation {
    dom: Interface,
    cod: Interface,
    n: usize,
    bits: Bits,
}

impl fmt::Debug for MonotoneRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonotoneRelation({} -> {}, {{", self.dom, self.cod)?;
        let pairs: Vec<String> = self
            .pairs()
            .map(|(x, y)| format!("({x:?},{y:?})"))
            .collect();
        write!(f, "{}}})", pairs.join(","))
    }
}

fn digits(mut index: usize, n: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    out
}

fn index_of(tuple: impl IntoIterator<Item = usize>, n: usize) -> usize {
    tuple.into_iter().fold(0, |acc, d| acc * n + d)
}

impl MonotoneRelation {
    /// Build from a predicate; `f` receives the domain and codomain tuples.
    pub fn from_fn(
        dom: Interface,
        cod: Interface,
        n: usize,
        mut f: impl FnMut(&[usize], &[usize]) -> bool,
    ) -> Result<Self, InterpError> {
        let arity = dom.len() + cod.len();
        let size = table_size(n, arity)?;
        let mut bits = Bits::new(size);
        for i in 0..size {
            let t = digits(i, n, arity);
            let (x, y) = t.split_at(dom.len());
            if f(x, y) {
                bits.set(i);
            }
        }
        Ok(MonotoneRelation { dom, cod, n, bits })
    }

    pub fn dom(&self) -> &Interface {
        &self.dom
    }

    pub fn cod(&self) -> &Interface {
        &self.cod
    }

    pub fn lattice_size(&self) -> usize {
        self.n
    }

    fn arity(&self) -> usize {
        self.dom.len() + self.cod.len()
    }

    fn len(&self) -> usize {
        self.n.pow(self.arity() as u32)
    }

    pub fn holds(&self, x: &[usize], y: &[usize]) -> bool {
        self.bits.get(index_of(x.iter().chain(y).copied(), self.n))
    }

    /// All related pairs in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> + '_ {
        let split = self.dom.len();
        (0..self.len()).filter(|i| self.bits.get(*i)).map(move |i| {
            let mut t = digits(i, self.n, self.arity());
            let y = t.split_off(split);
            (t, y)
        })
    }

    pub fn count(&self) -> usize {
        self.bits.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// First pair in `self` missing from `other`, if any.
    pub fn inclusion_witness(&self, other: &MonotoneRelation) -> Option<(Vec<usize>, Vec<usize>)> {
        assert_eq!((&self.dom, &self.cod, self.n), (&other.dom, &other.cod, other.n));
        let split = self.dom.len();
        (0..self.len())
            .find(|i| self.bits.get(*i) && !other.bits.get(*i))
            .map(|i| {
                let mut t = digits(i, self.n, self.arity());
                let y = t.split_off(split);
                (t, y)
            })
    }

    pub fn is_subset(&self, other: &MonotoneRelation) -> bool {
        self.inclusion_witness(other).is_none()
    }

    /// Swap the roles of domain and codomain.
    pub fn converse(&self) -> MonotoneRelation {
        MonotoneRelation::from_fn(self.cod.clone(), self.dom.clone(), self.n, |y, x| self.holds(x, y))
            .expect("same size as the original")
    }

    /// Sequential composition.
    pub fn compose(&self, other: &MonotoneRelation) -> Result<MonotoneRelation, InterpError> {
        assert_eq!(self.cod, other.dom);
        let n = self.n;
        let mid = table_size(n, self.cod.len())?;
        table_size(n, self.dom.len() + self.cod.len() + other.cod.len())?;
        MonotoneRelation::from_fn(self.dom.clone(), other.cod.clone(), n, |x, z| {
            (0..mid).any(|m| {
                let y = digits(m, n, self.cod.len());
                self.holds(x, &y) && other.holds(&y, z)
            })
        })
    }

    /// Parallel product.
    pub fn product(&self, other: &MonotoneRelation) -> Result<MonotoneRelation, InterpError> {
        let (d1, c1) = (self.dom.len(), self.cod.len());
        MonotoneRelation::from_fn(
            self.dom.concat(&other.dom),
            self.cod.concat(&other.cod),
            self.n,
            |x, y| self.holds(&x[..d1], &y[..c1]) && other.holds(&x[d1..], &y[c1..]),
        )
    }
}

/// Order on a wire of the given sort.
pub fn sort_leq(l: &FiniteLattice, s: Sort, x: usize, y: usize) -> bool {
    match s {
        Sort::Right => l.leq(x, y),
        Sort::Left => l.leq(y, x),
    }
}

/// The relation denoted by a generator, on explicit port values.
pub fn generator_holds(
    g: Generator,
    m: &LatticeModel,
    ins: &[usize],
    outs: &[usize],
) -> Result<bool, InterpError> {
    let l = m.lattice();
    use Generator::*;
    Ok(match g {
        Copy => l.leq(ins[0], outs[0]) && l.leq(ins[0], outs[1]),
        Discard | Generate => true,
        Merge => l.leq(l.join(ins[0], ins[1]), outs[0]),
        // ins = (▶ value, ◀ value)
        Cap => l.leq(ins[0], ins[1]),
        // outs = (◀ value, ▶ value)
        Cup => l.leq(outs[0], outs[1]),
        Letter(a) => {
            let f = m.action(a).ok_or(InterpError::UnknownLetter(a))?;
            l.leq(f[ins[0]], outs[0])
        }
        WMult => l.leq(l.meet(ins[0], ins[1]), outs[0]),
        WUnit => l.leq(l.top(), outs[0]),
        WComult => l.leq(ins[0], l.join(outs[0], outs[1])),
        WCounit => l.leq(ins[0], l.bottom()),
    })
}

pub fn generator_relation(g: Generator, m: &LatticeModel) -> Result<MonotoneRelation, InterpError> {
    if let Generator::Letter(a) = g {
        m.action(a).ok_or(InterpError::UnknownLetter(a))?;
    }
    MonotoneRelation::from_fn(g.dom(), g.cod(), m.lattice().size(), |x, y| {
        generator_holds(g, m, x, y).expect("letters checked")
    })
}

/// What a factor of the wire-variable network constrains.
#[derive(Clone, Copy)]
enum FactorKind {
    Box(usize),
    /// A boundary input wired straight to an output.
    Order(Sort),
}

type Factor = (Vec<usize>, FactorKind);

/// Variables are the wires of `g`, plus one fresh variable per pass-through
/// output. Returns the factors, the boundary variables and the variable count.
fn network(g: &PortGraph) -> (Vec<Factor>, Vec<usize>, usize) {
    let wires = g.wires();
    let var_of = |s: Source| wires.iter().position(|w| *w == s).expect("wire");
    let mut var_count = wires.len();
    let mut factors = Vec::new();
    for (b, gen) in g.boxes().iter().enumerate() {
        let mut vars: Vec<usize> = (0..gen.arity_in()).map(|k| var_of(g.input_source(b, k))).collect();
        vars.extend((0..gen.arity_out()).map(|k| var_of(Source::Out(b, k))));
        factors.push((vars, FactorKind::Box(b)));
    }
    let mut keep: Vec<usize> = (0..g.dom().len()).map(|i| var_of(Source::Left(i))).collect();
    for j in 0..g.cod().len() {
        let s = g.right_source(j);
        if let Source::Left(i) = s {
            let v = var_count;
            var_count += 1;
            factors.push((vec![var_of(s), v], FactorKind::Order(g.dom().sorts()[i])));
            keep.push(v);
        } else {
            keep.push(var_of(s));
        }
    }
    (factors, keep, var_count)
}

/// Greedy variable elimination: repeatedly merge the factors touching the
/// variable with the smallest neighbourhood, then merge what remains onto
/// `keep`. `merge` receives the factors and the variables to project onto.
fn eliminate<P>(
    mut factors: Vec<(Vec<usize>, P)>,
    keep: &[usize],
    var_count: usize,
    mut merge: impl FnMut(Vec<(Vec<usize>, P)>, &[usize]) -> Result<P, InterpError>,
) -> Result<P, InterpError> {
    let neighbourhood = |factors: &[(Vec<usize>, P)], v: usize| -> Vec<usize> {
        let mut scope: Vec<usize> = Vec::new();
        for (vars, _) in factors.iter().filter(|f| f.0.contains(&v)) {
            for x in vars {
                if *x != v && !scope.contains(x) {
                    scope.push(*x);
                }
            }
        }
        scope
    };
    loop {
        let best = (0..var_count)
            .filter(|v| !keep.contains(v) && factors.iter().any(|f| f.0.contains(v)))
            .min_by_key(|v| (neighbourhood(&factors, *v).len(), *v));
        let Some(best) = best else { break };
        let scope = neighbourhood(&factors, best);
        let (touching, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.0.contains(&best));
        let merged = merge(touching, &scope)?;
        factors = rest;
        factors.push((scope, merged));
    }
    merge(factors, keep)
}

fn union_vars<P>(factors: &[(Vec<usize>, P)], keep: &[usize]) -> Vec<usize> {
    let mut all: Vec<usize> = keep.to_vec();
    for (vars, _) in factors {
        for v in vars {
            if !all.contains(v) {
                all.push(*v);
            }
        }
    }
    all
}

/// Existentially project the conjunction of `factors` onto `keep`.
fn combine(factors: Vec<(Vec<usize>, Bits)>, keep: &[usize], var_count: usize, n: usize) -> Result<Bits, InterpError> {
    let all = union_vars(&factors, keep);
    table_size(n, all.len())?;
    let kept = table_size(n, keep.len())?;
    let hidden_vars = &all[keep.len()..];
    let mut bits = Bits::new(kept);
    let mut assignment = vec![0; var_count];
    let holds = |assignment: &[usize]| {
        factors
            .iter()
            .all(|(vars, b)| b.get(index_of(vars.iter().map(|v| assignment[*v]), n)))
    };
    for k in 0..kept {
        for (v, d) in keep.iter().zip(digits(k, n, keep.len())) {
            assignment[*v] = d;
        }
        for v in hidden_vars {
            assignment[*v] = 0;
        }
        // odometer over the hidden variables, last one fastest
        loop {
            if holds(&assignment) {
                bits.set(k);
                break;
            }
            let mut i = hidden_vars.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                let v = hidden_vars[i];
                assignment[v] += 1;
                if assignment[v] < n {
                    break;
                }
                assignment[v] = 0;
            }
            if hidden_vars.iter().all(|v| assignment[*v] == 0) {
                break;
            }
        }
    }
    Ok(bits)
}

/// Evaluate a diagram in a model.
pub fn eval(d: &Diagram, m: &LatticeModel) -> Result<MonotoneRelation, InterpError> {
    eval_graph(&PortGraph::from_diagram(d), m)
}

/// Number of tuple visits `eval` makes on a lattice with `n` elements, an
/// upper bound on its running time up to a constant.
pub fn eval_cost(d: &Diagram, n: usize) -> u128 {
    let (factors, keep, var_count) = network(&PortGraph::from_diagram(d));
    let mut total: u128 = 0;
    let units: Vec<(Vec<usize>, ())> = factors.into_iter().map(|(v, _)| (v, ())).collect();
    let _ = eliminate(units, &keep, var_count, |fs, keep| {
        let width = union_vars(&fs, keep).len() as u32;
        total = total.saturating_add((n as u128).saturating_pow(width));
        Ok(())
    });
    total
}

pub fn eval_graph(g: &PortGraph, m: &LatticeModel) -> Result<MonotoneRelation, InterpError> {
    let n = m.lattice().size();
    let (shape, keep, var_count) = network(g);
    let mut factors = Vec::new();
    for (vars, kind) in shape {
        let bits = match kind {
            FactorKind::Box(b) => generator_relation(g.boxes()[b], m)?.bits,
            FactorKind::Order(sort) => {
                let i = Interface::new(vec![sort]);
                MonotoneRelation::from_fn(i.clone(), i, n, |x, y| sort_leq(m.lattice(), sort, x[0], y[0]))?.bits
            }
        };
        factors.push((vars, bits));
    }
    let bits = eliminate(factors, &keep, var_count, |fs, keep| combine(fs, keep, var_count, n))?;
    Ok(MonotoneRelation {
        dom: g.dom().clone(),
        cod: g.cod().clone(),
        n,
        bits,
    })
}

/// Evaluate by composing relations along the term.
pub fn eval_by_terms(d: &Diagram, m: &LatticeModel) -> Result<MonotoneRelation, InterpError> {
    let l = m.lattice();
    let n = l.size();
    match d.term() {
        Term::Empty => MonotoneRelation::from_fn(Interface::empty(), Interface::empty(), n, |_, _| true),
        Term::Gen(g) => generator_relation(*g, m),
        Term::Id(s) => MonotoneRelation::from_fn(d.dom().clone(), d.cod().clone(), n, |x, y| {
            sort_leq(l, *s, x[0], y[0])
        }),
        Term::Sym(a, b) => MonotoneRelation::from_fn(d.dom().clone(), d.cod().clone(), n, |x, y| {
            sort_leq(l, *a, x[0], y[1]) && sort_leq(l, *b, x[1], y[0])
        }),
        Term::Seq(c, e) => eval_by_terms(c, m)?.compose(&eval_by_terms(e, m)?),
        Term::Par(c, e) => eval_by_terms(c, m)?.product(&eval_by_terms(e, m)?),
    }
}

/// Closure under shrinking inputs and growing outputs, in the sort orders.
pub fn check_profunctor(r: &MonotoneRelation, m: &LatticeModel) -> bool {
    let l = m.lattice();
    let down = |s: Sort, x: usize| match s {
        Sort::Right => l.lower_covers(x),
        Sort::Left => l.upper_covers(x),
    };
    let up = |s: Sort, x: usize| match s {
        Sort::Right => l.upper_covers(x),
        Sort::Left => l.lower_covers(x),
    };
    for (x, y) in r.pairs() {
        for (k, s) in r.dom().sorts().iter().enumerate() {
            for v in down(*s, x[k]) {
                let mut x2 = x.clone();
                x2[k] = v;
                if !r.holds(&x2, &y) {
                    return false;
                }
            }
        }
        for (k, s) in r.cod().sorts().iter().enumerate() {
            for v in up(*s, y[k]) {
                let mut y2 = y.clone();
                y2[k] = v;
                if !r.holds(&x, &y2) {
                    return false;
                }
            }
        }
    }
    true
}

/// A concrete inequation or equation between two diagrams.
#[derive(Clone, Debug)]
pub struct AxiomInstance {
    pub name: String,
    pub lhs: Diagram,
    pub rhs: Diagram,
    pub relation: Relation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub forward_holds: bool,
    pub backward_holds: bool,
    /// A pair in one side's relation missing from the other's.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

impl AxiomCheck {
    /// Whether the instance holds in the stated direction(s).
    pub fn passes(&self, relation: Relation) -> bool {
        self.forward_holds && (relation == Relation::Leq || self.backward_holds)
    }
}

pub fn check_axiom(a: &AxiomInstance, m: &LatticeModel) -> Result<AxiomCheck, InterpError> {
    let l = eval(&a.lhs, m)?;
    let r = eval(&a.rhs, m)?;
    let fwd = l.inclusion_witness(&r);
    let bwd = r.inclusion_witness(&l);
    let forward_holds = fwd.is_none();
    let backward_holds = bwd.is_none();
    let witness = fwd.or(if a.relation == Relation::Eq { bwd } else { None });
    Ok(AxiomCheck {
        forward_holds,
        backward_holds,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use super::*;
    use crate::lattice::{standard_models, FiniteLattice};
    use crate::regex::Alphabet;
    use crate::text::parse;

    fn model(l: FiniteLattice) -> LatticeModel {
        LatticeModel::new(Arc::new(l), BTreeMap::new())
    }

    fn ab() -> Alphabet {
        Alphabet::new(vec!['a', 'b']).unwrap()
    }

    #[test]
    fn cost_counts_elimination_tables() {
        assert_eq!(eval_cost(&parse("(letter a)").unwrap(), 3), 9);
        // eliminate one copy output (4 variables), then the other (3), then
        // project onto the boundary (2)
        let d = parse("(seq copy merge)").unwrap();
        assert_eq!(eval_cost(&d, 3), 81 + 27 + 9);
    }

    #[test]
    fn identity_is_the_order() {
        let m = model(FiniteLattice::chain(2));
        let r = eval(&parse("(id r)").unwrap(), &m).unwrap();
        let pairs: Vec<_> = r.pairs().collect();
        assert_eq!(
            pairs,
            vec![(vec![0], vec![0]), (vec![0], vec![1]), (vec![1], vec![1])]
        );
    }

    #[test]
    fn wunit_relates_only_top() {
        for m in standard_models(&ab()) {
            let r = eval(&parse("wunit").unwrap(), &m).unwrap();
            let top = m.lattice().top();
            let pairs: Vec<_> = r.pairs().collect();
            assert_eq!(pairs, vec![(vec![], vec![top])]);
        }
    }

    #[test]
    fn word_action_is_composite_of_letter_actions() {
        let d = parse("(seq (letter a) (letter a))").unwrap();
        for m in standard_models(&ab()) {
            let f = m.action('a').unwrap();
            let l = m.lattice();
            let r = eval(&d, &m).unwrap();
            for x in 0..l.size() {
                for y in 0..l.size() {
                    assert_eq!(r.holds(&[x], &[y]), l.leq(f[f[x]], y));
                }
            }
        }
    }

    #[test]
    fn profunctor_closure_examples() {
        let m = model(FiniteLattice::chain(2));
        let full = MonotoneRelation::from_fn(Interface::right(1), Interface::right(1), 2, |_, _| true).unwrap();
        assert!(check_profunctor(&full, &m));
        let single =
            MonotoneRelation::from_fn(Interface::right(1), Interface::right(1), 2, |x, y| x[0] == 1 && y[0] == 0)
                .unwrap();
        assert!(!check_profunctor(&single, &m));
    }

    #[test]
    fn generators_are_profunctors() {
        use Generator::*;
        let gens = [
            Copy, Discard, Merge, Generate, Cap, Cup, Letter('a'), WMult, WUnit, WComult, WCounit,
        ];
        for m in standard_models(&ab()) {
            for g in gens {
                let r = generator_relation(g, &m).unwrap();
                assert!(check_profunctor(&r, &m), "{g} on {}", m.describe());
            }
        }
    }

    #[test]
    fn both_routes_agree_on_small_terms() {
        let terms = [
            "(seq copy merge)",
            "(seq (par (id r) cup) (par cap (id r)))",
            "(seq (par (id l) (id r)) (sym l r))",
            "(seq copy (seq (par (letter a) (letter b)) wmult))",
            "(par generate (seq wcomult wmult))",
        ];
        for m in standard_models(&ab()).iter().step_by(7) {
            for t in terms {
                let d = parse(t).unwrap();
                assert_eq!(eval(&d, m).unwrap(), eval_by_terms(&d, m).unwrap(), "{t}");
            }
        }
    }

    #[test]
    fn unknown_letter() {
        let m = model(FiniteLattice::chain(2));
        assert_eq!(
            eval(&Diagram::letter('z'), &m).unwrap_err(),
            InterpError::UnknownLetter('z')
        );
    }

    #[test]
    fn reversed_f2_fails_with_witness() {
        let m = model(FiniteLattice::chain(2));
        let a = AxiomInstance {
            name: "F2-reversed".into(),
            lhs: parse("(seq discard generate)").unwrap(),
            rhs: parse("(id r)").unwrap(),
            relation: Relation::Leq,
        };
        let c = check_axiom(&a, &m).unwrap();
        assert!(!c.forward_holds);
        assert_eq!(c.witness, Some((vec![1], vec![0])));
    }

    #[test]
    fn converse_swaps() {
        let m = model(FiniteLattice::chain(3));
        let r = eval(&parse("copy").unwrap(), &m).unwrap();
        let c = r.converse();
        assert_eq!(c.dom(), &Interface::right(2));
        assert!(c.holds(&[2, 1], &[0]));
        assert!(!c.holds(&[2, 1], &[2]));
    }
}
