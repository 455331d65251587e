//! Determinisation, minimisation and decision procedures as derivations.

use std::collections::BTreeSet;

use crate::automata::distinguishing_word;
use crate::diagram::{Diagram, Generator, Sort};
use crate::encode::{representation_to_nfa, submatrix, LangMatrix, Representation};
use crate::interp::Relation;
use crate::portgraph::{diagram_hash, graph_eq, Match, PortGraph, Source};
use crate::regex::Alphabet;

use super::cert::{Certificate, Chain, ChainDir, Derivation};
use super::rules::{representation_from_diagram, Direction, Location, Mode, RewriteError, MAX_POWERSET};

/// A derivation ending in a representation-shaped diagram.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub derivation: Derivation,
    pub result: Representation,
}

fn at(path: &[usize]) -> Location {
    Location::Path(path.to_vec())
}

fn finish(derivation: Derivation) -> Result<Reduction, RewriteError> {
    let result = representation_from_diagram(&derivation.end, derivation.alphabet())
        .ok_or_else(|| RewriteError::Unsupported("derivation did not end in a representation".into()))?;
    Ok(Reduction { derivation, result })
}

fn det_steps(d: &mut Derivation, mode: Mode) -> Result<(), RewriteError> {
    d.step(&format!("det-init:{}", mode.name()), Direction::Forward, at(&[0]))?
        .step("bisimulation", Direction::Forward, at(&[0, 1]))?
        .step("det-final", Direction::Forward, at(&[]))?;
    Ok(())
}

fn codet_steps(d: &mut Derivation, mode: Mode) -> Result<(), RewriteError> {
    d.step(&format!("codet-final:{}", mode.name()), Direction::Forward, at(&[]))?
        .step("co-bisimulation", Direction::Forward, at(&[0, 1]))?
        .step("codet-init", Direction::Forward, at(&[]))?;
    Ok(())
}

/// Subset construction on an ε-free representation, as three rule steps.
pub fn determinise(rep: &Representation, mode: Mode) -> Result<Reduction, RewriteError> {
    rep.check_epsilon_free()?;
    let mut d = Derivation::new(rep.to_diagram(), rep.alphabet.clone());
    det_steps(&mut d, mode)?;
    finish(d)
}

/// Subset construction on the reversed automaton, as three rule steps.
pub fn codeterminise(rep: &Representation, mode: Mode) -> Result<Reduction, RewriteError> {
    rep.check_epsilon_free()?;
    let mut d = Derivation::new(rep.to_diagram(), rep.alphabet.clone());
    codet_steps(&mut d, mode)?;
    finish(d)
}

/// Codeterminise, determinise (reachable subsets both times) and rename:
/// the result is the minimal complete DFA with states numbered breadth-first.
pub fn minimise_representation(rep: &Representation) -> Result<Reduction, RewriteError> {
    rep.check_epsilon_free()?;
    let mut d = Derivation::new(rep.to_diagram(), rep.alphabet.clone());
    codet_steps(&mut d, Mode::Reach)?;
    det_steps(&mut d, Mode::Reach)?;
    d.step("rename", Direction::Forward, at(&[]))?;
    finish(d)
}

fn check_unary(d: &Diagram) -> Result<(), RewriteError> {
    let one = crate::diagram::Interface::right(1);
    if *d.dom() != one || *d.cod() != one {
        return Err(RewriteError::Unsupported(format!(
            "expected a diagram ▶ → ▶, found {} → {}",
            d.dom(),
            d.cod()
        )));
    }
    Ok(())
}

fn full_alphabet(alphabet: &Alphabet, ds: &[&Diagram]) -> Alphabet {
    let letters: BTreeSet<char> = ds.iter().flat_map(|d| d.letters()).collect();
    alphabet.union(&Alphabet::new(letters).expect("diagram letters are valid"))
}

/// Rewrite a ▶ → ▶ automaton-diagram to its normal form: the minimal
/// complete DFA of its language, as `(E ; d*) ; F`.
pub fn minimise_diagram(d: &Diagram, alphabet: &Alphabet) -> Result<Reduction, RewriteError> {
    check_unary(d)?;
    let sigma = full_alphabet(alphabet, &[d]);
    let mut der = Derivation::new(d.clone(), sigma);
    der.step("trace-form", Direction::Forward, at(&[]))?
        .step("representation", Direction::Forward, at(&[]))?;
    codet_steps(&mut der, Mode::Reach)?;
    det_steps(&mut der, Mode::Reach)?;
    der.step("rename", Direction::Forward, at(&[]))?;
    finish(der)
}

/// The `s × 2^s` relation-diagram whose column `m` selects the states in
/// the bits of `m`.
#[derive(Clone, Debug)]
pub struct PowersetMatrix {
    pub matrix: LangMatrix,
    pub diagram: Diagram,
}

pub fn powerset_matrix(s: usize) -> Result<PowersetMatrix, RewriteError> {
    if s > MAX_POWERSET {
        return Err(RewriteError::TooLarge(s));
    }
    let matrix = LangMatrix::boolean(s, 1 << s, |i, m| m >> i & 1 == 1);
    let diagram = crate::encode::matrix_to_diagram(&matrix)?;
    Ok(PowersetMatrix { matrix, diagram })
}

/// The ▶ → ▶ diagram from left port `i` to right port `j`.
pub fn coefficient(d: &Diagram, i: usize, j: usize) -> Result<Diagram, RewriteError> {
    Ok(submatrix(d, j..j + 1, i..i + 1)?)
}

/// A word in exactly one of two languages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub word: Vec<char>,
    /// Whether the word belongs to the left-hand language.
    pub in_lhs: bool,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Proved(Certificate),
    Refuted(Counterexample),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }
}

fn counterexample(c: &Representation, d: &Representation) -> Counterexample {
    let (n, m) = (representation_to_nfa(c), representation_to_nfa(d));
    let word = distinguishing_word(&n, &m)
        .expect("normal forms share the alphabet")
        .expect("different minimal DFAs have different languages");
    Counterexample {
        in_lhs: n.accepts(&word),
        word,
    }
}

fn fwd(derivation: Derivation) -> Chain {
    Chain {
        dir: ChainDir::Forward,
        derivation,
    }
}

fn rev(derivation: Derivation) -> Chain {
    Chain {
        dir: ChainDir::Reverse,
        derivation,
    }
}

/// Decide equality of two ▶ → ▶ automaton-diagrams. A proof rewrites both
/// sides to one normal form; a refutation gives a separating word.
pub fn prove_equal(c: &Diagram, d: &Diagram, alphabet: &Alphabet) -> Result<Verdict, RewriteError> {
    check_unary(c)?;
    check_unary(d)?;
    let sigma = full_alphabet(alphabet, &[c, d]);
    if graph_eq(c, d).expect("same type") {
        return Ok(Verdict::Proved(Certificate::new(Relation::Eq, c.clone(), d.clone(), sigma, vec![])));
    }
    let nc = minimise_diagram(c, &sigma)?;
    let nd = minimise_diagram(d, &sigma)?;
    if nc.derivation.end_hash() != nd.derivation.end_hash() {
        return Ok(Verdict::Refuted(counterexample(&nc.result, &nd.result)));
    }
    let chains = vec![fwd(nc.derivation), rev(nd.derivation)];
    Ok(Verdict::Proved(Certificate::new(Relation::Eq, c.clone(), d.clone(), sigma, chains)))
}

/// Row and column of a matrix coefficient.
pub type Coefficient = (usize, usize);

/// Equality of two `▶^m → ▶^n` diagrams, one verdict per coefficient
/// `(i, j)` from left port `i` to right port `j`.
pub fn prove_equal_coefficients(
    c: &Diagram,
    d: &Diagram,
    alphabet: &Alphabet,
) -> Result<Vec<(Coefficient, Verdict)>, RewriteError> {
    if !c.same_type(d) {
        return Err(RewriteError::Unsupported("the diagrams have different types".into()));
    }
    let mut out = Vec::new();
    for i in 0..c.dom().len() {
        for j in 0..c.cod().len() {
            out.push(((i, j), prove_equal(&coefficient(c, i, j)?, &coefficient(d, i, j)?, alphabet)?));
        }
    }
    Ok(out)
}

/// Canonical index of each box of `t`, in the order `from_diagram` builds
/// them.
fn canonical_index(t: &Diagram) -> Vec<usize> {
    let order = PortGraph::from_diagram(t).canonical_order();
    let mut inv = vec![0; order.len()];
    for (new, old) in order.iter().enumerate() {
        inv[*old] = new;
    }
    inv
}

fn boxes_at(t: &Diagram, boxes: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let k = canonical_index(t);
    boxes.into_iter().map(|b| k[b]).collect()
}

/// Step to a known intermediate term and check that the rewrite landed on it.
fn step_to(
    der: &mut Derivation,
    rule: &str,
    dir: Direction,
    loc: Location,
    expected: &Diagram,
) -> Result<(), RewriteError> {
    der.step(rule, dir, loc)?;
    if der.end_hash() != diagram_hash(expected) {
        return Err(RewriteError::Unsupported(format!("step {rule} did not reach the expected diagram")));
    }
    Ok(())
}

/// Rewrite `copy ; (d ⊕ c) ; merge` to `c` with one inequality: a discard
/// and generate are inserted on the `d` branch, the generate absorbs `d`,
/// and the unit laws remove what is left.
fn union_to_right(c: &Diagram, d: &Diagram, sigma: &Alphabet) -> Result<Derivation, RewriteError> {
    let g = |x| Diagram::gen(x);
    let (copy, merge, generate, discard) = (
        g(Generator::Copy),
        g(Generator::Merge),
        g(Generator::Generate),
        g(Generator::Discard),
    );
    let id = Diagram::id(Sort::Right);
    let sym = Diagram::sym(Sort::Right, Sort::Right);
    let (nc, nd) = (c.generators().len(), d.generators().len());

    let t0 = copy.then(&d.beside(c)).then(&merge);
    let t1 = copy
        .then(&discard.then(&generate).then(d).beside(c))
        .then(&merge);
    let t2 = copy.then(&discard.then(&generate).beside(c)).then(&merge);
    let t3 = Diagram::seq_all([
        copy.clone(),
        sym,
        discard.beside(c),
        generate.beside(&id),
        merge.clone(),
    ]);
    let t4 = generate.beside(c).then(&merge);
    let t5 = c.beside(&generate).then(&merge);

    let mut der = Derivation::new(t0.clone(), sigma.clone());
    let wire = Match {
        boxes: vec![],
        wires: vec![Source::Out(canonical_index(&t0)[0], 0)],
    };
    step_to(&mut der, "F2", Direction::Forward, Location::Graph(wire), &t1)?;
    let mut region = boxes_at(&t1, (2..3 + nd).collect::<Vec<_>>());
    region.sort_unstable();
    let region = Match {
        boxes: region,
        wires: vec![],
    };
    step_to(&mut der, "co-del", Direction::Forward, Location::Graph(region), &t2)?;
    let graph = |boxes: Vec<usize>| Location::Graph(Match { boxes, wires: vec![] });
    step_to(&mut der, "B3", Direction::Backward, graph(boxes_at(&t2, [0])), &t3)?;
    step_to(&mut der, "B2", Direction::Forward, graph(boxes_at(&t3, [0, 1])), &t4)?;
    step_to(&mut der, "B6", Direction::Backward, graph(boxes_at(&t4, [1 + nc])), &t5)?;
    step_to(&mut der, "B5", Direction::Forward, graph(boxes_at(&t5, [nc, nc + 1])), c)?;
    Ok(der)
}

/// Decide whether the language of `c` is contained in that of `d`. A proof
/// certifies `d ≤ c`: `d` and `copy ; (d ⊕ c) ; merge` share a normal form,
/// and the latter is below `c`.
pub fn prove_leq(c: &Diagram, d: &Diagram, alphabet: &Alphabet) -> Result<Verdict, RewriteError> {
    check_unary(c)?;
    check_unary(d)?;
    let sigma = full_alphabet(alphabet, &[c, d]);
    if graph_eq(c, d).expect("same type") {
        return Ok(Verdict::Proved(Certificate::new(Relation::Leq, d.clone(), c.clone(), sigma, vec![])));
    }
    let union = Diagram::gen(Generator::Copy)
        .then(&d.beside(c))
        .then(&Diagram::gen(Generator::Merge));
    let nd = minimise_diagram(d, &sigma)?;
    let nu = minimise_diagram(&union, &sigma)?;
    if nd.derivation.end_hash() != nu.derivation.end_hash() {
        // the union's language contains d's, so the word is in c only
        let mut w = counterexample(&nu.result, &nd.result);
        w.in_lhs = true;
        return Ok(Verdict::Refuted(w));
    }
    let last = union_to_right(c, d, &sigma)?;
    let chains = vec![fwd(nd.derivation), rev(nu.derivation), fwd(last)];
    Ok(Verdict::Proved(Certificate::new(Relation::Leq, d.clone(), c.clone(), sigma, chains)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{minimise, thompson, Method};
    use crate::encode::representation_to_dfa;
    use crate::regex::parse_regex;

    fn sigma(s: &str) -> Alphabet {
        Alphabet::parse(s).unwrap()
    }

    fn re(s: &str) -> Diagram {
        parse_regex(s).unwrap().to_diagram()
    }

    #[test]
    fn normal_form_is_the_minimal_dfa() {
        let s = sigma("a b");
        for e in ["(a+b)*a", "a*b*", "(ab)*", "0", "1", "(aa)*(1+a)"] {
            let r = minimise_diagram(&re(e), &s).unwrap();
            r.derivation.replay().unwrap();
            let dfa = representation_to_dfa(&r.result).unwrap();
            let oracle = minimise(&thompson(&parse_regex(e).unwrap(), &s), Method::Hopcroft);
            assert_eq!(dfa.states(), oracle.states(), "{e}");
            assert!(dfa.is_isomorphic(&oracle), "{e}");
        }
    }

    #[test]
    fn equal_languages_get_a_certificate() {
        let s = sigma("a b");
        let v = prove_equal(&re("(a+b)*"), &re("(a*b*)*"), &s).unwrap();
        let Verdict::Proved(cert) = v else { panic!("expected a proof") };
        cert.replay().unwrap();
        assert_eq!(cert.claim, Relation::Eq);
    }

    #[test]
    fn different_languages_get_a_word() {
        let v = prove_equal(&re("a*"), &re("(aa)*"), &sigma("a")).unwrap();
        let Verdict::Refuted(w) = v else { panic!("expected a refutation") };
        assert_eq!(w, Counterexample { word: vec!['a'], in_lhs: true });
    }

    #[test]
    fn inclusion_certificates() {
        let s = sigma("a");
        let Verdict::Proved(cert) = prove_leq(&re("(aa)*"), &re("a*"), &s).unwrap() else {
            panic!("(aa)* is included in a*")
        };
        assert_eq!(cert.claim, Relation::Leq);
        cert.replay().unwrap();
        let Verdict::Refuted(w) = prove_leq(&re("a*"), &re("(aa)*"), &s).unwrap() else {
            panic!("a* is not included in (aa)*")
        };
        assert_eq!(w.word, vec!['a']);
    }

    #[test]
    fn powerset_matrix_columns_are_subsets() {
        let p = powerset_matrix(2).unwrap();
        assert_eq!((p.matrix.rows(), p.matrix.cols()), (2, 4));
        assert!(p.matrix.has_epsilon(1, 2) && !p.matrix.has_epsilon(0, 2));
        assert!(matches!(powerset_matrix(9), Err(RewriteError::TooLarge(9))));
    }
}
