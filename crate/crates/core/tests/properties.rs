//! Property tests for the structural invariants. Random inputs come from the
//! seeded corpus generators; proptest supplies the seeds.

use proptest::prelude::*;

use kda::automata::{
    hopcroft, language_equiv, minimise, parse_nfa, print_nfa, reverse, subset_construction, thompson, Method,
};
use kda::corpus::{random_automaton_diagram, random_matrix_diagram, random_regex, random_representation, rng};
use kda::encode::{
    matrix_of, matrix_of_terms, matrix_to_diagram, nfa_to_diagram, representation_of, representation_to_nfa,
    FiniteLanguage, LangMatrix,
};
use kda::interp::{check_profunctor, eval, eval_cost};
use kda::lattice::{standard_models, LatticeModel};
use kda::regex::{parse_regex, Alphabet};
use kda::rewrite::{minimise_diagram, prove_equal, Certificate, Verdict};
use kda::text::{parse, print};
use kda::{graph_eq, Diagram, Generator, Interface, Sort};

fn ab() -> Alphabet {
    Alphabet::parse("a b").unwrap()
}

/// One model per standard lattice (identity actions where available), to keep
/// the per-case cost small; the acceptance suite sweeps all of them.
fn few_models() -> Vec<LatticeModel> {
    let mut out: Vec<LatticeModel> = Vec::new();
    for m in standard_models(&ab()) {
        if !out.iter().any(|o| o.lattice() == m.lattice()) {
            out.push(m);
        }
    }
    out
}

/// Tuple visits allowed per semantic comparison; wider normal forms are
/// compared by matrix only.
const EVAL_BUDGET: u128 = 1 << 20;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn automaton(seed: u64) -> Diagram {
    random_automaton_diagram(&mut rng(seed), 6, &ab())
}

/// A diagram with white generators and ◀ wires, from a black ▶ one.
fn mixed(seed: u64) -> Diagram {
    let d = automaton(seed);
    match seed % 4 {
        0 => d,
        1 => d.colour_transpose(),
        2 => d.transpose(),
        _ => d.transpose().colour_transpose().beside(&Diagram::id(Sort::Right)),
    }
}

fn id(i: &Interface) -> Diagram {
    Diagram::ids(i)
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn monoidal_laws_hold_in_the_graph(x in any::<u64>(), y in any::<u64>(), z in any::<u64>()) {
        let (a, b, c) = (mixed(x), mixed(y), mixed(z));
        // associativity and units of ⊗
        prop_assert!(graph_eq(&a.beside(&b.beside(&c)), &a.beside(&b).beside(&c)).unwrap());
        prop_assert!(graph_eq(&Diagram::empty().beside(&a), &a).unwrap());
        // units of ;
        prop_assert!(graph_eq(&id(a.dom()).then(&a).then(&id(a.cod())), &a).unwrap());
        // interchange
        let (p, q) = (id(a.cod()), id(b.cod()));
        prop_assert!(graph_eq(&a.beside(&b).then(&p.beside(&q)), &a.then(&p).beside(&b.then(&q))).unwrap());
        // naturality of the symmetry on single wires
        let s = |d: &Diagram| d.dom().sorts()[0];
        if a.dom().len() == 1 && a.cod().len() == 1 && b.dom().len() == 1 && b.cod().len() == 1 {
            let lhs = a.beside(&b).then(&Diagram::sym(a.cod().sorts()[0], b.cod().sorts()[0]));
            let rhs = Diagram::sym(s(&a), s(&b)).then(&b.beside(&a));
            prop_assert!(graph_eq(&lhs, &rhs).unwrap());
        }
    }

    #[test]
    fn graph_equality_is_a_congruence(x in any::<u64>(), y in any::<u64>()) {
        let (a, b) = (automaton(x), automaton(y));
        let a2 = id(a.dom()).then(&a);
        prop_assert!(graph_eq(&a, &a2).unwrap());
        prop_assert!(graph_eq(&a.beside(&b), &a2.beside(&b)).unwrap());
        if a.cod() == b.dom() {
            prop_assert!(graph_eq(&a.then(&b), &a2.then(&b)).unwrap());
        }
        let tail = Diagram::ids(a.cod()).beside(&Diagram::ids(b.cod()).transpose().transpose());
        prop_assert!(graph_eq(&a.beside(&b).then(&tail), &a2.beside(&b)).unwrap());
    }

    #[test]
    fn transposes_are_involutions(x in any::<u64>()) {
        let d = mixed(x);
        let t = d.transpose();
        prop_assert_eq!(t.dom().len(), d.cod().len());
        prop_assert_eq!(t.cod().len(), d.dom().len());
        prop_assert!(graph_eq(&t.transpose(), &d).unwrap());
        let c = d.colour_transpose();
        prop_assert_eq!(c.dom().len(), d.cod().len());
        prop_assert!(graph_eq(&c.colour_transpose(), &d).unwrap());
    }

    #[test]
    fn printed_diagrams_reparse(x in any::<u64>()) {
        let d = mixed(x);
        let back = parse(&print(&d)).unwrap();
        prop_assert!(graph_eq(&back, &d).unwrap());
    }

    #[test]
    fn evaluations_are_profunctors_and_respect_graph_equality(x in any::<u64>()) {
        let d = mixed(x);
        let d2 = id(d.dom()).then(&d.then(&id(d.cod())));
        for m in few_models() {
            let r = eval(&d, &m).unwrap();
            prop_assert!(check_profunctor(&r, &m));
            prop_assert_eq!(eval(&d2, &m).unwrap(), r);
        }
    }

    #[test]
    fn regex_diagrams_are_automata_with_the_right_language(x in any::<u64>()) {
        let e = random_regex(&mut rng(x), 5, &ab());
        let d = e.to_diagram();
        prop_assert!(d.classify().is_automaton_diagram);
        let rep = representation_of(&d, &ab()).unwrap();
        prop_assert!(language_equiv(&representation_to_nfa(&rep), &thompson(&e, &ab())).unwrap());
        prop_assert_eq!(parse_regex(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn classical_minimisation_laws(x in any::<u64>()) {
        let rep = random_representation(&mut rng(x), 5, &ab(), 0.3);
        let n = representation_to_nfa(&rep);
        let m = minimise(&n, Method::Hopcroft);
        prop_assert!(minimise(&m.to_nfa(), Method::Hopcroft).is_isomorphic(&m));
        prop_assert!(minimise(&n, Method::Brzozowski).is_isomorphic(&m));
        prop_assert!(language_equiv(&n, &reverse(&reverse(&n))).unwrap());
        let free = kda::automata::epsilon_elimination(&n);
        prop_assert_eq!(subset_construction(&free, true).unwrap().states(), 1 << free.states);
        prop_assert!(hopcroft(&m).is_isomorphic(&m));
        prop_assert!(parse_nfa(&print_nfa(&n)).unwrap() == n);
    }

    #[test]
    fn nfa_diagram_round_trip(x in any::<u64>()) {
        let rep = random_representation(&mut rng(x), 6, &ab(), 0.3);
        let n = representation_to_nfa(&rep);
        let back = representation_of(&nfa_to_diagram(&n), &ab()).unwrap();
        prop_assert!(language_equiv(&representation_to_nfa(&back), &n).unwrap());
    }

    #[test]
    fn matrix_round_trips(x in any::<u64>(), rows in 0usize..4, cols in 0usize..4) {
        let mut r = rng(x);
        let mut m = LangMatrix::zero(rows, cols);
        let pool = [vec![], vec!['a'], vec!['b']];
        for i in 0..rows {
            for j in 0..cols {
                let words = pool.iter().enumerate().filter(|(k, _)| (x >> ((i * cols + j) * 3 + k)) & 1 == 1);
                m.set(i, j, FiniteLanguage::from_words(words.map(|(_, w)| w.clone())));
            }
        }
        prop_assert_eq!(matrix_of(&matrix_to_diagram(&m).unwrap()).unwrap(), m);
        let d = random_matrix_diagram(&mut r, &ab()).diagram();
        let nf = matrix_to_diagram(&matrix_of(&d).unwrap()).unwrap();
        prop_assert_eq!(matrix_of_terms(&d).unwrap(), matrix_of(&d).unwrap());
        for model in few_models() {
            let n = model.lattice().size();
            if eval_cost(&nf, n) + eval_cost(&d, n) <= EVAL_BUDGET {
                prop_assert_eq!(eval(&nf, &model).unwrap(), eval(&d, &model).unwrap());
            }
        }
    }

    #[test]
    fn matrix_diagrams_distribute_over_black_structure(x in any::<u64>()) {
        // a 1 → 1 matrix-diagram commutes with copy, discard, merge, generate
        let mut r = rng(x);
        let m = loop {
            let d = random_matrix_diagram(&mut r, &ab()).diagram();
            let m = matrix_of(&d).unwrap();
            if m.rows() >= 1 && m.cols() >= 1 {
                break m.block(0..1, 0..1);
            }
        };
        let d = matrix_to_diagram(&m).unwrap();
        let g = |x| Diagram::gen(x);
        let pairs = [
            (d.then(&g(Generator::Copy)), g(Generator::Copy).then(&d.beside(&d))),
            (d.then(&g(Generator::Discard)), g(Generator::Discard)),
            (g(Generator::Merge).then(&d), d.beside(&d).then(&g(Generator::Merge))),
            (g(Generator::Generate).then(&d), g(Generator::Generate)),
        ];
        for model in few_models() {
            for (l, r) in &pairs {
                prop_assert_eq!(eval(l, &model).unwrap(), eval(r, &model).unwrap());
            }
        }
    }

    #[test]
    fn trace_form_preserves_semantics(x in any::<u64>()) {
        let d = automaton(x);
        let tf = kda::encode::trace_canonical_form(&d).unwrap();
        for m in few_models() {
            prop_assert_eq!(eval(&tf.assemble(), &m).unwrap(), eval(&d, &m).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn derivations_are_sound_and_replay(x in any::<u64>()) {
        let e = random_regex(&mut rng(x), 3, &ab());
        let red = minimise_diagram(&e.to_diagram(), &ab()).unwrap();
        prop_assert!(red.derivation.replay().is_ok());
        let small: Vec<LatticeModel> = few_models().into_iter().filter(|m| m.lattice().size() <= 3).collect();
        for m in &small {
            prop_assert_eq!(eval(&red.derivation.start, m).unwrap(), eval(&red.derivation.end, m).unwrap());
        }
    }

    #[test]
    fn certificates_survive_printing(x in any::<u64>()) {
        let mut r = rng(x);
        let e = random_regex(&mut r, 3, &ab());
        let f = random_regex(&mut r, 3, &ab());
        for (c, d) in [(&e, &e), (&e, &f)] {
            if let Verdict::Proved(cert) = prove_equal(&c.to_diagram(), &d.to_diagram(), &ab()).unwrap() {
                let back = Certificate::parse(&cert.to_string()).unwrap();
                prop_assert!(back.replay().is_ok());
                prop_assert_eq!(back.to_string(), cert.to_string());
            }
        }
    }
}
