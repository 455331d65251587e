//! Semantic checks of the derived rules used by determinisation and
//! minimisation, on enumerated small instances over finite lattice models.
//!
//! Every statement is an (in)equation between two diagrams, checked by
//! evaluating both sides. Instances without letters are evaluated once per
//! lattice, since the letter actions cannot affect them.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::diagram::{Diagram, Generator, Sort};
use crate::encode::{copy_tree, matrix_to_diagram, merge_tree, star, FiniteLanguage, LangMatrix};
use crate::interp::{check_axiom, eval_cost, AxiomInstance, Relation};
use crate::lattice::LatticeModel;
use crate::portgraph::permutation;
use crate::regex::parse_regex;

/// Names of the checked statements, in report order.
pub const DERIVED_LEMMAS: [&str; 10] = [
    "wb-adjunction",
    "bw-adjunction",
    "bb-adjunction",
    "right-adjoint",
    "left-adjoint",
    "powerset-construction",
    "sliding",
    "bisimulation",
    "global-distributivity",
    "coefficients",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaFailure {
    pub instance: String,
    pub model: String,
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub lemma: &'static str,
    pub instances: usize,
    /// Number of (instance, model) evaluations.
    pub checks: usize,
    /// (instance, model) pairs over [`LEMMA_BUDGET`].
    pub skipped: usize,
    /// Instances that fit on no model.
    pub unchecked: Vec<String>,
    pub failures: Vec<LemmaFailure>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.unchecked.is_empty()
    }
}

fn inst(name: String, lhs: Diagram, rel: Relation, rhs: Diagram) -> AxiomInstance {
    debug_assert!(lhs.same_type(&rhs), "{name}");
    AxiomInstance {
        name,
        lhs,
        rhs,
        relation: rel,
    }
}

fn id(n: usize) -> Diagram {
    Diagram::id_right(n)
}

/// All Boolean `rows × cols` matrices.
fn relations(rows: usize, cols: usize) -> Vec<LangMatrix> {
    let cells = rows * cols;
    (0..1u32 << cells)
        .map(|mask| LangMatrix::boolean(rows, cols, |r, c| mask >> (r * cols + c) & 1 == 1))
        .collect()
}

/// Relations used for the adjunction statements: every shape up to 2×3 and
/// 3×2 in full, and the 3×3 relations whose rows are distinct.
fn small_relations() -> Vec<LangMatrix> {
    let mut out = Vec::new();
    for rows in 0..=3 {
        for cols in 0..=3 {
            if rows * cols <= 6 {
                out.extend(relations(rows, cols));
            }
        }
    }
    out.extend(relations(3, 3).into_iter().filter(|m| {
        let rows: BTreeSet<Vec<bool>> = (0..3).map(|r| (0..3).map(|c| m.has_epsilon(r, c)).collect()).collect();
        rows.len() == 3
    }));
    out
}

/// `R = b ; c` with `b` built from copy/discard (and a permutation) and `c`
/// from merge/generate.
pub fn factor_relation(r: &LangMatrix) -> (Diagram, Diagram) {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..r.cols() {
        for j in 0..r.rows() {
            if r.has_epsilon(j, i) {
                edges.push((i, j));
            }
        }
    }
    let out_deg = |i| edges.iter().filter(|e| e.0 == i).count();
    let in_deg = |j| edges.iter().filter(|e| e.1 == j).count();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|k| (edges[*k].1, edges[*k].0));
    let copies = Diagram::par_all((0..r.cols()).map(|i| copy_tree(out_deg(i))));
    let b = copies.then(&permutation(&vec![Sort::Right; edges.len()], &order));
    let c = Diagram::par_all((0..r.rows()).map(|j| merge_tree(in_deg(j))));
    (b, c)
}

fn describe(m: &LangMatrix) -> String {
    m.to_string().split_whitespace().collect::<Vec<_>>().join(" ")
}

fn adjunction_instances() -> [Vec<AxiomInstance>; 5] {
    let mut out: [Vec<AxiomInstance>; 5] = Default::default();
    for r in small_relations() {
        let (b, c) = factor_relation(&r);
        let label = describe(&r);
        let (m, n) = (r.cols(), r.rows());
        let rr = b.then(&c);
        let bo = b.colour_transpose();
        out[0].push(inst(format!("{label} (i)"), id(b.cod().len()), Relation::Leq, bo.then(&b)));
        out[0].push(inst(format!("{label} (ii)"), b.then(&bo), Relation::Leq, id(m)));
        let w = c.colour_transpose();
        let wo = w.colour_transpose();
        out[1].push(inst(format!("{label} (i)"), id(w.cod().len()), Relation::Leq, wo.then(&w)));
        out[1].push(inst(format!("{label} (ii)"), w.then(&wo), Relation::Leq, id(n)));
        let bt = b.transpose();
        out[2].push(inst(format!("{label} (i)"), id(m), Relation::Leq, b.then(&bt)));
        out[2].push(inst(format!("{label} (ii)"), bt.then(&b), Relation::Leq, id(b.cod().len())));
        let co_wb = c.colour_transpose().then(&bt);
        out[3].push(inst(format!("{label} (i)"), id(m), Relation::Leq, rr.then(&co_wb)));
        out[3].push(inst(format!("{label} (ii)"), co_wb.then(&rr), Relation::Leq, id(n)));
        let co_bw = c.transpose().then(&bo);
        out[4].push(inst(format!("{label} (i)"), id(n), Relation::Leq, co_bw.then(&rr)));
        out[4].push(inst(format!("{label} (ii)"), rr.then(&co_bw), Relation::Leq, id(m)));
    }
    out
}

fn letter_sets() -> [FiniteLanguage; 4] {
    [
        FiniteLanguage::zero(),
        FiniteLanguage::letter('a'),
        FiniteLanguage::letter('b'),
        FiniteLanguage::from_words([vec!['a'], vec!['b']]),
    ]
}

/// ε-free `s × s` transition matrices over `{a, b}`: all of them for
/// `s = 1`, and for `s = 2` those whose entries are single letters or empty.
fn transition_matrices() -> Vec<LangMatrix> {
    let sets = letter_sets();
    let mut out: Vec<LangMatrix> = sets
        .iter()
        .map(|l| {
            let mut m = LangMatrix::zero(1, 1);
            m.set(0, 0, l.clone());
            m
        })
        .collect();
    for code in 0..81u32 {
        let mut m = LangMatrix::zero(2, 2);
        let mut k = code;
        for cell in 0..4 {
            m.set(cell / 2, cell % 2, sets[(k % 3) as usize].clone());
            k /= 3;
        }
        out.push(m);
    }
    out
}

/// Subsets as bit masks, in mask order.
fn succ_mask(d: &LangMatrix, set: usize, c: char) -> usize {
    (0..d.rows())
        .filter(|t| (0..d.cols()).any(|s| set >> s & 1 == 1 && d.get(*t, s).contains(&[c])))
        .fold(0, |acc, t| acc | 1 << t)
}

/// The powerset transition matrix over all `2^s` subsets.
fn powerset_transitions(d: &LangMatrix, letters: &[char]) -> LangMatrix {
    let n = 1 << d.rows();
    let mut out = LangMatrix::zero(n, n);
    for set in 0..n {
        for c in letters {
            out.get_mut(succ_mask(d, set, *c), set).insert(vec![*c]);
        }
    }
    out
}

fn membership(s: usize) -> LangMatrix {
    LangMatrix::boolean(s, 1 << s, |i, m| m >> i & 1 == 1)
}

fn mat(m: &LangMatrix) -> Diagram {
    matrix_to_diagram(m).expect("single-letter entries")
}

fn powerset_instances() -> (Vec<AxiomInstance>, Vec<AxiomInstance>) {
    let letters = ['a', 'b'];
    let mut ps = Vec::new();
    let mut bisim = Vec::new();
    for d in transition_matrices() {
        let s = d.rows();
        let p = membership(s);
        let d_hat = powerset_transitions(&d, &letters);
        let label = describe(&d);
        ps.push(inst(
            format!("{label} (i)"),
            mat(&d_hat).then(&mat(&p)),
            Relation::Eq,
            mat(&p).then(&mat(&d)),
        ));
        bisim.push(inst(
            label,
            star(&mat(&d_hat)).then(&mat(&p)),
            Relation::Eq,
            mat(&p).then(&star(&mat(&d))),
        ));
    }
    for s in 1..=2usize {
        let p = membership(s);
        for init in 0..1usize << s {
            let e = LangMatrix::boolean(s, 1, |i, _| init >> i & 1 == 1);
            let e_hat = LangMatrix::boolean(1 << s, 1, |m, _| m == init);
            ps.push(inst(
                format!("e = {} (ii)", describe(&e)),
                mat(&e),
                Relation::Eq,
                mat(&e_hat).then(&mat(&p)),
            ));
        }
        for fin in 0..1usize << s {
            let f = LangMatrix::boolean(1, s, |_, i| fin >> i & 1 == 1);
            let f_hat = LangMatrix::boolean(1, 1 << s, |_, m| m & fin != 0);
            ps.push(inst(
                format!("f = {} (iii)", describe(&f)),
                mat(&f_hat),
                Relation::Eq,
                mat(&p).then(&mat(&f)),
            ));
        }
    }
    (ps, bisim)
}

fn sliding_instances() -> Vec<AxiomInstance> {
    let sets = letter_sets();
    let mut out = Vec::new();
    let mut push = |x: LangMatrix, y: LangMatrix| {
        let (xd, yd) = (mat(&x), mat(&y));
        out.push(inst(
            format!("x = {}, y = {}", describe(&x), describe(&y)),
            star(&xd.then(&yd)).then(&xd),
            Relation::Eq,
            xd.then(&star(&yd.then(&xd))),
        ));
    };
    for a in &sets {
        for b in &sets {
            let mut x = LangMatrix::zero(1, 1);
            x.set(0, 0, a.clone());
            let mut y = LangMatrix::zero(1, 1);
            y.set(0, 0, b.clone());
            push(x, y);
        }
    }
    // x : ▶ → ▶², y : ▶² → ▶
    for a in &sets {
        for b in &sets {
            let mut x = LangMatrix::zero(2, 1);
            x.set(0, 0, a.clone());
            x.set(1, 0, FiniteLanguage::letter('a'));
            let mut y = LangMatrix::zero(1, 2);
            y.set(0, 0, FiniteLanguage::letter('b'));
            y.set(0, 1, b.clone());
            push(x, y);
        }
    }
    out
}

/// `▶^k → ▶^{2k}`, two copies of the inputs side by side.
fn copies(k: usize) -> Diagram {
    let raw = Diagram::par_all((0..k).map(|_| Diagram::gen(Generator::Copy)));
    let unzip: Vec<usize> = (0..k).map(|i| 2 * i).chain((0..k).map(|i| 2 * i + 1)).collect();
    raw.then(&permutation(&vec![Sort::Right; 2 * k], &unzip))
}

/// `▶^{2k} → ▶^k`, joining input `i` with input `k + i`.
fn merges(k: usize) -> Diagram {
    let zip: Vec<usize> = (0..k).flat_map(|i| [i, k + i]).collect();
    permutation(&vec![Sort::Right; 2 * k], &zip).then(&Diagram::par_all((0..k).map(|_| Diagram::gen(Generator::Merge))))
}

fn gens(g: Generator, k: usize) -> Diagram {
    Diagram::par_all((0..k).map(|_| Diagram::gen(g)))
}

/// Automaton-diagrams of several shapes, with a printable label.
fn automaton_diagrams() -> Vec<(String, Diagram)> {
    let re = |s: &str| parse_regex(s).expect("valid").to_diagram();
    let mut out: Vec<(String, Diagram)> = ["0", "1", "a", "a*", "ab+b", "(a+b)*a", "(ab)*a"]
        .iter()
        .map(|s| (s.to_string(), re(s)))
        .collect();
    let mut m = LangMatrix::zero(2, 2);
    m.set(1, 0, FiniteLanguage::letter('a'));
    m.set(0, 1, FiniteLanguage::letter('b'));
    m.set(1, 1, FiniteLanguage::letter('a'));
    let sq = star(&mat(&m));
    out.push((format!("star {}", describe(&m)), sq.clone()));
    let split = Diagram::gen(Generator::Copy).then(&re("a*").beside(&re("b")));
    out.push(("copy ; (a* ⊕ b)".into(), split.clone()));
    out.push(("copy ; (a* ⊕ b) ; star".into(), split.then(&sq)));
    out.push(("star ; merge".into(), sq.then(&Diagram::gen(Generator::Merge))));
    out
}

fn distributivity_instances() -> Vec<AxiomInstance> {
    let mut out = Vec::new();
    for (label, d) in automaton_diagrams() {
        let (m, n) = (d.dom().len(), d.cod().len());
        let eq = |tag: &str, l: Diagram, r: Diagram| inst(format!("{label} {tag}"), l, Relation::Eq, r);
        out.push(eq("copy", d.then(&copies(n)), copies(m).then(&d.beside(&d))));
        out.push(eq("discard", d.then(&gens(Generator::Discard, n)), gens(Generator::Discard, m)));
        out.push(eq("merge", merges(m).then(&d), d.beside(&d).then(&merges(n))));
        out.push(eq("generate", gens(Generator::Generate, m).then(&d), gens(Generator::Generate, n)));
    }
    out
}

/// The sum of a diagram's coefficients, reassembled through copy and
/// merge, equals the diagram: `d = Σ_ij in_i ; d_ij ; out_j`.
fn coefficient_instances() -> Vec<AxiomInstance> {
    let mut out = Vec::new();
    for (label, d) in automaton_diagrams() {
        let (m, n) = (d.dom().len(), d.cod().len());
        // input i is copied n times, coefficient (i, j) runs to output j
        let fan = Diagram::par_all((0..m).map(|_| copy_tree(n)));
        let mut order: Vec<usize> = (0..m * n).collect();
        order.sort_by_key(|k| (k % n, k / n));
        let mid = Diagram::par_all(
            order
                .iter()
                .map(|k| super::procedures::coefficient(&d, k / n, k % n).expect("in range")),
        );
        let join = Diagram::par_all((0..n).map(|_| merge_tree(m)));
        let rebuilt = Diagram::seq_all([fan, permutation(&vec![Sort::Right; m * n], &order), mid, join]);
        out.push(inst(label, d, Relation::Eq, rebuilt));
    }
    out
}

/// All statements with their instances, in [`DERIVED_LEMMAS`] order.
pub fn derived_lemma_instances() -> Vec<(&'static str, Vec<AxiomInstance>)> {
    let [wb, bw, bb, right, left] = adjunction_instances();
    let (ps, bisim) = powerset_instances();
    let lists = [
        wb,
        bw,
        bb,
        right,
        left,
        ps,
        sliding_instances(),
        bisim,
        distributivity_instances(),
        coefficient_instances(),
    ];
    DERIVED_LEMMAS.iter().copied().zip(lists).collect()
}

/// Check every instance on the given models.
pub fn check_derived_lemmas(models: &[LatticeModel]) -> Vec<LemmaReport> {
    derived_lemma_instances()
        .into_iter()
        .map(|(lemma, instances)| check_lemma(lemma, &instances, models))
        .collect()
}

/// Evaluation budget per check, in the units of [`eval_cost`]. Wide
/// instances are checked on the smaller lattices only.
pub const LEMMA_BUDGET: u128 = 1 << 20;

fn fits(a: &AxiomInstance, n: usize) -> bool {
    eval_cost(&a.lhs, n).saturating_add(eval_cost(&a.rhs, n)) <= LEMMA_BUDGET
}

/// Check one statement. Letter-free instances use one model per distinct
/// lattice; every instance must fit on at least one model.
pub fn check_lemma(lemma: &'static str, instances: &[AxiomInstance], models: &[LatticeModel]) -> LemmaReport {
    let mut per_lattice: Vec<&LatticeModel> = Vec::new();
    for m in models {
        if !per_lattice.iter().any(|p| p.lattice() == m.lattice()) {
            per_lattice.push(m);
        }
    }
    let mut skipped = 0;
    let mut unchecked = Vec::new();
    let mut jobs: Vec<(&AxiomInstance, &LatticeModel)> = Vec::new();
    for a in instances {
        let lettered = !a.lhs.letters().is_empty() || !a.rhs.letters().is_empty();
        let pool: Vec<&LatticeModel> = if lettered { models.iter().collect() } else { per_lattice.clone() };
        let before = jobs.len();
        for m in &pool {
            if fits(a, m.lattice().size()) {
                jobs.push((a, m));
            } else {
                skipped += 1;
            }
        }
        if jobs.len() == before {
            unchecked.push(a.name.clone());
        }
    }
    let failures: Vec<LemmaFailure> = jobs
        .par_iter()
        .filter_map(|(a, m)| {
            let fail = |witness| LemmaFailure {
                instance: a.name.clone(),
                model: m.describe(),
                witness,
            };
            match check_axiom(a, m) {
                Ok(r) if r.passes(a.relation) => None,
                Ok(r) => Some(fail(r.witness)),
                Err(_) => Some(fail(None)),
            }
        })
        .collect();
    LemmaReport {
        lemma,
        instances: instances.len(),
        checks: jobs.len(),
        skipped,
        unchecked,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::matrix_of;
    use crate::lattice::{FiniteLattice, LatticeModel};
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn small_models() -> Vec<LatticeModel> {
        let l = Arc::new(FiniteLattice::chain(3));
        let mut acts = BTreeMap::new();
        acts.insert('a', vec![0, 1, 2]);
        acts.insert('b', vec![0, 2, 2]);
        vec![LatticeModel::new(l, acts)]
    }

    #[test]
    fn factorisation_recovers_the_relation() {
        for r in small_relations().into_iter().take(200) {
            let (b, c) = factor_relation(&r);
            assert!(b.generators().iter().all(|g| matches!(g, Generator::Copy | Generator::Discard)));
            assert!(c.generators().iter().all(|g| matches!(g, Generator::Merge | Generator::Generate)));
            assert_eq!(matrix_of(&b.then(&c)).unwrap(), r);
        }
    }

    #[test]
    fn powerset_premise_holds_as_matrices() {
        for d in transition_matrices() {
            let p = membership(d.rows());
            let d_hat = powerset_transitions(&d, &['a', 'b']);
            assert_eq!(d_hat.compose(&p), p.compose(&d));
        }
    }

    #[test]
    fn instance_lists_are_well_typed_and_named() {
        let all = derived_lemma_instances();
        assert_eq!(all.len(), DERIVED_LEMMAS.len());
        for (name, list) in &all {
            assert!(!list.is_empty(), "{name}");
            for a in list {
                assert!(a.lhs.same_type(&a.rhs), "{name}: {}", a.name);
            }
        }
    }

    #[test]
    fn sliding_and_coefficients_hold_on_a_chain() {
        let models = small_models();
        let r = check_lemma("sliding", &sliding_instances(), &models);
        assert!(r.passed(), "{r:?}");
        let r = check_lemma("coefficients", &coefficient_instances(), &models);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn zero_transitions_make_bisimulation_trivial() {
        let (_, bisim) = powerset_instances();
        let zero: Vec<AxiomInstance> = bisim.into_iter().take(1).collect();
        assert!(check_lemma("bisimulation", &zero, &small_models()).passed());
    }
}
