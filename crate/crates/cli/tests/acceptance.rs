//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.
//!
//! The oracles here (powerset DFA, partition refinement, wire-level NFA) are
//! written from scratch and share no code with the library routes they check.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::process::Command;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use kda::automata::{
    epsilon_elimination, hopcroft, language_equiv, parse_nfa, subset_construction, thompson, Dfa, Nfa,
};
use kda::corpus::{matrix_diagram_pairs, random_automaton_diagram, random_representation, regex_pairs, rng, DEFAULT_SEED};
use kda::encode::{
    matrix_of_terms, nfa_to_diagram, representation_of, representation_to_dfa, representation_to_nfa,
    trace_canonical_form, Representation,
};
use kda::interp::{check_axiom, eval};
use kda::lattice::standard_models;
use kda::portgraph::{PortGraph, Source, Target};
use kda::regex::{membership, parse_regex, Alphabet};
use kda::rewrite::derived::{check_lemma, derived_lemma_instances};
use kda::rewrite::{
    axiom_catalog, determinise, minimise_diagram, prove_equal, Certificate, Derivation, Direction, Location, Mode,
    Verdict,
};
use kda::{graph_eq, Diagram, Generator, Sort};

// Pinned budgets and corpus sizes.
const AXIOM_BUDGET: Duration = Duration::from_secs(300);
const EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
const REGEX_PAIRS: usize = 200;
const REGEX_DEPTH: usize = 5;
const REGEX_BUDGET: Duration = Duration::from_secs(120);
const REPRESENTATIONS: usize = 100;
const MAX_STATES: usize = 6;
const MATRIX_PAIRS: usize = 200;
const AUTOMATON_DIAGRAMS: usize = 100;
const MAX_GENERATORS: usize = 6;
const LEMMA_BUDGET: Duration = Duration::from_secs(600);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ab() -> Alphabet {
    Alphabet::parse("a b").unwrap()
}

fn kda_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kda"))
}

// ---- oracles -------------------------------------------------------------

/// Complete DFA over explicit state sets.
struct SetDfa {
    initial: usize,
    accepting: Vec<bool>,
    delta: Vec<Vec<usize>>,
}

fn rep_initial(rep: &Representation) -> BTreeSet<usize> {
    (0..rep.e.rows()).filter(|q| rep.e.get(*q, 0).contains(&[])).collect()
}

fn rep_step(rep: &Representation, set: &BTreeSet<usize>, c: char) -> BTreeSet<usize> {
    (0..rep.d.rows())
        .filter(|t| set.iter().any(|s| rep.d.get(*t, *s).contains(&[c])))
        .collect()
}

fn rep_accepts(rep: &Representation, set: &BTreeSet<usize>) -> bool {
    set.iter().any(|q| rep.f.get(0, *q).contains(&[]))
}

fn mask_of(set: &BTreeSet<usize>) -> usize {
    set.iter().map(|q| 1 << q).sum()
}

/// All `2^s` subsets, state `m` being the subset with bit mask `m`.
fn full_powerset(rep: &Representation, letters: &[char]) -> SetDfa {
    let s = rep.d.rows();
    let sets: Vec<BTreeSet<usize>> = (0..1usize << s).map(|m| (0..s).filter(|q| m >> q & 1 == 1).collect()).collect();
    SetDfa {
        initial: mask_of(&rep_initial(rep)),
        accepting: sets.iter().map(|x| rep_accepts(rep, x)).collect(),
        delta: sets
            .iter()
            .map(|x| letters.iter().map(|c| mask_of(&rep_step(rep, x, *c))).collect())
            .collect(),
    }
}

/// Reachable subsets only.
fn reachable_powerset(rep: &Representation, letters: &[char]) -> SetDfa {
    let start = rep_initial(rep);
    let mut index: HashMap<BTreeSet<usize>, usize> = [(start.clone(), 0)].into();
    let mut sets = vec![start];
    let mut delta = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        let row: Vec<usize> = letters
            .iter()
            .map(|c| {
                let t = rep_step(rep, &sets[i], *c);
                let next = index.len();
                *index.entry(t.clone()).or_insert_with(|| {
                    sets.push(t);
                    next
                })
            })
            .collect();
        delta.push(row);
        i += 1;
    }
    SetDfa {
        initial: 0,
        accepting: sets.iter().map(|x| rep_accepts(rep, x)).collect(),
        delta,
    }
}

/// Number of Myhill-Nerode classes of a complete DFA, by Moore refinement of
/// the reachable part.
fn moore_classes(d: &SetDfa) -> usize {
    let mut reach = vec![false; d.delta.len()];
    let mut queue = VecDeque::from([d.initial]);
    reach[d.initial] = true;
    while let Some(q) = queue.pop_front() {
        for t in &d.delta[q] {
            if !reach[*t] {
                reach[*t] = true;
                queue.push_back(*t);
            }
        }
    }
    let states: Vec<usize> = (0..d.delta.len()).filter(|q| reach[*q]).collect();
    let mut class: Vec<usize> = (0..d.delta.len()).map(|q| usize::from(d.accepting[q])).collect();
    loop {
        let mut sig: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let mut next = class.clone();
        for q in &states {
            let key = (class[*q], d.delta[*q].iter().map(|t| class[*t]).collect());
            let n = sig.len();
            next[*q] = *sig.entry(key).or_insert(n);
        }
        let before: BTreeSet<usize> = states.iter().map(|q| class[*q]).collect();
        if sig.len() == before.len() {
            return sig.len();
        }
        class = next;
    }
}

/// NFA whose states are the wires of a `▶ → ▶` automaton-diagram: a token
/// runs forward along ▶ wires and backward along ◀ wires, reads letters,
/// splits at copy, joins at merge, turns round at caps and cups.
fn wire_nfa(d: &Diagram, alphabet: &Alphabet) -> Nfa {
    let g = PortGraph::from_diagram(d);
    let wires = g.wires();
    let id = |s: Source| wires.iter().position(|w| *w == s).unwrap();
    let accept = wires.len();
    let mut n = Nfa::new(alphabet.clone(), wires.len() + 1, id(Source::Left(0)));
    n.accepting.insert(accept);
    for w in &wires {
        let from = id(*w);
        match g.sort_of(*w) {
            Sort::Right => match g.target(*w) {
                Target::Right(_) => n.add(from, None, accept),
                Target::In(b, k) => match g.boxes()[b] {
                    Generator::Letter(c) => n.add(from, Some(c), id(Source::Out(b, 0))),
                    Generator::Copy => {
                        n.add(from, None, id(Source::Out(b, 0)));
                        n.add(from, None, id(Source::Out(b, 1)));
                    }
                    Generator::Merge => n.add(from, None, id(Source::Out(b, 0))),
                    Generator::Cap => {
                        assert_eq!(k, 0);
                        n.add(from, None, id(g.input_source(b, 1)));
                    }
                    Generator::Discard => {}
                    other => panic!("not an automaton generator on a ▶ wire: {other:?}"),
                },
            },
            Sort::Left => match w {
                Source::Out(b, 0) if g.boxes()[*b] == Generator::Cup => n.add(from, None, id(Source::Out(*b, 1))),
                other => panic!("◀ wire from {other:?} in a ▶ → ▶ diagram"),
            },
        }
    }
    n
}

fn same_dfa(lib: &Dfa, oracle: &SetDfa) -> bool {
    lib.initial == oracle.initial
        && lib.accepting == oracle.accepting
        && lib.delta.len() == oracle.delta.len()
        && lib
            .delta
            .iter()
            .zip(&oracle.delta)
            .all(|(a, b)| a.iter().map(|t| t.unwrap_or(usize::MAX)).eq(b.iter().copied()))
}

// ---- criteria --------------------------------------------------------------

fn axiom_soundness() -> Outcome {
    let t = Instant::now();
    let sigma = ab();
    let models = standard_models(&sigma);
    if let Some(m) = models.iter().find(|m| !m.lattice().is_distributive()) {
        return outcome(false, format!("non-distributive standard model {}", m.describe()));
    }
    let instances: Vec<_> = axiom_catalog().iter().flat_map(|a| a.instances(sigma.as_slice())).collect();
    let jobs: Vec<_> = instances.iter().flat_map(|a| models.iter().map(move |m| (a, m))).collect();
    let failures: Vec<String> = jobs
        .par_iter()
        .filter(|(a, m)| !check_axiom(a, m).is_ok_and(|r| r.passes(a.relation)))
        .map(|(a, m)| format!("{} on {}", a.name, m.describe()))
        .collect();
    let elapsed = t.elapsed();
    outcome(
        failures.is_empty() && axiom_catalog().len() == 51 && elapsed <= AXIOM_BUDGET,
        format!(
            "{} rules, {} instances x {} models, {} failures, {:.1}s (budget {}s){}",
            axiom_catalog().len(),
            instances.len(),
            models.len(),
            failures.len(),
            elapsed.as_secs_f64(),
            AXIOM_BUDGET.as_secs(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn worked_equivalence() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cert_path = dir.path().join("ex.kdad");
    let t = Instant::now();
    let out = kda_bin()
        .args(["equiv", "--regex", "(aa)*(1+a)", "a*", "--cert"])
        .arg(&cert_path)
        .output()
        .unwrap();
    let elapsed = t.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let equal = out.status.code() == Some(0) && stdout.trim() == "EQUAL";
    let text = std::fs::read_to_string(&cert_path).unwrap_or_default();
    let replays = Certificate::parse(&text).is_ok_and(|c| c.replay().is_ok());
    let cli_replays = kda_bin().arg("replay").arg(&cert_path).output().unwrap().status.code() == Some(0);

    let sigma = Alphabet::parse("a").unwrap();
    let mut ok_states = true;
    let mut nfs = Vec::new();
    for src in ["(aa)*(1+a)", "a*"] {
        let e = parse_regex(src).unwrap();
        let red = minimise_diagram(&e.to_diagram(), &sigma).unwrap();
        let classical = hopcroft(&subset_construction(&epsilon_elimination(&thompson(&e, &sigma)), false).unwrap().complete());
        ok_states &= red.result.states() == 1 && classical.states() == 1;
        nfs.push(red.derivation.end.clone());
    }
    let same_nf = graph_eq(&nfs[0], &nfs[1]).unwrap_or(false);
    outcome(
        equal && replays && cli_replays && ok_states && same_nf && elapsed < EXAMPLE_BUDGET,
        format!(
            "verdict {}, certificate replays {}/{}, minimal states 1 and 1 (Hopcroft agrees) {}, common normal form {}, {:.3}s (budget {}s)",
            stdout.trim(),
            replays,
            cli_replays,
            ok_states,
            same_nf,
            elapsed.as_secs_f64(),
            EXAMPLE_BUDGET.as_secs()
        ),
    )
}

fn regex_completeness() -> Outcome {
    let t = Instant::now();
    let sigma = ab();
    let pairs = regex_pairs(&mut rng(DEFAULT_SEED), REGEX_PAIRS, REGEX_DEPTH, &sigma);
    let results: Vec<Result<(bool, bool), String>> = pairs
        .par_iter()
        .map(|(e, f)| -> Result<(bool, bool), String> {
            let oracle = language_equiv(&thompson(e, &sigma), &thompson(f, &sigma)).map_err(|x| x.to_string())?;
            let verdict = prove_equal(&e.to_diagram(), &f.to_diagram(), &sigma).map_err(|x| format!("{e} vs {f}: {x}"))?;
            let sound = match &verdict {
                Verdict::Proved(c) => c.replay().is_ok() && Certificate::parse(&c.to_string()).is_ok_and(|p| p.replay().is_ok()),
                Verdict::Refuted(w) => membership(e, &w.word) == w.in_lhs && membership(f, &w.word) != w.in_lhs,
            };
            Ok((verdict.is_proved() == oracle, sound && (oracle || !verdict.is_proved())))
        })
        .collect();
    let elapsed = t.elapsed();
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let agree = results.iter().filter(|r| matches!(r, Ok((true, _)))).count();
    let sound = results.iter().filter(|r| matches!(r, Ok((_, true)))).count();
    let equal = pairs
        .iter()
        .filter(|(e, f)| language_equiv(&thompson(e, &sigma), &thompson(f, &sigma)).unwrap_or(false))
        .count();
    outcome(
        errors.is_empty() && agree == REGEX_PAIRS && sound == REGEX_PAIRS && elapsed <= REGEX_BUDGET,
        format!(
            "{agree}/{REGEX_PAIRS} agree with the automata oracle ({equal} equal pairs), {sound}/{REGEX_PAIRS} certificates or words check, {:.1}s (budget {}s){}",
            elapsed.as_secs_f64(),
            REGEX_BUDGET.as_secs(),
            errors.first().map(|e| format!("; error: {e}")).unwrap_or_default()
        ),
    )
}

fn representation_corpus() -> Vec<Representation> {
    let mut r = rng(DEFAULT_SEED + 4);
    (0..REPRESENTATIONS).map(|_| random_representation(&mut r, MAX_STATES, &ab(), 0.25)).collect()
}

fn determinisation() -> Outcome {
    let sigma = ab();
    let reps = representation_corpus();
    let mut full_ok = 0;
    let mut classical_ok = 0;
    let mut single = 0;
    let mut reach_ok = 0;
    for rep in &reps {
        let full = determinise(rep, Mode::Full).and_then(|r| Ok((representation_to_dfa(&r.result)?, r)));
        if let Ok((dfa, red)) = &full {
            if same_dfa(dfa, &full_powerset(rep, sigma.as_slice())) && red.derivation.replay().is_ok() {
                full_ok += 1;
            }
            if rep_initial(rep).len() == 1 {
                single += 1;
                let n = representation_to_nfa(rep);
                if subset_construction(&n, true).is_ok_and(|c| c.is_isomorphic(dfa)) {
                    classical_ok += 1;
                }
            }
        }
        if let Ok(red) = determinise(rep, Mode::Reach) {
            let equal = language_equiv(&representation_to_nfa(&red.result), &representation_to_nfa(rep)).unwrap_or(false);
            let dfa = representation_to_dfa(&red.result);
            let oracle = reachable_powerset(rep, sigma.as_slice());
            if equal && dfa.is_ok_and(|d| same_dfa(&d, &oracle)) && red.derivation.replay().is_ok() {
                reach_ok += 1;
            }
        }
    }
    outcome(
        full_ok == REPRESENTATIONS && classical_ok == single && reach_ok == REPRESENTATIONS,
        format!(
            "full mode equals the powerset DFA {full_ok}/{REPRESENTATIONS} (isomorphic to the library subset construction {classical_ok}/{single} single-initial), reachable mode language-equal {reach_ok}/{REPRESENTATIONS}"
        ),
    )
}

fn minimisation() -> Outcome {
    let sigma = ab();
    let reps = representation_corpus();
    let mut ok = 0;
    let mut first_bad = None;
    for (i, rep) in reps.iter().enumerate() {
        let nf = minimise_diagram(&rep.to_diagram(), &sigma).map(|r| r.result.states());
        let dfa = subset_construction(&epsilon_elimination(&representation_to_nfa(rep)), false).unwrap().complete();
        let classical = hopcroft(&dfa).states();
        let oracle = moore_classes(&reachable_powerset(rep, sigma.as_slice()));
        if nf.as_ref().is_ok_and(|n| *n == classical && *n == oracle) {
            ok += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!("#{i}: normal form {nf:?}, hopcroft {classical}, refinement {oracle}"));
        }
    }
    outcome(
        ok == REPRESENTATIONS,
        format!(
            "normal-form state count = Hopcroft = partition refinement on {ok}/{REPRESENTATIONS}{}",
            first_bad.map(|b| format!("; first mismatch {b}")).unwrap_or_default()
        ),
    )
}

fn matrix_completeness() -> Outcome {
    let sigma = ab();
    let pairs = matrix_diagram_pairs(&mut rng(DEFAULT_SEED + 6), MATRIX_PAIRS, &sigma);
    let normal_form = |x: &Diagram| -> Option<Diagram> {
        let mut d = Derivation::new(x.clone(), sigma.clone());
        d.step("matrix", Direction::Forward, Location::Path(vec![])).ok()?;
        d.replay().ok()?;
        Some(d.end.clone())
    };
    let mut agree = 0;
    let mut equal = 0;
    for (c, d) in &pairs {
        let (Some(nc), Some(nd)) = (normal_form(c), normal_form(d)) else { continue };
        let graphs = graph_eq(&nc, &nd).unwrap_or(false);
        let matrices = matrix_of_terms(c).ok() == matrix_of_terms(d).ok();
        equal += usize::from(matrices);
        agree += usize::from(graphs == matrices);
    }
    outcome(
        agree == MATRIX_PAIRS,
        format!("normal-form graph equality agrees with matrix equality on {agree}/{MATRIX_PAIRS} ({equal} equal pairs)"),
    )
}

fn trace_form() -> Outcome {
    let sigma = ab();
    let models = standard_models(&sigma);
    let mut r = rng(DEFAULT_SEED + 7);
    let diagrams: Vec<Diagram> = (0..AUTOMATON_DIAGRAMS).map(|_| random_automaton_diagram(&mut r, MAX_GENERATORS, &sigma)).collect();
    let results: Vec<(bool, Option<bool>)> = diagrams
        .par_iter()
        .map(|d| {
            let Ok(tf) = trace_canonical_form(d) else { return (false, None) };
            let back = tf.assemble();
            let semantic = models.iter().all(|m| match (eval(d, m), eval(&back, m)) {
                (Ok(x), Ok(y)) => x == y,
                _ => false,
            });
            let unary = d.dom().len() == 1 && d.cod().len() == 1;
            let language = unary.then(|| {
                representation_of(d, &sigma)
                    .ok()
                    .is_some_and(|rep| language_equiv(&representation_to_nfa(&rep), &wire_nfa(d, &sigma)).unwrap_or(false))
            });
            (semantic, language)
        })
        .collect();
    let semantic = results.iter().filter(|r| r.0).count();
    let applicable = results.iter().filter(|r| r.1.is_some()).count();
    let language = results.iter().filter(|r| r.1 == Some(true)).count();
    outcome(
        semantic == AUTOMATON_DIAGRAMS && language == applicable && applicable > 0,
        format!(
            "trace form eval-equal on all {} models for {semantic}/{AUTOMATON_DIAGRAMS}, representation language-equal to the wire NFA {language}/{applicable} unary diagrams",
            models.len()
        ),
    )
}

fn derived_lemmas() -> Outcome {
    let t = Instant::now();
    let models = standard_models(&ab());
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, instances) in derived_lemma_instances() {
        let r = check_lemma(name, &instances, &models);
        pass &= r.passed();
        if !r.passed() {
            lines.push(format!("{name}: {} failures, {} unchecked", r.failures.len(), r.unchecked.len()));
        }
    }
    let elapsed = t.elapsed();
    outcome(
        pass && elapsed <= LEMMA_BUDGET,
        format!(
            "{} lemmas, {:.1}s (budget {}s){}",
            derived_lemma_instances().len(),
            elapsed.as_secs_f64(),
            LEMMA_BUDGET.as_secs(),
            if lines.is_empty() { String::new() } else { format!("; {}", lines.join("; ")) }
        ),
    )
}

fn round_trip() -> Outcome {
    let text = "alphabet: a b\nstates: 3\ninit: 0\naccept: 2\ntrans: 0 a 1\ntrans: 1 b 2\ntrans: 2 a 1\ntrans: 2 a 2\n";
    let sigma = ab();
    let nfa = parse_nfa(text).unwrap();
    let target = thompson(&parse_regex("ab(a+ab)*").unwrap(), &sigma);

    let back = representation_of(&nfa_to_diagram(&nfa), &sigma).map(|r| representation_to_nfa(&r));
    let lib = back.as_ref().is_ok_and(|b| {
        language_equiv(&nfa, b).unwrap_or(false) && language_equiv(b, &target).unwrap_or(false)
    });

    let dir = tempfile::tempdir().unwrap();
    let nfa_path = dir.path().join("ex.nfa");
    std::fs::write(&nfa_path, text).unwrap();
    let diag = kda_bin().arg("nfa2diag").arg(&nfa_path).output().unwrap();
    let diag_path = dir.path().join("ex.kd");
    std::fs::write(&diag_path, &diag.stdout).unwrap();
    let out = kda_bin().args(["diag2nfa", "--alphabet", "a b"]).arg(&diag_path).output().unwrap();
    let cli = diag.status.success()
        && out.status.success()
        && parse_nfa(&String::from_utf8_lossy(&out.stdout))
            .is_ok_and(|n| language_equiv(&n, &nfa).unwrap_or(false) && language_equiv(&n, &target).unwrap_or(false));
    outcome(
        lib && cli,
        format!("library round trip {lib}, CLI nfa2diag/diag2nfa round trip {cli}, both equal to ab(a+ab)*"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("axiom soundness sweep", axiom_soundness),
        ("worked equivalence (aa)*(1+a) = a*", worked_equivalence),
        ("equality decision on random regex pairs", regex_completeness),
        ("determinisation fidelity", determinisation),
        ("minimisation", minimisation),
        ("matrix completeness", matrix_completeness),
        ("trace canonical form and representations", trace_form),
        ("derived lemmas", derived_lemmas),
        ("NFA round trip", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "{} {}. {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
