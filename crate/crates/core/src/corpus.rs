//! Seeded random inputs for the bounded-corpus checks.
//!
//! Every generator takes an explicit `ChaCha8Rng`, so a seed fixes the whole
//! corpus on every platform.

use rand::seq::SliceRandom;
use rand::Rng;
pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::diagram::{Diagram, Generator, Sort};
use crate::encode::{trace, FiniteLanguage, LangMatrix, Representation};
use crate::regex::{Alphabet, Regex};

/// Seed used when a caller has no reason to pick another.
pub const DEFAULT_SEED: u64 = 0x006b_6461;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A regex of depth at most `depth` over `alphabet`.
pub fn random_regex(rng: &mut ChaCha8Rng, depth: usize, alphabet: &Alphabet) -> Regex {
    let letters = alphabet.as_slice();
    if depth <= 1 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Regex::Zero,
            1 => Regex::One,
            _ => Regex::Letter(*letters.choose(rng).expect("nonempty alphabet")),
        };
    }
    match rng.gen_range(0..5) {
        0 | 1 => Regex::concat(random_regex(rng, depth - 1, alphabet), random_regex(rng, depth - 1, alphabet)),
        2 | 3 => Regex::plus(random_regex(rng, depth - 1, alphabet), random_regex(rng, depth - 1, alphabet)),
        _ => Regex::star(random_regex(rng, depth - 1, alphabet)),
    }
}

/// Rewrite one random subterm by a Kleene-algebra law. The language is
/// unchanged.
fn preserve(rng: &mut ChaCha8Rng, e: &Regex) -> Regex {
    use Regex::*;
    let here = rng.gen_bool(0.4);
    match e {
        Plus(a, b) if !here => match rng.gen_bool(0.5) {
            true => Regex::plus(preserve(rng, a), (**b).clone()),
            false => Regex::plus((**a).clone(), preserve(rng, b)),
        },
        Concat(a, b) if !here => match rng.gen_bool(0.5) {
            true => Regex::concat(preserve(rng, a), (**b).clone()),
            false => Regex::concat((**a).clone(), preserve(rng, b)),
        },
        Star(a) if !here => Regex::star(preserve(rng, a)),
        Plus(a, b) => Regex::plus((**b).clone(), (**a).clone()),
        Concat(a, b) if matches!(**b, Plus(..)) => {
            let Plus(x, y) = &**b else { unreachable!() };
            Regex::plus(Regex::concat((**a).clone(), (**x).clone()), Regex::concat((**a).clone(), (**y).clone()))
        }
        Star(a) => match rng.gen_range(0..3) {
            0 => Regex::plus(One, Regex::concat((**a).clone(), e.clone())),
            1 => Regex::star(e.clone()),
            _ => Regex::concat(e.clone(), e.clone()),
        },
        _ => match rng.gen_range(0..3) {
            0 => Regex::plus(e.clone(), e.clone()),
            1 => Regex::concat(e.clone(), One),
            _ => Regex::plus(e.clone(), Zero),
        },
    }
}

/// Change one random leaf or drop one star; usually changes the language.
fn perturb(rng: &mut ChaCha8Rng, e: &Regex, alphabet: &Alphabet) -> Regex {
    use Regex::*;
    match e {
        Plus(a, b) => match rng.gen_bool(0.5) {
            true => Regex::plus(perturb(rng, a, alphabet), (**b).clone()),
            false => Regex::plus((**a).clone(), perturb(rng, b, alphabet)),
        },
        Concat(a, b) => match rng.gen_bool(0.5) {
            true => Regex::concat(perturb(rng, a, alphabet), (**b).clone()),
            false => Regex::concat((**a).clone(), perturb(rng, b, alphabet)),
        },
        Star(a) if rng.gen_bool(0.5) => (**a).clone(),
        Star(a) => Regex::star(perturb(rng, a, alphabet)),
        _ => random_regex(rng, 1, alphabet),
    }
}

/// Pairs of regexes of depth at most `depth`: a third independent, a third
/// related by laws (equal), a third perturbed (usually different). Rewrites
/// that would exceed `depth` are retried, then dropped.
pub fn regex_pairs(rng: &mut ChaCha8Rng, count: usize, depth: usize, alphabet: &Alphabet) -> Vec<(Regex, Regex)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let e = random_regex(rng, depth, alphabet);
        let kind = out.len() % 3;
        let f = (0..8)
            .map(|_| match kind {
                0 => random_regex(rng, depth, alphabet),
                1 => preserve(rng, &e),
                _ => perturb(rng, &e, alphabet),
            })
            .find(|f| f.depth() <= depth);
        if let Some(f) = f {
            out.push((e, f));
        }
    }
    out
}

/// An ε-free representation with between 1 and `max_states` states. Each
/// transition is present with probability `density`.
pub fn random_representation(rng: &mut ChaCha8Rng, max_states: usize, alphabet: &Alphabet, density: f64) -> Representation {
    let s = rng.gen_range(1..=max_states);
    let mut e = LangMatrix::zero(s, 1);
    let mut f = LangMatrix::zero(1, s);
    let mut d = LangMatrix::zero(s, s);
    e.set(rng.gen_range(0..s), 0, FiniteLanguage::one());
    for q in 0..s {
        if rng.gen_bool(0.2) {
            e.set(q, 0, FiniteLanguage::one());
        }
        if rng.gen_bool(0.4) {
            f.set(0, q, FiniteLanguage::one());
        }
        for p in 0..s {
            for c in alphabet.letters() {
                if rng.gen_bool(density) {
                    d.get_mut(q, p).insert(vec![*c]);
                }
            }
        }
    }
    Representation::new(alphabet.clone(), e, d, f)
}

/// One block of a layer: a generator, an identity or a symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Block {
    Id,
    Sym,
    Gen(Generator),
}

impl Block {
    fn arity_in(self) -> usize {
        match self {
            Block::Id => 1,
            Block::Sym => 2,
            Block::Gen(g) => g.arity_in(),
        }
    }

    fn diagram(self) -> Diagram {
        match self {
            Block::Id => Diagram::id(Sort::Right),
            Block::Sym => Diagram::sym(Sort::Right, Sort::Right),
            Block::Gen(g) => Diagram::gen(g),
        }
    }
}

fn pick_relational(rng: &mut ChaCha8Rng, room: usize, width: usize) -> Block {
    use Generator::*;
    loop {
        let b = match rng.gen_range(0..9) {
            0..=2 => Block::Id,
            3 => Block::Sym,
            4 => Block::Gen(Copy),
            5 => Block::Gen(Merge),
            6 if width > 1 => Block::Gen(Discard),
            7 if width < 4 => Block::Gen(Generate),
            8 => Block::Gen(Copy),
            _ => continue,
        };
        if b.arity_in() <= room {
            return b;
        }
    }
}

/// A layer over `width` wires, bounded so widths stay small.
fn relational_layer(rng: &mut ChaCha8Rng, width: usize) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut room = width;
    let mut out = 0;
    while room > 0 || (width == 0 && blocks.is_empty()) {
        let mut b = pick_relational(rng, room, width);
        if out >= 5 && b == Block::Gen(Generator::Copy) {
            b = Block::Id;
        }
        room -= b.arity_in();
        out += Block::diagram(b).cod().len();
        blocks.push(b);
    }
    blocks
}

fn letter_layer(rng: &mut ChaCha8Rng, width: usize, alphabet: &Alphabet) -> Vec<Block> {
    (0..width)
        .map(|_| match rng.gen_bool(0.6) {
            true => Block::Gen(Generator::Letter(*alphabet.as_slice().choose(rng).expect("letters"))),
            false => Block::Id,
        })
        .collect()
}

fn layer_width(layer: &[Block]) -> usize {
    layer.iter().map(|b| b.diagram().cod().len()).sum()
}

fn layers_diagram(layers: &[Vec<Block>], inputs: usize) -> Diagram {
    let mut d = Diagram::id_right(inputs);
    for l in layers {
        d = d.then(&Diagram::par_all(l.iter().map(|b| b.diagram())));
    }
    d
}

/// A matrix-diagram: relational layers around a single letter layer, so every
/// path meets at most one letter.
pub struct MatrixDiagram {
    inputs: usize,
    layers: Vec<Vec<Block>>,
}

impl MatrixDiagram {
    pub fn diagram(&self) -> Diagram {
        layers_diagram(&self.layers, self.inputs)
    }

    /// Replace one block by a diagram with the same matrix, or (with
    /// `change`) by one that usually has a different matrix.
    fn variant(&self, rng: &mut ChaCha8Rng, alphabet: &Alphabet, change: bool) -> Diagram {
        use Generator::*;
        let l = rng.gen_range(0..self.layers.len());
        let k = rng.gen_range(0..self.layers[l].len());
        let block = self.layers[l][k];
        let copy = Diagram::gen(Copy);
        let merge = Diagram::gen(Merge);
        let id = Diagram::id(Sort::Right);
        let replacement = if change {
            match block {
                Block::Gen(Letter(c)) => {
                    let others: Vec<char> = alphabet.letters().copied().filter(|x| *x != c).collect();
                    match others.choose(rng) {
                        Some(o) => Diagram::letter(*o),
                        None => id.clone(),
                    }
                }
                Block::Id => Diagram::gen(Discard).then(&Diagram::gen(Generate)),
                Block::Gen(Merge) => Diagram::id(Sort::Right).beside(&Diagram::gen(Discard)),
                Block::Gen(Copy) => Diagram::id(Sort::Right).beside(&Diagram::gen(Generate)),
                other => other.diagram(),
            }
        } else {
            match block {
                Block::Id => match rng.gen_range(0..3) {
                    0 => copy.then(&merge),
                    1 => copy.then(&id.beside(&Diagram::gen(Discard))),
                    _ => id.beside(&Diagram::gen(Generate)).then(&merge),
                },
                Block::Gen(Letter(c)) => {
                    let a = Diagram::letter(c);
                    copy.then(&a.beside(&a)).then(&merge)
                }
                Block::Gen(Copy) => copy.then(&Diagram::sym(Sort::Right, Sort::Right)),
                Block::Gen(Merge) => Diagram::sym(Sort::Right, Sort::Right).then(&merge),
                Block::Sym => Diagram::sym(Sort::Right, Sort::Right)
                    .then(&Diagram::sym(Sort::Right, Sort::Right))
                    .then(&Diagram::sym(Sort::Right, Sort::Right)),
                other => other.diagram(),
            }
        };
        let mut d = Diagram::id_right(self.inputs);
        for (i, layer) in self.layers.iter().enumerate() {
            let row = Diagram::par_all(layer.iter().enumerate().map(|(j, b)| {
                if (i, j) == (l, k) {
                    replacement.clone()
                } else {
                    b.diagram()
                }
            }));
            d = d.then(&row);
        }
        d
    }
}

/// A matrix-diagram with `1..=3` inputs and up to 2 relational layers on
/// each side of the letter layer.
pub fn random_matrix_diagram(rng: &mut ChaCha8Rng, alphabet: &Alphabet) -> MatrixDiagram {
    let inputs = rng.gen_range(1..=3);
    let mut layers = Vec::new();
    let mut width = inputs;
    for _ in 0..rng.gen_range(0..=2) {
        let l = relational_layer(rng, width);
        width = layer_width(&l);
        layers.push(l);
    }
    layers.push(letter_layer(rng, width, alphabet));
    for _ in 0..rng.gen_range(1..=2) {
        let l = relational_layer(rng, width);
        width = layer_width(&l);
        layers.push(l);
    }
    MatrixDiagram { inputs, layers }
}

/// Pairs of matrix-diagrams of equal type: half rewritten so the matrix is
/// kept, half perturbed.
pub fn matrix_diagram_pairs(rng: &mut ChaCha8Rng, count: usize, alphabet: &Alphabet) -> Vec<(Diagram, Diagram)> {
    (0..count)
        .map(|i| {
            let m = random_matrix_diagram(rng, alphabet);
            let other = m.variant(rng, alphabet, i % 2 == 1);
            (m.diagram(), other)
        })
        .collect()
}

/// A traced automaton-diagram `▶^i → ▶^o` with at most `max_generators`
/// generators, counting the caps and cups of the trace.
pub fn random_automaton_diagram(rng: &mut ChaCha8Rng, max_generators: usize, alphabet: &Alphabet) -> Diagram {
    use Generator::*;
    let k = rng.gen_range(0..=2.min(max_generators / 2));
    let budget = max_generators - 2 * k;
    let inputs = k + rng.gen_range(0..=2);
    let outputs = k + rng.gen_range(0..=2);
    let mut layers: Vec<Vec<Block>> = Vec::new();
    let mut width = inputs;
    let mut used = 0;
    while used < budget && layers.len() < 4 {
        let mut layer = Vec::new();
        let mut room = width;
        while room > 0 || (width == 0 && layer.is_empty()) {
            let b = match rng.gen_range(0..8) {
                0 if used < budget && room >= 1 => Block::Gen(Letter(*alphabet.as_slice().choose(rng).expect("letters"))),
                1 if used < budget && room >= 1 && width < 4 => Block::Gen(Copy),
                2 if used < budget && room >= 2 => Block::Gen(Merge),
                3 if used < budget && room >= 1 && width > 1 => Block::Gen(Discard),
                4 if used < budget && width < 4 => Block::Gen(Generate),
                5 if room >= 2 => Block::Sym,
                _ if room >= 1 => Block::Id,
                _ => continue,
            };
            if matches!(b, Block::Gen(_)) {
                used += 1;
            }
            room -= b.arity_in();
            layer.push(b);
        }
        width = layer_width(&layer);
        layers.push(layer);
    }
    // fit the output width inside the budget
    let mut d = layers_diagram(&layers, inputs);
    while width != outputs {
        let step = if width > outputs && used < budget {
            used += 1;
            width -= 1;
            match width {
                0 => Diagram::gen(Discard),
                _ => Diagram::gen(Merge).beside(&Diagram::id_right(width - 1)),
            }
        } else if width < outputs && used < budget {
            used += 1;
            width += 1;
            Diagram::gen(Generate).beside(&Diagram::id_right(width - 1))
        } else {
            break;
        };
        d = d.then(&step);
    }
    let k = k.min(width).min(inputs);
    trace(&d, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::matrix_of;
    use crate::regex::regex_equiv;

    fn ab() -> Alphabet {
        Alphabet::parse("a b").unwrap()
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = regex_pairs(&mut rng(7), 30, 5, &ab());
        let b = regex_pairs(&mut rng(7), 30, 5, &ab());
        assert_eq!(a, b);
        assert!(a.iter().all(|(e, f)| e.depth() <= 5 && f.depth() <= 5));
    }

    #[test]
    fn law_rewrites_keep_the_language() {
        let mut r = rng(3);
        for _ in 0..200 {
            let e = random_regex(&mut r, 4, &ab());
            let f = preserve(&mut r, &e);
            assert!(regex_equiv(&e, &f, &ab()), "{e} vs {f}");
        }
    }

    #[test]
    fn regex_pairs_mix_equal_and_different() {
        let pairs = regex_pairs(&mut rng(DEFAULT_SEED), 60, 5, &ab());
        let equal = pairs.iter().filter(|(e, f)| regex_equiv(e, f, &ab())).count();
        assert!((15..=50).contains(&equal), "{equal}");
    }

    #[test]
    fn representations_are_epsilon_free() {
        let mut r = rng(1);
        for _ in 0..50 {
            let rep = random_representation(&mut r, 6, &ab(), 0.3);
            assert!(rep.states() <= 6);
            assert!(rep.check_epsilon_free().is_ok());
            assert!(!rep.initial_states().is_empty());
        }
    }

    #[test]
    fn matrix_pairs_are_typed_and_mixed() {
        let pairs = matrix_diagram_pairs(&mut rng(2), 60, &ab());
        let mut equal = 0;
        for (c, d) in &pairs {
            assert!(c.same_type(d));
            let (m, n) = (matrix_of(c).unwrap(), matrix_of(d).unwrap());
            assert!(m.max_word_len() <= 1 && n.max_word_len() <= 1);
            equal += usize::from(m == n);
        }
        assert!((30..60).contains(&equal), "{equal}");
    }

    #[test]
    fn automaton_diagrams_respect_the_budget() {
        let mut r = rng(5);
        for _ in 0..100 {
            let d = random_automaton_diagram(&mut r, 6, &ab());
            let gens = d.generators();
            assert!(gens.len() <= 6, "{}", gens.len());
            assert!(gens.iter().all(|g| g.is_automaton()));
            assert!(d.dom().is_right_only() && d.cod().is_right_only());
        }
    }
}
