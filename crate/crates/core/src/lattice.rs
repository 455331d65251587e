//! Finite lattices and the model family used to check soundness.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::regex::Alphabet;

/// Largest lattice accepted; keeps relation tables small.
pub const MAX_ELEMENTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("order is not a partial order")]
    NotPartialOrder,
    #[error("elements {0} and {1} have no {2}")]
    MissingBound(usize, usize, &'static str),
    #[error("lattice has {0} elements; at most {MAX_ELEMENTS} are supported")]
    TooLarge(usize),
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteLattice {
    name: String,
    n: usize,
    leq: Vec<bool>,
    meet: Vec<usize>,
    join: Vec<usize>,
    bottom: usize,
    top: usize,
    distributive: bool,
}

impl fmt::Debug for FiniteLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteLattice({})", self.name)
    }
}

impl FiniteLattice {
    /// Build from an order relation given as `leq(x, y)`.
    pub fn from_order(
        name: impl Into<String>,
        n: usize,
        leq: impl Fn(usize, usize) -> bool,
    ) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::NotPartialOrder);
        }
        if n > MAX_ELEMENTS {
            return Err(LatticeError::TooLarge(n));
        }
        let table: Vec<bool> = (0..n * n).map(|i| leq(i / n, i % n)).collect();
        let le = |x: usize, y: usize| table[x * n + y];
        for x in 0..n {
            if !le(x, x) {
                return Err(LatticeError::NotPartialOrder);
            }
            for y in 0..n {
                if x != y && le(x, y) && le(y, x) {
                    return Err(LatticeError::NotPartialOrder);
                }
                for z in 0..n {
                    if le(x, y) && le(y, z) && !le(x, z) {
                        return Err(LatticeError::NotPartialOrder);
                    }
                }
            }
        }
        let bound = |x: usize, y: usize, upper: bool| -> Option<usize> {
            let cands: Vec<usize> = (0..n)
                .filter(|&z| {
                    if upper {
                        le(x, z) && le(y, z)
                    } else {
                        le(z, x) && le(z, y)
                    }
                })
                .collect();
            cands
                .iter()
                .copied()
                .find(|&z| cands.iter().all(|&w| if upper { le(z, w) } else { le(w, z) }))
        };
        let mut meet = vec![0; n * n];
        let mut join = vec![0; n * n];
        for x in 0..n {
            for y in 0..n {
                meet[x * n + y] = bound(x, y, false).ok_or(LatticeError::MissingBound(x, y, "meet"))?;
                join[x * n + y] = bound(x, y, true).ok_or(LatticeError::MissingBound(x, y, "join"))?;
            }
        }
        let bottom = (0..n).find(|&b| (0..n).all(|x| le(b, x))).expect("finite lattice");
        let top = (0..n).find(|&t| (0..n).all(|x| le(x, t))).expect("finite lattice");
        let mut lat = FiniteLattice {
            name: name.into(),
            n,
            leq: table,
            meet,
            join,
            bottom,
            top,
            distributive: true,
        };
        lat.distributive = (0..n).all(|x| {
            (0..n).all(|y| {
                (0..n).all(|z| lat.meet(x, lat.join(y, z)) == lat.join(lat.meet(x, y), lat.meet(x, z)))
            })
        });
        Ok(lat)
    }

    /// Chain 0 < 1 < ... < n-1.
    pub fn chain(n: usize) -> Self {
        Self::from_order(format!("C{n}"), n, |x, y| x <= y).expect("chain")
    }

    /// Subsets of a k-element set, ordered by inclusion; element = bitmask.
    pub fn boolean(k: u32) -> Self {
        Self::from_order(format!("B{k}"), 1 << k, |x, y| x & !y == 0).expect("boolean")
    }

    /// Componentwise product; element (a, b) has index a * |other| + b.
    pub fn product(a: &FiniteLattice, b: &FiniteLattice) -> Result<Self, LatticeError> {
        let m = b.n;
        Self::from_order(format!("{}x{}", a.name, b.name), a.n * m, |x, y| {
            a.leq(x / m, y / m) && b.leq(x % m, y % m)
        })
    }

    /// The diamond: bottom 0, atoms 1..=3, top 4.
    pub fn m3() -> Self {
        Self::from_order("M3", 5, |x, y| x == y || x == 0 || y == 4).expect("M3")
    }

    /// The pentagon: 0 < 1 < 2 < 4 and 0 < 3 < 4.
    pub fn n5() -> Self {
        Self::from_order("N5", 5, |x, y| {
            x == y || x == 0 || y == 4 || (x == 1 && y == 2)
        })
        .expect("N5")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.n + y]
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x * self.n + y]
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x * self.n + y]
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn is_distributive(&self) -> bool {
        self.distributive
    }

    /// Elements covered by `x`.
    pub fn lower_covers(&self, x: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&y| y != x && self.leq(y, x))
            .filter(|&y| !(0..self.n).any(|z| z != x && z != y && self.leq(y, z) && self.leq(z, x)))
            .collect()
    }

    /// Elements covering `x`.
    pub fn upper_covers(&self, x: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&y| y != x && self.leq(x, y))
            .filter(|&y| !(0..self.n).any(|z| z != x && z != y && self.leq(x, z) && self.leq(z, y)))
            .collect()
    }

    pub fn is_homomorphism(&self, f: &[usize]) -> bool {
        f[self.bottom] == self.bottom
            && f[self.top] == self.top
            && (0..self.n).all(|x| {
                (0..self.n).all(|y| {
                    f[self.meet(x, y)] == self.meet(f[x], f[y])
                        && f[self.join(x, y)] == self.join(f[x], f[y])
                })
            })
    }

    /// Properties of right concatenation `L ↦ La` beyond being a
    /// homomorphism: it reflects the bottom element, and its right adjoint
    /// (the residual) preserves binary joins.
    pub fn is_language_like(&self, f: &[usize]) -> bool {
        let reflects_bottom = (0..self.n).all(|x| f[x] != self.bottom || x == self.bottom);
        let residual = |y: usize| -> usize {
            (0..self.n)
                .filter(|&x| self.leq(f[x], y))
                .fold(self.bottom, |acc, x| self.join(acc, x))
        };
        reflects_bottom
            && (0..self.n).all(|x| {
                (0..self.n).all(|y| residual(self.join(x, y)) == self.join(residual(x), residual(y)))
            })
    }

    /// All bounded lattice endomorphisms, by brute force over all maps.
    pub fn homomorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let total = n.pow(n as u32);
        let mut out = Vec::new();
        let mut f = vec![0; n];
        for code in 0..total {
            let mut c = code;
            for slot in f.iter_mut() {
                *slot = c % n;
                c /= n;
            }
            if self.is_homomorphism(&f) {
                out.push(f.clone());
            }
        }
        out
    }

    /// The opposite lattice on the same carrier.
    pub fn dual(&self) -> Self {
        Self::from_order(format!("{}^op", self.name), self.n, |x, y| self.leq(y, x))
            .expect("dual of a lattice")
    }
}

/// Which letter actions a model family admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionClass {
    /// Bounded lattice homomorphisms.
    Homomorphism,
    /// Homomorphisms that also reflect bottom and have a join-preserving
    /// residual, as right concatenation by a letter does.
    LanguageLike,
}

/// A finite lattice with one endomorphism per letter.
#[derive(Clone, Debug)]
pub struct LatticeModel {
    lattice: Arc<FiniteLattice>,
    actions: BTreeMap<char, Vec<usize>>,
}

impl LatticeModel {
    pub fn new(lattice: Arc<FiniteLattice>, actions: BTreeMap<char, Vec<usize>>) -> Self {
        LatticeModel { lattice, actions }
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn action(&self, a: char) -> Option<&[usize]> {
        self.actions.get(&a).map(|v| v.as_slice())
    }

    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        self.actions.keys().copied()
    }

    /// The same actions over the opposite order. Only meaningful for
    /// letter-free diagrams, since the actions are not dualised.
    pub fn dual(&self) -> LatticeModel {
        LatticeModel {
            lattice: Arc::new(self.lattice.dual()),
            actions: self.actions.clone(),
        }
    }

    pub fn describe(&self) -> String {
        let mut s = self.lattice.name.clone();
        if !self.actions.is_empty() {
            let parts: Vec<String> = self
                .actions
                .iter()
                .map(|(a, f)| {
                    let img: Vec<String> = f.iter().map(|x| x.to_string()).collect();
                    format!("{a}={}", img.join(""))
                })
                .collect();
            s.push_str(&format!("[{}]", parts.join(",")));
        }
        s
    }
}

/// Lattices of the default, distributive model family.
pub fn standard_lattices() -> Vec<FiniteLattice> {
    vec![
        FiniteLattice::chain(2),
        FiniteLattice::chain(3),
        FiniteLattice::chain(4),
        FiniteLattice::boolean(1),
        FiniteLattice::boolean(2),
        FiniteLattice::product(&FiniteLattice::chain(2), &FiniteLattice::chain(3))
            .expect("6 elements"),
    ]
}

/// Pair a lattice with every admissible action assignment over `alphabet`.
pub fn models_over(
    lattice: FiniteLattice,
    alphabet: &Alphabet,
    class: ActionClass,
) -> Vec<LatticeModel> {
    let lattice = Arc::new(lattice);
    let actions: Vec<Vec<usize>> = lattice
        .homomorphisms()
        .into_iter()
        .filter(|f| class == ActionClass::Homomorphism || lattice.is_language_like(f))
        .collect();
    let mut out = vec![BTreeMap::new()];
    for a in alphabet.letters() {
        let mut next = Vec::new();
        for partial in &out {
            for f in &actions {
                let mut m = partial.clone();
                m.insert(*a, f.clone());
                next.push(m);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|acts| LatticeModel::new(lattice.clone(), acts))
        .collect()
}

/// The distributive models on which every axiom is asserted to hold.
pub fn standard_models(alphabet: &Alphabet) -> Vec<LatticeModel> {
    standard_lattices()
        .into_iter()
        .flat_map(|l| models_over(l, alphabet, ActionClass::LanguageLike))
        .collect()
}

/// Standard lattices with all homomorphic actions, plus M3 and N5.
/// Failures on these models are reported, not asserted.
pub fn exploratory_models(alphabet: &Alphabet) -> Vec<LatticeModel> {
    let mut lattices = standard_lattices();
    lattices.push(FiniteLattice::m3());
    lattices.push(FiniteLattice::n5());
    lattices
        .into_iter()
        .flat_map(|l| models_over(l, alphabet, ActionClass::Homomorphism))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_bounds() {
        let c = FiniteLattice::chain(3);
        assert_eq!((c.bottom(), c.top()), (0, 2));
        assert_eq!(c.meet(1, 2), 1);
        assert_eq!(c.join(0, 1), 1);
        assert!(c.is_distributive());
    }

    #[test]
    fn non_distributive_lattices() {
        assert!(!FiniteLattice::m3().is_distributive());
        assert!(!FiniteLattice::n5().is_distributive());
        assert!(FiniteLattice::boolean(2).is_distributive());
    }

    #[test]
    fn rejects_non_lattice() {
        // Two incomparable maximal elements.
        let r = FiniteLattice::from_order("V", 3, |x, y| x == y || x == 0);
        assert!(matches!(r, Err(LatticeError::MissingBound(..))));
        assert!(matches!(
            FiniteLattice::from_order("big", 7, |x, y| x <= y),
            Err(LatticeError::TooLarge(7))
        ));
    }

    /// Independent count: a ⊤⊥-preserving endomorphism of 2^2 is determined
    /// by where the two atoms go; enumerate all 16 atom images directly.
    #[test]
    fn boolean_square_endomorphisms() {
        let b = FiniteLattice::boolean(2);
        let homs = b.homomorphisms();
        let mut expected = 0;
        for i1 in 0..4usize {
            for i2 in 0..4usize {
                // f(1) = i1, f(2) = i2, f(3) = i1 | i2 must be 3, f(0) = 0,
                // and meets: f(1 & 2) = f(0) = 0 = i1 & i2.
                if i1 | i2 == 3 && i1 & i2 == 0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(homs.len(), expected);
        assert_eq!(homs.len(), 4);
        let language_like = homs.iter().filter(|f| b.is_language_like(f)).count();
        assert_eq!(language_like, 2);
    }

    #[test]
    fn chain_two_has_only_identity() {
        assert_eq!(FiniteLattice::chain(2).homomorphisms(), vec![vec![0, 1]]);
    }

    #[test]
    fn chain_three_actions() {
        let c = FiniteLattice::chain(3);
        let homs = c.homomorphisms();
        // f(1) ∈ {0, 1, 2}
        assert_eq!(homs.len(), 3);
        let ll: Vec<_> = homs.into_iter().filter(|f| c.is_language_like(f)).collect();
        assert_eq!(ll, vec![vec![0, 1, 2], vec![0, 2, 2]]);
    }

    #[test]
    fn model_counts() {
        let empty = Alphabet::new(vec![]).unwrap();
        let ms = standard_models(&empty);
        assert_eq!(ms.len(), standard_lattices().len());
        assert!(ms.iter().all(|m| m.letters().count() == 0));
        let ab = Alphabet::new(vec!['a', 'b']).unwrap();
        let c4 = models_over(FiniteLattice::chain(4), &ab, ActionClass::LanguageLike);
        // C4 admits 6 language-like actions: monotone f(1) <= f(2) in {1,2,3}.
        assert_eq!(c4.len(), 36);
    }

    #[test]
    fn covers() {
        let b = FiniteLattice::boolean(2);
        assert_eq!(b.upper_covers(0), vec![1, 2]);
        assert_eq!(b.lower_covers(3), vec![1, 2]);
        assert!(b.upper_covers(3).is_empty());
    }
}
