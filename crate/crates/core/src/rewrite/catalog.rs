//! The axiom catalog.

use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::diagram::Diagram;
use crate::encode::trace;
use crate::interp::{AxiomInstance, Relation};
use crate::text::{parse, print};

/// Letter standing for the parameter of the letter axioms.
pub const PLACEHOLDER: char = 'a';

#[derive(Clone, Debug)]
pub struct Axiom {
    pub name: &'static str,
    pub lhs: Diagram,
    pub rhs: Diagram,
    pub relation: Relation,
    /// Whether the rule is stated for an arbitrary letter (written with
    /// [`PLACEHOLDER`]).
    pub letter_param: bool,
}

impl Axiom {
    /// The rule with its letter parameter set to `c`.
    pub fn instantiate(&self, c: char) -> AxiomInstance {
        let sub = |d: &Diagram| {
            if self.letter_param {
                d.map_letters(&|x| if x == PLACEHOLDER { c } else { x })
            } else {
                d.clone()
            }
        };
        AxiomInstance {
            name: if self.letter_param { format!("{}:{c}", self.name) } else { self.name.to_string() },
            lhs: sub(&self.lhs),
            rhs: sub(&self.rhs),
            relation: self.relation,
        }
    }

    /// Every instance over the given letters (one instance for rules without
    /// a parameter).
    pub fn instances(&self, letters: &[char]) -> Vec<AxiomInstance> {
        if self.letter_param {
            letters.iter().map(|c| self.instantiate(*c)).collect()
        } else {
            vec![self.instantiate(PLACEHOLDER)]
        }
    }
}

const R: &str = "(id r)";

fn rule(name: &'static str, lhs: &str, rel: Relation, rhs: &str) -> Axiom {
    let parse_side = |s: &str| parse(s).unwrap_or_else(|e| panic!("axiom {name}: {e}"));
    Axiom {
        name,
        lhs: parse_side(lhs),
        rhs: parse_side(rhs),
        relation: rel,
        letter_param: lhs.contains("(letter") || rhs.contains("(letter"),
    }
}

fn build() -> Vec<Axiom> {
    use Relation::{Eq, Leq};
    let mid = "(par (id r) (sym r r) (id r))";
    let mut out = vec![
        rule("A1", "(seq (par (id r) cup) (par cap (id r)))", Eq, R),
        rule("A2", "(seq (par cup (id l)) (par (id l) cap))", Eq, "(id l)"),
        rule("A3", "(seq cup (sym l r) cap)", Eq, "empty"),
        rule("B1", "(seq copy (par copy (id r)))", Eq, "(seq copy (par (id r) copy))"),
        rule("B2", "(seq copy (par (id r) discard))", Eq, R),
        rule("B3", "(seq copy (sym r r))", Eq, "copy"),
        rule("B4", "(seq (par merge (id r)) merge)", Eq, "(seq (par (id r) merge) merge)"),
        rule("B5", "(seq (par (id r) generate) merge)", Eq, R),
        rule("B6", "(seq (sym r r) merge)", Eq, "merge"),
        rule("B7", "(seq merge copy)", Eq, &format!("(seq (par copy copy) {mid} (par merge merge))")),
        rule("B8", "(seq generate copy)", Eq, "(par generate generate)"),
        rule("B9", "(seq merge discard)", Eq, "(par discard discard)"),
        rule("B10", "(seq copy merge)", Eq, R),
        rule("B11", "(seq generate discard)", Eq, "empty"),
    ];
    out.push(Axiom {
        name: "B12",
        lhs: trace(&parse("(seq merge copy)").expect("valid"), 1),
        rhs: parse(R).expect("valid"),
        relation: Relation::Eq,
        letter_param: false,
    });
    out.extend([
        rule("C1", "(seq wcomult (par wcomult (id r)))", Eq, "(seq wcomult (par (id r) wcomult))"),
        rule("C2", "(seq wcomult (par (id r) wcounit))", Eq, R),
        rule("C3", "(seq wcomult (sym r r))", Eq, "wcomult"),
        rule("C4", "(seq (par wmult (id r)) wmult)", Eq, "(seq (par (id r) wmult) wmult)"),
        rule("C5", "(seq (par (id r) wunit) wmult)", Eq, R),
        rule("C6", "(seq (sym r r) wmult)", Eq, "wmult"),
        rule("D1", "(seq wunit copy)", Eq, "(par wunit wunit)"),
        rule("D2", "(seq wmult copy)", Eq, &format!("(seq (par copy copy) {mid} (par wmult wmult))")),
        rule("D3", "(seq wmult discard)", Eq, "(par discard discard)"),
        rule("D4", "(seq generate wcomult)", Eq, "(par generate generate)"),
        rule("D5", "(seq merge wcomult)", Eq, &format!("(seq (par wcomult wcomult) {mid} (par merge merge))")),
        rule("D6", "(seq merge wcounit)", Eq, "(par wcounit wcounit)"),
        rule("E1", "(seq (par merge merge) wmult)", Leq, &format!("(seq {mid} (par wmult wmult) merge)")),
        rule("E2", "(seq (par generate generate) wmult)", Leq, "generate"),
        rule("E4", "(seq wcomult (par copy copy))", Leq, &format!("(seq copy (par wcomult wcomult) {mid})")),
        rule("E5", "(seq wcomult (par discard discard))", Leq, "discard"),
        rule("E6", "(seq (letter a) copy)", Eq, "(seq copy (par (letter a) (letter a)))"),
        rule("E7", "(seq (letter a) discard)", Eq, "discard"),
        rule("E8", "(seq (par (letter a) (letter a)) wmult)", Eq, "(seq wmult (letter a))"),
        rule("E9", "wunit", Eq, "(seq wunit (letter a))"),
        rule("E10", "(seq merge (letter a))", Eq, "(seq (par (letter a) (letter a)) merge)"),
        rule("E11", "(seq generate (letter a))", Eq, "generate"),
        rule("E12", "(seq wcomult (par (letter a) (letter a)))", Eq, "(seq (letter a) wcomult)"),
        rule("E13", "wcounit", Eq, "(seq (letter a) wcounit)"),
        rule("F1", "(seq merge copy)", Leq, "(par (id r) (id r))"),
        rule("F2", R, Leq, "(seq discard generate)"),
        rule("F3", R, Leq, "(seq copy merge)"),
        rule("F4", "(seq generate discard)", Leq, "empty"),
        rule("F5", "(par (id r) (id r))", Leq, "(seq wmult copy)"),
        rule("F6", "(seq discard wunit)", Leq, R),
        rule("F7", "(seq copy wmult)", Leq, R),
        rule("F8", "empty", Leq, "(seq wunit discard)"),
        rule("F9", "(par (id r) (id r))", Leq, "(seq merge wcomult)"),
        rule("F10", "(seq wcounit generate)", Leq, R),
        rule("F11", "(seq wcomult merge)", Leq, R),
        rule("F12", "empty", Leq, "(seq generate wcounit)"),
    ]);
    out
}

/// All rules, in block order.
pub fn axiom_catalog() -> &'static [Axiom] {
    static CATALOG: OnceLock<Vec<Axiom>> = OnceLock::new();
    CATALOG.get_or_init(build)
}

pub fn lookup(name: &str) -> Option<&'static Axiom> {
    axiom_catalog().iter().find(|a| a.name == name)
}

/// The catalog as text, one rule per line.
pub fn print_catalog() -> String {
    axiom_catalog()
        .iter()
        .map(|a| format!("{} {} {} {}\n", a.name, print(&a.lhs), a.relation, print(&a.rhs)))
        .collect()
}

/// Hex SHA-256 of [`print_catalog`]; certificates name the catalog they
/// were produced against.
pub fn catalog_fingerprint() -> String {
    static FP: OnceLock<String> = OnceLock::new();
    FP.get_or_init(|| hex::encode(Sha256::digest(print_catalog().as_bytes()))).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Generator;
    use crate::portgraph::graph_eq;

    #[test]
    fn catalog_shape() {
        let cat = axiom_catalog();
        assert_eq!(cat.len(), 51);
        for a in cat {
            assert!(a.lhs.same_type(&a.rhs), "{}", a.name);
        }
        let letter: Vec<&str> = cat.iter().filter(|a| a.letter_param).map(|a| a.name).collect();
        assert_eq!(letter, ["E6", "E7", "E8", "E9", "E10", "E11", "E12", "E13"]);
        assert!(lookup("E3").is_none());
    }

    #[test]
    fn lookups() {
        let b12 = lookup("B12").unwrap();
        assert!(b12.lhs.generators().contains(&Generator::Cap));
        let f1 = lookup("F1").unwrap();
        assert_eq!(f1.relation, Relation::Leq);
        assert!(graph_eq(&f1.lhs, &parse("(seq merge copy)").unwrap()).unwrap());
        assert!(lookup("Z9").is_none());
    }

    #[test]
    fn instantiation_substitutes_letter() {
        let e6 = lookup("E6").unwrap().instantiate('b');
        assert_eq!(e6.name, "E6:b");
        assert_eq!(e6.lhs.letters(), ['b'].into());
        assert_eq!(lookup("B1").unwrap().instances(&['a', 'b']).len(), 1);
    }

    #[test]
    fn fingerprint_is_stable_hex() {
        let fp = catalog_fingerprint();
        assert_eq!(fp.len(), 64);
        assert_eq!(fp, catalog_fingerprint());
    }
}
