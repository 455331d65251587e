//! Derivations and certificates.
//!
//! A derivation records each step as `(rule, direction, location)` together
//! with the canonical hashes of the diagram before and after it. Replaying
//! re-applies every step and compares hashes, so a certificate is checked
//! without trusting whoever produced it.
//!
//! Text format, one item per line:
//!
//! ```text
//! kda-certificate 1
//! catalog <sha256 of the axiom catalog>
//! alphabet a b
//! claim <= | =
//! lhs <diagram>
//! rhs <diagram>
//! chain fwd | rev
//! start <diagram>
//! step <rule> <fwd|bwd> <location> <hash before> <hash after>
//! ```

use std::fmt;

use thiserror::Error;

use crate::diagram::Diagram;
use crate::interp::Relation;
use crate::portgraph::diagram_hash;
use crate::regex::Alphabet;
use crate::text::{parse, print};

use super::catalog::catalog_fingerprint;
use super::rules::{apply_rule, Direction, Location, RewriteError, Rule};

const HEADER: &str = "kda-certificate 1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: String,
    pub dir: Direction,
    pub loc: Location,
    pub before: String,
    pub after: String,
}

/// A sequence of steps from `start` to `end`.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub start: Diagram,
    pub end: Diagram,
    pub steps: Vec<RewriteStep>,
    alphabet: Alphabet,
    end_hash: String,
}

impl Derivation {
    pub fn new(start: Diagram, alphabet: Alphabet) -> Self {
        let end_hash = diagram_hash(&start);
        Derivation {
            end: start.clone(),
            start,
            steps: Vec::new(),
            alphabet,
            end_hash,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Apply a rule to the current end and record it.
    pub fn step(&mut self, rule: &str, dir: Direction, loc: Location) -> Result<&mut Self, RewriteError> {
        let next = apply_rule(&self.end, rule, dir, &loc, &self.alphabet)?;
        let after = diagram_hash(&next);
        self.steps.push(RewriteStep {
            rule: rule.to_string(),
            dir,
            loc,
            before: std::mem::replace(&mut self.end_hash, after.clone()),
            after,
        });
        self.end = next;
        Ok(self)
    }

    /// `≤` if some step is an inequality, `=` otherwise.
    pub fn relation(&self) -> Relation {
        let leq = self
            .steps
            .iter()
            .any(|s| Rule::parse(&s.rule).map(|r| r.relation() == Relation::Leq).unwrap_or(true));
        if leq {
            Relation::Leq
        } else {
            Relation::Eq
        }
    }

    pub fn end_hash(&self) -> &str {
        &self.end_hash
    }

    /// Re-apply every step from `start`, checking the recorded hashes.
    pub fn replay(&self) -> Result<Diagram, ReplayError> {
        replay_steps(&self.start, &self.steps, &self.alphabet, 0)
    }
}

fn replay_steps(
    start: &Diagram,
    steps: &[RewriteStep],
    alphabet: &Alphabet,
    chain: usize,
) -> Result<Diagram, ReplayError> {
    let mut cur = start.clone();
    let mut hash = diagram_hash(&cur);
    for (i, s) in steps.iter().enumerate() {
        if hash != s.before {
            return Err(ReplayError::HashMismatch {
                chain,
                step: i,
                expected: s.before.clone(),
                found: hash,
            });
        }
        cur = apply_rule(&cur, &s.rule, s.dir, &s.loc, alphabet).map_err(|e| ReplayError::Step {
            chain,
            step: i,
            error: e,
        })?;
        hash = diagram_hash(&cur);
        if hash != s.after {
            return Err(ReplayError::HashMismatch {
                chain,
                step: i,
                expected: s.after.clone(),
                found: hash,
            });
        }
    }
    Ok(cur)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainDir {
    /// Read from `start` to its end.
    Forward,
    /// Read from its end back to `start`; only equalities are allowed.
    Reverse,
}

#[derive(Clone, Debug)]
pub struct Chain {
    pub dir: ChainDir,
    pub derivation: Derivation,
}

/// A claim `lhs = rhs` or `lhs ≤ rhs`, witnessed by linked chains of steps.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub catalog: String,
    pub alphabet: Alphabet,
    pub claim: Relation,
    pub lhs: Diagram,
    pub rhs: Diagram,
    pub chains: Vec<Chain>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("certificate was produced against a different axiom catalog")]
    CatalogMismatch,
    #[error("chain {chain}, step {step}: expected hash {expected}, found {found}")]
    HashMismatch {
        chain: usize,
        step: usize,
        expected: String,
        found: String,
    },
    #[error("chain {chain}, step {step}: {error}")]
    Step {
        chain: usize,
        step: usize,
        error: RewriteError,
    },
    #[error("chain {chain} is read in reverse but step {step} is an inequality")]
    ReversedInequality { chain: usize, step: usize },
    #[error("an equality claim uses an inequality step")]
    InequalityInEquation,
    #[error("chain {0} does not continue from the previous diagram")]
    Link(usize),
    #[error("the chains end at a different diagram than the claimed right side")]
    WrongEnd,
    #[error("chain {0} does not reach its recorded end term")]
    ChainEnd(usize),
    #[error("the two sides have different types")]
    TypeMismatch,
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

impl Certificate {
    pub fn new(claim: Relation, lhs: Diagram, rhs: Diagram, alphabet: Alphabet, chains: Vec<Chain>) -> Self {
        Certificate {
            catalog: catalog_fingerprint(),
            alphabet,
            claim,
            lhs,
            rhs,
            chains,
        }
    }

    pub fn steps(&self) -> usize {
        self.chains.iter().map(|c| c.derivation.steps.len()).sum()
    }

    /// Check the certificate from scratch.
    pub fn replay(&self) -> Result<(), ReplayError> {
        if self.catalog != catalog_fingerprint() {
            return Err(ReplayError::CatalogMismatch);
        }
        if !self.lhs.same_type(&self.rhs) {
            return Err(ReplayError::TypeMismatch);
        }
        let mut cur = diagram_hash(&self.lhs);
        for (i, c) in self.chains.iter().enumerate() {
            let d = &c.derivation;
            for (k, s) in d.steps.iter().enumerate() {
                let rel = Rule::parse(&s.rule)
                    .map_err(|error| ReplayError::Step {
                        chain: i,
                        step: k,
                        error,
                    })?
                    .relation();
                if rel == Relation::Leq {
                    if c.dir == ChainDir::Reverse {
                        return Err(ReplayError::ReversedInequality { chain: i, step: k });
                    }
                    if self.claim == Relation::Eq {
                        return Err(ReplayError::InequalityInEquation);
                    }
                }
            }
            let start = diagram_hash(&d.start);
            let end = diagram_hash(&replay_steps(&d.start, &d.steps, &self.alphabet, i)?);
            if end != diagram_hash(&d.end) {
                return Err(ReplayError::ChainEnd(i));
            }
            let (from, to) = match c.dir {
                ChainDir::Forward => (start, end),
                ChainDir::Reverse => (end, start),
            };
            if from != cur {
                return Err(ReplayError::Link(i));
            }
            cur = to;
        }
        if cur != diagram_hash(&self.rhs) {
            return Err(ReplayError::WrongEnd);
        }
        Ok(())
    }

    /// Parse the text format; the result still has to be replayed.
    pub fn parse(text: &str) -> Result<Certificate, ReplayError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, msg: &str| ReplayError::Format {
            line: line + 1,
            msg: msg.to_string(),
        };
        let mut field = |key: &str| -> Result<(usize, String), ReplayError> {
            let (n, l) = lines.next().ok_or_else(|| err(usize::MAX - 1, "unexpected end of input"))?;
            if key.is_empty() {
                return Ok((n, l.to_string()));
            }
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' ').or(if r.is_empty() { Some("") } else { None }))
                .map(|r| (n, r.to_string()))
                .ok_or_else(|| err(n, &format!("expected '{key}'")))
        };
        let (n, h) = field("")?;
        if h.trim() != HEADER {
            return Err(err(n, "missing certificate header"));
        }
        let (_, catalog) = field("catalog")?;
        let (n, a) = field("alphabet")?;
        let alphabet = Alphabet::parse(&a).map_err(|e| err(n, &e.to_string()))?;
        let (n, c) = field("claim")?;
        let claim = match c.trim() {
            "<=" => Relation::Leq,
            "=" => Relation::Eq,
            _ => return Err(err(n, "claim must be '<=' or '='")),
        };
        let diagram = |n: usize, s: &str| parse(s).map_err(|e| err(n, &e.to_string()));
        let (n, l) = field("lhs")?;
        let lhs = diagram(n, &l)?;
        let (n, r) = field("rhs")?;
        let rhs = diagram(n, &r)?;
        let mut chains: Vec<Chain> = Vec::new();
        for (n, line) in lines {
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["chain", dir] => {
                    let dir = match *dir {
                        "fwd" => ChainDir::Forward,
                        "rev" => ChainDir::Reverse,
                        _ => return Err(err(n, "chain direction must be 'fwd' or 'rev'")),
                    };
                    chains.push(Chain {
                        dir,
                        derivation: Derivation::new(Diagram::empty(), alphabet.clone()),
                    });
                }
                ["start", ..] => {
                    let c = chains.last_mut().ok_or_else(|| err(n, "'start' outside a chain"))?;
                    let d = diagram(n, line.trim_start().trim_start_matches("start").trim())?;
                    c.derivation = Derivation::new(d, alphabet.clone());
                }
                ["STEP", k, rule, dir, loc, before, after] => {
                    let c = chains.last_mut().ok_or_else(|| err(n, "'STEP' outside a chain"))?;
                    if k.parse::<usize>().ok() != Some(c.derivation.steps.len() + 1) {
                        return Err(err(n, "steps must be numbered 1, 2, ... within a chain"));
                    }
                    c.derivation.steps.push(RewriteStep {
                        rule: rule.to_string(),
                        dir: dir.parse().map_err(|e: String| err(n, &e))?,
                        loc: loc.parse().map_err(|e: RewriteError| err(n, &e.to_string()))?,
                        before: before.to_string(),
                        after: after.to_string(),
                    });
                }
                ["end", ..] => {
                    let c = chains.last_mut().ok_or_else(|| err(n, "'end' outside a chain"))?;
                    c.derivation.end = diagram(n, line.trim_start().trim_start_matches("end").trim())?;
                    c.derivation.end_hash = diagram_hash(&c.derivation.end);
                }
                _ => return Err(err(n, "expected 'chain', 'start', 'STEP' or 'end'")),
            }
        }
        Ok(Certificate {
            catalog,
            alphabet,
            claim,
            lhs,
            rhs,
            chains,
        })
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{HEADER}")?;
        writeln!(f, "catalog {}", self.catalog)?;
        let letters: Vec<String> = self.alphabet.letters().map(|c| c.to_string()).collect();
        writeln!(f, "alphabet {}", letters.join(" "))?;
        writeln!(f, "claim {}", self.claim)?;
        writeln!(f, "lhs {}", print(&self.lhs))?;
        writeln!(f, "rhs {}", print(&self.rhs))?;
        for c in &self.chains {
            let dir = match c.dir {
                ChainDir::Forward => "fwd",
                ChainDir::Reverse => "rev",
            };
            writeln!(f, "chain {dir}")?;
            writeln!(f, "start {}", print(&c.derivation.start))?;
            for (k, s) in c.derivation.steps.iter().enumerate() {
                writeln!(f, "STEP {} {} {} {} {} {}", k + 1, s.rule, s.dir, s.loc, s.before, s.after)?;
            }
            writeln!(f, "end {}", print(&c.derivation.end))?;
        }
        Ok(())
    }
}
