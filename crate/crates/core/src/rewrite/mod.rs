//! Rewriting with the axiom catalog, replayable certificates, and the
//! diagrammatic determinisation and minimisation procedures.

pub mod catalog;
pub mod derived;
pub mod cert;
pub mod procedures;
pub mod rules;

pub use catalog::{axiom_catalog, catalog_fingerprint, lookup, print_catalog, Axiom};
pub use cert::{Certificate, Chain, ChainDir, Derivation, ReplayError, RewriteStep};
pub use procedures::{
    codeterminise, coefficient, determinise, minimise_diagram, minimise_representation, powerset_matrix,
    prove_equal, prove_equal_coefficients, prove_leq, Counterexample, PowersetMatrix, Reduction, Verdict,
};
pub use rules::{apply_axiom, apply_rule, Direction, Lemma, Location, Mode, RewriteError, Rule};
pub use derived::{check_derived_lemmas, LemmaReport, DERIVED_LEMMAS};
