//! `kda`: command-line front end.
//!
//! Exit codes: 0 on success or a true verdict, 1 on a false verdict, 2 on
//! usage or input errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use kda::automata::{epsilon_elimination, parse_nfa, print_nfa, Nfa};
use kda::encode::{
    nfa_to_diagram, representation_of, representation_to_dfa, representation_to_nfa, trace_canonical_form,
    Representation,
};
use kda::interp::{check_axiom, AxiomInstance};
use kda::lattice::{exploratory_models, standard_models, LatticeModel};
use kda::regex::{format_word, parse_regex, Alphabet};
use kda::render::{render_dot, render_text};
use kda::rewrite::derived::{check_lemma, derived_lemma_instances};
use kda::rewrite::{
    axiom_catalog, catalog_fingerprint, determinise, minimise_diagram, prove_equal, prove_equal_coefficients,
    prove_leq, Certificate, Chain, ChainDir, Derivation, Mode, Verdict,
};
use kda::text::{parse, print};
use kda::Diagram;

#[derive(Parser)]
#[command(name = "kda", about = "String diagrams for finite-state automata", disable_version_flag = true)]
struct Cli {
    /// Print the version and the axiom-catalog fingerprint.
    #[arg(short = 'V', long = "version")]
    version: bool,
    /// Alphabet, as letters separated by spaces; merged with the letters of the inputs.
    #[arg(long, global = true)]
    alphabet: Option<String>,
    /// Worker threads for the exhaustive checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Reach,
}

#[derive(Clone, Copy, ValueEnum)]
enum Models {
    Std,
    Exploratory,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a regular expression as a diagram.
    Regex2diag { regex: String },
    /// Encode an NFA (text format) as a diagram.
    Nfa2diag { nfa: String },
    /// Extract an NFA from a ▶ → ▶ automaton-diagram.
    Diag2nfa {
        diagram: String,
        /// Print the trace canonical form instead.
        #[arg(long)]
        trace_form: bool,
    },
    /// Subset construction on a diagram or NFA, as a derivation.
    Determinise {
        input: String,
        #[arg(long, value_enum, default_value = "reach")]
        mode: ModeArg,
        /// Treat the input as a regular expression.
        #[arg(long)]
        regex: bool,
        /// Write the certificate to this file.
        #[arg(long)]
        cert: Option<String>,
    },
    /// Minimal complete DFA of a diagram or NFA, as a derivation.
    Minimise {
        input: String,
        #[arg(long)]
        regex: bool,
        #[arg(long)]
        cert: Option<String>,
    },
    /// Decide equality; prints EQUAL or DIFFERENT with a distinguishing word.
    Equiv {
        #[arg(long, conflicts_with = "diagram", required_unless_present = "diagram")]
        regex: bool,
        #[arg(long)]
        diagram: bool,
        lhs: String,
        rhs: String,
        #[arg(long)]
        cert: Option<String>,
    },
    /// Decide language inclusion of the first input in the second.
    Leq {
        #[arg(long, conflicts_with = "diagram", required_unless_present = "diagram")]
        regex: bool,
        #[arg(long)]
        diagram: bool,
        lhs: String,
        rhs: String,
        #[arg(long)]
        cert: Option<String>,
    },
    /// Check every axiom on finite lattice models.
    CheckAxioms {
        #[arg(long, value_enum, default_value = "std")]
        models: Models,
        /// Only this rule (e.g. B2) or instance (e.g. E6:a).
        #[arg(long)]
        axiom: Option<String>,
    },
    /// Check the derived lemmas on their enumerated instances.
    CheckLemmas {
        #[arg(long, value_enum, default_value = "std")]
        models: Models,
    },
    /// Replay a certificate; exit 0 iff every step checks.
    Replay { cert: String },
    /// Draw a diagram.
    Render {
        diagram: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

/// A false verdict: printed normally, exits with 1.
struct Negative;

type Outcome = Result<std::result::Result<(), Negative>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Negative)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Standard input for `-`, the contents of the file named `arg` if there is
/// one, else `arg` itself.
fn read_input(arg: &str) -> Result<String> {
    if arg == "-" {
        return std::io::read_to_string(std::io::stdin()).context("reading standard input");
    }
    let p = Path::new(arg);
    if p.is_file() {
        fs::read_to_string(p).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_string())
    }
}

fn read_diagram(arg: &str) -> Result<Diagram> {
    parse(read_input(arg)?.trim()).map_err(|e| anyhow!("diagram: {e}"))
}

fn looks_like_nfa(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("alphabet:"))
}

fn alphabet_with(base: &Option<String>, letters: impl IntoIterator<Item = char>) -> Result<Alphabet> {
    let given = match base {
        Some(s) => Alphabet::parse(s).map_err(|e| anyhow!("--alphabet: {e}"))?,
        None => Alphabet::new(Vec::new()).expect("empty alphabet"),
    };
    let extra = Alphabet::new(letters.into_iter().collect::<std::collections::BTreeSet<_>>())
        .map_err(|e| anyhow!("{e}"))?;
    Ok(given.union(&extra))
}

/// A ▶ → ▶ diagram from a diagram, NFA or (with `regex`) regex input.
fn automaton_input(arg: &str, regex: bool) -> Result<Diagram> {
    let text = read_input(arg)?;
    if regex {
        return Ok(parse_regex(text.trim()).map_err(|e| anyhow!("regex: {e}"))?.to_diagram());
    }
    if looks_like_nfa(&text) {
        let n = parse_nfa(&text).map_err(|e| anyhow!("nfa: {e}"))?;
        return Ok(nfa_to_diagram(&n));
    }
    parse(text.trim()).map_err(|e| anyhow!("diagram: {e}"))
}

fn write_cert(path: &str, cert: &Certificate) -> Result<()> {
    fs::write(path, cert.to_string()).with_context(|| format!("writing {path}"))
}

fn single_chain_cert(derivation: Derivation) -> Certificate {
    let claim = derivation.relation();
    let (lhs, rhs) = (derivation.start.clone(), derivation.end.clone());
    let alphabet = derivation.alphabet().clone();
    Certificate::new(
        claim,
        lhs,
        rhs,
        alphabet,
        vec![Chain {
            dir: ChainDir::Forward,
            derivation,
        }],
    )
}

fn print_rep(rep: &Representation) -> String {
    print_nfa(&representation_to_nfa(rep))
}

fn pair_inputs(regex: bool, lhs: &str, rhs: &str) -> Result<(Diagram, Diagram)> {
    if regex {
        let e = parse_regex(read_input(lhs)?.trim()).map_err(|e| anyhow!("left regex: {e}"))?;
        let f = parse_regex(read_input(rhs)?.trim()).map_err(|e| anyhow!("right regex: {e}"))?;
        Ok((e.to_diagram(), f.to_diagram()))
    } else {
        Ok((read_diagram(lhs)?, read_diagram(rhs)?))
    }
}

fn models_for(which: Models, alphabet: &Alphabet) -> Vec<LatticeModel> {
    match which {
        Models::Std => standard_models(alphabet),
        Models::Exploratory => exploratory_models(alphabet),
    }
}

fn run(cli: Cli) -> Outcome {
    if cli.version {
        println!("kda {}", env!("CARGO_PKG_VERSION"));
        println!("catalog {}", catalog_fingerprint());
        return Ok(Ok(()));
    }
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    let Some(command) = cli.command else {
        bail!("no command given; see --help");
    };
    let alpha = &cli.alphabet;
    match command {
        Command::Regex2diag { regex } => {
            let e = parse_regex(read_input(&regex)?.trim()).map_err(|e| anyhow!("regex: {e}"))?;
            println!("{}", print(&e.to_diagram()));
        }
        Command::Nfa2diag { nfa } => {
            let n = parse_nfa(&read_input(&nfa)?).map_err(|e| anyhow!("nfa: {e}"))?;
            println!("{}", print(&nfa_to_diagram(&n)));
        }
        Command::Diag2nfa { diagram, trace_form } => {
            let d = read_diagram(&diagram)?;
            if trace_form {
                let tf = trace_canonical_form(&d)?;
                let letters: Vec<String> = tf.letters.iter().map(|c| c.to_string()).collect();
                println!("wires: {}", tf.l);
                println!("letters: {}", letters.join(" "));
                println!("relation: {}", print(&tf.r));
            } else {
                let sigma = alphabet_with(alpha, d.letters())?;
                print!("{}", print_rep(&representation_of(&d, &sigma)?));
            }
        }
        Command::Determinise { input, mode, regex, cert } => {
            let text = read_input(&input)?;
            let rep = if !regex && looks_like_nfa(&text) {
                let n = parse_nfa(&text).map_err(|e| anyhow!("nfa: {e}"))?;
                let sigma = alphabet_with(alpha, n.alphabet.letters().copied())?;
                let n = Nfa { alphabet: sigma, ..epsilon_elimination(&n) };
                Representation::from_nfa(&n)?
            } else {
                let d = automaton_input(&input, regex)?;
                representation_of(&d, &alphabet_with(alpha, d.letters())?)?
            };
            let mode = match mode {
                ModeArg::Full => Mode::Full,
                ModeArg::Reach => Mode::Reach,
            };
            let red = determinise(&rep, mode)?;
            print!("{}", print_rep(&red.result));
            if let Some(path) = cert {
                write_cert(&path, &single_chain_cert(red.derivation))?;
            }
        }
        Command::Minimise { input, regex, cert } => {
            let d = automaton_input(&input, regex)?;
            let sigma = alphabet_with(alpha, d.letters())?;
            let red = minimise_diagram(&d, &sigma)?;
            let dfa = representation_to_dfa(&red.result)?;
            print!("{}", print_nfa(&dfa.to_nfa()));
            if let Some(path) = cert {
                write_cert(&path, &single_chain_cert(red.derivation))?;
            }
        }
        Command::Equiv { regex, lhs, rhs, cert, .. } => {
            let (c, d) = pair_inputs(regex, &lhs, &rhs)?;
            let sigma = alphabet_with(alpha, c.letters().into_iter().chain(d.letters()))?;
            let unary = c.dom().len() == 1 && c.cod().len() == 1;
            let verdicts = if unary {
                vec![((0, 0), prove_equal(&c, &d, &sigma)?)]
            } else {
                prove_equal_coefficients(&c, &d, &sigma)?
            };
            let mut equal = true;
            for ((i, j), v) in &verdicts {
                if let Verdict::Refuted(w) = v {
                    if equal {
                        println!("DIFFERENT");
                    }
                    equal = false;
                    if !unary {
                        println!("coefficient: {i} {j}");
                    }
                    println!("word: {}", format_word(&w.word));
                    println!("accepted by: {}", if w.in_lhs { "left" } else { "right" });
                }
            }
            if !equal {
                return Ok(Err(Negative));
            }
            println!("EQUAL");
            if let Some(path) = cert {
                for ((i, j), v) in &verdicts {
                    if let Verdict::Proved(c) = v {
                        let file = if unary { path.clone() } else { format!("{path}.{i}.{j}") };
                        write_cert(&file, c)?;
                    }
                }
            }
        }
        Command::Leq { regex, lhs, rhs, cert, .. } => {
            let (c, d) = pair_inputs(regex, &lhs, &rhs)?;
            let sigma = alphabet_with(alpha, c.letters().into_iter().chain(d.letters()))?;
            match prove_leq(&c, &d, &sigma)? {
                Verdict::Proved(proof) => {
                    println!("INCLUDED");
                    if let Some(path) = cert {
                        write_cert(&path, &proof)?;
                    }
                }
                Verdict::Refuted(w) => {
                    println!("NOT INCLUDED");
                    println!("word: {}", format_word(&w.word));
                    return Ok(Err(Negative));
                }
            }
        }
        Command::CheckAxioms { models, axiom } => {
            let sigma = match alpha {
                Some(s) => Alphabet::parse(s).map_err(|e| anyhow!("--alphabet: {e}"))?,
                None => Alphabet::parse("a b").expect("letters"),
            };
            return check_axioms(&models_for(models, &sigma), &sigma, axiom.as_deref());
        }
        Command::CheckLemmas { models } => {
            let sigma = Alphabet::parse("a b").expect("letters");
            let ms = models_for(models, &sigma);
            let mut ok = true;
            println!("{:<24}{:>10}{:>10}{:>10}  result", "lemma", "instances", "checks", "skipped");
            for (name, instances) in derived_lemma_instances() {
                let r = check_lemma(name, &instances, &ms);
                ok &= r.passed();
                let verdict = if r.passed() {
                    "PASS".to_string()
                } else {
                    format!("FAIL ({} failed, {} unchecked)", r.failures.len(), r.unchecked.len())
                };
                println!("{:<24}{:>10}{:>10}{:>10}  {verdict}", r.lemma, r.instances, r.checks, r.skipped);
                for f in r.failures.iter().take(3) {
                    println!("  {} on {}", f.instance, f.model);
                }
            }
            if !ok {
                return Ok(Err(Negative));
            }
        }
        Command::Replay { cert } => {
            let text = read_input(&cert)?;
            let result = Certificate::parse(&text).and_then(|c| c.replay().map(|()| c));
            match result {
                Ok(c) => println!("OK {} steps in {} chains", c.steps(), c.chains.len()),
                Err(e) => {
                    println!("FAILED {e}");
                    return Ok(Err(Negative));
                }
            }
        }
        Command::Render { diagram, format } => {
            let d = read_diagram(&diagram)?;
            match format {
                Format::Dot => print!("{}", render_dot(&d)),
                Format::Text => print!("{}", render_text(&d)),
            }
        }
    }
    Ok(Ok(()))
}

/// One row per axiom instance, one column per lattice; a cell counts the
/// models (letter actions) on which the instance fails.
fn check_axioms(models: &[LatticeModel], sigma: &Alphabet, only: Option<&str>) -> Outcome {
    let instances: Vec<AxiomInstance> = axiom_catalog()
        .iter()
        .flat_map(|a| a.instances(sigma.as_slice()))
        .filter(|i| match only {
            None => true,
            Some(name) => i.name == name || i.name.split(':').next() == Some(name),
        })
        .collect();
    if instances.is_empty() {
        bail!("no axiom named {}", only.unwrap_or(""));
    }
    let mut lattices: Vec<String> = Vec::new();
    for m in models {
        let n = m.lattice().name().to_string();
        if !lattices.contains(&n) {
            lattices.push(n);
        }
    }
    let jobs: Vec<(usize, &LatticeModel)> = (0..instances.len())
        .flat_map(|i| models.iter().map(move |m| (i, m)))
        .collect();
    let results: Vec<(usize, String, bool)> = jobs
        .par_iter()
        .map(|(i, m)| {
            let ok = check_axiom(&instances[*i], m).is_ok_and(|r| r.passes(instances[*i].relation));
            (*i, m.lattice().name().to_string(), ok)
        })
        .collect();
    let mut cells: BTreeMap<(usize, String), (usize, usize)> = BTreeMap::new();
    for (i, l, ok) in results {
        let c = cells.entry((i, l)).or_default();
        c.0 += 1;
        c.1 += usize::from(!ok);
    }
    let width = lattices.iter().map(|l| l.len()).max().unwrap_or(4).max(9) + 2;
    let mut header = format!("{:<8}{:<4}", "axiom", "rel");
    for l in &lattices {
        header.push_str(&format!("{l:<width$}"));
    }
    println!("{}", header.trim_end());
    let mut failed = 0;
    for (i, a) in instances.iter().enumerate() {
        let mut row = format!("{:<8}{:<4}", a.name, a.relation.symbol());
        for l in &lattices {
            let cell = match cells.get(&(i, l.clone())) {
                Some((_, 0)) => "PASS".to_string(),
                Some((n, k)) => {
                    failed += 1;
                    format!("FAIL {k}/{n}")
                }
                None => "-".to_string(),
            };
            row.push_str(&format!("{cell:<width$}"));
        }
        println!("{}", row.trim_end());
    }
    println!(
        "{} instances, {} models: {}",
        instances.len(),
        models.len(),
        if failed == 0 { "all PASS".to_string() } else { format!("{failed} failing cells") }
    );
    Ok(if failed == 0 { Ok(()) } else { Err(Negative) })
}
