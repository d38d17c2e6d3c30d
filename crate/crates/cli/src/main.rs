use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ldlf::afw::build_afw;
use ldlf::automata::{afw_to_nfa, nfa_to_dfa, AutomataError, DEFAULT_STATE_CAP};
use ldlf::corpus::{corpus, small_alphabet};
use ldlf::formula::{closure, desugar, nnf, parse, positive_closure, print};
use ldlf::mso::{closure_encoding, emit_mona, standard_translation, MsoError};
use ldlf::trace::{random_trace, TraceError};
use ldlf::xcheck::{xcheck_compiled, xcheck_traces, Compiled, Engine, Report, XcheckError};
use ldlf::{Atom, Dialect, Formula, Trace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_REJECTED: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "ldlf", version, about = "Compile and check linear dynamic logic formulas over finite traces")]
struct Cli {
    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Syntax of formula inputs.
    #[arg(long, global = true, value_enum, default_value_t = DialectArg::Canonical)]
    dialect: DialectArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print it back.
    Parse {
        input: PathBuf,
        /// Output syntax; defaults to the input dialect.
        #[arg(long, value_enum)]
        to: Option<DialectArg>,
    },
    /// Print the negation normal form.
    Nnf {
        input: PathBuf,
        /// Desugar derived operators first.
        #[arg(long)]
        core: bool,
    },
    /// List the closure of the desugared formula, one member per line.
    Closure {
        input: PathBuf,
        /// Include the negated members.
        #[arg(long)]
        negations: bool,
    },
    /// Build an automaton and write it out.
    Compile {
        input: PathBuf,
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Format::Facts)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Decide whether a trace satisfies a formula. Exits 0 when accepted
    /// and 1 when rejected.
    Check {
        input: PathBuf,
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckEngine::Direct)]
        engine: CheckEngine,
        #[arg(long, value_enum, default_value_t = TraceFormat::Json)]
        trace_format: TraceFormat,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
        /// Report the elapsed time on standard error.
        #[arg(long)]
        timing: bool,
    },
    /// Compare engines on every bounded trace. Exits 0 iff all agree.
    Xcheck {
        /// Formula file; omit when using --corpus.
        #[arg(required_unless_present = "corpus", conflicts_with = "corpus")]
        input: Option<PathBuf>,
        /// Run over the built-in corpus.
        #[arg(long)]
        corpus: bool,
        /// Comma-separated alphabet; defaults to the formula's atoms, or
        /// to a two-atom alphabet per corpus formula.
        #[arg(long, value_delimiter = ',')]
        atoms: Option<Vec<String>>,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, value_delimiter = ',', default_value = "direct,afw,nfa,dfa,dfa-min")]
        engines: Vec<Engine>,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
        /// Additionally check this many random traces.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 8)]
        random_max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the MSO translation at the first position as a MONA program.
    EmitMso {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Flavor::St)]
        flavor: Flavor,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Canonical,
    Theory,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Dialect {
        match d {
            DialectArg::Canonical => Dialect::Canonical,
            DialectArg::Theory => Dialect::TheoryGrammar,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Afw,
    Nfa,
    Dfa,
    DfaMin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Facts,
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckEngine {
    Direct,
    Afw,
    Nfa,
    Dfa,
    DfaMin,
    MsoSt,
    MsoEnc,
}

impl From<CheckEngine> for Engine {
    fn from(e: CheckEngine) -> Engine {
        match e {
            CheckEngine::Direct => Engine::Direct,
            CheckEngine::Afw => Engine::Afw,
            CheckEngine::Nfa => Engine::Nfa,
            CheckEngine::Dfa => Engine::Dfa,
            CheckEngine::DfaMin => Engine::DfaMin,
            CheckEngine::MsoSt => Engine::MsoSt,
            CheckEngine::MsoEnc => Engine::MsoEnc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Json,
    Facts,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flavor {
    St,
    Enc,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Resource limits map to 3, everything else to 2.
fn exit_code(e: &anyhow::Error) -> u8 {
    let resource = e.chain().any(|c| {
        matches!(c.downcast_ref(), Some(AutomataError::StateLimit { .. }))
            || matches!(c.downcast_ref(), Some(MsoError::ResourceLimit(_)))
            || matches!(c.downcast_ref(), Some(TraceError::AlphabetTooLarge(_)))
            || matches!(
                c.downcast_ref(),
                Some(XcheckError::Automata(AutomataError::StateLimit { .. }))
                    | Some(XcheckError::Mso(MsoError::ResourceLimit(_)))
                    | Some(XcheckError::Trace(TraceError::AlphabetTooLarge(_)))
            )
    });
    if resource {
        EXIT_RESOURCE
    } else {
        EXIT_MALFORMED
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let dialect = Dialect::from(cli.dialect);
    match &cli.command {
        Command::Parse { input, to } => {
            let f = read_formula(input, dialect)?;
            let to = to.map(Dialect::from).unwrap_or(dialect);
            emit(cli, &format!("{}\n", print(&f, to)))?;
        }
        Command::Nnf { input, core } => {
            let mut f = read_formula(input, dialect)?;
            if *core {
                f = desugar(&f);
            }
            emit(cli, &format!("{}\n", print(&nnf(&f), dialect)))?;
        }
        Command::Closure { input, negations } => {
            let f = desugar(&read_formula(input, dialect)?);
            let members = if *negations { closure(&f) } else { positive_closure(&f) };
            let text: String = members.iter().map(|g| format!("{}\n", print(g, dialect))).collect();
            emit(cli, &text)?;
        }
        Command::Compile {
            input,
            target,
            format,
            state_cap,
        } => {
            let f = read_formula(input, dialect)?;
            let (text, states) = compile(&f, *target, *format, *state_cap)?;
            eprintln!("{states} states");
            emit(cli, &text)?;
        }
        Command::Check {
            input,
            trace,
            engine,
            trace_format,
            state_cap,
            timing,
        } => {
            let f = read_formula(input, dialect)?;
            let t = read_trace(trace, *trace_format, &f)?;
            let engine = Engine::from(*engine);
            let start = Instant::now();
            let compiled = Compiled::new(&f, &[engine], *state_cap)?;
            let accepted = compiled.accepts(engine, &t)?;
            if *timing {
                eprintln!("{engine}: {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
            }
            let verdict = if accepted { "accepted" } else { "rejected" };
            emit(cli, &format!("{verdict} by {engine}\n"))?;
            return Ok(if accepted { 0 } else { EXIT_REJECTED });
        }
        Command::Xcheck {
            input,
            corpus: use_corpus,
            atoms,
            max_len,
            engines,
            state_cap,
            random,
            random_max_len,
            seed,
        } => {
            let fixed: Option<BTreeSet<Atom>> = match atoms {
                Some(names) => Some(
                    names
                        .iter()
                        .map(|n| Atom::new(n.trim()).with_context(|| format!("bad atom `{n}`")))
                        .collect::<Result<_>>()?,
                ),
                None => None,
            };
            let targets: Vec<(String, Formula)> = if *use_corpus {
                corpus().into_iter().map(|e| (e.name, e.formula)).collect()
            } else {
                let path = input.as_ref().expect("clap requires an input without --corpus");
                vec![(path.display().to_string(), read_formula(path, dialect)?)]
            };
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut text = String::new();
            let mut unanimous = true;
            for (name, f) in &targets {
                let alphabet = match &fixed {
                    Some(a) => a.clone(),
                    None if *use_corpus => small_alphabet(f, 2),
                    None => f.atoms(),
                };
                let compiled = Compiled::new(f, engines, *state_cap)?;
                let report = xcheck_compiled(&compiled, &alphabet, *max_len, engines)?;
                text.push_str(&report_line(name, "exhaustive", &report));
                unanimous &= report.unanimous();
                if *random > 0 {
                    let traces: Vec<Trace> = (0..*random)
                        .map(|_| random_trace(&mut rng, &alphabet, *random_max_len))
                        .collect();
                    let report = xcheck_traces(&compiled, traces, engines)?;
                    text.push_str(&report_line(name, "random", &report));
                    unanimous &= report.unanimous();
                }
            }
            text.push_str(if unanimous { "unanimous\n" } else { "disagreement\n" });
            emit(cli, &text)?;
            return Ok(if unanimous { 0 } else { EXIT_REJECTED });
        }
        Command::EmitMso { input, flavor } => {
            let f = read_formula(input, dialect)?;
            let psi = match flavor {
                Flavor::St => standard_translation("t", &f),
                Flavor::Enc => closure_encoding("t", &f),
            };
            emit(cli, &emit_mona(&psi, &f.atoms()))?;
        }
    }
    Ok(0)
}

fn compile(f: &Formula, target: Target, format: Format, cap: usize) -> Result<(String, usize)> {
    let afw = build_afw(f);
    if let Target::Afw = target {
        let text = match format {
            Format::Facts => afw.to_facts(),
            Format::Dot => afw.to_dot(),
            Format::Json => afw.to_json(),
        };
        return Ok((text, afw.num_states()));
    }
    let nfa = afw_to_nfa(&afw);
    if let Target::Nfa = target {
        let text = match format {
            Format::Facts => nfa.to_facts(),
            Format::Dot => nfa.to_dot(),
            Format::Json => nfa.to_json(),
        };
        return Ok((text, nfa.num_states()));
    }
    let mut dfa = nfa_to_dfa(&nfa, cap)?;
    if let Target::DfaMin = target {
        dfa = dfa.minimize();
    }
    let text = match format {
        Format::Facts => dfa.to_facts(),
        Format::Dot => dfa.to_dot(),
        Format::Json => dfa.to_json(),
    };
    Ok((text, dfa.num_states()))
}

fn report_line(name: &str, kind: &str, r: &Report) -> String {
    let counts: Vec<String> = r.accepted.iter().map(|(e, n)| format!("{e}={n}")).collect();
    let mut line = format!(
        "{name}: {kind} traces={} accepted[{}] disagreements={}\n",
        r.traces,
        counts.join(" "),
        r.disagreements
    );
    if let Some((t, verdicts)) = &r.counterexample {
        let v: Vec<String> = verdicts.iter().map(|(e, b)| format!("{e}={b}")).collect();
        line.push_str(&format!("  counterexample {} [{}]\n", t.to_json(), v.join(" ")));
    }
    line
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn read_formula(path: &Path, dialect: Dialect) -> Result<Formula> {
    let text = read_input(path)?;
    parse(text.trim(), dialect).with_context(|| format!("parsing {}", path.display()))
}

fn read_trace(path: &Path, format: TraceFormat, f: &Formula) -> Result<Trace> {
    let text = read_input(path)?;
    let t = match format {
        TraceFormat::Json => Trace::from_json(&text),
        TraceFormat::Facts => {
            let table = build_afw(f).symbols;
            if text.contains("prop(") {
                Trace::from_facts(&text, None)
            } else {
                Trace::from_facts(&text, Some(&table))
            }
        }
    }
    .with_context(|| format!("reading trace {}", path.display()))?;
    if t.is_empty() {
        bail!("trace {} is empty", path.display());
    }
    Ok(t.with_alphabet(f.atoms()))
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
