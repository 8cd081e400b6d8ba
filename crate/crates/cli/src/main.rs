use std::collections::BTreeSet;
use std::io::Read;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lsc_core::corpus::{count_terms, for_each_term, CorpusSpec};
use lsc_core::equiv::{default_bound, equiv_oracle, equiv_via_nets};
use lsc_core::net::{from_json, net_hash, to_dot, to_json, Net};
use lsc_core::netrewrite::normalize_net;
use lsc_core::readback::{is_correct, read_back, read_back_all};
use lsc_core::rewrite::{normalize_traced, RewriteError, Strategy};
use lsc_core::suite::{self, run_suite, SuiteConfig, SuiteName};
use lsc_core::{parse, translate, Expression, VarName};

/// Terms and proof nets of the linear substitution calculus.
#[derive(Parser)]
#[command(name = "lsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Term,
    Net,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Nets,
    Closure,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print it back with its size and free variables.
    Parse {
        /// The term, or `-` for standard input.
        term: String,
    },
    /// Translate a term to a net.
    Translate {
        term: String,
        /// Extra weakened free variables.
        #[arg(long, value_delimiter = ',')]
        weaken: Vec<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Validate a net file; exit status 1 if it is not a (correct) net.
    Check {
        /// JSON net file, or `-`.
        net: String,
        /// Also run the correctness criterion.
        #[arg(long)]
        correctness: bool,
    },
    /// Read a correct net back to an expression.
    Readback {
        net: String,
        /// Print every read back instead of the deterministic one.
        #[arg(long)]
        all: bool,
    },
    /// Normalise a term or a net, printing one line per step.
    Reduce {
        /// A term (`--side term`) or a JSON net file (`--side net`).
        input: String,
        #[arg(long, value_enum, default_value = "term")]
        side: Side,
        #[arg(long, default_value = "leftmost-outermost")]
        strategy: Strategy,
        #[arg(long, default_value_t = 1000)]
        fuel: usize,
    },
    /// Decide structural equivalence; exit status 1 if not equivalent.
    Equiv {
        t: String,
        s: String,
        #[arg(long, value_enum, default_value = "nets")]
        method: Method,
    },
    /// Check the commuting squares between term and net steps, and the
    /// bisimulation property, on the corpus.
    BisimCheck {
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        #[arg(long)]
        json: bool,
    },
    /// Convert a JSON net file to DOT or normalised JSON.
    Export {
        net: String,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// Enumerate the corpus of well-named terms.
    Corpus {
        #[arg(long, default_value_t = 5)]
        max_size: usize,
        /// Free names.
        #[arg(long, value_delimiter = ',', default_value = "x,y,z")]
        pool: Vec<String>,
        /// Print the number of terms of each size instead of the terms.
        #[arg(long)]
        count: bool,
    },
    /// Run an acceptance suite: static, quotient, dynamic, bisim or all.
    Suite {
        name: SuiteName,
        /// Use one corpus bound for every check instead of the defaults.
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Ok,
    Failed,
}

/// Errors in the input rather than in the checked property; they map to
/// exit status 2.
#[derive(Debug)]
struct Input(anyhow::Error);

impl std::fmt::Display for Input {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Input {}

fn input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| Input(e).into())
}

fn read_text(arg: &str) -> Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        Ok(arg.to_owned())
    }
}

fn read_term(arg: &str) -> Result<Expression> {
    input(read_text(arg).and_then(|s| parse(s.trim()).map_err(Into::into)))
}

fn read_net(path: &str) -> Result<Net> {
    input((|| {
        let text = if path == "-" {
            read_text(path)?
        } else {
            std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?
        };
        Ok(from_json(&text)?)
    })())
}

fn print_net(net: &Net, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&to_json(net))?),
        Format::Dot => print!("{}", to_dot(net)),
    }
    Ok(())
}

fn names(list: &[String]) -> BTreeSet<VarName> {
    list.iter().filter(|s| !s.is_empty()).map(VarName::new).collect()
}

fn run(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::Parse { term } => {
            let t = read_term(&term)?;
            println!("{t}");
            let fv: Vec<String> = t.free_vars().iter().map(|x| x.to_string()).collect();
            println!("size {}, free variables {{{}}}, well-named {}", t.size(), fv.join(","), t.is_well_named());
        }
        Command::Translate { term, weaken, format } => {
            let t = read_term(&term)?.well_name();
            let net = input(translate(&t, &names(&weaken)).map_err(Into::into))?;
            print_net(&net, format)?;
        }
        Command::Check { net, correctness } => {
            let p = read_net(&net)?;
            if let Err(violations) = p.validate() {
                for v in violations {
                    println!("invalid: {}: {} ({})", v.condition, v.message, v.subject);
                }
                return Ok(Verdict::Failed);
            }
            println!("valid ({:?})", p.kind());
            if correctness {
                match is_correct(&p) {
                    Ok(()) => println!("correct"),
                    Err(e) => {
                        println!("incorrect: {e}");
                        return Ok(Verdict::Failed);
                    }
                }
            }
        }
        Command::Readback { net, all } => {
            let p = read_net(&net)?;
            ensure_correct(&p)?;
            if all {
                for e in read_back_all(&p) {
                    println!("{e}");
                }
            } else {
                println!("{}", read_back(&p)?);
            }
        }
        Command::Reduce { input: source, side, strategy, fuel } => match side {
            Side::Term => {
                let t = read_term(&source)?.well_name();
                let result = normalize_traced(&t, strategy, fuel, |r, u| println!("{}\t{}\t{u}", r.kind(), r.position()));
                match result {
                    Ok(n) => println!("normal form {} ({} m, {} e, {} gc)", n.term, n.counts.m, n.counts.e, n.counts.gc),
                    Err(RewriteError::FuelExhausted { last, counts }) => {
                        println!("fuel exhausted after {} steps at {last}", counts.total());
                        return Ok(Verdict::Failed);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Side::Net => {
                let p = read_net(&source)?;
                ensure_correct(&p)?;
                let result = normalize_net(&p, strategy, fuel, |r, before, after| {
                    println!("{}\t{}\t{:016x}", r.kind, before.node(r.cut).name, net_hash(after))
                });
                match result {
                    Ok(n) => {
                        let back = read_back(&n.net)?;
                        println!("normal form {back} ({} m, {} e, {} gc)", n.counts.m, n.counts.e, n.counts.gc);
                    }
                    Err(lsc_core::netrewrite::NetRewriteError::FuelExhausted { counts, .. }) => {
                        println!("fuel exhausted after {} steps", counts.total());
                        return Ok(Verdict::Failed);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        },
        Command::Equiv { t, s, method } => {
            let (t, s) = (read_term(&t)?.well_name(), read_term(&s)?.well_name());
            let same = match method {
                Method::Nets => equiv_via_nets(&t, &s),
                Method::Closure => equiv_oracle(&t, &s, default_bound(&t).max(1))?,
            };
            println!("{same}");
            if !same {
                return Ok(Verdict::Failed);
            }
        }
        Command::BisimCheck { max_size, json } => {
            let spec = CorpusSpec::new(max_size);
            let (squares, correctness) = suite::dynamic(&spec);
            let bisim = suite::bisimulation(&spec, &CorpusSpec::new(6));
            return report(&[squares, correctness, bisim], json);
        }
        Command::Export { net, format } => print_net(&read_net(&net)?, format)?,
        Command::Corpus { max_size, pool, count } => {
            if max_size == 0 {
                return input(Err(anyhow::anyhow!("--max-size must be at least 1")));
            }
            if count {
                for (n, c) in count_terms(max_size, pool.len()).iter().enumerate().skip(1) {
                    println!("{n}\t{c}");
                }
            } else {
                let spec = CorpusSpec { max_size, free_pool: pool.iter().map(VarName::new).collect(), well_named: true };
                for_each_term(&spec, |t| println!("{t}"));
            }
        }
        Command::Suite { name, max_size, json } => {
            let config = max_size.map(SuiteConfig::uniform).unwrap_or_default();
            return report(&run_suite(name, &config), json);
        }
    }
    Ok(Verdict::Ok)
}

fn ensure_correct(p: &Net) -> Result<()> {
    if let Err(v) = p.validate() {
        bail!(Input(anyhow::anyhow!("invalid net: {}", v[0].message)));
    }
    is_correct(p).map_err(|e| Input(anyhow::anyhow!("incorrect net: {e}")))?;
    Ok(())
}

fn report(reports: &[suite::CriterionReport], json: bool) -> Result<Verdict> {
    if json {
        println!("{}", serde_json::to_string_pretty(reports)?);
    } else {
        for r in reports {
            println!("{r}");
        }
    }
    Ok(if reports.iter().all(|r| r.passed) { Verdict::Ok } else { Verdict::Failed })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Input>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
