use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use kc_core::circuit::validate;
use kc_core::compiler::{compile_with, CompileOptions, Heuristic};
use kc_core::convert::{convert, ConvertReport};
use kc_core::counting::{count_dnnf, prob_dnnf};
use kc_core::generators::{gen_phi, gen_psi, gen_psi_dual, gen_tight_example, gen_triangle};
use kc_core::io;
use kc_core::lineage::{ground, hierarchical};
use kc_core::oracle::{equivalent, DagFn};
use kc_core::{CircuitDag, Error, Formula, Var};

/// Exhaustive equivalence checks are skipped above this many variables.
const CHECK_VARS: usize = 20;

#[derive(Parser)]
#[command(name = "kc", version, about = "Decision-DNNF to FBDD conversion and model counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a circuit file against its format's structural rules.
    Validate { file: PathBuf },
    /// Convert a decision-DNNF to an FBDD.
    Convert {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write size statistics as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exact model count of a circuit or formula.
    Count {
        file: PathBuf,
        /// Count over variables 1..=N instead of the file's own universe.
        #[arg(long)]
        universe: Option<u32>,
    },
    /// Probability under independent variable weights.
    Prob {
        file: PathBuf,
        /// CSV of `var,probability`; missing variables get 1/2.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Write a member of a formula family.
    Gen {
        family: Family,
        param: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// For psi, write the dual CNF instead.
        #[arg(long)]
        cnf: bool,
    },
    /// Compile a DIMACS CNF or DNF into a decision-DNNF.
    Compile {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = HeuristicArg::Fixed)]
        heuristic: HeuristicArg,
        #[arg(long)]
        no_cache: bool,
    },
    /// Ground a query over a database and write the lineage DNF.
    Lineage {
        query: PathBuf,
        db: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Report whether a query is hierarchical.
    Hierarchical { query: PathBuf },
    /// Conversion sizes over a parameter range, as CSV.
    Bench {
        #[arg(long, value_enum)]
        family: BenchFamily,
        /// Inclusive range `a..b`.
        #[arg(long)]
        range: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Psi,
    Phi,
    Triangle,
    Tight,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchFamily {
    Phi,
    Tight,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Fixed,
    Frequent,
}

/// Failures that map to exit code 1 rather than a usage error.
#[derive(Debug)]
struct Failed(String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

enum Input {
    Circuit(CircuitDag),
    Formula(Formula),
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn first_word(text: &str) -> (&str, &str) {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("c ") && *l != "c")
        .unwrap_or("");
    let mut words = line.split_whitespace();
    (words.next().unwrap_or(""), words.next().unwrap_or(""))
}

/// Sniffs the format from the first content line.
fn load(path: &Path) -> anyhow::Result<Input> {
    let text = read(path)?;
    let ctx = || format!("parsing {}", path.display());
    Ok(match first_word(&text) {
        ("nnf", _) => Input::Circuit(io::parse_nnf(&text).with_context(ctx)?),
        ("p", _) => Input::Formula(io::parse_formula(&text).with_context(ctx)?),
        _ => Input::Circuit(io::parse_fbdd(&text).with_context(ctx)?),
    })
}

fn load_circuit(path: &Path) -> anyhow::Result<CircuitDag> {
    Ok(match load(path)? {
        Input::Circuit(d) => d,
        Input::Formula(f) => compile_with(&f, &CompileOptions::default())?,
    })
}

fn same_function(a: &CircuitDag, b: &CircuitDag) -> anyhow::Result<Option<bool>> {
    if a.universe().len() > CHECK_VARS {
        return Ok(None);
    }
    let (fa, fb) = (DagFn::new(a)?, DagFn::new(b)?);
    Ok(Some(equivalent(&fa, &fb, a.universe())?.is_equivalent()))
}

fn report_json(r: &ConvertReport) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

fn parse_range(text: &str) -> Result<(u64, u64), Usage> {
    let bad = || Usage(format!("bad range `{text}`, expected a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn bench_row(family: BenchFamily, param: u64) -> anyhow::Result<String> {
    let dag = match family {
        BenchFamily::Phi => {
            let f: Formula = gen_phi(param as usize)?.into();
            compile_with(&f, &CompileOptions::default())?
        }
        BenchFamily::Tight => gen_tight_example(u32::try_from(param)?)?.dag,
    };
    let (_, r) = convert(&dag)?;
    let name = match family {
        BenchFamily::Phi => "phi",
        BenchFamily::Tight => "tight",
    };
    Ok(format!(
        "{name},{param},{},{},{},{},{}\n",
        r.nodes, r.ands, r.light_depth, r.out_nodes_with_noops, r.bound
    ))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { file } => {
            let dag = load_circuit(&file)?;
            let report = validate(&dag);
            println!("{}: {}", dag.flavor(), report);
            if !report.ok() {
                bail!(Failed(format!("{} is not a valid {}", file.display(), dag.flavor())));
            }
        }
        Command::Convert { input, output, report } => {
            let dag = load_circuit(&input)?;
            let (fbdd, r) = convert(&dag)?;
            if !validate(&fbdd).ok() {
                bail!(Failed("conversion produced an invalid FBDD".into()));
            }
            if same_function(&dag, &fbdd)? == Some(false) {
                bail!(Failed("conversion changed the function".into()));
            }
            let text = io::write_fbdd(&fbdd)?;
            match output {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
            if let Some(path) = report {
                write(&path, &report_json(&r)?)?;
            }
            eprintln!(
                "N={} M={} L={} out={} final={}",
                r.nodes, r.ands, r.light_depth, r.out_nodes_with_noops, r.out_nodes_final
            );
        }
        Command::Count { file, universe } => {
            let dag = load_circuit(&file)?;
            let u: BTreeSet<Var> = match universe {
                Some(n) => (1..=n).map(Var::new).collect::<Result<_, _>>()?,
                None => dag.universe().clone(),
            };
            println!("{}", count_dnnf(&dag, &u)?);
        }
        Command::Prob { file, weights } => {
            let dag = load_circuit(&file)?;
            let given = match weights {
                Some(path) => io::parse_weights(&read(&path)?)?,
                None => Default::default(),
            };
            let (w, defaulted) = io::complete_weights(&given, dag.universe())?;
            if !defaulted.is_empty() {
                let names: Vec<String> = defaulted.iter().map(ToString::to_string).collect();
                eprintln!("warning: probability 1/2 assumed for {}", names.join(", "));
            }
            let p = prob_dnnf(&dag, &w)?;
            println!("{p}");
            println!("{}", p.to_f64().unwrap_or(f64::NAN));
        }
        Command::Gen { family, param, output, cnf } => {
            let text = match family {
                Family::Psi if cnf => io::write_formula(&gen_psi_dual(param)?.into()),
                Family::Psi => io::write_formula(&gen_psi(param)?.into()),
                Family::Phi => io::write_formula(&gen_phi(param as usize)?.into()),
                Family::Triangle => io::write_formula(&gen_triangle(param as usize)?.into()),
                Family::Tight => io::write_nnf(&gen_tight_example(u32::try_from(param)?)?.dag)?,
            };
            write(&output, &text)?;
        }
        Command::Compile { input, output, heuristic, no_cache } => {
            let Input::Formula(f) = load(&input)? else {
                bail!(Usage(format!("{} is not a DIMACS cnf/dnf file", input.display())));
            };
            let options = CompileOptions {
                heuristic: match heuristic {
                    HeuristicArg::Fixed => Heuristic::FixedOrder,
                    HeuristicArg::Frequent => Heuristic::MostFrequentVar,
                },
                cache: !no_cache,
            };
            let dag = compile_with(&f, &options)?;
            write(&output, &io::write_nnf(&dag)?)?;
        }
        Command::Lineage { query, db, output } => {
            let q = io::parse_query(&read(&query)?)?;
            let db = io::parse_db(&read(&db)?)?;
            let lineage = ground(&q, &db)?;
            write(&output, &io::write_formula(&lineage.dnf.clone().into()))?;
            println!("{}", lineage.dnf);
        }
        Command::Hierarchical { query } => {
            let q = io::parse_query(&read(&query)?)?;
            println!("{}", hierarchical(&q));
        }
        Command::Bench { family, range, output } => {
            let (a, b) = parse_range(&range)?;
            let mut csv = String::from("family,param,N,M,L,out_nodes,bound\n");
            for param in a..=b {
                csv.push_str(&bench_row(family, param)?);
            }
            write(&output, &csv)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let bad_param = matches!(
                e.downcast_ref::<Error>(),
                Some(Error::NotPrime(_) | Error::InvalidParameter(_))
            );
            if bad_param || e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
