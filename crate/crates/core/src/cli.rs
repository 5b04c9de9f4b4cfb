//! Command-line front end. `run` returns the process exit code:
//! 0 for success or an unknown verdict, 10 when unsatisfiability is proven,
//! 20 when a proof or gadget is rejected, 1 on usage and parse errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gadgets::{
    chain_to_3sat, compile_maxsat, gadget_binary, t0_sequential, t_parallel, to_maxcut,
    trevisan_3to2, Anchor, CompileReport, CutVariant, GadgetError, GadgetParams, ShapeChoice,
    ShapeSet, Strategy, TreeShape, VarAllocator,
};
use crate::model::{Literal, OrClause, Var, X2XProblem};
use crate::oracle::{brute_opt_cost, verify_gadget, OracleError, OracleLimits, OracleProblem};
use crate::proofs::{
    bound_to_original, check_proof, saturate, BoundStatus, BoundVerdict, CheckError, EngineError,
    ProofInput, ResidueMode, SaturateOptions,
};
use crate::rational::Frac;
use crate::textio::{
    detect_kind, emit_maxcut, emit_proof, emit_x2x, parse_cnf, parse_proof, parse_x2x, InputKind,
    TextError, WcnfInstance,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSAT: i32 = 10;
pub const EXIT_REJECTED: i32 = 20;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Text {
        path: PathBuf,
        #[source]
        source: TextError,
    },
    #[error("{0}: no 'p cnf', 'p wcnf' or 'p x2x' header")]
    UnknownFormat(PathBuf),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "max2xor",
    version,
    about = "MaxSAT to Max2XOR compiler and resolution prover"
)]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Sequential,
    Tree,
    /// Only for instances whose clauses have at most two literals.
    FullExpansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Single,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    T0,
    T,
    Binary,
    Trevisan,
    Chain,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CompileArgs {
    #[arg(long, value_enum, default_value = "sequential")]
    pub strategy: StrategyArg,
    /// Tree shapes per clause, for `--strategy tree`.
    #[arg(long)]
    pub shapes: Option<PathBuf>,
}

/// `discard`, `compact` or `retranslate[=N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeArg(pub ResidueMode);

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<ModeArg, String> {
        let mode = match s {
            "discard" => ResidueMode::Discard,
            "compact" => ResidueMode::Compact,
            "retranslate" => ResidueMode::Retranslate { max_rounds: 3 },
            _ => match s.strip_prefix("retranslate=") {
                Some(n) => ResidueMode::Retranslate {
                    max_rounds: n.parse().map_err(|_| format!("bad round count '{n}'"))?,
                },
                None => return Err(format!("unknown mode '{s}'")),
            },
        };
        Ok(ModeArg(mode))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a cnf/wcnf instance into a .x2x problem.
    Compile {
        input: PathBuf,
        #[command(flatten)]
        compile: CompileArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Derive a cost lower bound and write the proof.
    Bound {
        input: PathBuf,
        #[arg(long, default_value = "discard")]
        mode: ModeArg,
        #[command(flatten)]
        compile: CompileArgs,
        /// Where to write the proof; defaults to the input with extension .x2xproof.
        #[arg(long)]
        proof: Option<PathBuf>,
        /// Never introduce a variable with a larger id.
        #[arg(long)]
        max_vars: Option<u32>,
    },
    /// Check a proof against its input.
    Check {
        input: PathBuf,
        proof: PathBuf,
        #[command(flatten)]
        compile: CompileArgs,
    },
    /// Export a .x2x problem as a MaxCUT graph.
    ExportCut {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "single")]
        variant: VariantArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact optimum and cost by enumeration.
    Oracle { input: PathBuf },
    /// Certify a gadget family on the clause x1 ∨ … ∨ xk.
    GadgetVerify {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        k: usize,
        /// Tree shape for `--family t`.
        #[arg(long)]
        shape: Option<PathBuf>,
        /// Draws a random tree shape for `--family t`.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn text_err(path: &Path) -> impl Fn(TextError) -> CliError + '_ {
    move |source| CliError::Text {
        path: path.to_path_buf(),
        source,
    }
}

enum Loaded {
    Cnf(WcnfInstance),
    X2x(X2XProblem),
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = read(path)?;
    match detect_kind(&text) {
        Some(InputKind::Cnf) => Ok(Loaded::Cnf(parse_cnf(&text).map_err(text_err(path))?)),
        Some(InputKind::X2x) => Ok(Loaded::X2x(parse_x2x(&text).map_err(text_err(path))?)),
        None => Err(CliError::UnknownFormat(path.to_path_buf())),
    }
}

fn strategy(args: &CompileArgs) -> Result<Strategy, CliError> {
    match (args.strategy, &args.shapes) {
        (StrategyArg::Sequential, None) => Ok(Strategy::Sequential),
        (StrategyArg::FullExpansion, None) => Ok(Strategy::FullExpansion2Sat),
        (StrategyArg::Tree, None) => Ok(Strategy::Tree(ShapeSet::default())),
        (StrategyArg::Tree, Some(p)) => Ok(Strategy::Tree(ShapeSet::parse(&read(p)?)?)),
        (_, Some(_)) => Err(CliError::Usage("--shapes needs --strategy tree".into())),
    }
}

fn compile(instance: &WcnfInstance, args: &CompileArgs) -> Result<CompileReport, CliError> {
    Ok(compile_maxsat(instance, &strategy(args)?)?)
}

fn write_report(out: &mut dyn Write, report: &CompileReport) -> io::Result<()> {
    writeln!(out, "shift {}", Frac(&report.shift))?;
    writeln!(out, "threshold {}", Frac(&report.threshold()))?;
    for (k, p) in &report.params_per_arity {
        write!(
            out,
            "params k={k} alpha={} beta={}",
            Frac(&p.alpha),
            Frac(&p.beta)
        )?;
        match p.aux_vars {
            Some(n) => writeln!(out, " aux={n}")?,
            None => writeln!(out)?,
        }
    }
    writeln!(out, "fingerprint {:016x}", report.fingerprint)
}

fn clause_1_to_k(k: usize) -> OrClause {
    OrClause::new((1..=k as u32).map(|i| Literal::pos(Var::from_id(i))))
        .expect("distinct variables")
}

fn tree_shape(k: usize, shape: &Option<PathBuf>, seed: Option<u64>) -> Result<TreeShape, CliError> {
    if let Some(p) = shape {
        let set = ShapeSet::parse(&read(p)?)?;
        return match set.per_clause.into_values().next() {
            Some(ShapeChoice::Explicit(s)) => Ok(s),
            Some(ShapeChoice::Builtin(b)) => Ok(b.shape(k)),
            None => Err(CliError::Usage(format!("{}: no shape", p.display()))),
        };
    }
    Ok(match seed {
        Some(s) => TreeShape::random(k, &mut ChaCha8Rng::seed_from_u64(s)),
        None => TreeShape::balanced(k),
    })
}

fn gadget_verify(
    out: &mut dyn Write,
    family: Family,
    k: usize,
    shape: &Option<PathBuf>,
    seed: Option<u64>,
) -> Result<i32, CliError> {
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let clause = clause_1_to_k(k);
    let mut alloc = VarAllocator::after(k as u32);
    let mut translation = OracleProblem::new();
    let params = match family {
        Family::Binary => {
            for x in gadget_binary(&crate::rational::int(1), &clause)? {
                translation.push(x.weight, &x.constraint);
            }
            GadgetParams::for_arity(k)
        }
        Family::T0 => {
            for x in t0_sequential(&clause, Anchor::One, &mut alloc)? {
                translation.push(x.weight, &x.constraint);
            }
            GadgetParams::parity_tree(k)
        }
        Family::T => {
            let s = tree_shape(k, shape, seed)?;
            writeln!(out, "shape {s}")?;
            for x in t_parallel(&clause, &s, Anchor::One, &mut alloc)? {
                translation.push(x.weight, &x.constraint);
            }
            GadgetParams::parity_tree(k)
        }
        Family::Trevisan => {
            for c in trevisan_3to2(&clause, &mut alloc)? {
                translation.push(c.weight, &c.clause);
            }
            GadgetParams::trevisan()
        }
        Family::Chain => {
            for c in chain_to_3sat(&clause, &mut alloc)? {
                translation.push(c.weight, &c.clause);
            }
            GadgetParams::chain(k)
        }
    };
    let verdict = verify_gadget(&clause, &translation, &params, &OracleLimits::from_env())?;
    if verdict.certified {
        writeln!(
            out,
            "certified alpha={} beta={}",
            Frac(&verdict.alpha),
            Frac(&verdict.beta)
        )?;
        return Ok(EXIT_OK);
    }
    write!(
        out,
        "rejected alpha={} beta={}",
        Frac(&verdict.alpha),
        Frac(&verdict.beta)
    )?;
    if let Some(reason) = &verdict.reason {
        write!(out, ": {reason}")?;
    }
    writeln!(out)?;
    if let Some((a, value)) = &verdict.counterexample {
        writeln!(out, "counterexample {a} reaches {}", Frac(value))?;
    }
    Ok(EXIT_REJECTED)
}

/// The problem a proof for `path` is about, and the compile report when the
/// input is a cnf/wcnf instance.
fn proof_subject(
    path: &Path,
    args: &CompileArgs,
) -> Result<(X2XProblem, Option<CompileReport>), CliError> {
    match load(path)? {
        Loaded::X2x(p) => Ok((p, None)),
        Loaded::Cnf(inst) => {
            let report = compile(&inst, args)?;
            Ok((report.problem.clone(), Some(report)))
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Compile {
            input,
            compile: args,
            output,
        } => {
            let Loaded::Cnf(inst) = load(input)? else {
                return Err(CliError::Usage(format!(
                    "{}: compile expects cnf or wcnf",
                    input.display()
                )));
            };
            let report = compile(&inst, args)?;
            let path = output
                .clone()
                .unwrap_or_else(|| input.with_extension("x2x"));
            write_file(&path, &emit_x2x(&report.problem))?;
            writeln!(out, "wrote {}", path.display())?;
            write_report(out, &report)?;
            Ok(EXIT_OK)
        }
        Command::Bound {
            input,
            mode,
            compile: args,
            proof,
            max_vars,
        } => {
            let (problem, report) = proof_subject(input, args)?;
            let options = SaturateOptions {
                mode: mode.0,
                max_vars: *max_vars,
                ..SaturateOptions::default()
            };
            let (summary, proof_log) = saturate(&ProofInput::from(&problem), &options)?;
            let path = proof
                .clone()
                .unwrap_or_else(|| input.with_extension("x2xproof"));
            write_file(&path, &emit_proof(&proof_log))?;
            let verdict = match &report {
                Some(r) => bound_to_original(&summary, r)?,
                None => BoundVerdict::new(summary.bound_m.clone(), num_traits::Zero::zero()),
            };
            writeln!(out, "wrote {}", path.display())?;
            writeln!(out, "mode {}", mode.0)?;
            writeln!(out, "m {}", Frac(&summary.bound_m))?;
            writeln!(out, "shift {}", Frac(&verdict.shift))?;
            writeln!(out, "rounds {} steps {}", summary.rounds, summary.steps)?;
            writeln!(out, "{verdict}")?;
            Ok(match verdict.status {
                BoundStatus::Unsat => EXIT_UNSAT,
                BoundStatus::Unknown => EXIT_OK,
            })
        }
        Command::Check {
            input,
            proof,
            compile: args,
        } => {
            let (problem, _) = proof_subject(input, args)?;
            let proof_log = match parse_proof(&read(proof)?) {
                Ok(p) => p,
                Err(e) => {
                    writeln!(out, "REJECT {}: {e}", proof.display())?;
                    return Ok(EXIT_REJECTED);
                }
            };
            match check_proof(&ProofInput::from(&problem), &proof_log, None) {
                Ok(r) => {
                    writeln!(out, "ACCEPT m={} steps={}", Frac(&r.bound_m), r.steps)?;
                    Ok(EXIT_OK)
                }
                Err(e @ CheckError::Step { .. })
                | Err(e @ CheckError::Length { .. })
                | Err(e @ CheckError::Final(_)) => {
                    writeln!(out, "REJECT {e}")?;
                    Ok(EXIT_REJECTED)
                }
                Err(e @ CheckError::Input(_)) => Err(CliError::Usage(e.to_string())),
            }
        }
        Command::ExportCut {
            input,
            variant,
            output,
        } => {
            let Loaded::X2x(problem) = load(input)? else {
                return Err(CliError::Usage(format!(
                    "{}: export-cut expects x2x",
                    input.display()
                )));
            };
            let variant = match variant {
                VariantArg::Single => CutVariant::Single,
                VariantArg::Double => CutVariant::Double,
            };
            let graph = to_maxcut(&problem, variant);
            let path = output
                .clone()
                .unwrap_or_else(|| input.with_extension("cut"));
            write_file(&path, &emit_maxcut(&graph).map_err(text_err(input))?)?;
            writeln!(out, "wrote {}", path.display())?;
            Ok(EXIT_OK)
        }
        Command::Oracle { input } => {
            let problem = match load(input)? {
                Loaded::X2x(p) => OracleProblem::from_x2x(&p),
                Loaded::Cnf(inst) => {
                    let mut p = OracleProblem::new();
                    p.add_clauses(inst.clauses.iter().map(|c| (&c.weight, &c.clause)));
                    p
                }
            };
            let r = brute_opt_cost(&problem, &OracleLimits::from_env())?;
            writeln!(out, "opt {}", Frac(&r.opt))?;
            writeln!(out, "cost {}", Frac(&r.cost))?;
            writeln!(out, "witness {}", r.opt_witness)?;
            Ok(EXIT_OK)
        }
        Command::GadgetVerify {
            family,
            k,
            shape,
            seed,
        } => gadget_verify(out, *family, *k, shape, *seed),
    }
}
