//! Command-line front end: every command reads JSON specs, runs one
//! pipeline and prints a deterministic JSON report.

use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{format_rational, parse_rational, poly::format_poly, solve_dimension, MonomialSum, DEFAULT_ROOT_TOL};
use crate::equivalence::{decide, decide_with_embedding_hypothesis, Hypothesis};
use crate::error::{Error, Result};
use crate::ifs::{cut_mass, stopping_cut_with_budget, validate_ssc, IfsSpec, Word};
use crate::massdecomp::{find_min_c_for, group_partition, Omega, PairContext};
use crate::surjection::{
    estimate_lipschitz, localize, verify_level, BuildOptions, CellMap, PartitionTree,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_RESOURCE: i32 = 5;

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s}")),
    }
}

/// Exit code for an error class.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) | Error::Json(_) => EXIT_PARSE,
        Error::Infeasible(_) | Error::NoFeasibleC { .. } => EXIT_INFEASIBLE,
        Error::ResourceLimit(_) => EXIT_RESOURCE,
        _ => EXIT_PRECONDITION,
    }
}

#[derive(Parser, Debug, Clone)]
#[command(name = "selfsim", version, about = "Exact tools for dust-like self-similar sets")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub limits: Limits,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Limits {
    /// Largest number of words any cut or refinement may hold.
    #[arg(long, env = "SELFSIM_WORD_BUDGET", default_value_t = crate::ifs::DEFAULT_WORD_BUDGET, global = true,
          value_parser = positive_usize)]
    pub word_budget: usize,
    /// Upper end of the step-constant search.
    #[arg(long, env = "SELFSIM_C_MAX", default_value_t = crate::massdecomp::DEFAULT_C_MAX, global = true,
          value_parser = clap::value_parser!(u32).range(1..))]
    pub c_max: u32,
    /// Wall-clock limit per command, in seconds.
    #[arg(long, env = "SELFSIM_TIME_BUDGET", default_value_t = 300, global = true,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub time_budget: u64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Dimension, Moran ring and optional stopping-cut statistics.
    Dim {
        spec: PathBuf,
        /// Cut scale for the optional cut report.
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, requires = "delta")]
        level: Option<u32>,
    },
    /// Lipschitz-equivalence verdict.
    Equiv {
        domain: PathBuf,
        target: PathBuf,
        /// Assume a Lipschitz map with image of positive measure exists.
        #[arg(long, value_enum)]
        hypothesis: Option<HypothesisArg>,
    },
    /// Exact grouping of the domain's first full level that splits onto the
    /// target letters, or the step-constant search.
    Decompose {
        domain: PathBuf,
        target: PathBuf,
        #[arg(long)]
        find_c: bool,
        /// Levels checked by the step-constant search.
        #[arg(long, default_value_t = 2)]
        horizon: u32,
    },
    /// Partition tree of the hierarchical surjection.
    Surject {
        #[command(subcommand)]
        action: SurjectAction,
    },
    /// Localization report for a cell map.
    Localize {
        map: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum HypothesisArg {
    HomogeneousDomain,
    HomogeneousTarget,
}

#[derive(Args, Debug, Clone)]
pub struct TreeArgs {
    pub domain: PathBuf,
    pub target: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub depth: u32,
    /// Step constant, or "auto" for the smallest feasible one.
    #[arg(long, default_value = "auto")]
    pub c: String,
}

#[derive(Subcommand, Debug, Clone)]
pub enum SurjectAction {
    Build {
        #[command(flatten)]
        tree: TreeArgs,
    },
    Verify {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Eval {
        #[command(flatten)]
        tree: TreeArgs,
        /// Domain address, digits or dot-separated letters.
        #[arg(long)]
        address: String,
    },
    Lipschitz {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the sampled pairs as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// What a command produced: its report, and whether its checks passed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

#[derive(Serialize)]
struct InputHash {
    path: String,
    sha256: String,
}

fn read(path: &Path) -> Result<(String, InputHash)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let hash = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok((
        text,
        InputHash {
            path: path.display().to_string(),
            sha256: hash,
        },
    ))
}

fn load_spec(path: &Path, inputs: &mut Vec<InputHash>) -> Result<IfsSpec> {
    let (text, h) = read(path)?;
    inputs.push(h);
    IfsSpec::from_json(&text)
}

fn parse_c(s: &str) -> Result<Option<u32>> {
    if s == "auto" {
        return Ok(None);
    }
    match s.parse::<u32>() {
        Ok(c) if c > 0 => Ok(Some(c)),
        _ => Err(Error::Parse(format!("step constant must be a positive integer or \"auto\", got {s}"))),
    }
}

fn build_tree(args: &TreeArgs, limits: &Limits, inputs: &mut Vec<InputHash>) -> Result<PartitionTree> {
    let k = load_spec(&args.domain, inputs)?;
    let f = load_spec(&args.target, inputs)?;
    PartitionTree::build_with(
        &k,
        &f,
        args.depth,
        parse_c(&args.c)?,
        BuildOptions {
            word_budget: limits.word_budget,
            c_max: limits.c_max,
        },
    )
}

fn execute(cfg: &RunConfig, inputs: &mut Vec<InputHash>) -> Result<Outcome> {
    let limits = &cfg.limits;
    match &cfg.command {
        Command::Dim { spec, delta, level } => {
            let s = load_spec(spec, inputs)?;
            let ratios = s.ratios();
            let dim = solve_dimension(&ratios, DEFAULT_ROOT_TOL)?;
            let mut report = json!({
                "label": s.label,
                "maps": s.len(),
                "dimension": dim,
            });
            match crate::algebra::build_context(&ratios) {
                Ok(ctx) => {
                    report["ratio_root"] = json!(format_rational(ctx.ratio_root()));
                    report["exponents"] = json!(ctx.exponents());
                    report["moran_poly"] = json!(format_poly(ctx.moran_poly()));
                    report["min_poly"] = json!(format_poly(ctx.min_poly()));
                    report["x"] = json!(ctx.x_value());
                }
                Err(Error::NotCommensurable) => report["commensurable"] = json!(false),
                Err(e) => return Err(e),
            }
            report["separation"] = match validate_ssc(&s) {
                Ok(cert) => json!({ "certified": true, "delta": cert.delta_k }),
                Err(e) => json!({ "certified": false, "reason": e.to_string() }),
            };
            if let (Some(d), Some(n)) = (delta, level) {
                let d = parse_rational(d)?;
                let cut = stopping_cut_with_budget(&s, &d, *n, limits.word_budget)?;
                let mut c = json!({ "delta": format_rational(&d), "level": n, "words": cut.len() });
                if let Ok(ctx) = crate::algebra::build_context(&ratios) {
                    c["mass"] = json!(cut_mass(&ctx, &cut).to_string());
                }
                report["cut"] = c;
            }
            Ok(Outcome { report, passed: true })
        }
        Command::Equiv { domain, target, hypothesis } => {
            let k = load_spec(domain, inputs)?;
            let f = load_spec(target, inputs)?;
            let v = match hypothesis {
                None => decide(&k, &f)?,
                Some(HypothesisArg::HomogeneousDomain) => {
                    decide_with_embedding_hypothesis(&k, &f, Hypothesis::HomogeneousDomain)?
                }
                Some(HypothesisArg::HomogeneousTarget) => {
                    decide_with_embedding_hypothesis(&k, &f, Hypothesis::HomogeneousTarget)?
                }
            };
            Ok(Outcome {
                report: serde_json::to_value(&v)?,
                passed: true,
            })
        }
        Command::Decompose { domain, target, find_c, horizon } => {
            let k = load_spec(domain, inputs)?;
            let f = load_spec(target, inputs)?;
            let pair = PairContext::new(&k, &f)?;
            if *find_c {
                let omega = Omega::default_for(&pair);
                let rep = find_min_c_for(&pair, Some(&omega), *horizon, limits.c_max)?;
                return Ok(Outcome {
                    report: json!({
                        "c": rep.c,
                        "horizon": horizon,
                        "rejected": rep.rejected.iter().map(|(c, why)| json!({"c": c, "reason": why})).collect::<Vec<_>>(),
                    }),
                    passed: true,
                });
            }
            let letters = MonomialSum::from_exponents(&pair.domain_exps);
            let targets = MonomialSum::from_exponents(&pair.target_exps);
            let mut level = letters.clone();
            for m in 1..=8u32 {
                if level.total_terms() > num::BigInt::from(limits.word_budget) {
                    break;
                }
                match group_partition(&pair.ctx, &level, &targets) {
                    Ok(groups) => {
                        return Ok(Outcome {
                            report: json!({
                                "ratio_root": format_rational(&pair.root),
                                "word_length": m,
                                "groups": groups.iter().map(|g| json!({
                                    "target_exponent": g.target,
                                    "parts": g.parts.0.iter().map(|(e, n)| (e.to_string(), json!(n.to_string()))).collect::<serde_json::Map<_, _>>(),
                                })).collect::<Vec<_>>(),
                            }),
                            passed: true,
                        })
                    }
                    Err(Error::Infeasible(_)) | Err(Error::PreconditionFailed(_)) => {}
                    Err(e) => return Err(e),
                }
                level = level.mul(&letters);
            }
            Err(Error::Infeasible(
                "no full domain level groups exactly onto the target letters".into(),
            ))
        }
        Command::Surject { action } => surject(action, limits, inputs),
        Command::Localize { map, epsilon } => {
            let (text, h) = read(map)?;
            inputs.push(h);
            let m = CellMap::from_json(&text)?;
            let rep = localize(&m, *epsilon)?;
            Ok(Outcome {
                passed: rep.attained,
                report: serde_json::to_value(&rep)?,
            })
        }
    }
}

fn surject(action: &SurjectAction, limits: &Limits, inputs: &mut Vec<InputHash>) -> Result<Outcome> {
    match action {
        SurjectAction::Build { tree } => {
            let t = build_tree(tree, limits, inputs)?;
            Ok(Outcome {
                report: json!({
                    "step_c": t.step_c(),
                    "delta": format_rational(t.delta()),
                    "level_sizes": t.levels().iter().map(|l| json!({
                        "source_level": l.source_level,
                        "target_level": l.target_level,
                        "sources": l.sources.len(),
                        "targets": l.targets.len(),
                    })).collect::<Vec<_>>(),
                    "tree": serde_json::to_value(t.to_json_value())?,
                }),
                passed: true,
            })
        }
        SurjectAction::Verify { tree, samples, seed } => {
            let t = build_tree(tree, limits, inputs)?;
            let sampling = (*samples > 0).then_some((*samples, *seed));
            let reports = (1..=t.depth())
                .map(|k| verify_level(&t, k, sampling))
                .collect::<Result<Vec<_>>>()?;
            Ok(Outcome {
                passed: reports.iter().all(|r| r.passed()),
                report: json!({
                    "step_c": t.step_c(),
                    "levels": serde_json::to_value(&reports)?,
                }),
            })
        }
        SurjectAction::Eval { tree, address } => {
            let t = build_tree(tree, limits, inputs)?;
            let addr = Word::parse(address, t.domain().alphabet())?;
            let fa = t.target().alphabet();
            let mut out = Vec::new();
            for k in 1..=t.depth() {
                out.push(json!({ "level": k, "target": t.evaluate(&addr, k)?.display(fa).to_string() }));
            }
            Ok(Outcome {
                report: json!({ "step_c": t.step_c(), "address": address, "images": out }),
                passed: true,
            })
        }
        SurjectAction::Lipschitz { tree, samples, seed, csv } => {
            let t = build_tree(tree, limits, inputs)?;
            let est = estimate_lipschitz(&t, tree.depth, *samples, *seed)?;
            if let Some(path) = csv {
                std::fs::write(path, est.to_csv())?;
            }
            Ok(Outcome {
                passed: est.separation_ok && est.sampled_max.is_finite(),
                report: json!({ "step_c": t.step_c(), "lipschitz": serde_json::to_value(&est)? }),
            })
        }
    }
}

/// Runs one command under the configured time budget and wraps its report
/// with the tool version and input hashes.
pub fn run(cfg: &RunConfig) -> (i32, String) {
    let (tx, rx) = mpsc::channel();
    let job = cfg.clone();
    std::thread::spawn(move || {
        let mut inputs = Vec::new();
        let out = execute(&job, &mut inputs);
        let _ = tx.send((out, inputs));
    });
    let (result, inputs) = match rx.recv_timeout(Duration::from_secs(cfg.limits.time_budget)) {
        Ok(v) => v,
        Err(_) => (
            Err(Error::ResourceLimit(format!(
                "time budget of {} s exhausted",
                cfg.limits.time_budget
            ))),
            Vec::new(),
        ),
    };
    let mut doc = json!({
        "tool": "selfsim",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cfg.command),
        "inputs": inputs,
    });
    let code = match result {
        Ok(o) => {
            doc["passed"] = json!(o.passed);
            doc["report"] = o.report;
            if o.passed { EXIT_OK } else { EXIT_CHECK_FAILED }
        }
        Err(e) => {
            doc["error"] = json!(e.to_string());
            exit_code(&e)
        }
    };
    let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    (code, text)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Dim { .. } => "dim",
        Command::Equiv { .. } => "equiv",
        Command::Decompose { .. } => "decompose",
        Command::Surject { action } => match action {
            SurjectAction::Build { .. } => "surject build",
            SurjectAction::Verify { .. } => "surject verify",
            SurjectAction::Eval { .. } => "surject eval",
            SurjectAction::Lipschitz { .. } => "surject lipschitz",
        },
        Command::Localize { .. } => "localize",
    }
}

/// Parses arguments, runs, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARSE,
            };
        }
    };
    let (code, text) = run(&cfg);
    match &cfg.output {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("{}: {e}", p.display());
                return EXIT_PARSE;
            }
        }
        None => print!("{text}"),
    }
    code
}
