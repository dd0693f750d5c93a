//! Command-line front end: solve, audit, gen, check-valuation, fuzz.
//!
//! Exit codes: 0 success; 1 I/O, parse, or usage errors; 2 enumeration
//! budget exceeded; 3 invariant violation (an implementation bug, never an
//! unlucky input); 4 audit found an agent without MXS or EFL.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand_core::{RngCore, SeedableRng};

use mxsefl::envygraph::Partition;
use mxsefl::fairness::{
    good_cancelable_check, restricted_mms_feasible_check, FairnessCtx, DEFAULT_ENUMERATION_BUDGET,
};
use mxsefl::instances::{generate, GeneratorSpec};
use mxsefl::io::{parse_kind, AllocationFile, InstanceFile};
use mxsefl::model::ValuationKind;
use mxsefl::oracle::{audit_allocation, AuditOptions};
use mxsefl::solver::{mxs_efl_allocate, SolverConfig};
use mxsefl::{Error, Instance};

#[derive(Parser)]
#[command(name = "mxsefl", about = "MXS+EFL fair division solver and auditor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an MXS+EFL allocation for an instance file.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Allocation output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the solver trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Check the phase invariants at every loop head.
        #[arg(long)]
        debug_assert: bool,
        /// Enumeration budget for share computations.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u64,
    },
    /// Verify an allocation against an instance and print the audit report.
    Audit {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
        /// Separate budget for the exponential GMMS sweep.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        gmms_budget: u64,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// additive | budget | unit | mult | table
        #[arg(long)]
        kind: String,
        /// Largest good value (smallest is 0, or 1 for mult).
        #[arg(long)]
        max: i64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check restricted MMS-feasibility and good-cancelability per agent.
    CheckValuation {
        #[arg(long)]
        instance: PathBuf,
        /// Largest partition size checked.
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Largest good subset size checked.
        #[arg(long, default_value_t = 5)]
        mbudget: usize,
    },
    /// Random generate-solve-audit campaign; stops at the first failure.
    Fuzz {
        #[arg(long)]
        runs: u64,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long, default_value_t = 6)]
        mmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::InstanceTooLarge { .. } => ExitCode::from(2),
        Error::InvariantViolation(_) | Error::IterationCapExceeded(_) => ExitCode::from(3),
        _ => ExitCode::from(1),
    }
}

fn fail(context: &str, e: &Error) -> ExitCode {
    eprintln!("mxsefl: {context}: {e}");
    exit_for(e)
}

fn read_instance(path: &PathBuf) -> Result<Instance, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("mxsefl: reading {}: {e}", path.display());
        ExitCode::from(1)
    })?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|e| {
        eprintln!("mxsefl: parsing {}: {e}", path.display());
        ExitCode::from(1)
    })?;
    file.to_instance()
        .map_err(|e| fail(&format!("validating {}", path.display()), &e))
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), ExitCode> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| {
            eprintln!("mxsefl: writing {}: {e}", path.display());
            ExitCode::from(1)
        }),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Solve {
            instance,
            out,
            trace,
            debug_assert,
            budget,
        } => {
            let inst = read_instance(&instance)?;
            let cfg = SolverConfig {
                enumeration_budget: budget,
                debug_assertions: debug_assert,
                ..SolverConfig::default()
            };
            let (alloc, solver_trace) =
                mxs_efl_allocate(&inst, &cfg).map_err(|e| fail("solve", &e))?;
            let file = AllocationFile::from_allocation(&alloc);
            let json = serde_json::to_string_pretty(&file).expect("allocation serializes");
            write_or_print(&out, &json)?;
            if let Some(path) = trace {
                fs::write(&path, solver_trace.to_jsonl()).map_err(|e| {
                    eprintln!("mxsefl: writing {}: {e}", path.display());
                    ExitCode::from(1)
                })?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit {
            instance,
            allocation,
            gmms_budget,
        } => {
            let inst = read_instance(&instance)?;
            let text = fs::read_to_string(&allocation).map_err(|e| {
                eprintln!("mxsefl: reading {}: {e}", allocation.display());
                ExitCode::from(1)
            })?;
            let file: AllocationFile = serde_json::from_str(&text).map_err(|e| {
                eprintln!("mxsefl: parsing {}: {e}", allocation.display());
                ExitCode::from(1)
            })?;
            let alloc = file
                .to_allocation(&inst)
                .map_err(|e| fail("validating allocation", &e))?;
            let opts = AuditOptions {
                gmms_budget,
                ..AuditOptions::default()
            };
            let report =
                audit_allocation(&inst, &alloc, &opts).map_err(|e| fail("audit", &e))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            if report.verdict {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(4))
            }
        }
        Command::Gen {
            n,
            m,
            kind,
            max,
            seed,
            out,
        } => {
            let kind = parse_kind(&kind).map_err(|e| fail("gen", &e))?;
            let spec = GeneratorSpec {
                n,
                m,
                kind,
                value_lo: if kind == ValuationKind::Multiplicative { 1 } else { 0 },
                value_hi: max,
                budget_lo: 1,
                budget_hi: max.max(1) * 2,
                seed,
            };
            let inst = generate(&spec).map_err(|e| fail("gen", &e))?;
            let file = InstanceFile::from_instance(&inst);
            let json = serde_json::to_string_pretty(&file).expect("instance serializes");
            write_or_print(&out, &json)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckValuation {
            instance,
            kmax,
            mbudget,
        } => {
            let inst = read_instance(&instance)?;
            for (i, v) in inst.valuations().iter().enumerate() {
                let rmms = restricted_mms_feasible_check(
                    v,
                    kmax,
                    mbudget,
                    DEFAULT_ENUMERATION_BUDGET,
                )
                .map_err(|e| fail("check-valuation", &e))?;
                let gc = good_cancelable_check(v, mbudget, DEFAULT_ENUMERATION_BUDGET)
                    .map_err(|e| fail("check-valuation", &e))?;
                println!(
                    "agent {i}: restricted-MMS-feasible: {}",
                    if rmms.is_none() { "yes" } else { "no" }
                );
                if let Some(ce) = rmms {
                    println!(
                        "  counterexample: S={:?} k={} X={:?} Z={:?}",
                        ce.s.to_indices(),
                        ce.k,
                        ce.x.iter().map(|b| b.to_indices()).collect::<Vec<_>>(),
                        ce.z.iter().map(|b| b.to_indices()).collect::<Vec<_>>()
                    );
                }
                println!(
                    "agent {i}: good-cancelable: {}",
                    if gc.is_none() { "yes" } else { "no" }
                );
                if let Some(ce) = gc {
                    println!(
                        "  counterexample: Q={:?} R={:?} S={:?} T={:?}",
                        ce.q.to_indices(),
                        ce.r.to_indices(),
                        ce.s.to_indices(),
                        ce.t.to_indices()
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Fuzz {
            runs,
            nmax,
            mmax,
            seed,
        } => {
            let kinds = [
                ValuationKind::Additive,
                ValuationKind::BudgetAdditive,
                ValuationKind::UnitDemand,
                ValuationKind::Multiplicative,
            ];
            for run in 0..runs {
                let run_seed = seed.wrapping_add(run);
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(run_seed);
                let kind = kinds[(rng.next_u64() % 4) as usize];
                let spec = GeneratorSpec {
                    n: 1 + (rng.next_u64() as usize % nmax.max(1)),
                    m: rng.next_u64() as usize % (mmax + 1),
                    kind,
                    value_lo: if kind == ValuationKind::Multiplicative { 1 } else { 0 },
                    value_hi: 8,
                    budget_lo: 1,
                    budget_hi: 16,
                    seed: run_seed,
                };
                let outcome = fuzz_one(&spec);
                if let Err(e) = outcome {
                    eprintln!("mxsefl: fuzz failure at run {run} (repro seed {run_seed}): {e}");
                    return Ok(exit_for(&e));
                }
            }
            println!("fuzz: {runs} runs passed");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn fuzz_one(spec: &GeneratorSpec) -> Result<(), Error> {
    let inst = generate(spec)?;
    let cfg = SolverConfig {
        debug_assertions: true,
        ..SolverConfig::default()
    };
    let (alloc, trace) = mxs_efl_allocate(&inst, &cfg)?;
    let report = audit_allocation(&inst, &alloc, &AuditOptions::default())?;
    if !report.verdict {
        return Err(Error::InvalidInput(format!(
            "audit rejected solver output: {}",
            serde_json::to_string(&report).expect("report serializes")
        )));
    }
    // Cross-check the matching against brute force on every partition the
    // solver consulted.
    let ctx = FairnessCtx::new(&inst, cfg.enumeration_budget);
    for (idx, event) in trace.events.iter().enumerate() {
        if let mxsefl::solver::TraceEvent::MatchingChecked { bundles, fair } = event {
            let x = Partition::new(
                inst.num_goods(),
                bundles
                    .iter()
                    .map(|b| b.iter().map(|&g| mxsefl::GoodId(g)).collect())
                    .collect(),
            )?;
            let brute = mxsefl::oracle::brute_force_fair_association_exists(&ctx, &x)?;
            if brute != *fair {
                return Err(Error::InvariantViolation(format!(
                    "matching/brute-force disagreement at event {idx}"
                )));
            }
        }
    }
    Ok(())
}
