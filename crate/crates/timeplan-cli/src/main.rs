//! Command line front end. Every subcommand is a thin wrapper over the
//! library: exit code 0 means accepted/success, 1 means rejected/no result,
//! 2 means the input could not be used at all. Artifacts (JSON, SVG) and
//! validation reports go to standard output; diagnostics go to standard
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use timeplan::minsky::{run, Computation, Machine};
use timeplan::model::Domain;
use timeplan::reduction::{compile, encode_computation, generate_witness};
use timeplan::solver::bounded_solve;
use timeplan::validator::{is_plan, Semantics};
use timeplan_cli::formats;
use timeplan_cli::render::render_svg;

#[derive(Parser)]
#[command(name = "timeplan", version, about = "Timeline-based planning tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a plan against a domain and print a report.
    Validate {
        domain: PathBuf,
        plan: PathBuf,
        /// Require witness tokens to start no earlier than their trigger.
        #[arg(long)]
        future: bool,
    },
    /// Compile a two-counter machine into a planning domain.
    CompileMinsky { machine: PathBuf },
    /// Print the machine's shortest halting computation.
    Simulate {
        machine: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Simulate, compile, and print a validated witness plan.
    Witness {
        machine: PathBuf,
        /// Validate the witness under future semantics.
        #[arg(long)]
        future: bool,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Search for a plan with at most `bound` tokens per timeline.
    Solve {
        domain: PathBuf,
        #[arg(long)]
        bound: usize,
        /// Search under future semantics.
        #[arg(long)]
        future: bool,
    },
    /// Render a plan as an SVG timeline chart.
    Render { plan: PathBuf },
}

/// What the exit code reports. Input errors travel as `Err` instead.
enum Outcome {
    Accepted,
    Rejected,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(Outcome::Accepted) => ExitCode::SUCCESS,
        Ok(Outcome::Rejected) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn semantics(future: bool) -> Semantics {
    if future {
        Semantics::Future
    } else {
        Semantics::Standard
    }
}

fn load_machine(path: &Path) -> Result<Machine> {
    formats::parse_machine(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_domain(path: &Path) -> Result<Domain> {
    formats::parse_domain(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn halting_run(machine: &Machine, max_steps: usize) -> Option<Computation> {
    let found = run(machine, max_steps);
    if found.is_none() {
        eprintln!("no halting computation within {max_steps} steps");
    }
    found
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Validate {
            domain,
            plan,
            future,
        } => {
            let d = load_domain(&domain)?;
            let p = formats::parse_plan(&read(&plan)?, &d)
                .with_context(|| format!("parsing {}", plan.display()))?;
            let report = is_plan(&d, &p, semantics(future))?;
            println!(
                "verdict: {}",
                if report.verdict {
                    "accepted"
                } else {
                    "rejected"
                }
            );
            for (variable, violation) in &report.timeline_violations {
                println!("timeline {variable}: {violation}");
            }
            for (index, outcome) in report.rule_outcomes.iter().enumerate() {
                if outcome.satisfied {
                    println!("rule {index}: satisfied");
                } else if let Some(t) = &outcome.failing_trigger {
                    println!(
                        "rule {index}: unsatisfied at trigger {}[{}]",
                        t.variable, t.index
                    );
                } else {
                    println!("rule {index}: unsatisfied");
                }
            }
            Ok(verdict(report.verdict))
        }
        Command::CompileMinsky { machine } => {
            let m = load_machine(&machine)?;
            print!("{}", formats::serialize_domain(&compile(&m)));
            Ok(Outcome::Accepted)
        }
        Command::Simulate { machine, max_steps } => {
            let m = load_machine(&machine)?;
            let Some(computation) = halting_run(&m, max_steps) else {
                return Ok(Outcome::Rejected);
            };
            for c in &computation {
                println!("{} {} {}", c.location, c.counters[0], c.counters[1]);
            }
            Ok(Outcome::Accepted)
        }
        Command::Witness {
            machine,
            future,
            max_steps,
        } => {
            let m = load_machine(&machine)?;
            let Some(computation) = halting_run(&m, max_steps) else {
                return Ok(Outcome::Rejected);
            };
            let domain = compile(&m);
            let word = encode_computation(&m, &computation).context("encoding the computation")?;
            let witness = generate_witness(&m, &computation).context("placing witness tokens")?;
            eprintln!(
                "computation of {} steps encodes as a {}-symbol word",
                computation.len() - 1,
                word.len()
            );
            let report = is_plan(&domain, &witness, semantics(future))?;
            if !report.verdict {
                eprintln!("generated witness failed validation");
                return Ok(Outcome::Rejected);
            }
            print!("{}", formats::serialize_plan(&witness));
            Ok(Outcome::Accepted)
        }
        Command::Solve {
            domain,
            bound,
            future,
        } => {
            let d = load_domain(&domain)?;
            match bounded_solve(&d, bound, semantics(future)) {
                Some(plan) => {
                    print!("{}", formats::serialize_plan(&plan));
                    Ok(Outcome::Accepted)
                }
                None => {
                    eprintln!("no plan with at most {bound} tokens per timeline");
                    Ok(Outcome::Rejected)
                }
            }
        }
        Command::Render { plan } => {
            let p = formats::parse_plan_loose(&read(&plan)?)
                .with_context(|| format!("parsing {}", plan.display()))?;
            print!("{}", render_svg(&p));
            Ok(Outcome::Accepted)
        }
    }
}

fn verdict(accepted: bool) -> Outcome {
    if accepted {
        Outcome::Accepted
    } else {
        Outcome::Rejected
    }
}
