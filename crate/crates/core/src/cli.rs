//! Command-line front end.
//!
//! Every report is a JSON envelope carrying the tool version and the full
//! [`AnalysisConfig`]. Reports go to standard output, or to `--report FILE`
//! with a one-line summary on standard output. Commands that write a
//! directory also put their report there and print only the summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::blockcode::{codes_agree, compose, image_of, SlidingBlockCode};
use crate::classdeg::{class_degree, class_degree_upper, ClassDegreeStatus};
use crate::decomp::build_decomposition;
use crate::fixtures::{named_fixture, named_fixtures, random_corpus, CorpusBounds};
use crate::fto::{degree_report, is_finite_to_one};
use crate::io::{
    code_from_json, code_to_value, measure_from_json, measure_to_value, potential_from_json, presentation_from_json,
    presentation_to_value, to_pretty, transition_block_to_value, ytilde_to_value,
};
use crate::relopt::{build_relaxation_for, decomposition_crosscheck, solve_relaxation, support_report};
use crate::shiftspace::{is_irreducible, period, Presentation};
use crate::thermo::{
    entropy, equilibrium_state, pressure, relative_entropy_bounds, sofic_equilibrium_state, tuncel_lift, Potential,
};
use crate::{AnalysisConfig, Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "shiftcode", version, about = "Factor codes on shifts of finite type")]
pub struct Cli {
    /// Analysis configuration (JSON). Missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here and print a summary instead.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct CodeSource {
    /// Code file (JSON).
    #[arg(long)]
    pub code: Option<PathBuf>,
    /// Built-in fixture name.
    #[arg(long)]
    pub fixture: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ShiftSource {
    /// Presentation file (JSON).
    #[arg(long)]
    pub shift: Option<PathBuf>,
    /// Use the domain of a built-in fixture.
    #[arg(long)]
    pub fixture: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Irreducibility, period, finite-to-one test and degree or class degree.
    Analyze {
        #[command(flatten)]
        src: CodeSource,
    },
    /// Degree of a finite-to-one code.
    Degree {
        #[command(flatten)]
        src: CodeSource,
    },
    /// Class degree with its trace and minimal transition block.
    ClassDegree {
        #[command(flatten)]
        src: CodeSource,
        /// Only search words up to this length.
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Factor the code as a class-degree-one code followed by a
    /// finite-to-one code, and verify the factorization.
    Decompose {
        #[command(flatten)]
        src: CodeSource,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Topological pressure of a potential.
    Pressure {
        #[command(flatten)]
        src: ShiftSource,
        /// Potential file; zero when omitted.
        #[arg(long)]
        phi: Option<PathBuf>,
    },
    /// Equilibrium state of a potential.
    Equilibrium {
        #[command(flatten)]
        src: ShiftSource,
        #[arg(long)]
        phi: Option<PathBuf>,
    },
    /// Lift of the equilibrium state of `psi` through a finite-to-one code.
    Lift {
        #[command(flatten)]
        src: CodeSource,
        /// Potential on the image; zero when omitted.
        #[arg(long)]
        psi: Option<PathBuf>,
    },
    /// Relative equilibrium state relaxed to words of length `order`.
    Mmre {
        #[command(flatten)]
        src: CodeSource,
        /// Target measure on the image (JSON).
        #[arg(long)]
        nu: PathBuf,
        /// Potential on the domain; zero when omitted.
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
        /// Decomposition directory written by `decompose`.
        #[arg(long)]
        crosscheck: Option<PathBuf>,
    },
    /// Seeded random 1-block codes on irreducible vertex shifts.
    RandomCorpus {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        max_symbols: usize,
        #[arg(long, default_value_t = 5)]
        max_states: usize,
        /// Keep only finite-to-one codes.
        #[arg(long)]
        finite_to_one: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in fixtures.
    Fixtures,
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } => EXIT_RESOURCE,
        Error::StabilizationInconclusive | Error::SolverStalled(_) | Error::Infeasible(_) => EXIT_VERIFICATION,
        _ => EXIT_PRECONDITION,
    }
}

struct Outcome {
    report: Value,
    summary: String,
    status: u8,
}

pub fn main_with(cli: Cli) -> ExitCode {
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("shiftcode: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Runs a parsed command and returns its exit status.
pub fn run(cli: &Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).map_err(|e| Error::Parse(format!("config: {e}")))?,
        None => AnalysisConfig::default(),
    };
    let name = command_name(&cli.command);
    let out = dispatch(&cli.command, cfg)?;
    let text = to_pretty(&out.report);
    let writes_dir = matches!(cli.command, Command::Decompose { .. } | Command::RandomCorpus { .. });
    match &cli.report {
        Some(p) => {
            fs::write(p, text)?;
            println!("{name}: {}", out.summary);
        }
        None if writes_dir => println!("{name}: {}", out.summary),
        None => print!("{text}"),
    }
    Ok(out.status)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze { .. } => "analyze",
        Command::Degree { .. } => "degree",
        Command::ClassDegree { .. } => "class-degree",
        Command::Decompose { .. } => "decompose",
        Command::Pressure { .. } => "pressure",
        Command::Equilibrium { .. } => "equilibrium",
        Command::Lift { .. } => "lift",
        Command::Mmre { .. } => "mmre",
        Command::RandomCorpus { .. } => "random-corpus",
        Command::Fixtures => "fixtures",
    }
}

/// The report envelope.
pub fn envelope(command: &str, cfg: &AnalysisConfig, result: impl Serialize) -> Value {
    json!({
        "tool": "shiftcode",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
        "result": result,
    })
}

fn load_code(src: &CodeSource, cfg: &AnalysisConfig) -> Result<SlidingBlockCode> {
    match (&src.code, &src.fixture) {
        (Some(p), _) => code_from_json(&fs::read_to_string(p)?, p.parent(), &cfg.limits),
        (None, Some(n)) => fixture_code(n),
        (None, None) => Err(Error::InvalidArgument("give --code or --fixture".into())),
    }
}

fn fixture_code(name: &str) -> Result<SlidingBlockCode> {
    named_fixture(name)
        .map(|f| f.code)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown fixture {name:?}")))
}

fn load_shift(src: &ShiftSource) -> Result<Presentation> {
    match (&src.shift, &src.fixture) {
        (Some(p), _) => presentation_from_json(&fs::read_to_string(p)?),
        (None, Some(n)) => Ok(fixture_code(n)?.domain().clone()),
        (None, None) => Err(Error::InvalidArgument("give --shift or --fixture".into())),
    }
}

fn load_potential(path: Option<&Path>, x: &Presentation, cfg: &AnalysisConfig) -> Result<Potential> {
    match path {
        Some(p) => potential_from_json(&fs::read_to_string(p)?, x, &cfg.limits),
        None => Potential::zero(x, &cfg.limits),
    }
}

fn require_irreducible(x: &Presentation) -> Result<()> {
    if is_irreducible(x) {
        Ok(())
    } else {
        Err(Error::NotIrreducible)
    }
}

fn dispatch(command: &Command, mut cfg: AnalysisConfig) -> Result<Outcome> {
    let name = command_name(command);
    match command {
        Command::Analyze { src } => {
            let pi = load_code(src, &cfg)?;
            let x = pi.domain();
            require_irreducible(x)?;
            let image = image_of(&pi, &cfg.limits)?;
            let fto = is_finite_to_one(&pi, &cfg.limits)?;
            let (degree, cd, summary) = if fto.finite_to_one {
                let d = degree_report(&pi, &cfg)?;
                let s = format!("finite-to-one, degree {}", d.degree.map_or("?".into(), |v| v.to_string()));
                (Some(d), None, s)
            } else {
                let c = class_degree(&pi, &cfg)?;
                let s = format!("infinite-to-one, class degree {} ({:?})", c.class_degree, c.status);
                (None, Some(c), s)
            };
            let result = json!({
                "domain": {
                    "kind": x.kind(),
                    "symbols": x.num_symbols(),
                    "states": x.num_states(),
                    "irreducible": true,
                    "period": period(x)?,
                },
                "image": { "kind": image.kind(), "symbols": image.num_symbols(), "states": image.num_states() },
                "finite_to_one": fto,
                "degree": degree,
                "class_degree": cd,
            });
            Ok(Outcome { report: envelope(name, &cfg, result), summary, status: EXIT_OK })
        }
        Command::Degree { src } => {
            let pi = load_code(src, &cfg)?;
            require_irreducible(pi.domain())?;
            let d = degree_report(&pi, &cfg)?;
            let (summary, status) = match d.degree {
                Some(v) if d.finite_to_one => (format!("degree {v}"), EXIT_OK),
                _ if !d.finite_to_one => ("not finite-to-one".to_string(), EXIT_PRECONDITION),
                _ => ("degree search did not stabilize".to_string(), EXIT_VERIFICATION),
            };
            Ok(Outcome { report: envelope(name, &cfg, &d), summary, status })
        }
        Command::ClassDegree { src, max_len } => {
            let pi = load_code(src, &cfg)?;
            require_irreducible(pi.domain())?;
            let r = match max_len {
                Some(l) => class_degree_upper(&pi, *l, &cfg)?,
                None => class_degree(&pi, &cfg)?,
            };
            let status = if r.status == ClassDegreeStatus::Inconclusive { EXIT_VERIFICATION } else { EXIT_OK };
            let summary = format!("class degree {} ({:?}), witness {}", r.class_degree, r.status, r.witness_text);
            Ok(Outcome { report: envelope(name, &cfg, &r), summary, status })
        }
        Command::Decompose { src, out } => {
            let pi = load_code(src, &cfg)?;
            let d = build_decomposition(&pi, &cfg)?;
            fs::create_dir_all(out)?;
            let x_names = d.normalized.domain.alphabet().to_vec();
            let ytilde = ytilde_to_value(&d, pi.codomain(), &x_names);
            fs::write(out.join("ytilde.json"), to_pretty(&ytilde))?;
            fs::write(out.join("pi1.json"), to_pretty(&code_to_value(&d.pi1)))?;
            fs::write(out.join("pi2.json"), to_pretty(&code_to_value(&d.pi2)))?;
            let result = json!({
                "transition_block": transition_block_to_value(&d.tb, pi.codomain(), &x_names),
                "class_degree": &d.class_degree,
                "ytilde": { "symbols": d.ytilde.num_symbols(), "states": d.ytilde.num_states() },
                "verification": &d.report,
            });
            let report = envelope(name, &cfg, result);
            fs::write(out.join("report.json"), to_pretty(&report))?;
            let r = &d.report;
            let summary = format!(
                "class degree {}, composition {}, pi2 degree {}, pi1 class degree one {}",
                r.class_degree,
                pass(r.composition_ok),
                pass(r.pi2_degree_equals_class_degree),
                pass(r.pi1_class_degree_one)
            );
            let status = if r.all_passed { EXIT_OK } else { EXIT_VERIFICATION };
            Ok(Outcome { report, summary, status })
        }
        Command::Pressure { src, phi } => {
            let x = load_shift(src)?;
            require_irreducible(&x)?;
            let phi = load_potential(phi.as_deref(), &x, &cfg)?;
            let p = pressure(&x, &phi, &cfg)?;
            let status = if p.converged { EXIT_OK } else { EXIT_VERIFICATION };
            let summary = format!("pressure {:.15}", p.value);
            Ok(Outcome { report: envelope(name, &cfg, &p), summary, status })
        }
        Command::Equilibrium { src, phi } => {
            let x = load_shift(src)?;
            require_irreducible(&x)?;
            let phi = load_potential(phi.as_deref(), &x, &cfg)?;
            let p = pressure(&x, &phi, &cfg)?;
            let result = if x.kind().is_sft() {
                let mu = equilibrium_state(&x, &phi, &cfg)?;
                json!({ "pressure": p.value, "entropy": entropy(&mu), "measure": measure_to_value(&mu) })
            } else {
                let hm = sofic_equilibrium_state(&x, &phi, &cfg)?;
                let labels: Vec<&String> = hm.map.iter().map(|&s| &hm.alphabet[s]).collect();
                json!({ "pressure": p.value, "cover_measure": measure_to_value(&hm.base), "labels": labels })
            };
            let summary = format!("pressure {:.15}", p.value);
            Ok(Outcome { report: envelope(name, &cfg, result), summary, status: EXIT_OK })
        }
        Command::Lift { src, psi } => {
            let pi = load_code(src, &cfg)?;
            require_irreducible(pi.domain())?;
            let y = image_of(&pi, &cfg.limits)?;
            let psi = load_potential(psi.as_deref(), &y, &cfg)?;
            let lift = tuncel_lift(&pi, &psi, &cfg)?;
            let nc = crate::blockcode::normalize(&pi, &cfg.limits)?;
            let bracket = relative_entropy_bounds(&lift.normalized_measure, &nc.code, cfg.lift_word_len, &cfg.limits)?;
            let bracket_ok = bracket.lower <= 1e-9 && bracket.upper >= -1e-9;
            let result = json!({
                "lift": &lift,
                "measure": measure_to_value(&lift.measure),
                "relative_entropy": &bracket,
            });
            let summary = format!(
                "pushforward error {:.3e}, pressure gap {:.3e}, relative entropy in [{:.3e}, {:.3e}]",
                lift.pushforward_max_error, lift.pressure_gap, bracket.lower, bracket.upper
            );
            let status = if lift.passed && bracket_ok { EXIT_OK } else { EXIT_VERIFICATION };
            Ok(Outcome { report: envelope(name, &cfg, result), summary, status })
        }
        Command::Mmre { src, nu, phi, order, seeds, crosscheck } => {
            if let Some(k) = order {
                cfg.order = *k;
            }
            if let Some(s) = seeds {
                cfg.seeds = *s;
            }
            let pi = load_code(src, &cfg)?;
            require_irreducible(pi.domain())?;
            let nu = measure_from_json(&fs::read_to_string(nu)?)?;
            let phi = load_potential(phi.as_deref(), pi.domain(), &cfg)?;
            let (problem, nc) = build_relaxation_for(&pi, &nu, &phi, cfg.order, &cfg)?;
            let solved = solve_relaxation(&problem, cfg.seeds, &cfg)?;
            let support = support_report(&solved, &nc.domain, cfg.tolerances.support_floor);
            let seeds_agree = solved.max_pairwise_distance <= cfg.tolerances.seed_agreement;
            let check = match crosscheck {
                Some(dir) => {
                    let pi1 = code_from_json(&fs::read_to_string(dir.join("pi1.json"))?, Some(dir), &cfg.limits)?;
                    let pi2 = code_from_json(&fs::read_to_string(dir.join("pi2.json"))?, Some(dir), &cfg.limits)?;
                    if !codes_agree(&compose(&pi2, &pi1, &cfg.limits)?, &pi, &cfg.limits)? {
                        return Err(Error::InvalidArgument(format!(
                            "the factors in {} do not compose to the code",
                            dir.display()
                        )));
                    }
                    Some(decomposition_crosscheck(&pi, (&pi1, &pi2), &nu, &phi, cfg.order, cfg.seeds, &cfg)?)
                }
                None => None,
            };
            let mut summary = format!(
                "{} {:.12}, seeds agree {}, full support {}",
                solved.value_kind,
                solved.value,
                pass(seeds_agree),
                support.full_support
            );
            if let Some(c) = &check {
                summary.push_str(&format!(", crosscheck {}", pass(c.agree)));
            }
            let status = if seeds_agree && check.as_ref().is_none_or(|c| c.agree) { EXIT_OK } else { EXIT_VERIFICATION };
            let result = json!({ "solve": &solved, "support": &support, "crosscheck": &check });
            Ok(Outcome { report: envelope(name, &cfg, result), summary, status })
        }
        Command::RandomCorpus { seed, count, max_symbols, max_states, finite_to_one, out } => {
            let bounds = CorpusBounds { max_symbols: *max_symbols, max_states: *max_states, finite_to_one: *finite_to_one };
            let corpus = random_corpus(*seed, *count, bounds)?;
            fs::create_dir_all(out)?;
            let mut files = Vec::with_capacity(corpus.len());
            for f in &corpus {
                let file = format!("{}.json", f.name);
                fs::write(out.join(&file), to_pretty(&code_to_value(&f.code)))?;
                files.push(file);
            }
            let result = json!({ "seed": seed, "count": count, "bounds": bounds, "files": files });
            let report = envelope(name, &cfg, result);
            fs::write(out.join("index.json"), to_pretty(&report))?;
            let summary = format!("{} codes in {}", corpus.len(), out.display());
            Ok(Outcome { report, summary, status: EXIT_OK })
        }
        Command::Fixtures => {
            let list: Vec<Value> = named_fixtures()
                .iter()
                .map(|f| json!({ "name": f.name, "code": code_to_value(&f.code), "image": presentation_to_value(&f.image) }))
                .collect();
            let summary = named_fixtures().iter().map(|f| f.name.clone()).collect::<Vec<_>>().join(", ");
            Ok(Outcome { report: envelope(name, &cfg, list), summary, status: EXIT_OK })
        }
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}
