use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use oplab::fixtures::{check_builtin, check_claims, FixtureOutcome};
use oplab::io::{parse_document, parse_matrix, to_json, MatrixFormat};
use oplab::properties::{property_report, DEFAULT_CENTERED_DEPTH, MAX_CENTERED_DEPTH};
use oplab::search::{hunt, Family, HuntConfig, RandomSpec, Target};
use oplab::symmetry::OracleConfig;
use oplab::theorems::{run_suite, SuiteConfig, TheoremId, TheoremResult};
use oplab::transforms::{aluthge_iterates, duggal, polar, PolarMode};
use oplab::{ComplexMatrix, OpError, Tolerances};

#[derive(Parser)]
#[command(name = "oplab", version, about = "Binormal and complex symmetric matrix laboratory")]
struct Cli {
    /// Certificate residual tolerance.
    #[arg(long, global = true)]
    tol_cert: Option<f64>,
    /// Minimum refutation margin.
    #[arg(long, global = true)]
    tol_screen: Option<f64>,
    /// Relative commutator tolerance.
    #[arg(long, global = true)]
    tol_comm: Option<f64>,
    #[arg(long, global = true, env = "OPLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Polar,
    Aluthge,
    Duggal,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Json,
    Mtx,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one matrix and print its property report.
    Check {
        file: PathBuf,
        /// Input format; `.mtx` files default to Matrix Market.
        #[arg(long, value_enum)]
        input: Option<InputFormat>,
        /// Iterated Aluthge depth for the centered test.
        #[arg(long, default_value_t = DEFAULT_CENTERED_DEPTH)]
        depth: usize,
    },
    /// Polar decomposition, Aluthge or Duggal transform of one matrix.
    Transform {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Number of Aluthge iterates to print.
        #[arg(long)]
        iterate: Option<usize>,
        /// Extend the polar factor to a unitary.
        #[arg(long)]
        unitary: bool,
        #[arg(long, value_enum)]
        input: Option<InputFormat>,
    },
    /// Run theorem checks over a generated ensemble.
    Verify {
        /// Comma separated theorem ids, or `all`.
        #[arg(long, default_value = "all")]
        theorems: String,
        /// Generator family, e.g. `involution` or `unitary_conjugate(integer_dense)`.
        #[arg(long)]
        family: String,
        /// Instances per dimension.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Dimension: a single value, a list `2,4` or a range `2..6`.
        #[arg(long, default_value = "3")]
        n: String,
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
    /// Search a generated ensemble for matrices satisfying a property expression.
    Hunt {
        /// Expression such as `binormal & cs & !sq.binormal`.
        #[arg(long)]
        target: String,
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        bound: i64,
        /// Stop after this many matches.
        #[arg(long)]
        max_found: Option<usize>,
        /// Also write the outcome to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the built-in example matrices, or claim documents given as files.
    Fixtures { files: Vec<PathBuf> },
}

/// Exit codes: 0 success, 1 violation or mismatch, 2 usage or input error.
enum Outcome {
    Clean,
    Mismatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("oplab: {e}");
            ExitCode::from(2)
        }
    }
}

fn tolerances(cli: &Cli) -> oplab::Result<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(v) = cli.tol_cert {
        tol.eps_cert = v;
    }
    if let Some(v) = cli.tol_screen {
        tol.eps_screen = v;
    }
    if let Some(v) = cli.tol_comm {
        tol.eps_comm = v;
    }
    tol.validate()?;
    Ok(tol)
}

fn read_matrix(path: &Path, input: Option<InputFormat>) -> oplab::Result<ComplexMatrix> {
    let text =
        fs::read_to_string(path).map_err(|e| OpError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let format = match input {
        Some(InputFormat::Json) => MatrixFormat::Json,
        Some(InputFormat::Mtx) => MatrixFormat::MatrixMarket,
        None => MatrixFormat::from_path(path),
    };
    parse_matrix(&text, format).map_err(|e| match e {
        OpError::Parse { line, column, message } => OpError::Parse {
            line,
            column,
            message: format!("{} ({})", message, path.display()),
        },
        other => other,
    })
}

fn parse_dims(s: &str) -> oplab::Result<Vec<usize>> {
    let bad = || OpError::InvalidArgument(format!("bad dimension list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit<T: Serialize>(value: &T, format: Format, text: impl FnOnce() -> String) {
    let body = match format {
        Format::Json => to_json(value) + "\n",
        Format::Text => text(),
    };
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(body.as_bytes()).and_then(|()| out.flush());
}

fn run(cli: &Cli) -> oplab::Result<Outcome> {
    let tol = tolerances(cli)?;
    let oracle = OracleConfig::with_seed(cli.seed);
    if cli.jobs == 0 {
        return Err(OpError::InvalidArgument("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Check { file, input, depth } => {
            if !(1..=MAX_CENTERED_DEPTH).contains(depth) {
                return Err(OpError::InvalidArgument(format!("--depth must be in 1..={MAX_CENTERED_DEPTH}")));
            }
            let t = read_matrix(file, *input)?;
            let report = property_report(&t, *depth, &tol, &oracle)?;
            emit(&report, cli.format.unwrap_or(Format::Json), || {
                let cs = match report.cs.conjugation() {
                    Some(c) => format!("certified_cs\nconjugation J:\n{}", c.matrix()),
                    None => format!("{:?}\n", report.cs.kind()),
                };
                format!(
                    "n: {}\nnormal: {}\nquasinormal: {}\nhyponormal: {}\nbinormal: {}\nparanormal: {:?}\ncentered (depth {}): {}\ncs: {cs}",
                    report.n,
                    report.normal.holds,
                    report.quasinormal.holds,
                    report.hyponormal.holds,
                    report.binormal.holds,
                    report.paranormal.decided(),
                    report.centered.depth,
                    report.centered.holds,
                )
            });
            Ok(Outcome::Clean)
        }
        Command::Transform {
            file,
            kind,
            iterate,
            unitary,
            input,
        } => {
            let t = read_matrix(file, *input)?;
            let format = cli.format.unwrap_or(Format::Json);
            match kind {
                Kind::Polar => {
                    let mode = if *unitary { PolarMode::UnitaryExtension } else { PolarMode::Canonical };
                    let parts = polar(&t, mode, &tol)?;
                    emit(&parts, format, || format!("U:\n{}P:\n{}", parts.u, parts.p));
                }
                Kind::Duggal => {
                    let d = duggal(&t, &tol)?;
                    emit(&d, format, || d.to_string());
                }
                Kind::Aluthge => {
                    let its = aluthge_iterates(&t, iterate.unwrap_or(1), &tol)?;
                    emit(&its, format, || {
                        its.iter().enumerate().map(|(k, m)| format!("iterate {}:\n{m}", k + 1)).collect()
                    });
                }
            }
            Ok(Outcome::Clean)
        }
        Command::Verify {
            theorems,
            family,
            count,
            n,
            bound,
        } => {
            let ids = TheoremId::parse_list(theorems)?;
            let family: Family = family.parse()?;
            let cfg = SuiteConfig {
                tol,
                jobs: cli.jobs,
                ..SuiteConfig::default()
            };
            let mut totals: Vec<TheoremResult> = ids.iter().map(|&id| TheoremResult::new(id)).collect();
            for dim in parse_dims(n)? {
                let spec = RandomSpec::new(family.clone(), dim, cli.seed, *count).with_bound(*bound);
                for (acc, r) in totals.iter_mut().zip(run_suite(&spec, &ids, &cfg)?) {
                    acc.merge(r);
                }
            }
            let violations: usize = totals.iter().map(|r| r.violations.len()).sum();
            emit(&totals, cli.format.unwrap_or(Format::Json), || {
                let mut s = String::new();
                for r in &totals {
                    s.push_str(&format!(
                        "{:<24} run {:>6}  pass {:>6}  skip {:>6}  fail {:>4}\n",
                        r.theorem_id.as_str(),
                        r.instances_run,
                        r.passed,
                        r.skipped,
                        r.violations.len()
                    ));
                    for (d, k) in r.direction_coverage() {
                        s.push_str(&format!("    {d:<28} checked {k}\n"));
                    }
                }
                s
            });
            Ok(if violations == 0 { Outcome::Clean } else { Outcome::Mismatch })
        }
        Command::Hunt {
            target,
            family,
            budget,
            n,
            bound,
            max_found,
            out,
        } => {
            let target: Target = target.parse()?;
            let spec = RandomSpec::new(family.parse()?, *n, cli.seed, 1).with_bound(*bound);
            let cfg = HuntConfig {
                budget: *budget,
                max_found: *max_found,
                jobs: cli.jobs,
                oracle,
            };
            let outcome = hunt(&target, &spec, &cfg, &tol)?;
            if let Some(path) = out {
                fs::write(path, to_json(&outcome))
                    .map_err(|e| OpError::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
            }
            emit(&outcome, cli.format.unwrap_or(Format::Json), || {
                let mut s = format!("target {}: {} match(es) in {} samples\n", outcome.target, outcome.found.len(), outcome.examined);
                for m in &outcome.found {
                    s.push_str(&format!("index {} (seed {}):\n{}", m.index, m.seed, m.matrix));
                }
                s
            });
            Ok(if outcome.found.is_empty() { Outcome::Mismatch } else { Outcome::Clean })
        }
        Command::Fixtures { files } => {
            let outcomes: Vec<FixtureOutcome> = if files.is_empty() {
                check_builtin(&tol, &oracle)?
            } else {
                files
                    .iter()
                    .map(|p| {
                        let text = fs::read_to_string(p)
                            .map_err(|e| OpError::InvalidArgument(format!("cannot read {}: {e}", p.display())))?;
                        check_claims(&parse_document(&text)?, &tol, &oracle)
                    })
                    .collect::<oplab::Result<_>>()?
            };
            emit(&outcomes, cli.format.unwrap_or(Format::Text), || fixture_table(&outcomes));
            Ok(if outcomes.iter().all(|o| o.passed) { Outcome::Clean } else { Outcome::Mismatch })
        }
    }
}

fn fixture_table(outcomes: &[FixtureOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&format!("{} ({}x{}) {}\n", o.name, o.n, o.n, if o.passed { "PASS" } else { "FAIL" }));
        for c in &o.claims {
            let shown = |v: Option<oplab::io::Claim>| match v {
                Some(c) => to_json(&c).trim_matches('"').to_string(),
                None => "undecided".into(),
            };
            s.push_str(&format!(
                "  {:<4} {:<12} claimed {:<16} observed {:<16} {}\n",
                if c.holds { "ok" } else { "FAIL" },
                c.property,
                shown(Some(c.claimed)),
                shown(c.observed),
                c.evidence
            ));
        }
    }
    s
}
