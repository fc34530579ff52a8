use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use dmatroid::derived::{
    delta_a0_breakdown, derived_stats, histogram_csv, DeltaA0Report, DerivedResultJson, DerivedStats,
    DEFAULT_SUBSET_BUDGET,
};
use dmatroid::families::count_upward_closure;
use dmatroid::field::{
    longyear_derived, random_uniform_rep, weak_order_compare, AnyField, AnyRepresentation, FieldError, FieldSpec,
    MatrixJson,
};
use dmatroid::generators::{self, load_graph, matroid_to_json, read_input, GeneratorError};
use dmatroid::oracle::{self, check_circuit_axioms, AxiomReport, OracleError};
use dmatroid::{derive_circuits, DerivedError, ElemSet, FamilyError, Limits, Matroid};

/// Circuit-count threshold above which `derive` stops after a few
/// iterations unless limits are given explicitly.
const LARGE_UNIVERSE: usize = 24;
const LARGE_UNIVERSE_ITERATIONS: usize = 2;

#[derive(Parser)]
#[command(name = "dmatroid", version, about = "Derived matroids of matroids and their representations")]
struct Cli {
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main output here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format; `csv` prints the circuit-size histogram where one exists.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Build a matroid.
    Gen {
        #[command(subcommand)]
        which: GenKind,
    },
    /// Compute the combinatorial derived matroid.
    Derive {
        /// Matroid JSON, or `-` for standard input.
        matroid: PathBuf,
        /// Comma-separated `iter=N`, `size=N`, `budget=N`.
        #[arg(long)]
        limits: Option<String>,
        /// Add summary statistics.
        #[arg(long)]
        stats: bool,
        /// Add the breakdown of the first ε step on A₀ (implied by `iter=1`).
        #[arg(long)]
        delta_a0: bool,
        /// Also write the circuit-size histogram as CSV here.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Count the dependent sets of the combinatorial derived matroid.
    CountDependents {
        matroid: PathBuf,
        #[arg(long)]
        limits: Option<String>,
    },
    /// Oxley–Wang derived matroid of a matrix.
    OwDerive {
        matrix: PathBuf,
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Longyear derived matroid of a binary matroid.
    Longyear { matroid: PathBuf, matrix: PathBuf },
    /// Place two matroids on the same ground set in the weak order.
    Compare { first: PathBuf, second: PathBuf },
    /// Random matrix representing U(k, n).
    RandomRep {
        k: usize,
        n: usize,
        /// `Q`, a prime `p`, or `p^2`.
        #[arg(long)]
        field: String,
    },
    /// Run the brute-force oracles on a matroid or matrix file.
    Validate { file: PathBuf },
}

#[derive(Subcommand)]
enum GenKind {
    /// Uniform matroid U(k, n)
    Uniform { k: usize, n: usize },
    /// Cycle matroid of a graph given as JSON
    Graphic { graph: PathBuf },
    /// The Vámos matroid on 8 elements
    Vamos,
    /// The rank-3 matroid Q6
    Q6,
}

/// Exit codes.
const OK: u8 = 0;
const VALIDATION_FAILED: u8 = 1;
const USAGE: u8 = 2;
const LIMIT_REACHED: u8 = 3;

struct Output {
    body: String,
    code: u8,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, code: OK }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(cli.output.as_deref(), &out.body) {
                eprintln!("error: {e:#}");
                return ExitCode::from(USAGE);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        let budget = matches!(
            cause.downcast_ref::<DerivedError>(),
            Some(DerivedError::CombinatorialBudgetExceeded { .. } | DerivedError::Family(FamilyError::UniverseTooLarge { .. }))
        ) || matches!(cause.downcast_ref::<FamilyError>(), Some(FamilyError::UniverseTooLarge { .. }))
            || matches!(cause.downcast_ref::<OracleError>(), Some(OracleError::UniverseTooLarge { .. }))
            || matches!(
                cause.downcast_ref::<GeneratorError>(),
                Some(GeneratorError::CycleSpaceTooLarge { .. })
            )
            || matches!(
                cause.downcast_ref::<FieldError>(),
                Some(FieldError::TooManyCircuits { .. } | FieldError::FieldTooSmall { .. })
            );
        if budget {
            return LIMIT_REACHED;
        }
        let invalid = matches!(cause.downcast_ref::<GeneratorError>(), Some(GeneratorError::Invalid { .. }))
            || matches!(cause.downcast_ref::<FieldError>(), Some(FieldError::RepresentationMismatch));
        if invalid {
            return VALIDATION_FAILED;
        }
    }
    USAGE
}

fn emit(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn load_matroid(path: &Path) -> Result<Matroid> {
    Ok(generators::load_matroid(path)?)
}

fn load_representation(path: &Path) -> Result<AnyRepresentation> {
    let text = read_input(path)?;
    let json: MatrixJson =
        serde_json::from_str(&text).with_context(|| format!("{}: not a matrix file", path.display()))?;
    AnyRepresentation::from_json(&json).with_context(|| path.display().to_string())
}

fn parse_limits(spec: Option<&str>, m: &Matroid) -> Result<Limits> {
    let mut limits = Limits::default();
    let Some(spec) = spec else {
        if m.num_circuits() > LARGE_UNIVERSE {
            limits.max_iterations = LARGE_UNIVERSE_ITERATIONS;
        }
        return Ok(limits);
    };
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("limit {part:?} is not key=value"))?;
        let number: u64 = value
            .parse()
            .with_context(|| format!("limit {key} needs a non-negative integer, got {value:?}"))?;
        match key {
            "iter" => limits.max_iterations = number as usize,
            "size" => limits.max_set_size = Some(number as usize),
            "budget" => limits.subset_budget = number,
            _ => bail!("unknown limit {key:?}; expected iter, size or budget"),
        }
    }
    Ok(limits)
}

fn histogram_of(sets: &[ElemSet]) -> Vec<(usize, usize)> {
    let mut h = std::collections::BTreeMap::<usize, usize>::new();
    for s in sets {
        *h.entry(s.len()).or_default() += 1;
    }
    h.into_iter().collect()
}

fn histogram_text(hist: &[(usize, usize)]) -> String {
    hist.iter().map(|(s, c)| format!("size {s}: {c}\n")).collect()
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Gen { which } => {
            let m = match which {
                GenKind::Uniform { k, n } => generators::uniform(*k, *n)?,
                GenKind::Graphic { graph } => generators::graphic(&load_graph(graph)?)?,
                GenKind::Vamos => generators::vamos(),
                GenKind::Q6 => generators::q6(),
            };
            Ok(Output::ok(matroid_to_json(&m)))
        }
        Command::Derive {
            matroid,
            limits,
            stats,
            delta_a0,
            histogram,
        } => derive(cli, matroid, limits.as_deref(), *stats, *delta_a0, histogram.as_deref()),
        Command::CountDependents { matroid, limits } => {
            let m = load_matroid(matroid)?;
            let limits = parse_limits(limits.as_deref(), &m)?;
            let r = derive_circuits(&m, &limits)?;
            let count = count_upward_closure(&r.circuits, m.num_circuits())?;
            #[derive(Serialize)]
            struct Count {
                universe: usize,
                dependent_sets: u64,
                complete: bool,
            }
            let body = match cli.format {
                Format::Json => to_json(&Count {
                    universe: m.num_circuits(),
                    dependent_sets: count,
                    complete: r.complete,
                })?,
                _ => format!("{count}\n"),
            };
            Ok(Output {
                body,
                code: if r.complete { OK } else { LIMIT_REACHED },
            })
        }
        Command::OwDerive { matrix, histogram } => {
            let rep = load_representation(matrix)?;
            let ow = rep.ow_derived()?;
            let hist = histogram_of(ow.derived.circuits());
            if let Some(path) = histogram {
                write_file(path, &histogram_csv(&hist))?;
            }
            #[derive(Serialize)]
            struct Ow<'a> {
                field: FieldSpec,
                base: &'a Matroid,
                circuit_vectors: &'a [Vec<String>],
                derived: &'a Matroid,
                histogram: &'a [(usize, usize)],
            }
            let body = match cli.format {
                Format::Json => to_json(&Ow {
                    field: rep.field_spec(),
                    base: &ow.base,
                    circuit_vectors: &ow.vectors,
                    derived: &ow.derived,
                    histogram: &hist,
                })?,
                Format::Csv => histogram_csv(&hist),
                Format::Text => histogram_text(&hist),
            };
            Ok(Output::ok(body))
        }
        Command::Longyear { matroid, matrix } => {
            let m = load_matroid(matroid)?;
            let rep = load_representation(matrix)?;
            let derived = longyear_derived(&m, &rep)?;
            Ok(Output::ok(matroid_to_json(&derived)))
        }
        Command::Compare { first, second } => compare(cli, first, second),
        Command::RandomRep { k, n, field } => {
            let seed = cli.seed.ok_or_else(|| anyhow!("random-rep needs --seed"))?;
            let field = AnyField::from_cli(field)?;
            let rep = random_uniform_rep(*k, *n, field, seed)?;
            Ok(Output::ok(to_json(&rep.to_json())?))
        }
        Command::Validate { file } => validate(cli, file),
    }
}

#[derive(Serialize)]
struct DeriveOutput {
    #[serde(flatten)]
    result: DerivedResultJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<DerivedStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_a0: Option<DeltaA0Report>,
}

fn derive(
    cli: &Cli,
    path: &Path,
    limits: Option<&str>,
    stats: bool,
    delta_a0: bool,
    histogram: Option<&Path>,
) -> Result<Output> {
    let m = load_matroid(path)?;
    let limits = parse_limits(limits, &m)?;
    let r = derive_circuits(&m, &limits)?;
    let hist = r.size_histogram();
    if let Some(p) = histogram {
        write_file(p, &histogram_csv(&hist))?;
    }
    let breakdown = if delta_a0 || limits.max_iterations == 1 {
        Some(delta_a0_breakdown(&m, limits.subset_budget.max(DEFAULT_SUBSET_BUDGET))?)
    } else {
        None
    };
    let code = if r.complete { OK } else { LIMIT_REACHED };
    let body = match cli.format {
        Format::Json => to_json(&DeriveOutput {
            result: r.to_json(),
            stats: stats.then(|| derived_stats(&r)),
            delta_a0: breakdown,
        })?,
        Format::Csv => histogram_csv(&hist),
        Format::Text => {
            let mut s = format!(
                "circuits of the derived matroid: {} (complete: {})\n",
                r.circuits.len(),
                r.complete
            );
            s += &histogram_text(&hist);
            if stats {
                let st = derived_stats(&r);
                s += &format!(
                    "rank {} (bound {}), connected {}\n",
                    st.rank, st.rank_bound, st.connected
                );
            }
            if let Some(b) = &breakdown {
                s += &format!("new sets after one step: {}\n", b.new_sets);
                for c in &b.classes {
                    s += &format!(
                        "pairs of sizes {} and {} giving size {}: {} sets, {} outside A0\n",
                        c.first_size, c.second_size, c.result_size, c.raw, c.outside_a0
                    );
                }
            }
            s
        }
    };
    Ok(Output { body, code })
}

/// Reads a matroid from a matroid file, an `ow-derive` output (its derived
/// matroid), or a `derive` output (its `delta`).
fn load_comparable(path: &Path) -> Result<Matroid> {
    let text = read_input(path)?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))?;
    let inner = if value.get("circuits").is_some() {
        value
    } else if let Some(d) = value.get("derived") {
        d.clone()
    } else if let Some(d) = value.get("delta") {
        d.clone()
    } else {
        bail!("{}: expected a matroid, an ow-derive output or a derive output", path.display());
    };
    serde_json::from_value(inner).with_context(|| path.display().to_string())
}

fn compare(cli: &Cli, first: &Path, second: &Path) -> Result<Output> {
    let a = load_comparable(first)?;
    let b = load_comparable(second)?;
    let w = weak_order_compare(&a, &b)?;
    #[derive(Serialize)]
    struct Verdict {
        relation: dmatroid::field::Comparison,
        shared_circuits: usize,
        /// Circuits of one matroid that are not circuits of the other.
        first_only: Vec<String>,
        second_only: Vec<String>,
        first_only_histogram: Vec<(usize, usize)>,
        second_only_histogram: Vec<(usize, usize)>,
        /// Circuits of one matroid that are independent in the other; these
        /// decide the weak order.
        independent_in_second: Vec<String>,
        independent_in_first: Vec<String>,
    }
    let only = |x: &Matroid, y: &Matroid| -> Vec<ElemSet> {
        x.circuits().iter().copied().filter(|&c| y.circuit_index(c).is_none()).collect()
    };
    let (first_only, second_only) = (only(&a, &b), only(&b, &a));
    let render = |m: &Matroid, sets: &[ElemSet]| -> Vec<String> { sets.iter().map(|&c| m.format_set(c)).collect() };
    let verdict = Verdict {
        relation: w.relation,
        shared_circuits: a.num_circuits() - first_only.len(),
        first_only: render(&a, &first_only),
        second_only: render(&b, &second_only),
        first_only_histogram: histogram_of(&first_only),
        second_only_histogram: histogram_of(&second_only),
        independent_in_second: render(&a, &w.first_only),
        independent_in_first: render(&b, &w.second_only),
    };
    let body = match cli.format {
        Format::Json => to_json(&verdict)?,
        _ => format!(
            "{}\nshared circuits: {}\nfirst only: {}\nsecond only: {}\n",
            serde_json::to_value(verdict.relation)?.as_str().unwrap_or_default(),
            verdict.shared_circuits,
            verdict.first_only.len(),
            verdict.second_only.len(),
        ),
    };
    Ok(Output::ok(body))
}

fn validate(cli: &Cli, path: &Path) -> Result<Output> {
    let text = read_input(path)?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))?;
    let seed = cli.seed.unwrap_or(0);
    if value.get("entries").is_some() {
        let json: MatrixJson = serde_json::from_value(value).with_context(|| path.display().to_string())?;
        #[derive(Serialize)]
        struct MatrixReport {
            represented: Option<Matroid>,
            circuit_axioms: Option<AxiomReport>,
            error: Option<String>,
            passed: bool,
        }
        let report = match AnyRepresentation::from_json(&json).and_then(|r| r.matroid()) {
            Ok(m) => {
                let axioms = check_circuit_axioms(m.circuits());
                MatrixReport {
                    passed: axioms.passed,
                    represented: Some(m),
                    circuit_axioms: Some(axioms),
                    error: None,
                }
            }
            Err(e) => MatrixReport {
                represented: None,
                circuit_axioms: None,
                error: Some(e.to_string()),
                passed: false,
            },
        };
        let code = if report.passed { OK } else { VALIDATION_FAILED };
        return Ok(Output {
            body: to_json(&report)?,
            code,
        });
    }
    // Matroid files are checked without the loader's own validation so
    // that broken circuit lists still get a witness report.
    #[derive(serde::Deserialize)]
    struct Raw {
        n: usize,
        circuits: Vec<Vec<usize>>,
    }
    let raw: Raw = serde_json::from_value(value.clone()).with_context(|| format!("{}: not a matroid file", path.display()))?;
    if raw.n > 64 || raw.circuits.iter().flatten().any(|&e| e >= raw.n) {
        bail!("{}: elements must lie in 0..n with n <= 64", path.display());
    }
    let sets: Vec<ElemSet> = raw.circuits.iter().map(|c| c.iter().copied().collect()).collect();
    let axioms = check_circuit_axioms(&sets);
    if !axioms.passed {
        #[derive(Serialize)]
        struct Failed {
            circuit_axioms: AxiomReport,
            passed: bool,
        }
        return Ok(Output {
            body: to_json(&Failed {
                circuit_axioms: axioms,
                passed: false,
            })?,
            code: VALIDATION_FAILED,
        });
    }
    let m: Matroid = serde_json::from_value(value).with_context(|| path.display().to_string())?;
    let report = oracle::validate_matroid(&m, seed);
    let code = if report.passed { OK } else { VALIDATION_FAILED };
    Ok(Output {
        body: to_json(&report)?,
        code,
    })
}
