use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use district_match::equilibrium::{
    compare_worlds, Answer, EquilibriumError, Transform, DEFAULT_BUDGET,
};
use district_match::io::{load_problem, problem_to_json, LoadError};
use district_match::lab::experiment::default_mechanisms;
use district_match::lab::{
    build_fixture, confirm_tuple, detect, run_experiment, ExperimentSpec, FixtureName, LabError,
    Theorem, TupleRow, Verdict,
};
use district_match::model::{
    Constraint, District, Mechanism, Mechanisms, Problem, SincereMode, Sophistication,
};
use district_match::random::{sample_market, MarketParams, ParamError};
use district_match::report::{outcome_names, solve};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_INVALID: u8 = 5;
const EXIT_BUDGET: u8 = 6;

#[derive(Parser)]
#[command(
    name = "district-match",
    version,
    about = "Multi-district school choice equilibria and random-market experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the pure Nash equilibria of a problem file.
    Solve(SolveArgs),
    /// Check whether a student gains in every equilibrium after one change.
    Compare(CompareArgs),
    /// Write a uniform random market.
    Sample(SampleArgs),
    /// Run a seeded detection or fixed-tuple experiment and write CSV.
    Experiment(ExperimentArgs),
    /// List construction tuples in a problem file as CSV.
    Detect(DetectArgs),
    /// Write one of the built-in example markets.
    Fixture(FixtureArgs),
    /// Report every validation problem of a problem file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct MechanismArg {
    /// District mechanisms, e.g. `--mechanism L=DA R=BM`.
    #[arg(long = "mechanism", value_name = "D=M", num_args = 1.., value_parser = parse_mechanism)]
    mechanism: Vec<(District, Mechanism)>,
}

impl MechanismArg {
    fn apply(&self, mut m: Mechanisms) -> Mechanisms {
        for &(d, mech) in &self.mechanism {
            m.set(d, mech);
        }
        m
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    mechanism: MechanismArg,
    /// naive or strategic district choice for sincere unconstrained students.
    #[arg(long)]
    mode: Option<SincereMode>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    /// Student whose assignments are compared.
    #[arg(long)]
    student: String,
    /// The change: `sophistication:NAME=sincere|sophisticated`,
    /// `constraint:NAME=constrained|unconstrained` or `mechanism:L=DA`.
    #[arg(long)]
    change: String,
    /// Accept indifference.
    #[arg(long)]
    weak: bool,
    #[command(flatten)]
    mechanism: MechanismArg,
    #[arg(long)]
    mode: Option<SincereMode>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MarketArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Eight category weights, indexed 4*sophisticated + 2*unconstrained + resides-in-R.
    #[arg(long, num_args = 1..=8, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Probability that a school lies in district L.
    #[arg(long, default_value_t = 0.5)]
    location_l: f64,
}

impl MarketArgs {
    fn weights(&self) -> Result<[f64; 8], Failure> {
        match &self.weights {
            Some(w) => w.as_slice().try_into().map_err(|_| {
                Failure::new(
                    EXIT_USAGE,
                    anyhow!("--weights needs eight values, got {}", w.len()),
                )
            }),
            None => Ok(MarketParams::UNIFORM_WEIGHTS),
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    market: MarketArgs,
    #[command(flatten)]
    mechanism: MechanismArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    theorem: Theorem,
    /// Market sizes, e.g. `--n 20,40,80`.
    #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long)]
    trials: usize,
    #[command(flatten)]
    mechanism: MechanismArg,
    /// Test only the first students of each market instead of detecting.
    #[arg(long)]
    fixed_tuple: bool,
    /// Run the solver on every detected tuple.
    #[arg(long)]
    confirm: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every detected tuple as CSV.
    #[arg(long)]
    tuples_out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    /// One theorem, or all applicable ones when omitted.
    #[arg(long)]
    theorem: Option<Theorem>,
    #[command(flatten)]
    mechanism: MechanismArg,
    #[arg(long)]
    confirm: bool,
    /// Seed recorded in the output rows.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FixtureArgs {
    /// sec31, sec41 or cycle<x>.
    name: FixtureName,
    #[command(flatten)]
    mechanism: MechanismArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
}

fn parse_mechanism(s: &str) -> Result<(District, Mechanism), String> {
    let (d, m) = s
        .split_once('=')
        .ok_or_else(|| format!("expected D=M, got `{s}`"))?;
    Ok((d.parse()?, m.parse()?))
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let code = match e {
            LoadError::Io { .. } => EXIT_IO,
            LoadError::Parse(_) => EXIT_PARSE,
            LoadError::Invalid(_) => EXIT_INVALID,
        };
        Failure::new(code, e)
    }
}

impl From<EquilibriumError> for Failure {
    fn from(e: EquilibriumError) -> Self {
        let code = match e {
            EquilibriumError::BudgetExceeded { .. } => EXIT_BUDGET,
            EquilibriumError::Mechanism(_) => 1,
            _ => EXIT_USAGE,
        };
        Failure::new(code, e)
    }
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Self {
        Failure::new(EXIT_USAGE, e)
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Equilibrium(e) => e.into(),
            e => Failure::new(EXIT_USAGE, e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_IO, e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(EXIT_IO, e)
    }
}

type Outcome = Result<(), Failure>;

fn write_text(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_IO, anyhow!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(out, &text)
}

fn write_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Outcome {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::new(EXIT_IO, anyhow!("{e}")))?;
    write_text(out, &String::from_utf8(bytes).expect("csv is utf-8"))
}

fn load(
    input: &Path,
    mechanism: &MechanismArg,
    mode: Option<SincereMode>,
) -> Result<Problem, Failure> {
    let mut p = load_problem(input)?;
    p.mechanisms = mechanism.apply(p.mechanisms);
    if let Some(m) = mode {
        p.mode = m;
    }
    Ok(p)
}

fn cmd_solve(a: SolveArgs) -> Outcome {
    let p = load(&a.input, &a.mechanism, a.mode)?;
    let report = solve(&p, a.budget)?;
    write_json(a.out.as_deref(), &report)
}

fn parse_change(p: &Problem, s: &str) -> Result<Transform, Failure> {
    let usage = |msg: String| Failure::new(EXIT_USAGE, anyhow!(msg));
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("change `{s}` must look like kind:target=value")))?;
    let (target, value) = rest
        .split_once('=')
        .ok_or_else(|| usage(format!("change `{s}` must look like kind:target=value")))?;
    let student = || {
        p.find_student(target)
            .ok_or_else(|| usage(format!("unknown student `{target}`")))
    };
    match kind {
        "sophistication" => Ok(Transform::SetSophistication(
            student()?,
            value.parse::<Sophistication>().map_err(usage)?,
        )),
        "constraint" => Ok(Transform::SetConstraint(
            student()?,
            value.parse::<Constraint>().map_err(usage)?,
        )),
        "mechanism" => Ok(Transform::SetMechanism(
            target.parse().map_err(usage)?,
            value.parse().map_err(usage)?,
        )),
        other => Err(usage(format!(
            "unknown change kind `{other}` (sophistication, constraint, mechanism)"
        ))),
    }
}

#[derive(Serialize)]
struct CompareReport {
    student: String,
    change: Transform,
    strict: bool,
    answer: Answer,
    mixed: bool,
    baseline: Vec<Vec<district_match::report::Assignment>>,
    counterfactual: Vec<Vec<district_match::report::Assignment>>,
}

fn cmd_compare(a: CompareArgs) -> Outcome {
    let p = load(&a.input, &a.mechanism, a.mode)?;
    let student = p
        .find_student(&a.student)
        .ok_or_else(|| Failure::new(EXIT_USAGE, anyhow!("unknown student `{}`", a.student)))?;
    let change = parse_change(&p, &a.change)?;
    let cmp = compare_worlds(&p, student, change, !a.weak, a.budget)?;
    let after = change.apply(&p)?;
    write_json(
        a.out.as_deref(),
        &CompareReport {
            student: a.student,
            change,
            strict: !a.weak,
            answer: cmp.answer,
            mixed: cmp.mixed,
            baseline: cmp
                .baseline
                .outcomes
                .iter()
                .map(|m| outcome_names(&p, m))
                .collect(),
            counterfactual: cmp
                .counterfactual
                .outcomes
                .iter()
                .map(|m| outcome_names(&after, m))
                .collect(),
        },
    )
}

fn cmd_sample(a: SampleArgs) -> Outcome {
    let params = MarketParams {
        n: a.n,
        k: a.market.k,
        category_weights: a.market.weights()?,
        location_l: a.market.location_l,
        seed: a.market.seed,
    };
    let mechanisms = a
        .mechanism
        .apply(Mechanisms::new(Mechanism::Boston, Mechanism::Boston));
    let p = sample_market(&params, mechanisms)?;
    write_text(a.out.as_deref(), &(problem_to_json(&p) + "\n"))
}

fn cmd_experiment(a: ExperimentArgs) -> Outcome {
    let mut spec = ExperimentSpec::new(a.theorem, a.n, a.market.k, a.trials, a.market.seed);
    spec.mechanisms = a.mechanism.apply(default_mechanisms(a.theorem));
    spec.category_weights = a.market.weights()?;
    spec.location_l = a.market.location_l;
    spec.fixed_tuple = a.fixed_tuple;
    spec.confirm = a.confirm;
    spec.budget = a.budget;
    let report = run_experiment(&spec)?;
    write_csv(a.out.as_deref(), &report.rows)?;
    if let Some(path) = &a.tuples_out {
        write_csv(Some(path), &report.tuples)?;
    }
    Ok(())
}

fn cmd_detect(a: DetectArgs) -> Outcome {
    let p = load(&a.input, &a.mechanism, None)?;
    let theorems: Vec<Theorem> = match a.theorem {
        Some(t) => vec![t],
        None => Theorem::ALL
            .into_iter()
            .filter(|&t| district_match::lab::labelings(t, p.mechanisms).is_ok())
            .collect(),
    };
    let mut rows = Vec::new();
    for t in theorems {
        for w in detect(&p, t)? {
            let confirmed = if a.confirm {
                Some(confirm_tuple(&p, &w, a.budget)? == Verdict::Confirmed)
            } else {
                None
            };
            rows.push(TupleRow::new(&p, a.seed, &w, confirmed));
        }
    }
    if rows.is_empty() {
        // header only
        let header = "seed,theorem,left,students,schools,confirmed\n";
        return write_text(a.out.as_deref(), header);
    }
    write_csv(a.out.as_deref(), &rows)
}

fn cmd_fixture(a: FixtureArgs) -> Outcome {
    let mut p = build_fixture(a.name);
    p.mechanisms = a.mechanism.apply(p.mechanisms);
    write_text(a.out.as_deref(), &(problem_to_json(&p) + "\n"))
}

fn cmd_validate(a: ValidateArgs) -> Outcome {
    load_problem(&a.input)?;
    println!("ok");
    Ok(())
}

fn configure_threads() -> Outcome {
    let Ok(v) = std::env::var("DISTRICT_MATCH_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::new(
            EXIT_USAGE,
            anyhow!("DISTRICT_MATCH_THREADS must be a positive integer, got `{v}`"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::new(1, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Fixture(a) => cmd_fixture(a),
        Command::Validate(a) => cmd_validate(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}
