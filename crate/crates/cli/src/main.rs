//! `transduce`: exact transductive error computations and experiment reports.
//!
//! Every subcommand prints a JSON report (or writes it with `--out`) and can
//! also write a flat CSV view with `--csv`. The exit status is 0 when every
//! inequality the command checks holds, 1 when one fails and 2 on errors.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use transductive_core::apportion::verify_factor_two_with_witness;
use transductive_core::experiments::{
    compactness_sweep, counterexample_gap, generate_counterexample, pac_bridge_check, run_property_suite,
    sample_complexity_curve, CounterexampleSpec, Family, SuiteConfig,
};
use transductive_core::metric::LabelSpaceDoc;
use transductive_core::minimax::DEFAULT_BUDGET;
use transductive_core::oig::TableDoc;
use transductive_core::rational::{self, Rational};
use transductive_core::solve::{run_request, solve_exact, Mode, SolveRequest, SolverKind};
use transductive_core::{build_problem, BehaviorTable, LabelSpace};

use output::{emit_json, Table};

#[derive(Parser)]
#[command(name = "transduce", version, about = "Exact optimal transductive error for finite classes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Cap on exhaustive search evaluations.
    #[arg(long, global = true, env = "TRANSDUCE_BUDGET")]
    budget: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a CSV table.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Auto,
    Matching,
    Brute,
    Local,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Realizable,
    Agnostic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    SingleRow,
    Star,
    Counterexample,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal error of a table or solve request.
    Solve {
        /// Table or solve-request JSON; `-` reads stdin.
        input: PathBuf,
        #[arg(long, value_enum)]
        solver: Option<SolverArg>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Counterexample family: both variants solved, plus the factor-two learner.
    Counterexample {
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Only emit the with-cover (or without-cover) table instead of the gap report.
        #[arg(long)]
        cover: Option<bool>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "1/100", value_parser = parse_rational)]
        delta: Rational,
    },
    /// Exact solve of every row/column projection of a table.
    Sweep { input: PathBuf },
    /// Monte Carlo leave-one-out error against the exact transductive bound.
    PacCheck {
        input: PathBuf,
        /// Sample size; defaults to the table's width.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Scanned sample-complexity curve of a built-in family.
    Curve {
        #[arg(long, value_enum, default_value = "star")]
        family: FamilyArg,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long)]
        cover: bool,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        /// Comma-separated targets such as `1/2,1/3`.
        #[arg(long, value_delimiter = ',', default_value = "1,1/2,1/3,1/4", value_parser = parse_rational)]
        eps: Vec<Rational>,
    },
    /// Factor-two learner on a metric table, against the best exact or local witness.
    FactorTwo {
        input: PathBuf,
        #[arg(long, default_value = "1/100", value_parser = parse_rational)]
        delta: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Checks a label-space or table document.
    Validate { input: PathBuf },
    /// Seeded property suite over random small instances.
    Props {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        cases: usize,
    },
}

fn parse_rational(text: &str) -> Result<Rational, String> {
    rational::parse(text).map_err(|e| e.to_string())
}

fn read_input(path: &Path) -> Result<(String, PathBuf)> {
    if path == Path::new("-") {
        let text = std::io::read_to_string(std::io::stdin())?;
        return Ok((text, PathBuf::from(".")));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((text, base))
}

fn load_table(path: &Path) -> Result<BehaviorTable> {
    let (text, base) = read_input(path)?;
    let doc: TableDoc = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(doc.into_table(&base)?)
}

fn rat(r: &Rational) -> String {
    rational::format(r)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let Common { budget, out, csv } = cli.common;
    let out = out.as_deref();
    let csv = csv.as_deref();
    let budget_or_default = budget.unwrap_or(DEFAULT_BUDGET);
    match cli.command {
        Command::Solve { input, solver, mode, seed, restarts } => {
            let (text, base) = read_input(&input)?;
            let value: Value = serde_json::from_str(&text).context("parsing input")?;
            let mut request: SolveRequest = if value.get("table").is_some() {
                serde_json::from_value(value)?
            } else {
                let table: TableDoc = serde_json::from_value(value)?;
                serde_json::from_value(serde_json::json!({ "table": table }))?
            };
            if let Some(s) = solver {
                request.solver = match s {
                    SolverArg::Auto => SolverKind::Auto,
                    SolverArg::Matching => SolverKind::Matching,
                    SolverArg::Brute => SolverKind::Brute,
                    SolverArg::Local => SolverKind::Local,
                };
            }
            if let Some(m) = mode {
                request.mode = match m {
                    ModeArg::Realizable => Mode::Realizable,
                    ModeArg::Agnostic => Mode::Agnostic,
                };
            }
            request.seed = seed.unwrap_or(request.seed);
            request.restarts = restarts.unwrap_or(request.restarts);
            request.budget = budget.unwrap_or(request.budget);
            let report = run_request(&request, &base)?;
            let mut t = Table::new(&["row", "error"]);
            for r in &report.per_row {
                t.push([r.row.clone(), rat(&r.error)]);
            }
            t.write(csv)?;
            emit_json(&report, out)?;
            Ok(true)
        }
        Command::Counterexample { m, cover: Some(cover), k, .. } => {
            let c = generate_counterexample(&CounterexampleSpec { m, include_full_cover: cover, k })?;
            let mut t = Table::new(&["label", "distances"]);
            for (i, label) in c.space.labels().iter().enumerate() {
                let row: Vec<String> = c.space.matrix()[i].iter().map(rat).collect();
                t.push([label.clone(), row.join(" ")]);
            }
            t.write(csv)?;
            emit_json(&c.table.to_doc(), out)?;
            Ok(true)
        }
        Command::Counterexample { m, cover: None, k, delta } => {
            let report = counterexample_gap(m, k, delta, budget_or_default)?;
            let mut t = Table::new(&["m", "k", "xi_with_cover", "xi_without_cover", "ratio", "factor_two_realized"]);
            t.push([
                m.to_string(),
                k.to_string(),
                rat(&report.xi_with_cover),
                rat(&report.xi_without_cover),
                report.ratio.as_ref().map(rat).unwrap_or_default(),
                rat(&report.factor_two.realized),
            ]);
            t.write(csv)?;
            emit_json(&report, out)?;
            Ok(report.holds)
        }
        Command::Sweep { input } => {
            let table = load_table(&input)?;
            let report = compactness_sweep(&table, budget_or_default)?;
            let mut t = Table::new(&["columns", "rows", "full_xi", "max_xi", "max_proper_xi", "monotone"]);
            for c in &report.by_columns {
                let cols: Vec<String> = c.columns.iter().map(usize::to_string).collect();
                t.push([
                    cols.join(" "),
                    c.rows.to_string(),
                    rat(&c.full_xi),
                    rat(&c.max_xi),
                    c.max_proper_xi.as_ref().map(rat).unwrap_or_default(),
                    c.monotone.to_string(),
                ]);
            }
            t.write(csv)?;
            emit_json(&report, out)?;
            Ok(report.holds)
        }
        Command::PacCheck { input, n, trials, seed } => {
            let table = load_table(&input)?;
            let n = n.unwrap_or(table.n());
            let report = pac_bridge_check(&table, n, trials, seed, budget_or_default)?;
            let mut t = Table::new(&["row", "mean", "std_error"]);
            for r in &report.per_row {
                t.push([r.row.clone(), rat(&r.mean), r.std_error.to_string()]);
            }
            t.write(csv)?;
            emit_json(&report, out)?;
            Ok(report.holds)
        }
        Command::Curve { family, m, cover, n_min, n_max, eps } => {
            let family = match family {
                FamilyArg::SingleRow => Family::SingleRow,
                FamilyArg::Star => Family::Star,
                FamilyArg::Counterexample => Family::Counterexample { m, cover },
            };
            let curve = sample_complexity_curve(|n| family.table(n), n_min, n_max, &eps, budget_or_default)?;
            let mut t = Table::new(&["epsilon", "m"]);
            for e in &curve.entries {
                t.push([rat(&e.epsilon), e.m.map(|m| m.to_string()).unwrap_or_default()]);
            }
            t.write(csv)?;
            #[derive(Serialize)]
            struct CurveOutput<'a> {
                family: Family,
                #[serde(flatten)]
                curve: &'a transductive_core::experiments::SampleComplexityCurve,
            }
            emit_json(&CurveOutput { family, curve: &curve }, out)?;
            Ok(curve.monotone)
        }
        Command::FactorTwo { input, delta, seed } => {
            let table = load_table(&input)?;
            let problem = build_problem(&table);
            let (witness, value, exact) = match solve_exact(&problem, budget_or_default) {
                Ok(sol) => (sol.learner, sol.value, true),
                Err(_) => {
                    let sol = transductive_core::minimax::local_search_minimax(&problem, 16, seed)?;
                    (sol.learner, sol.value, false)
                }
            };
            let report = verify_factor_two_with_witness(&problem, &witness, value, delta)?;
            let mut t = Table::new(&["row", "error", "triangle_slack"]);
            for r in &report.per_row {
                t.push([table.row_name(r.row), rat(&r.error), rat(&r.triangle_slack)]);
            }
            t.write(csv)?;
            #[derive(Serialize)]
            struct FactorTwoOutput<'a> {
                witness_exact: bool,
                #[serde(flatten)]
                report: &'a transductive_core::apportion::FactorTwoReport,
            }
            emit_json(&FactorTwoOutput { witness_exact: exact, report: &report }, out)?;
            Ok(report.holds)
        }
        Command::Validate { input } => {
            let report = validate(&input)?;
            emit_json(&report, out)?;
            Ok(report.valid)
        }
        Command::Props { seed, cases } => {
            let report = run_property_suite(SuiteConfig { seed, cases, budget: budget_or_default });
            let mut t = Table::new(&["property", "cases", "failures", "passed"]);
            for p in &report.properties {
                t.push([p.name.to_string(), p.cases.to_string(), p.failures.len().to_string(), p.passed.to_string()]);
            }
            t.write(csv)?;
            emit_json(&report, out)?;
            Ok(report.all_passed)
        }
    }
}

#[derive(Serialize)]
struct ValidationReport {
    valid: bool,
    document: &'static str,
    labels: Option<usize>,
    kind: Option<transductive_core::LossKind>,
    n: Option<usize>,
    rows: Option<usize>,
    error: Option<String>,
}

fn validate(path: &Path) -> Result<ValidationReport> {
    let (text, base) = read_input(path)?;
    let value: Value = serde_json::from_str(&text).context("parsing input")?;
    let mut report =
        ValidationReport { valid: false, document: "", labels: None, kind: None, n: None, rows: None, error: None };
    if value.get("rows").is_some() {
        report.document = "table";
        let doc: TableDoc = serde_json::from_value(value)?;
        match doc.into_table(&base) {
            Ok(table) => {
                report.valid = true;
                report.labels = Some(table.space().len());
                report.kind = Some(table.space().kind());
                report.n = Some(table.n());
                report.rows = Some(table.len());
            }
            Err(e) => report.error = Some(e.to_string()),
        }
    } else if value.get("labels").is_some() {
        report.document = "label-space";
        let doc: LabelSpaceDoc = serde_json::from_value(value)?;
        match LabelSpace::from_doc(&doc) {
            Ok(space) => {
                report.valid = true;
                report.labels = Some(space.len());
                report.kind = Some(space.kind());
            }
            Err(e) => report.error = Some(e.to_string()),
        }
    } else {
        bail!("expected a label-space document (with `labels`) or a table document (with `rows`)");
    }
    Ok(report)
}
