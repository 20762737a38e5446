//! The `scod` command line.
//!
//! Exit codes: 0 success, 1 error, 2 expected-outcome mismatch (`--expect`).

pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::{
    check_hypotheses, clusters, confidence_graph, search_family_name, search_period2_n3, verify_theorem1,
    Certification, SearchFamily, ClaimConfig,
};
use crate::dynamics::{simulate, Trajectory};
use crate::error::{Error, Result};
use crate::numerics::{Backend, Rational, Scalar};
use crate::scenarios::{build_paper_example, Scenario, BUILTIN_SCENARIOS};

use output::{
    emit_graph, emit_plotdata, emit_trajectory, outcome_json, partition_json, pretty, write_atomic, REPORT_SCHEMA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

/// Cluster tolerance on the float backend.
pub const FLOAT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "scod", version, about = "Set-based confidence opinion dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Float,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Float => Backend::Float,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
struct RunFlags {
    /// Override the scenario's backend.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Seed for scenarios with random initial opinions.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; all four outputs are written when the scenario names none.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare the outcome with the scenario's `expected` block.
    #[arg(long)]
    expect: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// Three scalar agents over random punctured intervals.
    Punctured,
    /// Four agents over the star-rays set, started on its period-2 orbit.
    StarControl,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario file or a built-in scenario.
    Run {
        scenario: Option<PathBuf>,
        #[arg(long, conflicts_with = "scenario")]
        builtin: Option<String>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Print a built-in scenario as a scenario file, or list the built-ins.
    Describe {
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every scenario of a batch file concurrently.
    Batch {
        file: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Randomized search for period-2 orbits.
    #[command(name = "search-period2")]
    SearchPeriod2 {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "punctured")]
        family: FamilyArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 2 unless the result matches the expectation for the family
        /// (no hits for `punctured`, a hit every trial for `star-control`).
        #[arg(long)]
        expect: bool,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run { scenario, builtin, flags } => {
            let doc = load_document(scenario.as_deref(), builtin.as_deref())?;
            let result = run_document(doc, &flags, flags.out.as_deref())?;
            print!("{}", pretty(&result.report));
            Ok(result.exit_code(flags.expect))
        }
        Command::Describe { builtin, out } => {
            let text = match builtin {
                Some(name) => pretty(&build_paper_example(&name)?.to_document()?),
                None => BUILTIN_SCENARIOS.iter().map(|n| format!("{n}\n")).collect(),
            };
            match out {
                Some(path) => write_atomic(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
        Command::Batch { file, flags } => run_batch(&file, &flags),
        Command::SearchPeriod2 { trials, seed, family, out, expect } => {
            let fam = match family {
                FamilyArg::Punctured => SearchFamily::default(),
                FamilyArg::StarControl => SearchFamily::StarRaysControl,
            };
            let report = search_period2_n3(&fam, trials, seed)?;
            let mut doc = serde_json::to_value(&report).expect("plain struct");
            doc["family"] = json!(search_family_name(&fam));
            doc["seed"] = json!(seed);
            let text = pretty(&doc);
            match out {
                Some(dir) => write_atomic(&dir.join("search_period2.json"), text.as_bytes())?,
                None => print!("{text}"),
            }
            eprintln!("{} trials, {} period-2 orbits", report.trials, report.hits.len());
            let as_expected = match family {
                FamilyArg::Punctured => report.hits.is_empty(),
                FamilyArg::StarControl => report.hits.len() == trials,
            };
            Ok(if expect && !as_expected { EXIT_MISMATCH } else { EXIT_OK })
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn load_document(path: Option<&Path>, builtin: Option<&str>) -> Result<Value> {
    match (path, builtin) {
        (_, Some(name)) => build_paper_example(name)?.to_document(),
        (Some(p), None) => {
            let text = read_text(p)?;
            // Surface syntax and schema errors with their line before any override.
            Scenario::from_json_str(&text).map_err(|e| in_file(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
        }
        (None, None) => Err(Error::Parse("give a scenario file or --builtin NAME".into())),
    }
}

fn in_file(p: &Path, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", p.display())),
        other => other,
    }
}

/// Result of one scenario run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub report: Value,
    /// `None` when the scenario has no `expected` block.
    pub expectation_met: Option<bool>,
    pub written: Vec<PathBuf>,
    pub trajectory: RunTrajectory,
}

/// The simulated trajectory in the backend the scenario ran with.
#[derive(Debug, Clone)]
pub enum RunTrajectory {
    Exact(Trajectory<Rational>),
    Float(Trajectory<f64>),
}

impl RunTrajectory {
    pub fn backend(&self) -> Backend {
        match self {
            RunTrajectory::Exact(_) => Backend::Exact,
            RunTrajectory::Float(_) => Backend::Float,
        }
    }

    /// Number of recorded states, the initial one included.
    pub fn len(&self) -> usize {
        match self {
            RunTrajectory::Exact(t) => t.states().len(),
            RunTrajectory::Float(t) => t.states().len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn outcome_kind(&self) -> &'static str {
        match self {
            RunTrajectory::Exact(t) => t.outcome().kind(),
            RunTrajectory::Float(t) => t.outcome().kind(),
        }
    }

    pub fn cycle(&self) -> Option<(usize, usize)> {
        match self {
            RunTrajectory::Exact(t) => t.outcome().cycle(),
            RunTrajectory::Float(t) => t.outcome().cycle(),
        }
    }

    /// Coordinate `k` of agent `i` at step `t`, as a float and as text.
    pub fn coordinate(&self, t: usize, i: usize, k: usize) -> Option<(f64, String)> {
        fn get<S: Scalar>(tr: &Trajectory<S>, t: usize, i: usize, k: usize) -> Option<(f64, String)> {
            let st = tr.states().get(t)?;
            if i >= st.n() || k >= st.dim() {
                return None;
            }
            let x = st.row(i).get(k);
            Some((x.to_float(), x.to_text()))
        }
        match self {
            RunTrajectory::Exact(tr) => get(tr, t, i, k),
            RunTrajectory::Float(tr) => get(tr, t, i, k),
        }
    }
}

trait IntoRunTrajectory: Sized {
    fn wrap(t: Trajectory<Self>) -> RunTrajectory;
}

impl IntoRunTrajectory for Rational {
    fn wrap(t: Trajectory<Self>) -> RunTrajectory {
        RunTrajectory::Exact(t)
    }
}

impl IntoRunTrajectory for f64 {
    fn wrap(t: Trajectory<Self>) -> RunTrajectory {
        RunTrajectory::Float(t)
    }
}

impl RunResult {
    fn exit_code(&self, expect: bool) -> i32 {
        match (expect, self.expectation_met) {
            (true, Some(false)) => EXIT_MISMATCH,
            _ => EXIT_OK,
        }
    }
}

fn run_document(mut doc: Value, flags: &RunFlags, out: Option<&Path>) -> Result<RunResult> {
    if let Some(seed) = flags.seed {
        match doc.pointer_mut("/agents/random/seed") {
            Some(v) => *v = json!(seed),
            None => eprintln!("note: --seed ignored, scenario has explicit opinions"),
        }
    }
    let mut scenario = Scenario::from_document(&doc)?;
    if let Some(b) = flags.backend {
        scenario.backend = b.into();
    }
    if let Some(m) = flags.max_steps {
        scenario.limits.max_steps = m;
    }
    if flags.expect && scenario.expected.is_none() {
        return Err(Error::Parse(format!("scenario `{}` has no `expected` block", scenario.name)));
    }
    run_scenario(&scenario, out)
}

/// Simulates and analyses `scenario`, writing the requested outputs under
/// `out` (all four when the scenario names none).
pub fn run_scenario(scenario: &Scenario, out: Option<&Path>) -> Result<RunResult> {
    scenario.set.check_backend(scenario.backend)?;
    match scenario.backend {
        Backend::Exact => run_typed::<Rational>(scenario, out),
        Backend::Float => run_typed::<f64>(scenario, out),
    }
}

fn run_typed<S: Scalar + IntoRunTrajectory>(scenario: &Scenario, out: Option<&Path>) -> Result<RunResult> {
    let started = Instant::now();
    let initial = scenario.initial_state::<S>()?;
    let trajectory = simulate(&initial, &scenario.set, &scenario.roster, &scenario.limits)?;
    let simulated = started.elapsed();
    let hypotheses = check_hypotheses(&scenario.set, &scenario.roster, &trajectory, &Certification::default())?;
    let claims = verify_theorem1(&trajectory, &scenario.set, &scenario.roster, &hypotheses, &ClaimConfig::default())?;
    let tol = if S::BACKEND == Backend::Exact { 0.0 } else { FLOAT_CLUSTER_TOL };
    let partition = clusters(trajectory.last(), tol)?;
    let graph = confidence_graph(trajectory.last(), &scenario.set, &scenario.roster)?;
    let expectation_met = scenario.expected.as_ref().map(|e| e.matches(trajectory.outcome()));

    let mut written = Vec::new();
    let mut report_path = None;
    if let Some(dir) = out {
        let outputs = &scenario.outputs;
        let all = outputs.trajectory.is_none()
            && outputs.graph.is_none()
            && outputs.report.is_none()
            && outputs.plotdata.is_none();
        let pick = |name: &Option<String>, default: &str| -> Option<PathBuf> {
            match name {
                Some(n) => Some(dir.join(n)),
                None if all => Some(dir.join(default)),
                None => None,
            }
        };
        if let Some(p) = pick(&outputs.trajectory, "trajectory.csv") {
            emit_trajectory(&trajectory, &scenario.roster, &p)?;
            written.push(p);
        }
        if let Some(p) = pick(&outputs.graph, "graph.dot") {
            emit_graph(&graph, &p)?;
            written.push(p);
        }
        if let Some(p) = pick(&outputs.plotdata, "plotdata.json") {
            emit_plotdata(&scenario.name, &trajectory, &scenario.roster, &partition, &p)?;
            written.push(p);
        }
        report_path = pick(&outputs.report, "report.json");
    }

    let report = json!({
        "schema": REPORT_SCHEMA,
        "scenario": scenario.name,
        "backend": S::BACKEND,
        "n": scenario.n(),
        "d": scenario.dim(),
        "stubborn": scenario.roster.stubborn().map(|i| i + 1).collect::<Vec<_>>(),
        "outcome": outcome_json(trajectory.outcome()),
        "steps_executed": trajectory.steps(),
        "hypotheses": hypotheses.to_json(),
        "claims": claims,
        "clusters": partition_json(&partition),
        "graph": {
            "disjoint_cliques": graph.is_disjoint_cliques(),
            "symmetric": graph.is_symmetric(),
            "arcs": graph.arc_count(),
        },
        "final_state": trajectory.last().rows().iter()
            .map(|r| r.coords().iter().map(Scalar::to_text).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "expected": scenario.expected,
        "expectation_met": expectation_met,
        "timing": {
            "simulate_ms": simulated.as_secs_f64() * 1e3,
            "total_ms": started.elapsed().as_secs_f64() * 1e3,
        },
    });
    if let Some(p) = report_path {
        write_atomic(&p, pretty(&report).as_bytes())?;
        written.push(p);
    }
    Ok(RunResult { name: scenario.name.clone(), report, expectation_met, written, trajectory: S::wrap(trajectory) })
}

/// A batch file is a JSON list (or `{"scenarios": [...]}`) whose entries
/// are scenario paths, relative to the batch file, or `{"builtin": NAME}`.
fn batch_entries(file: &Path) -> Result<Vec<(String, Value)>> {
    let text = read_text(file)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
    let list = match &doc {
        Value::Array(a) => a.clone(),
        Value::Object(o) => match o.get("scenarios") {
            Some(Value::Array(a)) => a.clone(),
            _ => return Err(Error::Parse(format!("{}: key `scenarios` must be a list", file.display()))),
        },
        _ => return Err(Error::Parse(format!("{}: expected a list of scenarios", file.display()))),
    };
    let base = file.parent().unwrap_or(Path::new("."));
    list.iter()
        .enumerate()
        .map(|(k, entry)| match entry {
            Value::String(p) => {
                let path = base.join(p);
                Ok((p.clone(), load_document(Some(&path), None)?))
            }
            Value::Object(o) => match o.get("builtin").and_then(Value::as_str) {
                Some(name) => Ok((name.to_string(), load_document(None, Some(name))?)),
                None => Err(Error::Parse(format!(
                    "{}: key `scenarios[{k}]`: expected a path or {{\"builtin\": NAME}}",
                    file.display()
                ))),
            },
            _ => Err(Error::Parse(format!("{}: key `scenarios[{k}]`: expected a path or object", file.display()))),
        })
        .collect()
}

fn run_batch(file: &Path, flags: &RunFlags) -> Result<i32> {
    let entries = batch_entries(file)?;
    let results: Vec<(String, Result<RunResult>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries
            .into_iter()
            .enumerate()
            .map(|(k, (label, doc))| {
                scope.spawn(move || {
                    let dir = flags.out.as_ref().map(|d| {
                        let name = doc.get("name").and_then(Value::as_str).unwrap_or("scenario");
                        d.join(format!("{k:03}_{name}"))
                    });
                    (label, run_document(doc, flags, dir.as_deref()))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("batch worker panicked")).collect()
    });
    let mut code = EXIT_OK;
    let mut summary = Vec::new();
    for (label, r) in results {
        match r {
            Ok(r) => {
                let kind = r.report["outcome"]["kind"].as_str().unwrap_or("?").to_string();
                let status = match r.expectation_met {
                    Some(false) => "MISMATCH",
                    Some(true) => "ok",
                    None => "-",
                };
                println!("{label}: {kind} [{status}]");
                if flags.expect && r.exit_code(true) == EXIT_MISMATCH && code == EXIT_OK {
                    code = EXIT_MISMATCH;
                }
                summary.push(
                    json!({"entry": label, "outcome": r.report["outcome"], "expectation_met": r.expectation_met}),
                );
            }
            Err(e) => {
                println!("{label}: error: {e}");
                code = EXIT_ERROR;
                summary.push(json!({"entry": label, "error": e.to_string()}));
            }
        }
    }
    if let Some(dir) = &flags.out {
        write_atomic(&dir.join("batch_summary.json"), pretty(&json!(summary)).as_bytes())?;
    }
    Ok(code)
}
