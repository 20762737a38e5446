//! Trajectory CSV, DOT graphs, run reports and plot data.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::analysis::{ClusterPartition, ConfidenceGraph};
use crate::dynamics::{AgentRoster, Outcome, Trajectory};
use crate::error::{Error, Result};
use crate::numerics::{parse_rational, Rational, Scalar};

pub const REPORT_SCHEMA: &str = "scod-report/1";
pub const PLOTDATA_SCHEMA: &str = "scod-plotdata/1";

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// One row per agent per recorded step. Header
/// `t,agent,coord_0,…,coord_{d-1},stubborn,float_0,…,float_{d-1}`; agents
/// are numbered from 1, exact coordinates are written as `p/q`.
pub fn trajectory_csv<S: Scalar>(trajectory: &Trajectory<S>, roster: &AgentRoster) -> Result<String> {
    let d = trajectory.initial().dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string(), "agent".to_string()];
    header.extend((0..d).map(|k| format!("coord_{k}")));
    header.push("stubborn".into());
    header.extend((0..d).map(|k| format!("float_{k}")));
    let csv_err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (t, state) in trajectory.states().iter().enumerate() {
        for (i, row) in state.rows().iter().enumerate() {
            let mut rec = vec![t.to_string(), (i + 1).to_string()];
            rec.extend(row.coords().iter().map(Scalar::to_text));
            rec.push(roster.is_stubborn(i).to_string());
            rec.extend(row.coords().iter().map(|x| format!("{:?}", x.to_float())));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_trajectory<S: Scalar>(trajectory: &Trajectory<S>, roster: &AgentRoster, path: &Path) -> Result<()> {
    write_atomic(path, trajectory_csv(trajectory, roster)?.as_bytes())
}

/// A parsed trajectory CSV row: step, 1-based agent, exact coordinates, stubborn flag.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: usize,
    pub agent: usize,
    pub coords: Vec<Rational>,
    pub stubborn: bool,
}

/// Reads back a CSV written by [`trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| Error::Parse(format!("csv: {e}")))?.clone();
    let d = headers.iter().filter(|h| h.starts_with("coord_")).count();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("csv: {e}")))?;
        let field = |k: usize| rec.get(k).ok_or_else(|| Error::Parse(format!("csv: missing column {k}")));
        let num = |k: usize| -> Result<usize> {
            field(k)?.parse().map_err(|_| Error::Parse(format!("csv: bad integer in column {k}")))
        };
        rows.push(CsvRow {
            t: num(0)?,
            agent: num(1)?,
            coords: (0..d).map(|k| parse_rational(field(2 + k)?)).collect::<Result<_>>()?,
            stubborn: field(2 + d)? == "true",
        });
    }
    Ok(rows)
}

pub fn emit_graph(graph: &ConfidenceGraph, path: &Path) -> Result<()> {
    write_atomic(path, graph.to_dot().as_bytes())
}

pub fn outcome_json<S: Scalar>(outcome: &Outcome<S>) -> Value {
    match outcome {
        Outcome::Terminated { at_step, .. } => json!({"kind": "terminated", "at_step": at_step}),
        Outcome::Periodic { offset, period, .. } => json!({"kind": "periodic", "offset": offset, "period": period}),
        Outcome::ConvergentNonTerminating(ev) => json!({
            "kind": "convergent_non_terminating",
            "from_step": ev.from_step,
            "window": ev.window,
            "factor": ev.factor.to_text(),
        }),
        Outcome::Undetermined { steps, reason } => json!({"kind": "undetermined", "steps": steps, "reason": reason}),
    }
}

pub fn partition_json<S: Scalar>(p: &ClusterPartition<S>) -> Value {
    json!({
        "tolerance": p.tolerance,
        "count": p.len(),
        "blocks": p.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "representatives": p.representatives.iter()
            .map(|r| r.coords().iter().map(Scalar::to_text).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

/// Plot input: per-agent coordinate series, the cycle if any, and clusters.
pub fn plotdata_json<S: Scalar>(
    name: &str,
    trajectory: &Trajectory<S>,
    roster: &AgentRoster,
    partition: &ClusterPartition<S>,
) -> Value {
    let states = trajectory.states();
    let d = trajectory.initial().dim();
    let exact = S::BACKEND == crate::numerics::Backend::Exact;
    let agents: Vec<Value> = (0..roster.n())
        .map(|i| {
            let coords: Vec<Vec<f64>> =
                (0..d).map(|k| states.iter().map(|s| s.row(i).get(k).to_float()).collect()).collect();
            let mut a = json!({"agent": i + 1, "stubborn": roster.is_stubborn(i), "coords": coords});
            if exact {
                let text: Vec<Vec<String>> =
                    (0..d).map(|k| states.iter().map(|s| s.row(i).get(k).to_text()).collect()).collect();
                a["exact"] = json!(text);
            }
            a
        })
        .collect();
    let mut doc = json!({
        "schema": PLOTDATA_SCHEMA,
        "scenario": name,
        "backend": S::BACKEND,
        "n": roster.n(),
        "d": d,
        "steps": states.len() - 1,
        "outcome": outcome_json(trajectory.outcome()),
        "agents": agents,
        "clusters": {
            "count": partition.len(),
            "tolerance": partition.tolerance,
            "assignment": partition.assignment(),
        },
    });
    if let Some((offset, period)) = trajectory.outcome().cycle() {
        doc["cycle"] = json!({"offset": offset, "period": period});
    }
    doc
}

pub fn emit_plotdata<S: Scalar>(
    name: &str,
    trajectory: &Trajectory<S>,
    roster: &AgentRoster,
    partition: &ClusterPartition<S>,
    path: &Path,
) -> Result<()> {
    let doc = plotdata_json(name, trajectory, roster, partition);
    write_atomic(path, pretty(&doc).as_bytes())
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}
