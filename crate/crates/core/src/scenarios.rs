//! Named scenarios: a confidence set, initial opinions, roster and the
//! expected outcome, plus the JSON scenario-file format.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::confidence_set::{value_to_rational, ConfidenceSet, SetSpec};
use crate::dynamics::{AgentRoster, Limits, OpinionState, Outcome, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::numerics::{rat, Backend, Opinion, Rational, Scalar};
use crate::rng::SplitMix64;

pub const SCENARIO_SCHEMA: &str = "scod-scenario/1";

pub const BUILTIN_SCENARIOS: [&str; 6] = [
    "ex1_nonclustered_equilibrium",
    "ex2_period3_scalar",
    "ex3_period2_star",
    "ex4_stubborn_oscillation_2d",
    "ex4_stubborn_oscillation_1d",
    "ex5_cross_infinite",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Terminated,
    Periodic,
    ConvergentNonTerminating,
    Undetermined,
}

/// Outcome variant plus cycle data; trajectories are not compared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedOutcome {
    pub kind: OutcomeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

impl ExpectedOutcome {
    pub fn kind(kind: OutcomeKind) -> Self {
        ExpectedOutcome { kind, period: None, offset: None }
    }

    pub fn periodic(offset: usize, period: usize) -> Self {
        ExpectedOutcome { kind: OutcomeKind::Periodic, period: Some(period), offset: Some(offset) }
    }

    pub fn matches<S: Scalar>(&self, outcome: &Outcome<S>) -> bool {
        match (self.kind, outcome) {
            (OutcomeKind::Terminated, Outcome::Terminated { .. })
            | (OutcomeKind::ConvergentNonTerminating, Outcome::ConvergentNonTerminating(_))
            | (OutcomeKind::Undetermined, Outcome::Undetermined { .. }) => true,
            (OutcomeKind::Periodic, Outcome::Periodic { offset, period, .. }) => {
                self.period.is_none_or(|p| p == *period) && self.offset.is_none_or(|o| o == *offset)
            }
            _ => false,
        }
    }
}

/// Output file names requested by a scenario file, relative to the output
/// directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plotdata: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub set: ConfidenceSet,
    /// Exact initial opinions; the float backend rounds them on use.
    pub opinions: Vec<Vec<Rational>>,
    pub roster: AgentRoster,
    pub expected: Option<ExpectedOutcome>,
    pub provenance: String,
    pub limits: Limits,
    pub backend: Backend,
    pub outputs: Outputs,
}

impl Scenario {
    pub fn new(name: &str, set: ConfidenceSet, opinions: Vec<Vec<Rational>>, roster: AgentRoster) -> Result<Self> {
        if opinions.len() != roster.n() {
            return Err(Error::Dimension(format!("{} opinions for {} agents", opinions.len(), roster.n())));
        }
        if let Some(bad) = opinions.iter().find(|o| o.len() != set.dim()) {
            return Err(Error::Dimension(format!(
                "opinion of dimension {} for a set of dimension {}",
                bad.len(),
                set.dim()
            )));
        }
        let backend = if set.backend_support().supports(Backend::Exact) { Backend::Exact } else { Backend::Float };
        Ok(Scenario {
            name: name.to_string(),
            set,
            opinions,
            roster,
            expected: None,
            provenance: String::new(),
            limits: Limits::default(),
            backend,
            outputs: Outputs::default(),
        })
    }

    fn with_expected(mut self, expected: ExpectedOutcome, provenance: &str) -> Self {
        self.expected = Some(expected);
        self.provenance = provenance.to_string();
        self
    }

    pub fn n(&self) -> usize {
        self.roster.n()
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn initial_state<S: Scalar>(&self) -> Result<OpinionState<S>> {
        OpinionState::new(
            self.opinions
                .iter()
                .map(|row| Opinion::new(row.iter().map(S::from_rational).collect()))
                .collect::<Result<_>>()?,
        )
    }

    /// Scenario-file document with explicit opinions.
    pub fn to_document(&self) -> Result<Value> {
        let spec = self.set.spec().ok_or_else(|| {
            Error::Catalog(format!("set `{}` is not a catalog set and cannot be written to a file", self.set.name()))
        })?;
        let mut limits = json!({
            "max_steps": self.limits.max_steps,
            "backend": self.backend,
        });
        if let Some(tol) = self.limits.convergence_tol {
            limits["tolerance"] = json!(tol);
        }
        let mut doc = json!({
            "schema": SCENARIO_SCHEMA,
            "name": self.name,
            "set": {"name": spec.name, "params": spec.params},
            "agents": {
                "n": self.n(),
                "d": self.dim(),
                "opinions": self.opinions.iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            },
            "stubborn": self.roster.stubborn().collect::<Vec<_>>(),
            "limits": limits,
        });
        if self.outputs != Outputs::default() {
            doc["outputs"] = serde_json::to_value(&self.outputs).expect("plain struct");
        }
        if let Some(e) = &self.expected {
            doc["expected"] = serde_json::to_value(e).expect("plain struct");
        }
        if !self.provenance.is_empty() {
            doc["provenance"] = json!(self.provenance);
        }
        Ok(doc)
    }

    /// Parses a scenario file. Errors name the line and the offending key.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path.is_empty() || path == "." || path == "?" {
                Error::Parse(format!("line {}, column {}: {inner}", inner.line(), inner.column()))
            } else {
                Error::Parse(format!("line {}, key `{path}`: {inner}", inner.line()))
            }
        })?;
        file.into_scenario()
    }

    pub fn from_document(doc: &Value) -> Result<Self> {
        Self::from_json_str(&doc.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    schema: Option<String>,
    #[serde(default)]
    name: Option<String>,
    set: SetDoc,
    agents: AgentsDoc,
    #[serde(default)]
    stubborn: Vec<usize>,
    #[serde(default)]
    limits: LimitsDoc,
    #[serde(default)]
    outputs: Outputs,
    #[serde(default)]
    expected: Option<ExpectedOutcome>,
    #[serde(default)]
    provenance: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetDoc {
    name: String,
    #[serde(default)]
    params: Map<String, Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentsDoc {
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    opinions: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    random: Option<RandomDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomDoc {
    seed: u64,
    #[serde(rename = "box")]
    bounds: BoxDoc,
    #[serde(default)]
    stubborn_count: usize,
    #[serde(default)]
    stubborn_opinion: Option<Vec<Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDoc {
    low: Vec<Value>,
    high: Vec<Value>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsDoc {
    #[serde(default)]
    max_steps: Option<usize>,
    #[serde(default)]
    backend: Option<Backend>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    cycle_check: Option<bool>,
    #[serde(default)]
    nonterminating_window: Option<usize>,
}

fn rationals(values: &[Value], key: &str) -> Result<Vec<Rational>> {
    values.iter().map(|v| value_to_rational(v).map_err(|e| Error::Parse(format!("key `{key}`: {e}")))).collect()
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        if let Some(schema) = &self.schema {
            if schema != SCENARIO_SCHEMA {
                return Err(Error::Parse(format!("unsupported schema `{schema}`, expected `{SCENARIO_SCHEMA}`")));
            }
        }
        let set = SetSpec { name: self.set.name, params: self.set.params }.build()?;
        let name = self.name.unwrap_or_else(|| "scenario".into());
        let mut scenario = match (self.agents.opinions, self.agents.random) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse("key `agents`: give either `opinions` or `random`, not both".into()))
            }
            (None, None) => return Err(Error::Parse("key `agents`: `opinions` or `random` is required".into())),
            (Some(rows), None) => {
                let opinions = rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| rationals(r, &format!("agents.opinions[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let roster = AgentRoster::new(opinions.len(), self.stubborn.iter().copied())?;
                Scenario::new(&name, set, opinions, roster)?
            }
            (None, Some(r)) => {
                let n = self.agents.n.ok_or_else(|| Error::Parse("key `agents.n`: required with `random`".into()))?;
                let d = set.dim();
                let low = rationals(&r.bounds.low, "agents.random.box.low")?;
                let high = rationals(&r.bounds.high, "agents.random.box.high")?;
                let star = match r.stubborn_opinion {
                    Some(v) => rationals(&v, "agents.random.stubborn_opinion")?,
                    None => vec![rat(0, 1); d],
                };
                let s = build_random(n, d, set, r.stubborn_count, &star, &low, &high, r.seed)?;
                let declared: Vec<usize> = self.stubborn.clone();
                if !declared.is_empty() && declared != s.roster.stubborn().collect::<Vec<_>>() {
                    return Err(Error::Parse(
                        "key `stubborn`: random scenarios place stubborn agents last; omit the list".into(),
                    ));
                }
                Scenario { name, ..s }
            }
        };
        if let Some(n) = self.agents.n {
            if n != scenario.n() {
                return Err(Error::Parse(format!("key `agents.n`: declared {n}, found {} opinions", scenario.n())));
            }
        }
        if let Some(d) = self.agents.d {
            if d != scenario.dim() {
                return Err(Error::Parse(format!(
                    "key `agents.d`: declared {d}, set has dimension {}",
                    scenario.dim()
                )));
            }
        }
        let l = self.limits;
        scenario.limits = Limits {
            max_steps: l.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            cycle_check: l.cycle_check.unwrap_or(true),
            convergence_tol: l.tolerance,
            nonterminating_window: l.nonterminating_window.or(Limits::default().nonterminating_window),
            ..Limits::default()
        };
        if let Some(b) = l.backend {
            scenario.backend = b;
        }
        scenario.outputs = self.outputs;
        scenario.expected = self.expected;
        scenario.provenance = self.provenance.unwrap_or_default();
        Ok(scenario)
    }
}

fn ints(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&v| rat(v, 1)).collect()).collect()
}

fn catalog(name: &str, params: Value) -> Result<ConfidenceSet> {
    SetSpec::new(name, params).build()
}

/// The built-in example scenarios, by name.
pub fn build_paper_example(which: &str) -> Result<Scenario> {
    match which {
        "ex1_nonclustered_equilibrium" => example1(),
        "ex2_period3_scalar" => {
            let set = catalog(
                "punctured_interval",
                json!({"low": -7, "high": 7, "punctures": [-5, -4, -3, -2, -1, 1, 3, 5, 6]}),
            )?;
            Ok(Scenario::new(which, set, ints(&[&[0], &[6], &[7]]), AgentRoster::without_stubborn(3)?)?.with_expected(
                ExpectedOutcome::periodic(0, 3),
                "Three scalar agents; agent 2 cycles 6 -> 3 -> 5 -> 6 while agents 1 and 3 stay put.",
            ))
        }
        "ex3_period2_star" => {
            let set = catalog("star_rays_example3", json!({}))?;
            let opinions = ints(&[&[0, 0], &[-3, 1], &[-3, -1], &[4, 0]]);
            Ok(Scenario::new(which, set, opinions, AgentRoster::without_stubborn(4)?)?.with_expected(
                ExpectedOutcome::periodic(0, 2),
                "Star-shaped asymmetric set (three rays plus the closed unit disk); agent 1 alternates \
                 between (0,0) and (2,0).",
            ))
        }
        "ex4_stubborn_oscillation_2d" => {
            let set = catalog("lines_ball_example4", json!({}))?;
            let opinions = ints(&[&[0, 0], &[-3, 1], &[-3, -1], &[4, 0]]);
            Ok(Scenario::new(which, set, opinions, AgentRoster::new(4, [1, 2, 3])?)?.with_expected(
                ExpectedOutcome::periodic(0, 2),
                "Symmetric set (lines x2 = 0, x2 = +-x1/5 and the unit disk) with agents 2, 3, 4 stubborn \
                 at distinct opinions; agent 1 alternates between (0,0) and (2,0).",
            ))
        }
        "ex4_stubborn_oscillation_1d" => {
            let set = catalog("punctured_interval", json!({"low": -7, "high": 7, "punctures": [-5, -3, -1, 1, 3, 5]}))?;
            Ok(Scenario::new(which, set, ints(&[&[0], &[6], &[7]]), AgentRoster::new(3, [0, 2])?)?.with_expected(
                ExpectedOutcome::periodic(0, 3),
                "Symmetric punctured interval with agents 1 and 3 stubborn at 0 and 7; agent 2 cycles \
                 6 -> 3 -> 5 -> 6.",
            ))
        }
        "ex5_cross_infinite" => example5(rat(2, 1)),
        other => Err(Error::Catalog(format!("unknown scenario `{other}`; known: {}", BUILTIN_SCENARIOS.join(", ")))),
    }
}

/// Non-clustered equilibrium over the triangle with circumradius 1.
///
/// Agent 1 sits at the origin and trusts three opinions that average to the
/// origin; each of those trusts only itself, since the triangle contains no
/// difference between them or back towards the origin. One exact step
/// leaves the state unchanged.
fn example1() -> Result<Scenario> {
    let set = catalog("triangle", json!({"circumradius": 1}))?;
    let opinions = vec![
        vec![rat(0, 1), rat(0, 1)],
        vec![rat(0, 1), rat(4, 5)],
        vec![rat(-7, 10), rat(-2, 5)],
        vec![rat(7, 10), rat(-2, 5)],
    ];
    Ok(Scenario::new("ex1_nonclustered_equilibrium", set, opinions, AgentRoster::without_stubborn(4)?)?.with_expected(
        ExpectedOutcome { kind: OutcomeKind::Terminated, period: None, offset: None },
        "Triangle with circumradius 1. Agent 1 at the origin trusts (0,4/5), (-7/10,-2/5), (7/10,-2/5), \
             which sum to the origin; no other pair is in confidence, so the state is an equilibrium \
             that is not clustered.",
    ))
}

/// Square `(±1, ±1)` plus a fifth agent at `(0, a)` over the coordinate cross.
pub fn example5(a: Rational) -> Result<Scenario> {
    if a <= rat(1, 1) {
        return Err(Error::Domain(format!("the fifth opinion needs a > 1, got {a}")));
    }
    let set = catalog("cross_lines", json!({}))?;
    let mut opinions = ints(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]]);
    opinions.push(vec![rat(0, 1), a.clone()]);
    Ok(Scenario::new("ex5_cross_infinite", set, opinions, AgentRoster::without_stubborn(5)?)?.with_expected(
        ExpectedOutcome::kind(OutcomeKind::ConvergentNonTerminating),
        &format!(
            "Coordinate cross; square vertices contract by 1/3 per step towards the origin and never \
             reach it; fifth agent at (0, {a}) (any a > 1 works)."
        ),
    ))
}

/// Seeded random scenario: regular agents uniform in the box, then
/// `stubborn_count` stubborn agents (the last indices) at `stubborn_opinion`.
///
/// Coordinates come from [`SplitMix64::uniform_rational`], which yields
/// dyadic rationals, so both backends see identical values.
#[allow(clippy::too_many_arguments)]
pub fn build_random(
    n: usize,
    d: usize,
    set: ConfidenceSet,
    stubborn_count: usize,
    stubborn_opinion: &[Rational],
    box_low: &[Rational],
    box_high: &[Rational],
    seed: u64,
) -> Result<Scenario> {
    if d != set.dim() {
        return Err(Error::Dimension(format!("d = {d} but the set has dimension {}", set.dim())));
    }
    if box_low.len() != d || box_high.len() != d || stubborn_opinion.len() != d {
        return Err(Error::Dimension(format!("box corners and stubborn opinion need {d} coordinates")));
    }
    if box_low.iter().zip(box_high).any(|(l, h)| l >= h) {
        return Err(Error::Domain("box_low must be below box_high in every coordinate".into()));
    }
    if stubborn_count > n {
        return Err(Error::Domain(format!("{stubborn_count} stubborn agents among {n}")));
    }
    let mut rng = SplitMix64::new(seed);
    let regular = n - stubborn_count;
    let mut opinions: Vec<Vec<Rational>> =
        (0..regular).map(|_| box_low.iter().zip(box_high).map(|(l, h)| rng.uniform_rational(l, h)).collect()).collect();
    opinions.extend((0..stubborn_count).map(|_| stubborn_opinion.to_vec()));
    let roster = AgentRoster::new(n, regular..n)?;
    let mut s = Scenario::new(&format!("random_n{n}_d{d}_seed{seed}"), set, opinions, roster)?;
    s.provenance = format!("uniform box sample, splitmix64 seed {seed}");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, step};

    #[test]
    fn unknown_example() {
        assert!(matches!(build_paper_example("ex9"), Err(Error::Catalog(_))));
    }

    #[test]
    fn examples_are_consistent() {
        for name in BUILTIN_SCENARIOS {
            let s = build_paper_example(name).unwrap();
            assert_eq!(s.name, name);
            assert!(s.expected.is_some());
            let state = s.initial_state::<Rational>().unwrap();
            assert_eq!(state.dim(), s.set.dim());
        }
    }

    #[test]
    fn period3_example_orbit() {
        let s = build_paper_example("ex2_period3_scalar").unwrap();
        let t = simulate(&s.initial_state::<Rational>().unwrap(), &s.set, &s.roster, &s.limits).unwrap();
        assert!(s.expected.unwrap().matches(t.outcome()));
        let agent2: Vec<String> = t.states().iter().map(|st| st.row(1).get(0).to_string()).collect();
        assert_eq!(agent2, ["6", "3", "5", "6"]);
    }

    #[test]
    fn example1_is_fixed() {
        let s = build_paper_example("ex1_nonclustered_equilibrium").unwrap();
        let st = s.initial_state::<Rational>().unwrap();
        assert_eq!(step(&st, &s.set, &s.roster).unwrap(), st);
    }

    #[test]
    fn example5_parameter() {
        assert!(example5(rat(1, 1)).is_err());
        let s = example5(rat(3, 2)).unwrap();
        assert_eq!(s.opinions[4], vec![rat(0, 1), rat(3, 2)]);
    }

    #[test]
    fn random_is_reproducible() {
        let set = catalog("min_coordinate", json!({"eps": "1/10", "dim": 2})).unwrap();
        let lo = [rat(-1, 1), rat(-1, 1)];
        let hi = [rat(1, 1), rat(1, 1)];
        let zero = [rat(0, 1), rat(0, 1)];
        let a = build_random(10, 2, set.clone(), 3, &zero, &lo, &hi, 42).unwrap();
        let b = build_random(10, 2, set.clone(), 3, &zero, &lo, &hi, 42).unwrap();
        assert_eq!(a.opinions, b.opinions);
        assert_eq!(a.roster.stubborn().collect::<Vec<_>>(), vec![7, 8, 9]);
        assert!(a.opinions[..7].iter().flatten().all(|x| *x >= rat(-1, 1) && *x < rat(1, 1)));
        assert!(a.opinions[7..].iter().all(|o| o == &zero));
        let c = build_random(10, 2, set.clone(), 0, &zero, &lo, &hi, 43).unwrap();
        assert_ne!(a.opinions, c.opinions);
        assert_eq!(c.roster.stubborn_count(), 0);
        assert!(build_random(10, 2, set.clone(), 0, &zero, &hi, &lo, 1).is_err());
        assert!(build_random(10, 2, set, 11, &zero, &lo, &hi, 1).is_err());
    }

    #[test]
    fn document_round_trip() {
        for name in BUILTIN_SCENARIOS {
            let s = build_paper_example(name).unwrap();
            let doc = s.to_document().unwrap();
            let back = Scenario::from_document(&doc).unwrap();
            assert_eq!(back.opinions, s.opinions);
            assert_eq!(back.roster, s.roster);
            assert_eq!(back.expected, s.expected);
            assert_eq!(back.set.name(), s.set.name());
            assert_eq!(back.backend, s.backend);
        }
    }

    #[test]
    fn parse_diagnostics() {
        let err =
            Scenario::from_json_str("{\"set\": {\"name\": \"lp_ball\"},\n \"agents\": {\"opinions\": [[\"x\"]]}}")
                .unwrap_err()
                .to_string();
        assert!(err.contains("agents.opinions[0]"), "{err}");
        let err = Scenario::from_json_str("{\"set\": 3}").unwrap_err().to_string();
        assert!(err.contains("set"), "{err}");
        let err = Scenario::from_json_str("{\n\"set\": {\"name\": \"interval\"},\n oops}").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = Scenario::from_json_str(
            r#"{"set": {"name": "interval", "params": {"low": -1, "high": 1}}, "agents": {"opinions": [[0]]}, "limts": {}}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("limts"), "{err}");
    }

    #[test]
    fn random_documents() {
        let doc = json!({
            "set": {"name": "min_coordinate", "params": {"eps": "1/10", "dim": 2}},
            "agents": {"n": 6, "d": 2, "random": {"seed": 9, "box": {"low": [-1, -1], "high": [1, 1]}, "stubborn_count": 2}},
            "limits": {"backend": "float", "max_steps": 500, "tolerance": 1e-10}
        });
        let s = Scenario::from_document(&doc).unwrap();
        assert_eq!(s.backend, Backend::Float);
        assert_eq!(s.limits.max_steps, 500);
        assert_eq!(s.limits.convergence_tol, Some(1e-10));
        assert_eq!(s.roster.stubborn().collect::<Vec<_>>(), vec![4, 5]);
        let again = Scenario::from_document(&s.to_document().unwrap()).unwrap();
        assert_eq!(again.opinions, s.opinions);
    }

    #[test]
    fn exact_literals() {
        let doc = json!({
            "set": {"name": "interval", "params": {"low": "-1/3", "high": 0.1}},
            "agents": {"opinions": [["1/3"], [0.1]]}
        });
        let s = Scenario::from_document(&doc).unwrap();
        assert_eq!(s.opinions[0][0], rat(1, 3));
        assert_eq!(s.opinions[1][0], rat(1, 10));
    }
}
