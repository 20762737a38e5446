//! Classification of states and checks of the convergence theory on runs.

use std::fmt::Write as _;

use num_traits::Zero;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use petgraph::unionfind::UnionFind;
use serde::Serialize;
use serde_json::{json, Value};

use crate::confidence_set::{is_symmetric_certified, is_zero_neighborhood_certified, ConfidenceSet, SetSpec};
use crate::dynamics::{
    neighbor_sets, reduced_stubborn_weights, simulate, step, AgentRoster, Limits, OpinionState, Outcome, Trajectory,
    UndeterminedReason, WeightMatrix,
};
use crate::error::{Error, Result};
use crate::numerics::{Backend, Opinion, Rational, Scalar};
use crate::rng::SplitMix64;

/// Every pair is equal or mutually out of confidence: `ξ^i = ξ^j` or `ξ^j − ξ^i ∉ O`.
pub fn is_clustered<S: Scalar>(state: &OpinionState<S>, set: &ConfidenceSet) -> bool {
    clustered_pairs(state, set, |_| true)
}

/// Clustering condition over pairs whose first agent is regular. Stubborn
/// agents never move, so only the trust of regular agents matters.
pub fn is_clustered_for<S: Scalar>(state: &OpinionState<S>, set: &ConfidenceSet, roster: &AgentRoster) -> bool {
    clustered_pairs(state, set, |i| !roster.is_stubborn(i))
}

fn clustered_pairs<S: Scalar>(state: &OpinionState<S>, set: &ConfidenceSet, include: impl Fn(usize) -> bool) -> bool {
    let mut diff = Vec::with_capacity(state.dim());
    (0..state.n()).filter(|&i| include(i)).all(|i| {
        (0..state.n()).all(|j| {
            if state.row(i) == state.row(j) {
                return true;
            }
            diff.clear();
            diff.extend(state.row(j).coords().iter().zip(state.row(i).coords()).map(|(a, b)| a.clone() - b.clone()));
            !set.member(&diff)
        })
    })
}

/// `step(Ξ) = Ξ`, checked by applying one update.
pub fn is_equilibrium<S: Scalar>(state: &OpinionState<S>, set: &ConfidenceSet, roster: &AgentRoster) -> Result<bool> {
    Ok(step(state, set, roster)? == *state)
}

/// Agents grouped by opinion equality.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPartition<S> {
    /// Blocks of agent indices, each ascending, ordered by first member.
    pub blocks: Vec<Vec<usize>>,
    /// Opinion of each block's first member.
    pub representatives: Vec<Opinion<S>>,
    pub tolerance: f64,
}

impl<S: Scalar> ClusterPartition<S> {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index of each agent.
    pub fn assignment(&self) -> Vec<usize> {
        let n = self.blocks.iter().map(Vec::len).sum();
        let mut out = vec![0; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }
}

/// Union-find over pairs with `max_k |ξ^i_k − ξ^j_k| ≤ tol`; `tol` must be
/// zero on the exact backend.
pub fn clusters<S: Scalar>(state: &OpinionState<S>, tol: f64) -> Result<ClusterPartition<S>> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Domain(format!("cluster tolerance must be nonnegative, got {tol}")));
    }
    if S::BACKEND == Backend::Exact && tol != 0.0 {
        return Err(Error::Domain("exact clustering uses tolerance 0".into()));
    }
    let n = state.n();
    let mut uf = UnionFind::<usize>::new(n);
    for i in 0..n {
        for j in i + 1..n {
            let close = if tol == 0.0 {
                state.row(i) == state.row(j)
            } else {
                state
                    .row(i)
                    .coords()
                    .iter()
                    .zip(state.row(j).coords())
                    .all(|(a, b)| (a.to_float() - b.to_float()).abs() <= tol)
            };
            if close {
                uf.union(i, j);
            }
        }
    }
    let labels = uf.into_labeling();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_of_label = std::collections::HashMap::new();
    for (i, label) in labels.into_iter().enumerate() {
        let b = *block_of_label.entry(label).or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[b].push(i);
    }
    let representatives = blocks.iter().map(|b| state.row(b[0]).clone()).collect();
    Ok(ClusterPartition { blocks, representatives, tolerance: tol })
}

/// `G(Ξ)`: arc `i → j` iff agent `i` trusts agent `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfidenceGraph {
    out: Vec<Vec<usize>>,
    stubborn: Vec<bool>,
}

impl ConfidenceGraph {
    pub fn from_neighbor_sets(out: Vec<Vec<usize>>, roster: &AgentRoster) -> Self {
        let stubborn = (0..out.len()).map(|i| roster.is_stubborn(i)).collect();
        ConfidenceGraph { out, stubborn }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.out[i].binary_search(&j).is_ok()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(i, js)| js.iter().map(move |&j| (i, j)))
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn has_all_self_loops(&self) -> bool {
        (0..self.n()).all(|i| self.has_arc(i, i))
    }

    pub fn is_symmetric(&self) -> bool {
        self.arcs().all(|(i, j)| self.has_arc(j, i))
    }

    /// Trust is an equivalence relation: the graph is a union of disconnected
    /// cliques with self-loops.
    pub fn is_disjoint_cliques(&self) -> bool {
        (0..self.n()).all(|i| self.has_arc(i, i) && self.out[i].iter().all(|&j| self.out[j] == self.out[i]))
    }

    /// Strongly connected components, each ascending, ordered by first member.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.n()).map(|_| g.add_node(())).collect();
        for (i, j) in self.arcs() {
            g.add_edge(nodes[i], nodes[j], ());
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort();
        comps
    }

    /// DOT digraph with 1-based agent labels; stubborn agents are boxes.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for i in 0..self.n() {
            if self.stubborn[i] {
                let _ = writeln!(s, "  {} [shape=box, label=\"{} (stubborn)\"];", i + 1, i + 1);
            } else {
                let _ = writeln!(s, "  {};", i + 1);
            }
        }
        for (i, j) in self.arcs() {
            let _ = writeln!(s, "  {} -> {};", i + 1, j + 1);
        }
        s.push_str("}\n");
        s
    }
}

pub fn confidence_graph<S: Scalar>(
    state: &OpinionState<S>,
    set: &ConfidenceSet,
    roster: &AgentRoster,
) -> Result<ConfidenceGraph> {
    Ok(ConfidenceGraph::from_neighbor_sets(neighbor_sets(state, set, roster)?, roster))
}

/// Sampling effort for the set-level assumption checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certification {
    pub samples: usize,
    pub seed: u64,
}

impl Default for Certification {
    fn default() -> Self {
        Certification { samples: 256, seed: 0x5c0d }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<S> {
    pub assumption1: bool,
    pub assumption2_symmetry: bool,
    pub assumption3_zero_neighborhood: bool,
    pub assumption4_homogeneous_stubborn: bool,
    /// `max w_ij / w_ji` over recorded steps; `None` when some arc is one-sided.
    pub type_symmetry_k: Option<S>,
    /// Smallest diagonal weight over recorded steps.
    pub diagonal_delta: S,
    /// Size of the (reduced) weight matrices the constants refer to.
    pub matrix_size: usize,
    pub stubborn_count: usize,
}

impl<S: Scalar> HypothesisReport<S> {
    /// `K ≤ n`, when `K` exists.
    pub fn k_within_n(&self) -> Option<bool> {
        let n = S::from_i64(self.matrix_size as i64);
        self.type_symmetry_k.as_ref().map(|k| *k <= n)
    }

    /// `δ ≥ 1/n`.
    pub fn delta_at_least_inverse_n(&self) -> bool {
        self.diagonal_delta >= S::one().div_int(self.matrix_size.max(1))
    }

    /// Hypotheses for termination without stubborn agents.
    pub fn termination_applies(&self) -> bool {
        self.assumption1 && self.assumption2_symmetry && self.assumption3_zero_neighborhood && self.stubborn_count == 0
    }

    /// Hypotheses for the stubborn branch of the termination statement.
    pub fn stubborn_branch_applies(&self) -> bool {
        self.assumption1
            && self.assumption2_symmetry
            && self.assumption3_zero_neighborhood
            && self.assumption4_homogeneous_stubborn
            && self.stubborn_count > 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "assumption1": self.assumption1,
            "assumption2_symmetry": self.assumption2_symmetry,
            "assumption3_zero_neighborhood": self.assumption3_zero_neighborhood,
            "assumption4_homogeneous_stubborn": self.assumption4_homogeneous_stubborn,
            "type_symmetry_K": self.type_symmetry_k.as_ref().map(Scalar::to_text),
            "diagonal_delta": self.diagonal_delta.to_text(),
            "matrix_size": self.matrix_size,
            "K_within_n": self.k_within_n(),
            "delta_at_least_inverse_n": self.delta_at_least_inverse_n(),
        })
    }
}

fn fold_constants<S: Scalar>(w: &WeightMatrix<S>, k: &mut Option<Option<S>>, delta: &mut Option<S>) {
    let m = w.size();
    for i in 0..m {
        let d = w.get(i, i).clone();
        if delta.as_ref().is_none_or(|cur| d < *cur) {
            *delta = Some(d);
        }
        for j in 0..m {
            if i == j {
                continue;
            }
            let (a, b) = (w.get(i, j), w.get(j, i));
            match (a.is_zero(), b.is_zero()) {
                (true, true) => {}
                (false, false) => {
                    let r = a.clone() / b.clone();
                    if let Some(Some(cur)) = k {
                        if r > *cur {
                            *cur = r;
                        }
                    } else if k.is_none() {
                        *k = Some(Some(r));
                    }
                }
                _ => *k = Some(None),
            }
        }
    }
}

/// Assumption flags from set metadata plus sampling, and the realized
/// Type-symmetry and diagonal constants over every weight matrix the run used (reduced to the
/// regular agents when stubborn agents exist).
pub fn check_hypotheses<S: Scalar>(
    set: &ConfidenceSet,
    roster: &AgentRoster,
    trajectory: &Trajectory<S>,
    cert: &Certification,
) -> Result<HypothesisReport<S>> {
    let assumption1 = set.zero_member();
    let assumption2_symmetry = set.symmetry() != crate::confidence_set::Symmetry::DeclaredFalse
        && is_symmetric_certified(set, cert.samples, cert.seed);
    let assumption3_zero_neighborhood =
        set.zero_neighborhood().is_some() && is_zero_neighborhood_certified(set, cert.samples, cert.seed);
    let initial = trajectory.initial();
    let mut stubborn = roster.stubborn();
    let assumption4_homogeneous_stubborn = match stubborn.next() {
        None => true,
        Some(first) => stubborn.all(|i| initial.row(i) == initial.row(first)),
    };

    // K: None = no pair seen yet, Some(None) = one-sided arc found.
    let mut k: Option<Option<S>> = None;
    let mut delta: Option<S> = None;
    let mut size = roster.n();
    for (_, w) in trajectory.weight_epochs() {
        if roster.stubborn_count() > 0 {
            if roster.stubborn_count() == roster.n() {
                continue;
            }
            let reduced = reduced_stubborn_weights(&w, roster)?;
            size = reduced.size();
            fold_constants(&reduced, &mut k, &mut delta);
        } else {
            fold_constants(&w, &mut k, &mut delta);
        }
    }
    let type_symmetry_k = match k {
        None => Some(S::one()),
        Some(k) => k,
    };
    Ok(HypothesisReport {
        assumption1,
        assumption2_symmetry,
        assumption3_zero_neighborhood,
        assumption4_homogeneous_stubborn,
        type_symmetry_k,
        diagonal_delta: delta.unwrap_or_else(S::one),
        matrix_size: size,
        stubborn_count: roster.stubborn_count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// Without stubborn agents the run terminates.
    Terminates,
    /// The terminal state is clustered and its graph is disjoint cliques.
    TerminalClustered,
    /// On the last recorded state, equilibrium and clustering agree.
    EquilibriumIffClustered,
    /// Each regular agent froze or approached the stubborn opinion.
    StubbornFreezeOrConverge,
    /// Type-symmetry constant at most n and diagonal at least 1/n.
    WeightConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Holds,
    Violated,
    Inconclusive,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimCheck {
    pub claim: Claim,
    pub status: ClaimStatus,
    pub detail: String,
    /// Replayable scenario document for violated claims.
    pub counterexample: Option<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimConfig {
    /// Recorded steps inspected for freezing.
    pub tail: usize,
    /// Distance to the stubborn opinion that counts as converged.
    pub tol: f64,
}

impl Default for ClaimConfig {
    fn default() -> Self {
        ClaimConfig { tail: 50, tol: 1e-6 }
    }
}

/// Scenario document reproducing `state` under `set` and `roster`.
pub fn replay_document<S: Scalar>(
    name: &str,
    set: &ConfidenceSet,
    roster: &AgentRoster,
    state: &OpinionState<S>,
) -> Value {
    let set_doc = set
        .spec()
        .map(|s| json!({"name": s.name, "params": s.params}))
        .unwrap_or_else(|| json!({"name": set.name(), "params": {}}));
    json!({
        "schema": crate::scenarios::SCENARIO_SCHEMA,
        "name": name,
        "set": set_doc,
        "agents": {
            "n": state.n(),
            "d": state.dim(),
            "opinions": state.rows().iter()
                .map(|r| r.coords().iter().map(Scalar::to_text).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        },
        "stubborn": roster.stubborn().collect::<Vec<_>>(),
        "limits": {"backend": S::BACKEND},
    })
}

fn check(claim: Claim, status: ClaimStatus, detail: impl Into<String>) -> ClaimCheck {
    ClaimCheck { claim, status, detail: detail.into(), counterexample: None }
}

/// Checks the conclusions of the convergence theorem whose hypotheses the
/// report confirms. Claims without hypotheses are `NotApplicable`.
pub fn verify_theorem1<S: Scalar>(
    trajectory: &Trajectory<S>,
    set: &ConfidenceSet,
    roster: &AgentRoster,
    report: &HypothesisReport<S>,
    config: &ClaimConfig,
) -> Result<Vec<ClaimCheck>> {
    let last = trajectory.last();
    let initial = trajectory.initial();
    let dump = |name: &str| Some(replay_document(name, set, roster, initial));
    let mut out = Vec::new();

    // Termination and terminal clustering.
    if report.termination_applies() {
        let (status, detail) = match trajectory.outcome() {
            Outcome::Terminated { at_step, .. } => (ClaimStatus::Holds, format!("terminated at step {at_step}")),
            Outcome::Undetermined { reason: UndeterminedReason::NumericallyConverged, steps } => {
                (ClaimStatus::Inconclusive, format!("float run settled numerically after {steps} steps"))
            }
            other => (ClaimStatus::Violated, format!("outcome {}", other.kind())),
        };
        let mut c = check(Claim::Terminates, status, detail);
        if status == ClaimStatus::Violated {
            c.counterexample = dump("counterexample_terminates");
        }
        out.push(c);

        if trajectory.outcome().is_terminated() {
            let clustered = is_clustered(last, set);
            let cliques = confidence_graph(last, set, roster)?.is_disjoint_cliques();
            let mut c = if clustered && cliques {
                check(Claim::TerminalClustered, ClaimStatus::Holds, "terminal state clustered")
            } else {
                check(
                    Claim::TerminalClustered,
                    ClaimStatus::Violated,
                    format!("clustered = {clustered}, disjoint cliques = {cliques}"),
                )
            };
            if c.status == ClaimStatus::Violated {
                c.counterexample = dump("counterexample_terminal_clustered");
            }
            out.push(c);
        } else {
            out.push(check(Claim::TerminalClustered, ClaimStatus::Inconclusive, "run did not terminate"));
        }
    } else {
        out.push(check(Claim::Terminates, ClaimStatus::NotApplicable, "hypotheses not met"));
        out.push(check(Claim::TerminalClustered, ClaimStatus::NotApplicable, "hypotheses not met"));
    }

    // Equilibria are exactly the clustered states.
    if report.assumption1 && report.assumption2_symmetry && report.assumption4_homogeneous_stubborn {
        let eq = is_equilibrium(last, set, roster)?;
        let cl = is_clustered_for(last, set, roster);
        let mut c = check(
            Claim::EquilibriumIffClustered,
            if eq == cl { ClaimStatus::Holds } else { ClaimStatus::Violated },
            format!("equilibrium = {eq}, clustered = {cl}"),
        );
        if eq != cl {
            c.counterexample = Some(replay_document("counterexample_equilibrium", set, roster, last));
        }
        out.push(c);
    } else {
        out.push(check(Claim::EquilibriumIffClustered, ClaimStatus::NotApplicable, "hypotheses not met"));
    }

    // Stubborn branch.
    if report.stubborn_branch_applies() {
        let star = roster.stubborn().next().map(|i| initial.row(i).clone()).expect("stubborn agent");
        let states = trajectory.states();
        let tail_start = states.len().saturating_sub(config.tail + 1);
        let terminated = trajectory.outcome().is_terminated();
        let mut offenders = Vec::new();
        for i in roster.regular() {
            let frozen = terminated || states[tail_start..].iter().all(|s| s.row(i) == last.row(i));
            let dist = last
                .row(i)
                .coords()
                .iter()
                .zip(star.coords())
                .map(|(a, b)| (a.to_float() - b.to_float()).abs())
                .fold(0.0, f64::max);
            if !frozen && (dist.is_nan() || dist >= config.tol) {
                offenders.push(i + 1);
            }
        }
        let mut c = if offenders.is_empty() {
            check(Claim::StubbornFreezeOrConverge, ClaimStatus::Holds, "every regular agent froze or converged")
        } else if matches!(trajectory.outcome(), Outcome::Undetermined { .. }) && trajectory.steps() < config.tail {
            check(Claim::StubbornFreezeOrConverge, ClaimStatus::Inconclusive, "run shorter than the tail window")
        } else {
            check(
                Claim::StubbornFreezeOrConverge,
                ClaimStatus::Violated,
                format!("agents {offenders:?} neither froze nor approached the stubborn opinion"),
            )
        };
        if c.status == ClaimStatus::Violated {
            c.counterexample = dump("counterexample_stubborn");
        }
        out.push(c);
    } else {
        out.push(check(Claim::StubbornFreezeOrConverge, ClaimStatus::NotApplicable, "hypotheses not met"));
    }

    // Weight constants on symmetric runs without stubborn agents.
    if report.assumption1 && report.assumption2_symmetry && report.stubborn_count == 0 {
        let k_ok = report.k_within_n();
        let d_ok = report.delta_at_least_inverse_n();
        let status = match k_ok {
            Some(true) if d_ok => ClaimStatus::Holds,
            _ => ClaimStatus::Violated,
        };
        let mut c = check(
            Claim::WeightConstants,
            status,
            format!(
                "K = {}, delta = {}, n = {}",
                report.type_symmetry_k.as_ref().map_or("none".into(), Scalar::to_text),
                report.diagonal_delta.to_text(),
                report.matrix_size
            ),
        );
        if status == ClaimStatus::Violated {
            c.counterexample = dump("counterexample_weight_constants");
        }
        out.push(c);
    } else {
        out.push(check(Claim::WeightConstants, ClaimStatus::NotApplicable, "hypotheses not met"));
    }
    Ok(out)
}

/// Families sampled by [`search_period2_n3`].
#[derive(Debug, Clone, PartialEq)]
pub enum SearchFamily {
    /// `n = 3` scalar agents; `O = (low, high)` minus up to `max_punctures`
    /// nonzero points, all on the grid of step `1/grid` within `±max_extent`.
    PuncturedIntervals { max_extent: i64, grid: i64, max_punctures: usize },
    /// `n = 4` control: the star-rays period-2 configuration, translated by a
    /// random integer vector and with agents relabelled.
    StarRaysControl,
}

impl Default for SearchFamily {
    fn default() -> Self {
        SearchFamily::PuncturedIntervals { max_extent: 10, grid: 2, max_punctures: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Period2Hit {
    pub trial: usize,
    pub offset: usize,
    /// Replayable scenario of the initial state.
    pub scenario: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SearchReport {
    pub trials: usize,
    pub hits: Vec<Period2Hit>,
    pub terminated: usize,
    /// Periodic runs of period other than 2.
    pub other_periodic: usize,
    pub undetermined: usize,
}

fn grid_value(rng: &mut SplitMix64, lo: i64, hi: i64, grid: i64) -> Rational {
    let span = (hi - lo) as u64;
    let k = lo + rng.below(span + 1) as i64;
    Rational::new(k.into(), grid.into())
}

fn random_punctured(rng: &mut SplitMix64, max_extent: i64, grid: i64, max_punctures: usize) -> Result<ConfidenceSet> {
    let m = max_extent * grid;
    let low = -grid_value(rng, 1, m, grid);
    let high = grid_value(rng, 1, m, grid);
    let count = rng.below(max_punctures as u64 + 1) as usize;
    let mut punctures: Vec<Rational> = Vec::with_capacity(count);
    for _ in 0..count {
        let p = grid_value(rng, -m, m, grid);
        if !p.is_zero() && p > low && p < high && !punctures.contains(&p) {
            punctures.push(p);
        }
    }
    let text = |r: &Rational| json!(r.to_string());
    SetSpec::new(
        "punctured_interval",
        json!({"low": text(&low), "high": text(&high), "punctures": punctures.iter().map(text).collect::<Vec<_>>()}),
    )
    .build()
}

/// Randomized search for period-2 orbits. Each hit carries a replayable
/// scenario; the `n = 3` family is expected to return none.
pub fn search_period2_n3(family: &SearchFamily, trials: usize, seed: u64) -> Result<SearchReport> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut report = SearchReport { trials, ..SearchReport::default() };
    let limits = Limits { max_steps: 500, nonterminating_window: None, ..Limits::default() };
    for trial in 0..trials {
        let (set, state) = match family {
            SearchFamily::PuncturedIntervals { max_extent, grid, max_punctures } => {
                let set = random_punctured(&mut rng, *max_extent, *grid, *max_punctures)?;
                let m = 2 * max_extent * grid;
                let rows = (0..3)
                    .map(|_| Opinion::new(vec![grid_value(&mut rng, -m, m, *grid)]))
                    .collect::<Result<Vec<_>>>()?;
                (set, OpinionState::new(rows)?)
            }
            SearchFamily::StarRaysControl => {
                let base = OpinionState::<Rational>::from_int_rows(&[&[0, 0], &[-3, 1], &[-3, -1], &[4, 0]])?;
                let shift = Opinion::new(vec![grid_value(&mut rng, -50, 50, 1), grid_value(&mut rng, -50, 50, 1)])?;
                let mut perm: Vec<usize> = (0..4).collect();
                for i in (1..4).rev() {
                    perm.swap(i, rng.below(i as u64 + 1) as usize);
                }
                (SetSpec::new("star_rays_example3", json!({})).build()?, base.translated(&shift)?.permuted(&perm)?)
            }
        };
        let roster = AgentRoster::without_stubborn(state.n())?;
        let t = simulate(&state, &set, &roster, &limits)?;
        match t.outcome() {
            Outcome::Periodic { offset, period: 2, .. } => report.hits.push(Period2Hit {
                trial,
                offset: *offset,
                scenario: replay_document(&format!("period2_trial_{trial}"), &set, &roster, &state),
            }),
            Outcome::Periodic { .. } => report.other_periodic += 1,
            Outcome::Terminated { .. } => report.terminated += 1,
            _ => report.undetermined += 1,
        }
    }
    Ok(report)
}

/// Short label of a search family.
pub fn search_family_name(family: &SearchFamily) -> String {
    match family {
        SearchFamily::PuncturedIntervals { max_extent, grid, max_punctures } => {
            format!("punctured_intervals(extent={max_extent}, grid=1/{grid}, punctures<={max_punctures})")
        }
        SearchFamily::StarRaysControl => "star_rays_control".into(),
    }
}
