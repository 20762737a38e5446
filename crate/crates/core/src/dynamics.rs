//! The SCOD state machine.
//!
//! Every regular agent replaces its opinion by the mean of the opinions it
//! trusts, `N_i(Ξ) = {j : ξ^j − ξ^i ∈ O}`; stubborn agents have `N_i = {i}`.
//! All agents update synchronously.

use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::confidence_set::ConfidenceSet;
use crate::error::{Error, Result};
use crate::numerics::{Backend, Opinion, Scalar};

/// Agent count and the stubborn subset `V_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRoster {
    n: usize,
    stubborn: BTreeSet<usize>,
}

impl AgentRoster {
    pub fn new(n: usize, stubborn: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("at least one agent is required".into()));
        }
        let stubborn: BTreeSet<usize> = stubborn.into_iter().collect();
        if let Some(&bad) = stubborn.iter().find(|&&i| i >= n) {
            return Err(Error::Domain(format!("stubborn agent {bad} out of range for n = {n}")));
        }
        Ok(AgentRoster { n, stubborn })
    }

    pub fn without_stubborn(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_stubborn(&self, i: usize) -> bool {
        self.stubborn.contains(&i)
    }

    pub fn stubborn(&self) -> impl Iterator<Item = usize> + '_ {
        self.stubborn.iter().copied()
    }

    pub fn stubborn_count(&self) -> usize {
        self.stubborn.len()
    }

    pub fn regular(&self) -> Vec<usize> {
        (0..self.n).filter(|i| !self.stubborn.contains(i)).collect()
    }

    /// Roster after relabelling agent `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(self.n, self.stubborn.iter().map(|&i| perm[i]))
    }
}

/// The `n × d` opinion matrix at step `t`. Equality compares opinions only.
#[derive(Debug, Clone)]
pub struct OpinionState<S> {
    rows: Vec<Opinion<S>>,
    step: usize,
}

impl<S: PartialEq> PartialEq for OpinionState<S> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl<S: Scalar> OpinionState<S> {
    pub fn new(rows: Vec<Opinion<S>>) -> Result<Self> {
        Self::at_step(rows, 0)
    }

    pub fn at_step(rows: Vec<Opinion<S>>, step: usize) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Domain("opinion state needs at least one agent".into()))?;
        let d = first.dim();
        if let Some(bad) = rows.iter().find(|r| r.dim() != d) {
            return Err(Error::Dimension(format!("rows of dimension {d} and {}", bad.dim())));
        }
        Ok(OpinionState { rows, step })
    }

    /// Scalar opinions from integers (`d = 1`).
    pub fn scalar_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Opinion::from_i64s(&[v])).collect::<Result<_>>()?)
    }

    /// Opinions from integer coordinate rows.
    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Opinion::from_i64s(r)).collect::<Result<_>>()?)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].dim()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn row(&self, i: usize) -> &Opinion<S> {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Opinion<S>] {
        &self.rows
    }

    pub fn with_step(mut self, step: usize) -> Self {
        self.step = step;
        self
    }

    /// Adds `shift` to every row.
    pub fn translated(&self, shift: &Opinion<S>) -> Result<Self> {
        let rows = self.rows.iter().map(|r| r.add(shift)).collect::<Result<_>>()?;
        Self::at_step(rows, self.step)
    }

    /// Moves row `i` to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::Dimension("permutation length differs from agent count".into()));
        }
        let mut rows: Vec<Option<Opinion<S>>> = vec![None; self.n()];
        for (i, &p) in perm.iter().enumerate() {
            rows[p] = Some(self.rows[i].clone());
        }
        let rows =
            rows.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| Error::Domain("not a permutation".into()))?;
        Self::at_step(rows, self.step)
    }

    /// Largest coordinate change between two states of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(a, b)| a.coords().iter().zip(b.coords()).map(|(x, y)| (x.to_float() - y.to_float()).abs()))
            .fold(0.0, f64::max)
    }

    fn canonical_hash(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.rows.len().hash(&mut h);
        for r in &self.rows {
            r.hash_canonical(&mut h);
        }
        h.finish()
    }
}

/// `N_i` for every agent, each sorted ascending.
pub type NeighborSets = Vec<Vec<usize>>;

fn check_inputs<S: Scalar>(state: &OpinionState<S>, set: &ConfidenceSet, roster: &AgentRoster) -> Result<()> {
    if state.dim() != set.dim() {
        return Err(Error::Dimension(format!(
            "opinions have dimension {}, confidence set `{}` has {}",
            state.dim(),
            set.name(),
            set.dim()
        )));
    }
    if state.n() != roster.n() {
        return Err(Error::Dimension(format!("state has {} agents, roster has {}", state.n(), roster.n())));
    }
    set.check_backend(S::BACKEND)
}

fn neighbors_unchecked<S: Scalar>(
    state: &OpinionState<S>,
    set: &ConfidenceSet,
    roster: &AgentRoster,
    i: usize,
    scratch: &mut Vec<S>,
) -> Vec<usize> {
    if roster.is_stubborn(i) {
        return vec![i];
    }
    let me = state.rows[i].coords();
    (0..state.n())
        .filter(|&j| {
            scratch.clear();
            scratch.extend(state.rows[j].coords().iter().zip(me).map(|(a, b)| a.clone() - b.clone()));
            set.member(scratch)
        })
        .collect()
}

/// Agents trusted by agent `i` in `state`.
pub fn neighbors<S: Scalar>(
    state: &OpinionState<S>,
    set: &ConfidenceSet,
    roster: &AgentRoster,
    i: usize,
) -> Result<Vec<usize>> {
    check_inputs(state, set, roster)?;
    if i >= state.n() {
        return Err(Error::Domain(format!("agent {i} out of range for n = {}", state.n())));
    }
    Ok(neighbors_unchecked(state, set, roster, i, &mut Vec::with_capacity(state.dim())))
}

/// `N_i` for every agent.
pub fn neighbor_sets<S: Scalar>(
    state: &OpinionState<S>,
    set: &ConfidenceSet,
    roster: &AgentRoster,
) -> Result<NeighborSets> {
    check_inputs(state, set, roster)?;
    let mut scratch = Vec::with_capacity(state.dim());
    Ok((0..state.n()).map(|i| neighbors_unchecked(state, set, roster, i, &mut scratch)).collect())
}

/// Averages each agent over its neighbor set.
pub fn apply_neighbor_sets<S: Scalar>(state: &OpinionState<S>, sets: &NeighborSets) -> Result<OpinionState<S>> {
    let rows = sets.iter().enumerate().map(|(i, nbrs)| average(state, i, nbrs)).collect::<Result<Vec<_>>>()?;
    OpinionState::at_step(rows, state.step + 1)
}

fn average<S: Scalar>(state: &OpinionState<S>, i: usize, nbrs: &[usize]) -> Result<Opinion<S>> {
    let me = &state.rows[i];
    match nbrs {
        [] => Err(Error::Model(format!("agent {i} trusts nobody (the confidence set does not contain 0)"))),
        [only] => Ok(state.rows[*only].clone()),
        _ => {
            let k = nbrs.len();
            let coords = (0..me.dim())
                .map(|c| match S::BACKEND {
                    Backend::Exact => {
                        nbrs.iter().fold(S::zero(), |acc, &j| acc + state.rows[j].get(c).clone()).div_int(k)
                    }
                    // Offset form around the first neighbor: equal floats average
                    // to themselves, and agents sharing a neighbor set agree bitwise.
                    Backend::Float => {
                        let anchor = state.rows[nbrs[0]].get(c).clone();
                        let offset = nbrs
                            .iter()
                            .fold(S::zero(), |acc, &j| acc + (state.rows[j].get(c).clone() - anchor.clone()));
                        anchor + offset.div_int(k)
                    }
                })
                .collect();
            Opinion::new(coords)
        }
    }
}

/// One synchronous update `Ξ(t) → Ξ(t+1)`.
pub fn step<S: Scalar>(state: &OpinionState<S>, set: &ConfidenceSet, roster: &AgentRoster) -> Result<OpinionState<S>> {
    let sets = neighbor_sets(state, set, roster)?;
    apply_neighbor_sets(state, &sets)
}

/// Dense weight matrix over a list of agents (all agents, or the regular
/// agents for the reduced form).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<S> {
    agents: Vec<usize>,
    entries: Vec<S>,
}

impl<S: Scalar> WeightMatrix<S> {
    /// `w_ij = 1/|N_i|` for `j ∈ N_i`, zero otherwise.
    pub fn from_neighbor_sets(sets: &NeighborSets) -> Self {
        let n = sets.len();
        let mut entries = vec![S::zero(); n * n];
        for (i, nbrs) in sets.iter().enumerate() {
            let w = S::one().div_int(nbrs.len().max(1));
            for &j in nbrs {
                entries[i * n + j] = w.clone();
            }
        }
        WeightMatrix { agents: (0..n).collect(), entries }
    }

    pub fn size(&self) -> usize {
        self.agents.len()
    }

    /// Agent ids labelling rows and columns.
    pub fn agents(&self) -> &[usize] {
        &self.agents
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.entries[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        let m = self.size();
        &self.entries[i * m..(i + 1) * m]
    }

    pub fn row_sum(&self, i: usize) -> S {
        self.row(i).iter().fold(S::zero(), |acc, w| acc + w.clone())
    }

    /// Rows sum to one: exactly for rationals, within `1e-12` for floats.
    pub fn is_row_stochastic(&self) -> bool {
        (0..self.size()).all(|i| {
            let s = self.row_sum(i);
            match S::BACKEND {
                Backend::Exact => s == S::one(),
                Backend::Float => (s.to_float() - 1.0).abs() <= 1e-12,
            }
        })
    }

    pub fn diagonal_min(&self) -> S {
        (0..self.size()).map(|i| self.get(i, i).clone()).reduce(|a, b| if b < a { b } else { a }).unwrap_or_else(S::one)
    }

    /// Smallest nonzero entry.
    pub fn min_positive(&self) -> Option<S> {
        self.entries.iter().filter(|w| !w.is_zero()).cloned().reduce(|a, b| if b < a { b } else { a })
    }

    /// `W·Ξ`, row by row.
    pub fn apply(&self, state: &OpinionState<S>) -> Result<OpinionState<S>> {
        if self.size() != state.n() {
            return Err(Error::Dimension("weight matrix and state sizes differ".into()));
        }
        let d = state.dim();
        let rows = (0..self.size())
            .map(|i| {
                let coords = (0..d)
                    .map(|c| {
                        self.row(i)
                            .iter()
                            .zip(state.rows())
                            .filter(|(w, _)| !w.is_zero())
                            .fold(S::zero(), |acc, (w, r)| acc + w.clone() * r.get(c).clone())
                    })
                    .collect();
                Opinion::new(coords)
            })
            .collect::<Result<Vec<_>>>()?;
        OpinionState::at_step(rows, state.step() + 1)
    }
}

/// `W̄(Ξ)` for the current state; stubborn rows are unit rows.
pub fn weight_matrix<S: Scalar>(
    state: &OpinionState<S>,
    set: &ConfidenceSet,
    roster: &AgentRoster,
) -> Result<WeightMatrix<S>> {
    Ok(WeightMatrix::from_neighbor_sets(&neighbor_sets(state, set, roster)?))
}

/// Restriction of `W̄` to the regular agents, with each row's weight on
/// stubborn agents moved onto the diagonal.
pub fn reduced_stubborn_weights<S: Scalar>(full: &WeightMatrix<S>, roster: &AgentRoster) -> Result<WeightMatrix<S>> {
    if roster.stubborn_count() == 0 {
        return Err(Error::Domain("reduced weights need at least one stubborn agent".into()));
    }
    if full.size() != roster.n() {
        return Err(Error::Dimension("weight matrix and roster sizes differ".into()));
    }
    let regular = roster.regular();
    let m = regular.len();
    let mut entries = vec![S::zero(); m * m];
    for (a, &i) in regular.iter().enumerate() {
        for (b, &j) in regular.iter().enumerate() {
            entries[a * m + b] = full.get(i, j).clone();
        }
        let absorbed = roster.stubborn().fold(S::zero(), |acc, l| acc + full.get(i, l).clone());
        entries[a * m + a] = entries[a * m + a].clone() + absorbed;
    }
    Ok(WeightMatrix { agents: regular.iter().map(|&i| full.agents[i]).collect(), entries })
}

/// Run controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub max_steps: usize,
    /// Detect exact revisits (exact backend only).
    pub cycle_check: bool,
    /// Float backend: stop once successive states differ by less than this
    /// (max norm) for `convergence_patience` consecutive steps.
    pub convergence_tol: Option<f64>,
    pub convergence_patience: usize,
    /// Exact backend: steps of constant neighbor structure with a constant
    /// contraction ratio before reporting non-terminating convergence.
    pub nonterminating_window: Option<usize>,
}

pub const DEFAULT_MAX_STEPS: usize = 10_000;

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: DEFAULT_MAX_STEPS,
            cycle_check: true,
            convergence_tol: None,
            convergence_patience: 10,
            nonterminating_window: Some(16),
        }
    }
}

impl Limits {
    pub fn with_max_steps(max_steps: usize) -> Self {
        Limits { max_steps, ..Limits::default() }
    }
}

/// Linear-contraction evidence collected on an exact run. Not a proof.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionEvidence<S> {
    /// First step of the constant-structure window.
    pub from_step: usize,
    pub window: usize,
    /// Largest per-agent ratio of successive neighborhood diameters.
    pub factor: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndeterminedReason {
    StepCap,
    NumericallyConverged,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<S> {
    /// `Ξ(at_step + 1) = Ξ(at_step)`.
    Terminated {
        at_step: usize,
        final_state: OpinionState<S>,
    },
    /// `Ξ(offset + period) = Ξ(offset)` with minimal `period ≥ 2`;
    /// `cycle_states` holds `period + 1` states, first and last equal.
    Periodic {
        offset: usize,
        period: usize,
        cycle_states: Vec<OpinionState<S>>,
    },
    ConvergentNonTerminating(ContractionEvidence<S>),
    Undetermined {
        steps: usize,
        reason: UndeterminedReason,
    },
}

impl<S: Scalar> Outcome<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Terminated { .. } => "terminated",
            Outcome::Periodic { .. } => "periodic",
            Outcome::ConvergentNonTerminating(_) => "convergent_non_terminating",
            Outcome::Undetermined { .. } => "undetermined",
        }
    }

    pub fn is_terminated(&self) -> bool {
        matches!(self, Outcome::Terminated { .. })
    }

    /// `(offset, period)` for periodic outcomes.
    pub fn cycle(&self) -> Option<(usize, usize)> {
        match self {
            Outcome::Periodic { offset, period, .. } => Some((*offset, *period)),
            _ => None,
        }
    }
}

/// Maximal runs of steps sharing one neighbor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborEpoch {
    pub start: usize,
    pub sets: Arc<NeighborSets>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    states: Vec<OpinionState<S>>,
    epochs: Vec<NeighborEpoch>,
    /// Number of states with recorded neighbor sets.
    recorded: usize,
    outcome: Outcome<S>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn states(&self) -> &[OpinionState<S>] {
        &self.states
    }

    pub fn initial(&self) -> &OpinionState<S> {
        &self.states[0]
    }

    pub fn last(&self) -> &OpinionState<S> {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn outcome(&self) -> &Outcome<S> {
        &self.outcome
    }

    /// Number of update steps represented by the recorded states.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// `N(Ξ(t))`, if it was computed during the run.
    pub fn neighbors_at(&self, t: usize) -> Option<&NeighborSets> {
        if t >= self.recorded {
            return None;
        }
        let idx = self.epochs.partition_point(|e| e.start <= t) - 1;
        Some(&self.epochs[idx].sets)
    }

    pub fn epochs(&self) -> &[NeighborEpoch] {
        &self.epochs
    }

    pub fn weight_matrix_at(&self, t: usize) -> Option<WeightMatrix<S>> {
        self.neighbors_at(t).map(WeightMatrix::from_neighbor_sets)
    }

    /// Distinct weight matrices of the run, one per epoch, with the
    /// half-open range of steps each applies to.
    pub fn weight_epochs(&self) -> impl Iterator<Item = (std::ops::Range<usize>, WeightMatrix<S>)> + '_ {
        self.epochs.iter().enumerate().map(move |(k, e)| {
            let end = self.epochs.get(k + 1).map_or(self.recorded, |next| next.start);
            (e.start..end, WeightMatrix::from_neighbor_sets(&e.sets))
        })
    }
}

/// Per-agent max-coordinate diameter of `{ξ^j : j ∈ N_i}`.
fn neighborhood_diameters<S: Scalar>(state: &OpinionState<S>, sets: &NeighborSets) -> Vec<S> {
    sets.iter()
        .map(|nbrs| {
            (0..state.dim())
                .map(|c| {
                    let mut values = nbrs.iter().map(|&j| state.row(j).get(c));
                    let first = values.next().expect("nonempty").clone();
                    let (lo, hi) = values.fold((first.clone(), first), |(lo, hi), v| {
                        (if *v < lo { v.clone() } else { lo }, if *v > hi { v.clone() } else { hi })
                    });
                    hi - lo
                })
                .fold(S::zero(), S::max_of)
        })
        .collect()
}

struct ContractionTracker<S> {
    previous: Option<(Arc<NeighborSets>, Vec<S>)>,
    ratios: Option<Vec<Option<S>>>,
    streak: usize,
    streak_start: usize,
}

impl<S: Scalar> ContractionTracker<S> {
    fn new() -> Self {
        ContractionTracker { previous: None, ratios: None, streak: 0, streak_start: 0 }
    }

    /// Feeds `Ξ(t)` with `N(Ξ(t))`; returns evidence once the streak reaches `window`.
    fn observe(
        &mut self,
        t: usize,
        state: &OpinionState<S>,
        sets: &Arc<NeighborSets>,
        window: usize,
    ) -> Option<ContractionEvidence<S>> {
        let diam = neighborhood_diameters(state, sets);
        let mut next_ratios = None;
        if let Some((prev_sets, prev_diam)) = &self.previous {
            if **prev_sets == **sets {
                let mut ratios = Vec::with_capacity(diam.len());
                let mut ok = true;
                for (now, before) in diam.iter().zip(prev_diam) {
                    if before.is_zero() {
                        ok &= now.is_zero();
                        ratios.push(None);
                    } else {
                        let r = now.clone() / before.clone();
                        ok &= r < S::one();
                        ratios.push(Some(r));
                    }
                }
                ok &= ratios.iter().any(Option::is_some);
                if ok {
                    next_ratios = Some(ratios);
                }
            }
        }
        match (&next_ratios, &self.ratios) {
            (Some(now), Some(before)) if now == before => self.streak += 1,
            (Some(_), _) => {
                self.streak = 1;
                self.streak_start = t.saturating_sub(1);
            }
            (None, _) => self.streak = 0,
        }
        self.ratios = next_ratios;
        self.previous = Some((Arc::clone(sets), diam));
        if self.streak >= window {
            let factor = self
                .ratios
                .as_ref()
                .expect("streak implies ratios")
                .iter()
                .flatten()
                .cloned()
                .reduce(S::max_of)
                .expect("at least one contracting agent");
            return Some(ContractionEvidence { from_step: self.streak_start, window, factor });
        }
        None
    }
}

/// Iterates the dynamics from `initial` until a fixed point, an exact
/// revisit, contraction evidence, numerical convergence, or the step cap.
pub fn simulate<S: Scalar>(
    initial: &OpinionState<S>,
    set: &ConfidenceSet,
    roster: &AgentRoster,
    limits: &Limits,
) -> Result<Trajectory<S>> {
    if limits.max_steps == 0 {
        return Err(Error::Domain("max_steps must be at least 1".into()));
    }
    check_inputs(initial, set, roster)?;
    let exact = S::BACKEND == Backend::Exact;
    let initial = initial.clone().with_step(0);
    let mut states = vec![initial];
    let mut epochs: Vec<NeighborEpoch> = Vec::new();
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    if exact && limits.cycle_check {
        seen.insert(states[0].canonical_hash(), vec![0]);
    }
    let mut tracker = ContractionTracker::new();
    let mut calm_steps = 0usize;
    let mut outcome = None;

    for t in 0..limits.max_steps {
        let current = &states[t];
        let mut scratch = Vec::with_capacity(current.dim());
        let sets: NeighborSets =
            (0..current.n()).map(|i| neighbors_unchecked(current, set, roster, i, &mut scratch)).collect();
        let sets = match epochs.last() {
            Some(e) if *e.sets == sets => Arc::clone(&e.sets),
            _ => {
                let sets = Arc::new(sets);
                epochs.push(NeighborEpoch { start: t, sets: Arc::clone(&sets) });
                sets
            }
        };

        if exact {
            if let Some(window) = limits.nonterminating_window {
                if let Some(evidence) = tracker.observe(t, current, &sets, window) {
                    outcome = Some(Outcome::ConvergentNonTerminating(evidence));
                    break;
                }
            }
        }

        let next = apply_neighbor_sets(current, &sets)?;
        if next == *current {
            outcome = Some(Outcome::Terminated { at_step: t, final_state: current.clone() });
            break;
        }

        if let Some(tol) = limits.convergence_tol.filter(|_| !exact) {
            if next.max_abs_diff(current) < tol {
                calm_steps += 1;
            } else {
                calm_steps = 0;
            }
        }
        states.push(next);
        let t1 = t + 1;

        if exact && limits.cycle_check {
            let key = states[t1].canonical_hash();
            let bucket = seen.entry(key).or_default();
            if let Some(&offset) = bucket.iter().find(|&&s| states[s] == states[t1]) {
                let period = t1 - offset;
                let cycle_states = states[offset..=t1].to_vec();
                outcome = Some(Outcome::Periodic { offset, period, cycle_states });
                // N(Ξ(t1)) = N(Ξ(offset)); recorded below through `recorded`.
                break;
            }
            bucket.push(t1);
        }

        if calm_steps >= limits.convergence_patience.max(1) {
            outcome = Some(Outcome::Undetermined { steps: t1, reason: UndeterminedReason::NumericallyConverged });
            break;
        }
    }

    let outcome =
        outcome.unwrap_or(Outcome::Undetermined { steps: limits.max_steps, reason: UndeterminedReason::StepCap });
    let recorded = epochs.last().map_or(0, |_| match &outcome {
        Outcome::Terminated { at_step, .. } => at_step + 1,
        Outcome::ConvergentNonTerminating(_) => states.len(),
        _ => states.len() - 1,
    });
    Ok(Trajectory { states, epochs, recorded, outcome })
}
