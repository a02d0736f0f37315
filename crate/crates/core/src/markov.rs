//! Markov chains behind the path-space field construction.
//!
//! A chain on a countable state space decomposes into communication
//! classes `C_i`, each carrying an anchor state `l_i` and the unique
//! invariant measure `π^{(i)}` normalized by `π^{(i)}_{l_i} = 1`. Each
//! class contributes a two-sided path space `C_i^ℤ` with the σ-finite
//! measure `μ_i = Σ_l π^{(i)}_l P^{(i)}_l`, where forward transitions
//! follow the chain and backward transitions follow the reversed kernel
//! `π_k p_{kj} / π_j`. The shift on these path spaces is the action the
//! field construction consumes; whether a class is positive or null
//! recurrent decides everything downstream.
//!
//! Infinite chains are restricted to birth–death tails and the simple
//! random walk, whose recurrence classification is decidable in closed
//! form. Arbitrary countable transition matrices are rejected.

use std::collections::BTreeMap;

use petgraph::graph::DiGraph;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARITY_TOL: f64 = 1e-10;

/// Transition structure of a countable-state chain.
///
/// `Union` glues disjoint chains side by side; its classes are the
/// concatenation of the members' classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TransitionSpec {
    FiniteMatrix {
        states: Vec<String>,
        rows: Vec<Vec<f64>>,
    },
    /// Birth–death chain on `ℤ≥0`: up from `k` with probability `p_k`,
    /// down with `1 − p_k` (staying put at 0). Birth probabilities are
    /// `head_birth` for the first states and `tail_birth` beyond.
    BirthDeath {
        head_birth: Vec<f64>,
        tail_birth: f64,
    },
    /// Nearest-neighbour walk on `ℤ`, up with probability `p`.
    SimpleRandomWalk { p: f64 },
    Union(Vec<TransitionSpec>),
}

impl TransitionSpec {
    pub fn finite(states: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = states.len();
        if n == 0 || rows.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} states against {} rows",
                n,
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!("row {i} has length {}", row.len())));
            }
            let mut sum = 0.0;
            for p in row {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidParameter(format!(
                        "transition probability {p} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParameter(format!("row {i} sums to {sum}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate state label {s:?}")));
            }
        }
        Ok(TransitionSpec::FiniteMatrix { states, rows })
    }

    pub fn birth_death(head_birth: Vec<f64>, tail_birth: f64) -> Result<Self> {
        if head_birth.is_empty() {
            return Err(Error::InvalidParameter("birth–death chain needs p_0".into()));
        }
        if !(head_birth[0] > 0.0 && head_birth[0] <= 1.0) {
            return Err(Error::InvalidParameter(format!("p_0 must lie in (0, 1], got {}", head_birth[0])));
        }
        for (k, p) in head_birth.iter().enumerate().skip(1) {
            if !(p > &0.0 && p < &1.0) {
                return Err(Error::InvalidParameter(format!("p_{k} must lie in (0, 1), got {p}")));
            }
        }
        if !(tail_birth > 0.0 && tail_birth < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail birth probability must lie in (0, 1), got {tail_birth}"
            )));
        }
        Ok(TransitionSpec::BirthDeath { head_birth, tail_birth })
    }

    pub fn random_walk(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("walk probability must lie in (0, 1), got {p}")));
        }
        Ok(TransitionSpec::SimpleRandomWalk { p })
    }

    pub fn union(members: Vec<TransitionSpec>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptySelection);
        }
        if members.iter().any(|m| matches!(m, TransitionSpec::Union(_))) {
            return Err(Error::InvalidParameter("nested unions are not allowed".into()));
        }
        Ok(TransitionSpec::Union(members))
    }

    pub fn members(&self) -> std::slice::Iter<'_, TransitionSpec> {
        match self {
            TransitionSpec::Union(ms) => ms.iter(),
            _ => std::slice::from_ref(self).iter(),
        }
    }

    fn member(&self, idx: usize) -> &TransitionSpec {
        match self {
            TransitionSpec::Union(ms) => &ms[idx],
            other => {
                debug_assert_eq!(idx, 0);
                other
            }
        }
    }

    /// Birth probability at state `k ≥ 0` of a birth–death member.
    fn bd_birth(head: &[f64], tail: f64, k: i64) -> f64 {
        head.get(k as usize).copied().unwrap_or(tail)
    }
}

/// The states and anchor of one communication class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunicationClass {
    /// 1-based index; drives the kernel weight `2^{−i/α}`.
    pub id: usize,
    /// Which union member the class lives in.
    pub member: usize,
    pub states: ClassStates,
    pub anchor: i64,
    pub aperiodic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClassStates {
    /// State indices of a finite-matrix member.
    Finite(Vec<i64>),
    NonNegativeIntegers,
    Integers,
}

impl CommunicationClass {
    pub fn contains(&self, state: i64) -> bool {
        match &self.states {
            ClassStates::Finite(v) => v.contains(&state),
            ClassStates::NonNegativeIntegers => state >= 0,
            ClassStates::Integers => true,
        }
    }

    pub fn finite_size(&self) -> Option<usize> {
        match &self.states {
            ClassStates::Finite(v) => Some(v.len()),
            _ => None,
        }
    }

    /// Re-anchors the class at another of its states.
    pub fn with_anchor(mut self, anchor: i64) -> Result<Self> {
        if !self.contains(anchor) {
            return Err(Error::InvalidParameter(format!("anchor {anchor} is not in the class")));
        }
        self.anchor = anchor;
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecurrenceType {
    PositiveRecurrent,
    NullRecurrent,
    Transient,
}

/// A total mass that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MassValue {
    Finite(f64),
    Infinite,
}

impl MassValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, MassValue::Finite(_))
    }
}

/// Invariant measure of one class, anchored so the anchor has weight 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantMeasure {
    weights: MeasureWeights,
    pub total_mass: MassValue,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum MeasureWeights {
    Table { states: Vec<i64>, weights: Vec<f64> },
    BirthDeathProduct { head_birth: Vec<f64>, tail_birth: f64, anchor_norm: f64 },
    ConstantOne,
}

impl InvariantMeasure {
    pub fn weight(&self, state: i64) -> f64 {
        match &self.weights {
            MeasureWeights::Table { states, weights } => states
                .iter()
                .position(|s| *s == state)
                .map(|i| weights[i])
                .unwrap_or(0.0),
            MeasureWeights::BirthDeathProduct { head_birth, tail_birth, anchor_norm } => {
                if state < 0 {
                    0.0
                } else {
                    bd_product_weight(head_birth, *tail_birth, state) / anchor_norm
                }
            }
            MeasureWeights::ConstantOne => 1.0,
        }
    }
}

/// `π_k = Π_{j=0}^{k−1} p_j / q_{j+1}` for a birth–death chain.
fn bd_product_weight(head: &[f64], tail: f64, k: i64) -> f64 {
    let mut w = 1.0;
    for j in 0..k {
        let p_j = TransitionSpec::bd_birth(head, tail, j);
        let q_next = 1.0 - TransitionSpec::bd_birth(head, tail, j + 1);
        w *= p_j / q_next;
    }
    w
}

/// Decomposes the chain into closed communication classes.
///
/// Finite-matrix members are split into strongly connected components of
/// the positive-transition digraph; a component with an edge leaving it
/// would be transient, which the construction refuses. Birth–death and
/// random-walk members are single classes by construction. Anchors
/// default to the lexicographically smallest state label (the smallest
/// integer for the infinite variants). Classes are numbered 1, 2, … in a
/// deterministic order.
pub fn communication_classes(spec: &TransitionSpec) -> Result<Vec<CommunicationClass>> {
    let mut classes = Vec::new();
    for (member_idx, member) in spec.members().enumerate() {
        match member {
            TransitionSpec::FiniteMatrix { states, rows } => {
                let mut graph = DiGraph::<(), ()>::new();
                let nodes: Vec<_> = (0..states.len()).map(|_| graph.add_node(())).collect();
                for (i, row) in rows.iter().enumerate() {
                    for (j, p) in row.iter().enumerate() {
                        if *p > 0.0 {
                            graph.add_edge(nodes[i], nodes[j], ());
                        }
                    }
                }
                let sccs = petgraph::algo::tarjan_scc(&graph);
                let mut comp_of = vec![0usize; states.len()];
                for (c, comp) in sccs.iter().enumerate() {
                    for node in comp {
                        comp_of[node.index()] = c;
                    }
                }
                // closedness: no transition may leave its component
                for (i, row) in rows.iter().enumerate() {
                    for (j, p) in row.iter().enumerate() {
                        if *p > 0.0 && comp_of[i] != comp_of[j] {
                            return Err(Error::ModelPrecondition(format!(
                                "state {:?} leaks into another class; non-closed (transient) classes are not allowed",
                                states[i]
                            )));
                        }
                    }
                }
                // deterministic order: by smallest contained label
                let mut comps: Vec<Vec<usize>> =
                    sccs.iter().map(|c| c.iter().map(|n| n.index()).collect()).collect();
                for c in &mut comps {
                    c.sort_unstable();
                }
                comps.sort_by(|a, b| {
                    let la = a.iter().map(|i| states[*i].as_str()).min().unwrap();
                    let lb = b.iter().map(|i| states[*i].as_str()).min().unwrap();
                    la.cmp(lb)
                });
                for comp in comps {
                    let anchor = *comp
                        .iter()
                        .min_by(|a, b| states[**a].cmp(&states[**b]))
                        .unwrap() as i64;
                    let aperiodic = finite_class_aperiodic(rows, &comp);
                    classes.push(CommunicationClass {
                        id: 0,
                        member: member_idx,
                        states: ClassStates::Finite(comp.iter().map(|i| *i as i64).collect()),
                        anchor,
                        aperiodic,
                    });
                }
            }
            TransitionSpec::BirthDeath { head_birth, .. } => {
                classes.push(CommunicationClass {
                    id: 0,
                    member: member_idx,
                    states: ClassStates::NonNegativeIntegers,
                    anchor: 0,
                    aperiodic: head_birth[0] < 1.0,
                });
            }
            TransitionSpec::SimpleRandomWalk { .. } => {
                classes.push(CommunicationClass {
                    id: 0,
                    member: member_idx,
                    states: ClassStates::Integers,
                    anchor: 0,
                    aperiodic: false,
                });
            }
            TransitionSpec::Union(_) => unreachable!("nested unions rejected at construction"),
        }
    }
    for (i, class) in classes.iter_mut().enumerate() {
        class.id = i + 1;
    }
    Ok(classes)
}

fn finite_class_aperiodic(rows: &[Vec<f64>], comp: &[usize]) -> bool {
    // gcd of cycle lengths via BFS levels within the component
    let root = comp[0];
    let mut level: BTreeMap<usize, u64> = BTreeMap::new();
    level.insert(root, 0);
    let mut queue = std::collections::VecDeque::from([root]);
    let in_comp: std::collections::HashSet<usize> = comp.iter().copied().collect();
    let mut g: u64 = 0;
    while let Some(u) = queue.pop_front() {
        for (v, p) in rows[u].iter().enumerate() {
            if *p <= 0.0 || !in_comp.contains(&v) {
                continue;
            }
            if let Some(lv) = level.get(&v) {
                let diff = level[&u] + 1;
                g = gcd(g, diff.abs_diff(*lv));
            } else {
                level.insert(v, level[&u] + 1);
                queue.push_back(v);
            }
        }
    }
    g == 1
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Recurrence verdict for one class.
///
/// Finite irreducible classes are positive recurrent. The infinite
/// variants are decided by the birth–death series criterion, which for
/// eventually constant birth probability `p̄` reduces to the tail ratio
/// `q̄/p̄`: recurrent iff `q̄/p̄ ≥ 1`, positive recurrent iff `q̄/p̄ > 1`.
pub fn classify_recurrence(class: &CommunicationClass, spec: &TransitionSpec) -> RecurrenceType {
    match spec.member(class.member) {
        TransitionSpec::FiniteMatrix { .. } => RecurrenceType::PositiveRecurrent,
        TransitionSpec::SimpleRandomWalk { p } => {
            if *p == 0.5 {
                RecurrenceType::NullRecurrent
            } else {
                RecurrenceType::Transient
            }
        }
        TransitionSpec::BirthDeath { tail_birth, .. } => {
            let ratio = (1.0 - tail_birth) / tail_birth;
            if ratio > 1.0 {
                RecurrenceType::PositiveRecurrent
            } else if ratio == 1.0 {
                RecurrenceType::NullRecurrent
            } else {
                RecurrenceType::Transient
            }
        }
        TransitionSpec::Union(_) => unreachable!(),
    }
}

/// The invariant measure of a recurrent class, anchored to weight 1 at
/// the class anchor.
pub fn invariant_measure(class: &CommunicationClass, spec: &TransitionSpec) -> Result<InvariantMeasure> {
    if classify_recurrence(class, spec) == RecurrenceType::Transient {
        return Err(Error::ModelPrecondition(
            "invariant measure requested for a transient class".into(),
        ));
    }
    match spec.member(class.member) {
        TransitionSpec::FiniteMatrix { rows, .. } => {
            let states = match &class.states {
                ClassStates::Finite(v) => v.clone(),
                _ => unreachable!(),
            };
            let n = states.len();
            let idx_of = |s: i64| states.iter().position(|x| *x == s).unwrap();
            // (Pᵀ − I)π = 0 with the anchor equation replaced by π_anchor = 1
            let mut a = vec![vec![0.0f64; n]; n];
            let mut b = vec![0.0f64; n];
            for (jj, &sj) in states.iter().enumerate() {
                for (ii, &si) in states.iter().enumerate() {
                    a[jj][ii] = rows[si as usize][sj as usize] - if ii == jj { 1.0 } else { 0.0 };
                }
            }
            let anchor_idx = idx_of(class.anchor);
            a[anchor_idx] = vec![0.0; n];
            a[anchor_idx][anchor_idx] = 1.0;
            b[anchor_idx] = 1.0;
            let mut pi = solve_dense(a, b)?;
            // exact anchor normalization
            let norm = pi[anchor_idx];
            for w in &mut pi {
                *w /= norm;
            }
            for (i, w) in pi.iter().enumerate() {
                if !w.is_finite() || *w <= 0.0 {
                    return Err(Error::Internal(format!(
                        "nonpositive invariant weight {w} at state {}",
                        states[i]
                    )));
                }
            }
            // πP = π residual guard
            for (jj, &sj) in states.iter().enumerate() {
                let lhs: f64 = states
                    .iter()
                    .enumerate()
                    .map(|(ii, &si)| pi[ii] * rows[si as usize][sj as usize])
                    .sum();
                if (lhs - pi[jj]).abs() > STATIONARITY_TOL {
                    return Err(Error::Internal(format!(
                        "stationarity residual {} at state {}",
                        (lhs - pi[jj]).abs(),
                        sj
                    )));
                }
            }
            let total: f64 = pi.iter().sum();
            Ok(InvariantMeasure {
                weights: MeasureWeights::Table { states, weights: pi },
                total_mass: MassValue::Finite(total),
            })
        }
        TransitionSpec::SimpleRandomWalk { .. } => Ok(InvariantMeasure {
            // counting measure; shift-invariant for the symmetric walk
            weights: MeasureWeights::ConstantOne,
            total_mass: MassValue::Infinite,
        }),
        TransitionSpec::BirthDeath { head_birth, tail_birth } => {
            let anchor_norm = bd_product_weight(head_birth, *tail_birth, class.anchor);
            let total = if (1.0 - tail_birth) / tail_birth > 1.0 {
                // the weights are geometric with ratio r beyond the head
                let m = head_birth.len() as i64;
                let mut head_sum = 0.0;
                for k in 0..m {
                    head_sum += bd_product_weight(head_birth, *tail_birth, k);
                }
                let w_m = bd_product_weight(head_birth, *tail_birth, m);
                let r = tail_birth / (1.0 - tail_birth);
                MassValue::Finite((head_sum + w_m / (1.0 - r)) / anchor_norm)
            } else {
                MassValue::Infinite
            };
            Ok(InvariantMeasure {
                weights: MeasureWeights::BirthDeathProduct {
                    head_birth: head_birth.clone(),
                    tail_birth: *tail_birth,
                    anchor_norm,
                },
                total_mass: total,
            })
        }
        TransitionSpec::Union(_) => unreachable!("member of a union is never a union"),
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|i, j| a[*i][col].abs().partial_cmp(&a[*j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::Internal("singular linear system for invariant measure".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (pivot_rows, rest) = a.split_at_mut(col + 1);
        let pivot_row = &pivot_rows[col];
        let pivot_b = b[col];
        for (offset, row) in rest.iter_mut().enumerate() {
            let factor = row[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (rv, pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *rv -= factor * pv;
            }
            b[col + 1 + offset] -= factor * pivot_b;
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// States of the class within graph distance `graph_radius` of the
/// anchor; the simulable stand-in for an infinite class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathTruncation {
    pub graph_radius: u64,
}

impl Default for PathTruncation {
    fn default() -> Self {
        PathTruncation { graph_radius: 50 }
    }
}

/// The truncated state set `F` and its retained mass `m_F = Σ_{l∈F} π_l`.
pub fn truncated_state_set(
    class: &CommunicationClass,
    spec: &TransitionSpec,
    trunc: PathTruncation,
) -> Result<(Vec<i64>, f64)> {
    let pi = invariant_measure(class, spec)?;
    let states: Vec<i64> = match &class.states {
        ClassStates::Finite(v) => v.clone(),
        ClassStates::NonNegativeIntegers => {
            let r = trunc.graph_radius as i64;
            (0.max(class.anchor - r)..=(class.anchor + r)).collect()
        }
        ClassStates::Integers => {
            let r = trunc.graph_radius as i64;
            ((class.anchor - r)..=(class.anchor + r)).collect()
        }
    };
    let mass = states.iter().map(|s| pi.weight(*s)).sum();
    Ok((states, mass))
}

/// A two-sided state path recorded on `[−L, L]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedPath {
    pub lo: i64,
    pub states: Vec<i64>,
}

impl TwoSidedPath {
    pub fn value_at(&self, u: i64) -> Result<i64> {
        let idx = u - self.lo;
        if idx < 0 || idx >= self.states.len() as i64 {
            return Err(Error::DomainExceeded(format!(
                "path recorded on [{}, {}], asked at {u}",
                self.lo,
                self.lo + self.states.len() as i64 - 1
            )));
        }
        Ok(self.states[idx as usize])
    }
}

/// Samples one two-sided path under the truncated measure
/// `μ_F = Σ_{l∈F} π_l P_l`, normalized to a probability.
///
/// `x(0)` is drawn proportionally to `π` on `F`, the future follows the
/// transition kernel, and the past follows the reversed kernel
/// `π_k p_{kj} / π_j`. Returns the path on `[−l, l]` together with the
/// retained mass `m_F`.
pub fn sample_two_sided_path<R: Rng + ?Sized>(
    class: &CommunicationClass,
    spec: &TransitionSpec,
    l: i64,
    f_states: &[i64],
    rng: &mut R,
) -> Result<(TwoSidedPath, f64)> {
    if f_states.is_empty() {
        return Err(Error::EmptySelection);
    }
    if l < 0 {
        return Err(Error::InvalidParameter("window radius must be ≥ 0".into()));
    }
    let pi = invariant_measure(class, spec)?;
    let weights: Vec<f64> = f_states.iter().map(|s| pi.weight(*s)).collect();
    let m_f: f64 = weights.iter().sum();
    if !m_f.is_finite() || m_f <= 0.0 {
        return Err(Error::InvalidParameter("truncated set has no finite positive mass".into()));
    }

    // x(0) ~ π restricted to F
    let mut u = rng.random::<f64>() * m_f;
    let mut x0 = f_states[f_states.len() - 1];
    for (s, w) in f_states.iter().zip(&weights) {
        if u < *w {
            x0 = *s;
            break;
        }
        u -= w;
    }

    let member = spec.member(class.member);
    let mut states = vec![0i64; (2 * l + 1) as usize];
    states[l as usize] = x0;
    let mut cur = x0;
    for k in 1..=l {
        cur = forward_step(member, class, cur, rng)?;
        states[(l + k) as usize] = cur;
    }
    cur = x0;
    for k in 1..=l {
        cur = backward_step(member, class, &pi, cur, rng)?;
        states[(l - k) as usize] = cur;
    }
    Ok((TwoSidedPath { lo: -l, states }, m_f))
}

fn forward_step<R: Rng + ?Sized>(
    member: &TransitionSpec,
    class: &CommunicationClass,
    state: i64,
    rng: &mut R,
) -> Result<i64> {
    match member {
        TransitionSpec::FiniteMatrix { rows, .. } => {
            let row = &rows[state as usize];
            let mut u = rng.random::<f64>();
            for (j, p) in row.iter().enumerate() {
                if u < *p {
                    return Ok(j as i64);
                }
                u -= p;
            }
            Ok(row.len() as i64 - 1)
        }
        TransitionSpec::BirthDeath { head_birth, tail_birth } => {
            let p = TransitionSpec::bd_birth(head_birth, *tail_birth, state);
            if rng.random::<f64>() < p {
                Ok(state + 1)
            } else if state == 0 {
                Ok(0)
            } else {
                Ok(state - 1)
            }
        }
        TransitionSpec::SimpleRandomWalk { p } => {
            if rng.random::<f64>() < *p {
                Ok(state + 1)
            } else {
                Ok(state - 1)
            }
        }
        TransitionSpec::Union(_) => unreachable!("member of a union is never a union"),
    }
    .inspect(|&s| {
        debug_assert!(class.contains(s));
    })
}

/// One step of the reversed kernel `b(j → k) = π_k p_{kj} / π_j`.
///
/// Birth–death chains and the symmetric walk satisfy detailed balance,
/// so their reversed kernel coincides with the forward one.
fn backward_step<R: Rng + ?Sized>(
    member: &TransitionSpec,
    class: &CommunicationClass,
    pi: &InvariantMeasure,
    state: i64,
    rng: &mut R,
) -> Result<i64> {
    match member {
        TransitionSpec::FiniteMatrix { rows, .. } => {
            let states = match &class.states {
                ClassStates::Finite(v) => v,
                _ => unreachable!(),
            };
            let j = state;
            let mut probs = Vec::with_capacity(states.len());
            let mut sum = 0.0;
            for &k in states {
                let p = pi.weight(k) * rows[k as usize][j as usize] / pi.weight(j);
                probs.push((k, p));
                sum += p;
            }
            if (sum - 1.0).abs() > STATIONARITY_TOL {
                return Err(Error::Internal(format!(
                    "reversed kernel row at state {j} sums to {sum}"
                )));
            }
            let mut u = rng.random::<f64>() * sum;
            for (k, p) in &probs {
                if u < *p {
                    return Ok(*k);
                }
                u -= p;
            }
            Ok(probs.last().unwrap().0)
        }
        TransitionSpec::BirthDeath { .. } | TransitionSpec::SimpleRandomWalk { .. } => {
            forward_step(member, class, state, rng)
        }
        TransitionSpec::Union(_) => unreachable!(),
    }
}

/// The reversed transition kernel of a finite class as a dense matrix
/// over the class states (in class state order).
pub fn backward_kernel(class: &CommunicationClass, spec: &TransitionSpec) -> Result<Vec<Vec<f64>>> {
    let member = spec.member(class.member);
    let rows = match member {
        TransitionSpec::FiniteMatrix { rows, .. } => rows,
        _ => {
            return Err(Error::UnsupportedFamily(
                "explicit reversed kernel is only materialized for finite classes".into(),
            ))
        }
    };
    let states = match &class.states {
        ClassStates::Finite(v) => v.clone(),
        _ => unreachable!(),
    };
    let pi = invariant_measure(class, spec)?;
    let mut out = vec![vec![0.0; states.len()]; states.len()];
    for (jj, &j) in states.iter().enumerate() {
        for (kk, &k) in states.iter().enumerate() {
            out[jj][kk] = pi.weight(k) * rows[k as usize][j as usize] / pi.weight(j);
        }
        let sum: f64 = out[jj].iter().sum();
        if (sum - 1.0).abs() > STATIONARITY_TOL {
            return Err(Error::Internal(format!("reversed kernel row {j} sums to {sum}")));
        }
    }
    Ok(out)
}

/// The path-space kernel: weight `2^{−i/α}` on paths of class `i` that
/// sit at the class anchor at time 0, zero elsewhere. Its `Lᵅ` mass over
/// class `i` is exactly `2^{−i}` thanks to the anchor normalization.
#[derive(Clone, Debug)]
pub struct MarkovKernel {
    anchors: Vec<i64>,
    weights: Vec<f64>,
}

pub fn markov_field_kernel(classes: &[CommunicationClass], alpha: f64) -> MarkovKernel {
    let weights = classes
        .iter()
        .map(|c| 2.0f64.powf(-(c.id as f64) / alpha))
        .collect();
    MarkovKernel { anchors: classes.iter().map(|c| c.anchor).collect(), weights }
}

impl MarkovKernel {
    /// Value on a path of class position `class_pos` (0-based) sitting
    /// at `x0` at time zero.
    pub fn value(&self, class_pos: usize, x0: i64) -> f64 {
        if self.anchors[class_pos] == x0 {
            self.weights[class_pos]
        } else {
            0.0
        }
    }

    pub fn anchor_weight(&self, class_pos: usize) -> f64 {
        self.weights[class_pos]
    }
}
