//! Budgeted audit allocation over a probabilistic risk-coverage objective
//! `f(S) = Σ_j w_j (1 − Π_{i∈S}(1 − p_ij))`.
//!
//! Only discrete allocation is provided; there is no continuous relaxation
//! with rounding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::QuadraticGame;
use crate::linalg::SymMatrix;
use crate::manipulability::manip_index;

pub const EXHAUSTIVE_MAX: usize = 20;
pub const IMPROVE_TOL: f64 = 1e-12;
pub const LAMBDA_LADDER: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];

#[derive(Clone, Debug, PartialEq)]
pub struct AuditInstance {
    pub costs: Vec<f64>,
    pub budget: f64,
    pub weights: Vec<f64>,
    /// `probs[i][j]`: chance candidate `i` covers risk `j`.
    pub probs: Vec<Vec<f64>>,
    /// Per-client index thresholds `τ_i` (Lagrangian variant only).
    pub thresholds: Vec<f64>,
    pub lagrange_lambda: f64,
}

impl AuditInstance {
    pub fn new(costs: Vec<f64>, budget: f64, weights: Vec<f64>, probs: Vec<Vec<f64>>) -> Result<Self> {
        let inst = AuditInstance { costs, budget, weights, probs, thresholds: Vec::new(), lagrange_lambda: 0.0 };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_thresholds(mut self, thresholds: Vec<f64>, lagrange_lambda: f64) -> Result<Self> {
        if thresholds.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::invalid("thresholds", "must be positive"));
        }
        if !(lagrange_lambda >= 0.0) {
            return Err(Error::invalid("lagrange_lambda", "must be nonnegative"));
        }
        self.thresholds = thresholds;
        self.lagrange_lambda = lagrange_lambda;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.costs.len();
        if self.probs.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: self.probs.len() });
        }
        if self.costs.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::invalid("costs", "must be positive and finite"));
        }
        if !(self.budget > 0.0) || !self.budget.is_finite() {
            return Err(Error::invalid("budget", "must be positive and finite"));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights", "must be nonnegative and finite"));
        }
        for row in &self.probs {
            if row.len() != self.weights.len() {
                return Err(Error::DimensionMismatch { expected: self.weights.len(), found: row.len() });
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::invalid("coverage_probs", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn num_candidates(&self) -> usize {
        self.costs.len()
    }

    pub fn num_risks(&self) -> usize {
        self.weights.len()
    }

    /// Reads the text format:
    ///
    /// ```text
    /// m p_r B
    /// c_1 … c_m
    /// w_1 … w_{p_r}
    /// p_11 … p_1{p_r}
    /// …
    /// p_m1 … p_m{p_r}
    /// ```
    ///
    /// Fields are whitespace separated; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse { line: 0, message: format!("unexpected end of input, expected {what}") })
        };
        let nums = |line: usize, s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse { line, message: format!("`{t}`: {e}") }))
                .collect()
        };
        let (hl, header) = next("header `m p_r B`")?;
        let h = nums(hl, header)?;
        if h.len() != 3 || h[0] < 0.0 || h[1] < 0.0 || h[0].fract() != 0.0 || h[1].fract() != 0.0 {
            return Err(Error::Parse { line: hl, message: "header must be `m p_r B` with integer m, p_r".into() });
        }
        let (m, pr, budget) = (h[0] as usize, h[1] as usize, h[2]);
        let mut row = |what: &str, len: usize| -> Result<Vec<f64>> {
            let (l, s) = next(what)?;
            let v = nums(l, s)?;
            if v.len() != len {
                return Err(Error::Parse { line: l, message: format!("expected {len} values for {what}, found {}", v.len()) });
            }
            Ok(v)
        };
        let costs = row("costs", m)?;
        let weights = row("weights", pr)?;
        let probs = (0..m).map(|_| row("coverage probabilities", pr)).collect::<Result<Vec<_>>>()?;
        Self::new(costs, budget, weights, probs)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {:?}", self.num_candidates(), self.num_risks(), self.budget);
        let _ = writeln!(s, "{}", join(&self.costs));
        let _ = writeln!(s, "{}", join(&self.weights));
        for row in &self.probs {
            let _ = writeln!(s, "{}", join(row));
        }
        s
    }
}

/// Per-risk survival products `Π_{i∈S}(1 − p_ij)` for an evolving selection.
#[derive(Clone, Debug)]
struct Coverage<'a> {
    inst: &'a AuditInstance,
    survival: Vec<f64>,
    selected: Vec<bool>,
}

impl<'a> Coverage<'a> {
    fn new(inst: &'a AuditInstance) -> Self {
        Coverage { inst, survival: vec![1.0; inst.num_risks()], selected: vec![false; inst.num_candidates()] }
    }

    fn gain(&self, i: usize) -> f64 {
        self.inst.weights.iter().zip(&self.survival).zip(&self.inst.probs[i]).map(|((w, s), p)| w * s * p).sum()
    }

    fn add(&mut self, i: usize) {
        self.selected[i] = true;
        for (s, p) in self.survival.iter_mut().zip(&self.inst.probs[i]) {
            *s *= 1.0 - p;
        }
    }
}

fn check_index(inst: &AuditInstance, i: usize) -> Result<()> {
    if i >= inst.num_candidates() {
        return Err(Error::IndexOutOfRange { index: i, len: inst.num_candidates() });
    }
    Ok(())
}

fn state_for<'a>(inst: &'a AuditInstance, s: &[usize]) -> Result<Coverage<'a>> {
    let mut c = Coverage::new(inst);
    for &i in s {
        check_index(inst, i)?;
        if !c.selected[i] {
            c.add(i);
        }
    }
    Ok(c)
}

pub fn coverage_objective(inst: &AuditInstance, s: &[usize]) -> Result<f64> {
    let c = state_for(inst, s)?;
    Ok(inst.weights.iter().zip(&c.survival).map(|(w, sv)| w * (1.0 - sv)).sum())
}

/// `f(S ∪ {i}) − f(S)` from the cached survival products.
pub fn marginal_gain(inst: &AuditInstance, s: &[usize], i: usize) -> Result<f64> {
    check_index(inst, i)?;
    let c = state_for(inst, s)?;
    if c.selected[i] {
        return Err(Error::AlreadySelected(i));
    }
    Ok(c.gain(i))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AllocationResult {
    /// Selected candidate indices, ascending.
    pub selected: Vec<usize>,
    pub objective: f64,
    pub cost_used: f64,
    /// Marginal-gain or objective evaluations performed.
    pub evaluations: usize,
}

fn finish(inst: &AuditInstance, mut selected: Vec<usize>, evaluations: usize) -> Result<AllocationResult> {
    selected.sort_unstable();
    Ok(AllocationResult {
        objective: coverage_objective(inst, &selected)?,
        cost_used: selected.iter().map(|&i| inst.costs[i]).sum(),
        selected,
        evaluations,
    })
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    ratio: f64,
    index: usize,
    round: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Max-heap on ratio; ties favour the lower index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio.total_cmp(&other.ratio).then(other.index.cmp(&self.index))
    }
}

/// Cost-ratio greedy with stale upper bounds kept in a priority queue.
pub fn lazy_greedy(inst: &AuditInstance) -> Result<AllocationResult> {
    inst.validate()?;
    let mut cov = Coverage::new(inst);
    let mut remaining = inst.budget;
    let mut evaluations = 0;
    let mut heap = BinaryHeap::new();
    for i in 0..inst.num_candidates() {
        if inst.costs[i] <= remaining {
            evaluations += 1;
            heap.push(Entry { ratio: cov.gain(i) / inst.costs[i], index: i, round: 0 });
        }
    }
    let mut picked = Vec::new();
    let mut round = 0;
    while let Some(top) = heap.pop() {
        if inst.costs[top.index] > remaining {
            continue;
        }
        if top.round != round {
            evaluations += 1;
            heap.push(Entry { ratio: cov.gain(top.index) / inst.costs[top.index], index: top.index, round });
            continue;
        }
        if top.ratio <= 0.0 {
            break;
        }
        cov.add(top.index);
        remaining -= inst.costs[top.index];
        picked.push(top.index);
        round += 1;
    }
    finish(inst, picked, evaluations)
}

/// Cost-ratio greedy that re-evaluates every affordable candidate each round.
pub fn naive_greedy(inst: &AuditInstance) -> Result<AllocationResult> {
    inst.validate()?;
    let mut cov = Coverage::new(inst);
    let mut remaining = inst.budget;
    let mut evaluations = 0;
    let mut picked = Vec::new();
    loop {
        let mut best: Option<Entry> = None;
        for i in 0..inst.num_candidates() {
            if cov.selected[i] || inst.costs[i] > remaining {
                continue;
            }
            evaluations += 1;
            let e = Entry { ratio: cov.gain(i) / inst.costs[i], index: i, round: 0 };
            if best.map_or(true, |b| e > b) {
                best = Some(e);
            }
        }
        match best {
            Some(b) if b.ratio > 0.0 => {
                cov.add(b.index);
                remaining -= inst.costs[b.index];
                picked.push(b.index);
            }
            _ => break,
        }
    }
    finish(inst, picked, evaluations)
}

/// Exact optimum by depth-first subset enumeration with cost pruning. Among
/// equal optima the first in include-first order wins.
pub fn exhaustive_opt(inst: &AuditInstance) -> Result<AllocationResult> {
    inst.validate()?;
    let m = inst.num_candidates();
    if m > EXHAUSTIVE_MAX {
        return Err(Error::TooLarge { m, max: EXHAUSTIVE_MAX });
    }
    struct Search<'a> {
        inst: &'a AuditInstance,
        best: f64,
        best_set: Vec<usize>,
        current: Vec<usize>,
        evaluations: usize,
    }
    impl Search<'_> {
        fn value(&self, survival: &[f64]) -> f64 {
            self.inst.weights.iter().zip(survival).map(|(w, s)| w * (1.0 - s)).sum()
        }
        fn dfs(&mut self, i: usize, survival: &[f64], remaining: f64) {
            if i == self.inst.num_candidates() {
                self.evaluations += 1;
                let v = self.value(survival);
                if v > self.best {
                    self.best = v;
                    self.best_set = self.current.clone();
                }
                return;
            }
            if self.inst.costs[i] <= remaining {
                let next: Vec<f64> = survival.iter().zip(&self.inst.probs[i]).map(|(s, p)| s * (1.0 - p)).collect();
                self.current.push(i);
                self.dfs(i + 1, &next, remaining - self.inst.costs[i]);
                self.current.pop();
            }
            self.dfs(i + 1, survival, remaining);
        }
    }
    let mut s = Search { inst, best: 0.0, best_set: Vec::new(), current: Vec::new(), evaluations: 0 };
    s.dfs(0, &vec![1.0; inst.num_risks()], inst.budget);
    let evaluations = s.evaluations;
    finish(inst, s.best_set, evaluations)
}

/// First-improvement hill climbing over add, drop and one-for-one swap moves,
/// at most `max_swaps` accepted moves.
pub fn local_search(inst: &AuditInstance, start: &AllocationResult, max_swaps: usize) -> Result<AllocationResult> {
    inst.validate()?;
    let m = inst.num_candidates();
    let mut current = start.selected.clone();
    for &i in &current {
        check_index(inst, i)?;
    }
    let mut value = coverage_objective(inst, &current)?;
    let mut cost: f64 = current.iter().map(|&i| inst.costs[i]).sum();
    if cost > inst.budget + 1e-12 {
        return Err(Error::invalid("start", "starting allocation exceeds the budget"));
    }
    let mut evaluations = start.evaluations;
    let mut moves = 0;
    'outer: while moves < max_swaps {
        let inside = |s: &[usize], i: usize| s.contains(&i);
        let mut candidates: Vec<Vec<usize>> = Vec::new();
        for i in (0..m).filter(|&i| !inside(&current, i)) {
            if cost + inst.costs[i] <= inst.budget {
                let mut s = current.clone();
                s.push(i);
                candidates.push(s);
            }
        }
        for pos in 0..current.len() {
            let mut s = current.clone();
            s.remove(pos);
            candidates.push(s);
        }
        for pos in 0..current.len() {
            let out = current[pos];
            for i in (0..m).filter(|&i| !inside(&current, i)) {
                if cost - inst.costs[out] + inst.costs[i] <= inst.budget {
                    let mut s = current.clone();
                    s[pos] = i;
                    candidates.push(s);
                }
            }
        }
        for s in candidates {
            evaluations += 1;
            let v = coverage_objective(inst, &s)?;
            if v > value + IMPROVE_TOL {
                current = s;
                current.sort_unstable();
                value = v;
                cost = current.iter().map(|&i| inst.costs[i]).sum();
                moves += 1;
                continue 'outer;
            }
        }
        break;
    }
    finish(inst, current, evaluations)
}

/// `f(S) − λ Σ_i max{0, ℳ_i − τ_i}`
pub fn lagrangian_objective(inst: &AuditInstance, s: &[usize], per_client_index: &[f64]) -> Result<f64> {
    if per_client_index.len() != inst.thresholds.len() {
        return Err(Error::DimensionMismatch { expected: inst.thresholds.len(), found: per_client_index.len() });
    }
    Ok(coverage_objective(inst, s)? - inst.lagrange_lambda * total_violation(&inst.thresholds, per_client_index))
}

fn total_violation(thresholds: &[f64], index: &[f64]) -> f64 {
    index.iter().zip(thresholds).map(|(m, t)| (m - t).max(0.0)).sum()
}

/// Audit action: raise one diagonal entry of one client's curvature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reinforcement {
    pub client: usize,
    pub coordinate: usize,
    pub delta: f64,
}

/// Clients' quadratic environments and the reinforcement each candidate buys.
#[derive(Clone, Debug)]
pub struct ClientReinforcement {
    pub clients: Vec<QuadraticGame<f64>>,
    /// `actions[i]` lists the reinforcements candidate `i` applies.
    pub actions: Vec<Vec<Reinforcement>>,
    pub alpha: f64,
}

impl ClientReinforcement {
    pub fn new(clients: Vec<QuadraticGame<f64>>, actions: Vec<Vec<Reinforcement>>, alpha: f64) -> Result<Self> {
        for a in actions.iter().flatten() {
            let client = clients.get(a.client).ok_or(Error::IndexOutOfRange { index: a.client, len: clients.len() })?;
            if a.coordinate >= client.dim() {
                return Err(Error::IndexOutOfRange { index: a.coordinate, len: client.dim() });
            }
            if !(a.delta >= 0.0) {
                return Err(Error::invalid("delta", "reinforcement must be nonnegative"));
            }
        }
        Ok(ClientReinforcement { clients, actions, alpha })
    }

    /// `ℳ_i` for every client with the selected reinforcements applied.
    pub fn per_client_index(&self, s: &[usize]) -> Result<Vec<f64>> {
        let mut extra: Vec<Vec<f64>> = self.clients.iter().map(|g| vec![0.0; g.dim()]).collect();
        for &i in s {
            let acts = self.actions.get(i).ok_or(Error::IndexOutOfRange { index: i, len: self.actions.len() })?;
            for a in acts {
                extra[a.client][a.coordinate] += a.delta;
            }
        }
        self.clients
            .iter()
            .zip(&extra)
            .map(|(g, d)| {
                let h = g.h().add(&SymMatrix::diagonal(d));
                manip_index(&g.with_curvature(h, g.q())?, self.alpha)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianResult {
    pub lambda: f64,
    pub allocation: AllocationResult,
    pub penalized_objective: f64,
    pub per_client_index: Vec<f64>,
    pub violation: f64,
}

/// Cost-ratio greedy on the penalized objective for one `λ`.
pub fn lagrangian_greedy(inst: &AuditInstance, model: &ClientReinforcement, lambda: f64) -> Result<LagrangianResult> {
    inst.validate()?;
    if model.actions.len() != inst.num_candidates() {
        return Err(Error::DimensionMismatch { expected: inst.num_candidates(), found: model.actions.len() });
    }
    let inst = AuditInstance { lagrange_lambda: lambda, ..inst.clone() };
    let eval = |s: &[usize]| -> Result<f64> { lagrangian_objective(&inst, s, &model.per_client_index(s)?) };
    let mut picked: Vec<usize> = Vec::new();
    let mut remaining = inst.budget;
    let mut value = eval(&picked)?;
    let mut evaluations = 1;
    loop {
        let mut best: Option<(f64, usize, f64)> = None;
        for i in 0..inst.num_candidates() {
            if picked.contains(&i) || inst.costs[i] > remaining {
                continue;
            }
            let mut s = picked.clone();
            s.push(i);
            let v = eval(&s)?;
            evaluations += 1;
            let ratio = (v - value) / inst.costs[i];
            if best.map_or(true, |(r, _, _)| ratio > r) {
                best = Some((ratio, i, v));
            }
        }
        match best {
            Some((ratio, i, v)) if ratio > 0.0 => {
                picked.push(i);
                remaining -= inst.costs[i];
                value = v;
            }
            _ => break,
        }
    }
    let per_client_index = model.per_client_index(&picked)?;
    Ok(LagrangianResult {
        lambda,
        violation: total_violation(&inst.thresholds, &per_client_index),
        penalized_objective: value,
        per_client_index,
        allocation: finish(&inst, picked, evaluations)?,
    })
}

/// Runs the `λ` ladder and keeps the best result meeting every threshold,
/// or the least-violating one when none does.
pub fn lagrangian_ladder(inst: &AuditInstance, model: &ClientReinforcement, ladder: &[f64]) -> Result<LagrangianResult> {
    if ladder.is_empty() {
        return Err(Error::invalid("ladder", "must be nonempty"));
    }
    let results = ladder.iter().map(|&l| lagrangian_greedy(inst, model, l)).collect::<Result<Vec<_>>>()?;
    let best = results
        .into_iter()
        .reduce(|a, b| {
            let key = |r: &LagrangianResult| (r.violation > IMPROVE_TOL, r.violation, -r.allocation.objective);
            let (ka, kb) = (key(&a), key(&b));
            let better = kb.0 < ka.0 || (kb.0 == ka.0 && (if ka.0 { kb.1 < ka.1 } else { kb.2 < ka.2 }));
            if better {
                b
            } else {
                a
            }
        })
        .expect("nonempty ladder");
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn three() -> AuditInstance {
        AuditInstance::new(
            vec![1.0, 1.0, 1.0],
            2.0,
            vec![1.0, 1.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.6]],
        )
        .unwrap()
    }

    #[test]
    fn objective_values() {
        let inst = three();
        assert_eq!(coverage_objective(&inst, &[]).unwrap(), 0.0);
        assert_relative_eq!(coverage_objective(&inst, &[2]).unwrap(), 1.2, epsilon = 1e-15);
        assert_eq!(coverage_objective(&inst, &[0, 1]).unwrap(), 2.0);
        let single = AuditInstance::new(vec![1.0], 1.0, vec![1.0], vec![vec![0.6]]).unwrap();
        assert_relative_eq!(coverage_objective(&single, &[0]).unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(coverage_objective(&inst, &[3]), Err(Error::IndexOutOfRange { index: 3, len: 3 }));
    }

    #[test]
    fn gains() {
        let inst = three();
        assert_eq!(marginal_gain(&inst, &[], 0).unwrap(), 1.0);
        let before = marginal_gain(&inst, &[], 2).unwrap();
        let after = marginal_gain(&inst, &[0], 2).unwrap();
        assert!(after < before);
        assert_eq!(marginal_gain(&inst, &[0], 0), Err(Error::AlreadySelected(0)));
        let blank = AuditInstance::new(vec![1.0], 1.0, vec![1.0], vec![vec![0.0]]).unwrap();
        assert_eq!(marginal_gain(&blank, &[], 0).unwrap(), 0.0);
    }

    #[test]
    fn greedy_on_three() {
        let g = lazy_greedy(&three()).unwrap();
        assert_eq!(g.selected, vec![0, 2]);
        assert_relative_eq!(g.objective, 1.6, epsilon = 1e-12);
        let opt = exhaustive_opt(&three()).unwrap();
        assert_eq!(opt.selected, vec![0, 1]);
        assert_eq!(opt.objective, 2.0);
        assert!(g.objective / opt.objective >= 1.0 - (-1.0f64).exp());
        let n = naive_greedy(&three()).unwrap();
        assert_eq!(n.selected, g.selected);
        assert!(g.evaluations <= n.evaluations);
    }

    #[test]
    fn greedy_budget_edges() {
        let mut inst = three();
        // Every candidate still has positive gain when it is picked.
        inst.budget = 10.0;
        assert_eq!(lazy_greedy(&inst).unwrap().selected, vec![0, 1, 2]);
        inst.budget = 0.5;
        let g = lazy_greedy(&inst).unwrap();
        assert!(g.selected.is_empty());
        assert_eq!(g.objective, 0.0);
    }

    #[test]
    fn exhaustive_edges() {
        let single = AuditInstance::new(vec![1.0], 1.0, vec![1.0], vec![vec![0.3]]).unwrap();
        assert_eq!(exhaustive_opt(&single).unwrap().selected, vec![0]);
        let zero = AuditInstance::new(vec![1.0; 3], 2.0, vec![1.0], vec![vec![0.0]; 3]).unwrap();
        let r = exhaustive_opt(&zero).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.objective, 0.0);
        let big = AuditInstance::new(vec![1.0; 21], 2.0, vec![1.0], vec![vec![0.1]; 21]).unwrap();
        assert_eq!(exhaustive_opt(&big), Err(Error::TooLarge { m: 21, max: 20 }));
    }

    #[test]
    fn local_search_reaches_optimum() {
        let inst = three();
        let g = lazy_greedy(&inst).unwrap();
        let ls = local_search(&inst, &g, 10).unwrap();
        assert_eq!(ls.selected, vec![0, 1]);
        let again = local_search(&inst, &ls, 10).unwrap();
        assert_eq!(again.selected, ls.selected);
        assert_eq!(local_search(&inst, &g, 0).unwrap().selected, g.selected);
    }

    #[test]
    fn lagrangian_values() {
        let inst = three().with_thresholds(vec![1.0, 1.0], 5.0).unwrap();
        assert_eq!(lagrangian_objective(&inst, &[0, 1], &[0.5, 0.9]).unwrap(), 2.0);
        assert_relative_eq!(lagrangian_objective(&inst, &[0, 1], &[1.2, 0.9]).unwrap(), 1.0, epsilon = 1e-12);
        let zero = three().with_thresholds(vec![1.0, 1.0], 0.0).unwrap();
        assert_eq!(lagrangian_objective(&zero, &[0, 1], &[3.0, 3.0]).unwrap(), 2.0);
        assert!(matches!(lagrangian_objective(&inst, &[0], &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn text_round_trip() {
        let inst = three();
        let parsed = AuditInstance::parse(&inst.to_text()).unwrap();
        assert_eq!(parsed, inst);
    }

    #[test]
    fn parse_reports_line() {
        let err = AuditInstance::parse("2 1 1.0\n1 1\n1\n0.5\nx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }));
        let short = AuditInstance::parse("# comment\n2 1 1.0\n1\n").unwrap_err();
        assert!(matches!(short, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn reinforcement_lowers_client_index() {
        let client =
            QuadraticGame::from_f64(&[1.0, 0.0], &[0.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0]], 0.5, 1.0).unwrap();
        let acts = vec![
            vec![Reinforcement { client: 0, coordinate: 1, delta: 3.0 }],
            vec![],
            vec![],
        ];
        let model = ClientReinforcement::new(vec![client], acts, 0.0).unwrap();
        let base = model.per_client_index(&[]).unwrap();
        let boosted = model.per_client_index(&[0]).unwrap();
        assert_relative_eq!(base[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(boosted[0], 0.1, epsilon = 1e-15);
        let inst = three().with_thresholds(vec![0.15], 1.0).unwrap();
        let best = lagrangian_ladder(&inst, &model, &LAMBDA_LADDER).unwrap();
        assert!(best.allocation.selected.contains(&0));
        assert_eq!(best.violation, 0.0);
    }
}
