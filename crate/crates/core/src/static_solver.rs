//! Static setting: greedy user selection, the exhaustive optimum, the
//! max-coverage baseline, the coverage-based upper bound and the closed-form
//! approximation guarantee.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::coverage::{self, BoundSource, CoverageMode, DEFAULT_ENUMERATION_CAP, UB_SEARCH_CAP};
use crate::error::{Error, Result};
use crate::model::{Instance, NodeId, SensingGraph, Selection, SocialGraph};
use crate::tiebreak::{Chooser, TieBreak};
use crate::welfare::{
    evaluate_selection, phi_set_oracle, CoverageState, EvalRoute, WelfareBreakdown,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub k: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub route: EvalRoute,
}

impl SolveConfig {
    pub fn new(k: usize) -> Self {
        SolveConfig {
            k,
            tie_break: TieBreak::default(),
            route: EvalRoute::default(),
        }
    }

    pub fn with_route(mut self, route: EvalRoute) -> Self {
        self.route = route;
        self
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }
}

/// One greedy iteration: the chosen user and its marginal gain in `Φ` units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub user: NodeId,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticResult {
    pub selection: Selection,
    pub welfare: WelfareBreakdown,
    pub trace: Vec<GreedyStep>,
}

fn check_budget(instance: &Instance, k: usize) -> Result<()> {
    let m = instance.user_count();
    if k == 0 || k > m {
        return Err(Error::input(format!("budget k = {k} must satisfy 1 <= k <= m = {m}")));
    }
    Ok(())
}

/// Greedy user selection: `k` rounds, each adding the unselected user with the
/// largest marginal welfare.
pub fn gus(instance: &Instance, config: &SolveConfig) -> Result<StaticResult> {
    check_budget(instance, config.k)?;
    let m = instance.user_count();
    let mut chooser = Chooser::new(config.tie_break);
    let mut selection = Selection::empty();
    let mut chosen = vec![false; m];
    let mut trace = Vec::with_capacity(config.k);

    match config.route {
        EvalRoute::Set => {
            let mut state = CoverageState::new(instance);
            for _ in 0..config.k {
                let scored = (0..m).filter(|&u| !chosen[u]).map(|u| (u, state.gain(&[u])));
                let (u, gain) = chooser.pick(scored).expect("k <= m leaves a candidate");
                state.add(&[u]);
                chosen[u] = true;
                selection.push(NodeId(u))?;
                trace.push(GreedyStep {
                    user: NodeId(u),
                    gain: gain / m as f64,
                });
            }
        }
        EvalRoute::Matrix => {
            let mut current = evaluate_selection(instance, &selection, EvalRoute::Matrix)?.total();
            for _ in 0..config.k {
                let mut scored = Vec::with_capacity(m);
                for u in (0..m).filter(|&u| !chosen[u]) {
                    let mut next = selection.clone();
                    next.push(NodeId(u))?;
                    let total = evaluate_selection(instance, &next, EvalRoute::Matrix)?.total();
                    scored.push((u, total - current));
                }
                let (u, gain) = chooser.pick(scored).expect("k <= m leaves a candidate");
                chosen[u] = true;
                selection.push(NodeId(u))?;
                current += gain;
                trace.push(GreedyStep {
                    user: NodeId(u),
                    gain: gain / m as f64,
                });
            }
        }
    }
    let welfare = evaluate_selection(instance, &selection, config.route)?;
    Ok(StaticResult {
        selection,
        welfare,
        trace,
    })
}

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustive optimum over all `k`-subsets of users; ties resolve to the
/// lexicographically least selection. Refuses when `C(m, k)` exceeds `cap`.
pub fn brute_force_static(instance: &Instance, k: usize, cap: u64) -> Result<StaticResult> {
    check_budget(instance, k)?;
    let m = instance.user_count();
    let needed = binomial(m, k);
    if needed > cap as u128 {
        return Err(Error::CapExceeded { cap, needed });
    }
    let state = CoverageState::new(instance);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for combo in (0..m).combinations(k) {
        let value = state.gain(&combo);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, combo));
        }
    }
    let (_, users) = best.expect("at least one subset");
    let selection = Selection::from_indices(&users, m)?;
    let welfare = phi_set_oracle(instance, &selection)?;
    Ok(StaticResult {
        selection,
        welfare,
        trace: Vec::new(),
    })
}

/// Max-coverage selection of `k` users over the sets `E1(v)`, ignoring the
/// social graph. Returns the selection and the covered edge weight.
pub fn max_coverage_baseline(
    instance: &Instance,
    k: usize,
    mode: CoverageMode,
) -> Result<(Selection, f64)> {
    check_budget(instance, k)?;
    let m = instance.user_count();
    let users: Vec<usize> = (0..m).collect();
    let sol = coverage::max_coverage(instance.sensing(), &users, k, mode, DEFAULT_ENUMERATION_CAP)?;
    let mut picked = sol.chosen.clone();
    // Pad with the lowest unpicked users when fewer than k sets cover anything.
    for u in 0..m {
        if picked.len() >= k {
            break;
        }
        if !picked.contains(&u) {
            picked.push(u);
        }
    }
    Ok((Selection::from_indices(&picked, m)?, sol.covered))
}

/// `Φ(∅)` by the set route.
pub fn phi_empty(instance: &Instance) -> f64 {
    CoverageState::new(instance).average()
}

/// Upper bound on the static optimum: `Φ(∅)` plus an upper bound on the best
/// coverage by `k` users.
pub fn ub1(instance: &Instance, k: usize) -> f64 {
    ub1_detailed(instance, k, UB_SEARCH_CAP).0
}

pub fn ub1_detailed(instance: &Instance, k: usize, cap: u64) -> (f64, BoundSource) {
    let users: Vec<usize> = (0..instance.user_count()).collect();
    let (cov, src) = coverage::coverage_upper_bound(instance.sensing(), &users, k, cap);
    (phi_empty(instance) + cov, src)
}

/// Greedy guarantee `1 − ((m−2)/m)·((k−1)/k)^k`.
pub fn static_bound(k: usize, m: usize) -> f64 {
    assert!(k >= 1 && m >= 1, "static_bound needs k >= 1 and m >= 1");
    let k = k as f64;
    let m = m as f64;
    1.0 - ((m - 2.0) / m) * ((k - 1.0) / k).powf(k)
}

/// Instance whose sensing graph is `edges` on `node_count` user nodes with an
/// empty social graph: it reaches `Φ = |E1|` with `k` users exactly when the
/// graph has a vertex cover of size `k`.
pub fn vcp_reduction_instance(node_count: usize, edges: &[(usize, usize)]) -> Result<Instance> {
    let g = SensingGraph::new(node_count, node_count, edges.to_vec())?;
    Instance::simple(g, SocialGraph::empty(node_count))
}
