//! Budgeted maximum coverage over node incidence sets: pick `budget` nodes
//! from a candidate list maximizing the weight of edges incident to the
//! picked nodes.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SensingGraph;

/// Default limit on enumerated subsets / search nodes for exhaustive routines.
pub const DEFAULT_ENUMERATION_CAP: u64 = 2_000_000;

/// Search-node limit for the exact coverage term of the upper bounds; past it
/// the bounds fall back to relaxations.
pub const UB_SEARCH_CAP: u64 = 50_000;

/// `1 − 1/e`, the classic greedy max-coverage guarantee.
pub const GREEDY_COVERAGE_RATIO: f64 = 1.0 - 1.0 / std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageMode {
    Greedy,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSolution {
    /// Chosen candidate nodes, in pick order (greedy) or ascending (exact).
    pub chosen: Vec<usize>,
    /// Total weight of the covered edges.
    pub covered: f64,
}

struct Sets<'g> {
    graph: &'g SensingGraph,
    candidates: Vec<usize>,
    sets: Vec<FixedBitSet>,
}

impl<'g> Sets<'g> {
    fn new(graph: &'g SensingGraph, candidates: &[usize]) -> Self {
        let sets = candidates
            .iter()
            .map(|&v| graph.incidence_set(v))
            .collect();
        Sets {
            graph,
            candidates: candidates.to_vec(),
            sets,
        }
    }

    fn gain(&self, i: usize, covered: &FixedBitSet) -> f64 {
        if self.graph.is_weighted() {
            self.sets[i]
                .difference(covered)
                .map(|e| self.graph.weight(e))
                .sum()
        } else {
            self.sets[i].difference_count(covered) as f64
        }
    }
}

fn greedy(sets: &Sets<'_>, budget: usize) -> CoverageSolution {
    let mut covered = sets.graph.empty_edge_set();
    let mut used = vec![false; sets.sets.len()];
    let mut chosen = Vec::new();
    let mut value = 0.0;
    for _ in 0..budget.min(sets.sets.len()) {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..sets.sets.len()).filter(|&i| !used[i]) {
            let g = sets.gain(i, &covered);
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((i, g));
            }
        }
        let Some((i, g)) = best else { break };
        used[i] = true;
        covered.union_with(&sets.sets[i]);
        value += g;
        chosen.push(sets.candidates[i]);
    }
    CoverageSolution {
        chosen,
        covered: value,
    }
}

struct Search<'s, 'g> {
    sets: &'s Sets<'g>,
    order: Vec<usize>,
    budget: usize,
    cap: u64,
    nodes: u64,
    /// No subset can cover more than this.
    ceiling: f64,
    best_value: f64,
    best: Vec<usize>,
    stack: Vec<usize>,
    /// Per-depth scratch for `(position, gain)` pairs.
    scratch: Vec<Vec<(usize, f64)>>,
}

impl Search<'_, '_> {
    fn run(&mut self, pos: usize, covered: &FixedBitSet, value: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::CapExceeded {
                cap: self.cap,
                needed: self.nodes as u128,
            });
        }
        if value > self.best_value {
            self.best_value = value;
            self.best = self.stack.clone();
        }
        let slots = self.budget - self.stack.len();
        if slots == 0 || pos == self.order.len() || self.best_value >= self.ceiling {
            return Ok(());
        }
        let depth = self.stack.len();
        let mut gains = std::mem::take(&mut self.scratch[depth]);
        gains.clear();
        gains.extend(
            self.order[pos..]
                .iter()
                .enumerate()
                .map(|(off, &i)| (pos + off, self.sets.gain(i, covered)))
                .filter(|&(_, g)| g > 0.0),
        );
        // Coverage-sum bound: the best `slots` remaining marginal gains.
        let mut top: Vec<f64> = gains.iter().map(|&(_, g)| g).collect();
        if top.len() > slots {
            top.select_nth_unstable_by(slots - 1, |a, b| b.total_cmp(a));
            top.truncate(slots);
        }
        let bound = (value + top.iter().sum::<f64>()).min(self.ceiling);
        if bound > self.best_value {
            // Branch on positions in order; a position skipped here is never revisited deeper.
            for &(p, g) in &gains {
                let i = self.order[p];
                let mut next = covered.clone();
                next.union_with(&self.sets.sets[i]);
                self.stack.push(i);
                let r = self.run(p + 1, &next, value + g);
                self.stack.pop();
                if r.is_err() {
                    self.scratch[depth] = gains;
                    return r;
                }
            }
        }
        self.scratch[depth] = gains;
        Ok(())
    }
}

fn exact(sets: &Sets<'_>, budget: usize, cap: u64) -> Result<CoverageSolution> {
    let incumbent = greedy(sets, budget);
    let empty = sets.graph.empty_edge_set();
    let mut order: Vec<usize> = (0..sets.sets.len()).collect();
    order.sort_by(|&a, &b| sets.gain(b, &empty).total_cmp(&sets.gain(a, &empty)).then(a.cmp(&b)));
    let mut all = sets.graph.empty_edge_set();
    for s in &sets.sets {
        all.union_with(s);
    }
    let budget = budget.min(sets.sets.len());
    let mut search = Search {
        sets,
        order,
        budget,
        cap,
        nodes: 0,
        ceiling: sets.graph.weight_of(&all),
        best_value: f64::NEG_INFINITY,
        best: Vec::new(),
        stack: Vec::new(),
        scratch: vec![Vec::new(); budget + 1],
    };
    // Seed the incumbent so the bound prunes from the first node on.
    let index_of = |v: usize| sets.candidates.iter().position(|&c| c == v).unwrap();
    search.best_value = incumbent.covered;
    search.best = incumbent.chosen.iter().map(|&v| index_of(v)).collect();
    search.run(0, &empty, 0.0)?;
    let mut chosen: Vec<usize> = search.best.iter().map(|&i| sets.candidates[i]).collect();
    chosen.sort_unstable();
    Ok(CoverageSolution {
        chosen,
        covered: search.best_value,
    })
}

/// Maximum coverage with `budget` picks from `candidates`.
///
/// Greedy ties go to the earliest candidate. Exact mode runs a depth-first
/// branch-and-bound and fails with [`Error::CapExceeded`] once it has
/// expanded more than `cap` search nodes.
pub fn max_coverage(
    graph: &SensingGraph,
    candidates: &[usize],
    budget: usize,
    mode: CoverageMode,
    cap: u64,
) -> Result<CoverageSolution> {
    let sets = Sets::new(graph, candidates);
    match mode {
        CoverageMode::Greedy => Ok(greedy(&sets, budget)),
        CoverageMode::Exact => exact(&sets, budget, cap),
    }
}

/// How an upper bound on maximum coverage was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    Exact,
    Relaxed,
}

/// An upper bound on the optimal coverage: the exact optimum when the search
/// finishes within `cap`, otherwise the smallest of three valid relaxations
/// (greedy value inflated by `1/(1−1/e)`, the sum of the `budget` largest
/// sets, and the total edge weight).
pub fn coverage_upper_bound(
    graph: &SensingGraph,
    candidates: &[usize],
    budget: usize,
    cap: u64,
) -> (f64, BoundSource) {
    if budget == 0 {
        return (0.0, BoundSource::Exact);
    }
    match max_coverage(graph, candidates, budget, CoverageMode::Exact, cap) {
        Ok(sol) => (sol.covered, BoundSource::Exact),
        Err(_) => {
            let sets = Sets::new(graph, candidates);
            let g = greedy(&sets, budget).covered / GREEDY_COVERAGE_RATIO;
            let empty = graph.empty_edge_set();
            let mut sizes: Vec<f64> = (0..sets.sets.len()).map(|i| sets.gain(i, &empty)).collect();
            sizes.sort_unstable_by(|a, b| b.total_cmp(a));
            let top: f64 = sizes.iter().take(budget).sum();
            (g.min(top).min(graph.total_weight()), BoundSource::Relaxed)
        }
    }
}
