//! Mobile setting: users walk `n` hops and every visited node broadcasts.
//! Walk-space enumeration, greedy path selection with a start-node cap,
//! the distinct-start adjustment, the exhaustive optimum, the upper bound,
//! the closed-form guarantee and the static-to-mobile reduction.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::coverage::{self, UB_SEARCH_CAP};
use crate::error::{Error, Result};
use crate::model::{Instance, NodeId, SensingGraph, Walk, WalkSet};
use crate::static_solver::phi_empty;
use crate::tiebreak::{Chooser, TieBreak};
use crate::welfare::{evaluate_walks, phi_walks_matrix, CoverageState, EvalRoute, WelfareBreakdown};

/// Which sequences count as candidate paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkMode {
    /// Node revisits allowed.
    #[default]
    Walks,
    /// No node appears twice.
    SimplePaths,
}

/// All `n`-edge candidates, in lexicographic node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSpace {
    pub n: usize,
    pub candidates: Vec<Walk>,
    /// Start node → indices into `candidates`.
    pub by_start: BTreeMap<usize, Vec<usize>>,
}

impl WalkSpace {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

fn extend_walks(
    g: &SensingGraph,
    prefix: &mut Vec<usize>,
    remaining: usize,
    mode: WalkMode,
    out: &mut Vec<Walk>,
) {
    if remaining == 0 {
        out.push(Walk::from_trusted(prefix.clone()));
        return;
    }
    let last = *prefix.last().expect("non-empty prefix");
    for &next in g.neighbors(last) {
        if mode == WalkMode::SimplePaths && prefix.contains(&next) {
            continue;
        }
        prefix.push(next);
        extend_walks(g, prefix, remaining - 1, mode, out);
        prefix.pop();
    }
}

/// Every `n`-edge walk (or simple path) starting at a user node.
pub fn enumerate_walks(instance: &Instance, n: usize, mode: WalkMode) -> Result<WalkSpace> {
    if n == 0 {
        return Err(Error::input("hop length n must be >= 1"));
    }
    let g = instance.sensing();
    let mut candidates = Vec::new();
    for u in 0..instance.user_count() {
        extend_walks(g, &mut vec![u], n, mode, &mut candidates);
    }
    candidates.sort();
    candidates.dedup();
    let mut by_start: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, w) in candidates.iter().enumerate() {
        by_start.entry(w.start().0).or_default().push(i);
    }
    Ok(WalkSpace {
        n,
        candidates,
        by_start,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobileConfig {
    pub n: usize,
    pub k: usize,
    /// Augmentation factor: at most `g` selected walks per start node.
    pub g: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub walk_mode: WalkMode,
    #[serde(default)]
    pub route: EvalRoute,
}

impl MobileConfig {
    pub fn new(n: usize, k: usize, g: usize) -> Self {
        MobileConfig {
            n,
            k,
            g,
            tie_break: TieBreak::default(),
            walk_mode: WalkMode::default(),
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

    pub fn with_walk_mode(mut self, mode: WalkMode) -> Self {
        self.walk_mode = mode;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkStep {
    pub walk: Walk,
    /// Marginal gain in `Φ` units.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobileResult {
    pub walks: WalkSet,
    pub welfare: WelfareBreakdown,
    pub trace: Vec<WalkStep>,
    /// Start nodes whose candidates were dropped after reaching `g` walks.
    pub pruned_starts: BTreeSet<NodeId>,
}

fn distinct_nodes(w: &Walk) -> Vec<usize> {
    let mut v = w.indices();
    v.sort_unstable();
    v.dedup();
    v
}

/// Greedy path selection: `k` rounds, each adding the available walk with the
/// largest marginal welfare; a start node's candidates leave the search space
/// once it has `g` selected walks.
pub fn gps(instance: &Instance, config: &MobileConfig) -> Result<MobileResult> {
    let space = enumerate_walks(instance, config.n, config.walk_mode)?;
    gps_on(instance, &space, config)
}

/// [`gps`] over a pre-built walk space.
pub fn gps_on(instance: &Instance, space: &WalkSpace, config: &MobileConfig) -> Result<MobileResult> {
    let MobileConfig { k, g, .. } = *config;
    if k == 0 {
        return Err(Error::input("budget k must be >= 1"));
    }
    if g == 0 || g > k {
        return Err(Error::input(format!("augmentation g = {g} must satisfy 1 <= g <= k = {k}")));
    }
    let m = instance.user_count() as f64;
    let nodes: Vec<Vec<usize>> = space.candidates.iter().map(distinct_nodes).collect();
    let mut available = vec![true; space.len()];
    let mut per_start: BTreeMap<usize, usize> = BTreeMap::new();
    let mut chooser = Chooser::new(config.tie_break);
    let mut state = CoverageState::new(instance);
    let mut chosen: Vec<Walk> = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    let mut pruned_starts = BTreeSet::new();

    for step in 0..k {
        let (i, gain) = match config.route {
            EvalRoute::Set => {
                let scored = (0..space.len())
                    .filter(|&i| available[i])
                    .map(|i| (i, state.gain(&nodes[i])));
                chooser.pick(scored)
            }
            EvalRoute::Matrix => {
                let current = phi_walks_matrix(instance, &WalkSet::new(chosen.clone(), k)?)?.total();
                let mut scored = Vec::new();
                for i in (0..space.len()).filter(|&i| available[i]) {
                    let mut next = chosen.clone();
                    next.push(space.candidates[i].clone());
                    let total = phi_walks_matrix(instance, &WalkSet::new(next, k)?)?.total();
                    scored.push((i, total - current));
                }
                chooser.pick(scored)
            }
        }
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "only {step} walks selectable under g = {g}, but k = {k} requested"
            ))
        })?;

        let walk = space.candidates[i].clone();
        let start = walk.start().0;
        available[i] = false;
        state.add(&nodes[i]);
        let count = per_start.entry(start).or_insert(0);
        *count += 1;
        if *count == g {
            if let Some(idx) = space.by_start.get(&start) {
                for &j in idx {
                    available[j] = false;
                }
            }
            if step + 1 < k {
                pruned_starts.insert(NodeId(start));
            }
        }
        trace.push(WalkStep {
            walk: walk.clone(),
            gain: gain / m,
        });
        chosen.push(walk);
    }
    let walks = WalkSet::new(chosen, g)?;
    let welfare = evaluate_walks(instance, &walks, config.route)?;
    Ok(MobileResult {
        walks,
        welfare,
        trace,
        pruned_starts,
    })
}

/// From a solution with cap `k`, keeps the first `g` selected walks of each
/// start-node class (in selection order).
pub fn intermediate_solution(walks: &WalkSet, g: usize) -> Result<WalkSet> {
    let mut per_start: BTreeMap<NodeId, usize> = BTreeMap::new();
    let kept = walks
        .walks()
        .iter()
        .filter(|w| {
            let c = per_start.entry(w.start()).or_insert(0);
            *c += 1;
            *c <= g
        })
        .cloned()
        .collect();
    WalkSet::new(kept, g)
}

/// Continues `prefix` to `n` edges, always stepping to the smallest neighbor
/// inside `allowed`.
fn extend_within(g: &SensingGraph, mut prefix: Vec<usize>, n: usize, allowed: &FixedBitSet) -> Option<Vec<usize>> {
    while prefix.len() < n + 1 {
        let last = *prefix.last()?;
        let next = g.neighbors(last).iter().copied().find(|&v| allowed.contains(v))?;
        prefix.push(next);
    }
    Some(prefix)
}

/// Greedy selection with `g = k`, post-processed so every walk has a distinct
/// start node while the visited node set, and hence `Φ`, is unchanged.
///
/// The first walk of each start class is kept. Every other walk is cut at its
/// first node that is not yet a start and re-extended to `n` edges using only
/// nodes already visited. Requires every sensing node to be a user.
pub fn adjusted_gps(instance: &Instance, config: &MobileConfig) -> Result<MobileResult> {
    if !instance.all_user_nodes() {
        return Err(Error::Precondition(
            "distinct-start adjustment needs every sensing node to be a user node".into(),
        ));
    }
    let k = config.k;
    let n = config.n;
    let base = gps(instance, &MobileConfig { g: k, ..*config })?;
    let g = instance.sensing();

    let mut visited = FixedBitSet::with_capacity(g.node_count());
    for v in base.walks.visited_nodes() {
        visited.insert(v);
    }
    let mut starts: BTreeSet<usize> = BTreeSet::new();
    let mut out: Vec<Walk> = Vec::with_capacity(k);
    let mut rest: Vec<&Walk> = Vec::new();
    for w in base.walks.walks() {
        if starts.insert(w.start().0) {
            out.push(w.clone());
        } else {
            rest.push(w);
        }
    }
    for p in rest {
        let idx = p.indices();
        let seq = match idx.iter().position(|v| !starts.contains(v)) {
            Some(j) => extend_within(g, idx[j..].to_vec(), n, &visited),
            None => {
                // Every node of p already starts a walk: restart from the
                // smallest visited non-start node, or any free node.
                let inside = (0..g.node_count()).find(|&v| visited.contains(v) && !starts.contains(&v));
                match inside {
                    Some(v) => extend_within(g, vec![v], n, &visited),
                    None => {
                        let mut all = FixedBitSet::with_capacity(g.node_count());
                        all.insert_range(..);
                        (0..g.node_count())
                            .filter(|v| !starts.contains(v) && g.degree(*v) > 0)
                            .find_map(|v| extend_within(g, vec![v], n, &all))
                    }
                }
            }
        };
        let seq = seq.ok_or_else(|| {
            Error::Infeasible(format!("cannot find {k} walks with distinct start nodes"))
        })?;
        starts.insert(seq[0]);
        out.push(Walk::from_trusted(seq));
    }
    let walks = WalkSet::new(out, 1)?;
    let welfare = evaluate_walks(instance, &walks, config.route)?;
    Ok(MobileResult {
        walks,
        welfare,
        trace: base.trace,
        pruned_starts: BTreeSet::new(),
    })
}

/// Exhaustive optimum over `k` walks with at most `g` per start node.
///
/// `Φ` depends only on the visited node set, so walks sharing a start and a
/// visited set are interchangeable; the search runs over those classes and
/// pads the winner with unused walks. Fails with [`Error::CapExceeded`] when
/// the number of class subsets to examine exceeds `cap`.
pub fn brute_force_mobile(instance: &Instance, config: &MobileConfig, cap: u64) -> Result<MobileResult> {
    let MobileConfig { n, k, g, .. } = *config;
    if k == 0 || g == 0 {
        return Err(Error::input("k and g must be >= 1"));
    }
    let space = enumerate_walks(instance, n, config.walk_mode)?;
    let capacity: usize = space.by_start.values().map(|v| v.len().min(g)).sum();
    if capacity < k {
        return Err(Error::Infeasible(format!(
            "at most {capacity} walks selectable under g = {g}, but k = {k} requested"
        )));
    }

    // Representative per (start, visited set), first in lexicographic order.
    let mut seen: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    let mut reps: Vec<usize> = Vec::new();
    for (i, w) in space.candidates.iter().enumerate() {
        if seen.insert((w.start().0, distinct_nodes(w))) {
            reps.push(i);
        }
    }
    let depth = k.min(reps.len());
    let needed: u128 = (0..=depth).map(|j| crate::static_solver::binomial(reps.len(), j)).fold(0u128, |a, b| a.saturating_add(b));
    if needed > cap as u128 {
        return Err(Error::CapExceeded { cap, needed });
    }

    struct Search<'a> {
        state: CoverageState<'a>,
        space: &'a WalkSpace,
        reps: &'a [usize],
        nodes: Vec<Vec<usize>>,
        k: usize,
        g: usize,
        per_start: BTreeMap<usize, usize>,
        stack: Vec<usize>,
        union: Vec<usize>,
        best: f64,
        best_set: Vec<usize>,
    }
    impl Search<'_> {
        fn run(&mut self, from: usize) {
            let value = self.state.gain(&self.union);
            if value > self.best {
                self.best = value;
                self.best_set = self.stack.clone();
            }
            if self.stack.len() == self.k {
                return;
            }
            for r in from..self.reps.len() {
                let start = self.space.candidates[self.reps[r]].start().0;
                let used = self.per_start.get(&start).copied().unwrap_or(0);
                if used == self.g {
                    continue;
                }
                self.per_start.insert(start, used + 1);
                let mark = self.union.len();
                self.union.extend_from_slice(&self.nodes[r]);
                self.stack.push(r);
                self.run(r + 1);
                self.stack.pop();
                self.union.truncate(mark);
                self.per_start.insert(start, used);
            }
        }
    }
    let mut search = Search {
        state: CoverageState::new(instance),
        space: &space,
        reps: &reps,
        nodes: reps.iter().map(|&i| distinct_nodes(&space.candidates[i])).collect(),
        k,
        g,
        per_start: BTreeMap::new(),
        stack: Vec::new(),
        union: Vec::new(),
        best: f64::NEG_INFINITY,
        best_set: Vec::new(),
    };
    search.run(0);

    let mut picked: Vec<usize> = search.best_set.iter().map(|&r| reps[r]).collect();
    let mut per_start: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in &picked {
        *per_start.entry(space.candidates[i].start().0).or_insert(0) += 1;
    }
    for i in 0..space.len() {
        if picked.len() == k {
            break;
        }
        let s = space.candidates[i].start().0;
        let used = per_start.get(&s).copied().unwrap_or(0);
        if used < g && !picked.contains(&i) {
            per_start.insert(s, used + 1);
            picked.push(i);
        }
    }
    picked.sort_unstable();
    let walks = WalkSet::new(picked.iter().map(|&i| space.candidates[i].clone()).collect(), g)?;
    let welfare = evaluate_walks(instance, &walks, EvalRoute::Set)?;
    Ok(MobileResult {
        walks,
        welfare,
        trace: Vec::new(),
        pruned_starts: BTreeSet::new(),
    })
}

/// How many sensing nodes the upper bound lets the relaxed problem pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ub2Form {
    /// `k·(n+1)`: every walk visits at most `n+1` nodes, so this is always valid.
    #[default]
    VisitedNodes,
    /// `n·k`, which at `n = 2` is the `2k` of the original formulation. It
    /// ignores the start node and can fall below the optimum.
    PaperNk,
}

impl Ub2Form {
    pub fn budget(self, n: usize, k: usize) -> usize {
        match self {
            Ub2Form::VisitedNodes => k * (n + 1),
            Ub2Form::PaperNk => n * k,
        }
    }
}

/// Upper bound on the mobile optimum: `Φ(∅)` plus the best coverage by
/// `k·(n+1)` arbitrary sensing nodes.
pub fn ub2(instance: &Instance, n: usize, k: usize) -> f64 {
    ub2_with(instance, n, k, Ub2Form::default())
}

pub fn ub2_with(instance: &Instance, n: usize, k: usize, form: Ub2Form) -> f64 {
    let nodes: Vec<usize> = (0..instance.node_count()).collect();
    let (cov, _) = coverage::coverage_upper_bound(
        instance.sensing(),
        &nodes,
        form.budget(n, k),
        UB_SEARCH_CAP,
    );
    phi_empty(instance) + cov
}

/// Greedy guarantee with augmentation: `(g/k)·[1 − ((ϖ−2)/ϖ)·((k−1)/k)^k]`.
pub fn mobile_bound(k: usize, node_count: usize, g: usize) -> f64 {
    assert!(g >= 1 && g <= k, "mobile_bound needs 1 <= g <= k");
    let kf = k as f64;
    let w = node_count as f64;
    (g as f64 / kf) * (1.0 - ((w - 2.0) / w) * ((kf - 1.0) / kf).powf(kf))
}

/// A reduced mobile instance plus, per user, the walk along its dummy tail.
#[derive(Debug, Clone)]
pub struct MobileReduction {
    pub instance: Instance,
    pub tails: Vec<Walk>,
}

/// Appends to every user `v_i` a chain `v_i – d_1 – … – d_n` of dummy non-user
/// nodes and a fan of `|E1|` leaves hanging off `d_n`. Original nodes and
/// edges keep their indices.
pub fn mobile_reduction(static_instance: &Instance, n: usize) -> Result<MobileReduction> {
    if n == 0 {
        return Err(Error::input("hop length n must be >= 1"));
    }
    if static_instance.preferences().is_some() {
        return Err(Error::input("reduction is defined for instances without preferences"));
    }
    let g = static_instance.sensing();
    let m = static_instance.user_count();
    let e1 = g.edge_count();
    let mut edges = g.edges().to_vec();
    let mut next = g.node_count();
    let mut tails = Vec::with_capacity(m);
    for u in 0..m {
        let chain: Vec<usize> = (next..next + n).collect();
        next += n;
        let mut prev = u;
        for &d in &chain {
            edges.push((prev, d));
            prev = d;
        }
        for _ in 0..e1 {
            edges.push((prev, next));
            next += 1;
        }
        let mut seq = vec![u];
        seq.extend(chain);
        tails.push(seq);
    }
    let mut sensing = SensingGraph::new(next, m, edges)?.with_self_loops(g.allows_self_loops());
    if let Some(w) = g.weights() {
        let mut w = w.to_vec();
        w.resize(sensing.edge_count(), 1.0);
        sensing = sensing.with_weights(w)?;
    }
    let instance = Instance::new(
        sensing,
        static_instance.social().clone(),
        None,
        static_instance.social_hop_radius(),
    )?;
    let tails = tails
        .into_iter()
        .map(|t| Walk::from_indices(instance.sensing(), &t))
        .collect::<Result<_>>()?;
    Ok(MobileReduction { instance, tails })
}

pub fn mobile_reduction_instance(static_instance: &Instance, n: usize) -> Result<Instance> {
    mobile_reduction(static_instance, n).map(|r| r.instance)
}
