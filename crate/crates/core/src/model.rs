//! Instance model: the paired sensing/social graphs, preference profiles and
//! the two solution shapes (user selections and walk sets).
//!
//! Node indexing follows one convention everywhere: the first `user_count`
//! sensing nodes are user nodes, the rest are non-user nodes. Social-graph
//! vertices are the user indices `0..user_count`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index into the sensing graph's node array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// One broken invariant, named by `invariant` and located by `detail`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

impl Violation {
    fn new(invariant: &'static str, detail: impl Into<String>) -> Self {
        Violation {
            invariant,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

/// Physical graph of locations (nodes) and roads (edges).
///
/// Construction only requires endpoints to be in range so that incidence
/// lists can be built; the remaining invariants (no duplicates, self-loop
/// policy, weight positivity, user-count range) are reported by [`validate`].
#[derive(Debug, Clone)]
pub struct SensingGraph {
    node_count: usize,
    user_count: usize,
    edges: Vec<(usize, usize)>,
    weights: Option<Vec<f64>>,
    allow_self_loops: bool,
    incidence: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl SensingGraph {
    pub fn new(node_count: usize, user_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(node_count, user_count, edges, None, false)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::input(format!(
                "{} edge weights given for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn with_self_loops(mut self, allow: bool) -> Self {
        self.allow_self_loops = allow;
        self
    }

    fn build(
        node_count: usize,
        user_count: usize,
        edges: Vec<(usize, usize)>,
        weights: Option<Vec<f64>>,
        allow_self_loops: bool,
    ) -> Result<Self> {
        let mut incidence = vec![Vec::new(); node_count];
        let mut neighbors = vec![Vec::new(); node_count];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= node_count || v >= node_count {
                return Err(Error::input(format!(
                    "sensing edge {e} = ({u},{v}) has an endpoint outside 0..{node_count}"
                )));
            }
            incidence[u].push(e);
            neighbors[u].push(v);
            if u != v {
                incidence[v].push(e);
                neighbors[v].push(u);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(SensingGraph {
            node_count,
            user_count,
            edges,
            weights,
            allow_self_loops,
            incidence,
            neighbors,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    #[inline]
    pub fn weight(&self, e: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[e])
    }

    pub fn allows_self_loops(&self) -> bool {
        self.allow_self_loops
    }

    pub fn is_user(&self, node: usize) -> bool {
        node < self.user_count
    }

    /// Edge indices incident to `node`.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incidence[node]
    }

    /// Sorted, deduplicated neighbors of `node` (includes `node` itself when it carries a loop).
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.incidence[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count && self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Total weight of all edges; equals `|E1|` under uniform weights.
    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => self.edges.len() as f64,
        }
    }

    /// Sum of weights of the edges in `set`.
    pub fn weight_of(&self, set: &FixedBitSet) -> f64 {
        match &self.weights {
            Some(w) => set.ones().map(|e| w[e]).sum(),
            None => set.count_ones(..) as f64,
        }
    }

    pub(crate) fn empty_edge_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.edges.len())
    }

    pub(crate) fn incidence_set(&self, node: usize) -> FixedBitSet {
        let mut s = self.empty_edge_set();
        for &e in &self.incidence[node] {
            s.insert(e);
        }
        s
    }
}

/// Online friendship graph over the user indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    user_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl SocialGraph {
    pub fn new(user_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); user_count];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= user_count || v >= user_count {
                return Err(Error::input(format!(
                    "social edge {e} = ({u},{v}) has an endpoint outside 0..{user_count}"
                )));
            }
            if u != v {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(SocialGraph {
            user_count,
            edges,
            adjacency,
        })
    }

    pub fn empty(user_count: usize) -> Self {
        SocialGraph {
            user_count,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); user_count],
        }
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, user: usize) -> &[usize] {
        &self.adjacency[user]
    }

    pub fn mean_degree(&self) -> f64 {
        if self.user_count == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.user_count as f64
    }
}

/// Per-user edge subsets of interest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    per_user_edges: Vec<BTreeSet<usize>>,
}

impl PreferenceProfile {
    pub fn new(per_user_edges: Vec<BTreeSet<usize>>) -> Self {
        PreferenceProfile { per_user_edges }
    }

    /// Every user interested in every edge.
    pub fn full(user_count: usize, edge_count: usize) -> Self {
        let all: BTreeSet<usize> = (0..edge_count).collect();
        PreferenceProfile {
            per_user_edges: vec![all; user_count],
        }
    }

    pub fn user_count(&self) -> usize {
        self.per_user_edges.len()
    }

    pub fn edges_of(&self, user: usize) -> &BTreeSet<usize> {
        &self.per_user_edges[user]
    }

    pub fn per_user(&self) -> &[BTreeSet<usize>] {
        &self.per_user_edges
    }

    pub(crate) fn mask(&self, user: usize, edge_count: usize) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(edge_count);
        for &e in &self.per_user_edges[user] {
            if e < edge_count {
                s.insert(e);
            }
        }
        s
    }
}

/// The paired graphs plus optional preferences and the social sharing radius.
#[derive(Debug, Clone)]
pub struct Instance {
    sensing: SensingGraph,
    social: SocialGraph,
    preferences: Option<PreferenceProfile>,
    social_hop_radius: usize,
    /// `{v_i} ∪ N2(v_i)` at the configured radius, sorted, one entry per social user.
    closed_neighborhoods: Vec<Vec<usize>>,
}

impl Instance {
    /// Builds an instance and rejects it if any invariant is broken.
    pub fn new(
        sensing: SensingGraph,
        social: SocialGraph,
        preferences: Option<PreferenceProfile>,
        social_hop_radius: usize,
    ) -> Result<Self> {
        let inst = Self::new_unchecked(sensing, social, preferences, social_hop_radius);
        let violations = validate(&inst);
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }

    /// Builds an instance without checking invariants. Solvers assume a valid
    /// instance and may panic on one that [`validate`] would reject.
    pub fn new_unchecked(
        sensing: SensingGraph,
        social: SocialGraph,
        preferences: Option<PreferenceProfile>,
        social_hop_radius: usize,
    ) -> Self {
        let closed_neighborhoods = (0..social.user_count())
            .map(|u| {
                let mut ball = bfs_ball(&social, u, social_hop_radius);
                ball.push(u);
                ball.sort_unstable();
                ball
            })
            .collect();
        Instance {
            sensing,
            social,
            preferences,
            social_hop_radius,
            closed_neighborhoods,
        }
    }

    /// Plain instance: no preferences, radius 1.
    pub fn simple(sensing: SensingGraph, social: SocialGraph) -> Result<Self> {
        Self::new(sensing, social, None, 1)
    }

    pub fn sensing(&self) -> &SensingGraph {
        &self.sensing
    }

    pub fn social(&self) -> &SocialGraph {
        &self.social
    }

    pub fn preferences(&self) -> Option<&PreferenceProfile> {
        self.preferences.as_ref()
    }

    pub fn social_hop_radius(&self) -> usize {
        self.social_hop_radius
    }

    pub fn user_count(&self) -> usize {
        self.sensing.user_count
    }

    pub fn node_count(&self) -> usize {
        self.sensing.node_count
    }

    /// Same graphs with the preference profile removed.
    pub fn without_preferences(&self) -> Instance {
        let mut out = self.clone();
        out.preferences = None;
        out
    }

    pub fn with_preferences(&self, preferences: PreferenceProfile) -> Result<Instance> {
        Instance::new(
            self.sensing.clone(),
            self.social.clone(),
            Some(preferences),
            self.social_hop_radius,
        )
    }

    pub fn with_hop_radius(&self, radius: usize) -> Result<Instance> {
        Instance::new(
            self.sensing.clone(),
            self.social.clone(),
            self.preferences.clone(),
            radius,
        )
    }

    /// `{user} ∪ N2(user)` at the instance's hop radius, sorted.
    pub fn closed_neighborhood(&self, user: usize) -> &[usize] {
        &self.closed_neighborhoods[user]
    }

    /// True when every sensing node hosts a user.
    pub fn all_user_nodes(&self) -> bool {
        self.sensing.node_count == self.sensing.user_count
    }

    pub(crate) fn check_user(&self, user: usize) -> Result<()> {
        if user < self.user_count() {
            Ok(())
        } else {
            Err(Error::input(format!(
                "user index {user} out of range 0..{}",
                self.user_count()
            )))
        }
    }
}

fn bfs_ball(social: &SocialGraph, origin: usize, radius: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; social.user_count()];
    depth[origin] = 0;
    let mut queue = VecDeque::from([origin]);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        if depth[u] == radius {
            continue;
        }
        for &w in social.neighbors(u) {
            if depth[w] == usize::MAX {
                depth[w] = depth[u] + 1;
                out.push(w);
                queue.push_back(w);
            }
        }
    }
    out
}

/// Checks every structural invariant; an empty list means the instance is valid.
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let g = &instance.sensing;

    if g.user_count == 0 || g.user_count > g.node_count {
        out.push(Violation::new(
            "user_count range",
            format!(
                "user_count {} must satisfy 1 <= user_count <= node_count {}",
                g.user_count, g.node_count
            ),
        ));
    }

    let mut seen = HashSet::with_capacity(g.edges.len());
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        if u == v && !g.allow_self_loops {
            out.push(Violation::new(
                "self-loop",
                format!("sensing edge {e} = ({u},{v}) is a loop and loops are disabled"),
            ));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            out.push(Violation::new(
                "duplicate edge",
                format!("sensing edge {e} = ({u},{v}) repeats an earlier edge"),
            ));
        }
    }
    if let Some(w) = &g.weights {
        if w.len() != g.edges.len() {
            out.push(Violation::new(
                "edge weights",
                format!("{} weights for {} edges", w.len(), g.edges.len()),
            ));
        }
        for (e, &x) in w.iter().enumerate() {
            if !(x.is_finite() && x > 0.0) {
                out.push(Violation::new(
                    "edge weights",
                    format!("edge {e} has non-positive weight {x}"),
                ));
            }
        }
    }

    let s = &instance.social;
    if s.user_count != g.user_count {
        out.push(Violation::new(
            "user_count mismatch",
            format!(
                "social graph has {} users, sensing graph has {}",
                s.user_count, g.user_count
            ),
        ));
    }
    let mut seen = HashSet::with_capacity(s.edges.len());
    for (e, &(u, v)) in s.edges.iter().enumerate() {
        if u == v {
            out.push(Violation::new(
                "social self-loop",
                format!("social edge {e} = ({u},{v})"),
            ));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            out.push(Violation::new(
                "duplicate social edge",
                format!("social edge {e} = ({u},{v}) repeats an earlier edge"),
            ));
        }
    }

    if instance.social_hop_radius == 0 {
        out.push(Violation::new(
            "social_hop_radius",
            "radius must be a positive integer",
        ));
    }

    if let Some(p) = &instance.preferences {
        if p.user_count() != g.user_count {
            out.push(Violation::new(
                "preference length",
                format!(
                    "{} preference sets for {} users",
                    p.user_count(),
                    g.user_count
                ),
            ));
        }
        for (i, set) in p.per_user_edges.iter().enumerate() {
            for &e in set {
                if e >= g.edges.len() {
                    out.push(Violation::new(
                        "preference edge index",
                        format!("user v{i} lists edge {e}, graph has {} edges", g.edges.len()),
                    ));
                }
            }
            if i < g.node_count {
                let missing: Vec<usize> = g.incidence[i]
                    .iter()
                    .copied()
                    .filter(|e| !set.contains(e))
                    .collect();
                if !missing.is_empty() {
                    out.push(Violation::new(
                        "preference containment",
                        format!("user v{i} omits incident edges {missing:?}"),
                    ));
                }
            }
        }
    }
    out
}

/// Edges with at least one endpoint in `nodes`.
pub fn incident_edges(graph: &SensingGraph, nodes: &[NodeId]) -> Result<FixedBitSet> {
    let mut out = graph.empty_edge_set();
    for &NodeId(v) in nodes {
        if v >= graph.node_count {
            return Err(Error::input(format!(
                "node index {v} out of range 0..{}",
                graph.node_count
            )));
        }
        for &e in &graph.incidence[v] {
            out.insert(e);
        }
    }
    Ok(out)
}

/// Users within the instance's hop radius of `user` in the social graph, excluding `user`.
pub fn social_neighborhood(instance: &Instance, user: NodeId) -> Result<BTreeSet<NodeId>> {
    instance.check_user(user.0)?;
    Ok(instance
        .closed_neighborhood(user.0)
        .iter()
        .filter(|&&u| u != user.0)
        .map(|&u| NodeId(u))
        .collect())
}

/// Ordered set of distinct selected users; order is the selection sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Selection {
    users: Vec<NodeId>,
}

impl Selection {
    pub fn new(users: Vec<NodeId>, user_count: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(users.len());
        for &u in &users {
            if u.0 >= user_count {
                return Err(Error::input(format!(
                    "selected user {u} out of range 0..{user_count}"
                )));
            }
            if !seen.insert(u) {
                return Err(Error::input(format!("user {u} selected twice")));
            }
        }
        Ok(Selection { users })
    }

    pub fn from_indices(users: &[usize], user_count: usize) -> Result<Self> {
        Self::new(users.iter().map(|&u| NodeId(u)).collect(), user_count)
    }

    pub fn empty() -> Self {
        Selection::default()
    }

    pub fn users(&self) -> &[NodeId] {
        &self.users
    }

    pub fn indices(&self) -> Vec<usize> {
        self.users.iter().map(|u| u.0).collect()
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.users.contains(&u)
    }

    /// Appends `u`; fails if already present.
    pub fn push(&mut self, u: NodeId) -> Result<()> {
        if self.contains(u) {
            return Err(Error::input(format!("user {u} selected twice")));
        }
        self.users.push(u);
        Ok(())
    }
}

/// An `n`-edge walk starting at a user node; node revisits are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Walk {
    nodes: Vec<NodeId>,
}

impl Walk {
    pub fn new(graph: &SensingGraph, nodes: Vec<NodeId>) -> Result<Self> {
        let Some(&start) = nodes.first() else {
            return Err(Error::input("walk has no nodes"));
        };
        if !graph.is_user(start.0) {
            return Err(Error::input(format!("walk starts at non-user node {start}")));
        }
        for pair in nodes.windows(2) {
            if !graph.has_edge(pair[0].0, pair[1].0) {
                return Err(Error::input(format!(
                    "walk step {} -> {} is not a sensing edge",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Walk { nodes })
    }

    pub fn from_indices(graph: &SensingGraph, nodes: &[usize]) -> Result<Self> {
        Self::new(graph, nodes.iter().map(|&v| NodeId(v)).collect())
    }

    pub(crate) fn from_trusted(nodes: Vec<usize>) -> Self {
        Walk {
            nodes: nodes.into_iter().map(NodeId).collect(),
        }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    /// Number of edges traversed.
    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn indices(&self) -> Vec<usize> {
        self.nodes.iter().map(|v| v.0).collect()
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Ordered walks plus the augmentation factor `g` capping walks per start node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkSet {
    walks: Vec<Walk>,
    augmentation: usize,
}

impl WalkSet {
    pub fn new(walks: Vec<Walk>, augmentation: usize) -> Result<Self> {
        if augmentation == 0 {
            return Err(Error::input("augmentation factor must be >= 1"));
        }
        let mut per_start = std::collections::HashMap::new();
        for w in &walks {
            let c = per_start.entry(w.start()).or_insert(0usize);
            *c += 1;
            if *c > augmentation {
                return Err(Error::input(format!(
                    "start node {} used by more than g = {augmentation} walks",
                    w.start()
                )));
            }
        }
        Ok(WalkSet {
            walks,
            augmentation,
        })
    }

    pub fn empty(augmentation: usize) -> Self {
        WalkSet {
            walks: Vec::new(),
            augmentation: augmentation.max(1),
        }
    }

    pub fn walks(&self) -> &[Walk] {
        &self.walks
    }

    pub fn augmentation(&self) -> usize {
        self.augmentation
    }

    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    /// Sorted set of nodes visited by any walk.
    pub fn visited_nodes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .walks
            .iter()
            .flat_map(|w| w.nodes.iter().map(|v| v.0))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Checks every walk against `graph` (start is a user, steps are edges).
    pub fn check_against(&self, graph: &SensingGraph) -> Result<()> {
        for w in &self.walks {
            Walk::new(graph, w.nodes.clone())?;
        }
        Ok(())
    }

    /// Distinct start nodes in first-appearance order.
    pub fn starts(&self) -> Vec<NodeId> {
        let mut seen = HashSet::new();
        self.walks
            .iter()
            .map(|w| w.start())
            .filter(|s| seen.insert(*s))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SensingGraph {
        SensingGraph::new(3, 3, vec![(0, 1), (1, 2)]).unwrap()
    }

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    fn set(bits: &FixedBitSet) -> Vec<usize> {
        bits.ones().collect()
    }

    #[test]
    fn minimal_instance_is_valid() {
        let inst = Instance::new_unchecked(path3(), SocialGraph::empty(3), None, 1);
        assert!(validate(&inst).is_empty());
    }

    #[test]
    fn user_count_mismatch_is_reported_once() {
        let inst = Instance::new_unchecked(path3(), SocialGraph::empty(5), None, 1);
        let v = validate(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, "user_count mismatch");
    }

    #[test]
    fn preference_omitting_incident_edge_names_the_user() {
        let prefs = PreferenceProfile::new(vec![
            BTreeSet::new(),
            BTreeSet::from([0, 1]),
            BTreeSet::from([1]),
        ]);
        let inst = Instance::new_unchecked(path3(), SocialGraph::empty(3), Some(prefs), 1);
        let v = validate(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, "preference containment");
        assert!(v[0].detail.contains("v0"));
    }

    #[test]
    fn loops_and_duplicates_are_violations() {
        let g = SensingGraph::new(3, 3, vec![(0, 1), (1, 0), (2, 2)]).unwrap();
        let inst = Instance::new_unchecked(g, SocialGraph::empty(3), None, 1);
        let kinds: Vec<_> = validate(&inst).iter().map(|v| v.invariant).collect();
        assert_eq!(kinds, vec!["duplicate edge", "self-loop"]);

        let g = SensingGraph::new(3, 3, vec![(2, 2)]).unwrap().with_self_loops(true);
        let inst = Instance::new_unchecked(g, SocialGraph::empty(3), None, 1);
        assert!(validate(&inst).is_empty());
    }

    #[test]
    fn out_of_range_endpoints_fail_construction() {
        assert!(SensingGraph::new(2, 2, vec![(0, 2)]).is_err());
        assert!(SocialGraph::new(2, vec![(0, 3)]).is_err());
    }

    #[test]
    fn incident_edges_examples() {
        let g = path3();
        assert_eq!(set(&incident_edges(&g, &ids(&[1])).unwrap()), vec![0, 1]);
        assert!(incident_edges(&g, &[]).unwrap().is_clear());
        assert_eq!(set(&incident_edges(&g, &ids(&[0, 2])).unwrap()), vec![0, 1]);
        assert!(incident_edges(&g, &ids(&[3])).is_err());
    }

    #[test]
    fn social_neighborhood_examples() {
        let g = path3();
        let social = SocialGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let r1 = Instance::new(g.clone(), social.clone(), None, 1).unwrap();
        assert_eq!(
            social_neighborhood(&r1, NodeId(0)).unwrap(),
            BTreeSet::from([NodeId(1)])
        );
        let r2 = Instance::new(g.clone(), social, None, 2).unwrap();
        assert_eq!(
            social_neighborhood(&r2, NodeId(0)).unwrap(),
            BTreeSet::from([NodeId(1), NodeId(2)])
        );
        let lonely = Instance::simple(g, SocialGraph::empty(3)).unwrap();
        for u in 0..3 {
            assert!(social_neighborhood(&lonely, NodeId(u)).unwrap().is_empty());
        }
        assert!(social_neighborhood(&lonely, NodeId(3)).is_err());
    }

    #[test]
    fn selection_rejects_duplicates_and_range() {
        assert!(Selection::from_indices(&[0, 0], 3).is_err());
        assert!(Selection::from_indices(&[3], 3).is_err());
        assert_eq!(Selection::from_indices(&[2, 0], 3).unwrap().indices(), vec![2, 0]);
    }

    #[test]
    fn walk_validation() {
        let g = SensingGraph::new(4, 2, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(Walk::from_indices(&g, &[0, 1, 2]).is_ok());
        assert!(Walk::from_indices(&g, &[0, 2]).is_err());
        assert!(Walk::from_indices(&g, &[2, 1]).is_err(), "non-user start");
        let w = Walk::from_indices(&g, &[1, 0, 1]).unwrap();
        assert_eq!(w.hops(), 2);
    }

    #[test]
    fn walk_set_enforces_augmentation() {
        let g = path3();
        let a = Walk::from_indices(&g, &[1, 0]).unwrap();
        let b = Walk::from_indices(&g, &[1, 2]).unwrap();
        assert!(WalkSet::new(vec![a.clone(), b.clone()], 1).is_err());
        let ws = WalkSet::new(vec![a, b], 2).unwrap();
        assert_eq!(ws.visited_nodes(), vec![0, 1, 2]);
        assert_eq!(ws.starts(), vec![NodeId(1)]);
    }
}
