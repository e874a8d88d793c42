//! Welfare evaluation.
//!
//! For a set `X` of broadcasting nodes (selected users, or every node visited
//! by a walk set) user `v_i` can access the edges incident to
//! `{v_i} ∪ N2(v_i) ∪ X`, intersected with its preference set when one is
//! given. `φ_i` is the total weight of those edges and `Φ` is their average
//! over users.
//!
//! Two independent routes compute this: the set route here (edge-set unions)
//! and the matrix route in [`matrix`]. Under uniform weights every quantity is
//! a sum of small integers held in `f64`, so the two routes agree exactly.

pub mod matrix;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{incident_edges, Instance, NodeId, Selection, Walk, WalkSet};

pub use matrix::{
    phi_empty_matrix, phi_preferences_matrix, phi_selection_matrix, phi_walks_matrix,
    SensingMatrix, SocialMatrix,
};

/// Per-user accessible PoI amounts and their average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareBreakdown {
    pub per_user: Vec<f64>,
    pub average: f64,
}

impl WelfareBreakdown {
    pub fn from_per_user(per_user: Vec<f64>) -> Self {
        let average = if per_user.is_empty() {
            0.0
        } else {
            per_user.iter().sum::<f64>() / per_user.len() as f64
        };
        WelfareBreakdown { per_user, average }
    }

    /// `m · Φ`; integral under uniform weights.
    pub fn total(&self) -> f64 {
        self.per_user.iter().sum()
    }
}

/// Which implementation evaluates `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalRoute {
    #[default]
    Set,
    Matrix,
}

fn preference_masks(instance: &Instance) -> Option<Vec<FixedBitSet>> {
    let edges = instance.sensing().edge_count();
    instance
        .preferences()
        .map(|p| (0..instance.user_count()).map(|i| p.mask(i, edges)).collect())
}

/// Set-route welfare when the nodes in `extra` broadcast to every user.
fn phi_with_broadcast(instance: &Instance, extra: &[NodeId]) -> Result<WelfareBreakdown> {
    let g = instance.sensing();
    let broadcast = incident_edges(g, extra)?;
    let masks = preference_masks(instance);
    let per_user = (0..instance.user_count())
        .map(|i| {
            let own: Vec<NodeId> = instance
                .closed_neighborhood(i)
                .iter()
                .map(|&u| NodeId(u))
                .collect();
            let mut reach = incident_edges(g, &own)?;
            reach.union_with(&broadcast);
            if let Some(m) = &masks {
                reach.intersect_with(&m[i]);
            }
            Ok(g.weight_of(&reach))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WelfareBreakdown::from_per_user(per_user))
}

/// Welfare of a static selection, computed purely from edge-set unions.
pub fn phi_set_oracle(instance: &Instance, selection: &Selection) -> Result<WelfareBreakdown> {
    for u in selection.users() {
        instance.check_user(u.0)?;
    }
    phi_with_broadcast(instance, selection.users())
}

/// Welfare of a walk set (set route): every visited node broadcasts.
pub fn phi_walks(instance: &Instance, walks: &WalkSet) -> Result<WelfareBreakdown> {
    walks.check_against(instance.sensing())?;
    let visited: Vec<NodeId> = walks.visited_nodes().into_iter().map(NodeId).collect();
    phi_with_broadcast(instance, &visited)
}

/// Static welfare by the requested route. The matrix route dispatches to the
/// preference-aware algorithm when the instance carries preferences.
pub fn evaluate_selection(
    instance: &Instance,
    selection: &Selection,
    route: EvalRoute,
) -> Result<WelfareBreakdown> {
    match route {
        EvalRoute::Set => phi_set_oracle(instance, selection),
        EvalRoute::Matrix if instance.preferences().is_some() => {
            phi_preferences_matrix(instance, selection)
        }
        EvalRoute::Matrix => phi_selection_matrix(instance, selection),
    }
}

pub fn evaluate_walks(
    instance: &Instance,
    walks: &WalkSet,
    route: EvalRoute,
) -> Result<WelfareBreakdown> {
    match route {
        EvalRoute::Set => phi_walks(instance, walks),
        EvalRoute::Matrix => phi_walks_matrix(instance, walks),
    }
}

/// `Φ(current ∪ {candidate}) − Φ(current)`. Re-adding a selected user gains 0.
pub fn marginal_gain_user(
    instance: &Instance,
    current: &Selection,
    candidate: NodeId,
) -> Result<f64> {
    instance.check_user(candidate.0)?;
    let before = phi_set_oracle(instance, current)?;
    if current.contains(candidate) {
        return Ok(0.0);
    }
    let mut next = current.clone();
    next.push(candidate)?;
    let after = phi_set_oracle(instance, &next)?;
    Ok((after.total() - before.total()) / instance.user_count() as f64)
}

/// `Φ(current ∪ {walk}) − Φ(current)`; fails if the walk breaks the start-node cap.
pub fn marginal_gain_walk(instance: &Instance, current: &WalkSet, candidate: &Walk) -> Result<f64> {
    let mut walks = current.walks().to_vec();
    walks.push(candidate.clone());
    let next = WalkSet::new(walks, current.augmentation())?;
    let before = phi_walks(instance, current)?;
    let after = phi_walks(instance, &next)?;
    Ok((after.total() - before.total()) / instance.user_count() as f64)
}

/// Incremental set-route evaluator: tracks, per user, which edges of interest
/// are still not accessible. Gains are reported as totals (`m · ΔΦ`).
#[derive(Debug, Clone)]
pub struct CoverageState<'a> {
    instance: &'a Instance,
    uncovered: Vec<FixedBitSet>,
    per_user: Vec<f64>,
    broadcasting: FixedBitSet,
    weighted: bool,
}

impl<'a> CoverageState<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let g = instance.sensing();
        let masks = preference_masks(instance);
        let mut uncovered = Vec::with_capacity(instance.user_count());
        let mut per_user = Vec::with_capacity(instance.user_count());
        for i in 0..instance.user_count() {
            let mut reach = g.empty_edge_set();
            for &u in instance.closed_neighborhood(i) {
                for &e in g.incident(u) {
                    reach.insert(e);
                }
            }
            let mut interest = match &masks {
                Some(m) => m[i].clone(),
                None => {
                    let mut all = g.empty_edge_set();
                    all.insert_range(..);
                    all
                }
            };
            reach.intersect_with(&interest);
            per_user.push(g.weight_of(&reach));
            interest.difference_with(&reach);
            uncovered.push(interest);
        }
        CoverageState {
            instance,
            uncovered,
            per_user,
            broadcasting: FixedBitSet::with_capacity(g.node_count()),
            weighted: g.is_weighted(),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    fn new_edges(&self, nodes: &[usize]) -> Option<FixedBitSet> {
        let g = self.instance.sensing();
        let mut d: Option<FixedBitSet> = None;
        for &v in nodes {
            if self.broadcasting.contains(v) {
                continue;
            }
            let set = d.get_or_insert_with(|| g.empty_edge_set());
            for &e in g.incident(v) {
                set.insert(e);
            }
        }
        d
    }

    /// Total welfare gain (summed over users) if `nodes` start broadcasting.
    pub fn gain(&self, nodes: &[usize]) -> f64 {
        let Some(d) = self.new_edges(nodes) else {
            return 0.0;
        };
        let g = self.instance.sensing();
        if self.weighted {
            self.uncovered
                .iter()
                .map(|u| d.intersection(u).map(|e| g.weight(e)).sum::<f64>())
                .sum()
        } else {
            self.uncovered
                .iter()
                .map(|u| d.intersection_count(u) as f64)
                .sum()
        }
    }

    pub fn add(&mut self, nodes: &[usize]) {
        let Some(d) = self.new_edges(nodes) else {
            return;
        };
        let g = self.instance.sensing();
        for (u, phi) in self.uncovered.iter_mut().zip(self.per_user.iter_mut()) {
            let gained: f64 = if self.weighted {
                d.intersection(u).map(|e| g.weight(e)).sum()
            } else {
                d.intersection_count(u) as f64
            };
            *phi += gained;
            u.difference_with(&d);
        }
        for &v in nodes {
            self.broadcasting.insert(v);
        }
    }

    pub fn total(&self) -> f64 {
        self.per_user.iter().sum()
    }

    pub fn average(&self) -> f64 {
        self.total() / self.per_user.len() as f64
    }

    pub fn breakdown(&self) -> WelfareBreakdown {
        WelfareBreakdown::from_per_user(self.per_user.clone())
    }
}

/// Checks that two breakdowns agree: exactly under uniform weights, within
/// `1e-9` per entry otherwise.
pub fn breakdowns_agree(a: &WelfareBreakdown, b: &WelfareBreakdown, exact: bool) -> bool {
    if a.per_user.len() != b.per_user.len() {
        return false;
    }
    let close = |x: f64, y: f64| {
        if exact {
            x == y
        } else {
            (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()))
        }
    };
    a.per_user
        .iter()
        .zip(&b.per_user)
        .all(|(&x, &y)| close(x, y))
        && close(a.average, b.average)
}

/// Fails with [`Error::Crosscheck`] unless the set and matrix routes agree.
pub fn crosscheck_selection(instance: &Instance, selection: &Selection) -> Result<WelfareBreakdown> {
    let set = evaluate_selection(instance, selection, EvalRoute::Set)?;
    let mat = evaluate_selection(instance, selection, EvalRoute::Matrix)?;
    if breakdowns_agree(&set, &mat, !instance.sensing().is_weighted()) {
        Ok(set)
    } else {
        Err(Error::Crosscheck(format!(
            "set route Φ = {} but matrix route Φ = {} for selection {:?}",
            set.average,
            mat.average,
            selection.indices()
        )))
    }
}

pub fn crosscheck_walks(instance: &Instance, walks: &WalkSet) -> Result<WelfareBreakdown> {
    let set = phi_walks(instance, walks)?;
    let mat = phi_walks_matrix(instance, walks)?;
    if breakdowns_agree(&set, &mat, !instance.sensing().is_weighted()) {
        Ok(set)
    } else {
        Err(Error::Crosscheck(format!(
            "set route Φ = {} but matrix route Φ = {} for walks",
            set.average, mat.average
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SensingGraph, SocialGraph};

    fn path3(social: Vec<(usize, usize)>) -> Instance {
        Instance::simple(
            SensingGraph::new(3, 3, vec![(0, 1), (1, 2)]).unwrap(),
            SocialGraph::new(3, social).unwrap(),
        )
        .unwrap()
    }

    fn sel(v: &[usize]) -> Selection {
        Selection::from_indices(v, 3).unwrap()
    }

    #[test]
    fn oracle_hand_counts() {
        let inst = path3(vec![]);
        let w = phi_set_oracle(&inst, &Selection::empty()).unwrap();
        assert_eq!(w.per_user, vec![1.0, 2.0, 1.0]);
        assert_eq!(w.average, 4.0 / 3.0);

        let w = phi_set_oracle(&inst, &sel(&[1])).unwrap();
        assert_eq!(w.per_user, vec![2.0, 2.0, 2.0]);
        assert_eq!(w.average, 2.0);

        let complete = path3(vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(phi_set_oracle(&complete, &Selection::empty()).unwrap().average, 2.0);
    }

    #[test]
    fn oracle_rejects_bad_selection_index() {
        let inst = path3(vec![]);
        let bogus = Selection::from_indices(&[5], 10).unwrap();
        assert!(phi_set_oracle(&inst, &bogus).is_err());
    }

    #[test]
    fn marginal_gain_examples() {
        let inst = path3(vec![]);
        let g = marginal_gain_user(&inst, &Selection::empty(), NodeId(1)).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(marginal_gain_user(&inst, &sel(&[1]), NodeId(1)).unwrap(), 0.0);
    }

    #[test]
    fn walk_gain_respects_augmentation() {
        let inst = path3(vec![]);
        let g = inst.sensing();
        let w01 = Walk::from_indices(g, &[0, 1]).unwrap();
        let w10 = Walk::from_indices(g, &[0, 1]).unwrap();
        let current = WalkSet::new(vec![w01], 1).unwrap();
        assert!(marginal_gain_walk(&inst, &current, &w10).is_err());
        let gain = marginal_gain_walk(&inst, &WalkSet::empty(1), &w10).unwrap();
        assert!((gain - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn walks_cover_visited_nodes() {
        let inst = path3(vec![]);
        let w = Walk::from_indices(inst.sensing(), &[0, 1]).unwrap();
        let ws = WalkSet::new(vec![w], 1).unwrap();
        assert_eq!(phi_walks(&inst, &ws).unwrap().average, 2.0);
        assert_eq!(
            phi_walks(&inst, &WalkSet::empty(1)).unwrap(),
            phi_set_oracle(&inst, &Selection::empty()).unwrap()
        );
    }

    #[test]
    fn coverage_state_tracks_oracle() {
        let inst = path3(vec![(0, 2)]);
        let mut st = CoverageState::new(&inst);
        let base = phi_set_oracle(&inst, &Selection::empty()).unwrap();
        assert_eq!(st.breakdown(), base);
        let gain = st.gain(&[1]);
        st.add(&[1]);
        let after = phi_set_oracle(&inst, &sel(&[1])).unwrap();
        assert_eq!(st.breakdown(), after);
        assert_eq!(gain, after.total() - base.total());
        assert_eq!(st.gain(&[1]), 0.0);
    }
}
