mod common;

use std::collections::BTreeSet;

use itertools::Itertools;
use proptest::prelude::*;
use rand::Rng;

use common::{random_instance, random_selection, random_walk_set, rng, Shape};
use poi_share::coverage::{max_coverage, CoverageMode, DEFAULT_ENUMERATION_CAP, GREEDY_COVERAGE_RATIO};
use poi_share::mobile::{adjusted_gps, enumerate_walks, gps, MobileConfig, WalkMode};
use poi_share::model::{incident_edges, social_neighborhood, Instance, NodeId, SensingGraph, Selection, SocialGraph, WalkSet};
use poi_share::static_solver::{brute_force_static, gus, ub1, SolveConfig};
use poi_share::welfare::{
    breakdowns_agree, evaluate_selection, phi_set_oracle, phi_walks, phi_walks_matrix, EvalRoute, SensingMatrix,
    SocialMatrix,
};

fn ids(v: &[usize]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}

fn shape_with(preferences: bool, extra: usize, radius: usize) -> Shape {
    Shape {
        users: (1, 9),
        extra: (0, extra),
        edge_p: 0.4,
        social_p: 0.25,
        preferences,
        radius: (1, radius),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn incident_edges_monotone_and_inclusion_exclusion(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(false, 2, 1));
        let g = inst.sensing();
        let n = g.node_count();
        let a: Vec<usize> = (0..n).filter(|_| r.random_bool(0.4)).collect();
        let b: Vec<usize> = (0..n).filter(|_| r.random_bool(0.4)).collect();
        let ab: Vec<usize> = a.iter().chain(&b).copied().unique().collect();
        let ea = incident_edges(g, &ids(&a)).unwrap();
        let eb = incident_edges(g, &ids(&b)).unwrap();
        let eab = incident_edges(g, &ids(&ab)).unwrap();
        prop_assert!(ea.is_subset(&eab) && eb.is_subset(&eab));
        prop_assert_eq!(
            eab.count_ones(..),
            ea.count_ones(..) + eb.count_ones(..) - ea.intersection_count(&eb)
        );
    }

    #[test]
    fn social_radius_composes(seed in any::<u64>(), radius in 1usize..4) {
        let mut r = rng(seed);
        let base = random_instance(&mut r, &shape_with(false, 0, 1));
        let inst = base.with_hop_radius(radius).unwrap();
        let one = base.with_hop_radius(1).unwrap();
        for u in 0..inst.user_count() {
            let mut reach: BTreeSet<usize> = BTreeSet::from([u]);
            for _ in 0..radius {
                let next: Vec<usize> = reach
                    .iter()
                    .flat_map(|&v| social_neighborhood(&one, NodeId(v)).unwrap())
                    .map(|v| v.0)
                    .collect();
                reach.extend(next);
            }
            reach.remove(&u);
            let got: BTreeSet<usize> = social_neighborhood(&inst, NodeId(u)).unwrap().into_iter().map(|v| v.0).collect();
            prop_assert_eq!(got, reach);
        }
    }

    #[test]
    fn matrix_route_equals_set_route(seed in any::<u64>(), prefs in any::<bool>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(prefs, 3, 2));
        let sel = random_selection(&mut r, inst.user_count());
        let set = evaluate_selection(&inst, &sel, EvalRoute::Set).unwrap();
        let mat = evaluate_selection(&inst, &sel, EvalRoute::Matrix).unwrap();
        prop_assert_eq!(set, mat);
    }

    #[test]
    fn weighted_routes_agree_within_tolerance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let base = random_instance(&mut r, &shape_with(false, 2, 1));
        let g = base.sensing();
        let weights: Vec<f64> = (0..g.edge_count()).map(|_| r.random_range(0.1..5.0)).collect();
        let sensing = SensingGraph::new(g.node_count(), g.user_count(), g.edges().to_vec())
            .unwrap()
            .with_weights(weights)
            .unwrap();
        let inst = Instance::new(sensing, base.social().clone(), None, 1).unwrap();
        let sel = random_selection(&mut r, inst.user_count());
        let set = evaluate_selection(&inst, &sel, EvalRoute::Set).unwrap();
        let mat = evaluate_selection(&inst, &sel, EvalRoute::Matrix).unwrap();
        prop_assert!(breakdowns_agree(&set, &mat, false));
    }

    #[test]
    fn walk_routes_agree(seed in any::<u64>(), n in 1usize..4, count in 0usize..4, prefs in any::<bool>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(prefs, 3, 2));
        let walks = random_walk_set(&mut r, &inst, n, count);
        prop_assert_eq!(phi_walks(&inst, &walks).unwrap(), phi_walks_matrix(&inst, &walks).unwrap());
    }

    #[test]
    fn monotone_and_submodular(seed in any::<u64>(), prefs in any::<bool>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(prefs, 0, 1));
        let m = inst.user_count();
        let t = random_selection(&mut r, m);
        let s_users: Vec<usize> = t.indices().into_iter().filter(|_| r.random_bool(0.5)).collect();
        let s = Selection::from_indices(&s_users, m).unwrap();
        let total = |sel: &Selection| phi_set_oracle(&inst, sel).unwrap().total();
        let with = |sel: &Selection, v: usize| {
            let mut x = sel.clone();
            if !x.contains(NodeId(v)) {
                x.push(NodeId(v)).unwrap();
            }
            x
        };
        for v in 0..m {
            let gs = total(&with(&s, v)) - total(&s);
            let gt = total(&with(&t, v)) - total(&t);
            prop_assert!(gs >= 0.0 && gt >= 0.0);
            prop_assert!(gs >= gt, "gain at S {} < gain at T {}", gs, gt);
        }
    }

    #[test]
    fn selection_order_does_not_matter(seed in any::<u64>(), prefs in any::<bool>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(prefs, 2, 2));
        let sel = random_selection(&mut r, inst.user_count());
        let mut rev = sel.indices();
        rev.reverse();
        let rev = Selection::from_indices(&rev, inst.user_count()).unwrap();
        for route in [EvalRoute::Set, EvalRoute::Matrix] {
            prop_assert_eq!(
                evaluate_selection(&inst, &sel, route).unwrap(),
                evaluate_selection(&inst, &rev, route).unwrap()
            );
        }
    }

    #[test]
    fn column_sums_classify_edges(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(false, 2, 2));
        let a = SensingMatrix::from_graph(inst.sensing());
        let b = SocialMatrix::from_instance(&inst);
        let c = a.entries() * b.entries();
        for x in 0..inst.user_count() {
            let ball: BTreeSet<usize> = inst.closed_neighborhood(x).iter().copied().collect();
            let (mut inside, mut boundary) = (0.0, 0.0);
            for &(u, v) in inst.sensing().edges() {
                match (ball.contains(&u), ball.contains(&v)) {
                    (true, true) => inside += 1.0,
                    (true, false) | (false, true) => boundary += 1.0,
                    _ => {}
                }
            }
            prop_assert_eq!(c.column(x).sum(), 2.0 * inside + boundary);
            let keep: Vec<usize> = ball.iter().copied().collect();
            prop_assert_eq!(0.5 * a.minor(&keep).sum(), inside);
        }
    }

    #[test]
    fn welfare_is_at_most_total_edges(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(false, 2, 1));
        let sel = random_selection(&mut r, inst.user_count());
        let w = phi_set_oracle(&inst, &sel).unwrap();
        let e1 = inst.sensing().edge_count() as f64;
        prop_assert!(w.per_user.iter().all(|&p| (0.0..=e1).contains(&p)));
        let mut broadcast: Vec<usize> = sel.indices();
        let everyone_covered = (0..inst.user_count()).all(|i| {
            broadcast.extend_from_slice(inst.closed_neighborhood(i));
            let covered = incident_edges(inst.sensing(), &ids(&broadcast)).unwrap().count_ones(..);
            broadcast.truncate(sel.len());
            covered == inst.sensing().edge_count()
        });
        prop_assert_eq!(w.average == e1, everyone_covered);
    }

    #[test]
    fn same_visited_nodes_same_welfare(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(false, 2, 1));
        let walks = random_walk_set(&mut r, &inst, 2, 3);
        // Reversed walks from user-node ends visit the same nodes.
        let g = inst.sensing();
        let mut reversed = Vec::new();
        for w in walks.walks() {
            let mut seq = w.indices();
            seq.reverse();
            if !g.is_user(seq[0]) {
                seq.reverse();
            }
            reversed.push(poi_share::model::Walk::from_indices(g, &seq).unwrap());
        }
        let other = WalkSet::new(reversed, walks.augmentation()).unwrap();
        prop_assert_eq!(other.visited_nodes(), walks.visited_nodes());
        prop_assert_eq!(phi_walks(&inst, &walks).unwrap(), phi_walks(&inst, &other).unwrap());
    }

    #[test]
    fn walk_enumeration_matches_cartesian_product(seed in any::<u64>(), n in 1usize..4, simple in any::<bool>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &Shape { users: (1, 6), ..shape_with(false, 1, 1) });
        let g = inst.sensing();
        let mode = if simple { WalkMode::SimplePaths } else { WalkMode::Walks };
        let space = enumerate_walks(&inst, n, mode).unwrap();
        let expected: Vec<Vec<usize>> = (0..=n)
            .map(|_| 0..g.node_count())
            .multi_cartesian_product()
            .filter(|s| g.is_user(s[0]))
            .filter(|s| s.windows(2).all(|p| g.has_edge(p[0], p[1])))
            .filter(|s| !simple || s.iter().all_unique())
            .collect();
        let got: Vec<Vec<usize>> = space.candidates.iter().map(|w| w.indices()).collect();
        prop_assert_eq!(got, expected);
        prop_assert!(space.len() as f64 <= (g.node_count() as f64).powi(n as i32 + 1));
    }

    #[test]
    fn greedy_trace_and_routes(seed in any::<u64>(), prefs in any::<bool>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(prefs, 2, 1));
        let k = r.random_range(1..=inst.user_count());
        let set = gus(&inst, &SolveConfig::new(k)).unwrap();
        let mat = gus(&inst, &SolveConfig::new(k).with_route(EvalRoute::Matrix)).unwrap();
        prop_assert_eq!(&set.selection, &mat.selection);
        prop_assert_eq!(&set.welfare, &mat.welfare);
        prop_assert!(set.trace.windows(2).all(|w| w[0].gain >= w[1].gain));
    }

    #[test]
    fn ub1_dominates_and_greedy_coverage_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &shape_with(false, 0, 1));
        let k = r.random_range(1..=inst.user_count().min(4));
        let opt = brute_force_static(&inst, k, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!(ub1(&inst, k) >= opt.welfare.average);
        let users: Vec<usize> = (0..inst.user_count()).collect();
        let exact = max_coverage(inst.sensing(), &users, k, CoverageMode::Exact, DEFAULT_ENUMERATION_CAP).unwrap();
        let greedy = max_coverage(inst.sensing(), &users, k, CoverageMode::Greedy, 0).unwrap();
        prop_assert!(greedy.covered >= GREEDY_COVERAGE_RATIO * exact.covered);
    }

    #[test]
    fn adjusted_walks_keep_welfare(seed in any::<u64>(), n in 1usize..3) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &Shape::all_users(2, 7));
        let users_with_edges = (0..inst.user_count()).filter(|&u| inst.sensing().degree(u) > 0).count();
        prop_assume!(users_with_edges >= 1);
        let k = r.random_range(1..=users_with_edges.min(3));
        let cfg = MobileConfig::new(n, k, k);
        let base = gps(&inst, &cfg).unwrap();
        let adj = adjusted_gps(&inst, &cfg).unwrap();
        prop_assert_eq!(adj.walks.starts().len(), k);
        prop_assert_eq!(adj.walks.len(), k);
        prop_assert_eq!(adj.welfare, base.welfare);
    }
}

#[test]
fn full_social_sharing_covers_everything() {
    let g = SensingGraph::new(3, 3, vec![(0, 1), (1, 2)]).unwrap();
    let inst = Instance::simple(g, SocialGraph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap()).unwrap();
    assert_eq!(phi_set_oracle(&inst, &Selection::empty()).unwrap().average, 2.0);
}
