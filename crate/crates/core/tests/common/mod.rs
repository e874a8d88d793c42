//! Seeded random instances shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use poi_share::model::{Instance, PreferenceProfile, SensingGraph, Selection, SocialGraph, Walk, WalkSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub users: (usize, usize),
    /// Extra non-user sensing nodes, inclusive range.
    pub extra: (usize, usize),
    pub edge_p: f64,
    pub social_p: f64,
    pub preferences: bool,
    pub radius: (usize, usize),
}

impl Shape {
    pub fn all_users(lo: usize, hi: usize) -> Self {
        Shape {
            users: (lo, hi),
            extra: (0, 0),
            edge_p: 0.45,
            social_p: 0.25,
            preferences: false,
            radius: (1, 1),
        }
    }
}

pub fn random_pairs(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                out.push((u, v));
            }
        }
    }
    out
}

pub fn random_instance(rng: &mut impl Rng, shape: &Shape) -> Instance {
    let m = rng.random_range(shape.users.0..=shape.users.1);
    let n = m + rng.random_range(shape.extra.0..=shape.extra.1);
    let edges = random_pairs(rng, n, shape.edge_p);
    let sensing = SensingGraph::new(n, m, edges).unwrap();
    let social = SocialGraph::new(m, random_pairs(rng, m, shape.social_p)).unwrap();
    let prefs = shape.preferences.then(|| {
        PreferenceProfile::new(
            (0..m)
                .map(|u| {
                    // Own incident edges are always preferred; others at random.
                    (0..sensing.edge_count())
                        .filter(|&id| {
                            let (a, b) = sensing.edges()[id];
                            a == u || b == u || rng.random_bool(0.6)
                        })
                        .collect::<BTreeSet<usize>>()
                })
                .collect(),
        )
    });
    let radius = rng.random_range(shape.radius.0..=shape.radius.1);
    Instance::new(sensing, social, prefs, radius).unwrap()
}

pub fn random_selection(rng: &mut impl Rng, m: usize) -> Selection {
    let k = rng.random_range(0..=m);
    let mut users: Vec<usize> = (0..m).choose_multiple(rng, k);
    // Random order, since selection order must not matter.
    users.shuffle(rng);
    Selection::from_indices(&users, m).unwrap()
}

/// A random walk of `n` hops from a random user with at least one neighbor.
pub fn random_walk(rng: &mut impl Rng, inst: &Instance, n: usize) -> Option<Walk> {
    let g = inst.sensing();
    let start = (0..inst.user_count()).filter(|&u| g.degree(u) > 0).choose(rng)?;
    let mut seq = vec![start];
    for _ in 0..n {
        let nb = g.neighbors(*seq.last().unwrap());
        seq.push(nb[rng.random_range(0..nb.len())]);
    }
    Some(Walk::from_indices(g, &seq).unwrap())
}

pub fn random_walk_set(rng: &mut impl Rng, inst: &Instance, n: usize, count: usize) -> WalkSet {
    let walks: Vec<Walk> = (0..count).filter_map(|_| random_walk(rng, inst, n)).collect();
    WalkSet::new(walks, count.max(1)).unwrap()
}
