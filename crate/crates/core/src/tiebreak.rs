use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How a greedy step chooses among candidates with equal marginal gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Smallest candidate index (users by index, walks in lexicographic order).
    #[default]
    LowestIndex,
    HighestIndex,
    /// Uniform choice among the tied maxima, reproducible from the seed.
    Seeded(u64),
}

/// Stateful chooser; one per solver run.
pub(crate) struct Chooser {
    rule: TieBreak,
    rng: Option<ChaCha8Rng>,
}

impl Chooser {
    pub(crate) fn new(rule: TieBreak) -> Self {
        let rng = match rule {
            TieBreak::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Chooser { rule, rng }
    }

    /// Picks from `(index, gain)` pairs given in ascending index order.
    pub(crate) fn pick(&mut self, scored: impl IntoIterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
        let mut best = f64::NEG_INFINITY;
        let mut tied: Vec<usize> = Vec::new();
        for (i, g) in scored {
            if g > best {
                best = g;
                tied.clear();
                tied.push(i);
            } else if g == best {
                tied.push(i);
            }
        }
        if tied.is_empty() {
            return None;
        }
        let i = match self.rule {
            TieBreak::LowestIndex => tied[0],
            TieBreak::HighestIndex => *tied.last().unwrap(),
            TieBreak::Seeded(_) => {
                let rng = self.rng.as_mut().expect("seeded chooser has an rng");
                tied[rng.random_range(0..tied.len())]
            }
        };
        Some((i, best))
    }
}
