//! Matrix route for `Φ`.
//!
//! `A` is the sensing matrix (edge weights, zero diagonal unless the node
//! carries a loop) and `B` the social matrix (unit diagonal, one for every
//! pair of users within the sharing radius). Selecting a node sets its row of
//! `B` to all ones. For user `x`, column `x` of `B` marks the node set `U_x`
//! whose incident edges `x` can access; with `C = A·B`,
//!
//! ```text
//! φ_x = Σ_j c_{j,x} − ½ · (sum of the minor of A on U_x)
//! ```
//!
//! The column sum counts edges inside `U_x` twice and boundary edges once; the
//! minor sum is twice the inside weight. Loop entries appear once in both
//! terms, so the minor's diagonal is left out of the correction.
//!
//! Matrices are `ϖ×ϖ` over all sensing nodes. Rows and columns of non-user
//! nodes only ever matter through row updates (visited nodes); when every
//! node is a user this is the plain `m×m` construction.

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{Instance, SensingGraph, Selection, WalkSet};
use crate::welfare::WelfareBreakdown;

/// Symmetric sensing matrix `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    entries: DMatrix<f64>,
}

impl SensingMatrix {
    /// Builds `A` from every edge of `graph`.
    pub fn from_graph(graph: &SensingGraph) -> Self {
        Self::build(graph, None)
    }

    /// Builds `A^x` keeping only the edges in `interest`.
    pub fn from_interest(graph: &SensingGraph, interest: &FixedBitSet) -> Self {
        Self::build(graph, Some(interest))
    }

    fn build(graph: &SensingGraph, keep: Option<&FixedBitSet>) -> Self {
        let n = graph.node_count();
        let mut a = DMatrix::zeros(n, n);
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            if keep.is_some_and(|k| !k.contains(e)) {
                continue;
            }
            let w = graph.weight(e);
            a[(u, v)] = w;
            a[(v, u)] = w;
        }
        SensingMatrix { entries: a }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Principal minor on the (sorted) index set `keep`.
    pub fn minor(&self, keep: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(keep.len(), keep.len(), |i, j| self.entries[(keep[i], keep[j])])
    }

    /// Minor sum without its diagonal: twice the weight of non-loop edges inside `keep`.
    fn minor_off_diagonal_sum(&self, keep: &[usize]) -> f64 {
        let m = self.minor(keep);
        m.sum() - m.trace()
    }
}

/// Social matrix `B`, possibly with selection updates applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialMatrix {
    entries: DMatrix<f64>,
    updated_rows: Vec<bool>,
}

impl SocialMatrix {
    /// `ϖ×ϖ` matrix: identity, plus ones between users within the sharing radius.
    pub fn from_instance(instance: &Instance) -> Self {
        let n = instance.node_count();
        let mut b = DMatrix::identity(n, n);
        for x in 0..instance.user_count() {
            for &t in instance.closed_neighborhood(x) {
                b[(t, x)] = 1.0;
            }
        }
        SocialMatrix {
            entries: b,
            updated_rows: vec![false; n],
        }
    }

    /// Row `h` becomes all ones; columns are left as they are.
    pub fn set_row_ones(&mut self, h: usize) {
        self.entries.row_mut(h).fill(1.0);
        self.updated_rows[h] = true;
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_row_updated(&self, h: usize) -> bool {
        self.updated_rows[h]
    }

    /// Row indices of the zero entries of column `x`.
    pub fn sigma(&self, x: usize) -> Vec<usize> {
        (0..self.entries.nrows())
            .filter(|&t| self.entries[(t, x)] == 0.0)
            .collect()
    }

    /// Complement of [`Self::sigma`]: the node set user `x` draws from.
    pub fn kept(&self, x: usize) -> Vec<usize> {
        (0..self.entries.nrows())
            .filter(|&t| self.entries[(t, x)] != 0.0)
            .collect()
    }
}

fn user_term(a: &SensingMatrix, c: &DMatrix<f64>, b: &SocialMatrix, x: usize) -> f64 {
    let column_sum = c.column(x).sum();
    let keep = b.kept(x);
    column_sum - 0.5 * a.minor_off_diagonal_sum(&keep)
}

fn shared_a_welfare(instance: &Instance, b: &SocialMatrix) -> WelfareBreakdown {
    let a = SensingMatrix::from_graph(instance.sensing());
    let c = a.entries() * b.entries();
    let per_user = (0..instance.user_count())
        .map(|x| user_term(&a, &c, b, x))
        .collect();
    WelfareBreakdown::from_per_user(per_user)
}

fn require_no_preferences(instance: &Instance) -> Result<()> {
    if instance.preferences().is_some() {
        return Err(Error::input(
            "instance carries preferences; use phi_preferences_matrix",
        ));
    }
    Ok(())
}

fn updated_social(instance: &Instance, rows: impl IntoIterator<Item = usize>) -> SocialMatrix {
    let mut b = SocialMatrix::from_instance(instance);
    for h in rows {
        b.set_row_ones(h);
    }
    b
}

/// `Φ(∅)` from `C = A·B` and the per-user minor correction.
pub fn phi_empty_matrix(instance: &Instance) -> Result<WelfareBreakdown> {
    require_no_preferences(instance)?;
    Ok(shared_a_welfare(instance, &SocialMatrix::from_instance(instance)))
}

/// `Φ(S)` after applying the row update of every selected user in order.
pub fn phi_selection_matrix(instance: &Instance, selection: &Selection) -> Result<WelfareBreakdown> {
    require_no_preferences(instance)?;
    for u in selection.users() {
        instance.check_user(u.0)?;
    }
    let b = updated_social(instance, selection.users().iter().map(|u| u.0));
    Ok(shared_a_welfare(instance, &b))
}

fn preference_welfare(instance: &Instance, b: &SocialMatrix) -> Result<WelfareBreakdown> {
    let prefs = instance
        .preferences()
        .ok_or_else(|| Error::input("instance has no preference profile"))?;
    let g = instance.sensing();
    let per_user = (0..instance.user_count())
        .map(|x| {
            let ax = SensingMatrix::from_interest(g, &prefs.mask(x, g.edge_count()));
            let cx = ax.entries() * b.entries();
            user_term(&ax, &cx, b, x)
        })
        .collect();
    Ok(WelfareBreakdown::from_per_user(per_user))
}

/// Preference-aware `Φ(S)`: per user `x`, `C^x = A^x · B_S` with the minor taken from `A^x`.
pub fn phi_preferences_matrix(
    instance: &Instance,
    selection: &Selection,
) -> Result<WelfareBreakdown> {
    if instance.preferences().is_none() {
        return Err(Error::input("instance has no preference profile"));
    }
    for u in selection.users() {
        instance.check_user(u.0)?;
    }
    let b = updated_social(instance, selection.users().iter().map(|u| u.0));
    preference_welfare(instance, &b)
}

/// Walk-set welfare: the row of every visited node is set to ones.
pub fn phi_walks_matrix(instance: &Instance, walks: &WalkSet) -> Result<WelfareBreakdown> {
    walks.check_against(instance.sensing())?;
    let mut b = SocialMatrix::from_instance(instance);
    for w in walks.walks() {
        for v in w.nodes() {
            b.set_row_ones(v.0);
        }
    }
    if instance.preferences().is_some() {
        preference_welfare(instance, &b)
    } else {
        Ok(shared_a_welfare(instance, &b))
    }
}
