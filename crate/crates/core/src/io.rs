//! Canonical instance file format: one UTF-8 JSON document.
//!
//! ```json
//! {
//!   "node_count": 3,
//!   "user_count": 3,
//!   "sensing_edges": [[0, 1], [1, 2]],
//!   "social_edges": [],
//!   "social_hop_radius": 1
//! }
//! ```
//!
//! `edge_weights`, `preferences` and `allow_self_loops` are optional and
//! omitted when absent, so a round trip through [`InstanceDoc`] is lossless.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, Instance, PreferenceProfile, SensingGraph, SocialGraph, Violation};

fn default_radius() -> usize {
    1
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub node_count: usize,
    pub user_count: usize,
    pub sensing_edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub social_edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preferences: Option<Vec<Vec<usize>>>,
    #[serde(default = "default_radius")]
    pub social_hop_radius: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_self_loops: bool,
}

impl InstanceDoc {
    pub fn from_instance(inst: &Instance) -> Self {
        let g = inst.sensing();
        InstanceDoc {
            node_count: g.node_count(),
            user_count: g.user_count(),
            sensing_edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            edge_weights: g.weights().map(<[f64]>::to_vec),
            social_edges: inst.social().edges().iter().map(|&(u, v)| [u, v]).collect(),
            preferences: inst
                .preferences()
                .map(|p| p.per_user().iter().map(|s| s.iter().copied().collect()).collect()),
            social_hop_radius: inst.social_hop_radius(),
            allow_self_loops: g.allows_self_loops(),
        }
    }

    /// All invariant violations of this document, including out-of-range endpoints.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (e, &[u, v]) in self.sensing_edges.iter().enumerate() {
            if u >= self.node_count || v >= self.node_count {
                out.push(Violation {
                    invariant: "edge endpoint range",
                    detail: format!("sensing edge {e} = ({u},{v}), node_count {}", self.node_count),
                });
            }
        }
        for (e, &[u, v]) in self.social_edges.iter().enumerate() {
            if u >= self.user_count || v >= self.user_count {
                out.push(Violation {
                    invariant: "edge endpoint range",
                    detail: format!("social edge {e} = ({u},{v}), user_count {}", self.user_count),
                });
            }
        }
        if !out.is_empty() {
            return out;
        }
        match self.build_unchecked() {
            Ok(inst) => validate(&inst),
            Err(e) => vec![Violation {
                invariant: "structure",
                detail: e.to_string(),
            }],
        }
    }

    fn build_unchecked(&self) -> Result<Instance> {
        let edges = self.sensing_edges.iter().map(|&[u, v]| (u, v)).collect();
        let mut sensing = SensingGraph::new(self.node_count, self.user_count, edges)?
            .with_self_loops(self.allow_self_loops);
        if let Some(w) = &self.edge_weights {
            sensing = sensing.with_weights(w.clone())?;
        }
        let social = SocialGraph::new(
            self.user_count,
            self.social_edges.iter().map(|&[u, v]| (u, v)).collect(),
        )?;
        let prefs = self.preferences.as_ref().map(|p| {
            PreferenceProfile::new(
                p.iter()
                    .map(|edges| edges.iter().copied().collect::<BTreeSet<_>>())
                    .collect(),
            )
        });
        Ok(Instance::new_unchecked(
            sensing,
            social,
            prefs,
            self.social_hop_radius,
        ))
    }

    pub fn into_instance(self) -> Result<Instance> {
        let violations = self.violations();
        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations));
        }
        self.build_unchecked()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn read_doc(path: &Path) -> Result<InstanceDoc> {
    InstanceDoc::from_json(&fs::read_to_string(path)?)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    read_doc(path)?.into_instance()
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    fs::write(path, InstanceDoc::from_instance(inst).to_json()?)?;
    Ok(())
}
