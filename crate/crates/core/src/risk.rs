//! Node risk from weighted factors or from network connectivity.

use serde::{Deserialize, Serialize};

use crate::error::{GridError, RiskError};
use crate::grid::{Network, NodeId};

/// Lowest risk ever returned, so demand is never scaled to zero.
pub const RISK_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Internal,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Controllability {
    Controllable,
    Uncontrollable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskFactor {
    pub name: String,
    pub origin: Origin,
    pub controllability: Controllability,
    /// In [0, 1].
    pub score: f64,
    /// Non-negative.
    pub weight: f64,
}

impl RiskFactor {
    pub fn new(name: impl Into<String>, score: f64, weight: f64) -> Self {
        Self {
            name: name.into(),
            origin: Origin::Internal,
            controllability: Controllability::Controllable,
            score,
            weight,
        }
    }
}

/// Weighted mean of the scores, clamped to `[RISK_FLOOR, 1]`.
///
/// Factors are summed in a canonical order so the result does not depend on
/// how they are listed.
pub fn score_risk(factors: &[RiskFactor]) -> Result<f64, RiskError> {
    for f in factors {
        if !(0.0..=1.0).contains(&f.score) || !(f.weight >= 0.0) || !f.weight.is_finite() {
            return Err(RiskError::InvalidFactor(f.name.clone()));
        }
    }
    let mut terms: Vec<(f64, f64)> = factors.iter().map(|f| (f.weight, f.score)).collect();
    terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let total: f64 = terms.iter().map(|t| t.0).sum();
    if total <= 0.0 {
        return Err(RiskError::ZeroWeights);
    }
    let weighted: f64 = terms.iter().map(|(w, s)| w * s).sum();
    Ok((weighted / total).clamp(RISK_FLOOR, 1.0))
}

/// Degree of `node` over the largest degree in the network, floored at
/// [`RISK_FLOOR`].
pub fn risk_from_connections(network: &Network, node: NodeId) -> Result<f64, GridError> {
    if network.node(node).is_none() {
        return Err(GridError::UnknownNode(node));
    }
    let max = network
        .nodes
        .iter()
        .map(|n| network.degree(n.id))
        .max()
        .unwrap_or(0);
    if max == 0 {
        return Ok(RISK_FLOOR);
    }
    let r = network.degree(node) as f64 / max as f64;
    Ok(r.clamp(RISK_FLOOR, 1.0))
}
