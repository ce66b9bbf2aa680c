use serde::{Deserialize, Serialize};

use super::Chain;
use crate::error::{GreyError, Result};

/// Empirical moments and quantiles of one chain node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node: String,
    pub mean: f64,
    pub sd: f64,
    pub q2_5: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q97_5: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub nodes: Vec<NodeSummary>,
    pub deviance: NodeSummary,
}

impl PosteriorSummary {
    pub fn node(&self, name: &str) -> Option<&NodeSummary> {
        self.nodes.iter().find(|n| n.node == name)
    }

    /// Parameter nodes followed by deviance, in table order.
    pub fn rows(&self) -> impl Iterator<Item = &NodeSummary> {
        self.nodes.iter().chain(std::iter::once(&self.deviance))
    }
}

/// Linear interpolation between order statistics (`h = (n − 1)·p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_values(node: &str, values: &[f64]) -> Result<NodeSummary> {
    if values.is_empty() {
        return Err(GreyError::Domain(format!("node `{node}` has no draws")));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(NodeSummary {
        node: node.to_string(),
        mean,
        sd,
        q2_5: quantile(&sorted, 0.025),
        q25: quantile(&sorted, 0.25),
        q50: quantile(&sorted, 0.5),
        q75: quantile(&sorted, 0.75),
        q97_5: quantile(&sorted, 0.975),
        samples: n,
    })
}

pub fn summarize(chain: &Chain) -> Result<PosteriorSummary> {
    if chain.is_empty() {
        return Err(GreyError::Domain("chain has no retained draws".into()));
    }
    let nodes = chain
        .nodes
        .iter()
        .enumerate()
        .map(|(i, name)| summarize_values(name, &chain.node_values(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorSummary { nodes, deviance: summarize_values("deviance", &chain.deviance)? })
}
