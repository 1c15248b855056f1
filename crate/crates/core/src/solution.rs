//! The common steady-state solution record produced by every solver.

use crate::error::{Error, Result};
use crate::network::Network;

/// A steady state of a network: per-edge flows, per-node and per-edge
/// hydrogen fractions, and nodal pressures (stored squared, since every
/// relation is affine in p²; the square roots are kept alongside for
/// reporting).
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Flow q_e on each edge, signed relative to foot → head.
    pub q: Vec<f64>,
    /// Hydrogen fraction η_v at each node.
    pub eta_node: Vec<f64>,
    /// Hydrogen fraction η_e of the gas inside each edge (the upstream
    /// node's composition).
    pub eta_edge: Vec<f64>,
    /// Squared pressure p²_v at each node.
    pub p2: Vec<f64>,
    /// Pressure p_v at each node.
    pub p: Vec<f64>,
    /// Non-fatal solver notes (e.g. compositions defaulted at dead nodes).
    pub warnings: Vec<String>,
}

/// Edge compositions induced by node compositions and flow signs:
/// η_e = η_foot if q_e ≥ 0, else η_head (the gas in a pipe is the gas
/// entering it).
pub fn eta_edges_from_nodes(net: &Network, q: &[f64], eta_node: &[f64]) -> Vec<f64> {
    net.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            if q[e] >= 0.0 {
                eta_node[edge.foot]
            } else {
                eta_node[edge.head]
            }
        })
        .collect()
}

impl Solution {
    /// Assemble a solution from flows, node compositions and squared
    /// pressures. Fails if any squared pressure is not positive (no
    /// physical pressure exists there).
    pub fn from_parts(
        net: &Network,
        q: Vec<f64>,
        eta_node: Vec<f64>,
        p2: Vec<f64>,
        warnings: Vec<String>,
    ) -> Result<Solution> {
        if let Some((v, &bad)) = p2
            .iter()
            .enumerate()
            .find(|&(_, &x)| x <= 0.0 || x.is_nan())
        {
            return Err(Error::NegativePressure {
                node: net.nodes()[v].id.clone(),
                p2: bad,
            });
        }
        let eta_edge = eta_edges_from_nodes(net, &q, &eta_node);
        let p = p2.iter().map(|x| x.sqrt()).collect();
        Ok(Solution {
            q,
            eta_node,
            eta_edge,
            p2,
            p,
            warnings,
        })
    }
}
