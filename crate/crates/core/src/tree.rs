//! Exact steady states on tree networks.
//!
//! On a tree every stage is a finite elimination, no iteration anywhere:
//! flows by repeated leaf elimination of the mass balance, compositions
//! by one pass in topological order of the flow-oriented graph, squared
//! pressures by propagation from the anchor node. The stages only feed
//! forward (q → η → p²), which is what makes the cut solver's repeated
//! evaluations cheap and bitwise deterministic.

use crate::error::{Error, Result};
use crate::graph::{flow_oriented, topological_order, tree_path, OrientedArc};
use crate::network::Network;
use crate::solution::{eta_edges_from_nodes, Solution};
use crate::{gas, solution};

fn require_tree(net: &Network) -> Result<()> {
    if net.is_tree() {
        return Ok(());
    }
    let reason = if net.n_edges() + 1 != net.n_nodes() {
        format!("{} independent cycles", net.cycle_count())
    } else {
        "graph is disconnected".to_string()
    };
    Err(Error::NotATree(reason))
}

/// Solve A·q = b exactly by leaf elimination: a leaf's single incident
/// edge must carry exactly the leaf's load, and removing the pair leaves
/// a smaller tree. Loads are only added and negated, never divided, so
/// integer data stays exact.
pub fn solve_flows(net: &Network) -> Result<Vec<f64>> {
    require_tree(net)?;

    let n = net.n_nodes();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, edge) in net.edges().iter().enumerate() {
        incident[edge.foot].push(e);
        incident[edge.head].push(e);
    }
    let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
    let mut residual_load = net.loads();
    let mut resolved = vec![false; net.n_edges()];
    let mut q = vec![0.0; net.n_edges()];

    let mut leaves: std::collections::VecDeque<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = leaves.pop_front() {
        if degree[v] != 1 {
            continue; // became interior-free after its last edge resolved
        }
        let e = *incident[v]
            .iter()
            .find(|&&e| !resolved[e])
            .expect("leaf with degree 1 has an unresolved edge");
        // Mass balance at the leaf: a(v, e)·q_e = b_v  ⇒  q_e = a(v, e)·b_v.
        q[e] = net.incidence_entry(v, e) * residual_load[v];
        resolved[e] = true;
        residual_load[v] = 0.0;
        degree[v] = 0;

        let edge = &net.edges()[e];
        let w = if edge.foot == v { edge.head } else { edge.foot };
        residual_load[w] -= net.incidence_entry(w, e) * q[e];
        degree[w] -= 1;
        if degree[w] == 1 {
            leaves.push_back(w);
        }
    }

    debug_assert!(resolved.iter().all(|&r| r));
    Ok(q)
}

/// Warning text used when a node has neither inflow nor supply, so the
/// mixing balance is 0/0 and the composition is defaulted to 0.
fn dead_node_warning(id: &str) -> String {
    format!("composition undefined at node '{id}' (no inflow and no supply); defaulting to 0")
}

/// Node compositions by perfect mixing, evaluated in one pass over the
/// topological order of the flow-oriented graph:
///
///   η_v = (Σ_in η_upstream·|q_e| + ζ_v·b⁻_v) / (Σ_in |q_e| + b⁻_v),
///
/// where b⁻ = max(−b, 0) and the inflow sums run over arcs pointing at v.
/// A node with zero denominator (no inflow, no supply — only possible on
/// degenerate flow patterns) is assigned η = 0 and a warning rather than
/// an error, so boundary studies can sweep through such states.
pub fn solve_compositions(net: &Network, q: &[f64]) -> Result<(Vec<f64>, Vec<String>)> {
    let arcs = flow_oriented(net, q);
    let order = topological_order(net, &arcs)?;
    compositions_in_order(net, q, &arcs, &order)
}

/// As [`solve_compositions`], but with a caller-supplied elimination
/// order (which must be a topological order of the flow-oriented arcs).
/// The mixing balance has a unique solution, so any valid order must
/// produce the same compositions; exposing the order makes that property
/// testable.
pub fn solve_compositions_in_order(
    net: &Network,
    q: &[f64],
    order: &[usize],
) -> Result<(Vec<f64>, Vec<String>)> {
    let arcs = flow_oriented(net, q);
    compositions_in_order(net, q, &arcs, order)
}

fn compositions_in_order(
    net: &Network,
    q: &[f64],
    arcs: &[OrientedArc],
    order: &[usize],
) -> Result<(Vec<f64>, Vec<String>)> {
    let n = net.n_nodes();
    let mut inflow: Vec<Vec<&OrientedArc>> = vec![Vec::new(); n];
    for arc in arcs {
        inflow[arc.tip].push(arc);
    }

    let mut eta = vec![f64::NAN; n];
    let mut warnings = Vec::new();
    for &v in order {
        let mut num = 0.0;
        let mut den = 0.0;
        for arc in &inflow[v] {
            let magnitude = q[arc.edge].abs();
            num += eta[arc.tail] * magnitude;
            den += magnitude;
        }
        let node = &net.nodes()[v];
        if node.load < 0.0 {
            let injection = -node.load;
            num += node.supply_composition.unwrap_or(0.0) * injection;
            den += injection;
        }
        if den == 0.0 {
            eta[v] = 0.0;
            warnings.push(dead_node_warning(&node.id));
        } else {
            eta[v] = num / den;
        }
    }

    if eta.iter().any(|x| x.is_nan()) {
        // The order did not cover every upstream dependency.
        return Err(Error::CyclicFlow);
    }
    Ok((eta, warnings))
}

/// Squared pressures by propagation from the pressure anchor across the
/// tree: downstream of the anchor the drop law p²_head − p²_foot = σ̃·q·|q|
/// is applied forward, upstream it is inverted (pressure can only grow
/// against the flow, so infeasibility is always detected on a downstream
/// step). Fails with the first edge whose length exceeds the critical
/// length at its inlet pressure.
pub fn solve_pressures(net: &Network, q: &[f64], eta_edge: &[f64]) -> Result<Vec<f64>> {
    require_tree(net)?;
    let (anchor, p_star) = net.anchor().ok_or(Error::Invalid {
        violations: vec![crate::error::Violation::AnchorCount { count: 0 }],
    })?;

    let n = net.n_nodes();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, edge) in net.edges().iter().enumerate() {
        adjacency[edge.foot].push((edge.head, e));
        adjacency[edge.head].push((edge.foot, e));
    }

    let mut p2 = vec![f64::NAN; n];
    p2[anchor] = p_star * p_star;
    let mut queue = std::collections::VecDeque::from([anchor]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adjacency[v] {
            if !p2[w].is_nan() {
                continue;
            }
            let edge = &net.edges()[e];
            let drop = gas::pressure_drop_squared(
                net.gas(),
                eta_edge[e],
                eta_edge[e],
                q[e],
                edge.length,
                edge.diameter,
                edge.friction,
            );
            // drop = p²(head) − p²(foot) ≤ 0 for q ≥ 0 and ≥ 0 for q < 0.
            p2[w] = if w == edge.head {
                p2[v] + drop
            } else {
                p2[v] - drop
            };
            if p2[w] <= 0.0 || p2[w].is_nan() {
                let (upstream, _) = if q[e] >= 0.0 {
                    (edge.foot, edge.head)
                } else {
                    (edge.head, edge.foot)
                };
                return Err(Error::Infeasible {
                    edge: edge.id.clone(),
                    length: edge.length,
                    critical_length: gas::critical_length(
                        net.gas(),
                        p2[upstream],
                        eta_edge[e],
                        q[e],
                        edge.diameter,
                        edge.friction,
                    ),
                    p2: p2[w],
                });
            }
            queue.push_back(w);
        }
    }

    debug_assert!(p2.iter().all(|x| !x.is_nan()));
    Ok(p2)
}

/// Full steady state of a tree network: flows, compositions, pressures.
pub fn solve_tree(net: &Network) -> Result<Solution> {
    let q = solve_flows(net)?;
    let (eta_node, warnings) = solve_compositions(net, &q)?;
    let eta_edge = eta_edges_from_nodes(net, &q, &eta_node);
    let p2 = solve_pressures(net, &q, &eta_edge)?;
    solution::Solution::from_parts(net, q, eta_node, p2, warnings)
}

/// Signed transfer of flow along a path: for consecutive path nodes
/// (v_i, v_{i+1}) joined by edge e, the contribution of q_e oriented
/// from v_i towards v_{i+1}. Used by the cut solver to read off path
/// flows; lives here because it is a pure tree operation.
pub fn path_flow_signs(net: &Network, from: usize, to: usize) -> Result<Vec<(usize, f64)>> {
    let (nodes, edges) = tree_path(net, from, to)?;
    Ok(edges
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let edge = &net.edges()[e];
            // +1 if the edge points along the walk direction.
            let sign = if edge.foot == nodes[i] { 1.0 } else { -1.0 };
            (e, sign)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::GasConstants;
    use crate::network::{EdgeSpec, NodeSpec, PipeDefaults};
    use approx::assert_relative_eq;

    fn unit_gas() -> GasConstants {
        GasConstants {
            sigma2_h2: 8.0,
            sigma2_ng: 1.0,
        }
    }

    struct Builder {
        nodes: Vec<NodeSpec>,
        edges: Vec<EdgeSpec>,
    }

    impl Builder {
        fn new() -> Self {
            Builder {
                nodes: Vec::new(),
                edges: Vec::new(),
            }
        }

        fn supply(mut self, id: &str, load: f64, zeta: f64) -> Self {
            self.nodes.push(NodeSpec {
                id: id.into(),
                load,
                supply_composition: Some(zeta),
                pressure_anchor: None,
            });
            self
        }

        fn demand(mut self, id: &str, load: f64) -> Self {
            self.nodes.push(NodeSpec {
                id: id.into(),
                load,
                supply_composition: None,
                pressure_anchor: None,
            });
            self
        }

        fn anchor(mut self, id: &str, p: f64) -> Self {
            let node = self
                .nodes
                .iter_mut()
                .find(|n| n.id == id)
                .expect("anchor node exists");
            node.pressure_anchor = Some(p);
            self
        }

        fn pipe(mut self, id: &str, foot: &str, head: &str, length: f64, friction: f64) -> Self {
            self.edges.push(EdgeSpec {
                id: id.into(),
                foot: foot.into(),
                head: head.into(),
                length,
                diameter: Some(1.0),
                friction: Some(friction),
            });
            self
        }

        fn build(self) -> Network {
            Network::new(self.nodes, self.edges, unit_gas(), PipeDefaults::default()).unwrap()
        }
    }

    /// a(−3) ──e1──▶ b(+1) ──e2──▶ c(+2), anchored at a.
    fn three_node_path() -> Network {
        Builder::new()
            .supply("a", -3.0, 0.0)
            .demand("b", 1.0)
            .demand("c", 2.0)
            .anchor("a", 10.0)
            .pipe("e1", "a", "b", 2.0, 0.5)
            .pipe("e2", "b", "c", 1.0, 0.5)
            .build()
    }

    #[test]
    fn leaf_elimination_recovers_path_flows() {
        let net = three_node_path();
        let q = solve_flows(&net).unwrap();
        assert_eq!(q, vec![3.0, 2.0]);
    }

    #[test]
    fn flows_respect_edge_orientation() {
        // Same path but with the second pipe flipped: flow becomes −2.
        let net = Builder::new()
            .supply("a", -3.0, 0.0)
            .demand("b", 1.0)
            .demand("c", 2.0)
            .anchor("a", 10.0)
            .pipe("e1", "a", "b", 2.0, 0.5)
            .pipe("e2", "c", "b", 1.0, 0.5)
            .build();
        let q = solve_flows(&net).unwrap();
        assert_eq!(q, vec![3.0, -2.0]);
    }

    #[test]
    fn flows_reject_non_trees() {
        let net = Builder::new()
            .supply("a", -1.0, 0.0)
            .demand("b", 1.0)
            .anchor("a", 10.0)
            .pipe("p1", "a", "b", 1.0, 0.5)
            .pipe("p2", "a", "b", 1.0, 0.5)
            .build();
        assert!(matches!(solve_flows(&net), Err(Error::NotATree(_))));
    }

    #[test]
    fn mixing_averages_inflows_and_supply() {
        // Two supplies and a local injection meet at m:
        // 1 unit at η = 0.9, 2 units at η = 0.3, supply of 1 at ζ = 0.6
        // ⇒ η_m = (0.9 + 0.6 + 0.6) / 4 = 0.525.
        let net = Builder::new()
            .supply("s1", -1.0, 0.9)
            .supply("s2", -2.0, 0.3)
            .supply("m", -1.0, 0.6)
            .demand("d", 4.0)
            .anchor("s1", 10.0)
            .pipe("e1", "s1", "m", 1.0, 0.5)
            .pipe("e2", "s2", "m", 1.0, 0.5)
            .pipe("e3", "m", "d", 1.0, 0.5)
            .build();
        let q = solve_flows(&net).unwrap();
        assert_eq!(q, vec![1.0, 2.0, 4.0]);
        let (eta, warnings) = solve_compositions(&net, &q).unwrap();
        assert!(warnings.is_empty());
        let m = net.node_idx("m").unwrap();
        let d = net.node_idx("d").unwrap();
        assert_relative_eq!(eta[m], 0.525, epsilon = 1e-15);
        assert_relative_eq!(eta[d], 0.525, epsilon = 1e-15);
        // Downstream pipe carries the mixture.
        let eta_edge = eta_edges_from_nodes(&net, &q, &eta);
        assert_relative_eq!(eta_edge[2], 0.525, epsilon = 1e-15);
    }

    #[test]
    fn dead_node_gets_zero_composition_and_warning() {
        // c carries no load; its pipe to b is stagnant, so nothing ever
        // reaches c and its mixing balance is 0/0.
        let net = Builder::new()
            .supply("a", -1.0, 0.8)
            .demand("b", 1.0)
            .demand("c", 0.0)
            .anchor("a", 10.0)
            .pipe("e1", "a", "b", 1.0, 0.5)
            .pipe("e2", "c", "b", 1.0, 0.5)
            .build();
        let q = solve_flows(&net).unwrap();
        assert_eq!(q, vec![1.0, 0.0]);
        let (eta, warnings) = solve_compositions(&net, &q).unwrap();
        assert_eq!(eta[net.node_idx("c").unwrap()], 0.0);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("'c'"));
        // The stagnant pipe must not dilute b.
        assert_relative_eq!(eta[net.node_idx("b").unwrap()], 0.8);
    }

    #[test]
    fn compositions_are_order_independent() {
        let net = Builder::new()
            .supply("s1", -1.0, 0.9)
            .supply("s2", -2.0, 0.3)
            .demand("m", 0.0)
            .demand("d", 3.0)
            .anchor("s1", 10.0)
            .pipe("e1", "s1", "m", 1.0, 0.5)
            .pipe("e2", "s2", "m", 1.0, 0.5)
            .pipe("e3", "m", "d", 1.0, 0.5)
            .build();
        let q = solve_flows(&net).unwrap();
        let arcs = flow_oriented(&net, &q);
        let reference = solve_compositions(&net, &q).unwrap().0;
        // Any topological order must give identical results; build one
        // with the reversed tie-break.
        let mut ranks = crate::graph::id_ranks(&net);
        let max = ranks.iter().copied().max().unwrap();
        for r in &mut ranks {
            *r = max - *r;
        }
        let alt_order =
            crate::graph::topological_order_by_rank(net.n_nodes(), &arcs, &ranks).unwrap();
        let alt = solve_compositions_in_order(&net, &q, &alt_order).unwrap().0;
        assert_eq!(reference, alt);
    }

    #[test]
    fn pressures_drop_along_the_flow() {
        let net = three_node_path();
        let q = solve_flows(&net).unwrap();
        let (eta, _) = solve_compositions(&net, &q).unwrap();
        let eta_edge = eta_edges_from_nodes(&net, &q, &eta);
        let p2 = solve_pressures(&net, &q, &eta_edge).unwrap();
        // σ̃(e1) = −(0.5/1)·2·1 = −1   ⇒ p²_b = 100 − 1·9 = 91
        // σ̃(e2) = −(0.5/1)·1·1 = −0.5 ⇒ p²_c = 91 − 0.5·4 = 89
        assert_relative_eq!(p2[0], 100.0);
        assert_relative_eq!(p2[1], 91.0);
        assert_relative_eq!(p2[2], 89.0);
    }

    #[test]
    fn anchor_position_does_not_change_the_profile() {
        let mut reference = three_node_path();
        let q = solve_flows(&reference).unwrap();
        let (eta, _) = solve_compositions(&reference, &q).unwrap();
        let eta_edge = eta_edges_from_nodes(&reference, &q, &eta);
        let p2_from_a = solve_pressures(&reference, &q, &eta_edge).unwrap();

        // Re-anchor at the far end with the pressure found there: the
        // propagation now runs upstream and must reproduce the profile.
        reference = Builder::new()
            .supply("a", -3.0, 0.0)
            .demand("b", 1.0)
            .demand("c", 2.0)
            .anchor("c", p2_from_a[2].sqrt())
            .pipe("e1", "a", "b", 2.0, 0.5)
            .pipe("e2", "b", "c", 1.0, 0.5)
            .build();
        let p2_from_c = solve_pressures(&reference, &q, &eta_edge).unwrap();
        for (x, y) in p2_from_a.iter().zip(&p2_from_c) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn infeasible_pipe_reports_edge_and_critical_length() {
        // Stretch the first pipe beyond its reach: with q = 3, η = 0,
        // σ̃ per unit length = 0.5, the inlet p² = 100 supports at most
        // L = 100 / (0.5·9) ≈ 22.22.
        let net = Builder::new()
            .supply("a", -3.0, 0.0)
            .demand("b", 1.0)
            .demand("c", 2.0)
            .anchor("a", 10.0)
            .pipe("e1", "a", "b", 25.0, 0.5)
            .pipe("e2", "b", "c", 1.0, 0.5)
            .build();
        let q = solve_flows(&net).unwrap();
        let (eta, _) = solve_compositions(&net, &q).unwrap();
        let eta_edge = eta_edges_from_nodes(&net, &q, &eta);
        let err = solve_pressures(&net, &q, &eta_edge).unwrap_err();
        match &err {
            Error::Infeasible {
                edge,
                length,
                critical_length,
                ..
            } => {
                assert_eq!(edge, "e1");
                assert_eq!(*length, 25.0);
                assert_relative_eq!(*critical_length, 100.0 / 4.5, epsilon = 1e-12);
            }
            other => panic!("expected Infeasible, got {other:?}"),
        }
        assert!(err.to_string().contains("e1"));
        assert!(err.to_string().contains("critical length"));
    }

    #[test]
    fn solve_tree_produces_consistent_solution() {
        let net = three_node_path();
        let sol = solve_tree(&net).unwrap();
        assert_eq!(sol.q, vec![3.0, 2.0]);
        assert_eq!(sol.eta_node, vec![0.0, 0.0, 0.0]);
        assert_relative_eq!(sol.p[2], 89.0f64.sqrt());
        assert!(sol.warnings.is_empty());
        for (p, p2) in sol.p.iter().zip(&sol.p2) {
            assert_relative_eq!(p * p, p2, max_relative = 1e-15);
        }
    }

    #[test]
    fn path_flow_signs_follow_walk_direction() {
        let net = three_node_path();
        let a = net.node_idx("a").unwrap();
        let c = net.node_idx("c").unwrap();
        let forward = path_flow_signs(&net, a, c).unwrap();
        assert_eq!(forward, vec![(0, 1.0), (1, 1.0)]);
        let backward = path_flow_signs(&net, c, a).unwrap();
        assert_eq!(backward, vec![(1, -1.0), (0, -1.0)]);
    }
}
