//! Graph algorithms on networks: flow orientation, topological order,
//! fundamental cycle basis, tree paths.
//!
//! Everything here is deterministic. Where an algorithm has freedom
//! (order among ready nodes in a topological sort, choice of spanning
//! tree), ties are broken by node id (ascending, lexicographic) or by
//! edge input order, so repeated runs and parallel sweeps see identical
//! results.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::network::Network;

/// An edge re-oriented along the direction of flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedArc {
    /// Upstream node (gas leaves here).
    pub tail: usize,
    /// Downstream node (gas arrives here).
    pub tip: usize,
    /// Index of the underlying edge.
    pub edge: usize,
    /// True iff the arc runs against the edge's foot → head direction.
    pub reversed: bool,
}

/// Re-orient every edge along its flow: q ≥ 0 keeps foot → head,
/// q < 0 flips it. Zero-flow edges keep their nominal direction; they
/// carry no gas, so the choice cannot affect any mixing result.
pub fn flow_oriented(net: &Network, q: &[f64]) -> Vec<OrientedArc> {
    net.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            if q[e] >= 0.0 {
                OrientedArc {
                    tail: edge.foot,
                    tip: edge.head,
                    edge: e,
                    reversed: false,
                }
            } else {
                OrientedArc {
                    tail: edge.head,
                    tip: edge.foot,
                    edge: e,
                    reversed: true,
                }
            }
        })
        .collect()
}

/// Rank of each node in the ascending lexicographic order of node ids.
/// Used as the deterministic tie-break for topological sorts.
pub fn id_ranks(net: &Network) -> Vec<usize> {
    let mut by_id: Vec<usize> = (0..net.n_nodes()).collect();
    by_id.sort_by(|&a, &b| net.nodes()[a].id.cmp(&net.nodes()[b].id));
    let mut ranks = vec![0; net.n_nodes()];
    for (rank, &v) in by_id.iter().enumerate() {
        ranks[v] = rank;
    }
    ranks
}

/// Topological order of the flow-oriented graph, ties broken by node id
/// ascending. Fails with [`Error::CyclicFlow`] if the arcs contain a
/// directed cycle (gas running in a circle), which no steady state with
/// friction admits.
pub fn topological_order(net: &Network, arcs: &[OrientedArc]) -> Result<Vec<usize>> {
    topological_order_by_rank(net.n_nodes(), arcs, &id_ranks(net))
}

/// Kahn's algorithm with an explicit tie-break ranking (lowest rank
/// first among ready nodes). Exposed so callers can check that results
/// downstream of the order do not depend on the tie-break.
pub fn topological_order_by_rank(
    n_nodes: usize,
    arcs: &[OrientedArc],
    ranks: &[usize],
) -> Result<Vec<usize>> {
    let mut out = vec![Vec::new(); n_nodes];
    let mut in_degree = vec![0usize; n_nodes];
    for arc in arcs {
        out[arc.tail].push(arc.tip);
        in_degree[arc.tip] += 1;
    }

    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..n_nodes)
        .filter(|&v| in_degree[v] == 0)
        .map(|v| Reverse((ranks[v], v)))
        .collect();

    let mut order = Vec::with_capacity(n_nodes);
    while let Some(Reverse((_, v))) = ready.pop() {
        order.push(v);
        for &w in &out[v] {
            in_degree[w] -= 1;
            if in_degree[w] == 0 {
                ready.push(Reverse((ranks[w], w)));
            }
        }
    }

    if order.len() == n_nodes {
        Ok(order)
    } else {
        Err(Error::CyclicFlow)
    }
}

/// One cycle of the fundamental basis. `edges[i]` connects `nodes[i]`
/// and `nodes[(i + 1) % len]` (in either direction); the two vectors
/// have equal length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Fundamental cycle basis from a BFS spanning forest: one cycle per
/// non-tree edge, |E| − |V| + #components in total. Cycles are listed in
/// increasing index order of their closing edge.
pub fn fundamental_cycles(net: &Network) -> Vec<Cycle> {
    let n = net.n_nodes();
    let mut adjacency = vec![Vec::new(); n];
    for (e, edge) in net.edges().iter().enumerate() {
        adjacency[edge.foot].push((edge.head, e));
        adjacency[edge.head].push((edge.foot, e));
    }

    let mut parent_node = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut tree_edge = vec![false; net.n_edges()];

    let mut queue = std::collections::VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent_node[w] = v;
                    parent_edge[w] = e;
                    depth[w] = depth[v] + 1;
                    tree_edge[e] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    let mut cycles = Vec::new();
    for (e, edge) in net.edges().iter().enumerate() {
        if tree_edge[e] {
            continue;
        }
        // Walk both endpoints up to their lowest common ancestor.
        let (mut u, mut w) = (edge.foot, edge.head);
        let mut nu = vec![u];
        let mut eu = Vec::new();
        let mut nw = vec![w];
        let mut ew = Vec::new();
        while depth[u] > depth[w] {
            eu.push(parent_edge[u]);
            u = parent_node[u];
            nu.push(u);
        }
        while depth[w] > depth[u] {
            ew.push(parent_edge[w]);
            w = parent_node[w];
            nw.push(w);
        }
        while u != w {
            eu.push(parent_edge[u]);
            u = parent_node[u];
            nu.push(u);
            ew.push(parent_edge[w]);
            w = parent_node[w];
            nw.push(w);
        }

        // nu = foot .. lca, nw = head .. lca. Traverse foot → lca → head,
        // then close with e back to the foot.
        let mut nodes = nu;
        nodes.extend(nw.iter().rev().skip(1));
        let mut edges = eu;
        edges.extend(ew.iter().rev());
        edges.push(e);
        debug_assert_eq!(nodes.len(), edges.len());
        cycles.push(Cycle { nodes, edges });
    }
    cycles
}

/// Unique path between two nodes of a tree (BFS; on non-tree graphs this
/// returns a shortest path by hop count). The result lists the visited
/// nodes and, aligned between consecutive nodes, the traversed edges.
pub fn tree_path(net: &Network, from: usize, to: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = net.n_nodes();
    let mut adjacency = vec![Vec::new(); n];
    for (e, edge) in net.edges().iter().enumerate() {
        adjacency[edge.foot].push((edge.head, e));
        adjacency[edge.head].push((edge.foot, e));
    }

    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &(w, e) in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some((v, e));
                queue.push_back(w);
            }
        }
    }
    if !seen[to] {
        return Err(Error::NotATree(format!(
            "no path between nodes '{}' and '{}'",
            net.nodes()[from].id,
            net.nodes()[to].id
        )));
    }

    let mut nodes = vec![to];
    let mut edges = Vec::new();
    let mut v = to;
    while v != from {
        let (p, e) = parent[v].expect("visited node has a parent");
        edges.push(e);
        nodes.push(p);
        v = p;
    }
    nodes.reverse();
    edges.reverse();
    Ok((nodes, edges))
}
