//! Shared fixtures and checks for the integration suites.

#![allow(dead_code)] // each test binary uses its own subset

use blendgas::gas::{self, GasConstants};
use blendgas::graph::{self, OrientedArc};
use blendgas::network::{EdgeSpec, Network, NodeSpec, PipeDefaults};
use blendgas::{io, Solution};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Bundled instance files live at the workspace root.
pub fn instance_path(name: &str) -> String {
    format!("{}/../../networks/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn table1() -> Network {
    io::load_network(instance_path("table1_cycle.json")).expect("bundled instance loads")
}

pub fn diamond() -> Network {
    io::load_network(instance_path("diamond.json")).expect("bundled instance loads")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer loads summing to zero: a few supplies of −1..−4 units each,
/// the same total spread over the other nodes one unit at a time (so
/// zero-demand junctions occur naturally). Supply compositions are
/// quarter-step fractions; one random node carries the pressure anchor.
fn assign_boundary(rng: &mut ChaCha8Rng, nodes: &mut [NodeSpec]) {
    let n = nodes.len();
    let n_supplies = rng.gen_range(1..=3.min(n - 1));
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let (supplies, demands) = ids.split_at(n_supplies);

    let mut total = 0i64;
    for &v in supplies {
        let s = rng.gen_range(1..=4);
        total += s;
        nodes[v].load = -(s as f64);
        nodes[v].supply_composition = Some(rng.gen_range(0..=4) as f64 / 4.0);
    }
    for _ in 0..total {
        let v = demands[rng.gen_range(0..demands.len())];
        nodes[v].load += 1.0;
    }
    // p* = 250 keeps every pressure positive even at the transfer-bracket
    // endpoints, where a cut pushes the whole supply total through one
    // side (cumulative squared-pressure drops stay ≲ 10³ ≪ p*²), while
    // one ulp of p*² is ~7·10⁻¹² — an order of magnitude below the 1e−10
    // bisection target, so the target stays reachable in floating point.
    nodes[rng.gen_range(0..n)].pressure_anchor = Some(250.0);
}

/// Generated instances use the same unitless gas constants as the
/// bundled ones (σ²_H2 = 8, σ²_NG = 1), keeping squared-pressure drops
/// commensurate with the anchor chosen in [`assign_boundary`].
fn unit_gas() -> GasConstants {
    GasConstants {
        sigma2_h2: 8.0,
        sigma2_ng: 1.0,
    }
}

fn blank_nodes(n: usize) -> Vec<NodeSpec> {
    (0..n)
        .map(|v| NodeSpec {
            id: format!("n{v:02}"),
            load: 0.0,
            supply_composition: None,
            pressure_anchor: None,
        })
        .collect()
}

fn random_tree_edges(rng: &mut ChaCha8Rng, n: usize) -> Vec<EdgeSpec> {
    (1..n)
        .map(|v| {
            let parent = rng.gen_range(0..v);
            let (foot, head) = if rng.gen_bool(0.5) {
                (parent, v)
            } else {
                (v, parent)
            };
            EdgeSpec {
                id: format!("e{v:02}"),
                foot: format!("n{foot:02}"),
                head: format!("n{head:02}"),
                length: 0.5 + rng.gen::<f64>(),
                diameter: None,
                friction: None,
            }
        })
        .collect()
}

/// Random connected tree with ≤ `max_nodes` nodes and integer loads.
pub fn random_tree(rng: &mut ChaCha8Rng, max_nodes: usize) -> Network {
    let n = rng.gen_range(2..=max_nodes);
    let mut nodes = blank_nodes(n);
    let edges = random_tree_edges(rng, n);
    assign_boundary(rng, &mut nodes);
    Network::new(nodes, edges, unit_gas(), PipeDefaults::default())
        .expect("generated tree is valid")
}

/// Random network with exactly one independent cycle: a tree plus one
/// extra edge between two distinct nodes (parallel pipes allowed).
pub fn random_single_cycle(rng: &mut ChaCha8Rng, max_nodes: usize) -> Network {
    let n = rng.gen_range(3..=max_nodes);
    let mut nodes = blank_nodes(n);
    let mut edges = random_tree_edges(rng, n);
    let foot = rng.gen_range(0..n);
    let head = loop {
        let w = rng.gen_range(0..n);
        if w != foot {
            break w;
        }
    };
    edges.push(EdgeSpec {
        id: "x99".into(),
        foot: format!("n{foot:02}"),
        head: format!("n{head:02}"),
        length: 0.5 + rng.gen::<f64>(),
        diameter: None,
        friction: None,
    });
    assign_boundary(rng, &mut nodes);
    Network::new(nodes, edges, unit_gas(), PipeDefaults::default())
        .expect("generated single-cycle network is valid")
}

/// Flows below this magnitude count as "no gas moving" for the circular
/// flow check; solver tolerances sit three orders of magnitude lower.
pub const FLOW_EPS: f64 = 1e-12;

/// No cycle of the network is traversed consistently by the flow.
pub fn assert_no_circular_flow(net: &Network, sol: &Solution) {
    let arcs: Vec<OrientedArc> = graph::flow_oriented(net, &sol.q)
        .into_iter()
        .filter(|arc| sol.q[arc.edge].abs() > FLOW_EPS)
        .collect();
    graph::topological_order_by_rank(net.n_nodes(), &arcs, &graph::id_ranks(net))
        .expect("flow-oriented graph must be acyclic");
}

/// Node and edge compositions lie in [0, 1] up to solver tolerance.
pub fn assert_eta_in_bounds(sol: &Solution) {
    for (what, etas) in [("node", &sol.eta_node), ("edge", &sol.eta_edge)] {
        for (i, &eta) in etas.iter().enumerate() {
            assert!(
                (-1e-6..=1.0 + 1e-6).contains(&eta),
                "{what} composition {i} out of bounds: {eta}"
            );
        }
    }
}

/// Hydrogen entering each node (pipes + injection) equals hydrogen
/// leaving it (pipes + withdrawal) within 1e−6.
pub fn assert_hydrogen_conserved(net: &Network, sol: &Solution) {
    for (v, node) in net.nodes().iter().enumerate() {
        let mut balance = if node.load < 0.0 {
            -node.load * node.supply_composition.unwrap_or(0.0)
        } else {
            -node.load * sol.eta_node[v]
        };
        for (e, _) in net.edges().iter().enumerate() {
            let a = net.incidence_entry(v, e);
            if a != 0.0 {
                balance += a * sol.q[e] * sol.eta_edge[e];
            }
        }
        assert!(
            balance.abs() < 1e-6,
            "hydrogen imbalance {balance:e} at node {}",
            node.id
        );
    }
}

/// Every pipe satisfies the squared-pressure drop law within 1e−9.
pub fn assert_pressure_consistent(net: &Network, sol: &Solution) {
    for (e, edge) in net.edges().iter().enumerate() {
        let drop = gas::pressure_drop_squared(
            net.gas(),
            sol.eta_node[edge.foot],
            sol.eta_node[edge.head],
            sol.q[e],
            edge.length,
            edge.diameter,
            edge.friction,
        );
        let gap = sol.p2[edge.head] - sol.p2[edge.foot] - drop;
        assert!(
            gap.abs() < 1e-9,
            "pressure law violated on {} by {gap:e}",
            edge.id
        );
    }
}

/// The four structural invariants every steady state must satisfy.
pub fn assert_structural_invariants(net: &Network, sol: &Solution) {
    assert_no_circular_flow(net, sol);
    assert_eta_in_bounds(sol);
    assert_hydrogen_conserved(net, sol);
    assert_pressure_consistent(net, sol);
}
