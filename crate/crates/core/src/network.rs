//! Directed pipe networks: construction, validation, incidence, cuts.
//!
//! Node and edge ids are strings; internally both are resolved to dense
//! indices in input order, and all solver arrays are indexed by those.
//! Edges are directed (foot → head); the direction fixes the sign of the
//! flow variable, not the physical flow.
//!
//! Sign conventions used throughout the crate:
//! * incidence a(v, e) = −1 if v is the foot of e, +1 if v is the head;
//! * mass balance at v:  Σ_e a(v, e)·q_e = b_v, so a(v, e)·q_e > 0 means
//!   flow into v;
//! * loads b_v are negative at supplies (injection) and positive at
//!   demands (withdrawal).

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result, Violation};
use crate::gas::{self, GasConstants};

/// Absolute tolerance (scaled by the largest |load|) for the zero-sum
/// load check. The sum is accumulated with Kahan compensation, so the
/// check is stable even for many small loads.
const LOAD_SUM_TOL: f64 = 1e-12;

/// Raw node description as it appears in an instance file.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: String,
    /// Load b_v: negative = supply (injection), positive = demand.
    pub load: f64,
    /// Hydrogen fraction ζ_v of the injected gas; required iff load < 0.
    pub supply_composition: Option<f64>,
    /// Fixed pressure p* > 0; exactly one node must carry it.
    pub pressure_anchor: Option<f64>,
}

/// Raw edge description as it appears in an instance file.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub foot: String,
    pub head: String,
    pub length: f64,
    /// Pipe diameter; falls back to the instance default, then the
    /// built-in [`gas::DEFAULT_DIAMETER`].
    pub diameter: Option<f64>,
    /// Friction factor; same fallback chain as the diameter.
    pub friction: Option<f64>,
}

/// Instance-wide fallbacks for per-edge pipe parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeDefaults {
    pub diameter: f64,
    pub friction: f64,
}

impl Default for PipeDefaults {
    fn default() -> Self {
        PipeDefaults {
            diameter: gas::DEFAULT_DIAMETER,
            friction: gas::DEFAULT_FRICTION,
        }
    }
}

/// Resolved node.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub load: f64,
    pub supply_composition: Option<f64>,
    pub pressure_anchor: Option<f64>,
}

/// Resolved edge with endpoint indices and concrete pipe parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub foot: usize,
    pub head: usize,
    pub length: f64,
    pub diameter: f64,
    pub friction: f64,
}

/// A validated network. Invariants (checked at construction):
/// ids unique, endpoints resolve, no self-loops, pipe parameters
/// positive, loads sum to zero, exactly one positive pressure anchor,
/// every supply carries a composition in [0, 1], graph connected.
///
/// Derived graphs built internally (cut graphs, boundary variants) may
/// relax the load/anchor/connectivity invariants; they never reach the
/// public constructors.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    gas: GasConstants,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

/// Check every structural invariant and report all violations at once.
///
/// Purely diagnostic: it never aborts early, so a single pass over the
/// output is enough to fix an instance file.
pub fn validate(nodes: &[NodeSpec], edges: &[EdgeSpec]) -> Vec<Violation> {
    let mut violations = Vec::new();

    if nodes.is_empty() {
        violations.push(Violation::Empty);
        return violations;
    }

    // Id uniqueness; index maps resolve to the first occurrence so the
    // remaining checks still run on duplicated inputs.
    let mut node_index: HashMap<&str, usize> = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if node_index.contains_key(n.id.as_str()) {
            violations.push(Violation::DuplicateNodeId { id: n.id.clone() });
        } else {
            node_index.insert(&n.id, i);
        }
    }
    let mut edge_ids: HashMap<&str, ()> = HashMap::new();
    for e in edges {
        if edge_ids.insert(&e.id, ()).is_some() {
            violations.push(Violation::DuplicateEdgeId { id: e.id.clone() });
        }
    }

    // Node-level checks.
    let mut anchors = 0usize;
    for n in nodes {
        if !n.load.is_finite() {
            violations.push(Violation::NonFiniteLoad { node: n.id.clone() });
        }
        match (n.load < 0.0, n.supply_composition) {
            (true, None) => {
                violations.push(Violation::MissingSupplyComposition { node: n.id.clone() })
            }
            (false, Some(_)) => {
                violations.push(Violation::UnexpectedSupplyComposition { node: n.id.clone() })
            }
            (true, Some(z)) if !(0.0..=1.0).contains(&z) => {
                violations.push(Violation::SupplyCompositionRange {
                    node: n.id.clone(),
                    value: z,
                })
            }
            _ => {}
        }
        if let Some(p) = n.pressure_anchor {
            anchors += 1;
            if p <= 0.0 || p.is_nan() {
                violations.push(Violation::AnchorNonPositive {
                    node: n.id.clone(),
                    value: p,
                });
            }
        }
    }
    if anchors != 1 {
        violations.push(Violation::AnchorCount { count: anchors });
    }

    // Zero-sum loads, Kahan-compensated and scaled to the data.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut max_abs = 0.0f64;
    for n in nodes {
        if n.load.is_finite() {
            max_abs = max_abs.max(n.load.abs());
            let y = n.load - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    if sum.abs() > LOAD_SUM_TOL * max_abs.max(1.0) {
        violations.push(Violation::LoadSum { sum });
    }

    // Edge-level checks. Parallel edges are legitimate; self-loops are not.
    for e in edges {
        for (parameter, value) in [
            ("length", Some(e.length)),
            ("diameter", e.diameter),
            ("friction", e.friction),
        ] {
            if let Some(value) = value {
                if !value.is_finite() || value <= 0.0 {
                    violations.push(Violation::NonPositivePipeParameter {
                        edge: e.id.clone(),
                        parameter,
                        value,
                    });
                }
            }
        }
        if e.foot == e.head {
            violations.push(Violation::SelfLoop { edge: e.id.clone() });
        }
        for endpoint in [&e.foot, &e.head] {
            if !node_index.contains_key(endpoint.as_str()) {
                violations.push(Violation::UnknownNodeRef {
                    edge: e.id.clone(),
                    node: endpoint.clone(),
                });
            }
        }
    }

    // Connectivity of the underlying undirected graph, over resolvable
    // edges only (unresolvable ones were reported above).
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for e in edges {
        if let (Some(&f), Some(&h)) = (
            node_index.get(e.foot.as_str()),
            node_index.get(e.head.as_str()),
        ) {
            adjacency[f].push(h);
            adjacency[h].push(f);
        }
    }
    let components = count_components(&adjacency);
    if components > 1 {
        violations.push(Violation::Disconnected { components });
    }

    violations
}

fn count_components(adjacency: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..adjacency.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    components
}

impl Network {
    /// Build a validated network. Fails with the full violation list if
    /// anything is wrong; the error Display renders one line per problem.
    pub fn new(
        nodes: Vec<NodeSpec>,
        edges: Vec<EdgeSpec>,
        gas: GasConstants,
        defaults: PipeDefaults,
    ) -> Result<Network> {
        let mut violations = validate(&nodes, &edges);
        for (parameter, value) in [
            ("default diameter", defaults.diameter),
            ("default friction", defaults.friction),
        ] {
            if !value.is_finite() || value <= 0.0 {
                violations.push(Violation::NonPositivePipeParameter {
                    edge: "<defaults>".into(),
                    parameter,
                    value,
                });
            }
        }
        if !violations.is_empty() {
            return Err(Error::Invalid { violations });
        }

        let node_index: HashMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let resolved_nodes = nodes
            .into_iter()
            .map(|n| Node {
                id: n.id,
                load: n.load,
                supply_composition: n.supply_composition,
                pressure_anchor: n.pressure_anchor,
            })
            .collect();
        let resolved_edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| Edge {
                foot: node_index[&e.foot],
                head: node_index[&e.head],
                id: e.id,
                length: e.length,
                diameter: e.diameter.unwrap_or(defaults.diameter),
                friction: e.friction.unwrap_or(defaults.friction),
            })
            .collect();
        let edge_index = resolved_edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();

        Ok(Network {
            nodes: resolved_nodes,
            edges: resolved_edges,
            gas,
            node_index,
            edge_index,
        })
    }

    /// Assemble a derived network without re-validating. Only for graphs
    /// the crate builds itself (cut graphs and their boundary variants),
    /// which intentionally relax some invariants.
    pub(crate) fn from_parts_unchecked(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        gas: GasConstants,
    ) -> Network {
        let node_index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        Network {
            nodes,
            edges,
            gas,
            node_index,
            edge_index,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn gas(&self) -> &GasConstants {
        &self.gas
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node_idx(&self, id: &str) -> Result<usize> {
        self.node_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn edge_idx(&self, id: &str) -> Result<usize> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    /// The unique pressure anchor as (node index, p*). Derived graphs
    /// inherit the anchor of the original network.
    pub fn anchor(&self) -> Option<(usize, f64)> {
        self.nodes
            .iter()
            .enumerate()
            .find_map(|(i, n)| n.pressure_anchor.map(|p| (i, p)))
    }

    /// Incidence entry a(v, e): −1 at the foot, +1 at the head, else 0.
    /// Self-loops are rejected at construction, so the cases are disjoint.
    pub fn incidence_entry(&self, v: usize, e: usize) -> f64 {
        let edge = &self.edges[e];
        if edge.head == v {
            1.0
        } else if edge.foot == v {
            -1.0
        } else {
            0.0
        }
    }

    /// Dense |V| × |E| incidence matrix.
    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_nodes(), self.n_edges(), |v, e| {
            self.incidence_entry(v, e)
        })
    }

    /// Number of independent cycles: |E| − |V| + #components.
    pub fn cycle_count(&self) -> usize {
        let mut adjacency = vec![Vec::new(); self.n_nodes()];
        for e in &self.edges {
            adjacency[e.foot].push(e.head);
            adjacency[e.head].push(e.foot);
        }
        let components = count_components(&adjacency);
        self.n_edges() + components - self.n_nodes()
    }

    /// True iff the graph is connected and acyclic.
    pub fn is_tree(&self) -> bool {
        if self.n_nodes() == 0 {
            return false;
        }
        let mut adjacency = vec![Vec::new(); self.n_nodes()];
        for e in &self.edges {
            adjacency[e.foot].push(e.head);
            adjacency[e.head].push(e.foot);
        }
        count_components(&adjacency) == 1 && self.n_edges() + 1 == self.n_nodes()
    }

    /// Vector of node loads b.
    pub fn loads(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.load).collect()
    }

    /// Split the network at `cut_edge`: remove the edge and attach two
    /// half-length stub pipes ending in fresh boundary nodes,
    ///
    ///   f(e) ──e_cl──▶ v_cl        v_cr ──e_cr──▶ h(e),
    ///
    /// so that a boundary load pair (λ at v_cl, −λ at v_cr) reproduces a
    /// transfer of λ across the removed edge. The stub pipes each take
    /// half the cut edge's length and inherit its diameter and friction,
    /// which makes the two stub pressure drops sum exactly to the drop of
    /// the full edge.
    ///
    /// The boundary nodes initially carry zero load and no composition;
    /// use [`CutGraph::boundary_network`] to instantiate a (λ, μ) pair.
    pub fn cut(&self, cut_edge: usize) -> Result<CutGraph> {
        if cut_edge >= self.n_edges() {
            return Err(Error::UnknownEdge(format!("#{cut_edge}")));
        }
        let e = &self.edges[cut_edge];

        let fresh = |base: &str, taken: &HashMap<String, usize>| {
            let mut id = base.to_string();
            while taken.contains_key(&id) {
                id.insert(0, '_');
            }
            id
        };
        let cl_id = fresh("__cl", &self.node_index);
        let mut cr_id = fresh("__cr", &self.node_index);
        if cr_id == cl_id {
            cr_id.insert(0, '_');
        }

        let mut nodes = self.nodes.clone();
        let v_cl = nodes.len();
        nodes.push(Node {
            id: cl_id.clone(),
            load: 0.0,
            supply_composition: None,
            pressure_anchor: None,
        });
        let v_cr = nodes.len();
        nodes.push(Node {
            id: cr_id,
            load: 0.0,
            supply_composition: None,
            pressure_anchor: None,
        });

        let mut edges = Vec::with_capacity(self.n_edges() + 1);
        let mut derived_to_original_edge = Vec::with_capacity(self.n_edges() + 1);
        for (i, edge) in self.edges.iter().enumerate() {
            if i != cut_edge {
                edges.push(edge.clone());
                derived_to_original_edge.push(Some(i));
            }
        }
        let stub = |base: String, foot: usize, head: usize| Edge {
            id: {
                let mut id = base;
                while self.edge_index.contains_key(&id) {
                    id.insert(0, '_');
                }
                id
            },
            foot,
            head,
            length: e.length / 2.0,
            diameter: e.diameter,
            friction: e.friction,
        };
        let e_cl = edges.len();
        edges.push(stub(format!("{}__cl", e.id), e.foot, v_cl));
        derived_to_original_edge.push(None);
        let e_cr = edges.len();
        edges.push(stub(format!("{}__cr", e.id), v_cr, e.head));
        derived_to_original_edge.push(None);

        let derived = Network::from_parts_unchecked(nodes, edges, self.gas);

        // If the cut edge was a bridge, the derived graph falls apart:
        // the edge lies on no cycle and the cut parameterization does not
        // apply. Flag it rather than failing, so diagnostics can report
        // which component is which.
        let mut adjacency = vec![Vec::new(); derived.n_nodes()];
        for edge in &derived.edges {
            adjacency[edge.foot].push(edge.head);
            adjacency[edge.head].push(edge.foot);
        }
        let bridge = count_components(&adjacency) > 1;

        Ok(CutGraph {
            derived,
            cut_edge,
            v_cl,
            v_cr,
            e_cl,
            e_cr,
            derived_to_original_edge,
            bridge,
        })
    }

    /// Convenience wrapper for [`Network::cut`] by edge id.
    pub fn cut_by_id(&self, edge_id: &str) -> Result<CutGraph> {
        self.cut(self.edge_idx(edge_id)?)
    }
}

/// A network cut open at one edge, with boundary nodes v_cl / v_cr ready
/// to take a transfer load λ and a boundary composition μ.
#[derive(Debug, Clone)]
pub struct CutGraph {
    /// The cut-open network (original nodes first, then v_cl, v_cr; the
    /// original node indices are preserved).
    pub derived: Network,
    /// Index of the removed edge in the original network.
    pub cut_edge: usize,
    pub v_cl: usize,
    pub v_cr: usize,
    /// Stub edge f(e^c) → v_cl in the derived network.
    pub e_cl: usize,
    /// Stub edge v_cr → h(e^c) in the derived network.
    pub e_cr: usize,
    /// For each derived edge, the original edge it came from (stubs: None).
    pub derived_to_original_edge: Vec<Option<usize>>,
    /// True iff the cut edge was a bridge (derived graph disconnected).
    pub bridge: bool,
}

impl CutGraph {
    /// Instantiate boundary data: load λ at v_cl, −λ at v_cr, and the
    /// boundary composition μ on whichever boundary node is the supply
    /// for that sign of λ (v_cr for λ > 0, v_cl for λ < 0, neither for
    /// λ = 0 since no gas crosses the boundary).
    pub fn boundary_network(&self, lambda: f64, mu: f64) -> Network {
        let mut net = self.derived.clone();
        net.nodes[self.v_cl].load = lambda;
        net.nodes[self.v_cr].load = -lambda;
        net.nodes[self.v_cl].supply_composition = (lambda < 0.0).then_some(mu);
        net.nodes[self.v_cr].supply_composition = (lambda > 0.0).then_some(mu);
        net
    }

    /// True iff the derived graph is a tree, i.e. the cut removed the
    /// only cycle. Bridges and multi-cycle networks both fail this.
    pub fn is_tree(&self) -> bool {
        self.derived.is_tree()
    }
}
