//! Network files, gas-constant resolution, and run reports.
//!
//! Networks are stored as JSON documents listing nodes and edges plus
//! an optional `gas` section. Gas constants resolve in order: file
//! section, then the `BLENDGAS_GAS_CONSTANTS` environment variable
//! (a JSON object with the same fields), then the built-in values for
//! hydrogen and natural gas at the reference temperature.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gas::GasConstants;
use crate::network::{EdgeSpec, Network, NodeSpec, PipeDefaults};
use crate::residual;
use crate::solution::Solution;

pub const GAS_ENV_VAR: &str = "BLENDGAS_GAS_CONSTANTS";

/// One node entry of a network file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: String,
    #[serde(default)]
    pub load: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supply_composition: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure_anchor: Option<f64>,
}

/// One edge entry of a network file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub foot: String,
    pub head: String,
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub friction: Option<f64>,
}

/// Optional gas / pipe-default overrides.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2_h2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2_ng: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_friction: Option<f64>,
}

/// A network document as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gas: Option<GasSection>,
}

fn merge_gas(base: GasConstants, section: &GasSection) -> GasConstants {
    GasConstants {
        sigma2_h2: section.sigma2_h2.unwrap_or(base.sigma2_h2),
        sigma2_ng: section.sigma2_ng.unwrap_or(base.sigma2_ng),
    }
}

fn merge_defaults(base: PipeDefaults, section: &GasSection) -> PipeDefaults {
    PipeDefaults {
        diameter: section.default_diameter.unwrap_or(base.diameter),
        friction: section.default_friction.unwrap_or(base.friction),
    }
}

fn env_gas_section() -> Result<Option<GasSection>> {
    match std::env::var(GAS_ENV_VAR) {
        Ok(raw) => {
            let section: GasSection = serde_json::from_str(&raw).map_err(|e| {
                Error::Parse(format!("{GAS_ENV_VAR} is not a valid gas section: {e}"))
            })?;
            Ok(Some(section))
        }
        Err(_) => Ok(None),
    }
}

/// Build a validated [`Network`] from a parsed document.
pub fn network_from_file(doc: &NetworkFile) -> Result<Network> {
    let mut gas = GasConstants::default();
    let mut defaults = PipeDefaults::default();
    if let Some(section) = env_gas_section()? {
        gas = merge_gas(gas, &section);
        defaults = merge_defaults(defaults, &section);
    }
    if let Some(section) = &doc.gas {
        gas = merge_gas(gas, section);
        defaults = merge_defaults(defaults, section);
    }

    let nodes: Vec<NodeSpec> = doc
        .nodes
        .iter()
        .map(|n| NodeSpec {
            id: n.id.clone(),
            load: n.load,
            supply_composition: n.supply_composition,
            pressure_anchor: n.pressure_anchor,
        })
        .collect();
    let edges: Vec<EdgeSpec> = doc
        .edges
        .iter()
        .map(|e| EdgeSpec {
            id: e.id.clone(),
            foot: e.foot.clone(),
            head: e.head.clone(),
            length: e.length,
            diameter: e.diameter,
            friction: e.friction,
        })
        .collect();
    Network::new(nodes, edges, gas, defaults)
}

/// Parse a network document from a JSON string.
pub fn network_from_str(json: &str) -> Result<Network> {
    let doc: NetworkFile =
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("network file: {e}")))?;
    network_from_file(&doc)
}

/// Load and validate a network from a JSON file.
pub fn load_network<P: AsRef<Path>>(path: P) -> Result<Network> {
    let raw = fs::read_to_string(&path)?;
    network_from_str(&raw)
}

/// Per-node solution entry of a run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeResult {
    pub id: String,
    pub eta: f64,
    pub p: f64,
    pub p2: f64,
}

/// Per-edge solution entry of a run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeResult {
    pub id: String,
    pub q: f64,
    pub eta: f64,
}

/// Machine-readable output of a solve run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    /// Which solver produced the state: "tree", "cut", or "lm".
    pub solver: String,
    /// Max-norm of the steady-state residual of the reported state.
    pub residual_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_edge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_star: Option<f64>,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub nodes: Vec<NodeResult>,
    pub edges: Vec<EdgeResult>,
}

/// Assemble a report from a solved state, measuring its residual.
pub fn run_report(net: &Network, sol: &Solution, solver: &str) -> RunReport {
    let residual_max = residual::residual_of_solution(net, sol).amax();
    RunReport {
        solver: solver.into(),
        residual_max,
        cut_edge: None,
        lambda_star: None,
        mu_star: None,
        iterations: 0,
        warnings: sol.warnings.clone(),
        nodes: net
            .nodes()
            .iter()
            .enumerate()
            .map(|(v, n)| NodeResult {
                id: n.id.clone(),
                eta: sol.eta_node[v],
                p: sol.p[v],
                p2: sol.p2[v],
            })
            .collect(),
        edges: net
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| EdgeResult {
                id: edge.id.clone(),
                q: sol.q[e],
                eta: sol.eta_edge[e],
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "nodes": [
            {"id": "s", "load": -2.0, "supply_composition": 0.5, "pressure_anchor": 10.0},
            {"id": "d", "load": 2.0}
        ],
        "edges": [
            {"id": "p", "foot": "s", "head": "d", "length": 1.0, "friction": 0.5}
        ],
        "gas": {"sigma2_h2": 8.0, "sigma2_ng": 1.0}
    }"#;

    #[test]
    fn parses_and_validates_a_minimal_file() {
        let net = network_from_str(MINIMAL).unwrap();
        assert_eq!(net.n_nodes(), 2);
        assert_eq!(net.n_edges(), 1);
        assert_eq!(net.gas().sigma2_h2, 8.0);
        assert_eq!(net.gas().sigma2_ng, 1.0);
        // Unset diameter falls back to the default.
        assert_eq!(net.edges()[0].diameter, 1.0);
        assert_eq!(net.edges()[0].friction, 0.5);
    }

    #[test]
    fn surfaces_validation_failures_with_exit_class_invalid() {
        let bad = MINIMAL.replace("\"load\": 2.0", "\"load\": 3.0");
        let err = network_from_str(&bad).unwrap_err();
        assert!(matches!(err, Error::Invalid { .. }));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn rejects_unknown_fields_as_parse_errors() {
        let bad = MINIMAL.replace("\"load\": -2.0", "\"lod\": -2.0");
        let err = network_from_str(&bad).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err:?}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn gas_defaults_to_the_handbook_constants() {
        let without_gas = r#"{
            "nodes": [
                {"id": "s", "load": -1.0, "supply_composition": 0.0, "pressure_anchor": 60.0},
                {"id": "d", "load": 1.0}
            ],
            "edges": [{"id": "p", "foot": "s", "head": "d", "length": 1.0}]
        }"#;
        let net = network_from_str(without_gas).unwrap();
        assert_eq!(*net.gas(), GasConstants::default());
    }

    #[test]
    fn run_report_round_trips_ids_and_measures_residual() {
        let net = network_from_str(MINIMAL).unwrap();
        let sol = crate::tree::solve_tree(&net).unwrap();
        let report = run_report(&net, &sol, "tree");
        assert_eq!(report.solver, "tree");
        assert!(report.residual_max < 1e-10);
        assert_eq!(report.nodes[0].id, "s");
        assert_eq!(report.edges[0].id, "p");
        assert_eq!(report.edges[0].q, 2.0);
        let json = serde_json::to_string(&report).unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.nodes.len(), 2);
    }
}
