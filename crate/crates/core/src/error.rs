//! Error and diagnostics types shared by all solver stages.

use thiserror::Error;

/// A single violated network invariant, attributed to the offending
/// node or edge. Violations are data, not failures: `validate` returns
/// all of them at once so a file can be fixed in one pass.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Node loads must sum to zero (conservation of mass over the whole
    /// network); carries the offending sum.
    LoadSum { sum: f64 },
    /// Exactly one node must carry the pressure anchor p*.
    AnchorCount { count: usize },
    /// The pressure anchor must be strictly positive.
    AnchorNonPositive { node: String, value: f64 },
    /// A supply node (load < 0) is missing its supply composition ζ.
    MissingSupplyComposition { node: String },
    /// A non-supply node (load ≥ 0) carries a supply composition.
    UnexpectedSupplyComposition { node: String },
    /// Supply composition outside [0, 1].
    SupplyCompositionRange { node: String, value: f64 },
    /// Load is NaN or infinite.
    NonFiniteLoad { node: String },
    /// Pipe parameter that must be strictly positive is not.
    NonPositivePipeParameter {
        edge: String,
        parameter: &'static str,
        value: f64,
    },
    /// Edge with foot == head.
    SelfLoop { edge: String },
    /// Edge endpoint references a node id that does not exist.
    UnknownNodeRef { edge: String, node: String },
    /// Two nodes share an id.
    DuplicateNodeId { id: String },
    /// Two edges share an id.
    DuplicateEdgeId { id: String },
    /// The underlying undirected graph is not connected.
    Disconnected { components: usize },
    /// A network with no nodes cannot be solved.
    Empty,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::LoadSum { sum } => {
                write!(f, "loads do not sum to zero (sum = {sum:e})")
            }
            Violation::AnchorCount { count } => {
                write!(f, "pressure anchor count != 1 (found {count})")
            }
            Violation::AnchorNonPositive { node, value } => {
                write!(
                    f,
                    "node '{node}': pressure anchor must be > 0 (got {value})"
                )
            }
            Violation::MissingSupplyComposition { node } => {
                write!(
                    f,
                    "node '{node}': supply node (load < 0) has no supply composition"
                )
            }
            Violation::UnexpectedSupplyComposition { node } => {
                write!(
                    f,
                    "node '{node}': supply composition given but load >= 0 (not a supply)"
                )
            }
            Violation::SupplyCompositionRange { node, value } => {
                write!(
                    f,
                    "node '{node}': supply composition {value} outside [0, 1]"
                )
            }
            Violation::NonFiniteLoad { node } => {
                write!(f, "node '{node}': load is not finite")
            }
            Violation::NonPositivePipeParameter {
                edge,
                parameter,
                value,
            } => {
                write!(f, "edge '{edge}': {parameter} must be > 0 (got {value})")
            }
            Violation::SelfLoop { edge } => write!(f, "edge '{edge}': self-loop"),
            Violation::UnknownNodeRef { edge, node } => {
                write!(f, "edge '{edge}': unknown node id '{node}'")
            }
            Violation::DuplicateNodeId { id } => write!(f, "duplicate node id '{id}'"),
            Violation::DuplicateEdgeId { id } => write!(f, "duplicate edge id '{id}'"),
            Violation::Disconnected { components } => {
                write!(f, "graph is not connected ({components} components)")
            }
            Violation::Empty => write!(f, "network has no nodes"),
        }
    }
}

/// Library-wide error type. The CLI maps these onto stable exit codes;
/// see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// The network violates one or more structural invariants.
    #[error("invalid network:{}", .violations.iter().map(|v| format!("\n  - {v}")).collect::<String>())]
    Invalid { violations: Vec<Violation> },

    /// Input could not be parsed (malformed JSON, bad CLI range, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// A pipe is physically infeasible: the squared pressure reaches zero
    /// before the end of the pipe (length beyond the critical length).
    #[error(
        "infeasible network: squared pressure drops to {p2:e} across edge '{edge}' \
         (length {length} exceeds the critical length {critical_length:.6})"
    )]
    Infeasible {
        edge: String,
        length: f64,
        critical_length: f64,
        p2: f64,
    },

    /// An iterative solver exhausted its budget without meeting tolerance.
    #[error(
        "solver did not converge after {iterations} iterations \
         (max |residual| = {residual_max:e})"
    )]
    NoConvergence {
        iterations: usize,
        residual_max: f64,
    },

    /// A converged iterate carries a non-positive squared pressure, so no
    /// physical pressure exists: the network is infeasible.
    #[error("infeasible network: squared pressure {p2:e} at node '{node}' is not positive")]
    NegativePressure { node: String, p2: f64 },

    /// Lookup of a node id failed.
    #[error("unknown node id '{0}'")]
    UnknownNode(String),

    /// Lookup of an edge id failed.
    #[error("unknown edge id '{0}'")]
    UnknownEdge(String),

    /// A tree-only operation was invoked on a network with cycles
    /// (or a disconnected one).
    #[error("network is not a tree ({0}); use the cycle or general solver")]
    NotATree(String),

    /// The single-cycle solver needs exactly one independent cycle.
    #[error("network has {found} independent cycles, expected exactly 1")]
    NotSingleCycle { found: usize },

    /// The chosen cut edge does not lie on the cycle (cutting it leaves
    /// the cycle intact or disconnects the graph).
    #[error("cut edge '{edge}' does not lie on the cycle ({reason})")]
    CutEdgeOffCycle { edge: String, reason: String },

    /// Composition is undefined: a node has neither inflow nor supply,
    /// but the mixing denominator is required to be positive.
    #[error("composition undefined at node '{node}' (no inflow and no supply)")]
    CompositionUndefined { node: String },

    /// The flow-oriented graph contains a directed cycle, so no
    /// topological order exists.
    #[error("flow-oriented graph contains a directed cycle (circular flow)")]
    CyclicFlow,

    /// λ outside the admissible bracket of the cut parameterization.
    #[error("lambda {lambda} outside bracket [{gamma_min}, {gamma_max}]")]
    OutOfBracket {
        lambda: f64,
        gamma_min: f64,
        gamma_max: f64,
    },

    /// Bisection could not bracket a sign change of g.
    #[error(
        "no sign change of g over [{gamma_min}, {gamma_max}] \
         (g = {g_lo:e} .. {g_hi:e}); network is numerically infeasible"
    )]
    NoSignChange {
        gamma_min: f64,
        gamma_max: f64,
        g_lo: f64,
        g_hi: f64,
    },

    /// Bad command-line usage that clap could not catch (e.g. grid sizes).
    #[error("usage error: {0}")]
    Usage(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code for the CLI:
    /// 0 ok, 1 invalid data, 2 parse/usage, 3 infeasible, 4 non-convergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Invalid { .. }
            | Error::UnknownNode(_)
            | Error::UnknownEdge(_)
            | Error::NotATree(_)
            | Error::NotSingleCycle { .. }
            | Error::CutEdgeOffCycle { .. } => 1,
            Error::Parse(_) | Error::Usage(_) | Error::Io(_) => 2,
            Error::Infeasible { .. }
            | Error::NegativePressure { .. }
            | Error::CompositionUndefined { .. }
            | Error::CyclicFlow
            | Error::OutOfBracket { .. }
            | Error::NoSignChange { .. } => 3,
            Error::NoConvergence { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
