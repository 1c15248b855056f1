//! Steady-state solver for hydrogen-blended natural-gas pipe networks.
//!
//! Gas networks are directed graphs whose edges are pipes and whose
//! nodes carry loads (demands positive, supplies negative), supply
//! compositions (hydrogen volume fraction ζ), and exactly one pressure
//! anchor. A steady state assigns a mass flow to every pipe, a
//! composition to every node and pipe, and a pressure to every node so
//! that mass is balanced, incoming gas mixes perfectly, and the
//! isothermal pressure-drop law holds along every pipe.
//!
//! Solvers, by graph shape:
//!
//! * [`tree::solve_tree`] — trees: flows, compositions, and pressures
//!   propagate directly.
//! * [`cut::solve_single_cycle`] — one cycle: cut a cycle edge, bracket
//!   the transfer flow, and bisect the pressure gap along the root
//!   curve of the composition gap.
//! * [`residual::solve_lm`] — anything else: damped least squares on
//!   the stacked steady-state residual.
//!
//! [`sweep`] maps the cut-matching functions over boundary-parameter
//! grids; [`io`] reads network files and writes reports; the `blendgas`
//! binary wires it all to a command line.

pub mod cut;
pub mod error;
pub mod gas;
pub mod graph;
pub mod io;
pub mod network;
pub mod residual;
pub mod solution;
pub mod sweep;
pub mod tree;

pub use error::{Error, Result, Violation};
pub use gas::GasConstants;
pub use network::{CutGraph, EdgeSpec, Network, NodeSpec, PipeDefaults};
pub use solution::Solution;
