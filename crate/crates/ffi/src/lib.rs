//! C ABI for the blendgas steady-state solver.
//!
//! The interface follows the usual opaque-handle pattern: load a network
//! into a `BlendgasNetwork`, solve it into a `BlendgasSolution`, read
//! scalars out by index or id, and free both handles. Every fallible
//! function returns a status code (`BLENDGAS_OK` is zero); after a
//! nonzero return, `blendgas_last_error_message` describes the most
//! recent failure on the calling thread. Strings returned from getters
//! borrow the handle they came from and stay valid until that handle is
//! freed; `blendgas_solution_to_json` alone transfers ownership, to be
//! released with `blendgas_string_free`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blendgas::cut::{self, CycleOptions};
use blendgas::io::{self, RunReport};
use blendgas::residual::{self, LmOptions};
use blendgas::tree;
use blendgas::Network;

/// Success.
pub const BLENDGAS_OK: i32 = 0;
/// The network violates a structural invariant (bad data).
pub const BLENDGAS_ERR_INVALID: i32 = 1;
/// Malformed input: unreadable file, bad JSON, unknown id.
pub const BLENDGAS_ERR_PARSE: i32 = 2;
/// The network is physically infeasible (pressure drains to zero).
pub const BLENDGAS_ERR_INFEASIBLE: i32 = 3;
/// An iterative solver exhausted its budget without converging.
pub const BLENDGAS_ERR_NO_CONVERGENCE: i32 = 4;
/// A null pointer, out-of-range index, or otherwise unusable argument.
pub const BLENDGAS_ERR_ARGUMENT: i32 = 5;
/// An internal invariant failed; the handle is still safe to free.
pub const BLENDGAS_ERR_INTERNAL: i32 = 6;

/// Solver selection for `blendgas_solve`.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq)]
pub enum BlendgasSolver {
    /// Pick by graph shape: tree, single cycle, or general.
    Auto = 0,
    /// Exact elimination; the network must be a tree.
    Tree = 1,
    /// Cut-and-bisect; the network must carry exactly one cycle.
    Cut = 2,
    /// Damped least-squares iteration; any connected network.
    Lm = 3,
}

/// Opaque handle to a validated network.
pub struct BlendgasNetwork {
    inner: Network,
}

/// Opaque handle to a solved steady state.
pub struct BlendgasSolution {
    report: RunReport,
    solver: CString,
    node_ids: Vec<CString>,
    edge_ids: Vec<CString>,
    warnings: Vec<CString>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn fail(code: i32, message: &str) -> i32 {
    set_last_error(message);
    code
}

fn fail_err(err: blendgas::Error) -> i32 {
    set_last_error(&err.to_string());
    i32::from(err.exit_code())
}

/// Guard an FFI body against panics so they never unwind across the ABI.
fn guarded(body: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => fail(BLENDGAS_ERR_INTERNAL, "internal panic"),
    }
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn blendgas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on the calling thread. The pointer
/// stays valid until the next failing call on the same thread; it is
/// never null (an empty string means "no error recorded").
#[no_mangle]
pub extern "C" fn blendgas_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, i32> {
    if ptr.is_null() {
        return Err(fail(BLENDGAS_ERR_ARGUMENT, &format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(BLENDGAS_ERR_ARGUMENT, &format!("{what} is not valid UTF-8")))
}

fn emit_network(net: Network, out: *mut *mut BlendgasNetwork) -> i32 {
    if out.is_null() {
        return fail(BLENDGAS_ERR_ARGUMENT, "output handle pointer is null");
    }
    let handle = Box::new(BlendgasNetwork { inner: net });
    unsafe { *out = Box::into_raw(handle) };
    BLENDGAS_OK
}

/// Load and validate a network from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid place
/// to store the new handle, which the caller must eventually release
/// with `blendgas_network_free`.
#[no_mangle]
pub unsafe extern "C" fn blendgas_network_load_file(
    path: *const c_char,
    out: *mut *mut BlendgasNetwork,
) -> i32 {
    guarded(|| {
        let path = match required_str(path, "path") {
            Ok(s) => s,
            Err(code) => return code,
        };
        match io::load_network(path) {
            Ok(net) => emit_network(net, out),
            Err(err) => fail_err(err),
        }
    })
}

/// Parse and validate a network from an in-memory JSON document.
///
/// # Safety
/// As `blendgas_network_load_file`, with `json` the document text.
#[no_mangle]
pub unsafe extern "C" fn blendgas_network_load_json(
    json: *const c_char,
    out: *mut *mut BlendgasNetwork,
) -> i32 {
    guarded(|| {
        let json = match required_str(json, "json") {
            Ok(s) => s,
            Err(code) => return code,
        };
        match io::network_from_str(json) {
            Ok(net) => emit_network(net, out),
            Err(err) => fail_err(err),
        }
    })
}

/// Release a network handle. Null is ignored.
///
/// # Safety
/// `net` must be a handle obtained from a `blendgas_network_load_*`
/// call that has not been freed before.
#[no_mangle]
pub unsafe extern "C" fn blendgas_network_free(net: *mut BlendgasNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live network handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_network_node_count(net: *const BlendgasNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.n_nodes())
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live network handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_network_edge_count(net: *const BlendgasNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.n_edges())
}

/// Number of independent cycles, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live network handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_network_cycle_count(net: *const BlendgasNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.cycle_count())
}

fn solve_report(
    net: &Network,
    solver: BlendgasSolver,
    tol_p: f64,
    max_iter: usize,
) -> blendgas::Result<RunReport> {
    let solver = match solver {
        BlendgasSolver::Auto => match net.cycle_count() {
            0 => BlendgasSolver::Tree,
            1 => BlendgasSolver::Cut,
            _ => BlendgasSolver::Lm,
        },
        chosen => chosen,
    };
    match solver {
        BlendgasSolver::Tree => {
            let sol = tree::solve_tree(net)?;
            Ok(io::run_report(net, &sol, "tree"))
        }
        BlendgasSolver::Cut => {
            let opts = CycleOptions {
                cut_edge: None,
                tol_p: if tol_p > 0.0 { tol_p } else { 1e-10 },
                max_iter: if max_iter > 0 { max_iter } else { 200 },
            };
            let cycle = cut::solve_single_cycle(net, &opts)?;
            let mut report = io::run_report(net, &cycle.solution, "cut");
            report.cut_edge = Some(cycle.cut_edge);
            report.lambda_star = Some(cycle.lambda_star);
            report.mu_star = Some(cycle.mu_star);
            report.iterations = cycle.iterations;
            Ok(report)
        }
        BlendgasSolver::Lm => {
            let opts = LmOptions {
                max_iter: if max_iter > 0 { max_iter } else { 500 },
                ..LmOptions::default()
            };
            let lm = residual::solve_lm(net, None, &opts)?;
            let mut report = io::run_report(net, &lm.solution, "lm");
            report.iterations = lm.iterations;
            Ok(report)
        }
        BlendgasSolver::Auto => unreachable!("auto resolves above"),
    }
}

fn emit_solution(report: RunReport, out: *mut *mut BlendgasSolution) -> i32 {
    if out.is_null() {
        return fail(BLENDGAS_ERR_ARGUMENT, "output handle pointer is null");
    }
    let cstr = |s: &str| CString::new(s.replace('\0', " ")).unwrap_or_default();
    let handle = Box::new(BlendgasSolution {
        solver: cstr(&report.solver),
        node_ids: report.nodes.iter().map(|n| cstr(&n.id)).collect(),
        edge_ids: report.edges.iter().map(|e| cstr(&e.id)).collect(),
        warnings: report.warnings.iter().map(|w| cstr(w)).collect(),
        node_index: report
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect(),
        edge_index: report
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect(),
        report,
    });
    unsafe { *out = Box::into_raw(handle) };
    BLENDGAS_OK
}

/// Compute the steady state of a network.
///
/// `tol_p` is the bisection tolerance on the pressure gap (pass 0 for
/// the default 1e-10); `max_iter` the iteration budget (pass 0 for the
/// default: 200 bisections or 500 least-squares steps).
///
/// # Safety
/// `net` must be a live network handle; `out` must be a valid place to
/// store the new handle, which the caller must eventually release with
/// `blendgas_solution_free`.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solve(
    net: *const BlendgasNetwork,
    solver: BlendgasSolver,
    tol_p: f64,
    max_iter: usize,
    out: *mut *mut BlendgasSolution,
) -> i32 {
    guarded(|| {
        let Some(net) = net.as_ref() else {
            return fail(BLENDGAS_ERR_ARGUMENT, "network handle is null");
        };
        match solve_report(&net.inner, solver, tol_p, max_iter) {
            Ok(report) => emit_solution(report, out),
            Err(err) => fail_err(err),
        }
    })
}

/// Release a solution handle. Null is ignored.
///
/// # Safety
/// `sol` must be a handle obtained from `blendgas_solve` that has not
/// been freed before.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_free(sol: *mut BlendgasSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Name of the solver that produced the state ("tree", "cut", or "lm"),
/// or null for a null handle.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_solver(sol: *const BlendgasSolution) -> *const c_char {
    sol.as_ref().map_or(ptr::null(), |s| s.solver.as_ptr())
}

/// Iterations the solver spent (0 for the direct tree solver).
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_iterations(sol: *const BlendgasSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.report.iterations)
}

unsafe fn write_scalar(
    sol: *const BlendgasSolution,
    out: *mut f64,
    read: impl FnOnce(&BlendgasSolution) -> Result<f64, i32>,
) -> i32 {
    guarded(|| {
        let Some(sol) = sol.as_ref() else {
            return fail(BLENDGAS_ERR_ARGUMENT, "solution handle is null");
        };
        if out.is_null() {
            return fail(BLENDGAS_ERR_ARGUMENT, "output pointer is null");
        }
        match read(sol) {
            Ok(value) => {
                *out = value;
                BLENDGAS_OK
            }
            Err(code) => code,
        }
    })
}

fn node_scalar(
    sol: &BlendgasSolution,
    index: usize,
    read: impl FnOnce(&io::NodeResult) -> f64,
) -> Result<f64, i32> {
    sol.report.nodes.get(index).map(read).ok_or_else(|| {
        fail(
            BLENDGAS_ERR_ARGUMENT,
            &format!("node index {index} out of range"),
        )
    })
}

fn edge_scalar(
    sol: &BlendgasSolution,
    index: usize,
    read: impl FnOnce(&io::EdgeResult) -> f64,
) -> Result<f64, i32> {
    sol.report.edges.get(index).map(read).ok_or_else(|| {
        fail(
            BLENDGAS_ERR_ARGUMENT,
            &format!("edge index {index} out of range"),
        )
    })
}

/// Max-norm of the steady-state residual of the reported state.
///
/// # Safety
/// `sol` must be null or a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_residual_max(
    sol: *const BlendgasSolution,
    out: *mut f64,
) -> i32 {
    write_scalar(sol, out, |s| Ok(s.report.residual_max))
}

/// Cycle transfer λ* of a cut-solver run; NaN for other solvers.
///
/// # Safety
/// `sol` must be null or a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_lambda_star(
    sol: *const BlendgasSolution,
    out: *mut f64,
) -> i32 {
    write_scalar(sol, out, |s| Ok(s.report.lambda_star.unwrap_or(f64::NAN)))
}

/// Boundary composition μ* of a cut-solver run; NaN for other solvers.
///
/// # Safety
/// `sol` must be null or a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_mu_star(
    sol: *const BlendgasSolution,
    out: *mut f64,
) -> i32 {
    write_scalar(sol, out, |s| Ok(s.report.mu_star.unwrap_or(f64::NAN)))
}

/// Number of nodes in the solution, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_node_count(sol: *const BlendgasSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.report.nodes.len())
}

/// Number of edges in the solution, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_edge_count(sol: *const BlendgasSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.report.edges.len())
}

/// Id of the node at `index`, or null when out of range. The pointer
/// borrows the handle.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_node_id(
    sol: *const BlendgasSolution,
    index: usize,
) -> *const c_char {
    sol.as_ref()
        .and_then(|s| s.node_ids.get(index))
        .map_or(ptr::null(), |id| id.as_ptr())
}

/// Id of the edge at `index`, or null when out of range. The pointer
/// borrows the handle.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_edge_id(
    sol: *const BlendgasSolution,
    index: usize,
) -> *const c_char {
    sol.as_ref()
        .and_then(|s| s.edge_ids.get(index))
        .map_or(ptr::null(), |id| id.as_ptr())
}

/// Look up a node index by id.
///
/// # Safety
/// `sol` must be null or a live solution handle; `id` NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_node_index(
    sol: *const BlendgasSolution,
    id: *const c_char,
    out: *mut usize,
) -> i32 {
    guarded(|| {
        let Some(sol) = sol.as_ref() else {
            return fail(BLENDGAS_ERR_ARGUMENT, "solution handle is null");
        };
        let id = match required_str(id, "id") {
            Ok(s) => s,
            Err(code) => return code,
        };
        if out.is_null() {
            return fail(BLENDGAS_ERR_ARGUMENT, "output pointer is null");
        }
        match sol.node_index.get(id) {
            Some(&index) => {
                *out = index;
                BLENDGAS_OK
            }
            None => fail(BLENDGAS_ERR_ARGUMENT, &format!("unknown node id '{id}'")),
        }
    })
}

/// Look up an edge index by id.
///
/// # Safety
/// `sol` must be null or a live solution handle; `id` NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_edge_index(
    sol: *const BlendgasSolution,
    id: *const c_char,
    out: *mut usize,
) -> i32 {
    guarded(|| {
        let Some(sol) = sol.as_ref() else {
            return fail(BLENDGAS_ERR_ARGUMENT, "solution handle is null");
        };
        let id = match required_str(id, "id") {
            Ok(s) => s,
            Err(code) => return code,
        };
        if out.is_null() {
            return fail(BLENDGAS_ERR_ARGUMENT, "output pointer is null");
        }
        match sol.edge_index.get(id) {
            Some(&index) => {
                *out = index;
                BLENDGAS_OK
            }
            None => fail(BLENDGAS_ERR_ARGUMENT, &format!("unknown edge id '{id}'")),
        }
    })
}

/// Hydrogen fraction at the node at `index`.
///
/// # Safety
/// `sol` must be null or a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_node_eta(
    sol: *const BlendgasSolution,
    index: usize,
    out: *mut f64,
) -> i32 {
    write_scalar(sol, out, |s| node_scalar(s, index, |n| n.eta))
}

/// Pressure at the node at `index`.
///
/// # Safety
/// `sol` must be null or a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_node_pressure(
    sol: *const BlendgasSolution,
    index: usize,
    out: *mut f64,
) -> i32 {
    write_scalar(sol, out, |s| node_scalar(s, index, |n| n.p))
}

/// Squared pressure at the node at `index`.
///
/// # Safety
/// `sol` must be null or a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_node_pressure_squared(
    sol: *const BlendgasSolution,
    index: usize,
    out: *mut f64,
) -> i32 {
    write_scalar(sol, out, |s| node_scalar(s, index, |n| n.p2))
}

/// Signed flow on the edge at `index` (positive foot → head).
///
/// # Safety
/// `sol` must be null or a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_edge_flow(
    sol: *const BlendgasSolution,
    index: usize,
    out: *mut f64,
) -> i32 {
    write_scalar(sol, out, |s| edge_scalar(s, index, |e| e.q))
}

/// Hydrogen fraction of the gas travelling through the edge at `index`.
///
/// # Safety
/// `sol` must be null or a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_edge_eta(
    sol: *const BlendgasSolution,
    index: usize,
    out: *mut f64,
) -> i32 {
    write_scalar(sol, out, |s| edge_scalar(s, index, |e| e.eta))
}

/// Number of solver warnings attached to the solution.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_warning_count(sol: *const BlendgasSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.warnings.len())
}

/// Warning text at `index`, or null when out of range. The pointer
/// borrows the handle.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_warning(
    sol: *const BlendgasSolution,
    index: usize,
) -> *const c_char {
    sol.as_ref()
        .and_then(|s| s.warnings.get(index))
        .map_or(ptr::null(), |w| w.as_ptr())
}

/// Serialize the full run report to a JSON string. Returns null on
/// failure; release the string with `blendgas_string_free`.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn blendgas_solution_to_json(sol: *const BlendgasSolution) -> *mut c_char {
    let Some(sol) = sol.as_ref() else {
        set_last_error("solution handle is null");
        return ptr::null_mut();
    };
    match serde_json::to_string_pretty(&sol.report) {
        Ok(json) => CString::new(json).map_or(ptr::null_mut(), CString::into_raw),
        Err(err) => {
            set_last_error(&format!("report serialization: {err}"));
            ptr::null_mut()
        }
    }
}

/// Release a string returned by `blendgas_solution_to_json`. Null is
/// ignored.
///
/// # Safety
/// `s` must be null or an owned string obtained from this library that
/// has not been freed before.
#[no_mangle]
pub unsafe extern "C" fn blendgas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
