//! Boundary-pair sweeps over the cut parameters (λ, μ).
//!
//! The cut of a cyclic network exposes the two-parameter family of
//! boundary networks; sweeping (λ, μ) maps the matching functions H_p
//! and H_η over a rectangle, extracts the root curve μ_η(λ) of H_η,
//! and traces g(λ) = H_p(λ, μ_η(λ)) whose root is the steady state.
//!
//! Tree-shaped cut graphs are evaluated with the direct tree solver;
//! cut graphs that remain cyclic fall back to the damped least-squares
//! solver. Every grid point is solved independently (no warm starts),
//! so runs are deterministic under any parallel schedule.

use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::cut::{self, CutBoundary};
use crate::error::{Error, Result};
use crate::network::{CutGraph, Network};
use crate::residual::{self, LmOptions};

/// Bisection tolerance on |H_η| when the root curve is extracted
/// numerically (cyclic cut graphs).
const ROOT_TOL_ETA: f64 = 1e-9;
/// A numeric root-curve sample fails when no μ achieves |H_η| below
/// this threshold.
const ROOT_FAIL_ETA: f64 = 1e-6;
/// Number of probes in the dense μ-scan fallback.
const ROOT_SCAN_POINTS: usize = 101;

/// Outcome of one grid-point or curve-sample evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// H_η vanishes identically in μ (λ = 0): any μ is a root.
    Degenerate,
    Failed(String),
}

impl PointStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, PointStatus::Ok)
    }

    /// Single-token CSV label.
    pub fn label(&self) -> String {
        match self {
            PointStatus::Ok => "ok".into(),
            PointStatus::Degenerate => "degenerate".into(),
            PointStatus::Failed(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
        }
    }
}

/// One evaluated boundary pair.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub mu: f64,
    pub h_p: f64,
    pub h_eta: f64,
    pub status: PointStatus,
}

/// Rectangular sweep result, λ-major: `points[i_λ · n_μ + i_μ]`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub cut_edge: String,
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepGrid {
    pub fn at(&self, i_lambda: usize, i_mu: usize) -> &SweepPoint {
        &self.points[i_lambda * self.mus.len() + i_mu]
    }

    pub fn converged_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 1.0;
        }
        let ok = self
            .points
            .iter()
            .filter(|p| !matches!(p.status, PointStatus::Failed(_)))
            .count();
        ok as f64 / self.points.len() as f64
    }
}

/// One sample of the root curve: μ solves H_η(λ, ·) = 0 and `h_p` is
/// g(λ) evaluated there.
#[derive(Debug, Clone, Serialize)]
pub struct RootSample {
    pub lambda: f64,
    pub mu: f64,
    pub h_p: f64,
    pub h_eta: f64,
    pub status: PointStatus,
}

/// The extracted root curve λ ↦ (μ_η(λ), g(λ)).
#[derive(Debug, Clone, Serialize)]
pub struct RootCurve {
    pub cut_edge: String,
    pub samples: Vec<RootSample>,
}

/// Composition of one node over the sweep rectangle, λ-major.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionSlice {
    pub cut_edge: String,
    pub node: String,
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    pub eta: Vec<f64>,
    pub statuses: Vec<PointStatus>,
}

/// Inclusive evenly spaced grid with exact endpoints.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}

/// Total supplied mass flow: the physical bound on any transfer.
pub fn supply_transfer_bound(net: &Network) -> f64 {
    net.loads().iter().filter(|&&b| b < 0.0).map(|b| -b).sum()
}

/// Sum of all load magnitudes (the looser printed bound).
pub fn total_load_bound(net: &Network) -> f64 {
    net.loads().iter().map(|b| b.abs()).sum()
}

/// Sweep controls.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub n_lambda: usize,
    pub n_mu: usize,
    /// Override for the λ interval; default: [γ_min, γ_max] when the
    /// cut graph is a tree, ±(total supply) otherwise.
    pub lambda_range: Option<(f64, f64)>,
    /// Use Σ|b_v| over all nodes instead of the supply total for the
    /// default λ interval of cyclic cut graphs.
    pub all_loads_bound: bool,
    pub lm: LmOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            n_lambda: 50,
            n_mu: 51,
            lambda_range: None,
            all_loads_bound: false,
            lm: LmOptions::default(),
        }
    }
}

/// Pick the cut edge: an explicit id must sit on a cycle; otherwise
/// take the smallest-id edge that does.
pub fn resolve_cut_edge(net: &Network, requested: Option<&str>) -> Result<usize> {
    let cycles = crate::graph::fundamental_cycles(net);
    let mut on_cycle = vec![false; net.n_edges()];
    for cycle in &cycles {
        for &e in &cycle.edges {
            on_cycle[e] = true;
        }
    }
    match requested {
        Some(id) => {
            let e = net.edge_idx(id)?;
            // Membership in a fundamental cycle is basis-dependent; the
            // cut is valid iff the edge is not a bridge.
            let cg = net.cut(e)?;
            if cg.bridge {
                return Err(Error::CutEdgeOffCycle {
                    edge: id.into(),
                    reason: "it is a bridge".into(),
                });
            }
            Ok(e)
        }
        None => (0..net.n_edges())
            .filter(|&e| on_cycle[e])
            .min_by(|&a, &b| net.edges()[a].id.cmp(&net.edges()[b].id))
            .ok_or_else(|| {
                Error::Usage("the network has no cycle; there is nothing to cut".into())
            }),
    }
}

fn default_lambda_range(net: &Network, cg: &CutGraph, opts: &SweepOptions) -> Result<(f64, f64)> {
    if let Some(range) = opts.lambda_range {
        if range.0 >= range.1 || range.0.is_nan() || range.1.is_nan() {
            return Err(Error::Usage(format!(
                "empty λ interval [{}, {}]",
                range.0, range.1
            )));
        }
        return Ok(range);
    }
    if cg.is_tree() {
        let gb = cut::gamma_constants(cg)?;
        Ok((gb.gamma_min, gb.gamma_max))
    } else {
        let bound = if opts.all_loads_bound {
            total_load_bound(net)
        } else {
            supply_transfer_bound(net)
        };
        Ok((-bound, bound))
    }
}

/// Evaluate (H_p, H_η) for one boundary pair, dispatching on the shape
/// of the cut graph.
fn eval_point(cg: &CutGraph, lambda: f64, mu: f64, lm: &LmOptions) -> Result<(f64, f64)> {
    if cg.is_tree() {
        cut::eval_h(cg, CutBoundary { lambda, mu })
    } else {
        let bn = cg.boundary_network(lambda, mu);
        let report = residual::solve_lm(&bn, None, lm)?;
        let sol = report.solution;
        Ok((
            sol.p2[cg.v_cr] - sol.p2[cg.v_cl],
            sol.eta_node[cg.v_cr] - sol.eta_node[cg.v_cl],
        ))
    }
}

/// Map H_p and H_η over the (λ, μ) rectangle.
pub fn sweep(net: &Network, cut_edge: Option<&str>, opts: &SweepOptions) -> Result<SweepGrid> {
    if opts.n_lambda < 2 || opts.n_mu < 2 {
        return Err(Error::Usage("sweep grids need at least 2×2 points".into()));
    }
    let e = resolve_cut_edge(net, cut_edge)?;
    let cg = net.cut(e)?;
    let (lo, hi) = default_lambda_range(net, &cg, opts)?;
    let lambdas = linspace(lo, hi, opts.n_lambda);
    let mus = linspace(0.0, 1.0, opts.n_mu);

    let points: Vec<SweepPoint> = (0..lambdas.len() * mus.len())
        .into_par_iter()
        .map(|idx| {
            let lambda = lambdas[idx / mus.len()];
            let mu = mus[idx % mus.len()];
            match eval_point(&cg, lambda, mu, &opts.lm) {
                Ok((h_p, h_eta)) => SweepPoint {
                    lambda,
                    mu,
                    h_p,
                    h_eta,
                    status: PointStatus::Ok,
                },
                Err(err) => SweepPoint {
                    lambda,
                    mu,
                    h_p: f64::NAN,
                    h_eta: f64::NAN,
                    status: PointStatus::Failed(err.to_string()),
                },
            }
        })
        .collect();

    Ok(SweepGrid {
        cut_edge: net.edges()[e].id.clone(),
        lambdas,
        mus,
        points,
    })
}

/// Find the μ-root of H_η(λ, ·) on a cyclic cut graph by bisection,
/// with a dense scan fallback when the endpoint signs agree.
fn numeric_root_mu(cg: &CutGraph, lambda: f64, lm: &LmOptions) -> Result<(f64, f64, PointStatus)> {
    let phi = |mu: f64| -> Result<f64> { Ok(eval_point(cg, lambda, mu, lm)?.1) };

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut phi_lo = phi(lo)?;
    let mut phi_hi = phi(hi)?;
    if phi_lo.abs() <= ROOT_TOL_ETA {
        return Ok((lo, phi_lo, PointStatus::Ok));
    }
    if phi_hi.abs() <= ROOT_TOL_ETA {
        return Ok((hi, phi_hi, PointStatus::Ok));
    }

    if phi_lo.signum() == phi_hi.signum() {
        // Scan for a sign change (or detect degeneracy).
        let scan = linspace(0.0, 1.0, ROOT_SCAN_POINTS);
        let mut best = (0.0, f64::INFINITY);
        let mut bracket = None;
        let mut prev: Option<(f64, f64)> = None;
        let mut max_abs: f64 = 0.0;
        for &mu in &scan {
            let val = phi(mu)?;
            max_abs = max_abs.max(val.abs());
            if val.abs() < best.1 {
                best = (mu, val.abs());
            }
            if let Some((pm, pv)) = prev {
                if pv.signum() != val.signum() {
                    bracket = Some((pm, pv, mu, val));
                }
            }
            prev = Some((mu, val));
        }
        if max_abs < 1e-8 {
            // H_η vanishes for every μ: the whole segment is a root.
            return Ok((f64::NAN, 0.0, PointStatus::Degenerate));
        }
        match bracket {
            Some((a, fa, b, fb)) => {
                lo = a;
                phi_lo = fa;
                hi = b;
                phi_hi = fb;
            }
            None => {
                if best.1 > ROOT_FAIL_ETA {
                    return Ok((
                        best.0,
                        best.1,
                        PointStatus::Failed(format!(
                            "no root of H_eta in mu at lambda = {lambda}: min |H_eta| = {:e}",
                            best.1
                        )),
                    ));
                }
                return Ok((best.0, best.1, PointStatus::Ok));
            }
        }
    }

    let _ = phi_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let val = phi(mid)?;
        if val.abs() <= ROOT_TOL_ETA || hi - lo < 1e-14 {
            return Ok((mid, val, PointStatus::Ok));
        }
        if val.signum() == phi_lo.signum() {
            lo = mid;
            phi_lo = val;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let val = phi(mid)?;
    if val.abs() <= ROOT_FAIL_ETA {
        Ok((mid, val, PointStatus::Ok))
    } else {
        Ok((
            mid,
            val,
            PointStatus::Failed(format!(
                "mu bisection stalled at lambda = {lambda}: |H_eta| = {:e}",
                val.abs()
            )),
        ))
    }
}

/// Trace the root curve of H_η and g(λ) along it.
pub fn root_curve(net: &Network, cut_edge: Option<&str>, opts: &SweepOptions) -> Result<RootCurve> {
    if opts.n_lambda < 2 {
        return Err(Error::Usage(
            "the root curve needs at least 2 samples".into(),
        ));
    }
    let e = resolve_cut_edge(net, cut_edge)?;
    let cg = net.cut(e)?;
    let (lo, hi) = default_lambda_range(net, &cg, opts)?;
    let lambdas = linspace(lo, hi, opts.n_lambda);

    let samples: Vec<RootSample> = lambdas
        .par_iter()
        .map(|&lambda| {
            let evaluated: Result<RootSample> = (|| {
                if cg.is_tree() {
                    if lambda == 0.0 {
                        // Both stubs are stagnant: H_η ≡ 0 in μ.
                        return Ok(RootSample {
                            lambda,
                            mu: f64::NAN,
                            h_p: cut::restricted_g(&cg, 0.0)?,
                            h_eta: 0.0,
                            status: PointStatus::Degenerate,
                        });
                    }
                    let mu = cut::root_curve_mu(&cg, lambda)?;
                    let (h_p, h_eta) = cut::eval_h(&cg, CutBoundary { lambda, mu })?;
                    Ok(RootSample {
                        lambda,
                        mu,
                        h_p,
                        h_eta,
                        status: PointStatus::Ok,
                    })
                } else {
                    let (mu, h_eta, status) = numeric_root_mu(&cg, lambda, &opts.lm)?;
                    let h_p = if mu.is_nan() {
                        eval_point(&cg, lambda, 0.5, &opts.lm)?.0
                    } else {
                        eval_point(&cg, lambda, mu, &opts.lm)?.0
                    };
                    Ok(RootSample {
                        lambda,
                        mu,
                        h_p,
                        h_eta,
                        status,
                    })
                }
            })();
            evaluated.unwrap_or_else(|err| RootSample {
                lambda,
                mu: f64::NAN,
                h_p: f64::NAN,
                h_eta: f64::NAN,
                status: PointStatus::Failed(err.to_string()),
            })
        })
        .collect();

    Ok(RootCurve {
        cut_edge: net.edges()[e].id.clone(),
        samples,
    })
}

/// Track one node's composition over the sweep rectangle.
pub fn composition_slice(
    net: &Network,
    cut_edge: Option<&str>,
    node_id: &str,
    opts: &SweepOptions,
) -> Result<CompositionSlice> {
    if opts.n_lambda < 2 || opts.n_mu < 2 {
        return Err(Error::Usage("sweep grids need at least 2×2 points".into()));
    }
    let e = resolve_cut_edge(net, cut_edge)?;
    let v = net.node_idx(node_id)?;
    let cg = net.cut(e)?;
    let (lo, hi) = default_lambda_range(net, &cg, opts)?;
    let lambdas = linspace(lo, hi, opts.n_lambda);
    let mus = linspace(0.0, 1.0, opts.n_mu);

    let evaluated: Vec<(f64, PointStatus)> = (0..lambdas.len() * mus.len())
        .into_par_iter()
        .map(|idx| {
            let lambda = lambdas[idx / mus.len()];
            let mu = mus[idx % mus.len()];
            let solved: Result<f64> = (|| {
                let bn = cg.boundary_network(lambda, mu);
                if cg.is_tree() {
                    Ok(crate::tree::solve_tree(&bn)?.eta_node[v])
                } else {
                    Ok(residual::solve_lm(&bn, None, &opts.lm)?.solution.eta_node[v])
                }
            })();
            match solved {
                Ok(eta) => (eta, PointStatus::Ok),
                Err(err) => (f64::NAN, PointStatus::Failed(err.to_string())),
            }
        })
        .collect();

    let (eta, statuses) = evaluated.into_iter().unzip();
    Ok(CompositionSlice {
        cut_edge: net.edges()[e].id.clone(),
        node: node_id.into(),
        lambdas,
        mus,
        eta,
        statuses,
    })
}

/// Write a sweep grid in long CSV form: `lambda,mu,Hp,Heta,status`.
pub fn write_grid_csv<W: Write>(grid: &SweepGrid, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lambda", "mu", "Hp", "Heta", "status"])
        .map_err(csv_err)?;
    for p in &grid.points {
        out.write_record([
            format!("{:.17e}", p.lambda),
            format!("{:.17e}", p.mu),
            format!("{:.17e}", p.h_p),
            format!("{:.17e}", p.h_eta),
            p.status.label(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Write a root curve in CSV form: `lambda,mu,Hp,Heta,status`.
pub fn write_curve_csv<W: Write>(curve: &RootCurve, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lambda", "mu", "Hp", "Heta", "status"])
        .map_err(csv_err)?;
    for s in &curve.samples {
        out.write_record([
            format!("{:.17e}", s.lambda),
            format!("{:.17e}", s.mu),
            format!("{:.17e}", s.h_p),
            format!("{:.17e}", s.h_eta),
            s.status.label(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Write a composition slice in long CSV form:
/// `lambda,mu,eta,status`.
pub fn write_slice_csv<W: Write>(slice: &CompositionSlice, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lambda", "mu", "eta", "status"])
        .map_err(csv_err)?;
    for (idx, eta) in slice.eta.iter().enumerate() {
        let lambda = slice.lambdas[idx / slice.mus.len()];
        let mu = slice.mus[idx % slice.mus.len()];
        out.write_record([
            format!("{:.17e}", lambda),
            format!("{:.17e}", mu),
            format!("{:.17e}", eta),
            slice.statuses[idx].label(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("csv: {other:?}")),
    }
}
