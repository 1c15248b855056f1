//! Residual formulation and damped least-squares solver.
//!
//! For networks with more than one independent cycle the unknowns
//! u = (q, η, p²) are found as a zero of the stacked steady-state
//! residual:
//!
//! * one pressure-law row per edge:  p²_head − p²_foot − σ̃(η, q)·q|q|,
//! * one mass-balance row per node:  Σ_e a(v,e) q_e − b_v,
//! * one cleared mixing row per node:
//!   η_v (Σ inflows + b⁻_v) − Σ η_upstream·inflow − ζ_v b⁻_v,
//! * one anchor row:  p²_anchor − (p*)².
//!
//! The system is square plus one redundant row (mass rows sum to zero),
//! solved in the least-squares sense by Levenberg–Marquardt with
//! Marquardt diagonal scaling and a forward-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gas;
use crate::network::Network;
use crate::solution::Solution;

/// Unknowns of the residual system, in packing order q, η, p².
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownVector {
    pub q: Vec<f64>,
    pub eta: Vec<f64>,
    pub p2: Vec<f64>,
}

impl UnknownVector {
    pub fn pack(&self) -> DVector<f64> {
        let mut u = Vec::with_capacity(self.q.len() + self.eta.len() + self.p2.len());
        u.extend_from_slice(&self.q);
        u.extend_from_slice(&self.eta);
        u.extend_from_slice(&self.p2);
        DVector::from_vec(u)
    }

    pub fn unpack(net: &Network, u: &DVector<f64>) -> UnknownVector {
        let (ne, nv) = (net.n_edges(), net.n_nodes());
        assert_eq!(u.len(), ne + 2 * nv, "unknown vector length mismatch");
        UnknownVector {
            q: u.as_slice()[..ne].to_vec(),
            eta: u.as_slice()[ne..ne + nv].to_vec(),
            p2: u.as_slice()[ne + nv..].to_vec(),
        }
    }
}

/// Number of residual rows for a network.
pub fn residual_len(net: &Network) -> usize {
    net.n_edges() + 2 * net.n_nodes() + 1
}

/// Evaluate the steady-state residual at the packed unknowns.
pub fn residual(net: &Network, u: &DVector<f64>) -> DVector<f64> {
    let (ne, nv) = (net.n_edges(), net.n_nodes());
    let q = &u.as_slice()[..ne];
    let eta = &u.as_slice()[ne..ne + nv];
    let p2 = &u.as_slice()[ne + nv..];

    let mut r = DVector::zeros(residual_len(net));
    for (e, edge) in net.edges().iter().enumerate() {
        let drop = gas::pressure_drop_squared(
            net.gas(),
            eta[edge.foot],
            eta[edge.head],
            q[e],
            edge.length,
            edge.diameter,
            edge.friction,
        );
        r[e] = p2[edge.head] - p2[edge.foot] - drop;
    }

    let loads = net.loads();
    for (v, node) in net.nodes().iter().enumerate() {
        let mut net_out = -loads[v];
        let mut inflow_sum = 0.0;
        let mut inflow_h2 = 0.0;
        for (e, edge) in net.edges().iter().enumerate() {
            let a = net.incidence_entry(v, e);
            if a == 0.0 {
                continue;
            }
            net_out += a * q[e];
            let incoming = a * q[e];
            if incoming > 0.0 {
                let upstream = if edge.foot == v { edge.head } else { edge.foot };
                inflow_sum += incoming;
                inflow_h2 += eta[upstream] * incoming;
            }
        }
        r[ne + v] = net_out;

        let supply = (-loads[v]).max(0.0);
        let zeta = node.supply_composition.unwrap_or(0.0);
        r[ne + nv + v] = eta[v] * (inflow_sum + supply) - inflow_h2 - zeta * supply;
    }

    let (anchor, p_star) = net
        .anchor()
        .expect("validated networks carry exactly one anchor");
    r[ne + 2 * nv] = p2[anchor] - p_star * p_star;
    r
}

/// Physically motivated starting point: balanced minimum-norm flows,
/// the supply-averaged composition everywhere, and the anchor pressure
/// squared at every node.
pub fn default_init(net: &Network) -> UnknownVector {
    let (nv, ne) = (net.n_nodes(), net.n_edges());
    let a = net.incidence_matrix();
    let b = DVector::from_vec(net.loads().to_vec());
    let q = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map(|x| x.as_slice().to_vec())
        .unwrap_or_else(|_| vec![0.0; ne]);

    let mut supply_total = 0.0;
    let mut supply_h2 = 0.0;
    for (v, node) in net.nodes().iter().enumerate() {
        let supply = (-net.loads()[v]).max(0.0);
        if supply > 0.0 {
            supply_total += supply;
            supply_h2 += node.supply_composition.unwrap_or(0.0) * supply;
        }
    }
    let eta0 = if supply_total > 0.0 {
        supply_h2 / supply_total
    } else {
        0.0
    };

    let p_star = net.anchor().map(|(_, p)| p).unwrap_or(1.0);
    UnknownVector {
        q,
        eta: vec![eta0; nv],
        p2: vec![p_star * p_star; nv],
    }
}

/// Options for [`solve_lm`].
#[derive(Debug, Clone)]
pub struct LmOptions {
    /// Convergence threshold on the residual max-norm.
    pub tol_residual: f64,
    /// Stall threshold on the step max-norm.
    pub tol_step: f64,
    pub max_iter: usize,
    /// Initial damping factor.
    pub nu0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            tol_residual: 1e-9,
            tol_step: 1e-12,
            max_iter: 500,
            nu0: 1e-3,
        }
    }
}

/// Convergence report of the damped least-squares iteration.
#[derive(Debug, Clone)]
pub struct LmReport {
    pub solution: Solution,
    pub iterations: usize,
    pub residual_max: f64,
}

fn fd_jacobian(net: &Network, u: &DVector<f64>, r0: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let m = r0.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut probe = u.clone();
    for j in 0..n {
        let h = 1e-7 * u[j].abs().max(1.0);
        probe[j] = u[j] + h;
        let rj = residual(net, &probe);
        probe[j] = u[j];
        for i in 0..m {
            jac[(i, j)] = (rj[i] - r0[i]) / h;
        }
    }
    jac
}

/// Solve the residual system by Levenberg–Marquardt from `init`
/// (default: [`default_init`]).
/// Project the η block of an iterate onto [0, 1].
///
/// Every steady state has nodal fractions inside the unit interval (each is a
/// convex combination of injected fractions), so the projection never excludes
/// a solution. Without it, a node whose throughput passes near zero leaves its
/// mixing row almost empty and the iterate can drift to huge |η|, where
/// σ²(η) turns the nearby pressure rows pathological and the solver stalls.
fn clamp_eta(net: &Network, u: &mut DVector<f64>) {
    let ne = net.n_edges();
    for i in ne..ne + net.n_nodes() {
        u[i] = u[i].clamp(0.0, 1.0);
    }
}

pub fn solve_lm(net: &Network, init: Option<&UnknownVector>, opts: &LmOptions) -> Result<LmReport> {
    let owned_init;
    let init = match init {
        Some(init) => init,
        None => {
            owned_init = default_init(net);
            &owned_init
        }
    };
    let mut u = init.pack();
    assert_eq!(u.len(), net.n_edges() + 2 * net.n_nodes());
    clamp_eta(net, &mut u);

    let mut r = residual(net, &u);
    let mut rmax = r.amax();
    let mut nu = opts.nu0;
    let mut iterations = 0;

    while rmax > opts.tol_residual {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual_max: rmax,
            });
        }
        iterations += 1;

        let jac = fd_jacobian(net, &u, &r);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        // Damping floor: a variable whose residual rows vanish (for example the
        // fraction at a node with no throughput) has a near-zero diagonal, and
        // pure Marquardt scaling would let the step run away along it. Tie the
        // floor to the mean curvature so such directions stay bounded.
        let floor = (jtj.trace() / jtj.nrows() as f64 * 1e-6).max(1e-12);
        // Active set for the η bounds: a fraction pinned at 0 or 1 whose
        // gradient points outside the box is frozen for this iteration, so the
        // remaining variables receive an undistorted step. Without this, a
        // near-dead fraction can act as a ghost supply: the computed step
        // spends itself on an infeasible η move that the projection then
        // discards.
        let ne = net.n_edges();
        let frozen: Vec<bool> = (0..u.len())
            .map(|i| {
                i >= ne
                    && i < ne + net.n_nodes()
                    && ((u[i] <= 0.0 && jtr[i] > 0.0) || (u[i] >= 1.0 && jtr[i] < 0.0))
            })
            .collect();

        // Try steps with growing damping until the residual improves.
        let mut stalled_step = false;
        let mut accepted = false;
        while nu < 1e16 {
            let mut damped = jtj.clone();
            for i in 0..damped.nrows() {
                // Marquardt scaling: damp proportionally to the local
                // curvature so mixed q/η/p² scales stay balanced.
                damped[(i, i)] += nu * jtj[(i, i)].max(floor);
            }
            let n = damped.nrows();
            for i in 0..n {
                if frozen[i] {
                    for j in 0..n {
                        damped[(i, j)] = 0.0;
                        damped[(j, i)] = 0.0;
                    }
                    damped[(i, i)] = 1.0;
                }
            }
            // Symmetric Jacobi equilibration before factorising. The diagonal
            // of the damped system spans many orders of magnitude (q, η and p²
            // live on different scales, and dead directions sit at the floor),
            // and an unequilibrated Cholesky would amplify roundoff from the
            // large pivots into the small ones.
            let scale: Vec<f64> = (0..n).map(|i| 1.0 / damped[(i, i)].sqrt()).collect();
            for i in 0..n {
                for j in 0..n {
                    damped[(i, j)] *= scale[i] * scale[j];
                }
            }
            let Some(chol) = damped.cholesky() else {
                nu *= 4.0;
                continue;
            };
            let scaled_rhs =
                DVector::from_fn(n, |i, _| if frozen[i] { 0.0 } else { -jtr[i] * scale[i] });
            let mut delta = chol.solve(&scaled_rhs);
            for i in 0..n {
                delta[i] *= scale[i];
            }
            let mut u_try = &u + &delta;
            clamp_eta(net, &mut u_try);
            let r_try = residual(net, &u_try);
            if r_try.norm() < r.norm() {
                if delta.amax() <= opts.tol_step * (1.0 + u.amax()) {
                    stalled_step = true;
                }
                u = u_try;
                r = r_try;
                rmax = r.amax();
                nu = (nu * 0.5).max(1e-12);
                accepted = true;
                break;
            }
            nu *= 2.0;
        }
        if !accepted || (stalled_step && rmax > opts.tol_residual) {
            return Err(Error::NoConvergence {
                iterations,
                residual_max: rmax,
            });
        }
    }

    let vars = UnknownVector::unpack(net, &u);
    let solution = Solution::from_parts(net, vars.q, vars.eta, vars.p2, Vec::new())?;
    Ok(LmReport {
        solution,
        iterations,
        residual_max: rmax,
    })
}

/// Pack an existing solution and evaluate the residual on it.
pub fn residual_of_solution(net: &Network, sol: &Solution) -> DVector<f64> {
    let u = UnknownVector {
        q: sol.q.clone(),
        eta: sol.eta_node.clone(),
        p2: sol.p2.clone(),
    }
    .pack();
    residual(net, &u)
}
