//! Existence machinery for single-cycle networks.
//!
//! A network with one cycle is solved by cutting one cycle edge
//! ([`Network::cut`]), which leaves a tree whose boundary data carries
//! two free parameters: the transfer flow λ (load pair λ at v_cl, −λ at
//! v_cr) and the boundary supply composition μ. Matching the cut ends —
//! squared pressures via H_p = p²_cr − p²_cl and compositions via
//! H_η = η_cr − η_cl — reduces the network to a scalar root problem:
//!
//!   1. flows on the cut tree are affine in λ, which brackets the
//!      admissible transfers to [γ_min, γ_max] ([`gamma_constants`]);
//!   2. for fixed λ, H_η has a unique root μ_η(λ), read off the
//!      demand-side cut node ([`root_curve_mu`]);
//!   3. g(λ) = H_p(λ, μ_η(λ)) changes sign over the bracket; bisection
//!      finds λ* ([`solve_single_cycle`]), and the tree solution at
//!      (λ*, μ_η(λ*)) reassembles to a steady state of the uncut network.

use crate::error::{Error, Result};
use crate::graph::tree_path;
use crate::network::{CutGraph, Network};
use crate::solution::Solution;
use crate::tree;

/// Boundary data of a cut graph: transfer flow λ through the cut and
/// gas composition μ injected on the supply side of the cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutBoundary {
    pub lambda: f64,
    pub mu: f64,
}

/// The λ-affine structure of the flows along the v_cr → v_cl path.
///
/// For the path edge e whose endpoint v_e lies closer to v_cr, the cut
/// tree satisfies a(v_e, e)·q_e(λ) = γ_e − λ; the admissible transfers
/// are exactly [γ_min, γ_max]. The stub edges always contribute γ = 0,
/// so the bracket contains 0 (the λ = 0 tree is always admissible).
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBounds {
    /// Path from v_cr to v_cl in the cut tree (node indices).
    pub path_nodes: Vec<usize>,
    /// Path edges, aligned between consecutive path nodes.
    pub path_edges: Vec<usize>,
    /// γ_e per path edge, aligned with `path_edges`.
    pub gamma: Vec<f64>,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

/// Read the γ constants off a single tree solve at λ = 0.
pub fn gamma_constants(cg: &CutGraph) -> Result<GammaBounds> {
    require_cut_tree(cg)?;
    let zero = cg.boundary_network(0.0, 0.0);
    let q0 = tree::solve_flows(&zero)?;
    let (path_nodes, path_edges) = tree_path(&zero, cg.v_cr, cg.v_cl)?;

    let gamma: Vec<f64> = path_edges
        .iter()
        .enumerate()
        .map(|(i, &e)| zero.incidence_entry(path_nodes[i], e) * q0[e])
        .collect();
    let gamma_min = gamma.iter().copied().fold(f64::INFINITY, f64::min);
    let gamma_max = gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(gamma_min <= 0.0 && 0.0 <= gamma_max);

    Ok(GammaBounds {
        path_nodes,
        path_edges,
        gamma,
        gamma_min,
        gamma_max,
    })
}

fn require_cut_tree(cg: &CutGraph) -> Result<()> {
    if cg.bridge {
        let id = cg.derived.edges()[cg.e_cl].id.clone();
        return Err(Error::CutEdgeOffCycle {
            edge: id.trim_end_matches("__cl").to_string(),
            reason: "it is a bridge".into(),
        });
    }
    if !cg.is_tree() {
        return Err(Error::NotATree(format!(
            "cut graph still has {} independent cycles",
            cg.derived.cycle_count()
        )));
    }
    Ok(())
}

/// Solve the cut tree for one boundary pair and return the full
/// solution together with (H_p, H_η).
pub fn eval_h_solution(cg: &CutGraph, boundary: CutBoundary) -> Result<(Solution, f64, f64)> {
    require_cut_tree(cg)?;
    let net = cg.boundary_network(boundary.lambda, boundary.mu);
    let sol = tree::solve_tree(&net)?;
    let h_p = sol.p2[cg.v_cr] - sol.p2[cg.v_cl];
    let h_eta = sol.eta_node[cg.v_cr] - sol.eta_node[cg.v_cl];
    Ok((sol, h_p, h_eta))
}

/// H_p and H_η for one boundary pair on a tree-shaped cut graph.
pub fn eval_h(cg: &CutGraph, boundary: CutBoundary) -> Result<(f64, f64)> {
    let (_, h_p, h_eta) = eval_h_solution(cg, boundary)?;
    Ok((h_p, h_eta))
}

/// Demand-side cut-node composition at the given λ, which is the unique
/// root μ_η(λ) of μ ↦ H_η(λ, μ): the supply side matches μ identically,
/// and the demand side never sees the boundary gas, so equality holds
/// exactly at μ = demand-side η.
fn demand_side_eta(cg: &CutGraph, lambda: f64, probe_mu: f64) -> Result<f64> {
    let (sol, _, _) = eval_h_solution(
        cg,
        CutBoundary {
            lambda,
            mu: probe_mu,
        },
    )?;
    // For λ > 0 gas crosses from the v_cl side to the v_cr side, so the
    // demand-side cut node is v_cl; vice versa for λ < 0. At λ = 0 both
    // stubs are stagnant and H_η ≡ 0; return v_cl's (defaulted) value.
    Ok(if lambda < 0.0 {
        sol.eta_node[cg.v_cr]
    } else {
        sol.eta_node[cg.v_cl]
    })
}

/// The root curve μ_η(λ) of H_η for a tree-shaped cut graph.
///
/// Computed from a probe solve at μ = 0.5 and cross-checked with a
/// second probe at μ = 0: the demand-side composition must not depend
/// on the probe (the boundary gas flows away from the demand side).
/// Fails with [`Error::OutOfBracket`] outside [γ_min, γ_max].
pub fn root_curve_mu(cg: &CutGraph, lambda: f64) -> Result<f64> {
    let gb = gamma_constants(cg)?;
    if lambda < gb.gamma_min || lambda > gb.gamma_max {
        return Err(Error::OutOfBracket {
            lambda,
            gamma_min: gb.gamma_min,
            gamma_max: gb.gamma_max,
        });
    }
    let mu = demand_side_eta(cg, lambda, 0.5)?;
    let check = demand_side_eta(cg, lambda, 0.0)?;
    debug_assert!(
        (mu - check).abs() <= 1e-12,
        "demand-side composition leaked the probe μ: {mu} vs {check}"
    );
    Ok(mu)
}

/// g(λ) = H_p(λ, μ_η(λ)): the pressure gap along the root curve of the
/// composition gap. Solutions of the uncut network correspond to roots
/// of g. Costs two tree solves (root curve probe, then H_p).
pub fn restricted_g(cg: &CutGraph, lambda: f64) -> Result<f64> {
    let mu = demand_side_eta(cg, lambda, 0.5)?;
    let (_, h_p, _) = eval_h_solution(cg, CutBoundary { lambda, mu })?;
    Ok(h_p)
}

/// Options for [`solve_single_cycle`].
#[derive(Debug, Clone)]
pub struct CycleOptions {
    /// Cycle edge to cut; default: the cycle edge with the smallest id.
    pub cut_edge: Option<String>,
    /// Bisection tolerance on |g(λ*)| (squared-pressure units).
    pub tol_p: f64,
    /// Bisection iteration budget.
    pub max_iter: usize,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            cut_edge: None,
            tol_p: 1e-10,
            max_iter: 200,
        }
    }
}

/// Result of the single-cycle solve: the reassembled solution plus the
/// cut diagnostics.
#[derive(Debug, Clone)]
pub struct CycleReport {
    pub solution: Solution,
    /// Flow through the (former) cut edge.
    pub lambda_star: f64,
    /// Composition through the cut edge (its upstream node's η).
    pub mu_star: f64,
    /// Bisection steps consumed.
    pub iterations: usize,
    /// Remaining pressure gap |g(λ*)| at the accepted root.
    pub g_at_root: f64,
    /// Id of the edge that was cut.
    pub cut_edge: String,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

/// Solve a network with exactly one independent cycle by cutting,
/// bisecting g, and reassembling.
pub fn solve_single_cycle(net: &Network, opts: &CycleOptions) -> Result<CycleReport> {
    let cycles = crate::graph::fundamental_cycles(net);
    if cycles.len() != 1 {
        return Err(Error::NotSingleCycle {
            found: cycles.len(),
        });
    }
    let cycle = &cycles[0];

    let cut_edge = match &opts.cut_edge {
        Some(id) => {
            let e = net.edge_idx(id)?;
            if !cycle.edges.contains(&e) {
                return Err(Error::CutEdgeOffCycle {
                    edge: id.clone(),
                    reason: "cutting it leaves the cycle intact".into(),
                });
            }
            e
        }
        None => cycle
            .edges
            .iter()
            .copied()
            .min_by(|&a, &b| net.edges()[a].id.cmp(&net.edges()[b].id))
            .expect("a cycle has at least one edge"),
    };

    let cg = net.cut(cut_edge)?;
    let gb = gamma_constants(&cg)?;

    // Shift the bracket ends inward: at the exact endpoints one path
    // edge is stagnant and g is only one-sidedly differentiable, which
    // makes endpoint evaluations a poor seed for the bisection.
    let eps = 1e-8 * (gb.gamma_max - gb.gamma_min).abs().max(1.0);
    let (mut lo, mut hi) = (gb.gamma_min + eps, gb.gamma_max - eps);
    if lo >= hi {
        // Degenerate bracket (e.g. a cycle carrying no load at all).
        lo = gb.gamma_min;
        hi = gb.gamma_max;
    }
    let g = |lambda: f64| restricted_g(&cg, lambda);
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;

    // If the shifted bracket misses the sign change, the root sits in
    // one of the ε-margins: fall back to the exact endpoints.
    if g_lo > 0.0 {
        let g_end = g(gb.gamma_min)?;
        if g_end <= 0.0 {
            hi = lo;
            g_hi = g_lo;
            lo = gb.gamma_min;
            g_lo = g_end;
        }
    } else if g_hi < 0.0 {
        let g_end = g(gb.gamma_max)?;
        if g_end >= 0.0 {
            lo = hi;
            g_lo = g_hi;
            hi = gb.gamma_max;
            g_hi = g_end;
        }
    }

    let (lambda_star, g_star, iterations) = if g_lo.abs() <= opts.tol_p {
        (lo, g_lo, 0)
    } else if g_hi.abs() <= opts.tol_p {
        (hi, g_hi, 0)
    } else if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::NoSignChange {
            gamma_min: gb.gamma_min,
            gamma_max: gb.gamma_max,
            g_lo,
            g_hi,
        });
    } else {
        let mut result = None;
        let mut iterations = 0;
        for _ in 0..opts.max_iter {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            let g_mid = g(mid)?;
            if g_mid.abs() <= opts.tol_p {
                result = Some((mid, g_mid));
                break;
            }
            if g_mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * (lo.abs().max(hi.abs()).max(1.0)) {
                // Interval exhausted at machine precision without
                // meeting tol_p: the residual cannot shrink further.
                break;
            }
        }
        match result {
            Some((lambda, g_val)) => (lambda, g_val, iterations),
            None => {
                let mid = 0.5 * (lo + hi);
                let g_mid = g(mid)?;
                if g_mid.abs() <= opts.tol_p {
                    (mid, g_mid, iterations)
                } else {
                    return Err(Error::NoConvergence {
                        iterations,
                        residual_max: g_mid.abs(),
                    });
                }
            }
        }
    };

    // Reassemble: solve the cut tree at the root and transplant the
    // state back onto the original network. Original node indices are
    // preserved by the cut; the two stubs collapse back into the cut
    // edge, which carries exactly λ*.
    let mu_star_root = demand_side_eta(&cg, lambda_star, 0.5)?;
    let (sol, _, _) = eval_h_solution(
        &cg,
        CutBoundary {
            lambda: lambda_star,
            mu: mu_star_root,
        },
    )?;

    let mut q = vec![0.0; net.n_edges()];
    for (derived_e, &orig) in cg.derived_to_original_edge.iter().enumerate() {
        if let Some(orig) = orig {
            q[orig] = sol.q[derived_e];
        }
    }
    q[cut_edge] = lambda_star;
    let eta_node: Vec<f64> = sol.eta_node[..net.n_nodes()].to_vec();
    let p2: Vec<f64> = sol.p2[..net.n_nodes()].to_vec();
    let boundary_ids = [
        cg.derived.nodes()[cg.v_cl].id.as_str(),
        cg.derived.nodes()[cg.v_cr].id.as_str(),
    ];
    let warnings: Vec<String> = sol
        .warnings
        .iter()
        .filter(|w| !boundary_ids.iter().any(|id| w.contains(&format!("'{id}'"))))
        .cloned()
        .collect();

    let edge = &net.edges()[cut_edge];
    let mu_star = if lambda_star >= 0.0 {
        eta_node[edge.foot]
    } else {
        eta_node[edge.head]
    };

    Ok(CycleReport {
        solution: Solution::from_parts(net, q, eta_node, p2, warnings)?,
        lambda_star,
        mu_star,
        iterations,
        g_at_root: g_star.abs(),
        cut_edge: edge.id.clone(),
        gamma_min: gb.gamma_min,
        gamma_max: gb.gamma_max,
    })
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

    fn node(id: &str, load: f64, zeta: Option<f64>, anchor: Option<f64>) -> NodeSpec {
        NodeSpec {
            id: id.into(),
            load,
            supply_composition: zeta,
            pressure_anchor: anchor,
        }
    }

    fn pipe(id: &str, foot: &str, head: &str, length: f64) -> EdgeSpec {
        EdgeSpec {
            id: id.into(),
            foot: foot.into(),
            head: head.into(),
            length,
            diameter: Some(1.0),
            friction: Some(0.5),
        }
    }

    /// s(−d) feeding d(+d) through two parallel pipes of equal length.
    fn parallel_pipes(d: f64) -> Network {
        Network::new(
            vec![
                node("s", -d, Some(0.4), Some(20.0)),
                node("d", d, None, None),
            ],
            vec![pipe("p1", "s", "d", 2.0), pipe("p2", "s", "d", 2.0)],
            unit_gas(),
            PipeDefaults::default(),
        )
        .unwrap()
    }

    /// Two supplies with opposite compositions joined in a triangle:
    /// s1(−1, ζ=1) ── a ──▶ d(+2) ◀── b ── s2(−1, ζ=0), plus the tie
    /// edge c from s1 to s2 closing the cycle.
    fn triangle() -> Network {
        Network::new(
            vec![
                node("s1", -1.0, Some(1.0), Some(20.0)),
                node("s2", -1.0, Some(0.0), None),
                node("d", 2.0, None, None),
            ],
            vec![
                pipe("a", "s1", "d", 1.0),
                pipe("b", "s2", "d", 1.0),
                pipe("c", "s1", "s2", 1.0),
            ],
            unit_gas(),
            PipeDefaults::default(),
        )
        .unwrap()
    }

    #[test]
    fn gamma_of_parallel_pipes_is_zero_to_demand() {
        let net = parallel_pipes(3.0);
        let cg = net.cut(net.edge_idx("p2").unwrap()).unwrap();
        let gb = gamma_constants(&cg).unwrap();
        // Stubs contribute 0 and 0; the surviving pipe contributes d.
        assert_eq!(gb.gamma_min, 0.0);
        assert_eq!(gb.gamma_max, 3.0);
        assert_eq!(gb.gamma.len(), 3);
        assert!(gb.gamma.contains(&3.0));
    }

    #[test]
    fn gamma_brackets_always_contain_zero() {
        let net = triangle();
        for e in 0..net.n_edges() {
            let cg = net.cut(e).unwrap();
            let gb = gamma_constants(&cg).unwrap();
            assert!(gb.gamma_min <= 0.0, "cut {e}: {:?}", gb.gamma);
            assert!(gb.gamma_max >= 0.0, "cut {e}: {:?}", gb.gamma);
        }
    }

    #[test]
    fn flows_on_the_path_are_affine_in_lambda() {
        let net = triangle();
        let cg = net.cut(net.edge_idx("c").unwrap()).unwrap();
        let gb = gamma_constants(&cg).unwrap();
        // Sample three λ and check a(v_e, e)·q_e = γ_e − λ to 1e−10.
        for &lambda in &[gb.gamma_min, 0.3, gb.gamma_max] {
            let bn = cg.boundary_network(lambda, 0.5);
            let q = tree::solve_flows(&bn).unwrap();
            for (i, &e) in gb.path_edges.iter().enumerate() {
                let lhs = bn.incidence_entry(gb.path_nodes[i], e) * q[e];
                assert!(
                    (lhs - (gb.gamma[i] - lambda)).abs() < 1e-10,
                    "edge {e} at λ={lambda}: {lhs} vs {}",
                    gb.gamma[i] - lambda
                );
            }
        }
    }

    #[test]
    fn eval_h_signs_at_bracket_ends() {
        let net = parallel_pipes(3.0);
        let cg = net.cut(net.edge_idx("p2").unwrap()).unwrap();
        let gb = gamma_constants(&cg).unwrap();
        let (h_lo, _) = eval_h(
            &cg,
            CutBoundary {
                lambda: gb.gamma_min,
                mu: 0.4,
            },
        )
        .unwrap();
        let (h_hi, _) = eval_h(
            &cg,
            CutBoundary {
                lambda: gb.gamma_max,
                mu: 0.4,
            },
        )
        .unwrap();
        assert!(h_lo <= 1e-12, "H_p(γ_min) = {h_lo}");
        assert!(h_hi >= -1e-12, "H_p(γ_max) = {h_hi}");
    }

    #[test]
    fn h_p_is_constant_in_mu_at_lambda_zero() {
        let net = triangle();
        let cg = net.cut(net.edge_idx("c").unwrap()).unwrap();
        let mut values = Vec::new();
        for &mu in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let (h_p, _) = eval_h(&cg, CutBoundary { lambda: 0.0, mu }).unwrap();
            values.push(h_p);
        }
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread.abs() < 1e-12, "spread = {spread:e}");
    }

    #[test]
    fn h_eta_is_affine_in_mu() {
        let net = triangle();
        let cg = net.cut(net.edge_idx("c").unwrap()).unwrap();
        for &lambda in &[-0.7, -0.2, 0.4, 0.9] {
            let h = |mu: f64| eval_h(&cg, CutBoundary { lambda, mu }).unwrap().1;
            let (h0, h05, h1) = (h(0.0), h(0.5), h(1.0));
            assert!(
                (h05 - 0.5 * (h0 + h1)).abs() < 1e-12,
                "λ={lambda}: {h0} {h05} {h1}"
            );
        }
    }

    #[test]
    fn root_curve_annihilates_h_eta_and_ignores_probe() {
        let net = triangle();
        let cg = net.cut(net.edge_idx("c").unwrap()).unwrap();
        for &lambda in &[-0.9, -0.3, 0.2, 0.8] {
            let mu = root_curve_mu(&cg, lambda).unwrap();
            assert!((0.0..=1.0).contains(&mu));
            let (_, h_eta) = eval_h(&cg, CutBoundary { lambda, mu }).unwrap();
            assert!(h_eta.abs() < 1e-12, "λ={lambda}: H_η={h_eta:e}");
            // The probe must not leak: recompute through both probes.
            let via_zero = demand_side_eta(&cg, lambda, 0.0).unwrap();
            assert_eq!(mu, via_zero);
        }
    }

    #[test]
    fn root_curve_rejects_lambda_outside_bracket() {
        let net = parallel_pipes(3.0);
        let cg = net.cut(net.edge_idx("p2").unwrap()).unwrap();
        assert!(matches!(
            root_curve_mu(&cg, 4.0),
            Err(Error::OutOfBracket { .. })
        ));
        assert!(matches!(
            root_curve_mu(&cg, -0.5),
            Err(Error::OutOfBracket { .. })
        ));
    }

    #[test]
    fn g_is_continuous_across_lambda_zero() {
        let net = triangle();
        let cg = net.cut(net.edge_idx("c").unwrap()).unwrap();
        let g_left = restricted_g(&cg, -1e-6).unwrap();
        let g_right = restricted_g(&cg, 1e-6).unwrap();
        // μ_η jumps at 0, but g inherits continuity from H_p: the two
        // probes may differ only at the quadratic flow scale.
        let scale = 20.0 * 20.0; // anchor p², the natural H_p scale
        assert!(
            (g_left - g_right).abs() < 1e-6 * scale,
            "g(−1e−6)={g_left}, g(1e−6)={g_right}"
        );
    }

    #[test]
    fn parallel_pipes_split_the_load_evenly() {
        let net = parallel_pipes(3.0);
        let report = solve_single_cycle(&net, &CycleOptions::default()).unwrap();
        // Perfect symmetry: half the load through each pipe.
        assert_relative_eq!(report.lambda_star, 1.5, epsilon = 1e-9);
        assert_relative_eq!(report.solution.q[0], 1.5, epsilon = 1e-9);
        assert_relative_eq!(report.solution.q[1], 1.5, epsilon = 1e-9);
        assert!(report.g_at_root < 1e-10);
        assert_relative_eq!(report.solution.eta_node[0], 0.4, epsilon = 1e-12);
        assert_relative_eq!(report.solution.eta_node[1], 0.4, epsilon = 1e-12);
        assert_eq!(report.cut_edge, "p1"); // smallest id on the cycle
    }

    #[test]
    fn triangle_pushes_transfer_toward_the_heavier_gas() {
        let net = triangle();
        let report = solve_single_cycle(
            &net,
            &CycleOptions {
                cut_edge: Some("c".into()),
                ..CycleOptions::default()
            },
        )
        .unwrap();
        // The loads are symmetric but the gases are not: hydrogen-rich
        // pipes drop pressure faster (σ²(1) = 8 vs σ²(0) = 1), so some
        // flow reroutes through the tie pipe. Flows are affine in the
        // tie flow λ and the mixture at s2 is λ/(1+λ); the cycle
        // pressure balance 8(1−λ)² = (1 + 7λ/(1+λ))(1+λ)² + 8λ²
        // reduces to 8λ² + 25λ − 7 = 0.
        let expected = (-25.0 + 849.0_f64.sqrt()) / 16.0;
        assert_relative_eq!(report.lambda_star, expected, epsilon = 1e-9);
        assert!(report.g_at_root < 1e-10);
        // All hydrogen ends up at the single demand: η_d = 1/2 exactly.
        let d = net.node_idx("d").unwrap();
        assert_relative_eq!(report.solution.eta_node[d], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn solution_is_independent_of_the_cut_edge() {
        let net = triangle();
        let reference = solve_single_cycle(
            &net,
            &CycleOptions {
                cut_edge: Some("a".into()),
                ..CycleOptions::default()
            },
        )
        .unwrap();
        for id in ["b", "c"] {
            let other = solve_single_cycle(
                &net,
                &CycleOptions {
                    cut_edge: Some(id.into()),
                    ..CycleOptions::default()
                },
            )
            .unwrap();
            for e in 0..net.n_edges() {
                assert!(
                    (reference.solution.q[e] - other.solution.q[e]).abs() < 1e-6,
                    "cut {id}, edge {e}: {} vs {}",
                    reference.solution.q[e],
                    other.solution.q[e]
                );
            }
            for v in 0..net.n_nodes() {
                assert!((reference.solution.eta_node[v] - other.solution.eta_node[v]).abs() < 1e-6);
                assert!((reference.solution.p2[v] - other.solution.p2[v]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn reassembled_solution_satisfies_the_pressure_law_on_the_cut_edge() {
        let net = triangle();
        let report = solve_single_cycle(
            &net,
            &CycleOptions {
                cut_edge: Some("b".into()),
                ..CycleOptions::default()
            },
        )
        .unwrap();
        let sol = &report.solution;
        for (e, edge) in net.edges().iter().enumerate() {
            let drop = crate::gas::pressure_drop_squared(
                net.gas(),
                sol.eta_node[edge.foot],
                sol.eta_node[edge.head],
                sol.q[e],
                edge.length,
                edge.diameter,
                edge.friction,
            );
            let residual = sol.p2[edge.head] - sol.p2[edge.foot] - drop;
            assert!(
                residual.abs() < 1e-8,
                "edge {}: pressure-law residual {residual:e}",
                edge.id
            );
        }
    }

    #[test]
    fn off_cycle_and_non_single_cycle_inputs_are_rejected() {
        // A triangle with a pendant leaf: the leaf edge is off-cycle.
        let net = Network::new(
            vec![
                node("s1", -1.0, Some(1.0), Some(20.0)),
                node("s2", -1.0, Some(0.0), None),
                node("d", 1.0, None, None),
                node("leaf", 1.0, None, None),
            ],
            vec![
                pipe("a", "s1", "d", 1.0),
                pipe("b", "s2", "d", 1.0),
                pipe("c", "s1", "s2", 1.0),
                pipe("t", "d", "leaf", 1.0),
            ],
            unit_gas(),
            PipeDefaults::default(),
        )
        .unwrap();
        let err = solve_single_cycle(
            &net,
            &CycleOptions {
                cut_edge: Some("t".into()),
                ..CycleOptions::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::CutEdgeOffCycle { .. }));

        // A tree has no cycle to cut.
        let tree_net = Network::new(
            vec![
                node("s", -1.0, Some(0.5), Some(20.0)),
                node("d", 1.0, None, None),
            ],
            vec![pipe("p", "s", "d", 1.0)],
            unit_gas(),
            PipeDefaults::default(),
        )
        .unwrap();
        assert!(matches!(
            solve_single_cycle(&tree_net, &CycleOptions::default()),
            Err(Error::NotSingleCycle { found: 0 })
        ));
    }

    #[test]
    fn zero_load_cycle_settles_at_zero_transfer() {
        // Both nodes inert except for a vanishing exchange: all loads on
        // the cycle are zero, so the bracket degenerates to {0}.
        let net = Network::new(
            vec![node("a", 0.0, None, Some(15.0)), node("b", 0.0, None, None)],
            vec![pipe("p1", "a", "b", 1.0), pipe("p2", "a", "b", 1.0)],
            unit_gas(),
            PipeDefaults::default(),
        )
        .unwrap();
        let report = solve_single_cycle(&net, &CycleOptions::default()).unwrap();
        assert_eq!(report.lambda_star, 0.0);
        assert_eq!(report.solution.q, vec![0.0, 0.0]);
        // Stagnant network: compositions default to 0 with warnings.
        assert!(!report.solution.warnings.is_empty());
    }
}
