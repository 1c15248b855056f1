use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use blendgas::cut::{self, CycleOptions};
use blendgas::error::{Error, Result};
use blendgas::io::{load_network, run_report, RunReport};
use blendgas::residual::{self, LmOptions};
use blendgas::sweep::{self, SweepOptions};
use blendgas::tree;
use blendgas::Network;

#[derive(Parser)]
#[command(
    name = "blendgas",
    version,
    about = "Steady states of hydrogen-blended natural-gas pipe networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Solver {
    /// Pick by graph shape: tree, single cycle, or general.
    Auto,
    Tree,
    Cut,
    Lm,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network file and report every violation.
    Validate { network: PathBuf },
    /// Compute the steady state and write a JSON report.
    Solve {
        network: PathBuf,
        #[arg(long, value_enum, default_value_t = Solver::Auto)]
        solver: Solver,
        /// Cycle edge to cut (single-cycle solver).
        #[arg(long)]
        cut_edge: Option<String>,
        /// Bisection tolerance on the pressure gap |g(λ*)|.
        #[arg(long, default_value_t = 1e-10)]
        tol_p: f64,
        /// Iteration budget (default: 200 bisections / 500 LM steps).
        #[arg(long)]
        max_iter: Option<usize>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map H_p and H_η over the (λ, μ) rectangle (CSV or JSON).
    Sweep {
        network: PathBuf,
        #[arg(long)]
        cut_edge: Option<String>,
        /// λ interval (default: γ bracket or ±total supply).
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        lambda_range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 50)]
        n_lambda: usize,
        #[arg(long, default_value_t = 51)]
        n_mu: usize,
        /// Bound λ by Σ|b_v| over all nodes instead of the supply total.
        #[arg(long)]
        all_loads_bound: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace μ_η(λ), the root curve of H_η, with g(λ) = H_p along it.
    RootCurve {
        network: PathBuf,
        #[arg(long)]
        cut_edge: Option<String>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        lambda_range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 50)]
        n_lambda: usize,
        #[arg(long)]
        all_loads_bound: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Alias of root-curve emphasising the restricted gap g(λ).
    GCurve {
        network: PathBuf,
        #[arg(long)]
        cut_edge: Option<String>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        lambda_range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 50)]
        n_lambda: usize,
        #[arg(long)]
        all_loads_bound: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Track one node's composition over the (λ, μ) rectangle.
    Slice {
        network: PathBuf,
        /// Node whose composition is recorded.
        #[arg(long)]
        node: String,
        #[arg(long)]
        cut_edge: Option<String>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        lambda_range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 50)]
        n_lambda: usize,
        #[arg(long, default_value_t = 51)]
        n_mu: usize,
        #[arg(long)]
        all_loads_bound: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { network } => {
            let net = load_network(&network)?;
            println!(
                "ok: {} nodes, {} edges, {} independent cycle(s)",
                net.n_nodes(),
                net.n_edges(),
                net.cycle_count()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            network,
            solver,
            cut_edge,
            tol_p,
            max_iter,
            out,
        } => {
            let net = load_network(&network)?;
            let report = solve(&net, solver, cut_edge, tol_p, max_iter)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            write_output(out.as_deref(), |w| {
                serde_json::to_writer_pretty(&mut *w, &report)
                    .map_err(|e| Error::Parse(format!("report serialization: {e}")))?;
                writeln!(w)?;
                Ok(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            network,
            cut_edge,
            lambda_range,
            n_lambda,
            n_mu,
            all_loads_bound,
            out,
        } => {
            let net = load_network(&network)?;
            let opts = sweep_options(lambda_range, n_lambda, n_mu, all_loads_bound)?;
            let grid = sweep::sweep(&net, cut_edge.as_deref(), &opts)?;
            let fraction = grid.converged_fraction();
            write_output(out.as_deref(), |w| {
                if wants_json(out.as_deref()) {
                    serde_json::to_writer_pretty(&mut *w, &grid)
                        .map_err(|e| Error::Parse(format!("grid serialization: {e}")))?;
                    writeln!(w)?;
                    Ok(())
                } else {
                    sweep::write_grid_csv(&grid, w)
                }
            })?;
            eprintln!(
                "swept {}x{} boundary pairs on cut '{}': {:.1}% converged",
                grid.lambdas.len(),
                grid.mus.len(),
                grid.cut_edge,
                100.0 * fraction
            );
            Ok(if fraction >= 0.9 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            })
        }
        Command::RootCurve {
            network,
            cut_edge,
            lambda_range,
            n_lambda,
            all_loads_bound,
            out,
        }
        | Command::GCurve {
            network,
            cut_edge,
            lambda_range,
            n_lambda,
            all_loads_bound,
            out,
        } => {
            let net = load_network(&network)?;
            let opts = sweep_options(lambda_range, n_lambda, 51, all_loads_bound)?;
            let curve = sweep::root_curve(&net, cut_edge.as_deref(), &opts)?;
            let ok = curve
                .samples
                .iter()
                .filter(|s| !matches!(s.status, sweep::PointStatus::Failed(_)))
                .count();
            let fraction = ok as f64 / curve.samples.len().max(1) as f64;
            write_output(out.as_deref(), |w| {
                if wants_json(out.as_deref()) {
                    serde_json::to_writer_pretty(&mut *w, &curve)
                        .map_err(|e| Error::Parse(format!("curve serialization: {e}")))?;
                    writeln!(w)?;
                    Ok(())
                } else {
                    sweep::write_curve_csv(&curve, w)
                }
            })?;
            eprintln!(
                "traced {} root-curve samples on cut '{}': {:.1}% converged",
                curve.samples.len(),
                curve.cut_edge,
                100.0 * fraction
            );
            Ok(if fraction >= 0.9 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            })
        }
        Command::Slice {
            network,
            node,
            cut_edge,
            lambda_range,
            n_lambda,
            n_mu,
            all_loads_bound,
            out,
        } => {
            let net = load_network(&network)?;
            let opts = sweep_options(lambda_range, n_lambda, n_mu, all_loads_bound)?;
            let slice = sweep::composition_slice(&net, cut_edge.as_deref(), &node, &opts)?;
            write_output(out.as_deref(), |w| {
                if wants_json(out.as_deref()) {
                    serde_json::to_writer_pretty(&mut *w, &slice)
                        .map_err(|e| Error::Parse(format!("slice serialization: {e}")))?;
                    writeln!(w)?;
                    Ok(())
                } else {
                    sweep::write_slice_csv(&slice, w)
                }
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn solve(
    net: &Network,
    solver: Solver,
    cut_edge: Option<String>,
    tol_p: f64,
    max_iter: Option<usize>,
) -> Result<RunReport> {
    let solver = match solver {
        Solver::Auto => match net.cycle_count() {
            0 => Solver::Tree,
            1 => Solver::Cut,
            _ => Solver::Lm,
        },
        chosen => chosen,
    };
    match solver {
        Solver::Tree => {
            let sol = tree::solve_tree(net)?;
            Ok(run_report(net, &sol, "tree"))
        }
        Solver::Cut => {
            let opts = CycleOptions {
                cut_edge,
                tol_p,
                max_iter: max_iter.unwrap_or(200),
            };
            let cycle = cut::solve_single_cycle(net, &opts)?;
            let mut report = run_report(net, &cycle.solution, "cut");
            report.cut_edge = Some(cycle.cut_edge);
            report.lambda_star = Some(cycle.lambda_star);
            report.mu_star = Some(cycle.mu_star);
            report.iterations = cycle.iterations;
            Ok(report)
        }
        Solver::Lm => {
            let opts = LmOptions {
                max_iter: max_iter.unwrap_or(500),
                ..LmOptions::default()
            };
            let lm = residual::solve_lm(net, None, &opts)?;
            let mut report = run_report(net, &lm.solution, "lm");
            report.iterations = lm.iterations;
            Ok(report)
        }
        Solver::Auto => unreachable!("auto resolves above"),
    }
}

fn sweep_options(
    lambda_range: Option<Vec<f64>>,
    n_lambda: usize,
    n_mu: usize,
    all_loads_bound: bool,
) -> Result<SweepOptions> {
    let lambda_range = match lambda_range {
        Some(pair) => {
            debug_assert_eq!(pair.len(), 2, "clap enforces two values");
            Some((pair[0], pair[1]))
        }
        None => None,
    };
    Ok(SweepOptions {
        n_lambda,
        n_mu,
        lambda_range,
        all_loads_bound,
        lm: LmOptions::default(),
    })
}

fn wants_json(out: Option<&Path>) -> bool {
    out.and_then(Path::extension)
        .map(|ext| ext.eq_ignore_ascii_case("json"))
        .unwrap_or(false)
}

fn write_output<F>(out: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => {
            let mut file = File::create(path)?;
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}
