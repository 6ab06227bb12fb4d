//! Drivers behind the CLI commands. Each returns plain serialisable data.

use lapcg_core::fixed::FixedValue;
use lapcg_core::laplacian::{DecompMode, Grid};
use lapcg_core::perfmodel::{
    full_run_report, padding_latency, resource_estimate, schedule_iteration, Algorithm,
    LaneGeometry, LatencyConstants, PerfError,
};
use lapcg_core::scalar::Scalar;
use lapcg_core::solvers::{
    cg_solve, newcg_solve, IterationTrace, Layout, Solution, SolverConfig, SolverError, StopReason,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::{
    decomp_name, IterationSpec, LatencyArgs, LayoutChoice, PaddingArgs, Precision, RhsKind,
    SolveArgs, SweepArgs,
};
use crate::{rhs, CliError};

pub fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::MaxIterations => "max_iterations",
        StopReason::Stagnated => "stagnated",
        StopReason::ZeroRhs => "zero_rhs",
    }
}

fn norm2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

pub fn solve_with<S: Scalar>(
    algo: Algorithm,
    b: &Grid<S>,
    cfg: &SolverConfig,
) -> Result<Solution<S>, SolverError> {
    match algo {
        Algorithm::Cg => cg_solve(b, cfg),
        Algorithm::NewCg => newcg_solve(b, cfg),
    }
}

/// Solves `b` (given in double) in the requested arithmetic and returns
/// the trace with the solution converted back to double.
pub fn solve_in(
    algo: Algorithm,
    b: &Grid<f64>,
    precision: Precision,
    cfg: &SolverConfig,
) -> Result<(IterationTrace, Grid<f64>), SolverError> {
    match precision {
        Precision::Double => solve_with(algo, b, cfg).map(|s| (s.trace, s.x)),
        Precision::Fixed(spec) => {
            let bq = Grid::<FixedValue>::from_f64_grid(b, spec);
            solve_with(algo, &bq, cfg).map(|s| (s.trace, s.x.to_f64_grid()))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub algo: &'static str,
    pub iterations: usize,
    pub converged: bool,
    pub stop: &'static str,
    pub final_relres: f64,
    pub final_true_relres: f64,
    pub saturations: u64,
    /// `||x - x*|| / ||x*||` for manufactured right-hand sides.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_vs_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<f64>>,
}

pub struct SolveOutcome {
    pub summaries: Vec<SolveSummary>,
    pub traces: Vec<(Algorithm, IterationTrace)>,
}

pub fn run_solve(a: &SolveArgs) -> Result<SolveOutcome, CliError> {
    let (b, exact) = match a.rhs {
        RhsKind::Ones => (
            rhs::ones(a.n).map_err(|e| CliError::Usage(e.to_string()))?,
            None,
        ),
        RhsKind::Manufactured => {
            let (x, b) =
                rhs::manufactured(a.n, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            (b, Some(x))
        }
        RhsKind::File => {
            let path = a
                .rhs_file
                .as_ref()
                .ok_or_else(|| CliError::Usage("--rhs file needs --rhs-file".into()))?;
            let g = crate::io::read_grid_csv(std::fs::File::open(path)?)?;
            if g.n() != a.n {
                return Err(CliError::Usage(format!(
                    "right-hand side has side {}, but --n is {}",
                    g.n(),
                    a.n
                )));
            }
            (g, None)
        }
    };
    let cfg = SolverConfig {
        tol: a.tol,
        max_iter: a.max_iter,
        layout: Layout {
            v: a.v,
            h: a.h,
            mode: a.decomp.into(),
        },
    };
    let mut out = SolveOutcome {
        summaries: Vec::new(),
        traces: Vec::new(),
    };
    for algo in a.algo.algorithms() {
        let (trace, x) = solve_in(algo, &b, a.precision, &cfg)?;
        let error_vs_exact = exact.as_ref().map(|xs| {
            let e = norm2(x.data().iter().zip(xs.data()).map(|(p, q)| p - q));
            let s = norm2(xs.data().iter().copied());
            if s == 0.0 {
                e
            } else {
                e / s
            }
        });
        out.summaries.push(SolveSummary {
            algo: algo.name(),
            iterations: trace.iterations(),
            converged: trace.converged,
            stop: stop_name(trace.stop),
            final_relres: trace.final_relres(),
            final_true_relres: trace.records.last().map_or(0.0, |r| r.true_relres),
            saturations: trace.saturations,
            error_vs_exact,
            solution: a.emit_solution.then(|| x.data().to_vec()),
        });
        out.traces.push((algo, trace));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgoLatency {
    /// Overlapped steady-state cycles per iteration, compute only.
    pub per_iteration: u64,
    /// One iteration on its own, with every input ready.
    pub isolated: u64,
    /// `per_iteration` plus the halo copy before each SpMV.
    pub per_iteration_with_padding: u64,
    pub startup: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatencyRow {
    pub n: usize,
    pub factor: usize,
    pub v: Option<usize>,
    pub h: Option<usize>,
    pub decomp: Option<&'static str>,
    /// Whether the lanes split the grid evenly.
    pub exact: Option<bool>,
    /// Pairs of lanes that share a subgrid edge and exchange halo values.
    pub interfaces: Option<usize>,
    pub cg: Option<AlgoLatency>,
    pub newcg: Option<AlgoLatency>,
    pub ratio_newcg_cg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn algo_latency(algo: Algorithm, g: &LaneGeometry, c: &LatencyConstants) -> AlgoLatency {
    let zero = full_run_report(algo, g, 0, c);
    let one = full_run_report(algo, g, 1, c);
    AlgoLatency {
        per_iteration: zero.per_iteration_cycles,
        isolated: zero.isolated_cycles,
        per_iteration_with_padding: one.total_cycles - one.startup_cycles,
        startup: zero.startup_cycles,
    }
}

fn geometry(n: usize, f: usize, layout: LayoutChoice) -> Result<LaneGeometry, PerfError> {
    match layout {
        LayoutChoice::Canonical => LaneGeometry::canonical(n, f),
        LayoutChoice::Strips => LaneGeometry::new(n, f, 1, DecompMode::OneD),
    }
}

pub fn latency_row(n: usize, f: usize, layout: LayoutChoice, c: &LatencyConstants) -> LatencyRow {
    match geometry(n, f, layout) {
        Ok(g) => {
            let cg = algo_latency(Algorithm::Cg, &g, c);
            let newcg = algo_latency(Algorithm::NewCg, &g, c);
            LatencyRow {
                n,
                factor: f,
                v: Some(g.v),
                h: Some(g.h),
                decomp: Some(decomp_name(g.mode)),
                exact: Some(g.is_exact()),
                interfaces: Some(g.v * (g.h - 1) + g.h * (g.v - 1)),
                ratio_newcg_cg: Some(newcg.per_iteration as f64 / cg.per_iteration as f64),
                cg: Some(cg),
                newcg: Some(newcg),
                error: None,
            }
        }
        Err(e) => LatencyRow {
            n,
            factor: f,
            v: None,
            h: None,
            decomp: None,
            exact: None,
            interfaces: None,
            cg: None,
            newcg: None,
            ratio_newcg_cg: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn latency_table(a: &LatencyArgs) -> Result<Vec<LatencyRow>, CliError> {
    let c = a.constants.resolve()?;
    Ok(a.sizes
        .iter()
        .flat_map(|&n| a.factors.iter().map(move |&f| (n, f)))
        .map(|(n, f)| latency_row(n, f, a.layout, &c))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PaddingRow {
    pub n: usize,
    pub factor: usize,
    pub padding_1d: Option<u64>,
    /// Absent when FACTOR <= 2 or no even quadruple lattice exists.
    pub padding_2d: Option<u64>,
    pub v_2d: Option<usize>,
    pub h_2d: Option<usize>,
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn padding_2d(n: usize, f: usize) -> Option<(LaneGeometry, u64)> {
    if f <= 2 {
        return None;
    }
    LaneGeometry::canonical(n, f)
        .ok()
        .filter(|g| g.mode == DecompMode::TwoDQuadruple)
        .map(|g| (g, padding_latency(&g).cycles))
}

pub fn padding_1d(n: usize, f: usize) -> Result<u64, PerfError> {
    LaneGeometry::new(n, f, 1, DecompMode::OneD).map(|g| padding_latency(&g).cycles)
}

pub fn padding_row(n: usize, f: usize) -> PaddingRow {
    let one = padding_1d(n, f);
    let two = padding_2d(n, f);
    let p1 = one.as_ref().ok().copied();
    PaddingRow {
        n,
        factor: f,
        padding_1d: p1,
        padding_2d: two.map(|t| t.1),
        v_2d: two.map(|t| t.0.v),
        h_2d: two.map(|t| t.0.h),
        ratio: match (p1, two) {
            (Some(a), Some((_, b))) => Some(b as f64 / a as f64),
            _ => None,
        },
        error: one.err().map(|e| e.to_string()),
    }
}

pub fn padding_table(a: &PaddingArgs) -> Vec<PaddingRow> {
    a.sizes
        .iter()
        .flat_map(|&n| a.factors.iter().map(move |&f| padding_row(n, f)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationCount {
    pub n: usize,
    pub algo: &'static str,
    pub iter: u64,
    /// `auto` or `explicit`.
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_relres: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub n: usize,
    pub prec: String,
    pub factor: usize,
    pub algo: &'static str,
    pub v: usize,
    pub h: usize,
    pub decomp: &'static str,
    pub iter: u64,
    /// Start-up plus `iter` iterations, halo copies included.
    pub lat_cycles: u64,
    pub startup_cycles: u64,
    pub per_iteration_cycles: u64,
    pub wall_seconds: f64,
    pub gflops: f64,
    pub bram: u64,
    pub dsp: u64,
    pub padding_1d: Option<u64>,
    pub padding_2d: Option<u64>,
    pub ratio_newcg_cg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Speedup {
    pub n: usize,
    pub algo: &'static str,
    pub max_factor: usize,
    pub baseline_cycles: u64,
    pub max_factor_cycles: u64,
    pub speedup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResults {
    pub iterations: Vec<IterationCount>,
    pub cells: Vec<SweepCell>,
    pub speedup: Vec<Speedup>,
}

fn sweep_iterations(a: &SweepArgs) -> Result<Vec<IterationCount>, CliError> {
    let mut sizes: Vec<usize> = a.cells.0.iter().map(|c| c.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let jobs: Vec<(usize, Algorithm)> = sizes
        .iter()
        .flat_map(|&n| Algorithm::ALL.map(|al| (n, al)))
        .collect();
    match &a.iterations {
        IterationSpec::Fixed(k) => Ok(jobs
            .iter()
            .map(|&(n, al)| explicit_count(n, al, *k))
            .collect()),
        IterationSpec::PerSize(pairs) => jobs
            .iter()
            .map(|&(n, al)| {
                pairs
                    .iter()
                    .find(|p| p.0 == n)
                    .map(|p| explicit_count(n, al, p.1))
                    .ok_or_else(|| CliError::Usage(format!("no iteration count given for n = {n}")))
            })
            .collect(),
        IterationSpec::Auto => {
            let cfg = SolverConfig {
                tol: a.tol,
                max_iter: a.max_iter,
                layout: Layout::default(),
            };
            jobs.par_iter()
                .map(|&(n, al)| {
                    let b = match a.rhs {
                        RhsKind::Ones => rhs::ones(n),
                        RhsKind::Manufactured => rhs::manufactured(n, a.seed).map(|t| t.1),
                        RhsKind::File => {
                            return Err(CliError::Usage(
                                "sweep supports --rhs ones|manufactured".into(),
                            ))
                        }
                    }
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                    let (t, _) = solve_in(al, &b, a.iter_precision, &cfg)?;
                    Ok(IterationCount {
                        n,
                        algo: al.name(),
                        iter: t.iterations() as u64,
                        source: "auto",
                        stop: Some(stop_name(t.stop)),
                        final_relres: Some(t.final_relres()),
                    })
                })
                .collect()
        }
    }
}

fn explicit_count(n: usize, al: Algorithm, iter: u64) -> IterationCount {
    IterationCount {
        n,
        algo: al.name(),
        iter,
        source: "explicit",
        stop: None,
        final_relres: None,
    }
}

fn sweep_cell(
    n: usize,
    f: usize,
    al: Algorithm,
    iter: u64,
    prec: Precision,
    c: &LatencyConstants,
) -> Result<SweepCell, CliError> {
    let g = LaneGeometry::canonical(n, f)?;
    let r = full_run_report(al, &g, iter, c);
    let res = resource_estimate(al, &g, c, prec.total_bits());
    let cg = schedule_iteration(Algorithm::Cg, &g, c).per_iteration_cycles;
    let newcg = schedule_iteration(Algorithm::NewCg, &g, c).per_iteration_cycles;
    Ok(SweepCell {
        n,
        prec: prec.to_string(),
        factor: f,
        algo: al.name(),
        v: g.v,
        h: g.h,
        decomp: decomp_name(g.mode),
        iter,
        lat_cycles: r.total_cycles,
        startup_cycles: r.startup_cycles,
        per_iteration_cycles: (r.total_cycles - r.startup_cycles)
            .checked_div(iter)
            .unwrap_or_else(|| full_run_report(al, &g, 1, c).total_cycles - r.startup_cycles),
        wall_seconds: r.wall_seconds,
        gflops: r.gflops,
        bram: res.bram_total,
        dsp: res.dsp_total,
        padding_1d: padding_1d(n, f).ok(),
        padding_2d: padding_2d(n, f).map(|t| t.1),
        ratio_newcg_cg: newcg as f64 / cg as f64,
    })
}

/// Runs the sweep on a pool of `jobs` threads (0: one per core). Results
/// are assembled in cell order, so the output does not depend on `jobs`.
pub fn sweep(a: &SweepArgs) -> Result<SweepResults, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| sweep_inner(a))
}

fn sweep_inner(a: &SweepArgs) -> Result<SweepResults, CliError> {
    let c = a.constants.resolve()?;
    for cell in &a.cells.0 {
        for &f in &cell.factors {
            LaneGeometry::canonical(cell.n, f)?;
        }
    }
    let iterations = sweep_iterations(a)?;
    let iter_of = |n: usize, al: Algorithm| {
        iterations
            .iter()
            .find(|r| r.n == n && r.algo == al.name())
            .map_or(0, |r| r.iter)
    };

    let tasks: Vec<(usize, usize, Algorithm)> = a
        .cells
        .0
        .iter()
        .flat_map(|cell| {
            cell.factors
                .iter()
                .flat_map(move |&f| Algorithm::ALL.map(|al| (cell.n, f, al)))
        })
        .collect();
    let cells = tasks
        .par_iter()
        .map(|&(n, f, al)| sweep_cell(n, f, al, iter_of(n, al), a.precision, &c))
        .collect::<Result<Vec<_>, _>>()?;

    let mut speedup = Vec::new();
    for cell in &a.cells.0 {
        let Some(&max_f) = cell.factors.iter().max() else {
            continue;
        };
        for al in Algorithm::ALL {
            let k = iter_of(cell.n, al);
            let base =
                full_run_report(al, &LaneGeometry::canonical(cell.n, 1)?, k, &c).total_cycles;
            let top =
                full_run_report(al, &LaneGeometry::canonical(cell.n, max_f)?, k, &c).total_cycles;
            speedup.push(Speedup {
                n: cell.n,
                algo: al.name(),
                max_factor: max_f,
                baseline_cycles: base,
                max_factor_cycles: top,
                speedup: base as f64 / top as f64,
            });
        }
    }
    Ok(SweepResults {
        iterations,
        cells,
        speedup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::{Cli, Command};
    use clap::Parser;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("lapcg").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn one_by_one_solve() {
        let Command::Solve(a) = parse(&["solve", "--n", "1", "--emit-solution"]) else {
            unreachable!()
        };
        let out = run_solve(&a).unwrap();
        for s in &out.summaries {
            assert_eq!(s.iterations, 1);
            assert_eq!(s.solution.as_deref(), Some(&[0.25][..]));
        }
    }

    #[test]
    fn indivisible_layout_is_infeasible() {
        let Command::Solve(a) = parse(&["solve", "--n", "10", "--v", "4"]) else {
            unreachable!()
        };
        assert_eq!(run_solve(&a).err().unwrap().exit_code(), 3);
    }

    #[test]
    fn latency_rows_report_bad_cells_inline() {
        let c = LatencyConstants::default();
        let bad = latency_row(4, 8, LayoutChoice::Strips, &c);
        assert!(bad.error.is_some() && bad.cg.is_none());
        let one = latency_row(16, 1, LayoutChoice::Canonical, &c);
        assert_eq!(one.interfaces, Some(0));
        assert_eq!(
            latency_row(16, 4, LayoutChoice::Canonical, &c).interfaces,
            Some(4)
        );
    }

    #[test]
    fn padding_rows() {
        let r = padding_row(16, 2);
        assert!(r.padding_1d.is_some() && r.padding_2d.is_none() && r.ratio.is_none());
        let r = padding_row(16, 4);
        assert!(r.padding_2d.unwrap() < r.padding_1d.unwrap());
        // No even quadruple lattice for 6 lanes.
        assert!(padding_row(24, 6).padding_2d.is_none());
    }

    #[test]
    fn single_cell_sweep_composes_latency() {
        let Command::Sweep(a) = parse(&["sweep", "--cells", "32:8", "--iterations", "60"]) else {
            unreachable!()
        };
        let res = sweep(&a).unwrap();
        let row = latency_row(32, 8, LayoutChoice::Canonical, &LatencyConstants::default());
        for (cell, lat) in res.cells.iter().zip([row.cg.unwrap(), row.newcg.unwrap()]) {
            assert_eq!(
                cell.lat_cycles,
                lat.startup + 60 * lat.per_iteration_with_padding
            );
            assert_eq!(cell.per_iteration_cycles, lat.per_iteration_with_padding);
        }
    }
}
