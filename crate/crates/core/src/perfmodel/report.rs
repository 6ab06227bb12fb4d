use super::{
    padding_latency, schedule_iteration, Algorithm, LaneGeometry, LatencyConstants, PaddingReport,
};
use crate::perfmodel::schedule::BlockLatencies;

/// Bits in one block RAM.
pub const BRAM_BLOCK_BITS: u64 = 18 * 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceReport {
    pub multipliers_per_lane: u64,
    pub dsp_total: u64,
    pub bram_total: u64,
}

/// Multipliers one lane instantiates: nine for the 3x3 window and one per
/// dot product and vector update.
fn multipliers_per_lane(algo: Algorithm) -> u64 {
    let (dots, axpys) = match algo {
        Algorithm::Cg => (3, 3),
        Algorithm::NewCg => (2, 6),
    };
    9 + dots + axpys
}

/// DSP and block-RAM estimate. Each stencil lane keeps three line buffers
/// of `sub_cols + 2` words of `total_bits` bits.
pub fn resource_estimate(
    algo: Algorithm,
    g: &LaneGeometry,
    c: &LatencyConstants,
    total_bits: u32,
) -> ResourceReport {
    let m = multipliers_per_lane(algo);
    let line_bits = 3 * (g.sub_cols as u64 + 2) * u64::from(total_bits);
    ResourceReport {
        multipliers_per_lane: m,
        dsp_total: g.factor() as u64 * c.d_dsp * m,
        bram_total: g.factor() as u64 * line_bits.div_ceil(BRAM_BLOCK_BITS),
    }
}

/// Flops of the start-up phase and of one iteration on an `n x n` grid:
/// nine per stencil point, two per dot or update element, one per scalar
/// division or subtraction.
pub fn flop_count(algo: Algorithm, n: usize) -> (u64, u64) {
    let pts = (n * n) as u64;
    let (spmv, vec) = (9 * pts, 2 * pts);
    match algo {
        Algorithm::Cg => (spmv + vec, spmv + 3 * vec + 3 * vec + 2),
        Algorithm::NewCg => (
            3 * spmv + vec + 2 * vec + 1 + 3 * vec,
            spmv + 2 * vec + 6 * vec + 5,
        ),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatencyReport {
    pub algorithm: Algorithm,
    pub geometry: LaneGeometry,
    pub blocks: BlockLatencies,
    pub padding: PaddingReport,
    pub per_iteration_cycles: u64,
    pub isolated_cycles: u64,
    pub startup_cycles: u64,
    pub iterations: u64,
    pub total_cycles: u64,
    pub wall_seconds: f64,
    pub flops: u64,
    pub gflops: f64,
}

/// Cycles for start-up plus `iterations` loop iterations. Every SpMV is
/// preceded by a halo copy, which is charged serially.
pub fn full_run_report(
    algo: Algorithm,
    g: &LaneGeometry,
    iterations: u64,
    c: &LatencyConstants,
) -> LatencyReport {
    let s = schedule_iteration(algo, g, c);
    let padding = padding_latency(g);
    let startup = s.prologue_cycles + s.spmv_in_prologue * padding.cycles;
    let per_iter = s.per_iteration_cycles + s.spmv_per_iteration * padding.cycles;
    let total = startup + iterations * per_iter;
    let wall_ns = total as f64 * c.clock_ns;
    let (f0, fk) = flop_count(algo, g.n);
    let flops = f0 + iterations * fk;
    LatencyReport {
        algorithm: algo,
        geometry: *g,
        blocks: s.blocks,
        padding,
        per_iteration_cycles: s.per_iteration_cycles,
        isolated_cycles: s.isolated_cycles,
        startup_cycles: startup,
        iterations,
        total_cycles: total,
        wall_seconds: wall_ns * 1e-9,
        flops,
        gflops: if wall_ns > 0.0 {
            flops as f64 / wall_ns
        } else {
            0.0
        },
    }
}
