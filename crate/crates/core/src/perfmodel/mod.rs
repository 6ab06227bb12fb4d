//! Analytic latency and resource model of the streaming CG datapaths.
//!
//! Block latencies come from the engines in [`crate::dataflow`]; an
//! iteration's cost comes from scheduling those blocks over the data
//! dependencies of each algorithm ([`schedule`]); the halo copy that
//! precedes every SpMV is priced separately ([`padding`]).

mod geometry;
mod padding;
mod report;
mod schedule;

use thiserror::Error;

use crate::dataflow::{AxpyEngine, DotTreeEngine, LineBufferEngine};
use crate::math::ceil_log2;

pub use geometry::LaneGeometry;
pub use padding::{padding_latency, PaddingReport};
pub use report::{
    flop_count, full_run_report, resource_estimate, LatencyReport, ResourceReport, BRAM_BLOCK_BITS,
};
pub use schedule::{
    schedule_iteration, BlockKind, BlockLatencies, BlockNode, Edge, EdgeKind, IterationSchedule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Cg,
    NewCg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Cg, Algorithm::NewCg];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Cg => "cg",
            Algorithm::NewCg => "newcg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PerfError {
    #[error("latency constant `{0}` must be positive")]
    NonPositiveConstant(&'static str),
    #[error("grid side must be at least 1")]
    EmptyGrid,
    #[error("FACTOR must be at least 1")]
    ZeroFactor,
    #[error("FACTOR {factor} does not divide grid side {n}")]
    NotDivisible { n: usize, factor: usize },
    #[error("{v}x{h} lanes do not fit a grid of side {n}")]
    TooManyLanes { n: usize, v: usize, h: usize },
    #[error("quadruple layout needs even v, h >= 2 (got v = {v}, h = {h})")]
    QuadrupleNeedsEven { v: usize, h: usize },
    #[error("1D layout needs h = 1 (got {h})")]
    OneDNeedsSingleColumn { h: usize },
}

/// Per-operation cycle costs of the arithmetic units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyConstants {
    /// Cycles per fixed-point multiply.
    pub a_mul: u64,
    /// Cycles per add.
    pub b_add: u64,
    /// Cycles per scalar division.
    pub c_div: u64,
    /// DSP blocks per multiplier at the working precision.
    pub d_dsp: u64,
    pub clock_ns: f64,
}

impl Default for LatencyConstants {
    fn default() -> Self {
        Self {
            a_mul: 3,
            b_add: 2,
            c_div: 14,
            d_dsp: 2,
            clock_ns: 10.0,
        }
    }
}

impl LatencyConstants {
    pub fn new(
        a_mul: u64,
        b_add: u64,
        c_div: u64,
        d_dsp: u64,
        clock_ns: f64,
    ) -> Result<Self, PerfError> {
        let c = Self {
            a_mul,
            b_add,
            c_div,
            d_dsp,
            clock_ns,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), PerfError> {
        for (name, v) in [
            ("a_mul", self.a_mul),
            ("b_add", self.b_add),
            ("c_div", self.c_div),
            ("d_dsp", self.d_dsp),
        ] {
            if v == 0 {
                return Err(PerfError::NonPositiveConstant(name));
            }
        }
        if self.clock_ns.is_nan() || self.clock_ns <= 0.0 || self.clock_ns.is_infinite() {
            return Err(PerfError::NonPositiveConstant("clock_ns"));
        }
        Ok(())
    }
}

/// `(n + 2) * (n / factor + 2) + 4`: the stencil sweep over one of
/// `factor` horizontal strips.
pub fn spmv_latency(n: usize, factor: usize) -> Result<u64, PerfError> {
    if n == 0 {
        return Err(PerfError::EmptyGrid);
    }
    if factor == 0 {
        return Err(PerfError::ZeroFactor);
    }
    if !n.is_multiple_of(factor) {
        return Err(PerfError::NotDivisible { n, factor });
    }
    Ok(LineBufferEngine::<f64>::cycles_for(n / factor, n))
}

fn lane_len(len: usize, factor: usize) -> usize {
    len.div_ceil(factor.max(1))
}

/// `a * ceil(len / factor) + b * ceil(log2 factor) + 2`.
pub fn dot_latency(len: usize, factor: usize, c: &LatencyConstants) -> u64 {
    DotTreeEngine::<f64>::cycles_for(lane_len(len, factor), factor.max(1), c)
}

/// `(a + b) * ceil(len / factor)`.
pub fn axpy_latency(len: usize, factor: usize, c: &LatencyConstants) -> u64 {
    AxpyEngine::cycles_for(lane_len(len, factor), c)
}

/// Depth of the dot-product adder tree.
pub fn tree_depth(factor: usize) -> u32 {
    ceil_log2(factor.max(1) as u64)
}
