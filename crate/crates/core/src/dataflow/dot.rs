use alloc::vec::Vec;

use super::{common_lane_len, DataflowError};
use crate::math::ceil_log2;
use crate::perfmodel::LatencyConstants;
use crate::scalar::Scalar;

/// `lanes` multiply-accumulate pipelines feeding a binary adder tree.
///
/// Each lane accumulates its own products sequentially. The lane sums are
/// then reduced pairwise, level by level, after padding to a power of two
/// with zero lanes, so the summation order never depends on scheduling.
#[derive(Clone, Debug)]
pub struct DotTreeEngine<S: Scalar> {
    lanes: usize,
    format: S::Format,
    constants: LatencyConstants,
    cycle_count: u64,
}

impl<S: Scalar> DotTreeEngine<S> {
    pub fn new(
        lanes: usize,
        format: S::Format,
        constants: LatencyConstants,
    ) -> Result<Self, DataflowError> {
        if lanes == 0 {
            return Err(DataflowError::NoLanes);
        }
        Ok(Self {
            lanes,
            format,
            constants,
            cycle_count: 0,
        })
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn tree_depth(&self) -> u32 {
        ceil_log2(self.lanes as u64)
    }

    pub fn cycle_count(&self) -> u64 {
        self.cycle_count
    }

    /// `a * L + b * ceil(log2 F) + 2` for per-lane length `L`.
    pub fn cycles_for(lane_len: usize, lanes: usize, c: &LatencyConstants) -> u64 {
        c.a_mul * lane_len as u64 + c.b_add * u64::from(ceil_log2(lanes as u64)) + 2
    }

    pub fn run<A, B>(&mut self, a: &[A], b: &[B]) -> Result<(S, u64), DataflowError>
    where
        A: AsRef<[S]>,
        B: AsRef<[S]>,
    {
        let len = common_lane_len(self.lanes, a, b)?;
        let zero = S::zero(self.format);
        let width = 1usize << self.tree_depth();
        let mut level: Vec<S> = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                x.as_ref()
                    .iter()
                    .zip(y.as_ref())
                    .fold(zero, |acc, (&p, &q)| acc + p * q)
            })
            .collect();
        level.resize(width, zero);
        while level.len() > 1 {
            level = level
                .chunks_exact(2)
                .map(|pair| pair[0] + pair[1])
                .collect();
        }
        let cycles = Self::cycles_for(len, self.lanes, &self.constants);
        self.cycle_count += cycles;
        Ok((level[0], cycles))
    }
}
