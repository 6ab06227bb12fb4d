use alloc::vec::Vec;

use super::{common_lane_len, DataflowError};
use crate::perfmodel::LatencyConstants;
use crate::scalar::Scalar;

/// `lanes` independent `a + alpha * b` pipelines.
#[derive(Clone, Debug)]
pub struct AxpyEngine {
    lanes: usize,
    constants: LatencyConstants,
    cycle_count: u64,
}

impl AxpyEngine {
    pub const INITIAL_LATENCY: u64 = 1;

    pub fn new(lanes: usize, constants: LatencyConstants) -> Result<Self, DataflowError> {
        if lanes == 0 {
            return Err(DataflowError::NoLanes);
        }
        Ok(Self {
            lanes,
            constants,
            cycle_count: 0,
        })
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn cycle_count(&self) -> u64 {
        self.cycle_count
    }

    /// `(a + b) * L` for per-lane length `L`.
    pub fn cycles_for(lane_len: usize, c: &LatencyConstants) -> u64 {
        (c.a_mul + c.b_add) * lane_len as u64
    }

    pub fn run<S, A, B>(
        &mut self,
        a: &[A],
        b: &[B],
        alpha: S,
    ) -> Result<(Vec<Vec<S>>, u64), DataflowError>
    where
        S: Scalar,
        A: AsRef<[S]>,
        B: AsRef<[S]>,
    {
        let len = common_lane_len(self.lanes, a, b)?;
        let out = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                x.as_ref()
                    .iter()
                    .zip(y.as_ref())
                    .map(|(&p, &q)| p + alpha * q)
                    .collect()
            })
            .collect();
        let cycles = Self::cycles_for(len, &self.constants);
        self.cycle_count += cycles;
        Ok((out, cycles))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::{FixedSpec, FixedValue};
    use alloc::vec;

    fn unit() -> LatencyConstants {
        LatencyConstants {
            a_mul: 1,
            b_add: 1,
            ..LatencyConstants::default()
        }
    }

    #[test]
    fn identities() {
        let a = vec![vec![1.0, -2.0], vec![3.5, 0.25]];
        let b = vec![vec![7.0, 8.0], vec![-9.0, 1.0]];
        let mut e = AxpyEngine::new(2, unit()).unwrap();
        assert_eq!(e.run(&a, &b, 0.0).unwrap().0, a);
        let z = vec![vec![0.0; 2]; 2];
        let (out, cycles) = e.run(&z, &b, 1.0).unwrap();
        assert_eq!(out, b);
        assert_eq!(cycles, 4);
        assert_eq!(e.cycle_count(), 8);
    }

    #[test]
    fn fixed_matches_scalar_loop() {
        let spec = FixedSpec::default_hw();
        let fx = |x: f64| FixedValue::from_real(x, spec);
        let a: Vec<FixedValue> = (0..32).map(|k| fx(k as f64 / 7.0)).collect();
        let b: Vec<FixedValue> = (0..32).map(|k| fx(1.0 - k as f64 / 11.0)).collect();
        let alpha = fx(-0.3);
        let want: Vec<FixedValue> = a.iter().zip(&b).map(|(&p, &q)| p + alpha * q).collect();
        let mut e = AxpyEngine::new(4, unit()).unwrap();
        let la: Vec<&[FixedValue]> = a.chunks(8).collect();
        let lb: Vec<&[FixedValue]> = b.chunks(8).collect();
        let (out, cycles) = e.run(&la, &lb, alpha).unwrap();
        assert_eq!(out.concat(), want);
        assert_eq!(cycles, 16);
    }
}
