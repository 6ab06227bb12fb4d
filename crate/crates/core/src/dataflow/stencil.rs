use alloc::vec;
use alloc::vec::Vec;

use super::DataflowError;
use crate::laplacian::{Fragment, PaddedSubgrid, Stencil3x3, Traversal};
use crate::scalar::Scalar;

/// Register stages between the window and the output: read, multiply,
/// accumulate, write back.
pub const PIPELINE_DEPTH: u64 = 4;

/// Three line buffers of the padded width feeding a 3x3 shift window.
///
/// Elements arrive one per cycle in the subgrid's stream order. Because the
/// stream is a reflected row-major walk, the window always holds a reflected
/// copy of the natural neighbourhood; the stencil is evaluated with the
/// reflection undone so that the arithmetic is identical to the reference.
#[derive(Clone, Debug)]
pub struct LineBufferEngine<S: Scalar> {
    width: usize,
    line_buffers: [Vec<S>; 3],
    window: [[S; 3]; 3],
    cycle_count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StencilRun<S: Scalar> {
    pub fragment: Fragment<S>,
    pub cycles: u64,
    /// Cycle at which the first interior result leaves the pipeline.
    pub first_output_cycle: u64,
}

impl<S: Scalar> LineBufferEngine<S> {
    pub fn new(width: usize, format: S::Format) -> Self {
        let z = S::zero(format);
        Self {
            width,
            line_buffers: [vec![z; width], vec![z; width], vec![z; width]],
            window: [[z; 3]; 3],
            cycle_count: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cycle_count(&self) -> u64 {
        self.cycle_count
    }

    /// Closed-form cycle count for an interior of `rows x cols`.
    pub fn cycles_for(rows: usize, cols: usize) -> u64 {
        ((rows + 2) * (cols + 2)) as u64 + PIPELINE_DEPTH
    }

    /// Cycle of the first result for an interior with `cols` columns.
    pub fn first_output_for(cols: usize) -> u64 {
        // The window is full once the third element of the third padded row
        // has arrived.
        (2 * (cols + 2) + 3) as u64 + PIPELINE_DEPTH
    }

    /// Cycles from the last interior element entering to the last result
    /// leaving.
    pub fn drain_for(cols: usize) -> u64 {
        // The last interior element is followed by one halo cell on its row
        // and a full halo row before the window closes around it.
        (cols + 3) as u64 + PIPELINE_DEPTH
    }

    /// Shifts one element in at stream column `sc`.
    fn push(&mut self, sc: usize, x: S) {
        let [l0, l1, l2] = &mut self.line_buffers;
        l0[sc] = l1[sc];
        l1[sc] = l2[sc];
        l2[sc] = x;
        for (i, row) in self.window.iter_mut().enumerate() {
            row[0] = row[1];
            row[1] = row[2];
            row[2] = self.line_buffers[i][sc];
        }
        self.cycle_count += 1;
    }

    /// Streams `p` through the engine and returns its interior result.
    pub fn run(
        &mut self,
        p: &PaddedSubgrid<S>,
        s: &Stencil3x3<S>,
    ) -> Result<StencilRun<S>, DataflowError> {
        let (rows, cols) = (p.rows, p.cols);
        if rows < 3 || cols < 3 || p.data.len() != rows * cols || cols != self.width {
            return Err(DataflowError::PaddedShape {
                rows,
                cols,
                len: p.data.len(),
            });
        }
        let zero = S::zero(p.data[0].format());
        let (ir, ic) = (rows - 2, cols - 2);
        let mut out = vec![zero; ir * ic];
        let t = p.traversal;
        let start = self.cycle_count;
        for (k, x) in p.stream().enumerate() {
            let (sr, sc) = (k / cols, k % cols);
            self.push(sc, x);
            if sr >= 2 && sc >= 2 {
                let w = &self.window;
                let v = s.apply_at(zero, |di, dj| {
                    let a = if t.flip_rows { -di } else { di };
                    let b = if t.flip_cols { -dj } else { dj };
                    w[(a + 1) as usize][(b + 1) as usize]
                });
                // Window centre sits one row and one column behind the input.
                let (r, c) = Traversal::position(t, (sr - 1) * cols + sc - 1, rows, cols);
                out[(r - 1) * ic + (c - 1)] = v;
            }
        }
        self.cycle_count += PIPELINE_DEPTH;
        Ok(StencilRun {
            fragment: Fragment {
                owner: p.owner,
                rows: ir,
                cols: ic,
                data: out,
            },
            cycles: self.cycle_count - start,
            first_output_cycle: Self::first_output_for(ic),
        })
    }
}

/// One-shot helper: a fresh engine sized for `p`.
pub fn run_stencil_stream<S: Scalar>(
    p: &PaddedSubgrid<S>,
    s: &Stencil3x3<S>,
) -> Result<StencilRun<S>, DataflowError> {
    let fmt = p
        .data
        .first()
        .map(|v| v.format())
        .ok_or(DataflowError::PaddedShape {
            rows: p.rows,
            cols: p.cols,
            len: 0,
        })?;
    LineBufferEngine::new(p.cols, fmt).run(p, s)
}
